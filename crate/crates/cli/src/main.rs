use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use linpole_core::evalgal::{
    apply_transform, check_factorization, compose_transforms, generators_of, galois_from_evaluator, invert_transform,
    Combo, Correction, EvalValue, Evaluator, GaloisTransform, IterEvaluator, MsEvaluator, ZetaEvaluator,
};
use linpole_core::exactlin::{InnerProduct, LinearForm, Subspace};
use linpole_core::fracmap::{
    expand_product, flatten_forest, phi, word_of_fraction, Forest, FractionCombo, LMap,
};
use linpole_core::germ::{
    d_residue, decompose, dependence, germ_mul, is_local_pair, locality_mul, p_residue, project_plus, Decomposition,
    RationalGerm,
};
use linpole_core::mzv::Ball;
use linpole_core::rational::{parse_rational, rational_to_string, Rational};
use linpole_core::shuffle::{cfl, locality_cfl, locality_lyndon_generators, lyndon_rewrite, shuffle, Alphabet, Letter, Word};
use linpole_core::{parse_combo, parse_germ, parse_spec, parse_word, render_combo, Error};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "linpole", version, about = "Meromorphic germs with linear poles")]
struct Cli {
    /// JSON file `{"gram": [["p/q", ...], ...]}` giving the inner product.
    #[arg(long, global = true)]
    gram: Option<PathBuf>,
    /// Decimal digits for multiple zeta values.
    #[arg(long, global = true, default_value_t = 30)]
    precision: u32,
    /// Largest variable count the iterated evaluator accepts.
    #[arg(long, global = true, default_value_t = linpole_core::evalgal::DEFAULT_PERM_CAP)]
    perm_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalKind {
    Ms,
    Iter,
    Zeta,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidueKind {
    P,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum Locality {
    Strict,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Letters {
    Chen,
    WeakChen,
    Speer,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonical polar decomposition.
    Decompose { germ: String },
    /// Holomorphic part of the decomposition.
    PiPlus { germ: String },
    /// Generalized evaluator applied to a germ or a Chen combination.
    Eval {
        #[arg(long, value_enum, default_value_t = EvalKind::Ms)]
        evaluator: EvalKind,
        /// Evaluation variables for `iter`, e.g. `1,2`.
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<u32>>,
        expr: String,
    },
    /// Top p-order or top dimension residue.
    Residue {
        #[arg(long, value_enum, default_value_t = ResidueKind::P)]
        kind: ResidueKind,
        germ: String,
    },
    /// Dependence subspace.
    Dep { germ: String },
    /// Whether two germs are orthogonal.
    Orth { f: String, g: String },
    /// Product of two germs.
    Mul {
        #[arg(long, value_enum, default_value_t = Locality::Strict)]
        locality: Locality,
        f: String,
        g: String,
    },
    /// Shuffle product of two words.
    Shuffle { w: String, v: String },
    /// Lyndon factorization, rewriting and generators.
    Lyndon {
        #[command(subcommand)]
        op: LyndonCmd,
    },
    /// Fraction of a word.
    Phi {
        #[arg(long, value_enum, default_value_t = Letters::Chen)]
        letters: Letters,
        word: String,
    },
    /// Word of a fraction spec.
    Unphi {
        #[arg(long, value_enum, default_value_t = Letters::Chen)]
        letters: Letters,
        spec: String,
    },
    /// Product of two local fraction specs as a combination of specs.
    Expand {
        #[arg(long, value_enum, default_value_t = Letters::Chen)]
        letters: Letters,
        a: String,
        b: String,
    },
    /// Speer fractions of a rooted forest given as JSON.
    Flatten { forest: String },
    /// Shift transforms between evaluators.
    Galois {
        #[command(subcommand)]
        op: GaloisCmd,
    },
}

#[derive(Subcommand)]
enum LyndonCmd {
    /// Lyndon factorization; `--local` splits off trailing `x0` letters.
    Factor {
        #[arg(long)]
        local: bool,
        #[arg(long, value_enum, default_value_t = Letters::Chen)]
        letters: Letters,
        word: String,
    },
    /// The word as a polynomial in Lyndon words.
    Rewrite {
        #[arg(long, value_enum, default_value_t = Letters::Chen)]
        letters: Letters,
        word: String,
    },
    /// Locality Lyndon words on `x0` and the given letters.
    Generators {
        #[arg(long, value_delimiter = ',', required = true)]
        letters: Vec<u32>,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
}

#[derive(Subcommand)]
enum GaloisCmd {
    /// Shift transform `s ↦ s + e(s)` on the generators of the combinations.
    Derive {
        #[arg(long, value_enum, default_value_t = EvalKind::Zeta)]
        evaluator: EvalKind,
        #[arg(required = true)]
        combos: Vec<String>,
    },
    /// Applies a transform file to a combination.
    Apply {
        #[arg(long)]
        transform: String,
        combo: String,
    },
    /// Transform acting as the first after the second.
    Compose { first: String, second: String },
    /// Inverse of a transform file.
    Invert { transform: String },
    /// Compares `e(x)` with minimal subtraction of the transformed `x`.
    Check {
        #[arg(long, value_enum, default_value_t = EvalKind::Zeta)]
        evaluator: EvalKind,
        /// Transform file; derived from the evaluator when absent.
        #[arg(long)]
        transform: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(required = true)]
        combos: Vec<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Parse(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse() {
            Failure::Parse(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

type Res<T> = Result<T, Failure>;

/// Text and JSON renderings of one result.
struct Output {
    text: String,
    json: Value,
}

fn read_arg(s: &str) -> Res<String> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|e| Failure::Domain(format!("stdin: {e}")))?;
        Ok(buf.trim().to_string())
    } else {
        Ok(s.to_string())
    }
}

fn read_file(path: &str) -> Res<String> {
    if path == "-" {
        return read_arg(path);
    }
    std::fs::read_to_string(Path::new(path)).map_err(|e| Failure::Domain(format!("{path}: {e}")))
}

fn read_json(path: &str) -> Res<Value> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Failure::Parse(format!("{path}: {e}")))
}

fn germ_arg(s: &str) -> Res<RationalGerm> {
    Ok(parse_germ(&read_arg(s)?)?)
}

fn load_gram(path: &Path) -> Res<InnerProduct> {
    let v = read_json(&path.to_string_lossy())?;
    let rows = v
        .get("gram")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::Parse("gram file needs a \"gram\" array".into()))?;
    let gram = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Failure::Parse("gram rows must be arrays".into()))?
                .iter()
                .map(|x| {
                    let s = match x {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        _ => return Err(Failure::Parse("gram entries must be rationals".into())),
                    };
                    parse_rational(&s).map_err(Failure::Parse)
                })
                .collect::<Res<Vec<Rational>>>()
        })
        .collect::<Res<Vec<_>>>()?;
    Ok(InnerProduct::from_gram(gram)?)
}

fn lmap(letters: Letters) -> LMap {
    match letters {
        Letters::Chen => LMap::chen(),
        Letters::WeakChen => LMap::weak_chen(),
        Letters::Speer => LMap::speer(),
    }
}

fn alphabet(letters: Letters) -> Alphabet {
    match letters {
        Letters::Speer => Alphabet::speer(),
        _ => Alphabet::chen(),
    }
}

fn subspace_json(s: &Subspace) -> Value {
    json!(s.basis().iter().map(LinearForm::to_string).collect::<Vec<_>>())
}

fn decomposition_out(d: &Decomposition) -> Output {
    let mut lines = Vec::new();
    let mut terms = Vec::new();
    for t in &d.terms {
        let den: Vec<String> = t
            .den
            .factors()
            .iter()
            .map(|p| if p.exp == 1 { format!("({})", p.form) } else { format!("({})^{}", p.form, p.exp) })
            .collect();
        lines.push(format!("({}) / {}", t.num, den.join("*")));
        terms.push(json!({
            "numerator": t.num.to_string(),
            "denominator": t.den.factors().iter().map(|p| json!({"form": p.form.to_string(), "exp": p.exp})).collect::<Vec<_>>(),
            "p_order": t.p_order(),
            "supporting_space": subspace_json(&t.supporting_space()),
        }));
    }
    lines.push(format!("holomorphic: {}", d.holo));
    Output { text: lines.join("\n"), json: json!({"terms": terms, "holomorphic": d.holo.to_string()}) }
}

fn germ_out(g: &RationalGerm) -> Output {
    Output { text: g.to_string(), json: json!({"germ": g.to_string()}) }
}

fn ball_error(b: &Ball) -> String {
    format!("{:e}", b.rad_f64())
}

fn eval_out(v: &EvalValue, evaluator: &str, digits: usize) -> Output {
    let (value, bound) = match v {
        EvalValue::Exact(r) => (rational_to_string(r), "0".to_string()),
        EvalValue::Approx(b) => (b.to_decimal(digits), ball_error(b)),
    };
    let text = if bound == "0" { value.clone() } else { format!("{value} ± {bound}") };
    Output { text, json: json!({"value": value, "error_bound": bound, "evaluator": evaluator}) }
}

fn word_polynomial_out<'a, I: Iterator<Item = (&'a Word, &'a Rational)>>(terms: I) -> Output {
    let terms: Vec<(String, String)> = terms.map(|(w, c)| (w.to_string(), rational_to_string(c))).collect();
    let text = if terms.is_empty() {
        "0".to_string()
    } else {
        terms.iter().map(|(w, c)| format!("{c} {w}")).collect::<Vec<_>>().join("\n")
    };
    let json = json!({"terms": terms.iter().map(|(w, c)| json!({"word": w, "coeff": c})).collect::<Vec<_>>()});
    Output { text, json }
}

fn fraction_combo_out(c: &FractionCombo) -> Output {
    let text = if c.is_empty() {
        "0".to_string()
    } else {
        c.iter().map(|(s, x)| format!("{} {s}", rational_to_string(x))).collect::<Vec<_>>().join("\n")
    };
    let json = json!({"terms": c.iter().map(|(s, x)| json!({"spec": s.to_string(), "coeff": rational_to_string(x)})).collect::<Vec<_>>()});
    Output { text, json }
}

fn evaluator(kind: EvalKind, cli: &Cli, q: &InnerProduct, vars: Option<Vec<u32>>) -> Box<dyn Evaluator> {
    match kind {
        EvalKind::Ms => Box::new(MsEvaluator { q: q.clone() }),
        EvalKind::Iter => Box::new(IterEvaluator { vars, cap: cli.perm_cap }),
        EvalKind::Zeta => Box::new(ZetaEvaluator { precision: cli.precision }),
    }
}

fn value_json(v: &EvalValue, digits: usize) -> Value {
    let (value, bound) = match v {
        EvalValue::Exact(r) => (rational_to_string(r), "0".to_string()),
        EvalValue::Approx(b) => (b.to_decimal(digits), ball_error(b)),
    };
    json!({"value": value, "error_bound": bound})
}

/// `"-1.25"` as an exact rational.
fn parse_decimal(s: &str) -> Res<Rational> {
    let s = s.trim();
    if !s.contains('.') && !s.contains(['e', 'E']) {
        return parse_rational(s).map_err(Failure::Parse);
    }
    let bad = || Failure::Parse(format!("invalid decimal '{s}'"));
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{int_part}{frac_part}");
    let shift = exp - frac_part.len() as i32;
    let text = if shift >= 0 {
        format!("{digits}{}", "0".repeat(shift as usize))
    } else {
        format!("{digits}/1{}", "0".repeat((-shift) as usize))
    };
    parse_rational(&text).map_err(|_| bad())
}

fn value_from_json(v: &Value) -> Res<EvalValue> {
    let field = |k: &str| -> Res<String> {
        match v.get(k) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Number(n)) => Ok(n.to_string()),
            _ => Err(Failure::Parse(format!("missing \"{k}\""))),
        }
    };
    let value = field("value")?;
    let bound = v.get("error_bound").map(|_| field("error_bound")).transpose()?.unwrap_or_else(|| "0".into());
    let rad = parse_decimal(&bound)?;
    if rad == Rational::from_integer(0.into()) && !value.contains(['.', 'e', 'E']) {
        return Ok(EvalValue::Exact(parse_rational(&value).map_err(Failure::Parse)?));
    }
    Ok(EvalValue::Approx(Ball { mid: parse_decimal(&value)?, rad }))
}

fn transform_json(t: &GaloisTransform, digits: usize) -> Value {
    json!({"shifts": t.map.iter().map(|(g, c)| {
        let mut v = value_json(&c.constant, digits);
        v["generator"] = json!(g.to_string());
        v
    }).collect::<Vec<_>>()})
}

fn transform_out(t: &GaloisTransform, digits: usize) -> Output {
    let text = if t.map.is_empty() {
        "identity".to_string()
    } else {
        t.map.iter().map(|(g, c)| format!("{g} ↦ {g} + {}", eval_out(&c.constant, "", digits).text)).collect::<Vec<_>>().join("\n")
    };
    Output { text, json: transform_json(t, digits) }
}

fn load_transform(path: &str) -> Res<GaloisTransform> {
    let v = read_json(path)?;
    let shifts = v
        .get("shifts")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::Parse(format!("{path}: transform needs a \"shifts\" array")))?;
    let mut map = std::collections::BTreeMap::new();
    for s in shifts {
        let g = s
            .get("generator")
            .and_then(Value::as_str)
            .ok_or_else(|| Failure::Parse(format!("{path}: shift without \"generator\"")))?;
        map.insert(parse_spec(g)?, Correction::shift(value_from_json(s)?));
    }
    Ok(GaloisTransform { map })
}

fn run(cli: &Cli) -> Res<Output> {
    let q = match &cli.gram {
        Some(p) => load_gram(p)?,
        None => InnerProduct::standard(),
    };
    let digits = cli.precision as usize;
    let chen = LMap::chen();
    Ok(match &cli.cmd {
        Cmd::Decompose { germ } => decomposition_out(&decompose(&germ_arg(germ)?, &q)),
        Cmd::PiPlus { germ } => {
            let h = project_plus(&germ_arg(germ)?, &q);
            Output { text: h.to_string(), json: json!({"holomorphic": h.to_string()}) }
        }
        Cmd::Eval { evaluator: kind, vars, expr } => {
            let text = read_arg(expr)?;
            let e = evaluator(*kind, cli, &q, vars.clone());
            let v = match kind {
                EvalKind::Zeta => e.eval_combo(&parse_combo(&text)?, &chen)?,
                _ if text.contains("f[") => e.eval_combo(&parse_combo(&text)?, &chen)?,
                _ => e.eval_germ(&parse_germ(&text)?)?,
            };
            eval_out(&v, e.name(), digits)
        }
        Cmd::Residue { kind, germ } => {
            let f = germ_arg(germ)?;
            decomposition_out(&match kind {
                ResidueKind::P => p_residue(&f, &q),
                ResidueKind::D => d_residue(&f, &q),
            })
        }
        Cmd::Dep { germ } => {
            let d = dependence(&germ_arg(germ)?, &q);
            Output { text: d.to_string(), json: json!({"basis": subspace_json(&d), "dim": d.dim()}) }
        }
        Cmd::Orth { f, g } => {
            let b = is_local_pair(&germ_arg(f)?, &germ_arg(g)?, &q);
            Output { text: b.to_string(), json: json!({"orthogonal": b}) }
        }
        Cmd::Mul { locality, f, g } => {
            let (f, g) = (germ_arg(f)?, germ_arg(g)?);
            germ_out(&match locality {
                Locality::Strict => locality_mul(&f, &g, &q)?,
                Locality::Raw => germ_mul(&f, &g),
            })
        }
        Cmd::Shuffle { w, v } => {
            let p = shuffle(&parse_word(&read_arg(w)?)?, &parse_word(&read_arg(v)?)?);
            word_polynomial_out(p.terms())
        }
        Cmd::Lyndon { op } => match op {
            LyndonCmd::Factor { local, letters, word } => {
                let w = parse_word(&read_arg(word)?)?;
                let a = alphabet(*letters);
                let (factors, r): (Vec<Word>, usize) = if *local {
                    locality_cfl(&w, &a)?
                } else {
                    (cfl(&w, &a)?.into_iter().flat_map(|(f, c)| std::iter::repeat_n(f, c)).collect(), 0)
                };
                let names: Vec<String> = factors.iter().map(Word::to_string).collect();
                let mut text = names.join(" ");
                if r > 0 {
                    text = format!("{text} | x0^{r}").trim_start().to_string();
                }
                Output { text, json: json!({"factors": names, "trailing_x0": r}) }
            }
            LyndonCmd::Rewrite { letters, word } => {
                let p = lyndon_rewrite(&parse_word(&read_arg(word)?)?, &alphabet(*letters))?;
                let terms: Vec<(String, String)> = p.terms().map(|(m, c)| (m.to_string(), rational_to_string(c))).collect();
                Output {
                    text: p.to_string(),
                    json: json!({"terms": terms.iter().map(|(m, c)| json!({"monomial": m, "coeff": c})).collect::<Vec<_>>()}),
                }
            }
            LyndonCmd::Generators { letters, max_len } => {
                let ls: Vec<Letter> = letters.iter().map(|&n| Letter::Index(n)).collect();
                let gens = locality_lyndon_generators(&Alphabet::chen(), &ls, *max_len);
                let names: Vec<String> = gens.iter().map(Word::to_string).collect();
                Output { text: names.join("\n"), json: json!({"generators": names}) }
            }
        },
        Cmd::Phi { letters, word } => germ_out(&phi(&parse_word(&read_arg(word)?)?, &lmap(*letters))?),
        Cmd::Unphi { letters, spec } => {
            let w = word_of_fraction(&parse_spec(&read_arg(spec)?)?, &lmap(*letters))?;
            Output { text: w.to_string(), json: json!({"word": w.to_string()}) }
        }
        Cmd::Expand { letters, a, b } => {
            let l = lmap(*letters);
            fraction_combo_out(&expand_product(&parse_spec(&read_arg(a)?)?, &parse_spec(&read_arg(b)?)?, &l)?)
        }
        Cmd::Flatten { forest } => {
            let text = read_file(forest)?;
            let f: Forest = serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{forest}: {e}")))?;
            fraction_combo_out(&flatten_forest(&Forest::new(f.roots)?)?)
        }
        Cmd::Galois { op } => match op {
            GaloisCmd::Derive { evaluator: kind, combos } => {
                let xs = combos.iter().map(|c| Ok(parse_combo(&read_arg(c)?)?)).collect::<Res<Vec<Combo>>>()?;
                let e = evaluator(*kind, cli, &q, None);
                let t = galois_from_evaluator(e.as_ref(), &generators_of(&xs, &chen)?, &chen)?;
                transform_out(&t, digits)
            }
            GaloisCmd::Apply { transform, combo } => {
                let t = load_transform(transform)?.validated(&chen)?;
                let y = apply_transform(&t, &parse_combo(&read_arg(combo)?)?, &chen)?;
                let s = render_combo(&y);
                Output { text: s.clone(), json: json!({"combination": s}) }
            }
            GaloisCmd::Compose { first, second } => {
                transform_out(&compose_transforms(&load_transform(first)?, &load_transform(second)?)?, digits)
            }
            GaloisCmd::Invert { transform } => transform_out(&invert_transform(&load_transform(transform)?)?, digits),
            GaloisCmd::Check { evaluator: kind, transform, tol, combos } => {
                let xs = combos.iter().map(|c| Ok(parse_combo(&read_arg(c)?)?)).collect::<Res<Vec<Combo>>>()?;
                let e = evaluator(*kind, cli, &q, None);
                let t = match transform {
                    Some(p) => load_transform(p)?.validated(&chen)?,
                    None => galois_from_evaluator(e.as_ref(), &generators_of(&xs, &chen)?, &chen)?,
                };
                let report = check_factorization(e.as_ref(), &t, &xs, &chen, *tol);
                let cases: Vec<Value> = xs
                    .iter()
                    .zip(&report.cases)
                    .map(|(x, c)| {
                        json!({
                            "combination": render_combo(x),
                            "expected": value_json(&c.expected, digits),
                            "factored": value_json(&c.factored, digits),
                            "passed": c.passed,
                        })
                    })
                    .collect();
                let mut text: Vec<String> = xs
                    .iter()
                    .zip(&report.cases)
                    .map(|(x, c)| {
                        format!(
                            "{} {}: {} vs {}",
                            if c.passed { "ok  " } else { "FAIL" },
                            render_combo(x),
                            eval_out(&c.expected, "", digits).text,
                            eval_out(&c.factored, "", digits).text
                        )
                    })
                    .collect();
                text.push(format!("{} passed, {} failed", report.passed(), report.failed()));
                if !report.all_passed() {
                    return Err(Failure::Domain(text.join("\n")));
                }
                Output {
                    text: text.join("\n"),
                    json: json!({"cases": cases, "passed": report.passed(), "failed": report.failed(), "max_deviation": report.max_deviation()}),
                }
            }
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json")),
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
