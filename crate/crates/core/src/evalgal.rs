//! Generalized evaluators (minimal subtraction, iterated regularized
//! evaluation, the zeta character on Chen fractions) and the shift
//! transforms on Lyndon generators relating them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exactlin::{orthogonal, span, InnerProduct, LinearForm, Subspace, Var};
use crate::fracmap::{lyndon_decompose, specs_local, FractionSpec, LMap, LMapKind, SpecPolynomial};
use crate::germ::{dependence, ms_eval, poly_dependence, RationalGerm};
use crate::mzv::{mzv_numeric, Ball, MzvIndex};
use crate::polynomial::Polynomial;
use crate::rational::{binomial, factorial, rational_to_string, Rational};
use crate::shuffle::is_lyndon;
use crate::Error;

pub const DEFAULT_PERM_CAP: usize = 8;

/// Exact rational or a ball around a real.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalValue {
    Exact(Rational),
    Approx(Ball),
}

impl EvalValue {
    pub fn zero() -> Self {
        Self::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Self::Exact(Rational::one())
    }

    pub fn to_ball(&self) -> Ball {
        match self {
            Self::Exact(r) => Ball::exact(r.clone()),
            Self::Approx(b) => b.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Approx(_) => None,
        }
    }

    /// Zero, or a ball of radius zero around zero.
    pub fn is_exact_zero(&self) -> bool {
        match self {
            Self::Exact(r) => r.is_zero(),
            Self::Approx(b) => b.mid.is_zero() && b.rad.is_zero(),
        }
    }

    pub fn mid(&self) -> Rational {
        match self {
            Self::Exact(r) => r.clone(),
            Self::Approx(b) => b.mid.clone(),
        }
    }

    pub fn error_bound(&self) -> Rational {
        match self {
            Self::Exact(_) => Rational::zero(),
            Self::Approx(b) => b.rad.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    pub fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (Self::Exact(a), Self::Exact(b)) => Self::Exact(a + b),
            _ => Self::Approx(self.to_ball().add(&o.to_ball())),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (Self::Exact(a), Self::Exact(b)) => Self::Exact(a * b),
            _ => Self::Approx(self.to_ball().mul(&o.to_ball())),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        match self {
            Self::Exact(a) => Self::Exact(a * c),
            Self::Approx(b) => Self::Approx(b.scale(c)),
        }
    }

    /// Value as `p/q` when exact, otherwise a decimal string.
    pub fn value_string(&self, digits: usize) -> String {
        match self {
            Self::Exact(r) => rational_to_string(r),
            Self::Approx(b) => b.to_decimal(digits),
        }
    }
}

impl fmt::Display for EvalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{}", rational_to_string(r)),
            Self::Approx(b) => write!(f, "{b}"),
        }
    }
}

/// `coeff · holo · Π fractions`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComboTerm {
    pub coeff: EvalValue,
    pub holo: Polynomial,
    pub fractions: Vec<FractionSpec>,
}

impl ComboTerm {
    pub fn new(coeff: Rational, holo: Polynomial, fractions: Vec<FractionSpec>) -> Self {
        Self { coeff: EvalValue::Exact(coeff), holo, fractions }
    }

    pub fn fraction_germ(&self, l: &LMap) -> Result<RationalGerm, Error> {
        self.fractions.iter().try_fold(RationalGerm::one(), |acc, s| Ok(acc.mul(&s.to_germ(l)?)))
    }

    /// Fractions pairwise local and the coefficient orthogonal to them.
    pub fn check_local(&self, l: &LMap) -> Result<(), Error> {
        for (i, a) in self.fractions.iter().enumerate() {
            if l.requires_locality() && !a.is_local(l) {
                return Err(Error::NotLocalSpec(a.to_string()));
            }
            for b in &self.fractions[i + 1..] {
                if !specs_local(a, b, l)? {
                    return Err(Error::NotLocal(format!("{a} and {b}")));
                }
            }
        }
        let forms: Vec<LinearForm> =
            self.fractions.iter().flat_map(|s| s.letters.iter().map(|u| l.form(u))).collect::<Result<_, _>>()?;
        if !orthogonal(l.inner_product(), &poly_dependence(&self.holo), &span(forms.iter())) {
            return Err(Error::NotLocal(format!("coefficient {} meets the fraction directions", self.holo)));
        }
        Ok(())
    }
}

/// Linear combination of locality monomials with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Combo {
    pub terms: Vec<ComboTerm>,
}

impl Combo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn fraction(s: FractionSpec) -> Self {
        Self { terms: vec![ComboTerm::new(Rational::one(), Polynomial::one(), vec![s])] }
    }

    pub fn product(fractions: Vec<FractionSpec>) -> Self {
        Self { terms: vec![ComboTerm::new(Rational::one(), Polynomial::one(), fractions)] }
    }

    pub fn holomorphic(h: Polynomial) -> Self {
        Self { terms: vec![ComboTerm::new(Rational::one(), h, Vec::new())] }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms }.merged()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| ComboTerm { coeff: t.coeff.scale(c), ..t.clone() })
                .collect(),
        }
        .merged()
    }

    /// Termwise product; locality is not checked.
    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &o.terms {
                let mut fractions = a.fractions.clone();
                fractions.extend(b.fractions.iter().cloned());
                terms.push(ComboTerm { coeff: a.coeff.mul(&b.coeff), holo: a.holo.mul(&b.holo), fractions });
            }
        }
        Self { terms }.merged()
    }

    /// Collects equal monomials and drops exact zeros.
    pub fn merged(&self) -> Self {
        let mut groups: BTreeMap<Vec<FractionSpec>, Vec<(Polynomial, EvalValue)>> = BTreeMap::new();
        for t in &self.terms {
            let mut key = t.fractions.clone();
            key.sort();
            let slot = groups.entry(key).or_default();
            match slot.iter_mut().find(|(h, _)| *h == t.holo) {
                Some((_, c)) => *c = c.add(&t.coeff),
                None => slot.push((t.holo.clone(), t.coeff.clone())),
            }
        }
        let terms = groups
            .into_iter()
            .flat_map(|(fractions, mut hs)| {
                hs.sort_by(|(a, _), (b, _)| a.terms().cmp(b.terms()));
                hs.into_iter().filter(|(h, c)| !c.is_exact_zero() && !h.is_zero()).map(move |(holo, coeff)| ComboTerm {
                    coeff,
                    holo,
                    fractions: fractions.clone(),
                })
            })
            .collect();
        Self { terms }
    }

    pub fn is_exact(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.as_exact().is_some())
    }

    pub fn to_germ(&self, l: &LMap) -> Result<RationalGerm, Error> {
        let mut acc = RationalGerm::zero();
        for t in &self.terms {
            let c = t
                .coeff
                .as_exact()
                .ok_or_else(|| Error::EvaluatorDomain("combination with real coefficients".into()))?;
            acc = acc.add(&t.fraction_germ(l)?.mul_poly(&t.holo).scale(c));
        }
        Ok(acc)
    }

    pub fn check_local(&self, l: &LMap) -> Result<(), Error> {
        self.terms.iter().try_for_each(|t| t.check_local(l))
    }
}

/// Laurent coefficient of `z_i^0`, over the rational functions in the
/// remaining variables.
pub fn ev_reg_single(f: &RationalGerm, i: Var) -> RationalGerm {
    let mut pure_order = 0u32;
    let mut pure_scale = Rational::one();
    let mut others: Vec<(Rational, LinearForm, u32)> = Vec::new();
    for p in f.denominator() {
        let a = p.form.coeff(i);
        let rest = p.form.sub(&LinearForm::var(i).scale(&a));
        if rest.is_zero() {
            pure_order += p.exp;
            pure_scale *= num_traits::pow(a, p.exp as usize);
        } else {
            others.push((a, rest, p.exp));
        }
    }
    let m = pure_order as usize;
    let mut series: Vec<RationalGerm> = vec![RationalGerm::zero(); m + 1];
    series[0] = RationalGerm::one();
    for (a, r, e) in &others {
        let factor: Vec<RationalGerm> = (0..=m)
            .map(|n| {
                let c = Rational::from_integer(binomial(e + n as u32 - 1, n as u32))
                    * num_traits::pow(-a.clone(), n);
                RationalGerm::new(Polynomial::constant(c), [(r.clone(), e + n as u32)]).expect("nonzero form")
            })
            .collect();
        let mut next = vec![RationalGerm::zero(); m + 1];
        for (p, sp) in series.iter().enumerate() {
            if sp.is_zero() {
                continue;
            }
            for (q, fq) in factor.iter().enumerate().take(m + 1 - p) {
                next[p + q] = next[p + q].add(&sp.mul(fq));
            }
        }
        series = next;
    }
    let coeffs = f.numerator().coefficients_in(i);
    let mut acc = RationalGerm::zero();
    for (k, nk) in coeffs.iter().enumerate().take(m + 1) {
        if !nk.is_zero() {
            acc = acc.add(&series[m - k].mul_poly(nk));
        }
    }
    acc.scale(&(Rational::one() / pure_scale))
}

fn constant_value(mut g: RationalGerm) -> Rational {
    while !g.is_polynomial() {
        let v = *g.vars().iter().next().expect("non-polynomial germ has variables");
        g = ev_reg_single(&g, v);
    }
    g.numerator().constant_term()
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..k).collect();
    let mut out = vec![p.clone()];
    while let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
    out
}

/// Average over all orders of iterated [`ev_reg_single`], the innermost
/// step taken in the last variable of each order.
pub fn iter_eval(f: &RationalGerm, vars: &[Var], cap: usize) -> Result<Rational, Error> {
    if vars.len() > cap {
        return Err(Error::TooManyVariables { got: vars.len(), cap });
    }
    let allowed: BTreeSet<Var> = vars.iter().copied().collect();
    let dep = dependence(f, &InnerProduct::standard());
    if dep.basis().iter().any(|b| !b.support().is_subset(&allowed)) {
        return Err(Error::DependenceEscapesVars);
    }
    let perms = all_permutations(vars.len());
    let values: Vec<Rational> = perms
        .par_iter()
        .map(|sigma| {
            let g = sigma.iter().rev().fold(f.clone(), |g, &idx| ev_reg_single(&g, vars[idx]));
            constant_value(g)
        })
        .collect();
    let total = values.into_iter().fold(Rational::zero(), |acc, v| acc + v);
    Ok(total / Rational::from_integer(factorial(vars.len() as u32)))
}

/// Value of a Lyndon Chen generator under the zeta character.
pub fn zeta_generator(gen: &FractionSpec, precision: u32) -> Ball {
    let word = gen.word();
    if word.letters().first().is_some_and(|l| l.is_x0()) {
        let mut s = gen.exps.clone();
        s.reverse();
        mzv_numeric(&MzvIndex::new(s).expect("word starts with x0"), precision)
    } else {
        Ball::zero()
    }
}

fn lyndon_expand_term(t: &ComboTerm, l: &LMap) -> Result<SpecPolynomial, Error> {
    t.fractions.iter().try_fold(SpecPolynomial::one(), |acc, s| {
        Ok(acc.mul(&lyndon_decompose(&[(s.clone(), Rational::one())], l)?))
    })
}

/// Zeta character on an explicit combination of Chen fraction products.
pub fn zeta_eval(x: &Combo, l: &LMap, precision: u32) -> Result<Ball, Error> {
    if !matches!(l.kind(), LMapKind::Chen | LMapKind::WeakChen) {
        return Err(Error::NotChen(format!("{:?} letters", l.kind())));
    }
    x.check_local(l)?;
    let guard = precision + 4;
    let mut acc = Ball::zero();
    for t in &x.terms {
        let h0 = t.holo.constant_term();
        if h0.is_zero() {
            continue;
        }
        let mut val = Ball::zero();
        for (m, c) in &lyndon_expand_term(t, l)?.terms {
            let mut prod = Ball::exact(c.clone());
            for (g, e) in &m.0 {
                let v = zeta_generator(g, guard);
                for _ in 0..*e {
                    prod = prod.mul(&v);
                }
            }
            val = val.add(&prod);
        }
        acc = acc.add(&t.coeff.to_ball().mul(&val.scale(&h0)));
    }
    Ok(acc)
}

/// A renormalization map on germs or on explicit Chen combinations.
pub trait Evaluator: Send + Sync {
    fn name(&self) -> &'static str;

    fn eval_germ(&self, f: &RationalGerm) -> Result<EvalValue, Error>;

    fn eval_combo(&self, x: &Combo, l: &LMap) -> Result<EvalValue, Error> {
        self.eval_germ(&x.to_germ(l)?)
    }
}

#[derive(Clone, Debug)]
pub struct MsEvaluator {
    pub q: InnerProduct,
}

impl Default for MsEvaluator {
    fn default() -> Self {
        Self { q: InnerProduct::standard() }
    }
}

impl Evaluator for MsEvaluator {
    fn name(&self) -> &'static str {
        "ms"
    }

    fn eval_germ(&self, f: &RationalGerm) -> Result<EvalValue, Error> {
        Ok(EvalValue::Exact(ms_eval(f, &self.q)))
    }

    /// Termwise, so real coefficients are allowed.
    fn eval_combo(&self, x: &Combo, l: &LMap) -> Result<EvalValue, Error> {
        let mut acc = EvalValue::zero();
        for t in &x.terms {
            let g = t.fraction_germ(l)?.mul_poly(&t.holo);
            acc = acc.add(&t.coeff.mul(&EvalValue::Exact(ms_eval(&g, &self.q))));
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub struct IterEvaluator {
    /// Evaluation variables; all variables of the input when `None`.
    pub vars: Option<Vec<Var>>,
    pub cap: usize,
}

impl Default for IterEvaluator {
    fn default() -> Self {
        Self { vars: None, cap: DEFAULT_PERM_CAP }
    }
}

impl Evaluator for IterEvaluator {
    fn name(&self) -> &'static str {
        "iter"
    }

    fn eval_germ(&self, f: &RationalGerm) -> Result<EvalValue, Error> {
        let vars = self.vars.clone().unwrap_or_else(|| f.vars().into_iter().collect());
        Ok(EvalValue::Exact(iter_eval(f, &vars, self.cap)?))
    }
}

#[derive(Clone, Debug)]
pub struct ZetaEvaluator {
    pub precision: u32,
}

impl Default for ZetaEvaluator {
    fn default() -> Self {
        Self { precision: 30 }
    }
}

impl Evaluator for ZetaEvaluator {
    fn name(&self) -> &'static str {
        "zeta"
    }

    fn eval_germ(&self, f: &RationalGerm) -> Result<EvalValue, Error> {
        if f.is_polynomial() {
            return Ok(EvalValue::Exact(f.numerator().constant_term()));
        }
        Err(Error::EvaluatorDomain("zeta needs an explicit Chen combination".into()))
    }

    fn eval_combo(&self, x: &Combo, l: &LMap) -> Result<EvalValue, Error> {
        Ok(EvalValue::Approx(zeta_eval(x, l, self.precision)?))
    }
}

/// `s ↦ s + constant + Σ a_i S_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub constant: EvalValue,
    pub lower: Vec<(FractionSpec, Rational)>,
}

impl Correction {
    pub fn shift(c: EvalValue) -> Self {
        Self { constant: c, lower: Vec::new() }
    }

    pub fn is_shift(&self) -> bool {
        self.lower.is_empty()
    }
}

/// Triangular substitution on Lyndon generators; generators not listed are fixed.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaloisTransform {
    pub map: BTreeMap<FractionSpec, Correction>,
}

fn spec_space(s: &FractionSpec, l: &LMap) -> Result<Subspace, Error> {
    let forms: Vec<LinearForm> = s.letters.iter().map(|u| l.form(u)).collect::<Result<_, _>>()?;
    Ok(span(forms.iter()))
}

impl GaloisTransform {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn shifts<I: IntoIterator<Item = (FractionSpec, EvalValue)>>(shifts: I) -> Self {
        Self { map: shifts.into_iter().map(|(s, c)| (s, Correction::shift(c))).collect() }
    }

    /// Checks generators are Lyndon and corrections strictly lower in
    /// p-order and supporting space.
    pub fn validated(self, l: &LMap) -> Result<Self, Error> {
        for (g, c) in &self.map {
            if !is_lyndon(&g.word(), l.alphabet())? {
                return Err(Error::InvalidTransform(format!("{g} is not a Lyndon generator")));
            }
            let gs = spec_space(g, l)?;
            for (s, _) in &c.lower {
                let ss = spec_space(s, l)?;
                if s.weight() >= g.weight() || !ss.is_subspace_of(&gs) || ss.dim() >= gs.dim() {
                    return Err(Error::InvalidTransform(format!("{s} is not below {g}")));
                }
            }
        }
        Ok(self)
    }

    pub fn is_identity(&self) -> bool {
        self.map.values().all(|c| c.is_shift() && c.constant.is_exact_zero())
    }

    pub fn is_shift(&self) -> bool {
        self.map.values().all(Correction::is_shift)
    }

    pub fn generators(&self) -> BTreeSet<FractionSpec> {
        self.map.keys().cloned().collect()
    }

    pub fn shift_of(&self, g: &FractionSpec) -> Option<&EvalValue> {
        self.map.get(g).map(|c| &c.constant)
    }
}

/// Shift transform `s_α ↦ s_α + e(s_α)`.
pub fn galois_from_evaluator(
    e: &dyn Evaluator,
    generators: &[FractionSpec],
    l: &LMap,
) -> Result<GaloisTransform, Error> {
    let mut map = BTreeMap::new();
    for g in generators {
        let g = g.normalized(l);
        if !is_lyndon(&g.word(), l.alphabet())? {
            return Err(Error::InvalidTransform(format!("{g} is not a Lyndon generator")));
        }
        let c = e
            .eval_combo(&Combo::fraction(g.clone()), l)
            .map_err(|err| Error::EvaluatorDomain(format!("{g}: {err}")))?;
        map.insert(g, Correction::shift(c));
    }
    Ok(GaloisTransform { map })
}

/// Lyndon generators occurring in the given combinations.
pub fn generators_of(xs: &[Combo], l: &LMap) -> Result<Vec<FractionSpec>, Error> {
    let mut out = BTreeSet::new();
    for x in xs {
        for t in &x.terms {
            for m in lyndon_expand_term(t, l)?.terms.keys() {
                out.extend(m.0.iter().map(|(g, _)| g.clone()));
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Rewrites each monomial in Lyndon generators and substitutes the
/// corrections; coefficients are left alone.
pub fn apply_transform(t: &GaloisTransform, x: &Combo, l: &LMap) -> Result<Combo, Error> {
    x.check_local(l)?;
    let mut terms = Vec::new();
    for term in &x.terms {
        for (m, c) in &lyndon_expand_term(term, l)?.terms {
            let mut partial: Vec<(EvalValue, Vec<FractionSpec>)> = vec![(term.coeff.scale(c), Vec::new())];
            for (g, e) in &m.0 {
                for _ in 0..*e {
                    let mut next = Vec::with_capacity(partial.len() * 2);
                    for (coeff, fr) in &partial {
                        let mut with = fr.clone();
                        with.push(g.clone());
                        next.push((coeff.clone(), with));
                        if let Some(corr) = t.map.get(g) {
                            if !corr.constant.is_exact_zero() {
                                next.push((coeff.mul(&corr.constant), fr.clone()));
                            }
                            for (s, a) in &corr.lower {
                                let mut with = fr.clone();
                                with.push(s.clone());
                                next.push((coeff.scale(a), with));
                            }
                        }
                    }
                    partial = next;
                }
            }
            terms.extend(partial.into_iter().map(|(coeff, fractions)| ComboTerm {
                coeff,
                holo: term.holo.clone(),
                fractions,
            }));
        }
    }
    Ok(Combo { terms }.merged())
}

fn require_shift(t: &GaloisTransform) -> Result<(), Error> {
    if t.is_shift() {
        Ok(())
    } else {
        Err(Error::InvalidTransform("only shift transforms compose and invert".into()))
    }
}

/// `compose(t1, t2)` acts as `t1` after `t2`.
pub fn compose_transforms(t1: &GaloisTransform, t2: &GaloisTransform) -> Result<GaloisTransform, Error> {
    require_shift(t1)?;
    require_shift(t2)?;
    if t1.generators() != t2.generators() {
        return Err(Error::IncompatibleGenerators("generator sets differ".into()));
    }
    Ok(GaloisTransform {
        map: t1
            .map
            .iter()
            .map(|(g, c)| (g.clone(), Correction::shift(c.constant.add(&t2.map[g].constant))))
            .collect(),
    })
}

pub fn invert_transform(t: &GaloisTransform) -> Result<GaloisTransform, Error> {
    require_shift(t)?;
    Ok(GaloisTransform {
        map: t.map.iter().map(|(g, c)| (g.clone(), Correction::shift(c.constant.neg()))).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct FactorizationCase {
    pub expected: EvalValue,
    pub factored: EvalValue,
    pub passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct FactorizationReport {
    pub cases: Vec<FactorizationCase>,
}

impl FactorizationReport {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.cases.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn max_deviation(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| (c.expected.mid() - c.factored.mid()).abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

/// Compares `e(x)` with minimal subtraction of the transformed `x`.
/// Exact values must agree exactly; otherwise midpoints within `tol`.
pub fn check_factorization(
    e: &dyn Evaluator,
    t: &GaloisTransform,
    tests: &[Combo],
    l: &LMap,
    tol: f64,
) -> FactorizationReport {
    let ms = MsEvaluator { q: l.inner_product().clone() };
    let tol = Rational::from_float(tol).unwrap_or_else(Rational::zero);
    let cases = tests
        .iter()
        .map(|x| {
            let expected = e.eval_combo(x, l);
            let factored = apply_transform(t, x, l).and_then(|y| ms.eval_combo(&y, l));
            match (expected, factored) {
                (Ok(a), Ok(b)) => {
                    let passed = match (a.as_exact(), b.as_exact()) {
                        (Some(p), Some(q)) => p == q,
                        _ => (a.mid() - b.mid()).abs() <= tol,
                    };
                    FactorizationCase { expected: a, factored: b, passed }
                }
                _ => FactorizationCase { expected: EvalValue::zero(), factored: EvalValue::zero(), passed: false },
            }
        })
        .collect();
    FactorizationReport { cases }
}

/// `h(0)` for holomorphic input, used to state the extension property.
pub fn ev0(p: &Polynomial) -> Rational {
    p.constant_term()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn z(i: Var) -> LinearForm {
        LinearForm::var(i)
    }
    fn pz(i: Var) -> Polynomial {
        Polynomial::var(i)
    }
    fn ratio(num: &LinearForm, den: &LinearForm) -> RationalGerm {
        RationalGerm::new(Polynomial::from_form(num), [(den.clone(), 1)]).unwrap()
    }

    #[test]
    fn ev_reg_single_examples() {
        let ft = ratio(&z(1).sub(&z(2)), &z(1).add(&z(2)));
        assert_eq!(ev_reg_single(&ft, 1), RationalGerm::constant(int(-1)));
        assert_eq!(ev_reg_single(&ratio(&z(1), &z(2)), 1), RationalGerm::zero());
        let g = RationalGerm::pole(&z(1), 1).unwrap().add(&RationalGerm::from_poly(pz(2)));
        assert_eq!(ev_reg_single(&g, 1), RationalGerm::from_poly(pz(2)));
        // 1/(z1 (z1+z2)) = 1/(z1 z2) - 1/z2² + ⋯
        let chen = RationalGerm::new(Polynomial::one(), [(z(1), 1), (z(1).add(&z(2)), 1)]).unwrap();
        assert_eq!(ev_reg_single(&chen, 1), RationalGerm::pole(&z(2), 2).unwrap().neg());
    }

    #[test]
    fn iter_eval_examples() {
        let f = ratio(&z(1), &z(2));
        let g = f.pow(2);
        let ft = ratio(&z(1).sub(&z(2)), &z(1).add(&z(2)));
        let gt = ft.pow(2);
        let vals: Vec<Rational> = [&f, &g, &ft, &gt].iter().map(|x| iter_eval(x, &[1, 2], 8).unwrap()).collect();
        assert_eq!(vals, vec![int(0), int(0), int(0), int(1)]);
        assert_eq!(iter_eval(&ft, &[1], 8), Err(Error::DependenceEscapesVars));
        assert_eq!(iter_eval(&ft, &[1, 2, 3], 2), Err(Error::TooManyVariables { got: 3, cap: 2 }));
    }

    #[test]
    fn iter_eval_is_not_multiplicative() {
        let g1 = RationalGerm::from_poly(Polynomial::from_form(&z(1).sub(&z(2))).pow(2));
        let g2 = RationalGerm::pole(&z(1).add(&z(2)), 2).unwrap();
        let vars = [1, 2];
        assert_eq!(iter_eval(&g1, &vars, 8).unwrap(), int(0));
        assert_eq!(iter_eval(&g2, &vars, 8).unwrap(), int(0));
        assert_eq!(iter_eval(&g1.mul(&g2), &vars, 8).unwrap(), int(1));
        let q = InnerProduct::standard();
        assert_eq!(ms_eval(&g1.mul(&g2), &q), int(0));
    }

    #[test]
    fn permutations_lexicographic() {
        let p = all_permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[1], vec![0, 2, 1]);
        assert_eq!(p[5], vec![2, 1, 0]);
    }

    #[test]
    fn zeta_eval_examples() {
        let l = LMap::chen();
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        let a = FractionSpec::chen(&[2], &[1]);
        let b = FractionSpec::chen(&[2], &[2]);
        assert!((zeta_eval(&Combo::fraction(a.clone()), &l, 20).unwrap().to_f64() - z2).abs() < 1e-12);
        assert_eq!(zeta_eval(&Combo::fraction(FractionSpec::chen(&[1], &[1])), &l, 20).unwrap().to_f64(), 0.0);
        let prod = zeta_eval(&Combo::product(vec![a.clone(), b.clone()]), &l, 20).unwrap();
        assert!((prod.to_f64() - z2 * z2).abs() < 1e-12);
        let expanded = crate::fracmap::expand_product(&a, &b, &l).unwrap();
        let combo = expanded.into_iter().fold(Combo::zero(), |acc, (s, c)| acc.add(&Combo::fraction(s).scale(&c)));
        assert!(zeta_eval(&combo, &l, 20).unwrap().overlaps(&prod));
        assert!(matches!(zeta_eval(&Combo::product(vec![a.clone(), a]), &l, 20), Err(Error::NotLocal(_))));
        assert!(matches!(zeta_eval(&Combo::fraction(b), &LMap::speer(), 20), Err(Error::NotChen(_))));
    }

    #[test]
    fn convergent_chen_fraction_is_its_lattice_sum() {
        // Σ_{m1,m2≥1} 1/(m1 (m1+m2)²) = ζ(2,1) = ζ(3)
        let l = LMap::chen();
        let v = zeta_eval(&Combo::fraction(FractionSpec::chen(&[1, 2], &[1, 2])), &l, 20).unwrap();
        assert!((v.to_f64() - 1.2020569031595942).abs() < 1e-12);
    }

    #[test]
    fn galois_examples() {
        let l = LMap::chen();
        let gens = vec![FractionSpec::chen(&[2], &[1]), FractionSpec::chen(&[1], &[1])];
        let ms = galois_from_evaluator(&MsEvaluator::default(), &gens, &l).unwrap();
        assert!(ms.is_identity());
        let zt = galois_from_evaluator(&ZetaEvaluator { precision: 20 }, &gens, &l).unwrap();
        let c = zt.shift_of(&gens[0]).unwrap().to_f64();
        assert!((c - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert_eq!(zt.shift_of(&gens[1]).unwrap().to_f64(), 0.0);

        let t = GaloisTransform::shifts([(FractionSpec::chen(&[1], &[1]), EvalValue::Exact(rat(3, 2)))]);
        let x = Combo { terms: vec![ComboTerm::new(int(1), pz(2), vec![FractionSpec::chen(&[1], &[1])])] };
        let y = apply_transform(&t, &x, &l).unwrap();
        let expected = x.add(&Combo::holomorphic(pz(2)).scale(&rat(3, 2)));
        assert_eq!(y, expected);

        let inv = invert_transform(&t).unwrap();
        assert_eq!(inv.shift_of(&FractionSpec::chen(&[1], &[1])), Some(&EvalValue::Exact(rat(-3, 2))));
        let id = compose_transforms(&t, &inv).unwrap();
        assert!(id.is_identity());
        assert_eq!(apply_transform(&id, &x, &l).unwrap(), x);
        let twice = compose_transforms(&t, &t).unwrap();
        assert_eq!(twice.shift_of(&FractionSpec::chen(&[1], &[1])), Some(&EvalValue::Exact(int(3))));
        assert!(matches!(compose_transforms(&t, &ms), Err(Error::IncompatibleGenerators(_))));
    }

    #[test]
    fn zeta_transform_factorizes_product() {
        let l = LMap::chen();
        let a = FractionSpec::chen(&[2], &[1]);
        let b = FractionSpec::chen(&[2], &[2]);
        let x = Combo::product(vec![a.clone(), b.clone()]);
        let e = ZetaEvaluator { precision: 20 };
        let t = galois_from_evaluator(&e, &generators_of(std::slice::from_ref(&x), &l).unwrap(), &l).unwrap();
        let y = apply_transform(&t, &x, &l).unwrap();
        assert_eq!(y.terms.len(), 4);
        let report = check_factorization(&e, &t, &[x], &l, 1e-12);
        assert!(report.all_passed());
    }

    #[test]
    fn invalid_corrections_rejected() {
        let l = LMap::chen();
        let g = FractionSpec::chen(&[1], &[1]);
        let bad = GaloisTransform {
            map: [(g.clone(), Correction { constant: EvalValue::zero(), lower: vec![(g.clone(), int(1))] })].into(),
        };
        assert!(matches!(bad.validated(&l), Err(Error::InvalidTransform(_))));
        let not_lyndon = GaloisTransform::shifts([(FractionSpec::chen(&[1, 1], &[1, 2]), EvalValue::zero())]);
        assert!(matches!(not_lyndon.validated(&l), Err(Error::InvalidTransform(_))));
    }
}
