//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use linpole_core::exactlin::{span, InnerProduct, LinearForm, Subspace, Var};
use linpole_core::fracmap::FractionSpec;
use linpole_core::germ::RationalGerm;
use linpole_core::polynomial::{Monomial, Polynomial};
use linpole_core::rational::{int, Rational};
use linpole_core::shuffle::{Letter, Word};
use num_traits::{One, Zero};
use proptest::prelude::*;

pub fn z(i: Var) -> LinearForm {
    LinearForm::var(i)
}

pub fn pz(i: Var) -> Polynomial {
    Polynomial::var(i)
}

pub fn form(coeffs: &[(Var, i64)]) -> LinearForm {
    LinearForm::from_terms(coeffs.iter().map(|&(v, c)| (v, int(c))))
}

pub fn inv(den: &[(LinearForm, u32)]) -> RationalGerm {
    RationalGerm::new(Polynomial::one(), den.iter().cloned()).unwrap()
}

pub fn frac(num: Polynomial, den: &[(LinearForm, u32)]) -> RationalGerm {
    RationalGerm::new(num, den.iter().cloned()).unwrap()
}

pub fn arb_form(nvars: Var) -> impl Strategy<Value = LinearForm> {
    prop::collection::vec(-2i64..=2, nvars as usize)
        .prop_filter("nonzero form", |c| c.iter().any(|x| *x != 0))
        .prop_map(|c| LinearForm::from_terms(c.into_iter().enumerate().map(|(i, x)| (i as Var + 1, int(x)))))
}

pub fn arb_poly(nvars: Var, max_deg: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_deg, nvars as usize), -3i64..=3),
        0..=max_terms,
    )
    .prop_map(move |terms| {
        let mut p = Polynomial::zero();
        for (exps, c) in terms {
            let m = Monomial::from_pairs(exps.into_iter().enumerate().map(|(i, e)| (i as Var + 1, e)));
            if m.degree() <= max_deg {
                p.add_term(m, int(c));
            }
        }
        p
    })
}

/// Germs with at most `nvars` variables, three denominator factors and exponents up to three.
pub fn arb_germ(nvars: Var) -> impl Strategy<Value = RationalGerm> {
    arb_germ_sized(nvars, 3, 3)
}

pub fn arb_germ_sized(nvars: Var, factors: usize, max_exp: u32) -> impl Strategy<Value = RationalGerm> {
    (
        arb_poly(nvars, 2, 3),
        prop::collection::vec((arb_form(nvars), 1u32..=max_exp), 1..=factors),
    )
        .prop_map(|(num, den)| RationalGerm::new(num, den).unwrap())
}

/// Positive definite Gram block `AᵀA + I` with small integer entries.
pub fn arb_gram(n: usize) -> impl Strategy<Value = InnerProduct> {
    prop::collection::vec(-2i64..=2, n * n).prop_map(move |a| {
        let mut g = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i64 = if i == j { 1 } else { 0 };
                for k in 0..n {
                    s += a[k * n + i] * a[k * n + j];
                }
                g[i][j] = int(s);
            }
        }
        InnerProduct::from_gram(g).unwrap()
    })
}

/// Reduced row echelon nullspace, written independently of the library.
pub fn kernel(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &lead;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); ncols];
            v[fc] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][fc].clone();
            }
            v
        })
        .collect()
}

/// Dependence space read straight off the quotient rule: the directions
/// killing `D ∂N − N ∂D`, then their annihilator.
pub fn dep_oracle(f: &RationalGerm) -> Subspace {
    let vars: Vec<Var> = f.vars().into_iter().collect();
    if vars.is_empty() || f.is_zero() {
        return Subspace::zero();
    }
    let n = f.numerator();
    let d = f.den_polynomial();
    let parts: Vec<Polynomial> = vars
        .iter()
        .map(|&v| d.mul(&n.derivative(v)).sub(&n.mul(&d.derivative(v))))
        .collect();
    let mut table: BTreeMap<Monomial, Vec<Rational>> = BTreeMap::new();
    for (j, p) in parts.iter().enumerate() {
        for (m, c) in p.terms() {
            table.entry(m.clone()).or_insert_with(|| vec![Rational::zero(); vars.len()])[j] = c.clone();
        }
    }
    let rows: Vec<Vec<Rational>> = table.into_values().collect();
    let w = kernel(&rows, vars.len());
    let ann = kernel(&w, vars.len());
    let forms: Vec<LinearForm> =
        ann.into_iter().map(|v| LinearForm::from_terms(vars.iter().copied().zip(v))).collect();
    span(forms.iter())
}

/// Equality of rational functions by cross multiplication, without the
/// library's normal form.
pub fn same_function(a: &RationalGerm, b: &RationalGerm) -> bool {
    a.numerator().mul(&b.den_polynomial()) == b.numerator().mul(&a.den_polynomial())
}

/// A Chen spec on the given distinct letters with exponents cycled from `exps`.
pub fn chen_spec(letters: &[u32], exps: &[u32]) -> FractionSpec {
    FractionSpec::chen(&exps[..letters.len()], letters)
}

/// Two Chen specs on disjoint letters from `1..=6`, depth ≤ 3, exponents ≤ 3.
pub fn arb_local_chen_pair() -> impl Strategy<Value = (FractionSpec, FractionSpec)> {
    arb_local_chen_pair_sized(3, 3)
}

pub fn arb_local_chen_pair_sized(depth: usize, max_exp: u32) -> impl Strategy<Value = (FractionSpec, FractionSpec)> {
    (
        Just((1..=6u32).collect::<Vec<_>>()).prop_shuffle(),
        1usize..=depth,
        1usize..=depth,
        prop::collection::vec(1u32..=max_exp, 3),
        prop::collection::vec(1u32..=max_exp, 3),
    )
        .prop_map(|(letters, ka, kb, ea, eb)| {
            (chen_spec(&letters[..ka], &ea), chen_spec(&letters[ka..ka + kb], &eb))
        })
}

/// Value of `1/(L_{u1}^{s1}(L_{u1}+L_{u2})^{s2}⋯)` with `L_I = Σ_{i∈I} z_i`,
/// computed straight from the definition.
pub fn spec_value(spec: &FractionSpec, point: &[Rational]) -> Option<Rational> {
    let mut acc = Rational::zero();
    let mut value = Rational::one();
    for (s, u) in spec.exps.iter().zip(&spec.letters) {
        for i in u.elements() {
            acc += &point[i as usize - 1];
        }
        if acc.is_zero() {
            return None;
        }
        value /= num_traits::pow(acc.clone(), *s as usize);
    }
    Some(value)
}

pub fn combo_value(combo: &[(FractionSpec, Rational)], point: &[Rational]) -> Option<Rational> {
    combo.iter().try_fold(Rational::zero(), |acc, (s, c)| Some(acc + c * spec_value(s, point)?))
}

/// Rational points with small distinct positive coordinates.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| Rational::new(rng.gen_range(1..=97).into(), rng.gen_range(1..=13).into())).collect())
        .collect()
}

/// Rank over ℚ via the independent kernel routine.
pub fn matrix_rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    ncols - kernel(rows, ncols).len()
}

pub fn letter(n: u32) -> Letter {
    if n == 0 {
        Letter::X0
    } else {
        Letter::Index(n)
    }
}

pub fn word(ls: &[u32]) -> Word {
    Word(ls.iter().map(|&n| letter(n)).collect())
}

pub fn codes(w: &Word) -> Vec<u32> {
    w.letters().iter().map(|l| if l.is_x0() { 0 } else { l.elements()[0] }).collect()
}

pub fn brute_lyndon(w: &[u32]) -> bool {
    !w.is_empty() && (1..w.len()).all(|k| {
        let rot: Vec<u32> = w[k..].iter().chain(&w[..k]).copied().collect();
        w < rot.as_slice()
    })
}

/// All factorizations into Lyndon words with nonincreasing factors.
pub fn brute_factorizations(w: &[u32], bound: Option<&[u32]>) -> Vec<Vec<Vec<u32>>> {
    if w.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 1..=w.len() {
        let head = &w[..k];
        if !brute_lyndon(head) || bound.is_some_and(|b| head > b) {
            continue;
        }
        for mut rest in brute_factorizations(&w[k..], Some(head)) {
            rest.insert(0, head.to_vec());
            out.push(rest);
        }
    }
    out
}

pub fn all_words(alphabet: &[u32], max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &a in alphabet {
                let mut x = w.clone();
                x.push(a);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
