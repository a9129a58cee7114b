//! Rational germs at zero with linear poles, and their canonical polar
//! decomposition relative to an inner product.
//!
//! A germ is stored as a reduced fraction `N / Π L_i^{e_i}` whose
//! denominator forms are scaled to leading coefficient `1`, merged and
//! sorted, with every factor that divides `N` cancelled. This normal form is
//! unique, so two presentations of one rational function compare equal.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactlin::{find_circuit, nullspace, orth_decompose, orthogonal, span, InnerProduct, LinearForm, Subspace, Var};
use crate::polynomial::{Monomial, Polynomial};
use crate::rational::Rational;
use crate::Error;

/// A form raised to a positive power.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoleFactor {
    pub form: LinearForm,
    pub exp: u32,
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalGerm {
    num: Polynomial,
    den: Vec<PoleFactor>,
}

/// Value type produced by germ arithmetic.
pub type GermSum = RationalGerm;

impl RationalGerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self { num: p, den: Vec::new() }
    }

    /// `num / Π form^exp`, normalized. Zero forms are rejected.
    pub fn new<I>(num: Polynomial, den: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (LinearForm, u32)>,
    {
        let mut num = num;
        let mut merged: BTreeMap<LinearForm, u32> = BTreeMap::new();
        for (form, exp) in den {
            if exp == 0 {
                continue;
            }
            if form.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            let (form, c) = form.normalized();
            num = num.scale(&num_traits::pow(c.recip(), exp as usize));
            *merged.entry(form).or_insert(0) += exp;
        }
        Ok(Self::reduce(num, merged))
    }

    /// `1 / L^e`.
    pub fn pole(form: &LinearForm, exp: u32) -> Result<Self, Error> {
        Self::new(Polynomial::one(), [(form.clone(), exp)])
    }

    fn reduce(mut num: Polynomial, mut merged: BTreeMap<LinearForm, u32>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        for (form, exp) in merged.iter_mut() {
            while *exp > 0 {
                match num.div_linear(form) {
                    Some(q) => {
                        num = q;
                        *exp -= 1;
                    }
                    None => break,
                }
            }
        }
        let den = merged
            .into_iter()
            .filter(|(_, e)| *e > 0)
            .map(|(form, exp)| PoleFactor { form, exp })
            .collect();
        Self { num, den }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &[PoleFactor] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.num.vars();
        for p in &self.den {
            vs.extend(p.form.support());
        }
        vs
    }

    pub fn den_polynomial(&self) -> Polynomial {
        self.den
            .iter()
            .fold(Polynomial::one(), |acc, p| acc.mul(&Polynomial::from_form(&p.form).pow(p.exp)))
    }

    fn den_map(&self) -> BTreeMap<LinearForm, u32> {
        self.den.iter().map(|p| (p.form.clone(), p.exp)).collect()
    }

    /// Multiplies the numerator by the factors of `target` missing from `self`.
    fn lift_to(&self, target: &BTreeMap<LinearForm, u32>) -> Polynomial {
        let own = self.den_map();
        let mut num = self.num.clone();
        for (form, e) in target {
            let have = own.get(form).copied().unwrap_or(0);
            if *e > have {
                num = num.mul(&Polynomial::from_form(form).pow(e - have));
            }
        }
        num
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut lcm = self.den_map();
        for p in &other.den {
            let e = lcm.entry(p.form.clone()).or_insert(0);
            *e = (*e).max(p.exp);
        }
        let num = self.lift_to(&lcm).add(&other.lift_to(&lcm));
        Self::reduce(num, lcm)
    }

    pub fn neg(&self) -> Self {
        Self { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut merged = self.den_map();
        for p in &other.den {
            *merged.entry(p.form.clone()).or_insert(0) += p.exp;
        }
        Self::reduce(self.num.mul(&other.num), merged)
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        Self::reduce(self.num.mul(p), self.den_map())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Value at a rational point off the pole locus.
    pub fn eval<F: Fn(Var) -> Rational>(&self, point: F) -> Option<Rational> {
        let mut d = Rational::one();
        for p in &self.den {
            let v = p.form.eval(&point);
            if v.is_zero() {
                return None;
            }
            d *= num_traits::pow(v, p.exp as usize);
        }
        Some(self.num.eval(&point) / d)
    }

    pub fn relabel<F: Fn(Var) -> Var + Copy>(&self, map: F) -> Self {
        Self::new(
            self.num.relabel(map),
            self.den.iter().map(|p| (p.form.relabel(map), p.exp)),
        )
        .expect("relabeling keeps forms nonzero")
    }
}

impl fmt::Display for RationalGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num_atomic = self.num.len() <= 1;
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        if num_atomic {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        write!(f, "/(")?;
        for (i, p) in self.den.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if p.exp == 1 {
                write!(f, "({})", p.form)?;
            } else {
                write!(f, "({})^{}", p.form, p.exp)?;
            }
        }
        write!(f, ")")
    }
}

impl fmt::Debug for RationalGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalGerm({self})")
    }
}

pub fn germ_add(f: &RationalGerm, g: &RationalGerm) -> RationalGerm {
    f.add(g)
}

pub fn germ_mul(f: &RationalGerm, g: &RationalGerm) -> RationalGerm {
    f.mul(g)
}

/// Product of powers of linearly independent forms, sorted by form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexFraction {
    factors: Vec<PoleFactor>,
}

impl SimplexFraction {
    /// Fails when the forms are dependent.
    pub fn new<I: IntoIterator<Item = (LinearForm, u32)>>(factors: I) -> Result<Self, Error> {
        let mut merged: BTreeMap<LinearForm, u32> = BTreeMap::new();
        for (form, exp) in factors {
            if exp == 0 {
                continue;
            }
            if form.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            *merged.entry(form).or_insert(0) += exp;
        }
        let forms: Vec<LinearForm> = merged.keys().cloned().collect();
        if find_circuit(&forms).is_some() {
            return Err(Error::DependentForms);
        }
        Ok(Self {
            factors: merged.into_iter().map(|(form, exp)| PoleFactor { form, exp }).collect(),
        })
    }

    pub fn factors(&self) -> &[PoleFactor] {
        &self.factors
    }

    pub fn p_order(&self) -> u32 {
        self.factors.iter().map(|p| p.exp).sum()
    }

    pub fn supporting_space(&self) -> Subspace {
        span(self.factors.iter().map(|p| &p.form))
    }

    pub fn to_germ(&self) -> RationalGerm {
        RationalGerm::new(Polynomial::one(), self.factors.iter().map(|p| (p.form.clone(), p.exp)))
            .expect("simplex forms are nonzero")
    }
}

impl fmt::Debug for SimplexFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_germ())
    }
}

/// `h / S` with `h` depending only on directions orthogonal to `Supp(S)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarTerm {
    pub num: Polynomial,
    pub den: SimplexFraction,
}

impl PolarTerm {
    pub fn to_germ(&self) -> RationalGerm {
        self.den.to_germ().mul_poly(&self.num)
    }

    pub fn p_order(&self) -> u32 {
        self.den.p_order()
    }

    pub fn supporting_space(&self) -> Subspace {
        self.den.supporting_space()
    }
}

/// `f = Σ h_i / S_i + h₀`, terms sorted by supporting space, then p-order.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Decomposition {
    pub terms: Vec<PolarTerm>,
    pub holo: Polynomial,
}

impl Decomposition {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.holo.is_zero()
    }

    /// Terms sharing one supporting space, in order.
    pub fn components(&self) -> Vec<(Subspace, Vec<&PolarTerm>)> {
        let mut out: Vec<(Subspace, Vec<&PolarTerm>)> = Vec::new();
        for t in &self.terms {
            let u = t.supporting_space();
            match out.last_mut() {
                Some((last, v)) if *last == u => v.push(t),
                _ => out.push((u, vec![t])),
            }
        }
        out
    }

    fn from_pieces(pieces: BTreeMap<SimplexFraction, Polynomial>, holo: Polynomial) -> Self {
        let mut terms: Vec<(Subspace, u32, PolarTerm)> = pieces
            .into_iter()
            .filter(|(_, h)| !h.is_zero())
            .map(|(den, num)| (den.supporting_space(), den.p_order(), PolarTerm { num, den }))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| a.2.den.cmp(&b.2.den)));
        Self { terms: terms.into_iter().map(|t| t.2).collect(), holo }
    }
}

/// Pending pieces keyed so that every rewrite moves work to a strictly
/// later key: more active poles first, then the active index tuple (sorted
/// descending) in increasing order. Pieces meeting at one key are merged.
type WorkKey = (Reverse<usize>, Vec<usize>, Vec<u32>);

struct Worklist {
    pending: BTreeMap<WorkKey, Polynomial>,
}

impl Worklist {
    fn push(&mut self, exps: Vec<u32>, num: Polynomial) {
        if num.is_zero() {
            return;
        }
        let mut active: Vec<usize> = (0..exps.len()).filter(|&i| exps[i] > 0).collect();
        active.reverse();
        let slot = self.pending.entry((Reverse(active.len()), active, exps)).or_default();
        *slot = slot.add(&num);
    }

    fn pop(&mut self) -> Option<(Vec<u32>, Polynomial)> {
        self.pending.pop_first().map(|((_, _, exps), num)| (exps, num))
    }
}

/// Splitting relation `forms[pivot] = Σ coeffs · forms[members]`.
struct Relation {
    pivot: usize,
    members: Vec<(usize, Rational)>,
}

/// Change of coordinates on one independent pole set: each variable maps to
/// its coordinates along the poles (as symbols `offset + k`) plus its
/// orthogonal remainder.
struct Frame {
    images: BTreeMap<Var, Polynomial>,
}

enum Step {
    Split(Relation),
    Simplex(Frame),
}

/// Canonical decomposition into polar terms plus a polynomial.
///
/// Phase one rewrites `1 = Σ c_i L_i / L_p` for a relation whose pivot `L_p`
/// is the largest member, until every remaining term has an independent
/// denominator containing no broken circuit (a circuit minus its largest
/// form) of the original pole set. Each application is repeated until one
/// non-pivot member disappears; the pole set then either shrinks or trades a
/// form for a strictly larger one, so the rewriting terminates. The
/// surviving denominators form a basis of simplex fractions on each
/// supporting space.
///
/// Phase two writes each numerator in coordinates adapted to the
/// supporting space and its `q`-orthogonal complement, cancels powers of
/// the pole forms, and sends any term that lost a pole back through the
/// loop.
pub fn decompose(f: &RationalGerm, q: &InnerProduct) -> Decomposition {
    let forms: Vec<LinearForm> = f.den.iter().map(|p| p.form.clone()).collect();
    let vars = f.vars();
    let offset = vars.iter().next_back().copied().unwrap_or(0) + 1;
    let mut work = Worklist { pending: BTreeMap::new() };
    work.push(f.den.iter().map(|p| p.exp).collect(), f.num.clone());
    let mut steps: HashMap<Vec<usize>, Step> = HashMap::new();
    let mut pieces: BTreeMap<SimplexFraction, Polynomial> = BTreeMap::new();
    let mut holo = Polynomial::zero();

    while let Some((exps, num)) = work.pop() {
        let active: Vec<usize> = (0..forms.len()).filter(|&i| exps[i] > 0).collect();
        if active.is_empty() {
            holo = holo.add(&num);
            continue;
        }
        let step = steps.entry(active.clone()).or_insert_with(|| match find_split(&forms, &active) {
            Some(rel) => Step::Split(rel),
            None => Step::Simplex(frame(&forms, &active, &vars, q, offset)),
        });
        match step {
            Step::Split(rel) => split(exps, num, rel, &mut work),
            Step::Simplex(fr) => simplex_phase(exps, num, fr, &forms, &active, offset, &mut pieces, &mut work),
        }
    }
    Decomposition::from_pieces(pieces, holo)
}

fn find_split(forms: &[LinearForm], active: &[usize]) -> Option<Relation> {
    let act: Vec<LinearForm> = active.iter().map(|&i| forms[i].clone()).collect();
    if let Some(c) = find_circuit(&act) {
        let pivot = active[c.pivot()];
        let members = c
            .indices
            .iter()
            .zip(&c.coeffs)
            .filter(|(i, _)| active[**i] != pivot)
            .map(|(i, k)| (active[*i], k.clone()))
            .collect();
        return Some(Relation { pivot, members });
    }
    // Broken circuits: an inactive form above every member of its expansion.
    for m in (0..forms.len()).rev() {
        if active.contains(&m) {
            continue;
        }
        let mut cand = act.clone();
        cand.push(forms[m].clone());
        if let Some(c) = find_circuit(&cand) {
            let last = cand.len() - 1;
            if c.pivot() == last {
                let members = c
                    .indices
                    .iter()
                    .zip(&c.coeffs)
                    .filter(|(i, _)| **i != last)
                    .map(|(i, k)| (active[*i], k.clone()))
                    .collect();
                return Some(Relation { pivot: m, members });
            }
        }
    }
    None
}

/// Applies the relation level by level until some member's exponent hits zero.
fn split(exps: Vec<u32>, num: Polynomial, rel: &Relation, work: &mut Worklist) {
    let mut level: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::from([(exps, num)]);
    while !level.is_empty() {
        let mut next: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
        for (exps, num) in level {
            if rel.members.iter().any(|(i, _)| exps[*i] == 0) {
                work.push(exps, num);
                continue;
            }
            for (i, c) in &rel.members {
                let mut child = exps.clone();
                child[*i] -= 1;
                child[rel.pivot] += 1;
                let slot = next.entry(child).or_default();
                *slot = slot.add(&num.scale(c));
            }
        }
        level = next;
    }
}

fn frame(forms: &[LinearForm], active: &[usize], vars: &BTreeSet<Var>, q: &InnerProduct, offset: Var) -> Frame {
    let basis: Vec<LinearForm> = active.iter().map(|&i| forms[i].clone()).collect();
    let u = span(basis.iter());
    let mut images = BTreeMap::new();
    for &v in vars {
        let (a, b) = orth_decompose(q, &LinearForm::var(v), &u);
        let mut img = Polynomial::from_form(&b);
        for (k, c) in coordinates_in(&basis, &a).iter().enumerate() {
            if !c.is_zero() {
                img = img.add(&Polynomial::var(offset + k as Var).scale(c));
            }
        }
        images.insert(v, img);
    }
    Frame { images }
}

#[allow(clippy::too_many_arguments)]
fn simplex_phase(
    exps: Vec<u32>,
    num: Polynomial,
    fr: &Frame,
    forms: &[LinearForm],
    active: &[usize],
    offset: Var,
    pieces: &mut BTreeMap<SimplexFraction, Polynomial>,
    work: &mut Worklist,
) {
    let expanded = num.substitute(|v| fr.images.get(&v).cloned());

    let mut by_symbol: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
    for (m, c) in expanded.terms() {
        let mut alpha = vec![0u32; active.len()];
        let mut rest = Vec::new();
        for &(v, e) in m.pairs() {
            if v >= offset {
                alpha[(v - offset) as usize] = e;
            } else {
                rest.push((v, e));
            }
        }
        by_symbol
            .entry(alpha)
            .or_default()
            .add_term(Monomial::from_pairs(rest), c.clone());
    }

    for (alpha, g) in by_symbol {
        if g.is_zero() {
            continue;
        }
        let mut exps = exps.clone();
        let mut num = g;
        let mut lost_pole = false;
        for (k, &i) in active.iter().enumerate() {
            let a = alpha[k];
            if a >= exps[i] {
                lost_pole = true;
                num = num.mul(&Polynomial::from_form(&forms[i]).pow(a - exps[i]));
                exps[i] = 0;
            } else {
                exps[i] -= a;
            }
        }
        if lost_pole {
            work.push(exps, num);
        } else {
            let den = SimplexFraction {
                factors: active
                    .iter()
                    .map(|&i| PoleFactor { form: forms[i].clone(), exp: exps[i] })
                    .collect(),
            };
            let slot = pieces.entry(den).or_default();
            *slot = slot.add(&num);
        }
    }
}

/// Coordinates of `target` in the independent family `basis`.
fn coordinates_in(basis: &[LinearForm], target: &LinearForm) -> Vec<Rational> {
    if target.is_zero() {
        return vec![Rational::zero(); basis.len()];
    }
    let mut cand = basis.to_vec();
    cand.push(target.clone());
    let c = find_circuit(&cand).expect("target lies in the span of the basis");
    let last = basis.len();
    let k = c.indices.iter().position(|&i| i == last).expect("target is in its own circuit");
    let scale = -c.coeffs[k].recip();
    let mut out = vec![Rational::zero(); basis.len()];
    for (i, x) in c.indices.iter().zip(&c.coeffs) {
        if *i != last {
            out[*i] = x * &scale;
        }
    }
    out
}

pub fn recompose(d: &Decomposition) -> RationalGerm {
    d.terms
        .iter()
        .fold(RationalGerm::from_poly(d.holo.clone()), |acc, t| acc.add(&t.to_germ()))
}

/// Holomorphic part `π₊(f)`.
pub fn project_plus(f: &RationalGerm, q: &InnerProduct) -> Polynomial {
    decompose(f, q).holo
}

/// Minimal subtraction: the constant term of the holomorphic part.
pub fn ms_eval(f: &RationalGerm, q: &InnerProduct) -> Rational {
    if f.is_polynomial() {
        return f.num.constant_term();
    }
    project_plus(f, q).constant_term()
}

fn freeze_numerators<'a, I: IntoIterator<Item = &'a PolarTerm>>(terms: I) -> Decomposition {
    let terms = terms
        .into_iter()
        .filter_map(|t| {
            let c = t.num.constant_term();
            (!c.is_zero()).then(|| PolarTerm { num: Polynomial::constant(c), den: t.den.clone() })
        })
        .collect();
    Decomposition { terms, holo: Polynomial::zero() }
}

/// Top p-order polar terms with numerators evaluated at zero.
pub fn p_residue(f: &RationalGerm, q: &InnerProduct) -> Decomposition {
    let d = decompose(f, q);
    let Some(top) = d.terms.iter().map(PolarTerm::p_order).max() else {
        return Decomposition::default();
    };
    freeze_numerators(d.terms.iter().filter(|t| t.p_order() == top))
}

/// Polar terms of top supporting-space dimension with numerators evaluated at zero.
pub fn d_residue(f: &RationalGerm, q: &InnerProduct) -> Decomposition {
    let d = decompose(f, q);
    let Some(top) = d.terms.iter().map(|t| t.den.factors.len()).max() else {
        return Decomposition::default();
    };
    freeze_numerators(d.terms.iter().filter(|t| t.den.factors.len() == top))
}

/// Smallest subspace of forms through which the polynomial factors: the
/// annihilator of the directions `v` with `D_v p = 0`.
pub fn poly_dependence(p: &Polynomial) -> Subspace {
    let vars: Vec<Var> = p.vars().into_iter().collect();
    if vars.is_empty() {
        return Subspace::zero();
    }
    let derivs: Vec<Polynomial> = vars.iter().map(|v| p.derivative(*v)).collect();
    let monos: BTreeSet<Monomial> = derivs.iter().flat_map(|d| d.terms().map(|(m, _)| m.clone())).collect();
    let rows: Vec<Vec<Rational>> = monos
        .iter()
        .map(|m| {
            derivs
                .iter()
                .map(|d| d.terms().find(|(x, _)| *x == m).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect();
    let kernel = nullspace(rows, vars.len());
    let ann = nullspace(kernel, vars.len());
    let forms: Vec<LinearForm> = ann
        .into_iter()
        .map(|v| LinearForm::from_terms(vars.iter().copied().zip(v)))
        .collect();
    span(forms.iter())
}

/// `Dep(f)`, assembled from the graded components of the decomposition:
/// each polar term contributes its supporting space and the dependence
/// space of its numerator; the holomorphic part contributes its own.
pub fn dependence(f: &RationalGerm, q: &InnerProduct) -> Subspace {
    if f.is_polynomial() {
        return poly_dependence(&f.num);
    }
    let d = decompose(f, q);
    let mut dep = poly_dependence(&d.holo);
    for t in &d.terms {
        dep = dep.sum(&t.supporting_space()).sum(&poly_dependence(&t.num));
    }
    dep
}

pub fn is_local_pair(f: &RationalGerm, g: &RationalGerm, q: &InnerProduct) -> bool {
    orthogonal(q, &dependence(f, q), &dependence(g, q))
}

/// Product restricted to `q`-orthogonal pairs.
pub fn locality_mul(f: &RationalGerm, g: &RationalGerm, q: &InnerProduct) -> Result<RationalGerm, Error> {
    if !is_local_pair(f, g, q) {
        return Err(Error::NotLocal(format!("{f} and {g} are not orthogonal")));
    }
    Ok(f.mul(g))
}
