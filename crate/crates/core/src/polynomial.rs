//! Sparse multivariate polynomials with rational coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactlin::{LinearForm, Var};
use crate::rational::{parse_rational, rational_to_string, Rational};

/// Exponent vector stored sparsely as `(variable, exponent)` pairs sorted by
/// variable; exponents are positive.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Self(map.into_iter().collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .binary_search_by_key(&v, |(x, _)| *x)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Self(out)
    }

    /// Removes variable `v`, returning its exponent.
    pub fn split_off(&self, v: Var) -> (u32, Monomial) {
        let e = self.exponent(v);
        (e, Self(self.0.iter().copied().filter(|(x, _)| *x != v).collect()))
    }
}

/// Graded order: total degree first, then lexicographic on the sparse pairs.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "z{v}")?;
            } else {
                write!(f, "z{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), Rational::one());
        p
    }

    pub fn from_form(f: &LinearForm) -> Self {
        let mut p = Self::zero();
        for (v, c) in f.terms() {
            p.add_term(Monomial::var(v), c.clone());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| *v))
            .collect()
    }

    /// The polynomial as a linear form, if it is homogeneous of degree one.
    pub fn as_linear_form(&self) -> Option<LinearForm> {
        let mut f = LinearForm::zero();
        for (m, c) in &self.terms {
            match m.0.as_slice() {
                [(v, 1)] => f.add_term(*v, c),
                _ => return None,
            }
        }
        Some(f)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *acc.entry(m1.mul(m2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        Self::from_terms(acc)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e == 0 {
                continue;
            }
            let m2 = if e > 1 { rest.mul(&Monomial(vec![(v, e - 1)])) } else { rest };
            out.add_term(m2, c * Rational::from_integer(e.into()));
        }
        out
    }

    pub fn eval<F: Fn(Var) -> Rational>(&self, point: F) -> Rational {
        let mut cache: HashMap<Var, Rational> = HashMap::new();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.0 {
                let x = cache.entry(*v).or_insert_with(|| point(*v));
                t *= num_traits::pow(x.clone(), *e as usize);
            }
            acc += t;
        }
        acc
    }

    /// Replaces each variable `v` with `subst(v)` (or keeps it when `None`).
    pub fn substitute<F: Fn(Var) -> Option<Polynomial>>(&self, subst: F) -> Self {
        let mut powers: HashMap<(Var, u32), Polynomial> = HashMap::new();
        let mut images: HashMap<Var, Polynomial> = HashMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(c.clone());
            for (v, e) in &m.0 {
                let img = images
                    .entry(*v)
                    .or_insert_with(|| subst(*v).unwrap_or_else(|| Polynomial::var(*v)))
                    .clone();
                let pw = powers.entry((*v, *e)).or_insert_with(|| img.pow(*e));
                t = t.mul(pw);
            }
            out = out.add(&t);
        }
        out
    }

    pub fn relabel<F: Fn(Var) -> Var>(&self, map: F) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| {
            (Monomial::from_pairs(m.0.iter().map(|(v, e)| (map(*v), *e))), c.clone())
        }))
    }

    /// Groups terms by the exponent of `v`: `p = Σ_k coeffs[k] · v^k`.
    pub fn coefficients_in(&self, v: Var) -> Vec<Polynomial> {
        let mut out: Vec<Polynomial> = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            let e = e as usize;
            if out.len() <= e {
                out.resize(e + 1, Polynomial::zero());
            }
            out[e].add_term(rest, c.clone());
        }
        out
    }

    /// Exact quotient by a nonzero linear form, or `None` if it does not divide.
    pub fn div_linear(&self, l: &LinearForm) -> Option<Polynomial> {
        let (v, lead) = l.leading()?;
        if self.is_zero() {
            return Some(Self::zero());
        }
        // l = lead·v + r with r free of v; synthetic division in v.
        let mut r = l.clone();
        r.add_term(v, &-lead.clone());
        let r = Polynomial::from_form(&r).scale(&lead.recip());
        let coeffs = self.coefficients_in(v);
        let d = coeffs.len() - 1;
        if d == 0 {
            return None;
        }
        let mut q: Vec<Polynomial> = vec![Polynomial::zero(); d];
        q[d - 1] = coeffs[d].clone();
        for k in (1..d).rev() {
            q[k - 1] = coeffs[k].sub(&r.mul(&q[k]));
        }
        let rem = coeffs[0].sub(&r.mul(&q[0]));
        if !rem.is_zero() {
            return None;
        }
        let mut out = Polynomial::zero();
        let inv = lead.recip();
        for (k, qk) in q.into_iter().enumerate() {
            let vk = if k == 0 { Polynomial::one() } else { Polynomial::from_terms([(Monomial(vec![(v, k as u32)]), Rational::one())]) };
            out = out.add(&qk.mul(&vk).scale(&inv));
        }
        Some(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if m.is_one() {
                write!(f, "{}", rational_to_string(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m:?}")?;
            } else {
                write!(f, "{}*{m:?}", rational_to_string(&abs))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: String,
    monomial: BTreeMap<String, u32>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| TermRepr {
                coeff: rational_to_string(c),
                monomial: m.0.iter().map(|(v, e)| (v.to_string(), *e)).collect(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<TermRepr>::deserialize(d)?;
        let mut p = Polynomial::zero();
        for t in terms {
            let c = parse_rational(&t.coeff).map_err(serde::de::Error::custom)?;
            let mut pairs = Vec::new();
            for (k, e) in t.monomial {
                let v: Var = k.parse().map_err(serde::de::Error::custom)?;
                if v == 0 {
                    return Err(serde::de::Error::custom("variable indices start at 1"));
                }
                pairs.push((v, e));
            }
            p.add_term(Monomial::from_pairs(pairs), c);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn z(i: Var) -> Polynomial {
        Polynomial::var(i)
    }

    #[test]
    fn arithmetic() {
        let p = z(1).add(&z(2));
        let sq = p.pow(2);
        let expected = z(1).mul(&z(1)).add(&z(1).mul(&z(2)).scale(&int(2))).add(&z(2).mul(&z(2)));
        assert_eq!(sq, expected);
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.pow(0), Polynomial::one());
        assert_eq!(sq.degree(), 2);
        assert_eq!(sq.vars().len(), 2);
    }

    #[test]
    fn derivative_and_eval() {
        let p = z(1).pow(3).add(&z(1).mul(&z(2)));
        assert_eq!(p.derivative(1), z(1).pow(2).scale(&int(3)).add(&z(2)));
        assert_eq!(p.eval(|v| if v == 1 { int(2) } else { rat(1, 2) }), int(9));
    }

    #[test]
    fn exact_linear_division() {
        let l = LinearForm::var(1).add(&LinearForm::var(2));
        let p = Polynomial::from_form(&l).mul(&z(3).add(&z(1)));
        let q = p.div_linear(&l).unwrap();
        assert_eq!(q, z(3).add(&z(1)));
        assert!(z(1).div_linear(&l).is_none());
        assert!(Polynomial::one().div_linear(&l).is_none());
        let scaled = LinearForm::var(1).scale(&int(2)).sub(&LinearForm::var(3));
        let p = Polynomial::from_form(&scaled).pow(2);
        assert_eq!(p.div_linear(&scaled).unwrap(), Polynomial::from_form(&scaled));
    }

    #[test]
    fn substitution() {
        let p = z(1).mul(&z(2));
        let s = p.substitute(|v| (v == 1).then(|| z(2).add(&z(3))));
        assert_eq!(s, z(2).mul(&z(2)).add(&z(2).mul(&z(3))));
    }

    #[test]
    fn display_order() {
        let p = z(1).pow(2).scale(&rat(3, 2)).sub(&z(2)).add(&Polynomial::constant(int(4)));
        assert_eq!(p.to_string(), "3/2*z1^2 - z2 + 4");
        let json = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
