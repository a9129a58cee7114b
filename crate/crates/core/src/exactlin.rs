//! Exact rational linear algebra on the filtered space of linear forms.
//!
//! Linear forms are sparse maps from 1-based variable indices to nonzero
//! rationals, so the ambient space has no fixed dimension: a form in
//! `z1, z2` lives in every larger coordinate space as well.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{parse_rational, rational_to_string, Rational};
use crate::Error;

/// Variable index, `1` stands for `z1`.
pub type Var = u32;

/// A homogeneous linear form `Σ c_i z_i` with finitely many nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearForm {
    coeffs: BTreeMap<Var, Rational>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The coordinate form `z_i`.
    pub fn var(i: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, Rational::one());
        Self { coeffs }
    }

    /// `z_I = Σ_{i ∈ I} z_i`.
    pub fn sum_of<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        let mut out = Self::zero();
        for v in vars {
            out.add_term(v, &Rational::one());
        }
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Var, Rational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (v, c) in terms {
            out.add_term(v, &c);
        }
        out
    }

    pub fn add_term(&mut self, v: Var, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn coeff(&self, v: Var) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, &Rational)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> BTreeSet<Var> {
        self.coeffs.keys().copied().collect()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.coeffs.keys().next_back().copied()
    }

    /// Smallest variable with a nonzero coefficient, together with that coefficient.
    pub fn leading(&self) -> Option<(Var, &Rational)> {
        self.coeffs.iter().next().map(|(v, c)| (*v, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(v, x)| (*v, x * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, c) in other.terms() {
            out.add_term(v, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, c) in other.terms() {
            out.add_term(v, &-c);
        }
        out
    }

    /// Value at a rational point given as a lookup `z_i ↦ x_i`.
    pub fn eval<F: Fn(Var) -> Rational>(&self, point: F) -> Rational {
        self.coeffs.iter().map(|(v, c)| c * point(*v)).sum()
    }

    /// Divides by the leading coefficient so that the form starts with `1`.
    /// Returns the normalized form and the factor removed.
    pub fn normalized(&self) -> (Self, Rational) {
        match self.leading() {
            None => (Self::zero(), Rational::one()),
            Some((_, c)) => {
                let c = c.clone();
                (self.scale(&c.recip()), c)
            }
        }
    }

    /// Applies a relabeling of variables.
    pub fn relabel<F: Fn(Var) -> Var>(&self, map: F) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(v, c)| (map(*v), c.clone())))
    }
}

/// Dense lexicographic order on coefficient vectors `(c_1, c_2, …)`.
///
/// Under this order `z1 + z2 > z1 > z2`, which fixes which member of a
/// circuit is normalized to coefficient `-1`.
impl Ord for LinearForm {
    fn cmp(&self, other: &Self) -> Ordering {
        let vars: BTreeSet<Var> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        for v in vars {
            let ord = self.coeff(v).cmp(&other.coeff(v));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for LinearForm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (v, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if abs.is_one() {
                write!(f, "z{v}")?;
            } else {
                write!(f, "{}*z{v}", rational_to_string(&abs))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearForm({self})")
    }
}

impl Serialize for LinearForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> = self
            .coeffs
            .iter()
            .map(|(v, c)| (v.to_string(), rational_to_string(c)))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, String>::deserialize(d)?;
        let mut out = LinearForm::zero();
        for (k, v) in map {
            let var: Var = k.parse().map_err(serde::de::Error::custom)?;
            if var == 0 {
                return Err(serde::de::Error::custom("variable indices start at 1"));
            }
            let c = parse_rational(&v).map_err(serde::de::Error::custom)?;
            out.add_term(var, &c);
        }
        Ok(out)
    }
}

/// An inner product on the filtered space: a symmetric positive-definite
/// Gram block on `z1..zn`, and the identity on every later coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InnerProduct {
    gram: Option<Vec<Vec<Rational>>>,
}

impl InnerProduct {
    /// The standard dot product.
    pub fn standard() -> Self {
        Self { gram: None }
    }

    /// Validates symmetry and positive-definiteness (leading principal minors).
    pub fn from_gram(gram: Vec<Vec<Rational>>) -> Result<Self, Error> {
        let n = gram.len();
        if gram.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInnerProduct("Gram block must be square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInnerProduct(format!(
                        "Gram block is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for k in 1..=n {
            let minor: Vec<Vec<Rational>> = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !determinant(minor).is_positive() {
                return Err(Error::InvalidInnerProduct(format!(
                    "leading principal minor of order {k} is not positive"
                )));
            }
        }
        if n == 0 {
            return Ok(Self::standard());
        }
        Ok(Self { gram: Some(gram) })
    }

    pub fn is_standard(&self) -> bool {
        self.gram.is_none()
    }

    pub fn gram(&self) -> Option<&[Vec<Rational>]> {
        self.gram.as_deref()
    }

    fn entry(&self, i: Var, j: Var) -> Rational {
        if let Some(g) = &self.gram {
            let n = g.len() as Var;
            if i <= n && j <= n {
                return g[(i - 1) as usize][(j - 1) as usize].clone();
            }
        }
        if i == j {
            Rational::one()
        } else {
            Rational::zero()
        }
    }
}

/// `Q(a, b)`.
pub fn inner(q: &InnerProduct, a: &LinearForm, b: &LinearForm) -> Rational {
    match &q.gram {
        None => {
            let (small, large) = if a.coeffs.len() <= b.coeffs.len() { (a, b) } else { (b, a) };
            small
                .coeffs
                .iter()
                .filter_map(|(v, c)| large.coeffs.get(v).map(|d| c * d))
                .sum()
        }
        Some(_) => {
            let mut acc = Rational::zero();
            for (i, ci) in a.terms() {
                for (j, cj) in b.terms() {
                    let g = q.entry(i, j);
                    if !g.is_zero() {
                        acc += ci * cj * g;
                    }
                }
            }
            acc
        }
    }
}

/// A subspace of linear forms, stored as a reduced row-echelon basis.
///
/// Rows are sorted by pivot variable, every pivot coefficient is `1`, and
/// pivot columns are cleared in every other row, so equal subspaces have
/// equal representations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subspace {
    rows: Vec<LinearForm>,
}

impl Subspace {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[LinearForm] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    fn pivot(row: &LinearForm) -> Var {
        row.leading().expect("echelon rows are nonzero").0
    }

    /// Remainder of `f` after eliminating all pivot columns.
    pub fn reduce(&self, f: &LinearForm) -> LinearForm {
        let mut r = f.clone();
        for row in &self.rows {
            let p = Self::pivot(row);
            let c = r.coeff(p);
            if !c.is_zero() {
                r = r.sub(&row.scale(&c));
            }
        }
        r
    }

    pub fn contains(&self, f: &LinearForm) -> bool {
        self.reduce(f).is_zero()
    }

    /// Adds one vector, keeping the basis fully reduced. Returns `false`
    /// when `f` was already in the subspace.
    pub fn insert(&mut self, f: &LinearForm) -> bool {
        let r = self.reduce(f);
        if r.is_zero() {
            return false;
        }
        let (r, _) = r.normalized();
        let p = Self::pivot(&r);
        for row in &mut self.rows {
            let c = row.coeff(p);
            if !c.is_zero() {
                *row = row.sub(&r.scale(&c));
            }
        }
        let pos = self.rows.partition_point(|row| Self::pivot(row) < p);
        self.rows.insert(pos, r);
        true
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut out = self.clone();
        for row in &other.rows {
            out.insert(row);
        }
        out
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    /// Coordinates of `f` in the echelon basis, or `None` if `f` is outside.
    pub fn coordinates(&self, f: &LinearForm) -> Option<Vec<Rational>> {
        if !self.contains(f) {
            return None;
        }
        Some(self.rows.iter().map(|row| f.coeff(Self::pivot(row))).collect())
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows.serialize(s)
    }
}

pub fn span<'a, I: IntoIterator<Item = &'a LinearForm>>(forms: I) -> Subspace {
    let mut s = Subspace::zero();
    for f in forms {
        s.insert(f);
    }
    s
}

/// True iff every pair of basis vectors has zero inner product.
pub fn orthogonal(q: &InnerProduct, u: &Subspace, v: &Subspace) -> bool {
    u.rows
        .iter()
        .all(|a| v.rows.iter().all(|b| inner(q, a, b).is_zero()))
}

/// Splits `f = a + b` with `a ∈ u` and `b` orthogonal to `u` under `q`.
pub fn orth_decompose(q: &InnerProduct, f: &LinearForm, u: &Subspace) -> (LinearForm, LinearForm) {
    let basis = u.basis();
    if basis.is_empty() {
        return (LinearForm::zero(), f.clone());
    }
    let n = basis.len();
    let mut m: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<Rational> = (0..n).map(|j| inner(q, &basis[i], &basis[j])).collect();
        row.push(inner(q, f, &basis[i]));
        m.push(row);
    }
    let lambda = solve_augmented(m).expect("Gram matrix of a basis is nonsingular");
    let mut a = LinearForm::zero();
    for (c, r) in lambda.iter().zip(basis) {
        a = a.add(&r.scale(c));
    }
    let b = f.sub(&a);
    (a, b)
}

/// A linear relation among a subset of forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    /// Ascending positions in the input list.
    pub indices: Vec<usize>,
    /// `Σ coeffs[k] · forms[indices[k]] = 0`, all nonzero.
    pub coeffs: Vec<Rational>,
    largest: usize,
}

impl Circuit {
    /// Position (in the input list) of the member normalized to `-1`.
    pub fn pivot(&self) -> usize {
        self.largest
    }
}

/// Returns a minimal dependent subset, or `None` when the forms are independent.
///
/// The circuit is the first one met scanning the list left to right. Its
/// relation is scaled so that the largest member (in the `LinearForm` order)
/// has coefficient `-1`.
pub fn find_circuit(forms: &[LinearForm]) -> Option<Circuit> {
    // Basis rows tracked together with their expression in the input forms.
    let mut rows: Vec<(LinearForm, BTreeMap<usize, Rational>)> = Vec::new();
    for (idx, f) in forms.iter().enumerate() {
        let mut r = f.clone();
        let mut combo: BTreeMap<usize, Rational> = BTreeMap::new();
        combo.insert(idx, Rational::one());
        for (row, row_combo) in &rows {
            let p = row.leading().unwrap().0;
            let c = r.coeff(p);
            if c.is_zero() {
                continue;
            }
            r = r.sub(&row.scale(&c));
            for (j, x) in row_combo {
                let e = combo.entry(*j).or_insert_with(Rational::zero);
                *e -= x * &c;
            }
        }
        combo.retain(|_, x| !x.is_zero());
        if r.is_zero() {
            // combo expresses 0 as a combination; its support is a fundamental circuit.
            let indices: Vec<usize> = combo.keys().copied().collect();
            let largest = indices
                .iter()
                .copied()
                .max_by(|a, b| forms[*a].cmp(&forms[*b]).then(b.cmp(a)))
                .unwrap();
            let scale = -combo[&largest].recip();
            let coeffs = indices.iter().map(|i| &combo[i] * &scale).collect();
            return Some(Circuit { indices, coeffs, largest });
        }
        let lead = r.leading().unwrap().1.recip();
        let r = r.scale(&lead);
        for x in combo.values_mut() {
            *x *= &lead;
        }
        // Keep the new row's pivot cleared from existing rows so later
        // reductions stay single-pass.
        let p = r.leading().unwrap().0;
        for (row, row_combo) in rows.iter_mut() {
            let c = row.coeff(p);
            if c.is_zero() {
                continue;
            }
            *row = row.sub(&r.scale(&c));
            for (j, x) in &combo {
                let e = row_combo.entry(*j).or_insert_with(Rational::zero);
                *e -= x * &c;
            }
            row_combo.retain(|_, x| !x.is_zero());
        }
        rows.push((r, combo));
    }
    None
}

pub fn is_independent(forms: &[LinearForm]) -> bool {
    span(forms.iter()).dim() == forms.len()
}

// ---- dense helpers ----

pub(crate) fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let delta = &m[col][c] * &factor;
                m[r][c] -= delta;
            }
        }
    }
    det
}

/// Solves an `n × (n+1)` augmented system with a nonsingular left block.
pub(crate) fn solve_augmented(mut m: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(piv, col);
        let inv = m[col][col].recip();
        for c in col..=n {
            m[col][c] *= &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let delta = &m[col][c] * &factor;
                m[r][c] -= delta;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Basis of the right null space of a dense matrix with `ncols` columns.
pub(crate) fn nullspace(mut m: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(piv, r);
        let inv = m[r][col].recip();
        for c in col..ncols {
            m[r][c] *= &inv;
        }
        for i in 0..m.len() {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].clone();
            for c in col..ncols {
                let delta = &m[r][c] * &factor;
                m[i][c] -= delta;
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); ncols];
            v[fc] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][fc].clone();
            }
            v
        })
        .collect()
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    ncols - nullspace(rows.to_vec(), ncols).len()
}
