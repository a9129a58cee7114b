//! Ordered fractions `1/(L_{u1}^{s1}(L_{u1}+L_{u2})^{s2}⋯)` under a letter
//! assignment, their correspondence with shuffle words, and the forest
//! fractions of nested index sets together with their flattening into
//! Speer fractions.
//!
//! A word `x0^{a1-1}x_{v1} ⋯ x0^{ak-1}x_{vk}` is sent to the fraction whose
//! innermost factor comes from the last block:
//! `1/(L_{vk}^{ak}(L_{vk}+L_{v(k-1)})^{a(k-1)} ⋯ (L_{vk}+⋯+L_{v1})^{a1})`,
//! that is `f[ak,…,a1; vk,…,v1]`. With this reading the map is a
//! homomorphism from the shuffle algebra to products of fractions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactlin::{orthogonal, span, InnerProduct, LinearForm};
use crate::germ::RationalGerm;
use crate::polynomial::Polynomial;
use crate::rational::{rational_to_string, Rational};
use crate::shuffle::{is_local_word, lyndon_rewrite, shuffle, Alphabet, Letter, Word, WordPolynomial};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LMapKind {
    /// `u ↦ z_u`, no locality constraint on specs.
    WeakChen,
    /// `u ↦ z_u`, distinct letters local.
    Chen,
    /// `I ↦ z_I`, disjoint sets local.
    Speer,
    Custom,
}

/// Letter-to-form assignment together with the alphabet it is read in.
#[derive(Clone, Debug)]
pub struct LMap {
    kind: LMapKind,
    alphabet: Alphabet,
    forms: HashMap<Letter, LinearForm>,
    q: InnerProduct,
}

impl LMap {
    pub fn weak_chen() -> Self {
        Self { kind: LMapKind::WeakChen, alphabet: Alphabet::chen(), forms: HashMap::new(), q: InnerProduct::standard() }
    }

    pub fn chen() -> Self {
        Self { kind: LMapKind::Chen, alphabet: Alphabet::chen(), forms: HashMap::new(), q: InnerProduct::standard() }
    }

    pub fn speer() -> Self {
        Self { kind: LMapKind::Speer, alphabet: Alphabet::speer(), forms: HashMap::new(), q: InnerProduct::standard() }
    }

    /// Fails unless local letters go to `q`-orthogonal forms.
    pub fn custom(alphabet: Alphabet, forms: Vec<(Letter, LinearForm)>, q: InnerProduct) -> Result<Self, Error> {
        for (i, (a, la)) in forms.iter().enumerate() {
            if la.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            for (b, lb) in &forms[i + 1..] {
                if alphabet.local(a, b) && !orthogonal(&q, &span([la]), &span([lb])) {
                    return Err(Error::NotLocal(format!("{a} ⊤ {b} but {la} and {lb} are not orthogonal")));
                }
            }
        }
        Ok(Self { kind: LMapKind::Custom, alphabet, forms: forms.into_iter().collect(), q })
    }

    pub fn kind(&self) -> LMapKind {
        self.kind
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn inner_product(&self) -> &InnerProduct {
        &self.q
    }

    pub fn requires_locality(&self) -> bool {
        self.kind != LMapKind::WeakChen
    }

    pub fn form(&self, l: &Letter) -> Result<LinearForm, Error> {
        match self.kind {
            LMapKind::Custom => self
                .forms
                .get(l)
                .cloned()
                .ok_or_else(|| Error::NotLocalSpec(format!("letter {l} has no assigned form"))),
            _ => match l {
                Letter::X0 => Err(Error::NotLocalSpec("x0 is not a fraction letter".into())),
                _ => Ok(LinearForm::sum_of(l.elements())),
            },
        }
    }
}

/// Exponents and letters of an ordered fraction `f[s1,…,sk; u1,…,uk]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FractionSpec {
    pub exps: Vec<u32>,
    pub letters: Vec<Letter>,
}

impl FractionSpec {
    pub fn new(exps: Vec<u32>, letters: Vec<Letter>) -> Result<Self, Error> {
        if exps.len() != letters.len() || exps.contains(&0) || letters.iter().any(Letter::is_x0) {
            return Err(Error::NotLocalSpec("malformed fraction spec".into()));
        }
        Ok(Self { exps, letters })
    }

    /// Chen spec with integer letters.
    pub fn chen(exps: &[u32], letters: &[u32]) -> Self {
        Self { exps: exps.to_vec(), letters: letters.iter().map(|&u| Letter::Index(u)).collect() }
    }

    pub fn depth(&self) -> usize {
        self.exps.len()
    }

    pub fn weight(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn normalized(&self, l: &LMap) -> Self {
        Self { exps: self.exps.clone(), letters: self.letters.iter().map(|x| l.alphabet.normalize(x)).collect() }
    }

    pub fn is_local(&self, l: &LMap) -> bool {
        is_local_word(&Word(self.letters.clone()), &l.alphabet)
    }

    /// Cumulative forms `L_{u1} + ⋯ + L_{ui}`.
    pub fn cumulative_forms(&self, l: &LMap) -> Result<Vec<LinearForm>, Error> {
        let mut acc = LinearForm::zero();
        let mut out = Vec::with_capacity(self.depth());
        for (i, u) in self.letters.iter().enumerate() {
            acc = acc.add(&l.form(u)?);
            if acc.is_zero() {
                return Err(Error::ZeroCumulativeForm(i + 1));
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    pub fn to_germ(&self, l: &LMap) -> Result<RationalGerm, Error> {
        let forms = self.cumulative_forms(l)?;
        RationalGerm::new(Polynomial::one(), forms.into_iter().zip(self.exps.iter().copied()))
    }

    /// The word whose image is this fraction (no locality check).
    pub fn word(&self) -> Word {
        let mut letters = Vec::new();
        for (s, u) in self.exps.iter().zip(&self.letters).rev() {
            letters.extend(std::iter::repeat_n(Letter::X0, (*s - 1) as usize));
            letters.push(u.clone());
        }
        Word(letters)
    }

    /// Inverse of [`FractionSpec::word`] on words not ending in `x0`.
    pub fn from_word(w: &Word) -> Result<Self, Error> {
        if w.ends_in_x0() {
            return Err(Error::WordEndsInX0);
        }
        let mut exps = Vec::new();
        let mut letters = Vec::new();
        let mut run = 0u32;
        for l in w.letters() {
            if l.is_x0() {
                run += 1;
            } else {
                exps.push(run + 1);
                letters.push(l.clone());
                run = 0;
            }
        }
        exps.reverse();
        letters.reverse();
        Ok(Self { exps, letters })
    }

    pub fn letter_set(&self) -> BTreeSet<Letter> {
        self.letters.iter().cloned().collect()
    }
}

impl fmt::Display for FractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        let letters: Vec<String> = self
            .letters
            .iter()
            .map(|l| match l {
                Letter::Set(s) => {
                    let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                    format!("{{{}}}", parts.join(","))
                }
                other => other.elements().first().map(|x| x.to_string()).unwrap_or_default(),
            })
            .collect();
        write!(f, "f[{}; {}]", exps.join(","), letters.join(","))
    }
}

/// `w ↦ f`, for words not ending in `x0`.
pub fn phi(w: &Word, l: &LMap) -> Result<RationalGerm, Error> {
    FractionSpec::from_word(w)?.to_germ(l)
}

/// The locality word mapped to `spec` by [`phi`].
pub fn word_of_fraction(spec: &FractionSpec, l: &LMap) -> Result<Word, Error> {
    let spec = spec.normalized(l);
    if l.requires_locality() && !spec.is_local(l) {
        return Err(Error::NotLocalSpec(spec.to_string()));
    }
    Ok(spec.word())
}

/// Rational combination of fraction specs.
pub type FractionCombo = Vec<(FractionSpec, Rational)>;

/// Sums term by term, grouped by common word prefix so that the partial
/// sums share their outer denominator factors.
pub fn combo_germ(combo: &[(FractionSpec, Rational)], l: &LMap) -> Result<RationalGerm, Error> {
    let mut items: Vec<(Vec<Letter>, RationalGerm)> = combo
        .iter()
        .map(|(s, c)| {
            let key = s.word().letters().to_vec();
            Ok((key, s.to_germ(l)?.scale(c)))
        })
        .collect::<Result<_, Error>>()?;
    items.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(prefix_sum(&items, 0))
}

fn prefix_sum(items: &[(Vec<Letter>, RationalGerm)], depth: usize) -> RationalGerm {
    let mut acc = RationalGerm::zero();
    let mut i = 0;
    while i < items.len() {
        let Some(head) = items[i].0.get(depth) else {
            acc = acc.add(&items[i].1);
            i += 1;
            continue;
        };
        let j = i + items[i..].iter().take_while(|(k, _)| k.get(depth) == Some(head)).count();
        acc = acc.add(&prefix_sum(&items[i..j], depth + 1));
        i = j;
    }
    acc
}

fn word_poly_to_combo(p: &WordPolynomial) -> Result<FractionCombo, Error> {
    p.terms().map(|(w, c)| Ok((FractionSpec::from_word(w)?, c.clone()))).collect()
}

/// Whether the two fractions have `q`-orthogonal supporting spaces.
pub fn specs_local(a: &FractionSpec, b: &FractionSpec, l: &LMap) -> Result<bool, Error> {
    let fa: Vec<LinearForm> = a.letters.iter().map(|u| l.form(u)).collect::<Result<_, _>>()?;
    let fb: Vec<LinearForm> = b.letters.iter().map(|u| l.form(u)).collect::<Result<_, _>>()?;
    Ok(orthogonal(&l.q, &span(fa.iter()), &span(fb.iter())))
}

/// Product of two local fractions as a combination of fractions, via the
/// shuffle of their words.
pub fn expand_product(a: &FractionSpec, b: &FractionSpec, l: &LMap) -> Result<FractionCombo, Error> {
    let (a, b) = (a.normalized(l), b.normalized(l));
    if !specs_local(&a, &b, l)? {
        return Err(Error::NotLocal(format!("{a} and {b} are not orthogonal")));
    }
    word_poly_to_combo(&shuffle(&a.word(), &b.word()))
}

/// Monomial in Lyndon fractions, with exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpecMonomial(pub Vec<(FractionSpec, u32)>);

impl fmt::Display for SpecMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (s, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Commutative polynomial whose indeterminates are Lyndon fractions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecPolynomial {
    pub terms: BTreeMap<SpecMonomial, Rational>,
}

impl SpecPolynomial {
    pub fn one() -> Self {
        let mut p = Self::default();
        p.add_term(SpecMonomial::default(), Rational::one());
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut m: BTreeMap<FractionSpec, u32> = BTreeMap::new();
                for (s, e) in a.0.iter().chain(&b.0) {
                    *m.entry(s.clone()).or_default() += e;
                }
                out.add_term(SpecMonomial(m.into_iter().collect()), ca * cb);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: SpecMonomial, c: Rational) {
        let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// Expands every monomial back into fractions by shuffling.
    pub fn expand(&self) -> Result<FractionCombo, Error> {
        let mut total = WordPolynomial::zero();
        for (m, c) in &self.terms {
            let mut acc = WordPolynomial::word(Word::empty());
            for (s, e) in &m.0 {
                for _ in 0..*e {
                    acc = acc.shuffle(&WordPolynomial::word(s.word()));
                }
            }
            total = total.add(&acc.scale(c));
        }
        word_poly_to_combo(&total)
    }
}

impl fmt::Display for SpecPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", rational_to_string(c))?;
            }
        }
        Ok(())
    }
}

/// Writes a combination of local fractions as a polynomial in Lyndon fractions.
pub fn lyndon_decompose(combo: &[(FractionSpec, Rational)], l: &LMap) -> Result<SpecPolynomial, Error> {
    let mut out = SpecPolynomial::default();
    for (spec, c) in combo {
        if spec.is_one() {
            out.add_term(SpecMonomial::default(), c.clone());
            continue;
        }
        let w = word_of_fraction(spec, l)?;
        for (m, x) in lyndon_rewrite(&w, &l.alphabet)?.terms() {
            let factors = m
                .0
                .iter()
                .map(|(lw, e)| Ok((FractionSpec::from_word(lw)?, *e)))
                .collect::<Result<Vec<_>, Error>>()?;
            let mut factors = factors;
            factors.sort();
            out.add_term(SpecMonomial(factors), x * c);
        }
    }
    Ok(out)
}

/// Node of a nested family of index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub set: Vec<u32>,
    #[serde(default = "one_u32")]
    pub exp: u32,
    #[serde(default)]
    pub children: Vec<ForestNode>,
}

fn one_u32() -> u32 {
    1
}

impl ForestNode {
    pub fn leaf(set: &[u32]) -> Self {
        Self { id: None, set: set.to_vec(), exp: 1, children: Vec::new() }
    }

    pub fn with_children(set: &[u32], children: Vec<ForestNode>) -> Self {
        Self { id: None, set: set.to_vec(), exp: 1, children }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(ForestNode::count).sum::<usize>()
    }

    fn validate(&self) -> Result<BTreeSet<u32>, Error> {
        let own: BTreeSet<u32> = self.set.iter().copied().collect();
        if own.is_empty() || own.contains(&0) {
            return Err(Error::InvalidForest("node sets must be nonempty sets of positive integers".into()));
        }
        if self.exp == 0 {
            return Err(Error::InvalidForest("node exponents must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.children {
            let cs = c.validate()?;
            if !cs.is_subset(&own) {
                return Err(Error::InvalidForest(format!("child {:?} is not inside {:?}", c.set, self.set)));
            }
            if !seen.is_disjoint(&cs) {
                return Err(Error::InvalidForest(format!("sibling sets overlap under {:?}", self.set)));
            }
            seen.extend(cs);
        }
        Ok(own)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forest {
    #[serde(rename = "nodes")]
    pub roots: Vec<ForestNode>,
}

impl Forest {
    pub fn new(roots: Vec<ForestNode>) -> Result<Self, Error> {
        let f = Self { roots };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let mut seen = BTreeSet::new();
        for r in &self.roots {
            let s = r.validate()?;
            if !seen.is_disjoint(&s) {
                return Err(Error::InvalidForest("root sets overlap".into()));
            }
            seen.extend(s);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.roots.iter().map(ForestNode::count).sum()
    }
}

/// `Π_H z_{I(H)}^{-s_H}` over all nodes.
pub fn forest_fraction(f: &Forest) -> Result<RationalGerm, Error> {
    f.validate()?;
    fn collect(n: &ForestNode, out: &mut Vec<(LinearForm, u32)>) {
        out.push((LinearForm::sum_of(n.set.iter().copied()), n.exp));
        for c in &n.children {
            collect(c, out);
        }
    }
    let mut den = Vec::new();
    for r in &f.roots {
        collect(r, &mut den);
    }
    RationalGerm::new(Polynomial::one(), den)
}

fn union_of(spec: &FractionSpec) -> BTreeSet<u32> {
    spec.letters.iter().flat_map(|l| l.elements()).collect()
}

fn multiply_combos(a: &FractionCombo, b: &FractionCombo, l: &LMap) -> Result<FractionCombo, Error> {
    let mut acc: BTreeMap<FractionSpec, Rational> = BTreeMap::new();
    for (x, cx) in a {
        for (y, cy) in b {
            for (z, cz) in expand_product(x, y, l)? {
                *acc.entry(z).or_insert_with(Rational::zero) += cz * cx * cy;
            }
        }
    }
    Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

fn flatten_node(n: &ForestNode, l: &LMap) -> Result<FractionCombo, Error> {
    let mut below: FractionCombo = vec![(FractionSpec::default(), Rational::one())];
    for c in &n.children {
        below = multiply_combos(&below, &flatten_node(c, l)?, l)?;
    }
    let own: BTreeSet<u32> = n.set.iter().copied().collect();
    Ok(below
        .into_iter()
        .map(|(mut spec, c)| {
            let covered = union_of(&spec);
            if covered == own {
                *spec.exps.last_mut().expect("children cover a nonempty set") += n.exp;
            } else {
                spec.exps.push(n.exp);
                spec.letters.push(Letter::Set(own.difference(&covered).copied().collect()));
            }
            (spec, c)
        })
        .collect())
}

/// Rewrites a forest fraction as a combination of Speer fractions: children
/// are flattened to ladders, sibling ladders multiplied by shuffling, and the
/// parent contributes the outermost factor.
pub fn flatten_forest(f: &Forest) -> Result<FractionCombo, Error> {
    f.validate()?;
    let l = LMap::speer();
    let mut acc: FractionCombo = vec![(FractionSpec::default(), Rational::one())];
    for r in &f.roots {
        acc = multiply_combos(&acc, &flatten_node(r, &l)?, &l)?;
    }
    Ok(acc)
}
