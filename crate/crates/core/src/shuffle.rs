//! Words over an ordered locality alphabet `{x0} ⊔ {x_u}`, the shuffle
//! product, Chen–Fox–Lyndon factorization and the rewriting of words as
//! polynomials in Lyndon words.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::{factorial, rational_to_string, Rational};
use crate::Error;

/// `x0`, an integer letter `x_n`, or a finite-set letter `x_{I}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X0,
    Index(u32),
    /// Sorted ascending, nonempty.
    Set(Vec<u32>),
}

impl Letter {
    pub fn set<I: IntoIterator<Item = u32>>(elems: I) -> Self {
        let mut v: Vec<u32> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Letter::Set(v)
    }

    pub fn is_x0(&self) -> bool {
        matches!(self, Letter::X0)
    }

    /// Underlying index set; `x_n` counts as `{n}`.
    pub fn elements(&self) -> Vec<u32> {
        match self {
            Letter::X0 => Vec::new(),
            Letter::Index(n) => vec![*n],
            Letter::Set(s) => s.clone(),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::X0 => write!(f, "x0"),
            Letter::Index(n) => write!(f, "x{n}"),
            Letter::Set(s) => {
                let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                write!(f, "x{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    pub fn repeat(&self, n: usize) -> Word {
        Word((0..n).flat_map(|_| self.0.iter().cloned()).collect())
    }

    pub fn ends_in_x0(&self) -> bool {
        self.0.last().is_some_and(Letter::is_x0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    /// Integer letters, `u ⊤ v` iff `u ≠ v`.
    Chen,
    /// Finite sets under the descending-element lexicographic order, `I ⊤ J` iff disjoint.
    Speer,
    Table { rank: HashMap<Letter, usize>, local: Vec<Vec<bool>> },
}

/// Order and locality relation on the augmented alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    kind: Kind,
}

impl Alphabet {
    pub fn chen() -> Self {
        Self { kind: Kind::Chen }
    }

    pub fn speer() -> Self {
        Self { kind: Kind::Speer }
    }

    /// Letters listed in increasing order; `local` lists the unordered pairs `u ⊤ v`.
    pub fn table(order: Vec<Letter>, local: &[(Letter, Letter)]) -> Result<Self, Error> {
        let mut rank = HashMap::new();
        for (i, l) in order.iter().enumerate() {
            if l.is_x0() || rank.insert(l.clone(), i).is_some() {
                return Err(Error::NotLocal(format!("bad alphabet letter {l}")));
            }
        }
        let n = order.len();
        let mut table = vec![vec![false; n]; n];
        for (a, b) in local {
            let (Some(&i), Some(&j)) = (rank.get(a), rank.get(b)) else {
                return Err(Error::NotLocal(format!("unknown letter in pair ({a}, {b})")));
            };
            if i == j {
                return Err(Error::NotLocal(format!("{a} cannot be local to itself")));
            }
            table[i][j] = true;
            table[j][i] = true;
        }
        Ok(Self { kind: Kind::Table { rank, local: table } })
    }

    pub fn is_speer(&self) -> bool {
        matches!(self.kind, Kind::Speer)
    }

    /// Brings a letter to the form used by this alphabet (`x_n` becomes `x_{n}` for Speer).
    pub fn normalize(&self, l: &Letter) -> Letter {
        match (&self.kind, l) {
            (Kind::Speer, Letter::Index(n)) => Letter::Set(vec![*n]),
            (Kind::Chen, Letter::Set(s)) if s.len() == 1 => Letter::Index(s[0]),
            _ => l.clone(),
        }
    }

    pub fn normalize_word(&self, w: &Word) -> Word {
        Word(w.0.iter().map(|l| self.normalize(l)).collect())
    }

    pub fn cmp_letters(&self, a: &Letter, b: &Letter) -> Ordering {
        match (a, b) {
            (Letter::X0, Letter::X0) => Ordering::Equal,
            (Letter::X0, _) => Ordering::Less,
            (_, Letter::X0) => Ordering::Greater,
            _ => match &self.kind {
                Kind::Chen | Kind::Speer => cmp_sets(&a.elements(), &b.elements()),
                Kind::Table { rank, .. } => {
                    let ra = rank.get(a).copied().unwrap_or(usize::MAX);
                    let rb = rank.get(b).copied().unwrap_or(usize::MAX);
                    ra.cmp(&rb).then_with(|| a.cmp(b))
                }
            },
        }
    }

    /// Lexicographic order, a proper prefix being smaller.
    pub fn cmp_words(&self, a: &[Letter], b: &[Letter]) -> Ordering {
        for (x, y) in a.iter().zip(b) {
            let o = self.cmp_letters(x, y);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.len().cmp(&b.len())
    }

    /// `x0` is local to every letter, itself included.
    pub fn local(&self, a: &Letter, b: &Letter) -> bool {
        if a.is_x0() || b.is_x0() {
            return true;
        }
        match &self.kind {
            Kind::Chen | Kind::Speer => {
                let (sa, sb) = (a.elements(), b.elements());
                !sa.iter().any(|x| sb.contains(x))
            }
            Kind::Table { rank, local } => match (rank.get(a), rank.get(b)) {
                (Some(&i), Some(&j)) => local[i][j],
                _ => false,
            },
        }
    }
}

/// `I ≥ J` when the first nonzero difference of descending-sorted elements is
/// positive, or all compared entries agree and `I` has more elements.
fn cmp_sets(a: &[u32], b: &[u32]) -> Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Finitely supported rational combination of words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WordPolynomial {
    terms: BTreeMap<Word, Rational>,
}

impl WordPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(w: Word) -> Self {
        Self::term(w, Rational::one())
    }

    pub fn term(w: Word, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn add_term(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
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

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect() }
    }

    /// Bilinear extension of the shuffle product.
    pub fn shuffle(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (w, a) in &self.terms {
            for (v, b) in &other.terms {
                for (u, c) in shuffle(w, v).terms {
                    out.add_term(u, c * a * b);
                }
            }
        }
        out
    }
}

impl fmt::Display for WordPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{}*{w}", rational_to_string(c))?;
            }
        }
        Ok(())
    }
}

/// Sum of all interleavings of `w` and `v`, with multiplicity.
pub fn shuffle(w: &Word, v: &Word) -> WordPolynomial {
    // counts[i][j]: shuffles of the suffixes w[i..], v[j..].
    let (n, m) = (w.len(), v.len());
    let mut table: Vec<Vec<BTreeMap<Vec<Letter>, BigInt>>> = vec![vec![BTreeMap::new(); m + 1]; n + 1];
    table[n][m].insert(Vec::new(), BigInt::one());
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            if i == n && j == m {
                continue;
            }
            let mut cell: BTreeMap<Vec<Letter>, BigInt> = BTreeMap::new();
            if i < n {
                for (tail, c) in &table[i + 1][j] {
                    let mut word = Vec::with_capacity(tail.len() + 1);
                    word.push(w.0[i].clone());
                    word.extend(tail.iter().cloned());
                    *cell.entry(word).or_insert_with(BigInt::zero) += c;
                }
            }
            if j < m {
                for (tail, c) in &table[i][j + 1] {
                    let mut word = Vec::with_capacity(tail.len() + 1);
                    word.push(v.0[j].clone());
                    word.extend(tail.iter().cloned());
                    *cell.entry(word).or_insert_with(BigInt::zero) += c;
                }
            }
            table[i][j] = cell;
        }
    }
    WordPolynomial {
        terms: std::mem::take(&mut table[0][0])
            .into_iter()
            .map(|(l, c)| (Word(l), Rational::from_integer(c)))
            .collect(),
    }
}

/// Strictly smaller than each proper rotation.
pub fn is_lyndon(w: &Word, a: &Alphabet) -> Result<bool, Error> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let l = &w.0;
    Ok((1..l.len()).all(|k| {
        let rot: Vec<Letter> = l[k..].iter().chain(&l[..k]).cloned().collect();
        a.cmp_words(l, &rot) == Ordering::Less
    }))
}

/// Duval's algorithm; factors strictly decreasing, with multiplicities.
pub fn cfl(w: &Word, a: &Alphabet) -> Result<Vec<(Word, usize)>, Error> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let s = &w.0;
    let n = s.len();
    let mut out: Vec<(Word, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        let mut k = i;
        while j < n {
            match a.cmp_letters(&s[k], &s[j]) {
                Ordering::Less => k = i,
                Ordering::Equal => k += 1,
                Ordering::Greater => break,
            }
            j += 1;
        }
        let period = j - k;
        let factor = Word(s[i..i + period].to_vec());
        let mut reps = 0;
        while i <= k {
            i += period;
            reps += 1;
        }
        match out.last_mut() {
            Some((last, c)) if *last == factor => *c += reps,
            _ => out.push((factor, reps)),
        }
    }
    Ok(out)
}

pub fn is_local_word(w: &Word, a: &Alphabet) -> bool {
    let l = &w.0;
    (0..l.len()).all(|i| (i + 1..l.len()).all(|j| a.local(&l[i], &l[j])))
}

/// `w ⊤ v`: every letter of `w` is local to every letter of `v`.
pub fn is_local_pair_words(w: &Word, v: &Word, a: &Alphabet) -> bool {
    w.0.iter().all(|x| v.0.iter().all(|y| a.local(x, y)))
}

/// `w = w1⋯wk x0^r` with distinct, decreasing, pairwise local Lyndon factors above `x0`.
pub fn locality_cfl(w: &Word, a: &Alphabet) -> Result<(Vec<Word>, usize), Error> {
    if !is_local_word(w, a) {
        return Err(Error::NotLocal(format!("{w} is not a locality word")));
    }
    if w.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let x0 = Word(vec![Letter::X0]);
    let mut factors = Vec::new();
    let mut r = 0;
    for (f, c) in cfl(w, a)? {
        if f == x0 {
            r = c;
        } else {
            debug_assert_eq!(c, 1);
            factors.extend(std::iter::repeat_n(f, c));
        }
    }
    Ok((factors, r))
}

/// Commutative monomial in Lyndon words, sorted, with exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LyndonMonomial(pub Vec<(Word, u32)>);

impl LyndonMonomial {
    pub fn from_factors<I: IntoIterator<Item = (Word, u32)>>(factors: I) -> Self {
        let mut m: BTreeMap<Word, u32> = BTreeMap::new();
        for (w, e) in factors {
            if e > 0 {
                *m.entry(w).or_insert(0) += e;
            }
        }
        LyndonMonomial(m.into_iter().collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// The monomial evaluated in the shuffle algebra.
    pub fn expand(&self) -> WordPolynomial {
        let mut acc = WordPolynomial::word(Word::empty());
        for (w, e) in &self.0 {
            for _ in 0..*e {
                acc = acc.shuffle(&WordPolynomial::word(w.clone()));
            }
        }
        acc
    }
}

impl fmt::Display for LyndonMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (w, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if *e == 1 {
                write!(f, "[{w}]")?;
            } else {
                write!(f, "[{w}]^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in Lyndon words viewed as commuting indeterminates.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LyndonPolynomial {
    terms: BTreeMap<LyndonMonomial, Rational>,
}

impl LyndonPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: LyndonMonomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: LyndonMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LyndonMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m, a) in &self.terms {
            for (n, b) in &other.terms {
                let prod = LyndonMonomial::from_factors(m.0.iter().chain(&n.0).cloned());
                out.add_term(prod, a * b);
            }
        }
        out
    }

    pub fn expand(&self) -> WordPolynomial {
        let mut out = WordPolynomial::zero();
        for (m, c) in &self.terms {
            out = out.add(&m.expand().scale(c));
        }
        out
    }
}

impl fmt::Display for LyndonPolynomial {
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

type RewriteCache = HashMap<(Word, bool), LyndonPolynomial>;

fn cache() -> &'static Mutex<RewriteCache> {
    static CACHE: std::sync::OnceLock<Mutex<RewriteCache>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Writes `w` as a polynomial in Lyndon words:
/// `w = (1/Π i_j!) w1^{ш i1} ш ⋯ ш wk^{ш ik} + (lexicographically smaller anagrams of w)`,
/// recursing on the smaller anagrams.
pub fn lyndon_rewrite(w: &Word, a: &Alphabet) -> Result<LyndonPolynomial, Error> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut local: RewriteCache = HashMap::new();
    rewrite_inner(w, a, &mut local)
}

fn rewrite_inner(w: &Word, a: &Alphabet, memo: &mut RewriteCache) -> Result<LyndonPolynomial, Error> {
    let key = (w.clone(), a.is_speer());
    if let Some(p) = memo.get(&key) {
        return Ok(p.clone());
    }
    if matches!(a.kind, Kind::Chen | Kind::Speer) {
        if let Some(p) = cache().lock().expect("rewrite cache").get(&key) {
            return Ok(p.clone());
        }
    }
    let factors = cfl(w, a)?;
    let lead = LyndonMonomial::from_factors(factors.iter().map(|(f, c)| (f.clone(), *c as u32)));
    let norm: BigInt = factors.iter().map(|(_, c)| factorial(*c as u32)).product();
    let norm = Rational::from_integer(norm).recip();
    let mut result = LyndonPolynomial::monomial(lead.clone(), norm.clone());
    if !(factors.len() == 1 && factors[0].1 == 1) {
        let remainder = WordPolynomial::word(w.clone()).sub(&lead.expand().scale(&norm));
        for (u, c) in remainder.terms() {
            assert_eq!(
                a.cmp_words(&u.0, &w.0),
                Ordering::Less,
                "leading shuffle term of {w} must dominate"
            );
            result = result.add(&rewrite_inner(u, a, memo)?.scale(c));
        }
    }
    memo.insert(key.clone(), result.clone());
    if matches!(a.kind, Kind::Chen | Kind::Speer) {
        cache().lock().expect("rewrite cache").insert(key, result.clone());
    }
    Ok(result)
}

/// Locality Lyndon words over `{x0} ∪ letters` not ending in `x0`, up to
/// `max_length`, sorted by length then lexicographically.
pub fn locality_lyndon_generators(a: &Alphabet, letters: &[Letter], max_length: usize) -> Vec<Word> {
    let mut alphabet: Vec<Letter> = vec![Letter::X0];
    for l in letters {
        let l = a.normalize(l);
        if !l.is_x0() && !alphabet.contains(&l) {
            alphabet.push(l);
        }
    }
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_length {
        let mut next = Vec::new();
        for prefix in &layer {
            for l in &alphabet {
                if prefix.iter().any(|p| !a.local(p, l)) {
                    continue;
                }
                let mut w = prefix.clone();
                w.push(l.clone());
                next.push(w);
            }
        }
        for w in &next {
            let word = Word(w.clone());
            if !word.ends_in_x0() && is_lyndon(&word, a).unwrap_or(false) {
                out.push(word);
            }
        }
        layer = next;
    }
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| a.cmp_words(&x.0, &y.0)));
    out
}
