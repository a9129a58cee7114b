//! Text forms: germ expressions, words, fraction specs and Chen
//! combinations.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*' unary) | ('/' unary))*
//! unary  := ('+'|'-')* power
//! power  := atom ('^' posint)*
//! atom   := rational | 'z' posint | '(' expr ')' | 'f[' spec ']'
//! ```
//! Divisors must factor into homogeneous linear forms; `f[...]` atoms are
//! only accepted by [`parse_combo`].

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::evalgal::{Combo, ComboTerm};
use crate::exactlin::LinearForm;
use crate::fracmap::FractionSpec;
use crate::germ::RationalGerm;
use crate::polynomial::Polynomial;
use crate::rational::Rational;
use crate::shuffle::{Letter, Word};
use crate::Error;

#[derive(Clone, Debug)]
enum Node {
    Num(Rational),
    Var(u32),
    Spec(FractionSpec),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>, usize),
    Pow(Box<Node>, u32),
}

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

struct Parser<'a> {
    src: &'a [char],
    pos: usize,
    allow_specs: bool,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(perr(self.pos, format!("expected '{c}'")))
        }
    }

    fn number(&mut self) -> Result<BigInt, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(perr(start, "expected a number"));
        }
        let s: String = self.src[start..self.pos].iter().collect();
        Ok(s.parse().expect("digits"))
    }

    fn small(&mut self) -> Result<u32, Error> {
        let at = self.pos;
        let n = self.number()?;
        u32::try_from(n).map_err(|_| perr(at, "number too large"))
    }

    fn expr(&mut self) -> Result<Node, Error> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') | Some('−') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, Error> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some('*') | Some('·') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, Error> {
        match self.peek() {
            Some('-') | Some('−') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, Error> {
        let mut base = self.atom()?;
        while self.eat('^') {
            base = Node::Pow(Box::new(base), self.small()?);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, Error> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('z') => {
                self.pos += 1;
                let at = self.pos;
                let v = self.small()?;
                if v == 0 {
                    return Err(perr(at, "variables are numbered from 1"));
                }
                Ok(Node::Var(v))
            }
            Some('f') if self.allow_specs => {
                self.pos += 1;
                Ok(Node::Spec(self.spec_body()?))
            }
            Some(c) if c.is_ascii_digit() => Ok(Node::Num(Rational::from_integer(self.number()?))),
            Some(c) => Err(perr(self.pos, format!("unexpected '{c}'"))),
            None => Err(perr(self.pos, "unexpected end of input")),
        }
    }

    fn spec_letter(&mut self) -> Result<Letter, Error> {
        if self.eat('{') {
            let mut set = vec![self.small()?];
            while self.eat(',') {
                set.push(self.small()?);
            }
            self.expect('}')?;
            Ok(Letter::set(set))
        } else {
            let at = self.pos;
            let u = self.small()?;
            if u == 0 {
                return Err(perr(at, "letters are numbered from 1"));
            }
            Ok(Letter::Index(u))
        }
    }

    /// `[s1,…,sk; u1,…,uk]`, after the leading `f`.
    fn spec_body(&mut self) -> Result<FractionSpec, Error> {
        let start = self.pos;
        self.expect('[')?;
        let mut exps = Vec::new();
        if self.peek() != Some(';') {
            exps.push(self.small()?);
            while self.eat(',') {
                exps.push(self.small()?);
            }
        }
        self.expect(';')?;
        let mut letters = Vec::new();
        if self.peek() != Some(']') {
            letters.push(self.spec_letter()?);
            while self.eat(',') {
                letters.push(self.spec_letter()?);
            }
        }
        self.expect(']')?;
        FractionSpec::new(exps, letters).map_err(|_| perr(start, "exponents and letters must match, exponents positive"))
    }

    fn finish(&mut self) -> Result<(), Error> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(perr(self.pos, format!("unexpected '{c}'"))),
        }
    }
}

fn parse_tree(text: &str, allow_specs: bool) -> Result<Node, Error> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Parser { src: &chars, pos: 0, allow_specs };
    let node = p.expr()?;
    p.finish()?;
    Ok(node)
}

/// `(scalar, [(form, exponent)])` with exponents of either sign.
type Factored = (Rational, Vec<(LinearForm, i64)>);

fn factor_divisor(n: &Node, at: usize) -> Result<Factored, Error> {
    Ok(match n {
        Node::Num(c) => (c.clone(), Vec::new()),
        Node::Var(v) => (Rational::one(), vec![(LinearForm::var(*v), 1)]),
        Node::Neg(a) => {
            let (c, f) = factor_divisor(a, at)?;
            (-c, f)
        }
        Node::Mul(a, b) => {
            let (ca, mut fa) = factor_divisor(a, at)?;
            let (cb, fb) = factor_divisor(b, at)?;
            fa.extend(fb);
            (ca * cb, fa)
        }
        Node::Div(a, b, inner) => {
            let (ca, mut fa) = factor_divisor(a, at)?;
            let (cb, fb) = factor_divisor(b, *inner)?;
            if cb.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            fa.extend(fb.into_iter().map(|(l, e)| (l, -e)));
            (ca / cb, fa)
        }
        Node::Pow(a, e) => {
            let (c, f) = factor_divisor(a, at)?;
            (num_traits::pow(c, *e as usize), f.into_iter().map(|(l, x)| (l, x * *e as i64)).collect())
        }
        Node::Add(..) | Node::Sub(..) => {
            let g = eval_germ(n)?;
            if !g.is_polynomial() {
                return Err(perr(at, "divisor is not a product of linear forms"));
            }
            let p = g.numerator();
            if p.is_constant() {
                (p.constant_term(), Vec::new())
            } else if p.degree() == 1 {
                let c = p.constant_term();
                if !c.is_zero() {
                    return Err(Error::NonHomogeneousPole { pos: at });
                }
                (Rational::one(), vec![(p.as_linear_form().expect("degree one"), 1)])
            } else {
                return Err(perr(at, "divisor is not a product of linear forms"));
            }
        }
        Node::Spec(_) => return Err(perr(at, "fraction spec in a germ expression")),
    })
}

fn eval_germ(n: &Node) -> Result<RationalGerm, Error> {
    Ok(match n {
        Node::Num(c) => RationalGerm::constant(c.clone()),
        Node::Var(v) => RationalGerm::from_poly(Polynomial::var(*v)),
        Node::Neg(a) => eval_germ(a)?.neg(),
        Node::Add(a, b) => eval_germ(a)?.add(&eval_germ(b)?),
        Node::Sub(a, b) => eval_germ(a)?.sub(&eval_germ(b)?),
        Node::Mul(a, b) => eval_germ(a)?.mul(&eval_germ(b)?),
        Node::Pow(a, e) => eval_germ(a)?.pow(*e),
        Node::Div(a, b, at) => {
            let num = eval_germ(a)?;
            let (c, factors) = factor_divisor(b, *at)?;
            if c.is_zero() || factors.iter().any(|(l, _)| l.is_zero()) {
                return Err(Error::ZeroDenominator);
            }
            let mut poly = Polynomial::constant(Rational::one() / c);
            let mut den = Vec::new();
            for (l, e) in factors {
                if e > 0 {
                    den.push((l, e as u32));
                } else if e < 0 {
                    poly = poly.mul(&Polynomial::from_form(&l).pow((-e) as u32));
                }
            }
            num.mul(&RationalGerm::new(poly, den)?)
        }
        Node::Spec(_) => return Err(perr(0, "fraction spec in a germ expression")),
    })
}

/// Parses a germ expression into normal form.
pub fn parse_germ(text: &str) -> Result<RationalGerm, Error> {
    eval_germ(&parse_tree(text, false)?)
}

/// Text that [`parse_germ`] maps back to `g`.
pub fn render_germ(g: &RationalGerm) -> String {
    g.to_string()
}

fn eval_combo(n: &Node) -> Result<Combo, Error> {
    Ok(match n {
        Node::Num(c) => Combo::holomorphic(Polynomial::constant(c.clone())),
        Node::Var(v) => Combo::holomorphic(Polynomial::var(*v)),
        Node::Spec(s) => Combo::fraction(s.clone()),
        Node::Neg(a) => eval_combo(a)?.scale(&-Rational::one()),
        Node::Add(a, b) => eval_combo(a)?.add(&eval_combo(b)?),
        Node::Sub(a, b) => eval_combo(a)?.add(&eval_combo(b)?.scale(&-Rational::one())),
        Node::Mul(a, b) => eval_combo(a)?.mul(&eval_combo(b)?),
        Node::Pow(a, e) => {
            let base = eval_combo(a)?;
            (0..*e).fold(Combo::holomorphic(Polynomial::one()), |acc, _| acc.mul(&base))
        }
        Node::Div(a, b, at) => {
            let (c, factors) = factor_divisor(b, *at)?;
            if !factors.is_empty() {
                return Err(perr(*at, "combinations may only be divided by constants"));
            }
            if c.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            eval_combo(a)?.scale(&(Rational::one() / c))
        }
    })
}

/// Combination such as `2*z3*f[2;1]*f[1;2] - 1/2*f[1;1]`.
pub fn parse_combo(text: &str) -> Result<Combo, Error> {
    eval_combo(&parse_tree(text, true)?)
}

pub fn render_combo(x: &Combo) -> String {
    if x.terms.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = x
        .terms
        .iter()
        .map(|ComboTerm { coeff, holo, fractions }| {
            let mut factors = vec![format!("({coeff})")];
            if !(holo.is_constant() && holo.constant_term().is_one()) {
                factors.push(format!("({holo})"));
            }
            factors.extend(fractions.iter().map(|s| s.to_string()));
            factors.join("*")
        })
        .collect();
    parts.join(" + ")
}

/// `f[s1,…,sk; u1,…,uk]`.
pub fn parse_spec(text: &str) -> Result<FractionSpec, Error> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Parser { src: &chars, pos: 0, allow_specs: true };
    p.expect('f')?;
    let s = p.spec_body()?;
    p.finish()?;
    Ok(s)
}

/// Concatenated letters `x0`, `x12`, `x{1,3}`; `1` or empty for the empty word.
pub fn parse_word(text: &str) -> Result<Word, Error> {
    let chars: Vec<char> = text.chars().collect();
    let mut p = Parser { src: &chars, pos: 0, allow_specs: false };
    if p.peek().is_none() || (p.peek() == Some('1') && chars.iter().filter(|c| !c.is_whitespace()).count() == 1) {
        return Ok(Word::empty());
    }
    let mut letters = Vec::new();
    while p.peek().is_some() {
        p.expect('x')?;
        if p.peek() == Some('{') {
            letters.push(p.spec_letter()?);
        } else {
            let n = p.small()?;
            letters.push(if n == 0 { Letter::X0 } else { Letter::Index(n) });
        }
    }
    Ok(Word(letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn z(i: u32) -> LinearForm {
        LinearForm::var(i)
    }

    #[test]
    fn parse_examples() {
        let chen = parse_germ("1/(z1*(z1+z2))").unwrap();
        assert_eq!(chen, RationalGerm::new(Polynomial::one(), [(z(1), 1), (z(1).add(&z(2)), 1)]).unwrap());
        let gt = parse_germ("((z1-z2)/(z1+z2))^2").unwrap();
        let ft = RationalGerm::new(Polynomial::from_form(&z(1).sub(&z(2))), [(z(1).add(&z(2)), 1)]).unwrap();
        assert_eq!(gt, ft.pow(2));
        assert_eq!(parse_germ("1/(1+z1)"), Err(Error::NonHomogeneousPole { pos: 2 }));
        assert_eq!(parse_germ("z2/(z1+z2)").unwrap().to_string(), "z2/((z1 + z2))");
    }

    #[test]
    fn parse_arithmetic() {
        assert_eq!(parse_germ("1/2 + 1/3").unwrap(), RationalGerm::constant(rat(5, 6)));
        assert_eq!(parse_germ("-z1 + z1").unwrap(), RationalGerm::zero());
        assert_eq!(parse_germ("z1/(1/z1)").unwrap(), RationalGerm::from_poly(Polynomial::var(1).pow(2)));
        assert_eq!(parse_germ("(z1 − z2)/(2*(z1 - z2))").unwrap(), RationalGerm::constant(rat(1, 2)));
        assert_eq!(parse_germ("1/(z1^2*z2)").unwrap(), RationalGerm::new(Polynomial::one(), [(z(1), 2), (z(2), 1)]).unwrap());
        assert_eq!(parse_germ("3/(-z1)").unwrap(), RationalGerm::pole(&z(1), 1).unwrap().scale(&int(-3)));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_germ("1/(z1^2 + z2^2)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_germ("z1 +"), Err(Error::Parse { .. })));
        assert!(matches!(parse_germ("z0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_germ("y1"), Err(Error::Parse { pos: 0, .. })));
        assert_eq!(parse_germ("1/(z1-z1)"), Err(Error::ZeroDenominator));
        assert_eq!(parse_germ("1/0"), Err(Error::ZeroDenominator));
        assert!(matches!(parse_germ("f[1;1]"), Err(Error::Parse { .. })));
    }

    #[test]
    fn render_round_trip() {
        for text in ["(z1 - 3/2*z2^2 + 4)/((z1 + z2)^2*(z3))", "-z1/(z2)", "1/2", "0", "z1*z2/((z1 - z2)^3)"] {
            let g = parse_germ(text).unwrap();
            assert_eq!(parse_germ(&render_germ(&g)).unwrap(), g, "{text}");
        }
    }

    #[test]
    fn words_and_specs() {
        assert_eq!(parse_word("x0x1x0x2").unwrap().to_string(), "x0x1x0x2");
        assert_eq!(parse_word("x{1,3}x0").unwrap().0, vec![Letter::set([1, 3]), Letter::X0]);
        assert_eq!(parse_word("x12").unwrap().0, vec![Letter::Index(12)]);
        assert_eq!(parse_word("1").unwrap(), Word::empty());
        assert!(parse_word("x").is_err());
        let s = parse_spec("f[2,1; 1,2]").unwrap();
        assert_eq!(s, FractionSpec::chen(&[2, 1], &[1, 2]));
        assert_eq!(parse_spec(&s.to_string()).unwrap(), s);
        let sp = parse_spec("f[1,2; {1},{2,3}]").unwrap();
        assert_eq!(parse_spec(&sp.to_string()).unwrap(), sp);
        assert!(parse_spec("f[1,2; 1]").is_err());
        assert!(parse_spec("f[0; 1]").is_err());
    }

    #[test]
    fn combos() {
        let x = parse_combo("2*z3*f[2;1]*f[1;2] - 1/2*f[1;1] + 1").unwrap();
        assert_eq!(x.terms.len(), 3);
        let one = x.terms.iter().find(|t| t.fractions.is_empty()).unwrap();
        assert!(one.holo.is_constant());
        assert!(matches!(parse_combo("f[1;1]/z1"), Err(Error::Parse { .. })));
    }
}
