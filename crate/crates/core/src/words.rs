//! The presented side: words over `{d, e1, .., e(n-1)}`, linear combinations
//! with exact Laurent coefficients, and evaluation onto diagrams.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::{Laurent, LaurentParseError};
use crate::planar::{self, Diagram, PlanarError, ScaledDiagram};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown token {token:?} at word position {pos}")]
    UnknownToken { pos: usize, token: String },
    #[error("generator e{index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("ambient size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("bad linear combination term {term}: {msg}")]
    BadTerm { term: usize, msg: String },
    #[error(transparent)]
    Coefficient(#[from] LaurentParseError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

/// `Delta` sorts below every generator, and generators by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Delta,
    Gen(usize),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Delta => write!(f, "d"),
            Letter::Gen(i) => write!(f, "e{i}"),
        }
    }
}

/// A word in the free monoid. Ordered by shortlex: shorter words first,
/// then lexicographically with `d < e1 < e2 < ..`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn gens(indices: &[usize]) -> Self {
        Self(indices.iter().map(|&i| Letter::Gen(i)).collect())
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
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Largest generator index present, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.0
            .iter()
            .filter_map(|l| match l {
                Letter::Gen(i) => Some(*i),
                Letter::Delta => None,
            })
            .max()
    }

    pub fn delta_count(&self) -> usize {
        self.0.iter().filter(|l| **l == Letter::Delta).count()
    }

    /// The word with every `d` removed.
    pub fn without_deltas(&self) -> Word {
        Word(
            self.0
                .iter()
                .copied()
                .filter(|l| *l != Letter::Delta)
                .collect(),
        )
    }

    pub fn check_range(&self, n: usize) -> Result<(), WordError> {
        for l in &self.0 {
            if let Letter::Gen(i) = *l {
                if i == 0 || i >= n {
                    return Err(WordError::IndexOutOfRange { index: i, n });
                }
            }
        }
        Ok(())
    }

    /// Grammar only: whitespace-separated `d` and `e<INT>` tokens.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for (pos, tok) in text.split_whitespace().enumerate() {
            let letter = if tok == "d" {
                Letter::Delta
            } else if let Some(idx) = tok.strip_prefix('e') {
                match idx.parse::<usize>() {
                    Ok(i) if !idx.starts_with('+') => Letter::Gen(i),
                    _ => {
                        return Err(WordError::UnknownToken {
                            pos: pos + 1,
                            token: tok.to_string(),
                        })
                    }
                }
            } else {
                return Err(WordError::UnknownToken {
                    pos: pos + 1,
                    token: tok.to_string(),
                });
            };
            letters.push(letter);
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, l) in self.0.iter().enumerate() {
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses a word and checks its indices against `n`.
pub fn parse_word(text: &str, n: usize) -> Result<Word, WordError> {
    let w = Word::parse(text)?;
    w.check_range(n)?;
    Ok(w)
}

pub fn format_word(w: &Word) -> String {
    w.to_string()
}

/// Finite map word -> nonzero Laurent coefficient, for a fixed ambient `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinComb {
    n: usize,
    terms: BTreeMap<Word, Laurent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermRecord {
    pub word: String,
    pub coefficient: String,
}

impl LinComb {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(n: usize, word: Word, coeff: Laurent) -> Self {
        let mut out = Self::zero(n);
        out.add_term(word, &coeff);
        out
    }

    pub fn unit(n: usize) -> Self {
        Self::monomial(n, Word::empty(), Laurent::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Laurent)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Laurent {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, word: Word, coeff: &Laurent) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(word.clone()).or_default();
        *slot += coeff;
        if slot.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &LinComb) -> Result<LinComb, WordError> {
        same_n(self.n, other.n)?;
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(w, c)| TermRecord {
                word: w.to_string(),
                coefficient: c.display_with('d').to_string(),
            })
            .collect()
    }

    /// Parses `coeff '*' word ('+' coeff '*' word)*` where `coeff` is an
    /// integer or a parenthesised Laurent polynomial in `d`.
    pub fn parse(text: &str, n: usize) -> Result<LinComb, WordError> {
        let mut out = LinComb::zero(n);
        for (idx, chunk) in split_top_level(text).into_iter().enumerate() {
            let bad = |msg: &str| WordError::BadTerm {
                term: idx + 1,
                msg: msg.to_string(),
            };
            let (coeff, word) = chunk
                .split_once('*')
                .ok_or_else(|| bad("expected 'coeff * word'"))?;
            let coeff = Laurent::parse(coeff.trim(), 'd')?;
            let word = parse_word(word, n)?;
            out.add_term(word, &coeff);
        }
        Ok(out)
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (w, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{}", c.display_with('d'), w)?;
        }
        Ok(())
    }
}

pub(crate) fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out.retain(|s| !s.trim().is_empty());
    out
}

fn same_n(left: usize, right: usize) -> Result<(), WordError> {
    if left != right {
        return Err(WordError::SizeMismatch { left, right });
    }
    Ok(())
}

/// Bilinear extension of concatenation.
pub fn multiply(a: &LinComb, b: &LinComb) -> Result<LinComb, WordError> {
    same_n(a.n, b.n)?;
    let mut out = LinComb::zero(a.n);
    for (u, cu) in a.terms() {
        for (v, cv) in b.terms() {
            out.add_term(u.concat(v), &(cu * cv));
        }
    }
    Ok(out)
}

/// The evaluation morphism on monomials: `d` scales by `δ`, `e_i` is `E_i`.
pub fn evaluate(w: &Word, n: usize) -> Result<ScaledDiagram, WordError> {
    w.check_range(n)?;
    let mut acc = ScaledDiagram::unscaled(planar::identity(n)?);
    for l in w.letters() {
        match *l {
            Letter::Delta => acc.power += 1,
            Letter::Gen(i) => {
                let g = ScaledDiagram::unscaled(planar::generator(n, i)?);
                acc = planar::compose(&acc, &g)?;
            }
        }
    }
    Ok(acc)
}

/// Finite map diagram -> Laurent polynomial in `δ`.
pub type DiagramComb = BTreeMap<Diagram, Laurent>;

fn add_diagram_term(out: &mut DiagramComb, d: Diagram, c: Laurent) {
    if c.is_zero() {
        return;
    }
    let slot = out.entry(d.clone()).or_default();
    *slot += &c;
    if slot.is_zero() {
        out.remove(&d);
    }
}

pub fn evaluate_lincomb(x: &LinComb) -> Result<DiagramComb, WordError> {
    let mut out = DiagramComb::new();
    for (w, c) in x.terms() {
        let sd = evaluate(w, x.n)?;
        add_diagram_term(&mut out, sd.diagram, c.shift(i64::from(sd.power)));
    }
    Ok(out)
}

/// Product in the diagram algebra, extended bilinearly.
pub fn multiply_diagram_combs(x: &DiagramComb, y: &DiagramComb) -> Result<DiagramComb, WordError> {
    let mut out = DiagramComb::new();
    for (a, ca) in x {
        for (b, cb) in y {
            let ab = planar::compose(&a.clone().into(), &b.clone().into())?;
            add_diagram_term(&mut out, ab.diagram, (ca * cb).shift(i64::from(ab.power)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(
            w("d e1 e2").0,
            vec![Letter::Delta, Letter::Gen(1), Letter::Gen(2)]
        );
        assert_eq!(format_word(&Word::empty()), "");
        assert!(matches!(
            Word::parse("d x"),
            Err(WordError::UnknownToken { pos: 2, .. })
        ));
        assert!(matches!(
            Word::parse("e"),
            Err(WordError::UnknownToken { .. })
        ));
        assert_eq!(
            parse_word("e1 e4", 4),
            Err(WordError::IndexOutOfRange { index: 4, n: 4 })
        );
        assert!(parse_word("e0", 4).is_err());
    }

    #[test]
    fn shortlex_order() {
        assert!(w("d e1") < w("e1 e1"));
        assert!(w("e3") < w("e1 e1"));
        assert!(w("e1 e3") < w("e3 e1"));
    }

    #[test]
    fn multiply_examples() {
        let n = 3;
        let one = |t: &str| LinComb::monomial(n, w(t), Laurent::one());
        let x = LinComb::monomial(n, w("e2 e1"), Laurent::parse("2d - 1", 'd').unwrap());
        assert_eq!(multiply(&LinComb::unit(n), &x).unwrap(), x);
        assert_eq!(multiply(&one("e1"), &one("e1")).unwrap(), one("e1 e1"));
        let sum = one("e1").add(&LinComb::unit(n)).unwrap();
        let expected = one("e1 e2").add(&one("e2")).unwrap();
        assert_eq!(multiply(&sum, &one("e2")).unwrap(), expected);
        assert!(multiply(&LinComb::unit(3), &LinComb::unit(4)).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let sq = evaluate(&w("e1 e1"), 2).unwrap();
        assert_eq!(
            sq,
            ScaledDiagram {
                power: 1,
                diagram: planar::generator(2, 1).unwrap()
            }
        );
        assert_eq!(
            evaluate(&Word::empty(), 3).unwrap(),
            ScaledDiagram::unscaled(planar::identity(3).unwrap())
        );
        assert_eq!(
            evaluate(&w("e1 e2 e1"), 3).unwrap(),
            ScaledDiagram::unscaled(planar::generator(3, 1).unwrap())
        );
        assert_eq!(evaluate(&w("d d"), 2).unwrap().power, 2);
        assert!(evaluate(&w("e3"), 3).is_err());
    }

    #[test]
    fn evaluate_lincomb_examples() {
        let x = LinComb::monomial(2, w("e1 e1"), Laurent::one());
        let got = evaluate_lincomb(&x).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(
            got[&planar::generator(2, 1).unwrap()],
            Laurent::monomial(1, 1)
        );

        let mut x = LinComb::zero(2);
        x.add_term(w("e1"), &Laurent::one());
        x.add_term(w("e1"), &Laurent::constant(-1));
        assert!(evaluate_lincomb(&x).unwrap().is_empty());

        let x = LinComb::monomial(3, w("e2 e1 e2"), Laurent::one());
        let got = evaluate_lincomb(&x).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[&planar::generator(3, 2).unwrap()], Laurent::one());
    }

    #[test]
    fn lincomb_text_roundtrip() {
        let x = LinComb::parse("(2d^2-1)*e1 e2 + 3*e2 + -1*", 3).unwrap();
        assert_eq!(
            x.coefficient(&w("e1 e2")),
            Laurent::parse("2d^2-1", 'd').unwrap()
        );
        assert_eq!(x.coefficient(&Word::empty()), Laurent::constant(-1));
        assert_eq!(LinComb::parse(&x.to_string(), 3).unwrap(), x);
        assert!(LinComb::parse("e1", 3).is_err());
        assert!(LinComb::parse("2*e5", 3).is_err());
    }

    fn arb_word(n: usize, max_len: usize) -> impl Strategy<Value = Word> {
        let letter = prop_oneof![
            1 => Just(Letter::Delta),
            4 => (1..n).prop_map(Letter::Gen),
        ];
        prop::collection::vec(letter, 0..=max_len).prop_map(Word)
    }

    fn arb_lincomb(n: usize) -> impl Strategy<Value = LinComb> {
        prop::collection::vec((arb_word(n, 4), -3i64..4, -2i64..3), 0..4).prop_map(move |ts| {
            let mut x = LinComb::zero(n);
            for (w, c, e) in ts {
                x.add_term(w, &Laurent::monomial(c, e));
            }
            x
        })
    }

    proptest! {
        #[test]
        fn word_text_roundtrip(w in arb_word(7, 12)) {
            prop_assert_eq!(Word::parse(&format_word(&w)).unwrap(), w);
        }

        #[test]
        fn evaluate_is_a_monoid_morphism(
            (n, u, v) in (2usize..=6).prop_flat_map(|n| (Just(n), arb_word(n, 6), arb_word(n, 6)))
        ) {
            let uv = evaluate(&u.concat(&v), n).unwrap();
            let composed = planar::compose(&evaluate(&u, n).unwrap(), &evaluate(&v, n).unwrap()).unwrap();
            prop_assert_eq!(uv, composed);
        }

        #[test]
        fn multiply_is_associative_and_unital(x in arb_lincomb(4), y in arb_lincomb(4), z in arb_lincomb(4)) {
            let left = multiply(&multiply(&x, &y).unwrap(), &z).unwrap();
            let right = multiply(&x, &multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            prop_assert_eq!(multiply(&LinComb::unit(4), &x).unwrap(), x.clone());
            prop_assert_eq!(multiply(&x, &LinComb::unit(4)).unwrap(), x);
        }

        #[test]
        fn evaluation_is_multiplicative(x in arb_lincomb(4), y in arb_lincomb(4)) {
            let lhs = evaluate_lincomb(&multiply(&x, &y).unwrap()).unwrap();
            let rhs = multiply_diagram_combs(&evaluate_lincomb(&x).unwrap(), &evaluate_lincomb(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
