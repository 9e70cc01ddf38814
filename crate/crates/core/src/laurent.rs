//! Exact integer Laurent polynomials in a single formal variable.
//!
//! The same type carries both the loop parameter `d` of the unoriented
//! algebra and the quantum parameter `q` of the oriented one; the variable
//! name only matters when rendering or parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad Laurent polynomial at byte {pos}: {msg}")]
pub struct LaurentParseError {
    pub pos: usize,
    pub msg: String,
}

/// Finite map exponent -> nonzero integer coefficient.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Laurent {
    terms: BTreeMap<i64, i64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * x^exp`.
    pub fn monomial(c: i64, exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(exp, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: i64) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add_term(&mut self, c: i64, exp: i64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(exp).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&exp);
        }
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    /// Substitute an integer value for the variable. Negative exponents
    /// require the value to be a unit (`1` or `-1`), otherwise `None`.
    pub fn eval_at(&self, x: i64) -> Option<i64> {
        let mut acc = 0i64;
        for (e, c) in self.terms() {
            let v = if e >= 0 {
                x.checked_pow(u32::try_from(e).ok()?)?
            } else if x == 1 || x == -1 {
                x.pow(u32::try_from(-e).ok()? % 2)
            } else {
                return None;
            };
            acc = acc.checked_add(c.checked_mul(v)?)?;
        }
        Some(acc)
    }

    pub fn display_with(&self, var: char) -> LaurentDisplay<'_> {
        LaurentDisplay { poly: self, var }
    }

    /// Parse text like `2d^2-1`, `(q^-1 + 3)`, `-4` or `d`.
    pub fn parse(text: &str, var: char) -> Result<Self, LaurentParseError> {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            var: var as u8,
        }
        .parse_all()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: u8,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> LaurentParseError {
        LaurentParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Option<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }

    fn parse_all(mut self) -> Result<Laurent, LaurentParseError> {
        let parenthesised = self.peek() == Some(b'(');
        if parenthesised {
            self.pos += 1;
        }
        let poly = self.sum()?;
        if parenthesised {
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
        }
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(poly)
    }

    fn sum(&mut self) -> Result<Laurent, LaurentParseError> {
        let mut poly = Laurent::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            let (c, e) = self.term()?;
            poly.add_term(sign * c, e);
            first = false;
        }
        if first {
            return Err(self.err("empty polynomial"));
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(i64, i64), LaurentParseError> {
        let coeff = self.number();
        self.skip_ws();
        let has_var = self.peek() == Some(self.var);
        if !has_var {
            return coeff
                .map(|c| (c, 0))
                .ok_or_else(|| self.err("expected a term"));
        }
        self.pos += 1;
        let mut exp = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let e = self.number().ok_or_else(|| self.err("expected exponent"))?;
            exp = if neg { -e } else { e };
        }
        Ok((coeff.unwrap_or(1), exp))
    }
}

pub struct LaurentDisplay<'a> {
    poly: &'a Laurent,
    var: char,
}

impl fmt::Display for LaurentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.poly.terms().enumerate() {
            let mag = c.unsigned_abs();
            if idx == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}")?;
                    }
                    write!(f, "{}", self.var)?;
                    if e != 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({})", self.display_with('x'))
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Laurent {
    type Output = Laurent;
    fn add(mut self, rhs: Laurent) -> Laurent {
        self += &rhs;
        self
    }
}

impl AddAssign<&Laurent> for Laurent {
    fn add_assign(&mut self, rhs: &Laurent) {
        for (e, c) in rhs.terms() {
            self.add_term(c, e);
        }
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent {
            terms: self.terms.iter().map(|(&e, &c)| (e, -c)).collect(),
        }
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self + &(-rhs)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(c1 * c2, e1 + e2);
            }
        }
        out
    }
}

impl Mul for Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Laurent) -> Laurent {
        &self * &rhs
    }
}
