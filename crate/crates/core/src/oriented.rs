//! The oriented algebra: words in `e_i` interleaved with idempotents `1_λ`,
//! where `λ` ranges over orientation words with exactly `k` down symbols
//! (minimal coset representatives). Rewriting rules are ground instances,
//! each checked against the oriented-net semantics of [`crate::category`].

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::category::{
    eval_net, hom_basis, BubbleConvention, CategoryError, GenArrow, MTerm, ONet, Object, Sym,
};
use crate::jnf::{enumerate_jnf, JnfError};
use crate::laurent::{Laurent, LaurentParseError};
use crate::rewrite::{tl_rules, RewriteError};

/// Largest `n` for which systems are built.
pub const ORIENTED_BOUND: usize = 8;
/// Rewrite steps allowed for one monomial.
pub const ORIENTED_STEP_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrientedError {
    #[error("n = {n} must lie in 1..={bound}")]
    BadN { n: usize, bound: usize },
    #[error("k = {k} exceeds n = {n}")]
    BadK { n: usize, k: usize },
    #[error("orientation '{0}' is not a word over 'v' and '^'")]
    BadOrientation(String),
    #[error("orientation {word} does not have n = {n} and k = {k}")]
    WrongSector { word: String, n: usize, k: usize },
    #[error("generator e{i} is out of range for n = {n}")]
    GenOutOfRange { i: usize, n: usize },
    #[error("bad token '{token}' in term {term}")]
    BadToken { term: usize, token: String },
    #[error("'{0}' is not an alternating framed word")]
    NotAlternating(String),
    #[error("rule instance {0} fails semantic validation")]
    Unsound(String),
    #[error("normalization exceeded {0} steps")]
    StepBudgetExceeded(usize),
    #[error(transparent)]
    Coefficient(#[from] LaurentParseError),
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Jnf(#[from] JnfError),
}

/// A word over `v` (down) and `^` (up).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientationWord(Vec<Sym>);

impl OrientationWord {
    pub fn new(syms: Vec<Sym>) -> Result<Self, OrientedError> {
        if syms.contains(&Sym::Plain) {
            let text: String = syms.iter().map(|s| s.to_char()).collect();
            return Err(OrientedError::BadOrientation(text));
        }
        Ok(Self(syms))
    }

    pub fn parse(text: &str) -> Result<Self, OrientedError> {
        text.trim()
            .chars()
            .map(|c| match c {
                'v' => Ok(Sym::Down),
                '^' => Ok(Sym::Up),
                _ => Err(OrientedError::BadOrientation(text.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    /// `v^k ^^(n-k)`, the word of length zero.
    pub fn sorted(n: usize, k: usize) -> Self {
        let mut v = vec![Sym::Down; k];
        v.resize(n, Sym::Up);
        Self(v)
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn k(&self) -> usize {
        self.0.iter().filter(|&&s| s == Sym::Down).count()
    }

    /// Inversions: pairs `a < b` with an up symbol at `a` and down at `b`.
    pub fn length(&self) -> usize {
        let mut ups = 0;
        let mut inv = 0;
        for &s in &self.0 {
            match s {
                Sym::Up => ups += 1,
                _ => inv += ups,
            }
        }
        inv
    }

    /// `λ s_i`: swaps positions `i` and `i+1` (1-based) when they differ.
    pub fn act(&self, i: usize) -> Option<Self> {
        if i == 0 || i >= self.n() || self.0[i - 1] == self.0[i] {
            return None;
        }
        let mut v = self.0.clone();
        v.swap(i - 1, i);
        Some(Self(v))
    }

    pub fn to_object(&self) -> Object {
        Object(self.0.clone())
    }
}

impl fmt::Display for OrientationWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.to_char()))
    }
}

pub fn act(lambda: &OrientationWord, i: usize) -> Option<OrientationWord> {
    lambda.act(i)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetRep {
    pub orientation: OrientationWord,
    pub length: usize,
}

fn check_nk(n: usize, k: usize) -> Result<(), OrientedError> {
    if n == 0 || n > ORIENTED_BOUND {
        return Err(OrientedError::BadN {
            n,
            bound: ORIENTED_BOUND,
        });
    }
    if k > n {
        return Err(OrientedError::BadK { n, k });
    }
    Ok(())
}

/// All orientation words with `k` down symbols, found by breadth-first
/// search from the sorted word; the depth at which a word is reached is its
/// length. Sorted by length, then word.
pub fn generate_wk(n: usize, k: usize) -> Result<Vec<CosetRep>, OrientedError> {
    check_nk(n, k)?;
    let start = OrientationWord::sorted(n, k);
    let mut depth: HashMap<OrientationWord, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        let d = depth[&w];
        for i in 1..n {
            if let Some(next) = w.act(i) {
                if !depth.contains_key(&next) {
                    depth.insert(next.clone(), d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    let mut out: Vec<CosetRep> = depth
        .into_iter()
        .map(|(orientation, length)| CosetRep {
            orientation,
            length,
        })
        .collect();
    out.sort_by(|a, b| (a.length, &a.orientation).cmp(&(b.length, &b.orientation)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Frame(OrientationWord),
    Gen(usize),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Frame(l) => write!(f, "1[{l}]"),
            Token::Gen(i) => write!(f, "e{i}"),
        }
    }
}

fn show(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `q^qexp · 1_{λ0} e_{i1} 1_{λ1} .. e_{ir} 1_{λr}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedWord {
    pub qexp: i64,
    pub frames: Vec<OrientationWord>,
    pub gens: Vec<usize>,
}

impl OrientedWord {
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = vec![Token::Frame(self.frames[0].clone())];
        for (i, f) in self.gens.iter().zip(&self.frames[1..]) {
            out.push(Token::Gen(*i));
            out.push(Token::Frame(f.clone()));
        }
        out
    }

    pub fn from_tokens(qexp: i64, tokens: &[Token]) -> Result<Self, OrientedError> {
        let bad = || OrientedError::NotAlternating(show(tokens));
        let mut frames = Vec::new();
        let mut gens = Vec::new();
        for (idx, t) in tokens.iter().enumerate() {
            match (idx % 2, t) {
                (0, Token::Frame(l)) => frames.push(l.clone()),
                (1, Token::Gen(i)) => gens.push(*i),
                _ => return Err(bad()),
            }
        }
        if frames.len() != gens.len() + 1 {
            return Err(bad());
        }
        Ok(Self { qexp, frames, gens })
    }

    /// The core without its power of `q`.
    pub fn core(&self) -> Self {
        Self {
            qexp: 0,
            ..self.clone()
        }
    }
}

impl fmt::Display for OrientedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&show(&self.tokens()))
    }
}

/// Oriented term of a fully framed token string: each `e_i` becomes a cap
/// on the frame below followed by a cup on the frame above. `None` when the
/// string denotes zero.
pub fn framed_term(tokens: &[Token]) -> Option<MTerm> {
    let Some(Token::Frame(first)) = tokens.first() else {
        return None;
    };
    let mut cur = first.clone();
    let mut seq = Vec::new();
    let mut idx = 1;
    while idx < tokens.len() {
        match &tokens[idx] {
            Token::Frame(l) => {
                if *l != cur {
                    return None;
                }
                idx += 1;
            }
            Token::Gen(i) => {
                let Some(Token::Frame(next)) = tokens.get(idx + 1) else {
                    return None;
                };
                let i = *i;
                if i == 0 || i >= cur.n() || next.n() != cur.n() {
                    return None;
                }
                let same_outside =
                    (0..cur.n()).all(|p| p == i - 1 || p == i || cur.0[p] == next.0[p]);
                let cap = GenArrow::cap_for(cur.0[i - 1], cur.0[i])?;
                let cup = GenArrow::cup_for(next.0[i - 1], next.0[i])?;
                if !same_outside {
                    return None;
                }
                seq.push((i - 1, cap));
                seq.push((i - 1, cup));
                cur = next.clone();
                idx += 2;
            }
        }
    }
    MTerm::from_offsets(first.to_object(), &seq).ok()
}

/// Net value of a framed token string, or `None` for zero.
pub fn framed_value(tokens: &[Token], conv: BubbleConvention) -> Option<ONet> {
    framed_term(tokens).and_then(|t| eval_net(&t, conv).ok())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Zero,
    Replace { qexp: i64, rhs: Vec<Token> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedRule {
    pub id: String,
    pub lhs: Vec<Token>,
    pub outcome: Outcome,
}

impl fmt::Display for OrientedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Zero => write!(f, "{}: {} -> 0", self.id, show(&self.lhs)),
            Outcome::Replace { qexp, rhs } => {
                write!(
                    f,
                    "{}: {} -> q^{} {}",
                    self.id,
                    show(&self.lhs),
                    qexp,
                    show(rhs)
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrientedSystem {
    n: usize,
    k: usize,
    conv: BubbleConvention,
    frames: Vec<OrientationWord>,
    rules: Vec<OrientedRule>,
    by_first: HashMap<Token, Vec<usize>>,
}

/// `1_λ e_i 1_μ` is nonzero.
fn step_ok(lambda: &OrientationWord, i: usize, mu: &OrientationWord) -> bool {
    match lambda.act(i) {
        Some(s) => *mu == s || mu == lambda,
        None => false,
    }
}

/// Frame sequences `λ0 .. λr` making `1_λ0 e_g1 1_λ1 ..` nonzero.
fn framings(starts: &[OrientationWord], gens: &[usize]) -> Vec<Vec<OrientationWord>> {
    let mut out = Vec::new();
    fn go(path: &mut Vec<OrientationWord>, gens: &[usize], out: &mut Vec<Vec<OrientationWord>>) {
        let Some((&i, rest)) = gens.split_first() else {
            out.push(path.clone());
            return;
        };
        let cur = path.last().expect("paths start with a frame").clone();
        let Some(swapped) = cur.act(i) else {
            return;
        };
        for next in [cur, swapped] {
            path.push(next);
            go(path, rest, out);
            path.pop();
        }
    }
    for s in starts {
        go(&mut vec![s.clone()], gens, &mut out);
    }
    out
}

fn interleave(frames: &[OrientationWord], gens: &[usize]) -> Vec<Token> {
    OrientedWord {
        qexp: 0,
        frames: frames.to_vec(),
        gens: gens.to_vec(),
    }
    .tokens()
}

fn same_pairing(a: &ONet, b: &ONet) -> bool {
    a.bottom == b.bottom && a.top == b.top && a.partner == b.partner
}

/// `q`-exponent of collapsing `e_i 1_λ e_i`: the convention's sign times
/// `ℓ(λ s_i) - ℓ(λ)`.
pub fn esquare_exponent(lambda: &OrientationWord, i: usize, conv: BubbleConvention) -> Option<i64> {
    let s = lambda.act(i)?;
    Some(conv.sign() * (s.length() as i64 - lambda.length() as i64))
}

/// Builds and validates every ground rule instance for `(n, k)`.
pub fn oriented_rules(
    n: usize,
    k: usize,
    conv: BubbleConvention,
) -> Result<OrientedSystem, OrientedError> {
    check_nk(n, k)?;
    let frames: Vec<OrientationWord> = generate_wk(n, k)?
        .into_iter()
        .map(|c| c.orientation)
        .collect();
    let mut rules = Vec::new();
    let fr = |l: &OrientationWord| Token::Frame(l.clone());

    for a in &frames {
        for b in &frames {
            let outcome = if a == b {
                Outcome::Replace {
                    qexp: 0,
                    rhs: vec![fr(a)],
                }
            } else {
                Outcome::Zero
            };
            rules.push(OrientedRule {
                id: format!("idem[{a},{b}]"),
                lhs: vec![fr(a), fr(b)],
                outcome,
            });
        }
    }
    for i in 1..n {
        for a in &frames {
            for b in &frames {
                if !step_ok(a, i, b) {
                    rules.push(OrientedRule {
                        id: format!("zero[i={i},{a},{b}]"),
                        lhs: vec![fr(a), Token::Gen(i), fr(b)],
                        outcome: Outcome::Zero,
                    });
                }
            }
        }
    }
    for i in 1..n {
        for f in framings(&frames, &[i, i]) {
            let qexp = esquare_exponent(&f[1], i, conv).expect("framing is nonzero");
            rules.push(OrientedRule {
                id: format!("esq[i={i},{}]", f[1]),
                lhs: interleave(&f, &[i, i]),
                outcome: Outcome::Replace {
                    qexp,
                    rhs: vec![fr(&f[0]), Token::Gen(i), fr(&f[2])],
                },
            });
        }
    }
    if n >= 2 {
        let families = ["3+", "3-", "4", "5", "6"];
        for base in tl_rules(n, true)?.into_rules() {
            if !families
                .iter()
                .any(|f| base.id.starts_with(&format!("{f}[")))
            {
                continue;
            }
            let gens = |w: &crate::words::Word| -> Vec<usize> {
                w.letters()
                    .iter()
                    .filter_map(|l| match l {
                        crate::words::Letter::Gen(i) => Some(*i),
                        crate::words::Letter::Delta => None,
                    })
                    .collect()
            };
            let (lg, rg) = (gens(&base.lhs), gens(&base.rhs));
            for f in framings(&frames, &lg) {
                let lhs = interleave(&f, &lg);
                let lval =
                    framed_value(&lhs, conv).ok_or_else(|| OrientedError::Unsound(show(&lhs)))?;
                let last = f.last().expect("nonempty framing");
                let mut matches = Vec::new();
                for g in framings(std::slice::from_ref(&f[0]), &rg) {
                    if g.last() != Some(last) {
                        continue;
                    }
                    let rhs = interleave(&g, &rg);
                    if let Some(rval) = framed_value(&rhs, conv) {
                        if same_pairing(&lval, &rval) {
                            matches.push((lval.scalar_exp - rval.scalar_exp, rhs));
                        }
                    }
                }
                let [(qexp, rhs)] = <[_; 1]>::try_from(matches)
                    .map_err(|_| OrientedError::Unsound(format!("{} ({})", show(&lhs), base.id)))?;
                rules.push(OrientedRule {
                    id: format!(
                        "{}{}",
                        base.id,
                        show(&f[..1].iter().map(fr).collect::<Vec<_>>())
                    ),
                    lhs,
                    outcome: Outcome::Replace { qexp, rhs },
                });
            }
        }
    }

    let sys = OrientedSystem::new(n, k, conv, frames, rules);
    for r in &sys.rules {
        if !rule_is_sound(r, conv) {
            return Err(OrientedError::Unsound(r.to_string()));
        }
    }
    Ok(sys)
}

/// The rule preserves the net value, including the power of `q`.
pub fn rule_is_sound(rule: &OrientedRule, conv: BubbleConvention) -> bool {
    let lhs = framed_value(&rule.lhs, conv);
    match &rule.outcome {
        Outcome::Zero => lhs.is_none(),
        Outcome::Replace { qexp, rhs } => match (lhs, framed_value(rhs, conv)) {
            (Some(l), Some(mut r)) => {
                r.scalar_exp += qexp;
                l == r
            }
            _ => false,
        },
    }
}

/// A monomial under rewriting: `None` is zero.
pub type Monomial = Option<(i64, Vec<Token>)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ORedex {
    pub rule: usize,
    pub pos: usize,
}

impl OrientedSystem {
    fn new(
        n: usize,
        k: usize,
        conv: BubbleConvention,
        frames: Vec<OrientationWord>,
        rules: Vec<OrientedRule>,
    ) -> Self {
        let mut by_first: HashMap<Token, Vec<usize>> = HashMap::new();
        for (idx, r) in rules.iter().enumerate() {
            by_first.entry(r.lhs[0].clone()).or_default().push(idx);
        }
        Self {
            n,
            k,
            conv,
            frames,
            rules,
            by_first,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn convention(&self) -> BubbleConvention {
        self.conv
    }

    pub fn frames(&self) -> &[OrientationWord] {
        &self.frames
    }

    pub fn rules(&self) -> &[OrientedRule] {
        &self.rules
    }

    fn matches_at(&self, tokens: &[Token], rule: usize, pos: usize) -> bool {
        let lhs = &self.rules[rule].lhs;
        tokens.get(pos..pos + lhs.len()) == Some(&lhs[..])
    }

    pub fn first_redex(&self, tokens: &[Token]) -> Option<ORedex> {
        tokens.iter().enumerate().find_map(|(pos, t)| {
            let cands = self.by_first.get(t)?;
            cands
                .iter()
                .find(|&&r| self.matches_at(tokens, r, pos))
                .map(|&rule| ORedex { rule, pos })
        })
    }

    pub fn is_irreducible(&self, tokens: &[Token]) -> bool {
        self.first_redex(tokens).is_none()
    }

    pub fn apply(&self, qexp: i64, tokens: &[Token], r: ORedex) -> Monomial {
        let rule = &self.rules[r.rule];
        match &rule.outcome {
            Outcome::Zero => None,
            Outcome::Replace { qexp: dq, rhs } => {
                let mut out = tokens[..r.pos].to_vec();
                out.extend_from_slice(rhs);
                out.extend_from_slice(&tokens[r.pos + rule.lhs.len()..]);
                Some((qexp + dq, out))
            }
        }
    }

    /// Leftmost redex first, lowest rule index among ties.
    pub fn normalize_monomial(
        &self,
        qexp: i64,
        tokens: &[Token],
    ) -> Result<Monomial, OrientedError> {
        let mut cur = (qexp, tokens.to_vec());
        for _ in 0..ORIENTED_STEP_BUDGET {
            match self.first_redex(&cur.1) {
                None => return Ok(Some(cur)),
                Some(r) => match self.apply(cur.0, &cur.1, r) {
                    None => return Ok(None),
                    Some(next) => cur = next,
                },
            }
        }
        Err(OrientedError::StepBudgetExceeded(ORIENTED_STEP_BUDGET))
    }

    fn check_frame(&self, l: &OrientationWord) -> Result<(), OrientedError> {
        if l.n() != self.n || l.k() != self.k {
            return Err(OrientedError::WrongSector {
                word: l.to_string(),
                n: self.n,
                k: self.k,
            });
        }
        Ok(())
    }

    /// Inserts `Σ_ν 1_ν` wherever a frame is missing: at both ends and
    /// between adjacent generators.
    pub fn expand(&self, tokens: &[Token]) -> Result<Vec<Vec<Token>>, OrientedError> {
        let mut slots: Vec<Vec<Token>> = Vec::new();
        let all: Vec<Token> = self.frames.iter().cloned().map(Token::Frame).collect();
        let mut prev_frame = false;
        for t in tokens {
            match t {
                Token::Frame(l) => {
                    self.check_frame(l)?;
                    slots.push(vec![t.clone()]);
                    prev_frame = true;
                }
                Token::Gen(i) => {
                    if *i == 0 || *i >= self.n {
                        return Err(OrientedError::GenOutOfRange { i: *i, n: self.n });
                    }
                    if !prev_frame {
                        slots.push(all.clone());
                    }
                    slots.push(vec![t.clone()]);
                    prev_frame = false;
                }
            }
        }
        if !prev_frame {
            slots.push(all);
        }
        let mut out: Vec<Vec<Token>> = vec![Vec::new()];
        for slot in slots {
            out = out
                .into_iter()
                .flat_map(|w| {
                    slot.iter().map(move |t| {
                        let mut v = w.clone();
                        v.push(t.clone());
                        v
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// Framed words with Laurent coefficients in `q`; no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedLinComb {
    n: usize,
    k: usize,
    terms: BTreeMap<OrientedWord, Laurent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrientedRecord {
    pub word: String,
    pub coefficient: String,
}

fn parse_tokens(text: &str, term: usize) -> Result<Vec<Token>, OrientedError> {
    text.split_whitespace()
        .map(|tok| {
            let bad = || OrientedError::BadToken {
                term,
                token: tok.to_string(),
            };
            if let Some(inner) = tok.strip_prefix("1[").and_then(|r| r.strip_suffix(']')) {
                return OrientationWord::parse(inner)
                    .map(Token::Frame)
                    .map_err(|_| bad());
            }
            let i = tok
                .strip_prefix('e')
                .and_then(|d| d.parse().ok())
                .ok_or_else(bad)?;
            Ok(Token::Gen(i))
        })
        .collect()
}

impl OrientedLinComb {
    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OrientedWord, &Laurent)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &OrientedWord) -> Laurent {
        self.terms
            .get(&w.core())
            .map(|c| c.shift(w.qexp))
            .unwrap_or_default()
    }

    /// Adds `c · w`, folding the word's power of `q` into the coefficient.
    pub fn add_term(&mut self, w: &OrientedWord, c: &Laurent) {
        let c = c.shift(w.qexp);
        if c.is_zero() {
            return;
        }
        let key = w.core();
        let slot = self.terms.entry(key.clone()).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn records(&self) -> Vec<OrientedRecord> {
        self.terms
            .iter()
            .map(|(w, c)| OrientedRecord {
                word: w.to_string(),
                coefficient: c.display_with('q').to_string(),
            })
            .collect()
    }

    /// Parses `[coeff '*'] tokens ('+' [coeff '*'] tokens)*` with tokens
    /// `1[v^..]` and `eI`. Missing frames are summed over. Words are kept as
    /// given (after expansion); nothing is rewritten.
    pub fn parse(text: &str, sys: &OrientedSystem) -> Result<Self, OrientedError> {
        let mut out = Self::zero(sys.n, sys.k);
        let mut raw: Vec<(Laurent, Vec<Token>)> = Vec::new();
        for (idx, chunk) in crate::words::split_top_level(text).into_iter().enumerate() {
            let (coeff, body) = match chunk.split_once('*') {
                Some((c, b)) => (Laurent::parse(c.trim(), 'q')?, b),
                None => (Laurent::one(), chunk),
            };
            let tokens = parse_tokens(body, idx + 1)?;
            if tokens.is_empty() {
                return Err(OrientedError::BadToken {
                    term: idx + 1,
                    token: String::new(),
                });
            }
            raw.push((coeff, tokens));
        }
        for (coeff, tokens) in raw {
            for expanded in sys.expand(&tokens)? {
                // Consecutive frames are kept by folding equal ones, so the
                // stored word alternates; unequal neighbours make it zero.
                let mut folded: Vec<Token> = Vec::new();
                let mut zero = false;
                for t in expanded {
                    match (folded.last(), &t) {
                        (Some(Token::Frame(a)), Token::Frame(b)) => {
                            if a != b {
                                zero = true;
                            }
                        }
                        _ => folded.push(t),
                    }
                }
                if !zero {
                    out.add_term(&OrientedWord::from_tokens(0, &folded)?, &coeff);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for OrientedLinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (w, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{}", c.display_with('q'), w)?;
        }
        Ok(())
    }
}

/// Rewrites every monomial to normal form and collects the results.
pub fn normalize_oriented(
    x: &OrientedLinComb,
    sys: &OrientedSystem,
) -> Result<OrientedLinComb, OrientedError> {
    let mut out = OrientedLinComb::zero(sys.n, sys.k);
    for (w, c) in x.terms() {
        if let Some((q, tokens)) = sys.normalize_monomial(w.qexp, &w.tokens())? {
            out.add_term(&OrientedWord::from_tokens(q, &tokens)?, c);
        }
    }
    Ok(out)
}

/// Normal-form monomials from `1_λ` to `1_μ`: Jones normal forms with a
/// nonzero, irreducible framing.
pub fn sector_basis(
    lambda: &OrientationWord,
    mu: &OrientationWord,
    sys: &OrientedSystem,
) -> Result<Vec<OrientedWord>, OrientedError> {
    sys.check_frame(lambda)?;
    sys.check_frame(mu)?;
    let mut out = Vec::new();
    for w in enumerate_jnf(sys.n)? {
        let gens: Vec<usize> = w
            .render()
            .letters()
            .iter()
            .filter_map(|l| match l {
                crate::words::Letter::Gen(i) => Some(*i),
                crate::words::Letter::Delta => None,
            })
            .collect();
        for f in framings(std::slice::from_ref(lambda), &gens) {
            if f.last() != Some(mu) {
                continue;
            }
            let tokens = interleave(&f, &gens);
            if sys.is_irreducible(&tokens) {
                out.push(OrientedWord::from_tokens(0, &tokens)?);
            }
        }
    }
    Ok(out)
}

pub fn sector_dimension(
    lambda: &OrientationWord,
    mu: &OrientationWord,
    sys: &OrientedSystem,
) -> Result<usize, OrientedError> {
    Ok(sector_basis(lambda, mu, sys)?.len())
}

/// Orientable matchings from `λ` to `μ`: the independent count.
pub fn sector_oracle(
    lambda: &OrientationWord,
    mu: &OrientationWord,
) -> Result<usize, OrientedError> {
    Ok(hom_basis(&lambda.to_object(), &mu.to_object())?.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorEntry {
    pub from: String,
    pub to: String,
    pub dimension: usize,
    pub oracle: usize,
}

/// Every sector of the system with its dimension and oracle count.
pub fn sector_table(sys: &OrientedSystem) -> Result<Vec<SectorEntry>, OrientedError> {
    let mut out = Vec::new();
    for a in &sys.frames {
        for b in &sys.frames {
            out.push(SectorEntry {
                from: a.to_string(),
                to: b.to_string(),
                dimension: sector_dimension(a, b, sys)?,
                oracle: sector_oracle(a, b)?,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedCriticalPair {
    pub source: Vec<Token>,
    pub left: Monomial,
    pub right: Monomial,
}

/// Overlaps and containments between rule left-hand sides.
pub fn oriented_critical_pairs(sys: &OrientedSystem) -> Vec<OrientedCriticalPair> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (a, ra) in sys.rules.iter().enumerate() {
        let la = &ra.lhs;
        for (b, rb) in sys.rules.iter().enumerate() {
            let lb = &rb.lhs;
            let mut push = |source: Vec<Token>, pos: usize| {
                if !seen.insert((source.clone(), a, b, pos)) {
                    return;
                }
                let left = sys.apply(0, &source, ORedex { rule: a, pos: 0 });
                let right = sys.apply(0, &source, ORedex { rule: b, pos });
                out.push(OrientedCriticalPair {
                    source,
                    left,
                    right,
                });
            };
            for ov in 1..la.len().min(lb.len()) {
                if la[la.len() - ov..] == lb[..ov] {
                    let mut src = la.clone();
                    src.extend_from_slice(&lb[ov..]);
                    push(src, la.len() - ov);
                }
            }
            if lb.len() <= la.len() {
                for p in 0..=la.len() - lb.len() {
                    if !(a == b && p == 0) && la[p..p + lb.len()] == lb[..] {
                        push(la.clone(), p);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub pairs: usize,
    pub failures: Vec<OrientedCriticalPair>,
}

/// Normalizes both sides of every critical pair.
pub fn check_local_confluence(sys: &OrientedSystem) -> Result<ConfluenceReport, OrientedError> {
    let pairs = oriented_critical_pairs(sys);
    let mut failures = Vec::new();
    let finish = |m: &Monomial| -> Result<Monomial, OrientedError> {
        match m {
            None => Ok(None),
            Some((q, t)) => sys.normalize_monomial(*q, t),
        }
    };
    for p in &pairs {
        if finish(&p.left)? != finish(&p.right)? {
            failures.push(p.clone());
        }
    }
    Ok(ConfluenceReport {
        pairs: pairs.len(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ow(text: &str) -> OrientationWord {
        OrientationWord::parse(text).unwrap()
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    const CONVS: [BubbleConvention; 2] = [
        BubbleConvention::CounterclockwiseQ,
        BubbleConvention::ClockwiseQ,
    ];

    #[test]
    fn coset_representatives() {
        assert_eq!(generate_wk(4, 2).unwrap().len(), 6);
        assert_eq!(ow("vv^^").length(), 0);
        assert_eq!(ow("^^vv").length(), 4);
        for n in 1..=6 {
            for k in 0..=n {
                let reps = generate_wk(n, k).unwrap();
                assert_eq!(reps.len(), binomial(n, k));
                for r in &reps {
                    assert_eq!(r.length, r.orientation.length(), "{}", r.orientation);
                    assert_eq!(r.orientation.k(), k);
                }
            }
        }
        assert!(generate_wk(3, 4).is_err());
    }

    #[test]
    fn action() {
        assert_eq!(act(&ow("v^v^"), 1), Some(ow("^vv^")));
        assert_eq!(act(&ow("vv^^"), 1), None);
        for n in 2..=5 {
            for k in 0..=n {
                for r in generate_wk(n, k).unwrap() {
                    for i in 1..n {
                        if let Some(s) = r.orientation.act(i) {
                            assert_eq!(s.length().abs_diff(r.length), 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn idempotents_and_annihilation() {
        let sys = oriented_rules(4, 2, BubbleConvention::default()).unwrap();
        let norm = |text: &str| {
            let x = OrientedLinComb::parse(text, &sys).unwrap();
            normalize_oriented(&x, &sys).unwrap().to_string()
        };
        assert_eq!(norm("1[v^v^] 1[v^v^]"), "(1)*1[v^v^]");
        assert_eq!(norm("1[v^v^] 1[^vv^]"), "0");
        assert_eq!(norm("1[vv^^] e1 1[vv^^]"), "0");
        assert_eq!(norm("1[v^v^] e1 1[v^^v]"), "0");
        // e_i 1_λ e_i collapses with q to the length difference.
        assert_eq!(
            norm("1[v^v^] e1 1[v^v^] e1 1[v^v^]"),
            "(q)*1[v^v^] e1 1[v^v^]"
        );
        assert_eq!(
            norm("1[^vv^] e1 1[^vv^] e1 1[^vv^]"),
            "(q^-1)*1[^vv^] e1 1[^vv^]"
        );
    }

    #[test]
    fn esquare_exponents_are_units() {
        for n in 2..=5 {
            for k in 0..=n {
                for conv in CONVS {
                    for r in generate_wk(n, k).unwrap() {
                        for i in 1..n {
                            if let Some(e) = esquare_exponent(&r.orientation, i, conv) {
                                assert!(e == 1 || e == -1);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rules_are_sound_and_locally_confluent() {
        for n in 1..=4 {
            for k in 0..=n {
                for conv in CONVS {
                    let sys = oriented_rules(n, k, conv).unwrap();
                    for r in sys.rules() {
                        assert!(rule_is_sound(r, conv), "{r}");
                    }
                    let report = check_local_confluence(&sys).unwrap();
                    assert!(
                        report.failures.is_empty(),
                        "n={n} k={k}: {:?}",
                        report.failures.first()
                    );
                }
            }
        }
    }

    #[test]
    fn sector_examples() {
        let sys = oriented_rules(2, 1, BubbleConvention::default()).unwrap();
        assert_eq!(sector_dimension(&ow("v^"), &ow("v^"), &sys).unwrap(), 2);
        assert_eq!(sector_dimension(&ow("v^"), &ow("^v"), &sys).unwrap(), 1);
        assert!(sector_dimension(&ow("v^v"), &ow("v^"), &sys).is_err());
        for n in 1..=4 {
            for k in 0..=n {
                let sys = oriented_rules(n, k, BubbleConvention::default()).unwrap();
                for e in sector_table(&sys).unwrap() {
                    assert_eq!(e.dimension, e.oracle, "{} -> {}", e.from, e.to);
                    if e.from == e.to {
                        assert!(e.dimension >= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn unframed_input_sums_over_frames() {
        let sys = oriented_rules(2, 1, BubbleConvention::default()).unwrap();
        let x = OrientedLinComb::parse("e1", &sys).unwrap();
        assert_eq!(x.len(), 4);
        let nf = normalize_oriented(&x, &sys).unwrap();
        assert_eq!(nf.len(), 4);
        let sq = normalize_oriented(&OrientedLinComb::parse("e1 e1", &sys).unwrap(), &sys).unwrap();
        // e1 e1 = Σ over frames; each middle frame contributes q^±1.
        let total: i64 = sq.terms().map(|(_, c)| c.eval_at(1).unwrap()).sum();
        assert_eq!(total, 8);
        let text = nf.to_string();
        assert_eq!(OrientedLinComb::parse(&text, &sys).unwrap(), nf);
        assert!(OrientedLinComb::parse("1[vv] e1", &sys).is_err());
        assert!(OrientedLinComb::parse("e3", &sys).is_err());
        assert!(OrientedLinComb::parse("x1", &sys).is_err());
    }

    #[test]
    fn normal_forms_agree_with_net_values() {
        let conv = BubbleConvention::default();
        let sys = oriented_rules(3, 1, conv).unwrap();
        for word in [&[1usize, 2, 1][..], &[2, 1, 2], &[1, 1, 2], &[2, 2, 1, 1]] {
            for f in framings(sys.frames(), word) {
                let tokens = interleave(&f, word);
                let value = framed_value(&tokens, conv).unwrap();
                let (q, nf) = sys.normalize_monomial(0, &tokens).unwrap().unwrap();
                let mut got = framed_value(&nf, conv).unwrap();
                got.scalar_exp += q;
                assert_eq!(got, value, "{}", show(&tokens));
            }
        }
    }
}
