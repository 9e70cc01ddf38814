//! The strict monoidal category generated by caps and cups, in an oriented
//! mode (objects are words over `v` and `^`) and a plain mode (objects are
//! natural numbers).
//!
//! A term is a domain object plus a sequence of slices `id L ⊗ g ⊗ id R`,
//! read bottom to top. Two terms are identified when they differ by the
//! exchange law, i.e. by swapping adjacent slices with disjoint support.
//! Rewriting (zigzags and bubbles) is performed modulo that congruence.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::jnf::{enumerate_jnf, JnfWord};
use crate::planar::{self, noncrossing_matchings, Diagram, ScaledDiagram};
use crate::words::{evaluate, Letter, Word};

/// Largest boundary (bottom plus top points) accepted by [`hom_basis`].
pub const HOM_POINT_BOUND: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("slice {slice} expects {expected} but receives {found}")]
    TypeMismatch {
        slice: usize,
        expected: String,
        found: String,
    },
    #[error("cannot compose: codomain {left} differs from domain {right}")]
    ComposeMismatch { left: String, right: String },
    #[error("{0} is not available in {1} mode")]
    WrongMode(String, &'static str),
    #[error("bad term at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{points} boundary points exceed the bound {bound}")]
    BoundExceeded { points: usize, bound: usize },
    #[error("n = {n} is outside 1..={max}")]
    SizeOutOfRange { n: usize, max: usize },
    #[error("net is not a valid matching: {0}")]
    InvalidNet(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Oriented,
    Plain,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Oriented => "oriented",
            Mode::Plain => "plain",
        }
    }

    pub fn symbols(self) -> &'static [Sym] {
        match self {
            Mode::Oriented => &[Sym::Down, Sym::Up],
            Mode::Plain => &[Sym::Plain],
        }
    }

    pub fn caps(self) -> &'static [GenArrow] {
        match self {
            Mode::Oriented => &[GenArrow::CapPlus, GenArrow::CapMinus],
            Mode::Plain => &[GenArrow::Cap],
        }
    }

    pub fn cups(self) -> &'static [GenArrow] {
        match self {
            Mode::Oriented => &[GenArrow::CupPlus, GenArrow::CupMinus],
            Mode::Plain => &[GenArrow::Cup],
        }
    }
}

/// Boundary symbol: `v` (down), `^` (up), or the single plain strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Down,
    Up,
    Plain,
}

impl Sym {
    pub fn mode(self) -> Mode {
        match self {
            Sym::Plain => Mode::Plain,
            _ => Mode::Oriented,
        }
    }

    pub fn opposite(self) -> Sym {
        match self {
            Sym::Down => Sym::Up,
            Sym::Up => Sym::Down,
            Sym::Plain => Sym::Plain,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Sym::Down => 'v',
            Sym::Up => '^',
            Sym::Plain => '|',
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Object(pub Vec<Sym>);

impl Object {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn plain(n: usize) -> Self {
        Self(vec![Sym::Plain; n])
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mode(&self) -> Option<Mode> {
        self.0.first().map(|s| s.mode())
    }

    pub fn concat(&self, other: &Object) -> Object {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Object(v)
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Object {
        Object(self.0[range].to_vec())
    }

    /// `v^v` style words in oriented mode, a natural number in plain mode;
    /// `0` is the unit in both.
    pub fn parse(text: &str, mode: Mode) -> Result<Object, CategoryError> {
        let t = text.trim();
        let err = |msg: String| CategoryError::Parse { pos: 0, msg };
        if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) {
            let n: usize = t
                .parse()
                .map_err(|_| err(format!("bad object size '{t}'")))?;
            return match mode {
                Mode::Plain => Ok(Object::plain(n)),
                Mode::Oriented if n == 0 => Ok(Object::unit()),
                Mode::Oriented => Err(CategoryError::WrongMode(format!("object {n}"), "oriented")),
            };
        }
        if mode == Mode::Plain {
            return Err(CategoryError::WrongMode(format!("object '{t}'"), "plain"));
        }
        t.chars()
            .map(|c| match c {
                'v' => Ok(Sym::Down),
                '^' => Ok(Sym::Up),
                other => Err(err(format!("unexpected object symbol '{other}'"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Object)
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode() {
            None => write!(f, "0"),
            Some(Mode::Plain) => write!(f, "{}", self.len()),
            Some(Mode::Oriented) => self.0.iter().try_for_each(|s| write!(f, "{}", s.to_char())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenArrow {
    /// `v^ -> 0`
    CapPlus,
    /// `^v -> 0`
    CapMinus,
    /// `2 -> 0`
    Cap,
    /// `0 -> v^`
    CupPlus,
    /// `0 -> ^v`
    CupMinus,
    /// `0 -> 2`
    Cup,
}

impl GenArrow {
    pub const ALL: [GenArrow; 6] = [
        GenArrow::CapPlus,
        GenArrow::CapMinus,
        GenArrow::Cap,
        GenArrow::CupPlus,
        GenArrow::CupMinus,
        GenArrow::Cup,
    ];

    pub fn is_cap(self) -> bool {
        matches!(self, GenArrow::CapPlus | GenArrow::CapMinus | GenArrow::Cap)
    }

    pub fn mode(self) -> Mode {
        match self {
            GenArrow::Cap | GenArrow::Cup => Mode::Plain,
            _ => Mode::Oriented,
        }
    }

    fn pair(self) -> [Sym; 2] {
        match self {
            GenArrow::CapPlus | GenArrow::CupPlus => [Sym::Down, Sym::Up],
            GenArrow::CapMinus | GenArrow::CupMinus => [Sym::Up, Sym::Down],
            GenArrow::Cap | GenArrow::Cup => [Sym::Plain, Sym::Plain],
        }
    }

    pub fn dom(self) -> Object {
        if self.is_cap() {
            Object(self.pair().to_vec())
        } else {
            Object::unit()
        }
    }

    pub fn cod(self) -> Object {
        if self.is_cap() {
            Object::unit()
        } else {
            Object(self.pair().to_vec())
        }
    }

    fn dom_len(self) -> usize {
        if self.is_cap() {
            2
        } else {
            0
        }
    }

    fn cod_len(self) -> usize {
        2 - self.dom_len()
    }

    pub fn cap_for(a: Sym, b: Sym) -> Option<GenArrow> {
        GenArrow::ALL
            .into_iter()
            .find(|g| g.is_cap() && g.pair() == [a, b])
    }

    pub fn cup_for(a: Sym, b: Sym) -> Option<GenArrow> {
        GenArrow::ALL
            .into_iter()
            .find(|g| !g.is_cap() && g.pair() == [a, b])
    }

    pub fn name(self) -> &'static str {
        match self {
            GenArrow::CapPlus => "cap+",
            GenArrow::CapMinus => "cap-",
            GenArrow::Cap => "cap",
            GenArrow::CupPlus => "cup+",
            GenArrow::CupMinus => "cup-",
            GenArrow::Cup => "cup",
        }
    }

    pub fn parse(text: &str) -> Option<GenArrow> {
        GenArrow::ALL.into_iter().find(|g| g.name() == text)
    }

    /// The same shape with orientation forgotten.
    pub fn erased(self) -> GenArrow {
        if self.is_cap() {
            GenArrow::Cap
        } else {
            GenArrow::Cup
        }
    }
}

impl fmt::Display for GenArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slice {
    pub left: Object,
    pub gen: GenArrow,
    pub right: Object,
}

impl Slice {
    pub fn dom(&self) -> Object {
        self.left.concat(&self.gen.dom()).concat(&self.right)
    }

    pub fn cod(&self) -> Object {
        self.left.concat(&self.gen.cod()).concat(&self.right)
    }

    pub fn offset(&self) -> usize {
        self.left.len()
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "id {} | {} | id {}", self.left, self.gen, self.right)
    }
}

/// Slices as `(offset, generator)`; the working representation for swaps.
type Seq = Vec<(usize, GenArrow)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MTerm {
    pub domain: Object,
    pub slices: Vec<Slice>,
}

impl MTerm {
    pub fn identity(domain: Object) -> Self {
        Self {
            domain,
            slices: Vec::new(),
        }
    }

    /// Builds a term from generator offsets, deriving each slice's padding.
    pub fn from_offsets(domain: Object, seq: &[(usize, GenArrow)]) -> Result<Self, CategoryError> {
        let mut cur = domain.clone();
        let mut slices = Vec::with_capacity(seq.len());
        for (idx, &(l, g)) in seq.iter().enumerate() {
            let d = g.dom_len();
            if l + d > cur.len() || cur.0[l..l + d] != g.dom().0[..] {
                let shown = if l + d > cur.len() {
                    cur.to_string()
                } else {
                    cur.slice(l..l + d).to_string()
                };
                return Err(CategoryError::TypeMismatch {
                    slice: idx,
                    expected: g.dom().to_string(),
                    found: shown,
                });
            }
            let slice = Slice {
                left: cur.slice(0..l),
                gen: g,
                right: cur.slice(l + d..cur.len()),
            };
            cur = slice.cod();
            slices.push(slice);
        }
        let t = Self { domain, slices };
        typecheck(&t)?;
        Ok(t)
    }

    pub fn offsets(&self) -> Seq {
        self.slices.iter().map(|s| (s.offset(), s.gen)).collect()
    }

    pub fn generator_count(&self) -> usize {
        self.slices.len()
    }

    pub fn codomain(&self) -> Result<Object, CategoryError> {
        typecheck(self)
    }

    /// Parses `slice (';' slice)*` with `slice := id OBJ | GEN | id OBJ`.
    /// An empty or blank string is the identity on `domain`.
    pub fn parse(domain: Object, text: &str, mode: Mode) -> Result<Self, CategoryError> {
        let mut slices = Vec::new();
        if !text.trim().is_empty() {
            let mut offset = 0;
            for part in text.split(';') {
                slices.push(parse_slice(part, offset, mode)?);
                offset += part.len() + 1;
            }
        }
        if let Some(m) = domain.mode() {
            if m != mode {
                return Err(CategoryError::WrongMode(
                    format!("object {domain}"),
                    mode.name(),
                ));
            }
        }
        let t = Self { domain, slices };
        typecheck(&t)?;
        Ok(t)
    }
}

fn parse_slice(part: &str, base: usize, mode: Mode) -> Result<Slice, CategoryError> {
    let lead = part.len() - part.trim_start().len();
    let err = |msg: String| CategoryError::Parse {
        pos: base + lead,
        msg,
    };
    let fields: Vec<&str> = part.split('|').map(str::trim).collect();
    let [l, g, r] = fields[..] else {
        return Err(err(format!(
            "expected 'id OBJ | GEN | id OBJ', got '{}'",
            part.trim()
        )));
    };
    let object = |field: &str| -> Result<Object, CategoryError> {
        let rest = field
            .strip_prefix("id")
            .ok_or_else(|| err(format!("expected 'id OBJ', got '{field}'")))?;
        Object::parse(rest, mode).map_err(|e| match e {
            CategoryError::Parse { msg, .. } => err(msg),
            other => other,
        })
    };
    let gen = GenArrow::parse(g).ok_or_else(|| err(format!("unknown generator '{g}'")))?;
    if gen.mode() != mode {
        return Err(CategoryError::WrongMode(
            gen.name().to_string(),
            mode.name(),
        ));
    }
    Ok(Slice {
        left: object(l)?,
        gen,
        right: object(r)?,
    })
}

impl fmt::Display for MTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, s) in self.slices.iter().enumerate() {
            if idx > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Checks the slice chain and returns the codomain, or the first mismatch.
pub fn typecheck(t: &MTerm) -> Result<Object, CategoryError> {
    let mut modes: BTreeSet<Mode> = t.domain.0.iter().map(|s| s.mode()).collect();
    let mut cur = t.domain.clone();
    for (idx, s) in t.slices.iter().enumerate() {
        modes.insert(s.gen.mode());
        modes.extend(s.left.0.iter().chain(&s.right.0).map(|x| x.mode()));
        let dom = s.dom();
        if dom != cur {
            return Err(CategoryError::TypeMismatch {
                slice: idx,
                expected: dom.to_string(),
                found: cur.to_string(),
            });
        }
        cur = s.cod();
    }
    if modes.len() > 1 {
        return Err(CategoryError::WrongMode("mixed symbols".into(), "a single"));
    }
    Ok(cur)
}

fn pad(s: &Slice, left: &Object, right: &Object) -> Slice {
    Slice {
        left: left.concat(&s.left),
        gen: s.gen,
        right: s.right.concat(right),
    }
}

/// `t1 ⊗ t2`: the slices of `t1` (padded by the domain of `t2`), then those
/// of `t2` (padded by the codomain of `t1`).
pub fn tensor(t1: &MTerm, t2: &MTerm) -> Result<MTerm, CategoryError> {
    let c1 = typecheck(t1)?;
    typecheck(t2)?;
    let unit = Object::unit();
    let mut slices: Vec<Slice> = t1
        .slices
        .iter()
        .map(|s| pad(s, &unit, &t2.domain))
        .collect();
    slices.extend(t2.slices.iter().map(|s| pad(s, &c1, &unit)));
    let t = MTerm {
        domain: t1.domain.concat(&t2.domain),
        slices,
    };
    typecheck(&t)?;
    Ok(t)
}

/// `t2 ∘ t1`: first `t1`, then `t2` on top.
pub fn compose_terms(t1: &MTerm, t2: &MTerm) -> Result<MTerm, CategoryError> {
    let c1 = typecheck(t1)?;
    typecheck(t2)?;
    if c1 != t2.domain {
        return Err(CategoryError::ComposeMismatch {
            left: c1.to_string(),
            right: t2.domain.to_string(),
        });
    }
    let mut slices = t1.slices.clone();
    slices.extend(t2.slices.iter().cloned());
    Ok(MTerm {
        domain: t1.domain.clone(),
        slices,
    })
}

/// Which oriented bubble evaluates to `q`. The other one is `q^-1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum BubbleConvention {
    /// The counterclockwise bubble `cap+ ∘ cup+` (`v` on the left of its
    /// closing cap) is `q`.
    #[default]
    CounterclockwiseQ,
    /// The clockwise bubble `cap- ∘ cup-` is `q`.
    ClockwiseQ,
}

impl BubbleConvention {
    pub fn sign(self) -> i64 {
        match self {
            BubbleConvention::CounterclockwiseQ => 1,
            BubbleConvention::ClockwiseQ => -1,
        }
    }

    /// Exponent contributed by a loop whose topmost cap is `cap`.
    pub fn loop_exponent(self, cap: GenArrow) -> i64 {
        match cap {
            GenArrow::CapPlus => self.sign(),
            GenArrow::CapMinus => -self.sign(),
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BubbleConvention::CounterclockwiseQ => "ccw",
            BubbleConvention::ClockwiseQ => "cw",
        }
    }
}

/// The planar matching denoted by a term, with a scalar exponent (of `q` in
/// oriented mode, of `d` in plain mode). Points follow the diagram
/// convention: bottom positions `1..=b` are points `0..b`, and top position
/// `p` is point `b + t - p`, so the boundary is read around the circle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ONet {
    pub bottom: Object,
    pub top: Object,
    pub partner: Vec<usize>,
    pub scalar_exp: i64,
}

impl ONet {
    pub fn points(&self) -> usize {
        self.bottom.len() + self.top.len()
    }

    pub fn top_point(&self, pos: usize) -> usize {
        self.points() - pos
    }

    /// 1-based pairs `(a, b)` with `a < b`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(p, &q)| p < q)
            .map(|(p, &q)| (p + 1, q + 1))
            .collect()
    }

    fn symbol(&self, p: usize) -> Sym {
        if p < self.bottom.len() {
            self.bottom.0[p]
        } else {
            self.top.0[self.points() - p - 1]
        }
    }

    /// Through strands join equal symbols, arcs join opposite ones.
    pub fn is_orientable(&self) -> bool {
        let b = self.bottom.len();
        self.partner.iter().enumerate().all(|(p, &q)| {
            let through = (p < b) != (q < b);
            let (x, y) = (self.symbol(p), self.symbol(q));
            if through {
                x == y
            } else {
                x == y.opposite()
            }
        })
    }

    /// The same matching as a diagram, when bottom and top have equal size.
    pub fn to_diagram(&self) -> Option<Diagram> {
        if self.bottom.len() != self.top.len() || self.bottom.is_empty() {
            return None;
        }
        Diagram::from_partner(self.bottom.len(), self.partner.clone()).ok()
    }
}

impl fmt::Display for ONet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} [", self.bottom, self.top)?;
        for (idx, (a, b)) in self.pairs().into_iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "] scalar={}", self.scalar_exp)
    }
}

/// Where the far end of an open strand lies.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Far {
    Bottom(usize),
    Token(usize),
}

/// Traces the strands of a term, closing loops with the convention's sign.
pub fn eval_net(t: &MTerm, conv: BubbleConvention) -> Result<ONet, CategoryError> {
    let top = typecheck(t)?;
    let b = t.domain.len();
    let m = b + top.len();
    let mut partner = vec![usize::MAX; m];
    // Each frontier slot carries a token; `far[token]` is its strand's other end.
    let mut far: Vec<Far> = (0..b).map(Far::Bottom).collect();
    let mut frontier: Vec<usize> = (0..b).collect();
    let mut scalar = 0i64;
    for s in &t.slices {
        let l = s.offset();
        if s.gen.is_cap() {
            let (x, y) = (frontier[l], frontier[l + 1]);
            frontier.drain(l..l + 2);
            match (far[x], far[y]) {
                (Far::Token(z), _) if z == y => scalar += conv.loop_exponent(s.gen),
                (Far::Bottom(p), Far::Bottom(q)) => {
                    partner[p] = q;
                    partner[q] = p;
                }
                (Far::Bottom(p), Far::Token(z)) | (Far::Token(z), Far::Bottom(p)) => {
                    far[z] = Far::Bottom(p)
                }
                (Far::Token(z1), Far::Token(z2)) => {
                    far[z1] = Far::Token(z2);
                    far[z2] = Far::Token(z1);
                }
            }
        } else {
            let (x, y) = (far.len(), far.len() + 1);
            far.push(Far::Token(y));
            far.push(Far::Token(x));
            frontier.splice(l..l, [x, y]);
        }
    }
    let slot_of: std::collections::HashMap<usize, usize> = frontier
        .iter()
        .enumerate()
        .map(|(i, &tok)| (tok, i))
        .collect();
    for (i, &tok) in frontier.iter().enumerate() {
        let here = m - (i + 1);
        let there = match far[tok] {
            Far::Bottom(p) => p,
            Far::Token(z) => m - (slot_of[&z] + 1),
        };
        partner[here] = there;
        partner[there] = here;
    }
    Ok(ONet {
        bottom: t.domain.clone(),
        top,
        partner,
        scalar_exp: scalar,
    })
}

/// Swaps slices `k` and `k + 1` of `seq`. `later_is_right` says on which
/// side of the earlier slice the later one sits; returns false when that
/// relation does not hold (the slices interact).
fn swap_at(seq: &mut Seq, k: usize, later_is_right: bool) -> bool {
    let ((ls, s), (lt, t)) = (seq[k], seq[k + 1]);
    if later_is_right {
        if lt < ls + s.cod_len() {
            return false;
        }
        seq[k] = (lt + s.dom_len() - s.cod_len(), t);
        seq[k + 1] = (ls, s);
    } else {
        if lt + t.dom_len() > ls {
            return false;
        }
        seq[k] = (lt, t);
        seq[k + 1] = (ls + t.cod_len() - t.dom_len(), s);
    }
    true
}

fn swap_options(seq: &Seq, k: usize) -> Vec<Seq> {
    let mut out = Vec::new();
    for right in [false, true] {
        let mut next = seq.clone();
        if swap_at(&mut next, k, right) && !out.contains(&next) {
            out.push(next);
        }
    }
    out
}

/// All slice orders reachable by exchange swaps, up to `limit` members.
pub fn exchange_class(t: &MTerm, limit: usize) -> Vec<MTerm> {
    let start = t.offsets();
    let mut seen: HashSet<Seq> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(seq) = queue.pop_front() {
        if seen.len() >= limit {
            break;
        }
        for k in 0..seq.len().saturating_sub(1) {
            for next in swap_options(&seq, k) {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    let mut out: Vec<MTerm> = seen
        .into_iter()
        .filter_map(|s| MTerm::from_offsets(t.domain.clone(), &s).ok())
        .collect();
    out.sort_by_key(MTerm::offsets);
    out
}

/// The least member of the exchange class, comparing slices by
/// `(offset, generator)` lexicographically. This explores the whole class,
/// so it is meant for small terms; normal forms are better canonicalized by
/// [`term_from_net`].
pub fn canonicalize(t: &MTerm) -> MTerm {
    exchange_class(t, usize::MAX).swap_remove(0)
}

/// Whether `b` is reachable from `a` by exchange swaps (exhaustive search).
pub fn exchange_equivalent(a: &MTerm, b: &MTerm) -> bool {
    a.domain == b.domain
        && a.slices.len() == b.slices.len()
        && exchange_class(a, usize::MAX).contains(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermRuleKind {
    /// A cap closes a cup's left end against a strand on its left.
    ZigzagLeft,
    /// A cap closes a cup's right end against a strand on its right.
    ZigzagRight,
    /// A cap closes both ends of one cup.
    Bubble,
}

impl TermRuleKind {
    pub fn name(self) -> &'static str {
        match self {
            TermRuleKind::ZigzagLeft => "zigzag-left",
            TermRuleKind::ZigzagRight => "zigzag-right",
            TermRuleKind::Bubble => "bubble",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TermRedex {
    kind: TermRuleKind,
    cup: usize,
    cap: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Bottom,
    Cup { slice: usize, right: bool },
}

/// Frontier before each slice, plus the final one.
fn frontiers(seq: &Seq, dom_len: usize) -> Vec<Vec<End>> {
    let mut cur = vec![End::Bottom; dom_len];
    let mut out = Vec::with_capacity(seq.len() + 1);
    for (idx, &(l, g)) in seq.iter().enumerate() {
        out.push(cur.clone());
        if g.is_cap() {
            cur.drain(l..l + 2);
        } else {
            cur.splice(
                l..l,
                [
                    End::Cup {
                        slice: idx,
                        right: false,
                    },
                    End::Cup {
                        slice: idx,
                        right: true,
                    },
                ],
            );
        }
    }
    out.push(cur);
    out
}

/// Every redex of the exchange class: each time a cap consumes an end of a
/// cup. Returned in order of the consuming cap.
fn all_redexes(seq: &Seq, dom_len: usize) -> Vec<TermRedex> {
    let fr = frontiers(seq, dom_len);
    let mut out = Vec::new();
    for (idx, &(l, g)) in seq.iter().enumerate() {
        if !g.is_cap() {
            continue;
        }
        let (x, y) = (fr[idx][l], fr[idx][l + 1]);
        match (x, y) {
            (
                End::Cup {
                    slice: a,
                    right: false,
                },
                End::Cup {
                    slice: b,
                    right: true,
                },
            ) if a == b => {
                out.push(TermRedex {
                    kind: TermRuleKind::Bubble,
                    cup: a,
                    cap: idx,
                });
            }
            _ => {
                if let End::Cup {
                    slice: a,
                    right: false,
                } = y
                {
                    out.push(TermRedex {
                        kind: TermRuleKind::ZigzagLeft,
                        cup: a,
                        cap: idx,
                    });
                }
                if let End::Cup {
                    slice: a,
                    right: true,
                } = x
                {
                    out.push(TermRedex {
                        kind: TermRuleKind::ZigzagRight,
                        cup: a,
                        cap: idx,
                    });
                }
            }
        }
    }
    out
}

fn position(frontier: &[End], cup: usize, right: bool) -> usize {
    frontier
        .iter()
        .position(|e| *e == End::Cup { slice: cup, right })
        .expect("tracked cup end is still open")
}

/// Rearranges by exchange swaps so the redex's cup and cap are adjacent,
/// deletes them, and returns the scalar they contribute. `None` if the
/// pair cannot be brought together.
fn contract(seq: &Seq, dom_len: usize, r: TermRedex, conv: BubbleConvention) -> Option<(Seq, i64)> {
    let fr = frontiers(seq, dom_len);
    let mut s = seq.clone();
    let (a, c) = (r.cup, r.cap);
    match r.kind {
        TermRuleKind::Bubble => {
            // Everything between the cup and its cap sits outside the bubble.
            for j in a + 1..c {
                let (l, g) = seq[j];
                let ia = position(&fr[j], a, false);
                let right = if l + g.dom_len() <= ia {
                    false
                } else if l > ia + 1 {
                    true
                } else {
                    return None;
                };
                if !swap_at(&mut s, j - 1, right) {
                    return None;
                }
            }
        }
        TermRuleKind::ZigzagLeft | TermRuleKind::ZigzagRight => {
            let left_kind = r.kind == TermRuleKind::ZigzagLeft;
            // Slices on the far side of the shared end go before the cup,
            // the rest after the cap.
            let mut pa = a;
            for j in a + 1..c {
                let (l, g) = seq[j];
                let early = if left_kind {
                    l + g.dom_len() <= position(&fr[j], a, false)
                } else {
                    l > position(&fr[j], a, true)
                };
                if early {
                    for k in (pa..j).rev() {
                        if !swap_at(&mut s, k, !left_kind) {
                            return None;
                        }
                    }
                    pa += 1;
                }
            }
            for k in (pa + 1..c).rev() {
                if !swap_at(&mut s, k, !left_kind) {
                    return None;
                }
            }
        }
    }
    // The pair now sits at `p`, `p + 1`: a bubble's cup has moved up to its
    // cap, a zigzag's cup has only had the early slices moved before it.
    let p = match r.kind {
        TermRuleKind::Bubble => c - 1,
        _ => {
            let moved = (a + 1..c)
                .filter(|&j| {
                    let (l, g) = seq[j];
                    if r.kind == TermRuleKind::ZigzagLeft {
                        l + g.dom_len() <= position(&fr[j], a, false)
                    } else {
                        l > position(&fr[j], a, true)
                    }
                })
                .count();
            a + moved
        }
    };
    let (lc, cap) = s[p + 1];
    let (lu, cup) = s[p];
    if cup.is_cap() || !cap.is_cap() {
        return None;
    }
    let scalar = match r.kind {
        TermRuleKind::Bubble => {
            if lc != lu {
                return None;
            }
            conv.loop_exponent(cap)
        }
        TermRuleKind::ZigzagLeft if lc + 1 == lu => 0,
        TermRuleKind::ZigzagRight if lc == lu + 1 => 0,
        _ => return None,
    };
    s.drain(p..p + 2);
    Some((s, scalar))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermStep {
    pub rule: TermRuleKind,
    pub generators_before: usize,
    pub generators_after: usize,
    pub scalar: i64,
}

impl fmt::Display for TermStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule={} generators {} => {} scalar={:+}",
            self.rule.name(),
            self.generators_before,
            self.generators_after,
            self.scalar
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermNormalForm {
    pub scalar_exp: i64,
    /// Canonical representative, rebuilt from the net.
    pub term: MTerm,
    /// The slice order rewriting actually produced; exchange-equivalent to
    /// `term`.
    pub reduced: MTerm,
    pub trace: Vec<TermStep>,
}

/// Removes zigzags and bubbles modulo exchange until none is left. The
/// result is reported in the canonical caps-then-cups order of its net.
pub fn normalize_term(t: &MTerm, conv: BubbleConvention) -> Result<TermNormalForm, CategoryError> {
    typecheck(t)?;
    let dom_len = t.domain.len();
    let mut seq = t.offsets();
    let mut scalar = 0;
    let mut trace = Vec::new();
    while let Some(r) = all_redexes(&seq, dom_len).into_iter().next() {
        let (next, k) =
            contract(&seq, dom_len, r, conv).expect("the earliest redex is always contractible");
        trace.push(TermStep {
            rule: r.kind,
            generators_before: seq.len(),
            generators_after: next.len(),
            scalar: k,
        });
        scalar += k;
        seq = next;
    }
    let reduced = MTerm::from_offsets(t.domain.clone(), &seq)?;
    let term = term_from_net(&eval_net(&reduced, conv)?)?;
    Ok(TermNormalForm {
        scalar_exp: scalar,
        term,
        reduced,
        trace,
    })
}

pub fn is_normal(t: &MTerm) -> bool {
    all_redexes(&t.offsets(), t.domain.len()).is_empty()
}

/// A ground instance of one of the rewrite rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermRule {
    pub kind: TermRuleKind,
    pub lhs: MTerm,
    pub rhs: MTerm,
    pub scalar_exp: i64,
}

/// Every instance of the zigzag and bubble rules in a mode.
pub fn term_rules(mode: Mode, conv: BubbleConvention) -> Vec<TermRule> {
    let mut out = Vec::new();
    for &s in mode.symbols() {
        let o = s.opposite();
        let dom = Object(vec![s]);
        let id = MTerm::identity(dom.clone());
        let left = [(1, GenArrow::cup_for(o, s)), (0, GenArrow::cap_for(s, o))];
        let right = [(0, GenArrow::cup_for(s, o)), (1, GenArrow::cap_for(o, s))];
        for (kind, pieces) in [
            (TermRuleKind::ZigzagLeft, left),
            (TermRuleKind::ZigzagRight, right),
        ] {
            let seq: Seq = pieces
                .iter()
                .map(|&(l, g)| (l, g.expect("opposite symbols pair")))
                .collect();
            out.push(TermRule {
                kind,
                lhs: MTerm::from_offsets(dom.clone(), &seq).expect("rule instances typecheck"),
                rhs: id.clone(),
                scalar_exp: 0,
            });
        }
    }
    for &cup in mode.cups() {
        let [a, b] = cup.pair();
        let cap = GenArrow::cap_for(a, b).expect("cup and cap share a boundary");
        out.push(TermRule {
            kind: TermRuleKind::Bubble,
            lhs: MTerm::from_offsets(Object::unit(), &[(0, cup), (0, cap)])
                .expect("bubble typechecks"),
            rhs: MTerm::identity(Object::unit()),
            scalar_exp: conv.loop_exponent(cap),
        });
    }
    out
}

/// Checks `eval_net(lhs) == q^scalar eval_net(rhs)` for a rule instance.
pub fn rule_is_sound(rule: &TermRule, conv: BubbleConvention) -> bool {
    match (eval_net(&rule.lhs, conv), eval_net(&rule.rhs, conv)) {
        (Ok(l), Ok(mut r)) => {
            r.scalar_exp += rule.scalar_exp;
            l == r
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalInstance {
    pub term: MTerm,
    pub first: TermRuleKind,
    pub second: TermRuleKind,
    pub left_result: TermNormalForm,
    pub right_result: TermNormalForm,
    pub joinable: bool,
    pub semantics_preserved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalFamily {
    /// The overlap with orientation erased, e.g. `cup cup cap`.
    pub shape: String,
    pub instances: Vec<CriticalInstance>,
}

impl CriticalFamily {
    pub fn all_joinable(&self) -> bool {
        self.instances
            .iter()
            .all(|i| i.joinable && i.semantics_preserved)
    }
}

fn all_objects(mode: Mode, len: usize) -> Vec<Object> {
    let mut out = vec![Object::unit()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|o| {
                mode.symbols().iter().map(move |&s| {
                    let mut v = o.0.clone();
                    v.push(s);
                    Object(v)
                })
            })
            .collect();
    }
    out
}

/// All well-typed slice sequences of a given length from `domain`.
fn all_sequences(domain: &Object, mode: Mode, len: usize) -> Vec<Seq> {
    let mut out = vec![(domain.clone(), Vec::new())];
    for _ in 0..len {
        let mut next = Vec::new();
        for (cur, seq) in out {
            for &g in mode.caps().iter().chain(mode.cups()) {
                let width = if g.is_cap() {
                    cur.len().saturating_sub(1)
                } else {
                    cur.len() + 1
                };
                for l in 0..width {
                    if g.is_cap() && cur.0[l..l + 2] != g.pair() {
                        continue;
                    }
                    let mut v = cur.0.clone();
                    v.splice(l..l + g.dom_len(), g.cod().0);
                    let mut s: Seq = seq.clone();
                    s.push((l, g));
                    next.push((Object(v), s));
                }
            }
        }
        out = next;
    }
    out.into_iter().map(|(_, s)| s).collect()
}

/// Overlaps of two redexes sharing a slice, over all three-slice terms with
/// no idle strands, grouped into families by shape with orientation erased.
/// Each overlap is contracted both ways and both results are normalized.
pub fn modulo_critical_pairs(mode: Mode, conv: BubbleConvention) -> Vec<CriticalFamily> {
    let mut seen: BTreeSet<MTerm> = BTreeSet::new();
    let mut families: Vec<CriticalFamily> = Vec::new();
    for dom_len in 0..=4 {
        for domain in all_objects(mode, dom_len) {
            for seq in all_sequences(&domain, mode, 3) {
                let redexes = all_redexes(&seq, dom_len);
                let fr = frontiers(&seq, dom_len);
                if fr.last().is_some_and(|top| top.contains(&End::Bottom)) {
                    // A domain strand runs straight through: not minimal.
                    continue;
                }
                for (x, r1) in redexes.iter().enumerate() {
                    for r2 in &redexes[x + 1..] {
                        let common: Vec<usize> = [r1.cup, r1.cap]
                            .into_iter()
                            .filter(|s| [r2.cup, r2.cap].contains(s))
                            .collect();
                        let [shared] = common[..] else {
                            continue;
                        };
                        let term = MTerm::from_offsets(domain.clone(), &seq)
                            .expect("enumerated terms typecheck");
                        let canon = canonicalize(&term);
                        if !seen.insert(canon.clone()) {
                            continue;
                        }
                        let net = eval_net(&term, conv).expect("typed");
                        let finish = |r: TermRedex| {
                            let (s, k) =
                                contract(&seq, dom_len, r, conv).expect("overlap redexes contract");
                            let t = MTerm::from_offsets(domain.clone(), &s)
                                .expect("contraction keeps typing");
                            let mut nf = normalize_term(&t, conv).expect("typed");
                            nf.scalar_exp += k;
                            nf
                        };
                        let (left_result, right_result) = (finish(*r1), finish(*r2));
                        let semantic = |nf: &TermNormalForm| {
                            eval_net(&nf.term, conv).map(|mut n| {
                                n.scalar_exp += nf.scalar_exp;
                                n == net
                            }) == Ok(true)
                        };
                        let instance = CriticalInstance {
                            first: r1.kind,
                            second: r2.kind,
                            joinable: left_result.scalar_exp == right_result.scalar_exp
                                && left_result.term == right_result.term,
                            semantics_preserved: semantic(&left_result) && semantic(&right_result),
                            left_result,
                            right_result,
                            term: canon.clone(),
                        };
                        let shape = shape_of(&seq, shared);
                        match families.iter_mut().find(|f| f.shape == shape) {
                            Some(f) => f.instances.push(instance),
                            None => families.push(CriticalFamily {
                                shape,
                                instances: vec![instance],
                            }),
                        }
                    }
                }
            }
        }
    }
    families
}

/// Left-to-right shape of an overlap along its shared strand: the shared
/// slice sits between the other two.
fn shape_of(seq: &Seq, shared: usize) -> String {
    if seq[shared].1.is_cap() {
        "cup cap cup".into()
    } else {
        "cap cup cap".into()
    }
}

/// All orientable noncrossing matchings from `v` (bottom) to `w` (top), with
/// scalar exponent 0.
pub fn hom_basis(v: &Object, w: &Object) -> Result<Vec<ONet>, CategoryError> {
    let points = v.len() + w.len();
    if points > HOM_POINT_BOUND {
        return Err(CategoryError::BoundExceeded {
            points,
            bound: HOM_POINT_BOUND,
        });
    }
    if let (Some(a), Some(b)) = (v.mode(), w.mode()) {
        if a != b {
            return Err(CategoryError::WrongMode(format!("object {w}"), a.name()));
        }
    }
    let mut out: Vec<ONet> = noncrossing_matchings(points)
        .into_iter()
        .map(|partner| ONet {
            bottom: v.clone(),
            top: w.clone(),
            partner,
            scalar_exp: 0,
        })
        .filter(ONet::is_orientable)
        .collect();
    out.sort();
    Ok(out)
}

/// The canonical normal-form term denoting a net (its scalar is ignored):
/// caps closing the bottom arcs, innermost first, then cups opening the top
/// arcs, outermost first.
pub fn term_from_net(net: &ONet) -> Result<MTerm, CategoryError> {
    if !net.is_orientable() || planar::check_matching(&net.partner).is_err() {
        return Err(CategoryError::InvalidNet(net.to_string()));
    }
    let b = net.bottom.len();
    let mut seq = Vec::new();
    let mut frontier: Vec<usize> = (0..b).collect();
    while let Some(k) =
        (0..frontier.len().saturating_sub(1)).find(|&k| net.partner[frontier[k]] == frontier[k + 1])
    {
        let cap = GenArrow::cap_for(net.symbol(frontier[k]), net.symbol(frontier[k + 1]))
            .ok_or_else(|| CategoryError::InvalidNet(net.to_string()))?;
        seq.push((k, cap));
        frontier.drain(k..k + 2);
    }
    let m = net.points();
    // Remaining strands must all go to the top; record their top positions.
    let mut tops: Vec<usize> = Vec::new();
    for &p in &frontier {
        let q = net.partner[p];
        if q < b {
            return Err(CategoryError::InvalidNet(net.to_string()));
        }
        tops.push(m - q);
    }
    let mut arcs: Vec<(usize, usize)> = (1..=net.top.len())
        .filter_map(|pos| {
            let q = net.partner[m - pos];
            let other = m - q;
            (q >= b && pos < other).then_some((pos, other))
        })
        .collect();
    arcs.sort();
    for (lo, hi) in arcs {
        let offset = tops.iter().filter(|&&t| t < lo).count();
        let cup = GenArrow::cup_for(net.top.0[lo - 1], net.top.0[hi - 1])
            .ok_or_else(|| CategoryError::InvalidNet(net.to_string()))?;
        seq.push((offset, cup));
        tops.splice(offset..offset, [lo, hi]);
    }
    MTerm::from_offsets(net.bottom.clone(), &seq)
}

/// The image of `E_i` on `n` plain strands: a cap at `i` followed by a cup.
pub fn generator_term(n: usize, i: usize) -> Result<MTerm, CategoryError> {
    if i == 0 || i >= n {
        return Err(CategoryError::SizeOutOfRange {
            n: i,
            max: n.saturating_sub(1),
        });
    }
    MTerm::from_offsets(
        Object::plain(n),
        &[(i - 1, GenArrow::Cap), (i - 1, GenArrow::Cup)],
    )
}

/// The image of a word: `d` letters become scalars, generators are stacked.
pub fn word_image(w: &Word, n: usize) -> Result<(i64, MTerm), CategoryError> {
    let mut scalar = 0;
    let mut t = MTerm::identity(Object::plain(n));
    for l in w.letters() {
        match *l {
            Letter::Delta => scalar += 1,
            Letter::Gen(i) => t = compose_terms(&t, &generator_term(n, i)?)?,
        }
    }
    Ok((scalar, t))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndCheckReport {
    pub n: usize,
    pub pairs_checked: usize,
    pub mismatches: Vec<String>,
}

impl EndCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Largest `n` accepted by [`end_algebra_check`].
pub const END_CHECK_MAX: usize = 5;

/// For every pair of basis words, multiplying diagrams and composing then
/// normalizing terms must give the same matching and the same power of `d`.
pub fn end_algebra_check(n: usize) -> Result<EndCheckReport, CategoryError> {
    if n == 0 || n > END_CHECK_MAX {
        return Err(CategoryError::SizeOutOfRange {
            n,
            max: END_CHECK_MAX,
        });
    }
    let basis = enumerate_jnf(n).map_err(|e| CategoryError::InvalidNet(e.to_string()))?;
    let conv = BubbleConvention::default();
    let mut report = EndCheckReport {
        n,
        pairs_checked: 0,
        mismatches: Vec::new(),
    };
    for a in &basis {
        for b in &basis {
            report.pairs_checked += 1;
            let word = a.render().concat(&b.render());
            let expected =
                evaluate(&word, n).map_err(|e| CategoryError::InvalidNet(e.to_string()))?;
            let (_, ta) = word_image(&a.render(), n)?;
            let (_, tb) = word_image(&b.render(), n)?;
            let nf = normalize_term(&compose_terms(&ta, &tb)?, conv)?;
            let net = eval_net(&nf.term, conv)?;
            let got = net.to_diagram().map(|diagram| ScaledDiagram {
                power: u32::try_from(nf.scalar_exp).unwrap_or(u32::MAX),
                diagram,
            });
            if got.as_ref() != Some(&expected) || net.scalar_exp != 0 {
                report.mismatches.push(format!(
                    "{a} * {b}: expected d^{} {}, got {nf:?}",
                    expected.power, expected.diagram
                ));
            }
        }
    }
    Ok(report)
}

/// A Jones normal form whose image term is not itself normal.
pub fn jnf_image_witness(n: usize) -> Option<(JnfWord, MTerm, TermNormalForm)> {
    let basis = enumerate_jnf(n).ok()?;
    basis.into_iter().find_map(|w| {
        let (_, t) = word_image(&w.render(), n).ok()?;
        if is_normal(&t) {
            return None;
        }
        let nf = normalize_term(&t, BubbleConvention::default()).ok()?;
        Some((w, t, nf))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{count_diagrams, enumerate_diagrams};
    use proptest::prelude::*;

    const CONVS: [BubbleConvention; 2] = [
        BubbleConvention::CounterclockwiseQ,
        BubbleConvention::ClockwiseQ,
    ];

    fn obj(text: &str) -> Object {
        Object::parse(text, Mode::Oriented).unwrap()
    }

    fn term(dom: &str, seq: &[(usize, GenArrow)]) -> MTerm {
        MTerm::from_offsets(obj(dom), seq).unwrap()
    }

    use GenArrow::*;

    #[test]
    fn typing() {
        assert_eq!(typecheck(&MTerm::identity(obj("v^"))).unwrap(), obj("v^"));
        let bubble = term("0", &[(0, CupPlus), (0, CapPlus)]);
        assert_eq!(typecheck(&bubble).unwrap(), Object::unit());
        assert!(matches!(
            MTerm::from_offsets(Object::unit(), &[(0, CupMinus), (0, CapPlus)]),
            Err(CategoryError::TypeMismatch { slice: 1, .. })
        ));
        let bad = MTerm {
            domain: Object::unit(),
            slices: vec![
                Slice {
                    left: Object::unit(),
                    gen: CupMinus,
                    right: Object::unit(),
                },
                Slice {
                    left: Object::unit(),
                    gen: CapPlus,
                    right: Object::unit(),
                },
            ],
        };
        assert!(typecheck(&bad).is_err());
    }

    #[test]
    fn parsing_roundtrip() {
        let t = MTerm::parse(
            obj("v"),
            "id v | cup- | id 0; id 0 | cap+ | id v",
            Mode::Oriented,
        )
        .unwrap();
        assert_eq!(t.to_string(), "id v | cup- | id 0; id 0 | cap+ | id v");
        assert_eq!(
            MTerm::parse(obj("v"), &t.to_string(), Mode::Oriented).unwrap(),
            t
        );
        let p = MTerm::parse(
            Object::plain(2),
            "id 0 | cap | id 0; id 0 | cup | id 0",
            Mode::Plain,
        )
        .unwrap();
        assert_eq!(p.to_string(), "id 0 | cap | id 0; id 0 | cup | id 0");
        assert!(matches!(
            MTerm::parse(obj("v"), "id 0 | cup* | id v", Mode::Oriented),
            Err(CategoryError::Parse { .. })
        ));
        assert!(MTerm::parse(obj("v"), "id 0 | cap | id 0", Mode::Oriented).is_err());
        assert_eq!(
            MTerm::parse(obj("v^"), "", Mode::Oriented).unwrap(),
            MTerm::identity(obj("v^"))
        );
    }

    #[test]
    fn tensor_and_compose() {
        let id_v = MTerm::identity(obj("v"));
        let cup = term("0", &[(0, CupPlus)]);
        let left = tensor(&id_v, &cup).unwrap();
        assert_eq!(left.codomain().unwrap(), obj("vv^"));
        let zig = compose_terms(
            &tensor(&cup, &id_v).unwrap(),
            &tensor(&id_v, &term("^v", &[(0, CapMinus)])).unwrap(),
        )
        .unwrap();
        assert_eq!(zig.domain, obj("v"));
        assert_eq!(zig.codomain().unwrap(), obj("v"));
        let nf = normalize_term(&zig, BubbleConvention::default()).unwrap();
        assert_eq!((nf.scalar_exp, nf.term), (0, MTerm::identity(obj("v"))));
        assert_eq!(
            compose_terms(&MTerm::identity(obj("v")), &zig).unwrap(),
            zig
        );
        assert_eq!(tensor(&zig, &MTerm::identity(Object::unit())).unwrap(), zig);
        assert!(compose_terms(&cup, &zig).is_err());
    }

    #[test]
    fn net_examples() {
        let conv = BubbleConvention::default();
        let plus = eval_net(&term("0", &[(0, CupPlus), (0, CapPlus)]), conv).unwrap();
        assert_eq!((plus.partner.len(), plus.scalar_exp), (0, 1));
        let minus = eval_net(&term("0", &[(0, CupMinus), (0, CapMinus)]), conv).unwrap();
        assert_eq!(minus.scalar_exp, -1);
        let flipped = eval_net(
            &term("0", &[(0, CupPlus), (0, CapPlus)]),
            BubbleConvention::ClockwiseQ,
        )
        .unwrap();
        assert_eq!(flipped.scalar_exp, -1);
        let zig = MTerm::from_offsets(Object::plain(1), &[(1, Cup), (0, Cap)]).unwrap();
        let net = eval_net(&zig, conv).unwrap();
        assert_eq!(net.scalar_exp, 0);
        assert_eq!(net.pairs(), vec![(1, 2)]);
        let e1 = generator_term(3, 1).unwrap();
        let d = eval_net(&e1, conv).unwrap().to_diagram().unwrap();
        assert_eq!(d, planar::generator(3, 1).unwrap());
    }

    #[test]
    fn normalization_examples() {
        let conv = BubbleConvention::default();
        for rule in term_rules(Mode::Oriented, conv)
            .into_iter()
            .chain(term_rules(Mode::Plain, conv))
        {
            let nf = normalize_term(&rule.lhs, conv).unwrap();
            assert_eq!(
                (nf.scalar_exp, &nf.term),
                (rule.scalar_exp, &rule.rhs),
                "{:?}",
                rule.kind
            );
            assert_eq!(nf.trace.len(), 1);
        }
        let normal = term("v^", &[(0, CapPlus), (0, CupMinus)]);
        let nf = normalize_term(&normal, conv).unwrap();
        assert_eq!((nf.scalar_exp, nf.trace.len()), (0, 0));
        assert!(exchange_equivalent(&nf.term, &normal));
    }

    #[test]
    fn rule_soundness() {
        for conv in CONVS {
            for mode in [Mode::Oriented, Mode::Plain] {
                let rules = term_rules(mode, conv);
                assert_eq!(rules.len(), mode.symbols().len() * 2 + mode.cups().len());
                for r in &rules {
                    assert!(rule_is_sound(r, conv), "{:?} {}", r.kind, r.lhs);
                }
            }
        }
    }

    #[test]
    fn critical_pair_families() {
        for conv in CONVS {
            for (mode, per_family) in [(Mode::Oriented, 2), (Mode::Plain, 1)] {
                let fams = modulo_critical_pairs(mode, conv);
                let mut shapes: Vec<&str> = fams.iter().map(|f| f.shape.as_str()).collect();
                shapes.sort();
                assert_eq!(shapes, vec!["cap cup cap", "cup cap cup"], "{mode:?}");
                for f in &fams {
                    assert_eq!(f.instances.len(), per_family, "{}", f.shape);
                    assert!(f.all_joinable());
                }
            }
        }
    }

    #[test]
    fn hom_bases() {
        assert_eq!(
            hom_basis(&Object::unit(), &Object::unit()).unwrap().len(),
            1
        );
        assert_eq!(
            hom_basis(&Object::plain(3), &Object::plain(3))
                .unwrap()
                .len(),
            5
        );
        assert_eq!(hom_basis(&obj("v^"), &obj("^v")).unwrap().len(), 1);
        assert_eq!(hom_basis(&obj("v^"), &obj("v^")).unwrap().len(), 2);
        assert!(hom_basis(&Object::plain(3), &Object::plain(2))
            .unwrap()
            .is_empty());
        for n in 1..=6 {
            let basis = hom_basis(&Object::plain(n), &Object::plain(n)).unwrap();
            assert_eq!(
                basis.len() as u64,
                count_diagrams(n)
                    .to_u64_digits()
                    .first()
                    .copied()
                    .unwrap_or(0)
            );
            let diagrams: BTreeSet<Diagram> =
                basis.iter().map(|b| b.to_diagram().unwrap()).collect();
            assert_eq!(
                diagrams,
                enumerate_diagrams(n).unwrap().into_iter().collect()
            );
        }
        assert!(matches!(
            hom_basis(&Object::plain(9), &Object::plain(9)),
            Err(CategoryError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn basis_nets_have_normal_terms() {
        let conv = BubbleConvention::default();
        for mode in [Mode::Oriented, Mode::Plain] {
            for a in 0..=4 {
                for b in 0..=4 {
                    for v in all_objects(mode, a) {
                        for w in all_objects(mode, b) {
                            for net in hom_basis(&v, &w).unwrap() {
                                let t = term_from_net(&net).unwrap();
                                assert!(is_normal(&t));
                                assert_eq!(eval_net(&t, conv).unwrap(), net);
                                let nf = normalize_term(&t, conv).unwrap();
                                assert_eq!((nf.scalar_exp, nf.term), (0, t));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn end_algebra() {
        for n in 1..=4 {
            let r = end_algebra_check(n).unwrap();
            assert!(r.passed(), "{:?}", r.mismatches);
            assert_eq!(r.pairs_checked, enumerate_jnf(n).unwrap().len().pow(2));
        }
        let two = word_image(&Word::gens(&[1, 1]), 2).unwrap().1;
        let nf = normalize_term(&two, BubbleConvention::default()).unwrap();
        assert_eq!(nf.scalar_exp, 1);
        assert!(end_algebra_check(6).is_err());
    }

    #[test]
    fn jnf_images_need_not_be_normal() {
        let (w, t, nf) = jnf_image_witness(3).unwrap();
        assert!(!is_normal(&t));
        assert!(nf.term.generator_count() < t.generator_count());
        assert!(crate::jnf::is_jnf(&w.render()).is_ok());
        assert_eq!(w.to_string(), "e1 e2");
    }

    fn arb_term(mode: Mode) -> impl Strategy<Value = MTerm> {
        (
            0usize..4,
            prop::collection::vec((any::<u8>(), any::<u8>()), 0..6),
        )
            .prop_map(move |(d, picks)| {
                let syms = mode.symbols();
                let domain = Object((0..d).map(|i| syms[i % syms.len()]).collect());
                let mut cur = domain.clone();
                let mut seq = Vec::new();
                for (a, b) in picks {
                    let gens: Vec<(usize, GenArrow)> = mode
                        .caps()
                        .iter()
                        .chain(mode.cups())
                        .flat_map(|&g| {
                            let width = if g.is_cap() {
                                cur.len().saturating_sub(1)
                            } else {
                                cur.len() + 1
                            };
                            (0..width).map(move |l| (l, g))
                        })
                        .filter(|&(l, g)| !g.is_cap() || cur.0[l..l + 2] == g.pair())
                        .collect();
                    let _ = b;
                    let (l, g) = gens[a as usize % gens.len()];
                    cur.0.splice(l..l + g.dom_len(), g.cod().0);
                    seq.push((l, g));
                }
                MTerm::from_offsets(domain, &seq).unwrap()
            })
    }

    fn arb_mode() -> impl Strategy<Value = Mode> {
        prop_oneof![Just(Mode::Oriented), Just(Mode::Plain)]
    }

    proptest! {
        #[test]
        fn exchange_classes_share_semantics(t in arb_mode().prop_flat_map(arb_term)) {
            let class = exchange_class(&t, usize::MAX);
            let canon = canonicalize(&t);
            prop_assert_eq!(&canon, &class[0]);
            let conv = BubbleConvention::default();
            let net = eval_net(&t, conv).unwrap();
            for member in &class {
                prop_assert_eq!(&eval_net(member, conv).unwrap(), &net);
                prop_assert_eq!(typecheck(member).unwrap(), typecheck(&t).unwrap());
            }
            let last = class.last().unwrap();
            prop_assert_eq!(&canonicalize(last), &canon);
        }

        #[test]
        fn normal_forms_are_determined_by_their_net(t in arb_mode().prop_flat_map(arb_term)) {
            let nf = normalize_term(&t, BubbleConvention::default()).unwrap();
            prop_assert!(is_normal(&nf.reduced));
            prop_assert!(exchange_equivalent(&nf.reduced, &nf.term), "{} vs {}", nf.reduced, nf.term);
        }

        #[test]
        fn normalization_preserves_semantics(
            t in arb_mode().prop_flat_map(arb_term),
            flip in any::<bool>(),
        ) {
            let conv = CONVS[usize::from(flip)];
            let nf = normalize_term(&t, conv).unwrap();
            prop_assert!(is_normal(&nf.term));
            let mut net = eval_net(&nf.term, conv).unwrap();
            net.scalar_exp += nf.scalar_exp;
            prop_assert_eq!(net, eval_net(&t, conv).unwrap());
            let mut count = t.generator_count();
            for step in &nf.trace {
                prop_assert_eq!(step.generators_before, count);
                prop_assert_eq!(step.generators_after + 2, count);
                count = step.generators_after;
            }
            prop_assert_eq!(count, nf.term.generator_count());
            prop_assert_eq!(typecheck(&nf.term).unwrap(), typecheck(&t).unwrap());
        }
    }
}
