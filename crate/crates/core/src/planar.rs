//! Unoriented Temperley-Lieb diagrams as noncrossing perfect matchings.
//!
//! An n-diagram has `2n` boundary points. Points `1..=n` are the bottom row
//! read left to right and points `n+1..=2n` are the top row read right to
//! left, so bottom position `i` sits under top point `2n+1-i`. Read in that
//! order the points lie on a circle and the diagram is a noncrossing perfect
//! matching of them (the "bridge" of the diagram).
//!
//! Internally points are 0-based; the text format and public pair lists use
//! the 1-based numbering above.

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

/// Largest `n` accepted by [`enumerate_diagrams`] unless a bound is given.
pub const DEFAULT_ENUMERATION_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanarError {
    #[error("diagrams need at least one point per side")]
    Empty,
    #[error("generator index {i} out of range for n={n} (expected 1..={max})", max = n.saturating_sub(1))]
    GeneratorOutOfRange { n: usize, i: usize },
    #[error("diagram size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("n={n} exceeds the enumeration bound {bound}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("malformed Dyck path at step {pos}: {msg}")]
    MalformedPath { pos: usize, msg: String },
    #[error("bad diagram literal at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// A noncrossing fixed-point-free involution on the `2n` boundary points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagram {
    n: usize,
    partner: Vec<usize>,
}

/// A diagram times `δ^power`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaledDiagram {
    pub power: u32,
    pub diagram: Diagram,
}

impl ScaledDiagram {
    pub fn unscaled(diagram: Diagram) -> Self {
        Self { power: 0, diagram }
    }
}

impl From<Diagram> for ScaledDiagram {
    fn from(diagram: Diagram) -> Self {
        Self::unscaled(diagram)
    }
}

/// Checks that `partner` is a noncrossing perfect matching of `0..len`.
pub(crate) fn check_matching(partner: &[usize]) -> Result<(), String> {
    let m = partner.len();
    for (p, &q) in partner.iter().enumerate() {
        if q >= m {
            return Err(format!(
                "point {} is matched to nonexistent point {}",
                p + 1,
                q + 1
            ));
        }
        if q == p {
            return Err(format!("point {} is matched to itself", p + 1));
        }
        if partner[q] != p {
            return Err(format!("point {} is matched twice", q + 1));
        }
    }
    // Noncrossing iff the matching is a well-parenthesised word.
    let mut stack = Vec::new();
    for (p, &q) in partner.iter().enumerate() {
        if q > p {
            stack.push(p);
        } else if stack.pop() != Some(q) {
            return Err(format!("link ({}, {}) crosses another link", q + 1, p + 1));
        }
    }
    Ok(())
}

impl Diagram {
    /// Builds a diagram from a 0-based partner table of length `2n`.
    pub fn from_partner(n: usize, partner: Vec<usize>) -> Result<Self, PlanarError> {
        if partner.len() != 2 * n {
            return Err(PlanarError::InvalidMatching(format!(
                "expected {} points, got {}",
                2 * n,
                partner.len()
            )));
        }
        check_matching(&partner).map_err(PlanarError::InvalidMatching)?;
        Ok(Self { n, partner })
    }

    /// Builds a diagram from 1-based boundary pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, PlanarError> {
        let mut partner = vec![usize::MAX; 2 * n];
        for &(a, b) in pairs {
            for p in [a, b] {
                if p == 0 || p > 2 * n {
                    return Err(PlanarError::InvalidMatching(format!(
                        "point {p} is outside 1..={}",
                        2 * n
                    )));
                }
                if partner[p - 1] != usize::MAX {
                    return Err(PlanarError::InvalidMatching(format!(
                        "point {p} is matched twice"
                    )));
                }
            }
            if a == b {
                return Err(PlanarError::InvalidMatching(format!(
                    "point {a} is matched to itself"
                )));
            }
            partner[a - 1] = b - 1;
            partner[b - 1] = a - 1;
        }
        if let Some(p) = partner.iter().position(|&q| q == usize::MAX) {
            return Err(PlanarError::InvalidMatching(format!(
                "point {} is unmatched",
                p + 1
            )));
        }
        Self::from_partner(n, partner)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based partner table.
    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    /// 1-based pairs `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(p, &q)| p < q)
            .map(|(p, &q)| (p + 1, q + 1))
            .collect()
    }

    /// 0-based point index of bottom position `pos` (1-based).
    pub fn bottom_point(&self, pos: usize) -> usize {
        pos - 1
    }

    /// 0-based point index of top position `pos` (1-based).
    pub fn top_point(&self, pos: usize) -> usize {
        2 * self.n - pos
    }

    fn is_top(&self, p: usize) -> bool {
        p >= self.n
    }

    /// 1-based column of a 0-based point, whichever row it is on.
    fn column(&self, p: usize) -> usize {
        if self.is_top(p) {
            2 * self.n - p
        } else {
            p + 1
        }
    }

    /// Whether bottom position `pos` is joined straight up to top position `pos`.
    pub fn is_straight(&self, pos: usize) -> bool {
        self.partner[self.bottom_point(pos)] == self.top_point(pos)
    }

    /// Positions `p` such that top points `p` and `p+1` are joined (cups).
    pub fn top_cups(&self) -> Vec<usize> {
        (1..self.n)
            .filter(|&p| self.partner[self.top_point(p)] == self.top_point(p + 1))
            .collect()
    }

    /// Positions `p` such that bottom points `p` and `p+1` are joined (caps).
    pub fn bottom_caps(&self) -> Vec<usize> {
        (1..self.n)
            .filter(|&p| self.partner[self.bottom_point(p)] == self.bottom_point(p + 1))
            .collect()
    }

    /// Number of links joining the bottom row to the top row.
    pub fn through_strands(&self) -> usize {
        (0..self.n)
            .filter(|&p| self.is_top(self.partner[p]))
            .count()
    }

    pub fn is_identity(&self) -> bool {
        (1..=self.n).all(|p| self.is_straight(p))
    }

    /// Parses `n=4 [(1,2),(3,8),(4,7),(5,6)]`.
    pub fn parse(text: &str) -> Result<Self, PlanarError> {
        let (n, pairs) = parse_literal(text)?;
        let n = n.ok_or(PlanarError::Parse {
            pos: 0,
            msg: "missing 'n=' prefix".into(),
        })?;
        Self::from_pairs(n, &pairs)
    }

    /// Parses either a full literal or a bare pair list for a known `n`.
    pub fn parse_with_n(text: &str, n: usize) -> Result<Self, PlanarError> {
        let (declared, pairs) = parse_literal(text)?;
        if let Some(m) = declared {
            if m != n {
                return Err(PlanarError::SizeMismatch { left: m, right: n });
            }
        }
        Self::from_pairs(n, &pairs)
    }
}

/// Declared `n` (if any) and the pair list.
type Literal = (Option<usize>, Vec<(usize, usize)>);

fn parse_literal(text: &str) -> Result<Literal, PlanarError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let err = |pos: usize, msg: &str| PlanarError::Parse {
        pos,
        msg: msg.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize| -> Option<usize> {
        skip_ws(pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        text[start..*pos].parse().ok()
    };
    let expect = |pos: &mut usize, c: u8| -> Result<(), PlanarError> {
        skip_ws(pos);
        if bytes.get(*pos) == Some(&c) {
            *pos += 1;
            Ok(())
        } else {
            Err(err(*pos, &format!("expected '{}'", c as char)))
        }
    };

    skip_ws(&mut pos);
    let mut n = None;
    if bytes.get(pos) == Some(&b'n') {
        pos += 1;
        expect(&mut pos, b'=')?;
        n = Some(number(&mut pos).ok_or_else(|| err(pos, "expected point count"))?);
    }
    expect(&mut pos, b'[')?;
    let mut pairs = Vec::new();
    skip_ws(&mut pos);
    if bytes.get(pos) != Some(&b']') {
        loop {
            expect(&mut pos, b'(')?;
            let a = number(&mut pos).ok_or_else(|| err(pos, "expected point number"))?;
            expect(&mut pos, b',')?;
            let b = number(&mut pos).ok_or_else(|| err(pos, "expected point number"))?;
            expect(&mut pos, b')')?;
            pairs.push((a, b));
            skip_ws(&mut pos);
            match bytes.get(pos) {
                Some(b',') => pos += 1,
                Some(b']') => break,
                _ => return Err(err(pos, "expected ',' or ']'")),
            }
        }
    }
    expect(&mut pos, b']')?;
    skip_ws(&mut pos);
    if pos != bytes.len() {
        return Err(err(pos, "trailing input"));
    }
    Ok((n, pairs))
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n)?;
        for (idx, (a, b)) in self.pairs().into_iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn identity(n: usize) -> Result<Diagram, PlanarError> {
    if n == 0 {
        return Err(PlanarError::Empty);
    }
    Ok(straight(n))
}

fn straight(n: usize) -> Diagram {
    let mut partner = vec![0; 2 * n];
    for p in 0..n {
        partner[p] = 2 * n - 1 - p;
        partner[2 * n - 1 - p] = p;
    }
    Diagram { n, partner }
}

/// The generator `E_i`: a cap on bottom positions `i, i+1`, a cup on the top
/// positions above them, straight links elsewhere.
pub fn generator(n: usize, i: usize) -> Result<Diagram, PlanarError> {
    if i == 0 || i >= n {
        return Err(PlanarError::GeneratorOutOfRange { n, i });
    }
    let mut d = straight(n);
    let (b0, b1) = (d.bottom_point(i), d.bottom_point(i + 1));
    let (t0, t1) = (d.top_point(i), d.top_point(i + 1));
    d.partner[b0] = b1;
    d.partner[b1] = b0;
    d.partner[t0] = t1;
    d.partner[t1] = t0;
    Ok(d)
}

/// Stacks `upper` on top of `lower` and removes closed loops.
pub fn compose(lower: &ScaledDiagram, upper: &ScaledDiagram) -> Result<ScaledDiagram, PlanarError> {
    let (a, b) = (&lower.diagram, &upper.diagram);
    if a.n != b.n {
        return Err(PlanarError::SizeMismatch {
            left: a.n,
            right: b.n,
        });
    }
    let n = a.n;
    let mut seen = vec![false; n + 1];
    let mut partner = vec![usize::MAX; 2 * n];

    // Follows a strand entering the middle interface from `lower` (side
    // false) or `upper` (side true) until it leaves through an outer point.
    let walk = |mut upper_side: bool, mut p: usize, seen: &mut Vec<bool>| -> usize {
        loop {
            let d = if upper_side { b } else { a };
            let q = d.partner[p];
            let interface = if upper_side {
                !d.is_top(q)
            } else {
                d.is_top(q)
            };
            if !interface {
                return q;
            }
            let col = d.column(q);
            seen[col] = true;
            if upper_side {
                p = a.top_point(col);
            } else {
                p = b.bottom_point(col);
            }
            upper_side = !upper_side;
        }
    };

    for pos in 1..=n {
        let start = a.bottom_point(pos);
        if partner[start] == usize::MAX {
            // Bottom points of `a` and top points of `b` keep their index.
            let end = walk(false, start, &mut seen);
            partner[start] = end;
            partner[end] = start;
        }
        let start = b.top_point(pos);
        if partner[start] == usize::MAX {
            let end = walk(true, start, &mut seen);
            partner[start] = end;
            partner[end] = start;
        }
    }

    let mut loops = 0u32;
    for col in 1..=n {
        if seen[col] {
            continue;
        }
        // Closed loop through the interface: alternate partners until we
        // return to the starting column.
        loops += 1;
        let mut c = col;
        let mut upper_side = false;
        loop {
            seen[c] = true;
            let d = if upper_side { b } else { a };
            let p = if upper_side {
                d.bottom_point(c)
            } else {
                d.top_point(c)
            };
            c = d.column(d.partner[p]);
            upper_side = !upper_side;
            if c == col && !upper_side {
                break;
            }
        }
    }

    Ok(ScaledDiagram {
        power: lower.power + upper.power + loops,
        diagram: Diagram { n, partner },
    })
}

/// Number of n-diagrams via `u_0 = 1`, `u_n = Σ_{k<n} u_k u_{n-1-k}`.
pub fn count_diagrams(n: usize) -> BigUint {
    let mut u: Vec<BigUint> = vec![BigUint::from(1u32)];
    for m in 1..=n {
        let next = (0..m).map(|k| &u[k] * &u[m - 1 - k]).sum();
        u.push(next);
    }
    u.swap_remove(n)
}

pub fn enumerate_diagrams(n: usize) -> Result<Vec<Diagram>, PlanarError> {
    enumerate_diagrams_bounded(n, DEFAULT_ENUMERATION_BOUND)
}

/// All noncrossing perfect matchings of `2n` points, sorted.
pub fn enumerate_diagrams_bounded(n: usize, bound: usize) -> Result<Vec<Diagram>, PlanarError> {
    if n > bound {
        return Err(PlanarError::BoundExceeded { n, bound });
    }
    let mut out: Vec<Diagram> = noncrossing_matchings(2 * n)
        .into_iter()
        .map(|partner| Diagram { n, partner })
        .collect();
    out.sort();
    Ok(out)
}

/// All noncrossing perfect matchings of `0..m` as partner tables.
pub(crate) fn noncrossing_matchings(m: usize) -> Vec<Vec<usize>> {
    fn pairings(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
        if lo >= hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for mate in (lo + 1..hi).step_by(2) {
            let inner = pairings(lo + 1, mate);
            let outer = pairings(mate + 1, hi);
            for i in &inner {
                for o in &outer {
                    let mut v = Vec::with_capacity(i.len() + o.len() + 1);
                    v.push((lo, mate));
                    v.extend_from_slice(i);
                    v.extend_from_slice(o);
                    out.push(v);
                }
            }
        }
        out
    }
    if m % 2 == 1 {
        return Vec::new();
    }
    pairings(0, m)
        .into_iter()
        .map(|pairs| {
            let mut partner = vec![0; m];
            for (a, b) in pairs {
                partner[a] = b;
                partner[b] = a;
            }
            partner
        })
        .collect()
}

/// Vertical flip: bottom position `i` and top position `i` trade places.
pub fn transpose(d: &Diagram) -> Diagram {
    let m = 2 * d.n;
    let flip = |p: usize| m - 1 - p;
    let partner = (0..m).map(|p| flip(d.partner[flip(p)])).collect();
    Diagram { n: d.n, partner }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Right,
    Up,
}

/// A lattice path of Right/Up steps that never rises above the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyckPath {
    steps: Vec<Step>,
}

impl DyckPath {
    pub fn new(steps: Vec<Step>) -> Result<Self, PlanarError> {
        let mut height = 0i64;
        for (pos, s) in steps.iter().enumerate() {
            height += if *s == Step::Right { 1 } else { -1 };
            if height < 0 {
                return Err(PlanarError::MalformedPath {
                    pos: pos + 1,
                    msg: "more Up than Right steps".into(),
                });
            }
        }
        if height != 0 {
            return Err(PlanarError::MalformedPath {
                pos: steps.len(),
                msg: "path does not end on the diagonal".into(),
            });
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Parses `RURU` (whitespace ignored).
    pub fn parse(text: &str) -> Result<Self, PlanarError> {
        let mut steps = Vec::new();
        for (pos, c) in text.chars().filter(|c| !c.is_whitespace()).enumerate() {
            steps.push(match c {
                'R' | 'r' => Step::Right,
                'U' | 'u' => Step::Up,
                _ => {
                    return Err(PlanarError::MalformedPath {
                        pos: pos + 1,
                        msg: format!("unexpected step {c:?}"),
                    })
                }
            });
        }
        Self::new(steps)
    }
}

impl fmt::Display for DyckPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, s) in self.steps.iter().enumerate() {
            if idx > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", if *s == Step::Right { 'R' } else { 'U' })?;
        }
        Ok(())
    }
}

/// Scans the boundary: Right where a link opens, Up where it closes.
pub fn to_dyck(d: &Diagram) -> DyckPath {
    let steps = d
        .partner
        .iter()
        .enumerate()
        .map(|(p, &q)| if q > p { Step::Right } else { Step::Up })
        .collect();
    DyckPath { steps }
}

/// Inverse of [`to_dyck`]: every Up step closes the most recently opened link.
pub fn from_dyck(path: &DyckPath) -> Diagram {
    let m = path.steps.len();
    let mut partner = vec![0; m];
    let mut open = Vec::new();
    for (p, s) in path.steps.iter().enumerate() {
        match s {
            Step::Right => open.push(p),
            Step::Up => {
                let q = open.pop().expect("validated Dyck path");
                partner[p] = q;
                partner[q] = p;
            }
        }
    }
    Diagram { n: m / 2, partner }
}
