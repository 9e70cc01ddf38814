//! Jones normal forms: `d^p (e_{i1} .. e_{j1}) .. (e_{ir} .. e_{jr})` with
//! each block a descending run and both `i1 < i2 < ..` and `j1 < j2 < ..`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::planar::{self, Diagram, PlanarError, ScaledDiagram, DEFAULT_ENUMERATION_BOUND};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JnfError {
    #[error("n = {n} exceeds the enumeration bound {bound}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("block ({i},{j}) is not valid for n = {n}")]
    IndexViolation { n: usize, i: usize, j: usize },
    #[error("blocks {0:?} violate the Jones normal form pattern")]
    BadBlocks(Vec<(usize, usize)>),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

/// Why a word is not in Jones normal form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JnfViolation {
    #[error("d at letter {pos} follows a generator")]
    DeltaAfterGenerator { pos: usize },
    #[error("block starting at letter {pos} has top index {i}, not above the previous {prev}")]
    TopNotIncreasing { pos: usize, prev: usize, i: usize },
    #[error("block starting at letter {pos} has bottom index {j}, not above the previous {prev}")]
    BottomNotIncreasing { pos: usize, prev: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JnfWord {
    power: usize,
    blocks: Vec<(usize, usize)>,
}

impl JnfWord {
    pub fn new(power: usize, blocks: Vec<(usize, usize)>) -> Result<Self, JnfError> {
        let ok = blocks.iter().all(|&(i, j)| 1 <= j && j <= i)
            && blocks
                .windows(2)
                .all(|p| p[0].0 < p[1].0 && p[0].1 < p[1].1);
        if ok {
            Ok(Self { power, blocks })
        } else {
            Err(JnfError::BadBlocks(blocks))
        }
    }

    pub fn empty() -> Self {
        Self {
            power: 0,
            blocks: Vec::new(),
        }
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn render(&self) -> Word {
        let mut letters = vec![Letter::Delta; self.power];
        for &(i, j) in &self.blocks {
            letters.extend((j..=i).rev().map(Letter::Gen));
        }
        Word(letters)
    }
}

impl fmt::Display for JnfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.render(), f)
    }
}

/// Parses `w` as a Jones normal form, or reports the first violation.
pub fn is_jnf(w: &Word) -> Result<JnfWord, JnfViolation> {
    let letters = w.letters();
    let power = letters.iter().take_while(|l| **l == Letter::Delta).count();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut pos = power;
    while pos < letters.len() {
        let start = pos;
        let Letter::Gen(i) = letters[pos] else {
            return Err(JnfViolation::DeltaAfterGenerator { pos });
        };
        let mut j = i;
        pos += 1;
        while j > 1 && letters.get(pos) == Some(&Letter::Gen(j - 1)) {
            j -= 1;
            pos += 1;
        }
        if let Some(&(pi, pj)) = blocks.last() {
            if i <= pi {
                return Err(JnfViolation::TopNotIncreasing {
                    pos: start,
                    prev: pi,
                    i,
                });
            }
            if j <= pj {
                return Err(JnfViolation::BottomNotIncreasing {
                    pos: start,
                    prev: pj,
                    j,
                });
            }
        }
        blocks.push((i, j));
    }
    Ok(JnfWord { power, blocks })
}

/// All `d`-free Jones normal forms over `e1 .. e(n-1)`, in shortlex order
/// of their rendered words.
pub fn enumerate_jnf(n: usize) -> Result<Vec<JnfWord>, JnfError> {
    enumerate_jnf_bounded(n, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_jnf_bounded(n: usize, bound: usize) -> Result<Vec<JnfWord>, JnfError> {
    if n > bound {
        return Err(JnfError::BoundExceeded { n, bound });
    }
    fn extend(n: usize, blocks: &mut Vec<(usize, usize)>, out: &mut Vec<JnfWord>) {
        out.push(JnfWord {
            power: 0,
            blocks: blocks.clone(),
        });
        let (pi, pj) = blocks.last().copied().unwrap_or((0, 0));
        for i in pi + 1..n {
            for j in pj + 1..=i {
                blocks.push((i, j));
                extend(n, blocks, out);
                blocks.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(n, &mut Vec::new(), &mut out);
    out.sort_by_key(JnfWord::render);
    Ok(out)
}

/// The diagram of `E_i E_{i-1} .. E_j`, built directly.
pub fn staircase(n: usize, i: usize, j: usize) -> Result<Diagram, JnfError> {
    if j == 0 || j > i || i >= n {
        return Err(JnfError::IndexViolation { n, i, j });
    }
    let mut pairs = vec![(i, i + 1), (2 * n + 1 - j - 1, 2 * n + 1 - j)];
    for b in 1..=n {
        let top = if b < j || b > i + 1 {
            b
        } else if b < i {
            b + 2
        } else {
            continue;
        };
        pairs.push((b, 2 * n + 1 - top));
    }
    Ok(Diagram::from_pairs(n, &pairs)?)
}

/// Rightmost top cup and the top index of the last block: one less than the
/// last position whose strand is not straight.
fn last_block(d: &Diagram) -> Option<(usize, usize)> {
    let j = *d.top_cups().last()?;
    let last_bent = (1..=d.n()).rev().find(|&p| !d.is_straight(p))?;
    Some((last_bent - 1, j))
}

/// Diagrams `d'` with `compose(d', staircase(i, j)) == d` and no loop.
fn peel_candidates(d: &Diagram, i: usize, j: usize) -> Vec<Diagram> {
    let n = d.n();
    let Ok(stair) = staircase(n, i, j) else {
        return Vec::new();
    };
    let top = |pos: usize| 2 * n - pos;
    let is_top = |p: usize| p >= n;
    // Map a point of `d` to the matching point of `d'`; `None` for the
    // top cup that the staircase itself supplies.
    let relabel = |p: usize| -> Option<usize> {
        if !is_top(p) {
            return Some(p);
        }
        let t = 2 * n - p;
        if t == j || t == j + 1 {
            None
        } else if t < j || t > i + 1 {
            Some(top(t))
        } else {
            Some(top(t - 2))
        }
    };
    let pairs: Vec<(usize, usize)> = d
        .partner()
        .iter()
        .enumerate()
        .filter(|&(p, &q)| p < q)
        .filter_map(|(p, &q)| Some((relabel(p)?, relabel(q)?)))
        .collect();
    let target = ScaledDiagram::unscaled(d.clone());
    let upper = ScaledDiagram::unscaled(stair);
    let mut out = Vec::new();
    for (k, &(x, y)) in pairs.iter().enumerate() {
        for (a, b) in [(x, y), (y, x)] {
            let mut partner = vec![usize::MAX; 2 * n];
            for (m, &(p, q)) in pairs.iter().enumerate() {
                if m != k {
                    partner[p] = q;
                    partner[q] = p;
                }
            }
            partner[a] = top(i);
            partner[top(i)] = a;
            partner[b] = top(i + 1);
            partner[top(i + 1)] = b;
            let Ok(cand) = Diagram::from_partner(n, partner) else {
                continue;
            };
            let lower = ScaledDiagram::unscaled(cand.clone());
            if planar::compose(&lower, &upper).ok().as_ref() == Some(&target)
                && !out.contains(&cand)
            {
                out.push(cand);
            }
        }
    }
    out
}

/// The Jones normal form of a diagram, peeling one block at a time from the
/// top. Each peel is checked by recomposition and must be unique.
pub fn diagram_to_jnf(d: &Diagram) -> JnfWord {
    let mut blocks = Vec::new();
    let mut cur = d.clone();
    while let Some((i, j)) = last_block(&cur) {
        let mut cands: Vec<Diagram> = peel_candidates(&cur, i, j)
            .into_iter()
            .filter(|c| match last_block(c) {
                None => true,
                Some((ci, cj)) => ci < i && cj < j,
            })
            .collect();
        assert_eq!(cands.len(), 1, "peeling ({i},{j}) off {cur} is not unique");
        blocks.push((i, j));
        cur = cands.pop().unwrap_or(cur);
    }
    debug_assert!(cur.is_identity());
    blocks.reverse();
    JnfWord { power: 0, blocks }
}

/// Table from diagrams to their Jones normal forms built by evaluating every
/// enumerated JNF word; an independent check on [`diagram_to_jnf`].
pub struct JnfLookup {
    n: usize,
    table: HashMap<Diagram, JnfWord>,
}

impl JnfLookup {
    pub fn new(n: usize) -> Result<Self, JnfError> {
        let mut table = HashMap::new();
        if n > 0 {
            for w in enumerate_jnf(n)? {
                let sd = crate::words::evaluate(&w.render(), n).map_err(|e| match e {
                    crate::words::WordError::Planar(p) => JnfError::Planar(p),
                    other => unreachable!("enumerated JNF words are in range: {other}"),
                })?;
                debug_assert_eq!(sd.power, 0);
                table.insert(sd.diagram, w);
            }
        }
        Ok(Self { n, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, d: &Diagram) -> Option<&JnfWord> {
        self.table.get(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{enumerate_diagrams, generator, identity};
    use crate::rewrite::{normal_form, tl_rules};
    use crate::words::evaluate;
    use proptest::prelude::*;

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    #[test]
    fn recognizer() {
        assert_eq!(
            is_jnf(&w("e2 e1 e3 e2")).unwrap().blocks(),
            &[(2, 1), (3, 2)]
        );
        assert_eq!(is_jnf(&w("d d e1")).unwrap().power(), 2);
        assert!(matches!(
            is_jnf(&w("e1 e1")),
            Err(JnfViolation::TopNotIncreasing {
                pos: 1,
                prev: 1,
                i: 1
            })
        ));
        assert_eq!(
            is_jnf(&w("e2 e1 d")),
            Err(JnfViolation::DeltaAfterGenerator { pos: 2 })
        );
        assert!(matches!(
            is_jnf(&w("e3 e2 e4 e3 e2")),
            Err(JnfViolation::BottomNotIncreasing { .. })
        ));
        assert_eq!(is_jnf(&Word::empty()).unwrap(), JnfWord::empty());
    }

    #[test]
    fn enumeration() {
        let words: Vec<String> = enumerate_jnf(3)
            .unwrap()
            .iter()
            .map(|j| j.to_string())
            .collect();
        assert_eq!(words, vec!["", "e1", "e2", "e1 e2", "e2 e1"]);
        assert_eq!(enumerate_jnf(4).unwrap().len(), 14);
        assert_eq!(enumerate_jnf(1).unwrap(), vec![JnfWord::empty()]);
        assert_eq!(enumerate_jnf(0).unwrap(), vec![JnfWord::empty()]);
        assert!(matches!(
            enumerate_jnf(9),
            Err(JnfError::BoundExceeded { n: 9, bound: 8 })
        ));
        for j in enumerate_jnf(5).unwrap() {
            assert_eq!(is_jnf(&j.render()).unwrap(), j);
        }
    }

    #[test]
    fn staircase_matches_products() {
        let s = staircase(4, 3, 1).unwrap();
        assert_eq!(s.bottom_caps(), vec![3]);
        assert_eq!(s.top_cups(), vec![1]);
        assert_eq!(s.partner()[s.bottom_point(1)], s.top_point(3));
        assert_eq!(s.partner()[s.bottom_point(2)], s.top_point(4));
        for n in 2..=6 {
            for i in 1..n {
                assert_eq!(staircase(n, i, i).unwrap(), generator(n, i).unwrap());
                for j in 1..=i {
                    let block = JnfWord::new(0, vec![(i, j)]).unwrap();
                    assert_eq!(
                        evaluate(&block.render(), n).unwrap(),
                        ScaledDiagram::unscaled(staircase(n, i, j).unwrap())
                    );
                }
            }
        }
        assert!(staircase(4, 1, 2).is_err());
        assert!(staircase(4, 4, 1).is_err());
    }

    #[test]
    fn diagram_examples() {
        assert_eq!(diagram_to_jnf(&identity(4).unwrap()), JnfWord::empty());
        assert_eq!(
            diagram_to_jnf(&generator(3, 1).unwrap()).blocks(),
            &[(1, 1)]
        );
        let d = Diagram::from_pairs(4, &[(1, 2), (3, 4), (5, 8), (6, 7)]).unwrap();
        assert_eq!(diagram_to_jnf(&d).to_string(), "e1 e3 e2");
    }

    #[test]
    fn algorithm_agrees_with_lookup_table() {
        for n in 1..=7 {
            let table = JnfLookup::new(n).unwrap();
            let diagrams = enumerate_diagrams(n).unwrap();
            assert_eq!(table.len(), diagrams.len(), "n={n}");
            for d in &diagrams {
                let j = diagram_to_jnf(d);
                assert_eq!(table.get(d), Some(&j), "{d}");
                assert_eq!(
                    evaluate(&j.render(), n).unwrap(),
                    ScaledDiagram::unscaled(d.clone())
                );
            }
        }
    }

    #[test]
    fn enumerated_forms_are_fixed_points() {
        for n in 2..=6 {
            let sys = tl_rules(n, true).unwrap();
            for j in enumerate_jnf(n).unwrap() {
                assert_eq!(normal_form(&j.render(), &sys).unwrap(), j.render());
            }
        }
    }

    proptest! {
        #[test]
        fn normal_forms_are_jones_forms(
            n in 2usize..=6,
            raw in prop::collection::vec(0usize..6, 0..12),
        ) {
            let letters: Vec<Letter> = raw
                .iter()
                .map(|&x| if x == 0 { Letter::Delta } else { Letter::Gen(1 + (x - 1) % (n - 1)) })
                .collect();
            let word = Word(letters);
            let nf = normal_form(&word, &tl_rules(n, true).unwrap()).unwrap();
            let parsed = is_jnf(&nf);
            prop_assert!(parsed.is_ok(), "{} -> {}", word, nf);
            prop_assert_eq!(evaluate(&nf, n).unwrap(), evaluate(&word, n).unwrap());
            let free = nf.without_deltas();
            if let Some(m) = free.max_index() {
                let hits = free.letters().iter().filter(|&&l| l == Letter::Gen(m)).count();
                prop_assert_eq!(hits, 1);
            }
        }
    }
}
