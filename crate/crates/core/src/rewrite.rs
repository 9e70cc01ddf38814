//! Ground string rewriting for the presented algebra at a fixed `n`.
//!
//! Rules are oriented by shortlex (shorter first, then lexicographic with
//! `d < e1 < .. < e(n-1)`), which is well founded on words of all lengths.
//! Plain lexicographic order is not: `e1 > d e1 > d d e1 > ..` descends forever.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::words::{evaluate, Letter, Word, WordError};

/// Default cap on rewrite steps for a single normalization.
pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rewriting systems need n >= 2 (got {0})")]
    TooSmall(usize),
    #[error("rule {id} has an empty left-hand side")]
    EmptyLhs { id: String },
    #[error("normalization exceeded {0} steps")]
    StepBudgetExceeded(usize),
    #[error("completion budget of {0} new rules exhausted")]
    CompletionBudgetExhausted(usize),
    #[error("rule {id} does not decrease in shortlex order")]
    NotDecreasing { id: String },
    #[error("rule {lhs} -> {rhs} is not sound for the diagram semantics")]
    Unsound { lhs: String, rhs: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: String,
    pub lhs: Word,
    pub rhs: Word,
}

impl Rule {
    pub fn new(id: impl Into<String>, lhs: Word, rhs: Word) -> Self {
        Self {
            id: id.into(),
            lhs,
            rhs,
        }
    }

    /// `evaluate(lhs) == evaluate(rhs)` as scaled diagrams.
    pub fn is_sound(&self, n: usize) -> Result<bool, WordError> {
        Ok(evaluate(&self.lhs, n)? == evaluate(&self.rhs, n)?)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.id, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone)]
pub struct RuleSystem {
    n: usize,
    rules: Vec<Rule>,
    by_first: HashMap<Letter, Vec<usize>>,
}

impl RuleSystem {
    pub fn new(n: usize, rules: Vec<Rule>) -> Result<Self, RewriteError> {
        let mut by_first: HashMap<Letter, Vec<usize>> = HashMap::new();
        for (idx, r) in rules.iter().enumerate() {
            let first = *r
                .lhs
                .letters()
                .first()
                .ok_or_else(|| RewriteError::EmptyLhs { id: r.id.clone() })?;
            r.lhs.check_range(n)?;
            r.rhs.check_range(n)?;
            by_first.entry(first).or_default().push(idx);
        }
        Ok(Self { n, rules, by_first })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    /// The rules as a set of `(lhs, rhs)` pairs, ignoring ids and order.
    pub fn rule_set(&self) -> std::collections::BTreeSet<(Word, Word)> {
        self.rules
            .iter()
            .map(|r| (r.lhs.clone(), r.rhs.clone()))
            .collect()
    }

    fn matches_at(&self, w: &Word, rule: usize, pos: usize) -> bool {
        let lhs = self.rules[rule].lhs.letters();
        w.letters().get(pos..pos + lhs.len()) == Some(lhs)
    }

    /// Every redex of `w`, by position then rule index.
    pub fn redexes(&self, w: &Word) -> Vec<Redex> {
        let mut out = Vec::new();
        for (pos, letter) in w.letters().iter().enumerate() {
            if let Some(candidates) = self.by_first.get(letter) {
                out.extend(
                    candidates
                        .iter()
                        .filter(|&&r| self.matches_at(w, r, pos))
                        .map(|&rule| Redex { rule, pos }),
                );
            }
        }
        out
    }

    /// Leftmost redex, lowest rule index among those at that position.
    pub fn first_redex(&self, w: &Word) -> Option<Redex> {
        for (pos, letter) in w.letters().iter().enumerate() {
            if let Some(candidates) = self.by_first.get(letter) {
                if let Some(&rule) = candidates.iter().find(|&&r| self.matches_at(w, r, pos)) {
                    return Some(Redex { rule, pos });
                }
            }
        }
        None
    }

    pub fn is_normal(&self, w: &Word) -> bool {
        self.first_redex(w).is_none()
    }

    pub fn apply(&self, w: &Word, redex: Redex) -> Word {
        let rule = &self.rules[redex.rule];
        let letters = w.letters();
        let mut out = Vec::with_capacity(letters.len() + rule.rhs.len());
        out.extend_from_slice(&letters[..redex.pos]);
        out.extend_from_slice(rule.rhs.letters());
        out.extend_from_slice(&letters[redex.pos + rule.lhs.len()..]);
        Word(out)
    }

    fn step(&self, w: &Word, redex: Redex) -> RewriteStep {
        RewriteStep {
            rule: redex.rule,
            rule_id: self.rules[redex.rule].id.clone(),
            pos: redex.pos,
            before: w.clone(),
            after: self.apply(w, redex),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Redex {
    pub rule: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: usize,
    pub rule_id: String,
    /// 0-based letter offset of the redex.
    pub pos: usize,
    pub before: Word,
    pub after: Word,
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rule={} pos={} {} => {}",
            self.rule_id, self.pos, self.before, self.after
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub rule: String,
    pub pos: usize,
    pub before: String,
    pub after: String,
}

impl From<&RewriteStep> for StepRecord {
    fn from(s: &RewriteStep) -> Self {
        Self {
            rule: s.rule_id.clone(),
            pos: s.pos,
            before: s.before.to_string(),
            after: s.after.to_string(),
        }
    }
}

pub type Trace = Vec<RewriteStep>;

/// Checks that each step of a trace replays against `sys`.
pub fn replay(trace: &[RewriteStep], sys: &RuleSystem) -> bool {
    trace.iter().all(|s| {
        sys.matches_at(&s.before, s.rule, s.pos)
            && sys.apply(
                &s.before,
                Redex {
                    rule: s.rule,
                    pos: s.pos,
                },
            ) == s.after
    }) && trace.windows(2).all(|p| p[0].after == p[1].before)
}

fn same_ids(w: &Word, n: usize) -> Result<(), RewriteError> {
    w.check_range(n)?;
    Ok(())
}

/// Deterministic normalization: leftmost redex, then lowest rule index.
pub fn normalize(w: &Word, sys: &RuleSystem) -> Result<(Word, Trace), RewriteError> {
    normalize_with_budget(w, sys, DEFAULT_STEP_BUDGET)
}

pub fn normalize_with_budget(
    w: &Word,
    sys: &RuleSystem,
    budget: usize,
) -> Result<(Word, Trace), RewriteError> {
    same_ids(w, sys.n)?;
    let mut cur = w.clone();
    let mut trace = Vec::new();
    while let Some(redex) = sys.first_redex(&cur) {
        if trace.len() == budget {
            return Err(RewriteError::StepBudgetExceeded(budget));
        }
        let step = sys.step(&cur, redex);
        cur = step.after.clone();
        trace.push(step);
    }
    Ok((cur, trace))
}

/// Normal form only, without recording a trace.
pub fn normal_form(w: &Word, sys: &RuleSystem) -> Result<Word, RewriteError> {
    same_ids(w, sys.n)?;
    let mut cur = w.clone();
    for _ in 0..DEFAULT_STEP_BUDGET {
        match sys.first_redex(&cur) {
            Some(r) => cur = sys.apply(&cur, r),
            None => return Ok(cur),
        }
    }
    Err(RewriteError::StepBudgetExceeded(DEFAULT_STEP_BUDGET))
}

/// Normalization under an arbitrary strategy: `choose` picks one of the
/// available redexes at every step.
pub fn normalize_by<F>(
    w: &Word,
    sys: &RuleSystem,
    mut choose: F,
) -> Result<(Word, Trace), RewriteError>
where
    F: FnMut(&[Redex]) -> usize,
{
    same_ids(w, sys.n)?;
    let mut cur = w.clone();
    let mut trace = Vec::new();
    loop {
        let redexes = sys.redexes(&cur);
        if redexes.is_empty() {
            return Ok((cur, trace));
        }
        if trace.len() == DEFAULT_STEP_BUDGET {
            return Err(RewriteError::StepBudgetExceeded(DEFAULT_STEP_BUDGET));
        }
        let pick = redexes[choose(&redexes) % redexes.len()];
        let step = sys.step(&cur, pick);
        cur = step.after.clone();
        trace.push(step);
    }
}

/// The rule families, in the order their instances are numbered.
fn push_family(
    out: &mut Vec<Rule>,
    id: String,
    lhs: &[usize],
    rhs_prefix: &[Letter],
    rhs: &[usize],
) {
    let mut r = rhs_prefix.to_vec();
    r.extend(rhs.iter().map(|&i| Letter::Gen(i)));
    out.push(Rule::new(id, Word::gens(lhs), Word(r)));
}

/// Every irreducible word reachable from `w` under any strategy, or `None`
/// when more than `limit` words are visited. A convergent system yields a
/// single word.
pub fn reachable_normal_forms(
    w: &Word,
    sys: &RuleSystem,
    limit: usize,
) -> Option<std::collections::BTreeSet<Word>> {
    let mut seen = std::collections::HashSet::from([w.clone()]);
    let mut stack = vec![w.clone()];
    let mut out = std::collections::BTreeSet::new();
    while let Some(cur) = stack.pop() {
        let redexes = sys.redexes(&cur);
        if redexes.is_empty() {
            out.insert(cur);
            continue;
        }
        for r in redexes {
            let next = sys.apply(&cur, r);
            if seen.insert(next.clone()) {
                if seen.len() > limit {
                    return None;
                }
                stack.push(next);
            }
        }
    }
    Some(out)
}

/// Ground instances of the Temperley-Lieb rules for a fixed `n`:
/// (1) `e_i d -> d e_i`, (2) `e_i e_i -> d e_i`, (3±) `e_i e_{i±1} e_i -> e_i`,
/// (4) `e_i e_j -> e_j e_i` for `j < i-1`, and with `completed` also
/// (5) `e_i e_{i-1} .. e_{i-k} e_i -> e_{i-2} .. e_{i-k} e_i` and
/// (6) `e_i e_{i+k} .. e_{i+1} e_i -> e_i e_{i+k} .. e_{i+2}` for `k >= 2`.
pub fn tl_rules(n: usize, completed: bool) -> Result<RuleSystem, RewriteError> {
    if n < 2 {
        return Err(RewriteError::TooSmall(n));
    }
    let top = n - 1;
    let mut rules = Vec::new();
    for i in 1..=top {
        rules.push(Rule::new(
            format!("1[i={i}]"),
            Word(vec![Letter::Gen(i), Letter::Delta]),
            Word(vec![Letter::Delta, Letter::Gen(i)]),
        ));
    }
    for i in 1..=top {
        push_family(
            &mut rules,
            format!("2[i={i}]"),
            &[i, i],
            &[Letter::Delta],
            &[i],
        );
    }
    for i in 1..top {
        push_family(&mut rules, format!("3+[i={i}]"), &[i, i + 1, i], &[], &[i]);
    }
    for i in 2..=top {
        push_family(&mut rules, format!("3-[i={i}]"), &[i, i - 1, i], &[], &[i]);
    }
    for i in 1..=top {
        for j in 1..i.saturating_sub(1) {
            push_family(&mut rules, format!("4[i={i},j={j}]"), &[i, j], &[], &[j, i]);
        }
    }
    if completed {
        for i in 1..=top {
            for k in 2..i {
                let mut lhs = vec![i];
                lhs.extend((i - k..i).rev());
                lhs.push(i);
                let mut rhs: Vec<usize> = (i - k..=i - 2).rev().collect();
                rhs.push(i);
                push_family(&mut rules, format!("5[i={i},k={k}]"), &lhs, &[], &rhs);
            }
        }
        for i in 1..=top {
            for k in 2..=top.saturating_sub(i) {
                let mut lhs = vec![i];
                lhs.extend((i + 1..=i + k).rev());
                lhs.push(i);
                let mut rhs = vec![i];
                rhs.extend((i + 2..=i + k).rev());
                push_family(&mut rules, format!("6[i={i},k={k}]"), &lhs, &[], &rhs);
            }
        }
    }
    RuleSystem::new(n, rules)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecreaseReason {
    /// The right-hand side is strictly shorter.
    Shorter { lhs_len: usize, rhs_len: usize },
    /// Same length; first difference at `position` has a smaller letter.
    LexSmaller { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCertificate {
    pub rule: usize,
    pub id: String,
    pub reason: DecreaseReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminationVerdict {
    Certified(Vec<RuleCertificate>),
    Rejected { rule: usize, id: String },
}

impl TerminationVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, TerminationVerdict::Certified(_))
    }
}

pub fn shortlex_decrease(lhs: &Word, rhs: &Word) -> Option<DecreaseReason> {
    if rhs.len() < lhs.len() {
        return Some(DecreaseReason::Shorter {
            lhs_len: lhs.len(),
            rhs_len: rhs.len(),
        });
    }
    if rhs.len() > lhs.len() {
        return None;
    }
    let position = lhs
        .letters()
        .iter()
        .zip(rhs.letters())
        .position(|(a, b)| a != b)?;
    (rhs.letters()[position] < lhs.letters()[position])
        .then_some(DecreaseReason::LexSmaller { position })
}

/// Certifies that every rule strictly decreases shortlex, or names the first
/// rule that does not.
pub fn check_termination_order(sys: &RuleSystem) -> TerminationVerdict {
    let mut certs = Vec::new();
    for (idx, r) in sys.rules.iter().enumerate() {
        match shortlex_decrease(&r.lhs, &r.rhs) {
            Some(reason) => certs.push(RuleCertificate {
                rule: idx,
                id: r.id.clone(),
                reason,
            }),
            None => {
                return TerminationVerdict::Rejected {
                    rule: idx,
                    id: r.id.clone(),
                }
            }
        }
    }
    TerminationVerdict::Certified(certs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OverlapKind {
    /// A proper suffix of one left-hand side is a prefix of the other.
    Overlap,
    /// One left-hand side occurs inside the other.
    Containment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub rule: usize,
    pub pos: usize,
    pub result: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPair {
    pub source: Word,
    pub left: Branch,
    pub right: Branch,
    pub kind: OverlapKind,
}

/// All minimal overlaps between left-hand sides, including a rule with
/// itself. Disjoint redexes and identical steps are not overlaps.
pub fn critical_pairs(sys: &RuleSystem) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (a, ra) in sys.rules.iter().enumerate() {
        let la = ra.lhs.letters();
        for (b, rb) in sys.rules.iter().enumerate() {
            let lb = rb.lhs.letters();
            for ov in 1..la.len().min(lb.len()) {
                if la[la.len() - ov..] == lb[..ov] {
                    let mut src = la.to_vec();
                    src.extend_from_slice(&lb[ov..]);
                    let source = Word(src);
                    let left = Redex { rule: a, pos: 0 };
                    let right = Redex {
                        rule: b,
                        pos: la.len() - ov,
                    };
                    push_pair(
                        sys,
                        &mut out,
                        &mut seen,
                        source,
                        left,
                        right,
                        OverlapKind::Overlap,
                    );
                }
            }
            if lb.len() <= la.len() {
                for p in 0..=la.len() - lb.len() {
                    if (a == b && p == 0) || la[p..p + lb.len()] != *lb {
                        continue;
                    }
                    let left = Redex { rule: a, pos: 0 };
                    let right = Redex { rule: b, pos: p };
                    push_pair(
                        sys,
                        &mut out,
                        &mut seen,
                        ra.lhs.clone(),
                        left,
                        right,
                        OverlapKind::Containment,
                    );
                }
            }
        }
    }
    out
}

fn push_pair(
    sys: &RuleSystem,
    out: &mut Vec<CriticalPair>,
    seen: &mut std::collections::HashSet<(Word, Redex, Redex)>,
    source: Word,
    left: Redex,
    right: Redex,
    kind: OverlapKind,
) {
    let key = (source.clone(), left.min(right), left.max(right));
    if !seen.insert(key) {
        return;
    }
    let branch = |r: Redex| Branch {
        rule: r.rule,
        pos: r.pos,
        result: sys.apply(&source, r),
    };
    out.push(CriticalPair {
        left: branch(left),
        right: branch(right),
        source,
        kind,
    });
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Joinability {
    Joinable { normal_form: Word },
    Divergent { left: Word, right: Word },
}

impl Joinability {
    pub fn is_joinable(&self) -> bool {
        matches!(self, Joinability::Joinable { .. })
    }
}

pub fn joinable(pair: &CriticalPair, sys: &RuleSystem) -> Result<Joinability, RewriteError> {
    let left = normal_form(&pair.left.result, sys)?;
    let right = normal_form(&pair.right.result, sys)?;
    Ok(if left == right {
        Joinability::Joinable { normal_form: left }
    } else {
        Joinability::Divergent { left, right }
    })
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub system: RuleSystem,
    /// Rules introduced by completion, in the order they were added.
    pub added: Vec<Rule>,
    /// Rules dropped during interreduction.
    pub removed: Vec<Rule>,
}

/// Bounded Knuth-Bendix completion under shortlex.
///
/// `budget` caps the number of rules added. New rules are interreduced:
/// rules whose left-hand side contains the new one are turned back into
/// equations, and all right-hand sides are kept in normal form.
pub fn knuth_bendix(sys: &RuleSystem, budget: usize) -> Result<Completion, RewriteError> {
    let n = sys.n;
    for r in &sys.rules {
        if shortlex_decrease(&r.lhs, &r.rhs).is_none() {
            return Err(RewriteError::NotDecreasing { id: r.id.clone() });
        }
    }
    let mut rules = sys.rules.clone();
    let mut added = Vec::new();
    let mut removed = Vec::new();
    let mut counter = 0usize;

    loop {
        let current = RuleSystem::new(n, rules.clone())?;
        let mut divergent = None;
        for cp in critical_pairs(&current) {
            if let Joinability::Divergent { left, right } = joinable(&cp, &current)? {
                divergent = Some((left, right));
                break;
            }
        }
        let Some(eq) = divergent else {
            return Ok(Completion {
                system: current,
                added,
                removed,
            });
        };

        let mut queue = VecDeque::from([eq]);
        while let Some((a, b)) = queue.pop_front() {
            let current = RuleSystem::new(n, rules.clone())?;
            let (a, b) = (normal_form(&a, &current)?, normal_form(&b, &current)?);
            if a == b {
                continue;
            }
            let (lhs, rhs) = if a > b { (a, b) } else { (b, a) };
            if counter == budget {
                return Err(RewriteError::CompletionBudgetExhausted(budget));
            }
            counter += 1;
            let rule = Rule::new(format!("kb{counter}"), lhs, rhs);
            if !rule.is_sound(n)? {
                return Err(RewriteError::Unsound {
                    lhs: rule.lhs.to_string(),
                    rhs: rule.rhs.to_string(),
                });
            }

            let (kept, dropped): (Vec<Rule>, Vec<Rule>) =
                rules.drain(..).partition(|r| !contains(&r.lhs, &rule.lhs));
            rules = kept;
            for r in dropped {
                queue.push_back((r.lhs.clone(), r.rhs.clone()));
                if let Some(pos) = added.iter().position(|x: &Rule| x.id == r.id) {
                    added.remove(pos);
                } else {
                    removed.push(r);
                }
            }
            added.push(rule.clone());
            rules.push(rule);

            let current = RuleSystem::new(n, rules.clone())?;
            for r in rules.iter_mut() {
                r.rhs = normal_form(&r.rhs, &current)?;
            }
            for a in added.iter_mut() {
                if let Some(r) = rules.iter().find(|r| r.id == a.id) {
                    a.rhs = r.rhs.clone();
                }
            }
        }
    }
}

fn contains(haystack: &Word, needle: &Word) -> bool {
    let (h, n) = (haystack.letters(), needle.letters());
    n.len() <= h.len() && h.windows(n.len()).any(|w| w == n)
}
