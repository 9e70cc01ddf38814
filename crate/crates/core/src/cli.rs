//! Command-line front end. [`run`] takes the full argument vector and returns
//! the exit code with everything that would be written to stdout and stderr,
//! so the binary is a thin wrapper and tests can drive it in-process.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::category::{
    eval_net, hom_basis, normalize_term, term_from_net, BubbleConvention, MTerm, Mode, Object,
};
use crate::jnf::{diagram_to_jnf, enumerate_jnf, JnfLookup};
use crate::oriented::{normalize_oriented, oriented_rules, sector_table, OrientedLinComb};
use crate::planar::{compose, count_diagrams, enumerate_diagrams, from_dyck, to_dyck, Diagram};
use crate::rewrite::{
    critical_pairs, joinable, knuth_bendix, normalize_with_budget, reachable_normal_forms,
    tl_rules, Joinability, RuleSystem, StepRecord, DEFAULT_STEP_BUDGET,
};
use crate::words::{evaluate, parse_word, LinComb};

/// Largest `n` accepted by commands that build rule systems or enumerate.
const N_MAX: usize = 8;
/// Words visited when searching for alternative normal forms.
const REACHABLE_LIMIT: usize = 20_000;

#[derive(Debug, Parser)]
#[command(name = "tl", version, about = "Temperley-Lieb algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Number of n-diagrams.
    Count {
        #[arg(long)]
        n: usize,
    },
    /// Every basis element for n.
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Jnf)]
        format: Format,
        #[arg(long)]
        json: bool,
    },
    /// Rewrites a word (or linear combination) to normal form.
    Normalize {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Rules::Completed)]
        rules: Rules,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        max_steps: usize,
        input: String,
    },
    /// Lists critical pairs and whether each joins.
    CheckConfluence {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Rules::Base)]
        rules: Rules,
        #[arg(long)]
        json: bool,
    },
    /// Knuth-Bendix completion of the base rules.
    Complete {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long)]
        json: bool,
    },
    /// Jones normal form of a diagram given by its pairs.
    JnfDiagram {
        #[arg(long)]
        n: usize,
        pairs: String,
        #[arg(long)]
        json: bool,
    },
    /// Product of two diagrams; the first is placed below the second.
    MultiplyDiagrams {
        #[arg(long)]
        n: usize,
        lower: String,
        upper: String,
        #[arg(long)]
        json: bool,
    },
    /// Diagram, Dyck path and normal form side by side, with roundtrips checked.
    Bijection {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// The oriented algebra.
    Tlo {
        #[command(subcommand)]
        command: TloCommand,
    },
    /// The monoidal category of caps and cups.
    Cat {
        #[command(subcommand)]
        command: CatCommand,
    },
}

#[derive(Debug, Args)]
struct SectorArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Convention::Ccw)]
    bubble_convention: Convention,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum TloCommand {
    Normalize {
        #[command(flatten)]
        sector: SectorArgs,
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    Dims {
        #[command(flatten)]
        sector: SectorArgs,
    },
}

#[derive(Debug, Subcommand)]
enum CatCommand {
    Normalize {
        #[arg(long, value_enum, default_value_t = CatMode::Oriented)]
        mode: CatMode,
        #[arg(long)]
        dom: String,
        #[arg(long, value_enum, default_value_t = Convention::Ccw)]
        bubble_convention: Convention,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
        term: String,
    },
    Hom {
        #[arg(long, value_enum)]
        mode: Option<CatMode>,
        #[arg(long)]
        dom: String,
        #[arg(long)]
        cod: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Jnf,
    Diagram,
    Dyck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rules {
    Base,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    Ccw,
    Cw,
}

impl From<Convention> for BubbleConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Ccw => BubbleConvention::CounterclockwiseQ,
            Convention::Cw => BubbleConvention::ClockwiseQ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CatMode {
    Oriented,
    Plain,
}

impl From<CatMode> for Mode {
    fn from(m: CatMode) -> Self {
        match m {
            CatMode::Oriented => Mode::Oriented,
            CatMode::Plain => Mode::Plain,
        }
    }
}

/// What an invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Usage errors exit with 2, domain errors with 1.
enum Failure {
    Usage(String),
    Domain(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 {
                (text, String::new())
            } else {
                (String::new(), text)
            };
            return Outcome {
                code,
                stdout,
                stderr,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Domain(msg)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn check_n(n: usize, min: usize, max: usize) -> Result<(), Failure> {
    if n < min || n > max {
        return Err(Failure::Usage(format!(
            "--n must lie in {min}..={max}, got {n}"
        )));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn lines<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|l| l + "\n").collect()
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Count { n } => Ok(format!("{}\n", count_diagrams(n))),
        Command::Basis { n, format, json } => basis(n, format, json),
        Command::Normalize {
            n,
            rules,
            trace,
            json,
            max_steps,
            input,
        } => normalize(n, rules, trace, json, max_steps, &input),
        Command::CheckConfluence { n, rules, json } => check_confluence(n, rules, json),
        Command::Complete { n, max_steps, json } => complete(n, max_steps, json),
        Command::JnfDiagram { n, pairs, json } => {
            check_n(n, 1, usize::MAX)?;
            let d = Diagram::parse_with_n(&pairs, n)?;
            let w = diagram_to_jnf(&d).to_string();
            Ok(if json {
                to_json(&json!({ "diagram": d.to_string(), "jnf": w }))
            } else {
                format!("{w}\n")
            })
        }
        Command::MultiplyDiagrams {
            n,
            lower,
            upper,
            json,
        } => {
            check_n(n, 1, usize::MAX)?;
            let a = Diagram::parse_with_n(&lower, n)?;
            let b = Diagram::parse_with_n(&upper, n)?;
            let p = compose(&a.into(), &b.into())?;
            Ok(if json {
                to_json(&json!({ "loops": p.power, "diagram": p.diagram.to_string() }))
            } else {
                format!("loops={} {}\n", p.power, p.diagram)
            })
        }
        Command::Bijection { n, json } => bijection(n, json),
        Command::Tlo { command } => tlo(command),
        Command::Cat { command } => cat(command),
    }
}

fn basis(n: usize, format: Format, json: bool) -> CmdResult {
    check_n(n, 0, N_MAX)?;
    let items: Vec<String> = match format {
        Format::Jnf => enumerate_jnf(n)?.iter().map(|w| w.to_string()).collect(),
        Format::Diagram if n == 0 => Vec::new(),
        Format::Diagram => enumerate_diagrams(n)?
            .iter()
            .map(|d| d.to_string())
            .collect(),
        Format::Dyck if n == 0 => Vec::new(),
        Format::Dyck => enumerate_diagrams(n)?
            .iter()
            .map(|d| to_dyck(d).to_string())
            .collect(),
    };
    if json {
        let format = format!("{format:?}").to_lowercase();
        return Ok(to_json(
            &json!({ "n": n, "format": format, "count": items.len(), "elements": items }),
        ));
    }
    // The empty word prints as a blank line; keep it visible.
    Ok(lines(items.into_iter().map(|s| {
        if s.is_empty() {
            "1".into()
        } else {
            s
        }
    })))
}

fn system(n: usize, rules: Rules) -> Result<RuleSystem, Failure> {
    check_n(n, 2, N_MAX)?;
    Ok(tl_rules(n, rules == Rules::Completed)?)
}

fn normalize(
    n: usize,
    rules: Rules,
    trace: bool,
    json: bool,
    max_steps: usize,
    input: &str,
) -> CmdResult {
    let sys = system(n, rules)?;
    if input.contains('*') {
        let x = LinComb::parse(input, n)?;
        let mut out = LinComb::zero(n);
        for (w, c) in x.terms() {
            let (nf, _) = normalize_with_budget(w, &sys, max_steps)?;
            out.add_term(nf, c);
        }
        return Ok(if json {
            to_json(&out.records())
        } else {
            format!("{out}\n")
        });
    }
    let w = parse_word(input, n)?;
    let (nf, steps) = normalize_with_budget(&w, &sys, max_steps)?;
    // A non-confluent rule set may reach other irreducible words too.
    let others: Vec<String> = reachable_normal_forms(&w, &sys, REACHABLE_LIMIT)
        .unwrap_or_default()
        .into_iter()
        .filter(|o| *o != nf)
        .map(|o| o.to_string())
        .collect();
    if json {
        let mut doc = json!({ "input": w.to_string(), "normal_form": nf.to_string(), "also_reachable": others });
        if trace {
            let records: Vec<StepRecord> = steps.iter().map(StepRecord::from).collect();
            doc["trace"] = serde_json::to_value(records).expect("records serialize");
        }
        return Ok(to_json(&doc));
    }
    let mut out = String::new();
    if trace {
        out.push_str(&lines(steps.iter().map(|s| s.to_string())));
    }
    out.push_str(&format!(
        "{}\n",
        if nf.is_empty() {
            "1".into()
        } else {
            nf.to_string()
        }
    ));
    if !others.is_empty() {
        out.push_str(&format!("also reachable: {}\n", others.join("; ")));
    }
    Ok(out)
}

fn check_confluence(n: usize, rules: Rules, json: bool) -> CmdResult {
    let sys = system(n, rules)?;
    let mut records = Vec::new();
    let mut divergent = 0;
    for pair in critical_pairs(&sys) {
        let verdict = joinable(&pair, &sys)?;
        let (status, left, right) = match &verdict {
            Joinability::Joinable { normal_form } => {
                ("joinable", normal_form.clone(), normal_form.clone())
            }
            Joinability::Divergent { left, right } => {
                divergent += 1;
                ("divergent", left.clone(), right.clone())
            }
        };
        records.push(json!({
            "source": pair.source.to_string(),
            "left_rule": sys.rules()[pair.left.rule].id,
            "right_rule": sys.rules()[pair.right.rule].id,
            "status": status,
            "left": left.to_string(),
            "right": right.to_string(),
        }));
    }
    let total = records.len();
    if json {
        return Ok(to_json(&json!({
            "n": n,
            "pairs": records,
            "divergent": divergent,
            "confluent": divergent == 0,
        })));
    }
    let mut out = lines(records.iter().map(|r| {
        format!(
            "{} [{} / {}]: {} | {} ({})",
            r["source"].as_str().unwrap_or_default(),
            r["left_rule"].as_str().unwrap_or_default(),
            r["right_rule"].as_str().unwrap_or_default(),
            r["left"].as_str().unwrap_or_default(),
            r["right"].as_str().unwrap_or_default(),
            r["status"].as_str().unwrap_or_default(),
        )
    }));
    out.push_str(&format!(
        "{total} critical pairs, {divergent} divergent: {}\n",
        if divergent == 0 {
            "confluent"
        } else {
            "not confluent"
        }
    ));
    Ok(out)
}

fn complete(n: usize, max_steps: usize, json: bool) -> CmdResult {
    let base = system(n, Rules::Base)?;
    let result = knuth_bendix(&base, max_steps)?;
    let matches_table = result.system.rule_set() == tl_rules(n, true)?.rule_set();
    let rule_json = |r: &crate::rewrite::Rule| json!({ "id": r.id, "lhs": r.lhs.to_string(), "rhs": r.rhs.to_string() });
    if json {
        return Ok(to_json(&json!({
            "n": n,
            "added": result.added.iter().map(rule_json).collect::<Vec<_>>(),
            "removed": result.removed.iter().map(rule_json).collect::<Vec<_>>(),
            "rules": result.system.rules().iter().map(rule_json).collect::<Vec<_>>(),
            "matches_completed_table": matches_table,
        })));
    }
    let mut out = lines(result.added.iter().map(|r| format!("added {r}")));
    out.push_str(&lines(
        result.removed.iter().map(|r| format!("removed {r}")),
    ));
    out.push_str(&format!(
        "{} rules after completion; matches completed table: {}\n",
        result.system.rules().len(),
        if matches_table { "yes" } else { "no" }
    ));
    Ok(out)
}

fn bijection(n: usize, json: bool) -> CmdResult {
    check_n(n, 1, N_MAX)?;
    let lookup = JnfLookup::new(n)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for d in enumerate_diagrams(n)? {
        let path = to_dyck(&d);
        let word = lookup
            .get(&d)
            .cloned()
            .unwrap_or_else(|| diagram_to_jnf(&d));
        let back = evaluate(&word.render(), n)?;
        if from_dyck(&path) != d || back.power != 0 || back.diagram != d {
            failures.push(d.to_string());
        }
        rows.push((d.to_string(), path.to_string(), word.to_string()));
    }
    if !failures.is_empty() {
        return Err(Failure::Domain(format!(
            "roundtrip failed for {}",
            failures.join("; ")
        )));
    }
    if json {
        let rows: Vec<_> = rows
            .iter()
            .map(|(d, p, w)| json!({ "diagram": d, "dyck": p, "jnf": w }))
            .collect();
        return Ok(to_json(
            &json!({ "n": n, "count": rows.len(), "rows": rows }),
        ));
    }
    let mut out = lines(rows.iter().map(|(d, p, w)| {
        let w = if w.is_empty() { "1" } else { w };
        format!("{d} | {p} | {w}")
    }));
    out.push_str(&format!(
        "{} diagrams, all roundtrips verified\n",
        rows.len()
    ));
    Ok(out)
}

fn tlo(cmd: TloCommand) -> CmdResult {
    match cmd {
        TloCommand::Normalize { sector, expr } => {
            check_n(sector.n, 1, N_MAX)?;
            let sys = oriented_rules(sector.n, sector.k, sector.bubble_convention.into())?;
            let x = OrientedLinComb::parse(&expr, &sys)?;
            let nf = normalize_oriented(&x, &sys)?;
            Ok(if sector.json {
                to_json(&nf.records())
            } else {
                format!("{nf}\n")
            })
        }
        TloCommand::Dims { sector } => {
            check_n(sector.n, 1, N_MAX)?;
            let sys = oriented_rules(sector.n, sector.k, sector.bubble_convention.into())?;
            let table = sector_table(&sys)?;
            if sector.json {
                return Ok(to_json(
                    &json!({ "n": sector.n, "k": sector.k, "sectors": table }),
                ));
            }
            Ok(lines(table.iter().map(|e| {
                format!("{} -> {}: {}", e.from, e.to, e.dimension)
            })))
        }
    }
}

fn infer_mode(text: &str) -> Mode {
    if text.trim().bytes().all(|b| b.is_ascii_digit()) && text.trim() != "0" {
        Mode::Plain
    } else {
        Mode::Oriented
    }
}

fn cat(cmd: CatCommand) -> CmdResult {
    match cmd {
        CatCommand::Normalize {
            mode,
            dom,
            bubble_convention,
            trace,
            json,
            term,
        } => {
            let mode: Mode = mode.into();
            let domain = Object::parse(&dom, mode)?;
            let t = MTerm::parse(domain, &term, mode)?;
            let nf = normalize_term(&t, bubble_convention.into())?;
            let cod = crate::category::typecheck(&nf.term)?;
            if json {
                let mut doc = json!({
                    "domain": t.domain.to_string(),
                    "codomain": cod.to_string(),
                    "scalar_exp": nf.scalar_exp,
                    "term": nf.term.to_string(),
                });
                if trace {
                    doc["reduced"] = json!(nf.reduced.to_string());
                    doc["trace"] = serde_json::to_value(&nf.trace).expect("steps serialize");
                }
                return Ok(to_json(&doc));
            }
            let mut out = String::new();
            if trace {
                out.push_str(&lines(nf.trace.iter().map(|s| s.to_string())));
            }
            let body = if nf.term.generator_count() == 0 {
                format!("id {}", t.domain)
            } else {
                nf.term.to_string()
            };
            let var = if mode == Mode::Plain { 'd' } else { 'q' };
            out.push_str(&format!("{var}^{} * {}\n", nf.scalar_exp, body));
            Ok(out)
        }
        CatCommand::Hom {
            mode,
            dom,
            cod,
            json,
        } => {
            let mode = mode.map(Mode::from).unwrap_or_else(|| {
                if infer_mode(&dom) == Mode::Plain || infer_mode(&cod) == Mode::Plain {
                    Mode::Plain
                } else {
                    Mode::Oriented
                }
            });
            let a = Object::parse(&dom, mode)?;
            let b = Object::parse(&cod, mode)?;
            let nets = hom_basis(&a, &b)?;
            let mut rows = Vec::new();
            for net in &nets {
                let t = term_from_net(net)?;
                debug_assert_eq!(
                    eval_net(&t, BubbleConvention::default()).ok().as_ref(),
                    Some(net)
                );
                rows.push((net.pairs(), t.to_string()));
            }
            if json {
                let rows: Vec<_> = rows
                    .iter()
                    .map(|(pairs, term)| json!({ "pairs": pairs, "term": term }))
                    .collect();
                return Ok(to_json(&json!({
                    "domain": a.to_string(),
                    "codomain": b.to_string(),
                    "dimension": rows.len(),
                    "basis": rows,
                })));
            }
            let mut out = lines(rows.iter().map(|(_, term)| {
                if term.is_empty() {
                    format!("id {a}")
                } else {
                    term.clone()
                }
            }));
            out.push_str(&format!("dimension {}\n", rows.len()));
            Ok(out)
        }
    }
}
