use serde_json::Value;
use tl_core::category::{eval_net, BubbleConvention, MTerm, Mode, Object};
use tl_core::cli::{run, Outcome};
use tl_core::oriented::{oriented_rules, OrientedLinComb};
use tl_core::planar::{Diagram, DyckPath};
use tl_core::words::{parse_word, LinComb};

fn tl(args: &[&str]) -> Outcome {
    run(std::iter::once("tl").chain(args.iter().copied()))
}

fn ok(args: &[&str]) -> String {
    let out = tl(args);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    out.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).expect("well-formed JSON")
}

#[test]
fn count_prints_catalan() {
    assert_eq!(ok(&["count", "--n", "6"]), "132\n");
    assert_eq!(ok(&["count", "--n", "0"]), "1\n");
    assert_eq!(ok(&["count", "--n", "30"]), "3814986502092304\n");
}

#[test]
fn base_and_completed_normal_forms_differ() {
    let base = ok(&["normalize", "--n", "4", "--rules", "base", "e3 e2 e3 e1"]);
    let done = ok(&[
        "normalize",
        "--n",
        "4",
        "--rules",
        "completed",
        "e3 e2 e3 e1",
    ]);
    assert_ne!(base, done);
    assert_eq!(base, "e1 e3\nalso reachable: e3 e2 e1 e3\n");
    assert_eq!(done, "e1 e3\n");
}

#[test]
fn trace_lines_have_the_documented_shape() {
    let out = ok(&["normalize", "--n", "4", "--trace", "e1 e1 e2 e1"]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines.len() >= 2);
    for l in &lines[..lines.len() - 1] {
        assert!(
            l.starts_with("rule=") && l.contains(" pos=") && l.contains(" => "),
            "{l}"
        );
    }
    assert_eq!(*lines.last().unwrap(), "d e1");
}

#[test]
fn exit_codes() {
    let bad_index = tl(&["normalize", "--n", "4", "e9"]);
    assert_eq!(bad_index.code, 1);
    assert!(bad_index.stderr.contains("e9"));
    assert_eq!(bad_index.stderr.lines().count(), 1);
    assert_eq!(tl(&["normalize", "--n", "4", "--bogus", "e1"]).code, 2);
    assert_eq!(tl(&["frobnicate"]).code, 2);
    assert_eq!(tl(&["basis", "--n", "3", "--format", "svg"]).code, 2);
    assert_eq!(tl(&["basis", "--n", "99"]).code, 2);
    assert_eq!(tl(&["jnf-diagram", "--n", "2", "[(1,3),(2,4)]"]).code, 1);
    let mismatch = tl(&["cat", "normalize", "--dom", "v", "id 0 | cap+ | id 0"]);
    assert_eq!(mismatch.code, 1);
    assert_eq!(
        tl(&["tlo", "normalize", "--n", "2", "--k", "1", "1[vv] e1"]).code,
        1
    );
    assert_eq!(tl(&["--help"]).code, 0);
}

#[test]
fn normalize_json_roundtrips() {
    let doc = json(&["normalize", "--n", "4", "--json", "--trace", "e3 e2 e3 e1"]);
    let nf = doc["normal_form"].as_str().unwrap();
    assert_eq!(parse_word(nf, 4).unwrap().to_string(), nf);
    let steps = doc["trace"].as_array().unwrap();
    assert_eq!(steps.last().unwrap()["after"].as_str().unwrap(), nf);

    let doc = json(&["normalize", "--n", "3", "--json", "2*e1 e1 + (d^-1)*e2"]);
    let text: Vec<String> = doc
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "({})*{}",
                r["coefficient"].as_str().unwrap(),
                r["word"].as_str().unwrap()
            )
        })
        .collect();
    let back = LinComb::parse(&text.join(" + "), 3).unwrap();
    assert_eq!(back.to_string(), "(d^-1)*e2 + (2)*d e1");
}

#[test]
fn basis_formats_roundtrip() {
    let doc = json(&["basis", "--n", "4", "--format", "diagram", "--json"]);
    assert_eq!(doc["count"], 14);
    for d in doc["elements"].as_array().unwrap() {
        let text = d.as_str().unwrap();
        assert_eq!(Diagram::parse(text).unwrap().to_string(), text);
    }
    let doc = json(&["basis", "--n", "4", "--format", "dyck", "--json"]);
    for p in doc["elements"].as_array().unwrap() {
        let text = p.as_str().unwrap();
        assert_eq!(DyckPath::parse(text).unwrap().to_string(), text);
    }
    let doc = json(&["basis", "--n", "3", "--format", "jnf", "--json"]);
    let words: Vec<&str> = doc["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(words, ["", "e1", "e2", "e1 e2", "e2 e1"]);
    assert_eq!(ok(&["basis", "--n", "3"]).lines().count(), 5);
}

#[test]
fn diagram_commands() {
    assert_eq!(
        ok(&["jnf-diagram", "--n", "4", "[(1,2),(3,4),(5,8),(6,7)]"]),
        "e1 e3 e2\n"
    );
    let doc = json(&[
        "multiply-diagrams",
        "--n",
        "2",
        "[(1,2),(3,4)]",
        "[(1,2),(3,4)]",
        "--json",
    ]);
    assert_eq!(doc["loops"], 1);
    assert_eq!(doc["diagram"], "n=2 [(1,2),(3,4)]");
    let out = ok(&["bijection", "--n", "4"]);
    assert!(out.ends_with("14 diagrams, all roundtrips verified\n"));
}

#[test]
fn confluence_and_completion_reports() {
    let doc = json(&["check-confluence", "--n", "4", "--rules", "base", "--json"]);
    assert_eq!(doc["confluent"], false);
    let doc = json(&[
        "check-confluence",
        "--n",
        "4",
        "--rules",
        "completed",
        "--json",
    ]);
    assert_eq!(doc["confluent"], true);
    let doc = json(&["complete", "--n", "5", "--json"]);
    assert_eq!(doc["matches_completed_table"], true);
    for r in doc["rules"].as_array().unwrap() {
        parse_word(r["lhs"].as_str().unwrap(), 5).unwrap();
        parse_word(r["rhs"].as_str().unwrap(), 5).unwrap();
    }
}

#[test]
fn oriented_commands() {
    let out = ok(&["tlo", "dims", "--n", "2", "--k", "1"]);
    assert!(out.contains("v^ -> v^: 2"));
    assert!(out.contains("v^ -> ^v: 1"));
    let doc = json(&["tlo", "dims", "--n", "3", "--k", "1", "--json"]);
    for e in doc["sectors"].as_array().unwrap() {
        assert_eq!(e["dimension"], e["oracle"]);
    }

    let args = [
        "tlo",
        "normalize",
        "--n",
        "3",
        "--k",
        "1",
        "--json",
        "e1 e2 e1",
    ];
    let doc = json(&args);
    let text: Vec<String> = doc
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "({})*{}",
                r["coefficient"].as_str().unwrap(),
                r["word"].as_str().unwrap()
            )
        })
        .collect();
    let sys = oriented_rules(3, 1, BubbleConvention::default()).unwrap();
    let back = OrientedLinComb::parse(&text.join(" + "), &sys).unwrap();
    assert_eq!(back.len(), text.len());
    let plain = ok(&["tlo", "normalize", "--n", "3", "--k", "1", "e1 e2 e1"]);
    assert_eq!(plain.trim(), back.to_string());
}

#[test]
fn category_commands() {
    let out = ok(&[
        "cat",
        "normalize",
        "--mode",
        "oriented",
        "--dom",
        "v",
        "id v | cup- | id 0; id 0 | cap+ | id v",
    ]);
    assert_eq!(out, "q^0 * id v\n");
    let args = [
        "cat",
        "normalize",
        "--mode",
        "plain",
        "--dom",
        "0",
        "--json",
        "id 0 | cup | id 0; id 0 | cap | id 0",
    ];
    let doc = json(&args);
    assert_eq!(doc["scalar_exp"], 1);
    assert_eq!(doc["term"], "");
    let flipped = json(&[
        "cat",
        "normalize",
        "--dom",
        "0",
        "--bubble-convention",
        "cw",
        "--json",
        "id 0 | cup+ | id 0; id 0 | cap+ | id 0",
    ]);
    let default = json(&[
        "cat",
        "normalize",
        "--dom",
        "0",
        "--json",
        "id 0 | cup+ | id 0; id 0 | cap+ | id 0",
    ]);
    assert_eq!(
        flipped["scalar_exp"].as_i64(),
        default["scalar_exp"].as_i64().map(|e| -e)
    );

    let doc = json(&["cat", "hom", "--dom", "v^v^", "--cod", "v^v^", "--json"]);
    assert_eq!(doc["dimension"], 14);
    let dom = Object::parse("v^v^", Mode::Oriented).unwrap();
    for b in doc["basis"].as_array().unwrap() {
        let t = MTerm::parse(dom.clone(), b["term"].as_str().unwrap(), Mode::Oriented).unwrap();
        let net = eval_net(&t, BubbleConvention::default()).unwrap();
        let pairs: Vec<(usize, usize)> = serde_json::from_value(b["pairs"].clone()).unwrap();
        assert_eq!(net.pairs(), pairs);
    }
    let doc = json(&["cat", "hom", "--dom", "3", "--cod", "3", "--json"]);
    assert_eq!(doc["dimension"], 5);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["tlo", "dims", "--n", "3", "--k", "2"];
    assert_eq!(ok(&args), ok(&args));
    let args = ["check-confluence", "--n", "5"];
    assert_eq!(ok(&args), ok(&args));
}
