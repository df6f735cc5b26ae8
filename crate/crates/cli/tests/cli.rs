use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::OnceLock;

use proptest::prelude::*;
use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    root().join("data").join(name).display().to_string()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn mixarch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixarch")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(args: &[&str]) -> (i32, Value) {
    let mut all: Vec<&str> = args.to_vec();
    all.push("--json");
    let o = mixarch(&all);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", stdout(&o)));
    assert_valid(&v);
    (o.status.code().unwrap(), v)
}

fn text_of(args: &[&str]) -> (i32, String) {
    let o = mixarch(args);
    (o.status.code().unwrap(), stdout(&o))
}

fn assert_valid(v: &Value) {
    static SCHEMA: OnceLock<jsonschema::Validator> = OnceLock::new();
    let validator = SCHEMA.get_or_init(|| {
        let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json")).unwrap();
        jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
    });
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{v:#}");
}

/// Answer sets as printed in text mode.
fn text_models(text: &str) -> Vec<BTreeSet<String>> {
    text.lines()
        .filter_map(|l| l.strip_prefix("answer "))
        .map(|l| split_atoms(l.split_once(": ").map(|x| x.1).unwrap_or("")).into_iter().collect())
        .collect()
}

/// Ground atoms can contain spaces inside parentheses; split on top-level
/// spaces only.
fn split_atoms(s: &str) -> Vec<String> {
    let (mut out, mut cur, mut depth) = (Vec::new(), String::new(), 0);
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ' ' if depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn json_models(v: &Value) -> Vec<BTreeSet<String>> {
    v["models"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["atoms"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect())
        .collect()
}

#[test]
fn solve_prints_both_answer_sets() {
    let p = fixture("two_models.lp");
    let (code, text) = text_of(&["solve", &p, "--models", "0"]);
    assert_eq!(code, 0);
    let mut models = text_models(&text);
    models.sort();
    let want: Vec<BTreeSet<String>> = vec![["a".to_string()].into(), ["b".to_string()].into()];
    assert_eq!(models, want);

    let (code, v) = json_of(&["solve", &p, "--models", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "consistent");
    let mut jm = json_models(&v);
    jm.sort();
    assert_eq!(jm, want);
}

#[test]
fn solve_model_limit() {
    let (_, v) = json_of(&["solve", &fixture("two_models.lp"), "--models", "1"]);
    assert_eq!(v["models"].as_array().unwrap().len(), 1);
}

#[test]
fn solve_inconsistent_exits_one() {
    let (code, text) = text_of(&["solve", &fixture("inconsistent.lp")]);
    assert_eq!(code, 1);
    assert_eq!(text.trim(), "inconsistent");
    let (code, v) = json_of(&["solve", &fixture("inconsistent.lp")]);
    assert_eq!((code, v["status"].as_str()), (1, Some("inconsistent")));
}

fn text_plan(text: &str) -> Vec<(u32, String)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (s, a) = l.split_once(": ").unwrap();
            (s.parse().unwrap(), a.to_string())
        })
        .collect()
}

#[test]
fn plan_example_one() {
    let (dom, scn) = (data("restaurant.dom"), data("ex1.scn"));
    let (code, text) = text_of(&["plan", &dom, &scn]);
    assert_eq!(code, 0);
    let steps = text_plan(&text);
    let want = ["move(robot, a2)", "move(robot, d2)", "open(robot, d2)", "move(robot, a3)", "putdown(robot, ds1)"];
    assert_eq!(steps.iter().map(|(_, a)| a.as_str()).collect::<Vec<_>>(), want);
    assert_eq!(steps.iter().map(|(s, _)| *s).collect::<Vec<_>>(), [0, 1, 2, 3, 4]);

    let (code, v) = json_of(&["plan", &dom, &scn]);
    assert_eq!(code, 0);
    let js: Vec<(u32, String)> = v["actions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["step"].as_u64().unwrap() as u32, a["action"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(js, steps);
}

#[test]
fn plan_beyond_horizon_exits_one() {
    let (dom, scn) = (data("restaurant.dom"), data("ex1.scn"));
    let (code, text) = text_of(&["plan", &dom, &scn, "--horizon", "4"]);
    assert_eq!(code, 1);
    assert!(text.starts_with("no plan"), "{text}");
    let (code, v) = json_of(&["plan", &dom, &scn, "--horizon", "4"]);
    assert_eq!((code, v["status"].as_str()), (1, Some("no-plan")));
}

#[test]
fn explain_scene_narrows_label() {
    let (dom, scn) = (data("restaurant.dom"), data("ex2.scn"));
    let (code, text) = text_of(&["explain-scene", &dom, &scn]);
    assert_eq!(code, 0);
    assert_eq!(text, "stage 0\n  ob1: chair, table\nstage 1\n  ob1: table\n");
    let (_, v) = json_of(&["explain-scene", &dom, &scn]);
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages[0]["labels"]["ob1"], serde_json::json!(["chair", "table"]));
    assert_eq!(stages[1]["labels"]["ob1"], serde_json::json!(["table"]));
}

fn text_explanations(text: &str) -> Vec<Vec<(String, u32)>> {
    text.lines()
        .filter_map(|l| l.strip_prefix("explanation "))
        .map(|l| {
            l.split_once(": ")
                .unwrap()
                .1
                .split("; ")
                .map(|e| {
                    let (ev, s) = e.rsplit_once(" at ").unwrap();
                    (ev.to_string(), s.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

fn json_explanations(v: &Value) -> Vec<Vec<(String, u32)>> {
    v["explanations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| {
            x.as_array()
                .unwrap()
                .iter()
                .map(|e| (e["event"].as_str().unwrap().to_string(), e["step"].as_u64().unwrap() as u32))
                .collect()
        })
        .collect()
}

#[test]
fn diagnose_locked_door() {
    let (dom, scn) = (data("restaurant.dom"), fixture("locked_door.scn"));
    let (code, text) = text_of(&["diagnose", &dom, &scn]);
    assert_eq!(code, 0);
    let want = vec![vec![("locked(d2)".to_string(), 0)], vec![("locked(d2)".to_string(), 1)]];
    assert_eq!(text_explanations(&text), want);
    let (_, v) = json_of(&["diagnose", &dom, &scn]);
    assert_eq!(v["status"], "explained");
    assert_eq!(json_explanations(&v), want);

    let (code, text) = text_of(&["diagnose", &dom, &scn, "--mode", "all", "--limit", "5"]);
    assert_eq!(code, 0);
    let (_, v) = json_of(&["diagnose", &dom, &scn, "--mode", "all", "--limit", "5"]);
    assert_eq!(text_explanations(&text), json_explanations(&v));
    assert_eq!(v["truncated"], true);
}

#[test]
fn diagnose_consistent_history() {
    let (code, text) = text_of(&["diagnose", &data("restaurant.dom"), &data("ex1.scn")]);
    assert_eq!((code, text.as_str()), (0, "consistent\n"));
}

#[test]
fn run_and_bench_json() {
    let (code, v) = json_of(&["run", "--arch", "prob", "--trials", "2", "--seed", "4", "--perfect", "--paired"]);
    assert_eq!(code, 0);
    let archs: BTreeSet<&str> = v["trials"].as_array().unwrap().iter().map(|t| t["arch"].as_str().unwrap()).collect();
    assert_eq!(archs, ["mixed", "prob-greedy"].into());
    let (code, text) = text_of(&["run", "--arch", "prob", "--trials", "2", "--seed", "4", "--perfect", "--paired"]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().filter(|l| l.starts_with("trial ")).count(), 4);

    let (code, v) = json_of(&["bench", "--trials", "2", "--seed", "4", "--perfect"]);
    assert_eq!(code, 0);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
    assert_eq!(v["per_arch"].as_object().unwrap().len(), 3);
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = mixarch(&["plan", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn missing_file_is_usage_error() {
    let o = mixarch(&["solve", "/nonexistent/program.lp"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mixarch(&["plan", &data("restaurant.dom"), "/nonexistent/x.scn"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_program_is_usage_error() {
    let path = std::env::temp_dir().join(format!("mixarch-bad-{}.lp", std::process::id()));
    std::fs::write(&path, "a :- b(.\n").unwrap();
    let o = mixarch(&["solve", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(2));
}

fn program() -> impl Strategy<Value = String> {
    let atom = prop::sample::select(vec!["p", "q", "r", "s"]);
    let lit = (atom.clone(), any::<bool>()).prop_map(|(a, neg)| if neg { format!("not {a}") } else { a.to_string() });
    let rule = (atom, prop::collection::vec(lit, 0..3)).prop_map(|(h, body)| {
        if body.is_empty() {
            format!("{h}.")
        } else {
            format!("{h} :- {}.", body.join(", "))
        }
    });
    prop::collection::vec(rule, 1..6).prop_map(|rs| rs.join("\n") + "\n")
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solve_text_and_json_agree(text in program()) {
        let path = std::env::temp_dir().join(format!("mixarch-prop-{}.lp", std::process::id()));
        std::fs::write(&path, &text).unwrap();
        let p = path.to_str().unwrap();
        let (tc, out) = text_of(&["solve", p, "--models", "0"]);
        let (jc, v) = json_of(&["solve", p, "--models", "0"]);
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(tc, jc);
        prop_assert_eq!(out.lines().last().unwrap(), v["status"].as_str().unwrap());
        prop_assert_eq!(text_models(&out), json_models(&v));
    }
}
