mod common;

use std::time::Instant;

use common::{restaurant, scenario};
use mixarch::reason::{diagnose, explain_scene, plan, PlanConfig};
use mixarch::solve::SolveOptions;
use mixarch::translate::DiagnosisMode;
use mixarch::lang::Atom;

#[test]
fn example_one_plan() {
    let sd = restaurant();
    let sc = scenario(&sd, "ex1.scn");
    let t = Instant::now();
    let p = plan(&sd, &sc.history, &sc.goal, &PlanConfig::default()).unwrap();
    let shown: Vec<String> = p.actions.iter().map(|a| format!("{}@{}", a.action, a.step)).collect();
    eprintln!("{shown:?} in {:?}", t.elapsed());
    assert_eq!(
        shown,
        vec![
            "move(robot, a2)@0",
            "move(robot, d2)@1",
            "open(robot, d2)@2",
            "move(robot, a3)@3",
            "putdown(robot, ds1)@4"
        ]
    );
}

#[test]
fn example_one_diagnosis() {
    let sd = restaurant();
    let mut h = scenario(&sd, "ex1.scn").history;
    for (a, s) in [("move", "a2"), ("move", "d2")] {
        let step = h.happened.len() as u32;
        h.happened(Atom::ground(a, &["robot", s]), step);
    }
    h.happened(Atom::ground("open", &["robot", "d2"]), 2);
    h.observe(Atom::ground("is_open", &["d2"]), false, 3);
    let t = Instant::now();
    let d = diagnose(&sd, &h, DiagnosisMode::MinimalCr, &SolveOptions::default()).unwrap();
    eprintln!("{:?} in {:?}", d.explanations.iter().map(|e| &e.events).collect::<Vec<_>>(), t.elapsed());
    assert!(!d.explanations.is_empty());
    assert!(d.explanations.iter().all(|e| e.events.len() == 1 && e.events[0].0 == "locked(d2)"));
}

#[test]
fn example_two_scene() {
    let sd = restaurant();
    let sc = scenario(&sd, "ex2.scn");
    let s0 = explain_scene(&sd, &sc.history, 0, &SolveOptions::default()).unwrap();
    assert_eq!(s0.labels["ob1"], vec!["chair", "table"]);
    let s1 = explain_scene(&sd, &sc.history, 1, &SolveOptions::default()).unwrap();
    assert_eq!(s1.labels["ob1"], vec!["table"]);
}
