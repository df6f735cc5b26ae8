use mixarch::lang::*;

fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn restaurant_domain_parses() {
    let sd = parse_domain(&data("restaurant.dom")).unwrap();
    let agent = sd.action_instances(ActionKind::Agent);
    assert!(agent.contains(&Atom::ground("move", &["robot", "a2"])));
    assert!(agent.contains(&Atom::ground("open", &["robot", "d2"])));
    let exo = sd.action_instances(ActionKind::Exogenous);
    assert!(exo.contains(&Atom::ground("locked", &["d2"])));
    assert!(!sd.basic_fluent_instances().is_empty());
    // printing and re-parsing yields the same description
    let again = parse_domain(&sd.to_string()).unwrap();
    assert_eq!(again.to_string(), sd.to_string());
}

#[test]
fn scenarios_parse() {
    let sd = parse_domain(&data("restaurant.dom")).unwrap();
    let s1 = parse_scenario(&data("ex1.scn"), &sd).unwrap();
    assert_eq!(s1.goal.len(), 2);
    assert_eq!(s1.script.len(), 2);
    assert!(s1.script[1].reported);
    let s2 = parse_scenario(&data("ex2.scn"), &sd).unwrap();
    assert_eq!(s2.history.last_step(), Some(1));
}

#[test]
fn sort_declaration_echo() {
    let sd = parse_domain("#sort room. #instance kitchen : room.").unwrap();
    assert_eq!(sd.sorts.instances_of("room"), vec!["kitchen"]);
    assert!(sd.to_string().contains("#instance kitchen : room."));
}

#[test]
fn defined_fluent_in_causal_head_rejected() {
    let text = "#sort s. #instance a : s. #fluent defined d(s). #action agent go(s). go(X) causes d(X).";
    assert!(matches!(parse_domain(text), Err(LangError::DefinedInCausalHead(_))));
}

#[test]
fn program_examples() {
    let p = parse_program("a :- not b. b :- not a.").unwrap();
    assert_eq!(p.rules.len(), 2);
    let p = parse_program("q +- .").unwrap();
    assert_eq!(p.rules[0].cr.as_ref().map(|c| c.priority), Some(0));
    assert!(matches!(parse_program("p(X) :- not q(X)."), Err(LangError::Unsafe { .. })));
}

#[test]
fn syntax_error_has_position() {
    match parse_program("a :- b\nc.") {
        Err(LangError::Syntax { pos, .. }) => assert_eq!(pos.line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_scenario() {
    let sd = parse_domain("#sort s.").unwrap();
    let sc = parse_scenario("", &sd).unwrap();
    assert!(sc.history.is_empty());
    assert!(sc.goal.is_empty());
}

#[test]
fn undeclared_symbol_in_observation() {
    let sd = parse_domain(&data("restaurant.dom")).unwrap();
    assert!(parse_scenario("obs(flying(robot), true, 0).", &sd).is_err());
}
