//! Inputs shared by the criterion benches.

use mixarch::{parse_domain, parse_scenario, Scenario, SystemDescription};

const RESTAURANT: &str = include_str!("../../../data/restaurant.dom");
const EX1: &str = include_str!("../../../data/ex1.scn");
const EX2: &str = include_str!("../../../data/ex2.scn");
const LOCKED_DOOR: &str = include_str!("../../cli/tests/fixtures/locked_door.scn");

pub fn restaurant() -> SystemDescription {
    parse_domain(RESTAURANT).expect("bundled domain parses")
}

/// `name` is one of `ex1`, `ex2`, `locked_door`.
pub fn scenario(sd: &SystemDescription, name: &str) -> Scenario {
    let text = match name {
        "ex1" => EX1,
        "ex2" => EX2,
        "locked_door" => LOCKED_DOOR,
        other => panic!("no bundled scenario {other}"),
    };
    parse_scenario(text, sd).expect("bundled scenario parses")
}

/// `pigeons` pigeons into `holes` holes, one per hole, as a ground
/// guess-and-check program. Unsatisfiable when `pigeons > holes`.
pub fn pigeonhole(pigeons: usize, holes: usize) -> String {
    let mut s = String::new();
    for p in 0..pigeons {
        for h in 0..holes {
            s.push_str(&format!("in(p{p}, h{h}) :- not out(p{p}, h{h}).\nout(p{p}, h{h}) :- not in(p{p}, h{h}).\n"));
        }
        let outs: Vec<String> = (0..holes).map(|h| format!("out(p{p}, h{h})")).collect();
        s.push_str(&format!(":- {}.\n", outs.join(", ")));
    }
    for h in 0..holes {
        for a in 0..pigeons {
            for b in a + 1..pigeons {
                s.push_str(&format!(":- in(p{a}, h{h}), in(p{b}, h{h}).\n"));
            }
        }
    }
    s
}
