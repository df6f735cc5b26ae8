#![allow(dead_code)]

pub mod episodes;
pub mod oracle;
pub mod validity;

use mixarch::lang::{parse_domain, parse_scenario, Scenario, SystemDescription};

pub fn data(name: &str) -> String {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn restaurant() -> SystemDescription {
    parse_domain(&data("restaurant.dom")).unwrap()
}

pub fn scenario(sd: &SystemDescription, name: &str) -> Scenario {
    parse_scenario(&data(name), sd).unwrap()
}
