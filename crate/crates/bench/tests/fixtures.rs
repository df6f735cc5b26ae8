use mixarch::{answer_sets, ground, parse_program, SolveOptions, Status};
use mixarch_bench::{pigeonhole, restaurant, scenario};

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn pigeonhole_counts() {
    for n in 1..=4 {
        let gp = ground(&parse_program(&pigeonhole(n, n)).unwrap()).unwrap();
        assert_eq!(answer_sets(&gp, &SolveOptions::limit(0)).models.len(), factorial(n), "{n} into {n}");
        let gp = ground(&parse_program(&pigeonhole(n + 1, n)).unwrap()).unwrap();
        assert_eq!(answer_sets(&gp, &SolveOptions::limit(1)).status, Status::Inconsistent, "{} into {n}", n + 1);
    }
}

#[test]
fn bundled_scenarios_parse() {
    let sd = restaurant();
    for name in ["ex1", "ex2", "locked_door"] {
        assert!(!scenario(&sd, name).history.observations.is_empty(), "{name}");
    }
}
