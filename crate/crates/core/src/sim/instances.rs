//! Random small (map, goal) planning instances over a compact delivery
//! domain with doors and one box.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{parse_domain, Atom, History, LangError, Literal, SystemDescription};

const LAWS: &str = "
#static connected(place, place).
#fluent basic at(robot, place).
#fluent basic box_at(box, place).
#fluent basic holding(robot, box).
#fluent basic is_open(door).
#fluent basic is_locked(door).
#action agent go(robot, place).
#action agent open(robot, door).
#action agent pick(robot, box).
#action agent drop(robot, box).
go(R, P) causes at(R, P).
pick(R, B) causes holding(R, B).
drop(R, B) causes -holding(R, B).
open(R, D) causes is_open(D).
-at(R, P2) if at(R, P1), P1 != P2.
box_at(B, P) if holding(R, B), at(R, P).
-box_at(B, P2) if box_at(B, P1), P1 != P2.
impossible go(R, P) if at(R, P).
impossible go(R, P2) if at(R, P1), -connected(P1, P2).
impossible go(R, P) if at(R, D:door), -is_open(D).
impossible open(R, D) if -at(R, D).
impossible open(R, D) if is_locked(D).
impossible open(R, D) if is_open(D).
impossible pick(R, B) if at(R, P), -box_at(B, P).
impossible pick(R, B) if holding(R, B).
impossible drop(R, B) if -holding(R, B).
";

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub domain: String,
    pub sd: SystemDescription,
    /// Complete observation of the initial state.
    pub history: History,
    pub goal: Vec<Literal>,
}

/// A random instance: 3 to 6 places, up to two of them doors (sometimes
/// locked), a random spanning tree plus extra corridors, occasionally with a
/// corridor removed so the map splits.
pub fn random_instance(seed: u64) -> Result<Instance, LangError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=6usize);
    let n_doors = rng.gen_range(0..=2usize.min(k - 2));
    let names: Vec<String> = (0..k).map(|i| if i < k - n_doors { format!("p{i}") } else { format!("d{i}") }).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(&mut rng);
    for i in 1..k {
        let j = rng.gen_range(0..i);
        edges.push((order[i], order[j]));
    }
    for _ in 0..rng.gen_range(0..=k / 2) {
        let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    if rng.gen_bool(0.15) && !edges.is_empty() {
        let cut = rng.gen_range(0..edges.len());
        edges.remove(cut);
    }

    let mut text = String::from("#sort robot, box, place, door.\n#subsort door place.\n#instance r : robot.\n#instance b : box.\n");
    for (i, n) in names.iter().enumerate() {
        let sort = if i < k - n_doors { "place" } else { "door" };
        text.push_str(&format!("#instance {n} : {sort}.\n"));
    }
    text.push_str(LAWS);
    for (a, b) in &edges {
        text.push_str(&format!("connected({}, {}). connected({}, {}).\n", names[*a], names[*b], names[*b], names[*a]));
    }
    let sd = parse_domain(&text)?;

    let robot_at = rng.gen_range(0..k);
    let box_at = rng.gen_range(0..k);
    let mut h = History::default();
    for (i, n) in names.iter().enumerate() {
        h.observe(Atom::ground("at", &["r", n]), i == robot_at, 0);
        h.observe(Atom::ground("box_at", &["b", n]), i == box_at, 0);
    }
    h.observe(Atom::ground("holding", &["r", "b"]), false, 0);
    for n in &names[k - n_doors..] {
        h.observe(Atom::ground("is_open", &[n]), rng.gen_bool(0.3), 0);
        h.observe(Atom::ground("is_locked", &[n]), rng.gen_bool(0.2), 0);
    }
    let dest = &names[rng.gen_range(0..k)];
    let goal = if rng.gen_bool(0.5) {
        vec![Literal::pos(Atom::ground("at", &["r", dest]))]
    } else {
        vec![
            Literal::pos(Atom::ground("box_at", &["b", dest])),
            Literal::neg(Atom::ground("holding", &["r", "b"])),
        ]
    };
    Ok(Instance {
        seed,
        domain: text,
        sd,
        history: h,
        goal,
    })
}
