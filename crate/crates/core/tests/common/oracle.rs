//! Brute-force reference semantics, independent of the solver.

use mixarch::ground::{AtomId, GroundProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random program text over at most six base atoms (twelve literals), with
/// negation as failure, constraints, complementary disjunction and up to
/// four CR rules.
pub fn random_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_base = rng.gen_range(2..=6);
    let names: Vec<String> = (0..n_base).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let lit = |rng: &mut ChaCha8Rng| {
        let a = &names[rng.gen_range(0..n_base)];
        if rng.gen_bool(0.25) {
            format!("-{a}")
        } else {
            a.clone()
        }
    };
    let n_rules = rng.gen_range(1..=9);
    let n_cr = rng.gen_range(0..=4);
    let mut out = String::new();
    for k in 0..n_rules + n_cr {
        let is_cr = k >= n_rules;
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let l = lit(&mut rng);
            if rng.gen_bool(0.45) {
                body.push(format!("not {l}"));
            } else {
                body.push(l);
            }
        }
        let head = if is_cr {
            lit(&mut rng)
        } else {
            match rng.gen_range(0..10) {
                0 | 1 => String::new(),
                2 | 3 => {
                    let a = &names[rng.gen_range(0..n_base)];
                    format!("{a} | -{a}")
                }
                _ => lit(&mut rng),
            }
        };
        if head.is_empty() && body.is_empty() {
            continue;
        }
        let op = if is_cr { "+-" } else { ":-" };
        if body.is_empty() && !is_cr {
            out.push_str(&format!("{head}.\n"));
        } else {
            out.push_str(&format!("{head} {op} {}.\n", body.join(", ")));
        }
    }
    out
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..(1 << n)).map(move |mask| (0..n).map(|i| mask & (1 << i) != 0).collect())
}

fn consistent(gp: &GroundProgram, m: &[bool]) -> bool {
    (0..m.len()).all(|a| !m[a] || gp.complement(a as AtomId).is_none_or(|c| !m[c as usize]))
}

/// Answer sets by definition: consistent M that is a minimal model of the
/// reduct (disjunctive heads kept whole).
pub fn brute_answer_sets(gp: &GroundProgram, applied: &[usize]) -> Vec<Vec<AtomId>> {
    let n = gp.atom_count();
    let active: Vec<usize> = (0..gp.rules.len())
        .filter(|&i| gp.rules[i].cr.is_none() || applied.contains(&i))
        .collect();
    let mut out = Vec::new();
    for m in subsets(n) {
        if !consistent(gp, &m) {
            continue;
        }
        let reduct: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| gp.rules[i].neg.iter().all(|&a| !m[a as usize]))
            .collect();
        let model_of = |s: &[bool]| {
            reduct.iter().all(|&i| {
                let r = &gp.rules[i];
                !r.pos.iter().all(|&a| s[a as usize]) || r.head.iter().any(|&h| s[h as usize])
            })
        };
        if !model_of(&m) {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&a| m[a]).collect();
        let minimal = subsets(members.len()).all(|sub| {
            if sub.iter().all(|&b| b) {
                return true;
            }
            let mut s = vec![false; n];
            for (k, &a) in members.iter().enumerate() {
                s[a] = sub[k];
            }
            !model_of(&s)
        });
        if minimal {
            out.push(members.iter().map(|&a| a as AtomId).collect());
        }
    }
    out.sort();
    out
}

/// Answer sets under lexicographically minimal CR application, as sorted
/// (literals, applied CR rules) pairs, by exhaustive search over CR subsets.
pub fn brute_cr(gp: &GroundProgram) -> Vec<(Vec<AtomId>, Vec<usize>)> {
    let crs: Vec<usize> = gp.cr_rules().map(|(i, _)| i).collect();
    let mut prios: Vec<i64> = crs.iter().map(|&i| gp.rules[i].cr.unwrap()).collect();
    prios.sort();
    prios.dedup();
    let mut best: Option<Vec<usize>> = None;
    let mut found: Vec<(Vec<usize>, Vec<(Vec<AtomId>, Vec<usize>)>)> = Vec::new();
    for sel in subsets(crs.len()) {
        let applied: Vec<usize> = crs.iter().zip(&sel).filter(|(_, &b)| b).map(|(&i, _)| i).collect();
        let models = brute_answer_sets(gp, &applied);
        if models.is_empty() {
            continue;
        }
        let vector: Vec<usize> = prios
            .iter()
            .map(|p| applied.iter().filter(|&&i| gp.rules[i].cr == Some(*p)).count())
            .collect();
        if best.as_ref().is_none_or(|b| vector < *b) {
            best = Some(vector.clone());
        }
        found.push((vector, models.into_iter().map(|m| (m, applied.clone())).collect()));
    }
    let mut out: Vec<(Vec<AtomId>, Vec<usize>)> = match best {
        None => Vec::new(),
        Some(b) => found.into_iter().filter(|(v, _)| *v == b).flat_map(|(_, ms)| ms).collect(),
    };
    out.sort();
    out
}

/// State of the compact delivery domain: robot place, box place, whether the
/// box is held, and open/locked flags per place (only doors use them).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct DeliveryState {
    robot: usize,
    box_at: usize,
    holding: bool,
    open: Vec<bool>,
}

/// Length of the shortest action sequence reaching the instance's goal,
/// searched breadth-first up to `max` actions with the domain's laws
/// written out by hand.
pub fn delivery_shortest(inst: &mixarch::sim::instances::Instance, max: u32) -> Option<u32> {
    use std::collections::{HashSet, VecDeque};
    let places: Vec<String> = inst.sd.sorts.instances_of("place");
    let idx = |s: &str| places.iter().position(|p| p == s).unwrap();
    let is_door: Vec<bool> = places.iter().map(|p| inst.sd.sorts.is_instance_of(p, "door")).collect();
    let n = places.len();
    let mut conn = vec![vec![false; n]; n];
    for f in &inst.sd.static_facts {
        if f.pred == "connected" {
            conn[idx(&f.args[0].to_string())][idx(&f.args[1].to_string())] = true;
        }
    }
    let mut robot = 0;
    let mut box_at = 0;
    let mut holding = false;
    let mut open = vec![false; n];
    let mut locked = vec![false; n];
    for o in inst.history.observations.iter().filter(|o| o.step == 0 && o.value) {
        let a: Vec<String> = o.fluent.args.iter().map(|t| t.to_string()).collect();
        match o.fluent.pred.as_str() {
            "at" => robot = idx(&a[1]),
            "box_at" => box_at = idx(&a[1]),
            "holding" => holding = true,
            "is_open" => open[idx(&a[0])] = true,
            "is_locked" => locked[idx(&a[0])] = true,
            _ => {}
        }
    }
    let goal = |s: &DeliveryState| {
        inst.goal.iter().all(|g| {
            let a: Vec<String> = g.atom.args.iter().map(|t| t.to_string()).collect();
            let v = match g.atom.pred.as_str() {
                "at" => s.robot == idx(&a[1]),
                "box_at" => s.box_at == idx(&a[1]),
                "holding" => s.holding,
                other => panic!("unexpected goal fluent {other}"),
            };
            v != g.neg
        })
    };
    let start = DeliveryState { robot, box_at, holding, open };
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0u32)]);
    while let Some((s, d)) = queue.pop_front() {
        if goal(&s) {
            return Some(d);
        }
        if d == max {
            continue;
        }
        let mut next = Vec::new();
        // go: to a connected place, never out of a closed door
        if !(is_door[s.robot] && !s.open[s.robot]) {
            for p in 0..n {
                if p != s.robot && conn[s.robot][p] {
                    let mut t = s.clone();
                    t.robot = p;
                    if t.holding {
                        t.box_at = p;
                    }
                    next.push(t);
                }
            }
        }
        // open: standing on a closed, unlocked door
        if is_door[s.robot] && !s.open[s.robot] && !locked[s.robot] {
            let mut t = s.clone();
            t.open[s.robot] = true;
            next.push(t);
        }
        if !s.holding && s.box_at == s.robot {
            let mut t = s.clone();
            t.holding = true;
            next.push(t);
        }
        if s.holding {
            let mut t = s.clone();
            t.holding = false;
            next.push(t);
        }
        for t in next {
            if seen.insert(t.clone()) {
                queue.push_back((t, d + 1));
            }
        }
    }
    None
}
