//! Baseline without a symbolic planner: a Bayes filter over where the
//! object is, and at every step the action that makes the most progress
//! under the most likely state.

use std::collections::{BTreeMap, VecDeque};

use crate::belief::{bayes_update, execute_action, init_belief, BeliefState, ExecStatus, ExecutionPolicy, Prior};
use crate::lang::{Atom, History, Literal, Term};
use crate::reason::{Interpreter, State};

use super::world::{Handle, World};

/// A fetch task: bring `object` to `target` and let go of it.
#[derive(Clone, Debug, PartialEq)]
pub struct FetchTask {
    pub object: Term,
    pub target: Term,
}

impl FetchTask {
    pub fn from_goal(goal: &[Literal]) -> Option<FetchTask> {
        let l = goal.iter().find(|l| !l.neg && l.atom.pred == "has_location" && l.atom.arity() == 2)?;
        Some(FetchTask {
            object: l.atom.args[0].clone(),
            target: l.atom.args[1].clone(),
        })
    }
}

pub struct GreedyOutcome {
    pub actions: u32,
    pub steps: u32,
    /// The baseline believes the task is done.
    pub finished: bool,
    /// One JSON object per attempted action.
    pub trace: String,
}

fn adjacency(world: &World) -> BTreeMap<Term, Vec<Term>> {
    let mut adj: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for f in &world.sd.static_facts {
        if f.pred == "connected" {
            adj.entry(f.args[0].clone()).or_default().push(f.args[1].clone());
        }
    }
    adj
}

/// First hop on a shortest path, neighbours tried in declaration order.
fn next_hop(adj: &BTreeMap<Term, Vec<Term>>, from: &Term, to: &Term) -> Option<Term> {
    let mut prev: BTreeMap<Term, Term> = BTreeMap::new();
    let mut q = VecDeque::from([from.clone()]);
    while let Some(u) = q.pop_front() {
        if u == *to {
            let mut v = u;
            while prev.get(&v) != Some(from) {
                v = prev.get(&v)?.clone();
            }
            return Some(v);
        }
        for w in adj.get(&u).into_iter().flatten() {
            if w != from && !prev.contains_key(w) {
                prev.insert(w.clone(), u.clone());
                q.push_back(w.clone());
            }
        }
    }
    None
}

fn place_in(s: &State, who: &Term, places: &[Term]) -> Option<Term> {
    places
        .iter()
        .find(|p| s.holds(&Atom::new("has_location", vec![who.clone(), (*p).clone()])))
        .cloned()
}

/// Believed state with the object placed at `at`.
fn with_object(interp: &Interpreter, s: &State, object: &Term, at: &Term) -> State {
    let mut lits: Vec<Literal> = s
        .fluents
        .iter()
        .filter(|f| !(f.pred == "has_location" && f.args[0] == *object))
        .map(|f| Literal::pos(f.clone()))
        .collect();
    lits.push(Literal::pos(Atom::new("has_location", vec![object.clone(), at.clone()])));
    interp.state_from(&lits).unwrap_or_else(|_| s.clone())
}

/// Filters readings of one fact from an even prior; `None` if it stays
/// undecided or cannot be seen.
fn settle(world: &mut World, agent: &Term, fact: &Atom, policy: &ExecutionPolicy) -> Option<bool> {
    let sensor = world.noise.sensor(fact);
    let hyps = vec![Literal::pos(fact.clone()), Literal::neg(fact.clone())];
    let mut b = init_belief(hyps, &Prior::Uniform).ok()?;
    for _ in 0..policy.max_cycles {
        let r = world.observe(agent, fact)?;
        b = bayes_update(&b, 0, r, sensor).ok()?;
        if b.probs[0] >= policy.theta {
            return Some(true);
        }
        if b.probs[1] >= policy.theta {
            return Some(false);
        }
    }
    None
}

/// After a failed action the believed state may be wrong: look again at
/// where the agent is, what it holds and the doors it can see.
fn relocalize(
    world: &mut World,
    interp: &Interpreter,
    believed: &State,
    agent: &Term,
    holding: &Atom,
    places: &[Term],
    policy: &ExecutionPolicy,
) -> State {
    let here = place_in(believed, agent, places);
    let mut order: Vec<Term> = here.iter().cloned().collect();
    order.extend(places.iter().filter(|p| Some(*p) != here.as_ref()).cloned());
    let mut found = here.clone();
    for p in order {
        if settle(world, agent, &Atom::new("has_location", vec![agent.clone(), p.clone()]), policy) == Some(true) {
            found = Some(p);
            break;
        }
    }
    let mut fixed: Vec<(Atom, bool)> = Vec::new();
    if let Some(p) = &found {
        fixed.push((Atom::new("has_location", vec![agent.clone(), p.clone()]), true));
    }
    if let Some(v) = settle(world, agent, holding, policy) {
        fixed.push((holding.clone(), v));
    }
    for d in world.sd.sorts.instance_terms("door") {
        let open = Atom::new("is_open", vec![d]);
        if let Some(v) = settle(world, agent, &open, policy) {
            fixed.push((open, v));
        }
    }
    let mut lits: Vec<Literal> = believed
        .fluents
        .iter()
        .filter(|f| !fixed.iter().any(|(a, _)| a.pred == f.pred && a.args[0] == f.args[0] && (a.pred != "in_hand" || a == *f)))
        .map(|f| Literal::pos(f.clone()))
        .collect();
    lits.extend(fixed.into_iter().filter(|(_, v)| *v).map(|(a, _)| Literal::pos(a)));
    interp.state_from(&lits).unwrap_or_else(|_| believed.clone())
}

/// Runs the baseline until it believes the task is done or `max_actions`
/// actions have been tried.
pub fn run_greedy(
    world: &mut World,
    history: &History,
    task: &FetchTask,
    policy: &ExecutionPolicy,
    max_actions: u32,
) -> GreedyOutcome {
    let sd = world.sd;
    let interp = Interpreter::new(sd);
    let agent = Term::constant("robot");
    let adj = adjacency(world);
    let places: Vec<Term> = sd.sorts.instance_terms("place");
    let areas: Vec<Term> = sd.sorts.instance_terms("area");
    let initial: Vec<Literal> = history
        .observations
        .iter()
        .filter(|o| o.step == 0 && o.value && !(o.fluent.pred == "has_location" && o.fluent.args[0] == task.object))
        .map(|o| Literal::pos(o.fluent.clone()))
        .collect();
    let mut believed = interp.state_from(&initial).unwrap_or_default();
    let holding = Atom::new("in_hand", vec![agent.clone(), task.object.clone()]);
    // Where the object is: uniform over areas, unless it is known to be held.
    let hyps: Vec<Literal> = areas
        .iter()
        .map(|a| Literal::pos(Atom::new("has_location", vec![task.object.clone(), a.clone()])))
        .collect();
    let mut whereabouts: BeliefState = init_belief(hyps, &Prior::Uniform).expect("areas exist");
    let sensor = world.noise.sensor(&Atom::new("has_location", vec![]));
    let policy = ExecutionPolicy {
        check_presence: false,
        ..policy.clone()
    };

    let mut actions = 0;
    let mut trace = String::new();
    let mut finished = false;
    while actions < max_actions {
        let Some(here) = place_in(&believed, &agent, &places) else {
            break;
        };
        let held = believed.holds(&holding);
        let goal_place = if held {
            task.target.clone()
        } else {
            areas[whereabouts.most_likely()].clone()
        };
        let action = if held && here == task.target {
            Atom::new("putdown", vec![agent.clone(), task.object.clone()])
        } else if here != goal_place {
            let door_closed = sd.sorts.term_is_instance_of(&here, "door")
                && !believed.holds(&Atom::new("is_open", vec![here.clone()]));
            if door_closed {
                Atom::new("open", vec![agent.clone(), here.clone()])
            } else {
                let Some(hop) = next_hop(&adj, &here, &goal_place) else {
                    break;
                };
                Atom::new("move", vec![agent.clone(), hop])
            }
        } else {
            // At the most likely spot: look until sure either way.
            let k = whereabouts.most_likely();
            let mut cycles = 0;
            while cycles < policy.max_cycles {
                cycles += 1;
                let Some(r) = world.observe(&agent, &whereabouts.hypotheses[k].atom) else {
                    continue;
                };
                whereabouts = match bayes_update(&whereabouts, k, r, sensor) {
                    Ok(b) => b,
                    Err(_) => break,
                };
                if whereabouts.probs[k] >= policy.theta || whereabouts.probs[k] <= 1.0 - policy.theta {
                    break;
                }
            }
            if whereabouts.probs[k] < policy.theta {
                if whereabouts.most_likely() == k {
                    // undecided after the budget: rule it out and move on
                    let mut p = whereabouts.probs.clone();
                    p[k] = 0.0;
                    whereabouts = init_belief(whereabouts.hypotheses.clone(), &Prior::Explicit(p)).unwrap_or(whereabouts);
                }
                continue;
            }
            believed = with_object(&interp, &believed, &task.object, &here);
            Atom::new("pickup", vec![agent.clone(), task.object.clone()])
        };
        actions += 1;
        let step = world.step;
        let mut handle = Handle {
            world: &mut *world,
            agent: agent.clone(),
        };
        let noise = handle.world.noise.clone();
        let r = execute_action(&action, step, sd, &interp, &believed, &mut handle, &noise, &policy);
        world.finish_step();
        let status = r.as_ref().map(|x| format!("{:?}", x.status)).unwrap_or_else(|e| e.to_string());
        trace.push_str(&serde_json::json!({"event": "execute", "step": step, "action": action.to_string(), "status": status}).to_string());
        trace.push('\n');
        match r {
            Ok(r) if r.status == ExecStatus::Completed => {
                if let Ok(next) = interp.step(&believed, std::slice::from_ref(&action)) {
                    believed = next;
                }
                if action.pred == "putdown" {
                    finished = true;
                    break;
                }
            }
            Ok(_) => {
                let was_held = believed.holds(&holding);
                believed = relocalize(world, &interp, &believed, &agent, &holding, &places, &policy);
                if was_held && !believed.holds(&holding) {
                    // it was never picked up after all
                    whereabouts = init_belief(whereabouts.hypotheses.clone(), &Prior::Uniform).unwrap_or(whereabouts);
                }
                if action.pred == "pickup" {
                    // could not pick it up here after all
                    let k = whereabouts.most_likely();
                    let mut p = whereabouts.probs.clone();
                    p[k] = 0.0;
                    if let Ok(b) = init_belief(whereabouts.hypotheses.clone(), &Prior::Explicit(p)) {
                        whereabouts = b;
                    }
                }
            }
            Err(_) => break,
        }
    }
    GreedyOutcome {
        actions,
        steps: world.step,
        finished,
        trace,
    }
}
