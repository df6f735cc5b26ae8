//! Single-action execution episodes on the simulated restaurant, scored
//! against the simulator's true state.

use mixarch::belief::{execute_action, ExecutionPolicy, NoiseConfig};
use mixarch::lang::{Atom, Literal, SystemDescription};
use mixarch::reason::Interpreter;
use mixarch::sim::{initial_truth, random_task, Handle, World};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
    pub episodes: usize,
}

impl Tally {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.total.max(1) as f64
    }
}

fn candidates(sd: &SystemDescription) -> Vec<Atom> {
    let mut out = Vec::new();
    for p in sd.sorts.instances_of("place") {
        out.push(Atom::ground("move", &["robot", &p]));
    }
    for d in sd.sorts.instances_of("door") {
        out.push(Atom::ground("open", &["robot", &d]));
    }
    out.push(Atom::ground("pickup", &["robot", "ds1"]));
    out.push(Atom::ground("putdown", &["robot", "ds1"]));
    out
}

/// `n` episodes: a random task world, one random action the true state
/// allows, executed with belief filtering; every committed observation is
/// checked against the world afterwards.
pub fn commit_soundness(sd: &SystemDescription, n: usize, seed: u64, noise: &NoiseConfig, policy: &ExecutionPolicy) -> Tally {
    let interp = Interpreter::new(sd);
    let all = candidates(sd);
    let mut tally = Tally::default();
    for e in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(e as u64));
        let task = random_task(sd, &mut rng);
        let sc = task.scenario(sd);
        let truth = initial_truth(&sc);
        let mut world = World::new(sd, &truth, Vec::new(), noise.clone(), ChaCha8Rng::seed_from_u64(seed ^ (e as u64) << 1)).unwrap();
        let believed = world.state.clone();
        let options: Vec<&Atom> = all.iter().filter(|a| interp.check_executable(&believed, std::slice::from_ref(*a)).is_ok()).collect();
        let Some(&action) = options.choose(&mut rng) else {
            continue;
        };
        let mut handle = Handle {
            world: &mut world,
            agent: mixarch::lang::Term::constant("robot"),
        };
        let r = execute_action(action, 0, sd, &interp, &believed, &mut handle, noise, policy).unwrap();
        world.finish_step();
        tally.episodes += 1;
        for o in &r.observations {
            let lit = if o.value { Literal::pos(o.fluent.clone()) } else { Literal::neg(o.fluent.clone()) };
            tally.total += 1;
            if world.holds(&lit) {
                tally.correct += 1;
            }
        }
    }
    tally
}
