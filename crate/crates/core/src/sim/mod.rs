//! Simulated restaurant world, the three executing architectures and the
//! paired-trial benchmark.

mod bench;
mod exec;
mod greedy;
pub mod instances;
mod world;

pub use bench::{random_task, run_benchmark, sign_test, ArchSummary, BenchmarkReport, PairRecord, TaskSpec};
pub use exec::{Execution, SimExecutor};
pub use greedy::{run_greedy, FetchTask, GreedyOutcome};
pub use world::{Costs, Handle, RawOutcome, World};

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::belief::{ExecutionPolicy, NoiseConfig};
use crate::lang::{Literal, Scenario, SystemDescription};
use crate::reason::{run_agent_loop, AgentConfig, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arch {
    Mixed,
    AspOnly,
    ProbGreedy,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Mixed, Arch::AspOnly, Arch::ProbGreedy];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Mixed => "mixed",
            Arch::AspOnly => "asp-only",
            Arch::ProbGreedy => "prob-greedy",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub arch: Arch,
    pub scenario: Scenario,
    pub noise: NoiseConfig,
    pub seed: u64,
    pub group: u64,
    pub agent: AgentConfig,
    pub policy: ExecutionPolicy,
}

impl TrialConfig {
    pub fn new(arch: Arch, scenario: Scenario, noise: NoiseConfig, seed: u64) -> Self {
        TrialConfig {
            arch,
            scenario,
            noise,
            seed,
            group: 0,
            agent: AgentConfig::default(),
            policy: ExecutionPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub arch: Arch,
    pub group: u64,
    pub success: bool,
    pub steps: u32,
    /// Simulated time: action attempts and readings, weighted by cost.
    pub time: u64,
    pub actions: u32,
    pub diagnoses: u32,
    pub replans: u32,
    pub outcome: Option<Outcome>,
    #[serde(skip)]
    pub wall_ms: u64,
    /// Agent trace, one JSON object per line.
    #[serde(skip)]
    pub trace: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("initial world: {0}")]
    World(String),
    #[error("scenario has no fetch goal for the greedy baseline")]
    NotFetch,
}

/// Literals describing the true initial world: the scenario's `truth`, or
/// else what it observes at step 0.
pub fn initial_truth(sc: &Scenario) -> Vec<Literal> {
    if !sc.truth.is_empty() {
        return sc.truth.iter().filter(|l| !l.neg).cloned().collect();
    }
    sc.history
        .observations
        .iter()
        .filter(|o| o.step == 0 && o.value)
        .map(|o| Literal::pos(o.fluent.clone()))
        .collect()
}

/// One trial; success means the goal holds in the final true world.
pub fn run_trial(sd: &SystemDescription, cfg: &TrialConfig) -> Result<TrialResult, SimError> {
    let started = Instant::now();
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut world = World::new(sd, &initial_truth(&cfg.scenario), cfg.scenario.script.clone(), cfg.noise.clone(), rng)
        .map_err(|e| SimError::World(e.to_string()))?;
    let mut out = TrialResult {
        arch: cfg.arch,
        group: cfg.group,
        success: false,
        steps: 0,
        time: 0,
        actions: 0,
        diagnoses: 0,
        replans: 0,
        outcome: None,
        wall_ms: 0,
        trace: String::new(),
    };
    match cfg.arch {
        Arch::Mixed | Arch::AspOnly => {
            let mode = if cfg.arch == Arch::Mixed {
                Execution::Filtered
            } else {
                Execution::SingleReading
            };
            let mut exec = SimExecutor::new(&mut world, mode, cfg.policy.clone());
            let r = run_agent_loop(sd, &cfg.scenario, &mut exec, &cfg.agent);
            out.actions = r.actions;
            out.diagnoses = r.diagnoses;
            out.replans = r.replans;
            out.outcome = Some(r.outcome);
            out.trace = r.trace_jsonl();
        }
        Arch::ProbGreedy => {
            let task = FetchTask::from_goal(&cfg.scenario.goal).ok_or(SimError::NotFetch)?;
            let g = run_greedy(&mut world, &cfg.scenario.history, &task, &cfg.policy, cfg.agent.max_steps);
            out.actions = g.actions;
            out.trace = g.trace;
        }
    }
    out.success = cfg.scenario.goal.iter().all(|l| world.holds(l));
    out.steps = world.step;
    out.time = world.time;
    out.wall_ms = started.elapsed().as_millis() as u64;
    Ok(out)
}
