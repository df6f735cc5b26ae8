//! Planning, diagnosis, scene explanation and the agent loop.

mod agent;
pub mod interp;
mod diagnose;
mod plan;
mod scene;

pub use agent::{run_agent, run_agent_loop, AgentConfig, Executor, Outcome, TaskResult, TraceEvent};
pub use diagnose::{diagnose, Diagnosis, Explanation};
pub use interp::{InterpError, Interpreter, State};
pub use plan::{goal_entailed, history_consistent, plan, Plan, PlanConfig, PlannedAction};
pub use scene::{explain_scene, SceneLabeling};

use crate::ground::GroundError;
use crate::lang::History;
use crate::translate::TranslateError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReasonError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("no plan of length at most {max_length}")]
    NoPlan { max_length: u32 },
    #[error("history is inconsistent; diagnose first")]
    InconsistentHistory,
    #[error("no exogenous explanation restores consistency")]
    Unexplainable,
    #[error("solver resource limit reached")]
    ResourceLimit,
}

/// First step not yet covered by the history: the last observation step, or
/// one past the last recorded action.
pub fn current_step(h: &History) -> u32 {
    let o = h.observations.iter().map(|o| o.step);
    let a = h.happened.iter().map(|x| x.step + 1);
    o.chain(a).max().unwrap_or(0)
}
