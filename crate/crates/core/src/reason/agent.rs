//! The observe-diagnose-plan-execute loop.

use serde::Serialize;

use crate::belief::{BeliefError, ExecStatus, ExecutionResult};
use crate::lang::{Atom, Happened, History, Literal, Scenario, SystemDescription};
use crate::translate::DiagnosisMode;

use super::{current_step, diagnose, history_consistent, plan, PlanConfig, ReasonError, State};

/// Carries out planned actions in some world.
pub trait Executor {
    /// Executes `action` at `step` and ends that step in the world.
    fn execute(&mut self, action: &Atom, step: u32, believed: &State) -> Result<ExecutionResult, BeliefError>;
    /// Lets the world pass every step before `step` with no agent action.
    fn idle_until(&mut self, step: u32);
    /// Announced events at steps up to and including `step`, each once.
    fn reported(&mut self, step: u32) -> Vec<Happened>;
}

#[derive(Clone, Debug)]
pub struct AgentConfig {
    pub max_replans: u32,
    pub max_steps: u32,
    pub plan: PlanConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            max_replans: 5,
            max_steps: 100,
            plan: PlanConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    NoPlan,
    Unexplainable,
    ReplanBudget,
    StepBudget,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Plan { step: u32, actions: Vec<String> },
    Reported { action: String, step: u32 },
    Diagnosis { step: u32, events: Vec<(String, u32)> },
    Execute { step: u32, action: String, status: ExecStatus, cycles: u32 },
    Commit { record: String },
    Done { outcome: Outcome, step: u32, detail: Option<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskResult {
    pub outcome: Outcome,
    pub steps: u32,
    pub replans: u32,
    pub diagnoses: u32,
    pub actions: u32,
    pub history: History,
    pub trace: Vec<TraceEvent>,
}

impl TaskResult {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// One JSON object per line.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.trace {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }
}

struct Run {
    h: History,
    trace: Vec<TraceEvent>,
    replans: u32,
    diagnoses: u32,
    actions: u32,
}

impl Run {
    fn done(mut self, outcome: Outcome, detail: Option<String>) -> TaskResult {
        let step = current_step(&self.h);
        self.trace.push(TraceEvent::Done { outcome, step, detail });
        TaskResult {
            outcome,
            steps: step,
            replans: self.replans,
            diagnoses: self.diagnoses,
            actions: self.actions,
            history: self.h,
            trace: self.trace,
        }
    }

    fn commit(&mut self, r: &ExecutionResult) {
        for x in &r.happened {
            self.trace.push(TraceEvent::Commit {
                record: format!("hpd({}, {})", x.action, x.step),
            });
            self.h.happened(x.action.clone(), x.step);
        }
        for o in &r.observations {
            self.trace.push(TraceEvent::Commit {
                record: format!("obs({}, {}, {})", o.fluent, o.value, o.step),
            });
            self.h.observe(o.fluent.clone(), o.value, o.step);
        }
    }
}

fn outcome_of(e: &ReasonError) -> Outcome {
    match e {
        ReasonError::NoPlan { .. } => Outcome::NoPlan,
        ReasonError::Unexplainable => Outcome::Unexplainable,
        _ => Outcome::Error,
    }
}

/// Runs the agent on a scenario until the goal holds in its history or a
/// budget is exhausted. A plan is kept while its actions complete as
/// expected; any other outcome triggers diagnosis (if the history became
/// inconsistent) and a new plan.
pub fn run_agent_loop(sd: &SystemDescription, scenario: &Scenario, exec: &mut dyn Executor, cfg: &AgentConfig) -> TaskResult {
    run_agent(sd, &scenario.history, &scenario.goal, exec, cfg)
}

pub fn run_agent(
    sd: &SystemDescription,
    history: &History,
    goal: &[Literal],
    exec: &mut dyn Executor,
    cfg: &AgentConfig,
) -> TaskResult {
    let mut run = Run {
        h: history.clone(),
        trace: Vec::new(),
        replans: 0,
        diagnoses: 0,
        actions: 0,
    };
    let mut planned = false;
    loop {
        for e in exec.reported(current_step(&run.h)) {
            run.trace.push(TraceEvent::Reported {
                action: e.action.to_string(),
                step: e.step,
            });
            run.h.happened(e.action, e.step);
        }
        let s = current_step(&run.h);
        if s > cfg.max_steps {
            return run.done(Outcome::StepBudget, None);
        }
        match history_consistent(sd, &run.h, &cfg.plan.solve) {
            Ok(true) => {}
            Ok(false) => {
                let d = match diagnose(sd, &run.h, DiagnosisMode::MinimalCr, &cfg.plan.solve) {
                    Ok(d) => d,
                    Err(e) => return run.done(outcome_of(&e), Some(e.to_string())),
                };
                run.diagnoses += 1;
                let Some(first) = d.explanations.into_iter().next() else {
                    return run.done(Outcome::Unexplainable, None);
                };
                run.trace.push(TraceEvent::Diagnosis {
                    step: s,
                    events: first.events.clone(),
                });
                for (a, i) in first.atoms {
                    run.h.happened(a, i);
                }
                continue;
            }
            Err(e) => return run.done(outcome_of(&e), Some(e.to_string())),
        }
        let p = match plan(sd, &run.h, goal, &cfg.plan) {
            Ok(p) => p,
            Err(e) => return run.done(outcome_of(&e), Some(e.to_string())),
        };
        if p.is_empty() {
            return run.done(Outcome::Success, None);
        }
        if planned {
            run.replans += 1;
            if run.replans > cfg.max_replans {
                return run.done(Outcome::ReplanBudget, None);
            }
        }
        planned = true;
        run.trace.push(TraceEvent::Plan {
            step: p.start,
            actions: p.actions.iter().map(|a| format!("{}@{}", a.action, a.step)).collect(),
        });
        for pa in &p.actions {
            exec.idle_until(pa.step);
            let believed = State {
                fluents: p.believed_at(pa.step).unwrap_or_default().iter().cloned().collect(),
            };
            let r = match exec.execute(&pa.atom, pa.step, &believed) {
                Ok(r) => r,
                Err(e) => return run.done(Outcome::Error, Some(e.to_string())),
            };
            run.actions += 1;
            run.trace.push(TraceEvent::Execute {
                step: pa.step,
                action: pa.action.clone(),
                status: r.status,
                cycles: r.cycles,
            });
            run.commit(&r);
            if r.status != ExecStatus::Completed || !exec_reported_none(exec, &mut run) {
                break;
            }
        }
    }
}

/// Commits announced events mid-plan; true when there were none.
fn exec_reported_none(exec: &mut dyn Executor, run: &mut Run) -> bool {
    let news = exec.reported(current_step(&run.h));
    let none = news.is_empty();
    for e in news {
        run.trace.push(TraceEvent::Reported {
            action: e.action.to_string(),
            step: e.step,
        });
        run.h.happened(e.action, e.step);
    }
    none
}
