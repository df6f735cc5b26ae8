use crate::belief::{execute_action, relevant_subset, BeliefError, ExecStatus, ExecutionPolicy, ExecutionResult};
use crate::lang::{Atom, Happened, Observation, Term};
use crate::reason::{Executor, Interpreter, State};

use super::world::{Handle, World};

/// How planned actions are carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    /// Belief filtering until the threshold is reached.
    Filtered,
    /// Actions taken as deterministic, confirmed by one reading per attempt.
    SingleReading,
}

pub struct SimExecutor<'w, 'a> {
    pub world: &'w mut World<'a>,
    pub interp: Interpreter<'a>,
    pub mode: Execution,
    pub policy: ExecutionPolicy,
    pub agent: Term,
}

impl<'w, 'a> SimExecutor<'w, 'a> {
    pub fn new(world: &'w mut World<'a>, mode: Execution, policy: ExecutionPolicy) -> Self {
        let interp = Interpreter::new(world.sd);
        SimExecutor {
            world,
            interp,
            mode,
            policy,
            agent: Term::constant("robot"),
        }
    }

    fn single_reading(&mut self, action: &Atom, step: u32, believed: &State) -> Result<ExecutionResult, BeliefError> {
        let sub = relevant_subset(action, self.world.sd, &self.interp, believed)?;
        let expected = sub.hypotheses[sub.expected].clone();
        let mut result = ExecutionResult {
            status: ExecStatus::TimedOut,
            observations: Vec::new(),
            happened: Vec::new(),
            cycles: 0,
            belief: None,
        };
        if self.policy.check_presence && action.pred == "pickup" {
            let here = believed
                .fluents
                .iter()
                .filter(|f| f.pred == "has_location" && f.args[0] == action.args[0])
                .map(|f| f.args[1].clone())
                .find(|v| self.world.sd.sorts.term_is_instance_of(v, "place"));
            if let Some(here) = here {
                let target = Atom::new("has_location", vec![action.args[1].clone(), here]);
                result.cycles += 1;
                if self.world.observe(&self.agent, &target) == Some(false) {
                    result.status = ExecStatus::Refuted;
                    result.observations.push(Observation {
                        fluent: target,
                        value: false,
                        step,
                    });
                    return Ok(result);
                }
            }
        }
        while result.cycles < self.policy.max_cycles {
            result.cycles += 1;
            self.world.step_world(action);
            if self.world.observe(&self.agent, &expected.atom) == Some(!expected.neg) {
                result.status = ExecStatus::Completed;
                result.happened.push(Happened {
                    action: action.clone(),
                    step,
                });
                result.observations.push(Observation {
                    fluent: expected.atom.clone(),
                    value: !expected.neg,
                    step: step + 1,
                });
                return Ok(result);
            }
        }
        result.happened.push(Happened {
            action: action.clone(),
            step,
        });
        result.observations.push(Observation {
            fluent: expected.atom.clone(),
            value: expected.neg,
            step: step + 1,
        });
        Ok(result)
    }
}

impl Executor for SimExecutor<'_, '_> {
    fn execute(&mut self, action: &Atom, step: u32, believed: &State) -> Result<ExecutionResult, BeliefError> {
        let r = match self.mode {
            Execution::Filtered => {
                let sd = self.world.sd;
                let noise = self.world.noise.clone();
                let mut handle = Handle {
                    world: &mut *self.world,
                    agent: self.agent.clone(),
                };
                execute_action(action, step, sd, &self.interp, believed, &mut handle, &noise, &self.policy)
            }
            Execution::SingleReading => self.single_reading(action, step, believed),
        };
        // A refuted precondition leaves the step open.
        if !matches!(r, Ok(ExecutionResult { status: ExecStatus::Refuted, .. })) {
            self.world.finish_step();
        }
        r
    }

    fn idle_until(&mut self, step: u32) {
        self.world.idle_until(step);
    }

    fn reported(&mut self, step: u32) -> Vec<Happened> {
        self.world.announcements(step)
    }
}
