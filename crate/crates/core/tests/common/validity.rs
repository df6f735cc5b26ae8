//! Plans for random delivery instances, replayed and cross-checked against
//! breadth-first search.

use mixarch::lang::Literal;
use mixarch::reason::{plan, Interpreter, PlanConfig, ReasonError};
use mixarch::sim::instances::random_instance;

use super::oracle::delivery_shortest;

#[derive(Debug, Default, Clone, Copy)]
pub struct Validity {
    pub planned: usize,
    pub no_plan: usize,
    pub failures: usize,
}

/// Checks one instance; `Err` describes a disagreement.
pub fn check_instance(seed: u64, max_length: u32, v: &mut Validity) -> Result<(), String> {
    let inst = random_instance(seed).map_err(|e| e.to_string())?;
    let cfg = PlanConfig {
        max_length,
        ..PlanConfig::default()
    };
    let shortest = delivery_shortest(&inst, max_length);
    match plan(&inst.sd, &inst.history, &inst.goal, &cfg) {
        Ok(p) => {
            let interp = Interpreter::new(&inst.sd);
            let init: Vec<Literal> = inst
                .history
                .observations
                .iter()
                .filter(|o| o.step == 0)
                .map(|o| if o.value { Literal::pos(o.fluent.clone()) } else { Literal::neg(o.fluent.clone()) })
                .collect();
            let mut s = interp.state_from(&init).map_err(|e| format!("seed {seed}: initial state: {e}"))?;
            for a in &p.actions {
                s = interp.step(&s, std::slice::from_ref(&a.atom)).map_err(|e| format!("seed {seed}: {} fails: {e}", a.action))?;
            }
            if !inst.goal.iter().all(|g| interp.literal_holds(&s, g)) {
                return Err(format!("seed {seed}: plan does not reach the goal"));
            }
            if shortest != Some(p.actions.len() as u32) {
                return Err(format!("seed {seed}: plan of {} actions, search says {shortest:?}", p.actions.len()));
            }
            v.planned += 1;
        }
        Err(ReasonError::NoPlan { .. }) => {
            if let Some(d) = shortest {
                return Err(format!("seed {seed}: no plan, but search finds one of {d} actions"));
            }
            v.no_plan += 1;
        }
        Err(e) => return Err(format!("seed {seed}: {e}")),
    }
    Ok(())
}
