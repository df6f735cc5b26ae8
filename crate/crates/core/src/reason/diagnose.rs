use std::collections::BTreeSet;

use crate::ground::ground;
use crate::lang::{Atom, History, SystemDescription};
use crate::solve::{solve_with_cr, SolveOptions, Status};
use crate::translate::{translate, DiagnosisMode, TranslationConfig};

use super::{current_step, ReasonError};

/// Unobserved exogenous occurrences that explain the history.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct Explanation {
    /// (exogenous action, step) pairs, sorted.
    pub events: Vec<(String, u32)>,
    #[serde(skip)]
    pub atoms: Vec<(Atom, u32)>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Diagnosis {
    pub mode: DiagnosisMode,
    /// Empty when the history is already consistent.
    pub explanations: Vec<Explanation>,
    /// Enumeration hit the model limit or a resource cap.
    pub truncated: bool,
}

fn expl_of(gp: &crate::ground::GroundProgram, atoms: &[u32]) -> Explanation {
    let mut set: BTreeSet<(Atom, u32)> = BTreeSet::new();
    for &a in atoms {
        let l = gp.literal(a);
        if l.neg || l.atom.pred != "expl" || l.atom.arity() != 2 {
            continue;
        }
        let (Some(action), Some(step)) = (l.atom.args[0].to_atom(), l.atom.args[1].as_const()) else {
            continue;
        };
        if let Ok(step) = step.parse::<u32>() {
            set.insert((action, step));
        }
    }
    let atoms: Vec<(Atom, u32)> = set.into_iter().collect();
    Explanation {
        events: atoms.iter().map(|(a, s)| (a.to_string(), *s)).collect(),
        atoms,
    }
}

/// Explanations of the history's unexpected observations. Exogenous events
/// are hypothesized only at steps before the current one.
pub fn diagnose(
    sd: &SystemDescription,
    h: &History,
    mode: DiagnosisMode,
    opts: &SolveOptions,
) -> Result<Diagnosis, ReasonError> {
    let n = current_step(h);
    let plain = ground(&translate(sd, h, TranslationConfig::new(n))?)?;
    let r = solve_with_cr(&plain, &SolveOptions { limit: 1, ..opts.clone() });
    match r.status {
        Status::Consistent => {
            return Ok(Diagnosis {
                mode,
                explanations: Vec::new(),
                truncated: false,
            })
        }
        Status::ResourceLimit => return Err(ReasonError::ResourceLimit),
        Status::Inconsistent => {}
    }
    if mode == DiagnosisMode::Off {
        return Err(ReasonError::InconsistentHistory);
    }
    let cfg = TranslationConfig::new(n).with_diagnosis(mode, n);
    let gp = ground(&translate(sd, h, cfg)?)?;
    let r = solve_with_cr(&gp, opts);
    match r.status {
        Status::Inconsistent => return Err(ReasonError::Unexplainable),
        Status::ResourceLimit => return Err(ReasonError::ResourceLimit),
        Status::Consistent => {}
    }
    let mut found: BTreeSet<Explanation> = BTreeSet::new();
    for m in &r.models {
        found.insert(expl_of(&gp, &m.atoms));
    }
    let mut explanations: Vec<Explanation> = found.into_iter().collect();
    if mode == DiagnosisMode::All {
        // Disjunctive guesses also produce non-minimal event sets; keep them,
        // but order by size so the smallest come first.
        explanations.sort_by(|a, b| a.events.len().cmp(&b.events.len()).then(a.cmp(b)));
    }
    let truncated = r.stats.truncated || (opts.limit != 0 && r.models.len() >= opts.limit);
    Ok(Diagnosis {
        mode,
        explanations,
        truncated,
    })
}
