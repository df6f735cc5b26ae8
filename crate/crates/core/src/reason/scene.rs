use std::collections::BTreeMap;

use crate::ground::ground;
use crate::lang::{History, SystemDescription};
use crate::solve::{solve_with_cr, SolveOptions, Status};
use crate::translate::{translate, unlabeled_objects, TranslationConfig};

use super::ReasonError;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SceneLabeling {
    /// Observations up to this step were used.
    pub stage: u32,
    /// Candidate class labels per object, at the minimal number of relaxed
    /// attribute rules.
    pub labels: BTreeMap<String, Vec<String>>,
    /// Attribute rules relaxed in the best labelings.
    pub relaxed: usize,
    /// Objects no labeling explains.
    pub unexplainable: Vec<String>,
}

/// Class labels for the unlabeled objects observed up to `stage`.
pub fn explain_scene(
    sd: &SystemDescription,
    h: &History,
    stage: u32,
    opts: &SolveOptions,
) -> Result<SceneLabeling, ReasonError> {
    let objects = unlabeled_objects(sd, h);
    let mut cfg = TranslationConfig::new(0);
    cfg.scene = true;
    cfg.current_step = stage;
    let gp = ground(&translate(sd, h, cfg)?)?;
    let r = solve_with_cr(&gp, &SolveOptions { limit: 0, ..opts.clone() });
    let mut labels: BTreeMap<String, Vec<String>> = objects.iter().map(|o| (o.clone(), Vec::new())).collect();
    match r.status {
        Status::ResourceLimit => return Err(ReasonError::ResourceLimit),
        Status::Inconsistent => {
            return Ok(SceneLabeling {
                stage,
                labels: BTreeMap::new(),
                relaxed: 0,
                unexplainable: objects,
            })
        }
        Status::Consistent => {}
    }
    let mut relaxed = 0;
    for m in &r.models {
        relaxed = m
            .applied_cr
            .iter()
            .filter(|&&i| gp.tag(&gp.rules[i]).starts_with("attribute"))
            .count();
        for &a in &m.atoms {
            let l = gp.literal(a);
            if l.neg || l.atom.pred != "is_a" || l.atom.arity() != 2 {
                continue;
            }
            let (Some(o), Some(c)) = (l.atom.args[0].as_const(), l.atom.args[1].as_const()) else {
                continue;
            };
            let entry = labels.entry(o.to_string()).or_default();
            if !entry.iter().any(|x| x == c) {
                entry.push(c.to_string());
            }
        }
    }
    for v in labels.values_mut() {
        v.sort();
    }
    Ok(SceneLabeling {
        stage,
        labels,
        relaxed,
        unexplainable: Vec::new(),
    })
}
