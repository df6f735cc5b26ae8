use std::collections::BTreeSet;

use crate::ground::{ground, GroundProgram, GroundRule};
use crate::lang::{ActionKind, Atom, History, Literal, Program, Rule, SystemDescription, Term};
use crate::solve::{solve_with_cr, SolveOptions, Status};
use crate::translate::{add_goal, translate, TranslationConfig};

use super::{current_step, ReasonError};

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PlannedAction {
    pub action: String,
    pub step: u32,
    #[serde(skip)]
    pub atom: Atom,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Plan {
    /// Agent actions in step order.
    pub actions: Vec<PlannedAction>,
    /// First step the plan may act at.
    pub start: u32,
    /// Last step of the program the plan was found in.
    pub horizon: u32,
    /// Fluents believed true at each step from `start` to `horizon`.
    #[serde(skip)]
    pub believed: Vec<Vec<Atom>>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Fluents believed true at `step`, if within the plan.
    pub fn believed_at(&self, step: u32) -> Option<&[Atom]> {
        step.checked_sub(self.start).and_then(|k| self.believed.get(k as usize)).map(Vec::as_slice)
    }
}

#[derive(Clone, Debug)]
pub struct PlanConfig {
    /// Longest plan considered, in steps after the current one.
    pub max_length: u32,
    pub solve: SolveOptions,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            max_length: 10,
            solve: SolveOptions::limit(1),
        }
    }
}

fn occurs_lit(a: &Atom, i: u32) -> Literal {
    Literal::pos(Atom::new("occurs", vec![a.to_term(), Term::constant(i.to_string())]))
}

/// Decision order realizing the deterministic tie-break: steps in order,
/// and within a step "no action" before every action, actions in
/// declaration order.
fn plan_hints(gp: &GroundProgram, agent: &[Atom], from: u32, to: u32) -> Vec<(u32, bool)> {
    let mut hints = Vec::new();
    for i in from..to {
        for a in agent.iter().rev() {
            if let Some(id) = gp.lookup(&occurs_lit(a, i)) {
                hints.push((id, false));
            }
        }
    }
    hints
}

/// True literals `holds(F, i)` of an answer set, as fluent atoms.
pub(crate) fn holds_at(gp: &GroundProgram, atoms: &[u32], i: u32) -> Vec<Atom> {
    let at = Term::constant(i.to_string());
    atoms
        .iter()
        .map(|&a| gp.literal(a))
        .filter(|l| !l.neg && l.atom.pred == "holds" && l.atom.args.get(1) == Some(&at))
        .filter_map(|l| l.atom.args[0].to_atom())
        .collect()
}

/// Consistency-restoring rules the history's own (goal-free) model
/// applies, or `None` if the history is inconsistent.
pub(crate) fn history_cr(sd: &SystemDescription, h: &History, opts: &SolveOptions) -> Result<Option<BTreeSet<String>>, ReasonError> {
    let n = current_step(h);
    let prog = translate(sd, h, TranslationConfig::new(n))?;
    let gp = ground(&prog)?;
    let r = solve_with_cr(&gp, &SolveOptions { limit: 1, ..opts.clone() });
    match r.status {
        Status::Consistent => Ok(Some(r.models[0].applied_cr.iter().map(|&i| cr_key(&gp, &gp.rules[i])).collect())),
        Status::Inconsistent => Ok(None),
        Status::ResourceLimit => Err(ReasonError::ResourceLimit),
    }
}

/// History is consistent on its own (without a goal)?
pub fn history_consistent(sd: &SystemDescription, h: &History, opts: &SolveOptions) -> Result<bool, ReasonError> {
    Ok(history_cr(sd, h, opts)?.is_some())
}

/// Identity of a CR rule across groundings of different horizons.
fn cr_key(gp: &GroundProgram, r: &GroundRule) -> String {
    let mut body: Vec<String> = r.pos.iter().map(|&a| gp.literal(a).to_string()).collect();
    body.extend(r.neg.iter().map(|&a| format!("not {}", gp.literal(a))));
    body.sort();
    let head: Vec<String> = r.head.iter().map(|&a| gp.literal(a).to_string()).collect();
    format!("{} +- {}", head.join(" | "), body.join(", "))
}

/// Makes the given CR rules regular and drops the rest, so a goal cannot
/// buy a different reading of the history.
fn freeze_cr(gp: &mut GroundProgram, applied: &BTreeSet<String>) {
    let keep: Vec<bool> = gp.rules.iter().map(|r| !r.is_cr() || applied.contains(&cr_key(gp, r))).collect();
    let mut k = 0;
    gp.rules.retain(|_| {
        k += 1;
        keep[k - 1]
    });
    for r in &mut gp.rules {
        r.cr = None;
    }
}

/// Forbids the goal from holding at step `at`.
fn refute_goal(prog: &mut Program, goal: &[Literal], at: u32) {
    let at = Term::constant(at.to_string());
    let body = goal
        .iter()
        .map(|g| Literal {
            atom: Atom::new("holds", vec![g.atom.to_term(), at.clone()]),
            neg: g.neg,
        })
        .collect();
    let now = Literal::pos(Atom::new("goal_now", vec![]));
    prog.push(Rule::new(vec![now.clone()], body, vec![]).with_tag("goal"));
    prog.push(Rule::new(vec![], vec![now], vec![]).with_tag("goal"));
}

fn entailed_with(sd: &SystemDescription, h: &History, goal: &[Literal], applied: &BTreeSet<String>, opts: &SolveOptions) -> Result<bool, ReasonError> {
    let n = current_step(h);
    let mut prog = translate(sd, h, TranslationConfig::new(n))?;
    refute_goal(&mut prog, goal, n);
    let mut gp = ground(&prog)?;
    freeze_cr(&mut gp, applied);
    let r = solve_with_cr(&gp, &SolveOptions { limit: 1, ..opts.clone() });
    match r.status {
        Status::Inconsistent => Ok(true),
        Status::Consistent => Ok(false),
        Status::ResourceLimit => Err(ReasonError::ResourceLimit),
    }
}

/// The goal holds at the current step in every model of the history.
pub fn goal_entailed(sd: &SystemDescription, h: &History, goal: &[Literal], opts: &SolveOptions) -> Result<bool, ReasonError> {
    let Some(applied) = history_cr(sd, h, opts)? else {
        return Err(ReasonError::InconsistentHistory);
    };
    entailed_with(sd, h, goal, &applied, opts)
}

/// Shortest plan from the history's current step; among plans of that
/// length the lexicographically least by (step, action declaration order).
pub fn plan(sd: &SystemDescription, h: &History, goal: &[Literal], cfg: &PlanConfig) -> Result<Plan, ReasonError> {
    if goal.is_empty() {
        return Err(crate::translate::TranslateError::EmptyGoal.into());
    }
    let start = current_step(h);
    let Some(applied) = history_cr(sd, h, &cfg.solve)? else {
        return Err(ReasonError::InconsistentHistory);
    };
    let agent = sd.action_instances(ActionKind::Agent);
    // Empty only when the goal is known; otherwise assume it unmet now, so
    // the plan achieves it rather than guessing unknown fluents its way.
    let known = entailed_with(sd, h, goal, &applied, &cfg.solve)?;
    for len in 0..=cfg.max_length {
        if len == 0 && !known {
            continue;
        }
        let n = start + len;
        let prog = translate(sd, h, TranslationConfig::new(n))?;
        let mut prog = add_goal(sd, prog, h, goal, start)?;
        if !known {
            refute_goal(&mut prog, goal, start);
        }
        let mut gp = ground(&prog)?;
        freeze_cr(&mut gp, &applied);
        let opts = SolveOptions {
            limit: 1,
            hints: plan_hints(&gp, &agent, start, n),
            ..cfg.solve.clone()
        };
        let r = solve_with_cr(&gp, &opts);
        match r.status {
            Status::Inconsistent => continue,
            Status::ResourceLimit => return Err(ReasonError::ResourceLimit),
            Status::Consistent => {}
        }
        let model = &r.models[0];
        let mut actions = Vec::new();
        for i in start..n {
            for a in &agent {
                if let Some(id) = gp.lookup(&occurs_lit(a, i)) {
                    if model.contains(id) {
                        actions.push(PlannedAction {
                            action: a.to_string(),
                            step: i,
                            atom: a.clone(),
                        });
                    }
                }
            }
        }
        // drop actions that were already recorded as happened
        actions.retain(|p| !h.happened.iter().any(|x| x.step == p.step && x.action == p.atom));
        return Ok(Plan {
            actions,
            start,
            horizon: n,
            believed: (start..=n).map(|i| holds_at(&gp, &model.atoms, i)).collect(),
        });
    }
    Err(ReasonError::NoPlan {
        max_length: cfg.max_length,
    })
}
