//! Probabilistic execution of one planned action: a Bayes filter over the
//! action's relevant fluents, committing conclusions once they are likely
//! enough.

mod noise;

pub use noise::{MotionModel, NoiseConfig, NoiseError, SensorModel, Slip};

use crate::lang::{ActionKind, Atom, Happened, Literal, Observation, Statement, SystemDescription, Term};
use crate::reason::{Interpreter, State};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeliefError {
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error("action `{0}` has no observable effect")]
    NoEffect(String),
    #[error("prior cannot be normalized")]
    BadPrior,
    #[error("hypothesis {0} is not in the support")]
    BadHypothesis(usize),
    #[error("observation has zero likelihood under every hypothesis")]
    Degenerate,
}

/// Mutually exclusive, exhaustive hypotheses about an action's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Subset {
    /// Each hypothesis is a fluent literal believed true under it.
    pub hypotheses: Vec<Literal>,
    /// Index of the hypothesis the plan expects.
    pub expected: usize,
    /// Index of the hypothesis "nothing changed", if distinct.
    pub unchanged: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    pub hypotheses: Vec<Literal>,
    pub probs: Vec<f64>,
}

impl BeliefState {
    pub fn most_likely(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prior {
    Uniform,
    /// Mass `trust` on one hypothesis, the rest spread evenly.
    Default { index: usize, trust: f64 },
    Explicit(Vec<f64>),
}

/// Default mass given to the hypothesis an initial-state default names.
pub const DEFAULT_TRUST: f64 = 0.8;

fn ground_effects<'s>(sd: &'s SystemDescription, action: &Atom) -> Vec<&'s Statement> {
    sd.statements
        .iter()
        .filter(|st| matches!(st, Statement::Causal { action: a, .. } if a.pred == action.pred))
        .collect()
}

/// Values `v` related to `from` by a binary static that co-occurs with
/// `pred` in a state-constraint body (e.g. map connectivity for locations).
fn neighbours(sd: &SystemDescription, pred: &str, from: &Term) -> Vec<Term> {
    let mut rels: Vec<String> = Vec::new();
    for st in &sd.statements {
        if let Statement::Constraint { body, .. } = st {
            if body.lits.iter().any(|l| l.atom.pred == pred) {
                for l in &body.lits {
                    if !l.neg && l.atom.arity() == 2 && sd.is_static(&l.atom.pred) && !rels.contains(&l.atom.pred) {
                        rels.push(l.atom.pred.clone());
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for f in &sd.static_facts {
        if rels.contains(&f.pred) && f.args[0] == *from && !out.contains(&f.args[1]) {
            out.push(f.args[1].clone());
        }
    }
    out
}

/// Functional fluent: a state constraint forbids two values for the same
/// leading arguments.
fn is_functional(sd: &SystemDescription, pred: &str) -> bool {
    sd.statements.iter().any(|st| match st {
        Statement::Constraint { head, body } => {
            head.neg
                && head.atom.pred == pred
                && body.lits.iter().any(|l| !l.neg && l.atom.pred == pred)
                && !body.cmps.is_empty()
        }
        _ => false,
    })
}

/// The fluent literals an action is about, as exclusive hypotheses.
///
/// For an effect on a functional fluent (a location) the hypotheses are the
/// target value, the current value, and the values related to the current
/// one through the statics of the state constraints; otherwise the effect
/// and its complement.
pub fn relevant_subset(
    action: &Atom,
    sd: &SystemDescription,
    interp: &Interpreter,
    believed: &State,
) -> Result<Subset, BeliefError> {
    match sd.action(&action.pred) {
        Some(d) if d.kind == ActionKind::Agent || d.kind == ActionKind::Exogenous => {}
        _ => return Err(BeliefError::UndeclaredAction(action.to_string())),
    }
    if ground_effects(sd, action).is_empty() {
        return Err(BeliefError::NoEffect(action.to_string()));
    }
    let effects = interp.effects(believed, std::slice::from_ref(action));
    let Some(effect) = effects.into_iter().next() else {
        return Err(BeliefError::NoEffect(action.to_string()));
    };
    let a = &effect.atom;
    if !effect.neg && a.arity() >= 2 && is_functional(sd, &a.pred) {
        let lead = &a.args[..a.arity() - 1];
        let target = a.args[a.arity() - 1].clone();
        // values of the same kind as the target: the action's parameter sort
        let kind = action
            .args
            .iter()
            .position(|t| *t == target)
            .and_then(|k| sd.action(&action.pred).map(|d| d.sig.params[k].clone()))
            .or_else(|| target.as_const().and_then(|t| sd.sorts.sort_of(t)).map(str::to_string))
            .unwrap_or_default();
        let same_kind = |v: &Term| sd.sorts.term_is_instance_of(v, &kind);
        let with = |v: &Term| {
            let mut args = lead.to_vec();
            args.push(v.clone());
            Atom::new(a.pred.clone(), args)
        };
        let current = believed
            .fluents
            .iter()
            .filter(|f| f.pred == a.pred && f.arity() == a.arity() && f.args[..a.arity() - 1] == *lead)
            .map(|f| f.args[a.arity() - 1].clone())
            .find(|v| same_kind(v));
        let mut values = vec![target.clone()];
        if let Some(cur) = &current {
            if !values.contains(cur) {
                values.push(cur.clone());
            }
            for v in neighbours(sd, &a.pred, cur) {
                if same_kind(&v) && !values.contains(&v) {
                    values.push(v);
                }
            }
        }
        if values.len() >= 2 {
            let unchanged = current.as_ref().and_then(|c| values.iter().position(|v| v == c)).filter(|&i| i != 0);
            return Ok(Subset {
                hypotheses: values.iter().map(|v| Literal::pos(with(v))).collect(),
                expected: 0,
                unchanged,
            });
        }
    }
    Ok(Subset {
        hypotheses: vec![effect.clone(), effect.complement()],
        expected: 0,
        unchanged: Some(1),
    })
}

pub fn init_belief(hypotheses: Vec<Literal>, prior: &Prior) -> Result<BeliefState, BeliefError> {
    let k = hypotheses.len();
    if k == 0 {
        return Err(BeliefError::BadPrior);
    }
    let probs = match prior {
        Prior::Uniform => vec![1.0 / k as f64; k],
        Prior::Default { index, trust } => {
            if *index >= k || !(0.0..=1.0).contains(trust) {
                return Err(BeliefError::BadPrior);
            }
            if k == 1 {
                vec![1.0]
            } else {
                let rest = (1.0 - trust) / (k - 1) as f64;
                (0..k).map(|i| if i == *index { *trust } else { rest }).collect()
            }
        }
        Prior::Explicit(p) => {
            if p.len() != k || p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(BeliefError::BadPrior);
            }
            let s: f64 = p.iter().sum();
            if s <= 0.0 {
                return Err(BeliefError::BadPrior);
            }
            p.iter().map(|x| x / s).collect()
        }
    };
    Ok(BeliefState { hypotheses, probs })
}

/// Posterior after a reading about hypothesis `i`: likelihood `tp` (or
/// `1 - tp` for a negative reading) under `i`, `fp` (or `1 - fp`) under
/// every other hypothesis, then normalized.
pub fn bayes_update(b: &BeliefState, i: usize, observed: bool, m: SensorModel) -> Result<BeliefState, BeliefError> {
    if i >= b.probs.len() {
        return Err(BeliefError::BadHypothesis(i));
    }
    let (hit, other) = if observed { (m.tp, m.fp) } else { (1.0 - m.tp, 1.0 - m.fp) };
    let mut probs: Vec<f64> = b
        .probs
        .iter()
        .enumerate()
        .map(|(j, &p)| p * if j == i { hit } else { other })
        .collect();
    let s: f64 = probs.iter().sum();
    if s <= 0.0 || !s.is_finite() {
        return Err(BeliefError::Degenerate);
    }
    for p in &mut probs {
        *p /= s;
    }
    Ok(BeliefState {
        hypotheses: b.hypotheses.clone(),
        probs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionPolicy {
    /// Commit threshold.
    pub theta: f64,
    pub max_cycles: u32,
    /// Prior mass on an object being where the plan believes it is.
    pub trust: f64,
    /// Check that the object is present before picking it up.
    pub check_presence: bool,
}

impl Default for ExecutionPolicy {
    fn default() -> Self {
        ExecutionPolicy {
            theta: 0.85,
            max_cycles: 50,
            trust: DEFAULT_TRUST,
            check_presence: true,
        }
    }
}

/// The simulated (or real) world as seen by an executing action.
pub trait WorldHandle {
    /// Issues an action; false if the world could not even attempt it.
    fn act(&mut self, action: &Atom) -> bool;
    /// Noisy reading of a fluent; `None` when it is not observable.
    fn sense(&mut self, fluent: &Atom) -> Option<bool>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecStatus {
    Completed,
    TimedOut,
    /// A precondition (object presence) was found false; nothing was done.
    Refuted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionResult {
    pub status: ExecStatus,
    pub observations: Vec<Observation>,
    pub happened: Vec<Happened>,
    pub cycles: u32,
    pub belief: Option<BeliefState>,
}

/// Filters readings about `target` until one side reaches `theta`.
fn check_fact(
    world: &mut dyn WorldHandle,
    target: &Atom,
    prior: f64,
    sensor: SensorModel,
    policy: &ExecutionPolicy,
    cycles: &mut u32,
) -> Result<Option<bool>, BeliefError> {
    let mut b = init_belief(
        vec![Literal::pos(target.clone()), Literal::neg(target.clone())],
        &Prior::Explicit(vec![prior, 1.0 - prior]),
    )?;
    while *cycles < policy.max_cycles {
        *cycles += 1;
        if let Some(r) = world.sense(target) {
            b = bayes_update(&b, 0, r, sensor)?;
        }
        if b.probs[0] >= policy.theta {
            return Ok(Some(true));
        }
        if b.probs[1] >= policy.theta {
            return Ok(Some(false));
        }
    }
    Ok(None)
}

/// Executes `action` at `step` against the world, filtering readings of its
/// relevant fluents until the expected outcome is believed with probability
/// at least `theta` or the cycle budget runs out.
#[allow(clippy::too_many_arguments)]
pub fn execute_action(
    action: &Atom,
    step: u32,
    sd: &SystemDescription,
    interp: &Interpreter,
    believed: &State,
    world: &mut dyn WorldHandle,
    noise: &NoiseConfig,
    policy: &ExecutionPolicy,
) -> Result<ExecutionResult, BeliefError> {
    let sub = relevant_subset(action, sd, interp, believed)?;
    let mut cycles = 0u32;
    let mut result = ExecutionResult {
        status: ExecStatus::TimedOut,
        observations: Vec::new(),
        happened: Vec::new(),
        cycles: 0,
        belief: None,
    };

    if policy.check_presence && action.pred == "pickup" && action.arity() == 2 {
        if let Some(here) = believed_place(sd, believed, &action.args[0]) {
            let target = Atom::new("has_location", vec![action.args[1].clone(), here]);
            let present = check_fact(world, &target, policy.trust, noise.sensor(&target), policy, &mut cycles)?;
            if present == Some(false) {
                result.status = ExecStatus::Refuted;
                result.cycles = cycles;
                result.observations.push(Observation {
                    fluent: target,
                    value: false,
                    step,
                });
                return Ok(result);
            }
        }
    }

    let expected = sub.hypotheses[sub.expected].clone();
    let mut b = init_belief(sub.hypotheses.clone(), &Prior::Uniform)?;
    if !world.act(action) {
        // never attempted, so it did not happen
        result.cycles = cycles;
        let mut r = timeout(result, action, &expected, step, b);
        r.happened.clear();
        return Ok(r);
    }
    while cycles < policy.max_cycles {
        cycles += 1;
        let i = b.most_likely();
        // Readings are about the atom of the hypothesis; a negative
        // hypothesis is read through its positive atom.
        let h = &b.hypotheses[i];
        let (idx, atom) = if h.neg {
            let pos = b.hypotheses.iter().position(|x| x.atom == h.atom && !x.neg).unwrap_or(i);
            (pos, h.atom.clone())
        } else {
            (i, h.atom.clone())
        };
        if let Some(r) = world.sense(&atom) {
            let sensor = noise.sensor(&atom);
            b = bayes_update(&b, idx, r, sensor)?;
        }
        let best = b.most_likely();
        if b.probs[best] < policy.theta {
            continue;
        }
        if best == sub.expected {
            result.status = ExecStatus::Completed;
            result.cycles = cycles;
            result.happened.push(Happened {
                action: action.clone(),
                step,
            });
            result.observations.push(Observation {
                fluent: expected.atom.clone(),
                value: !expected.neg,
                step: step + 1,
            });
            result.belief = Some(b);
            return Ok(result);
        }
        // Confidently not done: undo a slip if needed and try again.
        if Some(best) != sub.unchanged && !b.hypotheses[best].neg {
            if let Some(back) = sub.unchanged.map(|u| corrective(action, &sub.hypotheses[u])) {
                world.act(&back);
            }
        }
        world.act(action);
        b = init_belief(sub.hypotheses.clone(), &Prior::Uniform)?;
    }
    result.cycles = cycles;
    Ok(timeout(result, action, &expected, step, b))
}

fn timeout(mut result: ExecutionResult, action: &Atom, expected: &Literal, step: u32, b: BeliefState) -> ExecutionResult {
    result.status = ExecStatus::TimedOut;
    result.happened.push(Happened {
        action: action.clone(),
        step,
    });
    result.observations.push(Observation {
        fluent: expected.atom.clone(),
        value: expected.neg,
        step: step + 1,
    });
    result.belief = Some(b);
    result
}

/// Same action aimed back at the unchanged value (e.g. the origin of a move).
fn corrective(action: &Atom, unchanged: &Literal) -> Atom {
    let mut args = action.args.clone();
    if let (Some(last), Some(v)) = (args.last_mut(), unchanged.atom.args.last()) {
        *last = v.clone();
    }
    Atom::new(action.pred.clone(), args)
}

/// The finest believed location of an agent: a value no other believed
/// value is statically related to (an area rather than its room).
fn believed_place(sd: &SystemDescription, s: &State, who: &Term) -> Option<Term> {
    let locs: Vec<&Term> = s
        .fluents
        .iter()
        .filter(|f| f.pred == "has_location" && f.arity() == 2 && f.args[0] == *who)
        .map(|f| &f.args[1])
        .collect();
    locs.iter()
        .find(|v| {
            !sd.static_facts
                .iter()
                .any(|f| f.arity() == 2 && f.args[1] == ***v && locs.contains(&&f.args[0]))
        })
        .map(|v| (*v).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(n: usize) -> Vec<Literal> {
        (0..n).map(|i| Literal::pos(Atom::ground("at", &[&format!("a{i}")]))).collect()
    }

    #[test]
    fn eq9_value() {
        let b = init_belief(lits(2), &Prior::Uniform).unwrap();
        let m = SensorModel { tp: 0.8, fp: 0.1 };
        let post = bayes_update(&b, 0, true, m).unwrap();
        assert!((post.probs[0] - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn default_prior_spreads_rest() {
        let b = init_belief(lits(4), &Prior::Default { index: 0, trust: 0.8 }).unwrap();
        assert!((b.probs[1] - 0.2 / 3.0).abs() < 1e-12);
        assert!(init_belief(lits(3), &Prior::Explicit(vec![0.0; 3])).is_err());
    }

    #[test]
    fn degenerate_likelihood() {
        let b = init_belief(lits(2), &Prior::Uniform).unwrap();
        let m = SensorModel { tp: 0.0, fp: 0.0 };
        assert_eq!(bayes_update(&b, 0, true, m), Err(BeliefError::Degenerate));
    }
}
