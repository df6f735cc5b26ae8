//! Direct interpreter for the transition semantics of a system description.
//!
//! It grounds the statements itself and computes successor states by
//! closure under state constraints plus inertia, so plans and simulated
//! worlds can be checked without the solver.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::lang::{ActionKind, Atom, Body, Comparison, FluentKind, Literal, Statement, SystemDescription, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpError {
    #[error("action `{action}` is not executable: {law}")]
    Inexecutable { action: String, law: String },
    #[error("effects of {0} contradict each other or the state constraints")]
    Contradiction(String),
    #[error("successor state of {0} is not uniquely determined")]
    Undetermined(String),
    #[error("literal `{0}` is not a basic fluent literal")]
    NotBasic(String),
}

/// Complete valuation of basic fluents: the true ones.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub fluents: BTreeSet<Atom>,
}

impl State {
    pub fn holds(&self, a: &Atom) -> bool {
        self.fluents.contains(a)
    }
}

#[derive(Clone, Debug)]
struct GroundBody {
    lits: Vec<Literal>,
}

#[derive(Clone, Debug)]
struct GroundCausal {
    action: Atom,
    head: Literal,
    body: GroundBody,
}

#[derive(Clone, Debug)]
struct GroundConstraint {
    head: Literal,
    body: GroundBody,
}

#[derive(Clone, Debug)]
struct GroundImpossible {
    actions: Vec<Atom>,
    body: GroundBody,
    source: String,
}

pub struct Interpreter<'a> {
    sd: &'a SystemDescription,
    basic: Vec<Atom>,
    defined: HashSet<String>,
    causal: HashMap<Atom, Vec<GroundCausal>>,
    constraints: Vec<GroundConstraint>,
    impossible: HashMap<Atom, Vec<GroundImpossible>>,
    statics: HashSet<Atom>,
}

fn enumerate(sd: &SystemDescription, vars: &[(String, String)], emit: &mut dyn FnMut(&BTreeMap<String, Term>)) {
    fn go(
        sd: &SystemDescription,
        vars: &[(String, String)],
        k: usize,
        b: &mut BTreeMap<String, Term>,
        emit: &mut dyn FnMut(&BTreeMap<String, Term>),
    ) {
        if k == vars.len() {
            emit(b);
            return;
        }
        for inst in sd.sorts.instances_of(&vars[k].1) {
            b.insert(vars[k].0.clone(), Term::constant(inst));
            go(sd, vars, k + 1, b, emit);
        }
        b.remove(&vars[k].0);
    }
    go(sd, vars, 0, &mut BTreeMap::new(), emit);
}

fn statement_vars(st: &Statement) -> Vec<(String, String)> {
    let mut all: Vec<&crate::lang::Var> = Vec::new();
    match st {
        Statement::Causal { action, head, body } => {
            all.extend(action.vars());
            all.extend(head.atom.vars());
            all.extend(body.vars());
        }
        Statement::Constraint { head, body } => {
            all.extend(head.atom.vars());
            all.extend(body.vars());
        }
        Statement::Impossible { actions, body } => {
            for a in actions {
                all.extend(a.vars());
            }
            all.extend(body.vars());
        }
    }
    let mut out: Vec<(String, String)> = Vec::new();
    for v in all {
        if !out.iter().any(|(n, _)| *n == v.name) {
            out.push((v.name.clone(), v.sort.clone().unwrap_or_default()));
        }
    }
    out
}

impl<'a> Interpreter<'a> {
    pub fn new(sd: &'a SystemDescription) -> Self {
        let statics: HashSet<Atom> = sd.static_facts.iter().cloned().collect();
        let defined = sd
            .fluents
            .iter()
            .filter(|f| f.kind == FluentKind::Defined)
            .map(|f| f.sig.name.clone())
            .collect();
        let mut it = Interpreter {
            sd,
            basic: sd.basic_fluent_instances(),
            defined,
            causal: HashMap::new(),
            constraints: Vec::new(),
            impossible: HashMap::new(),
            statics,
        };
        for st in &sd.statements {
            let vars = statement_vars(st);
            let mut ground: Vec<Statement> = Vec::new();
            enumerate(sd, &vars, &mut |b| {
                let gb = |body: &Body| Body {
                    lits: body.lits.iter().map(|l| l.subst(b)).collect(),
                    cmps: body.cmps.iter().map(|c| c.subst(b)).collect(),
                };
                ground.push(match st {
                    Statement::Causal { action, head, body } => Statement::Causal {
                        action: action.subst(b),
                        head: head.subst(b),
                        body: gb(body),
                    },
                    Statement::Constraint { head, body } => Statement::Constraint {
                        head: head.subst(b),
                        body: gb(body),
                    },
                    Statement::Impossible { actions, body } => Statement::Impossible {
                        actions: actions.iter().map(|a| a.subst(b)).collect(),
                        body: gb(body),
                    },
                });
            });
            for g in ground {
                let body = match &g {
                    Statement::Causal { body, .. } | Statement::Constraint { body, .. } | Statement::Impossible { body, .. } => body,
                };
                let Some(body) = it.prune(body) else { continue };
                match g {
                    Statement::Causal { action, head, .. } => {
                        it.causal.entry(action.clone()).or_default().push(GroundCausal { action, head, body })
                    }
                    Statement::Constraint { head, .. } => it.constraints.push(GroundConstraint { head, body }),
                    Statement::Impossible { actions, .. } => {
                        let g = GroundImpossible {
                            actions: actions.clone(),
                            body,
                            source: st.to_string(),
                        };
                        for a in actions {
                            it.impossible.entry(a).or_default().push(g.clone());
                        }
                    }
                }
            }
        }
        it
    }

    /// Drops static literals and comparisons, or the whole instance if one fails.
    fn prune(&self, body: &Body) -> Option<GroundBody> {
        if !body.cmps.iter().all(|c: &Comparison| c.eval().unwrap_or(false)) {
            return None;
        }
        let mut lits = Vec::new();
        for l in &body.lits {
            if self.sd.is_static(&l.atom.pred) {
                if self.statics.contains(&l.atom) == l.neg {
                    return None;
                }
            } else {
                lits.push(l.clone());
            }
        }
        Some(GroundBody { lits })
    }

    pub fn basic_fluents(&self) -> &[Atom] {
        &self.basic
    }

    fn is_defined(&self, a: &Atom) -> bool {
        self.defined.contains(&a.pred)
    }

    /// Defined fluents true in a complete state: least fixpoint of the
    /// constraints with defined heads, false otherwise.
    pub fn defined_in(&self, s: &State) -> HashSet<Atom> {
        let mut out: HashSet<Atom> = HashSet::new();
        loop {
            let mut changed = false;
            for c in &self.constraints {
                if c.head.neg || !self.is_defined(&c.head.atom) || out.contains(&c.head.atom) {
                    continue;
                }
                let ok = c.body.lits.iter().all(|l| {
                    if self.is_defined(&l.atom) {
                        out.contains(&l.atom) != l.neg
                    } else {
                        s.holds(&l.atom) != l.neg
                    }
                });
                if ok {
                    out.insert(c.head.atom.clone());
                    changed = true;
                }
            }
            if !changed {
                return out;
            }
        }
    }

    /// Truth of a ground fluent literal in a complete state.
    pub fn literal_holds(&self, s: &State, l: &Literal) -> bool {
        if self.is_defined(&l.atom) {
            self.defined_in(s).contains(&l.atom) != l.neg
        } else if self.sd.is_static(&l.atom.pred) {
            self.statics.contains(&l.atom) != l.neg
        } else {
            s.holds(&l.atom) != l.neg
        }
    }

    fn body_holds(&self, s: &State, defined: &HashSet<Atom>, b: &GroundBody) -> bool {
        b.lits.iter().all(|l| {
            if self.is_defined(&l.atom) {
                defined.contains(&l.atom) != l.neg
            } else {
                s.holds(&l.atom) != l.neg
            }
        })
    }

    /// First violated executability condition for a set of simultaneous actions.
    pub fn check_executable(&self, s: &State, actions: &[Atom]) -> Result<(), InterpError> {
        let defined = self.defined_in(s);
        for a in actions {
            for imp in self.impossible.get(a).into_iter().flatten() {
                if imp.actions.iter().all(|x| actions.contains(x)) && self.body_holds(s, &defined, &imp.body) {
                    return Err(InterpError::Inexecutable {
                        action: a.to_string(),
                        law: imp.source.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_executable(&self, s: &State, action: &Atom) -> bool {
        self.check_executable(s, std::slice::from_ref(action)).is_ok()
    }

    /// Direct effects of simultaneous actions in `s`.
    pub fn effects(&self, s: &State, actions: &[Atom]) -> Vec<Literal> {
        let defined = self.defined_in(s);
        let mut out = Vec::new();
        for a in actions {
            for c in self.causal.get(a).into_iter().flatten() {
                debug_assert_eq!(&c.action, a);
                if self.body_holds(s, &defined, &c.body) && !out.contains(&c.head) {
                    out.push(c.head.clone());
                }
            }
        }
        out
    }

    /// Closure of a partial set of basic literals under basic-headed
    /// constraints; may contain complementary pairs.
    fn closure(&self, seed: &HashSet<Literal>) -> HashSet<Literal> {
        let mut c = seed.clone();
        loop {
            let mut changed = false;
            for k in &self.constraints {
                if self.is_defined(&k.head.atom) || c.contains(&k.head) {
                    continue;
                }
                let ok = k.body.lits.iter().all(|l| {
                    if self.is_defined(&l.atom) {
                        let pos = Literal::pos(l.atom.clone());
                        c.contains(&pos) != l.neg
                    } else {
                        c.contains(l)
                    }
                });
                if ok {
                    c.insert(k.head.clone());
                    changed = true;
                }
            }
            if !changed {
                return c;
            }
        }
    }

    fn lit_of(&self, s: &State, f: &Atom) -> Literal {
        Literal {
            atom: f.clone(),
            neg: !s.holds(f),
        }
    }

    /// The state that keeps `fixed` and otherwise follows `prev` as far as
    /// the state constraints allow.
    fn settle(&self, fixed: &[Literal], prev: &State, what: &str) -> Result<State, InterpError> {
        let fixed_atoms: HashSet<&Atom> = fixed.iter().map(|l| &l.atom).collect();
        let mut dropped: HashSet<Atom> = HashSet::new();
        let mut seed: HashSet<Literal>;
        let mut c;
        loop {
            seed = fixed.iter().cloned().collect();
            for f in &self.basic {
                if !dropped.contains(f) && !fixed_atoms.contains(f) {
                    seed.insert(self.lit_of(prev, f));
                }
            }
            c = self.closure(&seed);
            let conflicts: Vec<Atom> = self
                .basic
                .iter()
                .filter(|f| c.contains(&Literal::pos((*f).clone())) && c.contains(&Literal::neg((*f).clone())))
                .cloned()
                .collect();
            if conflicts.is_empty() {
                break;
            }
            let fresh: Vec<Atom> = conflicts
                .into_iter()
                .filter(|f| !dropped.contains(f) && !fixed_atoms.contains(f))
                .collect();
            if fresh.is_empty() {
                return Err(InterpError::Contradiction(what.to_string()));
            }
            dropped.extend(fresh);
        }
        // Fluents no longer determined fall back to their previous value.
        loop {
            let open: Vec<&Atom> = self
                .basic
                .iter()
                .filter(|f| !c.contains(&Literal::pos((*f).clone())) && !c.contains(&Literal::neg((*f).clone())))
                .collect();
            if open.is_empty() {
                break;
            }
            for f in open {
                seed.insert(self.lit_of(prev, f));
            }
            c = self.closure(&seed);
            if self.basic.iter().any(|f| c.contains(&Literal::pos(f.clone())) && c.contains(&Literal::neg(f.clone()))) {
                return Err(InterpError::Undetermined(what.to_string()));
            }
        }
        let next = State {
            fluents: self.basic.iter().filter(|f| c.contains(&Literal::pos((*f).clone()))).cloned().collect(),
        };
        // Fixpoint: next = Cn(fixed ∪ (prev ∩ next)).
        let mut kept: HashSet<Literal> = fixed.iter().cloned().collect();
        for f in &self.basic {
            if prev.holds(f) == next.holds(f) {
                kept.insert(self.lit_of(prev, f));
            }
        }
        let check = self.closure(&kept);
        for f in &self.basic {
            let want = self.lit_of(&next, f);
            if !check.contains(&want) || check.contains(&want.complement()) {
                return Err(InterpError::Undetermined(what.to_string()));
            }
        }
        Ok(next)
    }

    /// Successor of `s` under simultaneous `actions` (empty = idle step).
    pub fn step(&self, s: &State, actions: &[Atom]) -> Result<State, InterpError> {
        self.check_executable(s, actions)?;
        let effects = self.effects(s, actions);
        let what = if actions.is_empty() {
            "idle step".to_string()
        } else {
            actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
        };
        self.settle(&effects, s, &what)
    }

    /// State satisfying the given literals, with every other basic fluent
    /// false unless a state constraint makes it true.
    pub fn state_from(&self, lits: &[Literal]) -> Result<State, InterpError> {
        for l in lits {
            if !self.basic.contains(&l.atom) {
                return Err(InterpError::NotBasic(l.to_string()));
            }
        }
        self.settle(lits, &State::default(), "initial state")
    }

    /// State constraints all hold in `s`.
    pub fn satisfies_constraints(&self, s: &State) -> bool {
        let defined = self.defined_in(s);
        self.constraints.iter().all(|c| {
            !self.body_holds(s, &defined, &c.body)
                || if self.is_defined(&c.head.atom) {
                    defined.contains(&c.head.atom) != c.head.neg
                } else {
                    s.holds(&c.head.atom) != c.head.neg
                }
        })
    }

    pub fn agent_actions(&self) -> Vec<Atom> {
        self.sd.action_instances(ActionKind::Agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_domain;

    const DOORS: &str = "#sort place, door. #subsort door place. #instance a, b : place. #instance d : door.
        #fluent basic at(place). #fluent basic is_open(door). #fluent basic locked(door).
        #action agent go(place). #action agent open(door). #action exogenous lock(door).
        go(P) causes at(P).
        -at(P2) if at(P1), P1 != P2.
        open(D) causes is_open(D).
        lock(D) causes locked(D).
        impossible open(D) if locked(D).
        impossible go(P) if at(P).";

    #[test]
    fn moves_and_uniqueness() {
        let sd = parse_domain(DOORS).unwrap();
        let it = Interpreter::new(&sd);
        let s0 = it.state_from(&[Literal::pos(Atom::ground("at", &["a"]))]).unwrap();
        let s1 = it.step(&s0, &[Atom::ground("go", &["b"])]).unwrap();
        assert!(s1.holds(&Atom::ground("at", &["b"])));
        assert!(!s1.holds(&Atom::ground("at", &["a"])));
        assert!(it.satisfies_constraints(&s1));
        assert!(it.step(&s1, &[Atom::ground("go", &["b"])]).is_err());
    }

    #[test]
    fn inertia_and_executability() {
        let sd = parse_domain(DOORS).unwrap();
        let it = Interpreter::new(&sd);
        let s0 = it.state_from(&[Literal::pos(Atom::ground("at", &["a"]))]).unwrap();
        let s1 = it.step(&s0, &[Atom::ground("lock", &["d"])]).unwrap();
        assert!(s1.holds(&Atom::ground("locked", &["d"])));
        assert!(s1.holds(&Atom::ground("at", &["a"])));
        assert!(matches!(
            it.step(&s1, &[Atom::ground("open", &["d"])]),
            Err(InterpError::Inexecutable { .. })
        ));
        let idle = it.step(&s1, &[]).unwrap();
        assert_eq!(idle, s1);
    }
}
