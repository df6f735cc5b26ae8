//! Abstract syntax for the action language, the logic-program language and
//! scenario files, together with their parsers and printers.

mod lexer;
mod parser;
mod print;
mod sorts;

use std::collections::BTreeMap;
use std::fmt;

pub use parser::{parse_domain, parse_program, parse_scenario, CLASS_SORT};
pub use sorts::SortHierarchy;

/// Line/column position in a source text (both 1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("undeclared sort `{0}`")]
    UndeclaredSort(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch: `{term}` is not of sort `{sort}`")]
    SortMismatch { term: String, sort: String },
    #[error("sort cycle through `{0}`")]
    SortCycle(String),
    #[error("defined fluent in causal-law head: `{0}`")]
    DefinedInCausalHead(String),
    #[error("static `{0}` in causal-law head")]
    StaticInCausalHead(String),
    #[error("unsafe variable {var} in rule: {rule}")]
    Unsafe { var: String, rule: String },
    #[error("cannot determine the sort of variable {0}")]
    Unsorted(String),
    #[error("record is not ground: {0}")]
    Unground(String),
    #[error("negative step in record: {0}")]
    NegativeStep(String),
    #[error("duplicate declaration `{0}`")]
    Duplicate(String),
    #[error("equal-priority defaults `{0}` and `{1}` have conflicting conclusions")]
    DefaultConflict(String, String),
}

pub type Result<T> = std::result::Result<T, LangError>;

/// A term: a constant, a (possibly sorted) variable, or a compound term used
/// for reified fluents and actions inside `holds`/`occurs`/`obs`/`hpd`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(Var),
    App(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: Option<String>,
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>, sort: Option<&str>) -> Self {
        Term::Var(Var {
            name: name.into(),
            sort: sort.map(str::to_string),
        })
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Appends the variables of this term (in order of first occurrence).
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => out.push(v),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Substitutes variables by name; unbound variables are kept.
    pub fn subst(&self, binding: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => binding.get(&v.name).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(binding)).collect()),
        }
    }

    /// Converts a reified compound term back into an atom.
    pub fn to_atom(&self) -> Option<Atom> {
        match self {
            Term::Const(c) => Some(Atom::new(c.clone(), vec![])),
            Term::App(f, args) => Some(Atom::new(f.clone(), args.clone())),
            Term::Var(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    /// Builds a ground atom from constant names.
    pub fn ground(pred: &str, args: &[&str]) -> Self {
        Atom::new(pred, args.iter().map(|a| Term::constant(*a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn subst(&self, binding: &BTreeMap<String, Term>) -> Atom {
        Atom::new(self.pred.clone(), self.args.iter().map(|a| a.subst(binding)).collect())
    }

    /// Reifies the atom as a compound term (`p(a)` -> term `p(a)`).
    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Const(self.pred.clone())
        } else {
            Term::App(self.pred.clone(), self.args.clone())
        }
    }
}

/// An atom or its classical negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub neg: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, neg: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, neg: true }
    }

    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            neg: !self.neg,
        }
    }

    pub fn subst(&self, binding: &BTreeMap<String, Term>) -> Literal {
        Literal {
            atom: self.atom.subst(binding),
            neg: self.neg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl Comparison {
    pub fn subst(&self, binding: &BTreeMap<String, Term>) -> Comparison {
        Comparison {
            lhs: self.lhs.subst(binding),
            op: self.op,
            rhs: self.rhs.subst(binding),
        }
    }

    /// Evaluates a ground comparison; `None` if either side is non-ground.
    pub fn eval(&self) -> Option<bool> {
        if !self.lhs.is_ground() || !self.rhs.is_ground() {
            return None;
        }
        let eq = self.lhs == self.rhs;
        Some(match self.op {
            CmpOp::Eq => eq,
            CmpOp::Ne => !eq,
        })
    }
}

/// Body of an action-language statement: classical literals and comparisons.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Body {
    pub lits: Vec<Literal>,
    pub cmps: Vec<Comparison>,
}

impl Body {
    pub fn is_empty(&self) -> bool {
        self.lits.is_empty() && self.cmps.is_empty()
    }

    pub fn vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        for l in &self.lits {
            l.atom.args.iter().for_each(|a| a.collect_vars(&mut out));
        }
        for c in &self.cmps {
            c.lhs.collect_vars(&mut out);
            c.rhs.collect_vars(&mut out);
        }
        out
    }
}

/// Predicate signature: name and parameter sorts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredSig {
    pub name: String,
    pub params: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluentKind {
    Basic,
    Defined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Agent,
    Exogenous,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FluentDecl {
    pub sig: PredSig,
    pub kind: FluentKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionDecl {
    pub sig: PredSig,
    pub kind: ActionKind,
}

/// One of the three action-language statement forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    Causal {
        action: Atom,
        head: Literal,
        body: Body,
    },
    Constraint {
        head: Literal,
        body: Body,
    },
    Impossible {
        actions: Vec<Atom>,
        body: Body,
    },
}

/// A defeasible initial-state belief. Lower priority values are stronger.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InitialDefault {
    pub id: String,
    pub head: Literal,
    pub body: Body,
    pub priority: i64,
}

/// Ideal or default attribute of an object class, used for scene explanation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AttrRule {
    pub id: String,
    pub head: Literal,
    pub body: Body,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SystemDescription {
    pub sorts: SortHierarchy,
    pub statics: Vec<PredSig>,
    pub static_facts: Vec<Atom>,
    pub fluents: Vec<FluentDecl>,
    pub actions: Vec<ActionDecl>,
    pub statements: Vec<Statement>,
    pub defaults: Vec<InitialDefault>,
    /// Object classes with their optional parent class.
    pub classes: Vec<(String, Option<String>)>,
    pub attributes: Vec<PredSig>,
    pub attr_rules: Vec<AttrRule>,
}

/// Kind of a declared predicate symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Static,
    Fluent(FluentKind),
    Action(ActionKind),
    Attribute,
}

impl SystemDescription {
    pub fn fluent(&self, name: &str) -> Option<&FluentDecl> {
        self.fluents.iter().find(|f| f.sig.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|a| a.sig.name == name)
    }

    pub fn static_sig(&self, name: &str) -> Option<&PredSig> {
        self.statics.iter().find(|s| s.name == name)
    }

    pub fn symbol(&self, name: &str) -> Option<(SymbolKind, &PredSig)> {
        if let Some(f) = self.fluent(name) {
            return Some((SymbolKind::Fluent(f.kind), &f.sig));
        }
        if let Some(a) = self.action(name) {
            return Some((SymbolKind::Action(a.kind), &a.sig));
        }
        if let Some(s) = self.static_sig(name) {
            return Some((SymbolKind::Static, s));
        }
        self.attributes
            .iter()
            .find(|s| s.name == name)
            .map(|s| (SymbolKind::Attribute, s))
    }

    pub fn is_static(&self, name: &str) -> bool {
        self.static_sig(name).is_some()
    }

    pub fn is_static_fact(&self, atom: &Atom) -> bool {
        self.static_facts.contains(atom)
    }

    /// All ground instances of a predicate signature, in sort-instance order.
    pub fn instances_of(&self, sig: &PredSig) -> Vec<Atom> {
        let mut out = Vec::new();
        let domains: Vec<Vec<String>> = sig.params.iter().map(|s| self.sorts.instances_of(s)).collect();
        let mut idx = vec![0usize; domains.len()];
        if domains.iter().any(Vec::is_empty) {
            return out;
        }
        loop {
            let args = idx
                .iter()
                .zip(&domains)
                .map(|(&i, d)| Term::Const(d[i].clone()))
                .collect();
            out.push(Atom::new(sig.name.clone(), args));
            let mut k = domains.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Ground basic fluent atoms, ordered by declaration then instance order.
    pub fn basic_fluent_instances(&self) -> Vec<Atom> {
        self.fluents
            .iter()
            .filter(|f| f.kind == FluentKind::Basic)
            .flat_map(|f| self.instances_of(&f.sig))
            .collect()
    }

    pub fn defined_fluent_instances(&self) -> Vec<Atom> {
        self.fluents
            .iter()
            .filter(|f| f.kind == FluentKind::Defined)
            .flat_map(|f| self.instances_of(&f.sig))
            .collect()
    }

    pub fn action_instances(&self, kind: ActionKind) -> Vec<Atom> {
        self.actions
            .iter()
            .filter(|a| a.kind == kind)
            .flat_map(|a| self.instances_of(&a.sig))
            .collect()
    }

    /// Checks that a ground atom's predicate is declared with the given
    /// kind predicate and that its arguments belong to the parameter sorts.
    pub fn check_ground_atom(&self, atom: &Atom) -> Result<SymbolKind> {
        let (kind, sig) = self
            .symbol(&atom.pred)
            .ok_or_else(|| LangError::UndeclaredSymbol(atom.pred.clone()))?;
        if sig.params.len() != atom.arity() {
            return Err(LangError::Arity {
                name: atom.pred.clone(),
                expected: sig.params.len(),
                found: atom.arity(),
            });
        }
        for (arg, sort) in atom.args.iter().zip(&sig.params) {
            let name = arg
                .as_const()
                .ok_or_else(|| LangError::Unground(atom.to_string()))?;
            if !self.sorts.is_instance_of(name, sort) {
                if self.sorts.sort_of(name).is_none() {
                    return Err(LangError::UndeclaredSymbol(name.to_string()));
                }
                return Err(LangError::SortMismatch {
                    term: name.to_string(),
                    sort: sort.clone(),
                });
            }
        }
        Ok(kind)
    }
}

/// Observation record `obs(fluent, value, step)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    pub fluent: Atom,
    pub value: bool,
    pub step: u32,
}

/// Occurrence record `hpd(action, step)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Happened {
    pub action: Atom,
    pub step: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub observations: Vec<Observation>,
    pub happened: Vec<Happened>,
    pub defaults: Vec<InitialDefault>,
}

impl History {
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty() && self.happened.is_empty() && self.defaults.is_empty()
    }

    /// Largest step mentioned by a record, if any.
    pub fn last_step(&self) -> Option<u32> {
        let o = self.observations.iter().map(|o| o.step);
        let h = self.happened.iter().map(|h| h.step);
        o.chain(h).max()
    }

    pub fn observe(&mut self, fluent: Atom, value: bool, step: u32) {
        let rec = Observation { fluent, value, step };
        if !self.observations.contains(&rec) {
            self.observations.push(rec);
        }
    }

    pub fn happened(&mut self, action: Atom, step: u32) {
        let rec = Happened { action, step };
        if !self.happened.contains(&rec) {
            self.happened.push(rec);
        }
    }
}

/// Scripted exogenous event applied by the simulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptedEvent {
    pub action: Atom,
    pub step: u32,
    /// Reported events are announced to the agent (e.g. a human saying they
    /// unlocked a door) and committed to its history.
    pub reported: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub history: History,
    pub goal: Vec<Literal>,
    pub script: Vec<ScriptedEvent>,
    /// Ground-truth literals of the initial world.
    pub truth: Vec<Literal>,
    pub noise: Option<String>,
}

/// Head-only CR rule metadata.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CrInfo {
    pub priority: i64,
}

/// A logic-program rule. An empty head is a constraint; a two-literal head
/// is a disjunction of a literal and its complement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: usize,
    pub head: Vec<Literal>,
    pub pos: Vec<Literal>,
    pub neg: Vec<Literal>,
    pub cmps: Vec<Comparison>,
    pub cr: Option<CrInfo>,
    /// Provenance: source statement or axiom schema.
    pub tag: String,
}

impl Rule {
    pub fn new(head: Vec<Literal>, pos: Vec<Literal>, neg: Vec<Literal>) -> Self {
        Rule {
            id: 0,
            head,
            pos,
            neg,
            cmps: vec![],
            cr: None,
            tag: String::new(),
        }
    }

    pub fn fact(head: Literal) -> Self {
        Rule::new(vec![head], vec![], vec![])
    }

    pub fn with_cmps(mut self, cmps: Vec<Comparison>) -> Self {
        self.cmps = cmps;
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn as_cr(mut self, priority: i64) -> Self {
        self.cr = Some(CrInfo { priority });
        self
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        self.head.len() == 1 && self.pos.is_empty() && self.neg.is_empty() && self.cmps.is_empty() && self.cr.is_none()
    }

    /// Variables in order of first occurrence, with any annotation seen.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen: Vec<Var> = Vec::new();
        let mut all = Vec::new();
        for l in self.head.iter().chain(&self.pos).chain(&self.neg) {
            l.atom.args.iter().for_each(|a| a.collect_vars(&mut all));
        }
        for c in &self.cmps {
            c.lhs.collect_vars(&mut all);
            c.rhs.collect_vars(&mut all);
        }
        for v in all {
            match seen.iter_mut().find(|s| s.name == v.name) {
                Some(s) => {
                    if s.sort.is_none() {
                        s.sort = v.sort.clone();
                    }
                }
                None => seen.push(v.clone()),
            }
        }
        seen
    }

    /// Safety: every variable occurs in a positive body literal or carries a
    /// sort annotation somewhere in the rule.
    pub fn check_safety(&self) -> Result<()> {
        let mut bound: Vec<&Var> = Vec::new();
        for l in &self.pos {
            l.atom.args.iter().for_each(|a| a.collect_vars(&mut bound));
        }
        for v in self.vars() {
            let ok = v.sort.is_some() || bound.iter().any(|b| b.name == v.name);
            if !ok {
                return Err(LangError::Unsafe {
                    var: v.name.clone(),
                    rule: self.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// A (non-ground) logic program over a sort hierarchy.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub sorts: SortHierarchy,
    /// Closed-world predicates whose facts are fixed before grounding.
    pub statics: Vec<String>,
    /// Predicate signatures used to infer sorts of unannotated variables.
    pub signatures: Vec<PredSig>,
    pub horizon: u32,
}

impl Program {
    pub fn push(&mut self, rule: Rule) {
        let mut rule = rule;
        rule.id = self.rules.len();
        self.rules.push(rule);
    }

    pub fn extend(&mut self, rules: impl IntoIterator<Item = Rule>) {
        for r in rules {
            self.push(r);
        }
    }

    pub fn is_static(&self, pred: &str) -> bool {
        self.statics.iter().any(|s| s == pred)
    }

    pub fn signature(&self, pred: &str, arity: usize) -> Option<&PredSig> {
        self.signatures
            .iter()
            .find(|s| s.name == pred && s.params.len() == arity)
    }
}
