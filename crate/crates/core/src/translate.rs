//! Compiles a system description and history into a CR-Prolog program over
//! reified fluents and actions: `holds(F, I)`, `occurs(A, I)`.

use crate::lang::{
    ActionKind, Atom, Body, CmpOp, Comparison, FluentKind, History, InitialDefault, LangError, Literal, Program, Rule,
    Statement, SymbolKind, SystemDescription, Term, CLASS_SORT,
};

/// CR priority of hypothesized exogenous occurrences. Lower values are
/// stronger, so this bucket is minimized after every default bucket.
pub const EXOGENOUS_PRIORITY: i64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosisMode {
    Off,
    /// Disjunctive guess over exogenous occurrences: every explanation.
    All,
    /// CR rule per exogenous occurrence: cardinality-minimal explanations.
    MinimalCr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslationConfig {
    pub horizon: u32,
    pub diagnosis: DiagnosisMode,
    /// Build the atemporal scene-explanation program instead of the
    /// temporal one.
    pub scene: bool,
    /// First step that is not yet part of the past. Exogenous events are
    /// hypothesized only before it and plans only from it on.
    pub current_step: u32,
}

impl TranslationConfig {
    pub fn new(horizon: u32) -> Self {
        TranslationConfig {
            horizon,
            diagnosis: DiagnosisMode::Off,
            scene: false,
            current_step: 0,
        }
    }

    pub fn with_diagnosis(mut self, mode: DiagnosisMode, current_step: u32) -> Self {
        self.diagnosis = mode;
        self.current_step = current_step;
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TranslateError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("history record at step {step} exceeds horizon {horizon}")]
    BeyondHorizon { step: u32, horizon: u32 },
    #[error("empty goal")]
    EmptyGoal,
    #[error("goal literal `{0}` is not a ground fluent literal")]
    BadGoal(String),
    #[error("attribute observation for unknown object `{0}`")]
    UnknownObject(String),
}

pub type Result<T> = std::result::Result<T, TranslateError>;

const I: &str = "I_";
const J: &str = "J_";

fn var(name: &str, sort: &str) -> Term {
    Term::var(name, Some(sort))
}

fn step(n: u32) -> Term {
    Term::constant(n.to_string())
}

fn holds(fluent: Term, at: Term, neg: bool) -> Literal {
    Literal {
        atom: Atom::new("holds", vec![fluent, at]),
        neg,
    }
}

fn occurs(action: Term, at: Term) -> Literal {
    Literal::pos(Atom::new("occurs", vec![action, at]))
}

fn pred(name: &str, args: Vec<Term>) -> Literal {
    Literal::pos(Atom::new(name, args))
}

/// Rule bodies split into positive literals, default-negated literals and
/// comparisons. Negated statics are read under the closed-world assumption.
#[derive(Default)]
struct Parts {
    pos: Vec<Literal>,
    neg: Vec<Literal>,
    cmps: Vec<Comparison>,
}

impl Parts {
    fn rule(self, head: Vec<Literal>) -> Rule {
        Rule::new(head, self.pos, self.neg).with_cmps(self.cmps)
    }
}

fn temporal_body(sd: &SystemDescription, body: &Body, at: &Term) -> Parts {
    let mut p = Parts::default();
    for l in &body.lits {
        if sd.is_static(&l.atom.pred) {
            if l.neg {
                p.neg.push(Literal::pos(l.atom.clone()));
            } else {
                p.pos.push(l.clone());
            }
        } else {
            p.pos.push(holds(l.atom.to_term(), at.clone(), l.neg));
        }
    }
    p.cmps = body.cmps.clone();
    p
}

fn atemporal_body(sd: &SystemDescription, body: &Body) -> Parts {
    let mut p = Parts::default();
    for l in &body.lits {
        if sd.is_static(&l.atom.pred) && l.neg {
            p.neg.push(Literal::pos(l.atom.clone()));
        } else {
            p.pos.push(l.clone());
        }
    }
    p.cmps = body.cmps.clone();
    p
}

/// Sorts for steps and reified fluents/actions, added on top of the domain sorts.
fn add_meta_sorts(sd: &SystemDescription, prog: &mut Program, horizon: u32) -> Result<()> {
    let s = &mut prog.sorts;
    for name in [
        "step",
        "tstep",
        "fluent",
        "basic_fluent",
        "defined_fluent",
        "action",
        "agent_action",
        "exogenous_action",
    ] {
        s.add_sort(name);
    }
    s.add_subsort("tstep", "step")?;
    s.add_subsort("basic_fluent", "fluent")?;
    s.add_subsort("defined_fluent", "fluent")?;
    s.add_subsort("agent_action", "action")?;
    s.add_subsort("exogenous_action", "action")?;
    for i in 0..horizon {
        s.add_instance_term(step(i), "tstep")?;
    }
    s.add_instance_term(step(horizon), "step")?;
    for f in sd.basic_fluent_instances() {
        s.add_instance_term(f.to_term(), "basic_fluent")?;
    }
    for f in sd.defined_fluent_instances() {
        s.add_instance_term(f.to_term(), "defined_fluent")?;
    }
    for a in sd.action_instances(ActionKind::Agent) {
        s.add_instance_term(a.to_term(), "agent_action")?;
    }
    for a in sd.action_instances(ActionKind::Exogenous) {
        s.add_instance_term(a.to_term(), "exogenous_action")?;
    }
    Ok(())
}

fn base_program(sd: &SystemDescription) -> Program {
    let mut prog = Program {
        sorts: sd.sorts.clone(),
        ..Program::default()
    };
    prog.statics = sd.statics.iter().map(|s| s.name.clone()).collect();
    for fact in &sd.static_facts {
        prog.push(Rule::fact(Literal::pos(fact.clone())).with_tag("static"));
    }
    prog
}

fn all_defaults(sd: &SystemDescription, h: &History) -> Vec<InitialDefault> {
    let mut out: Vec<InitialDefault> = sd.defaults.clone();
    for d in &h.defaults {
        if !out.iter().any(|o| o.id == d.id) {
            out.push(d.clone());
        }
    }
    out
}

fn is_attribute(sd: &SystemDescription, pred: &str) -> bool {
    matches!(sd.symbol(pred), Some((SymbolKind::Attribute, _)))
}

/// Builds Π(D, H) over steps `0..=cfg.horizon`, or the scene program when
/// `cfg.scene` is set.
pub fn translate(sd: &SystemDescription, h: &History, cfg: TranslationConfig) -> Result<Program> {
    if cfg.scene {
        return scene_program(sd, h, cfg.current_step);
    }
    let n = cfg.horizon;
    for s in h.observations.iter().map(|o| o.step).chain(h.happened.iter().map(|x| x.step)) {
        if s > n {
            return Err(TranslateError::BeyondHorizon { step: s, horizon: n });
        }
    }
    for o in &h.observations {
        if !is_attribute(sd, &o.fluent.pred) {
            sd.check_ground_atom(&o.fluent)?;
        }
    }
    for x in &h.happened {
        sd.check_ground_atom(&x.action)?;
    }

    let mut prog = base_program(sd);
    prog.horizon = n;
    add_meta_sorts(sd, &mut prog, n)?;
    for s in ["next", "obs", "hpd", "plan_step", "diag_step", "exo_guess_step"] {
        prog.statics.push(s.to_string());
    }
    for i in 0..n {
        prog.push(Rule::fact(pred("next", vec![step(i), step(i + 1)])).with_tag("next"));
    }
    let (ti, tj) = (var(I, "tstep"), var(J, "step"));
    let si = var(I, "step");

    for (k, st) in sd.statements.iter().enumerate() {
        let tag = format!("law {k}");
        match st {
            Statement::Causal { action, head, body } => {
                let mut p = temporal_body(sd, body, &ti);
                p.pos.insert(0, occurs(action.to_term(), ti.clone()));
                p.pos.push(pred("next", vec![ti.clone(), tj.clone()]));
                prog.push(p.rule(vec![holds(head.atom.to_term(), tj.clone(), head.neg)]).with_tag(tag));
            }
            Statement::Constraint { head, body } => {
                let p = temporal_body(sd, body, &si);
                prog.push(p.rule(vec![holds(head.atom.to_term(), si.clone(), head.neg)]).with_tag(tag));
            }
            Statement::Impossible { actions, body } => {
                let mut p = temporal_body(sd, body, &ti);
                for (m, a) in actions.iter().enumerate() {
                    p.pos.insert(m, occurs(a.to_term(), ti.clone()));
                }
                prog.push(p.rule(vec![]).with_tag(tag));
            }
        }
    }

    // Inertia for basic fluents, both polarities.
    let fb = var("F", "basic_fluent");
    for neg in [false, true] {
        prog.push(
            Rule::new(
                vec![holds(fb.clone(), tj.clone(), neg)],
                vec![holds(fb.clone(), ti.clone(), neg), pred("next", vec![ti.clone(), tj.clone()])],
                vec![holds(fb.clone(), tj.clone(), !neg)],
            )
            .with_tag("inertia"),
        );
    }
    // Closed world for defined fluents.
    let fd = var("F", "defined_fluent");
    prog.push(
        Rule::new(vec![holds(fd.clone(), si.clone(), true)], vec![], vec![holds(fd, si.clone(), false)])
            .with_tag("cwa defined"),
    );
    // Closed world for actions outside the plan and diagnosis guesses.
    let aa = var("A", "agent_action");
    prog.push(
        Rule::new(
            vec![Literal::neg(occurs(aa.clone(), ti.clone()).atom)],
            vec![],
            vec![occurs(aa, ti.clone()), pred("plan_step", vec![ti.clone()])],
        )
        .with_tag("cwa action"),
    );
    let ea = var("E", "exogenous_action");
    prog.push(
        Rule::new(
            vec![Literal::neg(occurs(ea.clone(), ti.clone()).atom)],
            vec![],
            vec![occurs(ea.clone(), ti.clone()), pred("exo_guess_step", vec![ti.clone()])],
        )
        .with_tag("cwa action"),
    );
    // Awareness: every basic fluent is initially true or false.
    prog.push(
        Rule::new(
            vec![holds(fb.clone(), step(0), false), holds(fb.clone(), step(0), true)],
            vec![],
            vec![],
        )
        .with_tag("awareness"),
    );
    // Reality checks.
    let f = var("F", "fluent");
    for (value, neg) in [("true", true), ("false", false)] {
        prog.push(
            Rule::new(
                vec![],
                vec![
                    pred("obs", vec![f.clone(), Term::constant(value), si.clone()]),
                    holds(f.clone(), si.clone(), neg),
                ],
                vec![],
            )
            .with_tag("reality check"),
        );
    }
    let a = var("A", "action");
    prog.push(
        Rule::new(vec![occurs(a.clone(), ti.clone())], vec![pred("hpd", vec![a, ti.clone()])], vec![]).with_tag("hpd"),
    );

    for d in all_defaults(sd, h) {
        let ab = pred("ab_default", vec![Term::constant(d.id.clone())]);
        let mut p = temporal_body(sd, &d.body, &step(0));
        p.neg.push(ab.clone());
        prog.push(p.rule(vec![holds(d.head.atom.to_term(), step(0), d.head.neg)]).with_tag(format!("default {}", d.id)));
        let p = temporal_body(sd, &d.body, &step(0));
        prog.push(p.rule(vec![ab]).as_cr(d.priority).with_tag(format!("default {}", d.id)));
    }

    let diag_steps = 0..cfg.current_step.min(n);
    match cfg.diagnosis {
        DiagnosisMode::Off => {}
        DiagnosisMode::All => {
            for i in diag_steps {
                prog.push(Rule::fact(pred("exo_guess_step", vec![step(i)])).with_tag("diagnosis"));
            }
            prog.push(
                Rule::new(
                    vec![
                        occurs(ea.clone(), ti.clone()),
                        Literal::neg(occurs(ea.clone(), ti.clone()).atom),
                    ],
                    vec![pred("exo_guess_step", vec![ti.clone()])],
                    vec![],
                )
                .with_tag("diagnosis"),
            );
        }
        DiagnosisMode::MinimalCr => {
            for i in diag_steps {
                prog.push(Rule::fact(pred("diag_step", vec![step(i)])).with_tag("diagnosis"));
            }
            prog.push(
                Rule::new(
                    vec![occurs(ea.clone(), ti.clone())],
                    vec![pred("diag_step", vec![ti.clone()])],
                    vec![],
                )
                .as_cr(EXOGENOUS_PRIORITY)
                .with_tag("diagnosis"),
            );
        }
    }
    if cfg.diagnosis != DiagnosisMode::Off {
        prog.push(
            Rule::new(
                vec![pred("expl", vec![ea.clone(), ti.clone()])],
                vec![occurs(ea.clone(), ti.clone())],
                vec![pred("hpd", vec![ea, ti.clone()])],
            )
            .with_tag("explanation"),
        );
    }

    for o in &h.observations {
        if is_attribute(sd, &o.fluent.pred) {
            continue;
        }
        let value = if o.value { "true" } else { "false" };
        prog.push(
            Rule::fact(pred("obs", vec![o.fluent.to_term(), Term::constant(value), step(o.step)])).with_tag("history"),
        );
    }
    for x in &h.happened {
        prog.push(Rule::fact(pred("hpd", vec![x.action.to_term(), step(x.step)])).with_tag("history"));
    }
    debug_assert!(prog.rules.iter().all(|r| r.check_safety().is_ok()));
    Ok(prog)
}

/// Adds the goal, its constraint, and action generation for every step from
/// `from` on that has no recorded agent action.
pub fn add_goal(
    sd: &SystemDescription,
    mut prog: Program,
    h: &History,
    goal: &[Literal],
    from: u32,
) -> Result<Program> {
    if goal.is_empty() {
        return Err(TranslateError::EmptyGoal);
    }
    for g in goal {
        if !g.atom.is_ground() {
            return Err(TranslateError::BadGoal(g.to_string()));
        }
        match sd.check_ground_atom(&g.atom)? {
            SymbolKind::Fluent(_) => {}
            _ => return Err(TranslateError::BadGoal(g.to_string())),
        }
    }
    let n = prog.horizon;
    let body: Vec<Literal> = goal.iter().map(|g| holds(g.atom.to_term(), step(n), g.neg)).collect();
    prog.push(Rule::new(vec![pred("goal_met", vec![])], body, vec![]).with_tag("goal"));
    prog.push(Rule::new(vec![], vec![], vec![pred("goal_met", vec![])]).with_tag("goal"));
    for i in from..n {
        let taken = h.happened.iter().any(|x| {
            x.step == i && matches!(sd.action(&x.action.pred).map(|a| a.kind), Some(ActionKind::Agent))
        });
        if !taken {
            prog.push(Rule::fact(pred("plan_step", vec![step(i)])).with_tag("plan"));
        }
    }
    let ti = var(I, "tstep");
    let aa = var("A", "agent_action");
    prog.push(
        Rule::new(
            vec![occurs(aa.clone(), ti.clone()), Literal::neg(occurs(aa, ti.clone()).atom)],
            vec![pred("plan_step", vec![ti.clone()])],
            vec![],
        )
        .with_tag("plan"),
    );
    let (a1, a2) = (var("A1", "agent_action"), var("A2", "agent_action"));
    prog.push(
        Rule::new(
            vec![],
            vec![
                pred("plan_step", vec![ti.clone()]),
                occurs(a1.clone(), ti.clone()),
                occurs(a2.clone(), ti),
            ],
            vec![],
        )
        .with_cmps(vec![Comparison {
            lhs: a1,
            op: CmpOp::Ne,
            rhs: a2,
        }])
        .with_tag("sequential"),
    );
    Ok(prog)
}

/// Objects that appear as the subject of an attribute observation.
pub fn unlabeled_objects(sd: &SystemDescription, h: &History) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for o in &h.observations {
        if is_attribute(sd, &o.fluent.pred) {
            if let Some(name) = o.fluent.args.first().and_then(Term::as_const) {
                if !out.iter().any(|x| x == name) {
                    out.push(name.to_string());
                }
            }
        }
    }
    out
}

fn scene_program(sd: &SystemDescription, h: &History, stage: u32) -> Result<Program> {
    let mut prog = base_program(sd);
    prog.statics.push("subclass".to_string());
    let facts: Vec<Literal> = h
        .observations
        .iter()
        .filter(|o| o.step <= stage)
        .map(|o| Literal {
            atom: o.fluent.clone(),
            neg: !o.value,
        })
        .collect();
    let objects: Vec<String> = unlabeled_objects(sd, h);
    add_scene_axioms(sd, prog, &facts, &objects)
}

/// Adds the class-labeling machinery, the attribute rules made individually
/// defeasible, atemporal state constraints, and observed facts.
pub fn add_scene_axioms(
    sd: &SystemDescription,
    mut prog: Program,
    observed: &[Literal],
    objects: &[String],
) -> Result<Program> {
    for l in observed {
        sd.check_ground_atom(&l.atom).map_err(|e| match e {
            LangError::UndeclaredSymbol(s) if sd.sorts.sort_of(&s).is_none() && s != l.atom.pred => {
                TranslateError::UnknownObject(s)
            }
            e => TranslateError::Lang(e),
        })?;
    }
    for o in objects {
        if sd.sorts.sort_of(o).is_none() {
            return Err(TranslateError::UnknownObject(o.clone()));
        }
    }
    if !prog.is_static("subclass") {
        prog.statics.push("subclass".to_string());
    }
    for l in observed {
        prog.push(Rule::fact(l.clone()).with_tag("observed"));
    }
    if objects.is_empty() {
        return Ok(prog);
    }
    for (c, parent) in &sd.classes {
        if let Some(p) = parent {
            prog.push(
                Rule::fact(pred("subclass", vec![Term::constant(c.clone()), Term::constant(p.clone())]))
                    .with_tag("class"),
            );
        }
    }
    let (o, c, p) = (var("O", "thing"), var("C", CLASS_SORT), var("P", CLASS_SORT));
    prog.push(
        Rule::new(vec![pred("member", vec![o.clone(), c.clone()])], vec![pred("is_a", vec![o.clone(), c.clone()])], vec![])
            .with_tag("class"),
    );
    prog.push(
        Rule::new(
            vec![pred("member", vec![o.clone(), p.clone()])],
            vec![pred("member", vec![o.clone(), c.clone()]), pred("subclass", vec![c.clone(), p])],
            vec![],
        )
        .with_tag("class"),
    );
    prog.push(
        Rule::new(vec![pred("class_known", vec![o.clone()])], vec![pred("is_a", vec![o, c.clone()])], vec![])
            .with_tag("class"),
    );
    for ob in objects {
        let ob = Term::constant(ob.clone());
        prog.push(
            Rule::new(vec![], vec![], vec![pred("class_known", vec![ob.clone()])]).with_tag("class reality check"),
        );
        prog.push(Rule::fact(pred("is_a", vec![ob, c.clone()])).as_cr(0).with_tag("class assignment"));
    }
    for r in &sd.attr_rules {
        let body_vars: Vec<Term> = r.body.vars().into_iter().map(|v| Term::Var(v.clone())).collect();
        let mut args = vec![Term::constant(r.id.clone())];
        let mut seen: Vec<String> = Vec::new();
        for v in body_vars {
            if let Term::Var(x) = &v {
                if seen.contains(&x.name) {
                    continue;
                }
                seen.push(x.name.clone());
            }
            args.push(v);
        }
        let relaxed = pred("relaxed", args);
        let mut p = atemporal_body(sd, &r.body);
        p.neg.push(relaxed.clone());
        prog.push(p.rule(vec![r.head.clone()]).with_tag(format!("attribute {}", r.id)));
        let p = atemporal_body(sd, &r.body);
        prog.push(p.rule(vec![relaxed]).as_cr(0).with_tag(format!("attribute {}", r.id)));
    }
    for a in &sd.attributes {
        if a.params.len() != 2 {
            continue;
        }
        let (x, v1, v2) = (var("X", &a.params[0]), var("V1", &a.params[1]), var("V2", &a.params[1]));
        prog.push(
            Rule::new(
                vec![Literal::neg(Atom::new(a.name.clone(), vec![x.clone(), v2.clone()]))],
                vec![pred(&a.name, vec![x, v1.clone()])],
                vec![],
            )
            .with_cmps(vec![Comparison {
                lhs: v1,
                op: CmpOp::Ne,
                rhs: v2,
            }])
            .with_tag("attribute uniqueness"),
        );
    }
    for (k, st) in sd.statements.iter().enumerate() {
        if let Statement::Constraint { head, body } = st {
            if sd.fluent(&head.atom.pred).map(|f| f.kind) == Some(FluentKind::Basic) {
                let p = atemporal_body(sd, body);
                prog.push(p.rule(vec![head.clone()]).with_tag(format!("law {k}")));
            }
        }
    }
    debug_assert!(prog.rules.iter().all(|r| r.check_safety().is_ok()));
    Ok(prog)
}
