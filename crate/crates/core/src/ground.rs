//! Grounding: instantiate rule variables over their sorts and intern the
//! resulting ground literals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::lang::{Atom, Comparison, LangError, Literal, Program, Rule, Term};

pub type AtomId = u32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroundError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("grounding exceeded the memory guard: {atoms} atoms, {rules} rules")]
    Resource { atoms: usize, rules: usize },
    #[error("rule derives static predicate `{0}`")]
    StaticHead(String),
    #[error("bad ground-program line {line}: {msg}")]
    Format { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: Vec<AtomId>,
    pub pos: Vec<AtomId>,
    pub neg: Vec<AtomId>,
    /// Priority bucket if this is a CR rule.
    pub cr: Option<i64>,
    /// Index into [`GroundProgram::tags`].
    pub tag: u32,
}

impl GroundRule {
    pub fn is_cr(&self) -> bool {
        self.cr.is_some()
    }
}

/// Variable-free program over interned literals. A classically negated
/// literal `-p` is its own atom; [`GroundProgram::complement`] pairs them.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    atoms: Vec<Literal>,
    index: HashMap<Literal, AtomId>,
    complement: Vec<Option<AtomId>>,
    pub rules: Vec<GroundRule>,
    pub tags: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub atoms: usize,
    pub rules: usize,
    pub cr_rules: usize,
}

impl GroundProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, lit: Literal) -> AtomId {
        if let Some(&id) = self.index.get(&lit) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        let comp = self.index.get(&lit.complement()).copied();
        self.complement.push(comp);
        if let Some(c) = comp {
            self.complement[c as usize] = Some(id);
        }
        self.index.insert(lit.clone(), id);
        self.atoms.push(lit);
        id
    }

    pub fn lookup(&self, lit: &Literal) -> Option<AtomId> {
        self.index.get(lit).copied()
    }

    pub fn literal(&self, id: AtomId) -> &Literal {
        &self.atoms[id as usize]
    }

    pub fn complement(&self, id: AtomId) -> Option<AtomId> {
        self.complement[id as usize]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (AtomId, &Literal)> {
        self.atoms.iter().enumerate().map(|(i, l)| (i as AtomId, l))
    }

    pub fn tag_id(&mut self, tag: &str) -> u32 {
        if let Some(i) = self.tags.iter().position(|t| t == tag) {
            return i as u32;
        }
        self.tags.push(tag.to_string());
        (self.tags.len() - 1) as u32
    }

    pub fn tag(&self, rule: &GroundRule) -> &str {
        self.tags.get(rule.tag as usize).map(String::as_str).unwrap_or("")
    }

    pub fn add_rule(&mut self, rule: GroundRule) -> usize {
        self.rules.push(rule);
        self.rules.len() - 1
    }

    pub fn cr_rules(&self) -> impl Iterator<Item = (usize, &GroundRule)> {
        self.rules.iter().enumerate().filter(|(_, r)| r.is_cr())
    }

    pub fn stats(&self) -> Stats {
        Stats {
            atoms: self.atoms.len(),
            rules: self.rules.len(),
            cr_rules: self.rules.iter().filter(|r| r.is_cr()).count(),
        }
    }

    /// Drops rules that can never fire and literals whose value is fixed.
    ///
    /// An atom is possibly derivable if it heads a rule whose positive body is
    /// possibly derivable. Rules depending on underivable atoms are removed,
    /// `not a` for underivable `a` is dropped, and facts are removed from
    /// positive bodies. Rule order is preserved.
    pub fn simplify(&mut self) {
        loop {
            let n = self.atoms.len();
            let mut derivable = vec![false; n];
            let mut changed = true;
            while changed {
                changed = false;
                for r in &self.rules {
                    if r.pos.iter().all(|&a| derivable[a as usize]) {
                        for &h in &r.head {
                            if !derivable[h as usize] {
                                derivable[h as usize] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            let mut fact = vec![false; n];
            for r in &self.rules {
                if r.head.len() == 1 && r.pos.is_empty() && r.neg.is_empty() && r.cr.is_none() {
                    fact[r.head[0] as usize] = true;
                }
            }
            let before: usize = self.rules.iter().map(|r| 1 + r.pos.len() + r.neg.len()).sum();
            let mut kept = Vec::with_capacity(self.rules.len());
            for mut r in std::mem::take(&mut self.rules) {
                if r.pos.iter().any(|&a| !derivable[a as usize]) || r.neg.iter().any(|&a| fact[a as usize]) {
                    continue;
                }
                r.neg.retain(|&a| derivable[a as usize]);
                let is_fact = r.head.len() == 1 && r.pos.is_empty() && r.neg.is_empty() && r.cr.is_none();
                if !is_fact {
                    r.pos.retain(|&a| !fact[a as usize]);
                }
                kept.push(r);
            }
            let mut seen = HashSet::new();
            kept.retain(|r| seen.insert(canonical(r)));
            self.rules = kept;
            let after: usize = self.rules.iter().map(|r| 1 + r.pos.len() + r.neg.len()).sum();
            if after == before {
                break;
            }
        }
    }

    /// Flat numeric dump: an `atom` line per interned literal, then one
    /// `rule heads ; pos ; neg ; flag` line per rule.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let st = self.stats();
        let _ = writeln!(out, "% ground program: {} atoms, {} rules, {} cr", st.atoms, st.rules, st.cr_rules);
        for (id, lit) in self.atoms() {
            let _ = writeln!(out, "atom {id} {lit}");
        }
        for r in &self.rules {
            let ids = |v: &[AtomId]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
            let flag = match r.cr {
                Some(p) => format!("cr@{p}"),
                None => "-".to_string(),
            };
            let _ = writeln!(out, "rule {} ; {} ; {} ; {}", ids(&r.head), ids(&r.pos), ids(&r.neg), flag);
        }
        out
    }

    /// Reads the format written by [`GroundProgram::dump`].
    pub fn parse_dump(text: &str) -> Result<GroundProgram, GroundError> {
        let mut gp = GroundProgram::new();
        let untagged = gp.tag_id("");
        for (i, line) in text.lines().enumerate() {
            let err = |msg: &str| GroundError::Format {
                line: i + 1,
                msg: msg.to_string(),
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("atom ") {
                let (id, text) = rest.split_once(' ').ok_or_else(|| err("expected `atom <id> <literal>`"))?;
                let id: usize = id.parse().map_err(|_| err("bad atom id"))?;
                if id != gp.atom_count() {
                    return Err(err("atom ids must be dense and ascending"));
                }
                let prog = crate::lang::parse_program(&format!("{text}."))
                    .map_err(|e| err(&e.to_string()))?;
                let lit = prog
                    .rules
                    .first()
                    .and_then(|r| r.head.first())
                    .cloned()
                    .ok_or_else(|| err("expected a literal"))?;
                gp.intern(lit);
            } else if let Some(rest) = line.strip_prefix("rule") {
                let parts: Vec<&str> = rest.split(';').collect();
                if parts.len() != 4 {
                    return Err(err("expected 4 `;`-separated fields"));
                }
                let ids = |s: &str| -> Result<Vec<AtomId>, GroundError> {
                    s.split_whitespace()
                        .map(|t| {
                            let id: AtomId = t.parse().map_err(|_| err("bad atom id"))?;
                            if id as usize >= gp.atom_count() {
                                return Err(err("atom id out of range"));
                            }
                            Ok(id)
                        })
                        .collect()
                };
                let head = ids(parts[0])?;
                let pos = ids(parts[1])?;
                let neg = ids(parts[2])?;
                let flag = parts[3].trim();
                let cr = match flag {
                    "-" => None,
                    f => Some(
                        f.strip_prefix("cr@")
                            .and_then(|p| p.parse().ok())
                            .ok_or_else(|| err("bad flag"))?,
                    ),
                };
                if head.len() > 2 || (cr.is_some() && head.len() != 1) {
                    return Err(err("bad head"));
                }
                if head.len() == 2 && gp.complement(head[0]) != Some(head[1]) {
                    return Err(err("disjunctive head must be a complementary pair"));
                }
                gp.add_rule(GroundRule {
                    head,
                    pos,
                    neg,
                    cr,
                    tag: untagged,
                });
            } else {
                return Err(err("expected `atom` or `rule`"));
            }
        }
        Ok(gp)
    }

    /// Human-readable form of a ground rule.
    pub fn show_rule(&self, r: &GroundRule) -> String {
        let mut s = String::new();
        let heads: Vec<String> = r.head.iter().map(|&h| self.literal(h).to_string()).collect();
        s.push_str(&heads.join(" | "));
        let mut body: Vec<String> = r.pos.iter().map(|&a| self.literal(a).to_string()).collect();
        body.extend(r.neg.iter().map(|&a| format!("not {}", self.literal(a))));
        if r.cr.is_some() {
            s.push_str(" +-");
        } else if !body.is_empty() {
            s.push_str(if r.head.is_empty() { ":-" } else { " :-" });
        }
        if !body.is_empty() {
            s.push(' ');
            s.push_str(&body.join(", "));
        }
        s.push('.');
        s
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.show_rule(r))?;
        }
        Ok(())
    }
}

fn canonical(r: &GroundRule) -> (Vec<AtomId>, Vec<AtomId>, Vec<AtomId>, Option<i64>) {
    let mut h = r.head.clone();
    let mut p = r.pos.clone();
    let mut n = r.neg.clone();
    h.sort_unstable();
    p.sort_unstable();
    n.sort_unstable();
    (h, p, n, r.cr)
}

#[derive(Clone, Copy, Debug)]
pub struct GroundConfig {
    /// Memory guard on the number of ground rules.
    pub max_rules: usize,
    /// Drop instances whose positive body has a false static atom.
    pub prune_statics: bool,
}

impl Default for GroundConfig {
    fn default() -> Self {
        GroundConfig {
            max_rules: 5_000_000,
            prune_statics: true,
        }
    }
}

/// Grounds a program with the default configuration.
pub fn ground(p: &Program) -> Result<GroundProgram, GroundError> {
    ground_with(p, GroundConfig::default())
}

enum Check {
    StaticPos(Atom),
    StaticNeg(Atom),
    Cmp(Comparison),
}

struct Grounder<'a> {
    prog: &'a Program,
    sorts: HashMap<String, Vec<Term>>,
    facts: HashSet<Atom>,
}

pub fn ground_with(p: &Program, cfg: GroundConfig) -> Result<GroundProgram, GroundError> {
    let mut g = Grounder {
        prog: p,
        sorts: p.sorts.instance_table(),
        facts: HashSet::new(),
    };
    let mut gp = GroundProgram::new();
    let mut seen = HashSet::new();
    // Static facts first: they fix the closed-world relations used for pruning.
    let mut static_facts: Vec<(Atom, &str)> = Vec::new();
    for r in &p.rules {
        let static_head = r.head.iter().any(|l| p.is_static(&l.atom.pred));
        if !static_head {
            continue;
        }
        let is_fact_shape = r.head.len() == 1 && !r.head[0].neg && r.pos.is_empty() && r.neg.is_empty() && r.cr.is_none();
        if !is_fact_shape {
            return Err(GroundError::StaticHead(r.head[0].atom.pred.clone()));
        }
        let vars = g.rule_vars(r)?;
        let checks = g.schedule(r, &vars, false);
        let mut binding = BTreeMap::new();
        let mut out = Vec::new();
        g.enumerate(&vars, &checks, 0, &mut binding, &mut |b| {
            out.push(r.head[0].atom.subst(b));
            Ok(())
        })?;
        for a in out {
            static_facts.push((a, &r.tag));
        }
    }
    for (a, _) in &static_facts {
        g.facts.insert(a.clone());
    }
    for (a, tag) in static_facts {
        let id = gp.intern(Literal::pos(a));
        let tag = gp.tag_id(tag);
        let rule = GroundRule {
            head: vec![id],
            pos: vec![],
            neg: vec![],
            cr: None,
            tag,
        };
        if seen.insert(canonical(&rule)) {
            gp.add_rule(rule);
        }
    }
    for r in &p.rules {
        if r.head.iter().any(|l| p.is_static(&l.atom.pred)) {
            continue;
        }
        let vars = g.rule_vars(r)?;
        let checks = g.schedule(r, &vars, cfg.prune_statics);
        let tag = gp.tag_id(&r.tag);
        let mut binding = BTreeMap::new();
        let mut err = None;
        g.enumerate(&vars, &checks, 0, &mut binding, &mut |b| {
            let ground_lit = |l: &Literal| l.subst(b);
            let mut rule = GroundRule {
                head: vec![],
                pos: vec![],
                neg: vec![],
                cr: r.cr.as_ref().map(|c| c.priority),
                tag,
            };
            for l in &r.head {
                rule.head.push(gp.intern(ground_lit(l)));
            }
            for l in &r.pos {
                if !l.neg && p.is_static(&l.atom.pred) {
                    if !cfg.prune_statics && !g.facts.contains(&l.atom.subst(b)) {
                        // unpruned: keep the (false) static atom in the body
                        rule.pos.push(gp.intern(ground_lit(l)));
                    }
                    continue;
                }
                rule.pos.push(gp.intern(ground_lit(l)));
            }
            for l in &r.neg {
                if !l.neg && p.is_static(&l.atom.pred) {
                    if !cfg.prune_statics && g.facts.contains(&l.atom.subst(b)) {
                        rule.neg.push(gp.intern(ground_lit(l)));
                    }
                    continue;
                }
                rule.neg.push(gp.intern(ground_lit(l)));
            }
            if rule.head.len() == 2 && rule.head[0] == rule.head[1] {
                rule.head.pop();
            }
            if seen.insert(canonical(&rule)) {
                gp.add_rule(rule);
            }
            if gp.rules.len() > cfg.max_rules {
                err = Some(GroundError::Resource {
                    atoms: gp.atom_count(),
                    rules: gp.rules.len(),
                });
                return Err(());
            }
            Ok(())
        })
        .map_err(|_| err.take().expect("grounding aborted without error"))?;
    }
    Ok(gp)
}

impl<'a> Grounder<'a> {
    /// Variables of a rule paired with their instance lists.
    fn rule_vars(&self, r: &Rule) -> Result<Vec<(String, Vec<Term>)>, GroundError> {
        let mut out = Vec::new();
        for v in r.vars() {
            let sort = match &v.sort {
                Some(s) => Some(s.clone()),
                None => self.infer_sort(r, &v.name),
            };
            let sort = sort.ok_or_else(|| LangError::Unsorted(v.name.clone()))?;
            let insts = self
                .sorts
                .get(&sort)
                .cloned()
                .ok_or_else(|| LangError::UndeclaredSort(sort.clone()))?;
            out.push((v.name.clone(), insts));
        }
        Ok(out)
    }

    fn infer_sort(&self, r: &Rule, var: &str) -> Option<String> {
        for l in r.head.iter().chain(&r.pos).chain(&r.neg) {
            if let Some(sig) = self.prog.signature(&l.atom.pred, l.atom.arity()) {
                for (t, s) in l.atom.args.iter().zip(&sig.params) {
                    if matches!(t, Term::Var(v) if v.name == var) {
                        return Some(s.clone());
                    }
                }
            }
        }
        None
    }

    /// Places each static/comparison check right after its last variable is bound.
    fn schedule(&self, r: &Rule, vars: &[(String, Vec<Term>)], prune: bool) -> Vec<Vec<Check>> {
        let mut at: Vec<Vec<Check>> = (0..=vars.len()).map(|_| Vec::new()).collect();
        let slot = |names: Vec<String>| -> usize {
            names
                .iter()
                .map(|n| vars.iter().position(|(v, _)| v == n).map_or(0, |i| i + 1))
                .max()
                .unwrap_or(0)
        };
        let atom_vars = |a: &Atom| a.vars().into_iter().map(|v| v.name.clone()).collect::<Vec<_>>();
        if prune {
            for l in &r.pos {
                if !l.neg && self.prog.is_static(&l.atom.pred) {
                    at[slot(atom_vars(&l.atom))].push(Check::StaticPos(l.atom.clone()));
                }
            }
            for l in &r.neg {
                if !l.neg && self.prog.is_static(&l.atom.pred) {
                    at[slot(atom_vars(&l.atom))].push(Check::StaticNeg(l.atom.clone()));
                }
            }
        }
        for c in &r.cmps {
            let mut vs = Vec::new();
            c.lhs.collect_vars(&mut vs);
            c.rhs.collect_vars(&mut vs);
            let names = vs.into_iter().map(|v| v.name.clone()).collect();
            at[slot(names)].push(Check::Cmp(c.clone()));
        }
        at
    }

    fn passes(&self, checks: &[Check], b: &BTreeMap<String, Term>) -> bool {
        checks.iter().all(|c| match c {
            Check::StaticPos(a) => self.facts.contains(&a.subst(b)),
            Check::StaticNeg(a) => !self.facts.contains(&a.subst(b)),
            Check::Cmp(c) => c.subst(b).eval().unwrap_or(false),
        })
    }

    fn enumerate(
        &self,
        vars: &[(String, Vec<Term>)],
        checks: &[Vec<Check>],
        k: usize,
        binding: &mut BTreeMap<String, Term>,
        emit: &mut dyn FnMut(&BTreeMap<String, Term>) -> Result<(), ()>,
    ) -> Result<(), GroundError> {
        self.enum_inner(vars, checks, k, binding, emit)
            .map_err(|_| GroundError::Resource { atoms: 0, rules: 0 })
    }

    fn enum_inner(
        &self,
        vars: &[(String, Vec<Term>)],
        checks: &[Vec<Check>],
        k: usize,
        binding: &mut BTreeMap<String, Term>,
        emit: &mut dyn FnMut(&BTreeMap<String, Term>) -> Result<(), ()>,
    ) -> Result<(), ()> {
        if !self.passes(&checks[k], binding) {
            return Ok(());
        }
        if k == vars.len() {
            return emit(binding);
        }
        let (name, insts) = &vars[k];
        for t in insts {
            binding.insert(name.clone(), t.clone());
            self.enum_inner(vars, checks, k + 1, binding, emit)?;
        }
        binding.remove(name);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn gp(text: &str) -> GroundProgram {
        ground(&parse_program(text).unwrap()).unwrap()
    }

    #[test]
    fn sort_enumeration() {
        let g = gp("#sort s. #instance a, b : s. p(X:s) :- q(X:s).");
        assert_eq!(g.stats().rules, 2);
    }

    #[test]
    fn signature_inference() {
        let g = gp("#sort s. #instance a, b : s. #pred q(s). p(X) :- q(X).");
        assert_eq!(g.stats().rules, 2);
    }

    #[test]
    fn empty_sort_vanishes() {
        let g = gp("#sort s. p(X:s) :- q(X:s).");
        assert_eq!(g.stats(), Stats { atoms: 0, rules: 0, cr_rules: 0 });
    }

    #[test]
    fn stats_examples() {
        assert_eq!(gp("").stats(), Stats { atoms: 0, rules: 0, cr_rules: 0 });
        assert_eq!(gp("a :- not b. b :- not a.").stats(), Stats { atoms: 2, rules: 2, cr_rules: 0 });
        assert_eq!(gp("q +- . :- not q.").stats().cr_rules, 1);
    }

    #[test]
    fn static_pruning() {
        let g = gp("#sort s. #instance a, b, c : s. #static e(s, s). e(a, b). p(Y:s) :- e(X:s, Y:s), not f(X:s).");
        // e(a,b) fact + one instance p(b) :- not f(a).
        assert_eq!(g.stats().rules, 2);
        let text = g.to_string();
        assert!(text.contains("p(b) :- not f(a)."), "{text}");
    }

    #[test]
    fn dedup_and_comparisons() {
        let g = gp("#sort s. #instance a, b : s. p(X:s) :- q(X:s), X != Y:s. r :- q(a), a = a. r :- q(a).");
        // p(a):-q(a) (Y=b), p(b):-q(b) (Y=a), r:-q(a) once
        assert_eq!(g.stats().rules, 3);
    }

    #[test]
    fn unsorted_variable_is_an_error() {
        let p = parse_program("p(X) :- q(X).").unwrap();
        assert!(matches!(ground(&p), Err(GroundError::Lang(LangError::Unsorted(_)))));
    }

    #[test]
    fn memory_guard() {
        let p = parse_program("#sort s. #instance a, b, c : s. p(X:s, Y:s, Z:s).").unwrap();
        let err = ground_with(&p, GroundConfig { max_rules: 5, prune_statics: true }).unwrap_err();
        assert!(matches!(err, GroundError::Resource { .. }));
    }

    #[test]
    fn dump_round_trip() {
        let g = gp("a | -a. b :- a, not c. q +- b @2. :- b, -a.");
        let back = GroundProgram::parse_dump(&g.dump()).unwrap();
        assert_eq!(back.dump(), g.dump());
        assert_eq!(back.complement(0), Some(1));
    }

    #[test]
    fn simplify_removes_dead_rules() {
        let mut g = gp("a. b :- a, not c. d :- e. f :- not a.");
        g.simplify();
        let text = g.to_string();
        assert!(text.contains("a."));
        assert!(text.contains("b."));
        assert!(!text.contains("d :-"));
        assert!(!text.contains("f :-"));
    }
}
