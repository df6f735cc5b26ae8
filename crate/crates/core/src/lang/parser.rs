use std::collections::BTreeMap;

use super::lexer::{tokenize, Tok};
use super::*;

struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self> {
        Ok(Cursor {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(LangError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", tok.describe(), self.peek().describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = self.eat(&Tok::Minus);
        let pos = self.pos();
        let s = self.ident()?;
        let v: i64 = s.parse().map_err(|_| LangError::Syntax {
            pos,
            msg: format!("expected integer, found `{s}`"),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Var(name) => {
                self.bump();
                let sort = if self.eat(&Tok::Colon) { Some(self.ident()?) } else { None };
                Ok(Term::Var(Var { name, sort }))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let args = self.args()?;
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::Const(name))
                }
            }
            other => self.err(format!("expected term, found {}", other.describe())),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Atom> {
        let name = self.ident()?;
        if name == "not" {
            return self.err("`not` is reserved");
        }
        let args = if self.eat(&Tok::LParen) { self.args()? } else { vec![] };
        Ok(Atom::new(name, args))
    }

    fn literal(&mut self) -> Result<Literal> {
        let neg = self.eat(&Tok::Minus);
        Ok(Literal {
            atom: self.atom()?,
            neg,
        })
    }

    /// Body element: a literal, `not literal` (when allowed) or a comparison.
    fn body_elem(&mut self, allow_not: bool) -> Result<BodyElem> {
        if self.is_keyword("not") && matches!(self.peek2(), Tok::Ident(_) | Tok::Minus) {
            if !allow_not {
                return self.err("default negation is not allowed here");
            }
            self.bump();
            return Ok(BodyElem::Not(self.literal()?));
        }
        if self.eat(&Tok::Minus) {
            return Ok(BodyElem::Lit(Literal::neg(self.atom()?)));
        }
        let t = self.term()?;
        let op = match self.peek() {
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.term()?;
            return Ok(BodyElem::Cmp(Comparison { lhs: t, op, rhs }));
        }
        match t {
            Term::Const(c) if c == "not" => self.err("`not` is reserved"),
            Term::Const(c) => Ok(BodyElem::Lit(Literal::pos(Atom::new(c, vec![])))),
            Term::App(f, args) => Ok(BodyElem::Lit(Literal::pos(Atom::new(f, args)))),
            Term::Var(v) => self.err(format!("expected literal or comparison after variable {}", v.name)),
        }
    }

    fn body_elems(&mut self, allow_not: bool) -> Result<Vec<BodyElem>> {
        let mut out = vec![self.body_elem(allow_not)?];
        while self.eat(&Tok::Comma) {
            out.push(self.body_elem(allow_not)?);
        }
        Ok(out)
    }

    fn al_body(&mut self) -> Result<Body> {
        let mut body = Body::default();
        for e in self.body_elems(false)? {
            match e {
                BodyElem::Lit(l) => body.lits.push(l),
                BodyElem::Cmp(c) => body.cmps.push(c),
                BodyElem::Not(_) => unreachable!(),
            }
        }
        Ok(body)
    }

    fn sig(&mut self) -> Result<PredSig> {
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            params.push(self.ident()?);
            while self.eat(&Tok::Comma) {
                params.push(self.ident()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(PredSig { name, params })
    }

    fn step(&mut self) -> Result<u32> {
        let pos = self.pos();
        if self.eat(&Tok::Minus) {
            let n = self.ident()?;
            return Err(LangError::NegativeStep(format!("-{n} at {pos}")));
        }
        let s = self.ident()?;
        s.parse().map_err(|_| LangError::Syntax {
            pos,
            msg: format!("expected step, found `{s}`"),
        })
    }
}

enum BodyElem {
    Lit(Literal),
    Not(Literal),
    Cmp(Comparison),
}

// ---------------------------------------------------------------------------
// Domain files

/// Parses and validates a system description.
pub fn parse_domain(text: &str) -> Result<SystemDescription> {
    let mut cur = Cursor::new(text)?;
    let mut sd = SystemDescription::default();
    while *cur.peek() != Tok::Eof {
        domain_item(&mut cur, &mut sd)?;
    }
    validate_domain(&mut sd)?;
    Ok(sd)
}

fn declare_sig(sd: &SystemDescription, sig: &PredSig) -> Result<()> {
    if sd.symbol(&sig.name).is_some() {
        return Err(LangError::Duplicate(sig.name.clone()));
    }
    for s in &sig.params {
        if !sd.sorts.has_sort(s) {
            return Err(LangError::UndeclaredSort(s.clone()));
        }
    }
    Ok(())
}

fn domain_item(cur: &mut Cursor, sd: &mut SystemDescription) -> Result<()> {
    if let Tok::Directive(d) = cur.peek().clone() {
        cur.bump();
        match d.as_str() {
            "sort" => {
                loop {
                    let s = cur.ident()?;
                    sd.sorts.add_sort(&s);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            "subsort" => {
                let child = cur.ident()?;
                let parent = cur.ident()?;
                sd.sorts.add_subsort(&child, &parent)?;
            }
            "instance" => {
                let mut names = vec![cur.ident()?];
                while cur.eat(&Tok::Comma) {
                    names.push(cur.ident()?);
                }
                cur.expect(Tok::Colon)?;
                let sort = cur.ident()?;
                for n in names {
                    sd.sorts.add_instance(&n, &sort)?;
                }
            }
            "fluent" => {
                let kind = if cur.eat_keyword("basic") {
                    FluentKind::Basic
                } else if cur.eat_keyword("defined") {
                    FluentKind::Defined
                } else {
                    return cur.err("expected `basic` or `defined`");
                };
                let sig = cur.sig()?;
                declare_sig(sd, &sig)?;
                sd.fluents.push(FluentDecl { sig, kind });
            }
            "action" => {
                let kind = if cur.eat_keyword("agent") {
                    ActionKind::Agent
                } else if cur.eat_keyword("exogenous") {
                    ActionKind::Exogenous
                } else {
                    return cur.err("expected `agent` or `exogenous`");
                };
                let sig = cur.sig()?;
                declare_sig(sd, &sig)?;
                sd.actions.push(ActionDecl { sig, kind });
            }
            "static" => {
                let sig = cur.sig()?;
                declare_sig(sd, &sig)?;
                sd.statics.push(sig);
            }
            "attribute" => {
                let sig = cur.sig()?;
                declare_sig(sd, &sig)?;
                sd.attributes.push(sig);
            }
            "class" => {
                let name = cur.ident()?;
                let parent = if cur.eat(&Tok::Colon) { Some(cur.ident()?) } else { None };
                sd.sorts.add_sort(CLASS_SORT);
                sd.sorts.add_instance(&name, CLASS_SORT)?;
                sd.classes.push((name, parent));
            }
            other => return cur.err(format!("unknown directive `#{other}`")),
        }
        return cur.expect(Tok::Dot);
    }
    if cur.eat_keyword("impossible") {
        let mut actions = vec![cur.atom()?];
        while cur.eat(&Tok::Comma) {
            actions.push(cur.atom()?);
        }
        let body = if cur.eat_keyword("if") { cur.al_body()? } else { Body::default() };
        cur.expect(Tok::Dot)?;
        sd.statements.push(Statement::Impossible { actions, body });
        return Ok(());
    }
    if cur.is_keyword("default") && matches!(cur.peek2(), Tok::Ident(_)) {
        cur.bump();
        let d = default_decl(cur)?;
        sd.defaults.push(d);
        return Ok(());
    }
    if cur.is_keyword("attr") && matches!(cur.peek2(), Tok::Ident(_)) {
        cur.bump();
        let id = cur.ident()?;
        cur.expect(Tok::Colon)?;
        let head = cur.literal()?;
        let body = if cur.eat_keyword("if") { cur.al_body()? } else { Body::default() };
        cur.expect(Tok::Dot)?;
        sd.attr_rules.push(AttrRule { id, head, body });
        return Ok(());
    }
    let lit = cur.literal()?;
    if cur.eat_keyword("causes") {
        if lit.neg {
            return cur.err("an action cannot be negated");
        }
        let head = cur.literal()?;
        let body = if cur.eat_keyword("if") { cur.al_body()? } else { Body::default() };
        cur.expect(Tok::Dot)?;
        sd.statements.push(Statement::Causal {
            action: lit.atom,
            head,
            body,
        });
    } else if cur.eat_keyword("if") {
        let body = cur.al_body()?;
        cur.expect(Tok::Dot)?;
        sd.statements.push(Statement::Constraint { head: lit, body });
    } else {
        if lit.neg {
            return cur.err("static facts must be positive");
        }
        cur.expect(Tok::Dot)?;
        sd.static_facts.push(lit.atom);
    }
    Ok(())
}

fn default_decl(cur: &mut Cursor) -> Result<InitialDefault> {
    let id = cur.ident()?;
    cur.expect(Tok::Colon)?;
    let head = cur.literal()?;
    let body = if cur.eat_keyword("if") { cur.al_body()? } else { Body::default() };
    let priority = if cur.eat_keyword("priority") { cur.int()? } else { 0 };
    cur.expect(Tok::Dot)?;
    Ok(InitialDefault {
        id,
        head,
        body,
        priority,
    })
}

/// Sort holding the class names declared with `#class`.
pub const CLASS_SORT: &str = "class";

/// Collects sort constraints for variables from declared argument positions
/// and checks constants; returns the resolved sort for each variable.
struct SortCtx<'a> {
    sd: &'a SystemDescription,
    vars: BTreeMap<String, String>,
}

impl<'a> SortCtx<'a> {
    fn new(sd: &'a SystemDescription) -> Self {
        SortCtx {
            sd,
            vars: BTreeMap::new(),
        }
    }

    fn constrain(&mut self, var: &str, sort: &str) -> Result<()> {
        if !self.sd.sorts.has_sort(sort) {
            return Err(LangError::UndeclaredSort(sort.to_string()));
        }
        let next = match self.vars.get(var) {
            None => sort.to_string(),
            Some(prev) => self.sd.sorts.meet(prev, sort).ok_or_else(|| LangError::SortMismatch {
                term: var.to_string(),
                sort: sort.to_string(),
            })?,
        };
        self.vars.insert(var.to_string(), next);
        Ok(())
    }

    fn term_at(&mut self, t: &Term, sort: Option<&str>) -> Result<()> {
        match t {
            Term::Var(v) => {
                if let Some(s) = &v.sort {
                    self.constrain(&v.name, s)?;
                }
                if let Some(s) = sort {
                    self.constrain(&v.name, s)?;
                }
                Ok(())
            }
            Term::Const(c) => {
                if self.sd.sorts.sort_of(c).is_none() {
                    return Err(LangError::UndeclaredSymbol(c.clone()));
                }
                match sort {
                    Some(s) if !self.sd.sorts.is_instance_of(c, s) => Err(LangError::SortMismatch {
                        term: c.clone(),
                        sort: s.to_string(),
                    }),
                    _ => Ok(()),
                }
            }
            Term::App(f, _) => Err(LangError::Syntax {
                pos: Pos::default(),
                msg: format!("function symbol `{f}` not allowed in domain terms"),
            }),
        }
    }

    fn atom(&mut self, a: &Atom, allowed: impl Fn(SymbolKind) -> bool) -> Result<SymbolKind> {
        if a.pred == "member" && a.arity() == 2 && !self.sd.classes.is_empty() {
            self.term_at(&a.args[0], None)?;
            self.term_at(&a.args[1], Some(CLASS_SORT))?;
            return Ok(SymbolKind::Attribute);
        }
        let (kind, sig) = self
            .sd
            .symbol(&a.pred)
            .ok_or_else(|| LangError::UndeclaredSymbol(a.pred.clone()))?;
        if sig.params.len() != a.arity() {
            return Err(LangError::Arity {
                name: a.pred.clone(),
                expected: sig.params.len(),
                found: a.arity(),
            });
        }
        if !allowed(kind) {
            return Err(LangError::UndeclaredSymbol(format!("{} (not allowed in this position)", a.pred)));
        }
        let params = sig.params.clone();
        for (t, s) in a.args.iter().zip(&params) {
            self.term_at(t, Some(s))?;
        }
        Ok(kind)
    }

    fn body(&mut self, b: &Body, allowed: impl Fn(SymbolKind) -> bool + Copy) -> Result<()> {
        for l in &b.lits {
            self.atom(&l.atom, allowed)?;
        }
        for c in &b.cmps {
            self.term_at(&c.lhs, None)?;
            self.term_at(&c.rhs, None)?;
        }
        Ok(())
    }

    /// Annotates every variable with its resolved sort.
    fn annotate_term(&self, t: &Term) -> Result<Term> {
        Ok(match t {
            Term::Var(v) => {
                let sort = self
                    .vars
                    .get(&v.name)
                    .ok_or_else(|| LangError::Unsorted(v.name.clone()))?;
                Term::Var(Var {
                    name: v.name.clone(),
                    sort: Some(sort.clone()),
                })
            }
            other => other.clone(),
        })
    }

    fn annotate_atom(&self, a: &Atom) -> Result<Atom> {
        Ok(Atom::new(
            a.pred.clone(),
            a.args.iter().map(|t| self.annotate_term(t)).collect::<Result<_>>()?,
        ))
    }

    fn annotate_lit(&self, l: &Literal) -> Result<Literal> {
        Ok(Literal {
            atom: self.annotate_atom(&l.atom)?,
            neg: l.neg,
        })
    }

    fn annotate_body(&self, b: &Body) -> Result<Body> {
        Ok(Body {
            lits: b.lits.iter().map(|l| self.annotate_lit(l)).collect::<Result<_>>()?,
            cmps: b
                .cmps
                .iter()
                .map(|c| {
                    Ok(Comparison {
                        lhs: self.annotate_term(&c.lhs)?,
                        op: c.op,
                        rhs: self.annotate_term(&c.rhs)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }
}

fn is_fluent(k: SymbolKind) -> bool {
    matches!(k, SymbolKind::Fluent(_))
}

fn is_domain_prop(k: SymbolKind) -> bool {
    matches!(k, SymbolKind::Fluent(_) | SymbolKind::Static)
}

fn validate_domain(sd: &mut SystemDescription) -> Result<()> {
    for (name, parent) in &sd.classes {
        if let Some(p) = parent {
            if !sd.classes.iter().any(|(c, _)| c == p) {
                return Err(LangError::UndeclaredSymbol(p.clone()));
            }
            if p == name {
                return Err(LangError::SortCycle(name.clone()));
            }
        }
    }
    for fact in &sd.static_facts {
        if sd.check_ground_atom(fact)? != SymbolKind::Static {
            return Err(LangError::UndeclaredSymbol(format!("{} (not a static)", fact.pred)));
        }
    }
    let mut statements = Vec::with_capacity(sd.statements.len());
    for st in &sd.statements {
        let mut ctx = SortCtx::new(sd);
        let annotated = match st {
            Statement::Causal { action, head, body } => {
                ctx.atom(action, |k| matches!(k, SymbolKind::Action(_)))?;
                match ctx.atom(&head.atom, |_| true)? {
                    SymbolKind::Fluent(FluentKind::Basic) => {}
                    SymbolKind::Fluent(FluentKind::Defined) => {
                        return Err(LangError::DefinedInCausalHead(head.atom.to_string()))
                    }
                    SymbolKind::Static => return Err(LangError::StaticInCausalHead(head.atom.to_string())),
                    _ => return Err(LangError::UndeclaredSymbol(format!("{} (not a fluent)", head.atom.pred))),
                }
                ctx.body(body, is_domain_prop)?;
                Statement::Causal {
                    action: ctx.annotate_atom(action)?,
                    head: ctx.annotate_lit(head)?,
                    body: ctx.annotate_body(body)?,
                }
            }
            Statement::Constraint { head, body } => {
                ctx.atom(&head.atom, is_fluent)?;
                ctx.body(body, is_domain_prop)?;
                Statement::Constraint {
                    head: ctx.annotate_lit(head)?,
                    body: ctx.annotate_body(body)?,
                }
            }
            Statement::Impossible { actions, body } => {
                for a in actions {
                    ctx.atom(a, |k| matches!(k, SymbolKind::Action(_)))?;
                }
                ctx.body(body, is_domain_prop)?;
                Statement::Impossible {
                    actions: actions.iter().map(|a| ctx.annotate_atom(a)).collect::<Result<_>>()?,
                    body: ctx.annotate_body(body)?,
                }
            }
        };
        statements.push(annotated);
    }
    sd.statements = statements;
    let defaults = std::mem::take(&mut sd.defaults);
    sd.defaults = validate_defaults(sd, &defaults)?;
    let mut rules = Vec::with_capacity(sd.attr_rules.len());
    for r in &sd.attr_rules {
        let mut ctx = SortCtx::new(sd);
        ctx.atom(&r.head.atom, |k| matches!(k, SymbolKind::Attribute | SymbolKind::Fluent(_)))?;
        ctx.body(&r.body, |k| !matches!(k, SymbolKind::Action(_)))?;
        rules.push(AttrRule {
            id: r.id.clone(),
            head: ctx.annotate_lit(&r.head)?,
            body: ctx.annotate_body(&r.body)?,
        });
    }
    sd.attr_rules = rules;
    Ok(())
}

fn validate_defaults(sd: &SystemDescription, defaults: &[InitialDefault]) -> Result<Vec<InitialDefault>> {
    let mut out: Vec<InitialDefault> = Vec::new();
    for d in defaults {
        if out.iter().any(|o| o.id == d.id) {
            return Err(LangError::Duplicate(d.id.clone()));
        }
        let mut ctx = SortCtx::new(sd);
        match ctx.atom(&d.head.atom, is_fluent)? {
            SymbolKind::Fluent(FluentKind::Basic) => {}
            _ => return Err(LangError::UndeclaredSymbol(format!("{} (defaults need a basic fluent)", d.head.atom.pred))),
        }
        ctx.body(&d.body, is_domain_prop)?;
        for o in &out {
            if o.priority == d.priority && o.head.atom == d.head.atom && o.head.neg != d.head.neg {
                return Err(LangError::DefaultConflict(o.id.clone(), d.id.clone()));
            }
        }
        out.push(InitialDefault {
            id: d.id.clone(),
            head: ctx.annotate_lit(&d.head)?,
            body: ctx.annotate_body(&d.body)?,
            priority: d.priority,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Program files

/// Parses a logic program; rules keep declaration order and get sequential ids.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut cur = Cursor::new(text)?;
    let mut prog = Program::default();
    while *cur.peek() != Tok::Eof {
        if let Tok::Directive(d) = cur.peek().clone() {
            cur.bump();
            match d.as_str() {
                "sort" => loop {
                    let s = cur.ident()?;
                    prog.sorts.add_sort(&s);
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                },
                "subsort" => {
                    let c = cur.ident()?;
                    let p = cur.ident()?;
                    prog.sorts.add_subsort(&c, &p)?;
                }
                "instance" => {
                    let mut names = vec![cur.term()?];
                    while cur.eat(&Tok::Comma) {
                        names.push(cur.term()?);
                    }
                    cur.expect(Tok::Colon)?;
                    let sort = cur.ident()?;
                    for n in names {
                        if !n.is_ground() {
                            return Err(LangError::Unground(format!("instance {n}")));
                        }
                        prog.sorts.add_instance_term(n, &sort)?;
                    }
                }
                "static" => {
                    let sig = cur.sig()?;
                    if !prog.is_static(&sig.name) {
                        prog.statics.push(sig.name.clone());
                    }
                    if !sig.params.is_empty() {
                        prog.signatures.push(sig);
                    }
                }
                "pred" => {
                    let sig = cur.sig()?;
                    prog.signatures.push(sig);
                }
                "horizon" => {
                    let n = cur.int()?;
                    if n < 0 {
                        return cur.err("horizon must be non-negative");
                    }
                    prog.horizon = n as u32;
                }
                other => return cur.err(format!("unknown directive `#{other}`")),
            }
            cur.expect(Tok::Dot)?;
            continue;
        }
        let rule = program_rule(&mut cur)?;
        rule.check_safety()?;
        prog.push(rule);
    }
    for sig in &prog.signatures {
        for s in &sig.params {
            if !prog.sorts.has_sort(s) {
                return Err(LangError::UndeclaredSort(s.clone()));
            }
        }
    }
    for r in &prog.rules {
        for v in r.vars() {
            if let Some(s) = &v.sort {
                if !prog.sorts.has_sort(s) {
                    return Err(LangError::UndeclaredSort(s.clone()));
                }
            }
        }
    }
    Ok(prog)
}

fn program_rule(cur: &mut Cursor) -> Result<Rule> {
    let mut head = Vec::new();
    if !matches!(cur.peek(), Tok::If | Tok::CrIf) {
        head.push(cur.literal()?);
        if cur.eat(&Tok::Bar) {
            let other = cur.literal()?;
            if other != head[0].complement() {
                return cur.err("disjunction must be a literal and its complement");
            }
            head.push(other);
        }
    }
    let mut rule = Rule::new(head, vec![], vec![]);
    let cr = match cur.peek() {
        Tok::If => {
            cur.bump();
            false
        }
        Tok::CrIf => {
            cur.bump();
            true
        }
        _ => {
            if rule.head.is_empty() {
                return cur.err("expected `:-`");
            }
            finish_rule(cur, &mut rule)?;
            return Ok(rule);
        }
    };
    if cr && rule.head.len() != 1 {
        return cur.err("a CR rule needs exactly one head literal");
    }
    if !matches!(cur.peek(), Tok::Dot | Tok::At | Tok::Str(_)) {
        for e in cur.body_elems(true)? {
            match e {
                BodyElem::Lit(l) => rule.pos.push(l),
                BodyElem::Not(l) => rule.neg.push(l),
                BodyElem::Cmp(c) => rule.cmps.push(c),
            }
        }
    } else if !cr && rule.head.is_empty() {
        return cur.err("constraint with empty body");
    }
    if cr {
        let priority = if cur.eat(&Tok::At) { cur.int()? } else { 0 };
        rule.cr = Some(CrInfo { priority });
    }
    finish_rule(cur, &mut rule)?;
    Ok(rule)
}

fn finish_rule(cur: &mut Cursor, rule: &mut Rule) -> Result<()> {
    if let Tok::Str(tag) = cur.peek().clone() {
        cur.bump();
        rule.tag = tag;
    }
    cur.expect(Tok::Dot)
}

// ---------------------------------------------------------------------------
// Scenario files

fn ground_checked(sd: &SystemDescription, a: &Atom) -> Result<SymbolKind> {
    if !a.is_ground() {
        return Err(LangError::Unground(a.to_string()));
    }
    sd.check_ground_atom(a)
}

/// Parses a scenario against its domain; all records must be ground.
pub fn parse_scenario(text: &str, sd: &SystemDescription) -> Result<Scenario> {
    let mut cur = Cursor::new(text)?;
    let mut sc = Scenario::default();
    let mut defaults = Vec::new();
    while *cur.peek() != Tok::Eof {
        let pos = cur.pos();
        let kw = cur.ident()?;
        match kw.as_str() {
            "obs" => {
                cur.expect(Tok::LParen)?;
                let fluent = cur.atom()?;
                cur.expect(Tok::Comma)?;
                let value = match cur.ident()?.as_str() {
                    "true" => true,
                    "false" => false,
                    other => return Err(LangError::Syntax {
                        pos,
                        msg: format!("expected true/false, found `{other}`"),
                    }),
                };
                cur.expect(Tok::Comma)?;
                let step = cur.step()?;
                cur.expect(Tok::RParen)?;
                let kind = ground_checked(sd, &fluent)?;
                if !matches!(kind, SymbolKind::Fluent(_) | SymbolKind::Attribute) {
                    return Err(LangError::UndeclaredSymbol(format!("{} (not observable)", fluent.pred)));
                }
                sc.history.observe(fluent, value, step);
            }
            "hpd" => {
                cur.expect(Tok::LParen)?;
                let action = cur.atom()?;
                cur.expect(Tok::Comma)?;
                let step = cur.step()?;
                cur.expect(Tok::RParen)?;
                if !matches!(ground_checked(sd, &action)?, SymbolKind::Action(_)) {
                    return Err(LangError::UndeclaredSymbol(format!("{} (not an action)", action.pred)));
                }
                sc.history.happened(action, step);
            }
            "goal" => loop {
                let lit = cur.literal()?;
                if !matches!(ground_checked(sd, &lit.atom)?, SymbolKind::Fluent(_)) {
                    return Err(LangError::UndeclaredSymbol(format!("{} (not a fluent)", lit.atom.pred)));
                }
                sc.goal.push(lit);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            },
            "script" => {
                let action = cur.atom()?;
                if !matches!(ground_checked(sd, &action)?, SymbolKind::Action(_)) {
                    return Err(LangError::UndeclaredSymbol(format!("{} (not an action)", action.pred)));
                }
                if !cur.eat_keyword("at") {
                    return cur.err("expected `at`");
                }
                let step = cur.step()?;
                let reported = cur.eat_keyword("reported");
                sc.script.push(ScriptedEvent { action, step, reported });
            }
            "truth" => {
                let lit = cur.literal()?;
                if !matches!(ground_checked(sd, &lit.atom)?, SymbolKind::Fluent(_)) {
                    return Err(LangError::UndeclaredSymbol(format!("{} (not a fluent)", lit.atom.pred)));
                }
                sc.truth.push(lit);
            }
            "noise" => match cur.bump() {
                Tok::Str(s) => sc.noise = Some(s),
                other => return Err(LangError::Syntax {
                    pos,
                    msg: format!("expected quoted path, found {}", other.describe()),
                }),
            },
            "default" => {
                defaults.push(default_decl(&mut cur)?);
                continue;
            }
            other => {
                return Err(LangError::Syntax {
                    pos,
                    msg: format!("unknown scenario statement `{other}`"),
                })
            }
        }
        cur.expect(Tok::Dot)?;
    }
    let mut all = sd.defaults.clone();
    all.extend(defaults);
    sc.history.defaults = validate_defaults(sd, &all)?;
    Ok(sc)
}
