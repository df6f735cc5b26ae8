//! Printers emitting the same surface syntax the parsers accept.

use std::fmt;

use super::*;

fn join<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{it}")?;
    }
    Ok(())
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sort {
            Some(s) => write!(f, "{}:{}", self.name, s),
            None => f.write_str(&self.name),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                join(f, args, ", ")?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            join(f, &self.args, ", ")?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        };
        write!(f, "{} {} {}", self.lhs, op, self.rhs)
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        join(f, &self.lits, ", ")?;
        if !self.lits.is_empty() && !self.cmps.is_empty() {
            f.write_str(", ")?;
        }
        join(f, &self.cmps, ", ")
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            write!(f, "({})", self.params.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Causal { action, head, body } => {
                write!(f, "{action} causes {head}")?;
                if !body.is_empty() {
                    write!(f, " if {body}")?;
                }
            }
            Statement::Constraint { head, body } => write!(f, "{head} if {body}")?,
            Statement::Impossible { actions, body } => {
                f.write_str("impossible ")?;
                join(f, actions, ", ")?;
                if !body.is_empty() {
                    write!(f, " if {body}")?;
                }
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for InitialDefault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "default {} : {}", self.id, self.head)?;
        if !self.body.is_empty() {
            write!(f, " if {}", self.body)?;
        }
        write!(f, " priority {}.", self.priority)
    }
}

impl fmt::Display for AttrRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "attr {} : {}", self.id, self.head)?;
        if !self.body.is_empty() {
            write!(f, " if {}", self.body)?;
        }
        f.write_str(".")
    }
}

fn write_sorts(f: &mut fmt::Formatter<'_>, sorts: &SortHierarchy) -> fmt::Result {
    for s in sorts.sorts() {
        writeln!(f, "#sort {s}.")?;
    }
    for (c, p) in sorts.edges() {
        writeln!(f, "#subsort {c} {p}.")?;
    }
    for (t, s) in sorts.instances() {
        writeln!(f, "#instance {t} : {s}.")?;
    }
    Ok(())
}

impl fmt::Display for SystemDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sorts(f, &self.sorts)?;
        for (c, p) in &self.classes {
            match p {
                Some(p) => writeln!(f, "#class {c} : {p}.")?,
                None => writeln!(f, "#class {c}.")?,
            }
        }
        for s in &self.statics {
            writeln!(f, "#static {s}.")?;
        }
        for a in &self.attributes {
            writeln!(f, "#attribute {a}.")?;
        }
        for fl in &self.fluents {
            let kind = match fl.kind {
                FluentKind::Basic => "basic",
                FluentKind::Defined => "defined",
            };
            writeln!(f, "#fluent {kind} {}.", fl.sig)?;
        }
        for a in &self.actions {
            let kind = match a.kind {
                ActionKind::Agent => "agent",
                ActionKind::Exogenous => "exogenous",
            };
            writeln!(f, "#action {kind} {}.", a.sig)?;
        }
        for fact in &self.static_facts {
            writeln!(f, "{fact}.")?;
        }
        for st in &self.statements {
            writeln!(f, "{st}")?;
        }
        for d in &self.defaults {
            writeln!(f, "{d}")?;
        }
        for r in &self.attr_rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        join(f, &self.head, " | ")?;
        let has_body = !(self.pos.is_empty() && self.neg.is_empty() && self.cmps.is_empty());
        if self.cr.is_some() {
            f.write_str(if self.head.is_empty() { "+-" } else { " +-" })?;
        } else if has_body {
            f.write_str(if self.head.is_empty() { ":-" } else { " :-" })?;
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            let s = if first { " " } else { ", " };
            first = false;
            f.write_str(s)
        };
        for l in &self.pos {
            sep(f)?;
            write!(f, "{l}")?;
        }
        for c in &self.cmps {
            sep(f)?;
            write!(f, "{c}")?;
        }
        for l in &self.neg {
            sep(f)?;
            write!(f, "not {l}")?;
        }
        if let Some(cr) = &self.cr {
            write!(f, " @{}", cr.priority)?;
        }
        if !self.tag.is_empty() {
            write!(f, " \"{}\"", self.tag)?;
        }
        f.write_str(".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sorts(f, &self.sorts)?;
        for s in &self.statics {
            writeln!(f, "#static {s}.")?;
        }
        for s in &self.signatures {
            writeln!(f, "#pred {s}.")?;
        }
        writeln!(f, "#horizon {}.", self.horizon)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "obs({}, {}, {})", self.fluent, self.value, self.step)
    }
}

impl fmt::Display for Happened {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hpd({}, {})", self.action, self.step)
    }
}
