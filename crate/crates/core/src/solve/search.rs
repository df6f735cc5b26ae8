//! Conflict-driven search over the program completion, with a stability
//! check on every total assignment.
//!
//! Variables are the atoms, then one switch per CR rule, then one body
//! variable per rule. Decisions follow a static order (hints first, then
//! variable order, false first), so the first model found is the least one
//! in that order; learned clauses are consequences of the clauses and the
//! stability nogoods, which keeps that property under backjumping.

use std::time::Instant;

use super::check::least_model_matches;
use crate::ground::{AtomId, GroundProgram};

const UNSET: u8 = 2;
const NO_REASON: u32 = u32::MAX;

/// Literal `2v` means "v is true", `2v + 1` means "v is false".
type Lit = u32;

fn lit(v: u32, b: bool) -> Lit {
    2 * v + (!b) as u32
}

fn var(l: Lit) -> u32 {
    l >> 1
}

fn negate(l: Lit) -> Lit {
    l ^ 1
}

pub(crate) struct Compiled<'g> {
    pub gp: &'g GroundProgram,
    pub n_atoms: usize,
    /// Switch variable of each CR rule, by rule index.
    pub switch_of: Vec<Option<u32>>,
    /// Rule index of each switch.
    pub switch_rule: Vec<usize>,
    /// Bucket of each switch and the switches of each bucket.
    pub bucket_of: Vec<usize>,
    pub buckets: Vec<(i64, Vec<u32>)>,
    n_vars: usize,
    /// Completion clauses, flattened.
    lits: Vec<Lit>,
    spans: Vec<(u32, u32)>,
}

impl<'g> Compiled<'g> {
    pub fn new(gp: &'g GroundProgram) -> Self {
        let n_atoms = gp.atom_count();
        let mut switch_of = vec![None; gp.rules.len()];
        let mut switch_rule = Vec::new();
        let mut prios: Vec<i64> = gp.cr_rules().map(|(_, r)| r.cr.unwrap_or(0)).collect();
        prios.sort_unstable();
        prios.dedup();
        let mut buckets: Vec<(i64, Vec<u32>)> = prios.into_iter().map(|p| (p, Vec::new())).collect();
        let mut bucket_of = Vec::new();
        for (i, r) in gp.rules.iter().enumerate() {
            if let Some(p) = r.cr {
                let v = (n_atoms + switch_rule.len()) as u32;
                switch_of[i] = Some(v);
                switch_rule.push(i);
                let b = buckets.iter().position(|(q, _)| *q == p).expect("bucket exists");
                buckets[b].1.push(v);
                bucket_of.push(b);
            }
        }
        let mut c = Compiled {
            gp,
            n_atoms,
            switch_of,
            switch_rule,
            bucket_of,
            buckets,
            n_vars: 0,
            lits: Vec::new(),
            spans: Vec::new(),
        };
        c.build();
        c
    }

    fn clause(&mut self, ls: &[Lit]) {
        self.spans.push((self.lits.len() as u32, ls.len() as u32));
        self.lits.extend_from_slice(ls);
    }

    fn build(&mut self) {
        let gp = self.gp;
        let mut next = (self.n_atoms + self.switch_rule.len()) as u32;
        // supports[a]: body variables of rules with `a` in the head; None
        // once `a` has an unconditional rule.
        let mut supports: Vec<Option<Vec<Lit>>> = vec![Some(Vec::new()); self.n_atoms];
        for a in 0..self.n_atoms as u32 {
            if let Some(c) = gp.complement(a) {
                if a < c {
                    self.clause(&[lit(a, false), lit(c, false)]);
                }
            }
        }
        for (i, r) in gp.rules.iter().enumerate() {
            let mut body: Vec<Lit> = r.pos.iter().map(|&a| lit(a, true)).chain(r.neg.iter().map(|&a| lit(a, false))).collect();
            if let Some(s) = self.switch_of[i] {
                body.push(lit(s, true));
            }
            body.sort_unstable();
            body.dedup();
            if body.windows(2).any(|w| var(w[0]) == var(w[1])) {
                continue;
            }
            let mut head = r.head.clone();
            head.sort_unstable();
            head.dedup();
            // body -> head
            let mut cl: Vec<Lit> = body.iter().map(|&l| negate(l)).collect();
            cl.extend(head.iter().map(|&h| lit(h, true)));
            self.clause(&cl);
            if head.is_empty() {
                continue;
            }
            let support = match body.len() {
                0 => None,
                1 => Some(body[0]),
                _ => {
                    let b = next;
                    next += 1;
                    for &l in &body {
                        self.clause(&[lit(b, false), l]);
                    }
                    let mut back: Vec<Lit> = body.iter().map(|&l| negate(l)).collect();
                    back.push(lit(b, true));
                    self.clause(&back);
                    Some(lit(b, true))
                }
            };
            for &h in &head {
                let slot = &mut supports[h as usize];
                match (support, slot.as_mut()) {
                    (None, _) => *slot = None,
                    (Some(s), Some(v)) => v.push(s),
                    (Some(_), None) => {}
                }
            }
        }
        for (a, s) in supports.into_iter().enumerate() {
            if let Some(mut s) = s {
                s.sort_unstable();
                s.dedup();
                let mut cl = vec![lit(a as u32, false)];
                cl.extend(s);
                self.clause(&cl);
            }
        }
        self.n_vars = next as usize;
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Stop {
    Done,
    Limit,
}

pub(crate) struct Limits {
    pub max_decisions: u64,
    pub deadline: Option<Instant>,
}

pub(crate) struct Search<'c, 'g> {
    c: &'c Compiled<'g>,
    lits: Vec<Lit>,
    spans: Vec<(u32, u32)>,
    /// Clause ids watching each literal (triggered when it becomes false).
    watches: Vec<Vec<u32>>,
    val: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    bound: Vec<Option<usize>>,
    order: Vec<Lit>,
    order_pos: usize,
    pub decisions_made: u64,
    pub conflicts: u64,
}

enum Propagated {
    Ok,
    Conflict(u32),
}

impl<'c, 'g> Search<'c, 'g> {
    pub fn new(c: &'c Compiled<'g>, bound: Vec<Option<usize>>, hints: &[(AtomId, bool)]) -> Self {
        let n = c.n_vars();
        let mut order = Vec::with_capacity(n);
        let mut hinted = vec![false; n];
        for &(a, b) in hints {
            if (a as usize) < c.n_atoms && !hinted[a as usize] {
                hinted[a as usize] = true;
                order.push(lit(a, b));
            }
        }
        for v in 0..n {
            if !hinted[v] {
                order.push(lit(v as u32, false));
            }
        }
        Search {
            c,
            lits: c.lits.clone(),
            spans: c.spans.clone(),
            watches: vec![Vec::new(); 2 * n],
            val: vec![UNSET; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            bound,
            order,
            order_pos: 0,
            decisions_made: 0,
            conflicts: 0,
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        match self.val[var(l) as usize] {
            UNSET => None,
            x => Some((x == 1) == (l & 1 == 0)),
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, l: Lit, reason: u32) {
        let v = var(l) as usize;
        self.val[v] = (l & 1 == 0) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn clause_lits(&self, id: u32) -> &[Lit] {
        let (s, n) = self.spans[id as usize];
        &self.lits[s as usize..(s + n) as usize]
    }

    /// Adds a clause and watches two of its literals, preferring unassigned
    /// ones, then the most recently falsified.
    fn add_clause(&mut self, mut ls: Vec<Lit>) -> u32 {
        let key = |s: &Self, l: Lit| match s.lit_value(l) {
            None | Some(true) => u32::MAX,
            Some(false) => s.level[var(l) as usize],
        };
        for k in 0..ls.len().min(2) {
            let mut best = k;
            for j in k + 1..ls.len() {
                if key(self, ls[j]) > key(self, ls[best]) {
                    best = j;
                }
            }
            ls.swap(k, best);
        }
        let id = self.spans.len() as u32;
        self.spans.push((self.lits.len() as u32, ls.len() as u32));
        if ls.len() >= 2 {
            self.watches[ls[0] as usize].push(id);
            self.watches[ls[1] as usize].push(id);
        }
        self.lits.extend_from_slice(&ls);
        id
    }

    /// Level-zero setup; false if the clauses are unsatisfiable outright.
    fn init(&mut self) -> bool {
        for id in 0..self.spans.len() as u32 {
            let (s, n) = self.spans[id as usize];
            match n {
                0 => return false,
                1 => {
                    let l = self.lits[s as usize];
                    match self.lit_value(l) {
                        Some(false) => return false,
                        Some(true) => {}
                        None => self.assign(l, id),
                    }
                }
                _ => {
                    self.watches[self.lits[s as usize] as usize].push(id);
                    self.watches[self.lits[s as usize + 1] as usize].push(id);
                }
            }
        }
        for k in 0..self.c.buckets.len() {
            if self.bound[k] == Some(0) {
                for i in 0..self.c.buckets[k].1.len() {
                    let l = lit(self.c.buckets[k].1[i], false);
                    match self.lit_value(l) {
                        Some(false) => return false,
                        Some(true) => {}
                        None => {
                            let id = self.add_clause(vec![l]);
                            self.assign(l, id);
                        }
                    }
                }
            }
        }
        matches!(self.propagate(), Propagated::Ok)
    }

    fn propagate(&mut self) -> Propagated {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let falsified = negate(p);
            let ws = std::mem::take(&mut self.watches[falsified as usize]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut it = ws.into_iter();
            for id in it.by_ref() {
                let (s, n) = self.spans[id as usize];
                let (s, n) = (s as usize, n as usize);
                if self.lits[s] == falsified {
                    self.lits.swap(s, s + 1);
                }
                let first = self.lits[s];
                if self.lit_value(first) == Some(true) {
                    keep.push(id);
                    continue;
                }
                let mut moved = false;
                for k in 2..n {
                    let l = self.lits[s + k];
                    if self.lit_value(l) != Some(false) {
                        self.lits.swap(s + 1, s + k);
                        self.watches[l as usize].push(id);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                keep.push(id);
                match self.lit_value(first) {
                    Some(false) => {
                        conflict = Some(id);
                        break;
                    }
                    _ => self.assign(first, id),
                }
            }
            keep.extend(it);
            self.watches[falsified as usize] = keep;
            if let Some(id) = conflict {
                return Propagated::Conflict(id);
            }
            if let Some(id) = self.cardinality(p) {
                return Propagated::Conflict(id);
            }
        }
        Propagated::Ok
    }

    /// Enforces the bucket bound after switch `p` became true.
    fn cardinality(&mut self, p: Lit) -> Option<u32> {
        let v = var(p) as usize;
        if p & 1 == 1 || v < self.c.n_atoms || v >= self.c.n_atoms + self.c.switch_rule.len() {
            return None;
        }
        let k = self.c.bucket_of[v - self.c.n_atoms];
        let limit = self.bound[k]?;
        let on: Vec<u32> = self.c.buckets[k].1.iter().copied().filter(|&s| self.lit_value(lit(s, true)) == Some(true)).collect();
        if on.len() > limit {
            let cl: Vec<Lit> = on[..=limit].iter().map(|&s| lit(s, false)).collect();
            return Some(self.add_clause(cl));
        }
        if on.len() == limit {
            for i in 0..self.c.buckets[k].1.len() {
                let s = self.c.buckets[k].1[i];
                if self.lit_value(lit(s, false)).is_none() {
                    let mut cl = vec![lit(s, false)];
                    cl.extend(on.iter().map(|&t| lit(t, false)));
                    let id = self.add_clause(cl);
                    self.assign(lit(s, false), id);
                }
            }
        }
        None
    }

    fn backjump(&mut self, to: u32) {
        if self.decision_level() <= to {
            return;
        }
        let len = self.trail_lim[to as usize];
        for &l in &self.trail[len..] {
            let v = var(l) as usize;
            self.val[v] = UNSET;
            self.reason[v] = NO_REASON;
        }
        self.trail.truncate(len);
        self.trail_lim.truncate(to as usize);
        self.qhead = len;
        self.order_pos = 0;
    }

    /// First-UIP learning on a falsified clause; false if the conflict is
    /// at level zero.
    fn resolve_conflict(&mut self, confl: u32) -> bool {
        self.conflicts += 1;
        let current = self.decision_level();
        if current == 0 {
            return false;
        }
        let mut learnt: Vec<Lit> = vec![0];
        let mut pending = 0;
        let mut idx = self.trail.len();
        let mut clause = confl;
        let mut pivot: Option<Lit> = None;
        loop {
            let ls: Vec<Lit> = self.clause_lits(clause).to_vec();
            for q in ls {
                let v = var(q) as usize;
                if Some(v as u32) == pivot.map(var) || self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                if self.level[v] == current {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx]) as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[var(p) as usize] = false;
            pending -= 1;
            pivot = Some(p);
            if pending == 0 {
                learnt[0] = negate(p);
                break;
            }
            clause = self.reason[var(p) as usize];
        }
        for &q in &learnt[1..] {
            self.seen[var(q) as usize] = false;
        }
        let back = learnt[1..].iter().map(|&q| self.level[var(q) as usize]).max().unwrap_or(0);
        self.backjump(back);
        let id = self.add_clause(learnt);
        let first = self.clause_lits(id)[0];
        self.assign(first, id);
        true
    }

    /// Clause ruling out the current decisions; `None` without decisions.
    fn block_decisions(&mut self) -> Option<u32> {
        if self.trail_lim.is_empty() {
            return None;
        }
        let cl: Vec<Lit> = self.trail_lim.iter().map(|&i| negate(self.trail[i])).collect();
        Some(self.add_clause(cl))
    }

    fn pick(&mut self) -> Option<Lit> {
        while self.order_pos < self.order.len() {
            let l = self.order[self.order_pos];
            if self.lit_value(l).is_none() {
                return Some(l);
            }
            self.order_pos += 1;
        }
        None
    }

    fn stable(&self) -> bool {
        let n = self.c.n_atoms;
        let m: Vec<bool> = self.val[..n].iter().map(|&x| x == 1).collect();
        least_model_matches(self.c.gp, &m, |i, _| match self.c.switch_of[i] {
            Some(s) => self.val[s as usize] == 1,
            None => true,
        })
    }

    /// Enumerates stable total assignments, calling `on_model` for each; the
    /// callback returns false to stop.
    pub fn run(&mut self, limits: &Limits, on_model: &mut dyn FnMut(&[u8]) -> bool) -> Stop {
        if !self.init() {
            return Stop::Done;
        }
        loop {
            if let Propagated::Conflict(id) = self.propagate() {
                if !self.resolve_conflict(id) {
                    return Stop::Done;
                }
                if self.conflicts.is_multiple_of(256) && limits.deadline.is_some_and(|d| Instant::now() > d) {
                    return Stop::Limit;
                }
                continue;
            }
            match self.pick() {
                Some(l) => {
                    self.decisions_made += 1;
                    if self.decisions_made > limits.max_decisions {
                        return Stop::Limit;
                    }
                    if self.decisions_made.is_multiple_of(1024) && limits.deadline.is_some_and(|d| Instant::now() > d) {
                        return Stop::Limit;
                    }
                    self.trail_lim.push(self.trail.len());
                    self.assign(l, NO_REASON);
                }
                None => {
                    if self.stable() && !on_model(&self.val) {
                        return Stop::Done;
                    }
                    let Some(id) = self.block_decisions() else {
                        return Stop::Done;
                    };
                    if !self.resolve_conflict(id) {
                        return Stop::Done;
                    }
                }
            }
        }
    }
}
