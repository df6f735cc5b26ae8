//! Answer sets of ground programs with classical negation, constraints,
//! complementary-pair disjunction and CR rules.

mod check;
mod search;

use std::time::{Duration, Instant};

pub use check::{is_answer_set, is_answer_set_with};
use search::{Compiled, Limits, Search, Stop};

use crate::ground::{AtomId, GroundProgram};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Maximum number of models; 0 means all.
    pub limit: usize,
    pub max_decisions: u64,
    pub max_time: Duration,
    /// Decisions tried first, in order, with their first polarity.
    pub hints: Vec<(AtomId, bool)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limit: 0,
            max_decisions: 10_000_000,
            max_time: Duration::from_secs(60),
            hints: Vec::new(),
        }
    }
}

impl SolveOptions {
    pub fn limit(limit: usize) -> Self {
        SolveOptions {
            limit,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AnswerSet {
    /// True literals, ascending by id.
    pub atoms: Vec<AtomId>,
    /// Indices of the CR rules applied to obtain this answer set.
    pub applied_cr: Vec<usize>,
    /// Applied CR rules per priority bucket, strongest first.
    pub cr_counts: Vec<(i64, usize)>,
}

impl AnswerSet {
    pub fn contains(&self, a: AtomId) -> bool {
        self.atoms.binary_search(&a).is_ok()
    }

    /// Human-readable literals, sorted.
    pub fn literals(&self, gp: &GroundProgram) -> Vec<String> {
        let mut out: Vec<String> = self.atoms.iter().map(|&a| gp.literal(a).to_string()).collect();
        out.sort();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Consistent,
    Inconsistent,
    ResourceLimit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub wall_ms: u64,
    /// Enumeration stopped at a resource cap after finding some models.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SolveResult {
    pub status: Status,
    pub models: Vec<AnswerSet>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_consistent(&self) -> bool {
        self.status == Status::Consistent
    }
}

struct Runner<'c, 'g> {
    c: &'c Compiled<'g>,
    opts: &'c SolveOptions,
    deadline: Instant,
    stats: SolveStats,
}

impl<'c, 'g> Runner<'c, 'g> {
    /// One search under per-bucket bounds; returns models and whether a
    /// resource cap was hit.
    fn run(&mut self, bound: Vec<Option<usize>>, limit: usize) -> (Vec<AnswerSet>, bool) {
        let c = self.c;
        let mut s = Search::new(c, bound, &self.opts.hints);
        let limits = Limits {
            max_decisions: self.opts.max_decisions.saturating_sub(self.stats.decisions),
            deadline: Some(self.deadline),
        };
        let mut models = Vec::new();
        let stop = s.run(&limits, &mut |val| {
            let atoms: Vec<AtomId> = (0..c.n_atoms).filter(|&a| val[a] == 1).map(|a| a as AtomId).collect();
            let mut applied = Vec::new();
            let mut counts: Vec<(i64, usize)> = c.buckets.iter().map(|(p, _)| (*p, 0)).collect();
            for (k, &r) in c.switch_rule.iter().enumerate() {
                if val[c.n_atoms + k] == 1 {
                    applied.push(r);
                    counts[c.bucket_of[k]].1 += 1;
                }
            }
            models.push(AnswerSet {
                atoms,
                applied_cr: applied,
                cr_counts: counts,
            });
            limit == 0 || models.len() < limit
        });
        self.stats.decisions += s.decisions_made;
        self.stats.conflicts += s.conflicts;
        (models, stop == Stop::Limit)
    }
}

fn finish(models: Vec<AnswerSet>, hit_limit: bool, mut stats: SolveStats, start: Instant) -> SolveResult {
    stats.wall_ms = start.elapsed().as_millis() as u64;
    let status = match (models.is_empty(), hit_limit) {
        (false, _) => Status::Consistent,
        (true, true) => Status::ResourceLimit,
        (true, false) => Status::Inconsistent,
    };
    stats.truncated = hit_limit && !models.is_empty();
    SolveResult { status, models, stats }
}

/// Answer sets of the regular part of `gp`; CR rules are ignored.
pub fn answer_sets(gp: &GroundProgram, opts: &SolveOptions) -> SolveResult {
    let start = Instant::now();
    let c = Compiled::new(gp);
    let mut r = Runner {
        c: &c,
        opts,
        deadline: start + opts.max_time,
        stats: SolveStats::default(),
    };
    let bound = vec![Some(0); c.buckets.len()];
    let (models, hit) = r.run(bound, opts.limit);
    finish(models, hit, r.stats, start)
}

/// Answer sets under the minimal CR-rule application: bucket counts are
/// minimized lexicographically, strongest (lowest priority value) first.
pub fn solve_with_cr(gp: &GroundProgram, opts: &SolveOptions) -> SolveResult {
    let start = Instant::now();
    let c = Compiled::new(gp);
    let mut r = Runner {
        c: &c,
        opts,
        deadline: start + opts.max_time,
        stats: SolveStats::default(),
    };
    let nb = c.buckets.len();
    let (models, hit) = r.run(vec![Some(0); nb], opts.limit);
    if !models.is_empty() || hit || nb == 0 {
        return finish(models, hit, r.stats, start);
    }
    // Any consistent completion at all?
    let (mut witness, hit) = r.run(vec![None; nb], 1);
    if witness.is_empty() {
        return finish(witness, hit, r.stats, start);
    }
    // The witness always satisfies the bounds fixed so far, so its count
    // bounds the search in the next bucket from above.
    let mut bound: Vec<Option<usize>> = vec![None; nb];
    for k in 0..nb {
        let upper = witness[0].cr_counts[k].1;
        let mut chosen = upper;
        for m in 0..upper {
            bound[k] = Some(m);
            let (found, hit) = r.run(bound.clone(), 1);
            if hit {
                return finish(Vec::new(), true, r.stats, start);
            }
            if !found.is_empty() {
                chosen = m;
                witness = found;
                break;
            }
        }
        bound[k] = Some(chosen);
    }
    let (models, hit) = r.run(bound, opts.limit);
    finish(models, hit, r.stats, start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::lang::parse_program;

    fn solve(text: &str) -> (GroundProgram, SolveResult) {
        let gp = ground(&parse_program(text).unwrap()).unwrap();
        let r = solve_with_cr(&gp, &SolveOptions::default());
        (gp, r)
    }

    fn shown(gp: &GroundProgram, r: &SolveResult) -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> = r.models.iter().map(|m| m.literals(gp)).collect();
        v.sort();
        v
    }

    #[test]
    fn even_loop_two_models() {
        let (gp, r) = solve("a :- not b. b :- not a.");
        assert_eq!(shown(&gp, &r), vec![vec!["a"], vec!["b"]]);
    }

    #[test]
    fn direct_contradiction() {
        let (_, r) = solve("a. :- a.");
        assert_eq!(r.status, Status::Inconsistent);
    }

    #[test]
    fn awareness_pattern() {
        let (gp, r) = solve("a | -a.");
        assert_eq!(shown(&gp, &r), vec![vec!["-a"], vec!["a"]]);
    }

    #[test]
    fn positive_loop_is_unfounded() {
        let (gp, r) = solve("a :- b. b :- a. c :- not a.");
        assert_eq!(shown(&gp, &r), vec![vec!["c"]]);
    }

    #[test]
    fn cr_restores_consistency() {
        let (gp, r) = solve(":- not q. q +- .");
        assert_eq!(shown(&gp, &r), vec![vec!["q"]]);
        assert_eq!(r.models[0].applied_cr.len(), 1);
    }

    #[test]
    fn cr_not_used_when_consistent() {
        let (_, r) = solve("p. q +- .");
        assert_eq!(r.models.len(), 1);
        assert!(r.models[0].applied_cr.is_empty());
    }

    #[test]
    fn two_single_restorers() {
        let (gp, r) = solve(":- not a, not b. a +- . b +- .");
        assert_eq!(shown(&gp, &r), vec![vec!["a"], vec!["b"]]);
        assert!(r.models.iter().all(|m| m.applied_cr.len() == 1));
    }

    #[test]
    fn stronger_bucket_minimized_first() {
        // Either one strong rule or two weak rules restore consistency.
        let (gp, r) = solve(":- not g. g :- s. g :- w1, w2. s +- @1. w1 +- @5. w2 +- @5.");
        assert_eq!(shown(&gp, &r), vec![vec!["g", "w1", "w2"]]);
    }

    #[test]
    fn inconsistent_even_with_cr() {
        let (_, r) = solve("a. :- a. q +- .");
        assert_eq!(r.status, Status::Inconsistent);
    }

    #[test]
    fn limit_and_determinism() {
        let text = "a | -a. b | -b. c | -c.";
        let gp = ground(&parse_program(text).unwrap()).unwrap();
        let all = answer_sets(&gp, &SolveOptions::default());
        assert_eq!(all.models.len(), 8);
        let again = answer_sets(&gp, &SolveOptions::default());
        assert_eq!(all.models, again.models);
        assert_eq!(answer_sets(&gp, &SolveOptions::limit(3)).models.len(), 3);
    }

    #[test]
    fn decision_cap_is_reported() {
        let gp = ground(&parse_program("a | -a. b | -b.").unwrap()).unwrap();
        let opts = SolveOptions {
            max_decisions: 0,
            ..SolveOptions::default()
        };
        let r = answer_sets(&gp, &opts);
        assert_eq!(r.status, Status::ResourceLimit);
    }
}
