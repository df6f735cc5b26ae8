use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::belief::NoiseConfig;
use crate::lang::{Atom, Body, History, InitialDefault, Literal, Scenario, SystemDescription};

use super::{run_trial, Arch, SimError, TrialConfig, TrialResult};

/// A randomized fetch task on the restaurant map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskSpec {
    pub robot_at: String,
    pub dish_at: String,
    pub target: String,
    /// Doors that start closed.
    pub closed: Vec<String>,
}

/// Robot anywhere; the dish usually where the defaults say (0.7 on the
/// first, 0.2 on the second, otherwise any other area); target an area that
/// is neither the dish's nor one the defaults name, so the goal is never
/// believed at the start; each door closed with probability one half.
pub fn random_task(sd: &SystemDescription, rng: &mut impl Rng) -> TaskSpec {
    let areas = sd.sorts.instances_of("area");
    let doors = sd.sorts.instances_of("door");
    let pick = |rng: &mut dyn rand::RngCore, xs: &[String]| xs[rng.gen_range(0..xs.len())].clone();
    let robot_at = pick(rng, &areas);
    let r: f64 = rng.gen();
    let dish_at = if r < 0.7 {
        "a6".to_string()
    } else if r < 0.9 {
        "a4".to_string()
    } else {
        let rest: Vec<String> = areas.iter().filter(|a| *a != "a6" && *a != "a4").cloned().collect();
        pick(rng, &rest)
    };
    let others: Vec<String> = areas
        .iter()
        .filter(|a| **a != dish_at && *a != "a6" && *a != "a4")
        .cloned()
        .collect();
    let target = pick(rng, &others);
    let closed = doors.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    TaskSpec {
        robot_at,
        dish_at,
        target,
        closed,
    }
}

fn atom(pred: &str, args: &[&str]) -> Atom {
    Atom::ground(pred, args)
}

impl TaskSpec {
    /// The task as a scenario: what the robot knows at step 0, the dish
    /// defaults, the goal, and the true initial world.
    pub fn scenario(&self, sd: &SystemDescription) -> Scenario {
        let mut h = History::default();
        h.observe(atom("has_location", &["robot", &self.robot_at]), true, 0);
        for d in sd.sorts.instances_of("door") {
            h.observe(atom("is_open", &[&d]), !self.closed.contains(&d), 0);
            h.observe(atom("is_locked", &[&d]), false, 0);
        }
        for (thing, at) in [("p1", "a6"), ("t1", "a1"), ("ob1", "a5")] {
            h.observe(atom("has_location", &[thing, at]), true, 0);
        }
        for o in ["ds1", "ob1", "t1"] {
            h.observe(atom("in_hand", &["robot", o]), false, 0);
        }
        h.observe(atom("found", &["p1"]), false, 0);
        let dish_here = |a: &str| Literal::pos(atom("has_location", &["ds1", a]));
        h.defaults = vec![
            InitialDefault {
                id: "dish_side_table".into(),
                head: dish_here("a6"),
                body: Body::default(),
                priority: 1,
            },
            InitialDefault {
                id: "dish_kitchen".into(),
                head: dish_here("a4"),
                body: Body {
                    lits: vec![dish_here("a6").complement()],
                    cmps: Vec::new(),
                },
                priority: 2,
            },
        ];
        let mut truth: Vec<Literal> = h
            .observations
            .iter()
            .filter(|o| o.value)
            .map(|o| Literal::pos(o.fluent.clone()))
            .collect();
        truth.push(dish_here(&self.dish_at));
        Scenario {
            history: h,
            goal: vec![
                Literal::pos(atom("has_location", &["ds1", &self.target])),
                Literal::neg(atom("in_hand", &["robot", "ds1"])),
            ],
            script: Vec::new(),
            truth,
            noise: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArchSummary {
    pub accuracy: f64,
    pub time_mean: f64,
    pub time_std: f64,
    pub n: usize,
    /// Accuracy relative to the mixed architecture's.
    pub accuracy_factor: f64,
    /// Mean and spread of the per-pair time ratio to the mixed
    /// architecture, over pairs both completed (completion time is only
    /// defined for completed tasks).
    pub time_factor: f64,
    pub time_factor_std: f64,
    /// Pairs the ratio was taken over.
    pub time_pairs: usize,
    /// The same ratio over every pair, completed or not.
    pub time_factor_all: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRecord {
    pub group: u64,
    pub task: TaskSpec,
    pub results: Vec<TrialResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignTest {
    pub plus: usize,
    pub minus: usize,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub per_arch: BTreeMap<String, ArchSummary>,
    /// Mixed succeeds where asp-only fails (plus) versus the reverse.
    pub accuracy_mixed_vs_asp: Option<SignTest>,
    /// Greedy slower than mixed (plus) versus faster, over pairs both
    /// completed.
    pub time_greedy_vs_mixed: Option<SignTest>,
    pub pairs: Vec<PairRecord>,
}

/// Two-sided exact sign test over the non-tied pairs.
pub fn sign_test(plus: usize, minus: usize) -> SignTest {
    let n = plus + minus;
    let k = plus.min(minus);
    // P(X <= k) for X ~ Bin(n, 1/2), in log space
    let mut ln_choose = 0.0f64;
    let mut tail = 0.0f64;
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_choose + ln_half_n).exp();
    }
    SignTest {
        plus,
        minus,
        p_value: if n == 0 { 1.0 } else { (2.0 * tail).min(1.0) },
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

fn run_group(sd: &SystemDescription, archs: &[Arch], noise: &NoiseConfig, seed: u64, group: u64) -> Result<PairRecord, SimError> {
    let group_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(group);
    let mut rng = ChaCha8Rng::seed_from_u64(group_seed);
    let task = random_task(sd, &mut rng);
    let scenario = task.scenario(sd);
    let mut results = Vec::new();
    for &arch in archs {
        let mut cfg = TrialConfig::new(arch, scenario.clone(), noise.clone(), group_seed);
        cfg.group = group;
        cfg.agent.plan.max_length = 14;
        results.push(run_trial(sd, &cfg)?);
    }
    Ok(PairRecord { group, task, results })
}

/// `n` paired trial groups; each group draws one task and runs every
/// architecture on it with the same seed. Groups run on worker threads
/// and are merged in group order.
pub fn run_benchmark(
    sd: &SystemDescription,
    n: usize,
    archs: &[Arch],
    seed: u64,
    noise: &NoiseConfig,
    workers: usize,
) -> Result<BenchmarkReport, SimError> {
    let workers = workers.max(1).min(n.max(1));
    let mut slots: Vec<Option<Result<PairRecord, SimError>>> = vec![None; n];
    std::thread::scope(|scope| {
        let chunks: Vec<(usize, &mut [Option<Result<PairRecord, SimError>>])> = {
            let mut out = Vec::new();
            let mut rest = slots.as_mut_slice();
            let mut start = 0;
            let size = n.div_ceil(workers).max(1);
            while !rest.is_empty() {
                let take = size.min(rest.len());
                let (a, b) = rest.split_at_mut(take);
                out.push((start, a));
                start += take;
                rest = b;
            }
            out
        };
        for (start, chunk) in chunks {
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run_group(sd, archs, noise, seed, (start + k) as u64));
                }
            });
        }
    });
    let pairs: Vec<PairRecord> = slots.into_iter().map(|s| s.expect("every group ran")).collect::<Result<_, _>>()?;
    Ok(summarize(archs, pairs))
}

fn summarize(archs: &[Arch], pairs: Vec<PairRecord>) -> BenchmarkReport {
    let of = |p: &PairRecord, a: Arch| p.results.iter().find(|r| r.arch == a).cloned();
    let mixed_acc = {
        let xs: Vec<f64> = pairs.iter().filter_map(|p| of(p, Arch::Mixed)).map(|r| r.success as u8 as f64).collect();
        mean_std(&xs).0
    };
    let mut per_arch = BTreeMap::new();
    for &a in archs {
        let rs: Vec<TrialResult> = pairs.iter().filter_map(|p| of(p, a)).collect();
        let acc = mean_std(&rs.iter().map(|r| r.success as u8 as f64).collect::<Vec<_>>()).0;
        let (tm, ts) = mean_std(&rs.iter().map(|r| r.time as f64).collect::<Vec<_>>());
        let both: Vec<(TrialResult, TrialResult)> = pairs
            .iter()
            .filter_map(|p| Some((of(p, a)?, of(p, Arch::Mixed)?)))
            .filter(|(_, m)| m.time > 0)
            .collect();
        let ratio = |(r, m): &(TrialResult, TrialResult)| r.time as f64 / m.time as f64;
        let done: Vec<f64> = both.iter().filter(|(r, m)| r.success && m.success).map(ratio).collect();
        let (tf, tfs) = mean_std(&done);
        let all = mean_std(&both.iter().map(ratio).collect::<Vec<_>>()).0;
        per_arch.insert(
            a.name().to_string(),
            ArchSummary {
                accuracy: acc,
                time_mean: tm,
                time_std: ts,
                n: rs.len(),
                accuracy_factor: if mixed_acc > 0.0 { acc / mixed_acc } else { 0.0 },
                time_factor: tf,
                time_factor_std: tfs,
                time_pairs: done.len(),
                time_factor_all: all,
            },
        );
    }
    let paired = |a: Arch, b: Arch, completed: bool, f: &dyn Fn(&TrialResult, &TrialResult) -> std::cmp::Ordering| {
        let (mut plus, mut minus) = (0, 0);
        for p in &pairs {
            let (Some(x), Some(y)) = (of(p, a), of(p, b)) else {
                return None;
            };
            if completed && !(x.success && y.success) {
                continue;
            }
            match f(&x, &y) {
                std::cmp::Ordering::Greater => plus += 1,
                std::cmp::Ordering::Less => minus += 1,
                std::cmp::Ordering::Equal => {}
            }
        }
        Some(sign_test(plus, minus))
    };
    BenchmarkReport {
        accuracy_mixed_vs_asp: paired(Arch::Mixed, Arch::AspOnly, false, &|x, y| x.success.cmp(&y.success)),
        time_greedy_vs_mixed: paired(Arch::ProbGreedy, Arch::Mixed, true, &|x, y| x.time.cmp(&y.time)),
        per_arch,
        pairs,
    }
}

impl BenchmarkReport {
    /// Accuracy and time as factors of the mixed architecture's values.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14}{:>10}{:>18}", "Architecture", "Accuracy", "Time");
        for a in Arch::ALL {
            if let Some(x) = self.per_arch.get(a.name()) {
                let time = if a == Arch::Mixed {
                    "1".to_string()
                } else {
                    format!("{:.2} ± {:.2}", x.time_factor, x.time_factor_std)
                };
                let _ = writeln!(s, "{:<14}{:>10.2}{:>18}", a.name(), x.accuracy_factor, time);
            }
        }
        let _ = writeln!(s);
        for a in Arch::ALL {
            if let Some(x) = self.per_arch.get(a.name()) {
                let _ = writeln!(
                    s,
                    "{:<14} success {:.3} over {} trials, time {:.1} ± {:.1}, time factor {:.2} over {} completed pairs ({:.2} over all)",
                    a.name(),
                    x.accuracy,
                    x.n,
                    x.time_mean,
                    x.time_std,
                    x.time_factor,
                    x.time_pairs,
                    x.time_factor_all
                );
            }
        }
        if let Some(t) = &self.accuracy_mixed_vs_asp {
            let _ = writeln!(s, "sign test, accuracy mixed > asp-only: +{} -{} p = {:.3e}", t.plus, t.minus, t.p_value);
        }
        if let Some(t) = &self.time_greedy_vs_mixed {
            let _ = writeln!(s, "sign test, time prob-greedy > mixed: +{} -{} p = {:.3e}", t.plus, t.minus, t.p_value);
        }
        s
    }
}
