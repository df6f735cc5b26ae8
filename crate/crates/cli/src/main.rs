use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mixarch::reason::{current_step, ReasonError};
use mixarch::{
    diagnose, explain_scene, ground, parse_domain, parse_program, parse_scenario, plan, run_benchmark, solve_with_cr, Arch,
    BenchmarkReport, DiagnosisMode, NoiseConfig, PlanConfig, Scenario, SolveOptions, Status, SystemDescription,
};
use serde_json::{json, Value};

const RESTAURANT: &str = include_str!("../../../data/restaurant.dom");
const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "mixarch", version, about = "Plan, diagnose and simulate with a mixed logical/probabilistic robot architecture")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest plan for the scenario's goal.
    Plan {
        domain: PathBuf,
        scenario: PathBuf,
        /// Longest plan to search for.
        #[arg(long, default_value_t = 10)]
        horizon: u32,
        #[arg(long)]
        json: bool,
    },
    /// Explain unexpected observations with exogenous events.
    Diagnose {
        domain: PathBuf,
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Minimal)]
        mode: Mode,
        /// Stop after this many explanations (0 = all).
        #[arg(long, default_value_t = 10)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Candidate class labels of unlabeled objects, once per observation step.
    ExplainScene {
        domain: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Answer sets of a CR-Prolog program.
    Solve {
        program: PathBuf,
        /// Number of answer sets to print (0 = all).
        #[arg(long, default_value_t = 1)]
        models: usize,
        /// Print the ground program on stderr.
        #[arg(long)]
        dump_ground: bool,
        #[arg(long)]
        json: bool,
    },
    /// Simulated delivery trials for one architecture.
    Run {
        #[arg(long, value_enum, default_value_t = ArchArg::Mixed)]
        arch: ArchArg,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also run the mixed architecture on the same tasks.
        #[arg(long)]
        paired: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// All three architectures on the same random tasks.
    Bench {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(clap::Args)]
struct SimArgs {
    /// Domain file; the bundled restaurant domain by default.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Noise-free sensing and motion.
    #[arg(long)]
    perfect: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    All,
    Minimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    Mixed,
    Asp,
    Prob,
}

impl From<ArchArg> for Arch {
    fn from(a: ArchArg) -> Arch {
        match a {
            ArchArg::Mixed => Arch::Mixed,
            ArchArg::Asp => Arch::AspOnly,
            ArchArg::Prob => Arch::ProbGreedy,
        }
    }
}

/// Input problems exit 2; everything else that stops a command exits 1.
enum Fail {
    Input(String),
    Run(String),
}

type Outcome = Result<bool, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load_domain(path: &Path) -> Result<SystemDescription, Fail> {
    parse_domain(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load(domain: &Path, scenario: &Path) -> Result<(SystemDescription, Scenario), Fail> {
    let sd = load_domain(domain)?;
    let sc = parse_scenario(&read(scenario)?, &sd).map_err(|e| Fail::Input(format!("{}: {e}", scenario.display())))?;
    Ok((sd, sc))
}

fn emit(json: bool, value: Value, text: String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
    } else {
        print!("{text}");
    }
}

fn run_err(e: impl std::fmt::Display) -> Fail {
    Fail::Run(e.to_string())
}

fn cmd_plan(domain: &Path, scenario: &Path, horizon: u32, json: bool) -> Outcome {
    let (sd, sc) = load(domain, scenario)?;
    let cfg = PlanConfig {
        max_length: horizon,
        ..PlanConfig::default()
    };
    match plan(&sd, &sc.history, &sc.goal, &cfg) {
        Ok(p) => {
            let mut text = format!("plan of {} actions from step {}\n", p.actions.len(), p.start);
            for a in &p.actions {
                text.push_str(&format!("{}: {}\n", a.step, a.action));
            }
            let actions: Vec<Value> = p.actions.iter().map(|a| json!({"step": a.step, "action": a.action})).collect();
            emit(json, json!({"command": "plan", "status": "found", "start": p.start, "actions": actions}), text);
            Ok(true)
        }
        Err(ReasonError::NoPlan { max_length }) => {
            let text = format!("no plan of length at most {max_length}\n");
            emit(json, json!({"command": "plan", "status": "no-plan", "start": current_step(&sc.history), "actions": []}), text);
            Ok(false)
        }
        Err(ReasonError::InconsistentHistory) => {
            emit(json, json!({"command": "plan", "status": "inconsistent", "start": current_step(&sc.history), "actions": []}), "history is inconsistent\n".into());
            Ok(false)
        }
        Err(e) => Err(run_err(e)),
    }
}

fn cmd_diagnose(domain: &Path, scenario: &Path, mode: Mode, limit: usize, json: bool) -> Outcome {
    let (sd, sc) = load(domain, scenario)?;
    let mode = match mode {
        Mode::All => DiagnosisMode::All,
        Mode::Minimal => DiagnosisMode::MinimalCr,
    };
    let mode_name = match mode {
        DiagnosisMode::All => "all",
        _ => "minimal",
    };
    match diagnose(&sd, &sc.history, mode, &SolveOptions::limit(limit)) {
        Ok(d) => {
            let status = if d.explanations.is_empty() { "consistent" } else { "explained" };
            let mut text = format!("{status}\n");
            for (i, x) in d.explanations.iter().enumerate() {
                let events: Vec<String> = x.events.iter().map(|(e, s)| format!("{e} at {s}")).collect();
                text.push_str(&format!("explanation {}: {}\n", i + 1, events.join("; ")));
            }
            if d.truncated {
                text.push_str("truncated\n");
            }
            let explanations: Vec<Value> = d
                .explanations
                .iter()
                .map(|x| Value::Array(x.events.iter().map(|(e, s)| json!({"event": e, "step": s})).collect()))
                .collect();
            let v = json!({"command": "diagnose", "mode": mode_name, "status": status, "explanations": explanations, "truncated": d.truncated});
            emit(json, v, text);
            Ok(true)
        }
        Err(ReasonError::Unexplainable) => {
            let v = json!({"command": "diagnose", "mode": mode_name, "status": "unexplainable", "explanations": [], "truncated": false});
            emit(json, v, "unexplainable\n".into());
            Ok(false)
        }
        Err(e) => Err(run_err(e)),
    }
}

fn cmd_explain_scene(domain: &Path, scenario: &Path, json: bool) -> Outcome {
    let (sd, sc) = load(domain, scenario)?;
    let mut steps: Vec<u32> = sc.history.observations.iter().map(|o| o.step).collect();
    steps.sort_unstable();
    steps.dedup();
    if steps.is_empty() {
        steps.push(0);
    }
    let mut text = String::new();
    let mut stages = Vec::new();
    let mut explained = true;
    for &stage in &steps {
        let s = explain_scene(&sd, &sc.history, stage, &SolveOptions::default()).map_err(run_err)?;
        text.push_str(&format!("stage {stage}\n"));
        for (obj, labels) in &s.labels {
            text.push_str(&format!("  {obj}: {}\n", labels.join(", ")));
        }
        for obj in &s.unexplainable {
            text.push_str(&format!("  {obj}: unexplainable\n"));
        }
        explained = s.unexplainable.is_empty();
        stages.push(json!({"stage": stage, "labels": s.labels, "relaxed": s.relaxed, "unexplainable": s.unexplainable}));
    }
    emit(json, json!({"command": "explain-scene", "stages": stages}), text);
    Ok(explained)
}

fn cmd_solve(program: &Path, models: usize, dump_ground: bool, json: bool) -> Outcome {
    let prog = parse_program(&read(program)?).map_err(|e| Fail::Input(format!("{}: {e}", program.display())))?;
    let gp = ground(&prog).map_err(|e| Fail::Input(format!("{}: {e}", program.display())))?;
    if dump_ground {
        eprint!("{gp}");
    }
    let r = solve_with_cr(&gp, &SolveOptions::limit(models));
    let status = match r.status {
        Status::Consistent => "consistent",
        Status::Inconsistent => "inconsistent",
        Status::ResourceLimit => "resource-limit",
    };
    let mut text = String::new();
    let mut out = Vec::new();
    for (i, m) in r.models.iter().enumerate() {
        let atoms = m.literals(&gp);
        text.push_str(&format!("answer {}: {}\n", i + 1, atoms.join(" ")));
        if !m.applied_cr.is_empty() {
            let rules: Vec<String> = m.applied_cr.iter().map(|c| c.to_string()).collect();
            text.push_str(&format!("  cr rules applied: {}\n", rules.join(" ")));
        }
        out.push(json!({"atoms": atoms, "applied_cr": m.applied_cr}));
    }
    text.push_str(&format!("{status}\n"));
    emit(json, json!({"command": "solve", "status": status, "models": out}), text);
    Ok(r.status == Status::Consistent)
}

fn simulate(cmd: &str, archs: &[Arch], trials: usize, seed: u64, sim: &SimArgs) -> Result<BenchmarkReport, Fail> {
    let sd = match &sim.domain {
        Some(p) => load_domain(p)?,
        None => parse_domain(RESTAURANT).map_err(run_err)?,
    };
    if trials == 0 {
        return Err(Fail::Input(format!("{cmd}: --trials must be positive")));
    }
    let noise = if sim.perfect { NoiseConfig::perfect() } else { NoiseConfig::default() };
    let workers = sim
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    run_benchmark(&sd, trials, archs, seed, &noise, workers).map_err(run_err)
}

fn summaries(r: &BenchmarkReport) -> Value {
    let per: serde_json::Map<String, Value> = r
        .per_arch
        .iter()
        .map(|(k, s)| (k.clone(), json!({"accuracy": s.accuracy, "time_mean": s.time_mean, "time_std": s.time_std, "n": s.n})))
        .collect();
    Value::Object(per)
}

fn cmd_run(arch: ArchArg, trials: usize, seed: u64, paired: bool, sim: &SimArgs) -> Outcome {
    let mut archs = vec![Arch::from(arch)];
    if paired && arch != ArchArg::Mixed {
        archs.insert(0, Arch::Mixed);
    }
    let r = simulate("run", &archs, trials, seed, sim)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for p in &r.pairs {
        for t in &p.results {
            let outcome = t.outcome.map(|o| serde_json::to_value(o).expect("outcome serializes"));
            let outcome_name = outcome.as_ref().and_then(Value::as_str).unwrap_or("none").to_string();
            text.push_str(&format!(
                "trial {} {}: {}, outcome {outcome_name}, time {}, actions {}, diagnoses {}, replans {}\n",
                t.group,
                t.arch.name(),
                if t.success { "success" } else { "failure" },
                t.time,
                t.actions,
                t.diagnoses,
                t.replans
            ));
            rows.push(json!({
                "group": t.group, "arch": t.arch.name(), "success": t.success, "outcome": outcome,
                "time": t.time, "actions": t.actions, "diagnoses": t.diagnoses, "replans": t.replans,
            }));
        }
    }
    for (name, s) in &r.per_arch {
        text.push_str(&format!("{name}: accuracy {:.3} over {} trials, time {:.1} ± {:.1}\n", s.accuracy, s.n, s.time_mean, s.time_std));
    }
    let all_ok = r.pairs.iter().all(|p| p.results.iter().all(|t| t.success));
    emit(sim.json, json!({"command": "run", "seed": seed, "per_arch": summaries(&r), "trials": rows}), text);
    Ok(all_ok)
}

fn cmd_bench(trials: usize, seed: u64, sim: &SimArgs) -> Outcome {
    let r = simulate("bench", &Arch::ALL, trials, seed, sim)?;
    let mut v = serde_json::to_value(&r).map_err(run_err)?;
    v["command"] = json!("bench");
    v["seed"] = json!(seed);
    emit(sim.json, v, r.table());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan { domain, scenario, horizon, json } => cmd_plan(domain, scenario, *horizon, *json),
        Command::Diagnose { domain, scenario, mode, limit, json } => cmd_diagnose(domain, scenario, *mode, *limit, *json),
        Command::ExplainScene { domain, scenario, json } => cmd_explain_scene(domain, scenario, *json),
        Command::Solve { program, models, dump_ground, json } => cmd_solve(program, *models, *dump_ground, *json),
        Command::Run { arch, trials, seed, paired, sim } => cmd_run(*arch, *trials, *seed, *paired, sim),
        Command::Bench { trials, seed, sim } => cmd_bench(*trials, *seed, sim),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
