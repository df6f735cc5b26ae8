use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mixarch::belief::{bayes_update, init_belief, Prior};
use mixarch::{
    answer_sets, diagnose, explain_scene, ground, parse_program, plan, run_benchmark, Arch, Atom, DiagnosisMode, Literal,
    NoiseConfig, PlanConfig, SensorModel, SolveOptions,
};
use mixarch_bench::{pigeonhole, restaurant, scenario};

fn solving(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for holes in [3, 4, 5] {
        let gp = ground(&parse_program(&pigeonhole(holes + 1, holes)).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("pigeonhole_unsat", holes), &gp, |b, gp| {
            b.iter(|| answer_sets(gp, &SolveOptions::limit(1)))
        });
        let gp = ground(&parse_program(&pigeonhole(holes, holes)).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::new("pigeonhole_all", holes), &gp, |b, gp| {
            b.iter(|| answer_sets(gp, &SolveOptions::limit(0)))
        });
    }
    g.finish();
}

fn reasoning(c: &mut Criterion) {
    let sd = restaurant();
    let ex1 = scenario(&sd, "ex1");
    let ex2 = scenario(&sd, "ex2");
    let locked = scenario(&sd, "locked_door");
    let mut g = c.benchmark_group("reason");
    g.sample_size(20);
    g.bench_function("plan_example_1", |b| {
        b.iter(|| plan(&sd, &ex1.history, &ex1.goal, &PlanConfig::default()).unwrap())
    });
    g.bench_function("diagnose_locked_door", |b| {
        b.iter(|| diagnose(&sd, &locked.history, DiagnosisMode::MinimalCr, &SolveOptions::default()).unwrap())
    });
    g.bench_function("explain_scene_example_2", |b| {
        b.iter(|| explain_scene(&sd, &ex2.history, 1, &SolveOptions::default()).unwrap())
    });
    g.finish();
}

fn filtering(c: &mut Criterion) {
    let lits: Vec<Literal> = (0..8).map(|i| Literal::pos(Atom::ground("has_location", &["ds1", &format!("a{i}")]))).collect();
    let start = init_belief(lits, &Prior::Uniform).unwrap();
    let m = SensorModel { tp: 0.8, fp: 0.1 };
    c.bench_function("bayes_update_8", |b| b.iter(|| bayes_update(black_box(&start), 3, true, m).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let sd = restaurant();
    let mut g = c.benchmark_group("sim");
    g.sample_size(10);
    for arch in Arch::ALL {
        g.bench_function(BenchmarkId::new("trial", arch.name()), |b| {
            b.iter(|| run_benchmark(&sd, 1, &[arch], 7, &NoiseConfig::default(), 1).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, solving, reasoning, filtering, simulation);
criterion_main!(benches);
