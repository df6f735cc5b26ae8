//! Planning and execution engine coupling answer-set reasoning with Bayesian
//! belief revision for a simulated restaurant-waiter robot.

pub mod lang;
pub mod ground;
pub mod translate;
pub mod solve;
pub mod reason;
pub mod belief;
pub mod sim;

pub use belief::{BeliefState, ExecutionPolicy, NoiseConfig, SensorModel};
pub use ground::{ground, GroundProgram};
pub use lang::{parse_domain, parse_program, parse_scenario, Atom, History, Literal, Program, Scenario, SystemDescription, Term};
pub use reason::{diagnose, explain_scene, plan, run_agent_loop, Interpreter, Plan, PlanConfig, ReasonError, State};
pub use sim::{run_benchmark, run_trial, Arch, BenchmarkReport, TrialConfig, TrialResult};
pub use solve::{answer_sets, solve_with_cr, AnswerSet, SolveOptions, SolveResult, Status};
pub use translate::{translate, DiagnosisMode, TranslationConfig};
