mod common;

use common::{restaurant, scenario};
use mixarch::belief::NoiseConfig;
use mixarch::sim::{run_trial, Arch, TrialConfig};

#[test]
fn example_one_loop_recovers_from_locked_door() {
    let sd = restaurant();
    let sc = scenario(&sd, "ex1.scn");
    let cfg = TrialConfig::new(Arch::Mixed, sc, NoiseConfig::perfect(), 7);
    let r = run_trial(&sd, &cfg).unwrap();
    eprintln!("{r:?}");
    assert!(r.success);
    assert_eq!((r.diagnoses, r.replans), (1, 1));
}
