//! Unconditioned atom dynamics: damped Rabi oscillation over t ∈ [0, 4]
//! with 400 slices, checked against the partial trace of the joint state.
//!
//! cargo run --example master_equation

use qsde_sim::conditioning::reduced_dynamics_partial_trace;
use qsde_sim::{run_master, AtomState, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let p = ModelParams::from_horizon(1.0, 0.0, 12.0, 4.0, 400)?;
    let traj = run_master(&p, 400, AtomState::ground())?;
    let oracle = reduced_dynamics_partial_trace(&p, 400, &AtomState::ground())?;
    let worst = traj.states.iter().zip(&oracle).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);

    println!("{:>6} {:>9} {:>9}", "t", "<σx>", "<σz>");
    for (t, e) in traj.times().iter().zip(traj.expectations()).step_by(20) {
        println!("{t:>6.2} {:>9.5} {:>9.5}", e[0], e[2]);
    }
    println!("max deviation from partial-trace oracle: {worst:.2e}");
    Ok(())
}
