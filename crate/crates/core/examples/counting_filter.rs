//! Photon-counting filter along a record, next to exact conditioning.
//!
//! cargo run --example counting_filter -- 0010

use qsde_sim::conditioning::record_probability;
use qsde_sim::{condition_exact, run_filter, AtomState, FilterKind, MeasurementRecord, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "0010".into());
    let record = MeasurementRecord::parse(&arg)?;
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;

    let traj = run_filter(FilterKind::Counting, &p, &record)?;
    let exact = condition_exact(&p, &record, &AtomState::ground())?;
    println!("record {record}, probability {:.5}", record_probability(&p, &record, &AtomState::ground())?);
    println!("{:>4} {:>5} {:>9} {:>9} {:>9} {:>9}", "step", "dY", "<σx>", "<σy>", "<σz>", "|Δ|");
    for (l, e) in traj.expectations().iter().enumerate() {
        let dy = if l == 0 { "-".to_string() } else { record.outcomes[l - 1].to_string() };
        let diff = if l == 0 { 0.0 } else { traj.states[l].max_abs_diff(&exact[l - 1].rho) };
        println!("{l:>4} {dy:>5} {:>9.5} {:>9.5} {:>9.5} {diff:>9.1e}", e[0], e[1], e[2]);
    }
    Ok(())
}
