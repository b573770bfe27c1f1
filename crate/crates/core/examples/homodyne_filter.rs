//! Homodyne filter for every record of four slices, with record
//! probabilities and the end-time Bloch vector.
//!
//! cargo run --example homodyne_filter

use qsde_sim::conditioning::record_distribution;
use qsde_sim::{run_filter, AtomState, FieldBasis, FilterKind, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;
    println!("{:>6} {:>8} {:>9} {:>9} {:>9}", "record", "prob", "<σx>", "<σy>", "<σz>");
    for (record, prob) in record_distribution(&p, 4, FieldBasis::X, &AtomState::ground())? {
        let e = run_filter(FilterKind::Homodyne, &p, &record)?.last().bloch();
        println!("{:>6} {prob:>8.5} {:>9.5} {:>9.5} {:>9.5}", record.to_string(), e[0], e[1], e[2]);
    }
    Ok(())
}
