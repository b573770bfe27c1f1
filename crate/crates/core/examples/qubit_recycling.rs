//! One field qubit, measured and reset after every slice, against a fresh
//! qubit per slice. Prints both record histograms and a chi-square test.
//!
//! cargo run --release --example qubit_recycling

use qsde_sim::conditioning::record_distribution;
use qsde_sim::sampler::{chi_square_homogeneity, sample_pair};
use qsde_sim::{AtomState, Axis, FieldBasis, MeasurementBasisPlan, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;
    let plan = MeasurementBasisPlan::new(Axis::Z, FieldBasis::Z);
    let runs = 100_000;
    let hist = |recycle: bool, seed: u64| -> qsde_sim::Result<Vec<u64>> {
        let mut h = vec![0u64; 16];
        for (key, _) in sample_pair(&p, 4, recycle, plan, runs, seed, 5)? {
            h[key as usize] += 1;
        }
        Ok(h)
    };
    let (recycled, fresh) = (hist(true, 1)?, hist(false, 2)?);
    let oracle = record_distribution(&p, 4, FieldBasis::Z, &AtomState::ground())?;
    println!("{:>6} {:>9} {:>9} {:>9}", "record", "recycled", "fresh", "exact");
    for (i, (record, prob)) in oracle.iter().enumerate() {
        println!(
            "{:>6} {:>9.5} {:>9.5} {:>9.5}",
            record.to_string(),
            recycled[i] as f64 / runs as f64,
            fresh[i] as f64 / runs as f64,
            prob
        );
    }
    let (stat, dof, pval) = chi_square_homogeneity(&recycled, &fresh);
    println!("χ² = {stat:.2} on {dof} dof, p = {pval:.4}");
    Ok(())
}
