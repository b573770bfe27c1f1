//! Monte Carlo run of the circuit for all six basis pairs, then the four
//! most frequent records per field basis with their sampled atom means and
//! the filter predictions.
//!
//! cargo run --release --example sample_experiment -- 10240 7

use qsde_sim::{run_experiment, run_filter, top_records, ExperimentConfig, FilterKind, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_240);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let cfg = ExperimentConfig {
        params: ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?,
        n_slices: 4,
        runs_per_basis_pair: runs,
        master_seed: seed,
        recycle: false,
    };
    for stats in run_experiment(&cfg)? {
        let kind = FilterKind::for_basis(stats.field_basis);
        println!("field basis {}:", stats.field_basis.name());
        for r in top_records(&stats.records, 4) {
            let f = run_filter(kind, &cfg.params, &r.record)?.last().bloch();
            println!("  {} ({} runs on z)", r.record, r.counts[2]);
            for (a, name) in ["x", "y", "z"].iter().enumerate() {
                println!(
                    "    <σ{name}> sampled {:>8.4} ± {:.4}   filter {:>8.4}",
                    r.means[a], r.stderr[a], f[a]
                );
            }
        }
    }
    Ok(())
}
