//! Monte Carlo farm: repeated chain runs for every (atom, field) basis pair,
//! grouped by field record.
//!
//! Each run owns a ChaCha8 stream chosen by (step length, basis pair, run index)
//! under the master seed, and results are folded in run order, so the output
//! does not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::circuit::{Chain, MeasurementBasisPlan};
use crate::conditioning::{FieldBasis, MeasurementRecord};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::state::{AtomState, Axis};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QSDE_SIM_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub n_slices: usize,
    pub runs_per_basis_pair: u64,
    pub master_seed: u64,
    pub recycle: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.runs_per_basis_pair == 0 {
            return Err(Error::Config("runs_per_basis_pair must be ≥ 1".into()));
        }
        if self.runs_per_basis_pair >= 1 << 48 {
            return Err(Error::Config("runs_per_basis_pair must be below 2^48".into()));
        }
        if self.n_slices == 0 {
            return Err(Error::Config("n_slices must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Atom statistics of one field record, per atom axis (x, y, z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordStats {
    pub record: MeasurementRecord,
    pub counts: [u64; 3],
    /// Sample means of the ±1 atom outcomes; NaN where the count is zero.
    pub means: [f64; 3],
    /// sqrt((1 − mean²) / count)
    pub stderr: [f64; 3],
}

impl RecordStats {
    pub fn count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self, axis: Axis) -> f64 {
        self.means[axis.index()]
    }

    pub fn stderr(&self, axis: Axis) -> f64 {
        self.stderr[axis.index()]
    }

    fn from_sums(record: MeasurementRecord, counts: [u64; 3], sums: [i64; 3]) -> Self {
        let mut means = [f64::NAN; 3];
        let mut stderr = [f64::NAN; 3];
        for a in 0..3 {
            if counts[a] > 0 {
                let m = sums[a] as f64 / counts[a] as f64;
                means[a] = m;
                stderr[a] = ((1.0 - m * m).max(0.0) / counts[a] as f64).sqrt();
            }
        }
        RecordStats { record, counts, means, stderr }
    }
}

/// All records observed with one field basis, in record-key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldBasisStats {
    pub field_basis: FieldBasis,
    pub n_slices: usize,
    pub runs_per_atom_axis: u64,
    pub records: Vec<RecordStats>,
}

impl FieldBasisStats {
    pub fn get(&self, record: &MeasurementRecord) -> Option<&RecordStats> {
        self.records.iter().find(|r| &r.record == record)
    }

    /// Empirical record frequencies from the z-axis runs, indexed by record key.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.n_slices];
        for r in &self.records {
            f[r.record.key() as usize] = r.counts[Axis::Z.index()] as f64 / self.runs_per_atom_axis as f64;
        }
        f
    }
}

fn thread_pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok().filter(|&n| n > 0)?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
    })
    .as_ref()
}

fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match thread_pool() {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// RNG for one run. Streams are disjoint across (length, pair, run).
pub fn run_rng(master_seed: u64, length: usize, pair: usize, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((length as u64) << 56) | ((pair as u64) << 48) | run);
    rng
}

/// Raw outcomes (record key, atom ±1) of `runs` shots of one basis pair.
pub fn sample_pair(
    params: &ModelParams,
    n_slices: usize,
    recycle: bool,
    plan: MeasurementBasisPlan,
    runs: u64,
    master_seed: u64,
    pair: usize,
) -> Result<Vec<(u64, i8)>> {
    let chain = Chain::new(params, n_slices, recycle, plan)?;
    Ok(install(|| {
        (0..runs)
            .into_par_iter()
            .map(|run| {
                let out = chain.run(&mut run_rng(master_seed, n_slices, pair, run));
                (out.record.key(), out.atom_outcome)
            })
            .collect()
    }))
}

fn experiment_for_length(cfg: &ExperimentConfig, n_slices: usize, bases: &[FieldBasis]) -> Result<Vec<FieldBasisStats>> {
    let mut out = Vec::new();
    for (pair, plan) in MeasurementBasisPlan::all().into_iter().enumerate() {
        if !bases.contains(&plan.field) {
            continue;
        }
        let shots = sample_pair(&cfg.params, n_slices, cfg.recycle, plan, cfg.runs_per_basis_pair, cfg.master_seed, pair)?;
        let entry = match out.iter().position(|s: &(FieldBasis, BTreeMap<u64, ([u64; 3], [i64; 3])>)| s.0 == plan.field) {
            Some(i) => i,
            None => {
                out.push((plan.field, BTreeMap::new()));
                out.len() - 1
            }
        };
        let acc = &mut out[entry].1;
        let a = plan.atom.index();
        for (key, atom) in shots {
            let slot = acc.entry(key).or_insert(([0; 3], [0; 3]));
            slot.0[a] += 1;
            slot.1[a] += atom as i64;
        }
    }
    Ok(out
        .into_iter()
        .map(|(basis, acc)| FieldBasisStats {
            field_basis: basis,
            n_slices,
            runs_per_atom_axis: cfg.runs_per_basis_pair,
            records: acc
                .into_iter()
                .map(|(key, (counts, sums))| RecordStats::from_sums(MeasurementRecord::from_key(basis, key, n_slices), counts, sums))
                .collect(),
        })
        .collect())
}

/// Runs every (atom, field) basis pair and groups atom outcomes by field record.
/// Returns one entry per field basis (x, then z).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<FieldBasisStats>> {
    cfg.validate()?;
    experiment_for_length(cfg, cfg.n_slices, &FieldBasis::ALL)
}

/// The `k` records with the most runs; ties go to the smaller bit string.
pub fn top_records(stats: &[RecordStats], k: usize) -> Vec<RecordStats> {
    let mut sorted: Vec<&RecordStats> = stats.iter().collect();
    sorted.sort_by(|a, b| b.count().cmp(&a.count()).then_with(|| a.record.key().cmp(&b.record.key())));
    sorted.into_iter().take(k).cloned().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub step: usize,
    pub counts: [u64; 3],
    pub means: [f64; 3],
    pub stderr: [f64; 3],
}

/// Conditional means at every intermediate step, each from its own truncated runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepwiseStats {
    pub field_basis: FieldBasis,
    /// `by_length[l - 1]` holds the records of length l.
    pub by_length: Vec<FieldBasisStats>,
}

impl StepwiseStats {
    /// Estimates along `record` for l = 0..=n; step 0 is the exact initial state.
    pub fn trajectory(&self, record: &MeasurementRecord) -> Vec<StepEstimate> {
        let init = AtomState::ground().bloch();
        let mut out = vec![StepEstimate { step: 0, counts: [0; 3], means: init, stderr: [0.0; 3] }];
        for (i, stats) in self.by_length.iter().enumerate() {
            let l = i + 1;
            if l > record.n_slices() {
                break;
            }
            let prefix = record.prefix(l);
            let est = match stats.get(&prefix) {
                Some(r) => StepEstimate { step: l, counts: r.counts, means: r.means, stderr: r.stderr },
                None => StepEstimate { step: l, counts: [0; 3], means: [f64::NAN; 3], stderr: [f64::NAN; 3] },
            };
            out.push(est);
        }
        out
    }
}

/// For each l ≤ n, runs fresh length-l experiments with the given field basis.
pub fn stepwise_conditional_means(cfg: &ExperimentConfig, field_basis: FieldBasis) -> Result<StepwiseStats> {
    cfg.validate()?;
    let by_length = (1..=cfg.n_slices)
        .map(|l| experiment_for_length(cfg, l, &[field_basis]).map(|mut v| v.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StepwiseStats { field_basis, by_length })
}

/// Two-sample chi-square homogeneity test over shared categories.
/// Categories empty in both samples are dropped. Returns (statistic, dof, p-value).
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> (f64, usize, f64) {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        for (obs, n) in [(x as f64, na), (y as f64, nb)] {
            let expected = n * col / total;
            stat += (obs - expected).powi(2) / expected;
        }
    }
    let dof = used.saturating_sub(1);
    let p = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN) };
    (stat, dof, p)
}

/// ½ Σ |p_i − q_i|
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kappa: f64, rabi: f64, runs: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            params: ModelParams::from_lambda2(kappa, 0.0, rabi, 0.16).unwrap(),
            n_slices: 4,
            runs_per_basis_pair: runs,
            master_seed: seed,
            recycle: false,
        }
    }

    #[test]
    fn no_coupling_gives_vacuum_records() {
        let stats = run_experiment(&cfg(0.0, 0.0, 500, 1)).unwrap();
        let z = stats.iter().find(|s| s.field_basis == FieldBasis::Z).unwrap();
        assert_eq!(z.records.len(), 1);
        assert_eq!(z.records[0].record.to_string(), "0000");
        assert_eq!(z.records[0].mean(Axis::Z), -1.0);
        assert_eq!(z.records[0].stderr(Axis::Z), 0.0);
    }

    #[test]
    fn counts_add_up_per_pair() {
        let c = cfg(1.0, 12.0, 2000, 7);
        for s in run_experiment(&c).unwrap() {
            for a in 0..3 {
                assert_eq!(s.records.iter().map(|r| r.counts[a]).sum::<u64>(), 2000);
            }
            for r in &s.records {
                for a in 0..3 {
                    if r.counts[a] > 0 {
                        assert!(r.means[a].abs() <= 1.0);
                        let want = ((1.0 - r.means[a].powi(2)) / r.counts[a] as f64).sqrt();
                        assert!((r.stderr[a] - want).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_stats() {
        let c = cfg(1.0, 12.0, 1000, 42);
        let show = |c: &ExperimentConfig| format!("{:?}", run_experiment(c).unwrap());
        assert_eq!(show(&c), show(&c));
        let other = ExperimentConfig { master_seed: 43, ..c.clone() };
        assert_ne!(show(&c), show(&other));
    }

    fn stats_with_counts(counts: &[(u64, u64)]) -> Vec<RecordStats> {
        counts
            .iter()
            .map(|&(key, n)| RecordStats::from_sums(MeasurementRecord::from_key(FieldBasis::Z, key, 2), [n, 0, 0], [0; 3]))
            .collect()
    }

    #[test]
    fn top_records_ordering() {
        let stats = stats_with_counts(&[(3, 5), (0, 9), (2, 5), (1, 1)]);
        let top: Vec<String> = top_records(&stats, 3).iter().map(|r| r.record.to_string()).collect();
        assert_eq!(top, ["00", "10", "11"]);
        assert!(top_records(&stats, 0).is_empty());
        assert_eq!(top_records(&stats, 10).len(), 4);
        let uniform = stats_with_counts(&[(3, 2), (1, 2), (2, 2), (0, 2)]);
        let order: Vec<String> = top_records(&uniform, 4).iter().map(|r| r.record.to_string()).collect();
        assert_eq!(order, ["00", "01", "10", "11"]);
    }

    #[test]
    fn stepwise_starts_at_ground_and_ends_consistently() {
        let c = ExperimentConfig { n_slices: 2, ..cfg(1.0, 12.0, 500, 3) };
        let sw = stepwise_conditional_means(&c, FieldBasis::Z).unwrap();
        let traj = sw.trajectory(&"00".parse().unwrap());
        assert_eq!(traj[0].means, [0.0, 0.0, -1.0]);
        assert_eq!(traj.len(), 3);
        // the last length uses the same streams as a full experiment of that length
        let full = run_experiment(&c).unwrap();
        let z = full.iter().find(|s| s.field_basis == FieldBasis::Z).unwrap();
        let last = z.get(&"00".parse().unwrap()).unwrap();
        assert_eq!(traj[2].counts, last.counts);
        assert_eq!(traj[2].means, last.means);
    }

    #[test]
    fn chi_square_sanity() {
        let (stat, dof, p) = chi_square_homogeneity(&[50, 50, 0], &[50, 50, 0]);
        assert_eq!((stat, dof), (0.0, 1));
        assert!((p - 1.0).abs() < 1e-12);
        let (_, _, p) = chi_square_homogeneity(&[900, 100], &[100, 900]);
        assert!(p < 1e-10);
    }

    #[test]
    fn rejects_zero_runs() {
        assert!(run_experiment(&cfg(1.0, 1.0, 0, 0)).is_err());
    }
}
