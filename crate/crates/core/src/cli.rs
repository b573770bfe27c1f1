//! Config file and subcommand implementations behind the `qsde-sim` binary.
//!
//! One JSON file drives every subcommand:
//!
//! ```json
//! { "kappa": 1, "omega": 0, "Omega": 12, "lambda2": 0.16,
//!   "n_slices": 4, "runs": 10240, "seed": 0, "recycle": false }
//! ```
//!
//! `lambda2` may be replaced by `T` and `N`. CSV floats are written with 12
//! significant digits so outputs diff cleanly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::circuit::{emit_qasm, MeasurementBasisPlan};
use crate::conditioning::{condition_exact, record_distribution, FieldBasis, MeasurementRecord};
use crate::error::{Error, Result};
use crate::filters::{run_filter, run_master, FilterKind, Trajectory};
use crate::model::{limit_triple, ModelParams};
use crate::sampler::{run_experiment, stepwise_conditional_means, top_records, total_variation, ExperimentConfig};
use crate::state::{AtomState, Axis};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default = "default_slices")]
    pub n_slices: usize,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub recycle: bool,
    /// Field basis for `compare` and `emit-qasm`; both bases when absent.
    #[serde(default)]
    pub basis: Option<FieldBasis>,
    #[serde(default)]
    pub atom_basis: Option<Axis>,
    /// Master-equation steps; defaults to `N`, then `n_slices`.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub record: Option<String>,
    #[serde(default = "default_threshold")]
    pub z_threshold: f64,
    /// Records with fewer runs than this are tabulated but not scored.
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    #[serde(default)]
    pub decompose_cry: bool,
    #[serde(default)]
    pub lambda_seq: Option<Vec<f64>>,
    #[serde(skip)]
    horizon_steps: Option<usize>,
}

fn default_slices() -> usize {
    4
}
fn default_runs() -> u64 {
    10_240
}
fn default_threshold() -> f64 {
    4.0
}
fn default_min_count() -> u64 {
    100
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        let raw: serde_json::Value = serde_json::from_str(text)?;
        cfg.horizon_steps = raw.get("N").and_then(|n| n.as_u64()).map(|n| n as usize);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn new(params: ModelParams) -> Self {
        RunConfig {
            params,
            n_slices: default_slices(),
            runs: default_runs(),
            seed: 0,
            recycle: false,
            basis: None,
            atom_basis: None,
            steps: None,
            record: None,
            z_threshold: default_threshold(),
            min_count: default_min_count(),
            decompose_cry: false,
            lambda_seq: None,
            horizon_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_slices == 0 {
            return Err(Error::Config("n_slices must be ≥ 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be ≥ 1".into()));
        }
        if !(self.z_threshold > 0.0) {
            return Err(Error::Config("z_threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn master_steps(&self) -> usize {
        self.steps.or(self.horizon_steps).unwrap_or(self.n_slices)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            params: self.params,
            n_slices: self.n_slices,
            runs_per_basis_pair: self.runs,
            master_seed: self.seed,
            recycle: self.recycle,
        }
    }

    fn bases(&self) -> Vec<FieldBasis> {
        self.basis.map_or_else(|| FieldBasis::ALL.to_vec(), |b| vec![b])
    }

    /// Warnings for step sizes where the filters are ill-conditioned.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let theta = self.params.kappa.sqrt() * self.params.lambda;
        if theta >= std::f64::consts::FRAC_PI_2 * 0.9 {
            w.push(format!(
                "√κ·λ = {theta:.3} is close to π/2; filter denominators may underflow"
            ));
        }
        w
    }
}

/// Files written by a subcommand plus its pass/fail verdict.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
}

/// Float with 12 significant digits; `nan` for missing values.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    format!("{x:.11e}")
}

fn write_file(out_dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

/// CSV with header `step,t,sx,sy,sz`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("step,t,sx,sy,sz\n");
    for (l, (t, e)) in traj.times().iter().zip(traj.expectations()).enumerate() {
        let _ = writeln!(s, "{l},{},{},{},{}", fmt12(*t), fmt12(e[0]), fmt12(e[1]), fmt12(e[2]));
    }
    s
}

/// Parses a trajectory CSV back into (t, [sx, sy, sz]) rows.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<(f64, [f64; 3])>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Config(format!("line {}: expected 5 columns", i + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("line {}: {e}", i + 1)));
        rows.push((num(cols[1])?, [num(cols[2])?, num(cols[3])?, num(cols[4])?]));
    }
    Ok(rows)
}

pub fn cmd_master(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let steps = cfg.master_steps();
    let traj = run_master(&cfg.params, steps, AtomState::ground())?;
    let mut files = Vec::new();
    write_file(out_dir, "master.csv", &trajectory_csv(&traj), &mut files)?;
    write_file(out_dir, "plot_master.py", &plot_master_script(), &mut files)?;
    let last = traj.expectations()[steps];
    Ok(Outcome {
        files,
        passed: true,
        summary: format!(
            "master: {steps} steps at λ²={}, final (sx, sy, sz) = ({:.6}, {:.6}, {:.6})",
            cfg.params.lambda2(),
            last[0],
            last[1],
            last[2]
        ),
    })
}

fn record_file_tag(record: &MeasurementRecord) -> String {
    record.to_string().replace('+', "p").replace('-', "m")
}

pub fn cmd_filter(kind: FilterKind, cfg: &RunConfig, record: &str, out_dir: &Path) -> Result<Outcome> {
    let record = MeasurementRecord::parse(record)?;
    let traj = run_filter(kind, &cfg.params, &record)?;
    let name = match kind {
        FilterKind::Homodyne => format!("filter_homodyne_{}.csv", record_file_tag(&record)),
        FilterKind::Counting => format!("filter_counting_{}.csv", record_file_tag(&record)),
    };
    let mut files = Vec::new();
    write_file(out_dir, &name, &trajectory_csv(&traj), &mut files)?;
    let last = traj.expectations()[record.n_slices()];
    Ok(Outcome {
        files,
        passed: true,
        summary: format!("{kind:?} filter on {record}: final (sx, sy, sz) = ({:.6}, {:.6}, {:.6})", last[0], last[1], last[2]),
    })
}

pub fn cmd_sample(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let stats = run_experiment(&cfg.experiment())?;
    let mut csv = String::from("field_basis,record,step,axis,count,mean,stderr\n");
    for s in &stats {
        for r in &s.records {
            for axis in Axis::ALL {
                let a = axis.index();
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    s.field_basis.name(),
                    r.record,
                    s.n_slices,
                    axis.name(),
                    r.counts[a],
                    fmt12(r.means[a]),
                    fmt12(r.stderr[a])
                );
            }
        }
    }
    let json = json!({
        "config": cfg.experiment(),
        "bases": stats.iter().map(|s| json!({
            "field_basis": s.field_basis,
            "n_slices": s.n_slices,
            "runs_per_atom_axis": s.runs_per_atom_axis,
            "records": s.records.iter().map(|r| json!({
                "record": r.record.to_string(),
                "counts": r.counts,
                "means": r.means,
                "stderr": r.stderr,
            })).collect::<Vec<_>>(),
            "top4": top_records(&s.records, 4).iter().map(|r| r.record.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    let mut files = Vec::new();
    write_file(out_dir, "sample.json", &serde_json::to_string_pretty(&json)?, &mut files)?;
    write_file(out_dir, "sample.csv", &csv, &mut files)?;
    Ok(Outcome { files, passed: true, summary: format!("sampled {} runs per basis pair", cfg.runs) })
}

/// One row of the comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub field_basis: FieldBasis,
    pub record: String,
    pub step: usize,
    pub t: f64,
    pub axis: Axis,
    pub count: u64,
    pub sample_mean: f64,
    pub stderr: f64,
    pub filter: f64,
    pub oracle: f64,
    /// (sample − filter) / predicted standard error; NaN when not scored.
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub max_abs_z: f64,
    pub scored: usize,
    pub failures: usize,
    pub filter_oracle_max_diff: f64,
    /// (field basis, total variation of end-time record frequencies vs oracle)
    pub total_variation: Vec<(FieldBasis, f64)>,
    pub passed: bool,
}

/// z-score of the mean of `count` ±1 outcomes against a predicted mean,
/// using the standard error implied by the prediction, √((1 − m²)/count).
/// A certain prediction (|m| = 1) scores 0 on an exact hit and ∞ otherwise.
pub fn z_score(mean: f64, count: u64, predicted: f64) -> f64 {
    let diff = mean - predicted;
    let se = ((1.0 - predicted * predicted).max(0.0) / count as f64).sqrt();
    if se > 1e-12 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY * diff.signum()
    }
}

pub fn compare(cfg: &RunConfig) -> Result<CompareReport> {
    let exp = cfg.experiment();
    let p = &cfg.params;
    let n = cfg.n_slices;
    let mut rows = Vec::new();
    let mut filter_oracle_max_diff: f64 = 0.0;
    let mut total_variations = Vec::new();
    for basis in cfg.bases() {
        let kind = FilterKind::for_basis(basis);
        let stepwise = stepwise_conditional_means(&exp, basis)?;
        let oracle_probs = record_distribution(p, n, basis, &AtomState::ground())?;
        let freqs = stepwise.by_length[n - 1].frequencies();
        let probs: Vec<f64> = oracle_probs.iter().map(|r| r.1).collect();
        total_variations.push((basis, total_variation(&freqs, &probs)));

        for (record, prob) in &oracle_probs {
            if *prob < crate::conditioning::IMPOSSIBLE_PROBABILITY {
                continue;
            }
            let Ok(exact) = condition_exact(p, record, &AtomState::ground()) else { continue };
            let filt = run_filter(kind, p, record)?;
            let filt_e = filt.expectations();
            let estimates = stepwise.trajectory(record);
            for est in &estimates {
                let l = est.step;
                let oracle = if l == 0 { AtomState::ground().bloch() } else { exact[l - 1].rho.bloch() };
                for axis in Axis::ALL {
                    let a = axis.index();
                    let filter = filt_e[l][a];
                    filter_oracle_max_diff = filter_oracle_max_diff.max((filter - oracle[a]).abs());
                    let scored = l > 0 && est.counts[a] >= cfg.min_count;
                    rows.push(CompareRow {
                        field_basis: basis,
                        record: record.to_string(),
                        step: l,
                        t: l as f64 * p.lambda2(),
                        axis,
                        count: est.counts[a],
                        sample_mean: est.means[a],
                        stderr: est.stderr[a],
                        filter,
                        oracle: oracle[a],
                        z: if scored { z_score(est.means[a], est.counts[a], filter) } else { f64::NAN },
                    });
                }
            }
        }
    }
    let scored: Vec<f64> = rows.iter().filter(|r| !r.z.is_nan()).map(|r| r.z.abs()).collect();
    let max_abs_z = scored.iter().copied().fold(0.0, f64::max);
    let failures = scored.iter().filter(|&&z| z > cfg.z_threshold).count();
    let passed = failures == 0 && filter_oracle_max_diff <= 1e-9;
    Ok(CompareReport {
        max_abs_z,
        scored: scored.len(),
        failures,
        filter_oracle_max_diff,
        total_variation: total_variations,
        passed,
        rows,
    })
}

pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let report = compare(cfg)?;
    let mut csv = String::from("field_basis,record,step,t,axis,count,sample_mean,stderr,filter,oracle,z\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.field_basis.name(),
            r.record,
            r.step,
            fmt12(r.t),
            r.axis.name(),
            r.count,
            fmt12(r.sample_mean),
            fmt12(r.stderr),
            fmt12(r.filter),
            fmt12(r.oracle),
            fmt12(r.z)
        );
    }
    let summary = json!({
        "pass": report.passed,
        "z_threshold": cfg.z_threshold,
        "min_count": cfg.min_count,
        "max_abs_z": report.max_abs_z,
        "scored": report.scored,
        "failures": report.failures,
        "filter_oracle_max_diff": report.filter_oracle_max_diff,
        "total_variation": report.total_variation.iter().map(|(b, tv)| json!({"field_basis": b, "tv": tv})).collect::<Vec<_>>(),
        "runs_per_basis_pair": cfg.runs,
        "seed": cfg.seed,
    });
    let mut files = Vec::new();
    write_file(out_dir, "compare.csv", &csv, &mut files)?;
    write_file(out_dir, "compare_summary.json", &serde_json::to_string_pretty(&summary)?, &mut files)?;
    for basis in cfg.bases() {
        let name = format!("plot_compare_{}.py", basis.name());
        write_file(out_dir, &name, &plot_compare_script(basis), &mut files)?;
    }
    Ok(Outcome {
        files,
        passed: report.passed,
        summary: format!(
            "compare: {} scored cells, max |z| = {:.3} (threshold {}), filter-oracle max diff {:.2e}: {}",
            report.scored,
            report.max_abs_z,
            cfg.z_threshold,
            report.filter_oracle_max_diff,
            if report.passed { "PASS" } else { "FAIL" }
        ),
    })
}

pub fn cmd_emit_qasm(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let plan = MeasurementBasisPlan::new(cfg.atom_basis.unwrap_or(Axis::Z), cfg.basis.unwrap_or(FieldBasis::Z));
    let text = emit_qasm(&cfg.params, cfg.n_slices, plan, cfg.decompose_cry)?;
    let mut files = Vec::new();
    let name = format!("chain_{}{}.qasm", plan.atom.name(), plan.field.name());
    write_file(out_dir, &name, &text, &mut files)?;
    Ok(Outcome { files, passed: true, summary: format!("wrote {} slices of OpenQASM 2.0", cfg.n_slices) })
}

pub fn cmd_limits(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let seq = cfg.lambda_seq.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);
    let report = limit_triple(&cfg.params, &seq)?;
    let target = cfg.params.target_triple();
    let err = report.triple.max_abs_diff(&target);
    let lambda_min = *seq.last().unwrap();
    let passed = err <= 10.0 * lambda_min;
    let cmat = |m: &crate::linalg::ComplexMatrix| {
        m.entries().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()
    };
    let json = json!({
        "params": cfg.params,
        "samples": report.samples.iter().map(|s| json!({
            "lambda": s.lambda,
            "adjoint_mismatch": s.adjoint_mismatch,
            "scattering_norm": s.scattering_norm,
            "S": cmat(&s.triple.s),
            "L": cmat(&s.triple.l),
            "H": cmat(&s.triple.h),
        })).collect::<Vec<_>>(),
        "extrapolated": { "S": cmat(&report.triple.s), "L": cmat(&report.triple.l), "H": cmat(&report.triple.h) },
        "target": { "S": cmat(&target.s), "L": cmat(&target.l), "H": cmat(&target.h) },
        "max_error_vs_target": err,
        "adjoint_mismatch_rate": report.adjoint_mismatch_rate,
        "scattering_rate": report.scattering_rate,
        "pass": passed,
    });
    let mut files = Vec::new();
    write_file(out_dir, "limits.json", &serde_json::to_string_pretty(&json)?, &mut files)?;
    Ok(Outcome {
        files,
        passed,
        summary: format!("limits: max |(S,L,H) − target| = {err:.3e} at λ_min = {lambda_min:e}"),
    })
}

fn plot_master_script() -> String {
    r#"# Plots master.csv (Bloch components against time).
import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("master.csv")))
t = [float(r["t"]) for r in rows]
for key in ("sx", "sy", "sz"):
    plt.plot(t, [float(r[key]) for r in rows], label=key)
plt.xlabel("t")
plt.ylabel("expectation")
plt.legend()
plt.savefig("master.png", dpi=150)
"#
    .to_string()
}

fn plot_compare_script(basis: FieldBasis) -> String {
    format!(
        r#"# Plots compare.csv for field basis {b}: sampled means with error bars
# against filter curves, four most frequent records, one figure per axis.
import csv
from collections import defaultdict
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(open("compare.csv")) if r["field_basis"] == "{b}"]
final = defaultdict(int)
last_step = max(int(r["step"]) for r in rows)
for r in rows:
    if int(r["step"]) == last_step and r["axis"] == "z":
        final[r["record"]] = int(r["count"])
top = sorted(final, key=lambda k: (-final[k], k))[:4]
for axis in ("x", "y", "z"):
    fig, axes = plt.subplots(1, len(top), figsize=(4 * len(top), 3), squeeze=False)
    for ax, rec in zip(axes[0], top):
        sel = [r for r in rows if r["record"] == rec and r["axis"] == axis]
        t = [float(r["t"]) for r in sel]
        ax.plot(t, [float(r["filter"]) for r in sel], "k-", label="filter")
        ax.errorbar(t, [float(r["sample_mean"]) for r in sel],
                    yerr=[float(r["stderr"]) if r["stderr"] != "nan" else 0 for r in sel],
                    fmt="o", label="sampled")
        ax.set_title(rec)
        ax.set_ylim(-1.05, 1.05)
    axes[0][0].set_ylabel("<sigma_" + axis + ">")
    axes[0][0].legend()
    fig.tight_layout()
    fig.savefig("compare_{b}_" + axis + ".png", dpi=150)
"#,
        b = basis.name()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_both_step_forms() {
        let a = RunConfig::from_json(r#"{"kappa":1,"omega":0,"Omega":12,"T":4,"N":400}"#).unwrap();
        assert_eq!(a.master_steps(), 400);
        assert!((a.params.lambda2() - 0.01).abs() < 1e-15);
        assert_eq!(a.runs, 10_240);
        let b = RunConfig::from_json(r#"{"kappa":1,"omega":0,"Omega":12,"lambda2":0.16,"n_slices":4,"basis":"z","steps":7}"#).unwrap();
        assert_eq!(b.master_steps(), 7);
        assert_eq!(b.basis, Some(FieldBasis::Z));
        assert!(RunConfig::from_json(r#"{"kappa":1,"omega":0,"Omega":12,"lambda2":0.16,"runs":0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"kappa":1,"omega":0}"#).is_err());
    }

    #[test]
    fn fmt12_is_fixed_width() {
        assert_eq!(fmt12(-1.0), "-1.00000000000e0");
        assert_eq!(fmt12(-0.0), "0.00000000000e0");
        assert_eq!(fmt12(f64::NAN), "nan");
        assert_eq!(fmt12(0.123456789012345), "1.23456789012e-1");
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(z_score(-1.0, 10, -1.0), 0.0);
        assert!(z_score(-0.9, 10, -1.0).is_infinite());
        // predicted 0.6 over 16 shots: se = 0.8 / 4 = 0.2
        assert!((z_score(1.0, 16, 0.6) - 2.0).abs() < 1e-12);
    }
}
