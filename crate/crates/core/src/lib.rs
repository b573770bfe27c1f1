//! Repeated-interaction simulation of a laser-driven, decaying two-level atom.
//!
//! The atom interacts with one fresh field qubit per time slice of length λ².
//! This crate builds that slice unitary, runs it as a qubit circuit (with or
//! without recycling the field qubit), and checks the sampled statistics
//! against exact conditioning and the discrete master and filter equations.
//!
//! ```
//! use qsde_sim::{coefficients, run_filter, FilterKind, MeasurementRecord, ModelParams};
//!
//! let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;
//! let record: MeasurementRecord = "0010".parse()?;
//! let traj = run_filter(FilterKind::Counting, &p, &record)?;
//! assert_eq!(traj.expectations()[0], [0.0, 0.0, -1.0]);
//! assert!(coefficients(&p)?.m_plus.max_abs() > 0.0);
//! # Ok::<(), qsde_sim::Error>(())
//! ```
//!
//! Module map:
//!
//! - [`linalg`]: small dense complex matrices, statevectors, `kron`, `expm`, partial trace
//! - [`model`]: slice unitary, noise coefficients, small-step limits
//! - [`circuit`]: gate-level slice, chain simulator, OpenQASM export
//! - [`conditioning`]: exact conditional and reduced atom dynamics
//! - [`filters`]: discrete master equation, homodyne and counting filters
//! - [`sampler`]: seeded parallel Monte Carlo over basis pairs
//! - [`cli`]: config file and the subcommands behind the `qsde-sim` binary

pub mod circuit;
pub mod cli;
pub mod conditioning;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod state;

pub use circuit::{build_slice_circuit, emit_qasm, simulate_chain, MeasurementBasisPlan, SliceCircuit};
pub use conditioning::{condition_exact, reduced_dynamics_exact, FieldBasis, MeasurementRecord};
pub use error::{Error, Result};
pub use filters::{run_filter, run_master, FilterKind, Trajectory};
pub use linalg::{ComplexMatrix, StateVector};
pub use model::{build_interaction_unitary, coefficients, extract_coefficients, limit_triple, CoefficientSet, ModelParams};
pub use sampler::{run_experiment, stepwise_conditional_means, top_records, ExperimentConfig, RecordStats};
pub use state::{AtomState, Axis};
