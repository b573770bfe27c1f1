//! Exact (non-sampled) conditioning on field records and exact reduced dynamics.
//!
//! Every slice starts with the field qubit in the vacuum, so one slice acts on
//! the atom through the two vacuum-in blocks K_b = ⟨b|U|0⟩. Iterating these 2x2
//! maps gives conditional states for any number of slices without building the
//! 2^(n+1) statevector; [`reduced_dynamics_statevector`] and
//! [`reduced_dynamics_partial_trace`] compute the same objects the long way.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PartialTrace, StateVector, MAX_QUBITS, ZERO};
use crate::model::{build_interaction_unitary, ModelParams};
use crate::state::AtomState;

/// Records with a per-step conditional probability below this are impossible.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-14;

/// Measurement basis of the field qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldBasis {
    /// Quadrature (homodyne); bit 0 is the |+⟩ outcome.
    X,
    /// Photon number (counting); bit 1 is a photon.
    Z,
}

impl FieldBasis {
    pub const ALL: [FieldBasis; 2] = [FieldBasis::X, FieldBasis::Z];

    pub fn name(self) -> &'static str {
        match self {
            FieldBasis::X => "x",
            FieldBasis::Z => "z",
        }
    }
}

/// Ordered per-slice field outcomes, oldest slice first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub basis: FieldBasis,
    pub outcomes: Vec<u8>,
}

impl MeasurementRecord {
    pub fn new(basis: FieldBasis, outcomes: Vec<u8>) -> Result<Self> {
        if let Some(b) = outcomes.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidRecord(format!("outcome {b} is not a bit")));
        }
        Ok(MeasurementRecord { basis, outcomes })
    }

    /// Record from the low `n` bits of `key`, slice 1 in the most significant position.
    pub fn from_key(basis: FieldBasis, key: u64, n: usize) -> Self {
        let outcomes = (0..n).map(|i| ((key >> (n - 1 - i)) & 1) as u8).collect();
        MeasurementRecord { basis, outcomes }
    }

    pub fn key(&self) -> u64 {
        self.outcomes.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn n_slices(&self) -> usize {
        self.outcomes.len()
    }

    pub fn prefix(&self, len: usize) -> MeasurementRecord {
        MeasurementRecord { basis: self.basis, outcomes: self.outcomes[..len].to_vec() }
    }

    /// Every record of length `n` in key order.
    pub fn enumerate(basis: FieldBasis, n: usize) -> impl Iterator<Item = MeasurementRecord> {
        assert!(n < 64);
        (0..1u64 << n).map(move |k| MeasurementRecord::from_key(basis, k, n))
    }

    /// Parses `0010` (z basis) or `+-++` (x basis; `−` also accepted).
    pub fn parse(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.is_empty() {
            return Err(Error::InvalidRecord("empty record".into()));
        }
        if chars.iter().all(|c| matches!(c, '0' | '1')) {
            let bits = chars.iter().map(|&c| (c == '1') as u8).collect();
            return MeasurementRecord::new(FieldBasis::Z, bits);
        }
        if chars.iter().all(|c| matches!(c, '+' | '-' | '−')) {
            let bits = chars.iter().map(|&c| (c != '+') as u8).collect();
            return MeasurementRecord::new(FieldBasis::X, bits);
        }
        Err(Error::InvalidRecord(format!("cannot parse record {s:?}; use 0/1 or +/-")))
    }
}

impl fmt::Display for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.outcomes {
            let c = match (self.basis, b) {
                (FieldBasis::Z, 0) => '0',
                (FieldBasis::Z, _) => '1',
                (FieldBasis::X, 0) => '+',
                (FieldBasis::X, _) => '-',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementRecord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MeasurementRecord::parse(s)
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalResult {
    /// Normalized conditional atom state after this step.
    pub rho: AtomState,
    /// Probability of the record prefix up to and including this step.
    pub probability: f64,
}

/// Vacuum-in Kraus operators of one slice for the given field basis,
/// indexed by outcome bit.
pub fn slice_kraus(p: &ModelParams, basis: FieldBasis) -> Result<[ComplexMatrix; 2]> {
    let u = build_interaction_unitary(p)?.matrix;
    let block = |f_out: usize| {
        let mut b = ComplexMatrix::zeros(2, 2);
        for a_out in 0..2 {
            for a_in in 0..2 {
                b[(a_out, a_in)] = u[(2 * a_out + f_out, 2 * a_in)];
            }
        }
        b
    };
    let (k0, k1) = (block(0), block(1));
    Ok(match basis {
        FieldBasis::Z => [k0, k1],
        FieldBasis::X => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            [(&k0 + &k1).scale_re(h), (&k0 - &k1).scale_re(h)]
        }
    })
}

fn sandwich(k: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    &(k * rho) * &k.adjoint()
}

/// Conditional atom states along `record`, one entry per step l = 1..n.
pub fn condition_exact(p: &ModelParams, record: &MeasurementRecord, atom_init: &AtomState) -> Result<Vec<ConditionalResult>> {
    let kraus = slice_kraus(p, record.basis)?;
    let mut rho = atom_init.matrix().clone();
    let mut cumulative = 1.0;
    let mut out = Vec::with_capacity(record.n_slices());
    for (i, &bit) in record.outcomes.iter().enumerate() {
        let unnorm = sandwich(&kraus[bit as usize], &rho);
        let step_prob = unnorm.trace().re;
        if step_prob < IMPOSSIBLE_PROBABILITY {
            return Err(Error::ImpossibleRecord {
                step: i + 1,
                reason: format!("outcome {bit} has conditional probability {step_prob:e}"),
            });
        }
        rho = unnorm.scale_re(1.0 / step_prob);
        cumulative *= step_prob;
        out.push(ConditionalResult { rho: AtomState::from_matrix_unchecked(rho.clone()), probability: cumulative });
    }
    Ok(out)
}

/// Probability of `record` (zero allowed).
pub fn record_probability(p: &ModelParams, record: &MeasurementRecord, atom_init: &AtomState) -> Result<f64> {
    let kraus = slice_kraus(p, record.basis)?;
    let mut rho = atom_init.matrix().clone();
    for &bit in &record.outcomes {
        rho = sandwich(&kraus[bit as usize], &rho);
    }
    Ok(rho.trace().re.max(0.0))
}

/// Probability of every record of length `n`, in key order.
pub fn record_distribution(p: &ModelParams, n: usize, basis: FieldBasis, atom_init: &AtomState) -> Result<Vec<(MeasurementRecord, f64)>> {
    MeasurementRecord::enumerate(basis, n)
        .map(|r| record_probability(p, &r, atom_init).map(|pr| (r, pr)))
        .collect()
}

/// Unconditional atom states ρ_0..ρ_n (n + 1 entries): ρ_l = Σ_b K_b ρ_{l−1} K_b†.
pub fn reduced_dynamics_exact(p: &ModelParams, n_slices: usize, atom_init: &AtomState) -> Result<Vec<AtomState>> {
    let [k0, k1] = slice_kraus(p, FieldBasis::Z)?;
    let mut rho = atom_init.matrix().clone();
    let mut out = Vec::with_capacity(n_slices + 1);
    out.push(atom_init.clone());
    for _ in 0..n_slices {
        rho = &sandwich(&k0, &rho) + &sandwich(&k1, &rho);
        out.push(AtomState::from_matrix_unchecked(rho.clone()));
    }
    Ok(out)
}

/// Same as [`reduced_dynamics_exact`], but by evolving ρ ⊗ |0⟩⟨0| with the full
/// 4x4 unitary and tracing the field out after every slice.
pub fn reduced_dynamics_partial_trace(p: &ModelParams, n_slices: usize, atom_init: &AtomState) -> Result<Vec<AtomState>> {
    let u = build_interaction_unitary(p)?.matrix;
    let u_dag = u.adjoint();
    let vacuum = ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]]);
    let mut rho = atom_init.matrix().clone();
    let mut out = vec![atom_init.clone()];
    for _ in 0..n_slices {
        let joint = crate::linalg::kron(&rho, &vacuum);
        let evolved = &(&u * &joint) * &u_dag;
        rho = evolved.partial_trace_last_qubits(1)?;
        out.push(AtomState::from_matrix_unchecked(rho.clone()));
    }
    Ok(out)
}

/// Applies a 4x4 operator to (`q0`, `q1`) of a register, qubit 0 most significant.
pub(crate) fn apply_two_qubit(state: &mut StateVector, u: &ComplexMatrix, q0: usize, q1: usize) {
    let n = state.n_qubits();
    let m0 = 1usize << (n - 1 - q0);
    let m1 = 1usize << (n - 1 - q1);
    let amps = state.amplitudes_mut();
    for base in 0..amps.len() {
        if base & (m0 | m1) != 0 {
            continue;
        }
        let idx = [base, base | m1, base | m0, base | m0 | m1];
        let v = idx.map(|i| amps[i]);
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = (0..4).map(|c| u[(r, c)] * v[c]).sum();
        }
    }
}

/// Reduced dynamics from the joint statevector of the atom and all `n` field
/// slices, starting from the pure atom state `a|e⟩ + b|g⟩`. Exponential in `n`.
pub fn reduced_dynamics_statevector(p: &ModelParams, n_slices: usize, atom_init: [Complex64; 2]) -> Result<Vec<AtomState>> {
    if n_slices + 1 > MAX_QUBITS {
        return Err(Error::StatevectorTooLarge { qubits: n_slices + 1, max: MAX_QUBITS });
    }
    let u = build_interaction_unitary(p)?.matrix;
    let atom = StateVector::from_amplitudes(atom_init.to_vec())?;
    let mut field = vec![ZERO; 1 << n_slices];
    field[0] = Complex64::new(1.0, 0.0);
    let mut state = atom.kron(&StateVector::from_amplitudes(field)?)?;
    state.normalize();
    let mut out = vec![AtomState::from_matrix_unchecked(state.partial_trace_last_qubits(n_slices)?)];
    for slice in 1..=n_slices {
        apply_two_qubit(&mut state, &u, 0, slice);
        out.push(AtomState::from_matrix_unchecked(state.partial_trace_last_qubits(n_slices)?));
    }
    Ok(out)
}
