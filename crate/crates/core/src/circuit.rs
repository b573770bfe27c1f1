//! Gate-level slice circuit, a statevector simulator for the slice chain and
//! OpenQASM 2.0 export.
//!
//! Gate conventions: `Ry(θ) = exp(−iθσ_y/2)`, `Rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
//! Measurement outcomes are bits; the ±1 eigenvalue of a bit `b` is `1 − 2b`.
//!
//! With the atom's |e⟩ on |0⟩, the drive and detuning are a plain Ry and Rz on
//! the atom. The coupling rotates |e,vac⟩ into |g,photon⟩ (|00⟩ ↔ |11⟩): a CNOT
//! maps that pair onto field = 0, so the controlled-Ry fires on the field's
//! |0⟩, which is what the X gates around it arrange.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditioning::{FieldBasis, MeasurementRecord};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, I, MAX_QUBITS, ONE, ZERO};
use crate::model::ModelParams;
use crate::state::Axis;

pub const ATOM: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    X { target: usize },
    H { target: usize },
    Sdg { target: usize },
    Cnot { control: usize, target: usize },
    Cry { control: usize, target: usize, angle: f64 },
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Ry { target, .. } | Gate::Rz { target, .. } | Gate::X { target } | Gate::H { target } | Gate::Sdg { target } => (target, None),
            Gate::Cnot { control, target } | Gate::Cry { control, target, .. } => (target, Some(control)),
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } | Gate::Cry { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// The same gate on relabelled qubits.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::Ry { target, angle } => Gate::Ry { target: map(target), angle },
            Gate::Rz { target, angle } => Gate::Rz { target: map(target), angle },
            Gate::X { target } => Gate::X { target: map(target) },
            Gate::H { target } => Gate::H { target: map(target) },
            Gate::Sdg { target } => Gate::Sdg { target: map(target) },
            Gate::Cnot { control, target } => Gate::Cnot { control: map(control), target: map(target) },
            Gate::Cry { control, target, angle } => Gate::Cry { control: map(control), target: map(target), angle },
        }
    }

    /// 2x2 action on the target (applied where the control, if any, is |1⟩).
    fn target_matrix(&self) -> [[Complex64; 2]; 2] {
        let r = |x: f64| Complex64::new(x, 0.0);
        let ry = |angle: f64| {
            let (s, c) = (angle / 2.0).sin_cos();
            [[r(c), r(-s)], [r(s), r(c)]]
        };
        match *self {
            Gate::Ry { angle, .. } | Gate::Cry { angle, .. } => ry(angle),
            Gate::Rz { angle, .. } => [[Complex64::from_polar(1.0, -angle / 2.0), ZERO], [ZERO, Complex64::from_polar(1.0, angle / 2.0)]],
            Gate::X { .. } | Gate::Cnot { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Gate::H { .. } => {
                let h = r(std::f64::consts::FRAC_1_SQRT_2);
                [[h, h], [h, -h]]
            }
            Gate::Sdg { .. } => [[ONE, ZERO], [ZERO, -I]],
        }
    }

    pub fn apply(&self, state: &mut StateVector) {
        let (target, control) = self.qubits();
        let n = state.n_qubits();
        let tmask = 1usize << (n - 1 - target);
        let cmask = control.map_or(0, |c| 1usize << (n - 1 - c));
        let m = self.target_matrix();
        let amps = state.amplitudes_mut();
        for i in 0..amps.len() {
            if i & tmask != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tmask;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn qasm(&self, out: &mut String) {
        let _ = match *self {
            Gate::Ry { target, angle } => writeln!(out, "ry({angle}) q[{target}];"),
            Gate::Rz { target, angle } => writeln!(out, "rz({angle}) q[{target}];"),
            Gate::X { target } => writeln!(out, "x q[{target}];"),
            Gate::H { target } => writeln!(out, "h q[{target}];"),
            Gate::Sdg { target } => writeln!(out, "sdg q[{target}];"),
            Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
            // cu3(θ, 0, 0) is exactly the controlled Ry(θ).
            Gate::Cry { control, target, angle } => writeln!(out, "cu3({angle},0,0) q[{control}],q[{target}];"),
        };
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let seq = GateSequence { n_qubits, gates };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            let (t, c) = g.qubits();
            if t >= self.n_qubits || c.is_some_and(|c| c >= self.n_qubits || c == t) {
                return Err(Error::DimensionMismatch(format!("gate {g:?} outside a {}-qubit register", self.n_qubits)));
            }
            if g.angle().is_some_and(|a| !a.is_finite()) {
                return Err(Error::InvalidParams(format!("non-finite angle in {g:?}")));
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut StateVector) {
        for g in &self.gates {
            g.apply(state);
        }
    }

    /// Full unitary, column j being the image of basis state |j⟩.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = 1usize << self.n_qubits;
        let mut u = ComplexMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut amps = vec![ZERO; dim];
            amps[j] = ONE;
            let mut s = StateVector::from_amplitudes(amps)?;
            self.apply(&mut s);
            for (i, a) in s.amplitudes().iter().enumerate() {
                u[(i, j)] = *a;
            }
        }
        Ok(u)
    }

    /// Replaces every controlled-Ry with `ry(θ/2); cx; ry(−θ/2); cx`.
    pub fn decompose_cry(&self) -> GateSequence {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            match *g {
                Gate::Cry { control, target, angle } => gates.extend([
                    Gate::Ry { target, angle: angle / 2.0 },
                    Gate::Cnot { control, target },
                    Gate::Ry { target, angle: -angle / 2.0 },
                    Gate::Cnot { control, target },
                ]),
                other => gates.push(other),
            }
        }
        GateSequence { n_qubits: self.n_qubits, gates }
    }
}

/// One slice on (atom = 0, field = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SliceCircuit {
    pub gates: GateSequence,
}

impl SliceCircuit {
    /// The drive rotation, detuning, and coupling gates with angles Ωλ², ωλ², 2√κλ.
    pub fn drive_angle(&self) -> f64 {
        self.gates.gates.iter().find_map(|g| matches!(g, Gate::Ry { target: ATOM, .. }).then(|| g.angle().unwrap())).unwrap_or(0.0)
    }

    pub fn coupling_angle(&self) -> f64 {
        self.gates.gates.iter().find_map(|g| matches!(g, Gate::Cry { .. }).then(|| g.angle().unwrap())).unwrap_or(0.0)
    }

    pub fn detuning_angle(&self) -> f64 {
        self.gates.gates.iter().find_map(|g| matches!(g, Gate::Rz { .. }).then(|| g.angle().unwrap())).unwrap_or(0.0)
    }

    /// Gates of this slice with the field on register qubit `field`.
    pub fn on_field_qubit(&self, field: usize) -> impl Iterator<Item = Gate> + '_ {
        self.gates.gates.iter().map(move |g| g.remap(|q| if q == 0 { ATOM } else { field }))
    }
}

pub fn build_slice_circuit(p: &ModelParams) -> Result<SliceCircuit> {
    p.validate()?;
    let lambda2 = p.lambda2();
    let field = 1;
    let gates = vec![
        Gate::Ry { target: ATOM, angle: p.rabi * lambda2 },
        Gate::Rz { target: ATOM, angle: p.omega * lambda2 },
        Gate::Cnot { control: ATOM, target: field },
        Gate::X { target: field },
        Gate::Cry { control: field, target: ATOM, angle: 2.0 * p.kappa.sqrt() * p.lambda },
        Gate::X { target: field },
        Gate::Cnot { control: ATOM, target: field },
    ];
    Ok(SliceCircuit { gates: GateSequence::new(2, gates)? })
}

/// |tr(U₁U₂†)| / d, which is 1 iff the unitaries agree up to a global phase.
pub fn phase_fidelity(u1: &ComplexMatrix, u2: &ComplexMatrix) -> f64 {
    (u1 * &u2.adjoint()).trace().norm() / u1.rows() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementBasisPlan {
    pub atom: Axis,
    pub field: FieldBasis,
}

impl MeasurementBasisPlan {
    pub fn new(atom: Axis, field: FieldBasis) -> Self {
        MeasurementBasisPlan { atom, field }
    }

    /// All six (atom, field) combinations, atom-major.
    pub fn all() -> Vec<MeasurementBasisPlan> {
        Axis::ALL.iter().flat_map(|&a| FieldBasis::ALL.iter().map(move |&f| MeasurementBasisPlan::new(a, f))).collect()
    }
}

fn atom_basis_change(axis: Axis, q: usize) -> Vec<Gate> {
    match axis {
        Axis::X => vec![Gate::H { target: q }],
        Axis::Y => vec![Gate::Sdg { target: q }, Gate::H { target: q }],
        Axis::Z => vec![],
    }
}

fn field_basis_change(basis: FieldBasis, q: usize) -> Vec<Gate> {
    match basis {
        FieldBasis::X => vec![Gate::H { target: q }],
        FieldBasis::Z => vec![],
    }
}

/// Projective z measurement of qubit `q`; collapses and renormalizes.
pub fn measure(state: &mut StateVector, q: usize, rng: &mut impl Rng) -> u8 {
    let n = state.n_qubits();
    let mask = 1usize << (n - 1 - q);
    let p1: f64 = state.amplitudes().iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, a)| a.norm_sqr()).sum();
    let bit = (rng.random::<f64>() < p1) as u8;
    let keep = if bit == 1 { mask } else { 0 };
    let norm = if bit == 1 { p1 } else { 1.0 - p1 }.max(f64::MIN_POSITIVE).sqrt();
    for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
        if i & mask == keep {
            *a /= norm;
        } else {
            *a = ZERO;
        }
    }
    bit
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutcome {
    pub record: MeasurementRecord,
    /// ±1 eigenvalue of the atom measurement in the plan's axis.
    pub atom_outcome: i8,
}

/// Compiled chain: slice gates resolved once, reused per run.
#[derive(Clone, Debug)]
pub struct Chain {
    slice: SliceCircuit,
    n_slices: usize,
    recycle: bool,
    plan: MeasurementBasisPlan,
}

impl Chain {
    pub fn new(p: &ModelParams, n_slices: usize, recycle: bool, plan: MeasurementBasisPlan) -> Result<Self> {
        if n_slices == 0 {
            return Err(Error::InvalidParams("need at least one slice".into()));
        }
        if n_slices >= 64 {
            return Err(Error::InvalidParams("records are limited to 63 slices".into()));
        }
        if !recycle && n_slices + 1 > MAX_QUBITS {
            return Err(Error::StatevectorTooLarge { qubits: n_slices + 1, max: MAX_QUBITS });
        }
        Ok(Chain { slice: build_slice_circuit(p)?, n_slices, recycle, plan })
    }

    pub fn n_qubits(&self) -> usize {
        if self.recycle { 2 } else { self.n_slices + 1 }
    }

    /// One shot: atom prepared in |g⟩, slices applied oldest first, then measured.
    pub fn run(&self, rng: &mut impl Rng) -> ChainOutcome {
        let mut state = StateVector::zero_state(self.n_qubits()).expect("size checked in Chain::new");
        Gate::X { target: ATOM }.apply(&mut state);
        let mut outcomes = Vec::with_capacity(self.n_slices);
        for slice in 1..=self.n_slices {
            let field = if self.recycle { 1 } else { slice };
            for g in self.slice.on_field_qubit(field) {
                g.apply(&mut state);
            }
            if self.recycle {
                for g in field_basis_change(self.plan.field, 1) {
                    g.apply(&mut state);
                }
                let bit = measure(&mut state, 1, rng);
                if bit == 1 {
                    Gate::X { target: 1 }.apply(&mut state);
                }
                outcomes.push(bit);
            }
        }
        if !self.recycle {
            for q in 1..=self.n_slices {
                for g in field_basis_change(self.plan.field, q) {
                    g.apply(&mut state);
                }
                outcomes.push(measure(&mut state, q, rng));
            }
        }
        for g in atom_basis_change(self.plan.atom, ATOM) {
            g.apply(&mut state);
        }
        let atom_bit = measure(&mut state, ATOM, rng);
        ChainOutcome {
            record: MeasurementRecord { basis: self.plan.field, outcomes },
            atom_outcome: 1 - 2 * atom_bit as i8,
        }
    }
}

pub fn simulate_chain_with_rng(
    p: &ModelParams,
    n_slices: usize,
    recycle: bool,
    plan: MeasurementBasisPlan,
    rng: &mut impl Rng,
) -> Result<ChainOutcome> {
    Ok(Chain::new(p, n_slices, recycle, plan)?.run(rng))
}

pub fn simulate_chain(p: &ModelParams, n_slices: usize, recycle: bool, plan: MeasurementBasisPlan, rng_seed: u64) -> Result<ChainOutcome> {
    simulate_chain_with_rng(p, n_slices, recycle, plan, &mut ChaCha8Rng::seed_from_u64(rng_seed))
}

/// Full (unrecycled) chain as one gate list, including measurement-basis changes.
pub fn chain_gates(p: &ModelParams, n_slices: usize, plan: MeasurementBasisPlan) -> Result<GateSequence> {
    let slice = build_slice_circuit(p)?;
    let mut gates = vec![Gate::X { target: ATOM }];
    for s in 1..=n_slices {
        gates.extend(slice.on_field_qubit(s));
    }
    gates.extend(atom_basis_change(plan.atom, ATOM));
    for q in 1..=n_slices {
        gates.extend(field_basis_change(plan.field, q));
    }
    GateSequence::new(n_slices + 1, gates)
}

/// OpenQASM 2.0 program for the unrecycled chain. q[0] is the atom,
/// q[1..=n] the field slices in interaction order.
pub fn emit_qasm(p: &ModelParams, n_slices: usize, plan: MeasurementBasisPlan, decompose_cry: bool) -> Result<String> {
    if n_slices == 0 {
        return Err(Error::InvalidParams("need at least one slice".into()));
    }
    let mut seq = chain_gates(p, n_slices, plan)?;
    if decompose_cry {
        seq = seq.decompose_cry();
    }
    let nq = n_slices + 1;
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "// kappa={} omega={} Omega={} lambda2={}", p.kappa, p.omega, p.rabi, p.lambda2());
    let _ = writeln!(out, "// atom basis {}, field basis {}", plan.atom.name(), plan.field.name());
    let _ = writeln!(out, "qreg q[{nq}];\ncreg c[{nq}];");
    for g in &seq.gates {
        g.qasm(&mut out);
    }
    for q in 0..nq {
        let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
    }
    Ok(out)
}
