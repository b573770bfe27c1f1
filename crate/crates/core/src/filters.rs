//! Discrete master equation and the homodyne / photon-counting filters,
//! written directly in terms of the slice coefficients M⁰ and M⁺.
//!
//! ```text
//! 𝓛(ρ) = M⁺ρM⁺* + λ²M⁰ρM⁰* + M⁰ρ + ρM⁰*
//! 𝓙(ρ) = M⁺ρ + ρM⁺* + λ²M⁺ρM⁰* + λ²M⁰ρM⁺*
//! ```

use serde::{Deserialize, Serialize};

use crate::conditioning::{FieldBasis, MeasurementRecord};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{coefficients, CoefficientSet, ModelParams};
use crate::state::AtomState;

/// Smallest jump rate for which a count is considered possible.
pub const JUMP_RATE_FLOOR: f64 = 1e-14;
/// Smallest admissible filter denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Homodyne increment ΔY = ±λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomodyneIncrement(f64);

impl HomodyneIncrement {
    /// Bit 0 (the |+⟩ outcome) maps to +λ.
    pub fn from_bit(bit: u8, lambda: f64) -> Self {
        HomodyneIncrement(if bit == 0 { lambda } else { -lambda })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Counting increment: 1 iff a photon was detected in the slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountIncrement(u8);

impl CountIncrement {
    pub fn new(bit: u8) -> Result<Self> {
        if bit > 1 {
            return Err(Error::InvalidRecord(format!("count increment {bit} is not binary")));
        }
        Ok(CountIncrement(bit))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

fn sandwich(a: &ComplexMatrix, rho: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * rho) * &b.adjoint()
}

pub fn lindblad_discrete(rho: &AtomState, c: &CoefficientSet) -> ComplexMatrix {
    let r = rho.matrix();
    let l2 = c.lambda * c.lambda;
    let terms = [
        sandwich(&c.m_plus, r, &c.m_plus),
        sandwich(&c.m0, r, &c.m0).scale_re(l2),
        &c.m0 * r,
        r * &c.m0.adjoint(),
    ];
    terms.iter().fold(ComplexMatrix::zeros(2, 2), |acc, t| &acc + t)
}

pub fn homodyne_innovation(rho: &AtomState, c: &CoefficientSet) -> ComplexMatrix {
    let r = rho.matrix();
    let l2 = c.lambda * c.lambda;
    let terms = [
        &c.m_plus * r,
        r * &c.m_plus.adjoint(),
        sandwich(&c.m_plus, r, &c.m0).scale_re(l2),
        sandwich(&c.m0, r, &c.m_plus).scale_re(l2),
    ];
    terms.iter().fold(ComplexMatrix::zeros(2, 2), |acc, t| &acc + t)
}

/// ρ_l = ρ_{l−1} + 𝓛(ρ_{l−1}) λ²
pub fn step_master(rho: &AtomState, c: &CoefficientSet) -> AtomState {
    let l2 = c.lambda * c.lambda;
    AtomState::from_matrix_unchecked(rho.matrix() + &lindblad_discrete(rho, c).scale_re(l2))
}

pub fn step_homodyne(rho: &AtomState, c: &CoefficientSet, dy: HomodyneIncrement) -> Result<AtomState> {
    let l2 = c.lambda * c.lambda;
    let lind = lindblad_discrete(rho, c);
    let j = homodyne_innovation(rho, c);
    let tr_j = j.trace().re;
    let denom = 1.0 - l2 * tr_j * tr_j;
    if denom < DENOMINATOR_FLOOR {
        return Err(Error::DenominatorUnderflow { value: denom });
    }
    let drift = rho.matrix() + &lind.scale_re(l2);
    let gain = (&j - &drift.scale_re(tr_j)).scale_re(1.0 / denom);
    let out = &drift + &gain.scale_re(dy.value() - tr_j * l2);
    Ok(AtomState::from_matrix_unchecked(out))
}

pub fn step_counting(rho: &AtomState, c: &CoefficientSet, dy: CountIncrement) -> Result<AtomState> {
    let l2 = c.lambda * c.lambda;
    let r = rho.matrix();
    let rate = (r * &(&c.m_plus.adjoint() * &c.m_plus)).trace().re;
    let denom = 1.0 - l2 * rate;
    if denom < DENOMINATOR_FLOOR {
        return Err(Error::DenominatorUnderflow { value: denom });
    }
    let drift = r + &lindblad_discrete(rho, c).scale_re(l2);
    let jumped = sandwich(&c.m_plus, r, &c.m_plus);
    let innovation = dy.value() as f64 - rate * l2;
    let out = if rate >= JUMP_RATE_FLOOR {
        let gain = (&jumped.scale_re(1.0 / rate) - &drift).scale_re(1.0 / denom);
        &drift + &gain.scale_re(innovation)
    } else if dy.value() == 0 {
        // rate → 0 limit of the jump fraction times (0 − rate·λ²)
        let gain = (&jumped.scale_re(-l2) + &drift.scale_re(rate * l2)).scale_re(1.0 / denom);
        &drift + &gain
    } else {
        return Err(Error::ImpossibleJump { rate });
    };
    Ok(AtomState::from_matrix_unchecked(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Homodyne,
    Counting,
}

impl FilterKind {
    pub fn field_basis(self) -> FieldBasis {
        match self {
            FilterKind::Homodyne => FieldBasis::X,
            FilterKind::Counting => FieldBasis::Z,
        }
    }

    pub fn for_basis(basis: FieldBasis) -> Self {
        match basis {
            FieldBasis::X => FilterKind::Homodyne,
            FieldBasis::Z => FilterKind::Counting,
        }
    }
}

/// States and Bloch vectors for l = 0..n.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub lambda2: f64,
    pub states: Vec<AtomState>,
}

impl Trajectory {
    pub fn expectations(&self) -> Vec<[f64; 3]> {
        self.states.iter().map(AtomState::bloch).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|l| l as f64 * self.lambda2).collect()
    }

    pub fn last(&self) -> &AtomState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// Folds the homodyne or counting stepper over `record`, starting from the ground state.
pub fn run_filter(kind: FilterKind, p: &ModelParams, record: &MeasurementRecord) -> Result<Trajectory> {
    run_filter_from(kind, p, record, AtomState::ground())
}

pub fn run_filter_from(kind: FilterKind, p: &ModelParams, record: &MeasurementRecord, init: AtomState) -> Result<Trajectory> {
    if record.basis != kind.field_basis() {
        return Err(Error::InvalidRecord(format!(
            "{kind:?} filter needs a {}-basis record",
            kind.field_basis().name()
        )));
    }
    let c = coefficients(p)?;
    let mut states = Vec::with_capacity(record.n_slices() + 1);
    states.push(init);
    for (i, &bit) in record.outcomes.iter().enumerate() {
        let prev = states.last().unwrap();
        let next = match kind {
            FilterKind::Homodyne => step_homodyne(prev, &c, HomodyneIncrement::from_bit(bit, p.lambda)),
            FilterKind::Counting => step_counting(prev, &c, CountIncrement::new(bit)?),
        }
        .map_err(|e| Error::ImpossibleRecord { step: i + 1, reason: e.to_string() })?;
        states.push(next);
    }
    Ok(Trajectory { lambda2: p.lambda2(), states })
}

/// `steps` master-equation steps from `init`.
pub fn run_master(p: &ModelParams, steps: usize, init: AtomState) -> Result<Trajectory> {
    let c = coefficients(p)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(init);
    for _ in 0..steps {
        let next = step_master(states.last().unwrap(), &c);
        states.push(next);
    }
    Ok(Trajectory { lambda2: p.lambda2(), states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::{condition_exact, reduced_dynamics_exact};

    fn params(kappa: f64, omega: f64, rabi: f64, lambda2: f64) -> ModelParams {
        ModelParams::from_lambda2(kappa, omega, rabi, lambda2).unwrap()
    }

    #[test]
    fn ground_state_is_stationary_without_drive() {
        let c = coefficients(&params(1.0, 0.0, 0.0, 0.16)).unwrap();
        assert!(lindblad_discrete(&AtomState::ground(), &c).max_abs() < 1e-15);
        assert!(step_master(&AtomState::ground(), &c).max_abs_diff(&AtomState::ground()) < 1e-15);
    }

    #[test]
    fn excited_decay_per_step() {
        let c = coefficients(&params(1.0, 0.0, 0.0, 0.16)).unwrap();
        let lind = lindblad_discrete(&AtomState::excited(), &c);
        let step = lind.scale_re(0.16);
        assert!((step[(0, 0)].re - (0.4f64.cos().powi(2) - 1.0)).abs() < 1e-12);
        assert!((step[(1, 1)].re + step[(0, 0)].re).abs() < 1e-12);
        assert!(step[(0, 1)].norm() < 1e-15);
        assert!(lind.trace().norm() < 1e-12);
    }

    #[test]
    fn master_matches_reduced_dynamics() {
        let p = params(1.0, 0.0, 12.0, 0.16);
        let master = run_master(&p, 4, AtomState::ground()).unwrap();
        let exact = reduced_dynamics_exact(&p, 4, &AtomState::ground()).unwrap();
        for (a, b) in master.states.iter().zip(&exact) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
        assert_eq!(master.expectations()[0], [0.0, 0.0, -1.0]);
    }

    #[test]
    fn no_coupling_filters_ignore_the_record() {
        let p = params(0.0, 0.6, 4.0, 0.16);
        let a = run_filter(FilterKind::Homodyne, &p, &"+-+-".parse().unwrap()).unwrap();
        let b = run_filter(FilterKind::Homodyne, &p, &"----".parse().unwrap()).unwrap();
        let cnt = run_filter(FilterKind::Counting, &p, &"0000".parse().unwrap()).unwrap();
        let master = run_master(&p, 4, AtomState::ground()).unwrap();
        for l in 0..=4 {
            assert!(a.states[l].max_abs_diff(&b.states[l]) < 1e-12);
            assert!(a.states[l].max_abs_diff(&cnt.states[l]) < 1e-12);
            assert!(a.states[l].max_abs_diff(&master.states[l]) < 1e-12);
        }
    }

    #[test]
    fn jump_from_excited_lands_in_ground() {
        let c = coefficients(&params(1.0, 0.0, 0.0, 0.16)).unwrap();
        let out = step_counting(&AtomState::excited(), &c, CountIncrement::new(1).unwrap()).unwrap();
        assert!(out.max_abs_diff(&AtomState::ground()) < 1e-12);
    }

    #[test]
    fn jump_from_ground_without_drive_is_impossible() {
        let c = coefficients(&params(1.0, 0.0, 0.0, 0.16)).unwrap();
        let err = step_counting(&AtomState::ground(), &c, CountIncrement::new(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ImpossibleJump { .. }));
        // the no-count branch stays well defined at zero rate
        let stay = step_counting(&AtomState::ground(), &c, CountIncrement::new(0).unwrap()).unwrap();
        assert!(stay.max_abs_diff(&AtomState::ground()) < 1e-15);
    }

    #[test]
    fn filters_reproduce_exact_conditioning() {
        let p = params(1.0, 0.0, 12.0, 0.16);
        for text in ["0000", "0001", "0010", "0100", "1000", "++++", "+-+-", "--+-"] {
            let record: MeasurementRecord = text.parse().unwrap();
            let kind = FilterKind::for_basis(record.basis);
            let traj = run_filter(kind, &p, &record).unwrap();
            let exact = condition_exact(&p, &record, &AtomState::ground()).unwrap();
            for (l, e) in exact.iter().enumerate() {
                assert!(traj.states[l + 1].max_abs_diff(&e.rho) < 1e-9, "{text} step {}", l + 1);
            }
        }
    }

    #[test]
    fn record_basis_must_match_filter() {
        let p = params(1.0, 0.0, 12.0, 0.16);
        assert!(run_filter(FilterKind::Homodyne, &p, &"0000".parse().unwrap()).is_err());
        assert!(run_filter(FilterKind::Counting, &p, &"++".parse().unwrap()).is_err());
        assert!(CountIncrement::new(2).is_err());
    }

    #[test]
    fn impossible_record_names_the_step() {
        let p = params(1.0, 0.0, 0.0, 0.16);
        let err = run_filter(FilterKind::Counting, &p, &"001".parse().unwrap()).unwrap_err();
        assert!(matches!(err, Error::ImpossibleRecord { step: 3, .. }));
    }

    #[test]
    fn denominator_guard_trips_for_huge_steps() {
        // λ = 1 with strong coupling drives λ²·rate to 1.
        let p = ModelParams::new(std::f64::consts::FRAC_PI_2.powi(2), 0.0, 0.0, 1.0).unwrap();
        let c = coefficients(&p).unwrap();
        let err = step_counting(&AtomState::excited(), &c, CountIncrement::new(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DenominatorUnderflow { .. }));
    }
}
