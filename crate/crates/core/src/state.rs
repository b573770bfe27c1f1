use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix};

/// 2x2 density matrix of the atom in the {|e⟩, |g⟩} basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomState(ComplexMatrix);

impl AtomState {
    /// |g⟩⟨g| = diag(0, 1), the initial state of every trajectory.
    pub fn ground() -> Self {
        AtomState(ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, 1.0]]))
    }

    pub fn excited() -> Self {
        AtomState(ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]]))
    }

    /// Pure state a|e⟩ + b|g⟩ (normalized here).
    pub fn pure(a: Complex64, b: Complex64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidParams("zero vector".into()));
        }
        let (a, b) = (a / n, b / n);
        Ok(AtomState(ComplexMatrix::from_rows([[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]])))
    }

    /// Wraps a matrix, checking shape, Hermiticity, unit trace and positivity.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if rho.rows() != 2 || rho.cols() != 2 {
            return Err(Error::DimensionMismatch(format!("atom state must be 2x2, got {}x{}", rho.rows(), rho.cols())));
        }
        let state = AtomState(rho);
        if state.0.hermiticity_error() > 1e-12
            || (state.trace() - 1.0).abs() > 1e-10
            || state.min_eigenvalue() < -1e-9
        {
            return Err(Error::InvalidParams("not a density matrix".into()));
        }
        Ok(state)
    }

    /// Wraps without validation; used by the steppers, whose outputs are
    /// checked by tests rather than at runtime.
    pub(crate) fn from_matrix_unchecked(rho: ComplexMatrix) -> Self {
        AtomState(rho)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Smaller eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = &self.0;
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let disc = ((a - d).powi(2) + 4.0 * b.norm_sqr()).sqrt();
        0.5 * (a + d - disc)
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        (&self.0 * op).trace().re
    }

    /// (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)
    pub fn bloch(&self) -> [f64; 3] {
        [
            self.expectation(&pauli::sigma_x()),
            self.expectation(&pauli::sigma_y()),
            self.expectation(&pauli::sigma_z()),
        ]
    }

    pub fn max_abs_diff(&self, other: &AtomState) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// One of the three atom measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_bloch() {
        assert_eq!(AtomState::ground().bloch(), [0.0, 0.0, -1.0]);
        assert_eq!(AtomState::excited().bloch(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn pure_state_plus_y() {
        let s = AtomState::pure(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap();
        let b = s.bloch();
        assert!((b[1] - 1.0).abs() < 1e-15 && b[0].abs() < 1e-15 && b[2].abs() < 1e-15);
        assert!(s.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn rejects_non_states() {
        assert!(AtomState::new(ComplexMatrix::identity(2)).is_err());
        assert!(AtomState::new(ComplexMatrix::from_real_rows([[1.5, 0.0], [0.0, -0.5]])).is_err());
        assert!(AtomState::new(ComplexMatrix::identity(3)).is_err());
        assert!(AtomState::new(ComplexMatrix::identity(2).scale_re(0.5)).is_ok());
    }
}
