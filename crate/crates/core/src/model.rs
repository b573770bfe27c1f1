//! The repeated-interaction model: per-slice unitary, its discrete-noise
//! coefficients, and the small-step limit of those coefficients.
//!
//! Basis conventions used throughout the crate:
//!
//! * atom: {|e⟩, |g⟩} = {|0⟩, |1⟩}, so σ₊ = |e⟩⟨g| and the ground state is |1⟩;
//! * field slice: {|0⟩, |1⟩} with |0⟩ the vacuum and |1⟩ one photon;
//! * slice unitary: 4x4 on atom ⊗ field with index `2·atom + field`, i.e. the
//!   ordering {e0, e1, g0, g1}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, ComplexMatrix, I, ONE, ZERO};

/// Physical rates plus the discretization root-step λ = √(T/N).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    /// Decay rate κ.
    pub kappa: f64,
    /// Transition frequency ω.
    pub omega: f64,
    /// Rabi frequency Ω of the laser drive.
    pub rabi: f64,
    /// Root time step λ; the slice duration is λ².
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawParams {
    kappa: f64,
    omega: f64,
    #[serde(rename = "Omega")]
    rabi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda2: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    steps: Option<u64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        match (raw.lambda2, raw.horizon, raw.steps) {
            (Some(l2), None, None) => ModelParams::from_lambda2(raw.kappa, raw.omega, raw.rabi, l2),
            (None, Some(t), Some(n)) => ModelParams::from_horizon(raw.kappa, raw.omega, raw.rabi, t, n),
            _ => Err(Error::InvalidParams("give either lambda2 or both T and N".into())),
        }
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            kappa: p.kappa,
            omega: p.omega,
            rabi: p.rabi,
            lambda2: Some(p.lambda2()),
            horizon: None,
            steps: None,
        }
    }
}

impl ModelParams {
    pub fn new(kappa: f64, omega: f64, rabi: f64, lambda: f64) -> Result<Self> {
        let p = ModelParams { kappa, omega, rabi, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn from_lambda2(kappa: f64, omega: f64, rabi: f64, lambda2: f64) -> Result<Self> {
        if !(lambda2 > 0.0) {
            return Err(Error::InvalidParams(format!("lambda2 must be positive, got {lambda2}")));
        }
        Self::new(kappa, omega, rabi, lambda2.sqrt())
    }

    /// Divides `[0, horizon]` into `steps` slices.
    pub fn from_horizon(kappa: f64, omega: f64, rabi: f64, horizon: f64, steps: u64) -> Result<Self> {
        if steps == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidParams(format!("need T > 0 and N ≥ 1, got T={horizon}, N={steps}")));
        }
        Self::from_lambda2(kappa, omega, rabi, horizon / steps as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParams(format!("kappa must be ≥ 0, got {}", self.kappa)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !self.omega.is_finite() || !self.rabi.is_finite() {
            return Err(Error::InvalidParams("frequencies must be finite".into()));
        }
        Ok(())
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ModelParams { lambda, ..*self }
    }

    /// The (S, L, H) the model is built to converge to:
    /// S = I, L = √κ σ₋, H = ω σ₊σ₋ + (Ω/2) σ_y.
    pub fn target_triple(&self) -> LimitTriple {
        let n = &pauli::sigma_plus() * &pauli::sigma_minus();
        LimitTriple {
            s: ComplexMatrix::identity(2),
            l: pauli::sigma_minus().scale_re(self.kappa.sqrt()),
            h: &n.scale_re(self.omega) + &pauli::sigma_y().scale_re(self.rabi / 2.0),
        }
    }
}

/// The 4x4 slice unitary on atom ⊗ field.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionUnitary {
    pub matrix: ComplexMatrix,
}

/// Atom operators multiplying the discrete noises of one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub m0: ComplexMatrix,
    pub m_minus: ComplexMatrix,
    pub m_plus: ComplexMatrix,
    pub m_pm: ComplexMatrix,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitTriple {
    pub s: ComplexMatrix,
    pub l: ComplexMatrix,
    pub h: ComplexMatrix,
}

impl LimitTriple {
    pub fn max_abs_diff(&self, other: &LimitTriple) -> f64 {
        self.s
            .max_abs_diff(&other.s)
            .max(self.l.max_abs_diff(&other.l))
            .max(self.h.max_abs_diff(&other.h))
    }
}

/// Field-slice operators in the {vacuum, photon} basis.
pub mod field {
    use super::*;

    /// Creation |1⟩⟨0|.
    pub fn creation() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[0.0, 0.0], [1.0, 0.0]])
    }

    /// Annihilation |0⟩⟨1|.
    pub fn annihilation() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[0.0, 1.0], [0.0, 0.0]])
    }

    /// Number operator |1⟩⟨1|.
    pub fn number() -> ComplexMatrix {
        ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, 1.0]])
    }
}

/// Product of the coupling, detuning and drive exponentials, each in closed form:
///
/// `exp(√κ(σ₋⊗λa† − σ₊⊗λa)) · exp(−iω σ₊σ₋⊗λ²) · exp(−i(Ω/2) σ_y⊗λ²)`.
pub fn build_interaction_unitary(p: &ModelParams) -> Result<InteractionUnitary> {
    p.validate()?;
    let lambda2 = p.lambda2();

    // Coupling rotates |e0⟩ (index 0) into |g1⟩ (index 3).
    let theta = p.kappa.sqrt() * p.lambda;
    let (st, ct) = theta.sin_cos();
    let mut coupling = ComplexMatrix::identity(4);
    coupling[(0, 0)] = Complex64::new(ct, 0.0);
    coupling[(3, 0)] = Complex64::new(st, 0.0);
    coupling[(0, 3)] = Complex64::new(-st, 0.0);
    coupling[(3, 3)] = Complex64::new(ct, 0.0);

    let phase = Complex64::from_polar(1.0, -p.omega * lambda2);
    let detuning = ComplexMatrix::diag(&[phase, phase, ONE, ONE]);

    let (sd, cd) = (p.rabi * lambda2 / 2.0).sin_cos();
    let drive_atom = ComplexMatrix::from_real_rows([[cd, -sd], [sd, cd]]);
    let drive = kron(&drive_atom, &ComplexMatrix::identity(2));

    Ok(InteractionUnitary { matrix: &(&coupling * &detuning) * &drive })
}

/// The slice unitary typed entry by entry in field-major, photon-first order
/// {e1, g1, e0, g0} and relabelled into this crate's {e0, e1, g0, g1} ordering. Independent of [`build_interaction_unitary`].
pub fn closed_form_interaction(p: &ModelParams) -> ComplexMatrix {
    let lambda2 = p.lambda2();
    let e = Complex64::from_polar(1.0, -p.omega * lambda2);
    let (sk, ck) = (p.kappa.sqrt() * p.lambda).sin_cos();
    let (sr, cr) = (p.rabi * lambda2 / 2.0).sin_cos();
    let r = |x: f64| Complex64::new(x, 0.0);
    let field_major = ComplexMatrix::from_rows([
        [e * cr, -e * sr, ZERO, ZERO],
        [r(ck * sr), r(ck * cr), e * sk * cr, -e * sk * sr],
        [r(-sk * sr), r(-sk * cr), e * ck * cr, -e * ck * sr],
        [ZERO, ZERO, r(sr), r(cr)],
    ]);
    // ours[i][j] = field_major[perm[i]][perm[j]]: e0→2, e1→0, g0→3, g1→1
    field_major.permuted(&[2, 0, 3, 1])
}

/// Reads the unique decomposition
/// `U − I = m_pm⊗ΔΛ + m_plus⊗ΔA* + m_minus⊗ΔA + m0⊗Δt`
/// off the field blocks ⟨f|U|f'⟩ of `u`.
pub fn extract_coefficients(u: &InteractionUnitary, lambda: f64) -> Result<CoefficientSet> {
    let m = &u.matrix;
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch(format!("slice unitary is {}x{}", m.rows(), m.cols())));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be > 0, got {lambda}")));
    }
    let block = |f_out: usize, f_in: usize| {
        let mut b = ComplexMatrix::zeros(2, 2);
        for a_out in 0..2 {
            for a_in in 0..2 {
                b[(a_out, a_in)] = m[(2 * a_out + f_out, 2 * a_in + f_in)];
            }
        }
        b
    };
    let id = ComplexMatrix::identity(2);
    let vac_vac = block(0, 0);
    let m0 = (&vac_vac - &id).scale_re(1.0 / (lambda * lambda));
    let m_plus = block(1, 0).scale_re(1.0 / lambda);
    let m_minus = block(0, 1).scale_re(1.0 / lambda);
    // ⟨1|U|1⟩ = I + m_pm + λ² m0 and ⟨0|U|0⟩ = I + λ² m0.
    let m_pm = &block(1, 1) - &vac_vac;
    Ok(CoefficientSet { m0, m_minus, m_plus, m_pm, lambda })
}

/// Convenience: coefficients straight from parameters.
pub fn coefficients(p: &ModelParams) -> Result<CoefficientSet> {
    extract_coefficients(&build_interaction_unitary(p)?, p.lambda)
}

impl CoefficientSet {
    /// I + Σ coefficient ⊗ noise; equals the slice unitary.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let l = self.lambda;
        let terms = [
            kron(&self.m_pm, &field::number()),
            kron(&self.m_plus, &field::creation().scale_re(l)),
            kron(&self.m_minus, &field::annihilation().scale_re(l)),
            kron(&self.m0, &ComplexMatrix::identity(2).scale_re(l * l)),
        ];
        terms.iter().fold(ComplexMatrix::identity(4), |acc, t| &acc + t)
    }

    /// Vacuum-in Kraus operators (⟨0|U|0⟩, ⟨1|U|0⟩) expressed through the coefficients.
    pub fn kraus_pair(&self) -> (ComplexMatrix, ComplexMatrix) {
        let l = self.lambda;
        let k0 = &ComplexMatrix::identity(2) + &self.m0.scale_re(l * l);
        let k1 = self.m_plus.scale_re(l);
        (k0, k1)
    }

    /// (S, L, L†-candidate, H) at this λ, before any limit is taken.
    pub fn triple_at(&self) -> (LimitTriple, ComplexMatrix) {
        let s = &self.m_pm + &ComplexMatrix::identity(2);
        let l = self.m_plus.clone();
        let l_dagger = (&self.m_minus * &s.adjoint()).scale_re(-1.0);
        let h = &self.m0.scale(I) + &(&l.adjoint() * &l).scale(I * 0.5);
        (LimitTriple { s, l, h }, l_dagger)
    }
}

/// One row of the convergence table.
#[derive(Clone, Debug)]
pub struct LimitSample {
    pub lambda: f64,
    pub triple: LimitTriple,
    /// ‖(−M⁻S*)† − M⁺‖_F
    pub adjoint_mismatch: f64,
    /// ‖M^±‖_F
    pub scattering_norm: f64,
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    /// Richardson extrapolation (first-order error model) over the two smallest λ.
    pub triple: LimitTriple,
    pub samples: Vec<LimitSample>,
    /// Fitted log-log slope of `adjoint_mismatch` against λ; `None` if it vanishes.
    pub adjoint_mismatch_rate: Option<f64>,
    /// Fitted log-log slope of `scattering_norm` against λ; `None` if it vanishes.
    pub scattering_rate: Option<f64>,
    /// Largest per-sample difference from the extrapolated triple at the smallest λ.
    pub smallest_lambda_error: f64,
}

/// Evaluates (S, L, L†, H) along a strictly decreasing λ sequence and
/// extrapolates to λ → 0.
pub fn limit_triple(p_base: &ModelParams, lambda_seq: &[f64]) -> Result<LimitReport> {
    if lambda_seq.len() < 2
        || lambda_seq.iter().any(|&l| !(l > 0.0))
        || lambda_seq.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::NonMonotoneLambda);
    }
    let samples = lambda_seq
        .iter()
        .map(|&lambda| {
            let c = coefficients(&p_base.with_lambda(lambda))?;
            let (triple, l_dagger) = c.triple_at();
            Ok(LimitSample {
                lambda,
                adjoint_mismatch: (&l_dagger.adjoint() - &triple.l).frobenius_norm(),
                scattering_norm: c.m_pm.frobenius_norm(),
                triple,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = samples.len();
    let (a, b) = (&samples[n - 2], &samples[n - 1]);
    let richardson = |xa: &ComplexMatrix, xb: &ComplexMatrix| {
        // X(λ) = X₀ + cλ  ⇒  X₀ = (λa·X(λb) − λb·X(λa)) / (λa − λb)
        (&xb.scale_re(a.lambda) - &xa.scale_re(b.lambda)).scale_re(1.0 / (a.lambda - b.lambda))
    };
    let triple = LimitTriple {
        s: richardson(&a.triple.s, &b.triple.s),
        l: richardson(&a.triple.l, &b.triple.l),
        h: richardson(&a.triple.h, &b.triple.h),
    };
    let smallest_lambda_error = b.triple.max_abs_diff(&triple);

    Ok(LimitReport {
        adjoint_mismatch_rate: loglog_slope(samples.iter().map(|s| (s.lambda, s.adjoint_mismatch))),
        scattering_rate: loglog_slope(samples.iter().map(|s| (s.lambda, s.scattering_norm))),
        triple,
        samples,
        smallest_lambda_error,
    })
}

/// Least-squares slope of log(y) against log(x); `None` when any y is ~0.
fn loglog_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.len() < 2 || pts.iter().any(|&(_, y)| !(y > 1e-300)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;

    fn params(kappa: f64, omega: f64, rabi: f64, lambda2: f64) -> ModelParams {
        ModelParams::from_lambda2(kappa, omega, rabi, lambda2).unwrap()
    }

    /// Independent route: exponentiate each generator numerically.
    fn expm_product(p: &ModelParams) -> ComplexMatrix {
        let l = p.lambda;
        let l2 = p.lambda2();
        let sp = pauli::sigma_plus();
        let sm = pauli::sigma_minus();
        let coupling = &kron(&sm, &field::creation().scale_re(l)) - &kron(&sp, &field::annihilation().scale_re(l));
        let g1 = coupling.scale_re(p.kappa.sqrt());
        let g2 = kron(&(&sp * &sm), &ComplexMatrix::identity(2)).scale(Complex64::new(0.0, -p.omega * l2));
        let g3 = kron(&pauli::sigma_y(), &ComplexMatrix::identity(2)).scale(Complex64::new(0.0, -p.rabi / 2.0 * l2));
        let u = &expm(&g1).unwrap() * &expm(&g2).unwrap();
        &u * &expm(&g3).unwrap()
    }

    #[test]
    fn vanishing_generators_give_identity() {
        let u = build_interaction_unitary(&params(0.0, 0.0, 0.0, 0.3)).unwrap();
        assert!(u.matrix.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn closed_form_matches_product_and_expm() {
        for p in [params(1.0, 0.0, 12.0, 0.16), params(1.0, 2.0, 0.0, 0.01), params(2.3, -1.1, 7.0, 0.05)] {
            let u = build_interaction_unitary(&p).unwrap().matrix;
            assert!(u.max_abs_diff(&closed_form_interaction(&p)) < 1e-12);
            assert!(u.max_abs_diff(&expm_product(&p)) < 1e-12);
            assert!(u.unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn reference_parameters_entries() {
        let p = params(1.0, 0.0, 12.0, 0.16);
        let u = build_interaction_unitary(&p).unwrap().matrix;
        let (s4, c4) = 0.4f64.sin_cos();
        let (s96, c96) = 0.96f64.sin_cos();
        // column |g0⟩ (index 2): ground atom, vacuum field
        assert!((u[(0, 2)].re - (-c4 * s96)).abs() < 1e-12);
        assert!((u[(2, 2)].re - c96).abs() < 1e-12);
        assert!((u[(3, 2)].re - (-s4 * s96)).abs() < 1e-12);
        assert!(u[(1, 2)].norm() < 1e-15);
    }

    #[test]
    fn detuning_phase_on_excited_rows() {
        let p = params(1.0, 2.0, 0.0, 0.01);
        let u = build_interaction_unitary(&p).unwrap().matrix;
        let ph = Complex64::from_polar(1.0, -0.02);
        let (s, c) = 0.1f64.sin_cos();
        assert!((u[(1, 1)] - ph).norm() < 1e-12);
        assert!((u[(0, 0)] - ph * c).norm() < 1e-12);
        assert!((u[(3, 0)] - ph * s).norm() < 1e-12);
        assert!((u[(2, 2)] - ONE).norm() < 1e-12);
    }

    /// Closed-form coefficient matrices, typed in the atom basis {e, g}.
    fn closed_form_coefficients(p: &ModelParams) -> CoefficientSet {
        let (l, l2) = (p.lambda, p.lambda2());
        let e = Complex64::from_polar(1.0, -p.omega * l2);
        let (sk, ck) = (p.kappa.sqrt() * l).sin_cos();
        let (sr, cr) = (p.rabi * l2 / 2.0).sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        CoefficientSet {
            m0: ComplexMatrix::from_rows([
                [(e * ck * cr - 1.0) / l2, -e * ck * sr / l2],
                [r(sr / l2), r((cr - 1.0) / l2)],
            ]),
            m_minus: ComplexMatrix::from_rows([[r(-sk * sr / l), r(-sk * cr / l)], [ZERO, ZERO]]),
            m_plus: ComplexMatrix::from_rows([[ZERO, ZERO], [e * sk * cr / l, -e * sk * sr / l]]),
            m_pm: ComplexMatrix::from_rows([
                [e * (1.0 - ck) * cr, e * (ck - 1.0) * sr],
                [r((ck - 1.0) * sr), r((ck - 1.0) * cr)],
            ]),
            lambda: l,
        }
    }

    #[test]
    fn identity_has_zero_coefficients() {
        let c = extract_coefficients(&InteractionUnitary { matrix: ComplexMatrix::identity(4) }, 0.4).unwrap();
        for m in [&c.m0, &c.m_minus, &c.m_plus, &c.m_pm] {
            assert_eq!(m.max_abs(), 0.0);
        }
    }

    #[test]
    fn decay_only_m_plus() {
        let c = coefficients(&params(1.0, 0.0, 0.0, 0.16)).unwrap();
        let expected = ComplexMatrix::from_real_rows([[0.0, 0.0], [0.4f64.sin() / 0.4, 0.0]]);
        assert!(c.m_plus.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn coefficients_match_closed_forms() {
        for p in [params(1.0, 0.0, 12.0, 0.16), params(0.7, 1.3, 5.0, 0.09)] {
            let c = coefficients(&p).unwrap();
            let want = closed_form_coefficients(&p);
            // m0 carries a 1/λ² amplification of rounding in the block.
            let tol0 = 1e-12 / p.lambda2();
            assert!(c.m0.max_abs_diff(&want.m0) < tol0);
            assert!(c.m_minus.max_abs_diff(&want.m_minus) < 1e-12);
            assert!(c.m_plus.max_abs_diff(&want.m_plus) < 1e-12);
            assert!(c.m_pm.max_abs_diff(&want.m_pm) < 1e-12);
            let u = build_interaction_unitary(&p).unwrap().matrix;
            assert!(c.reconstruct().max_abs_diff(&u) < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 0.0, 0.1).is_err());
        assert!(ModelParams::from_horizon(1.0, 0.0, 0.0, 4.0, 0).is_err());
        let bad = ModelParams { kappa: 1.0, omega: 0.0, rabi: 0.0, lambda: -0.1 };
        assert!(build_interaction_unitary(&bad).is_err());
    }

    #[test]
    fn limits_reference_parameters() {
        let p = params(1.0, 0.0, 12.0, 0.01);
        let seq = [1e-1, 1e-2, 1e-3, 1e-4];
        let report = limit_triple(&p, &seq).unwrap();
        assert!(report.triple.max_abs_diff(&p.target_triple()) < 10.0 * 1e-4);
        assert!(report.triple.h.hermiticity_error() < 10.0 * 1e-4);
        assert!(report.triple.s.unitarity_error() < 10.0 * 1e-4);
        // S = I, so M^± vanishes at second order.
        assert!(report.scattering_rate.unwrap() > 1.9);
    }

    #[test]
    fn limits_without_coupling() {
        let p = params(0.0, 0.7, 3.0, 0.01);
        let report = limit_triple(&p, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!(report.triple.l.max_abs() < 1e-12);
        assert!(report.triple.max_abs_diff(&p.target_triple()) < 1e-3);
        assert!(report.adjoint_mismatch_rate.is_none());
    }

    #[test]
    fn limits_strong_decay() {
        let p = params(4.0, 1.0, 0.0, 0.01);
        let report = limit_triple(&p, &[1e-3, 1e-4]).unwrap();
        let target = p.target_triple();
        let want_l = pauli::sigma_minus().scale_re(2.0);
        assert!(target.l.max_abs_diff(&want_l) < 1e-15);
        assert!(report.triple.max_abs_diff(&target) < 1e-3);
    }

    #[test]
    fn limit_sequence_must_decrease() {
        let p = params(1.0, 0.0, 0.0, 0.01);
        assert!(matches!(limit_triple(&p, &[1e-3, 1e-2]), Err(Error::NonMonotoneLambda)));
        assert!(matches!(limit_triple(&p, &[1e-2, 1e-2]), Err(Error::NonMonotoneLambda)));
        assert!(matches!(limit_triple(&p, &[1e-2]), Err(Error::NonMonotoneLambda)));
    }

    #[test]
    fn json_round_trip_and_horizon_form() {
        let p: ModelParams = serde_json::from_str(r#"{"kappa":1,"omega":0,"Omega":12,"T":4,"N":400}"#).unwrap();
        assert!((p.lambda2() - 0.01).abs() < 1e-15);
        let text = serde_json::to_string(&p).unwrap();
        let back: ModelParams = serde_json::from_str(&text).unwrap();
        assert!((back.lambda - p.lambda).abs() < 1e-15);
        assert!(serde_json::from_str::<ModelParams>(r#"{"kappa":1,"omega":0,"Omega":12}"#).is_err());
        assert!(serde_json::from_str::<ModelParams>(r#"{"kappa":1,"omega":0,"Omega":12,"lambda2":0.1,"T":1,"N":2}"#).is_err());
    }
}
