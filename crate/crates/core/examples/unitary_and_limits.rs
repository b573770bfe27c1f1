//! Builds the slice unitary at κ = 1, ω = 0, Ω = 12, prints its noise
//! coefficients, and walks λ → 0 to recover (S, L, H).
//!
//! cargo run --example unitary_and_limits

use qsde_sim::{build_interaction_unitary, coefficients, limit_triple, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;
    let u = build_interaction_unitary(&p)?;
    println!("slice unitary at λ² = {}:\n{:?}", p.lambda2(), u.matrix);
    println!("unitarity error {:.1e}", u.matrix.unitarity_error());

    let c = coefficients(&p)?;
    println!("M0 = {:?}\nM- = {:?}\nM+ = {:?}\nM± = {:?}", c.m0, c.m_minus, c.m_plus, c.m_pm);

    let report = limit_triple(&p, &[1e-1, 1e-2, 1e-3, 1e-4])?;
    for s in &report.samples {
        println!(
            "λ = {:>7.0e}  ‖M±‖ = {:.3e}  L† mismatch = {:.3e}",
            s.lambda, s.scattering_norm, s.adjoint_mismatch
        );
    }
    println!("extrapolated S = {:?}", report.triple.s);
    println!("extrapolated L = {:?}", report.triple.l);
    println!("extrapolated H = {:?}", report.triple.h);
    println!("distance to (I, σ-, 6σy): {:.2e}", report.triple.max_abs_diff(&p.target_triple()));
    Ok(())
}
