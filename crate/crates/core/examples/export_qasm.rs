//! OpenQASM 2.0 for a four-slice chain measured in the z/z bases, in both
//! controlled-Ry spellings.
//!
//! cargo run --example export_qasm

use qsde_sim::{emit_qasm, Axis, FieldBasis, MeasurementBasisPlan, ModelParams};

fn main() -> qsde_sim::Result<()> {
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16)?;
    let plan = MeasurementBasisPlan::new(Axis::Z, FieldBasis::Z);
    println!("{}", emit_qasm(&p, 4, plan, false)?);
    println!("// with cu3 decomposed into ry/cx:");
    println!("{}", emit_qasm(&p, 4, plan, true)?);
    Ok(())
}
