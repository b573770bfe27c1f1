use qsde_sim::conditioning::record_distribution;
use qsde_sim::sampler::{chi_square_homogeneity, sample_pair};
use qsde_sim::{AtomState, Axis, FieldBasis, MeasurementBasisPlan, ModelParams};

fn expected_vs_sampled(p: &ModelParams, basis: FieldBasis, recycle: bool, seed: u64) -> f64 {
    let runs = 100_000u64;
    let mut hist = vec![0u64; 16];
    for (key, _) in sample_pair(p, 4, recycle, MeasurementBasisPlan::new(Axis::Z, basis), runs, seed, 0).unwrap() {
        hist[key as usize] += 1;
    }
    let probs = record_distribution(p, 4, basis, &AtomState::ground()).unwrap();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for ((_, prob), &obs) in probs.iter().zip(&hist) {
        let exp = prob * runs as f64;
        if exp > 0.0 {
            stat += (obs as f64 - exp).powi(2) / exp;
            dof += 1;
        } else {
            assert_eq!(obs, 0);
        }
    }
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new((dof - 1) as f64).unwrap().sf(stat)
}

#[test]
fn circuit_records_follow_the_exact_distribution() {
    let p = ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16).unwrap();
    for basis in FieldBasis::ALL {
        for recycle in [false, true] {
            let pval = expected_vs_sampled(&p, basis, recycle, 17);
            assert!(pval > 1e-3, "{basis:?} recycle={recycle}: p = {pval}");
        }
    }
}

#[test]
fn detuned_strong_decay_also_matches() {
    let p = ModelParams::from_lambda2(3.0, 1.5, 5.0, 0.1).unwrap();
    assert!(expected_vs_sampled(&p, FieldBasis::X, true, 23) > 1e-3);
    assert!(expected_vs_sampled(&p, FieldBasis::Z, false, 29) > 1e-3);
}

#[test]
fn homogeneity_test_separates_different_parameters() {
    let plan = MeasurementBasisPlan::new(Axis::Z, FieldBasis::Z);
    let hist = |p: &ModelParams| {
        let mut h = vec![0u64; 16];
        for (key, _) in sample_pair(p, 4, true, plan, 20_000, 1, 0).unwrap() {
            h[key as usize] += 1;
        }
        h
    };
    let a = hist(&ModelParams::from_lambda2(1.0, 0.0, 12.0, 0.16).unwrap());
    let b = hist(&ModelParams::from_lambda2(1.5, 0.0, 12.0, 0.16).unwrap());
    assert!(chi_square_homogeneity(&a, &b).2 < 1e-6);
}
