//! Cross-module statistical invariants.

use qrpe_core::analysis::{exact_single_variance, f_res};
use qrpe_core::estimators::single_estimate;
use qrpe_core::qla::{haar_pure, random_density, random_hermitian};
use qrpe_core::reservoir::{pair_effects, PairKind, ReservoirParams};
use qrpe_core::sampling::{exact_distribution, sample_snapshots, StateRef};
use qrpe_core::training::weights_dense;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn empirical_variance_stays_below_bound() {
    // Empirical variance of the single-snapshot estimator never exceeds
    // F_res(O) + 3 standard errors, over 50 random cases.
    let pd = pair_effects(&ReservoirParams::qubit_reference(), 2, PairKind::Qubit).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 4000usize;
    for case in 0..50 {
        let obs = random_hermitian(2, &mut rng);
        let sigma = random_density(&[2], &mut rng);
        let w = weights_dense(&obs, &[&pd], 1).unwrap();
        let bound = f_res(&obs, &[&pd], false).unwrap().f_res;
        let ss = sample_snapshots(StateRef::Density(&sigma), &[&pd], n, 1000 + case).unwrap();
        let vals: Vec<f64> = ss
            .snapshots()
            .iter()
            .map(|s| single_estimate(&w, s).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let m2 = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = vals.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n as f64;
        // standard error of the sample variance
        let se = ((m4 - m2 * m2).max(0.0) / n as f64).sqrt();
        assert!(
            m2 <= bound + 3.0 * se + 1e-9,
            "case {case}: empirical {m2} vs bound {bound} (se {se})"
        );
    }
}

#[test]
fn distribution_level_unbiasedness_many_observables() {
    // E[single_estimate] against the exact readout distribution equals
    // Tr(O sigma) for 50 random pairs on up to 3 subsystems.
    let pd = pair_effects(&ReservoirParams::qubit_reference(), 2, PairKind::Qubit).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..50 {
        let n_sub = 1 + case % 3;
        let tps: Vec<_> = std::iter::repeat(&pd).take(n_sub).collect();
        let obs = random_hermitian(1 << n_sub, &mut rng);
        let sigma = random_density(&vec![2; n_sub], &mut rng);
        let w = weights_dense(&obs, &tps, 1).unwrap();
        let probs = exact_distribution(StateRef::Density(&sigma), &tps).unwrap();
        let entries = w.dense_entries().unwrap();
        let mean = exact_single_variance(entries, &probs); // variance, checked finite
        assert!(mean.is_finite());
        let e: f64 = entries.iter().zip(probs.iter()).map(|(a, b)| a * b).sum();
        let exact = qrpe_core::qla::hs_inner(&obs, sigma.matrix()).re;
        assert!(
            (e - exact).abs() < 1e-9,
            "case {case}: {e} vs {exact}"
        );
    }
}
