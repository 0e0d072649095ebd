//! Classical-shadows baseline with random per-qubit Pauli-basis
//! measurements, used for like-for-like bound comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qla::{self, apply_local, kron, spectral_norm_herm, CMat};
use crate::sampling::StateRef;
use crate::training::{pauli_decompose, Pauli};

/// One shadow: a measurement basis (0 = X, 1 = Y, 2 = Z) and a bit outcome
/// per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliShadow {
    pub bases: Vec<u8>,
    pub outcomes: Vec<u8>,
}

/// Rank-1 projector onto the `b`-th eigenstate of the `basis`-th Pauli.
fn basis_projector(basis: u8, b: u8) -> CMat {
    let sign = if b == 0 { 1.0 } else { -1.0 };
    let pauli = match basis {
        0 => qla::sigma_x(),
        1 => qla::sigma_y(),
        _ => qla::sigma_z(),
    };
    (qla::identity(2) + pauli.scale(sign)).scale(0.5)
}

/// Samples random-Pauli-basis shadows from a pure qubit state by sequential
/// per-qubit collapse.
pub fn sample_pauli_shadows(
    state: StateRef,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PauliShadow>> {
    let psi = match state {
        StateRef::Pure(s) => s,
        StateRef::Density(_) => {
            return Err(Error::Unsupported(
                "shadow sampling operates on pure states".into(),
            ))
        }
    };
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension {
            expected: "qubit subsystems".into(),
            got: format!("{:?}", psi.dims()),
        });
    }
    let n = psi.dims().len();
    let dims = psi.dims().to_vec();
    let projs: Vec<[CMat; 2]> = (0..3)
        .map(|basis| [basis_projector(basis, 0), basis_projector(basis, 1)])
        .collect();
    let amps0 = psi.amplitudes().clone();
    let shadows: Vec<PauliShadow> = (0..n_samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let mut amps = amps0.clone();
            let mut bases = Vec::with_capacity(n);
            let mut outcomes = Vec::with_capacity(n);
            for q in 0..n {
                let basis: u8 = rng.random_range(0..3);
                let w0 = apply_local(&projs[basis as usize][0], &amps, &dims, q);
                let p0: f64 = amps
                    .iter()
                    .zip(w0.iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum::<f64>()
                    .max(0.0);
                let outcome = if rng.random::<f64>() < p0 { 0u8 } else { 1u8 };
                let collapsed = if outcome == 0 {
                    w0
                } else {
                    apply_local(&projs[basis as usize][1], &amps, &dims, q)
                };
                amps = collapsed;
                let norm = amps.norm();
                if norm > 0.0 {
                    amps.unscale_mut(norm);
                }
                bases.push(basis);
                outcomes.push(outcome);
            }
            PauliShadow { bases, outcomes }
        })
        .collect();
    Ok(shadows)
}

/// Per-qubit estimator factor `Tr(P (3 u^dag |b><b| u - 1))`: 1 for the
/// identity, `3 (-1)^b` when the basis matches the Pauli, 0 otherwise.
fn pauli_factor(basis: u8, outcome: u8, p: Pauli) -> f64 {
    match p {
        Pauli::I => 1.0,
        Pauli::X => {
            if basis == 0 {
                3.0 * if outcome == 0 { 1.0 } else { -1.0 }
            } else {
                0.0
            }
        }
        Pauli::Y => {
            if basis == 1 {
                3.0 * if outcome == 0 { 1.0 } else { -1.0 }
            } else {
                0.0
            }
        }
        Pauli::Z => {
            if basis == 2 {
                3.0 * if outcome == 0 { 1.0 } else { -1.0 }
            } else {
                0.0
            }
        }
    }
}

/// Value of the inverse-channel estimator for one shadow, given the
/// observable's Pauli decomposition.
pub fn shadow_value(shadow: &PauliShadow, pauli_obs: &[(f64, Vec<Pauli>)]) -> f64 {
    pauli_obs
        .iter()
        .map(|(coeff, labels)| {
            let mut prod = *coeff;
            for (q, &p) in labels.iter().enumerate() {
                prod *= pauli_factor(shadow.bases[q], shadow.outcomes[q], p);
                if prod == 0.0 {
                    break;
                }
            }
            prod
        })
        .sum()
}

/// Mean of the shadow estimator over a batch; unbiased for `Tr(O sigma)`.
pub fn estimate_from_shadows(shadows: &[PauliShadow], pauli_obs: &[(f64, Vec<Pauli>)]) -> f64 {
    if shadows.is_empty() {
        return 0.0;
    }
    shadows
        .iter()
        .map(|s| shadow_value(s, pauli_obs))
        .sum::<f64>()
        / shadows.len() as f64
}

/// Exact worst-case second-moment bound of the shadow estimator: builds
/// `B_sh = sum_{settings,outcomes} 3^{-n} v^2 (x)_q u^dag|b><b|u` and
/// returns its spectral norm. The analogue of the reservoir bound, capped
/// at `n <= 6` qubits.
pub fn shadow_worst_case_bound(obs: &CMat, traceless: bool) -> Result<f64> {
    let total = obs.nrows();
    if total == 0 || total & (total - 1) != 0 {
        return Err(Error::Dimension {
            expected: "2^n x 2^n observable".into(),
            got: format!("{}x{}", obs.nrows(), obs.ncols()),
        });
    }
    let n = total.trailing_zeros() as usize;
    if n > 6 {
        return Err(Error::DimensionCeiling {
            dim: n,
            ceiling: 6,
        });
    }
    let mut dec = pauli_decompose(obs)?;
    if traceless {
        dec.retain(|(_, labels)| labels.iter().any(|&p| p != Pauli::I));
    }

    let projs: Vec<[CMat; 2]> = (0..3)
        .map(|basis| [basis_projector(basis, 0), basis_projector(basis, 1)])
        .collect();
    let settings = 3usize.pow(n as u32);
    let outcomes = 1usize << n;
    let weight = 1.0 / settings as f64;
    let mut b_sh = CMat::zeros(total, total);
    for setting in 0..settings {
        let bases: Vec<u8> = {
            let mut s = setting;
            (0..n)
                .map(|_| {
                    let b = (s % 3) as u8;
                    s /= 3;
                    b
                })
                .collect()
        };
        for outcome_bits in 0..outcomes {
            let bits: Vec<u8> = (0..n)
                .map(|q| ((outcome_bits >> (n - 1 - q)) & 1) as u8)
                .collect();
            let shadow = PauliShadow {
                bases: bases.clone(),
                outcomes: bits.clone(),
            };
            let v = shadow_value(&shadow, &dec);
            if v == 0.0 {
                continue;
            }
            let mut eff = qla::identity(1);
            for q in 0..n {
                eff = kron(&eff, &projs[bases[q] as usize][bits[q] as usize]);
            }
            b_sh += eff.scale(weight * v * v);
        }
    }
    spectral_norm_herm(&b_sh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{haar_pure, hs_inner, random_density, PureState};
    use crate::statelib::ghz;
    use crate::training::pauli_decompose;
    use rand::SeedableRng;

    #[test]
    fn zero_state_z_basis_is_deterministic() {
        let psi = PureState::basis(vec![2], 0).unwrap();
        let shadows = sample_pauli_shadows(StateRef::Pure(&psi), 3000, 1).unwrap();
        let mut x_counts = [0u32; 2];
        for s in &shadows {
            match s.bases[0] {
                2 => assert_eq!(s.outcomes[0], 0, "Z outcome on |0> must be 0"),
                0 => x_counts[s.outcomes[0] as usize] += 1,
                _ => {}
            }
        }
        // X outcomes are 50/50 within statistical tolerance
        let total = (x_counts[0] + x_counts[1]) as f64;
        let frac = x_counts[0] as f64 / total;
        assert!((frac - 0.5).abs() < 0.05, "X-basis balance {frac}");
    }

    #[test]
    fn bell_state_zz_outcomes_correlated() {
        let bell = ghz(2).unwrap();
        let shadows = sample_pauli_shadows(StateRef::Pure(&bell), 5000, 2).unwrap();
        for s in shadows {
            if s.bases == vec![2, 2] {
                assert_eq!(
                    s.outcomes[0], s.outcomes[1],
                    "ZZ outcomes must be perfectly correlated"
                );
            }
        }
    }

    #[test]
    fn estimator_values_match_hand_enumeration() {
        // Observable Z on |0>: per-shadow estimator is +-3 (Z basis) or 0.
        let psi = PureState::basis(vec![2], 0).unwrap();
        let dec = pauli_decompose(&qla::sigma_z()).unwrap();
        let shadows = sample_pauli_shadows(StateRef::Pure(&psi), 30_000, 3).unwrap();
        let mut mean = 0.0;
        for s in &shadows {
            let v = shadow_value(s, &dec);
            assert!(
                v == 0.0 || (v - 3.0).abs() < 1e-12 || (v + 3.0).abs() < 1e-12,
                "unexpected estimator value {v}"
            );
            mean += v;
        }
        mean /= shadows.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn estimator_is_unbiased_on_exact_distribution() {
        // Enumerate all (setting, outcome) pairs exactly for n <= 2.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for n in [1usize, 2] {
            let sigma = random_density(&vec![2; n], &mut rng);
            let obs = crate::qla::random_hermitian(1 << n, &mut rng);
            let dec = pauli_decompose(&obs).unwrap();
            let settings = 3usize.pow(n as u32);
            let mut mean = 0.0;
            for setting in 0..settings {
                let bases: Vec<u8> = {
                    let mut s = setting;
                    (0..n)
                        .map(|_| {
                            let b = (s % 3) as u8;
                            s /= 3;
                            b
                        })
                        .collect()
                };
                for bits_idx in 0..(1usize << n) {
                    let bits: Vec<u8> = (0..n)
                        .map(|q| ((bits_idx >> (n - 1 - q)) & 1) as u8)
                        .collect();
                    let mut eff = qla::identity(1);
                    for q in 0..n {
                        eff = kron(&eff, &basis_projector(bases[q], bits[q]));
                    }
                    let p = hs_inner(&eff, sigma.matrix()).re / settings as f64;
                    let shadow = PauliShadow {
                        bases: bases.clone(),
                        outcomes: bits,
                    };
                    mean += p * shadow_value(&shadow, &dec);
                }
            }
            let exact = hs_inner(&obs, sigma.matrix()).re;
            assert!((mean - exact).abs() < 1e-9, "n={n}: {mean} vs {exact}");
        }
    }

    #[test]
    fn identity_estimates_one_exactly() {
        let psi = PureState::basis(vec![2, 2], 1).unwrap();
        let dec = pauli_decompose(&qla::identity(4)).unwrap();
        let shadows = sample_pauli_shadows(StateRef::Pure(&psi), 50, 5).unwrap();
        for s in &shadows {
            assert_eq!(shadow_value(s, &dec), 1.0);
        }
    }

    #[test]
    fn bound_is_three_to_the_k_for_pauli_strings() {
        // Closed form for k-local Pauli strings: 3^k.
        let z = qla::sigma_z();
        let x = qla::sigma_x();
        let id = qla::identity(2);
        let cases: Vec<(CMat, f64)> = vec![
            (z.clone(), 3.0),
            (kron(&z, &id), 3.0),
            (kron(&z, &x), 9.0),
            (kron(&kron(&z, &x), &qla::sigma_y()), 27.0),
        ];
        for (obs, expected) in cases {
            let bound = shadow_worst_case_bound(&obs, false).unwrap();
            assert!(
                (bound - expected).abs() < 1e-9,
                "bound {bound} vs {expected}"
            );
        }
    }

    #[test]
    fn identity_bound_is_one_in_raw_mode() {
        let bound = shadow_worst_case_bound(&qla::identity(4), false).unwrap();
        assert!((bound - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bound_dominates_exact_shadow_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let psi = haar_pure(&[2], &mut rng);
        let obs = psi.to_density().matrix().clone();
        let bound = shadow_worst_case_bound(&obs, false).unwrap();
        let dec = pauli_decompose(&obs).unwrap();
        for _ in 0..100 {
            let sigma = random_density(&[2], &mut rng);
            // exact variance over the joint (setting, outcome) distribution
            let mut mean = 0.0;
            let mut second = 0.0;
            for basis in 0..3u8 {
                for b in 0..2u8 {
                    let eff = basis_projector(basis, b);
                    let p = hs_inner(&eff, sigma.matrix()).re / 3.0;
                    let v = shadow_value(
                        &PauliShadow {
                            bases: vec![basis],
                            outcomes: vec![b],
                        },
                        &dec,
                    );
                    mean += p * v;
                    second += p * v * v;
                }
            }
            let var = second - mean * mean;
            assert!(var <= bound + 1e-9, "{var} > {bound}");
        }
    }

    #[test]
    fn shadows_reject_qudits() {
        let (psi1, _) = crate::statelib::max_entangled();
        assert!(sample_pauli_shadows(StateRef::Pure(&psi1), 10, 7).is_err());
    }
}
