//! Constructors for the input states, channels, observables, and circuits
//! used by the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qla::{
    self, apply_local, c, identity, kron_all, spectral_norm_herm, CMat, CVec,
    DensityMatrix, PureState,
};
use crate::training::{Pauli, ProductTerm, SumOfProducts};

/// A named Hermitian observable, optionally with a sum-of-products
/// decomposition and spectral normalization.
#[derive(Debug, Clone)]
pub struct ObservableSpec {
    pub name: String,
    pub matrix: CMat,
    pub factors: Option<SumOfProducts>,
    pub normalized: bool,
}

/// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidRange {
            param: "n",
            value: n as f64,
        });
    }
    let total = 1usize << n;
    let mut amps = CVec::zeros(total);
    let s = 1.0 / 2f64.sqrt();
    amps[0] = c(s, 0.);
    amps[total - 1] = c(s, 0.);
    PureState::new(vec![2; n], amps)
}

/// Three-qubit GHZ-type state `(1-q)/8 * 1 + q * rho_G`.
pub fn ghz_type(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidRange {
            param: "q",
            value: q,
        });
    }
    let rho_g = ghz(3)?.to_density();
    let m = identity(8).scale((1.0 - q) / 8.0) + rho_g.matrix().scale(q);
    DensityMatrix::new(vec![2; 3], m)
}

fn embed(op: &CMat, site: usize, dims: &[usize]) -> CMat {
    let mut parts: Vec<CMat> = Vec::with_capacity(dims.len());
    for (s, &d) in dims.iter().enumerate() {
        if s == site {
            parts.push(op.clone());
        } else {
            parts.push(identity(d));
        }
    }
    let refs: Vec<&CMat> = parts.iter().collect();
    kron_all(&refs)
}

/// Per-qubit dephasing channel with `p = 1 - exp(-kappa_t)`, applied through
/// its Kraus operators `K0 = sqrt(1-p) 1`, `K_{1,2} = sqrt(p)/2 (1 ± sz)`.
/// Off-diagonal elements of each qubit are scaled by `exp(-kappa_t)`.
pub fn dephase(rho: &DensityMatrix, kappa_t: f64) -> Result<DensityMatrix> {
    if kappa_t < 0.0 {
        return Err(Error::InvalidRange {
            param: "kappa_t",
            value: kappa_t,
        });
    }
    if rho.dims().iter().any(|&d| d != 2) {
        return Err(Error::Dimension {
            expected: "qubit subsystems".into(),
            got: format!("{:?}", rho.dims()),
        });
    }
    let p = 1.0 - (-kappa_t).exp();
    let sz = qla::sigma_z();
    let kraus = [
        identity(2).scale((1.0 - p).sqrt()),
        (identity(2) + &sz).scale(p.sqrt() / 2.0),
        (identity(2) - &sz).scale(p.sqrt() / 2.0),
    ];
    let dims = rho.dims().to_vec();
    let mut m = rho.matrix().clone();
    for q in 0..dims.len() {
        let mut next = CMat::zeros(m.nrows(), m.ncols());
        for k in &kraus {
            let kf = embed(k, q, &dims);
            next += &kf * &m * kf.adjoint();
        }
        m = next;
    }
    DensityMatrix::new(dims, m)
}

/// GHZ projector `rho_G` (`sign = +1`) or `rho_{G-}` (`sign = -1`) on `k`
/// qubits as `2^k` product terms: the even-Z identity/Z strings plus the
/// even-Y X/Y strings with alternating signs.
pub fn ghz_projector_sop(k: usize, sign: f64) -> Result<SumOfProducts> {
    if k < 2 {
        return Err(Error::InvalidRange {
            param: "k",
            value: k as f64,
        });
    }
    let coeff = 0.5f64.powi(k as i32);
    let mut terms = Vec::with_capacity(1 << k);
    for mask in 0..(1u64 << k) {
        let weight = mask.count_ones() as usize;
        if weight % 2 != 0 {
            continue;
        }
        // identity/Z string
        let factors: Vec<Option<CMat>> = (0..k)
            .map(|q| {
                if mask >> q & 1 == 1 {
                    Some(qla::sigma_z())
                } else {
                    None
                }
            })
            .collect();
        terms.push(ProductTerm { coeff, factors });
        // X/Y string with Y on the masked sites
        let xy: Vec<Option<CMat>> = (0..k)
            .map(|q| {
                if mask >> q & 1 == 1 {
                    Some(qla::sigma_y())
                } else {
                    Some(qla::sigma_x())
                }
            })
            .collect();
        let phase = if (weight / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(ProductTerm {
            coeff: sign * coeff * phase,
            factors: xy,
        });
    }
    SumOfProducts::new(vec![2; k], 1, terms)
}

/// The normalized optimal linear witnesses `(1 - 2 rho_G)` for genuine
/// multipartite entanglement and `(1 - 4 rho_G + 2 rho_{G-})` for any
/// multipartite entanglement, both divided by their spectral norm.
pub fn witnesses_ghz3() -> Result<(ObservableSpec, ObservableSpec)> {
    let rho_g = ghz(3)?.to_density().matrix().clone();
    let ghz_minus = {
        let mut amps = CVec::zeros(8);
        let s = 1.0 / 2f64.sqrt();
        amps[0] = c(s, 0.);
        amps[7] = c(-s, 0.);
        PureState::new(vec![2; 3], amps)?.to_density().matrix().clone()
    };

    let w_gme_raw = identity(8) - rho_g.scale(2.0);
    let w_me_raw = identity(8) - rho_g.scale(4.0) + ghz_minus.scale(2.0);
    let norm_gme = spectral_norm_herm(&w_gme_raw)?;
    let norm_me = spectral_norm_herm(&w_me_raw)?;

    let scale_sop = |sop: SumOfProducts, s: f64| -> SumOfProducts {
        let terms = sop
            .terms
            .into_iter()
            .map(|mut t| {
                t.coeff *= s;
                t
            })
            .collect();
        SumOfProducts {
            dims: sop.dims,
            copies: sop.copies,
            terms,
        }
    };

    // W_GME/|.| = 1/|.| - 2/|.| rho_G
    let mut gme_terms = vec![ProductTerm {
        coeff: 1.0 / norm_gme,
        factors: vec![None; 3],
    }];
    gme_terms.extend(scale_sop(ghz_projector_sop(3, 1.0)?, -2.0 / norm_gme).terms);
    let gme_sop = SumOfProducts::new(vec![2; 3], 1, gme_terms)?;

    let mut me_terms = vec![ProductTerm {
        coeff: 1.0 / norm_me,
        factors: vec![None; 3],
    }];
    me_terms.extend(scale_sop(ghz_projector_sop(3, 1.0)?, -4.0 / norm_me).terms);
    me_terms.extend(scale_sop(ghz_projector_sop(3, -1.0)?, 2.0 / norm_me).terms);
    let me_sop = SumOfProducts::new(vec![2; 3], 1, me_terms)?;

    Ok((
        ObservableSpec {
            name: "W_GME".into(),
            matrix: w_gme_raw.unscale(norm_gme),
            factors: Some(gme_sop),
            normalized: true,
        },
        ObservableSpec {
            name: "W_ME".into(),
            matrix: w_me_raw.unscale(norm_me),
            factors: Some(me_sop),
            normalized: true,
        },
    ))
}

/// `(1-eps) |psi><psi| + eps 1/d` (trace-normalized identity).
pub fn noisy_state(psi: &PureState, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidRange {
            param: "eps",
            value: eps,
        });
    }
    let d = psi.total_dim();
    let m = psi.to_density().matrix().scale(1.0 - eps) + identity(d).scale(eps / d as f64);
    DensityMatrix::new(psi.dims().to_vec(), m)
}

/// Maximally entangled reference pairs: a qubit-qutrit state on dims `[2,3]`
/// and the two-qutrit state `(|00> + |11> + |22>)/sqrt(3)`.
pub fn max_entangled() -> (PureState, PureState) {
    let mut a1 = CVec::zeros(6);
    a1[3] = c(0.5, 0.); // |10>
    a1[5] = c(0.5, 0.); // |12>
    a1[1] = c(1.0 / 2f64.sqrt(), 0.); // |01>
    let psi1 = PureState::new(vec![2, 3], a1).expect("normalized by construction");

    let mut a2 = CVec::zeros(9);
    let s = 1.0 / 3f64.sqrt();
    a2[0] = c(s, 0.);
    a2[4] = c(s, 0.);
    a2[8] = c(s, 0.);
    let psi2 = PureState::new(vec![3, 3], a2).expect("normalized by construction");
    (psi1, psi2)
}

/// Random shallow-rotation circuit: `depth` layers of per-qubit rotations
/// `exp(-i theta sigma / 2)` with `sigma` uniform in `{X,Y,Z}` and `theta`
/// uniform in `[-pi/20, pi/20]`, each followed by a nearest-neighbor CZ ring.
pub fn wbp_circuit(n: usize, depth: usize, seed: u64) -> Result<PureState> {
    if n < 3 {
        return Err(Error::InvalidRange {
            param: "n",
            value: n as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = vec![2usize; n];
    let total = 1usize << n;
    let mut amps = CVec::zeros(total);
    amps[0] = c(1., 0.);
    let theta_max = std::f64::consts::PI / 20.0;
    for _ in 0..depth {
        for q in 0..n {
            let axis = match rng.random_range(0..3u8) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            let theta: f64 = rng.random_range(-theta_max..theta_max);
            let half = theta / 2.0;
            let rot = identity(2).scale(half.cos()) - axis.matrix().scale(half.sin()) * c(0., 1.);
            amps = apply_local(&rot, &amps, &dims, q);
        }
        // CZ ring with periodic boundary
        for q in 0..n {
            let q2 = (q + 1) % n;
            for idx in 0..total {
                let b1 = idx >> (n - 1 - q) & 1;
                let b2 = idx >> (n - 1 - q2) & 1;
                if b1 == 1 && b2 == 1 {
                    amps[idx] = -amps[idx];
                }
            }
        }
    }
    PureState::new_normalized(dims, amps)
}

/// Rényi-2 Page value `-ln((d_A + d_B)/(d_A d_B + 1))` for a random pure
/// state on `H_A (x) H_B`.
pub fn page_renyi2(d_a: usize, d_b: usize) -> f64 {
    -(((d_a + d_b) as f64) / ((d_a * d_b + 1) as f64)).ln()
}

/// Hermitian orthonormal operator basis (generalized Gell-Mann matrices plus
/// the normalized identity), `Tr(G_a G_b) = delta_ab`.
pub fn gell_mann_basis(d: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(d * d);
    basis.push(identity(d).unscale((d as f64).sqrt()));
    for l in 1..d {
        let mut m = CMat::zeros(d, d);
        for k in 0..l {
            m[(k, k)] = c(1., 0.);
        }
        m[(l, l)] = c(-(l as f64), 0.);
        basis.push(m.unscale(((l * (l + 1)) as f64).sqrt()));
    }
    let s = 1.0 / 2f64.sqrt();
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = c(s, 0.);
            sym[(k, j)] = c(s, 0.);
            basis.push(sym);
            let mut asym = CMat::zeros(d, d);
            asym[(j, k)] = c(0., -s);
            asym[(k, j)] = c(0., s);
            basis.push(asym);
        }
    }
    basis
}

/// SWAP operator on two copies of `H = (x)_j H_j`, with the per-site
/// factored form `S = (x)_j sum_k G_k (x) G_k` over the Hermitian basis.
pub fn swap_operator(dims: &[usize]) -> ObservableSpec {
    let total: usize = dims.iter().product();
    let mut m = CMat::zeros(total * total, total * total);
    for a in 0..total {
        for b in 0..total {
            m[(a * total + b, b * total + a)] = c(1., 0.);
        }
    }

    let bases: Vec<Vec<CMat>> = dims.iter().map(|&d| gell_mann_basis(d)).collect();
    let n = dims.len();
    let mut terms = Vec::new();
    let combo_total: usize = dims.iter().map(|&d| d * d).product();
    for combo in 0..combo_total {
        let picks = qla::split_index(combo, &dims.iter().map(|&d| d * d).collect::<Vec<_>>());
        let mut factors: Vec<Option<CMat>> = Vec::with_capacity(2 * n);
        for copy in 0..2 {
            let _ = copy;
            for (j, &k) in picks.iter().enumerate() {
                factors.push(Some(bases[j][k].clone()));
            }
        }
        terms.push(ProductTerm {
            coeff: 1.0,
            factors,
        });
    }
    let sop = SumOfProducts::new(dims.to_vec(), 2, terms).expect("factors match dims");

    ObservableSpec {
        name: format!("SWAP{dims:?}"),
        matrix: m,
        factors: Some(sop),
        normalized: false,
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All `C(n,k) * 3^k` Pauli strings of weight exactly `k` on `n` qubits.
pub fn pauli_klocal_set(n: usize, k: usize) -> Result<Vec<ObservableSpec>> {
    if k > n || n == 0 {
        return Err(Error::InvalidRange {
            param: "k",
            value: k as f64,
        });
    }
    let nontrivial = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for sites in combinations(n, k) {
        let mut assign = vec![0usize; k];
        loop {
            let mut labels = vec![Pauli::I; n];
            for (slot, &site) in sites.iter().enumerate() {
                labels[site] = nontrivial[assign[slot]];
            }
            let name: String = labels.iter().map(|p| p.label()).collect();
            let mats: Vec<CMat> = labels.iter().map(|p| p.matrix()).collect();
            let refs: Vec<&CMat> = mats.iter().collect();
            let matrix = kron_all(&refs);
            let factors: Vec<Option<CMat>> = labels
                .iter()
                .map(|p| match p {
                    Pauli::I => None,
                    other => Some(other.matrix()),
                })
                .collect();
            let sop = SumOfProducts::new(
                vec![2; n],
                1,
                vec![ProductTerm {
                    coeff: 1.0,
                    factors,
                }],
            )?;
            out.push(ObservableSpec {
                name,
                matrix,
                factors: Some(sop),
                normalized: true,
            });
            // advance the base-3 assignment
            let mut slot = k;
            loop {
                if slot == 0 {
                    break;
                }
                slot -= 1;
                assign[slot] += 1;
                if assign[slot] < 3 {
                    break;
                }
                assign[slot] = 0;
            }
            if assign.iter().all(|&a| a == 0) {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::{eigvalsh, haar_pure, hs_inner, kron, random_density, trace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_type_limits() {
        let pure = ghz_type(1.0).unwrap();
        assert!((pure.matrix() - ghz(3).unwrap().to_density().matrix()).norm() < 1e-12);
        let mixed = ghz_type(0.0).unwrap();
        assert!((mixed.matrix() - identity(8).unscale(8.0)).norm() < 1e-12);
    }

    #[test]
    fn ghz_type_half_eigenvalues() {
        // Hand diagonalization in the GHZ basis: q=0.5 gives eigenvalue
        // (1-q)/8 + q = 0.5625 on the GHZ vector and 0.0625 on the rest.
        let rho = ghz_type(0.5).unwrap();
        let eigs = eigvalsh(rho.matrix()).unwrap();
        assert!((eigs[7] - 0.5625).abs() < 1e-12);
        for &e in &eigs[..7] {
            assert!((e - 0.0625).abs() < 1e-12);
        }
    }

    #[test]
    fn dephase_identity_and_diagonal_limits() {
        let rho = ghz_type(0.9).unwrap();
        let same = dephase(&rho, 0.0).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-12);
        let killed = dephase(&rho, 50.0).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(killed.matrix()[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dephase_halves_off_diagonals_at_ln2() {
        // |+><+| with kappa_t = ln 2: off-diagonals go from 1/2 to 1/4.
        // Oracle: direct Kraus-sum evaluation with explicit 2x2 matrices.
        let plus = PureState::new_normalized(
            vec![2],
            CVec::from_vec(vec![c(1., 0.), c(1., 0.)]),
        )
        .unwrap();
        let rho = plus.to_density();
        let out = dephase(&rho, 2f64.ln()).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.25).abs() < 1e-12);

        let p: f64 = 1.0 - (-(2f64.ln())).exp();
        let k0 = identity(2).scale((1.0 - p).sqrt());
        let k1 = (identity(2) + qla::sigma_z()).scale(p.sqrt() / 2.0);
        let k2 = (identity(2) - qla::sigma_z()).scale(p.sqrt() / 2.0);
        let mut oracle = CMat::zeros(2, 2);
        for k in [&k0, &k1, &k2] {
            oracle += k * rho.matrix() * k.adjoint();
        }
        assert!((out.matrix() - oracle).norm() < 1e-12);
        // CPTP: Kraus completeness
        let total = k0.adjoint() * &k0 + k1.adjoint() * &k1 + k2.adjoint() * &k2;
        assert!((total - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn ghz_projector_sop_matches_dense() {
        for k in [2usize, 3] {
            let sop = ghz_projector_sop(k, 1.0).unwrap();
            assert_eq!(sop.terms.len(), 1 << k);
            let dense = sop.dense();
            let direct = ghz(k).unwrap().to_density();
            assert!((dense - direct.matrix()).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn witness_traces_on_ghz() {
        let (w_gme, w_me) = witnesses_ghz3().unwrap();
        let rho_g = ghz(3).unwrap().to_density();
        // Pre-normalization traces: Tr(W_GME rho_G) = -1, Tr(W_ME rho_G) = -3
        // (direct trace oracle); spectral norms are 1 and 3.
        let t_gme = hs_inner(&w_gme.matrix, rho_g.matrix()).re;
        let t_me = hs_inner(&w_me.matrix, rho_g.matrix()).re;
        assert!((t_gme * 1.0 - (-1.0)).abs() < 1e-12); // norm(W_GME) = 1
        assert!((t_me * 3.0 - (-3.0)).abs() < 1e-12); // norm(W_ME) = 3
        assert!((spectral_norm_herm(&w_gme.matrix).unwrap() - 1.0).abs() < 1e-10);
        assert!((spectral_norm_herm(&w_me.matrix).unwrap() - 1.0).abs() < 1e-10);
        // factored forms agree with the dense matrices
        for spec in [&w_gme, &w_me] {
            let sop = spec.factors.as_ref().unwrap();
            assert!((sop.dense() - &spec.matrix).norm() < 1e-10);
        }
    }

    #[test]
    fn noisy_state_limits() {
        let (psi1, _) = max_entangled();
        let pure = noisy_state(&psi1, 0.0).unwrap();
        assert!((pure.matrix() - psi1.to_density().matrix()).norm() < 1e-12);
        let mixed = noisy_state(&psi1, 1.0).unwrap();
        assert!((mixed.matrix() - identity(6).unscale(6.0)).norm() < 1e-12);
        assert!(noisy_state(&psi1, 1.5).is_err());
    }

    #[test]
    fn max_entangled_reduced_states() {
        // Either qutrit marginal of psi2 is maximally mixed (partial-trace
        // oracle).
        let (_, psi2) = max_entangled();
        for site in [0usize, 1] {
            let red = psi2.reduced_density(&[site]);
            assert!((red.matrix() - identity(3).unscale(3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn wbp_depth_zero_is_vacuum() {
        let psi = wbp_circuit(4, 0, 7).unwrap();
        assert!((psi.amplitudes()[0] - c(1., 0.)).norm() < 1e-15);
        let s2 = -psi.reduced_density(&[0, 1]).purity().ln();
        assert!(s2.abs() < 1e-12);
    }

    #[test]
    fn wbp_is_seed_reproducible() {
        let a = wbp_circuit(5, 12, 99).unwrap();
        let b = wbp_circuit(5, 12, 99).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c_state = wbp_circuit(5, 12, 100).unwrap();
        assert!((a.amplitudes() - c_state.amplitudes()).norm() > 1e-6);
    }

    #[test]
    fn swap_operator_eigenvalues_and_purity() {
        let spec = swap_operator(&[2]);
        let eigs = eigvalsh(&spec.matrix).unwrap();
        // 1-qubit SWAP spectrum {1 x3, -1}
        assert!((eigs[0] + 1.0).abs() < 1e-12);
        for &e in &eigs[1..] {
            assert!((e - 1.0).abs() < 1e-12);
        }
        // Tr(S sigma x sigma) = Tr(sigma^2)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let sigma = random_density(&[2], &mut rng);
            let joint = kron(sigma.matrix(), sigma.matrix());
            let lhs = hs_inner(&spec.matrix, &joint).re;
            assert!((lhs - sigma.purity()).abs() < 1e-12);
        }
        // factored form agrees
        let sop = spec.factors.as_ref().unwrap();
        assert!((sop.dense() - &spec.matrix).norm() < 1e-10);
    }

    #[test]
    fn swap_operator_hybrid_dims() {
        let spec = swap_operator(&[2, 3]);
        let sop = spec.factors.as_ref().unwrap();
        assert_eq!(sop.terms.len(), 4 * 9);
        assert!((sop.dense() - &spec.matrix).norm() < 1e-10);
    }

    #[test]
    fn pauli_klocal_counting() {
        assert_eq!(pauli_klocal_set(2, 1).unwrap().len(), 6);
        assert_eq!(pauli_klocal_set(4, 2).unwrap().len(), 54);
        for spec in pauli_klocal_set(2, 2).unwrap() {
            let sop = spec.factors.as_ref().unwrap();
            assert!((sop.dense() - &spec.matrix).norm() < 1e-12);
        }
    }

    #[test]
    fn gell_mann_basis_is_orthonormal() {
        for d in [2usize, 3] {
            let basis = gell_mann_basis(d);
            assert_eq!(basis.len(), d * d);
            for (a, ga) in basis.iter().enumerate() {
                for (b, gb) in basis.iter().enumerate() {
                    let ip = hs_inner(ga, gb);
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - c(expected, 0.)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constructors_satisfy_type_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let states: Vec<DensityMatrix> = vec![
            ghz_type(0.3).unwrap(),
            dephase(&ghz_type(0.8).unwrap(), 0.7).unwrap(),
            noisy_state(&haar_pure(&[2, 3], &mut rng), 0.4).unwrap(),
        ];
        for s in states {
            assert!((trace(s.matrix()).re - 1.0).abs() < 1e-10);
            assert!(eigvalsh(s.matrix()).unwrap()[0] > -1e-10);
        }
    }
}
