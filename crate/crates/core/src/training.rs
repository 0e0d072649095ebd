//! Training-state generation, training-data simulation, recovery of the
//! dynamics matrix, and synthesis of weight vectors for observables in dense
//! and sum-of-products form.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qla::{
    self, apply_local, c, check_hermitian, condition_number, hs_inner, identity, kron, trace,
    vec_rm, CMat, CVec, PureState,
};
use crate::reservoir::PairDynamics;

/// Weight imaginary parts above `1e-9 * max(1, |W|_max)` raise a
/// numerical-health error instead of being silently truncated.
const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// The canonical informationally complete training set: basis states plus
/// pairwise `+` and `+i` superpositions, `d^2` states in total. For `d = 2`
/// this is exactly `{|0>, |1>, (|0>+|1>)/sqrt2, (|0>+i|1>)/sqrt2}`.
pub fn training_states(d: usize) -> Result<Vec<PureState>> {
    if d < 2 {
        return Err(Error::InvalidRange {
            param: "d",
            value: d as f64,
        });
    }
    let mut states = Vec::with_capacity(d * d);
    for j in 0..d {
        states.push(PureState::basis(vec![d], j)?);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut amps = CVec::zeros(d);
            amps[j] = c(1., 0.);
            amps[k] = c(1., 0.);
            states.push(PureState::new_normalized(vec![d], amps)?);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut amps = CVec::zeros(d);
            amps[j] = c(1., 0.);
            amps[k] = c(0., 1.);
            states.push(PureState::new_normalized(vec![d], amps)?);
        }
    }
    Ok(states)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainingMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

/// Readout probabilities of the training states (columns) together with the
/// matrix of vectorized training projectors.
#[derive(Debug, Clone)]
pub struct TrainingData {
    d: usize,
    xp: DMatrix<f64>,
    mp: CMat,
    mode: TrainingMode,
}

impl TrainingData {
    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn xp(&self) -> &DMatrix<f64> {
        &self.xp
    }

    pub fn mp(&self) -> &CMat {
        &self.mp
    }

    pub fn mode(&self) -> TrainingMode {
        self.mode
    }
}

/// Runs the one-time training estimation: exact mode stores the exact
/// readout distributions, sampled mode replaces each column with multinomial
/// frequencies at the given shot count.
pub fn simulate_training(
    pd: &PairDynamics,
    states: &[PureState],
    mode: TrainingMode,
) -> Result<TrainingData> {
    let d = pd.local_dim();
    let dd = d * d;
    if states.len() != dd {
        return Err(Error::Dimension {
            expected: format!("{dd} training states"),
            got: format!("{}", states.len()),
        });
    }
    let mut xp = DMatrix::<f64>::zeros(dd, dd);
    let mut mp = CMat::zeros(dd, dd);
    for (k, st) in states.iter().enumerate() {
        let rho = st.to_density();
        let v = vec_rm(rho.matrix())?;
        for r in 0..dd {
            mp[(r, k)] = v[r];
        }
        let probs = pd.probabilities(rho.matrix())?;
        match mode {
            TrainingMode::Exact => {
                for (r, &p) in probs.iter().enumerate() {
                    xp[(r, k)] = p;
                }
            }
            TrainingMode::Sampled { shots, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64 + 1);
                let mut counts = vec![0u64; dd];
                let mut cdf = vec![0.0; dd];
                let mut acc = 0.0;
                for (r, &p) in probs.iter().enumerate() {
                    acc += p.max(0.0);
                    cdf[r] = acc;
                }
                for _ in 0..shots {
                    let u: f64 = rng.random::<f64>() * acc;
                    let idx = cdf.partition_point(|&x| x < u).min(dd - 1);
                    counts[idx] += 1;
                }
                for r in 0..dd {
                    xp[(r, k)] = counts[r] as f64 / shots as f64;
                }
            }
        }
    }
    Ok(TrainingData { d, xp, mp, mode })
}

/// Recovers the pair dynamics matrix `Xp * Mp^{-1}` from training data.
pub fn recover_tp(td: &TrainingData) -> Result<CMat> {
    let dd = td.d * td.d;
    if condition_number(&td.mp) > 1e12 {
        return Err(Error::Singular {
            what: "training-state matrix Mp".into(),
        });
    }
    let mp_inv = td.mp.clone().try_inverse().ok_or_else(|| Error::Singular {
        what: "training-state matrix Mp".into(),
    })?;
    let mut xp_c = CMat::zeros(dd, dd);
    for i in 0..dd {
        for j in 0..dd {
            xp_c[(i, j)] = c(td.xp[(i, j)], 0.0);
        }
    }
    Ok(xp_c * mp_inv)
}

/// One product term of a sum-of-products observable. `factors` has one slot
/// per (copy, subsystem) in copy-major order; `None` means identity.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub coeff: f64,
    pub factors: Vec<Option<CMat>>,
}

/// Observable decomposed as `sum_i c_i (x)_slots O_{i,slot}` over
/// `copies x subsystems` slots.
#[derive(Debug, Clone)]
pub struct SumOfProducts {
    pub dims: Vec<usize>,
    pub copies: usize,
    pub terms: Vec<ProductTerm>,
}

impl SumOfProducts {
    pub fn new(dims: Vec<usize>, copies: usize, terms: Vec<ProductTerm>) -> Result<Self> {
        let slots = dims.len() * copies;
        for t in &terms {
            if t.factors.len() != slots {
                return Err(Error::Dimension {
                    expected: format!("{slots} factor slots"),
                    got: format!("{}", t.factors.len()),
                });
            }
            for (s, f) in t.factors.iter().enumerate() {
                if let Some(m) = f {
                    let want = dims[s % dims.len()];
                    if m.nrows() != want || m.ncols() != want {
                        return Err(Error::Dimension {
                            expected: format!("{want}x{want} factor"),
                            got: format!("{}x{}", m.nrows(), m.ncols()),
                        });
                    }
                    check_hermitian(m, 1e-10)?;
                }
            }
        }
        Ok(Self {
            dims,
            copies,
            terms,
        })
    }

    pub fn slot_dim(&self, slot: usize) -> usize {
        self.dims[slot % self.dims.len()]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product::<usize>().pow(self.copies as u32)
    }

    /// Dense synthesis `sum_i c_i kron(factors)`.
    pub fn dense(&self) -> CMat {
        let total = self.total_dim();
        let mut out = CMat::zeros(total, total);
        for t in &self.terms {
            let mut m = identity(1);
            for (s, f) in t.factors.iter().enumerate() {
                let dim = self.slot_dim(s);
                match f {
                    Some(op) => m = kron(&m, op),
                    None => m = kron(&m, &identity(dim)),
                }
            }
            out += m.scale(t.coeff);
        }
        out
    }

    /// Trace of the synthesized observable, computed per term.
    pub fn trace(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut tr = t.coeff;
                for (s, f) in t.factors.iter().enumerate() {
                    tr *= match f {
                        Some(op) => trace(op).re,
                        None => self.slot_dim(s) as f64,
                    };
                }
                tr
            })
            .sum()
    }

    /// Appends the identity term that subtracts `Tr(O)/D * 1`, yielding the
    /// traceless part.
    pub fn traceless_shifted(&self) -> SumOfProducts {
        let shift = -self.trace() / self.total_dim() as f64;
        let slots = self.dims.len() * self.copies;
        let mut terms = self.terms.clone();
        terms.push(ProductTerm {
            coeff: shift,
            factors: vec![None; slots],
        });
        SumOfProducts {
            dims: self.dims.clone(),
            copies: self.copies,
            terms,
        }
    }
}

/// Weight vector for one observable: either a dense real vector over the
/// joint outcome index, or per-term per-slot weight rows.
#[derive(Debug, Clone)]
pub enum WeightVector {
    Dense {
        dims: Vec<usize>,
        copies: usize,
        w: Vec<f64>,
    },
    Factored {
        dims: Vec<usize>,
        copies: usize,
        terms: Vec<FactoredTerm>,
    },
}

/// Per-slot weight rows of one product term; `None` slots evaluate to 1 for
/// every outcome (identity observable factor).
#[derive(Debug, Clone)]
pub struct FactoredTerm {
    pub coeff: f64,
    pub rows: Vec<Option<Vec<f64>>>,
}

impl WeightVector {
    pub fn dims(&self) -> &[usize] {
        match self {
            WeightVector::Dense { dims, .. } => dims,
            WeightVector::Factored { dims, .. } => dims,
        }
    }

    pub fn copies(&self) -> usize {
        match self {
            WeightVector::Dense { copies, .. } => *copies,
            WeightVector::Factored { copies, .. } => *copies,
        }
    }

    /// Outcome-space sizes per subsystem (`d_j^2`).
    pub fn outcome_dims(&self) -> Vec<usize> {
        self.dims().iter().map(|&d| d * d).collect()
    }

    /// Dense weight entries, if this is the dense form.
    pub fn dense_entries(&self) -> Option<&[f64]> {
        match self {
            WeightVector::Dense { w, .. } => Some(w),
            WeightVector::Factored { .. } => None,
        }
    }
}

fn real_weights(v: &CVec) -> Result<Vec<f64>> {
    let wmax = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let residue = v.iter().fold(0.0f64, |m, x| m.max(x.im.abs()));
    if residue > IMAG_RESIDUE_TOL * wmax.max(1.0) {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(v.iter().map(|x| x.re).collect())
}

fn check_tp_dims(tps: &[&PairDynamics]) -> Vec<usize> {
    tps.iter().map(|pd| pd.local_dim()).collect()
}

/// Dense weights `W = <<O| (kron over copies and subsystems of T_p)^{-1}`.
/// The result is real by theory; residual imaginary parts above tolerance
/// raise an error.
pub fn weights_dense(obs: &CMat, tps: &[&PairDynamics], copies: usize) -> Result<WeightVector> {
    let dims = check_tp_dims(tps);
    let total: usize = dims.iter().product::<usize>().pow(copies as u32);
    if obs.nrows() != total || obs.ncols() != total {
        return Err(Error::Dimension {
            expected: format!("{total}x{total} observable"),
            got: format!("{}x{}", obs.nrows(), obs.ncols()),
        });
    }
    check_hermitian(obs, 1e-10)?;

    // W^dag = (T^{-1})^dag vec(O), computed slot by slot after permuting the
    // row-major vec into per-subsystem slot ordering.
    let mut inv_adj: Vec<CMat> = Vec::with_capacity(tps.len());
    for pd in tps {
        inv_adj.push(pd.tmat_inv()?.adjoint());
    }
    let base_dims: Vec<usize> = (0..copies * dims.len())
        .map(|s| dims[s % dims.len()])
        .collect();
    let slot_dims: Vec<usize> = base_dims.iter().map(|&d| d * d).collect();
    let mut v = qla::vec_to_slots(&vec_rm(obs)?, &base_dims);
    for s in 0..slot_dims.len() {
        let m = &inv_adj[s % dims.len()];
        v = apply_local(m, &v, &slot_dims, s);
    }
    let w_conj = CVec::from_fn(v.len(), |i, _| v[i].conj());
    let w = real_weights(&w_conj)?;
    Ok(WeightVector::Dense { dims, copies, w })
}

/// Factored weights for a sum-of-products observable: each slot factor gets
/// the row `<<O_slot| T_p^{-1}`; identity slots stay implicit.
pub fn weights_factored(sop: &SumOfProducts, tps: &[&PairDynamics]) -> Result<WeightVector> {
    let dims = check_tp_dims(tps);
    if dims != sop.dims {
        return Err(Error::Dimension {
            expected: format!("{:?}", sop.dims),
            got: format!("{dims:?}"),
        });
    }
    let mut inv: Vec<&CMat> = Vec::with_capacity(tps.len());
    for pd in tps {
        inv.push(pd.tmat_inv()?);
    }
    let n = dims.len();
    let mut terms = Vec::with_capacity(sop.terms.len());
    for t in &sop.terms {
        let mut rows: Vec<Option<Vec<f64>>> = Vec::with_capacity(t.factors.len());
        for (s, f) in t.factors.iter().enumerate() {
            match f {
                None => rows.push(None),
                Some(op) => {
                    let vo = vec_rm(op)?;
                    // row = vec(O)^dag * inv  ->  row^dag = inv^dag vec(O)
                    let col = inv[s % n].adjoint() * vo;
                    let row = CVec::from_fn(col.len(), |i, _| col[i].conj());
                    rows.push(Some(real_weights(&row)?));
                }
            }
        }
        terms.push(FactoredTerm {
            coeff: t.coeff,
            rows,
        });
    }
    Ok(WeightVector::Factored {
        dims,
        copies: sop.copies,
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(&self) -> CMat {
        match self {
            Pauli::I => identity(2),
            Pauli::X => qla::sigma_x(),
            Pauli::Y => qla::sigma_y(),
            Pauli::Z => qla::sigma_z(),
        }
    }

    pub fn label(&self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Pauli decomposition `O = sum_Q alpha_Q Q` with
/// `alpha_Q = Tr(Q O) / 2^n`; qubit subsystems only. Coefficients below
/// 1e-13 are dropped.
pub fn pauli_decompose(obs: &CMat) -> Result<Vec<(f64, Vec<Pauli>)>> {
    let total = obs.nrows();
    if total != obs.ncols() || total == 0 || total & (total - 1) != 0 {
        return Err(Error::Dimension {
            expected: "2^n x 2^n observable".into(),
            got: format!("{}x{}", obs.nrows(), obs.ncols()),
        });
    }
    check_hermitian(obs, 1e-10)?;
    let n = total.trailing_zeros() as usize;
    let mut out = Vec::new();
    let mut labels = vec![Pauli::I; n];
    let mut stack = vec![0usize; n];
    loop {
        for (q, &k) in stack.iter().enumerate() {
            labels[q] = PAULIS[k];
        }
        let q_mat = labels.iter().map(|p| p.matrix()).collect::<Vec<_>>();
        let q_refs: Vec<&CMat> = q_mat.iter().collect();
        let q_full = qla::kron_all(&q_refs);
        let alpha = hs_inner(&q_full, obs) / c(total as f64, 0.0);
        if alpha.im.abs() > 1e-10 {
            return Err(Error::ImaginaryResidue {
                residue: alpha.im.abs(),
            });
        }
        if alpha.re.abs() > 1e-13 {
            out.push((alpha.re, labels.clone()));
        }
        // next multi-index
        let mut q = n;
        loop {
            if q == 0 {
                return Ok(out);
            }
            q -= 1;
            stack[q] += 1;
            if stack[q] < 4 {
                break;
            }
            stack[q] = 0;
        }
    }
}

/// Converts a Pauli decomposition into a single-copy sum-of-products form.
pub fn pauli_sum_to_sop(paulis: &[(f64, Vec<Pauli>)], n: usize) -> Result<SumOfProducts> {
    let mut terms = Vec::with_capacity(paulis.len());
    for (coeff, labels) in paulis {
        if labels.len() != n {
            return Err(Error::Dimension {
                expected: format!("{n} labels"),
                got: format!("{}", labels.len()),
            });
        }
        let factors = labels
            .iter()
            .map(|p| match p {
                Pauli::I => None,
                other => Some(other.matrix()),
            })
            .collect();
        terms.push(ProductTerm {
            coeff: *coeff,
            factors,
        });
    }
    SumOfProducts::new(vec![2; n], 1, terms)
}
