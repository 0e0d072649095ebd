//! Measurement snapshots from input states: exact outcome distributions for
//! small systems, and sequential product-POVM collapse sampling for large
//! pure states.
//!
//! Each snapshot draws from an independent counter-based RNG stream derived
//! from `(seed, snapshot index)`, so a fixed seed gives byte-identical
//! snapshot sets at any degree of parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qla::{self, apply_local, psd_sqrt, vec_rm, CMat, CVec, DensityMatrix, PureState};
use crate::reservoir::PairDynamics;

/// Default total-dimension ceiling for the exact (density-form) path.
pub const DEFAULT_DIM_CEILING: usize = 1 << 12;

/// Per-copy measurement outcomes: one index in `0..d_j^2` per input
/// subsystem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub outcomes: Vec<u16>,
}

/// A batch of snapshots with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub source: String,
    snapshots: Vec<Snapshot>,
}

impl SnapshotSet {
    pub fn new(dims: Vec<usize>, seed: u64, source: String, snapshots: Vec<Snapshot>) -> Self {
        Self {
            dims,
            seed,
            source,
            snapshots,
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Outcome-space sizes per subsystem (`d_j^2`).
    pub fn outcome_dims(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d * d).collect()
    }

    /// Joint row-major outcome index of one snapshot.
    pub fn joint_index(&self, i: usize) -> usize {
        let od = self.outcome_dims();
        let digits: Vec<usize> = self.snapshots[i]
            .outcomes
            .iter()
            .map(|&x| x as usize)
            .collect();
        qla::join_index(&digits, &od)
    }

    /// Histogram over joint outcomes; errors when the outcome space exceeds
    /// the cap.
    pub fn counts(&self, cap: usize) -> Result<Vec<u64>> {
        let r: usize = self.outcome_dims().iter().product();
        if r > cap {
            return Err(Error::DimensionCeiling {
                dim: r,
                ceiling: cap,
            });
        }
        let mut counts = vec![0u64; r];
        for i in 0..self.len() {
            counts[self.joint_index(i)] += 1;
        }
        Ok(counts)
    }

    /// A new set containing the first `n` snapshots.
    pub fn truncated(&self, n: usize) -> SnapshotSet {
        SnapshotSet {
            dims: self.dims.clone(),
            seed: self.seed,
            source: self.source.clone(),
            snapshots: self.snapshots[..n.min(self.len())].to_vec(),
        }
    }
}

/// Borrowed input state, pure or mixed.
#[derive(Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Density(&'a DensityMatrix),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Density(s)
    }
}

impl<'a> StateRef<'a> {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateRef::Pure(s) => s.dims(),
            StateRef::Density(s) => s.dims(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }
}

fn check_dims(state: &StateRef, pds: &[&PairDynamics]) -> Result<Vec<usize>> {
    let dims = state.dims().to_vec();
    if dims.len() != pds.len() || dims.iter().zip(pds.iter()).any(|(&d, pd)| d != pd.local_dim())
    {
        return Err(Error::Dimension {
            expected: format!("{:?} pair dynamics", dims),
            got: format!("{:?}", pds.iter().map(|p| p.local_dim()).collect::<Vec<_>>()),
        });
    }
    Ok(dims)
}

/// Exact joint readout distribution `p(m_1..m_n) = Tr[((x)_j T_{m_j}) sigma]`,
/// as a row-major vector over the joint outcome index.
pub fn exact_distribution(state: StateRef, pds: &[&PairDynamics]) -> Result<Vec<f64>> {
    exact_distribution_with_ceiling(state, pds, DEFAULT_DIM_CEILING)
}

pub fn exact_distribution_with_ceiling(
    state: StateRef,
    pds: &[&PairDynamics],
    ceiling: usize,
) -> Result<Vec<f64>> {
    let dims = check_dims(&state, pds)?;
    let total: usize = dims.iter().product();
    if total > ceiling {
        return Err(Error::DimensionCeiling {
            dim: total,
            ceiling,
        });
    }
    let rho;
    let mat: &CMat = match state {
        StateRef::Pure(s) => {
            rho = s.to_density();
            rho.matrix()
        }
        StateRef::Density(s) => s.matrix(),
    };
    let slot_dims: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let mut v = qla::vec_to_slots(&vec_rm(mat)?, &dims);
    for (s, pd) in pds.iter().enumerate() {
        v = apply_local(pd.tmat(), &v, &slot_dims, s);
    }
    let probs: Vec<f64> = v.iter().map(|x| x.re).collect();
    Ok(probs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleStrategy {
    /// Sequential collapse for pure states, categorical for density matrices.
    #[default]
    Auto,
    SequentialCollapse,
    Categorical,
}

/// Samples `n_samples` snapshots of the joint readout distribution.
pub fn sample_snapshots(
    state: StateRef,
    pds: &[&PairDynamics],
    n_samples: usize,
    seed: u64,
) -> Result<SnapshotSet> {
    sample_snapshots_with(state, pds, n_samples, seed, SampleStrategy::Auto)
}

pub fn sample_snapshots_with(
    state: StateRef,
    pds: &[&PairDynamics],
    n_samples: usize,
    seed: u64,
    strategy: SampleStrategy,
) -> Result<SnapshotSet> {
    let dims = check_dims(&state, pds)?;
    let strategy = match (strategy, &state) {
        (SampleStrategy::Auto, StateRef::Pure(_)) => SampleStrategy::SequentialCollapse,
        (SampleStrategy::Auto, StateRef::Density(_)) => SampleStrategy::Categorical,
        (s, _) => s,
    };
    match strategy {
        SampleStrategy::Categorical => {
            let probs = exact_distribution(state, pds)?;
            let outcome_dims: Vec<usize> = dims.iter().map(|&d| d * d).collect();
            let mut cdf = Vec::with_capacity(probs.len());
            let mut acc = 0.0;
            for &p in &probs {
                acc += p.max(0.0);
                cdf.push(acc);
            }
            let total = acc;
            let snapshots: Vec<Snapshot> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = snapshot_rng(seed, i);
                    let u: f64 = rng.random::<f64>() * total;
                    let idx = cdf.partition_point(|&x| x < u).min(probs.len() - 1);
                    let outcomes = qla::split_index(idx, &outcome_dims)
                        .into_iter()
                        .map(|x| x as u16)
                        .collect();
                    Snapshot { outcomes }
                })
                .collect();
            Ok(SnapshotSet::new(
                dims,
                seed,
                "categorical".into(),
                snapshots,
            ))
        }
        SampleStrategy::SequentialCollapse => {
            let psi = match state {
                StateRef::Pure(s) => s,
                StateRef::Density(_) => {
                    return Err(Error::Unsupported(
                        "sequential collapse requires a pure state".into(),
                    ))
                }
            };
            // Principal square roots as collapse Kraus operators; any valid
            // choice yields the same joint law.
            let mut kraus: Vec<Vec<CMat>> = Vec::with_capacity(pds.len());
            for pd in pds {
                let mut ks = Vec::with_capacity(pd.effects().len());
                for e in pd.effects() {
                    ks.push(psd_sqrt(e)?);
                }
                kraus.push(ks);
            }
            let amps0 = psi.amplitudes().clone();
            let snapshots: Vec<Snapshot> = (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = snapshot_rng(seed, i);
                    collapse_once(&amps0, &dims, pds, &kraus, &mut rng)
                })
                .collect();
            Ok(SnapshotSet::new(dims, seed, "collapse".into(), snapshots))
        }
        SampleStrategy::Auto => unreachable!(),
    }
}

fn snapshot_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn collapse_once(
    amps0: &CVec,
    dims: &[usize],
    pds: &[&PairDynamics],
    kraus: &[Vec<CMat>],
    rng: &mut ChaCha8Rng,
) -> Snapshot {
    let mut amps = amps0.clone();
    let mut outcomes = Vec::with_capacity(dims.len());
    for (site, pd) in pds.iter().enumerate() {
        let n_out = pd.effects().len();
        let mut probs = Vec::with_capacity(n_out);
        let mut acc = 0.0;
        for e in pd.effects() {
            let w = apply_local(e, &amps, dims, site);
            let p = amps
                .iter()
                .zip(w.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                .max(0.0);
            acc += p;
            probs.push(acc);
        }
        let u: f64 = rng.random::<f64>() * acc;
        let m = probs.partition_point(|&x| x < u).min(n_out - 1);
        outcomes.push(m as u16);
        // collapse with the chosen Kraus operator and renormalize
        amps = apply_local(&kraus[site][m], &amps, dims, site);
        let norm = amps.norm();
        if norm > 0.0 {
            amps.unscale_mut(norm);
        }
    }
    Snapshot { outcomes }
}
