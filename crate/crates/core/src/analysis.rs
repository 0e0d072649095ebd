//! Variance-bound machinery: the single-snapshot bound via the B operator,
//! the product law for local observables, quadratic-estimator bounds,
//! median-of-means and U-statistics sample planners, probabilistic time
//! multiplexing, and evolution-time scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::EstimationPlan;
use crate::qla::{
    self, haar_pure, identity, kron, spectral_norm_herm, trace, CMat,
};
use crate::reservoir::{
    completeness_report, pair_effects, PairDynamics, PairKind, PairSource, ReservoirParams,
};
use crate::training::{recover_tp, weights_dense, weights_factored, SumOfProducts, TrainingData,
    WeightVector};

/// Worst-case single-snapshot variance bound: `f_res` is the spectral norm
/// of the B operator defined by `<<B| = (W . W) T`.
#[derive(Debug, Clone)]
pub struct VarianceBound {
    pub f_res: f64,
    pub b_operator: CMat,
    pub traceless: bool,
}

/// Mixing distribution over reservoir evolution times.
#[derive(Debug, Clone, PartialEq)]
pub struct PtmDistribution {
    pub time_points: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// The optimized aggregate bound at this distribution.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundAggregate {
    /// Worst observable (the planner's quantity).
    #[default]
    Max,
    /// Ensemble average (the reported figure for target-state sweeps).
    Mean,
}

fn traceless_part(obs: &CMat) -> CMat {
    let d = obs.nrows();
    let shift = trace(obs) / qla::c(d as f64, 0.0);
    obs - identity(d) * shift
}

/// B operator from dense weights: `B = sum_m w_m^2 (x)_j T_{m_j}`.
fn b_operator_dense(w: &[f64], tps: &[&PairDynamics]) -> CMat {
    let dims: Vec<usize> = tps.iter().map(|pd| pd.local_dim()).collect();
    let total: usize = dims.iter().product();
    let outcome_dims: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let mut b = CMat::zeros(total, total);
    for (m, &wm) in w.iter().enumerate() {
        if wm == 0.0 {
            continue;
        }
        let digits = qla::split_index(m, &outcome_dims);
        let mut eff = identity(1);
        for (j, &mu) in digits.iter().enumerate() {
            eff = kron(&eff, tps[j].effect(mu));
        }
        b += eff.scale(wm * wm);
    }
    (&b + b.adjoint()).scale(0.5)
}

/// Worst-case single-snapshot variance bound for `obs`. With `traceless`
/// set, only the traceless part of the observable enters (the variance is
/// invariant under identity shifts, so the bound tightens).
pub fn f_res(obs: &CMat, tps: &[&PairDynamics], traceless: bool) -> Result<VarianceBound> {
    let shifted;
    let target = if traceless {
        shifted = traceless_part(obs);
        &shifted
    } else {
        obs
    };
    let w = weights_dense(target, tps, 1)?;
    let entries = w.dense_entries().expect("dense weights");
    let b = b_operator_dense(entries, tps);
    let f = spectral_norm_herm(&b)?;
    Ok(VarianceBound {
        f_res: f,
        b_operator: b,
        traceless,
    })
}

/// Product law for a k-local observable `O = (x)_i O_i`: the bound is the
/// product of the per-subsystem bounds.
pub fn f_res_klocal(local_obs: &[&CMat], tps: &[&PairDynamics]) -> Result<f64> {
    if local_obs.len() != tps.len() {
        return Err(Error::Dimension {
            expected: format!("{} local factors", tps.len()),
            got: format!("{}", local_obs.len()),
        });
    }
    let mut product = 1.0;
    for (obs, pd) in local_obs.iter().zip(tps.iter()) {
        let bound = f_res(obs, &[*pd], false)?;
        product *= bound.f_res;
    }
    Ok(product)
}

/// Bound for a sum-of-products observable without forming joint weights:
/// `B = sum_{t,t'} c_t c_{t'} (x)_j B_j^{(t,t')}` with per-site cross
/// operators `B_j^{(t,t')} = sum_mu w_{t,j}[mu] w_{t',j}[mu] T_mu`.
pub fn f_res_sum_of_products(
    sop: &SumOfProducts,
    tps: &[&PairDynamics],
    traceless: bool,
) -> Result<VarianceBound> {
    if sop.copies != 1 {
        return Err(Error::Dimension {
            expected: "single-copy observable".into(),
            got: format!("{} copies", sop.copies),
        });
    }
    let shifted;
    let target = if traceless {
        shifted = sop.traceless_shifted();
        &shifted
    } else {
        sop
    };
    let w = weights_factored(target, tps)?;
    let terms = match &w {
        WeightVector::Factored { terms, .. } => terms,
        WeightVector::Dense { .. } => unreachable!(),
    };
    let n = tps.len();
    let total: usize = tps.iter().map(|pd| pd.local_dim()).product();
    let ones: Vec<Vec<f64>> = tps
        .iter()
        .map(|pd| vec![1.0; pd.local_dim() * pd.local_dim()])
        .collect();
    let mut b = CMat::zeros(total, total);
    for t1 in terms {
        for t2 in terms {
            let mut block = identity(1);
            for j in 0..n {
                let row1 = t1.rows[j].as_ref().unwrap_or(&ones[j]);
                let row2 = t2.rows[j].as_ref().unwrap_or(&ones[j]);
                let d = tps[j].local_dim();
                let mut site = CMat::zeros(d, d);
                for mu in 0..d * d {
                    let wprod = row1[mu] * row2[mu];
                    if wprod != 0.0 {
                        site += tps[j].effect(mu).scale(wprod);
                    }
                }
                block = kron(&block, &site);
            }
            b += block.scale(t1.coeff * t2.coeff);
        }
    }
    let b = (&b + b.adjoint()).scale(0.5);
    let f = spectral_norm_herm(&b)?;
    Ok(VarianceBound {
        f_res: f,
        b_operator: b,
        traceless,
    })
}

/// Exact variance of the single-snapshot estimator at a given readout
/// distribution: `(W.W) xbar - (W xbar)^2`.
pub fn exact_single_variance(w: &[f64], xbar: &[f64]) -> f64 {
    let second: f64 = w.iter().zip(xbar.iter()).map(|(a, p)| a * a * p).sum();
    let first: f64 = w.iter().zip(xbar.iter()).map(|(a, p)| a * p).sum();
    second - first * first
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2Bound {
    pub a2: f64,
    /// `[W.W (xbar x xbar), xbar^T (W12 xbar).(W12 xbar),
    ///   (xbar^T W12).(xbar^T W12) xbar]`
    pub parts: [f64; 3],
}

/// Variance-bound aggregate for an order-2 estimator at readout
/// distribution `xbar`: the three computable bounds combined as
/// `max(parts[1], parts[2], sqrt(parts[0]))`.
pub fn a2_bound(
    obs2: &CMat,
    tps: &[&PairDynamics],
    xbar: &[f64],
    traceless: bool,
) -> Result<A2Bound> {
    let shifted;
    let target = if traceless {
        shifted = traceless_part(obs2);
        &shifted
    } else {
        obs2
    };
    let w = weights_dense(target, tps, 2)?;
    a2_bound_from_weights(&w, xbar)
}

/// Same bound evaluated from precomputed two-copy dense weights; useful when
/// sweeping many input states against one observable.
pub fn a2_bound_from_weights(w: &WeightVector, xbar: &[f64]) -> Result<A2Bound> {
    if w.copies() != 2 {
        return Err(Error::Dimension {
            expected: "two-copy weights".into(),
            got: format!("{} copies", w.copies()),
        });
    }
    let entries = w.dense_entries().ok_or_else(|| Error::Unsupported(
        "quadratic bounds use dense weights".into(),
    ))?;
    let r: usize = w.outcome_dims().iter().product();
    if xbar.len() != r {
        return Err(Error::Dimension {
            expected: format!("readout distribution of length {r}"),
            got: format!("{}", xbar.len()),
        });
    }
    let mut p0 = 0.0;
    let mut row_dot = vec![0.0; r]; // (W12 xbar)_i
    let mut col_dot = vec![0.0; r]; // (xbar^T W12)_j
    for i in 0..r {
        for j in 0..r {
            let wij = entries[i * r + j];
            p0 += wij * wij * xbar[i] * xbar[j];
            row_dot[i] += wij * xbar[j];
            col_dot[j] += wij * xbar[i];
        }
    }
    let p1: f64 = (0..r).map(|i| xbar[i] * row_dot[i] * row_dot[i]).sum();
    let p2: f64 = (0..r).map(|j| xbar[j] * col_dot[j] * col_dot[j]).sum();
    Ok(A2Bound {
        a2: p1.max(p2).max(p0.sqrt()),
        parts: [p0, p1, p2],
    })
}

fn validate_plan_inputs(epsilon: f64, delta: f64, m_obs: usize, f_max: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidRange {
            param: "epsilon",
            value: epsilon,
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidRange {
            param: "delta",
            value: delta,
        });
    }
    if m_obs == 0 {
        return Err(Error::InvalidRange {
            param: "m_obs",
            value: 0.0,
        });
    }
    if f_max <= 0.0 {
        return Err(Error::InvalidRange {
            param: "f_max",
            value: f_max,
        });
    }
    Ok((2.0 * m_obs as f64 / delta).ln())
}

fn assemble_plan(
    epsilon: f64,
    delta: f64,
    m_obs: usize,
    f_max: f64,
    constant: f64,
) -> Result<EstimationPlan> {
    let ln_term = validate_plan_inputs(epsilon, delta, m_obs, f_max)?;
    let mut n_sample = (constant / (epsilon * epsilon) * ln_term * f_max).ceil() as usize;
    let mut k = (2.0 * ln_term).ceil() as usize;
    if k % 2 == 0 {
        k += 1;
    }
    if n_sample < k {
        n_sample = k;
    }
    Ok(EstimationPlan {
        epsilon,
        delta,
        m_obs,
        f_max,
        n_sample,
        k_batches: k,
        batch_size: n_sample / k,
    })
}

/// Median-of-means plan:
/// `N = ceil(68/eps^2 ln(2M/delta) f_max)`, `K = next odd >= ceil(2 ln(2M/delta))`.
pub fn plan_linear(epsilon: f64, delta: f64, m_obs: usize, f_max: f64) -> Result<EstimationPlan> {
    assemble_plan(epsilon, delta, m_obs, f_max, 68.0)
}

/// Median-of-U-statistics plan with constant 544 and `A^(2)` in place of
/// `F_res`.
pub fn plan_quadratic(
    epsilon: f64,
    delta: f64,
    m_obs: usize,
    a2_max: f64,
) -> Result<EstimationPlan> {
    assemble_plan(epsilon, delta, m_obs, a2_max, 544.0)
}

/// Optimizes the mixing distribution over evolution times: draws `j_max`
/// simplex-uniform candidates, always injects the single-time vertices, and
/// returns the distribution minimizing the aggregate bound over `obs_list`.
pub fn ptm_optimize(
    tds: &[&TrainingData],
    times: &[f64],
    obs_list: &[&CMat],
    j_max: usize,
    seed: u64,
    aggregate: BoundAggregate,
    traceless: bool,
) -> Result<PtmDistribution> {
    let k = tds.len();
    if k < 2 || times.len() != k {
        return Err(Error::Dimension {
            expected: "at least two time points with matching training data".into(),
            got: format!("{} data sets, {} times", k, times.len()),
        });
    }
    if j_max < 1 {
        return Err(Error::InvalidRange {
            param: "j_max",
            value: j_max as f64,
        });
    }
    if obs_list.is_empty() {
        return Err(Error::Dimension {
            expected: "non-empty observable list".into(),
            got: "empty".into(),
        });
    }
    let tmats: Vec<CMat> = tds
        .iter()
        .map(|td| recover_tp(td))
        .collect::<Result<_>>()?;

    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(j_max + k);
    for v in 0..k {
        let mut p = vec![0.0; k];
        p[v] = 1.0;
        candidates.push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..j_max {
        // symmetric Dirichlet(1): normalized exponentials
        let mut p: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        candidates.push(p);
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for p in candidates {
        let mut mixed = CMat::zeros(tmats[0].nrows(), tmats[0].ncols());
        for (w, t) in p.iter().zip(tmats.iter()) {
            mixed += t.scale(*w);
        }
        let pd = match PairDynamics::from_tmat(&mixed, PairSource::Synthetic("ptm".into())) {
            Ok(pd) => pd,
            Err(_) => continue,
        };
        if !completeness_report(&pd).invertible {
            continue;
        }
        let mut agg: f64 = match aggregate {
            BoundAggregate::Max => f64::NEG_INFINITY,
            BoundAggregate::Mean => 0.0,
        };
        let mut feasible = true;
        for obs in obs_list {
            match f_res(obs, &[&pd], traceless) {
                Ok(vb) => match aggregate {
                    BoundAggregate::Max => agg = agg.max(vb.f_res),
                    BoundAggregate::Mean => agg += vb.f_res / obs_list.len() as f64,
                },
                Err(_) => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        if best.as_ref().map(|(b, _)| agg < *b).unwrap_or(true) {
            best = Some((agg, p));
        }
    }
    let (objective, probabilities) = best.ok_or_else(|| Error::Singular {
        what: "every candidate mixture".into(),
    })?;
    Ok(PtmDistribution {
        time_points: times.to_vec(),
        probabilities,
        objective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeScanPoint {
    pub t: f64,
    /// Average traceless fidelity bound; absent when the dynamics matrix is
    /// not invertible at this time.
    pub avg_f_res: Option<f64>,
    pub cond: f64,
}

/// Average traceless fidelity bound (Haar-random pure single-qubit targets)
/// as a function of the evolution time. Non-invertible grid points are
/// flagged, not fatal.
pub fn variance_time_scan(
    params: &ReservoirParams,
    t_grid: &[f64],
    ensemble_size: usize,
    seed: u64,
) -> Result<Vec<TimeScanPoint>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidRange {
            param: "t_grid",
            value: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<CMat> = (0..ensemble_size)
        .map(|_| haar_pure(&[2], &mut rng).to_density().matrix().clone())
        .collect();
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let pd = pair_effects(&params.with_t(t), 2, PairKind::Qubit)?;
        let report = completeness_report(&pd);
        if !report.invertible {
            out.push(TimeScanPoint {
                t,
                avg_f_res: None,
                cond: report.cond,
            });
            continue;
        }
        let mut acc = 0.0;
        for target in &targets {
            acc += f_res(target, &[&pd], true)?.f_res;
        }
        out.push(TimeScanPoint {
            t,
            avg_f_res: Some(acc / ensemble_size as f64),
            cond: report.cond,
        });
    }
    Ok(out)
}
