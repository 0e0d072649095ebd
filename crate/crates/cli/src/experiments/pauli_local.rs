//! Estimation error and variance bounds for k-local Pauli observables of
//! random k-qubit input states.

use rayon::prelude::*;

use qrpe_core::analysis::f_res_klocal;
use qrpe_core::estimators::mean_estimate;
use qrpe_core::qla::{haar_pure, hs_inner, CMat};
use qrpe_core::reservoir::PairDynamics;
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib::pauli_klocal_set;
use qrpe_core::training::{weights_factored, WeightVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{qubit_pd, stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let pd = qubit_pd(cfg)?;
    let sec = &cfg.pauli_local;
    let n_max_grid = *sec.n_grid.iter().max().unwrap_or(&1000);

    let mut table = ResultTable::new(
        "pauli_local",
        &["k", "n_samples", "avg_error", "err_single", "fbar_res"],
    );

    for k in 1..=sec.k_max {
        let tps: Vec<&PairDynamics> = vec![&pd; k];
        let specs = pauli_klocal_set(k, k)?;
        let weights: Vec<WeightVector> = specs
            .iter()
            .map(|s| weights_factored(s.factors.as_ref().unwrap(), &tps))
            .collect::<qrpe_core::Result<_>>()?;
        // average variance bound over the full-weight k-local strings
        let fbar: f64 = specs
            .iter()
            .map(|s| {
                let locals: Vec<&CMat> = s
                    .factors
                    .as_ref()
                    .unwrap()
                    .terms[0]
                    .factors
                    .iter()
                    .map(|f| f.as_ref().expect("full-weight string"))
                    .collect();
                f_res_klocal(&locals, &tps).expect("bound")
            })
            .sum::<f64>()
            / specs.len() as f64;

        // per repeat: a fresh Haar input state and one snapshot stream,
        // truncated to each grid size
        let errors: Vec<Vec<f64>> = (0..sec.repeats)
            .into_par_iter()
            .map(|rep| {
                let seed = subseed(cfg.seed, (k * 1000 + rep) as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let psi = haar_pure(&vec![2; k], &mut rng);
                let exact: Vec<f64> = specs
                    .iter()
                    .map(|s| hs_inner(&s.matrix, psi.to_density().matrix()).re)
                    .collect();
                let ss = sample_snapshots(StateRef::Pure(&psi), &tps, n_max_grid, seed)
                    .expect("sampling");
                sec.n_grid
                    .iter()
                    .map(|&n| {
                        let sub = ss.truncated(n);
                        let mut err = 0.0;
                        for (w, &ex) in weights.iter().zip(exact.iter()) {
                            err += (mean_estimate(w, &sub).expect("estimate") - ex).abs();
                        }
                        err / weights.len() as f64
                    })
                    .collect()
            })
            .collect();

        for (gi, &n) in sec.n_grid.iter().enumerate() {
            let avg: f64 =
                errors.iter().map(|row| row[gi]).sum::<f64>() / sec.repeats as f64;
            table.push(vec![
                Cell::from(k),
                Cell::from(n),
                Cell::from(avg),
                Cell::from(errors[0][gi]),
                Cell::from(fbar),
            ]);
        }
    }
    Ok(vec![stamp(table, cfg)])
}
