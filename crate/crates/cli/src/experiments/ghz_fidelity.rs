//! GHZ-state fidelity estimation: error scaling with the number of input
//! copies, and the dense-vs-product agreement of the variance bound.

use rayon::prelude::*;

use qrpe_core::analysis::{f_res, f_res_sum_of_products};
use qrpe_core::estimators::mean_estimate;
use qrpe_core::reservoir::PairDynamics;
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib::{ghz, ghz_projector_sop};
use qrpe_core::training::weights_factored;

use super::{qubit_pd, stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let pd = qubit_pd(cfg)?;
    let sec = &cfg.ghz_fidelity;

    let mut table = ResultTable::new(
        "ghz_fidelity",
        &["k", "n_samples", "avg_error", "err_single", "fres_product", "fres_dense"],
    );

    for &k in &sec.ks {
        let tps: Vec<&PairDynamics> = vec![&pd; k];
        let sop = ghz_projector_sop(k, 1.0)?;
        let w = weights_factored(&sop, &tps)?;
        let psi = ghz(k)?;
        let fres_product = f_res_sum_of_products(&sop, &tps, true)?.f_res;
        let fres_dense = if k <= 6 {
            f_res(&sop.dense(), &tps, true)?.f_res
        } else {
            f64::NAN
        };
        let n_max_grid = *sec.n_grid.iter().max().unwrap_or(&1000);

        let errors: Vec<Vec<f64>> = (0..sec.repeats)
            .into_par_iter()
            .map(|rep| {
                let seed = subseed(cfg.seed, (k * 100 + rep) as u64);
                let ss = sample_snapshots(StateRef::Pure(&psi), &tps, n_max_grid, seed)
                    .expect("sampling");
                sec.n_grid
                    .iter()
                    .map(|&n| {
                        let sub = ss.truncated(n);
                        (mean_estimate(&w, &sub).expect("estimate") - 1.0).abs()
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
                Cell::from(fres_product),
                Cell::from(fres_dense),
            ]);
        }
    }
    Ok(vec![stamp(table, cfg)])
}
