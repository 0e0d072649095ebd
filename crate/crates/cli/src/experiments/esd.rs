//! Entanglement sudden death: witness estimation over the (q, kappa_t)
//! grid for the dephased GHZ-type family.

use rayon::prelude::*;

use qrpe_core::estimators::mean_estimate;
use qrpe_core::qla::hs_inner;
use qrpe_core::reservoir::PairDynamics;
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib::{dephase, ghz_type, witnesses_ghz3};
use qrpe_core::training::weights_factored;

use super::{qubit_pd, stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let pd = qubit_pd(cfg)?;
    let tps: Vec<&PairDynamics> = vec![&pd; 3];
    let sec = &cfg.esd;
    let (w_gme, w_me) = witnesses_ghz3()?;
    let weights_gme = weights_factored(w_gme.factors.as_ref().unwrap(), &tps)?;
    let weights_me = weights_factored(w_me.factors.as_ref().unwrap(), &tps)?;

    let mut table = ResultTable::new(
        "esd",
        &["q", "kappa_t", "est_wgme", "est_wme", "exact_wgme", "exact_wme", "n_snapshots"],
    );

    let points: Vec<(usize, usize)> = (0..sec.q_points)
        .flat_map(|iq| (0..sec.kt_points).map(move |ik| (iq, ik)))
        .collect();
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&(iq, ik)| {
            let q = iq as f64 / (sec.q_points - 1).max(1) as f64;
            let kt = sec.kt_max * ik as f64 / (sec.kt_points - 1).max(1) as f64;
            let rho = dephase(&ghz_type(q).expect("q in range"), kt).expect("kt in range");
            let seed = subseed(cfg.seed, (iq * sec.kt_points + ik) as u64);
            let ss = sample_snapshots(StateRef::Density(&rho), &tps, sec.snapshots, seed)
                .expect("sampling");
            let est_gme = mean_estimate(&weights_gme, &ss).expect("estimate");
            let est_me = mean_estimate(&weights_me, &ss).expect("estimate");
            let exact_gme = hs_inner(&w_gme.matrix, rho.matrix()).re;
            let exact_me = hs_inner(&w_me.matrix, rho.matrix()).re;
            vec![
                Cell::from(q),
                Cell::from(kt),
                Cell::from(est_gme),
                Cell::from(est_me),
                Cell::from(exact_gme),
                Cell::from(exact_me),
                Cell::from(sec.snapshots),
            ]
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    Ok(vec![stamp(table, cfg)])
}
