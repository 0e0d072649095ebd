//! Virtual distillation of noisy maximally entangled states in hybrid
//! qubit-qutrit and two-qutrit systems.

use rayon::prelude::*;

use qrpe_core::estimators::{vd_estimate, vd_exact};
use qrpe_core::reservoir::PairDynamics;
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib::{max_entangled, noisy_state};

use super::{qubit_pd, qudit_pd, stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let qb = qubit_pd(cfg)?;
    let qt = qudit_pd(cfg)?;
    let sec = &cfg.vd;
    let (psi1, psi2) = max_entangled();

    let mut table = ResultTable::new(
        "vd",
        &["system", "eps", "rep", "vd_est", "vd_exact", "n_readouts"],
    );

    let systems: Vec<(&str, &qrpe_core::qla::PureState, Vec<&PairDynamics>)> = vec![
        ("qubit-qutrit", &psi1, vec![&qb, &qt]),
        ("qutrit-qutrit", &psi2, vec![&qt, &qt]),
    ];

    for (si, (name, psi, tps)) in systems.iter().enumerate() {
        let jobs: Vec<(usize, usize)> = sec
            .eps_grid
            .iter()
            .enumerate()
            .flat_map(|(ei, _)| (0..sec.repeats).map(move |r| (ei, r)))
            .collect();
        let rows: Vec<Vec<Cell>> = jobs
            .par_iter()
            .map(|&(ei, rep)| {
                let eps = sec.eps_grid[ei];
                let rho = noisy_state(psi, eps).expect("eps in range");
                let exact = vd_exact(rho.matrix(), psi, 2);
                let seed = subseed(cfg.seed, (si * 10_000 + ei * 100 + rep) as u64);
                let ss = sample_snapshots(StateRef::Density(&rho), tps, sec.readouts, seed)
                    .expect("sampling");
                let est = vd_estimate(&ss, psi, 2, tps);
                vec![
                    Cell::from(*name),
                    Cell::from(eps),
                    Cell::from(rep),
                    match est {
                        Ok(v) => Cell::from(v),
                        Err(_) => Cell::Empty,
                    },
                    Cell::from(exact),
                    Cell::from(sec.readouts),
                ]
            })
            .collect();
        for row in rows {
            table.push(row);
        }
    }
    Ok(vec![stamp(table, cfg)])
}
