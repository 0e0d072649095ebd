//! Weak-barren-plateau diagnosis: Rényi-2 entropy of a small region of a
//! shallow random circuit, estimated from reservoir snapshots at each depth.

use rayon::prelude::*;

use qrpe_core::estimators::renyi2;
use qrpe_core::reservoir::PairDynamics;
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib::{page_renyi2, wbp_circuit};

use super::{qubit_pd, stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let pd = qubit_pd(cfg)?;
    let sec = &cfg.wbp;
    let n = sec.n_qubits;
    let tps: Vec<&PairDynamics> = vec![&pd; n];
    let d_a = 1usize << sec.region.len();
    let d_b = 1usize << (n - sec.region.len());
    let page = page_renyi2(d_a, d_b);

    let depths: Vec<usize> = (0..=sec.depth_max)
        .step_by(sec.depth_step.max(1))
        .collect();
    let jobs: Vec<(usize, usize)> = depths
        .iter()
        .flat_map(|&d| (0..sec.seeds).map(move |s| (d, s)))
        .collect();

    let mut table = ResultTable::new(
        "wbp",
        &["n_qubits", "depth", "seed", "s2_est", "s2_exact", "page_value"],
    );
    let rows: Vec<Vec<Cell>> = jobs
        .par_iter()
        .map(|&(depth, seed_idx)| {
            let circuit_seed = subseed(cfg.seed, (depth * 100 + seed_idx) as u64);
            let psi = wbp_circuit(n, depth, circuit_seed).expect("circuit");
            let exact = -psi.reduced_density(&sec.region).purity().ln();
            let ss = sample_snapshots(
                StateRef::Pure(&psi),
                &tps,
                sec.snapshots,
                subseed(circuit_seed, 1),
            )
            .expect("sampling");
            let est = renyi2(&ss, &sec.region, &tps);
            vec![
                Cell::from(n),
                Cell::from(depth),
                Cell::from(seed_idx),
                match est {
                    Ok(r) => Cell::from(r.s2),
                    Err(_) => Cell::Empty,
                },
                Cell::from(exact),
                Cell::from(page),
            ]
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    let table = table.with_provenance(
        "scale_cap",
        format!("n_qubits={} (desk-scale cap; reference experiment uses 14)", n),
    );
    Ok(vec![stamp(table, cfg)])
}
