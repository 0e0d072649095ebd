//! Variance reduction via probabilistic time multiplexing over random
//! reservoir settings.

use rayon::prelude::*;

use qrpe_core::analysis::{f_res, ptm_optimize, BoundAggregate};
use qrpe_core::qla::{haar_pure, CMat};
use qrpe_core::reservoir::{pair_effects, PairDynamics, PairKind, ReservoirParams};
use qrpe_core::training::{simulate_training, training_states, TrainingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let sec = &cfg.ptm;
    let mut table = ResultTable::new(
        "ptm",
        &["case", "f_t1", "f_t2", "f_ptm", "p_t1_opt", "improved"],
    );

    let rows: Vec<Vec<Cell>> = (0..sec.cases)
        .into_par_iter()
        .map(|case| {
            let seed = subseed(cfg.seed, case as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // reservoir parameters uniform in [0, 5]
            let params = ReservoirParams::new(
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
                sec.t1,
            )
            .with_hbar(cfg.hbar);
            let pd1 = pair_effects(&params.with_t(sec.t1), 2, PairKind::Qubit).expect("pd");
            let pd2 = pair_effects(&params.with_t(sec.t2), 2, PairKind::Qubit).expect("pd");
            let states = training_states(2).expect("states");
            let td1 = simulate_training(&pd1, &states, TrainingMode::Exact).expect("training");
            let td2 = simulate_training(&pd2, &states, TrainingMode::Exact).expect("training");
            let targets: Vec<CMat> = (0..sec.targets)
                .map(|_| haar_pure(&[2], &mut rng).to_density().matrix().clone())
                .collect();
            let target_refs: Vec<&CMat> = targets.iter().collect();
            let avg = |pd: &PairDynamics| -> f64 {
                target_refs
                    .iter()
                    .map(|o| {
                        f_res(o, &[pd], true)
                            .map(|vb| vb.f_res)
                            .unwrap_or(f64::INFINITY)
                    })
                    .sum::<f64>()
                    / target_refs.len() as f64
            };
            let f1 = avg(&pd1);
            let f2 = avg(&pd2);
            let ptm = ptm_optimize(
                &[&td1, &td2],
                &[sec.t1, sec.t2],
                &target_refs,
                sec.j_max,
                subseed(seed, 1),
                BoundAggregate::Mean,
                true,
            )
            .expect("ptm");
            let best_vertex = f1.min(f2);
            let improved = ptm.objective < best_vertex * (1.0 - 1e-9);
            vec![
                Cell::from(case),
                Cell::from(f1),
                Cell::from(f2),
                Cell::from(ptm.objective),
                Cell::from(ptm.probabilities[0]),
                Cell::from(improved as usize),
            ]
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    Ok(vec![stamp(table, cfg)])
}
