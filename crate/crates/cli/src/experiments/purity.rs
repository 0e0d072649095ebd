//! Average quadratic variance bound for purity estimation over Haar-random
//! single-qubit inputs, reported under both Planck-constant conventions and
//! both traceless modes.

use rayon::prelude::*;

use qrpe_core::analysis::a2_bound_from_weights;
use qrpe_core::qla::haar_pure;
use qrpe_core::reservoir::{pair_effects, PairKind};
use qrpe_core::statelib::swap_operator;
use qrpe_core::training::weights_dense;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub const HBAR_CONVENTIONS: [f64; 2] = [1.0, 0.6582];

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let sec = &cfg.purity;
    let mut table = ResultTable::new(
        "purity",
        &["hbar", "traceless", "states", "avg_a2_lemma", "avg_a2_snapshot"],
    );
    let swap = swap_operator(&[2]);

    for (hi, &hbar) in HBAR_CONVENTIONS.iter().enumerate() {
        let params = cfg.reservoir.to_params(hbar);
        let pd = pair_effects(&params, 2, PairKind::Qubit)?;
        for traceless in [true, false] {
            let obs = if traceless {
                let tr = qrpe_core::qla::trace(&swap.matrix).re;
                &swap.matrix - qrpe_core::qla::identity(4).scale(tr / 4.0)
            } else {
                swap.matrix.clone()
            };
            let w2 = weights_dense(&obs, &[&pd], 2)?;
            let seed = subseed(cfg.seed, hi as u64 * 2 + traceless as u64);
            let sums: Vec<(f64, f64)> = (0..sec.states)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64 + 1);
                    let sigma = haar_pure(&[2], &mut rng).to_density();
                    let xbar = pd.probabilities(sigma.matrix()).expect("probabilities");
                    let bound = a2_bound_from_weights(&w2, &xbar).expect("bound");
                    (bound.a2, bound.parts[0])
                })
                .collect();
            let avg_a2 = sums.iter().map(|(a, _)| a).sum::<f64>() / sec.states as f64;
            let avg_snap = sums.iter().map(|(_, b)| b).sum::<f64>() / sec.states as f64;
            table.push(vec![
                Cell::from(hbar),
                Cell::from(if traceless { "on" } else { "off" }),
                Cell::from(sec.states),
                Cell::from(avg_a2),
                Cell::from(avg_snap),
            ]);
        }
    }
    Ok(vec![stamp(table, cfg)])
}
