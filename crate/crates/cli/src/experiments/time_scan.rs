//! Average fidelity variance bound as a function of the reservoir evolution
//! time.

use qrpe_core::analysis::variance_time_scan;

use super::{stamp, subseed};
use crate::config::Config;
use crate::error::Result;
use crate::table::{Cell, ResultTable};

pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    let sec = &cfg.time_scan;
    let params = cfg.reservoir.to_params(cfg.hbar);
    let grid: Vec<f64> = (0..sec.t_points)
        .map(|i| sec.t_max * i as f64 / (sec.t_points - 1).max(1) as f64)
        .collect();
    let scan = variance_time_scan(&params, &grid, sec.ensemble, subseed(cfg.seed, 1))?;

    let mut table = ResultTable::new("time_scan", &["t", "invertible", "avg_f_res", "cond"]);
    for point in scan {
        table.push(vec![
            Cell::from(point.t),
            Cell::from(if point.avg_f_res.is_some() { 1usize } else { 0 }),
            match point.avg_f_res {
                Some(v) => Cell::from(v),
                None => Cell::Empty,
            },
            Cell::from(point.cond),
        ]);
    }
    Ok(vec![stamp(table, cfg)])
}
