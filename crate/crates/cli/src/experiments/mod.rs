//! The paper-style experiment suite. Each experiment turns a configuration
//! into one or more CSV result tables; fixed config and seed give
//! byte-identical output at any thread count.

mod esd;
mod ghz_fidelity;
mod pauli_local;
mod ptm;
mod purity;
mod rand_fidelity;
mod time_scan;
mod vd;
mod wbp;

use sha2::{Digest, Sha256};

use qrpe_core::reservoir::{pair_effects, PairDynamics, PairKind};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::table::ResultTable;

/// Deterministic sub-seed derivation (splitmix64 step).
pub(crate) fn subseed(base: u64, tag: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E3779B97F4A7C15u64.wrapping_mul(tag.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn qubit_pd(cfg: &Config) -> Result<PairDynamics> {
    Ok(pair_effects(
        &cfg.reservoir.to_params(cfg.hbar),
        cfg.reservoir.local_dim,
        if cfg.reservoir.kind == "bosonic" {
            PairKind::Bosonic
        } else {
            PairKind::Qubit
        },
    )?)
}

pub fn qudit_pd(cfg: &Config) -> Result<PairDynamics> {
    Ok(pair_effects(
        &cfg.reservoir_qudit.to_params(cfg.hbar),
        cfg.reservoir_qudit.local_dim,
        if cfg.reservoir_qudit.kind == "qubit" {
            PairKind::Qubit
        } else {
            PairKind::Bosonic
        },
    )?)
}

pub(crate) fn stamp(table: ResultTable, cfg: &Config) -> ResultTable {
    let mut hasher = Sha256::new();
    hasher.update(cfg.to_toml().as_bytes());
    let hash = hex_prefix(&hasher.finalize(), 16);
    table
        .with_provenance("toolkit", format!("qrpe {}", env!("CARGO_PKG_VERSION")))
        .with_provenance("experiment", &cfg.experiment)
        .with_provenance("config_sha256", hash)
        .with_provenance("seed", cfg.seed)
        .with_provenance("hbar", cfg.hbar)
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes
        .iter()
        .take(n)
        .map(|b| format!("{b:02x}"))
        .collect::<String>()
}

/// Runs the configured experiment and returns its result tables.
pub fn run(cfg: &Config) -> Result<Vec<ResultTable>> {
    cfg.validate()?;
    match cfg.experiment.as_str() {
        "rand-fidelity" => rand_fidelity::run(cfg),
        "esd" => esd::run(cfg),
        "pauli-local" => pauli_local::run(cfg),
        "ghz-fidelity" => ghz_fidelity::run(cfg),
        "purity" => purity::run(cfg),
        "wbp" => wbp::run(cfg),
        "vd" => vd::run(cfg),
        "time-scan" => time_scan::run(cfg),
        "ptm" => ptm::run(cfg),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}
