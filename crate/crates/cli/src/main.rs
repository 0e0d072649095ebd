use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrpe_cli::config::{Config, EXPERIMENTS};
use qrpe_cli::error::{Error, Result};
use qrpe_cli::experiments;
use qrpe_cli::io;

use qrpe_core::analysis::{f_res, plan_linear, plan_quadratic, ptm_optimize, BoundAggregate};
use qrpe_core::estimators::{mean_estimate, mom_estimate};
use qrpe_core::qla::{haar_pure, CMat, CVec, PureState};
use qrpe_core::reservoir::{completeness_report, PairDynamics};
use qrpe_core::sampling::{sample_snapshots, StateRef};
use qrpe_core::statelib;
use qrpe_core::training::{simulate_training, training_states, weights_dense, TrainingMode};

#[derive(Parser)]
#[command(
    name = "qrpe",
    about = "Quantum reservoir parameter estimation: simulate, train, sample, estimate, and bound",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Worker threads (0 = library default)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its CSV tables
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the Planck-constant convention (meV*ps)
        #[arg(long)]
        hbar: Option<f64>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Write a default configuration file for one experiment
    Init {
        /// One of the named experiments
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value = "qrpe.toml")]
        out: PathBuf,
    },
    /// Build pair dynamics from the configured reservoir and serialize them
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Use the [reservoir_qudit] section instead of [reservoir]
        #[arg(long)]
        qudit: bool,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Variance bound of an observable against serialized pair dynamics
    Fres {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        /// Skip the traceless-part reduction
        #[arg(long)]
        raw: bool,
        /// Also write the bound as JSON
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Snapshot-count plan for a target precision and confidence
    Plan {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        m_obs: usize,
        #[arg(long)]
        f_max: f64,
        /// Plan for order-2 U-statistics instead of linear estimators
        #[arg(long)]
        quadratic: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sample snapshots of a named state through serialized pair dynamics
    Sample {
        /// Pair-dynamics file; repeat once per subsystem or give one to
        /// reuse across all subsystems
        #[arg(long, required = true)]
        pair: Vec<PathBuf>,
        /// State spec: ghz:N | zero:N | plus:N | haar:N:SEED |
        /// wbp:N:DEPTH:SEED | max-entangled:1 | max-entangled:2
        #[arg(long)]
        state: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Estimate an observable from weights and a snapshot file
    Estimate {
        #[arg(long, required = true)]
        pair: Vec<PathBuf>,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        snapshots: PathBuf,
        /// Median-of-means batch count (odd); 0 = plain sample mean
        #[arg(long, default_value_t = 0)]
        mom: usize,
        /// Serialize the synthesized weights
        #[arg(long)]
        save_weights: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Optimize a probabilistic-time-multiplexing distribution over two or
    /// more serialized pair dynamics
    Ptm {
        /// Pair-dynamics files, one per time point (at least two)
        #[arg(long, required = true)]
        pair: Vec<PathBuf>,
        /// Observable files; omitted = Haar-random fidelity targets
        #[arg(long)]
        obs: Vec<PathBuf>,
        /// Number of Haar targets when no observables are given
        #[arg(long, default_value_t = 300)]
        targets: usize,
        #[arg(long, default_value_t = 200)]
        jmax: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn setup_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn parse_state(spec: &str) -> Result<PureState> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("cannot parse state spec '{spec}'"));
    match parts.as_slice() {
        ["ghz", n] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            Ok(statelib::ghz(n)?)
        }
        ["zero", n] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            Ok(PureState::basis(vec![2; n], 0)?)
        }
        ["plus", n] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            let total = 1usize << n;
            let amp = 1.0 / (total as f64).sqrt();
            let amps = CVec::from_element(total, qrpe_core::qla::c(amp, 0.0));
            Ok(PureState::new(vec![2; n], amps)?)
        }
        ["haar", n, seed] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Ok(haar_pure(&vec![2; n], &mut rng))
        }
        ["wbp", n, depth, seed] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            let depth: usize = depth.parse().map_err(|_| bad())?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            Ok(statelib::wbp_circuit(n, depth, seed)?)
        }
        ["max-entangled", which] => {
            let (psi1, psi2) = statelib::max_entangled();
            match *which {
                "1" => Ok(psi1),
                "2" => Ok(psi2),
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

fn pairs_for_dims(paths: &[PathBuf], dims: &[usize]) -> Result<Vec<PairDynamics>> {
    let loaded: Vec<PairDynamics> = paths
        .iter()
        .map(|p| io::load_pair_dynamics(p))
        .collect::<Result<_>>()?;
    if loaded.len() == dims.len() {
        for (pd, &d) in loaded.iter().zip(dims.iter()) {
            if pd.local_dim() != d {
                return Err(Error::Config(format!(
                    "pair local dim {} does not match subsystem dim {d}",
                    pd.local_dim()
                )));
            }
        }
        return Ok(loaded);
    }
    if loaded.len() == 1 {
        let pd = &loaded[0];
        if dims.iter().any(|&d| d != pd.local_dim()) {
            return Err(Error::Config(format!(
                "single pair of local dim {} cannot serve dims {dims:?}",
                pd.local_dim()
            )));
        }
        return Ok(vec![pd.clone(); dims.len()]);
    }
    Err(Error::Config(format!(
        "{} pair files for {} subsystems",
        loaded.len(),
        dims.len()
    )))
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            hbar,
            common,
        } => {
            setup_threads(common.threads);
            let mut cfg = Config::from_toml(&std::fs::read_to_string(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(h) = hbar {
                cfg.hbar = h;
            }
            if let Some(o) = &out {
                cfg.out_dir = o.display().to_string();
            }
            let tables = experiments::run(&cfg)?;
            let dir = PathBuf::from(&cfg.out_dir);
            for t in tables {
                let path = t.write_to(&dir)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Init { experiment, out } => {
            if !EXPERIMENTS.contains(&experiment.as_str()) {
                return Err(Error::Config(format!(
                    "unknown experiment '{experiment}'; expected one of {EXPERIMENTS:?}"
                )));
            }
            let cfg = Config::for_experiment(&experiment)?;
            std::fs::write(&out, cfg.to_toml())?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Train {
            config,
            qudit,
            hbar,
            out,
            common,
        } => {
            setup_threads(common.threads);
            let mut cfg = Config::from_toml(&std::fs::read_to_string(&config)?)?;
            if let Some(h) = hbar {
                cfg.hbar = h;
            }
            let pd = if qudit {
                experiments::qudit_pd(&cfg)?
            } else {
                experiments::qubit_pd(&cfg)?
            };
            // exercise the training stage; the stored effects correspond to
            // the exactly recovered dynamics
            let states = training_states(pd.local_dim())?;
            let _td = simulate_training(&pd, &states, TrainingMode::Exact)?;
            let report = completeness_report(&pd);
            io::save_pair_dynamics(&pd, &out)?;
            println!(
                "wrote {} (local_dim {}, cond {:.4e}, invertible {})",
                out.display(),
                pd.local_dim(),
                report.cond,
                report.invertible
            );
            Ok(())
        }
        Command::Fres {
            pair,
            obs,
            raw,
            json,
            common,
        } => {
            setup_threads(common.threads);
            let pd = io::load_pair_dynamics(&pair)?;
            let loaded = io::load_observable(&obs)?;
            for &d in &loaded.dims {
                if d != pd.local_dim() {
                    return Err(Error::Config(format!(
                        "observable dims {:?} do not match pair local dim {}",
                        loaded.dims,
                        pd.local_dim()
                    )));
                }
            }
            let tps: Vec<&PairDynamics> = loaded.dims.iter().map(|_| &pd).collect();
            let vb = f_res(&loaded.matrix, &tps, !raw)?;
            println!(
                "f_res({}) = {:.12e} (traceless {}, cond {:.4e})",
                loaded.name,
                vb.f_res,
                !raw,
                pd.cond()
            );
            if let Some(path) = json {
                let payload = serde_json::json!({
                    "format": "qrpe-fres",
                    "version": 1,
                    "observable": loaded.name,
                    "traceless": !raw,
                    "f_res": vb.f_res,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
            }
            Ok(())
        }
        Command::Plan {
            epsilon,
            delta,
            m_obs,
            f_max,
            quadratic,
            json,
        } => {
            let plan = if quadratic {
                plan_quadratic(epsilon, delta, m_obs, f_max)?
            } else {
                plan_linear(epsilon, delta, m_obs, f_max)?
            };
            println!(
                "n_sample = {}, k_batches = {}, batch_size = {}",
                plan.n_sample, plan.k_batches, plan.batch_size
            );
            if let Some(path) = json {
                let payload = io::PlanFile {
                    format: "qrpe-plan".into(),
                    version: 1,
                    epsilon,
                    delta,
                    m_obs,
                    f_max,
                    quadratic,
                    n_sample: plan.n_sample,
                    k_batches: plan.k_batches,
                    batch_size: plan.batch_size,
                };
                std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
            }
            Ok(())
        }
        Command::Sample {
            pair,
            state,
            n,
            seed,
            out,
            common,
        } => {
            setup_threads(common.threads);
            let psi = parse_state(&state)?;
            let pds = pairs_for_dims(&pair, psi.dims())?;
            let tps: Vec<&PairDynamics> = pds.iter().collect();
            let ss = sample_snapshots(StateRef::Pure(&psi), &tps, n, seed)?;
            io::save_snapshots(&ss, &out)?;
            println!(
                "wrote {} ({} snapshots, dims {:?})",
                out.display(),
                ss.len(),
                ss.dims
            );
            Ok(())
        }
        Command::Estimate {
            pair,
            obs,
            snapshots,
            mom,
            save_weights,
            common,
        } => {
            setup_threads(common.threads);
            let ss = io::load_snapshots(&snapshots)?;
            let pds = pairs_for_dims(&pair, &ss.dims)?;
            let tps: Vec<&PairDynamics> = pds.iter().collect();
            let loaded = io::load_observable(&obs)?;
            if loaded.dims != ss.dims {
                return Err(Error::Config(format!(
                    "observable dims {:?} do not match snapshot dims {:?}",
                    loaded.dims, ss.dims
                )));
            }
            let w = weights_dense(&loaded.matrix, &tps, 1)?;
            if let Some(path) = save_weights {
                io::save_weights(&w, &path)?;
            }
            let value = if mom > 0 {
                mom_estimate(&w, &ss, mom)?
            } else {
                mean_estimate(&w, &ss)?
            };
            println!("{value}");
            Ok(())
        }
        Command::Ptm {
            pair,
            obs,
            targets,
            jmax,
            seed,
            common,
        } => {
            setup_threads(common.threads);
            if pair.len() < 2 {
                return Err(Error::Config(
                    "ptm needs at least two pair-dynamics files".into(),
                ));
            }
            let pds: Vec<PairDynamics> = pair
                .iter()
                .map(|p| io::load_pair_dynamics(p))
                .collect::<Result<_>>()?;
            let times: Vec<f64> = pds
                .iter()
                .enumerate()
                .map(|(i, pd)| match pd.source() {
                    qrpe_core::reservoir::PairSource::Reservoir { params, .. } => params.t,
                    _ => i as f64,
                })
                .collect();
            let states = training_states(pds[0].local_dim())?;
            let tds: Vec<_> = pds
                .iter()
                .map(|pd| simulate_training(pd, &states, TrainingMode::Exact))
                .collect::<qrpe_core::Result<Vec<_>>>()?;
            let td_refs: Vec<_> = tds.iter().collect();
            let observables: Vec<CMat> = if obs.is_empty() {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                (0..targets)
                    .map(|_| {
                        haar_pure(&[pds[0].local_dim()], &mut rng)
                            .to_density()
                            .matrix()
                            .clone()
                    })
                    .collect()
            } else {
                obs.iter()
                    .map(|p| io::load_observable(p).map(|l| l.matrix))
                    .collect::<Result<_>>()?
            };
            let obs_refs: Vec<&CMat> = observables.iter().collect();
            let dist = ptm_optimize(
                &td_refs,
                &times,
                &obs_refs,
                jmax,
                seed,
                BoundAggregate::Mean,
                true,
            )?;
            println!("times: {:?}", dist.time_points);
            println!("probabilities: {:?}", dist.probabilities);
            println!("average bound: {:.12e}", dist.objective);
            Ok(())
        }
    }
}
