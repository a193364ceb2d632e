use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dilemma_lab::config::{canonical_key, SimConfig};
use dilemma_lab::output::{save_results, save_series, write_results};
use dilemma_lab::runner::{run_observed, run_sweep, ReplicaStats, SweepRow, SweepSpec};
use dilemma_lab::seeds::derive_seed;
use dilemma_lab::snapshot::{dump_qtables, dump_snapshot};
use log::info;

#[derive(Parser)]
#[command(
    name = "dilemma",
    version,
    about = "Q-learning prisoner's dilemma on a diluted lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated runs at one parameter point; prints one results row.
    Run {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        exec: Exec,
    },
    /// Grid over b, rho and/or p_d; one results row per cell.
    Sweep {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        exec: Exec,
        #[arg(long = "sweep_b", value_delimiter = ',')]
        sweep_b: Vec<f64>,
        #[arg(long = "sweep_rho", value_delimiter = ',')]
        sweep_rho: Vec<f64>,
        #[arg(long = "sweep_p_d", value_delimiter = ',')]
        sweep_p_d: Vec<f64>,
    },
    /// One run, writing lattice grids at the requested steps.
    Snapshot {
        #[command(flatten)]
        params: Params,
        /// Steps at which to write grids (0 is the initial lattice).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        at: Vec<u64>,
        #[arg(long = "out_dir", default_value = ".")]
        out_dir: PathBuf,
        /// Also dump every agent's Q-table next to each grid pair.
        #[arg(long)]
        qtables: bool,
        /// Write the per-step series CSV here.
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Params {
    /// key = value file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "action_set")]
    action_set: Option<String>,
    #[arg(long = "L")]
    side: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long = "p_d")]
    p_d: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long = "n_mcs")]
    n_mcs: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long = "tail_fraction")]
    tail_fraction: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "init_mode")]
    init_mode: Option<String>,
    #[arg(long = "failed_move")]
    failed_move: Option<String>,
}

#[derive(Args)]
struct Exec {
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Results CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one line per job with its cell, replica and seed.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl Params {
    fn resolve(&self) -> Result<SimConfig, Box<dyn std::error::Error>> {
        let mut pairs = match &self.config {
            Some(path) => SimConfig::read_pairs(path)?,
            None => Vec::new(),
        };
        let flags = [
            ("action_set", &self.action_set),
            ("L", &self.side),
            ("rho", &self.rho),
            ("b", &self.b),
            ("p_d", &self.p_d),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("epsilon", &self.epsilon),
            ("n_mcs", &self.n_mcs),
            ("replicas", &self.replicas),
            ("tail_fraction", &self.tail_fraction),
            ("seed", &self.seed),
            ("init_mode", &self.init_mode),
            ("failed_move", &self.failed_move),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.push((k.to_string(), v.clone()));
            }
        }
        if !pairs.iter().any(|(k, _)| canonical_key(k) == Some("seed")) {
            let seed: u64 = rand::random();
            info!("no seed given, using {seed}");
            pairs.push(("seed".into(), seed.to_string()));
        }
        Ok(SimConfig::resolve(&pairs)?)
    }
}

fn write_manifest(path: &Path, spec: &SweepSpec) -> std::io::Result<()> {
    let mut f = File::create(path)?;
    for (i, job) in spec.jobs().iter().enumerate() {
        writeln!(
            f,
            "job={i} cell={} replica={} {}",
            job.cell, job.replica, job.config
        )?;
    }
    Ok(())
}

fn emit(rows: &[SweepRow], exec: &Exec) -> Result<(), Box<dyn std::error::Error>> {
    match &exec.out {
        Some(path) => save_results(path, rows)?,
        None => write_results(std::io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn run_grid(spec: SweepSpec, exec: &Exec) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = &exec.manifest {
        write_manifest(path, &spec)?;
    }
    let jobs = spec.cells().len() * spec.base.replicas;
    info!("running {jobs} jobs: {}", spec.base);
    let rows = run_sweep(&spec, exec.workers)?;
    emit(&rows, exec)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = e.source();
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run { params, exec } => {
            let base = params.resolve()?;
            // A run is a sweep with one cell; this keeps its seeds and
            // output identical to the matching sweep cell.
            let mut spec = SweepSpec::new(base.clone());
            spec.b = vec![base.b];
            run_grid(spec, &exec)
        }
        Command::Sweep {
            params,
            exec,
            sweep_b,
            sweep_rho,
            sweep_p_d,
        } => {
            let spec = SweepSpec {
                base: params.resolve()?,
                b: sweep_b,
                rho: sweep_rho,
                p_d: sweep_p_d,
            };
            run_grid(spec, &exec)
        }
        Command::Snapshot {
            params,
            at,
            out_dir,
            qtables,
            series,
        } => {
            let config = params.resolve()?;
            let config = config.with_seed(derive_seed(config.seed, 0, 0));
            fs::create_dir_all(&out_dir)?;
            let mut failure = None;
            let result = run_observed(&config, |w| {
                if failure.is_some() || !at.contains(&w.clock()) {
                    return;
                }
                let tag = format!("mcs{:06}", w.clock());
                let written = dump_snapshot(w, &out_dir, &tag).and_then(|_| {
                    if qtables {
                        dump_qtables(w, &out_dir.join(format!("{tag}_qtables.txt")))
                    } else {
                        Ok(())
                    }
                });
                if let Err(e) = written {
                    failure = Some(e);
                }
            })?;
            if let Some(e) = failure {
                return Err(e.into());
            }
            if let Some(path) = series {
                save_series(&path, config.action_set, &result.series)?;
            }
            let stats = ReplicaStats::from_summaries(vec![result.summary]);
            let row = SweepRow {
                config: SimConfig {
                    replicas: 1,
                    ..config
                },
                stats,
            };
            write_results(std::io::stdout().lock(), &[row])?;
            Ok(())
        }
    }
}
