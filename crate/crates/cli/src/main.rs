//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid arguments or parameters, 2 on
//! I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use msdpool::distillation::{choose_pool_distance, Mitigation, PipelineConfig, MAGIC_STATE_BUDGET, MSD_ERROR};
use msdpool::distselect::DistSelectParams;
use msdpool::experiments::{self, CellSettings, DistSelectRow, Family, SweepSpec};
use msdpool::randcircuit::RandomCircuitParams;
use msdpool::{config, seed, Error, Result};

#[derive(Parser)]
#[command(
    name = "msdpool",
    version,
    about = "Run-time delay of magic-state distillation failures",
    arg_required_else_help = true
)]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print progress and timings to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected repeat-until-success time, sequential and parallel.
    Analytic {
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 10, 100])]
        n: Vec<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Delay metrics of one random-circuit configuration.
    RandomCircuit(RandomCircuitArgs),
    /// Delay and space metrics of one Dist-SELECT configuration.
    DistSelect(DistSelectArgs),
    /// Extra-delay histogram of the two-level distillation pipeline.
    DistillDist(DistillArgs),
    /// Run a sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Smallest pool code distance meeting the error budget.
    PoolDistance {
        /// Number of magic states.
        #[arg(long = "L")]
        l: u64,
        /// Expected distillation cycles.
        #[arg(long = "E")]
        e: f64,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 1e-3)]
        p_phys: f64,
        #[arg(long, default_value_t = MAGIC_STATE_BUDGET)]
        budget: f64,
        #[arg(long, default_value_t = MSD_ERROR)]
        msd_error: f64,
    },
    /// Space-time frontier of a Dist-SELECT CSV.
    Tradeoff {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomCircuitArgs {
    /// TOML file with the circuit parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    layers: Option<u32>,
    #[arg(long)]
    coupling_distance: Option<u32>,
    #[arg(long)]
    p_fail: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DistSelectArgs {
    /// TOML file with the Dist-SELECT parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    factories: Option<u32>,
    #[arg(long)]
    pool_entries: Option<u32>,
    /// Fixed cadence; by default the best of `D + {0, d/3, 2d/3, d, 2d}`.
    #[arg(long)]
    consumption_period: Option<u64>,
    /// Extra L1 blocks per pipeline instead of a pool.
    #[arg(long)]
    excessive_l1: Option<u32>,
    #[arg(long, default_value_t = 10_000)]
    pipeline_outputs: u64,
    #[arg(long, default_value_t = experiments::DEFAULT_L1_BLOCK_QUBITS)]
    l1_block_qubits: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    trials: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DistillArgs {
    /// TOML file with the pipeline parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// none, racing, or excessive_l1:N
    #[arg(long, value_parser = parse_mitigation)]
    mitigation: Option<Mitigation>,
    #[arg(long, default_value_t = 10_000)]
    outputs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

fn parse_mitigation(s: &str) -> std::result::Result<Mitigation, String> {
    match s {
        "none" => Ok(Mitigation::None),
        "racing" => Ok(Mitigation::Racing),
        _ => s
            .strip_prefix("excessive_l1:")
            .and_then(|n| n.parse().ok())
            .map(Mitigation::ExcessiveL1)
            .ok_or_else(|| format!("expected none, racing or excessive_l1:N, got {s}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let result = run(cli.command);
    if cli.verbose > 0 {
        eprintln!("finished in {:.2?}", start.elapsed());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn emit(out: &Output, csv: &str) -> Result<()> {
    match &out.out {
        Some(path) => experiments::write_file(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn load_or<T: serde::de::DeserializeOwned>(path: Option<&Path>, default: impl FnOnce() -> T) -> Result<T> {
    path.map_or_else(|| Ok(default()), config::load)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Analytic { p, n, out } => {
            let rows = experiments::analytic_table(&n, &[p])?;
            if out.out.is_some() {
                return emit(&out, &experiments::csv_string(&rows));
            }
            println!("{:>6}  {:>12}  {:>12}", "n", "sequential", "parallel");
            for r in rows {
                println!("{:>6}  {:>12.4}  {:>12.4}", r.n, r.sequential, r.parallel);
            }
            Ok(())
        }
        Command::RandomCircuit(a) => {
            let mut params: RandomCircuitParams = load_or(a.config.as_deref(), RandomCircuitParams::default)?;
            params.d = a.d.unwrap_or(params.d);
            params.width = a.width.unwrap_or(params.width);
            params.height = a.height.unwrap_or(params.height);
            params.layers = a.layers.unwrap_or(params.layers);
            params.coupling_distance = a.coupling_distance.unwrap_or(params.coupling_distance);
            params.p_fail = a.p_fail.unwrap_or(params.p_fail);
            params.seed = a.seed.unwrap_or(params.seed);
            let row = experiments::random_circuit_row(&params, a.trials)?;
            emit(&a.out, &experiments::csv_string(&[row]))
        }
        Command::DistSelect(a) => {
            let mut params: DistSelectParams = load_or(a.config.as_deref(), || DistSelectParams::desk(16))?;
            params.num_factories = a.factories.unwrap_or(params.num_factories);
            params.validate()?;
            let candidates = match a.consumption_period {
                Some(cp) => vec![cp],
                None => experiments::consumption_period_candidates(params.distillation_period, params.d),
            };
            let family = Family {
                pool_entries: if a.excessive_l1.is_some() {
                    0
                } else {
                    a.pool_entries.unwrap_or(params.pool_entries)
                },
                excessive_l1: a.excessive_l1,
            };
            let settings = CellSettings {
                candidates,
                pipeline: PipelineConfig::default(),
                pipeline_outputs: a.pipeline_outputs,
                dist_seed: seed::mix(a.seed, seed::DISTRIBUTION_STREAM),
                l1_block_qubits: a.l1_block_qubits,
                trials: a.trials,
            };
            let row = experiments::best_dist_select_row(&params, family, &settings, seed::mix_path(a.seed, &[0]))?;
            emit(&a.out, &experiments::csv_string(&[row]))
        }
        Command::DistillDist(a) => {
            let mut pipeline: PipelineConfig = load_or(a.config.as_deref(), PipelineConfig::default)?;
            pipeline.mitigation = a.mitigation.unwrap_or(pipeline.mitigation);
            let rows = experiments::distill_hist(&pipeline, a.outputs, a.seed)?;
            emit(&a.out, &experiments::csv_string(&rows))
        }
        Command::Sweep {
            config: path,
            seed,
            trials,
            out,
        } => {
            let mut spec = SweepSpec::load(&path)?;
            if let Some(s) = seed {
                spec.set_seed(s);
            }
            if let Some(t) = trials {
                spec.set_trials(t);
            }
            if let Some(o) = out.out {
                spec.set_output(o);
            }
            let csv = experiments::run_sweep(&spec)?.to_csv();
            match spec.output() {
                Some(p) => experiments::write_file(p, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::PoolDistance {
            l,
            e,
            d,
            p_phys,
            budget,
            msd_error,
        } => {
            println!("{}", choose_pool_distance(l, e, d, p_phys, budget, msd_error)?);
            Ok(())
        }
        Command::Tradeoff { input, out } => {
            let rows: Vec<DistSelectRow> = experiments::read_csv(&input)?;
            if rows.is_empty() {
                return Err(Error::InvalidParameter(format!("{}: no rows", input.display())));
            }
            emit(&out, &experiments::csv_string(&experiments::tradeoff_table(&rows)))
        }
        Command::Version => {
            println!("msdpool {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}
