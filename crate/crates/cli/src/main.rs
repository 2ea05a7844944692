//! Command-line front end: plan, simulate, sweep, and gen-dataset.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 runtime/simulation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xfertune::config::Config;
use xfertune::dataset::{scan_directory, Dataset};
use xfertune::harness::{run_experiment_on, DatasetSpec};
use xfertune::sched::{allocate_mc, allocate_promc, plan_sc, Algorithm};
use xfertune::sim::run_simulation;
use xfertune::units::{format_bytes, format_bytes_approx, parse_bytes};
use xfertune::{Error, partition_files};

mod sweep_spec;

#[derive(Parser)]
#[command(name = "xfertune", version, about = "Tune and simulate wide-area transfer schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Sc,
    Mc,
    Promc,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Sc => Algorithm::Sc,
            AlgoArg::Mc => Algorithm::Mc,
            AlgoArg::Promc => Algorithm::ProMc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct TuningArgs {
    /// Network/scheduler config file (TOML)
    #[arg(long)]
    profile: PathBuf,
    /// Scheduling algorithm override
    #[arg(long)]
    algo: Option<AlgoArg>,
    /// Number of chunks to create (1-4)
    #[arg(long)]
    chunks: Option<u32>,
    /// Channel budget override
    #[arg(long)]
    max_cc: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Show the chunking, per-chunk parameters, and initial allocations
    Plan {
        /// Manifest JSON file or a directory to scan
        manifest: PathBuf,
        #[command(flatten)]
        tuning: TuningArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run one simulated transfer and write report.json + samples.csv
    Simulate {
        /// Manifest JSON file or a directory to scan
        manifest: PathBuf,
        #[command(flatten)]
        tuning: TuningArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment matrix from a spec file; write sweep.csv + sweep.json
    Sweep {
        /// Experiment spec (TOML)
        spec: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset manifest
    GenDataset {
        /// Generator kind (mixed, small-dominated, uniform); or use --spec
        #[arg(long)]
        generator: Option<String>,
        /// Dataset spec file (TOML) for bucketed or scripted generation
        #[arg(long)]
        spec: Option<PathBuf>,
        /// PRNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Byte target, e.g. "8 GB"
        #[arg(long)]
        total_size: Option<String>,
        /// File size for the uniform generator, e.g. "1 MB"
        #[arg(long)]
        file_size: Option<String>,
        /// Output directory (manifest.json is written inside)
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let runtime = e.downcast_ref::<Error>().is_some_and(|err| matches!(err, Error::Simulation(_)))
                || e.is::<SweepFailed>();
            ExitCode::from(if runtime { 2 } else { 1 })
        }
    }
}

#[derive(Debug)]
struct SweepFailed(usize);

impl std::fmt::Display for SweepFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} sweep run(s) failed; see the error column in sweep.csv", self.0)
    }
}

impl std::error::Error for SweepFailed {}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Plan { manifest, tuning, format } => cmd_plan(&manifest, &tuning, format),
        Command::Simulate { manifest, tuning, out } => cmd_simulate(&manifest, &tuning, &out),
        Command::Sweep { spec, out } => cmd_sweep(&spec, &out),
        Command::GenDataset { generator, spec, seed, total_size, file_size, out } => {
            cmd_gen_dataset(generator, spec, seed, total_size, file_size, &out)
        }
    }
}

fn load_config(tuning: &TuningArgs) -> anyhow::Result<Config> {
    let config = Config::load(&tuning.profile)?;
    Ok(config.with_overrides(
        tuning.algo.map(Into::into),
        tuning.chunks,
        tuning.max_cc,
    )?)
}

fn load_dataset(path: &Path) -> anyhow::Result<Dataset> {
    if path.is_dir() {
        let (ds, skipped) = scan_directory(path)?;
        if skipped > 0 {
            eprintln!("warning: skipped {skipped} unreadable or empty entries");
        }
        Ok(ds)
    } else {
        Ok(Dataset::load(path)?)
    }
}

fn cmd_plan(manifest: &Path, tuning: &TuningArgs, format: Format) -> anyhow::Result<()> {
    let config = load_config(tuning)?;
    let dataset = load_dataset(manifest)?;
    let chunks = partition_files(&dataset, &config.profile, config.scheduler.k_chunks)?;
    let planned = plan_sc(chunks.clone(), &config.profile.with_max_cc(config.scheduler.max_cc)?)?;

    let mc = allocate_mc(&chunks, config.scheduler.max_cc);
    let promc = allocate_promc(&chunks, config.scheduler.max_cc, &config.scheduler.delta);

    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "dataset": dataset.name,
                "profile": config.profile.name(),
                "bdp_bytes": config.profile.bdp(),
                "k_chunks": config.scheduler.k_chunks,
                "max_cc": config.scheduler.max_cc,
                "chunks": planned,
                "allocations": {
                    "sc_phase_order": planned.iter().map(|c| c.chunk_type).collect::<Vec<_>>(),
                    "mc": mc,
                    "promc": promc,
                },
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Csv => {
            println!("chunk,files,total_bytes,avg_bytes,pipelining,parallelism,concurrency,mc_channels,promc_channels");
            for c in &planned {
                let p = c.params.expect("planned chunks carry params");
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    c.chunk_type,
                    c.file_count(),
                    c.total_size,
                    c.avg_file_size,
                    p.pipelining,
                    p.parallelism,
                    p.concurrency,
                    mc.get(c.chunk_type),
                    promc.get(c.chunk_type)
                );
            }
        }
        Format::Table => {
            println!(
                "dataset {} on {} (BDP {}, max_cc {})",
                dataset.name,
                config.profile.name(),
                format_bytes(config.profile.bdp()),
                config.scheduler.max_cc
            );
            println!(
                "{:<8} {:>6} {:>12} {:>12} {:>11} {:>12} {:>12}",
                "chunk", "files", "total", "avg", "pipelining", "parallelism", "concurrency"
            );
            for c in &planned {
                let p = c.params.expect("planned chunks carry params");
                println!(
                    "{:<8} {:>6} {:>12} {:>12} {:>11} {:>12} {:>12}",
                    c.chunk_type.to_string(),
                    c.file_count(),
                    format_bytes_approx(c.total_size),
                    format_bytes_approx(c.avg_file_size.round() as u64),
                    p.pipelining,
                    p.parallelism,
                    p.concurrency
                );
            }
            let show = |name: &str, alloc: &xfertune::ChannelAllocation| {
                let parts: Vec<String> = chunks
                    .iter()
                    .map(|c| format!("{} {}", c.chunk_type, alloc.get(c.chunk_type)))
                    .collect();
                println!("{name} initial allocation: {}", parts.join(", "));
            };
            show("mc", &mc);
            show("promc", &promc);
        }
    }
    Ok(())
}

fn cmd_simulate(manifest: &Path, tuning: &TuningArgs, out: &Path) -> anyhow::Result<()> {
    let config = load_config(tuning)?;
    let dataset = load_dataset(manifest)?;
    let report = run_simulation(&dataset, &config.profile, &config.scheduler, &config.model)?;

    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), report.to_json())?;
    std::fs::write(out.join("samples.csv"), report.samples_csv())?;
    println!(
        "{} files, {} in {:.3} s -> {}/s ({})",
        report.file_count,
        format_bytes_approx(report.total_bytes),
        report.total_time,
        format_bytes_approx(report.aggregate_throughput.round() as u64),
        report.algorithm,
    );
    Ok(())
}

fn cmd_sweep(spec_path: &Path, out: &Path) -> anyhow::Result<()> {
    let spec_text = std::fs::read_to_string(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let (dataset, spec) = sweep_spec::resolve(&spec_text, base)?;

    let report = run_experiment_on(&dataset, &spec)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("sweep.csv"), report.to_csv())?;

    let envelope = serde_json::json!({
        "dataset": {
            "name": dataset.name,
            "files": dataset.len(),
            "total_bytes": dataset.total_size(),
            "seed": dataset.seed,
            "generator": dataset.generator,
        },
        "spec": spec,
        "rows": report.rows,
    });
    std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&envelope)?)?;

    for row in &report.rows {
        if let Some(err) = &row.error {
            eprintln!(
                "failed: {} k={} max_cc={}: {err}",
                row.factors.algorithm, row.factors.k, row.factors.max_cc
            );
        }
    }
    println!("{} runs -> {}", report.rows.len(), out.join("sweep.csv").display());
    let failed = report.failed();
    if failed > 0 {
        return Err(SweepFailed(failed).into());
    }
    Ok(())
}

fn cmd_gen_dataset(
    generator: Option<String>,
    spec: Option<PathBuf>,
    seed: u64,
    total_size: Option<String>,
    file_size: Option<String>,
    out: &Path,
) -> anyhow::Result<()> {
    let ds_spec = match (generator, spec) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(&path)?;
            sweep_spec::dataset_spec_from_toml(&text)?
        }
        (Some(kind), None) => {
            let total = total_size
                .ok_or_else(|| Error::Config("--total-size is required with --generator".into()))?;
            let total = parse_bytes(&total)?;
            match kind.as_str() {
                "mixed" => DatasetSpec::Mixed { seed, total_size: total },
                "small-dominated" | "small_dominated" => {
                    DatasetSpec::SmallDominated { seed, total_size: total }
                }
                "uniform" => {
                    let size = file_size.ok_or_else(|| {
                        Error::Config("--file-size is required for the uniform generator".into())
                    })?;
                    DatasetSpec::Uniform { seed, total_size: total, size: parse_bytes(&size)? }
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown generator {other:?} (use mixed, small-dominated, uniform, or --spec)"
                    ))
                    .into())
                }
            }
        }
        (None, None) => {
            return Err(Error::Config("give either --generator or --spec".into()).into())
        }
    };

    let dataset = xfertune::generate_dataset(&ds_spec)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("manifest.json");
    std::fs::write(&path, dataset.to_json())?;
    println!(
        "{} files, {} -> {}",
        dataset.len(),
        format_bytes_approx(dataset.total_size()),
        path.display()
    );
    Ok(())
}
