use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ucme_core::engine::{DasMethod, SessionConfig};
use ucme_core::floorplan::{DesignSpec, DomainConfig, FloorplanDomain};
use ucme_core::metrics::{
    comparison_user, compare, read_jsonl, run_experiment, write_csv, write_jsonl, ArchiveDump, Driver,
    ExperimentConfig, Metric, RunLog,
};
use ucme_core::UserId;

const RUNS_FILE: &str = "runs.jsonl";

#[derive(Parser)]
#[command(name = "ucme", version, about = "User-controlled MAP-Elites for apartment layouts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted experiment and write its run logs.
    Run(RunArgs),
    /// Compare two experiments metric by metric.
    Compare(CompareArgs),
    /// Serve interactive sessions over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Design spec in JSON; the bundled apartment when omitted.
    #[arg(long)]
    ds: Option<PathBuf>,
    /// Driving user (U1 to U12) or `baseline`.
    #[arg(long)]
    user: Driver,
    #[arg(long, default_value = "corners")]
    das: DasMethod,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 10)]
    selections: usize,
    /// Evaluations between two selections.
    #[arg(long, default_value_t = 10_000)]
    evals: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000)]
    snapshot_every: u64,
    /// Further users whose preference metrics are recorded.
    #[arg(long, value_delimiter = ',')]
    observe: Vec<UserId>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CompareArgs {
    /// Experiment directory written by `run`.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Metrics to compare; every applicable metric when omitted.
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<Metric>,
    /// User scoring the preference metrics; defaults to the driving user.
    #[arg(long)]
    user: Option<UserId>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Tests sharing the Bonferroni correction.
    #[arg(long, default_value_t = 1)]
    comparisons: usize,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare_dirs(args),
        Command::Serve { port, host } => serve(SocketAddr::new(host, port)),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let spec = match &args.ds {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            DesignSpec::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => DesignSpec::apartment(),
    };
    let config = ExperimentConfig {
        driver: args.user,
        das: args.das,
        runs: args.runs,
        selections: args.selections,
        session: SessionConfig { evals_per_selection: args.evals, seed: args.seed, ..SessionConfig::default() },
        snapshot_every: args.snapshot_every,
        observed_users: args.observe,
    };
    let domain = Arc::new(FloorplanDomain::new(spec, DomainConfig::default()));
    let logs = run_experiment(domain, &config)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_jsonl(&args.out.join(RUNS_FILE), &logs)?;
    for log in &logs {
        write_heatmap(&args.out.join(format!("heatmap_run{}.csv", log.run)), &log.feasible)?;
    }
    eprintln!("wrote {} runs to {}", logs.len(), args.out.display());
    Ok(())
}

/// Fitness of the final feasible archive, one CSV row per archive row; empty
/// fields are unoccupied cells.
fn write_heatmap(path: &Path, dump: &ArchiveDump) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut rows = vec![vec![String::new(); dump.resolution]; dump.resolution];
    for c in &dump.cells {
        rows[c.cell.row][c.cell.col] = c.fitness.to_string();
    }
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn load(dir: &Path) -> Result<Vec<RunLog>> {
    let path = dir.join(RUNS_FILE);
    let logs = read_jsonl(&path).with_context(|| format!("reading {}", path.display()))?;
    if logs.is_empty() {
        bail!("{} holds no runs", path.display());
    }
    Ok(logs)
}

fn compare_dirs(args: CompareArgs) -> Result<()> {
    let a = load(&args.a)?;
    let b = load(&args.b)?;
    let user = comparison_user(&a, &b, args.user);
    let metrics = if args.metrics.is_empty() {
        let selections = a.iter().chain(&b).all(|log| !log.selections.is_empty());
        Metric::ALL
            .into_iter()
            .filter(|m| user.is_some() || !m.needs_user())
            .filter(|m| m.is_series() || selections)
            .collect()
    } else {
        args.metrics
    };
    let rows = compare(&a, &b, &metrics, user, args.alpha, args.comparisons)?;
    match args.out {
        Some(path) => write_csv(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?, &rows)?,
        None => write_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn serve(addr: SocketAddr) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(ucme_service::serve(addr))?;
    Ok(())
}
