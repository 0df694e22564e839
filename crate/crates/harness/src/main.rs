use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;

use rotsec_core::siso::{solve_siso, SisoProblem, DEFAULT_GRID};
use rotsec_harness::baselines::{run_baseline, Baseline};
use rotsec_harness::checks;
use rotsec_harness::config::{ClusterConfig, Config, ScenarioConfig};
use rotsec_harness::output::{write_landscape, write_results, write_summary, write_timing, write_trace};
use rotsec_harness::scenario_gen::make_scenario;
use rotsec_harness::sweep::{run_sweep, summarize};

/// Secrecy-rate optimization for rotatable-antenna wiretap links.
#[derive(Parser, Debug)]
#[command(name = "rotsec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file, or `defaults` for the shipped one.
    #[arg(long, default_value = "defaults")]
    config: PathBuf,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scenario and write its convergence trace to trace.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// One of proposed, rfoa, foa, isotropic, random_orient, discrete.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Run the configured sweep; writes results.csv, summary.csv and timing.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 or unset uses every core.
        #[arg(long, env = "ROTSEC_THREADS")]
        threads: Option<usize>,
    },
    /// Single-antenna solver on the configured geometry; writes landscape.csv.
    Siso {
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in oracle and invariant checks.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> anyhow::Result<Config> {
    let mut cfg = Config::load(&common.config).with_context(|| format!("loading {}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run(common: &Common, baseline: Option<&str>) -> anyhow::Result<()> {
    let cfg = load(common)?;
    let baseline = Baseline::parse(baseline.unwrap_or(&cfg.baseline))?;
    let scenario = make_scenario(&cfg.scenario, cfg.seed)?;
    let outcome = run_baseline(baseline, &scenario, &cfg.solver, cfg.seed)?;
    write_trace(create(&common.out, "trace.csv")?, &outcome.trace)?;
    println!(
        "{}: R_s = {:.6} bits/s/Hz after {} iterations{}",
        baseline.name(),
        outcome.secrecy_rate,
        outcome.iterations,
        if outcome.converged { "" } else { " (iteration cap)" }
    );
    Ok(())
}

fn sweep(common: &Common, threads: Option<usize>) -> anyhow::Result<()> {
    let cfg = load(common)?;
    let threads = threads.filter(|&t| t > 0);
    let rows = run_sweep(&cfg, threads)?;
    let summary = summarize(&rows);
    write_results(create(&common.out, "results.csv")?, &rows)?;
    write_summary(create(&common.out, "summary.csv")?, &summary)?;
    write_timing(create(&common.out, "timing.csv")?, &rows)?;
    for s in &summary {
        println!("{}={} {:<13} mean R_s {:.4} (n={}, errors={})", s.axis.name(), s.value, s.baseline.name(), s.mean, s.count, s.errors);
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    info!("{} cells, {failed} failed", rows.len());
    Ok(())
}

fn siso(common: &Common) -> anyhow::Result<()> {
    let cfg = load(common)?;
    // line-of-sight single-antenna panels on the configured geometry
    let single = ScenarioConfig {
        tx: [1, 1],
        rx: [1, 1],
        eve: [1, 1],
        streams: 1,
        receivers: 1,
        clusters: ClusterConfig { count: 0, ..cfg.scenario.clusters.clone() },
        ..cfg.scenario.clone()
    };
    let scenario = make_scenario(&single, cfg.seed)?;
    let sol = solve_siso(&SisoProblem::from_scenario(&scenario)?, DEFAULT_GRID)?;
    write_landscape(create(&common.out, "landscape.csv")?, &sol.landscape)?;
    match sol.theta {
        Some(theta) => println!("theta = {theta:.6} rad, R_s = {:.6} bits/s/Hz, eavesdropper gain {:.3e}", sol.secrecy_rate, sol.eve_gain),
        None => println!("no planar rotation fits the cap; projected boresight gives R_s = {:.6} bits/s/Hz", sol.secrecy_rate),
    }
    Ok(())
}

fn validate(common: &Common) -> anyhow::Result<()> {
    let cfg = load(common)?;
    let results = checks::all(cfg.seed, &cfg.solver)?;
    for check in &results {
        println!("{}", check.line());
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", results.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run { common, baseline } => run(common, baseline.as_deref()),
        Command::Sweep { common, threads } => sweep(common, *threads),
        Command::Siso { common } => siso(common),
        Command::Validate { common } => validate(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
