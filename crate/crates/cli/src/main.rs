use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use vofsde::experiment::{check_suite, list_presets, resolve_out_dir, run_experiment, ExperimentConfig, OUT_DIR_ENV};

/// Batch runner for variable-order fractional SDE experiments.
#[derive(Debug, Parser)]
#[command(name = "vofsde", version, arg_required_else_help = true)]
struct Cli {
    /// Run the built-in acceptance configs and report pass/fail for each.
    #[arg(long)]
    check: bool,

    /// Output directory (default: the config's output.dir, then $VOFSDE_OUT_DIR, then ./vofsde-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the master seed of the config(s).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for Monte Carlo studies (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the study described by a JSON config.
    Run { config: PathBuf },
    /// Print the coefficient presets with their parameters and assumption claims.
    ListPresets,
}

fn print_checks(report: &vofsde::experiment::RunReport) {
    for c in &report.checks {
        println!("  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn run_one(path: &PathBuf, cli: &Cli) -> Result<bool> {
    let mut config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    let dir = resolve_out_dir(cli.out.as_deref(), &config);
    let report = run_experiment(&config, &dir)?;
    println!(
        "{} ({}) in {:.2}s",
        config.study.name(),
        config.name,
        report.wall_time_s
    );
    print_checks(&report);
    println!("report: {}", dir.join("report.json").display());
    Ok(report.passed)
}

fn run_checks(cli: &Cli) -> Result<bool> {
    let root = match &cli.out {
        Some(d) => d.clone(),
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(vofsde::experiment::FALLBACK_OUT_DIR),
        },
    }
    .join("check");
    let mut all = true;
    for (name, mut config) in check_suite()? {
        if let Some(seed) = cli.seed {
            config.master_seed = seed;
        }
        let clock = Instant::now();
        let report = run_experiment(&config, &root.join(name)).with_context(|| format!("check config {name}"))?;
        println!(
            "{} {name} ({:.2}s)",
            if report.passed { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64()
        );
        if !report.passed {
            print_checks(&report);
        }
        all &= report.passed;
    }
    println!("outputs: {}", root.display());
    Ok(all)
}

fn real_main(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match (&cli.command, cli.check) {
        (Some(_), true) => bail!("--check cannot be combined with a subcommand"),
        (None, true) => run_checks(&cli),
        (Some(Command::ListPresets), false) => {
            print!("{}", list_presets());
            Ok(true)
        }
        (Some(Command::Run { config }), false) => run_one(config, &cli),
        (None, false) => bail!("nothing to do; see --help"),
    }
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
