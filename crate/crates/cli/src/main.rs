//! `semisup`: validate, run and sweep experiment configs; inspect the graph
//! cache.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use semisup_core::{
    cache_gc, cache_ls, grid_sweep, load_config, run_experiment, validate, ExperimentConfig, RunOptions,
};

#[derive(Parser)]
#[command(name = "semisup", version, about = "Config-driven semi-supervised classification")]
struct Cli {
    /// Directory that receives `<fingerprint>/` run directories.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Graph cache root.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Overrides the config's seed before fingerprinting.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    log_level: LogLevel,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
}

impl LogLevel {
    fn filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Checks a config; exits 1 and lists every problem if it is invalid.
    Validate {
        config: PathBuf,
        /// Also print the canonical bytes the fingerprint hashes.
        #[arg(long)]
        canonical: bool,
    },
    /// Runs one experiment.
    Run { config: PathBuf },
    /// Runs the config's grid sweep.
    Sweep { config: PathBuf },
    /// Graph cache maintenance.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Lists cached graphs.
    Ls { dir: PathBuf },
    /// Removes unreadable entries (all entries with `--all`).
    Gc {
        dir: PathBuf,
        #[arg(long)]
        all: bool,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn print_report(out: &mut impl Write, report: &semisup_core::metrics::MetricsReport) -> io::Result<()> {
    for (split, scores) in &report.splits {
        for (metric, v) in scores {
            writeln!(out, "  {split}.{metric} = {v:.6}")?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let opts = RunOptions {
        run_dir: cli.out_dir.clone(),
        cache_dir: cli.cache_dir.clone(),
        threads: cli.threads.map(usize::from),
    };
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Validate { config, canonical } => {
            let cfg = load(&config, cli.seed)?;
            let issues = validate(&cfg);
            if !issues.is_empty() {
                for i in &issues {
                    eprintln!("error: {i}");
                }
                return Ok(ExitCode::from(1));
            }
            if canonical {
                writeln!(out, "{}", String::from_utf8_lossy(&cfg.canonicalize()))?;
            }
            writeln!(out, "ok {}", cfg.fingerprint())?;
        }
        Command::Run { config } => {
            let cfg = load(&config, cli.seed)?;
            let a = run_experiment(&cfg, &opts)?;
            writeln!(out, "run {} -> {}", a.fingerprint, a.dir.display())?;
            print_report(&mut out, &a.report)?;
        }
        Command::Sweep { config } => {
            let cfg = load(&config, cli.seed)?;
            let s = grid_sweep(&cfg, &opts)?;
            writeln!(
                out,
                "sweep {} -> {} ({} trials)",
                s.fingerprint,
                s.dir.display(),
                s.trials.len()
            )?;
            let best = &s.trials[s.best_index];
            let desc: Vec<String> = best.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(
                out,
                "best trial {} ({}): {}",
                s.best_index,
                best.fingerprint,
                desc.join(", ")
            )?;
            print_report(&mut out, &s.best.report)?;
        }
        Command::Cache { action } => match action {
            CacheAction::Ls { dir } => {
                for e in cache_ls(&dir).with_context(|| format!("listing {}", dir.display()))? {
                    match e.status {
                        Ok((n, nnz)) => writeln!(out, "{}  n={n} nnz={nnz} bytes={}", e.key, e.bytes)?,
                        Err(why) => writeln!(out, "{}  unreadable ({why}) bytes={}", e.key, e.bytes)?,
                    }
                }
            }
            CacheAction::Gc { dir, all } => {
                let removed = cache_gc(&dir, all)?;
                for p in &removed {
                    writeln!(out, "removed {}", p.display())?;
                }
                writeln!(out, "{} entries removed", removed.len())?;
            }
        },
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Usage errors exit 2 via clap.
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level.filter())
        .format_target(false)
        .init();
    match execute(cli) {
        Ok(code) => code,
        // A closed pipe (`semisup validate --canonical | head`) is not a failure.
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
