use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levelgen_cli::batch::{run_batch, BatchSpec};
use levelgen_cli::config::{run_dir, Overrides};
use levelgen_cli::run::{describe, execute, parse_bin, render_bin};
use levelgen_cli::{CliError, Result};
use levelgen_core::EncodingMode;

#[derive(Parser)]
#[command(name = "levelgen", version, about = "MAP-Elites level generation with CPPN, direct and hybrid encodings")]
struct Cli {
    /// Worker threads for evaluation and batch runs.
    #[arg(long, global = true, env = "LEVELGEN_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One MAP-Elites run.
    Run {
        #[command(flatten)]
        overrides: Overrides,
        /// No progress lines on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Several seeds of one or more modes, with an aggregate report.
    Batch {
        #[command(flatten)]
        overrides: Overrides,
        /// Seeds per mode.
        #[arg(long, short = 'n')]
        runs: usize,
        /// Seeds are first-seed, first-seed + 1, ...
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        /// Comma-separated modes; the config's mode when absent.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
    },
    /// Text render of one elite of a finished run.
    Render {
        run: PathBuf,
        /// Bin coordinates, e.g. `3,0,7`.
        #[arg(long)]
        bin: String,
        /// Write here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summary of a finished run.
    Stats { run: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: config error: worker count must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { overrides, quiet } => {
            let cfg = overrides.resolve()?;
            let dir = run_dir(&cfg);
            let out = execute(&cfg, &dir, |row| {
                if !quiet {
                    eprintln!(
                        "evaluations {:>7}  filled {:>5}  QD {:.3}  cppn {}  direct {}",
                        row.evaluations, row.filled, row.qd_score, row.cppn_elites, row.direct_elites
                    );
                }
            })?;
            println!(
                "{}: {} bins filled, QD score {}",
                dir.display(),
                out.archive.filled(),
                out.archive.qd_score()
            );
            Ok(())
        }
        Command::Batch {
            overrides,
            runs,
            first_seed,
            modes,
        } => {
            if runs == 0 {
                return Err(CliError::Config("--runs must be at least 1".into()));
            }
            let base = overrides.resolve()?;
            let modes = if modes.is_empty() {
                vec![base.mode]
            } else {
                modes
                    .iter()
                    .map(|m| EncodingMode::parse(m).ok_or_else(|| CliError::Config(format!("--modes: unknown mode {m:?}"))))
                    .collect::<Result<Vec<_>>>()?
            };
            let dir = base
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("runs").join(format!("batch-{}", base.scheme)));
            let spec = BatchSpec {
                base,
                modes,
                seeds: (first_seed..first_seed + runs as u64).collect(),
                dir: dir.clone(),
            };
            let report = run_batch(&spec)?;
            report.write(&dir.join("report"))?;
            for (mode, metric, ci) in report.metrics() {
                println!("{mode:<22} {metric:<18} {ci}");
            }
            if report.failures.is_empty() {
                Ok(())
            } else {
                let seeds: Vec<String> = report
                    .failures
                    .iter()
                    .map(|f| format!("{}/{}", f.mode, f.seed))
                    .collect();
                Err(CliError::PartialBatch {
                    failed: report.failures.len(),
                    total: report.failures.len() + report.runs.len(),
                    seeds: seeds.join(", "),
                })
            }
        }
        Command::Render { run, bin, output } => {
            let text = render_bin(&run, &parse_bin(&bin)?)?;
            match output {
                Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Other(e.into()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Stats { run } => {
            print!("{}", describe(&run)?);
            Ok(())
        }
    }
}
