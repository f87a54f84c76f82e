//! Experiment runner for the hadamard library.
//!
//! `hadamard run --config cfg.json [--suite name] [--seed n] [--out dir]`
//! executes one named verification suite and writes CSV artifacts plus a
//! JSON summary; `hadamard list` prints the suites and the statements they
//! verify. Exit codes: 0 all cases passed, 1 a case exceeded its bound,
//! 2 usage error, 3 I/O error.

mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, ReportSummary};
use suites::{run_suite, SUITES};

#[derive(Parser)]
#[command(name = "hadamard", version, about = "Run verification suites of the hadamard library")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite described by a JSON config.
    Run {
        /// Path to the experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Suite name, overriding the config.
        #[arg(long)]
        suite: Option<String>,
        /// Seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding config and HADAMARD_OUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the suites and what they verify.
    List,
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (name, description) in SUITES {
                // A closed pipe (e.g. `| head`) is not an error here.
                if writeln!(lock, "{name:<16} {description}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            suite,
            seed,
            out,
        } => match run(config, suite, seed, out) {
            Ok(pass) => {
                if pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_VIOLATION)
                }
            }
            Err(e) => {
                eprintln!("error: {}", e.message);
                ExitCode::from(e.code)
            }
        },
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_IO,
        message: message.into(),
    }
}

fn run(
    config_path: PathBuf,
    suite_arg: Option<String>,
    seed_arg: Option<u64>,
    out_arg: Option<PathBuf>,
) -> Result<bool, CliError> {
    let raw = std::fs::read_to_string(&config_path)
        .map_err(|e| io(format!("cannot read {}: {e}", config_path.display())))?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&raw).map_err(|e| usage(format!("malformed config: {e}")))?;
    if let Some(seed) = seed_arg {
        cfg.seed = seed;
    }

    let suite_name = suite_arg
        .or_else(|| cfg.suite.clone())
        .ok_or_else(|| usage("no suite selected: pass --suite or set \"suite\" in the config"))?;

    let out_dir = out_arg
        .or_else(|| std::env::var_os("HADAMARD_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("reports"));

    let started = Instant::now();
    let outcome = run_suite(&suite_name, &cfg).map_err(|e| match e {
        hadamard::Error::Serialization(msg) => io(msg),
        other => usage(other.to_string()),
    })?;
    let wall_time_s = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| io(format!("cannot create {}: {e}", out_dir.display())))?;
    for (stem, table) in &outcome.tables {
        let path = out_dir.join(format!("{stem}.csv"));
        table
            .write_to(&path)
            .map_err(|e| io(format!("cannot write {}: {e}", path.display())))?;
    }

    let summary = ReportSummary {
        suite: outcome.name.to_string(),
        cases: outcome.cases,
        max_violation: outcome.max_violation,
        pass: outcome.pass,
        wall_time_s,
    };
    let summary_path = out_dir.join(format!("{}-summary.json", outcome.name));
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| io(format!("cannot write {}: {e}", summary_path.display())))?;

    println!(
        "suite={} cases={} max_violation={:.3e} pass={} wall_time_s={:.3}",
        summary.suite, summary.cases, summary.max_violation, summary.pass, summary.wall_time_s
    );
    Ok(summary.pass)
}
