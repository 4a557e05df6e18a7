use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use walsh_cli::rows::write_outputs;
use walsh_cli::{acceptance, experiments, parse_config, registry, CliError};

/// Simulation and numerical analysis of diffusions on star graphs.
#[derive(Parser)]
#[command(name = "walsh", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config file and write its CSV/JSON.
    Run {
        /// Path to `{"experiment": "<id>", "params": { ... }}`; omitted
        /// params take registry defaults.
        config: PathBuf,
        /// Override the master seed (stochastic experiments only).
        #[arg(long)]
        seed: Option<u64>,
        /// Override the path count (stochastic experiments only).
        #[arg(long)]
        n_paths: Option<usize>,
        /// Output directory; falls back to $WALSH_OUT_DIR, then `.`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List registered experiments with their gates.
    List,
    /// Run the full gated acceptance suite.
    Accept {
        /// Output directory; falls back to $WALSH_OUT_DIR, then `.`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

const EXIT_GATE_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_INTERNAL_ERROR: u8 = 3;

fn exit_for(error: &CliError) -> u8 {
    match error {
        CliError::Config(_) => EXIT_CONFIG_ERROR,
        CliError::Internal(_) => EXIT_INTERNAL_ERROR,
    }
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("WALSH_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run_command(config_path: PathBuf, seed: Option<u64>, n_paths: Option<usize>, dir: PathBuf) -> u8 {
    let text = match std::fs::read_to_string(&config_path) {
        Ok(text) => text,
        Err(error) => {
            eprintln!("cannot read config {}: {error}", config_path.display());
            return EXIT_CONFIG_ERROR;
        }
    };
    let mut config = match parse_config(&text) {
        Ok(config) => config,
        Err(error) => {
            eprintln!("{error}");
            return EXIT_CONFIG_ERROR;
        }
    };
    if let Err(error) = config.apply_overrides(seed, n_paths) {
        eprintln!("{error}");
        return exit_for(&error);
    }
    let rows = match experiments::run(&config, &dir) {
        Ok(rows) => rows,
        Err(error) => {
            eprintln!("experiment `{}`: {error}", config.id());
            return exit_for(&error);
        }
    };
    if let Err(error) = write_outputs(&dir, config.id(), &rows) {
        eprintln!("writing outputs for `{}`: {error}", config.id());
        return EXIT_INTERNAL_ERROR;
    }
    println!(
        "wrote {}.csv and {}.json under {}",
        config.id(),
        config.id(),
        dir.display()
    );
    let mut failures = 0usize;
    for row in rows.iter().filter(|r| r.pass.is_some()) {
        let verdict = if row.pass == Some(true) { "pass" } else { "fail" };
        println!("  {:<32} {:>14.6e}  {}", row.metric, row.estimate, verdict);
        if row.pass == Some(false) {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} gate(s) failed");
        EXIT_GATE_FAILURE
    } else {
        println!("all gates passed");
        0
    }
}

fn list_command() -> u8 {
    for entry in registry::ENTRIES {
        println!("{}", entry.id);
        println!("    {}", entry.description);
        println!("    gates: {}", entry.gates);
    }
    0
}

fn accept_command(dir: PathBuf) -> u8 {
    match acceptance::run_all(&dir) {
        Ok(reports) => {
            let mut all = true;
            for report in &reports {
                println!(
                    "criterion {:>2} {:<28} {} — {}",
                    report.index,
                    report.name,
                    if report.passed { "PASS" } else { "FAIL" },
                    report.detail
                );
                all &= report.passed;
            }
            if all {
                println!("acceptance suite: all {} criteria passed", reports.len());
                0
            } else {
                println!("acceptance suite: FAILED");
                EXIT_GATE_FAILURE
            }
        }
        Err(error) => {
            eprintln!("acceptance suite: {error}");
            exit_for(&error)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            seed,
            n_paths,
            out_dir,
        } => run_command(config, seed, n_paths, resolve_out_dir(out_dir)),
        Command::List => list_command(),
        Command::Accept { out_dir } => accept_command(resolve_out_dir(out_dir)),
    };
    ExitCode::from(code)
}
