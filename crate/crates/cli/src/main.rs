//! `memaudit` command-line runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod plot;
mod run;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::json;

use error::CliError;
use run::RunOptions;
use spec::{Kind, CONFIG_KEYS};

#[derive(Parser, Debug)]
#[command(
    name = "memaudit",
    version,
    about = "Run thermal-noise circuit experiments on memristor models and audit them for passivity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment spec and write <out>/<name>.json plus <name>.meta.json.
    Run {
        spec: PathBuf,
        /// Comma-separated seeds, replacing the spec's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Worker threads (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Turn a directory of result files into CSV tables for plotting.
    Plot {
        result_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a spec without running it.
    Validate { spec: PathBuf },
}

fn reference_text() -> String {
    let mut text = String::from("Experiment kinds:\n");
    for kind in Kind::ALL {
        let what = match kind {
            Kind::Exchange => "net noise power flow between two branches (branch_a, branch_b, sweep_t_a)",
            Kind::Rectify => "rectifier cell DC output (memristor, shunt, capacitor, topology, oversample)",
            Kind::Cascade => "N series rectifier stages (as rectify, plus n_stages)",
            Kind::Passivity => "Second-Law passivity verdict for a device (device, t_bath, threshold; >= 3 seeds)",
            Kind::FdtCheck => "open-circuit noise spectrum against 4kTR (device)",
            Kind::IdealDrive => "memristor under an ideal Gaussian current drive (memristor, drive)",
        };
        text.push_str(&format!("  {:<12} {what}\n", kind.name()));
    }
    text.push_str("\nConfig keys (TOML, or JSON for .json files):\n");
    for (key, what) in CONFIG_KEYS {
        text.push_str(&format!("  {key:<28} {what}\n"));
    }
    text.push_str("\nExit codes: 0 success, 1 runtime failure, 2 parse error, 3 validation error.\n");
    text
}

fn dispatch(command: Command) -> Result<serde_json::Value, CliError> {
    match command {
        Command::Run {
            spec,
            seeds,
            workers,
            out,
        } => {
            let path = run::run(&spec, &RunOptions { seeds, workers, out })?;
            Ok(json!({ "result": path }))
        }
        Command::Plot { result_dir, out } => {
            let files = plot::plot(&result_dir, &out)?;
            Ok(json!({ "written": files }))
        }
        Command::Validate { spec } => {
            let mut parsed = spec::load(&spec)?;
            spec::resolve_seeds(&mut parsed, None)?;
            parsed.plan()?;
            Ok(json!({
                "valid": true,
                "kind": parsed.kind,
                "name": parsed.name,
                "seeds": parsed.seeds.len(),
                "config_hash": run::config_hash(&parsed),
            }))
        }
    }
}

fn main() -> ExitCode {
    let reference = reference_text();
    let command = Cli::command()
        .after_help(reference.clone())
        .mut_subcommand("run", |c| c.after_help(reference.clone()))
        .mut_subcommand("validate", |c| c.after_help(reference.clone()));
    let cli = match Cli::from_arg_matches(&command.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli.command) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
