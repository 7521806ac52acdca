//! `doakit` — scenario-driven DOA estimation harness.
//!
//! Exit codes: 0 success, 1 configuration error, 2 estimation failed in
//! every trial, 3 I/O error.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use doakit_cli::runner::{self, compare_estimators, run_experiment};
use doakit_cli::{parse_config, ExperimentConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 1;
const EXIT_ESTIMATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "doakit",
    version,
    about = "Direction-of-arrival estimation experiments on uniform linear arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the experiment configuration (TOML).
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Override the configured trial count.
    #[arg(long)]
    trials: Option<u32>,
    /// Override the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment: summary JSON, per-trial JSONL, first-trial
    /// spectrum CSVs.
    Run(CommonArgs),
    /// Run the experiment and print an estimator comparison table.
    Compare(CommonArgs),
    /// Emit only the first-trial spectrum CSVs.
    Spectrum(CommonArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => run_command(&args, Mode::Run),
        Command::Compare(args) => run_command(&args, Mode::Compare),
        Command::Spectrum(args) => run_command(&args, Mode::Spectrum),
    }
}

enum Mode {
    Run,
    Compare,
    Spectrum,
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, ExitCode> {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return Err(ExitCode::from(EXIT_IO));
        }
    };
    let mut config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return Err(ExitCode::from(EXIT_CONFIG));
        }
    };
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {}: {e}", args.config.display());
        return Err(ExitCode::from(EXIT_CONFIG));
    }
    Ok(config)
}

fn run_command(args: &CommonArgs, mode: Mode) -> ExitCode {
    let mut config = match load_config(args) {
        Ok(config) => config,
        Err(code) => return code,
    };
    if matches!(mode, Mode::Spectrum) {
        // Spectrum emits only the first trial's traces.
        config.trials = 1;
    }
    if matches!(mode, Mode::Compare) && config.estimators.len() < 2 {
        eprintln!("error: compare requires at least two estimators");
        return ExitCode::from(EXIT_CONFIG);
    }

    let dir = config.output_dir.clone();
    let (output, table) = match mode {
        Mode::Compare => match compare_estimators(&config) {
            Ok((output, table)) => (output, Some(table)),
            Err(e) => return report_run_error(e),
        },
        _ => match run_experiment(&config) {
            Ok(output) => (output, None),
            Err(e) => return report_run_error(e),
        },
    };

    let written = match mode {
        Mode::Spectrum => runner::write_spectra(&output, &dir),
        _ => runner::write_outputs(&output, &dir),
    };
    if let Err(e) = written {
        eprintln!("error: writing outputs under {}: {e}", dir.display());
        return ExitCode::from(EXIT_IO);
    }
    if let Some(table) = &table {
        print!("{table}");
        if let Err(e) = std::fs::write(dir.join("comparison.txt"), table.to_string()) {
            eprintln!("error: writing {}: {e}", dir.join("comparison.txt").display());
            return ExitCode::from(EXIT_IO);
        }
    }
    print_outcome(&output, &dir, &mode);

    if output.all_estimation_failed() {
        eprintln!("error: every estimator failed in every trial");
        return ExitCode::from(EXIT_ESTIMATION);
    }
    ExitCode::SUCCESS
}

fn report_run_error(e: runner::RunError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        runner::RunError::Config(_) => ExitCode::from(EXIT_CONFIG),
        runner::RunError::Estimation(_) => ExitCode::from(EXIT_ESTIMATION),
    }
}

fn print_outcome(output: &runner::RunOutput, dir: &Path, mode: &Mode) {
    match mode {
        Mode::Spectrum => {
            for export in &output.spectra {
                println!(
                    "wrote {}",
                    dir.join(format!("spectrum_{}.csv", export.label)).display()
                );
            }
        }
        _ => {
            println!(
                "{} trial(s) complete; outputs in {}",
                output.trials.len(),
                dir.display()
            );
            for (label, summary) in &output.summary.per_estimator {
                let rmse = if summary.rmse_deg.is_empty() {
                    "-".to_string()
                } else {
                    summary
                        .rmse_deg
                        .iter()
                        .map(|r| format!("{r:.4}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                println!(
                    "  {label}: rmse_deg [{rmse}] detection_rate {:.3}",
                    summary.detection_rate
                );
            }
        }
    }
}
