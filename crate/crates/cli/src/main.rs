//! `blidkit` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod blid;
mod borel;
mod cohomo;
mod extend;
mod output;

use output::{Failure, Outcome, Output};

#[derive(Parser, Debug)]
#[command(name = "blidkit", version, about = "Blid maps, germ extension, Borel jets and cohomological equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Input JSON file.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory for reports and CSV files.
    #[arg(long, global = true, env = "BLIDKIT_OUT", default_value = "blidkit-out")]
    out: PathBuf,
    /// Tolerance override for the subcommand's checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of the ChaCha8 sample generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count override.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Add wall-clock timings to the JSON report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extend local maps to global ones (integral functional on C[0,1], ball example on R^m).
    Extend,
    /// Realize a finite jet by a smooth map and read the jet back.
    Borel,
    /// Cohomological equation g(Ax) - g(x) = f(x).
    #[command(subcommand)]
    Cohomo(CohomoCommand),
    /// Cutoff and blid profiles.
    #[command(subcommand)]
    Blid(BlidCommand),
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum CohomoCommand {
    /// Solve a problem file and check the residual on its box.
    Solve,
    /// List resonance relations lambda^p = 1 up to a degree.
    Resonances,
}

#[derive(Subcommand, Debug)]
enum BlidCommand {
    /// Write the cutoff, its derivatives and the scalar blid as CSV.
    Show,
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let out = Output::new(&cli.common)?;
    let start = std::time::Instant::now();
    let mut outcome = match &cli.command {
        Command::Extend => extend::run(&cli.common, &out)?,
        Command::Borel => borel::run(&cli.common, &out)?,
        Command::Cohomo(CohomoCommand::Solve) => cohomo::solve(&cli.common, &out)?,
        Command::Cohomo(CohomoCommand::Resonances) => cohomo::resonances(&cli.common, &out)?,
        Command::Blid(BlidCommand::Show) => blid::show(&cli.common, &out)?,
        Command::Selftest => {
            let samples = cli.common.samples.unwrap_or(100);
            let report = blidkit::selftest::run(cli.common.seed, samples);
            let passed = report.passed;
            Outcome::new("selftest", serde_json::to_value(&report).map_err(Failure::internal)?, passed)
        }
    };
    if cli.common.timings {
        outcome.set_elapsed(start.elapsed().as_secs_f64());
    }
    out.write_report(&outcome)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", Failure::usage(e.to_string().trim_end()).report());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(failure) => {
            let code = failure.exit_code();
            let report = failure.report();
            eprintln!("{report}");
            if let Ok(out) = Output::new(&cli.common) {
                let _ = out.write_text("error.json", &report);
            }
            ExitCode::from(code)
        }
    }
}
