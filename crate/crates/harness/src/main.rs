use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use blindqc_harness::commands::{
    bound_table_csv, cmd_blindness_check, cmd_bound_table, cmd_i1dc_test, cmd_rbsp_montecarlo, cmd_run_ubqc, to_json,
};
use blindqc_harness::config::{
    self, BlindnessConfig, BoundTableConfig, I1dcConfig, Overrides, RbspMcConfig, RunUbqcConfig,
};
use blindqc_harness::{HarnessResult, Verdict};
use clap::{Args, Parser, Subcommand};

/// Blind quantum computation experiments.
///
/// Exit status: 0 when every verdict passes, 1 on a bound violation, 2 on a
/// usage or configuration error.
#[derive(Parser)]
#[command(name = "blindqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, replacing the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count, replacing the configured one.
    #[arg(long)]
    trials: Option<u64>,
    /// Directory for summary and data files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// End-to-end blind computation runs.
    RunUbqc {
        #[command(flatten)]
        common: Common,
        /// Also sample the unblinded computation and compare output distributions.
        #[arg(long)]
        compare_plain: bool,
    },
    /// Monte Carlo over remote state preparation.
    RbspMc {
        #[command(flatten)]
        common: Common,
    },
    /// Pulse counts and failure bounds over a parameter grid (CSV).
    BoundTable {
        #[command(flatten)]
        common: Common,
    },
    /// Exact joint-state distances and certified epsilon for S <= 2.
    BlindnessCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive and random checks of the interlaced chain.
    I1dcTest {
        #[command(flatten)]
        common: Common,
    },
}

fn overrides(common: &Common, compare_plain: bool) -> Overrides {
    Overrides {
        seed: common.seed,
        trials: common.trials,
        compare_plain,
    }
}

fn run(command: Command) -> HarnessResult<Verdict> {
    match command {
        Command::RunUbqc { common, compare_plain } => {
            let mut c: RunUbqcConfig = config::load(common.config.as_deref())?;
            c.apply(&overrides(&common, compare_plain));
            let report = cmd_run_ubqc(&c, common.out.as_deref())?;
            print!("{}", to_json(&report)?);
            Ok(report.verdict)
        }
        Command::RbspMc { common } => {
            let mut c: RbspMcConfig = config::load(common.config.as_deref())?;
            c.apply(&overrides(&common, false));
            let report = cmd_rbsp_montecarlo(&c, common.out.as_deref())?;
            print!("{}", to_json(&report)?);
            Ok(report.verdict)
        }
        Command::BoundTable { common } => {
            let c: BoundTableConfig = config::load(common.config.as_deref())?;
            let report = cmd_bound_table(&c, common.out.as_deref())?;
            print!("{}", bound_table_csv(&report.rows)?);
            Ok(report.verdict)
        }
        Command::BlindnessCheck { common } => {
            let c: BlindnessConfig = config::load(common.config.as_deref())?;
            let report = cmd_blindness_check(&c, common.out.as_deref())?;
            print!("{}", to_json(&report)?);
            Ok(report.verdict)
        }
        Command::I1dcTest { common } => {
            let mut c: I1dcConfig = config::load(common.config.as_deref())?;
            c.apply(&overrides(&common, false));
            let report = cmd_i1dc_test(&c, common.out.as_deref())?;
            print!("{}", to_json(&report)?);
            Ok(report.verdict)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli.command);
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => {
            eprintln!("verdict: FAIL");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
