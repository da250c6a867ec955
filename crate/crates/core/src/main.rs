use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use coptw::bench::{
    cmd_augment, cmd_bench, cmd_oracle, cmd_solve, cmd_verify, AugmentArgs, BenchArgs, CliError,
    OracleArgs, SolveArgs, VerifyArgs,
};
use coptw::instance::Layout;
use coptw::{BoundMode, DistanceConvention};

#[derive(Parser)]
#[command(
    name = "coptw",
    version,
    about = "Cooperative orienteering with time windows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Solomon,
    Cordeau,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    /// Full double-precision Euclidean distances.
    Exact,
    /// Euclidean distances truncated to one decimal.
    Truncated,
}

impl From<DistanceArg> for DistanceConvention {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Exact => DistanceConvention::Exact,
            DistanceArg::Truncated => DistanceConvention::TruncateOneDecimal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArg {
    RewardSum,
    Reachability,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a benchmark file into a cooperative instance.
    Augment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Requirements are drawn uniformly from 1..=r-max.
        #[arg(long, default_value_t = 3)]
        r_max: usize,
        /// Keep only the first N customers.
        #[arg(short = 'n', long)]
        customers: Option<usize>,
        #[arg(short = 'p', long, default_value_t = 3)]
        members: usize,
        #[arg(long, default_value_t = 1.0)]
        velocity: f64,
        /// Benchmark layout; guessed from the file name by default.
        #[arg(long, value_enum)]
        layout: Option<LayoutArg>,
    },
    /// Solve an instance with the savings heuristic.
    Solve {
        instance: PathBuf,
        /// Write the solution here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "exact")]
        distances: DistanceArg,
        /// Evaluate the weight grid on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Check a solution against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        distances: DistanceArg,
    },
    /// Solve a small instance exactly.
    Oracle {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long, value_enum, default_value = "reachability")]
        bound: BoundArg,
        #[arg(long, value_enum, default_value = "exact")]
        distances: DistanceArg,
    },
    /// Heuristic against exact search over a directory of benchmark files.
    Bench {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Customer counts, comma separated; full files when omitted.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Team sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        members: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        r_max: usize,
        /// Exact search limit per instance, seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Exact search node limit per instance; makes results independent
        /// of machine speed.
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long, value_enum, default_value = "exact")]
        distances: DistanceArg,
        /// Run everything on one thread.
        #[arg(long)]
        serial: bool,
        /// Leave the time columns empty.
        #[arg(long)]
        omit_times: bool,
    },
}

fn seconds(s: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s).map_err(|_| CliError::Input(format!("invalid time limit {s}")))
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Augment {
            input,
            output,
            seed,
            r_max,
            customers,
            members,
            velocity,
            layout,
        } => cmd_augment(&AugmentArgs {
            input,
            output,
            seed,
            r_max,
            customers,
            members,
            velocity,
            layout: layout.map(|l| match l {
                LayoutArg::Solomon => Layout::Solomon,
                LayoutArg::Cordeau => Layout::Cordeau,
            }),
        }),
        Command::Solve {
            instance,
            output,
            distances,
            serial,
        } => cmd_solve(&SolveArgs {
            instance,
            output,
            convention: distances.into(),
            parallel: !serial,
        }),
        Command::Verify {
            instance,
            solution,
            distances,
        } => cmd_verify(&VerifyArgs {
            instance,
            solution,
            convention: distances.into(),
        }),
        Command::Oracle {
            instance,
            output,
            time_limit,
            node_limit,
            bound,
            distances,
        } => cmd_oracle(&OracleArgs {
            instance,
            output,
            time_limit: seconds(time_limit)?,
            node_limit,
            bound: match bound {
                BoundArg::RewardSum => BoundMode::RewardSum,
                BoundArg::Reachability => BoundMode::ReachabilityFiltered,
            },
            convention: distances.into(),
        }),
        Command::Bench {
            dir,
            output,
            sizes,
            members,
            seed,
            r_max,
            time_limit,
            node_limit,
            distances,
            serial,
            omit_times,
        } => cmd_bench(&BenchArgs {
            dir,
            output,
            sizes,
            members,
            seed,
            r_max,
            time_limit: seconds(time_limit)?,
            node_limit,
            convention: distances.into(),
            parallel: !serial,
            omit_times,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
