use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ct_euclid_cli::config::{parse_order, parse_slack, DEFAULT_CHUNK_SIZE};
use ct_euclid_cli::{resume, run, CliResult, RunConfig, RunOutcome, TaskSpec};
use ct_euclid_core::{OrderPolicy, SlackPolicy};

#[derive(Parser)]
#[command(name = "ct-euclid", version, about = "Constant-term extraction for Elliott-rational functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Constant term of a raw problem file.
    Ct {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Number of nonnegative solutions of a system file.
    Count {
        #[arg(long)]
        input: PathBuf,
        /// Skip the boundedness check.
        #[arg(long)]
        assume_bounded: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Number of ways to write a0 as a nonnegative combination of weights.
    Knapsack {
        #[arg(long, allow_hyphen_values = true)]
        a0: String,
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Ehrhart series of the polytope of a system file.
    Ehrhart {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Ehrhart series of the n x n magic-square polytope with diagonals.
    Magic {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Continue a checkpointed run.
    Resume {
        #[arg(long)]
        checkpoint_dir: PathBuf,
        /// Replace the saved prime set.
        #[arg(long = "mod", value_name = "P")]
        primes: Vec<u64>,
        #[arg(long)]
        crt: bool,
        #[arg(long, hide = true)]
        halt_after_chunks: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Work modulo this prime; repeat for several primes.
    #[arg(long = "mod", value_name = "P")]
    primes: Vec<u64>,
    /// Combine per-prime results by the Chinese remainder theorem.
    #[arg(long)]
    crt: bool,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// given | sparse-first
    #[arg(long, value_parser = parse_order, default_value = "given")]
    order: OrderPolicy,
    /// eager | delayed
    #[arg(long, value_parser = parse_slack, default_value = "eager")]
    slack: SlackPolicy,
    /// Print this many series coefficients (Ehrhart tasks).
    #[arg(long)]
    coeffs: Option<usize>,
    /// Compare the result with a brute-force oracle.
    #[arg(long)]
    oracle_check: bool,
    /// Continue the run saved in the checkpoint directory.
    #[arg(long)]
    resume: bool,
    /// Result file; defaults to result.txt in the checkpoint directory.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, hide = true)]
    halt_after_chunks: Option<usize>,
}

impl Common {
    fn into_config(self, task: TaskSpec) -> RunConfig {
        RunConfig {
            task,
            primes: self.primes,
            crt: self.crt,
            seed: self.seed,
            order: self.order,
            slack: self.slack,
            checkpoint_dir: self.checkpoint_dir,
            chunk_size: self.chunk_size,
            resume: self.resume,
            oracle_check: self.oracle_check,
            coeffs: self.coeffs,
            output: self.output,
            halt_after_chunks: self.halt_after_chunks,
        }
    }
}

fn dispatch(command: Command) -> CliResult<RunOutcome> {
    let cfg = match command {
        Command::Ct { input, common } => common.into_config(TaskSpec::Ct { input }),
        Command::Count { input, assume_bounded, common } => {
            common.into_config(TaskSpec::Count { input, assume_bounded })
        }
        Command::Knapsack { a0, weights, common } => common.into_config(TaskSpec::Knapsack { a0, weights }),
        Command::Ehrhart { input, common } => common.into_config(TaskSpec::Ehrhart { input }),
        Command::Magic { n, common } => common.into_config(TaskSpec::Magic { n }),
        Command::Resume { checkpoint_dir, primes, crt, halt_after_chunks } => {
            let primes = (!primes.is_empty()).then_some(primes);
            return resume(&checkpoint_dir, primes, crt.then_some(true), halt_after_chunks);
        }
    };
    run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(out) => {
            print!("{}", out.result_text);
            for (phase, t) in &out.timings {
                println!("time-{phase}: {:.3}s", t.as_secs_f64());
            }
            if let Some(p) = &out.result_path {
                println!("result-file: {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
