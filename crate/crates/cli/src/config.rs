use std::path::PathBuf;

use ct_euclid_core::pipeline::{Arithmetic, PipelineOptions, DEFAULT_PRIMES};
use ct_euclid_core::slack::LambdaStrategy;
use ct_euclid_core::{EngineOptions, OrderPolicy, SlackPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CHUNK_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskSpec {
    /// Raw constant-term problem file.
    Ct { input: PathBuf },
    /// Count solutions of a system file.
    Count { input: PathBuf, assume_bounded: bool },
    /// Knapsack count; integers kept as decimal strings.
    Knapsack { a0: String, weights: Vec<String> },
    /// Ehrhart series of a system file.
    Ehrhart { input: PathBuf },
    /// Ehrhart series of the `n x n` magic-square polytope.
    Magic { n: usize },
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Ct { .. } => "ct",
            TaskSpec::Count { .. } => "count",
            TaskSpec::Knapsack { .. } => "knapsack",
            TaskSpec::Ehrhart { .. } => "ehrhart",
            TaskSpec::Magic { .. } => "magic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: TaskSpec,
    /// Empty means exact arithmetic.
    pub primes: Vec<u64>,
    pub crt: bool,
    pub seed: u64,
    pub order: OrderPolicy,
    pub slack: SlackPolicy,
    pub checkpoint_dir: Option<PathBuf>,
    pub chunk_size: usize,
    pub resume: bool,
    pub oracle_check: bool,
    /// Number of series coefficients to print for Ehrhart tasks.
    pub coeffs: Option<usize>,
    /// Result file; defaults to `result.txt` in the checkpoint directory.
    pub output: Option<PathBuf>,
    /// Stop after this many chunk computations (for testing resumption).
    #[serde(skip)]
    pub halt_after_chunks: Option<usize>,
}

impl RunConfig {
    pub fn new(task: TaskSpec) -> Self {
        RunConfig {
            task,
            primes: Vec::new(),
            crt: false,
            seed: 0,
            order: OrderPolicy::Given,
            slack: SlackPolicy::Eager,
            checkpoint_dir: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
            resume: false,
            oracle_check: false,
            coeffs: None,
            output: None,
            halt_after_chunks: None,
        }
    }

    /// `--crt` without explicit primes uses the default set.
    pub fn effective_primes(&self) -> Vec<u64> {
        if self.primes.is_empty() && self.crt {
            DEFAULT_PRIMES.to_vec()
        } else {
            self.primes.clone()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.chunk_size == 0 {
            return Err(CliError::Parse("chunk size must be at least 1".into()));
        }
        let primes = self.effective_primes();
        for (i, p) in primes.iter().enumerate() {
            if primes[..i].contains(p) {
                return Err(CliError::Core(ct_euclid_core::Error::PrimeClash(format!("prime {p} given twice"))));
            }
        }
        if self.resume && self.checkpoint_dir.is_none() {
            return Err(CliError::ResumeMismatch("resuming needs a checkpoint directory".into()));
        }
        Ok(())
    }

    pub fn pipeline_options(&self) -> CliResult<PipelineOptions> {
        let primes = self.effective_primes();
        let arithmetic =
            if primes.is_empty() { Arithmetic::Exact } else { Arithmetic::Modular { primes, crt: self.crt } };
        let opts = PipelineOptions {
            engine: EngineOptions { order: self.order, slack: self.slack, parallel: true },
            seed: self.seed,
            strategy: LambdaStrategy::Random,
            arithmetic,
        };
        opts.validate()?;
        Ok(opts)
    }

    /// Hash of everything that determines the result. The checkpoint
    /// location, the resume flag and the output path are left out so a
    /// resumed run reports the same hash as a fresh one.
    pub fn hash(&self, problem_hash: &str) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            version: &'a str,
            task: &'a str,
            problem: &'a str,
            primes: Vec<u64>,
            crt: bool,
            seed: u64,
            order: OrderPolicy,
            slack: SlackPolicy,
            chunk_size: usize,
            oracle_check: bool,
            coeffs: Option<usize>,
        }
        let h = Hashed {
            version: env!("CARGO_PKG_VERSION"),
            task: self.task.name(),
            problem: problem_hash,
            primes: self.effective_primes(),
            crt: self.crt,
            seed: self.seed,
            order: self.order,
            slack: self.slack,
            chunk_size: self.chunk_size,
            oracle_check: self.oracle_check,
            coeffs: self.coeffs,
        };
        sha256_hex(serde_json::to_string(&h).expect("config serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_order(s: &str) -> Result<OrderPolicy, String> {
    match s {
        "given" => Ok(OrderPolicy::Given),
        "sparse-first" => Ok(OrderPolicy::SparseFirst),
        _ => Err(format!("unknown order `{s}`; expected given or sparse-first")),
    }
}

pub fn parse_slack(s: &str) -> Result<SlackPolicy, String> {
    match s {
        "eager" => Ok(SlackPolicy::Eager),
        "delayed" => Ok(SlackPolicy::Delayed),
        _ => Err(format!("unknown slack policy `{s}`; expected eager or delayed")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_checkpoint_location() {
        let a = RunConfig::new(TaskSpec::Magic { n: 3 });
        let mut b = a.clone();
        b.checkpoint_dir = Some("/tmp/x".into());
        b.resume = true;
        b.output = Some("/tmp/out".into());
        assert_eq!(a.hash("p"), b.hash("p"));
        b.seed = 1;
        assert_ne!(a.hash("p"), b.hash("p"));
        assert_ne!(a.hash("p"), a.hash("q"));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(TaskSpec::Magic { n: 3 });
        c.primes = vec![101, 101];
        assert_eq!(c.validate().unwrap_err().exit_code(), crate::error::code::PRIME_CLASH);
        c.primes = vec![101];
        c.chunk_size = 0;
        assert!(c.validate().is_err());
        c.chunk_size = 5;
        assert!(c.validate().is_ok());
        c.crt = true;
        c.primes.clear();
        assert_eq!(c.effective_primes(), DEFAULT_PRIMES.to_vec());
        c.resume = true;
        assert_eq!(c.validate().unwrap_err().exit_code(), crate::error::code::RESUME_MISMATCH);
    }
}
