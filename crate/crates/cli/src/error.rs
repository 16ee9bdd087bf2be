use std::fmt;

use ct_euclid_core::Error;

/// Process exit codes.
pub mod code {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const COLLISION: u8 = 3;
    pub const LAMBDA_EXHAUSTED: u8 = 4;
    pub const PRIME_CLASH: u8 = 5;
    pub const ORACLE_REFUSED: u8 = 6;
    pub const RESUME_MISMATCH: u8 = 7;
    pub const ORACLE_MISMATCH: u8 = 8;
    pub const INTERRUPTED: u8 = 9;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse(String),
    Io(String),
    Core(Error),
    ResumeMismatch(String),
    OracleMismatch(String),
    /// Deliberate stop after this many chunk computations.
    Interrupted(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => code::PARSE,
            CliError::Io(_) => code::OTHER,
            CliError::ResumeMismatch(_) => code::RESUME_MISMATCH,
            CliError::OracleMismatch(_) => code::ORACLE_MISMATCH,
            CliError::Interrupted(_) => code::INTERRUPTED,
            CliError::Core(e) => match e {
                Error::Collision { .. } => code::COLLISION,
                Error::LambdaExhausted { .. } | Error::InvalidLambda => code::LAMBDA_EXHAUSTED,
                Error::PrimeClash(_) | Error::NotPrime(_) | Error::NonCoprimeModuli => code::PRIME_CLASH,
                Error::OracleRefused(_) => code::ORACLE_REFUSED,
                _ => code::OTHER,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::ResumeMismatch(m) => write!(f, "cannot resume: {m}"),
            CliError::OracleMismatch(m) => write!(f, "oracle mismatch: {m}"),
            CliError::Interrupted(n) => write!(f, "stopped after {n} chunk computations"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let errs = [
            CliError::Parse(String::new()),
            CliError::Core(Error::Collision { var: "x".into() }),
            CliError::Core(Error::LambdaExhausted { attempts: 1, violations: 1 }),
            CliError::Core(Error::PrimeClash(String::new())),
            CliError::Core(Error::OracleRefused(String::new())),
            CliError::ResumeMismatch(String::new()),
            CliError::OracleMismatch(String::new()),
            CliError::Interrupted(1),
        ];
        let mut codes: Vec<u8> = errs.iter().map(CliError::exit_code).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), errs.len());
        assert!(!codes.contains(&code::OK));
    }
}
