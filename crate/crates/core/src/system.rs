//! Linear Diophantine systems `A x = b, x >= 0` and their JSON file form.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Count,
    Ehrhart,
}

/// `rows * x = rhs` over nonnegative integer `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantineSystem {
    pub rows: Vec<Vec<BigInt>>,
    pub rhs: Vec<BigInt>,
    /// Keep one free variable per column instead of counting.
    pub keep_variables: bool,
}

impl DiophantineSystem {
    pub fn new(rows: Vec<Vec<BigInt>>, rhs: Vec<BigInt>) -> Result<Self> {
        let sys = DiophantineSystem { rows, rhs, keep_variables: false };
        sys.validate()?;
        Ok(sys)
    }

    pub fn from_i64(rows: &[Vec<i64>], rhs: &[i64]) -> Result<Self> {
        Self::new(
            rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(),
            rhs.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Invalid("system has no rows".into()));
        }
        let n = self.rows[0].len();
        if n == 0 {
            return Err(Error::Invalid("system has no variables".into()));
        }
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("rows have different lengths".into()));
        }
        if self.rhs.len() != self.rows.len() {
            return Err(Error::Invalid("rhs length does not match the row count".into()));
        }
        for j in 0..n {
            if self.rows.iter().all(|r| r[j].is_zero()) {
                return Err(Error::Invalid(format!("column {j} is zero")));
            }
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.rows[0].len()
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.iter().all(Zero::is_zero)
    }

    /// Column `j` as machine integers.
    pub fn column(&self, j: usize) -> Result<Vec<i64>> {
        self.rows.iter().map(|r| r[j].to_i64().ok_or(Error::ExponentOverflow)).collect()
    }

    pub fn rhs_i64(&self) -> Result<Vec<i64>> {
        self.rhs.iter().map(|v| v.to_i64().ok_or(Error::ExponentOverflow)).collect()
    }

    /// The same matrix with `rhs = 0`.
    pub fn homogeneous(&self) -> Self {
        DiophantineSystem { rows: self.rows.clone(), rhs: vec![BigInt::zero(); self.rows.len()], keep_variables: false }
    }

    /// The system with `rhs` scaled by `k`.
    pub fn dilate(&self, k: i64) -> Self {
        DiophantineSystem {
            rows: self.rows.clone(),
            rhs: self.rhs.iter().map(|v| v * k).collect(),
            keep_variables: self.keep_variables,
        }
    }

    /// Largest absolute matrix entry.
    pub fn max_entry(&self) -> BigInt {
        self.rows.iter().flatten().map(|v| v.abs()).max().unwrap_or_default()
    }
}

/// Integers in system files may be JSON numbers or decimal strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Int {
    Num(serde_json::Number),
    Str(String),
}

impl Int {
    fn value(&self) -> Result<BigInt> {
        let s = match self {
            Int::Num(n) => n.to_string(),
            Int::Str(s) => s.trim().to_string(),
        };
        s.parse().map_err(|_| Error::Invalid(format!("`{s}` is not an integer")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    vars: Int,
    rows: Vec<Vec<Int>>,
    rhs: Vec<Int>,
    #[serde(default)]
    task: Option<Task>,
    #[serde(default)]
    keep_variables: bool,
}

#[derive(Serialize)]
struct OutSystem {
    vars: String,
    rows: Vec<Vec<String>>,
    rhs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    task: Option<Task>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    keep_variables: bool,
}

/// Parses `{"vars": n, "rows": [[...]], "rhs": [...], "task": ...}`.
pub fn parse_system(text: &str) -> Result<(DiophantineSystem, Option<Task>)> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("system file: {e}")))?;
    let n = raw.vars.value()?;
    let rows: Vec<Vec<BigInt>> =
        raw.rows.iter().map(|r| r.iter().map(Int::value).collect::<Result<_>>()).collect::<Result<_>>()?;
    let rhs: Vec<BigInt> = raw.rhs.iter().map(Int::value).collect::<Result<_>>()?;
    if rows.iter().any(|r| BigInt::from(r.len()) != n) {
        return Err(Error::Invalid(format!("`vars` is {n} but a row has a different length")));
    }
    let mut sys = DiophantineSystem::new(rows, rhs)?;
    sys.keep_variables = raw.keep_variables;
    Ok((sys, raw.task))
}

/// Canonical JSON with integers as decimal strings.
pub fn write_system(sys: &DiophantineSystem, task: Option<Task>) -> String {
    let out = OutSystem {
        vars: sys.nvars().to_string(),
        rows: sys.rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
        rhs: sys.rhs.iter().map(|v| v.to_string()).collect(),
        task,
        keep_variables: sys.keep_variables,
    };
    serde_json::to_string_pretty(&out).expect("system serializes")
}

/// `(2n+2) x n^2` system for magic squares: row sums, column sums, main
/// diagonal and antidiagonal all equal to 1 (the dilation parameter).
/// Columns are the cells in row-major order.
pub fn magic_square_system(n: usize) -> DiophantineSystem {
    assert!(n >= 1, "magic squares need n >= 1");
    let cell = |i: usize, j: usize| i * n + j;
    let mut rows = vec![vec![BigInt::zero(); n * n]; 2 * n + 2];
    for i in 0..n {
        for j in 0..n {
            rows[i][cell(i, j)] = 1.into();
            rows[n + j][cell(i, j)] = 1.into();
        }
        rows[2 * n][cell(i, i)] = 1.into();
        rows[2 * n + 1][cell(i, n - 1 - i)] = 1.into();
    }
    DiophantineSystem { rows, rhs: vec![1.into(); 2 * n + 2], keep_variables: false }
}
