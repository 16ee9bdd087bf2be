use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::term::ElliottTerm;
use crate::vars::{Role, VarId, VariableTable};

/// Integer weights for the substitution `z_i -> t^{lambda_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LambdaVector(pub Vec<i64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaStrategy {
    /// Uniform entries in `[1, 2^16]`, then the moment curve as fallback.
    #[default]
    Random,
    /// `(1, k, k^2, ...)` for `k = 2, 3, ...`.
    MomentCurve,
}

const RANDOM_TRIES: usize = 100;
const MOMENT_TRIES: usize = 200;

/// Slack exponent vectors `B` of all factors `1 - z^B` free of other
/// variables: those become pure powers of `t` and need `<lambda, B> != 0`.
pub fn pure_factors<'a>(table: &VariableTable, terms: impl IntoIterator<Item = &'a ElliottTerm>) -> Vec<Vec<i64>> {
    let slacks = table.ids_with_role(Role::Slack);
    let others: Vec<VarId> = (0..table.len()).filter(|i| !slacks.contains(i)).collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for t in terms {
        for f in &t.denominator {
            if others.iter().all(|&i| f.get(i) == 0) {
                out.push(slacks.iter().map(|&i| f.get(i)).collect());
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn dot(lambda: &[i64], b: &[i64]) -> Option<i128> {
    lambda.iter().zip(b).try_fold(0i128, |acc, (&l, &e)| acc.checked_add((l as i128).checked_mul(e as i128)?))
}

/// Number of pure factors the candidate fails on (zero inner product, or a
/// multiple of `prime` in modular mode).
pub fn violations(lambda: &[i64], pure: &[Vec<i64>], prime: Option<u64>) -> usize {
    pure.iter()
        .filter(|b| match dot(lambda, b) {
            None => true,
            Some(0) => true,
            Some(v) => prime.is_some_and(|p| v.rem_euclid(p as i128) == 0),
        })
        .count()
}

/// Picks `lambda` deterministically from `(strategy, seed)`.
pub fn pick_lambda(
    nslack: usize,
    pure: &[Vec<i64>],
    strategy: LambdaStrategy,
    seed: u64,
    prime: Option<u64>,
) -> Result<LambdaVector> {
    if nslack == 0 {
        return if pure.is_empty() {
            Ok(LambdaVector(Vec::new()))
        } else {
            Err(Error::LambdaExhausted { attempts: 0, violations: pure.len() })
        };
    }
    let mut attempts = 0;
    let mut last = pure.len();
    if strategy == LambdaStrategy::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_TRIES {
            attempts += 1;
            let cand: Vec<i64> = (0..nslack).map(|_| rng.gen_range(1..=1 << 16)).collect();
            last = violations(&cand, pure, prime);
            if last == 0 {
                return Ok(LambdaVector(cand));
            }
        }
    }
    for k in 2..2 + MOMENT_TRIES as i64 {
        attempts += 1;
        let Some(cand) = moment_point(nslack, k) else { break };
        last = violations(&cand, pure, prime);
        if last == 0 {
            return Ok(LambdaVector(cand));
        }
    }
    Err(Error::LambdaExhausted { attempts, violations: last })
}

fn moment_point(n: usize, k: i64) -> Option<Vec<i64>> {
    let mut v = Vec::with_capacity(n);
    let mut p: i64 = 1;
    for i in 0..n {
        if i > 0 {
            p = p.checked_mul(k)?;
        }
        v.push(p);
    }
    Some(v)
}
