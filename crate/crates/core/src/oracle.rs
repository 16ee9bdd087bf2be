//! Brute-force ground truth that shares no algorithm with the engine:
//! exhaustive search for Diophantine systems, a knapsack DP table, and
//! naive geometric-series expansion of Elliott terms.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::monomial::{Exponents, Verdict};
use crate::system::DiophantineSystem;
use crate::term::{ElliottTerm, Poly};
use crate::vars::VarId;

/// Default search-node budget for [`brute_count`].
pub const NODE_BUDGET: u64 = 100_000_000;
/// Largest right-hand side [`dp_knapsack`] accepts.
pub const DP_BUDGET: u64 = 10_000_000;
/// Largest truncated expansion [`naive_ct`] builds.
pub const EXPANSION_BUDGET: usize = 2_000_000;

/// Number of nonnegative integer solutions of `sys`, by depth-first search.
///
/// Every variable needs an upper bound: either from a row whose entries all
/// share one sign, or from `box_bound`. Refuses when neither exists or the
/// search exceeds `budget` nodes.
pub fn brute_count_with(sys: &DiophantineSystem, box_bound: Option<i64>, budget: u64) -> Result<u128> {
    let n = sys.nvars();
    let r = sys.nrows();
    let a: Vec<Vec<i128>> = sys
        .rows
        .iter()
        .map(|row| row.iter().map(|v| v.to_i128().ok_or(Error::ExponentOverflow)).collect())
        .collect::<Result<_>>()?;
    let b: Vec<i128> = sys.rhs.iter().map(|v| v.to_i128().ok_or(Error::ExponentOverflow)).collect::<Result<_>>()?;

    let mut ub: Vec<Option<i128>> = vec![box_bound.map(i128::from); n];
    for i in 0..r {
        let sign = if a[i].iter().all(|&v| v >= 0) {
            1
        } else if a[i].iter().all(|&v| v <= 0) {
            -1
        } else {
            continue;
        };
        let bi = sign * b[i];
        if bi < 0 {
            return Ok(0);
        }
        for j in 0..n {
            let aij = sign * a[i][j];
            if aij > 0 {
                let cap = bi / aij;
                ub[j] = Some(ub[j].map_or(cap, |u| u.min(cap)));
            }
        }
    }
    let ub: Vec<i128> = ub
        .into_iter()
        .enumerate()
        .map(|(j, u)| u.ok_or_else(|| Error::OracleRefused(format!("variable {j} has no finite search bound"))))
        .collect::<Result<_>>()?;

    // reach[i][j]: range of row i over variables j.. within their bounds
    let mut lo = vec![vec![0i128; n + 1]; r];
    let mut hi = vec![vec![0i128; n + 1]; r];
    for i in 0..r {
        for j in (0..n).rev() {
            let c = a[i][j] * ub[j];
            lo[i][j] = lo[i][j + 1] + c.min(0);
            hi[i][j] = hi[i][j + 1] + c.max(0);
        }
    }
    let last: Vec<Option<usize>> = a.iter().map(|row| row.iter().rposition(|&v| v != 0)).collect();

    struct Search<'a> {
        a: &'a [Vec<i128>],
        ub: &'a [i128],
        lo: &'a [Vec<i128>],
        hi: &'a [Vec<i128>],
        last: &'a [Option<usize>],
        nodes: u64,
        budget: u64,
        count: u128,
    }

    impl Search<'_> {
        fn feasible(&self, res: &[i128], j: usize) -> bool {
            res.iter().enumerate().all(|(i, &v)| self.lo[i][j] <= v && v <= self.hi[i][j])
        }

        fn go(&mut self, j: usize, res: &mut [i128]) -> Result<()> {
            if j == self.ub.len() {
                if res.iter().all(|&v| v == 0) {
                    self.count += 1;
                }
                return Ok(());
            }
            // a row ending at j fixes the value
            let mut forced: Option<i128> = None;
            for (i, l) in self.last.iter().enumerate() {
                if *l == Some(j) {
                    let aij = self.a[i][j];
                    if res[i] % aij != 0 {
                        return Ok(());
                    }
                    let v = res[i] / aij;
                    if v < 0 || v > self.ub[j] || forced.is_some_and(|f| f != v) {
                        return Ok(());
                    }
                    forced = Some(v);
                }
            }
            let (from, to) = forced.map_or((0, self.ub[j]), |v| (v, v));
            for v in from..=to {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::OracleRefused(format!("search exceeded {} nodes", self.budget)));
                }
                for (i, row) in self.a.iter().enumerate() {
                    res[i] -= row[j] * v;
                }
                if self.feasible(res, j + 1) {
                    self.go(j + 1, res)?;
                }
                for (i, row) in self.a.iter().enumerate() {
                    res[i] += row[j] * v;
                }
            }
            Ok(())
        }
    }

    let mut res = b.clone();
    let mut s = Search { a: &a, ub: &ub, lo: &lo, hi: &hi, last: &last, nodes: 0, budget, count: 0 };
    if !s.feasible(&res, 0) {
        return Ok(0);
    }
    s.go(0, &mut res)?;
    Ok(s.count)
}

/// [`brute_count_with`] using sign-definite rows for bounds and the default
/// node budget.
pub fn brute_count(sys: &DiophantineSystem) -> Result<u128> {
    brute_count_with(sys, None, NODE_BUDGET)
}

/// Number of `x in N^n` with `a . x = a0`, by the classic coin-change table.
pub fn dp_knapsack(a0: u64, a: &[u64]) -> Result<u128> {
    if a0 > DP_BUDGET {
        return Err(Error::OracleRefused(format!("right-hand side {a0} exceeds {DP_BUDGET}")));
    }
    if a.contains(&0) {
        return Err(Error::Invalid("knapsack weights must be positive".into()));
    }
    let n = a0 as usize;
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for &w in a {
        let w = w as usize;
        for v in w..=n {
            ways[v] = ways[v]
                .checked_add(ways[v - w])
                .ok_or_else(|| Error::OracleRefused("count exceeds 128 bits".into()))?;
        }
    }
    Ok(ways[n])
}

/// Weighted truncation: a monomial `x^e` survives when `sum w_i e_i <= cap`.
/// With lexicographic weights every small monomial has positive weight, so
/// geometric series truncate to finite sums consistently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationBox {
    pub weights: Vec<i128>,
    pub cap: i128,
}

impl TruncationBox {
    /// Weights `base^{n-1-i}`; `base` must exceed twice the largest
    /// absolute exponent the box will meet.
    pub fn lex(nvars: usize, base: i128, cap: i128) -> Self {
        let weights = (0..nvars).map(|i| base.pow((nvars - 1 - i) as u32)).collect();
        TruncationBox { weights, cap }
    }

    /// A box valid for all given terms, keeping degree about `lead_degree`
    /// in the leading variable. The base carries a 2x safety margin.
    pub fn for_terms<'a>(nvars: usize, terms: impl IntoIterator<Item = &'a ElliottTerm>, lead_degree: i128) -> Self {
        let mut m: i64 = 1;
        for t in terms {
            for f in &t.denominator {
                m = m.max(f.as_slice().iter().map(|v| v.abs()).max().unwrap_or(0));
            }
            for (e, _) in t.numerator.iter() {
                m = m.max(e.as_slice().iter().map(|v| v.abs()).max().unwrap_or(0));
            }
        }
        let base = 2 * (m as i128) * nvars as i128 + 2;
        Self::lex(nvars, base, lead_degree * base.pow(nvars.saturating_sub(1) as u32))
    }

    pub fn weight(&self, e: &Exponents) -> i128 {
        self.weights.iter().zip(e.as_slice()).map(|(w, &v)| w * v as i128).sum()
    }
}

fn truncated_mul(a: &Poly, b: &Poly, bx: &TruncationBox, cap: i128) -> Result<Poly> {
    let mut out = Poly::zero();
    for (ea, ca) in a.iter() {
        let wa = bx.weight(ea);
        for (eb, cb) in b.iter() {
            if wa + bx.weight(eb) > cap {
                continue;
            }
            out.add_term(ea.mul(eb)?, ca * cb);
            if out.len() > EXPANSION_BUDGET {
                return Err(Error::OracleRefused("expansion budget exceeded".into()));
            }
        }
    }
    Ok(out)
}

/// Series of `1/(1 - x^f)` in the working order, truncated at `cap`.
fn geometric(f: &Exponents, bx: &TruncationBox, cap: i128) -> Result<Poly> {
    let nvars = f.len();
    let (step, sign, first) = match f.compare_to_one() {
        Verdict::Small => (f.clone(), BigInt::one(), 0),
        // 1/(1-M) = -sum_{k>=1} M^{-k}
        Verdict::Large => (f.inv()?, -BigInt::one(), 1),
        Verdict::One => return Err(Error::Invalid("factor 1 - 1 has no expansion".into())),
    };
    let w = bx.weight(&step);
    if w <= 0 {
        return Err(Error::OracleRefused("truncation weights are not lexicographic for this term".into()));
    }
    let mut out = Poly::zero();
    let mut k = first;
    while k * w <= cap {
        out.add_term(step.pow(k as i64)?, sign.clone());
        k += 1;
        if out.len() > EXPANSION_BUDGET {
            return Err(Error::OracleRefused("expansion budget exceeded".into()));
        }
    }
    if out.is_zero() && first == 0 {
        out.add_term(Exponents::one(nvars), BigInt::one());
    }
    Ok(out)
}

/// Expansion of `t` in the iterated Laurent series field, exact for every
/// monomial of weight at most `bx.cap`.
pub fn expand(t: &ElliottTerm, bx: &TruncationBox) -> Result<Poly> {
    if t.numerator.is_zero() {
        return Ok(Poly::zero());
    }
    let wmin = t.numerator.iter().map(|(e, _)| bx.weight(e)).min().unwrap_or(0);
    let inner = bx.cap - wmin;
    if inner < 0 {
        return Ok(Poly::zero());
    }
    let nvars = t.numerator.iter().next().map(|(e, _)| e.len()).unwrap_or(0);
    let mut series = Poly::constant(nvars, BigInt::one());
    for f in &t.denominator {
        series = truncated_mul(&series, &geometric(f, bx, inner)?, bx, inner)?;
    }
    truncated_mul(&t.numerator, &series, bx, bx.cap)
}

/// Sum of [`expand`] over several terms.
pub fn expand_sum<'a>(terms: impl IntoIterator<Item = &'a ElliottTerm>, bx: &TruncationBox) -> Result<Poly> {
    let mut acc = Poly::zero();
    for t in terms {
        acc.add_assign(&expand(t, bx)?);
    }
    Ok(acc)
}

/// The `x^0` slice of the truncated expansion of `t`.
pub fn naive_ct(t: &ElliottTerm, x: VarId, bx: &TruncationBox) -> Result<Poly> {
    Ok(expand(t, bx)?.x_constant_part(x))
}
