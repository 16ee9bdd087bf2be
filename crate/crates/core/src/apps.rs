//! Constant-term formulations of counting problems.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::monomial::Exponents;
use crate::oracle;
use crate::pipeline::{solve, CtProblem, PipelineOptions, SlackScope, Solution};
use crate::slack::{ProductForm, RationalFunction};
use crate::system::DiophantineSystem;
use crate::term::{ElliottTerm, Poly, TermSum};
use crate::vars::VariableTable;

fn to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or(Error::ExponentOverflow)
}

/// `CT_x x^{-a0} / prod (1 - x^{a_i})`.
pub fn knapsack_problem(a0: &BigInt, a: &[BigInt]) -> Result<CtProblem> {
    if a.iter().any(|w| !w.is_positive()) {
        return Err(Error::Invalid("knapsack weights must be positive".into()));
    }
    if a0.is_negative() {
        return Err(Error::Invalid("knapsack right-hand side must be nonnegative".into()));
    }
    let table = Arc::new(VariableTable::builder().ct("x").build()?);
    let numerator = Poly::monomial(BigInt::one(), Exponents::from_vec(vec![-to_i64(a0)?]));
    let denominator = a.iter().map(|w| Ok(Exponents::from_vec(vec![to_i64(w)?]))).collect::<Result<_>>()?;
    let sum = TermSum::new(table, vec![ElliottTerm::new(numerator, denominator)]);
    Ok(CtProblem::new(sum, SlackScope::All))
}

/// Number of `x in N^n` with `a . x = a0`.
pub fn knapsack_count(a0: &BigInt, a: &[BigInt], opts: &PipelineOptions) -> Result<BigInt> {
    knapsack_solve(a0, a, opts)?.value.integer()
}

pub fn knapsack_solve(a0: &BigInt, a: &[BigInt], opts: &PipelineOptions) -> Result<Solution> {
    solve(&knapsack_problem(a0, a)?, opts)
}

fn lambda_names(r: usize) -> Vec<String> {
    (1..=r).map(|i| format!("l{i}")).collect()
}

/// `CT_L L^{-b} / prod_j (1 - L^{c_j})` over the columns `c_j`. With
/// `keep_variables`, factor `j` carries a free variable `x_j` and the
/// result is the generating function of the solutions.
pub fn diophantine_problem(sys: &DiophantineSystem) -> Result<CtProblem> {
    let n = sys.nvars();
    let mut builder = VariableTable::builder();
    if sys.keep_variables {
        for j in 1..=n {
            builder = builder.free(format!("x{j}"));
        }
    }
    for name in lambda_names(sys.nrows()) {
        builder = builder.ct(name);
    }
    let table = Arc::new(builder.build()?);
    let offset = if sys.keep_variables { n } else { 0 };
    let mut num = vec![0i64; offset];
    for b in &sys.rhs {
        num.push(-to_i64(b)?);
    }
    let denominator = (0..n)
        .map(|j| {
            let mut e = vec![0i64; offset];
            if sys.keep_variables {
                e[j] = 1;
            }
            e.extend(sys.column(j)?);
            Ok(Exponents::from_vec(e))
        })
        .collect::<Result<_>>()?;
    let term = ElliottTerm::new(Poly::monomial(BigInt::one(), Exponents::from_vec(num)), denominator);
    Ok(CtProblem::new(TermSum::new(table, vec![term]), SlackScope::WithoutFree))
}

/// Checks that `A x = 0, x >= 0` has only the zero solution inside the box
/// `[0, max|A| * r]^n`. Any nonzero solution there proves unboundedness.
pub fn check_bounded(sys: &DiophantineSystem) -> Result<()> {
    let h = sys.homogeneous();
    // a row whose entries are all positive (or all negative) bounds everything
    if h.rows.iter().any(|r| r.iter().all(|v| v.is_positive()) || r.iter().all(|v| v.is_negative())) {
        return Ok(());
    }
    let bound = (sys.max_entry() * BigInt::from(sys.nrows())).to_i64().ok_or(Error::ExponentOverflow)?;
    match oracle::brute_count_with(&h, Some(bound.max(1)), oracle::NODE_BUDGET)? {
        1 => Ok(()),
        _ => Err(Error::Unbounded),
    }
}

/// Number of nonnegative integer solutions of `sys`.
pub fn diophantine_count(sys: &DiophantineSystem, opts: &PipelineOptions, assume_bounded: bool) -> Result<BigInt> {
    diophantine_solve(sys, opts, assume_bounded)?.value.integer()
}

pub fn diophantine_solve(sys: &DiophantineSystem, opts: &PipelineOptions, assume_bounded: bool) -> Result<Solution> {
    if !assume_bounded {
        check_bounded(sys)?;
    }
    solve(&diophantine_problem(sys)?, opts)
}

/// `CT_L 1 / ((1 - q L^{-b}) prod_j (1 - L^{c_j}))` with `q` free.
pub fn ehrhart_problem(sys: &DiophantineSystem) -> Result<CtProblem> {
    if sys.is_homogeneous() {
        return Err(Error::Invalid("Ehrhart series needs a nonzero right-hand side".into()));
    }
    let mut builder = VariableTable::builder().free("q");
    for name in lambda_names(sys.nrows()) {
        builder = builder.ct(name);
    }
    let table = Arc::new(builder.build()?);
    let mut qf = vec![1i64];
    for b in &sys.rhs {
        qf.push(-to_i64(b)?);
    }
    let mut denominator = vec![Exponents::from_vec(qf)];
    for j in 0..sys.nvars() {
        let mut e = vec![0i64];
        e.extend(sys.column(j)?);
        denominator.push(Exponents::from_vec(e));
    }
    let nv = table.len();
    let term = ElliottTerm::new(Poly::constant(nv, BigInt::one()), denominator);
    Ok(CtProblem::new(TermSum::new(table, vec![term]), SlackScope::WithoutFree))
}

/// The Ehrhart series `sum_k #(kP cap Z^n) q^k` as a reduced fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct EhrhartResult {
    pub function: RationalFunction,
}

impl EhrhartResult {
    pub fn new(function: RationalFunction) -> Self {
        EhrhartResult { function }
    }

    /// Denominator as `prod (1 - q^k)^{m_k}` with `k <= 12`, if possible.
    pub fn product_form(&self) -> Option<ProductForm> {
        self.function.product_form()
    }
}

/// Taylor coefficients `i(0..=k)`, which must be integers.
pub fn series_coeffs(r: &EhrhartResult, k: usize) -> Result<Vec<BigInt>> {
    r.function
        .series_coeffs(k)
        .into_iter()
        .map(|c: BigRational| if c.is_integer() { Ok(c.to_integer()) } else { Err(Error::NotIntegral(c.to_string())) })
        .collect()
}

pub fn ehrhart_series(sys: &DiophantineSystem, opts: &PipelineOptions) -> Result<EhrhartResult> {
    Ok(ehrhart_solve(sys, opts)?.0)
}

pub fn ehrhart_solve(sys: &DiophantineSystem, opts: &PipelineOptions) -> Result<(EhrhartResult, Solution)> {
    let sol = solve(&ehrhart_problem(sys)?, opts)?;
    let f = sol.value.rational_function()?.clone();
    Ok((EhrhartResult::new(f), sol))
}

/// Brute-force dilation counts `i(0..=k)`.
pub fn brute_ehrhart(sys: &DiophantineSystem, k: usize) -> Result<Vec<u128>> {
    (0..=k).map(|d| oracle::brute_count(&sys.dilate(d as i64))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn example_one() {
        let n = knapsack_count(&BigInt::from(41), &big(&[1, 5, 14]), &PipelineOptions::default()).unwrap();
        assert_eq!(n, BigInt::from(18));
    }

    #[test]
    fn small_systems() {
        let o = PipelineOptions::default();
        let s = DiophantineSystem::from_i64(&[vec![1, 1]], &[2]).unwrap();
        assert_eq!(diophantine_count(&s, &o, false).unwrap(), BigInt::from(3));
        let s = DiophantineSystem::from_i64(&[vec![1, 1], vec![1, -1]], &[2, 0]).unwrap();
        assert_eq!(diophantine_count(&s, &o, false).unwrap(), BigInt::from(1));
        let s = DiophantineSystem::from_i64(&[vec![1, -1]], &[0]).unwrap();
        assert_eq!(diophantine_count(&s, &o, false), Err(Error::Unbounded));
    }

    #[test]
    fn segment_and_parity_series() {
        let o = PipelineOptions::default();
        let s = DiophantineSystem::from_i64(&[vec![1, 1]], &[1]).unwrap();
        let r = ehrhart_series(&s, &o).unwrap();
        assert_eq!(series_coeffs(&r, 3).unwrap(), big(&[1, 2, 3, 4]));
        assert_eq!(r.function.denominator, big(&[1, -2, 1]));
        let s = DiophantineSystem::from_i64(&[vec![2]], &[1]).unwrap();
        let r = ehrhart_series(&s, &o).unwrap();
        assert_eq!(series_coeffs(&r, 4).unwrap(), big(&[1, 0, 1, 0, 1]));
        assert_eq!(r.function.denominator, big(&[1, 0, -1]));
    }

    #[test]
    fn tiny_magic_squares() {
        let o = PipelineOptions::default();
        let r = ehrhart_series(&crate::system::magic_square_system(1), &o).unwrap();
        assert_eq!(r.function.denominator, big(&[1, -1]));
        assert_eq!(r.function.numerator, big(&[1]));
        let r = ehrhart_series(&crate::system::magic_square_system(2), &o).unwrap();
        assert_eq!(r.function.denominator, big(&[1, 0, -1]));
    }
}
