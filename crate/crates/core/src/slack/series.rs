//! Constant term in `s` of one term after `z_i -> e^{lambda_i s}`.
//!
//! With `r` denominator factors that turn into pure powers of `t`, the term
//! times `s^r` is a power series in `s`, so only coefficients up to `s^r` of
//! each factor are needed:
//!
//! * numerator monomial `c x^a t^m` gives `c x^a sum m^n s^n / n!`;
//! * pure factor `1/(1 - t^b)` gives `s^{-1} sum -B_n b^{n-1} s^n / n!`;
//! * mixed factor `1/(1 - M t^b)` gives
//!   `sum_n b^n s^n sum_{i<=n} i! S(n,i)/n! * M^i / (1-M)^{i+1}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::slack::lambda::LambdaVector;
use crate::slack::tables::SeriesTables;
use crate::term::ElliottTerm;
use crate::vars::{Role, VarId, VariableTable};

/// Laurent polynomial in the free variables with coefficients in `F`.
#[derive(Clone, PartialEq)]
pub struct FreePoly<F: Field> {
    pub terms: BTreeMap<Vec<i64>, F::Elem>,
}

impl<F: Field> std::fmt::Debug for FreePoly<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

impl<F: Field> FreePoly<F> {
    pub fn zero() -> Self {
        FreePoly { terms: BTreeMap::new() }
    }

    pub fn constant(field: &F, m: usize, c: F::Elem) -> Self {
        let mut p = Self::zero();
        p.add_term(field, vec![0; m], c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, field: &F, exps: Vec<i64>, c: F::Elem) {
        if field.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                field.add_assign(v, &c);
                if field.is_zero(v) {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add_assign(&mut self, field: &F, other: &Self) {
        for (e, c) in &other.terms {
            self.add_term(field, e.clone(), c.clone());
        }
    }

    pub fn mul(&self, field: &F, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(field, e, field.mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, field: &F, c: &F::Elem) -> Self {
        let mut out = Self::zero();
        for (e, a) in &self.terms {
            out.add_term(field, e.clone(), field.mul(a, c));
        }
        out
    }

    /// The scalar value when there are no free variables.
    pub fn scalar(&self, field: &F) -> F::Elem {
        self.terms.iter().find(|(e, _)| e.iter().all(|&v| v == 0)).map(|(_, c)| c.clone()).unwrap_or(field.zero())
    }
}

/// A term after `z_i -> t^{lambda_i}`: numerator monomials
/// `c * x^free * t^m` and factors `1 - x^free * t^b`, each factor's free part
/// oriented small (or equal to 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackTerm {
    pub numerator: Vec<(BigInt, Vec<i64>, i128)>,
    pub factors: Vec<(Vec<i64>, i128)>,
}

impl SlackTerm {
    pub fn pure_count(&self) -> usize {
        self.factors.iter().filter(|(f, _)| f.iter().all(|&e| e == 0)).count()
    }
}

/// Result of [`ct_s_term`]: `numerator / prod (1 - x^M)^power` in the free
/// variables, with the denominator sorted.
#[derive(Clone, PartialEq)]
pub struct SimpleFraction<F: Field> {
    pub numerator: FreePoly<F>,
    pub denominator: Vec<(Vec<i64>, u32)>,
}

impl<F: Field> std::fmt::Debug for SimpleFraction<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} / {:?}", self.numerator, self.denominator)
    }
}

pub struct SlackLayout {
    pub free: Vec<VarId>,
    pub slack: Vec<VarId>,
}

impl SlackLayout {
    pub fn new(table: &VariableTable) -> Self {
        SlackLayout { free: table.ids_with_role(Role::Free), slack: table.ids_with_role(Role::Slack) }
    }
}

fn checked_dot(lambda: &[i64], e: &crate::monomial::Exponents, ids: &[VarId]) -> Result<i128> {
    lambda
        .iter()
        .zip(ids)
        .try_fold(0i128, |acc, (&l, &i)| acc.checked_add((l as i128).checked_mul(e.get(i) as i128)?))
        .ok_or(Error::ExponentOverflow)
}

/// Substitutes `z_i -> t^{lambda_i}`. Errors when a factor becomes
/// `1 - t^0`, which means `lambda` was invalid for this term.
pub fn substitute_slack(t: &ElliottTerm, table: &VariableTable, lambda: &LambdaVector) -> Result<SlackTerm> {
    let layout = SlackLayout::new(table);
    substitute_with(t, table, &layout, lambda)
}

pub(crate) fn substitute_with(
    t: &ElliottTerm,
    table: &VariableTable,
    layout: &SlackLayout,
    lambda: &LambdaVector,
) -> Result<SlackTerm> {
    if lambda.0.len() != layout.slack.len() {
        return Err(Error::Invalid("lambda length does not match slack count".into()));
    }
    for (i, v) in table.vars().iter().enumerate() {
        if v.role == Role::Ct && t.mentions(i) {
            return Err(Error::Invalid(format!("term still mentions ct variable `{}`", v.name)));
        }
    }
    let free_part = |e: &crate::monomial::Exponents| layout.free.iter().map(|&i| e.get(i)).collect::<Vec<i64>>();
    let mut numerator: Vec<(BigInt, Vec<i64>, i128)> = Vec::with_capacity(t.numerator.len());
    for (e, c) in t.numerator.iter() {
        numerator.push((c.clone(), free_part(e), checked_dot(&lambda.0, e, &layout.slack)?));
    }
    let mut factors = Vec::with_capacity(t.denominator.len());
    for f in &t.denominator {
        let free = free_part(f);
        let b = checked_dot(&lambda.0, f, &layout.slack)?;
        let lead = free.iter().find(|&&v| v != 0).copied();
        match lead {
            None if b == 0 => return Err(Error::InvalidLambda),
            Some(v) if v < 0 => {
                // 1/(1 - M t^b) = -M^{-1} t^{-b} / (1 - M^{-1} t^{-b})
                let inv: Vec<i64> = free.iter().map(|v| -v).collect();
                numerator = numerator
                    .into_iter()
                    .map(|(c, e, m)| (-c, e.iter().zip(&inv).map(|(a, b)| a + b).collect(), m - b))
                    .collect();
                factors.push((inv, -b));
            }
            _ => factors.push((free, b)),
        }
    }
    Ok(SlackTerm { numerator, factors })
}

fn pow_i128<F: Field>(field: &F, b: i128, n: usize) -> F::Elem {
    let base = field.from_int(&BigInt::from(b));
    field.pow(&base, n as u32)
}

/// `CT_s` of the term under `t = e^s`. Returns the simple fraction and the
/// number of nonzero summands in the expanded product, which never exceeds
/// `C(d+1, r)`.
///
/// Every series is kept integral (numerator and mixed series times `r!`,
/// pure series times the pole denominator and `b`), and the collected scale
/// is divided out once at the end. Exact arithmetic then never normalizes
/// fractions inside the series products.
pub fn ct_s_term<F: Field>(field: &F, term: &SlackTerm, tables: &SeriesTables) -> Result<(SimpleFraction<F>, u64)> {
    let ring = field.integral();
    let (numerator, denominator, scale, count) = integral_ct_s(&ring, term, tables)?;
    let inv = field
        .inv(&field.from_int(&scale))
        .ok_or_else(|| Error::PrimeClash("series denominators vanish modulo the prime".into()))?;
    let mut out = FreePoly::zero();
    for (e, c) in numerator.terms {
        out.add_term(field, e, field.mul(&field.lift(&c), &inv));
    }
    Ok((SimpleFraction { numerator: out, denominator }, count))
}

type Integral<R> = (FreePoly<R>, Vec<(Vec<i64>, u32)>, BigInt, u64);

/// The integral part of [`ct_s_term`]: numerator, denominator, the scale to
/// divide by, and the summand count.
fn integral_ct_s<F: Field>(field: &F, term: &SlackTerm, tables: &SeriesTables) -> Result<Integral<F>> {
    let m = term
        .numerator
        .first()
        .map(|(_, e, _)| e.len())
        .or_else(|| term.factors.first().map(|(f, _)| f.len()))
        .unwrap_or(0);
    let r = term.pure_count();
    if tables.order() < r {
        return Err(Error::Invalid(format!("series tables of order {} < {r}", tables.order())));
    }
    // r!/n! for n <= r
    let falling: Vec<F::Elem> = (0..=r).map(|n| field.from_int(&(tables.factorial(r) / tables.factorial(n)))).collect();
    let mut scale = tables.factorial(r).clone();

    // Numerator series.
    let mut acc: Vec<FreePoly<F>> = vec![FreePoly::zero(); r + 1];
    for (c, e, mexp) in &term.numerator {
        let c = field.from_int(c);
        let base = field.from_int(&BigInt::from(*mexp));
        let mut pw = field.one();
        for (n, slot) in acc.iter_mut().enumerate() {
            slot.add_term(field, e.clone(), field.mul(&field.mul(&c, &pw), &falling[n]));
            pw = field.mul(&pw, &base);
        }
    }
    let mut count: Vec<u128> = acc.iter().map(|p| u128::from(!p.is_zero())).collect();

    // Product of the pure factors, a scalar series.
    let pole: Vec<F::Elem> = (0..=r).map(|n| field.from_int(tables.pole_scaled(n))).collect();
    let mut pure = vec![field.zero(); r + 1];
    pure[0] = field.one();
    for (_, b) in term.factors.iter().filter(|(f, _)| f.iter().all(|&v| v == 0)) {
        let bf = field.from_int(&BigInt::from(*b));
        if field.is_zero(&bf) {
            return Err(Error::PrimeClash(format!("t-exponent {b} vanishes modulo the prime")));
        }
        let mut series = Vec::with_capacity(r + 1);
        let mut pw = field.one();
        for c in &pole {
            series.push(field.mul(c, &pw));
            pw = field.mul(&pw, &bf);
        }
        pure = mul_scalar_series(field, &pure, &series);
        scale = scale * BigInt::from(*b) * tables.pole_denominator();
    }
    let pure_nonzero: Vec<bool> = pure.iter().map(|c| !field.is_zero(c)).collect();
    count = mul_count(&count, &pure_nonzero);
    acc = (0..=r)
        .map(|n| {
            let mut s = FreePoly::zero();
            for i in 0..=n {
                if !field.is_zero(&pure[n - i]) {
                    s.add_assign(field, &acc[i].scale(field, &pure[n - i]));
                }
            }
            s
        })
        .collect();

    // Mixed factors: series with denominator (1 - M)^{r+1}.
    let mut denominator = Vec::new();
    for (mono, b) in term.factors.iter().filter(|(f, _)| f.iter().any(|&v| v != 0)) {
        let series = mixed_series(field, mono, *b, r, tables, &falling);
        let nz: Vec<bool> = series.iter().map(|p| !p.is_zero()).collect();
        count = mul_count(&count, &nz);
        acc = mul_poly_series(field, &acc, &series);
        denominator.push((mono.clone(), (r + 1) as u32));
        scale *= tables.factorial(r);
    }
    denominator.sort();
    // merge equal monomials
    let mut merged: Vec<(Vec<i64>, u32)> = Vec::new();
    for (mono, p) in denominator {
        match merged.last_mut() {
            Some((last, q)) if *last == mono => *q += p,
            _ => merged.push((mono, p)),
        }
    }
    let numerator = acc.pop().unwrap_or_else(|| FreePoly::constant(field, m, field.zero()));
    Ok((numerator, merged, scale, count[r] as u64))
}

/// `r!` times the coefficients `b^n/n! sum_{i<=n} i! S(n,i) M^i (1-M)^{r-i}`
/// for `n <= r`.
fn mixed_series<F: Field>(
    field: &F,
    mono: &[i64],
    b: i128,
    r: usize,
    tables: &SeriesTables,
    falling: &[F::Elem],
) -> Vec<FreePoly<F>> {
    let power = |k: usize| mono.iter().map(|&v| v * k as i64).collect::<Vec<i64>>();
    let mut out = Vec::with_capacity(r + 1);
    for (n, fall) in falling.iter().enumerate().take(r + 1) {
        let scale = field.mul(&pow_i128(field, b, n), fall);
        let mut p = FreePoly::zero();
        if !field.is_zero(&scale) {
            for i in 0..=n {
                let s = tables.stirling2(n, i);
                if s.is_zero() {
                    continue;
                }
                let lead = s * tables.factorial(i);
                for l in 0..=(r - i) {
                    let mut c = &lead * tables.binomial(r - i, l);
                    if l % 2 == 1 {
                        c = -c;
                    }
                    p.add_term(field, power(i + l), field.mul(&field.from_int(&c), &scale));
                }
            }
        }
        out.push(p);
    }
    out
}

fn mul_scalar_series<F: Field>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let r = a.len();
    (0..r)
        .map(|n| {
            let mut s = field.zero();
            for i in 0..=n {
                s = field.add(&s, &field.mul(&a[i], &b[n - i]));
            }
            s
        })
        .collect()
}

fn mul_poly_series<F: Field>(field: &F, a: &[FreePoly<F>], b: &[FreePoly<F>]) -> Vec<FreePoly<F>> {
    let r = a.len();
    (0..r)
        .map(|n| {
            let mut s = FreePoly::zero();
            for i in 0..=n {
                if !a[i].is_zero() && !b[n - i].is_zero() {
                    s.add_assign(field, &a[i].mul(field, &b[n - i]));
                }
            }
            s
        })
        .collect()
}

fn mul_count(a: &[u128], nonzero: &[bool]) -> Vec<u128> {
    (0..a.len()).map(|n| (0..=n).filter(|&i| nonzero[n - i]).map(|i| a[i]).sum()).collect()
}

/// `C(d+1, ceil(d/2))`, the largest possible summand count for `d` factors.
pub fn summand_bound(d: usize) -> u128 {
    let k = d.div_ceil(2);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (d + 1 - i) as u128 / (i + 1) as u128;
    }
    c
}
