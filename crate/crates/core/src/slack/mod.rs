//! Removing slack variables from a ct-free term sum.
//!
//! Slacks are first collapsed onto a single variable `t` via
//! `z_i -> t^{lambda_i}`, then `t = e^s` and the coefficient of `s^0` is
//! read off truncated series (see [`series`]). Everything downstream of the
//! substitution is generic over [`Field`], so the same code runs over the
//! rationals and modulo a prime.

pub mod crt;
pub mod lambda;
pub mod ratfunc;
pub mod series;
pub mod tables;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rationals};
use crate::term::TermSum;
use crate::vars::Role;

pub use crt::{crt_combine, Reconstruction};
pub use lambda::{pick_lambda, pure_factors, LambdaStrategy, LambdaVector};
pub use ratfunc::{ProductForm, RationalFunction};
pub use series::{ct_s_term, substitute_slack, summand_bound, FreePoly, SimpleFraction, SlackTerm};
pub use tables::SeriesTables;

static CT_S_CALLS: AtomicU64 = AtomicU64::new(0);
static BOUND_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide `(invocations, bound violations)` of the per-term summand
/// bound, for auditing whole test runs.
pub fn summand_audit() -> (u64, u64) {
    (CT_S_CALLS.load(Ordering::Relaxed), BOUND_VIOLATIONS.load(Ordering::Relaxed))
}

/// `ct_s_term` plus the bookkeeping behind [`summand_audit`].
pub fn ct_s_term_audited<F: Field>(
    field: &F,
    term: &SlackTerm,
    tables: &SeriesTables,
) -> Result<(SimpleFraction<F>, u64)> {
    let out = ct_s_term(field, term, tables)?;
    CT_S_CALLS.fetch_add(1, Ordering::Relaxed);
    if out.1 as u128 > summand_bound(term.factors.len()) {
        BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    Ok(out)
}

/// `q^shift * sum numerator[i] q^i / prod_k (1 - q^k)^{e_k}` over `F`.
#[derive(Clone, PartialEq)]
pub struct UniFraction<F: Field> {
    pub shift: i64,
    pub numerator: Vec<F::Elem>,
    pub denominator: BTreeMap<u64, u32>,
}

impl<F: Field> std::fmt::Debug for UniFraction<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q^{} {:?} / {:?}", self.shift, self.numerator, self.denominator)
    }
}

impl<F: Field> UniFraction<F> {
    fn zero() -> Self {
        UniFraction { shift: 0, numerator: Vec::new(), denominator: BTreeMap::new() }
    }

    /// Multiplies the numerator by `(1 - q^k)^e`.
    fn mul_factor(&mut self, field: &F, k: u64, e: u32) {
        let k = k as usize;
        for _ in 0..e {
            let n = self.numerator.len();
            self.numerator.resize(n + k, field.zero());
            for i in (k..n + k).rev() {
                let v = field.sub(&self.numerator[i], &self.numerator[i - k]);
                self.numerator[i] = v;
            }
        }
    }

    /// Raises the denominator to `target` (which must dominate it).
    fn lift_to(&mut self, field: &F, target: &BTreeMap<u64, u32>) {
        for (&k, &e) in target {
            let have = self.denominator.get(&k).copied().unwrap_or(0);
            if e > have {
                self.mul_factor(field, k, e - have);
            }
        }
        self.denominator = target.clone();
    }

    fn add_assign(&mut self, field: &F, other: &Self) {
        if other.numerator.is_empty() {
            return;
        }
        if self.numerator.is_empty() {
            self.shift = other.shift;
        }
        let lo = self.shift.min(other.shift);
        let pad = (self.shift - lo) as usize;
        if pad > 0 {
            let mut v = vec![field.zero(); pad];
            v.append(&mut self.numerator);
            self.numerator = v;
            self.shift = lo;
        }
        let off = (other.shift - lo) as usize;
        if self.numerator.len() < off + other.numerator.len() {
            self.numerator.resize(off + other.numerator.len(), field.zero());
        }
        for (i, c) in other.numerator.iter().enumerate() {
            field.add_assign(&mut self.numerator[off + i], c);
        }
    }

    fn trim(&mut self, field: &F) {
        while self.numerator.last().is_some_and(|c| field.is_zero(c)) {
            self.numerator.pop();
        }
        let lead = self.numerator.iter().take_while(|c| field.is_zero(c)).count();
        self.numerator.drain(..lead);
        self.shift += lead as i64;
        if self.numerator.is_empty() {
            self.shift = 0;
        }
    }

    /// Coefficient of `q^e` in the numerator.
    pub fn coeff(&self, field: &F, e: i64) -> F::Elem {
        let i = e - self.shift;
        if i < 0 {
            return field.zero();
        }
        self.numerator.get(i as usize).cloned().unwrap_or(field.zero())
    }
}

impl UniFraction<Rationals> {
    pub fn to_rational_function(&self) -> Result<RationalFunction> {
        RationalFunction::from_parts(self.shift, self.numerator.clone(), &self.denominator)
    }
}

/// Result of slack elimination, shaped by the number of free variables.
#[derive(Clone, PartialEq)]
pub enum SlackValue<F: Field> {
    Scalar(F::Elem),
    Univariate(UniFraction<F>),
    Multivariate(Vec<SimpleFraction<F>>),
}

impl<F: Field> std::fmt::Debug for SlackValue<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlackValue::Scalar(v) => write!(f, "Scalar({v:?})"),
            SlackValue::Univariate(u) => write!(f, "Univariate({u:?})"),
            SlackValue::Multivariate(v) => write!(f, "Multivariate({v:?})"),
        }
    }
}

impl<F: Field> SlackValue<F> {
    /// The zero value shaped for `nfree` free variables.
    pub fn zero(field: &F, nfree: usize) -> Self {
        match nfree {
            0 => SlackValue::Scalar(field.zero()),
            1 => SlackValue::Univariate(UniFraction::zero()),
            _ => SlackValue::Multivariate(Vec::new()),
        }
    }

    /// Sum of two partial results of the same shape.
    pub fn add(self, field: &F, other: Self) -> Result<Self> {
        Ok(match (self, other) {
            (SlackValue::Scalar(a), SlackValue::Scalar(b)) => SlackValue::Scalar(field.add(&a, &b)),
            (SlackValue::Univariate(mut a), SlackValue::Univariate(mut b)) => {
                let mut common = a.denominator.clone();
                for (&k, &e) in &b.denominator {
                    let c = common.entry(k).or_insert(0);
                    *c = (*c).max(e);
                }
                a.lift_to(field, &common);
                b.lift_to(field, &common);
                a.add_assign(field, &b);
                a.trim(field);
                SlackValue::Univariate(a)
            }
            (SlackValue::Multivariate(a), SlackValue::Multivariate(b)) => {
                SlackValue::Multivariate(group_fractions(field, a.into_iter().chain(b)))
            }
            _ => return Err(Error::Invalid("partial results have different shapes".into())),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackStats {
    pub terms: usize,
    pub summands: u128,
    pub max_summands: u64,
    pub bound_violations: usize,
}

impl SlackStats {
    /// Totals over two disjoint parts of a sum.
    pub fn merge(&mut self, other: &SlackStats) {
        self.terms += other.terms;
        self.summands += other.summands;
        self.max_summands = self.max_summands.max(other.max_summands);
        self.bound_violations += other.bound_violations;
    }
}

/// Slack elimination for one term sum with a fixed `lambda`.
pub fn eliminate_slack<F: Field>(
    field: &F,
    ts: &TermSum,
    lambda: &LambdaVector,
) -> Result<(SlackValue<F>, SlackStats)> {
    let table = &ts.table;
    let nfree = table.ids_with_role(Role::Free).len();
    let layout = series::SlackLayout::new(table);
    let tables = SeriesTables::new(ts.max_factors());
    let parts: Vec<(SimpleFraction<F>, u64, usize)> = ts
        .terms
        .par_iter()
        .map(|t| {
            let st = series::substitute_with(t, table, &layout, lambda)?;
            let (frac, count) = ct_s_term_audited(field, &st, &tables)?;
            Ok((frac, count, st.factors.len()))
        })
        .collect::<Result<_>>()?;
    let mut stats = SlackStats { terms: parts.len(), ..Default::default() };
    for (_, count, d) in &parts {
        stats.summands += *count as u128;
        stats.max_summands = stats.max_summands.max(*count);
        if *count as u128 > summand_bound(*d) {
            stats.bound_violations += 1;
        }
    }
    let fracs = group_fractions(field, parts.into_iter().map(|(f, _, _)| f));
    let value = match nfree {
        0 => {
            let mut acc = field.zero();
            for f in &fracs {
                field.add_assign(&mut acc, &f.numerator.scalar(field));
            }
            SlackValue::Scalar(acc)
        }
        1 => SlackValue::Univariate(to_univariate(field, &fracs)?),
        _ => SlackValue::Multivariate(fracs),
    };
    Ok((value, stats))
}

type Denominator = Vec<(Vec<i64>, u32)>;

/// Sums fractions that share a denominator, in a fixed order.
fn group_fractions<F: Field>(field: &F, fracs: impl Iterator<Item = SimpleFraction<F>>) -> Vec<SimpleFraction<F>> {
    let mut groups: HashMap<Denominator, Vec<FreePoly<F>>> = HashMap::new();
    for f in fracs {
        groups.entry(f.denominator).or_default().push(f.numerator);
    }
    let mut order: Vec<_> = groups.into_iter().collect();
    order.sort_by(|a, b| a.0.cmp(&b.0));
    order
        .into_iter()
        .filter_map(|(d, ns)| {
            let n = pairwise_sum(field, ns);
            (!n.is_zero()).then_some(SimpleFraction { numerator: n, denominator: d })
        })
        .collect()
}

/// Balanced summation. Exact partial sums carry the lcm of their
/// denominators, so adding one at a time to a growing total is quadratic.
fn pairwise_sum<F: Field>(field: &F, mut items: Vec<FreePoly<F>>) -> FreePoly<F> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.add_assign(field, &b);
            }
            next.push(a);
        }
        items = next;
    }
    items.pop().unwrap_or_else(FreePoly::zero)
}

fn to_univariate<F: Field>(field: &F, fracs: &[SimpleFraction<F>]) -> Result<UniFraction<F>> {
    let mut common: BTreeMap<u64, u32> = BTreeMap::new();
    let mut parts = Vec::with_capacity(fracs.len());
    for f in fracs {
        let mut den = BTreeMap::new();
        for (m, e) in &f.denominator {
            let k = u64::try_from(m[0]).map_err(|_| Error::Invalid("factor not oriented small".into()))?;
            *den.entry(k).or_insert(0) += e;
        }
        for (&k, &e) in &den {
            let c = common.entry(k).or_insert(0);
            *c = (*c).max(e);
        }
        let lo = f.numerator.terms.keys().map(|e| e[0]).min().unwrap_or(0);
        let hi = f.numerator.terms.keys().map(|e| e[0]).max().unwrap_or(0);
        let mut numerator = vec![field.zero(); (hi - lo + 1) as usize];
        for (e, c) in &f.numerator.terms {
            numerator[(e[0] - lo) as usize] = c.clone();
        }
        parts.push(UniFraction { shift: lo, numerator, denominator: den });
    }
    let mut acc = UniFraction { denominator: common.clone(), ..UniFraction::zero() };
    for mut p in parts {
        p.lift_to(field, &common);
        acc.add_assign(field, &p);
    }
    acc.trim(field);
    Ok(acc)
}

/// Exact value of a slack-free result.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactValue {
    Scalar(BigRational),
    Univariate(RationalFunction),
    Multivariate(Vec<SimpleFraction<Rationals>>),
}

impl ExactValue {
    pub fn from_slack(v: SlackValue<Rationals>) -> Result<Self> {
        Ok(match v {
            SlackValue::Scalar(s) => ExactValue::Scalar(s),
            SlackValue::Univariate(u) => ExactValue::Univariate(u.to_rational_function()?),
            SlackValue::Multivariate(m) => ExactValue::Multivariate(m),
        })
    }
}

/// Reconstructs the integer scalar from per-prime results.
pub fn crt_scalar(parts: &[(u64, u64)]) -> Result<Reconstruction> {
    crt_combine(parts)
}

/// Reconstructs a univariate result from per-prime fractions. Numerator
/// coefficients are combined by CRT over a common denominator and then
/// reduced exactly; the confidence is the worst over all coefficients.
pub fn crt_univariate(parts: &[(UniFraction<PrimeField>, PrimeField)]) -> Result<(RationalFunction, f64)> {
    let mut common: BTreeMap<u64, u32> = BTreeMap::new();
    for (u, _) in parts {
        for (&k, &e) in &u.denominator {
            let c = common.entry(k).or_insert(0);
            *c = (*c).max(e);
        }
    }
    let lifted: Vec<(UniFraction<PrimeField>, &PrimeField)> = parts
        .iter()
        .map(|(u, f)| {
            let mut u = u.clone();
            if !u.numerator.is_empty() {
                u.lift_to(f, &common);
            }
            u.denominator = common.clone();
            (u, f)
        })
        .collect();
    let nonempty = lifted.iter().filter(|(u, _)| !u.numerator.is_empty());
    let lo = nonempty.clone().map(|(u, _)| u.shift).min().unwrap_or(0);
    let hi = nonempty.map(|(u, _)| u.shift + u.numerator.len() as i64 - 1).max().unwrap_or(-1);
    let mut numerator = Vec::new();
    let mut worst = 0.0f64;
    for e in lo..=hi {
        let residues: Vec<(u64, u64)> = lifted.iter().map(|(u, f)| (u.coeff(f, e), f.modulus())).collect();
        let r = crt_combine(&residues)?;
        worst = worst.max(r.confidence_ratio);
        numerator.push(BigRational::from_integer(r.value));
    }
    Ok((RationalFunction::from_parts(lo, numerator, &common)?, worst))
}

/// Integer value of an exact scalar, if it is one.
pub fn as_integer(v: &BigRational) -> Option<BigInt> {
    v.is_integer().then(|| v.to_integer())
}
