//! Constant-term extraction, one variable at a time.
//!
//! `CT_x` of a term is split into contributions `<E, 1 - u x^a|_x` of single
//! denominator factors. Contributions of linear factors are a substitution;
//! nonlinear ones are reduced by the signed remainder until only linear
//! factors remain, much like Euclid's algorithm on the exponents.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::{Exponents, Verdict};
use crate::poly::{rem, srem, LinearFactorView};
use crate::term::{collect_vec, extend_with_slacks, ElliottTerm, Poly, TermSum};
use crate::vars::{Role, VarId, VariableTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contribution {
    Contributing,
    DuallyContributing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    #[default]
    Given,
    SparseFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlackPolicy {
    #[default]
    Eager,
    Delayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub order: OrderPolicy,
    pub slack: SlackPolicy,
    /// Map over terms with rayon; results are identical either way.
    pub parallel: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { order: OrderPolicy::Given, slack: SlackPolicy::Eager, parallel: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarStats {
    pub var: String,
    pub raw_terms: u64,
    pub collected_terms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    /// Terms produced before merging, summed over all eliminated variables.
    pub raw_terms: u64,
    /// Terms left after merging, summed over all eliminated variables.
    pub collected_terms: u64,
    /// Calls of the single-factor recursion.
    pub recursion_nodes: u64,
    /// Terms restarted with slack variables (delayed mode).
    pub restarts: u64,
    pub per_var: Vec<VarStats>,
}

/// Terms that hit a collision and were restarted; kept for the
/// bad-factor log.
#[derive(Debug, Clone)]
pub struct CtOutcome {
    pub sum: TermSum,
    pub stats: EngineStats,
    pub collided: Vec<ElliottTerm>,
}

fn collision(table: &VariableTable, x: VarId) -> Error {
    Error::Collision { var: table.name(x).to_string() }
}

/// Rewrites factors with negative `x` exponent as
/// `1/(1 - u x^{-a}) = -u^{-1} x^a / (1 - u^{-1} x^a)`.
pub fn normalize_for_var(t: &ElliottTerm, x: VarId) -> Result<ElliottTerm> {
    let mut numerator = t.numerator.clone();
    let mut denominator = Vec::with_capacity(t.denominator.len());
    for f in &t.denominator {
        if f.get(x) < 0 {
            let inv = f.inv()?;
            numerator = numerator.mul_monomial(&-BigInt::one(), &inv)?;
            denominator.push(inv);
        } else {
            denominator.push(f.clone());
        }
    }
    Ok(ElliottTerm::new(numerator, denominator))
}

/// For a factor `1 - u x^a` with `a > 0`.
pub fn classify_factor(f: &Exponents) -> Contribution {
    match f.compare_to_one() {
        Verdict::Small => Contribution::Contributing,
        _ => Contribution::DuallyContributing,
    }
}

struct Walk<'a> {
    table: &'a VariableTable,
    x: VarId,
    nodes: u64,
}

/// `<t, 1 - u x|_x`: drop the factor and substitute `x = 1/u`.
pub fn linear_contribution(t: &ElliottTerm, pivot: usize, x: VarId, table: &VariableTable) -> Result<ElliottTerm> {
    linear(&t.numerator, &t.denominator, pivot, &Walk { table, x, nodes: 0 })
}

fn linear(num: &Poly, factors: &[Exponents], pivot: usize, w: &Walk<'_>) -> Result<ElliottTerm> {
    let x = w.x;
    debug_assert_eq!(factors[pivot].get(x), 1);
    let sub = factors[pivot].without(x).inv()?;
    let numerator = num.substitute(x, &sub)?;
    let mut denominator = Vec::with_capacity(factors.len() - 1);
    for (i, f) in factors.iter().enumerate() {
        if i == pivot {
            continue;
        }
        let g = f.without(x).mul_pow(&sub, f.get(x))?;
        if g.is_one() {
            return Err(collision(w.table, x));
        }
        denominator.push(g);
    }
    Ok(ElliottTerm::new(numerator, denominator))
}

/// `<t, f|_x` for any factor `f = 1 - u x^a` (`a >= 1`) of `t`; every factor
/// of `t` mentioning `x` must have positive `x` exponent. Returns terms free
/// of `x` whose sum is the contribution.
pub fn euclid_contribution(t: &ElliottTerm, pivot: usize, x: VarId, table: &VariableTable) -> Result<Vec<ElliottTerm>> {
    let mut w = Walk { table, x, nodes: 0 };
    euclid(&t.numerator, &t.denominator, pivot, &mut w)
}

fn euclid(num: &Poly, factors: &[Exponents], pivot: usize, w: &mut Walk<'_>) -> Result<Vec<ElliottTerm>> {
    w.nodes += 1;
    let x = w.x;
    let a = factors[pivot].get(x);
    debug_assert!(a >= 1);
    if a == 1 {
        return Ok(vec![linear(num, factors, pivot, w)?]);
    }
    let u = factors[pivot].without(x);
    let view = LinearFactorView { u: &u, a };

    // Reduce every other factor modulo 1 - u x^a, bringing its x exponent
    // into [0, a/2] and moving units into the numerator.
    let mut num = num.clone();
    let mut reduced = Vec::with_capacity(factors.len());
    let mut any_positive = false;
    for (i, f) in factors.iter().enumerate() {
        if i == pivot {
            continue;
        }
        if f.get(x) == 0 {
            reduced.push(f.clone());
            continue;
        }
        let g = srem(f, view, x)?;
        let r = g.get(x);
        if r < 0 {
            let inv = g.inv()?;
            num = num.mul_monomial(&-BigInt::one(), &inv)?;
            reduced.push(inv);
            any_positive = true;
        } else if r == 0 {
            if g.is_one() {
                return Err(collision(w.table, x));
            }
            reduced.push(g);
        } else {
            reduced.push(g);
            any_positive = true;
        }
    }

    if !any_positive {
        // Only x^{la} monomials survive at x = 0 after taking rem.
        let mut out = Poly::zero();
        for (e, c) in num.iter() {
            if e.get(x).rem_euclid(a) == 0 {
                out.add_term(rem(e, view, x)?, c.clone());
            }
        }
        if out.is_zero() {
            return Ok(Vec::new());
        }
        return Ok(vec![ElliottTerm::new(out, reduced)]);
    }

    // Numerator x * rem(x^{-1} L): x exponents in [1, a], so the new term
    // is proper and vanishes at x = 0; its pivot contribution is minus the
    // sum of the others.
    let mut shifted = Poly::zero();
    for (e, c) in num.iter() {
        let mut m = e.clone();
        m.set(x, e.get(x) - 1);
        let mut r = rem(&m, view, x)?;
        r.set(x, r.get(x) + 1);
        shifted.add_term(r, c.clone());
    }
    if shifted.is_zero() {
        return Ok(Vec::new());
    }
    let mut next = reduced;
    next.push(factors[pivot].clone());
    let mut out = Vec::new();
    for i in 0..next.len() - 1 {
        if next[i].get(x) > 0 {
            for t in euclid(&shifted, &next, i, w)? {
                out.push(ElliottTerm::new(t.numerator.neg(), t.denominator));
            }
        }
    }
    Ok(out)
}

/// `CT_x t`: contributing factors take the nonpositive part of the
/// numerator, dually contributing factors take minus the positive part.
/// The result is free of `x` but not yet oriented or merged.
pub fn ct_var(t: &ElliottTerm, x: VarId, table: &VariableTable) -> Result<Vec<ElliottTerm>> {
    let mut w = Walk { table, x, nodes: 0 };
    ct_var_walk(t, &mut w)
}

fn ct_var_walk(t: &ElliottTerm, w: &mut Walk<'_>) -> Result<Vec<ElliottTerm>> {
    let x = w.x;
    let t = normalize_for_var(t, x)?;
    let pivots: Vec<usize> = (0..t.denominator.len()).filter(|&i| t.denominator[i].get(x) > 0).collect();
    if pivots.is_empty() {
        let n = t.numerator.x_constant_part(x);
        return Ok(if n.is_zero() { Vec::new() } else { vec![ElliottTerm::new(n, t.denominator)] });
    }
    let (positive, rest) = t.numerator.split_by_sign(x);
    let mut out = Vec::new();
    for i in pivots {
        match classify_factor(&t.denominator[i]) {
            Contribution::Contributing => {
                if !rest.is_zero() {
                    out.extend(euclid(&rest, &t.denominator, i, w)?);
                }
            }
            Contribution::DuallyContributing => {
                if !positive.is_zero() {
                    for r in euclid(&positive, &t.denominator, i, w)? {
                        out.push(ElliottTerm::new(r.numerator.neg(), r.denominator));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `CT_x` of a proper term: sum of the
/// contributions of the small factors over the whole numerator. Valid when
/// `t` is proper in `x`.
pub fn ct_var_proper(t: &ElliottTerm, x: VarId, table: &VariableTable) -> Result<Vec<ElliottTerm>> {
    let t = normalize_for_var(t, x)?;
    let mut w = Walk { table, x, nodes: 0 };
    let mut out = Vec::new();
    for i in 0..t.denominator.len() {
        if t.denominator[i].get(x) > 0 && classify_factor(&t.denominator[i]) == Contribution::Contributing {
            out.extend(euclid(&t.numerator, &t.denominator, i, &mut w)?);
        }
    }
    Ok(out)
}

/// `CT_x` through the dual formula: `t|_{x=0}` minus the contributions of
/// the large factors. Valid when `t` has no pole at `x = 0`.
pub fn ct_var_dual(t: &ElliottTerm, x: VarId, table: &VariableTable) -> Result<Vec<ElliottTerm>> {
    let t = normalize_for_var(t, x)?;
    if t.numerator.iter().any(|(e, _)| e.get(x) < 0) {
        return Err(Error::Invalid("term has a pole at x = 0".into()));
    }
    let mut w = Walk { table, x, nodes: 0 };
    let at_zero: Vec<Exponents> = t.denominator.iter().filter(|f| f.get(x) == 0).cloned().collect();
    let mut out = vec![ElliottTerm::new(t.numerator.x_constant_part(x), at_zero)];
    for i in 0..t.denominator.len() {
        if t.denominator[i].get(x) > 0 && classify_factor(&t.denominator[i]) == Contribution::DuallyContributing {
            for r in euclid(&t.numerator, &t.denominator, i, &mut w)? {
                out.push(ElliottTerm::new(r.numerator.neg(), r.denominator));
            }
        }
    }
    out.retain(|t| !t.is_zero());
    Ok(out)
}

/// Eliminates `ct_vars` one after another, merging terms after each step.
///
/// In delayed-slack mode the input is processed without slack variables and
/// any term that hits a collision is retried with fresh slack variables on
/// its factors; the variable table then gains a slack pool.
pub fn ct_all(ts: TermSum, ct_vars: &[VarId], opts: EngineOptions) -> Result<CtOutcome> {
    for &v in ct_vars {
        if ts.table.role(v) != Role::Ct {
            return Err(Error::Invalid(format!("`{}` is not a ct variable", ts.table.name(v))));
        }
    }
    let (ts, mut remaining, pool) = match opts.slack {
        SlackPolicy::Eager => (ts, ct_vars.to_vec(), Vec::new()),
        SlackPolicy::Delayed => {
            let count = ts.max_factors();
            let (table, remap, pool) = extend_with_slacks(&ts.table, count)?;
            let shift = |v: VarId| if v >= pool.first().copied().unwrap_or(usize::MAX) { v + count } else { v };
            let terms = ts
                .terms
                .iter()
                .map(|t| {
                    let t = ElliottTerm::new(
                        t.numerator.try_map_exponents(|e| Ok(remap(e)))?,
                        t.denominator.iter().map(&remap).collect(),
                    );
                    // a large input factor would be re-expanded the other way
                    // round without its slack, so such terms get slacks now
                    if t.denominator.iter().all(|f| f.compare_to_one() == Verdict::Small) {
                        Ok(t)
                    } else {
                        slack_term(&t, &pool)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let vars = ct_vars.iter().map(|&v| shift(v)).collect();
            (TermSum::new(Arc::new(table), terms), vars, pool)
        }
    };

    let table = ts.table.clone();
    let mut terms = collect_vec(ts.terms, "input")?;
    let mut stats = EngineStats::default();
    let mut collided = Vec::new();

    while !remaining.is_empty() {
        let pick = match opts.order {
            OrderPolicy::Given => 0,
            OrderPolicy::SparseFirst => sparsest(&terms, &remaining),
        };
        let x = remaining.remove(pick);
        let step = |t: &ElliottTerm| -> Result<(Vec<ElliottTerm>, u64, Option<ElliottTerm>)> {
            let mut w = Walk { table: &table, x, nodes: 0 };
            match ct_var_walk(t, &mut w) {
                Ok(v) => Ok((v, w.nodes, None)),
                Err(Error::Collision { .. }) if opts.slack == SlackPolicy::Delayed && !has_slack(t, &pool) => {
                    let slacked = slack_term(t, &pool)?;
                    let mut w2 = Walk { table: &table, x, nodes: w.nodes };
                    let v = ct_var_walk(&slacked, &mut w2)?;
                    Ok((v, w2.nodes, Some(t.clone())))
                }
                Err(e) => Err(e),
            }
        };
        let results: Vec<Result<_>> = if opts.parallel && terms.len() > 16 {
            terms.par_iter().map(step).collect()
        } else {
            terms.iter().map(step).collect()
        };
        let mut produced = Vec::new();
        for r in results {
            let (v, nodes, bad) = r?;
            stats.recursion_nodes += nodes;
            if let Some(b) = bad {
                stats.restarts += 1;
                collided.push(b);
            }
            produced.extend(v);
        }
        let raw = produced.len() as u64;
        terms = collect_vec(produced, table.name(x))?;
        stats.raw_terms += raw;
        stats.collected_terms += terms.len() as u64;
        stats.per_var.push(VarStats {
            var: table.name(x).to_string(),
            raw_terms: raw,
            collected_terms: terms.len() as u64,
        });
    }
    Ok(CtOutcome { sum: TermSum::new(table, terms), stats, collided })
}

fn sparsest(terms: &[ElliottTerm], remaining: &[VarId]) -> usize {
    let mut best = 0;
    let mut best_count = usize::MAX;
    for (i, &v) in remaining.iter().enumerate() {
        let count: usize = terms.iter().map(|t| t.denominator.iter().filter(|f| f.mentions(v)).count()).sum();
        if count < best_count {
            best = i;
            best_count = count;
        }
    }
    best
}

fn has_slack(t: &ElliottTerm, pool: &[VarId]) -> bool {
    t.denominator.iter().any(|f| pool.iter().any(|&z| f.mentions(z)))
}

fn slack_term(t: &ElliottTerm, pool: &[VarId]) -> Result<ElliottTerm> {
    if t.denominator.len() > pool.len() {
        return Err(Error::Invalid("slack pool too small".into()));
    }
    let denominator = t
        .denominator
        .iter()
        .zip(pool)
        .map(|(f, &z)| {
            let mut g = f.clone();
            g.set(z, g.get(z) + 1);
            g
        })
        .collect();
    Ok(ElliottTerm::new(t.numerator.clone(), denominator))
}
