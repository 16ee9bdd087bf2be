//! The full three-stage computation: slack insertion, constant-term
//! elimination, slack elimination, in exact or multi-prime arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::engine::{ct_all, CtOutcome, EngineOptions, EngineStats, SlackPolicy};
use crate::error::{Error, Result};
use crate::field::{PrimeField, Rationals};
use crate::monomial::Exponents;
use crate::slack::{
    crt_combine, crt_univariate, eliminate_slack, lambda, ExactValue, LambdaStrategy, LambdaVector, RationalFunction,
    SlackStats, SlackValue,
};
use crate::term::{add_slack, add_slack_where, TermSum};
use crate::vars::{Role, VarId};

/// Which denominator factors receive a slack variable in eager mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlackScope {
    /// Every factor.
    #[default]
    All,
    /// Only factors free of free variables; a free variable already keeps
    /// its factor apart from the others.
    WithoutFree,
}

/// A constant-term problem before slack insertion.
#[derive(Debug, Clone)]
pub struct CtProblem {
    pub sum: TermSum,
    pub ct_vars: Vec<VarId>,
    pub scope: SlackScope,
    /// The input was multiplied by this integer to clear coefficient
    /// denominators; results are divided by it.
    pub scale: BigInt,
}

impl CtProblem {
    pub fn new(sum: TermSum, scope: SlackScope) -> Self {
        let ct_vars = sum.table.ids_with_role(Role::Ct);
        CtProblem { sum, ct_vars, scope, scale: BigInt::one() }
    }
}

/// The three 61-bit primes used when none are given.
pub const DEFAULT_PRIMES: [u64; 3] = [2305843009213693951, 2305843009213693921, 2305843009213693907];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    Exact,
    /// Slack elimination modulo each prime; with `crt` the residues are
    /// combined into an integer result.
    Modular {
        primes: Vec<u64>,
        crt: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub engine: EngineOptions,
    pub seed: u64,
    pub strategy: LambdaStrategy,
    pub arithmetic: Arithmetic,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            engine: EngineOptions::default(),
            seed: 0,
            strategy: LambdaStrategy::Random,
            arithmetic: Arithmetic::Exact,
        }
    }
}

impl PipelineOptions {
    pub fn primes(&self) -> &[u64] {
        match &self.arithmetic {
            Arithmetic::Exact => &[],
            Arithmetic::Modular { primes, .. } => primes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let primes = self.primes();
        for (i, &p) in primes.iter().enumerate() {
            PrimeField::new(p)?;
            if primes[..i].contains(&p) {
                return Err(Error::Invalid(format!("prime {p} given twice")));
            }
        }
        if matches!(self.arithmetic, Arithmetic::Modular { .. }) && primes.is_empty() {
            return Err(Error::Invalid("modular arithmetic needs at least one prime".into()));
        }
        Ok(())
    }
}

/// A per-prime result that was not combined.
#[derive(Debug, Clone, PartialEq)]
pub enum Residue {
    Scalar(u64),
    Univariate(crate::slack::UniFraction<PrimeField>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(ExactValue),
    /// Exact value recovered by CRT, with the worst `|value| / P` ratio.
    Reconstructed {
        value: ExactValue,
        confidence: f64,
    },
    Residues(Vec<(u64, Residue)>),
}

impl Value {
    /// The exact value, when there is one.
    pub fn exact(&self) -> Option<&ExactValue> {
        match self {
            Value::Exact(v) | Value::Reconstructed { value: v, .. } => Some(v),
            Value::Residues(_) => None,
        }
    }

    /// The exact scalar as an integer.
    pub fn integer(&self) -> Result<BigInt> {
        match self.exact() {
            Some(ExactValue::Scalar(q)) if q.is_integer() => Ok(q.to_integer()),
            Some(ExactValue::Scalar(q)) => Err(Error::NotIntegral(q.to_string())),
            _ => Err(Error::Invalid("result is not an exact scalar".into())),
        }
    }

    pub fn rational_function(&self) -> Result<&RationalFunction> {
        match self.exact() {
            Some(ExactValue::Univariate(r)) => Ok(r),
            _ => Err(Error::Invalid("result is not a univariate rational function".into())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub lambda: Vec<i64>,
    pub stats: SlackStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub value: Value,
    pub ct_stats: EngineStats,
    pub slack: SlackReport,
    /// Terms left after constant-term elimination.
    pub terms: usize,
}

/// Slack insertion (eager mode only; delayed mode adds slacks on demand).
pub fn prepare(problem: &CtProblem, engine: &EngineOptions) -> Result<(TermSum, Vec<VarId>)> {
    if engine.slack == SlackPolicy::Delayed {
        return Ok((problem.sum.clone(), problem.ct_vars.clone()));
    }
    let free = problem.sum.table.ids_with_role(Role::Free);
    let slacked = match problem.scope {
        SlackScope::All => add_slack(&problem.sum)?,
        SlackScope::WithoutFree => add_slack_where(&problem.sum, |f: &Exponents| free.iter().all(|&v| f.get(v) == 0))?,
    };
    // slack insertion shifts ct variables right by the number of new slacks
    let shift = slacked.table.len() - problem.sum.table.len();
    let ct_vars = problem.ct_vars.iter().map(|&v| v + shift).collect();
    Ok((slacked, ct_vars))
}

/// Stages one and two.
pub fn run_ct(problem: &CtProblem, opts: &PipelineOptions) -> Result<CtOutcome> {
    let (ts, ct_vars) = prepare(problem, &opts.engine)?;
    ct_all(ts, &ct_vars, opts.engine)
}

/// A `lambda` valid for every term over the rationals and every prime.
pub fn choose_lambda<'a>(
    table: &crate::vars::VariableTable,
    terms: impl IntoIterator<Item = &'a crate::term::ElliottTerm>,
    opts: &PipelineOptions,
) -> Result<LambdaVector> {
    let pure = lambda::pure_factors(table, terms);
    let nslack = table.ids_with_role(Role::Slack).len();
    pick_for_primes(nslack, &pure, opts)
}

fn pick_for_primes(nslack: usize, pure: &[Vec<i64>], opts: &PipelineOptions) -> Result<LambdaVector> {
    let primes = opts.primes();
    // try successive seeds until one candidate avoids every prime
    let mut last_err = None;
    for round in 0..8u64 {
        let seed = opts.seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match lambda::pick_lambda(nslack, pure, opts.strategy, seed, None) {
            Ok(l) if primes.iter().all(|&p| lambda::violations(&l.0, pure, Some(p)) == 0) => return Ok(l),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
        if opts.strategy == LambdaStrategy::MomentCurve && primes.is_empty() {
            break;
        }
    }
    if let Some(&p) = primes.first() {
        // the moment curve and random candidates all clash with some prime
        return match last_err {
            Some(e) => Err(e),
            None => lambda::pick_lambda(nslack, pure, opts.strategy, opts.seed, Some(p)),
        };
    }
    Err(last_err.unwrap_or(Error::LambdaExhausted { attempts: 0, violations: pure.len() }))
}

/// Stage three for a slack-only term sum.
pub fn finish(ts: &TermSum, opts: &PipelineOptions, scale: &BigInt) -> Result<(Value, SlackReport)> {
    let lambda = choose_lambda(&ts.table, &ts.terms, opts)?;
    finish_with(ts, &lambda, opts, scale)
}

pub fn finish_with(
    ts: &TermSum,
    lambda: &LambdaVector,
    opts: &PipelineOptions,
    scale: &BigInt,
) -> Result<(Value, SlackReport)> {
    opts.validate()?;
    match &opts.arithmetic {
        Arithmetic::Exact => {
            let (v, stats) = eliminate_slack(&Rationals, ts, lambda)?;
            let value = Value::Exact(unscale(ExactValue::from_slack(v)?, scale)?);
            Ok((value, SlackReport { lambda: lambda.0.clone(), stats }))
        }
        Arithmetic::Modular { primes, crt } => {
            let mut parts = Vec::with_capacity(primes.len());
            let mut stats = SlackStats::default();
            for &p in primes {
                let field = PrimeField::new(p)?;
                let (v, s) = eliminate_slack(&field, ts, lambda)?;
                stats = s;
                parts.push((field, v));
            }
            let value = combine_modular(parts, *crt, scale)?;
            Ok((value, SlackReport { lambda: lambda.0.clone(), stats }))
        }
    }
}

/// Turns per-prime slack values into residues or, with `crt`, an exact value.
pub fn combine_modular(parts: Vec<(PrimeField, SlackValue<PrimeField>)>, crt: bool, scale: &BigInt) -> Result<Value> {
    if !crt {
        let residues = parts
            .into_iter()
            .map(|(f, v)| {
                let r = match v {
                    SlackValue::Scalar(s) => Residue::Scalar(s),
                    SlackValue::Univariate(u) => Residue::Univariate(u),
                    SlackValue::Multivariate(_) => {
                        return Err(Error::Invalid("modular mode supports at most one free variable".into()))
                    }
                };
                Ok((f.modulus(), r))
            })
            .collect::<Result<_>>()?;
        return Ok(Value::Residues(residues));
    }
    let first = parts.first().ok_or_else(|| Error::Invalid("no primes".into()))?;
    match &first.1 {
        SlackValue::Scalar(_) => {
            let residues: Vec<(u64, u64)> = parts
                .iter()
                .map(|(f, v)| match v {
                    SlackValue::Scalar(s) => Ok((*s, f.modulus())),
                    _ => Err(Error::Invalid("mixed result shapes".into())),
                })
                .collect::<Result<_>>()?;
            let r = crt_combine(&residues)?;
            let value = unscale(ExactValue::Scalar(BigRational::from_integer(r.value)), scale)?;
            Ok(Value::Reconstructed { value, confidence: r.confidence_ratio })
        }
        SlackValue::Univariate(_) => {
            let unis = parts
                .into_iter()
                .map(|(f, v)| match v {
                    SlackValue::Univariate(u) => Ok((u, f)),
                    _ => Err(Error::Invalid("mixed result shapes".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            let (rf, confidence) = crt_univariate(&unis)?;
            Ok(Value::Reconstructed { value: unscale(ExactValue::Univariate(rf), scale)?, confidence })
        }
        SlackValue::Multivariate(_) => Err(Error::Invalid("modular mode supports at most one free variable".into())),
    }
}

/// Divides an exact value by the input scale.
pub fn unscale(v: ExactValue, scale: &BigInt) -> Result<ExactValue> {
    if scale.is_one() {
        return Ok(v);
    }
    let s = BigRational::from_integer(scale.clone());
    Ok(match v {
        ExactValue::Scalar(q) => ExactValue::Scalar(q / s),
        ExactValue::Univariate(r) => ExactValue::Univariate(r.scaled(&(BigRational::one() / &s))),
        ExactValue::Multivariate(fs) => ExactValue::Multivariate(
            fs.into_iter()
                .map(|mut f| {
                    let terms = std::mem::take(&mut f.numerator.terms);
                    f.numerator.terms = terms.into_iter().map(|(e, c)| (e, c / &s)).collect();
                    f
                })
                .collect(),
        ),
    })
}

/// All three stages.
pub fn solve(problem: &CtProblem, opts: &PipelineOptions) -> Result<Solution> {
    opts.validate()?;
    let outcome = run_ct(problem, opts)?;
    let terms = outcome.sum.len();
    let (value, slack) = finish(&outcome.sum, opts, &problem.scale)?;
    Ok(Solution { value, ct_stats: outcome.stats, slack, terms })
}

impl ExactValue {
    pub fn is_zero(&self) -> bool {
        match self {
            ExactValue::Scalar(q) => q.is_zero(),
            ExactValue::Univariate(r) => r.is_zero(),
            ExactValue::Multivariate(f) => f.is_empty(),
        }
    }
}
