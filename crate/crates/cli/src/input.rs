//! The raw constant-term file format.
//!
//! ```json
//! {
//!   "variables": [{"name": "q", "role": "free"}, {"name": "x", "role": "ct"}],
//!   "terms": [
//!     {"numerator": [{"coeff": "1/2", "exponents": {"x": -3}}],
//!      "denominator": [{"x": 1}, {"x": 2, "q": 1}]}
//!   ]
//! }
//! ```
//!
//! Each denominator entry is a factor `1 - monomial`. A missing numerator
//! means `1`. Free variables are listed before ct variables in the working
//! table; ct variables are eliminated in the order given.

use std::collections::BTreeMap;
use std::sync::Arc;

use ct_euclid_core::pipeline::{CtProblem, SlackScope};
use ct_euclid_core::{ElliottTerm, Exponents, Poly, Role, TermSum, VariableTable};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    variables: Vec<RawVariable>,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: String,
    role: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(default)]
    numerator: Option<Vec<RawMonomial>>,
    denominator: Vec<BTreeMap<String, i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonomial {
    coeff: Coeff,
    #[serde(default)]
    exponents: BTreeMap<String, i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Coeff {
    Int(i64),
    Text(String),
}

fn parse_coeff(c: &Coeff) -> CliResult<BigRational> {
    match c {
        Coeff::Int(n) => Ok(BigRational::from_integer((*n).into())),
        Coeff::Text(s) => {
            let bad = || CliError::Parse(format!("bad coefficient `{s}`"));
            let (n, d) = match s.split_once('/') {
                Some((n, d)) => {
                    (n.trim().parse::<BigInt>().map_err(|_| bad())?, d.trim().parse::<BigInt>().map_err(|_| bad())?)
                }
                None => (s.trim().parse::<BigInt>().map_err(|_| bad())?, BigInt::one()),
            };
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

fn exponents(table: &VariableTable, m: &BTreeMap<String, i64>) -> CliResult<Exponents> {
    let mut e = vec![0i64; table.len()];
    for (name, &v) in m {
        let id = table.id(name).map_err(|_| CliError::Parse(format!("unknown variable `{name}`")))?;
        e[id] = v;
    }
    Ok(Exponents::from_vec(e))
}

/// Parses a raw constant-term file. Rational coefficients are cleared by
/// scaling the whole sum with the lcm of their denominators.
pub fn parse_ct_problem(text: &str) -> CliResult<CtProblem> {
    let raw: RawProblem = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut builder = VariableTable::builder();
    for role in [Role::Free, Role::Ct] {
        for v in raw.variables.iter().filter(|v| v.role.parse::<Role>().ok() == Some(role)) {
            builder = builder.var(v.name.clone(), role);
        }
    }
    if let Some(v) = raw.variables.iter().find(|v| !matches!(v.role.parse::<Role>(), Ok(Role::Free | Role::Ct))) {
        return Err(CliError::Parse(format!("variable `{}` has role `{}`; expected free or ct", v.name, v.role)));
    }
    let table = Arc::new(builder.build().map_err(|e| CliError::Parse(e.to_string()))?);

    let mut parsed = Vec::with_capacity(raw.terms.len());
    let mut scale = BigInt::one();
    for t in &raw.terms {
        let numerator = match &t.numerator {
            Some(ms) => ms
                .iter()
                .map(|m| Ok((exponents(&table, &m.exponents)?, parse_coeff(&m.coeff)?)))
                .collect::<CliResult<Vec<_>>>()?,
            None => vec![(Exponents::one(table.len()), BigRational::one())],
        };
        for (_, c) in &numerator {
            scale = scale.lcm(c.denom());
        }
        let denominator = t.denominator.iter().map(|f| exponents(&table, f)).collect::<CliResult<Vec<_>>>()?;
        if denominator.iter().any(Exponents::is_one) {
            return Err(CliError::Parse("denominator factor 1 - 1 is zero".into()));
        }
        parsed.push((numerator, denominator));
    }
    let terms = parsed
        .into_iter()
        .map(|(num, den)| {
            let mut p = Poly::zero();
            for (e, c) in num {
                p.add_term(e, (c * &scale).to_integer());
            }
            ElliottTerm::new(p, den)
        })
        .collect();
    let mut problem = CtProblem::new(TermSum::new(table, terms), SlackScope::All);
    problem.scale = scale;
    Ok(problem)
}
