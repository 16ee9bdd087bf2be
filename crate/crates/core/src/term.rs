//! Elliott terms `L / prod(1 - M_i)` and sums of them.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::monomial::{Exponents, Verdict};
use crate::poly::LaurentPoly;
use crate::vars::{Role, VarId, Variable, VariableTable};

/// Numerators during elimination only ever see integer arithmetic.
pub type Poly = LaurentPoly<BigInt>;

/// One summand `numerator / prod_i (1 - x^{den[i]})`. Every denominator
/// monomial has coefficient 1 and is never the monomial 1.
#[derive(Clone, PartialEq, Eq)]
pub struct ElliottTerm {
    pub numerator: Poly,
    pub denominator: Vec<Exponents>,
}

impl ElliottTerm {
    pub fn new(numerator: Poly, denominator: Vec<Exponents>) -> Self {
        ElliottTerm { numerator, denominator }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Rewrites every large factor `1/(1-M)` as `-M^{-1}/(1-M^{-1})`, so all
    /// factors are small in the working order. Fails on a factor equal to
    /// `1 - 1`.
    pub fn orient_small(mut self, var_hint: &str) -> Result<Self> {
        for f in self.denominator.iter_mut() {
            match f.compare_to_one() {
                Verdict::Small => {}
                Verdict::Large => {
                    let inv = f.inv()?;
                    self.numerator = self.numerator.mul_monomial(&-BigInt::one(), &inv)?;
                    *f = inv;
                }
                Verdict::One => return Err(Error::Collision { var: var_hint.to_string() }),
            }
        }
        Ok(self)
    }

    /// Sorted denominator; equal keys mean equal denominators.
    pub fn canonical_key(&self) -> Vec<Exponents> {
        let mut k = self.denominator.clone();
        k.sort();
        k
    }

    pub fn mentions(&self, x: VarId) -> bool {
        self.numerator.mentions(x) || self.denominator.iter().any(|f| f.mentions(x))
    }

    pub fn display<'a>(&'a self, table: &'a VariableTable) -> impl fmt::Display + 'a {
        DisplayTerm { term: self, table }
    }
}

impl fmt::Debug for ElliottTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} / {:?}", self.numerator, self.denominator)
    }
}

struct DisplayTerm<'a> {
    term: &'a ElliottTerm,
    table: &'a VariableTable,
}

impl fmt::Display for DisplayTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.term.numerator.display(self.table))?;
        if !self.term.denominator.is_empty() {
            f.write_str(" / (")?;
            for (i, d) in self.term.denominator.iter().enumerate() {
                if i > 0 {
                    f.write_str(")(")?;
                }
                write!(f, "1 - {}", d.display(self.table))?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A sum of Elliott terms over a shared variable table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSum {
    pub table: Arc<VariableTable>,
    pub terms: Vec<ElliottTerm>,
}

impl TermSum {
    pub fn new(table: Arc<VariableTable>, terms: Vec<ElliottTerm>) -> Self {
        TermSum { table, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest denominator size over all terms.
    pub fn max_factors(&self) -> usize {
        self.terms.iter().map(|t| t.denominator.len()).max().unwrap_or(0)
    }
}

/// Merges terms with identical denominators (after orienting every factor
/// small and sorting) and drops vanishing numerators. Output is sorted by
/// denominator key, so the result does not depend on input order.
pub fn collect_terms(ts: TermSum) -> Result<TermSum> {
    let table = ts.table.clone();
    let terms = collect_vec(ts.terms, "collect")?;
    Ok(TermSum { table, terms })
}

pub(crate) fn collect_vec(terms: Vec<ElliottTerm>, var_hint: &str) -> Result<Vec<ElliottTerm>> {
    let mut groups: HashMap<Vec<Exponents>, Poly> = HashMap::new();
    for t in terms {
        if t.is_zero() {
            continue;
        }
        let t = t.orient_small(var_hint)?;
        let key = t.canonical_key();
        match groups.get_mut(&key) {
            Some(n) => n.add_assign(&t.numerator),
            None => {
                groups.insert(key, t.numerator);
            }
        }
    }
    let mut out: Vec<ElliottTerm> =
        groups.into_iter().filter(|(_, n)| !n.is_zero()).map(|(d, n)| ElliottTerm::new(n, d)).collect();
    out.sort_by(|a, b| a.denominator.cmp(&b.denominator));
    Ok(out)
}

/// Multiplies factor `j` of every term by a slack variable `z_j`. The slack
/// variables are appended after any existing slack variables; terms reuse
/// the same `z_1, z_2, ...` by factor position.
pub fn add_slack(ts: &TermSum) -> Result<TermSum> {
    add_slack_where(ts, |_| true)
}

/// [`add_slack`] restricted to the factors selected by `wanted`; the `j`-th
/// selected factor of a term gets `z_j`.
pub fn add_slack_where(ts: &TermSum, wanted: impl Fn(&Exponents) -> bool) -> Result<TermSum> {
    let count = ts.terms.iter().map(|t| t.denominator.iter().filter(|f| wanted(f)).count()).max().unwrap_or(0);
    let (table, remap, slacks) = extend_with_slacks(&ts.table, count)?;
    let terms = ts
        .terms
        .iter()
        .map(|t| {
            let numerator = t.numerator.try_map_exponents(|e| Ok(remap(e)))?;
            let mut next = slacks.iter();
            let denominator = t
                .denominator
                .iter()
                .map(|f| {
                    let mut g = remap(f);
                    if wanted(f) {
                        let z = *next.next().expect("slack count covers every term");
                        g.set(z, g.get(z) + 1);
                    }
                    g
                })
                .collect();
            Ok(ElliottTerm::new(numerator, denominator))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TermSum::new(Arc::new(table), terms))
}

type Remap = Box<dyn Fn(&Exponents) -> Exponents + Send + Sync>;

/// New table with `count` fresh slack variables inserted before the ct
/// variables. Returns the table, an exponent remapping, and the new ids.
pub fn extend_with_slacks(table: &VariableTable, count: usize) -> Result<(VariableTable, Remap, Vec<VarId>)> {
    let old = table.vars().to_vec();
    let insert_at = old.iter().position(|v| v.role == Role::Ct).unwrap_or(old.len());
    let mut names = Vec::with_capacity(count);
    let mut idx = 1usize;
    while names.len() < count {
        let mut name = format!("z{idx}");
        while old.iter().any(|v| v.name == name) {
            name.insert(0, '_');
        }
        names.push(name);
        idx += 1;
    }
    let mut vars: Vec<Variable> = old[..insert_at].to_vec();
    vars.extend(names.into_iter().map(|name| Variable { name, role: Role::Slack }));
    vars.extend_from_slice(&old[insert_at..]);
    let new_table = VariableTable::new(vars)?;
    let n_new = new_table.len();
    let remap: Remap = Box::new(move |e: &Exponents| {
        let s = e.as_slice();
        let mut v = Vec::with_capacity(n_new);
        v.extend_from_slice(&s[..insert_at]);
        v.extend(std::iter::repeat_n(0, count));
        v.extend_from_slice(&s[insert_at..]);
        Exponents::from_vec(v)
    });
    let ids = (insert_at..insert_at + count).collect();
    Ok((new_table, remap, ids))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: &[i64]) -> Exponents {
        Exponents::from_vec(v.to_vec())
    }

    #[test]
    fn orientation_moves_unit_to_numerator() {
        // order [z, x]; 1/(1 - z^-1 x) -> -z x^-1 / (1 - z x^-1)
        let t = ElliottTerm::new(Poly::constant(2, BigInt::one()), vec![e(&[-1, 1])]);
        let t = t.orient_small("x").unwrap();
        assert_eq!(t.denominator, vec![e(&[1, -1])]);
        assert_eq!(t.numerator, Poly::monomial(BigInt::from(-1), e(&[1, -1])));
        let bad = ElliottTerm::new(Poly::constant(2, BigInt::one()), vec![e(&[0, 0])]);
        assert!(matches!(bad.orient_small("x"), Err(Error::Collision { .. })));
    }

    #[test]
    fn add_slack_examples() {
        let table = Arc::new(VariableTable::builder().ct("x").build().unwrap());
        let num = Poly::constant(1, BigInt::one());
        let ts = TermSum::new(table.clone(), vec![ElliottTerm::new(num.clone(), vec![e(&[1]), e(&[5]), e(&[14])])]);
        let out = add_slack(&ts).unwrap();
        assert_eq!(out.table.header(), "z1:slack z2:slack z3:slack x:ct");
        assert_eq!(out.terms[0].denominator, vec![e(&[1, 0, 0, 1]), e(&[0, 1, 0, 5]), e(&[0, 0, 1, 14])]);

        let sq = TermSum::new(table.clone(), vec![ElliottTerm::new(num.clone(), vec![e(&[1]), e(&[1])])]);
        let out = add_slack(&sq).unwrap();
        assert_eq!(out.terms[0].denominator, vec![e(&[1, 0, 1]), e(&[0, 1, 1])]);

        let bare = TermSum::new(table, vec![ElliottTerm::new(num, vec![])]);
        let out = add_slack(&bare).unwrap();
        assert_eq!(out.table.len(), 1);
        assert!(out.terms[0].denominator.is_empty());
    }

    #[test]
    fn collect_merges_and_drops() {
        let table = Arc::new(VariableTable::builder().slack("z2").slack("z3").build().unwrap());
        let d = vec![e(&[1, 0]), e(&[0, 1])];
        let t1 = ElliottTerm::new(Poly::monomial(BigInt::from(2), e(&[3, 0])), d.clone());
        let t2 = ElliottTerm::new(Poly::monomial(BigInt::from(5), e(&[0, 0])), vec![d[1].clone(), d[0].clone()]);
        let out = collect_terms(TermSum::new(table.clone(), vec![t1, t2])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.terms[0].numerator.len(), 2);

        // z3^4 z2^-3 - z3^4 z2^-3 vanishes
        let mut n = Poly::monomial(BigInt::one(), e(&[-3, 4]));
        n.add_term(e(&[-3, 4]), BigInt::from(-1));
        let t = ElliottTerm::new(n, d);
        assert!(collect_terms(TermSum::new(table, vec![t])).unwrap().is_empty());
    }
}
