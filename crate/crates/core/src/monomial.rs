//! Exponent vectors, monomials and the comparison with 1 in the working field.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vars::{VarId, VariableTable};

/// Dense exponent vector over a [`VariableTable`]. Equal to the monomial with
/// coefficient 1; multiplication of monomials is addition of vectors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exponents(Box<[i64]>);

/// Where a monomial sits relative to 1 in the iterated Laurent series field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Small,
    Large,
    One,
}

impl Exponents {
    pub fn one(nvars: usize) -> Self {
        Exponents(vec![0; nvars].into_boxed_slice())
    }

    pub fn from_vec(v: Vec<i64>) -> Self {
        Exponents(v.into_boxed_slice())
    }

    pub fn var(nvars: usize, id: VarId, power: i64) -> Self {
        let mut v = vec![0; nvars];
        v[id] = power;
        Exponents(v.into_boxed_slice())
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, id: VarId) -> i64 {
        self.0[id]
    }

    pub fn set(&mut self, id: VarId, value: i64) {
        self.0[id] = value;
    }

    /// Copy with the exponent of `id` zeroed.
    pub fn without(&self, id: VarId) -> Self {
        let mut e = self.clone();
        e.0[id] = 0;
        e
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mentions(&self, id: VarId) -> bool {
        self.0[id] != 0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Exponents::from_vec)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.checked_sub(*b).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Exponents::from_vec)
    }

    pub fn inv(&self) -> Result<Self> {
        self.pow(-1)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        self.0
            .iter()
            .map(|a| a.checked_mul(k).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Exponents::from_vec)
    }

    /// `self * other^k` in one pass.
    pub fn mul_pow(&self, other: &Self, k: i64) -> Result<Self> {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| b.checked_mul(k).and_then(|bk| a.checked_add(bk)).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<_>>>()
            .map(Exponents::from_vec)
    }

    /// Comparison with 1: the earliest variable with a nonzero exponent
    /// decides; positive means small.
    pub fn compare_to_one(&self) -> Verdict {
        match self.0.iter().find(|&&e| e != 0) {
            None => Verdict::One,
            Some(&e) if e > 0 => Verdict::Small,
            Some(_) => Verdict::Large,
        }
    }

    pub fn display<'a>(&'a self, table: &'a VariableTable) -> impl fmt::Display + 'a {
        DisplayExps { exps: self, table }
    }
}

impl fmt::Debug for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

struct DisplayExps<'a> {
    exps: &'a Exponents,
    table: &'a VariableTable,
}

impl fmt::Display for DisplayExps<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.exps.as_slice().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(self.table.name(i))?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Coefficient times exponent vector. Stored monomials never carry a zero
/// coefficient; the zero polynomial is the empty [`crate::LaurentPoly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial<C> {
    pub coeff: C,
    pub exps: Exponents,
}

impl<C> Monomial<C> {
    pub fn new(coeff: C, exps: Exponents) -> Self {
        Monomial { coeff, exps }
    }

    pub fn compare_to_one(&self) -> Verdict {
        self.exps.compare_to_one()
    }
}

/// Floor division with nonnegative remainder: `e = q*a + r`, `0 <= r < a`.
pub fn div_rem_floor(e: i64, a: i64) -> (i64, i64) {
    debug_assert!(a > 0);
    (e.div_euclid(a), e.rem_euclid(a))
}

/// Signed division: `e = q*a + r` with `-a/2 < r <= a/2`.
pub fn div_rem_signed(e: i64, a: i64) -> (i64, i64) {
    let (q, r) = div_rem_floor(e, a);
    if 2 * r > a {
        (q + 1, r - a)
    } else {
        (q, r)
    }
}
