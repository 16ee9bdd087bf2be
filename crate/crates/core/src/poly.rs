//! Sparse Laurent polynomials over an exact coefficient ring.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::monomial::{div_rem_floor, div_rem_signed, Exponents, Monomial};
use crate::vars::{VarId, VariableTable};

/// Coefficient ring used by [`LaurentPoly`]. Blanket-implemented for every
/// exact numeric type with the usual operator traits.
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
}

impl<T> Coeff for T where
    T: Clone
        + fmt::Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
{
}

/// Finite sum of monomials with pairwise distinct exponent vectors and
/// nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly<C> {
    terms: BTreeMap<Exponents, C>,
}

impl<C: Coeff> Default for LaurentPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(c, Exponents::one(nvars))
    }

    pub fn monomial(c: C, exps: Exponents) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponents, C)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Exponents, C> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial<C>> + '_ {
        self.terms.iter().map(|(e, c)| Monomial::new(c.clone(), e.clone()))
    }

    pub fn coeff(&self, exps: &Exponents) -> Option<&C> {
        self.terms.get(exps)
    }

    /// Adds `c * x^exps`, dropping the entry if it cancels.
    pub fn add_term(&mut self, exps: Exponents, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (e, c) in other.iter() {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.iter().map(|(e, a)| (e.clone(), a.clone() * c.clone())))
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }

    /// Multiplies by `c * x^exps`.
    pub fn mul_monomial(&self, c: &C, exps: &Exponents) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (e, a) in self.iter() {
            let prod = a.clone() * c.clone();
            if !prod.is_zero() {
                terms.insert(e.mul(exps)?, prod);
            }
        }
        Ok(LaurentPoly { terms })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                out.add_term(e1.mul(e2)?, c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    /// Applies `f` to every exponent vector and re-collects.
    pub fn try_map_exponents<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Exponents) -> Result<Exponents>,
    {
        let mut out = Self::zero();
        for (e, c) in self.iter() {
            out.add_term(f(e)?, c.clone());
        }
        Ok(out)
    }

    /// Replaces every `x^k` by `m^k`. `m` must not mention `x`.
    pub fn substitute(&self, x: VarId, m: &Exponents) -> Result<Self> {
        if m.mentions(x) {
            return Err(Error::SelfSubstitution(format!("#{x}")));
        }
        self.try_map_exponents(|e| e.without(x).mul_pow(m, e.get(x)))
    }

    /// Splits into (positive powers of `x`, nonpositive powers of `x`).
    pub fn split_by_sign(&self, x: VarId) -> (Self, Self) {
        let mut pos = BTreeMap::new();
        let mut rest = BTreeMap::new();
        for (e, c) in self.iter() {
            if e.get(x) > 0 {
                pos.insert(e.clone(), c.clone());
            } else {
                rest.insert(e.clone(), c.clone());
            }
        }
        (LaurentPoly { terms: pos }, LaurentPoly { terms: rest })
    }

    /// The part of the polynomial free of `x`.
    pub fn x_constant_part(&self, x: VarId) -> Self {
        LaurentPoly { terms: self.iter().filter(|(e, _)| e.get(x) == 0).map(|(e, c)| (e.clone(), c.clone())).collect() }
    }

    pub fn mentions(&self, x: VarId) -> bool {
        self.terms.keys().any(|e| e.mentions(x))
    }

    pub fn display<'a>(&'a self, table: &'a VariableTable) -> impl fmt::Display + 'a
    where
        C: fmt::Display,
    {
        DisplayPoly { poly: self, table }
    }
}

impl<C: Coeff> FromIterator<Monomial<C>> for LaurentPoly<C> {
    fn from_iter<I: IntoIterator<Item = Monomial<C>>>(iter: I) -> Self {
        Self::from_terms(iter.into_iter().map(|m| (m.exps, m.coeff)))
    }
}

impl<C: fmt::Debug> fmt::Debug for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

struct DisplayPoly<'a, C> {
    poly: &'a LaurentPoly<C>,
    table: &'a VariableTable,
}

impl<C: Coeff + fmt::Display> fmt::Display for DisplayPoly<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.poly.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})*{}", e.display(self.table))?;
        }
        Ok(())
    }
}

/// A denominator factor `1 - u*x^a` viewed from the variable `x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFactorView<'a> {
    /// `u`, free of `x`.
    pub u: &'a Exponents,
    /// `a >= 1`.
    pub a: i64,
}

/// `rem(x^e * rest, 1 - u*x^a, x) = rest * u^{-l} * x^r` with `e = l*a + r`,
/// `0 <= r < a`.
pub fn rem(m: &Exponents, f: LinearFactorView<'_>, x: VarId) -> Result<Exponents> {
    let (l, r) = div_rem_floor(m.get(x), f.a);
    reduce_with(m, f, x, l, r)
}

/// Same as [`rem`] with the remainder chosen in `(-a/2, a/2]`.
pub fn srem(m: &Exponents, f: LinearFactorView<'_>, x: VarId) -> Result<Exponents> {
    let (l, r) = div_rem_signed(m.get(x), f.a);
    reduce_with(m, f, x, l, r)
}

fn reduce_with(m: &Exponents, f: LinearFactorView<'_>, x: VarId, l: i64, r: i64) -> Result<Exponents> {
    debug_assert!(f.a >= 1 && !f.u.mentions(x));
    let mut out = m.mul_pow(f.u, -l)?;
    out.set(x, r);
    Ok(out)
}
