//! Univariate rational functions `q^shift N(q) / D(q)` whose denominators
//! are products of cyclotomic polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Reduced `q^shift * N(q) / D(q)`: integer coefficients with no common
/// factor across `N` and `D`, and `D(0) > 0`. `D` is kept both expanded
/// and as cyclotomic multiplicities (index 1 stands for `1 - q`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub shift: i64,
    pub numerator: Vec<BigInt>,
    pub denominator: Vec<BigInt>,
    pub cyclotomic: BTreeMap<u64, u32>,
}

/// `numerator / (divisor * prod (1 - q^k)^{m_k})` with every `k` at most 12.
/// The divisor is 1 for integer series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductForm {
    pub shift: i64,
    pub numerator: Vec<BigInt>,
    pub divisor: BigInt,
    pub factors: BTreeMap<u64, u32>,
}

type QPoly = Vec<BigRational>;

fn trim<T: Zero>(p: &mut Vec<T>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division by `d` whose leading coefficient is `±1`; `None` when a
/// remainder is left.
fn div_exact(n: &[BigRational], d: &[BigInt]) -> Option<QPoly> {
    let dl = d.len() - 1;
    if n.len() <= dl {
        return n.iter().all(Zero::is_zero).then(Vec::new);
    }
    let lead = BigRational::from_integer(d[dl].clone());
    let mut rem: QPoly = n.to_vec();
    let mut quo = vec![BigRational::zero(); n.len() - dl];
    for i in (0..quo.len()).rev() {
        let c = &rem[i + dl] / &lead;
        if c.is_zero() {
            continue;
        }
        for (j, dj) in d.iter().enumerate() {
            rem[i + j] -= &c * BigRational::from_integer(dj.clone());
        }
        quo[i] = c;
    }
    rem.iter().all(Zero::is_zero).then_some(quo)
}

/// `Phi_d` for `d >= 2`, and `1 - q` for `d = 1`, as coefficient lists.
#[derive(Debug, Default)]
pub struct Cyclotomics {
    cache: BTreeMap<u64, Vec<BigInt>>,
}

impl Cyclotomics {
    pub fn get(&mut self, d: u64) -> Vec<BigInt> {
        if let Some(p) = self.cache.get(&d) {
            return p.clone();
        }
        let p = if d == 1 {
            vec![BigInt::one(), -BigInt::one()]
        } else {
            // q^d - 1 divided by Phi_e for proper divisors e
            let mut n: QPoly = vec![BigRational::zero(); d as usize + 1];
            n[0] = -BigRational::one();
            n[d as usize] = BigRational::one();
            for e in divisors(d).into_iter().filter(|&e| e < d) {
                let mut f = self.get(e);
                if e == 1 {
                    f = f.into_iter().map(|c| -c).collect();
                }
                n = div_exact(&n, &f).expect("cyclotomic division is exact");
            }
            n.into_iter().map(|c| c.to_integer()).collect()
        };
        self.cache.insert(d, p.clone());
        p
    }
}

pub fn divisors(k: u64) -> Vec<u64> {
    (1..=k).filter(|d| k.is_multiple_of(*d)).collect()
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction {
            shift: 0,
            numerator: Vec::new(),
            denominator: vec![BigInt::one()],
            cyclotomic: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_empty()
    }

    /// Builds `q^shift N(q) / prod_k (1 - q^k)^{e_k}` and cancels every
    /// cyclotomic factor that divides the numerator.
    pub fn from_parts(shift: i64, numerator: Vec<BigRational>, den: &BTreeMap<u64, u32>) -> Result<Self> {
        let mut n = numerator;
        trim(&mut n);
        let lead_zeros = n.iter().take_while(|c| c.is_zero()).count();
        n.drain(..lead_zeros);
        let shift = shift + lead_zeros as i64;
        if n.is_empty() {
            return Ok(Self::zero());
        }
        if den.contains_key(&0) {
            return Err(Error::Invalid("denominator factor 1 - q^0".into()));
        }
        let mut mult: BTreeMap<u64, u32> = BTreeMap::new();
        for (&k, &e) in den {
            for d in divisors(k) {
                *mult.entry(d).or_default() += e;
            }
        }
        let mut cyc = Cyclotomics::default();
        for (&d, m) in mult.iter_mut().rev() {
            let f = cyc.get(d);
            while *m > 0 {
                match div_exact(&n, &f) {
                    Some(q) => {
                        n = q;
                        *m -= 1;
                    }
                    None => break,
                }
            }
        }
        mult.retain(|_, m| *m > 0);
        let mut denominator = vec![BigInt::one()];
        for (&d, &m) in &mult {
            let f = cyc.get(d);
            for _ in 0..m {
                denominator = mul_int(&denominator, &f);
            }
        }
        let denominator = denominator.into_iter().map(BigRational::from_integer).collect();
        Ok(Self::normalized(shift, n, denominator, mult))
    }

    /// Clears coefficient denominators and removes the content shared by
    /// numerator and denominator.
    fn normalized(shift: i64, n: QPoly, d: QPoly, cyclotomic: BTreeMap<u64, u32>) -> Self {
        let lcm = n.iter().chain(d.iter()).fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scale = BigRational::from_integer(lcm);
        let mut numerator: Vec<BigInt> = n.iter().map(|c| (c * &scale).to_integer()).collect();
        let mut denominator: Vec<BigInt> = d.iter().map(|c| (c * &scale).to_integer()).collect();
        let g = numerator.iter().chain(denominator.iter()).fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() && !g.is_one() {
            numerator.iter_mut().for_each(|c| *c /= &g);
            denominator.iter_mut().for_each(|c| *c /= &g);
        }
        if denominator[0].is_negative() {
            numerator.iter_mut().for_each(|c| *c = -&*c);
            denominator.iter_mut().for_each(|c| *c = -&*c);
        }
        RationalFunction { shift, numerator, denominator, cyclotomic }
    }

    /// The function times the constant `c`.
    pub fn scaled(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let n = self.numerator.iter().map(|v| BigRational::from_integer(v.clone()) * c).collect();
        let d = self.denominator.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        Self::normalized(self.shift, n, d, self.cyclotomic.clone())
    }

    /// First `k + 1` Taylor coefficients (powers `q^0 .. q^k`).
    pub fn series_coeffs(&self, k: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); k + 1];
        if self.is_zero() {
            return out;
        }
        // c = N/D: D0 c_i = N_i - sum_{j>=1} D_j c_{i-j}, over indices shifted by `shift`
        let d0 = BigRational::from_integer(self.denominator[0].clone());
        let len = (k as i64 - self.shift + 1).max(0) as usize;
        let mut c: Vec<BigRational> = Vec::with_capacity(len);
        for i in 0..len {
            let mut acc = self.numerator.get(i).map(|v| BigRational::from_integer(v.clone())).unwrap_or_default();
            for (j, dj) in self.denominator.iter().enumerate().skip(1).take(i) {
                if !dj.is_zero() {
                    acc -= &c[i - j] * BigRational::from_integer(dj.clone());
                }
            }
            c.push(acc / &d0);
        }
        for (i, v) in c.into_iter().enumerate() {
            let idx = i as i64 + self.shift;
            if idx >= 0 && (idx as usize) <= k {
                out[idx as usize] = v;
            }
        }
        out
    }

    /// Rewrites the denominator as `prod (1 - q^k)^{m_k}` with `k <= 12`,
    /// choosing the largest `k` first. `None` if some cyclotomic factor has
    /// index above 12.
    pub fn product_form(&self) -> Option<ProductForm> {
        const MAX_K: u64 = 12;
        if self.cyclotomic.keys().any(|&d| d > MAX_K) {
            return None;
        }
        let mut covered: BTreeMap<u64, u32> = BTreeMap::new();
        let mut factors: BTreeMap<u64, u32> = BTreeMap::new();
        for (&d, &m) in self.cyclotomic.iter().rev() {
            let have = covered.get(&d).copied().unwrap_or(0);
            if m > have {
                let add = m - have;
                factors.insert(d, add);
                for e in divisors(d) {
                    *covered.entry(e).or_default() += add;
                }
            }
        }
        // numerator picks up the surplus cyclotomic factors
        let mut cyc = Cyclotomics::default();
        let mut numerator = self.numerator.clone();
        for (&d, &c) in &covered {
            let extra = c - self.cyclotomic.get(&d).copied().unwrap_or(0);
            let f = cyc.get(d);
            for _ in 0..extra {
                numerator = mul_int(&numerator, &f);
            }
        }
        // D(0) carries the scale that from_parts moved into both sides
        let scale = &self.denominator[0];
        let content = numerator.iter().fold(scale.clone(), |g, c| g.gcd(c));
        let mut divisor = scale / &content;
        let mut numerator: Vec<BigInt> = numerator.into_iter().map(|c| c / &content).collect();
        if divisor.is_negative() {
            divisor = -divisor;
            numerator.iter_mut().for_each(|c| *c = -&*c);
        }
        trim(&mut numerator);
        Some(ProductForm { shift: self.shift, numerator, divisor, factors })
    }
}

fn fmt_poly(f: &mut fmt::Formatter<'_>, coeffs: &[BigInt], shift: i64) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = i as i64 + shift;
        let sign = if c.is_negative() { "-" } else { "+" };
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        first = false;
        let a = c.abs();
        match e {
            0 => write!(f, "{a}")?,
            _ => {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                if e == 1 {
                    f.write_str("q")?;
                } else {
                    write!(f, "q^{e}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        fmt_poly(f, &self.numerator, self.shift)?;
        f.write_str(") / (")?;
        fmt_poly(f, &self.denominator, 0)?;
        f.write_str(")")
    }
}

impl fmt::Display for ProductForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        fmt_poly(f, &self.numerator, self.shift)?;
        f.write_str(")")?;
        let scaled = !self.divisor.is_one();
        if scaled || !self.factors.is_empty() {
            f.write_str(" / ")?;
            if scaled {
                write!(f, "{}", self.divisor)?;
            }
            for (i, (k, m)) in self.factors.iter().enumerate() {
                if i > 0 || scaled {
                    f.write_str(" ")?;
                }
                let base = if *k == 1 { "(1 - q)".to_string() } else { format!("(1 - q^{k})") };
                if *m == 1 {
                    f.write_str(&base)?;
                } else {
                    write!(f, "{base}^{m}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&c| BigRational::from_integer(c.into())).collect()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn cyclotomic_polys() {
        let mut c = Cyclotomics::default();
        assert_eq!(c.get(1), ints(&[1, -1]));
        assert_eq!(c.get(2), ints(&[1, 1]));
        assert_eq!(c.get(6), ints(&[1, -1, 1]));
        assert_eq!(c.get(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn reduction_cancels_common_factors() {
        // (1 + q) / (1 - q^2) = 1 / (1 - q)
        let r = RationalFunction::from_parts(0, q(&[1, 1]), &BTreeMap::from([(2, 1)])).unwrap();
        assert_eq!(r.numerator, ints(&[1]));
        assert_eq!(r.denominator, ints(&[1, -1]));
        // 1/(1-q)^2
        let r = RationalFunction::from_parts(0, q(&[1]), &BTreeMap::from([(1, 2)])).unwrap();
        let c: Vec<BigInt> = r.series_coeffs(3).into_iter().map(|c| c.to_integer()).collect();
        assert_eq!(c, ints(&[1, 2, 3, 4]));
        let r = RationalFunction::from_parts(0, q(&[1]), &BTreeMap::from([(2, 1)])).unwrap();
        let c: Vec<BigInt> = r.series_coeffs(4).into_iter().map(|c| c.to_integer()).collect();
        assert_eq!(c, ints(&[1, 0, 1, 0, 1]));
    }

    #[test]
    fn rational_numerator_is_cleared() {
        let n = vec![BigRational::new(1.into(), 2.into())];
        let r = RationalFunction::from_parts(0, n, &BTreeMap::from([(1, 1)])).unwrap();
        assert_eq!(r.numerator, ints(&[1]));
        assert_eq!(r.denominator, ints(&[2, -2]));
        assert_eq!(r.series_coeffs(1)[1], BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn product_form_keeps_rational_content() {
        // (1 + q) / (2 (1 - q))
        let half = |c: i64| BigRational::new(c.into(), 2.into());
        let r = RationalFunction::from_parts(0, vec![half(1), half(1)], &BTreeMap::from([(1, 1)])).unwrap();
        let p = r.product_form().unwrap();
        assert_eq!(p.divisor, BigInt::from(2));
        assert_eq!(p.to_string(), "(1 + q) / 2 (1 - q)");
        let r = RationalFunction::from_parts(0, vec![half(1), half(1)], &BTreeMap::new()).unwrap();
        assert_eq!(r.product_form().unwrap().to_string(), "(1 + q) / 2");
    }

    #[test]
    fn product_form_prefers_large_k() {
        // 1/((1-q)(1+q)) = 1/(1-q^2)
        let r = RationalFunction::from_parts(0, q(&[1]), &BTreeMap::from([(2, 1)])).unwrap();
        let p = r.product_form().unwrap();
        assert_eq!(p.factors, BTreeMap::from([(2, 1)]));
        assert_eq!(p.numerator, ints(&[1]));
        assert_eq!(p.to_string(), "(1) / (1 - q^2)");
        // 1/((1-q)^2 (1+q)) -> (1)/((1-q)(1-q^2))
        let r = RationalFunction::from_parts(0, q(&[1]), &BTreeMap::from([(1, 1), (2, 1)])).unwrap();
        let p = r.product_form().unwrap();
        assert_eq!(p.factors, BTreeMap::from([(1, 1), (2, 1)]));
    }

    #[test]
    fn zero_and_shift() {
        assert!(RationalFunction::from_parts(3, q(&[0, 0]), &BTreeMap::new()).unwrap().is_zero());
        let r = RationalFunction::from_parts(-1, q(&[0, 0, 5]), &BTreeMap::new()).unwrap();
        assert_eq!(r.shift, 1);
        assert_eq!(r.to_string(), "(5*q) / (1)");
    }
}
