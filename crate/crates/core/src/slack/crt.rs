use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Integer reconstructed from residues, with `|value| / P` as a rough
/// confidence measure: values near `1/2` suggest too few primes.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub value: BigInt,
    pub modulus: BigInt,
    pub confidence_ratio: f64,
}

/// Combines `(residue, modulus)` pairs into the representative of the
/// symmetric range `(-P/2, P/2]`.
pub fn crt_combine(residues: &[(u64, u64)]) -> Result<Reconstruction> {
    if residues.is_empty() {
        return Err(Error::Invalid("no residues to combine".into()));
    }
    let mut value = BigInt::zero();
    let mut modulus = BigInt::from(1);
    for &(r, p) in residues {
        let p_big = BigInt::from(p);
        let g = modulus.extended_gcd(&p_big);
        if g.gcd != BigInt::from(1) {
            return Err(Error::NonCoprimeModuli);
        }
        // value + modulus * k = r (mod p), k = (r - value) * modulus^{-1}
        let inv = g.x.mod_floor(&p_big);
        let k = ((BigInt::from(r) - &value) * inv).mod_floor(&p_big);
        value += &modulus * k;
        modulus *= p_big;
    }
    let half = &modulus / 2;
    if value > half {
        value -= &modulus;
    }
    let confidence_ratio = ratio(&value.abs(), &modulus);
    Ok(Reconstruction { value, modulus, confidence_ratio })
}

impl Reconstruction {
    /// The representative in `[0, P)`.
    pub fn nonnegative(&self) -> BigInt {
        self.value.mod_floor(&self.modulus)
    }
}

fn ratio(a: &BigInt, b: &BigInt) -> f64 {
    // split each into a 60-bit mantissa and a binary exponent so tiny
    // ratios do not underflow to zero
    let split = |x: &BigInt| {
        let shift = x.bits().saturating_sub(60);
        ((x >> shift).to_f64().unwrap_or(0.0), shift as i64)
    };
    let (ma, ea) = split(a);
    let (mb, eb) = split(b);
    if mb == 0.0 {
        return 0.0;
    }
    let e = (ea - eb).clamp(-2000, 2000) as i32;
    ma / mb * 2f64.powi(e)
}
