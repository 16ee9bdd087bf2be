use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact expansion tables up to a fixed order `R`:
/// the coefficients of `s/(1-e^s)` (that is `-B_n/n!`), Stirling numbers of
/// the second kind `S(k, n)`, factorials and binomials.
#[derive(Debug, Clone)]
pub struct SeriesTables {
    order: usize,
    bernoulli: Vec<BigRational>,
    pole_series: Vec<BigRational>,
    pole_denominator: BigInt,
    pole_scaled: Vec<BigInt>,
    stirling: Vec<Vec<BigInt>>,
    factorial: Vec<BigInt>,
    binomial: Vec<Vec<BigInt>>,
}

impl SeriesTables {
    pub fn new(order: usize) -> Self {
        let n = order + 1;
        let mut factorial = vec![BigInt::one(); n + 1];
        for i in 1..=n {
            factorial[i] = &factorial[i - 1] * BigInt::from(i);
        }
        let mut binomial = vec![vec![BigInt::zero(); n + 2]; n + 2];
        for i in 0..n + 2 {
            binomial[i][0] = BigInt::one();
            for j in 1..=i {
                binomial[i][j] = &binomial[i - 1][j - 1] + &binomial[i - 1][j];
            }
        }
        // B_m = -1/(m+1) sum_{k<m} C(m+1, k) B_k, so B_1 = -1/2.
        let mut bernoulli: Vec<BigRational> = Vec::with_capacity(n);
        for m in 0..n {
            if m == 0 {
                bernoulli.push(BigRational::one());
                continue;
            }
            let mut acc = BigRational::zero();
            for (k, b) in bernoulli.iter().enumerate() {
                acc += BigRational::from_integer(binomial[m + 1][k].clone()) * b;
            }
            bernoulli.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
        }
        let pole_series: Vec<BigRational> =
            bernoulli.iter().enumerate().map(|(m, b)| -b / BigRational::from_integer(factorial[m].clone())).collect();
        let pole_denominator = pole_series
            .iter()
            .fold(BigInt::one(), |l: BigInt, c: &BigRational| num_integer::Integer::lcm(&l, c.denom()));
        let pole_scaled: Vec<BigInt> = pole_series
            .iter()
            .map(|c| (c * BigRational::from_integer(pole_denominator.clone())).to_integer())
            .collect();
        let mut stirling = vec![vec![BigInt::zero(); n]; n];
        stirling[0][0] = BigInt::one();
        for k in 1..n {
            for j in 1..=k {
                stirling[k][j] = BigInt::from(j) * &stirling[k - 1][j] + &stirling[k - 1][j - 1];
            }
        }
        SeriesTables { order, bernoulli, pole_series, pole_denominator, pole_scaled, stirling, factorial, binomial }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Rebuilt with a larger order when needed.
    pub fn ensure(&mut self, order: usize) {
        if order > self.order {
            *self = SeriesTables::new(order);
        }
    }

    /// `B_n` with `B_1 = -1/2`.
    pub fn bernoulli(&self, n: usize) -> &BigRational {
        &self.bernoulli[n]
    }

    /// Coefficient of `s^n` in `s/(1-e^s)`.
    pub fn pole_coeff(&self, n: usize) -> &BigRational {
        &self.pole_series[n]
    }

    /// Common denominator of the `s/(1-e^s)` coefficients up to the order.
    pub fn pole_denominator(&self) -> &BigInt {
        &self.pole_denominator
    }

    /// `pole_coeff(n)` times [`Self::pole_denominator`], an integer.
    pub fn pole_scaled(&self, n: usize) -> &BigInt {
        &self.pole_scaled[n]
    }

    /// `S(k, n)`.
    pub fn stirling2(&self, k: usize, n: usize) -> &BigInt {
        &self.stirling[k][n]
    }

    pub fn factorial(&self, n: usize) -> &BigInt {
        &self.factorial[n]
    }

    pub fn binomial(&self, n: usize, k: usize) -> &BigInt {
        &self.binomial[n][k]
    }
}
