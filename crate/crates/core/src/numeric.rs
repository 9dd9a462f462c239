//! Shared numerics: exact binomial coefficients and log-space binomial
//! tail evaluation.
//!
//! Survival functions are accumulated from the short side of the
//! distribution (prefix sums below the mean, suffix sums above) so that
//! no subtraction of nearly-equal quantities occurs where the result is
//! small.

use crate::error::{QssError, Result};
use statrs::function::gamma::ln_gamma;

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(n, k)` as a float, exact for n <= 20 and via `ln_gamma` beyond.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 20 {
        binomial_u128(n, k).expect("no overflow for n <= 20") as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// Binomial(m, p) with log-space pmf and stable tail sums.
#[derive(Debug, Clone, Copy)]
pub struct BinomialDist {
    m: u64,
    p: f64,
}

impl BinomialDist {
    pub fn new(m: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QssError::invalid(format!(
                "binomial probability {p} outside [0, 1]"
            )));
        }
        Ok(BinomialDist { m, p })
    }

    pub fn trials(&self) -> u64 {
        self.m
    }

    pub fn mean(&self) -> f64 {
        self.m as f64 * self.p
    }

    pub fn ln_pmf(&self, k: u64) -> f64 {
        if k > self.m {
            return f64::NEG_INFINITY;
        }
        if self.p == 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        if self.p == 1.0 {
            return if k == self.m { 0.0 } else { f64::NEG_INFINITY };
        }
        ln_binomial(self.m, k)
            + k as f64 * self.p.ln()
            + (self.m - k) as f64 * (-self.p).ln_1p()
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// Survival `P(X >= l)`.
    pub fn survival(&self, l: u64) -> f64 {
        if l == 0 {
            return 1.0;
        }
        if l > self.m {
            return 0.0;
        }
        if self.p == 0.0 {
            return 0.0;
        }
        if self.p == 1.0 {
            return 1.0;
        }
        if (l as f64) <= self.mean() {
            // prefix sum of the lower tail, then complement
            let mut cdf = 0.0;
            let mut ln_pk = self.ln_pmf(0);
            let ratio = self.p.ln() - (-self.p).ln_1p();
            for k in 0..l {
                cdf += ln_pk.exp();
                ln_pk += ((self.m - k) as f64).ln() - (k as f64 + 1.0).ln() + ratio;
            }
            (1.0 - cdf).max(0.0)
        } else {
            // suffix sum of the upper tail
            let mut tail = 0.0;
            let mut ln_pk = self.ln_pmf(l);
            let ratio = self.p.ln() - (-self.p).ln_1p();
            for k in l..=self.m {
                let term = ln_pk.exp();
                tail += term;
                if term > 0.0 && term < tail * 1e-18 {
                    break;
                }
                ln_pk += ((self.m - k) as f64).ln() - (k as f64 + 1.0).ln() + ratio;
            }
            tail.min(1.0)
        }
    }

    /// `E[min(X_1, ..., X_n)]` for n iid copies, via `sum_l P(min >= l)`.
    ///
    /// Single O(m) pass: below the mean the survival is formed as
    /// `1 - prefix`, above it as a running suffix sum.
    pub fn expected_min(&self, n: u32) -> f64 {
        if self.m == 0 || self.p == 0.0 {
            return 0.0;
        }
        if self.p == 1.0 {
            return self.m as f64;
        }
        let n = n as i32;
        let split = (self.mean().ceil() as u64).min(self.m);
        let ratio = self.p.ln() - (-self.p).ln_1p();

        let mut acc = 0.0;
        // ascending: l = 1..=split uses survival = 1 - cdf(l-1)
        let mut cdf = 0.0;
        let mut ln_pk = self.ln_pmf(0);
        for l in 1..=split {
            let k = l - 1;
            cdf += ln_pk.exp();
            ln_pk += ((self.m - k) as f64).ln() - (k as f64 + 1.0).ln() + ratio;
            acc += (1.0 - cdf).max(0.0).powi(n);
        }
        // descending: l = m..split+1 uses a growing suffix sum
        let mut tail = 0.0;
        let mut ln_pk = self.ln_pmf(self.m);
        let down_ratio = (-self.p).ln_1p() - self.p.ln();
        let mut l = self.m;
        while l > split {
            tail += ln_pk.exp();
            acc += tail.min(1.0).powi(n);
            ln_pk += (l as f64).ln() - ((self.m - l + 1) as f64).ln() + down_ratio;
            l -= 1;
        }
        acc
    }
}
