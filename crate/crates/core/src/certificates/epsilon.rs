use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// `ln binom(n, k)` through log-gamma; finite for any `n` that fits in `f64`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let n = n as f64;
    let k = k as f64;
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// The wait-and-judge reliability levels `ε(0), …, ε(K)` for confidence
/// `β`, with `β` split evenly over the `K` terms of the defining sum.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule {
    k: usize,
    beta: f64,
    values: Vec<f64>,
    /// `ln(1 − ε(h))`, kept because `1 − ε(h)` underflows relative precision
    /// for `h` near `K`. `-inf` at `h = K`.
    log_complement: Vec<f64>,
}

pub fn epsilon_schedule(k: usize, beta: f64) -> Result<EpsilonSchedule> {
    if k == 0 {
        return Err(Error::InvalidParameter("epsilon schedule needs K >= 1".into()));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
    }
    let ln_share = beta.ln() - (k as f64).ln();
    let mut values = Vec::with_capacity(k + 1);
    let mut log_complement = Vec::with_capacity(k + 1);
    for h in 0..k {
        let lc = (ln_share - ln_binomial(k, h)) / (k - h) as f64;
        log_complement.push(lc);
        values.push((-lc.exp_m1()).clamp(0.0, 1.0));
    }
    values.push(1.0);
    log_complement.push(f64::NEG_INFINITY);
    Ok(EpsilonSchedule { k, beta, values, log_complement })
}

impl EpsilonSchedule {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ε(0), …, ε(K)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_complement(&self) -> &[f64] {
        &self.log_complement
    }

    pub fn epsilon(&self, h: usize) -> Result<f64> {
        self.values
            .get(h)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("support size {h} exceeds K = {}", self.k)))
    }

    /// `Σ_{h<K} binom(K, h) (1 − ε(h))^{K−h}`, summed in log space.
    pub fn identity_sum(&self) -> f64 {
        let logs: Vec<f64> = (0..self.k)
            .map(|h| ln_binomial(self.k, h) + (self.k - h) as f64 * self.log_complement[h])
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }

    /// Relative deviation of [`identity_sum`](Self::identity_sum) from `β`.
    pub fn identity_error(&self) -> f64 {
        (self.identity_sum() - self.beta.ln()).exp_m1().abs()
    }

    /// First `h ≤ up_to` with `ε(h) < ε(h − 1)`, if any.
    pub fn first_decrease(&self, up_to: usize) -> Option<usize> {
        (1..=up_to.min(self.k)).find(|&h| self.values[h] < self.values[h - 1])
    }

    pub fn is_nondecreasing_up_to(&self, up_to: usize) -> bool {
        self.first_decrease(up_to).is_none()
    }
}
