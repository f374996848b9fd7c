//! Closed-form tail bounds: Azuma-Hoeffding, the Bohman inequality for
//! `(η, N)`-bounded supermartingales, a two-sided Chernoff bound, and the
//! union bound over all `m`-sets at the tracking horizon.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{ln_binomial, ln_factorial, pairs};
use crate::error::{Error, Result};
use crate::trajectory::{beta, i0_p0, sigma, TrajectoryParams};

/// `exp(-a²/(2 Σ c_i²))`.
pub fn azuma_bound(a: f64, c: &[f64]) -> Result<f64> {
    if a < 0.0 || !a.is_finite() {
        return Err(Error::BoundHypothesis(format!("need a >= 0, got {a}")));
    }
    if c.is_empty() || c.iter().any(|&x| x.is_nan() || x <= 0.0) {
        return Err(Error::BoundHypothesis("step bounds c_i must be positive".into()));
    }
    let s: f64 = c.iter().map(|x| x * x).sum();
    Ok((-a * a / (2.0 * s)).exp())
}

/// `exp(-a²/(3ℓηN))` for `η <= N/10` and `0 < a < ηℓ`.
pub fn bohman_bound(a: f64, ell: f64, eta: f64, big_n: f64) -> Result<f64> {
    if !(eta > 0.0 && big_n > 0.0 && ell > 0.0) {
        return Err(Error::BoundHypothesis("η, N and ℓ must be positive".into()));
    }
    if eta > big_n / 10.0 {
        return Err(Error::BoundHypothesis(format!("η = {eta} exceeds N/10 = {}", big_n / 10.0)));
    }
    if !(a > 0.0 && a < eta * ell) {
        return Err(Error::BoundHypothesis(format!("need 0 < a < ηℓ = {}, got a = {a}", eta * ell)));
    }
    Ok((-a * a / (3.0 * ell * eta * big_n)).exp())
}

/// `P(|X - np| > ξ) <= 2 exp(-ξ²/(3np))` for `X ~ Bin(n, p)`, `0 < ξ <= np`.
pub fn chernoff_bound(n: u64, p: f64, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BoundHypothesis(format!("p = {p} not in [0, 1]")));
    }
    let np = n as f64 * p;
    if !(xi > 0.0 && xi <= np) {
        return Err(Error::BoundHypothesis(format!("need 0 < ξ <= np = {np}, got ξ = {xi}")));
    }
    Ok(2.0 * (-xi * xi / (3.0 * np)).exp())
}

/// Growth exponent `k - m - (C(k,2)-C(m,2))/(2C(k,2)-2)` of the Chernoff
/// exponent for one `m`-set at the horizon.
pub fn theta_exponent(k: usize, m: usize) -> Ratio<i64> {
    let c = pairs(k) as i64;
    Ratio::from_integer((k - m) as i64) - Ratio::new(c - pairs(m) as i64, 2 * c - 2)
}

/// The same exponent assembled from its parts: `ξ²` grows like `n^(2β_m)`,
/// the variance like `n^(k-m) p_0^(C(k,2)-C(m,2))`, and `p_0` like
/// `n^(-1/(k(k-1)-2))`.
pub fn assembled_exponent(k: usize, m: usize) -> Ratio<i64> {
    let c = pairs(k) as i64;
    let e = c - pairs(m) as i64;
    let beta_m = Ratio::from_integer((k - m) as i64) - Ratio::new(e, 2 * c - 2);
    beta_m * 2 - Ratio::from_integer((k - m) as i64) + Ratio::new(e, (k * (k - 1) - 2) as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionTerm {
    pub m: usize,
    pub xi: f64,
    /// `c·(k-m)!·ξ²/(3 n^(k-m) p_0^(C(k,2)-C(m,2)))`
    pub exponent_arg: f64,
    /// `ln(C(n,m) · 2 · exp(-exponent_arg))`
    pub ln_term: f64,
    pub theta_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionBound {
    pub n: usize,
    pub k: usize,
    pub p0: f64,
    pub sigma: f64,
    pub constant_c: f64,
    /// `p_0 >= 1`: no horizon exists at this `n`; terms are still evaluated.
    pub p0_vacuous: bool,
    pub terms: Vec<UnionTerm>,
    pub ln_total: f64,
    pub total: f64,
    pub increasing_in_m: bool,
}

/// Bound on the probability that some `R_{k,U_m}` leaves its band at `p_0`.
/// Terms underflow f64 at any interesting `n`, so they are kept as logs.
/// `constant_c` scales every exponent; 1 reproduces the display.
pub fn horizon_union_bound(params: &TrajectoryParams, constant_c: f64) -> Result<UnionBound> {
    params.validate()?;
    if constant_c.is_nan() || constant_c <= 0.0 {
        return Err(Error::InvalidConfig(format!("constant c must be positive, got {constant_c}")));
    }
    let (n, k) = (params.n, params.k);
    let nf = n as f64;
    let ln_n = nf.ln();
    let horizon = i0_p0(params);
    let p0 = horizon.p0;
    let s = sigma(p0, k)?;
    let mut terms = Vec::new();
    for m in 2..k {
        let e = (pairs(k) - pairs(m)) as f64;
        let ln_xi = s.abs().ln() + beta(k, m)? * ln_n + params.gamma(m) * ln_n.ln();
        let ln_arg = constant_c.ln() + ln_factorial(k - m) + 2.0 * ln_xi
            - 3f64.ln()
            - (k - m) as f64 * ln_n
            - e * p0.ln();
        let arg = ln_arg.exp();
        let theta = theta_exponent(k, m);
        terms.push(UnionTerm {
            m,
            xi: ln_xi.exp(),
            exponent_arg: arg,
            ln_term: ln_binomial(nf, m) + 2f64.ln() - arg,
            theta_exponent: *theta.numer() as f64 / *theta.denom() as f64,
        });
    }
    let top = terms.iter().map(|t| t.ln_term).fold(f64::NEG_INFINITY, f64::max);
    let ln_total = top + terms.iter().map(|t| (t.ln_term - top).exp()).sum::<f64>().ln();
    Ok(UnionBound {
        n,
        k,
        p0,
        sigma: s,
        constant_c,
        p0_vacuous: horizon.vacuous_at_this_n,
        increasing_in_m: terms.windows(2).all(|w| w[0].ln_term < w[1].ln_term),
        terms,
        ln_total,
        total: ln_total.exp(),
    })
}
