//! Closed-form layer: edge density, predicted trajectories, error
//! envelopes, critical intervals, residual processes and the final-size
//! bound. All logarithms are natural. Everything here is pure.
//!
//! The envelope formulas are asymptotic statements. At desk-scale `n` the
//! tracking horizon `i_0` is usually vacuous (`p_0 >= 1`); [`Horizon`]
//! reports that instead of clamping.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{factorial, ln_factorial, pairs};
use crate::error::{Error, Result};

/// Constants fixing every envelope formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub mu: f64,
    /// `gamma[m]` for `m` in `2..k`.
    pub gamma: BTreeMap<usize, f64>,
    pub p_floor: f64,
}

impl TrajectoryParams {
    /// `λ = 1`, `μ = 2`, `γ_m = 1`, `p_floor = 0.3`: the smallest integers
    /// meeting the constraint list, valid for every `k >= 4`.
    pub fn defaults(k: usize, n: usize) -> Result<Self> {
        let params = TrajectoryParams {
            k,
            n,
            lambda: 1.0,
            mu: 2.0,
            gamma: (2..k).map(|m| (m, 1.0)).collect(),
            p_floor: 0.3,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn gamma(&self, m: usize) -> f64 {
        self.gamma.get(&m).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        require_k4(k)?;
        if self.n < k {
            return Err(Error::InvalidOrder { k, n: self.n });
        }
        if !(self.p_floor > 0.0 && self.p_floor <= 1.0) {
            return Err(Error::InvalidConfig(format!("p_floor {} not in (0, 1]", self.p_floor)));
        }
        let ck2 = pairs(k) as f64;
        if (ck2 + 1.0) * self.lambda <= self.mu + 2.0 {
            return Err(Error::InvalidConfig(format!(
                "need (C(k,2)+1)·λ > μ + 2, got λ = {}, μ = {}",
                self.lambda, self.mu
            )));
        }
        for m in 2..k {
            let g = self.gamma(m);
            if (ck2 - pairs(m) as f64) * self.lambda <= g + 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "need (C(k,2)-C({m},2))·λ > γ_{m} + 1, got γ_{m} = {g}"
                )));
            }
        }
        if self.gamma(2) <= 0.5 {
            return Err(Error::InvalidConfig(format!("need γ_2 > 1/2, got {}", self.gamma(2))));
        }
        Ok(())
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }
}

fn require_k4(k: usize) -> Result<()> {
    if k < 4 {
        Err(Error::OrderTooSmall { k, min: 4 })
    } else {
        Ok(())
    }
}

/// `n^e · c`, switching to log space when `n^e` would overflow.
fn scaled_pow(n: f64, e: f64, ln_c: f64) -> f64 {
    (e * n.ln() + ln_c).exp()
}

/// Edge density after `i` steps: `1 - k(k-1)i/n²`.
pub fn p_of(i: f64, n: usize, k: usize) -> Result<f64> {
    let nn = n as f64;
    let p = 1.0 - (k * (k - 1)) as f64 * i / (nn * nn);
    if p < 0.0 || i < 0.0 {
        return Err(Error::DensityOutOfRange { i, p });
    }
    Ok(p)
}

/// `(n²p - n)/2`, which equals `C(n,2) - C(k,2)·i` exactly.
pub fn edges_expected(i: f64, n: usize, k: usize) -> Result<f64> {
    let p = p_of(i, n, k)?;
    let nn = n as f64;
    Ok((nn * nn * p - nn) / 2.0)
}

fn power_term(n: usize, n_exp: usize, fact: usize, p: f64, p_exp: usize) -> f64 {
    let nn = n as f64;
    if p == 0.0 {
        return if p_exp == 0 { power_term(n, n_exp, fact, 1.0, 0) } else { 0.0 };
    }
    if n_exp as f64 * nn.log10() < 250.0 {
        nn.powi(n_exp as i32) / factorial(fact) * p.powi(p_exp as i32)
    } else {
        (n_exp as f64 * nn.ln() - ln_factorial(fact) + p_exp as f64 * p.ln()).exp()
    }
}

/// `n^k/k! · p^C(k,2)`. Uses `n^k`, not the falling factorial, so at small
/// `n` it exceeds `C(n,k)` at `p = 1` by the factor `n^k / (k! C(n,k))`.
pub fn q_traj(p: f64, n: usize, k: usize) -> f64 {
    power_term(n, k, k, p, pairs(k))
}

/// `n^(k-m)/(k-m)! · p^(C(k,2) - C(m,2))`.
pub fn r_traj(p: f64, n: usize, k: usize, m: usize) -> f64 {
    power_term(n, k - m, k - m, p, pairs(k) - pairs(m))
}

/// `σ(p) = 1 - (k(k-1)/4)·ln p`.
pub fn sigma(p: f64, k: usize) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::NonPositiveDensity(p));
    }
    Ok(1.0 - (k * (k - 1)) as f64 / 4.0 * p.ln())
}

/// `dσ/dt = k²(k-1)²/(4p)` with `t = i/n²`.
pub fn sigma_prime(p: f64, k: usize) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::NonPositiveDensity(p));
    }
    let kk = (k * (k - 1)) as f64;
    Ok(kk * kk / (4.0 * p))
}

pub fn alpha_exact(k: usize) -> Result<Ratio<i64>> {
    require_k4(k)?;
    let c = pairs(k) as i64;
    Ok(Ratio::from_integer(k as i64) - Ratio::new(c + 1, 2 * c - 2))
}

pub fn beta_exact(k: usize, m: usize) -> Result<Ratio<i64>> {
    require_k4(k)?;
    if m < 2 || m >= k {
        return Err(Error::SetSize { size: m, min: 2, max: k - 1 });
    }
    let c = pairs(k) as i64;
    Ok(Ratio::from_integer((k - m) as i64) - Ratio::new(c - pairs(m) as i64, 2 * c - 2))
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exponent of the lower-envelope width of `Q_k`.
pub fn alpha(k: usize) -> Result<f64> {
    alpha_exact(k).map(to_f64)
}

/// Exponent of the band half-width of `R_{k,U_m}`.
pub fn beta(k: usize, m: usize) -> Result<f64> {
    beta_exact(k, m).map(to_f64)
}

/// Tracking horizon `i_0` and its density `p_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub i0: f64,
    pub p0: f64,
    /// `p_0 >= 1` or `i_0 <= 0`: the guarantee is empty at this `n`.
    pub vacuous_at_this_n: bool,
}

fn barrier_exponent(k: usize) -> f64 {
    1.0 / (k * (k - 1) - 2) as f64
}

pub fn i0_p0(params: &TrajectoryParams) -> Horizon {
    let k = params.k;
    let n = params.n as f64;
    let kk = (k * (k - 1)) as f64;
    let cube2 = 2f64.cbrt();
    let d = barrier_exponent(k);
    let log_term = params.ln_n().powf(params.lambda);
    let p0 = cube2 * n.powf(-d) * log_term;
    let i0 = n * n / kk - cube2 / kk * n.powf(2.0 - d) * log_term;
    Horizon {
        i0,
        p0,
        vacuous_at_this_n: p0 >= 1.0 || i0 <= 0.0,
    }
}

/// Smallest `n >= 3` above which `p_0 < 1`, i.e. the larger root of
/// `n^(1/(k(k-1)-2)) = 2^(1/3) ln^λ n`. Solved in `x = ln n` by bisection.
pub fn p0_threshold_n(k: usize, lambda: f64) -> Result<f64> {
    require_k4(k)?;
    let d = (k * (k - 1) - 2) as f64;
    // f(x) = x/d - ln 2 / 3 - λ ln ln n; convex in ln x, minimum at x = λd
    let f = |x: f64| x / d - 2f64.ln() / 3.0 - lambda * x.ln();
    let mut lo = (lambda * d).max(3f64.ln());
    if f(lo) > 0.0 {
        return Ok(3.0);
    }
    let mut hi = lo * 2.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBand {
    pub m: usize,
    pub traj: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub p: f64,
    pub sigma: f64,
    pub q_traj: f64,
    pub q_upper: f64,
    pub q_lower: f64,
    pub r: Vec<RBand>,
}

impl Envelope {
    pub fn band(&self, m: usize) -> Option<&RBand> {
        self.r.iter().find(|b| b.m == m)
    }
}

fn q_upper_width(params: &TrajectoryParams, p: f64) -> f64 {
    let k = params.k;
    // p^(C(k,2)-4) has a non-negative exponent for k >= 4
    scaled_pow(params.n as f64, (k - 1) as f64, (0.5f64).ln()) * p.powi(pairs(k) as i32 - 4)
}

fn q_lower_width_unit(params: &TrajectoryParams, p: f64) -> Result<f64> {
    let a = alpha(params.k)?;
    Ok(scaled_pow(params.n as f64, a, 0.0) / p * params.ln_n().powf(params.mu))
}

fn r_width_unit(params: &TrajectoryParams, m: usize) -> Result<f64> {
    let b = beta(params.k, m)?;
    Ok(scaled_pow(params.n as f64, b, 0.0) * params.ln_n().powf(params.gamma(m)))
}

pub fn envelopes(params: &TrajectoryParams, p: f64) -> Result<Envelope> {
    let (k, n) = (params.k, params.n);
    let s = sigma(p, k)?;
    let q = q_traj(p, n, k);
    let r = (2..k)
        .map(|m| {
            Ok(RBand {
                m,
                traj: r_traj(p, n, k, m),
                half_width: s * r_width_unit(params, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Envelope {
        p,
        sigma: s,
        q_traj: q,
        q_upper: q + q_upper_width(params, p),
        q_lower: q - s * s * q_lower_width_unit(params, p)?,
        r,
    })
}

/// Ratio of the `Q_k` main term to the lower-envelope width at `p`.
pub fn q_main_over_lower_width(params: &TrajectoryParams, p: f64) -> Result<f64> {
    let s = sigma(p, params.k)?;
    Ok(q_traj(p, params.n, params.k) / (s * s * q_lower_width_unit(params, p)?))
}

/// Ratio of the `Q_k` main term to the upper-envelope width at `p`.
pub fn q_main_over_upper_width(params: &TrajectoryParams, p: f64) -> Result<f64> {
    require_k4(params.k)?;
    Ok(q_traj(p, params.n, params.k) / q_upper_width(params, p))
}

pub fn b_constant_exact(k: usize) -> Result<Ratio<i64>> {
    require_k4(k)?;
    let c = pairs(k) as i64;
    let fact: i64 = (1..=(k as i64 - 4)).product();
    Ok(Ratio::new(1, 2) - Ratio::new(1, 2 * c) + Ratio::new(1, 3 * c * fact))
}

/// Lower endpoint coefficient of the upper critical interval for `Q_k`.
pub fn b_constant(k: usize) -> Result<f64> {
    b_constant_exact(k).map(to_f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalIntervals {
    pub p: f64,
    pub q_upper: (f64, f64),
    pub q_lower: (f64, f64),
    /// `(m, (lo, hi))` for `m` in `2..k`.
    pub r_upper: Vec<(usize, (f64, f64))>,
}

pub fn critical_intervals(params: &TrajectoryParams, p: f64) -> Result<CriticalIntervals> {
    let (k, n) = (params.k, params.n);
    let s = sigma(p, k)?;
    let q = q_traj(p, n, k);
    let upper_unit = q_upper_width(params, p) * 2.0;
    let b = b_constant(k)?;
    let lower_unit = q_lower_width_unit(params, p)?;
    let r_upper = (2..k)
        .map(|m| {
            let r = r_traj(p, n, k, m);
            let w = r_width_unit(params, m)?;
            Ok((m, (r + (s - 1.0) * w, r + s * w)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalIntervals {
        p,
        q_upper: (q + b * upper_unit, q + 0.5 * upper_unit),
        q_lower: (q - s * s * lower_unit, q - s * (s - 1.0) * lower_unit),
        r_upper,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Distance of `Q_k` above the upper envelope.
    pub u: f64,
    /// Distance of `Q_k` above the lower envelope.
    pub l: f64,
    /// `(m, Z_m)`: `R` minus the inner endpoint of its upper critical interval.
    pub z: Vec<(usize, f64)>,
}

pub fn residuals(params: &TrajectoryParams, p: f64, q_observed: f64, r_observed: &[(usize, f64)]) -> Result<Residuals> {
    let (k, n) = (params.k, params.n);
    let s = sigma(p, k)?;
    let q = q_traj(p, n, k);
    let z = r_observed
        .iter()
        .map(|&(m, r)| Ok((m, r - r_traj(p, n, k, m) - (s - 1.0) * r_width_unit(params, m)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Residuals {
        u: q_observed - q - q_upper_width(params, p),
        l: q_observed - q + s * s * q_lower_width_unit(params, p)?,
        z,
    })
}

/// `2 - 1/(k(k-1)-2)`.
pub fn final_size_exponent(k: usize) -> f64 {
    2.0 - barrier_exponent(k)
}

/// `(2^(1/3)/2)·n^(2 - 1/(k(k-1)-2))·ln^λ n`, the edge count at `i_0`.
pub fn final_size_bound(params: &TrajectoryParams) -> f64 {
    let n = params.n as f64;
    2f64.cbrt() / 2.0 * n.powf(final_size_exponent(params.k)) * params.ln_n().powf(params.lambda)
}

/// `n^(-1/(k(k-1)-2))`, log factors omitted.
pub fn barrier_p(k: usize, n: usize) -> f64 {
    (n as f64).powf(-barrier_exponent(k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: f64,
    pub envelope: Envelope,
}

/// Envelopes on a uniform grid of `points` values from `p_floor` to 1.
pub fn curves(params: &TrajectoryParams, points: usize) -> Result<Vec<CurveRow>> {
    let points = points.max(2);
    (0..points)
        .map(|j| {
            let p = params.p_floor + (1.0 - params.p_floor) * j as f64 / (points - 1) as f64;
            Ok(CurveRow { p, envelope: envelopes(params, p)? })
        })
        .collect()
}

pub fn write_curves_csv<W: Write>(params: &TrajectoryParams, rows: &[CurveRow], mut out: W) -> std::io::Result<()> {
    write!(out, "p,q_traj,q_upper,q_lower")?;
    for m in 2..params.k {
        write!(out, ",r_traj_m{m},band_m{m}")?;
    }
    writeln!(out)?;
    for row in rows {
        let e = &row.envelope;
        write!(out, "{},{},{},{}", row.p, e.q_traj, e.q_upper, e.q_lower)?;
        for b in &e.r {
            write!(out, ",{},{}", b.traj, b.half_width)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
