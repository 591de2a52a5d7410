//! Closed-form asymptotic predictors for `P(n)` and the digit statistics.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BaseSystem, Statistic};
use crate::saddle::GfKind;
use crate::wide::ln_biguint;

/// `κ = log d / (m! ∏ log p_j)`.
pub fn kappa(system: &BaseSystem) -> f64 {
    let factorial: f64 = (1..=system.m()).map(|k| k as f64).product();
    (system.digit_bound() as f64).ln() / (factorial * system.log_base_product())
}

/// Leading coefficient function of the series at `u`: `f_m(u)`, `g_m(u)` or
/// `h_{b,m}(u)`, so that the series is `≈ coeff/m! · (log 1/t)^m` as `t → 0`.
pub fn leading_coefficient(system: &BaseSystem, kind: GfKind, u: f64) -> f64 {
    let d = system.digit_bound() as f64;
    let numerator = match kind {
        GfKind::F => (0..system.digit_bound()).map(|a| u.powi(a as i32)).sum::<f64>().ln(),
        GfKind::G => (1.0 + (d - 1.0) * u).ln(),
        GfKind::H(_) => (d - 1.0 + u).ln(),
    };
    numerator / system.log_base_product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Constants {
    pub kappa: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// `f_{m-1}(1) / (m-1)! = κ m (Σ log p_j − log d) / 2`.
    pub subleading: f64,
    /// Set for `m = 2`, where only the first two terms are backed by the expansion.
    pub reduced_validity: bool,
}

pub fn theorem1_constants(system: &BaseSystem) -> Theorem1Constants {
    let k = kappa(system);
    let m = system.m() as f64;
    let log_d = (system.digit_bound() as f64).ln();
    let sum_logs: f64 = system.bases().iter().map(|&p| (p as f64).ln()).sum();
    Theorem1Constants {
        kappa: k,
        c0: k,
        c1: -m * (m - 1.0) * k,
        c2: k * m * (1.0 + 0.5 * sum_logs - 0.5 * log_d - (k * m).ln()),
        subleading: k * m * (sum_logs - log_d) / 2.0,
        reduced_validity: system.m() < 3,
    }
}

/// `C0 (log n)^m + C1 (log n)^{m-1} log log n + C2 (log n)^{m-1}`.
pub fn theorem1_log_estimate(system: &BaseSystem, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n}: the expansion needs n ≥ 3")));
    }
    let c = theorem1_constants(system);
    let ln = (n as f64).ln();
    let m = system.m() as i32;
    Ok(c.c0 * ln.powi(m) + c.c1 * ln.powi(m - 1) * ln.ln() + c.c2 * ln.powi(m - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Constants {
    pub kappa: f64,
    pub k0: f64,
    pub k1: f64,
}

pub fn theorem2_constants(system: &BaseSystem) -> Result<Theorem2Constants> {
    if system.m() != 2 {
        return Err(Error::WrongArity { expected: 2, actual: system.m() });
    }
    let k = kappa(system);
    let shift = 0.5 * log_sum_minus_log_d(system);
    let l = (2.0 * k).ln();
    Ok(Theorem2Constants { kappa: k, k0: 0.5 + 2.0 * k * (l - shift), k1: 2.0 * k * (1.0 - l + shift) - 1.0 })
}

fn log_sum_minus_log_d(system: &BaseSystem) -> f64 {
    system.bases().iter().map(|&p| (p as f64).ln()).sum::<f64>() - (system.digit_bound() as f64).ln()
}

/// `K0 log log n + K1 log n + κ log²(n / log n)`: the log of the two-base
/// closed form without its fluctuating factor.
pub fn theorem2_log_main_term(system: &BaseSystem, n: u64) -> Result<f64> {
    let c = theorem2_constants(system)?;
    if n < 3 {
        return Err(Error::Domain(format!("n = {n}: the expansion needs n ≥ 3")));
    }
    let ln = (n as f64).ln();
    Ok(c.k0 * ln.ln() + c.k1 * ln + c.kappa * (ln - ln.ln()).powi(2))
}

/// `log K(n)` for the exact count `p_n = P(n)`.
pub fn log_fluctuation(system: &BaseSystem, n: u64, p_n: &BigUint) -> Result<f64> {
    let main = theorem2_log_main_term(system, n)?;
    if p_n.bits() == 0 {
        return Err(Error::Domain("P(n) must be positive".into()));
    }
    Ok(ln_biguint(p_n) - main)
}

/// The fluctuating factor `K(n) = P(n) / ((log n)^{K0} n^{K1} e^{κ log²(n/log n)})`.
#[allow(non_snake_case)]
pub fn fluctuation_K(system: &BaseSystem, n: u64, p_n: &BigUint) -> Result<f64> {
    log_fluctuation(system, n, p_n).map(f64::exp)
}

/// Leading-order predictor `(log n)² / (2 log p)` of `log P(p n)` for the
/// two-base system `{2, p}` with binary digits.
pub fn mahler_log_estimate(p: u64, n: u64) -> Result<f64> {
    if p < 3 {
        return Err(Error::Domain(format!("p = {p} must be at least 3")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    Ok((n as f64).ln().powi(2) / (2.0 * (p as f64).ln()))
}

/// Three-term refinement of [`mahler_log_estimate`], accurate to `O(1)`.
pub fn pennington_log_estimate(p: u64, n: u64) -> Result<f64> {
    if p < 3 {
        return Err(Error::Domain(format!("p = {p} must be at least 3")));
    }
    if n < 16 {
        return Err(Error::Domain(format!("n = {n}: the expansion needs n ≥ 16")));
    }
    let lp = (p as f64).ln();
    let llp = lp.ln();
    let ln = (n as f64).ln();
    let lln = ln.ln();
    Ok((ln - lln).powi(2) / (2.0 * lp) + (0.5 + 1.0 / lp + llp / lp) * ln - (1.0 + llp / lp) * lln)
}

/// Leading terms `mean_coeff (log n)^m` and `var_coeff (log n)^m` of the
/// Gaussian limit law of a digit statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltPrediction {
    pub statistic: Statistic,
    pub mean_coeff: f64,
    pub var_coeff: f64,
}

impl CltPrediction {
    pub fn mean(&self, system: &BaseSystem, n: u64) -> f64 {
        self.mean_coeff * (n as f64).ln().powi(system.m() as i32)
    }

    pub fn variance(&self, system: &BaseSystem, n: u64) -> f64 {
        self.var_coeff * (n as f64).ln().powi(system.m() as i32)
    }
}

pub fn clt_prediction(system: &BaseSystem, stat: Statistic) -> Result<CltPrediction> {
    let stat = stat.validate(system)?;
    let k = kappa(system);
    let d = system.digit_bound() as f64;
    let log_d = d.ln();
    let (mean_coeff, var_coeff) = match stat {
        Statistic::SumOfDigits => (k * (d - 1.0) / (2.0 * log_d), k * (d - 1.0) * (d + 1.0) / (12.0 * log_d)),
        Statistic::HammingWeight => (k * (d - 1.0) / (d * log_d), k * (d - 1.0) / (d * d * log_d)),
        Statistic::DigitCount(_) => (k / (d * log_d), k * (d - 1.0) / (d * d * log_d)),
    };
    Ok(CltPrediction { statistic: stat, mean_coeff, var_coeff })
}
