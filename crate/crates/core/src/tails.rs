//! Numerical checks of the tail estimates behind the saddle-point method.
//!
//! Off the real axis the generating functions decay like `exp(-C Σ(r,y))`,
//! where `Σ(r,y) = Σ_{h ∈ S, h ≤ 1/r} ‖hy‖²` and `‖·‖` is the distance to the
//! nearest integer. `Σ` in turn grows like `(log 1/r)^{m-1}` away from `y = 0`.

use std::f64::consts::PI;
use std::num::NonZeroU32;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BaseSystem;
use crate::saddle::{tail_sum_bound, GfKind};
use crate::seq::elements_upto;

/// `C = 4 / (25 e)`.
pub fn tail_constant() -> f64 {
    4.0 / (25.0 * std::f64::consts::E)
}

fn nearest_integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn check_point(r: f64, y: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, 1)")));
    }
    if !(-0.5..=0.5).contains(&y) {
        return Err(Error::Domain(format!("y = {y} must lie in [-1/2, 1/2]")));
    }
    Ok(())
}

/// `Σ(r, y)` over `h ∈ S ∩ [1, 1/r]`.
pub fn sigma_sum(system: &BaseSystem, r: f64, y: f64) -> Result<f64> {
    check_point(r, y)?;
    Ok(sigma_over(&elements_upto(system, (1.0 / r).floor() as u64), y))
}

fn sigma_over(elements: &[u64], y: f64) -> f64 {
    elements.iter().map(|&h| nearest_integer_distance(h as f64 * y).powi(2)).sum()
}

/// Truncation tolerance for [`tail_ratio`].
const RATIO_TOLERANCE: f64 = 1e-12;

/// `log(|Q(ζ)| / Q(|ζ|))` for one factor with `ζ = w e^{iθ}`.
fn log_factor_ratio(coeffs: &[(f64, f64, f64)], w: f64, theta: f64) -> f64 {
    let (mut re, mut im, mut abs) = (0.0, 0.0, 0.0);
    let mut wa = 1.0;
    for (a, &(c, _, _)) in coeffs.iter().enumerate() {
        let angle = a as f64 * theta;
        re += c * wa * angle.cos();
        im += c * wa * angle.sin();
        abs += c * wa;
        wa *= w;
    }
    0.5 * (re * re + im * im).ln() - abs.ln()
}

/// `log(|F(z,u)| / F(|z|,u))` at `z = e^{-r + 2πiy}` (or the `G`, `H_b` analogue).
///
/// Every factor has modulus ratio at most 1, so dropping the factors with
/// `h r` beyond the cutoff can only raise the result: the truncated value is
/// an upper bound, which is the safe side for checking decay.
pub fn log_tail_ratio(system: &BaseSystem, kind: GfKind, r: f64, y: f64, u: f64) -> Result<f64> {
    check_point(r, y)?;
    let kind = kind.validate(system)?;
    if !(0.5..=2.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} lies outside [1/2, 2]")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let coeffs = kind.coefficients(system.digit_bound(), u);
    // for s1·w ≤ 1/2 each dropped factor contributes at most 3·s1·w in absolute value
    let s1: f64 = coeffs.iter().skip(1).map(|c| c.0).sum();
    let log_bases: Vec<f64> = system.bases().iter().map(|&p| (p as f64).ln()).collect();
    let mut cutoff = (2.0 * s1).ln().max(0.0) + 1.0;
    loop {
        let x = cutoff / r;
        if x > 4.0e18 {
            return Err(Error::ToleranceUnreachable(format!("r = {r:e} is too small")));
        }
        if 3.0 * s1 * tail_sum_bound(&log_bases, x, r, 0) <= RATIO_TOLERANCE {
            break;
        }
        cutoff *= 1.5;
    }
    let elements = elements_upto(system, (cutoff / r).floor() as u64);
    Ok(elements
        .iter()
        .map(|&h| {
            let h = h as f64;
            let theta = 2.0 * PI * (h * y - (h * y).round());
            log_factor_ratio(&coeffs, (-h * r).exp(), theta)
        })
        .sum::<f64>()
        .min(0.0))
}

/// `|F(e^{-r+2πiy}, u)| / F(e^{-r}, u)`.
pub fn tail_ratio(system: &BaseSystem, kind: GfKind, r: f64, y: f64, u: f64) -> Result<f64> {
    log_tail_ratio(system, kind, r, y, u).map(f64::exp)
}

/// Which series and `u` values a tail check covers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCheck {
    pub kinds: Vec<GfKind>,
    pub u_values: Vec<f64>,
    /// Rationals `a/q` with `q` up to this bound join the uniform grid.
    pub max_denominator: u64,
}

impl TailCheck {
    /// All series of the system at `u ∈ {1/2, 1, 2}`.
    pub fn all_series(system: &BaseSystem) -> Self {
        let mut kinds = vec![GfKind::F, GfKind::G];
        kinds.extend((1..system.digit_bound()).filter_map(NonZeroU32::new).map(GfKind::H));
        TailCheck { kinds, u_values: vec![0.5, 1.0, 2.0], max_denominator: 64 }
    }
}

/// Summary for one value of `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSummary {
    pub r: f64,
    pub points: usize,
    /// Largest constant `A1` with `Σ ≥ A1 (y/r)² (log 1/r)^{m-1}` on `0 < |y| ≤ r/2`.
    pub fitted_a1: f64,
    /// Largest constant `A2` with `Σ ≥ A2 (log 1/r)^{m-1}` on `|y| ≥ r/2`.
    pub fitted_a2: f64,
    /// Largest `log ratio + C Σ` seen; the decay bound holds when this is ≤ 0.
    pub worst_margin: f64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub c: f64,
    pub y_resolution: usize,
    pub check: TailCheck,
    pub per_r: Vec<TailSummary>,
    pub fitted_a1: f64,
    pub fitted_a2: f64,
    pub violations: u64,
}

/// Uniform grid of `resolution` points on `[-1/2, 1/2]`, the rationals
/// `a/q` with `q ≤ max_denominator`, and a fine grid on `|y| ≤ r/2`.
pub fn y_grid(r: f64, resolution: usize, max_denominator: u64) -> Vec<f64> {
    let mut ys: Vec<f64> = Vec::new();
    if resolution >= 2 {
        ys.extend((0..resolution).map(|k| -0.5 + k as f64 / (resolution - 1) as f64));
    }
    for q in 1..=max_denominator {
        for a in 0..=q / 2 {
            let y = a as f64 / q as f64;
            ys.push(y);
            ys.push(-y);
        }
    }
    for k in 1..=32 {
        let y = 0.5 * r * k as f64 / 32.0;
        ys.push(y);
        ys.push(-y);
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    ys
}

/// Slack for rounding in the pointwise decay check.
const DECAY_SLACK: f64 = 1e-10;

pub fn verify_tail_bounds(system: &BaseSystem, r_list: &[f64], y_resolution: usize) -> Result<TailReport> {
    verify_tail_bounds_with(system, r_list, y_resolution, &TailCheck::all_series(system))
}

pub fn verify_tail_bounds_with(
    system: &BaseSystem,
    r_list: &[f64],
    y_resolution: usize,
    check: &TailCheck,
) -> Result<TailReport> {
    let c = tail_constant();
    let mut per_r = Vec::with_capacity(r_list.len());
    for &r in r_list {
        check_point(r, 0.0)?;
        let elements = elements_upto(system, (1.0 / r).floor() as u64);
        let scale = (1.0 / r).ln().powi(system.m() as i32 - 1);
        let mut summary = TailSummary {
            r,
            points: 0,
            fitted_a1: f64::INFINITY,
            fitted_a2: f64::INFINITY,
            worst_margin: f64::NEG_INFINITY,
            violations: 0,
        };
        for y in y_grid(r, y_resolution, check.max_denominator) {
            let sigma = sigma_over(&elements, y);
            if y != 0.0 {
                if y.abs() <= r / 2.0 {
                    summary.fitted_a1 = summary.fitted_a1.min(sigma / ((y / r).powi(2) * scale));
                }
                if y.abs() >= r / 2.0 {
                    summary.fitted_a2 = summary.fitted_a2.min(sigma / scale);
                }
                if sigma <= 0.0 {
                    summary.violations += 1;
                }
            }
            for &kind in &check.kinds {
                for &u in &check.u_values {
                    let margin = log_tail_ratio(system, kind, r, y, u)? + c * sigma;
                    summary.points += 1;
                    summary.worst_margin = summary.worst_margin.max(margin);
                    if margin > DECAY_SLACK {
                        summary.violations += 1;
                    }
                }
            }
        }
        per_r.push(summary);
    }
    let fold = |f: fn(&TailSummary) -> f64| per_r.iter().map(f).fold(f64::INFINITY, f64::min);
    let fitted_a1 = fold(|s| s.fitted_a1);
    let fitted_a2 = fold(|s| s.fitted_a2);
    let violations = per_r.iter().map(|s| s.violations).sum();
    Ok(TailReport { c, y_resolution, check: check.clone(), per_r, fitted_a1, fitted_a2, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(bases: &[u64], d: u32) -> BaseSystem {
        BaseSystem::new(bases, d).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let s = sys(&[2, 3], 2);
        assert_eq!(sigma_sum(&s, 0.01, 0.0).unwrap(), 0.0);
        assert!((sigma_sum(&s, 0.01, 0.5).unwrap() - 1.25).abs() < 1e-12);
        for y in [0.1, 0.237, 0.49] {
            assert_eq!(sigma_sum(&s, 0.01, y).unwrap(), sigma_sum(&s, 0.01, -y).unwrap());
        }
        assert!(sigma_sum(&s, 0.0, 0.1).is_err());
        assert!(sigma_sum(&s, 0.1, 0.6).is_err());
    }

    #[test]
    fn ratio_examples() {
        let s = sys(&[2, 3], 2);
        assert_eq!(tail_ratio(&s, GfKind::F, 0.01, 0.0, 1.0).unwrap(), 1.0);
        let ratio = tail_ratio(&s, GfKind::F, 0.01, 0.5, 1.0).unwrap();
        assert!(ratio <= (-tail_constant() * 1.25).exp());
        assert!(ratio > 0.0);
    }

    #[test]
    fn ratio_matches_direct_product() {
        // direct complex product, without the log-space formulation
        let s = sys(&[2, 3], 3);
        let (r, y, u): (f64, f64, f64) = (0.05, 0.3, 1.5);
        let mut num = (1.0f64, 0.0f64);
        let mut den = 1.0;
        for h in elements_upto(&s, 4000) {
            let h = h as f64;
            let (mut re, mut im, mut abs) = (0.0, 0.0, 0.0);
            for a in 0..3 {
                let mag = u.powi(a) * (-(a as f64) * h * r).exp();
                let ang = 2.0 * PI * a as f64 * h * y;
                re += mag * ang.cos();
                im += mag * ang.sin();
                abs += mag;
            }
            num = (num.0 * re - num.1 * im, num.0 * im + num.1 * re);
            den *= abs;
        }
        let direct = (num.0 * num.0 + num.1 * num.1).sqrt() / den;
        let ratio = tail_ratio(&s, GfKind::F, r, y, u).unwrap();
        assert!((ratio - direct).abs() < 1e-10 * direct.max(1e-300), "{ratio} vs {direct}");
    }

    #[test]
    fn grid_contains_structured_points() {
        let ys = y_grid(1e-3, 1024, 64);
        assert!(ys.contains(&0.5) && ys.contains(&-0.5) && ys.contains(&0.0));
        assert!(ys.contains(&(1.0 / 3.0)) && ys.contains(&(-5.0 / 64.0)));
        assert!(ys.iter().any(|&y| y > 0.0 && y <= 5e-4));
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_report_is_clean() {
        let s = sys(&[2, 3], 2);
        let report = verify_tail_bounds(&s, &[1e-2, 1e-3], 128).unwrap();
        assert_eq!(report.violations, 0, "{report:?}");
        assert!(report.fitted_a1 > 0.0 && report.fitted_a2 > 0.0);
        assert!(report.per_r.iter().all(|p| p.worst_margin <= 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn sigma_even_and_monotone_in_r(y in -0.5f64..0.5, log_r in -4.0f64..-1.0, shrink in 1.0f64..20.0) {
                let s = sys(&[2, 3, 5], 2);
                let r = 10f64.powf(log_r);
                let a = sigma_sum(&s, r, y).unwrap();
                prop_assert_eq!(a, sigma_sum(&s, r, -y).unwrap());
                prop_assert!(sigma_sum(&s, r / shrink, y).unwrap() >= a);
            }

            #[test]
            fn ratio_at_most_one(y in -0.5f64..0.5, log_r in -3.0f64..-0.5, u in 0.5f64..2.0, d in 2u32..5) {
                let s = sys(&[2, 3], d);
                for kind in [GfKind::F, GfKind::G, GfKind::H(NonZeroU32::new(1).unwrap())] {
                    let ratio = tail_ratio(&s, kind, 10f64.powf(log_r), y, u).unwrap();
                    prop_assert!((0.0..=1.0).contains(&ratio));
                }
            }
        }
    }
}
