//! Saddle-point evaluation of the generating functions.
//!
//! With `w = e^{-ht}` every element `h ∈ S` contributes `log Q(w, u)` to
//! `f(t,u)`, where `Q` is the digit polynomial of the chosen series:
//!
//! * `F`:    `Σ_{a<d} u^a w^a`                (u marks the sum of digits)
//! * `G`:    `1 + u Σ_{0<a<d} w^a`            (u marks the Hamming weight)
//! * `H(b)`: `Σ_{a<d} w^a + (u-1) w^b`        (u marks occurrences of digit b)
//!
//! Weighting digit `a` by `c_a(u) w^a / Q` gives a distribution on `0..d`;
//! `t`-derivatives of `log Q` are `(-h)^k` times its cumulants and the mixed
//! `u`-derivatives follow from the same weights, so all partials are closed
//! form in `(w, u)` and no quotient `(1-(uw)^d)/(1-uw)` is ever formed.

use std::fmt;
use std::num::NonZeroU32;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BaseSystem, Statistic};
use crate::seq::elements_upto;

/// Which of the three generating functions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GfKind {
    F,
    G,
    H(NonZeroU32),
}

impl GfKind {
    /// The series whose `u` marks the given statistic.
    pub fn for_statistic(stat: Statistic) -> Self {
        match stat {
            Statistic::SumOfDigits => GfKind::F,
            Statistic::HammingWeight => GfKind::G,
            Statistic::DigitCount(b) => GfKind::H(b),
        }
    }

    pub(crate) fn validate(self, system: &BaseSystem) -> Result<Self> {
        if let GfKind::H(b) = self {
            if b.get() > system.max_digit() {
                return Err(Error::InvalidDigit { digit: b.get(), max: system.max_digit() });
            }
        }
        Ok(self)
    }

    /// `(c_a(u), c_a'(u), c_a''(u))` for `a = 0..d`.
    pub(crate) fn coefficients(self, d: u32, u: f64) -> Vec<(f64, f64, f64)> {
        (0..d)
            .map(|a| match self {
                GfKind::F => {
                    let af = a as f64;
                    let c = u.powi(a as i32);
                    let c1 = if a >= 1 { af * u.powi(a as i32 - 1) } else { 0.0 };
                    let c2 = if a >= 2 { af * (af - 1.0) * u.powi(a as i32 - 2) } else { 0.0 };
                    (c, c1, c2)
                }
                GfKind::G => {
                    if a == 0 {
                        (1.0, 0.0, 0.0)
                    } else {
                        (u, 1.0, 0.0)
                    }
                }
                GfKind::H(b) => {
                    if a == b.get() {
                        (u, 1.0, 0.0)
                    } else {
                        (1.0, 0.0, 0.0)
                    }
                }
            })
            .collect()
    }
}

impl fmt::Display for GfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GfKind::F => write!(f, "f"),
            GfKind::G => write!(f, "g"),
            GfKind::H(b) => write!(f, "h:{b}"),
        }
    }
}

impl std::str::FromStr for GfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f" => Ok(GfKind::F),
            "g" => Ok(GfKind::G),
            other => other
                .strip_prefix("h:")
                .and_then(|b| b.parse::<u32>().ok())
                .and_then(NonZeroU32::new)
                .map(GfKind::H)
                .ok_or_else(|| Error::Domain(format!("unknown series `{other}` (use f, g or h:<b>)"))),
        }
    }
}

impl Serialize for GfKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `f(t,u)` and its partial derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleEvaluation {
    pub kind: GfKind,
    pub t: f64,
    pub u: f64,
    pub value: f64,
    pub f_t: f64,
    pub f_tt: f64,
    pub f_ttt: f64,
    pub f_u: f64,
    pub f_uu: f64,
    pub f_tu: f64,
    pub f_ttu: f64,
    /// Elements `h` with `h·t ≤ truncation_cutoff` were summed.
    pub truncation_cutoff: f64,
    /// Certified bound on the absolute truncation error of `value`.
    pub tail_bound: f64,
    /// Largest certified truncation error of a partial, relative to the partial.
    pub partial_tail_bound: f64,
    pub terms: usize,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulators {
    value: CompensatedSum,
    f_t: CompensatedSum,
    f_tt: CompensatedSum,
    f_ttt: CompensatedSum,
    f_u: CompensatedSum,
    f_uu: CompensatedSum,
    f_tu: CompensatedSum,
    f_ttu: CompensatedSum,
}

/// Per-term contributions of one element `h`.
#[inline]
fn add_term(acc: &mut Accumulators, coeffs: &[(f64, f64, f64)], h: f64, t: f64) {
    let w = (-h * t).exp();
    let mut wa = 1.0;
    let mut s = 0.0; // Q - 1
    let mut first = 0.0;
    for (a, &(c, _, _)) in coeffs.iter().enumerate() {
        if a > 0 {
            wa *= w;
            s += c * wa;
            first += a as f64 * c * wa;
        }
    }
    let q = 1.0 + s;
    let mu = first / q;
    let (mut k2, mut k3, mut x, mut e1, mut e2, mut xuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    wa = 1.0;
    for (a, &(c, c1, c2)) in coeffs.iter().enumerate() {
        if a > 0 {
            wa *= w;
        }
        let dev = a as f64 - mu;
        let p = c * wa / q;
        k2 += dev * dev * p;
        k3 += dev * dev * dev * p;
        let p1 = c1 * wa / q;
        x += p1;
        e1 += dev * p1;
        e2 += dev * dev * p1;
        xuu += c2 * wa / q;
    }
    acc.value.add(s.ln_1p());
    acc.f_t.add(-h * mu);
    acc.f_tt.add(h * h * k2);
    acc.f_ttt.add(-h * h * h * k3);
    acc.f_u.add(x);
    acc.f_uu.add(xuu - x * x);
    acc.f_tu.add(-h * e1);
    acc.f_ttu.add(h * h * (e2 - k2 * x));
}

/// Bound on `Σ_{h ∈ S, h > x} h^k e^{-th}`.
///
/// Splits `(x, ∞)` into dyadic blocks `(x 2^i, x 2^{i+1}]`; a block holds at
/// most `∏_j (1 + log(x 2^{i+1}) / log p_j)` elements, each at most
/// `(x 2^{i+1})^k e^{-t x 2^i}`. Once `t x 2^i ≥ 40` successive blocks shrink
/// by more than half, so the rest is bounded by the last block.
pub(crate) fn tail_sum_bound(log_bases: &[f64], x: f64, t: f64, k: i32) -> f64 {
    let mut total = 0.0;
    let mut lo = x;
    loop {
        let hi = 2.0 * lo;
        let ln_count: f64 = log_bases.iter().map(|lp| (1.0 + (hi.ln() / lp).floor()).ln()).sum();
        let term = (ln_count + k as f64 * hi.ln() - t * lo).exp();
        total += term;
        if t * lo >= 40.0 {
            return total + term;
        }
        lo = hi;
    }
}

/// Largest `x` for which elements of S are enumerated.
const MAX_ENUMERATION: f64 = 4.0e18;

/// Evaluates `f`, `g` or `h_b` with `u` restricted to `[1/2, 2]`.
///
/// `tol` bounds the absolute truncation error of the value and the relative
/// truncation error of every partial derivative.
pub fn evaluate_f(system: &BaseSystem, kind: GfKind, t: f64, u: f64, tol: f64) -> Result<SaddleEvaluation> {
    if !(0.5..=2.0).contains(&u) {
        return Err(Error::Domain(format!(
            "u = {u} lies outside [1/2, 2]; use evaluate_f_unrestricted to override"
        )));
    }
    evaluate(system, kind, t, u, tol)
}

/// As [`evaluate_f`] but accepting any `u > 0`, with a warning outside `[1/2, 2]`.
pub fn evaluate_f_unrestricted(
    system: &BaseSystem,
    kind: GfKind,
    t: f64,
    u: f64,
    tol: f64,
) -> Result<SaddleEvaluation> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("u = {u} must be positive")));
    }
    if !(0.5..=2.0).contains(&u) {
        log::warn!("evaluating at u = {u}, outside the interval [1/2, 2] where the expansions hold");
    }
    evaluate(system, kind, t, u, tol)
}

fn evaluate(system: &BaseSystem, kind: GfKind, t: f64, u: f64, tol: f64) -> Result<SaddleEvaluation> {
    let kind = kind.validate(system)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let coeffs = kind.coefficients(system.digit_bound(), u);
    let log_bases: Vec<f64> = system.bases().iter().map(|&p| (p as f64).ln()).collect();

    // |term| ≤ K·h^k·w for w = e^{-ht} ≤ 1 (see `add_term`)
    let dmax = system.max_digit() as f64;
    let s1: f64 = coeffs.iter().skip(1).map(|c| c.0).sum();
    let s1u: f64 = coeffs.iter().map(|c| c.1).sum();
    let s1uu: f64 = coeffs.iter().map(|c| c.2.abs()).sum();
    let value_k = s1;
    let partial_ks: [(f64, i32); 7] = [
        (dmax * s1, 1),
        (dmax * dmax * s1, 2),
        (8.0 * dmax.powi(3) * (s1 + s1.powi(3)), 3),
        (s1u, 0),
        (s1uu + s1u * s1u, 0),
        (dmax * (1.0 + s1) * s1u, 1),
        (dmax * dmax * ((1.0 + s1).powi(2) + s1) * s1u, 2),
    ];

    let mut acc = Accumulators::default();
    let mut summed = 0usize;
    let mut cutoff = 16.0;
    loop {
        let x = cutoff / t;
        if x > MAX_ENUMERATION {
            return Err(Error::ToleranceUnreachable(format!(
                "t = {t:e} needs elements of S beyond {MAX_ENUMERATION:e}"
            )));
        }
        let elements = elements_upto(system, x.floor() as u64);
        for &h in &elements[summed..] {
            add_term(&mut acc, &coeffs, h as f64, t);
        }
        summed = elements.len();

        let tail_bound = value_k * tail_sum_bound(&log_bases, x, t, 0);
        let partials = [
            acc.f_t.value(),
            acc.f_tt.value(),
            acc.f_ttt.value(),
            acc.f_u.value(),
            acc.f_uu.value(),
            acc.f_tu.value(),
            acc.f_ttu.value(),
        ];
        let mut partial_tail_bound: f64 = 0.0;
        for (&(k_const, power), p) in partial_ks.iter().zip(partials) {
            let bound = k_const * tail_sum_bound(&log_bases, x, t, power);
            let scale = p.abs().max(f64::MIN_POSITIVE);
            if bound > 0.0 {
                partial_tail_bound = partial_tail_bound.max(bound / scale);
            }
        }
        if tail_bound <= tol && partial_tail_bound <= tol {
            return Ok(SaddleEvaluation {
                kind,
                t,
                u,
                value: acc.value.value(),
                f_t: partials[0],
                f_tt: partials[1],
                f_ttt: partials[2],
                f_u: partials[3],
                f_uu: partials[4],
                f_tu: partials[5],
                f_ttu: partials[6],
                truncation_cutoff: cutoff,
                tail_bound,
                partial_tail_bound,
                terms: summed,
            });
        }
        cutoff *= 1.5;
    }
}

/// Default relative tolerance for the saddle-point equation.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
/// Truncation tolerance used while solving.
const EVAL_TOLERANCE: f64 = 1e-13;

/// Solution of `n = -f_t(r, u)` and the resulting coefficient estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleResult {
    pub kind: GfKind,
    pub n: u64,
    pub u: f64,
    /// The saddle point.
    pub r: f64,
    /// `n r + f(r,u) - ½ log(2π f_tt(r,u))`.
    pub log_estimate: f64,
    /// `exp(log_estimate)`; `+inf` when it overflows.
    pub estimate: f64,
    /// `n r + f(r,u)`, a rigorous upper bound on the log of the coefficient.
    pub chernoff_bound: f64,
    /// `|n + f_t(r,u)| / n`.
    pub residual: f64,
    pub f: f64,
    pub f_tt: f64,
    pub tail_bound: f64,
}

/// Solves the saddle-point equation by bisection in `log r` on
/// `[1e-15, 10]` (widened once on failure) followed by Newton steps.
pub fn solve_saddle(system: &BaseSystem, kind: GfKind, n: u64, u: f64, tol: f64) -> Result<SaddleResult> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(0.5..=2.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} lies outside [1/2, 2]")));
    }
    let target = n as f64;
    let eval = |r: f64| evaluate(system, kind, r, u, EVAL_TOLERANCE);
    // -f_t is strictly decreasing in r
    let excess = |r: f64| -> Result<f64> { Ok(-eval(r)?.f_t - target) };

    let (mut lo, mut hi) = (1e-15, 10.0);
    let mut bracketed = excess(lo)? >= 0.0 && excess(hi)? <= 0.0;
    if !bracketed {
        (lo, hi) = (1e-17, 100.0);
        bracketed = excess(lo)? >= 0.0 && excess(hi)? <= 0.0;
    }
    if !bracketed {
        return Err(Error::BracketFailure(format!(
            "n = {n} is outside the range of -f_t on [{lo:e}, {hi:e}]"
        )));
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = (lo * hi).sqrt();
    let mut ev = eval(r)?;
    for _ in 0..60 {
        let resid = target + ev.f_t;
        if resid.abs() <= tol * target {
            break;
        }
        // d/dr (n + f_t) = f_tt > 0
        let mut next = r - resid / ev.f_tt;
        if !(next > lo && next < hi) {
            next = (lo * hi).sqrt();
        }
        if resid > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        r = next;
        ev = eval(r)?;
    }
    let residual = (target + ev.f_t).abs() / target;
    if residual > tol {
        return Err(Error::ToleranceUnreachable(format!(
            "saddle residual {residual:e} above tolerance {tol:e}"
        )));
    }
    let chernoff = target * r + ev.value;
    let log_estimate = chernoff - 0.5 * (2.0 * std::f64::consts::PI * ev.f_tt).ln();
    Ok(SaddleResult {
        kind,
        n,
        u,
        r,
        log_estimate,
        estimate: log_estimate.exp(),
        chernoff_bound: chernoff,
        residual,
        f: ev.value,
        f_tt: ev.f_tt,
        tail_bound: ev.tail_bound,
    })
}

/// Saddle-point estimate of `P(n) = [z^n] F(z, 1)`.
pub fn estimate_count(system: &BaseSystem, n: u64) -> Result<SaddleResult> {
    if n < 2 {
        return Err(Error::Domain("the count estimate needs n ≥ 2".into()));
    }
    solve_saddle(system, GfKind::F, n, 1.0, SOLVER_TOLERANCE)
}

/// `n r + f(r, 1)`: an upper bound on `log P(n)` valid for every `r > 0`.
pub fn chernoff_log_bound(system: &BaseSystem, n: u64, r: f64) -> Result<f64> {
    let ev = evaluate(system, GfKind::F, r, 1.0, EVAL_TOLERANCE)?;
    Ok(n as f64 * r + ev.value + ev.tail_bound)
}

/// Saddle-point predictions of a statistic's mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub statistic: Statistic,
    pub n: u64,
    /// `r₀`, the saddle point at `u = 1`.
    pub r0: f64,
    /// `f_u + (f_tu f_ttt - f_tt f_ttu) / f_tt²` at `(r₀, 1)`.
    pub mean: f64,
    /// `f_uu + f_u` at `(r₀, 1)`.
    pub variance: f64,
}

/// Mean and variance of a digit statistic predicted from the series that
/// marks it (`f` for the sum of digits, `g` for the Hamming weight, `h_b`
/// for occurrences of `b`), all evaluated at the count's saddle point.
pub fn estimate_moments(system: &BaseSystem, n: u64, stat: Statistic) -> Result<MomentEstimate> {
    let stat = stat.validate(system)?;
    let saddle = estimate_count(system, n)?;
    let r0 = saddle.r;
    let ev = evaluate(system, GfKind::for_statistic(stat), r0, 1.0, EVAL_TOLERANCE)?;
    let mean = ev.f_u + (ev.f_tu * ev.f_ttt - ev.f_tt * ev.f_ttu) / (ev.f_tt * ev.f_tt);
    let variance = ev.f_uu + ev.f_u;
    Ok(MomentEstimate { statistic: stat, n, r0, mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(bases: &[u64], d: u32) -> BaseSystem {
        BaseSystem::new(bases, d).unwrap()
    }

    /// Direct per-term sum of log Q(e^{-ht}, u) from the product form.
    fn naive_value(system: &BaseSystem, kind: GfKind, t: f64, u: f64) -> f64 {
        let d = system.digit_bound();
        elements_upto(system, (60.0 / t) as u64)
            .into_iter()
            .map(|h| {
                let w = (-(h as f64) * t).exp();
                let q: f64 = (0..d)
                    .map(|a| {
                        let c = match kind {
                            GfKind::F => u.powi(a as i32),
                            GfKind::G => if a == 0 { 1.0 } else { u },
                            GfKind::H(b) => if a == b.get() { u } else { 1.0 },
                        };
                        c * w.powi(a as i32)
                    })
                    .sum();
                q.ln()
            })
            .sum()
    }

    #[test]
    fn value_at_one_one() {
        let s = sys(&[2, 3], 2);
        let ev = evaluate_f(&s, GfKind::F, 1.0, 1.0, 1e-14).unwrap();
        assert!((ev.value - 0.5098677437513662).abs() < 1e-13, "{}", ev.value);
        assert!(ev.tail_bound <= 1e-14);
        assert!(ev.f_t < 0.0 && ev.f_tt > 0.0);
    }

    #[test]
    fn matches_naive_product_form() {
        for (bases, d) in [(&[2u64, 3][..], 2), (&[2, 3], 5), (&[2, 3, 5], 3)] {
            let s = sys(bases, d);
            let mut kinds = vec![GfKind::F, GfKind::G];
            kinds.extend((1..d).map(|b| GfKind::H(NonZeroU32::new(b).unwrap())));
            for kind in kinds {
                for (t, u) in [(0.5, 1.0), (0.05, 0.7), (0.01, 1.8)] {
                    let ev = evaluate_f(&s, kind, t, u, 1e-14).unwrap();
                    let naive = naive_value(&s, kind, t, u);
                    assert!((ev.value - naive).abs() <= 1e-11 * naive.abs(), "{kind} {t} {u}");
                }
            }
        }
    }

    #[test]
    fn series_agree_at_u_one() {
        let s = sys(&[2, 3], 4);
        let f = evaluate_f(&s, GfKind::F, 0.01, 1.0, 1e-13).unwrap();
        for kind in [GfKind::G, GfKind::H(NonZeroU32::new(2).unwrap())] {
            let g = evaluate_f(&s, kind, 0.01, 1.0, 1e-13).unwrap();
            assert!((f.value - g.value).abs() < 1e-12 * f.value);
            assert!((f.f_tt - g.f_tt).abs() < 1e-12 * f.f_tt);
        }
    }

    #[test]
    fn decreases_to_zero_in_t() {
        let s = sys(&[2, 3, 5], 2);
        let values: Vec<f64> = [0.1, 1.0, 5.0, 20.0, 50.0]
            .iter()
            .map(|&t| evaluate_f(&s, GfKind::F, t, 1.0, 1e-15).unwrap().value)
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        assert!(values[4] < 1e-20);
    }

    #[test]
    fn domain_errors() {
        let s = sys(&[2, 3], 2);
        assert!(matches!(evaluate_f(&s, GfKind::F, 0.0, 1.0, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(evaluate_f(&s, GfKind::F, -1.0, 1.0, 1e-10), Err(Error::Domain(_))));
        assert!(evaluate_f(&s, GfKind::F, 1.0, 3.0, 1e-10).is_err());
        assert!(evaluate_f_unrestricted(&s, GfKind::F, 1.0, 3.0, 1e-10).is_ok());
        assert!(evaluate_f(&s, GfKind::H(NonZeroU32::new(2).unwrap()), 1.0, 1.0, 1e-10).is_err());
        assert!(matches!(
            evaluate_f(&s, GfKind::F, 1e-30, 1.0, 1e-10),
            Err(Error::ToleranceUnreachable(_))
        ));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = sys(&[2, 3], 3);
        for kind in [GfKind::F, GfKind::G, GfKind::H(NonZeroU32::new(1).unwrap())] {
            for t in [0.1, 0.01] {
                for u in [0.8, 1.0, 1.25] {
                    let at = |t: f64, u: f64| evaluate_f_unrestricted(&s, kind, t, u, 1e-15).unwrap();
                    let ev = at(t, u);
                    let ht = 1e-4 * t;
                    let hu = 1e-4;
                    let ft = (at(t + ht, u).value - at(t - ht, u).value) / (2.0 * ht);
                    let ftt = (at(t + ht, u).value - 2.0 * ev.value + at(t - ht, u).value) / (ht * ht);
                    let fu = (at(t, u + hu).value - at(t, u - hu).value) / (2.0 * hu);
                    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
                    assert!(rel(ft, ev.f_t) < 1e-6, "{kind} f_t {t} {u}: {ft} vs {}", ev.f_t);
                    assert!(rel(ftt, ev.f_tt) < 1e-6, "{kind} f_tt {t} {u}: {ftt} vs {}", ev.f_tt);
                    assert!(rel(fu, ev.f_u) < 1e-6, "{kind} f_u {t} {u}: {fu} vs {}", ev.f_u);

                    // higher partials against differences of the lower ones
                    let fttt = (at(t + ht, u).f_tt - at(t - ht, u).f_tt) / (2.0 * ht);
                    let fuu = (at(t, u + hu).f_u - at(t, u - hu).f_u) / (2.0 * hu);
                    let ftu = (at(t, u + hu).f_t - at(t, u - hu).f_t) / (2.0 * hu);
                    let fttu = (at(t, u + hu).f_tt - at(t, u - hu).f_tt) / (2.0 * hu);
                    assert!(rel(fttt, ev.f_ttt) < 1e-5, "{kind} f_ttt");
                    assert!(rel(fuu, ev.f_uu) < 1e-5, "{kind} f_uu {fuu} {}", ev.f_uu);
                    assert!(rel(ftu, ev.f_tu) < 1e-6, "{kind} f_tu");
                    assert!(rel(fttu, ev.f_ttu) < 1e-6, "{kind} f_ttu");
                }
            }
        }
    }

    #[test]
    fn halving_tolerance_stays_within_tail_bound() {
        let s = sys(&[2, 3, 5], 2);
        for t in [1.0, 0.01, 1e-5] {
            let mut tol = 1e-4;
            let mut prev = evaluate_f(&s, GfKind::F, t, 1.0, tol).unwrap();
            for _ in 0..10 {
                tol /= 2.0;
                let next = evaluate_f(&s, GfKind::F, t, 1.0, tol).unwrap();
                assert!((next.value - prev.value).abs() <= prev.tail_bound + 1e-14 * prev.value.abs());
                assert!(next.tail_bound <= tol);
                prev = next;
            }
        }
    }

    #[test]
    fn leading_constant_trend() {
        // f(t,1) m! / (log 1/t)^m → log d / ∏ log p_j
        let s = sys(&[2, 3], 2);
        let target = 2f64.ln() / s.log_base_product();
        let dev: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&t: &f64| {
                let f = evaluate_f(&s, GfKind::F, t, 1.0, 1e-12).unwrap().value;
                (f * 2.0 / (1.0 / t).ln().powi(2) / target - 1.0).abs()
            })
            .collect();
        assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
    }

    #[test]
    fn solver_regression_and_monotonicity() {
        let s = sys(&[2, 3], 2);
        let r3 = solve_saddle(&s, GfKind::F, 1000, 1.0, 1e-9).unwrap();
        assert!(r3.residual <= 1e-9);
        let check = evaluate_f(&s, GfKind::F, r3.r, 1.0, 1e-14).unwrap();
        assert!((-check.f_t - 1000.0).abs() <= 1e-9 * 1000.0);
        // reference value from a plain bisection on the product form
        assert!((r3.r - 5.274524997368492e-3).abs() < 1e-9, "{}", r3.r);
        let r6 = solve_saddle(&s, GfKind::F, 1_000_000, 1.0, 1e-9).unwrap();
        assert!(r3.r > r6.r);
    }

    #[test]
    fn solver_rejects_degenerate_targets() {
        let s = sys(&[2, 3], 2);
        assert!(solve_saddle(&s, GfKind::F, 0, 1.0, 1e-9).is_err());
        assert!(estimate_count(&s, 1).is_err());
    }

    #[test]
    fn moment_series_agree_for_binary_digits() {
        let s = sys(&[2, 3], 2);
        let sum = estimate_moments(&s, 10_000, Statistic::SumOfDigits).unwrap();
        let weight = estimate_moments(&s, 10_000, Statistic::HammingWeight).unwrap();
        assert!((sum.mean - weight.mean).abs() <= 0.02 * sum.mean);
        assert!((sum.variance - weight.variance).abs() <= 0.02 * sum.variance);
        assert!(sum.variance > 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn log_convex_and_decreasing(
                log_t in -12.0f64..1.0,
                u in 0.5f64..2.0,
                d in 2u32..6,
                which in 0usize..3,
            ) {
                let s = BaseSystem::new(&[[2u64, 3].as_slice(), &[2, 3, 5], &[3, 7]][which], d).unwrap();
                let t = 10f64.powf(log_t);
                for kind in [GfKind::F, GfKind::G, GfKind::H(NonZeroU32::new(d - 1).unwrap())] {
                    let ev = evaluate_f(&s, kind, t, u, 1e-10).unwrap();
                    prop_assert!(ev.f_t < 0.0);
                    prop_assert!(ev.f_tt > 0.0);
                    prop_assert!(ev.tail_bound <= 1e-10);
                }
            }
        }
    }
}
