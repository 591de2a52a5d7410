//! Uniform sampling of representations and Gaussian comparison of digit statistics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::asymptotics::clt_prediction;
use crate::error::{Error, Result};
use crate::exact::{build_count_table_with, exact_distribution_with, rational_to_f64, ExactMoments};
use crate::model::{BaseSystem, Representation, Statistic};
use crate::seq::elements_upto;
use crate::wide::{add_sub, cmp_limbs, limbs_for_bits, power_bits, sub_assign, uniform_below, Limits, WideTable};

/// Exact uniform sampler over the representations of one `n`.
///
/// Layer `j` of the table counts representations of every `v ≤ n` that use
/// only the `j` smallest elements of S. Sampling walks the elements from the
/// largest down and picks each digit with probability proportional to the
/// number of completions.
#[derive(Debug, Clone)]
pub struct Sampler {
    system: BaseSystem,
    n: u64,
    items: Vec<u64>,
    table: WideTable,
}

pub fn build_sampler(system: &BaseSystem, n: u64) -> Result<Sampler> {
    build_sampler_with(system, n, &Limits::default())
}

pub fn build_sampler_with(system: &BaseSystem, n: u64, limits: &Limits) -> Result<Sampler> {
    if n > limits.max_sampler_n {
        return Err(Error::LimitExceeded { what: "sampler", n, limit: limits.max_sampler_n });
    }
    let items = elements_upto(system, n);
    let cols = n as usize + 1;
    let layers = items.len() + 1;
    let width = limbs_for_bits(power_bits(system.digit_bound(), items.len()));
    limits.check(WideTable::bytes(layers * cols, width))?;

    let d = system.digit_bound() as usize;
    let mut table = WideTable::zeros(layers * cols, width);
    table.set_small(0, 1);
    for (j, h) in items.iter().enumerate().map(|(i, &h)| (i + 1, h as usize)) {
        let base = j * cols;
        let prev = (j - 1) * cols;
        for v in 0..cols {
            let (lower, cell) = table.split_at_row(base + v);
            let at = |row: usize| &lower[row * width..(row + 1) * width];
            let same = (v >= h).then(|| at(base + v - h));
            let sub = (v >= d * h).then(|| at(prev + v - d * h));
            let carry = add_sub(cell, same, at(prev + v), sub);
            debug_assert_eq!(carry, 0);
        }
    }
    Ok(Sampler { system: system.clone(), n, items, table })
}

impl Sampler {
    pub fn system(&self) -> &BaseSystem {
        &self.system
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Elements of S up to `n`, largest first.
    pub fn items(&self) -> impl Iterator<Item = u64> + '_ {
        self.items.iter().rev().copied()
    }

    fn cell(&self, layer: usize, v: u64) -> &[u64] {
        self.table.row(layer * (self.n as usize + 1) + v as usize)
    }

    /// Representations of `v` whose terms are among items `k..=K` of the
    /// decreasing item list (1-based; `k = K + 1` is the empty suffix).
    pub fn suffix_count(&self, k: usize, v: u64) -> BigUint {
        let total = self.items.len();
        assert!((1..=total + 1).contains(&k) && v <= self.n, "index out of range");
        self.table.get((total + 1 - k) * (self.n as usize + 1) + v as usize)
    }

    /// `P(n)`.
    pub fn count(&self) -> BigUint {
        self.suffix_count(1, self.n)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Representation {
        let mut x = vec![0u64; self.table.width()];
        let mut v = self.n;
        let mut terms = Vec::new();
        for layer in (1..=self.items.len()).rev() {
            let h = self.items[layer - 1];
            if v == 0 {
                break;
            }
            uniform_below(rng, self.cell(layer, v), &mut x);
            let mut a = 0u32;
            loop {
                let rest = v - a as u64 * h;
                let completions = self.cell(layer - 1, rest);
                if cmp_limbs(&x, completions) == Ordering::Less {
                    break;
                }
                sub_assign(&mut x, completions);
                a += 1;
                debug_assert!(a < self.system.digit_bound() && a as u64 * h <= v);
            }
            if a > 0 {
                terms.push((h, a));
                v -= a as u64 * h;
            }
        }
        debug_assert_eq!(v, 0);
        terms.reverse();
        Representation::from_valid_terms(terms, self.n)
    }
}

/// How a [`StatReport`] obtains its distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Mode {
    Exact,
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatReport {
    pub statistic: Statistic,
    pub n: u64,
    #[serde(flatten)]
    pub mode: Mode,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub tv_distance_to_gaussian: f64,
    pub predicted_mean: f64,
    pub predicted_variance: f64,
    /// Fraction of representations whose digit at the element `1` equals 1.
    pub digit_one_at_one: f64,
    /// Exact rational mean and variance (exact mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactMoments>,
}

pub fn normality_report(system: &BaseSystem, n: u64, stat: Statistic, mode: Mode) -> Result<StatReport> {
    normality_report_with(system, n, stat, mode, &Limits::default())
}

pub fn normality_report_with(
    system: &BaseSystem,
    n: u64,
    stat: Statistic,
    mode: Mode,
    limits: &Limits,
) -> Result<StatReport> {
    let stat = stat.validate(system)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let prediction = clt_prediction(system, stat)?;
    let (moments, pmf, digit_one_at_one, exact) = match mode {
        Mode::Exact => {
            let dist = exact_distribution_with(system, n, stat, limits)?;
            let mean = dist.mean();
            let variance = dist.variance();
            let sigma2 = rational_to_f64(&variance);
            let m3 = rational_to_f64(&dist.central_moment(3));
            let m4 = rational_to_f64(&dist.central_moment(4));
            let moments = Moments { mean: rational_to_f64(&mean), variance: sigma2, m3, m4 };
            let pmf = dist.probabilities();
            let freq = digit_frequency_at_one(system, n, 1, limits)?;
            (moments, pmf, freq, Some(ExactMoments::new(mean, variance)))
        }
        Mode::Sampled { count, seed } => {
            if count < 2 {
                return Err(Error::Domain("at least two samples are needed".into()));
            }
            let sampler = build_sampler_with(system, n, limits)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            let mut ones = 0u64;
            for _ in 0..count {
                let rep = sampler.sample(&mut rng);
                *hist.entry(rep.statistic(stat)).or_default() += 1;
                ones += u64::from(rep.digit_at(1) == 1);
            }
            let total = count as f64;
            let pmf: Vec<(u64, f64)> = hist.iter().map(|(&s, &c)| (s, c as f64 / total)).collect();
            (Moments::from_pmf(&pmf), pmf, ones as f64 / total, None)
        }
    };
    let sd = moments.variance.sqrt();
    Ok(StatReport {
        statistic: stat,
        n,
        mode,
        mean: moments.mean,
        variance: moments.variance,
        skewness: if sd > 0.0 { moments.m3 / sd.powi(3) } else { 0.0 },
        excess_kurtosis: if sd > 0.0 { moments.m4 / moments.variance.powi(2) - 3.0 } else { 0.0 },
        tv_distance_to_gaussian: tv_distance(&pmf, moments.mean, sd),
        predicted_mean: prediction.mean(system, n),
        predicted_variance: prediction.variance(system, n),
        digit_one_at_one,
        exact,
    })
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    mean: f64,
    variance: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn from_pmf(pmf: &[(u64, f64)]) -> Self {
        let mean: f64 = pmf.iter().map(|&(s, p)| s as f64 * p).sum();
        let central = |k: i32| pmf.iter().map(|&(s, p)| (s as f64 - mean).powi(k) * p).sum::<f64>();
        Moments { mean, variance: central(2), m3: central(3), m4: central(4) }
    }
}

/// Gaussian mass of the unit interval centred at `j`; a point mass when `sd = 0`.
fn lattice_mass(normal: Option<&Normal>, mean: f64, j: f64) -> f64 {
    match normal {
        Some(g) => g.cdf(j + 0.5) - g.cdf(j - 0.5),
        None => f64::from(u8::from((j - mean).abs() < 0.5)),
    }
}

/// Total-variation distance between a lattice distribution and the Gaussian
/// with the given moments, discretised over unit intervals at the integers.
/// Gaussian mass outside the support range counts in full.
pub fn tv_distance(pmf: &[(u64, f64)], mean: f64, sd: f64) -> f64 {
    let (Some(&(lo, _)), Some(&(hi, _))) = (pmf.first(), pmf.last()) else {
        return 1.0;
    };
    let normal = (sd > 0.0).then(|| Normal::new(mean, sd).expect("finite moments"));
    let probs: HashMap<u64, f64> = pmf.iter().copied().collect();
    let mut diff = 0.0;
    let mut covered = 0.0;
    for j in lo..=hi {
        let g = lattice_mass(normal.as_ref(), mean, j as f64);
        covered += g;
        diff += (probs.get(&j).copied().unwrap_or(0.0) - g).abs();
    }
    (0.5 * diff + 0.5 * (1.0 - covered).max(0.0)).clamp(0.0, 1.0)
}

/// Exact fraction of representations of `n` with digit `b` at the element 1.
///
/// With `Q` counting representations that avoid the element 1, fixing that
/// digit to `a` leaves `Q(n - a)` choices and `P(v) = Σ_{a<d} Q(v - a)`.
pub fn digit_frequency_at_one(system: &BaseSystem, n: u64, b: u32, limits: &Limits) -> Result<f64> {
    if b > system.max_digit() {
        return Err(Error::InvalidDigit { digit: b, max: system.max_digit() });
    }
    if b as u64 > n {
        return Ok(0.0);
    }
    let table = build_count_table_with(system, n, limits)?;
    let d = system.digit_bound() as usize;
    let mut q: Vec<BigUint> = Vec::with_capacity(n as usize + 1);
    for v in 0..=n as usize {
        let mut value = table.count(v as u64);
        for a in 1..d.min(v + 1) {
            value -= &q[v - a];
        }
        q.push(value);
    }
    let num = &q[(n - b as u64) as usize];
    Ok((crate::wide::ln_biguint(num) - table.ln_count(n)).exp())
}

/// Result of a chi-square test of sampled representations against the
/// uniform law on all `P(n)` representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub n: u64,
    pub categories: u64,
    pub draws: u64,
    pub seed: u64,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Largest `P(n)` accepted by [`chi_square_uniformity`].
pub const CHI_SQUARE_MAX_CATEGORIES: u64 = 10_000_000;

pub fn chi_square_uniformity(sampler: &Sampler, draws: u64, seed: u64) -> Result<ChiSquareReport> {
    let categories = sampler
        .count()
        .try_into()
        .ok()
        .filter(|&c: &u64| c <= CHI_SQUARE_MAX_CATEGORIES)
        .ok_or_else(|| Error::LimitExceeded {
            what: "chi-square categories",
            n: sampler.n(),
            limit: CHI_SQUARE_MAX_CATEGORIES,
        })?;
    if categories < 2 || draws == 0 {
        return Err(Error::Domain("the test needs at least two representations and one draw".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed: HashMap<Representation, u64> = HashMap::new();
    for _ in 0..draws {
        *observed.entry(sampler.sample(&mut rng)).or_default() += 1;
    }
    let expected = draws as f64 / categories as f64;
    let unseen = categories - observed.len() as u64;
    let statistic = observed.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>()
        + unseen as f64 * expected;
    let dof = categories - 1;
    let p_value = ChiSquared::new(dof as f64).expect("positive dof").sf(statistic);
    Ok(ChiSquareReport { n: sampler.n(), categories, draws, seed, statistic, dof, p_value })
}
