//! Exact arbitrary-precision counting of representations.
//!
//! `P(n)` is the coefficient of `z^n` in `∏_{h∈S} (1 + z^h + ... + z^{(d-1)h})`,
//! i.e. the number of partitions of `n` into elements of S with multiplicity
//! below `d`. Everything here is exact integer arithmetic.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BaseSystem, Statistic};
use crate::seq::elements_upto;
use crate::wide::{
    add_assign, add_mul, add_sub, ln_limbs, limbs_for_bits, power_bits, to_biguint, Limits,
    WideTable,
};

/// Default largest `n` accepted by [`count_brute_force`].
pub const BRUTE_FORCE_LIMIT: u64 = 500;

/// `P(0), ..., P(N)` for one base system.
#[derive(Debug, Clone)]
pub struct CountTable {
    system: BaseSystem,
    table: WideTable,
}

impl CountTable {
    pub fn system(&self) -> &BaseSystem {
        &self.system
    }

    /// The largest `n` covered.
    pub fn limit(&self) -> u64 {
        self.table.rows() as u64 - 1
    }

    /// `P(n)`.
    ///
    /// # Panics
    /// If `n` exceeds [`limit`](Self::limit).
    pub fn count(&self, n: u64) -> BigUint {
        self.table.get(n as usize)
    }

    /// `log P(n)` without materializing the bignum.
    pub fn ln_count(&self, n: u64) -> f64 {
        self.table.ln(n as usize)
    }

    pub fn counts(&self) -> impl Iterator<Item = BigUint> + '_ {
        (0..self.table.rows()).map(|i| self.table.get(i))
    }

    /// Entrywise equality of the counts, regardless of storage width or system.
    pub fn same_counts(&self, other: &CountTable) -> bool {
        self.table.rows() == other.table.rows()
            && (0..self.table.rows()).all(|i| {
                let (a, b) = (self.table.row(i), other.table.row(i));
                let w = a.len().max(b.len());
                (0..w).all(|k| a.get(k).copied().unwrap_or(0) == b.get(k).copied().unwrap_or(0))
            })
    }

    /// First index where the two tables differ.
    pub fn first_mismatch(&self, other: &CountTable) -> Option<u64> {
        let n = self.table.rows().min(other.table.rows());
        (0..n).find(|&i| self.table.get(i) != other.table.get(i)).map(|i| i as u64)
    }
}

/// Builds `P(0..=n)` with default resource limits.
pub fn build_count_table(system: &BaseSystem, n: u64) -> Result<CountTable> {
    build_count_table_with(system, n, &Limits::default())
}

/// Bounded-multiplicity partition DP over the elements of S in increasing
/// order, using
///
/// `c_new(v) = c_new(v-h) + c_old(v) - c_old(v-dh)`,
///
/// the coefficient form of multiplying by `(1 - z^{dh}) / (1 - z^h)`.
pub fn build_count_table_with(system: &BaseSystem, n: u64, limits: &Limits) -> Result<CountTable> {
    let rows = usize::try_from(n).ok().and_then(|n| n.checked_add(1)).ok_or_else(|| {
        Error::LimitOverflow(format!("n = {n} exceeds the addressable table size"))
    })?;
    let items = elements_upto(system, n);
    let d = system.digit_bound() as usize;
    let width = limbs_for_bits(power_bits(system.digit_bound(), items.len()));
    limits.check(2 * WideTable::bytes(rows, width))?;

    let mut old = WideTable::zeros(rows, width);
    let mut new = WideTable::zeros(rows, width);
    old.set_small(0, 1);
    for &h in &items {
        let h = h as usize;
        let dh = d * h;
        new.copy_rows_from(&old, h);
        for v in h..rows {
            let (lower, cell) = new.split_at_row(v);
            let prev = &lower[(v - h) * width..(v - h + 1) * width];
            let sub = (v >= dh).then(|| old.row(v - dh));
            let carry = add_sub(cell, Some(prev), old.row(v), sub);
            debug_assert_eq!(carry, 0, "count overflowed its width bound");
        }
        std::mem::swap(&mut old, &mut new);
    }
    Ok(CountTable { system: system.clone(), table: old })
}

/// Counts representations of `n` by exhaustive digit assignment.
///
/// Independent of the table DP: every digit assignment of the smallest
/// elements is enumerated into a histogram of values, and a top-down search
/// over the remaining elements, pruned whenever the remainder exceeds what
/// the smaller elements can still reach, finishes in that histogram.
pub fn count_brute_force(system: &BaseSystem, n: u64) -> Result<BigUint> {
    count_brute_force_with_limit(system, n, BRUTE_FORCE_LIMIT)
}

pub fn count_brute_force_with_limit(system: &BaseSystem, n: u64, limit: u64) -> Result<BigUint> {
    if n > limit {
        return Err(Error::OracleLimitExceeded { n, limit });
    }
    if n == 0 {
        return Ok(BigUint::from(1u32));
    }
    let items = elements_upto(system, n);
    let max_digit = system.max_digit() as u64;
    let mut reach = Vec::with_capacity(items.len() + 1);
    reach.push(0u64);
    for &h in &items {
        reach.push(reach.last().unwrap() + max_digit * h);
    }
    // enumerate every digit assignment of the smallest elements up front
    let d = max_digit as f64 + 1.0;
    let split = (1..=items.len()).take_while(|&k| d.powi(k as i32) <= BOTTOM_ASSIGNMENTS).last().unwrap_or(1);
    let mut bottom = vec![0u128; reach[split] as usize + 1];
    enumerate_bottom(&items[..split], max_digit, 0, &mut bottom);
    let count = search(&items, &reach, &bottom, max_digit, split, items.len(), n)
        .ok_or_else(|| Error::LimitOverflow("brute-force count exceeds 128 bits".into()))?;
    Ok(BigUint::from(count))
}

/// Largest number of digit assignments enumerated for the smallest elements.
const BOTTOM_ASSIGNMENTS: f64 = (1u64 << 14) as f64;

fn enumerate_bottom(items: &[u64], max_digit: u64, value: u64, hist: &mut [u128]) {
    match items.split_last() {
        None => hist[value as usize] += 1,
        Some((&h, rest)) => {
            for a in 0..=max_digit {
                enumerate_bottom(rest, max_digit, value + a * h, hist);
            }
        }
    }
}

// ways to write `rest` with digits on items[..k]
fn search(
    items: &[u64],
    reach: &[u64],
    bottom: &[u128],
    max_digit: u64,
    split: usize,
    k: usize,
    rest: u64,
) -> Option<u128> {
    if rest > reach[k] {
        return Some(0);
    }
    if k == split {
        return Some(bottom[rest as usize]);
    }
    let h = items[k - 1];
    let mut total: u128 = 0;
    let mut a = 0;
    while a <= max_digit && a * h <= rest {
        total = total.checked_add(search(items, reach, bottom, max_digit, split, k - 1, rest - a * h)?)?;
        a += 1;
    }
    Some(total)
}

/// Partitions of `0..=n` into powers of `p` with unlimited multiplicity, via
/// `c(n) = c(n-1) + [p | n] c(n/p)`.
///
/// Grouping the terms of a representation in bases `{q, p}` with digits
/// `0..q` by their power of `p` and reading each group in base `q` turns it
/// into exactly such a partition, so the result is returned as the count
/// table of the system `{q, p}` with digit bound `q`.
pub fn count_via_power_partition(q: u64, p: u64, n: u64) -> Result<CountTable> {
    count_via_power_partition_with(q, p, n, &Limits::default())
}

pub fn count_via_power_partition_with(q: u64, p: u64, n: u64, limits: &Limits) -> Result<CountTable> {
    let digits = u32::try_from(q).map_err(|_| Error::Domain(format!("q = {q} is too large")))?;
    let mut bases = [q, p];
    bases.sort_unstable();
    let system = BaseSystem::new(&bases, digits)?;
    let rows = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| Error::LimitOverflow(format!("n = {n} exceeds the addressable table size")))?;
    limits.check(WideTable::bytes(rows, 2))?;

    let p = p as usize;
    let mut table = WideTable::zeros(rows, 1);
    table.set_small(0, 1);
    let mut v = 1;
    while v < rows {
        let w = table.width();
        let (lower, cell) = table.split_at_row(v);
        cell.copy_from_slice(&lower[(v - 1) * w..v * w]);
        let overflow = v % p == 0 && add_assign(cell, &lower[(v / p) * w..(v / p + 1) * w]);
        if overflow {
            limits.check(WideTable::bytes(rows, w + 1))?;
            table.widen();
            continue; // recompute row v at the new width
        }
        v += 1;
    }
    Ok(CountTable { system, table })
}

/// Exact first and second statistic moments over all representations.
///
/// `a[n] = P(n)`, `b[n] = Σ_reps stat`, `c[n] = Σ_reps stat²`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    system: BaseSystem,
    statistic: Statistic,
    a: WideTable,
    b: WideTable,
    c: WideTable,
}

impl MomentTable {
    pub fn system(&self) -> &BaseSystem {
        &self.system
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn limit(&self) -> u64 {
        self.a.rows() as u64 - 1
    }

    pub fn a(&self, n: u64) -> BigUint {
        self.a.get(n as usize)
    }

    pub fn b(&self, n: u64) -> BigUint {
        self.b.get(n as usize)
    }

    pub fn c(&self, n: u64) -> BigUint {
        self.c.get(n as usize)
    }

    /// Exact mean `B/A`.
    pub fn mean(&self, n: u64) -> BigRational {
        ratio(&self.b(n), &self.a(n))
    }

    /// Exact variance `C/A - (B/A)^2`.
    pub fn variance(&self, n: u64) -> BigRational {
        let mean = self.mean(n);
        ratio(&self.c(n), &self.a(n)) - &mean * &mean
    }

    pub fn moments(&self, n: u64) -> ExactMoments {
        ExactMoments::new(self.mean(n), self.variance(n))
    }

    /// Whether the counts column agrees with a count table.
    pub fn counts_match(&self, table: &CountTable) -> bool {
        self.a.rows() == table.table.rows()
            && (0..self.a.rows()).all(|i| self.a.get(i) == table.table.get(i))
    }
}

/// Exact mean and variance together with 12-significant-digit renderings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactMoments {
    #[serde(serialize_with = "ser_rational")]
    pub mean: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub variance: BigRational,
    pub mean_decimal: String,
    pub variance_decimal: String,
}

impl ExactMoments {
    pub fn new(mean: BigRational, variance: BigRational) -> Self {
        ExactMoments {
            mean_decimal: format_sig(rational_to_f64(&mean), 12),
            variance_decimal: format_sig(rational_to_f64(&variance), 12),
            mean,
            variance,
        }
    }
}

fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(q)
}

pub(crate) fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Rational to f64 that survives numerators and denominators beyond f64 range.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Formats with `sig` significant digits.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = sig - 1)
    }
}

pub fn build_moment_tables(system: &BaseSystem, n: u64, stat: Statistic) -> Result<MomentTable> {
    build_moment_tables_with(system, n, stat, &Limits::default())
}

/// Digit-loop DP carrying `(count, Σ stat, Σ stat²)` per value.
///
/// Adding digit `a` at element `h` moves a partial representation from
/// `v - ah` to `v` and shifts its statistic by `w = weight(a)`, so
/// `Σ (s+w) = B + wA` and `Σ (s+w)² = C + 2wB + w²A`. Rows are updated in
/// place from the top down, so lower rows still hold the previous layer.
pub fn build_moment_tables_with(
    system: &BaseSystem,
    n: u64,
    stat: Statistic,
    limits: &Limits,
) -> Result<MomentTable> {
    let stat = stat.validate(system)?;
    let rows = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| Error::LimitOverflow(format!("n = {n} exceeds the addressable table size")))?;
    let items = elements_upto(system, n);
    let max_stat = stat.max_digit_weight(system) * items.len() as u64;
    let stat_bits = 64 - max_stat.max(1).leading_zeros() as u64;
    let width = limbs_for_bits(power_bits(system.digit_bound(), items.len()) + 2 * stat_bits + 2);
    limits.check(3 * WideTable::bytes(rows, width))?;

    let mut a = WideTable::zeros(rows, width);
    let mut b = WideTable::zeros(rows, width);
    let mut c = WideTable::zeros(rows, width);
    a.set_small(0, 1);
    let weights: Vec<u64> = (0..system.digit_bound()).map(|d| stat.digit_weight(d)).collect();
    for &h in &items {
        let h = h as usize;
        for v in (h..rows).rev() {
            let (a_lo, a_v) = a.split_at_row(v);
            let (b_lo, b_v) = b.split_at_row(v);
            let (c_lo, c_v) = c.split_at_row(v);
            for (digit, &w) in weights.iter().enumerate().skip(1) {
                let Some(src) = v.checked_sub(digit * h) else { break };
                let span = src * width..(src + 1) * width;
                let (a_s, b_s, c_s) = (&a_lo[span.clone()], &b_lo[span.clone()], &c_lo[span]);
                let mut carry = add_mul(c_v, c_s, 1);
                carry |= add_mul(c_v, b_s, 2 * w);
                carry |= add_mul(c_v, a_s, w * w);
                carry |= add_mul(b_v, b_s, 1);
                carry |= add_mul(b_v, a_s, w);
                carry |= add_mul(a_v, a_s, 1);
                debug_assert_eq!(carry, 0, "moment overflowed its width bound");
            }
        }
    }
    Ok(MomentTable { system: system.clone(), statistic: stat, a, b, c })
}

/// Exact distribution of a statistic over all representations of `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub n: u64,
    pub statistic: Statistic,
    /// statistic value → number of representations (zero counts omitted)
    #[serde(serialize_with = "ser_counts")]
    pub counts: BTreeMap<u64, BigUint>,
}

fn ser_counts<S: serde::Serializer>(
    counts: &BTreeMap<u64, BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(counts.len()))?;
    for (k, v) in counts {
        map.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    map.end()
}

impl Distribution {
    /// Σ counts, equal to `P(n)`.
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    fn power_sum(&self, k: u32) -> BigUint {
        self.counts.iter().map(|(&s, c)| c * BigUint::from(s).pow(k)).sum()
    }

    pub fn mean(&self) -> BigRational {
        ratio(&self.power_sum(1), &self.total())
    }

    pub fn variance(&self) -> BigRational {
        self.central_moment(2)
    }

    /// Exact `E[(X - μ)^k]`.
    pub fn central_moment(&self, k: u32) -> BigRational {
        let total = BigInt::from(self.total());
        let mu = self.mean();
        let mut acc = BigRational::zero();
        for (&s, c) in &self.counts {
            let dev = BigRational::from_integer(BigInt::from(s)) - &mu;
            acc += num_traits::pow(dev, k as usize) * BigRational::from_integer(BigInt::from(c.clone()));
        }
        acc / BigRational::from_integer(total)
    }

    /// `(value, probability)` pairs as floats.
    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        let ln_total = ln_limbs(&self.total().to_u64_digits());
        self.counts
            .iter()
            .map(|(&s, c)| (s, (ln_limbs(&c.to_u64_digits()) - ln_total).exp()))
            .collect()
    }
}

pub fn exact_distribution(system: &BaseSystem, n: u64, stat: Statistic) -> Result<Distribution> {
    exact_distribution_with(system, n, stat, &Limits::default())
}

/// Largest statistic value any representation of a value `≤ v` can have,
/// for every `v ≤ n`: spend the budget on the cheapest digit units.
fn statistic_caps(items: &[u64], stat: Statistic, max_digit: u32, n: usize) -> Vec<usize> {
    // each unit of statistic costs `unit_cost · h` and may be bought `copies` times
    let (unit_cost, copies) = match stat {
        Statistic::SumOfDigits => (1, max_digit as u64),
        Statistic::HammingWeight => (1, 1),
        Statistic::DigitCount(b) => (b.get() as u64, 1),
    };
    let mut caps = vec![0usize; n + 1];
    let mut thresholds = Vec::new(); // thresholds[s] = min cost of statistic s+1
    let mut spent = 0u64;
    'outer: for &h in items {
        for _ in 0..copies {
            spent += unit_cost * h;
            if spent > n as u64 {
                break 'outer;
            }
            thresholds.push(spent);
        }
    }
    let mut s = 0;
    for (v, cap) in caps.iter_mut().enumerate() {
        while s < thresholds.len() && thresholds[s] <= v as u64 {
            s += 1;
        }
        *cap = s;
    }
    caps
}

/// Polynomial-in-`u` DP: row `v` holds the counts of partial representations
/// of `v` by statistic value. Rows have jagged lengths bounded by the
/// cheapest-units cap and are updated in place from the top down.
pub fn exact_distribution_with(
    system: &BaseSystem,
    n: u64,
    stat: Statistic,
    limits: &Limits,
) -> Result<Distribution> {
    let stat = stat.validate(system)?;
    if n > limits.max_distribution_n {
        return Err(Error::LimitExceeded { what: "distribution", n, limit: limits.max_distribution_n });
    }
    let n_usize = n as usize;
    let items = elements_upto(system, n);
    let caps = statistic_caps(&items, stat, system.max_digit(), n_usize);
    let width = limbs_for_bits(power_bits(system.digit_bound(), items.len()));
    let mut offsets = Vec::with_capacity(n_usize + 2);
    let mut total_cells: u128 = 0;
    for &cap in &caps {
        offsets.push(total_cells as usize);
        total_cells += cap as u128 + 1;
    }
    offsets.push(total_cells as usize);
    limits.check(total_cells * width as u128 * 8)?;

    let mut data = vec![0u64; total_cells as usize * width];
    data[0] = 1;
    let weights: Vec<usize> = (0..system.digit_bound()).map(|d| stat.digit_weight(d) as usize).collect();
    for &h in &items {
        let h = h as usize;
        for v in (h..=n_usize).rev() {
            let (lo, hi) = data.split_at_mut(offsets[v] * width);
            let row = &mut hi[..(caps[v] + 1) * width];
            for (digit, &w) in weights.iter().enumerate().skip(1) {
                let Some(src) = v.checked_sub(digit * h) else { break };
                let src_row = &lo[offsets[src] * width..offsets[src + 1] * width];
                for (s, cell) in src_row.chunks_exact(width).enumerate() {
                    if s + w > caps[v] {
                        debug_assert!(cell.iter().all(|&l| l == 0), "statistic cap violated");
                        break;
                    }
                    let target = &mut row[(s + w) * width..(s + w + 1) * width];
                    let carry = add_assign(target, cell);
                    debug_assert!(!carry);
                }
            }
        }
    }
    let row = &data[offsets[n_usize] * width..offsets[n_usize + 1] * width];
    let counts = row
        .chunks_exact(width)
        .enumerate()
        .filter(|(_, c)| c.iter().any(|&l| l != 0))
        .map(|(s, c)| (s as u64, to_biguint(c)))
        .collect();
    Ok(Distribution { n, statistic: stat, counts })
}
