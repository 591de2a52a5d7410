//! The Hardy–Littlewood–Pólya sequence `S = {p_1^α_1 ··· p_m^α_m}`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BaseSystem;

/// All members of S up to a limit, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SPrefix {
    #[serde(skip)]
    system: BaseSystem,
    limit: u64,
    elements: Vec<u64>,
}

impl SPrefix {
    pub fn system(&self) -> &BaseSystem {
        &self.system
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }
}

/// Generates `S ∩ [1, x]` by an m-way pointer merge.
///
/// Each base keeps a pointer into the output; the next element is the
/// smallest pending product and every pointer that produced it advances, so
/// duplicates such as `2·3 = 3·2` are emitted once.
pub fn generate_upto(system: &BaseSystem, x: u64) -> Result<SPrefix> {
    if x == 0 {
        return Err(Error::Domain("limit must be at least 1".into()));
    }
    let bases = system.bases();
    let mut elements = vec![1u64];
    let mut ptr = vec![0usize; bases.len()];
    let candidate = |e: &[u64], i: usize, p: u64| e[i] as u128 * p as u128;
    let mut pending: Vec<u128> = bases.iter().map(|&p| candidate(&elements, 0, p)).collect();
    loop {
        let next = *pending.iter().min().expect("at least two bases");
        if next > x as u128 {
            break;
        }
        elements.push(next as u64);
        for j in 0..bases.len() {
            if pending[j] == next {
                ptr[j] += 1;
                pending[j] = candidate(&elements, ptr[j], bases[j]);
            }
        }
    }
    Ok(SPrefix { system: system.clone(), limit: x, elements })
}

/// Elements of S up to `x` as a plain vector (internal convenience).
pub(crate) fn elements_upto(system: &BaseSystem, x: u64) -> Vec<u64> {
    if x == 0 {
        return Vec::new();
    }
    generate_upto(system, x).map(SPrefix::into_elements).unwrap_or_default()
}

/// Accepts an arbitrary-precision limit; fails with `LimitOverflow` beyond
/// the native 64-bit range.
pub fn generate_upto_big(system: &BaseSystem, x: &BigUint) -> Result<SPrefix> {
    let x = x
        .to_u64()
        .ok_or_else(|| Error::LimitOverflow(format!("limit {x} exceeds 64 bits")))?;
    generate_upto(system, x)
}

/// `|S ∩ [1, x]|` without materializing the elements.
pub fn count_upto(system: &BaseSystem, x: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::Domain("limit must be at least 1".into()));
    }
    Ok(count_rec(system.bases(), x))
}

/// Arbitrary-precision variant of [`count_upto`].
pub fn count_upto_big(system: &BaseSystem, x: &BigUint) -> Result<BigUint> {
    if x.bits() == 0 {
        return Err(Error::Domain("limit must be at least 1".into()));
    }
    Ok(count_rec_big(system.bases(), x))
}

// count(x, j) = Σ_{k : p_j^k ≤ x} count(x / p_j^k, j-1)
fn count_rec(bases: &[u64], x: u64) -> u64 {
    let (&p, rest) = bases.split_last().expect("non-empty");
    if rest.is_empty() {
        return x.ilog(p) as u64 + 1;
    }
    let mut total = 0;
    let mut q = x;
    loop {
        total += count_rec(rest, q);
        if q < p {
            break;
        }
        q /= p;
    }
    total
}

fn count_rec_big(bases: &[u64], x: &BigUint) -> BigUint {
    if let Some(small) = x.to_u64() {
        return BigUint::from(count_rec(bases, small));
    }
    let (&p, rest) = bases.split_last().expect("non-empty");
    if rest.is_empty() {
        let mut k = BigUint::one();
        let mut q = x / p;
        while q.bits() > 0 {
            k += 1u32;
            q /= p;
        }
        return k;
    }
    let mut total = BigUint::default();
    let mut q = x.clone();
    while q.bits() > 0 {
        total += count_rec_big(rest, &q);
        q /= p;
    }
    total
}

/// Leading term `(log 1/r)^m / (m! ∏ log p_j)` of `|S ∩ [1, 1/r]|`.
pub fn cardinality_estimate(system: &BaseSystem, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, 1)")));
    }
    let m = system.m();
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    Ok((1.0 / r).ln().powi(m as i32) / (factorial * system.log_base_product()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(bases: &[u64]) -> BaseSystem {
        BaseSystem::new(bases, 2).unwrap()
    }

    /// Divide out every base; keep k iff the quotient reaches 1.
    fn sieve(bases: &[u64], x: u64) -> Vec<u64> {
        (1..=x)
            .filter(|&k| {
                let mut q = k;
                for &p in bases {
                    while q % p == 0 {
                        q /= p;
                    }
                }
                q == 1
            })
            .collect()
    }

    #[test]
    fn small_prefixes() {
        let s = sys(&[2, 3]);
        assert_eq!(generate_upto(&s, 10).unwrap().elements(), &[1, 2, 3, 4, 6, 8, 9]);
        assert_eq!(generate_upto(&s, 1).unwrap().elements(), &[1]);
        assert_eq!(generate_upto(&sys(&[2, 3, 5]), 30).unwrap().len(), 18);
        assert_eq!(sieve(&[2, 3, 5], 30).len(), 18);
        assert!(generate_upto(&s, 0).is_err());
    }

    #[test]
    fn generation_matches_sieve() {
        for bases in [&[2u64, 3][..], &[2, 3, 5], &[3, 5], &[2, 9, 25], &[4, 9]] {
            let s = sys(bases);
            for x in [1u64, 2, 7, 100, 5000] {
                assert_eq!(generate_upto(&s, x).unwrap().into_elements(), sieve(bases, x));
            }
        }
    }

    #[test]
    fn counting_matches_generation() {
        let s = sys(&[2, 3]);
        assert_eq!(count_upto(&s, 10).unwrap(), 7);
        assert_eq!(count_upto(&s, 1).unwrap(), 1);
        assert_eq!(count_upto(&s, 1000).unwrap(), generate_upto(&s, 1000).unwrap().len() as u64);
        let s5 = sys(&[2, 3, 5]);
        for x in [1u64, 30, 12345, 1 << 40] {
            assert_eq!(count_upto(&s5, x).unwrap(), generate_upto(&s5, x).unwrap().len() as u64);
        }
    }

    #[test]
    fn near_u64_max_and_beyond() {
        let s = sys(&[2, 3]);
        let full = generate_upto(&s, u64::MAX).unwrap();
        assert_eq!(full.len() as u64, count_upto(&s, u64::MAX).unwrap());
        assert!(full.elements().last().unwrap().checked_mul(2).is_none());

        let big = BigUint::from(u64::MAX) * 1000u32;
        let c = count_upto_big(&s, &big).unwrap();
        let expected = sieve_count_big(&[2, 3], &big);
        assert_eq!(c, expected);
        assert!(matches!(generate_upto_big(&s, &big), Err(Error::LimitOverflow(_))));
    }

    fn sieve_count_big(bases: &[u64], x: &BigUint) -> BigUint {
        // enumerate exponent pairs directly
        let mut n = BigUint::default();
        let mut a = BigUint::one();
        while &a <= x {
            let mut b = a.clone();
            while &b <= x {
                n += 1u32;
                b *= bases[1];
            }
            a *= bases[0];
        }
        n
    }

    #[test]
    fn cardinality_estimate_values() {
        let s = sys(&[2, 3]);
        let est = cardinality_estimate(&s, 1e-3).unwrap();
        let closed = 1000f64.ln().powi(2) / (2.0 * 2f64.ln() * 3f64.ln());
        assert!((est - closed).abs() < 1e-12);
        assert!((est - 31.33).abs() < 0.01);
        assert!(cardinality_estimate(&s, 1.0 - 1e-12).unwrap() < 1e-20);
        assert!(cardinality_estimate(&s, 0.0).is_err());
        assert!(cardinality_estimate(&s, 1.0).is_err());
        let ratio = count_upto(&s, 1_000_000).unwrap() as f64 / cardinality_estimate(&s, 1e-6).unwrap();
        assert!((0.8..=1.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn cardinality_ratio_trends_to_one() {
        let s = sys(&[2, 3]);
        let dev: Vec<f64> = (2..=8)
            .map(|k| {
                let x = 10u64.pow(k);
                let ratio = count_upto(&s, x).unwrap() as f64 / cardinality_estimate(&s, 1.0 / x as f64).unwrap();
                (ratio - 1.0).abs()
            })
            .collect();
        // the O(1/log x) correction is not monotone point by point, but the
        // envelope shrinks
        assert!(dev[6] < dev[0]);
        assert!(dev[6] < dev[2]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closure_under_multiplication(x in 1u64..200_000) {
                let s = sys(&[2, 3, 5]);
                let prefix = generate_upto(&s, x).unwrap();
                let e = prefix.elements();
                prop_assert_eq!(e[0], 1);
                prop_assert!(e.windows(2).all(|w| w[0] < w[1]));
                for &h in e {
                    for &p in s.bases() {
                        if h * p <= x {
                            prop_assert!(e.binary_search(&(h * p)).is_ok());
                        }
                    }
                }
                prop_assert_eq!(e.len() as u64, count_upto(&s, x).unwrap());
            }
        }
    }
}
