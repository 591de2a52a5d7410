//! Flat storage for tables of fixed-width unsigned integers.
//!
//! The exact dynamic programs touch every cell once per element of S, so
//! per-cell heap allocation (one `BigUint` per entry) dominates their cost.
//! Here every entry of a table occupies the same number of little-endian
//! 64-bit limbs in one contiguous buffer. Widths come from a priori bounds
//! on the counts, e.g. `P(n) ≤ d^{|S ∩ [1,n]|}`.

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};

/// Resource limits for table construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound on the bytes a single table build may allocate.
    pub max_table_bytes: u64,
    /// Largest `n` for exact statistic distributions.
    pub max_distribution_n: u64,
    /// Largest `n` for layered sampler tables.
    pub max_sampler_n: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_table_bytes: 4 << 30, max_distribution_n: 1_000_000, max_sampler_n: 100_000 }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits { max_table_bytes: u64::MAX, max_distribution_n: u64::MAX, max_sampler_n: u64::MAX }
    }

    pub(crate) fn check(&self, bytes: u128) -> Result<()> {
        if bytes > self.max_table_bytes as u128 {
            return Err(Error::OutOfMemory {
                requested: bytes.min(u64::MAX as u128) as u64,
                limit: self.max_table_bytes,
            });
        }
        Ok(())
    }
}

/// Number of 64-bit limbs needed for values below `2^bits`.
pub(crate) fn limbs_for_bits(bits: u64) -> usize {
    (bits.max(1) as usize).div_ceil(64)
}

/// Bit length of `d^k`, plus one spare bit.
pub(crate) fn power_bits(d: u32, k: usize) -> u64 {
    BigUint::from(d).pow(k as u32).bits() + 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct WideTable {
    width: usize,
    rows: usize,
    data: Vec<u64>,
}

impl WideTable {
    pub fn zeros(rows: usize, width: usize) -> Self {
        WideTable { width, rows, data: vec![0; rows * width] }
    }

    pub fn bytes(rows: usize, width: usize) -> u128 {
        rows as u128 * width as u128 * 8
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn set_small(&mut self, i: usize, value: u64) {
        let row = self.row_mut(i);
        row.fill(0);
        row[0] = value;
    }

    pub fn get(&self, i: usize) -> BigUint {
        to_biguint(self.row(i))
    }

    pub fn ln(&self, i: usize) -> f64 {
        ln_limbs(self.row(i))
    }

    /// Splits into the rows strictly below `i` and row `i` itself.
    pub fn split_at_row(&mut self, i: usize) -> (&[u64], &mut [u64]) {
        let (lo, hi) = self.data.split_at_mut(i * self.width);
        (lo, &mut hi[..self.width])
    }

    /// Copies rows `0..k` of `src`, which must have the same width.
    pub fn copy_rows_from(&mut self, src: &WideTable, k: usize) {
        debug_assert_eq!(self.width, src.width);
        let end = k.min(self.rows) * self.width;
        self.data[..end].copy_from_slice(&src.data[..end]);
    }

    /// Re-lays the table out with one more limb per entry.
    pub fn widen(&mut self) {
        let w = self.width;
        let mut data = vec![0; self.rows * (w + 1)];
        for (dst, src) in data.chunks_exact_mut(w + 1).zip(self.data.chunks_exact(w)) {
            dst[..w].copy_from_slice(src);
        }
        self.width = w + 1;
        self.data = data;
    }

}

pub(crate) fn to_biguint(limbs: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(limbs.len() * 2);
    for &l in limbs {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

/// Natural logarithm of a limb slice; `-inf` for zero.
pub(crate) fn ln_limbs(limbs: &[u64]) -> f64 {
    let top = match limbs.iter().rposition(|&l| l != 0) {
        Some(t) => t,
        None => return f64::NEG_INFINITY,
    };
    if top == 0 {
        return (limbs[0] as f64).ln();
    }
    // the top 128 bits carry far more precision than f64 keeps
    let hi = limbs[top] as f64 * 2f64.powi(64) + limbs[top - 1] as f64;
    hi.ln() + ((top - 1) * 64) as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a `BigUint`, accurate to f64 precision at any size.
pub fn ln_biguint(x: &BigUint) -> f64 {
    ln_limbs(&x.to_u64_digits())
}

/// `dst ← a + b - c` (missing operands are zero). Returns the final signed carry,
/// which is zero whenever the true result fits the width.
#[inline]
pub(crate) fn add_sub(dst: &mut [u64], a: Option<&[u64]>, b: &[u64], c: Option<&[u64]>) -> i128 {
    let mut carry: i128 = 0;
    for i in 0..dst.len() {
        let mut acc = carry + b[i] as i128;
        if let Some(a) = a {
            acc += a[i] as i128;
        }
        if let Some(c) = c {
            acc -= c[i] as i128;
        }
        dst[i] = acc as u64;
        carry = acc >> 64;
    }
    carry
}

/// `dst += k · src`. Returns the carry out of the top limb.
#[inline]
pub(crate) fn add_mul(dst: &mut [u64], src: &[u64], k: u64) -> u64 {
    let mut carry: u128 = 0;
    for (d, &s) in dst.iter_mut().zip(src) {
        let acc = *d as u128 + s as u128 * k as u128 + carry;
        *d = acc as u64;
        carry = acc >> 64;
    }
    carry as u64
}

/// `dst += src`. Returns the carry out of the top limb.
#[inline]
pub(crate) fn add_assign(dst: &mut [u64], src: &[u64]) -> bool {
    let mut carry = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        let (x, c1) = d.overflowing_add(s);
        let (y, c2) = x.overflowing_add(carry as u64);
        *d = y;
        carry = c1 | c2;
    }
    carry
}

/// `dst -= src`, requiring `dst ≥ src`.
#[inline]
pub(crate) fn sub_assign(dst: &mut [u64], src: &[u64]) {
    let mut borrow = false;
    for (d, &s) in dst.iter_mut().zip(src) {
        let (x, b1) = d.overflowing_sub(s);
        let (y, b2) = x.overflowing_sub(borrow as u64);
        *d = y;
        borrow = b1 | b2;
    }
    debug_assert!(!borrow, "subtraction underflow");
}

pub(crate) fn cmp_limbs(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Uniform draw from `[0, bound)` by rejection on the bit length of `bound`.
pub(crate) fn uniform_below<R: Rng + ?Sized>(rng: &mut R, bound: &[u64], out: &mut [u64]) {
    let top = bound.iter().rposition(|&l| l != 0).expect("bound must be positive");
    let top_bits = 64 - bound[top].leading_zeros();
    let mask = if top_bits == 64 { u64::MAX } else { (1u64 << top_bits) - 1 };
    loop {
        out.fill(0);
        for limb in out.iter_mut().take(top + 1) {
            *limb = rng.random::<u64>();
        }
        out[top] &= mask;
        if cmp_limbs(out, bound) == std::cmp::Ordering::Less {
            return;
        }
    }
}
