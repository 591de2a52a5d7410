//! Base systems, representations and digit statistics.

use std::fmt;
use std::num::NonZeroU32;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A multi-base numeral system: pairwise coprime bases `p_1 < ... < p_m`
/// together with the digit set `{0, ..., d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBaseSystem", into = "RawBaseSystem")]
pub struct BaseSystem {
    bases: Vec<u64>,
    digit_bound: u32,
}

#[derive(Serialize, Deserialize)]
struct RawBaseSystem {
    bases: Vec<u64>,
    digits: u32,
}

impl TryFrom<RawBaseSystem> for BaseSystem {
    type Error = Error;

    fn try_from(raw: RawBaseSystem) -> Result<Self> {
        BaseSystem::new(&raw.bases, raw.digits)
    }
}

impl From<BaseSystem> for RawBaseSystem {
    fn from(sys: BaseSystem) -> Self {
        RawBaseSystem { bases: sys.bases, digits: sys.digit_bound }
    }
}

impl BaseSystem {
    /// Validates the raw parameters. Error positions are 1-based.
    pub fn new(bases: &[u64], digit_bound: u32) -> Result<Self> {
        if bases.len() < 2 {
            return Err(Error::TooFewBases(bases.len()));
        }
        for (i, &p) in bases.iter().enumerate() {
            if p < 2 {
                return Err(Error::BaseTooSmall { index: i + 1, base: p });
            }
        }
        for i in 1..bases.len() {
            if bases[i] <= bases[i - 1] {
                return Err(Error::UnsortedBases(i + 1));
            }
        }
        for i in 0..bases.len() {
            for j in i + 1..bases.len() {
                if bases[i].gcd(&bases[j]) != 1 {
                    return Err(Error::NonCoprimeBases(i + 1, j + 1));
                }
            }
        }
        if digit_bound < 2 {
            return Err(Error::DigitBoundTooSmall(digit_bound));
        }
        Ok(BaseSystem { bases: bases.to_vec(), digit_bound })
    }

    pub fn bases(&self) -> &[u64] {
        &self.bases
    }

    /// The digit bound `d`; digits range over `0..d`.
    pub fn digit_bound(&self) -> u32 {
        self.digit_bound
    }

    /// Number of bases `m`.
    pub fn m(&self) -> usize {
        self.bases.len()
    }

    pub fn max_digit(&self) -> u32 {
        self.digit_bound - 1
    }

    /// `∏ log p_j`.
    pub fn log_base_product(&self) -> f64 {
        self.bases.iter().map(|&p| (p as f64).ln()).product()
    }

    /// Whether `h` factors completely over the bases.
    pub fn contains(&self, h: u64) -> bool {
        if h == 0 {
            return false;
        }
        let mut rest = h;
        for &p in &self.bases {
            while rest % p == 0 {
                rest /= p;
            }
        }
        rest == 1
    }
}

impl fmt::Display for BaseSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bases: Vec<String> = self.bases.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}, d={}", bases.join(","), self.digit_bound)
    }
}

/// One expansion `n = Σ a_ℓ B_ℓ`.
///
/// Only nonzero digits are stored, so `terms` is strictly increasing in `B`
/// and every digit lies in `1..d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Representation {
    terms: Vec<(u64, u32)>,
    value: u64,
}

impl Representation {
    pub fn new(system: &BaseSystem, terms: Vec<(u64, u32)>) -> Result<Self> {
        let mut value: u64 = 0;
        for (idx, &(b, a)) in terms.iter().enumerate() {
            if idx > 0 && terms[idx - 1].0 >= b {
                return Err(Error::InvalidRepresentation(format!(
                    "terms not strictly increasing at position {}",
                    idx + 1
                )));
            }
            if a == 0 || a > system.max_digit() {
                return Err(Error::InvalidDigit { digit: a, max: system.max_digit() });
            }
            if !system.contains(b) {
                return Err(Error::InvalidRepresentation(format!("{b} is not in S")));
            }
            value = b
                .checked_mul(a as u64)
                .and_then(|x| x.checked_add(value))
                .ok_or_else(|| Error::LimitOverflow("representation value exceeds u64".into()))?;
        }
        Ok(Representation { terms, value })
    }

    /// Builds from terms that are already known to be valid (sampler output).
    pub(crate) fn from_valid_terms(terms: Vec<(u64, u32)>, value: u64) -> Self {
        debug_assert_eq!(terms.iter().map(|&(b, a)| b * a as u64).sum::<u64>(), value);
        Representation { terms, value }
    }

    pub fn terms(&self) -> &[(u64, u32)] {
        &self.terms
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Digit at element `h` of S (zero if absent).
    pub fn digit_at(&self, h: u64) -> u32 {
        self.terms
            .binary_search_by_key(&h, |&(b, _)| b)
            .map(|i| self.terms[i].1)
            .unwrap_or(0)
    }

    /// Recomputes `Σ a_ℓ B_ℓ` from the stored terms.
    pub fn evaluate(&self) -> u128 {
        self.terms.iter().map(|&(b, a)| b as u128 * a as u128).sum()
    }

    pub fn statistic(&self, stat: Statistic) -> u64 {
        statistic_value(self, stat)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(b, a)| if a == 1 { b.to_string() } else { format!("{a}*{b}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A digit statistic of a representation.
///
/// Digit 0 cannot be counted: a stored representation has infinitely many
/// implicit zero digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    SumOfDigits,
    HammingWeight,
    DigitCount(NonZeroU32),
}

impl Statistic {
    pub fn digit_count(b: u32) -> Result<Self> {
        NonZeroU32::new(b)
            .map(Statistic::DigitCount)
            .ok_or(Error::InvalidDigit { digit: 0, max: u32::MAX })
    }

    /// Checks the statistic against the digit bound of `system`.
    pub fn validate(self, system: &BaseSystem) -> Result<Self> {
        if let Statistic::DigitCount(b) = self {
            if b.get() > system.max_digit() {
                return Err(Error::InvalidDigit { digit: b.get(), max: system.max_digit() });
            }
        }
        Ok(self)
    }

    /// Contribution of a single digit `a` to the statistic.
    pub fn digit_weight(self, a: u32) -> u64 {
        match self {
            Statistic::SumOfDigits => a as u64,
            Statistic::HammingWeight => (a != 0) as u64,
            Statistic::DigitCount(b) => (a == b.get()) as u64,
        }
    }

    /// Largest per-digit contribution for the given system.
    pub fn max_digit_weight(self, system: &BaseSystem) -> u64 {
        match self {
            Statistic::SumOfDigits => system.max_digit() as u64,
            _ => 1,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::SumOfDigits => write!(f, "sum"),
            Statistic::HammingWeight => write!(f, "weight"),
            Statistic::DigitCount(b) => write!(f, "digit:{b}"),
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sum" | "sum-of-digits" => Ok(Statistic::SumOfDigits),
            "weight" | "hamming" | "hamming-weight" => Ok(Statistic::HammingWeight),
            other => {
                let b = other
                    .strip_prefix("digit:")
                    .and_then(|b| b.parse::<u32>().ok())
                    .ok_or_else(|| Error::Domain(format!("unknown statistic `{other}`")))?;
                Statistic::digit_count(b)
            }
        }
    }
}

impl Serialize for Statistic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Statistic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Evaluates a digit statistic on a representation.
pub fn statistic_value(rep: &Representation, stat: Statistic) -> u64 {
    rep.terms.iter().map(|&(_, a)| stat.digit_weight(a)).sum()
}
