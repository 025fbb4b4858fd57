//! Path-mass weights: exact dyadic rationals and their floating-point stand-in.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

/// Arithmetic needed by the level sweeps: every mass is built from `1` by
/// halving, adding and multiplying by small counts.
pub trait Weight: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn half(&self) -> Self;
    fn times(&self, k: u32) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    /// Draws an index with probability proportional to `weights[i]`.
    /// `total` must be the sum of `weights` and nonzero.
    fn sample_index<R: Rng + ?Sized>(weights: &[Self], total: &Self, rng: &mut R) -> usize;

    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn half(&self) -> Self {
        self * 0.5
    }
    fn times(&self, k: u32) -> Self {
        self * k as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sample_index<R: Rng + ?Sized>(weights: &[Self], total: &Self, rng: &mut R) -> usize {
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).expect("positive total")
    }
}

/// A nonnegative dyadic rational `num / 2^exp`, kept in lowest terms.
///
/// Numerators live in a `u128`; arithmetic panics rather than wrapping if a
/// value would not fit, which cannot happen for sweeps spanning at most
/// [`EXACT_SPAN_LIMIT`] levels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u128,
    exp: u32,
}

/// Largest height span over which sweeps run in exact arithmetic.
pub const EXACT_SPAN_LIMIT: i64 = 64;

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: u128, exp: u32) -> Self {
        assert!(exp < 128, "dyadic exponent {exp} out of range");
        Dyadic { num, exp }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
        self
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    /// The denominator is `2^exp`.
    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn denominator(&self) -> u128 {
        1u128 << self.exp
    }

    /// Numerator rescaled to denominator `2^exp`, for `exp >= self.exponent()`.
    fn scaled_to(&self, exp: u32) -> u128 {
        let shift = exp - self.exp;
        if self.num != 0 && (shift >= 128 || self.num.leading_zeros() < shift) {
            panic!("dyadic overflow rescaling {self:?} to 2^{exp}");
        }
        self.num << shift
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(1u8) << self.exp)
    }
}

impl Weight for Dyadic {
    fn zero() -> Self {
        Dyadic::ZERO
    }
    fn one() -> Self {
        Dyadic::ONE
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        if self.num == 0 {
            return *other;
        }
        if other.num == 0 {
            return *self;
        }
        let exp = self.exp.max(other.exp);
        let num = self
            .scaled_to(exp)
            .checked_add(other.scaled_to(exp))
            .unwrap_or_else(|| panic!("dyadic overflow adding {self:?} and {other:?}"));
        Dyadic { num, exp }.normalized()
    }
    #[inline]
    fn half(&self) -> Self {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        if self.num & 1 == 0 {
            return Dyadic { num: self.num >> 1, exp: self.exp };
        }
        assert!(self.exp < 127, "dyadic exponent overflow halving {self:?}");
        Dyadic { num: self.num, exp: self.exp + 1 }
    }
    fn times(&self, k: u32) -> Self {
        let num = self
            .num
            .checked_mul(k as u128)
            .unwrap_or_else(|| panic!("dyadic overflow multiplying {self:?} by {k}"));
        Dyadic { num, exp: self.exp }.normalized()
    }
    fn is_zero(&self) -> bool {
        self.num == 0
    }
    fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
    fn sample_index<R: Rng + ?Sized>(weights: &[Self], total: &Self, rng: &mut R) -> usize {
        let exp = weights.iter().map(|w| w.exp).max().unwrap_or(0).max(total.exp);
        let bound = total.scaled_to(exp);
        let mut u = rng.random_range(0..bound);
        for (i, w) in weights.iter().enumerate() {
            let n = w.scaled_to(exp);
            if u < n {
                return i;
            }
            u -= n;
        }
        unreachable!("total exceeds the sum of weights")
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.scaled_to(exp).cmp(&other.scaled_to(exp))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.denominator())
        }
    }
}
