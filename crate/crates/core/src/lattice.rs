//! Sites, directed edges and the cone/wedge geometry of the directed square lattice.
//!
//! Coordinates are kept unrotated: a site is `(a, b)`, its height is `a + b`
//! and its deviation is `b - a`. The "rotated by a quarter turn" picture only
//! matters for display, where height points up and deviation runs sideways.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub a: i64,
    pub b: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { a: 0, b: 0 };

    #[inline]
    pub const fn new(a: i64, b: i64) -> Self {
        Site { a, b }
    }

    /// Builds the site with the given height and deviation. Both must share parity.
    pub fn from_height_deviation(height: i64, deviation: i64) -> Option<Self> {
        if (height - deviation).rem_euclid(2) != 0 {
            return None;
        }
        Some(Site::new((height - deviation) / 2, (height + deviation) / 2))
    }

    #[inline]
    pub const fn height(self) -> i64 {
        self.a + self.b
    }

    #[inline]
    pub const fn deviation(self) -> i64 {
        self.b - self.a
    }

    #[inline]
    pub fn step(self, step: Step) -> Site {
        self + step.offset()
    }

    #[inline]
    pub fn step_down(self, step: Step) -> Site {
        self - step.offset()
    }

    /// Both upward edges leaving this site.
    #[inline]
    pub fn out_edges(self) -> [DirectedEdge; 2] {
        [DirectedEdge::new(self, Step::A), DirectedEdge::new(self, Step::B)]
    }

    /// Both upward edges arriving at this site.
    #[inline]
    pub fn in_edges(self) -> [DirectedEdge; 2] {
        [
            DirectedEdge::new(self.step_down(Step::A), Step::A),
            DirectedEdge::new(self.step_down(Step::B), Step::B),
        ]
    }

    /// Componentwise order: `self <= other` in both coordinates. An upward
    /// directed path from `self` can reach `other` exactly when this holds.
    #[inline]
    pub fn precedes(self, other: Site) -> bool {
        self.a <= other.a && self.b <= other.b
    }
}

impl Add for Site {
    type Output = Site;
    #[inline]
    fn add(self, rhs: Site) -> Site {
        Site::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for Site {
    type Output = Site;
    #[inline]
    fn sub(self, rhs: Site) -> Site {
        Site::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for Site {
    type Output = Site;
    #[inline]
    fn neg(self) -> Site {
        Site::new(-self.a, -self.b)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// One step of a directed walk: `A` moves `(1,0)`, `B` moves `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Step {
    A,
    B,
}

impl Step {
    #[inline]
    pub const fn offset(self) -> Site {
        match self {
            Step::A => Site::new(1, 0),
            Step::B => Site::new(0, 1),
        }
    }

    #[inline]
    pub const fn from_bit(bit: bool) -> Step {
        if bit {
            Step::A
        } else {
            Step::B
        }
    }

    #[inline]
    pub const fn index(self) -> u64 {
        match self {
            Step::A => 0,
            Step::B => 1,
        }
    }
}

/// An upward directed edge, stored as its lower vertex plus the step to the upper one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub lower: Site,
    pub step: Step,
}

impl DirectedEdge {
    #[inline]
    pub const fn new(lower: Site, step: Step) -> Self {
        DirectedEdge { lower, step }
    }

    /// Returns the edge between two sites, if `upper - lower` is a unit step.
    pub fn between(lower: Site, upper: Site) -> Option<Self> {
        match upper - lower {
            Site { a: 1, b: 0 } => Some(DirectedEdge::new(lower, Step::A)),
            Site { a: 0, b: 1 } => Some(DirectedEdge::new(lower, Step::B)),
            _ => None,
        }
    }

    #[inline]
    pub fn upper(self) -> Site {
        self.lower.step(self.step)
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.lower, self.upper())
    }
}

/// The upper endpoints of the two edges leaving `p`.
#[inline]
pub fn neighbors_up(p: Site) -> [Site; 2] {
    [p.step(Step::A), p.step(Step::B)]
}

/// A cone slope. Rational slopes are compared exactly in integers; real
/// slopes use floating point with an absolute tolerance of `1e-12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Slope {
    Rational { num: u64, den: u64 },
    Real(f64),
}

pub const REAL_SLOPE_TOLERANCE: f64 = 1e-12;

impl Slope {
    pub fn rational(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!("slope {num}/{den} must be positive")));
        }
        Ok(Slope::Rational { num, den })
    }

    pub fn real(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidParameter(format!("slope {value} must be positive and finite")));
        }
        Ok(Slope::Real(value))
    }

    /// Integer slopes are rational; everything else is kept as a real.
    pub fn from_f64(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value.fract() == 0.0 && value < 1e15 {
            Slope::rational(value as u64, 1)
        } else {
            Slope::real(value)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Slope::Rational { num, den } => num as f64 / den as f64,
            Slope::Real(v) => v,
        }
    }

    /// `lhs >= slope * rhs` for nonnegative integers.
    pub(crate) fn scaled_le(self, rhs: i64, lhs: i64) -> bool {
        match self {
            Slope::Rational { num, den } => {
                (lhs as i128) * (den as i128) >= (rhs as i128) * (num as i128)
            }
            Slope::Real(v) => lhs as f64 >= v * rhs as f64 - REAL_SLOPE_TOLERANCE,
        }
    }

    /// `lhs > slope * rhs` for nonnegative integers.
    fn scaled_lt(self, rhs: i64, lhs: i64) -> bool {
        match self {
            Slope::Rational { num, den } => {
                (lhs as i128) * (den as i128) > (rhs as i128) * (num as i128)
            }
            Slope::Real(v) => lhs as f64 > v * rhs as f64 + REAL_SLOPE_TOLERANCE,
        }
    }

    fn scaled_eq(self, rhs: i64, lhs: i64) -> bool {
        match self {
            Slope::Rational { num, den } => {
                (lhs as i128) * (den as i128) == (rhs as i128) * (num as i128)
            }
            Slope::Real(v) => (lhs as f64 - v * rhs as f64).abs() <= REAL_SLOPE_TOLERANCE,
        }
    }

    fn plus_one(self) -> Slope {
        match self {
            Slope::Rational { num, den } => Slope::Rational { num: num + den, den },
            Slope::Real(v) => Slope::Real(v + 1.0),
        }
    }
}

/// Membership in the double cone `apex + C_b`: `|height| >= b * |deviation|`
/// relative to the apex. The cone opens both upward and downward.
pub fn in_cone(q: Site, apex: Site, b: Slope) -> bool {
    let rel = q - apex;
    b.scaled_le(rel.deviation().abs(), rel.height().abs())
}

/// Membership in the upward branch of `apex + C_b`.
pub fn in_upper_cone(q: Site, apex: Site, b: Slope) -> bool {
    let rel = q - apex;
    rel.height() >= 0 && b.scaled_le(rel.deviation().abs(), rel.height())
}

/// Membership in the downward branch of `apex + C_b`.
pub fn in_lower_cone(q: Site, apex: Site, b: Slope) -> bool {
    in_upper_cone(apex, q, b)
}

/// Membership in the wedge `apex + W_b`: `|height| = (b + 1) * (-deviation)`
/// with `-deviation >= 0`, i.e. two rays opening toward negative deviation.
pub fn on_wedge(q: Site, apex: Site, b: Slope) -> bool {
    let rel = q - apex;
    let x = -rel.deviation();
    x >= 0 && b.plus_one().scaled_eq(x, rel.height().abs())
}

/// Whether `q` lies in the component cut out by `apex + W_b` that contains
/// `apex + (-1, 1)`.
pub fn left_of_wedge(q: Site, apex: Site, b: Slope) -> bool {
    let rel = q - apex;
    let x = -rel.deviation();
    if x < 0 {
        return true;
    }
    b.plus_one().scaled_lt(x, rel.height().abs())
}

/// Parameters of the geometric cluster assumption: cone slope `a`, offset `K`,
/// and a generic cone parameter `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeWedgeParams {
    pub a: Slope,
    pub k: f64,
    pub b: Slope,
}

impl ConeWedgeParams {
    pub fn new(a: Slope, k: f64, b: Slope) -> Result<Self> {
        if !(a.value() > 0.0 && b.value() > 0.0) {
            return Err(Error::InvalidParameter("cone slopes must be positive".into()));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidParameter(format!("offset K = {k} must be nonnegative")));
        }
        Ok(ConeWedgeParams { a, k, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_up_examples() {
        assert_eq!(neighbors_up(Site::ORIGIN), [Site::new(1, 0), Site::new(0, 1)]);
        assert_eq!(neighbors_up(Site::new(2, 3)), [Site::new(3, 3), Site::new(2, 4)]);
    }

    #[test]
    fn neighbors_up_raise_height_by_one() {
        let mut x: i64 = 17;
        for _ in 0..100 {
            x = (x * 1103515245 + 12345).rem_euclid(1 << 31);
            let p = Site::new(x % 1000 - 500, (x / 1000) % 1000 - 500);
            for q in neighbors_up(p) {
                assert_eq!(q.height(), p.height() + 1);
                assert_eq!((q.deviation() - p.deviation()).abs(), 1);
            }
        }
    }

    #[test]
    fn height_deviation_round_trip() {
        let p = Site::new(3, -7);
        assert_eq!(Site::from_height_deviation(p.height(), p.deviation()), Some(p));
        assert_eq!(Site::from_height_deviation(1, 0), None);
    }

    #[test]
    fn edge_between() {
        let e = DirectedEdge::between(Site::new(2, 2), Site::new(2, 3)).unwrap();
        assert_eq!(e.step, Step::B);
        assert_eq!(e.upper(), Site::new(2, 3));
        assert!(DirectedEdge::between(Site::new(2, 2), Site::new(3, 3)).is_none());
        assert_eq!(Site::new(4, 4).in_edges().map(|e| e.upper()), [Site::new(4, 4); 2]);
    }

    #[test]
    fn cone_examples() {
        let one = Slope::rational(1, 1).unwrap();
        let two = Slope::rational(2, 1).unwrap();
        assert!(in_cone(Site::new(3, -2), Site::new(3, -2), two));
        assert!(in_cone(Site::new(5, 5), Site::ORIGIN, one));
        // (0,1): height 1, deviation 1, and 1 >= 2 * 1 fails.
        assert!(!in_cone(Site::new(0, 1), Site::ORIGIN, two));
        // Downward branch.
        assert!(in_cone(Site::new(-3, -3), Site::ORIGIN, two));
        assert!(!in_upper_cone(Site::new(-3, -3), Site::ORIGIN, two));
        assert!(in_lower_cone(Site::new(-3, -3), Site::ORIGIN, two));
    }

    #[test]
    fn real_and_rational_slopes_agree_on_lattice_points() {
        let exact = Slope::rational(3, 2).unwrap();
        let real = Slope::real(1.5).unwrap();
        for a in -6..=6 {
            for b in -6..=6 {
                let q = Site::new(a, b);
                assert_eq!(in_cone(q, Site::ORIGIN, exact), in_cone(q, Site::ORIGIN, real), "{q}");
            }
        }
    }

    #[test]
    fn wedge_and_left_side() {
        let b = Slope::rational(2, 1).unwrap();
        // Rays |h| = 3 * (-d).
        let on = Site::from_height_deviation(3, -1).unwrap();
        assert!(on_wedge(on, Site::ORIGIN, b));
        assert!(!left_of_wedge(on, Site::ORIGIN, b));
        assert!(left_of_wedge(Site::new(-1, 1), Site::ORIGIN, b));
        // Inside the opening of the wedge.
        assert!(!left_of_wedge(Site::from_height_deviation(0, -4).unwrap(), Site::ORIGIN, b));
        assert!(left_of_wedge(Site::from_height_deviation(6, 0).unwrap(), Site::ORIGIN, b));
    }

    #[test]
    fn invalid_parameters() {
        assert!(Slope::rational(0, 1).is_err());
        assert!(Slope::real(-1.0).is_err());
        let one = Slope::rational(1, 1).unwrap();
        assert!(ConeWedgeParams::new(one, -1.0, one).is_err());
        assert!(ConeWedgeParams::new(one, 2.0, one).is_ok());
    }
}
