//! Exploratory: vertical growth speed of a tilted interface.
//!
//! The lattice is folded into a strip that is periodic in the deviation
//! direction with a height shift, `(h, d) ~ (h + s, d + 2w)`, so that a
//! discretised line of slope `s / 2w` is itself periodic. The strip is an
//! approximation of the infinite interface, not part of the model proper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::fit::mean_stderr;
use crate::cluster::GrowthEdges;
use crate::error::{Error, Result};
use crate::harris::Walk;
use crate::lattice::{DirectedEdge, Site};

struct Strip {
    period: i64,
    shift: i64,
    occupied: FxHashSet<Site>,
    growth: GrowthEdges,
    /// `reach[d] >= h' - |d' - d|` over every image `(h', d')` of every site:
    /// a walk at `(h, d)` with `h > reach(d)` can no longer hit the cluster.
    reach: Vec<i64>,
    top: Vec<i64>,
}

impl Strip {
    fn canonical(&self, p: Site) -> Site {
        let (h, d) = (p.height(), p.deviation());
        let k = d.div_euclid(self.period);
        Site::from_height_deviation(h - k * self.shift, d - k * self.period).expect("parity is preserved")
    }

    fn reach(&self, p: Site) -> i64 {
        let d = p.deviation();
        let k = d.div_euclid(self.period);
        self.reach[(d - k * self.period) as usize] + k * self.shift
    }

    fn contains(&self, p: Site) -> bool {
        self.occupied.contains(&self.canonical(p))
    }

    fn insert(&mut self, p: Site) {
        let p = self.canonical(p);
        if !self.occupied.insert(p) {
            return;
        }
        for e in p.in_edges() {
            self.growth.remove(DirectedEdge::new(self.canonical(e.lower), e.step));
        }
        for e in p.out_edges() {
            if !self.contains(e.upper()) {
                self.growth.insert(e);
            }
        }
        let (h, d) = (p.height(), p.deviation());
        for k in -1..=1 {
            let (hk, dk) = (h + k * self.shift, d + k * self.period);
            for (x, r) in self.reach.iter_mut().enumerate() {
                *r = (*r).max(hk - (dk - x as i64).abs());
            }
        }
        let top = &mut self.top[d as usize];
        *top = (*top).max(h);
    }

    fn escapes(&self, start: Site, rng: &mut ChaCha8Rng) -> bool {
        let mut walk = Walk::from_rng(rng);
        let mut p = start;
        loop {
            if self.contains(p) {
                return false;
            }
            if p.height() > self.reach(p) {
                return true;
            }
            p = p.step(walk.next_step());
        }
    }
}

fn initial_heights(period: i64, shift: i64) -> Vec<i64> {
    // Largest height of the right parity not above the line h = shift * d / period.
    (0..period)
        .map(|d| {
            let h = (shift * d).div_euclid(period);
            if (h - d).rem_euclid(2) == 0 {
                h
            } else {
                h - 1
            }
        })
        .collect()
}

/// Mean advance of the column tops over the initial line at each time in `times`.
fn run_strip(alpha: f64, width: i64, times: &[f64], seed: u64) -> Vec<f64> {
    let period = 2 * width;
    let shift = 2 * (alpha.tan() * width as f64).round() as i64;
    let h0 = initial_heights(period, shift);
    let mut strip = Strip {
        period,
        shift,
        occupied: FxHashSet::default(),
        growth: GrowthEdges::default(),
        reach: vec![i64::MIN / 4; period as usize],
        top: vec![i64::MIN / 4; period as usize],
    };
    for (d, &h) in h0.iter().enumerate() {
        strip.insert(Site::from_height_deviation(h, d as i64).unwrap());
    }
    let advance = |s: &Strip| s.top.iter().zip(&h0).map(|(t, h)| (t - h) as f64).sum::<f64>() / period as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut next = times.iter().peekable();
    loop {
        let rate = strip.growth.len();
        let gap: f64 = rng.sample(Exp1);
        t += gap / rate as f64;
        while next.next_if(|&&x| x < t).is_some() {
            out.push(advance(&strip));
        }
        if next.peek().is_none() {
            return out;
        }
        let e = strip.growth.as_slice()[rng.random_range(0..rate)];
        let u = e.upper();
        if strip.escapes(u, &mut rng) {
            strip.insert(u);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub alpha: f64,
    pub width: i64,
    pub horizon: f64,
    pub replicas: usize,
    pub speed: f64,
    pub stderr: f64,
}

/// Mean vertical advance per unit time over `[T/2, T]` of continuous-time
/// DDLA from a tilted line in a periodic strip of `width` sites per level.
pub fn speed_estimate(alpha: f64, width: i64, horizon: f64, seeds: &[u64]) -> Result<SpeedEstimate> {
    if !(alpha.abs() < std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!("|alpha| must be below pi/4, got {alpha}")));
    }
    if width < 64 {
        return Err(Error::InvalidParameter(format!("width must be at least 64, got {width}")));
    }
    if 2 * (alpha.tan() * width as f64).round().abs() as i64 >= 2 * width {
        return Err(Error::InvalidParameter("tilt too steep for the strip".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) || seeds.is_empty() {
        return Err(Error::InvalidParameter("need a positive horizon and at least one replica".into()));
    }
    let times = [horizon / 2.0, horizon];
    let speeds: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let a = run_strip(alpha, width, &times, s);
            (a[1] - a[0]) / (horizon / 2.0)
        })
        .collect();
    let (speed, stderr) = mean_stderr(&speeds);
    Ok(SpeedEstimate { alpha, width, horizon, replicas: seeds.len(), speed, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_line_is_a_zigzag() {
        for shift in [-20, 0, 14] {
            let h = initial_heights(64, shift);
            assert!(h.windows(2).all(|w| (w[1] - w[0]).abs() == 1), "{shift}");
            // Periodic continuation: column 64 is column 0 raised by the shift.
            assert_eq!((h[63] - (h[0] + shift)).abs(), 1);
        }
    }

    #[test]
    fn flat_interface_grows() {
        let seeds: Vec<u64> = (0..6).collect();
        let v = speed_estimate(0.0, 64, 6.0, &seeds).unwrap();
        assert!(v.speed > 0.5, "{v:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(speed_estimate(1.0, 64, 5.0, &[1]).is_err());
        assert!(speed_estimate(0.0, 10, 5.0, &[1]).is_err());
    }
}
