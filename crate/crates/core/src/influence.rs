//! The red/black influence coupling.
//!
//! Start from the horizontal line `D` (truncated to a strip) and a finite set
//! `F` of red sites. Colored sites are the union of every cluster that DDLA
//! driven by the same Harris system could reach from `D Δ G` for any `G ⊆ F`;
//! black sites are those common to all of them. Red sites bound the area in
//! which those dynamics may disagree.
//!
//! A ring on an edge `e` with `l(e)` colored and `u(e)` uncolored fires the
//! walk attached to the ring. The walk is followed until it lands on a black
//! site or rises above every colored site:
//!
//! * landing on black: nothing happens;
//! * otherwise, if `l(e)` is red, `u(e)` becomes red;
//! * otherwise, if the walk visited a red site (its start included), `u(e)` becomes red;
//! * otherwise `u(e)` becomes black.

use std::collections::BTreeSet;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::cluster::Cluster;
use crate::dynamics::{run_harris, RingQueue};
use crate::error::{Error, Result};
use crate::harris::HarrisSystem;
use crate::lattice::Site;

/// Initial strip half-width used by adaptive runs.
pub const DEFAULT_WINDOW: i64 = 64;
/// Adaptive runs give up beyond this strip half-width.
pub const MAX_WINDOW: i64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Red,
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Color::Black => "black",
            Color::Red => "red",
        })
    }
}

/// Disjoint black and red site sets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ColoredState {
    pub black: BTreeSet<Site>,
    pub red: BTreeSet<Site>,
    pub window: i64,
}

impl ColoredState {
    pub fn color(&self, p: Site) -> Option<Color> {
        if self.red.contains(&p) {
            Some(Color::Red)
        } else if self.black.contains(&p) {
            Some(Color::Black)
        } else {
            None
        }
    }

    /// `(max height, max |deviation|)` over red sites.
    pub fn red_extent(&self) -> Option<(i64, i64)> {
        red_extent(self.red.iter().copied())
    }
}

fn red_extent(red: impl Iterator<Item = Site>) -> Option<(i64, i64)> {
    red.fold(None, |acc, p| {
        let (h, d) = (p.height(), p.deviation().abs());
        Some(match acc {
            None => (h, d),
            Some((h0, d0)) => (h0.max(h), d0.max(d)),
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredEvent {
    pub time: f64,
    pub site: Site,
    pub color: Color,
    /// Red height and red width after the event, if any site is red.
    pub red_extent: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredTrace {
    pub window: i64,
    pub initial: ColoredState,
    pub events: Vec<ColoredEvent>,
    pub failed_attempts: u64,
}

impl ColoredTrace {
    /// The colored state after every event with `time <= t`.
    pub fn state_at(&self, t: f64) -> ColoredState {
        let mut s = self.initial.clone();
        for e in self.events.iter().take_while(|e| e.time <= t) {
            match e.color {
                Color::Black => s.black.insert(e.site),
                Color::Red => s.red.insert(e.site),
            };
        }
        s
    }

    pub fn final_state(&self) -> ColoredState {
        self.state_at(f64::INFINITY)
    }

    /// Red height and width as of time `t`.
    pub fn red_extent_at(&self, t: f64) -> Option<(i64, i64)> {
        let i = self.events.partition_point(|e| e.time <= t);
        if i == 0 {
            self.initial.red_extent()
        } else {
            self.events[i - 1].red_extent
        }
    }

    /// Red additions as `(time bits, site)`, for bit-exact comparison.
    pub fn red_additions(&self) -> Vec<(u64, Site)> {
        self.events.iter().filter(|e| e.color == Color::Red).map(|e| (e.time.to_bits(), e.site)).collect()
    }
}

/// The line `D` truncated to `|deviation| <= window`.
pub fn truncated_line(window: i64) -> Cluster {
    Cluster::flat_line(window)
}

fn breaches(p: Site, window: i64) -> bool {
    p.deviation().abs() >= window - 2
}

/// Colored dynamics from `D ∪ F` (with `F` red) up to time `horizon`.
pub fn run_colored(f: &[Site], horizon: f64, harris: &HarrisSystem, window: i64) -> Result<ColoredTrace> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    if window < 4 {
        return Err(Error::InvalidParameter(format!("window must be at least 4, got {window}")));
    }
    if let Some(&p) = f.iter().find(|&&p| breaches(p, window)) {
        return Err(Error::WindowBreach { site: p, window });
    }
    let mut colored = truncated_line(window);
    let mut red: FxHashSet<Site> = FxHashSet::default();
    for &p in f {
        colored.insert(p);
        red.insert(p);
    }
    let initial = ColoredState {
        black: colored.sites().iter().copied().filter(|p| !red.contains(p)).collect(),
        red: red.iter().copied().collect(),
        window,
    };
    let mut extent = red_extent(red.iter().copied());
    let mut trace = ColoredTrace { window, initial, events: Vec::new(), failed_attempts: 0 };

    let mut queue = RingQueue::new(harris);
    for &e in colored.growth_edges() {
        queue.watch(e, 0.0);
    }
    while let Some(ring) = queue.pop(horizon) {
        let e = ring.edge;
        if !colored.is_growth_edge(&e) {
            queue.forget(e);
            continue;
        }
        let u = e.upper();
        let bounds = *colored.bounds().expect("non-empty");
        let mut walk = harris.walk(e, ring.index);
        let mut p = u;
        let mut visited_red = false;
        let mut hit_black = false;
        while p.height() <= bounds.hmax && p.a <= bounds.amax && p.b <= bounds.bmax {
            if colored.contains(p) {
                if red.contains(&p) {
                    visited_red = true;
                } else {
                    hit_black = true;
                    break;
                }
            }
            p = p.step(walk.next_step());
        }
        if hit_black {
            trace.failed_attempts += 1;
            queue.rearm(e);
            continue;
        }
        let color = if red.contains(&e.lower) || visited_red { Color::Red } else { Color::Black };
        colored.insert(u);
        if color == Color::Red {
            if breaches(u, window) {
                return Err(Error::WindowBreach { site: u, window });
            }
            red.insert(u);
            let (h, d) = (u.height(), u.deviation().abs());
            extent = Some(extent.map_or((h, d), |(h0, d0)| (h0.max(h), d0.max(d))));
        }
        trace.events.push(ColoredEvent { time: ring.time, site: u, color, red_extent: extent });
        queue.forget(e);
        for out in u.out_edges() {
            if colored.is_growth_edge(&out) {
                queue.watch(out, ring.time);
            }
        }
    }
    Ok(trace)
}

/// Result of running two coupled dynamics alongside the colored one.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    /// Distinct event times compared.
    pub checked_times: usize,
    /// The first time and site where the two dynamics differ outside the red set.
    pub violation: Option<(f64, Site)>,
}

impl CouplingReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Runs DDLA from `D` and from `D Δ G` with the same Harris system, plus the
/// colored dynamics with red set `F`, and compares the two clusters off the
/// red set at every event time of the three traces.
pub fn coupling_report(f: &[Site], g: &[Site], horizon: f64, harris: &HarrisSystem, window: i64) -> Result<CouplingReport> {
    let fs: FxHashSet<Site> = f.iter().copied().collect();
    if let Some(p) = g.iter().find(|p| !fs.contains(p)) {
        return Err(Error::InvalidParameter(format!("{p} is in G but not in F")));
    }
    let colored = run_colored(f, horizon, harris, window)?;

    let line = truncated_line(window);
    let mut perturbed: FxHashSet<Site> = line.sites().iter().copied().collect();
    for p in g {
        if !perturbed.remove(p) {
            perturbed.insert(*p);
        }
    }
    let mut perturbed: Vec<Site> = perturbed.into_iter().collect();
    perturbed.sort_unstable();
    let x = run_harris(&mut line.clone(), horizon, harris)?;
    let y = run_harris(&mut Cluster::from_sites(perturbed), horizon, harris)?;

    let mut red: FxHashSet<Site> = colored.initial.red.iter().copied().collect();
    // Sites occupied in exactly one of the two dynamics.
    let mut diff: FxHashSet<Site> = g.iter().copied().collect();
    let mut fresh: Vec<Site> = diff.iter().copied().collect();
    let (mut i, mut j, mut k) = (0, 0, 0);
    let mut checked_times = 0;
    let toggle = |diff: &mut FxHashSet<Site>, fresh: &mut Vec<Site>, p: Site| {
        if !diff.remove(&p) {
            diff.insert(p);
            fresh.push(p);
        }
    };
    loop {
        let next = [x.additions.get(i).map(|a| a.time), y.additions.get(j).map(|a| a.time), colored.events.get(k).map(|e| e.time)]
            .into_iter()
            .flatten()
            .min_by(f64::total_cmp);
        let t = match next {
            Some(t) => t,
            None if checked_times == 0 => 0.0,
            None => break,
        };
        while let Some(a) = x.additions.get(i).filter(|a| a.time == t) {
            toggle(&mut diff, &mut fresh, a.site);
            i += 1;
        }
        while let Some(a) = y.additions.get(j).filter(|a| a.time == t) {
            toggle(&mut diff, &mut fresh, a.site);
            j += 1;
        }
        while let Some(e) = colored.events.get(k).filter(|e| e.time == t) {
            if e.color == Color::Red {
                red.insert(e.site);
            }
            k += 1;
        }
        checked_times += 1;
        // Red only grows, so sites already checked stay covered.
        for p in fresh.drain(..) {
            if diff.contains(&p) && !red.contains(&p) {
                return Ok(CouplingReport { checked_times, violation: Some((t, p)) });
            }
        }
        if next.is_none() {
            break;
        }
    }
    Ok(CouplingReport { checked_times, violation: None })
}

/// Whether the two coupled dynamics agree off the red set at all times.
pub fn verify_coupling(f: &[Site], g: &[Site], horizon: f64, harris: &HarrisSystem, window: i64) -> Result<bool> {
    coupling_report(f, g, horizon, harris, window).map(|r| r.holds())
}

/// A colored run whose red trace was certified stable under doubling the strip.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedRun {
    pub trace: ColoredTrace,
    /// Window sizes rejected for a breach or an unstable red trace.
    pub rejected_windows: Vec<i64>,
}

/// Runs the colored dynamics on a strip of half-width `window`, doubling it on
/// a breach, until the red trace is identical on the strip and on a strip
/// twice as wide.
pub fn run_colored_certified(f: &[Site], horizon: f64, harris: &HarrisSystem, window: i64) -> Result<CertifiedRun> {
    let mut window = window;
    let mut rejected = Vec::new();
    let mut current: Option<ColoredTrace> = None;
    while window <= MAX_WINDOW {
        let trace = match current.take() {
            Some(t) => t,
            None => match run_colored(f, horizon, harris, window) {
                Ok(t) => t,
                Err(Error::WindowBreach { .. }) => {
                    rejected.push(window);
                    window *= 2;
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        match run_colored(f, horizon, harris, 2 * window) {
            Ok(wide) if wide.red_additions() == trace.red_additions() => {
                return Ok(CertifiedRun { trace, rejected_windows: rejected });
            }
            Ok(wide) => {
                rejected.push(window);
                current = Some(wide);
            }
            Err(Error::WindowBreach { .. }) => rejected.push(window),
            Err(e) => return Err(e),
        }
        window *= 2;
    }
    Err(Error::InvalidParameter(format!("no stable window up to {MAX_WINDOW}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedScalingRow {
    pub time: f64,
    pub mean_red_height: f64,
    pub mean_red_dev: f64,
    pub replicas: usize,
    /// Largest certified window among the replicas.
    pub window: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedScaling {
    pub rows: Vec<RedScalingRow>,
    /// Least-squares slope of mean `h_T / T` against `ln T`.
    pub slope_vs_log_t: f64,
    /// Per-replica red heights on the time grid, in seed order.
    pub heights: Vec<Vec<i64>>,
}

/// Red extent of `F = {(0,0)}` on a time grid, averaged over Harris systems
/// seeded by `seeds`, each run on a certified window.
pub fn red_scaling_experiment(times: &[f64], seeds: &[u64]) -> Result<RedScaling> {
    if times.is_empty() || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("time grid must be non-empty and increasing".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    let horizon = *times.last().unwrap();
    let runs: Vec<(Vec<(i64, i64)>, i64)> = seeds
        .par_iter()
        .map(|&seed| {
            let run = run_colored_certified(&[Site::ORIGIN], horizon, &HarrisSystem::new(seed), DEFAULT_WINDOW)?;
            let extents = times.iter().map(|&t| run.trace.red_extent_at(t).unwrap_or((0, 0))).collect();
            Ok((extents, run.trace.window))
        })
        .collect::<Result<_>>()?;
    let n = seeds.len() as f64;
    let rows: Vec<RedScalingRow> = times
        .iter()
        .enumerate()
        .map(|(i, &time)| RedScalingRow {
            time,
            mean_red_height: runs.iter().map(|r| r.0[i].0 as f64).sum::<f64>() / n,
            mean_red_dev: runs.iter().map(|r| r.0[i].1 as f64).sum::<f64>() / n,
            replicas: seeds.len(),
            window: runs.iter().map(|r| r.1).max().unwrap(),
        })
        .collect();
    let fit_points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.time > 0.0).map(|r| (r.time.ln(), r.mean_red_height / r.time)).collect();
    let slope_vs_log_t =
        if fit_points.len() >= 2 { crate::analysis::linear_fit(&fit_points).map(|f| f.slope).unwrap_or(f64::NAN) } else { f64::NAN };
    Ok(RedScaling { rows, slope_vs_log_t, heights: runs.iter().map(|r| r.0.iter().map(|e| e.0).collect()).collect() })
}
