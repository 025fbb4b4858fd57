//! The three discrete-time steps of DDLA.
//!
//! Line launch drops walks from the line just above the cluster and adds the
//! site visited just before the first landing on the cluster. Edge launch
//! fires upward walks from the upper ends of cluster edges and adds the
//! starting site of the first walk that never meets the cluster. The exact
//! step samples directly from the activity law.
//!
//! Walks cross empty regions in one binomial jump: while a walk is laterally
//! outside the cluster's deviation range, or above its top, no cluster site is
//! within reach for a computable number of steps.

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{Addition, GrowthTrace, TraceMode};
use crate::activity::{activity_distribution, exact_feasible};
use crate::cluster::{Bounds, Cluster};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::harris::Walk;
use crate::lattice::{DirectedEdge, Site, Step};

/// Attempts allowed per step before giving up.
pub const REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Line,
    Edge,
    Exact,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Sampler::Line),
            "edge" => Ok(Sampler::Edge),
            "exact" => Ok(Sampler::Exact),
            other => Err(Error::InvalidParameter(format!("unknown sampler {other:?}"))),
        }
    }
}

/// The site chosen by one step, the edge it attaches through (when the
/// sampler determines one), and how many attempts it took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub site: Site,
    pub edge: Option<DirectedEdge>,
    pub attempts: u64,
}

/// Lateral distance from deviation `d` to the deviation range of `b`.
#[inline]
fn lateral_gap(d: i64, b: &Bounds) -> i64 {
    if d > b.dmax {
        d - b.dmax
    } else if d < b.dmin {
        b.dmin - d
    } else {
        0
    }
}

/// Moves `p` by `m` steps of a directed walk, `sign = 1` upward and `-1`
/// downward, drawing the number of `(1,0)` steps from Binomial(m, 1/2).
#[inline]
fn jump<R: Rng + ?Sized>(p: Site, m: i64, sign: i64, rng: &mut R) -> Site {
    let x = Binomial::new(m as u64, 0.5).expect("valid binomial").sample(rng) as i64;
    Site::new(p.a + sign * x, p.b + sign * (m - x))
}

/// Whether an upward walk from vacant `start` avoids `c` forever.
pub(crate) fn upward_walk_escapes<R: Rng + ?Sized>(c: &Cluster, start: Site, rng: &mut R) -> bool {
    let b = *c.bounds().expect("non-empty cluster");
    let mut steps = Walk::from_rng(&mut *rng);
    let mut p = start;
    loop {
        if p.height() > b.hmax || p.a > b.amax || p.b > b.bmax {
            return true;
        }
        let gap = lateral_gap(p.deviation(), &b);
        if gap >= 3 {
            // Within gap - 1 steps the walk cannot reach the deviation range.
            p = jump(p, gap - 1, 1, steps.rng_mut());
            continue;
        }
        if c.contains(p) {
            return false;
        }
        p = p.step(steps.next_step());
    }
}

fn sample_line<R: Rng + ?Sized>(c: &Cluster, rng: &mut R) -> Result<StepOutcome> {
    let b = *c.bounds().ok_or(Error::EmptyCluster)?;
    let k = b.hmax + 1;
    // Starting sites (a, k - a) with a >= amin and k - a >= bmin.
    let (lo, hi) = (b.amin, k - b.bmin);
    for attempts in 1..=REJECTION_CAP {
        let mut p = Site::new(rng.random_range(lo..=hi), 0);
        p.b = k - p.a;
        let mut steps = Walk::from_rng(&mut *rng);
        loop {
            let m = (p.height() - b.hmax - 1).max(lateral_gap(p.deviation(), &b) - 1);
            if m >= 2 {
                p = jump(p, m, -1, steps.rng_mut());
                if p.a < b.amin || p.b < b.bmin {
                    break;
                }
                continue;
            }
            let step = steps.next_step();
            let q = p.step_down(step);
            if q.a < b.amin || q.b < b.bmin {
                break;
            }
            if c.contains(q) {
                return Ok(StepOutcome { site: p, edge: Some(DirectedEdge::new(q, step)), attempts });
            }
            p = q;
        }
    }
    Err(Error::RejectionOverflow { attempts: REJECTION_CAP })
}

fn sample_edge<R: Rng + ?Sized>(c: &Cluster, rng: &mut R) -> Result<StepOutcome> {
    if c.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let sites = c.sites();
    let edges = 2 * sites.len();
    for attempts in 1..=REJECTION_CAP {
        let i = rng.random_range(0..edges);
        let e = DirectedEdge::new(sites[i / 2], if i % 2 == 0 { Step::A } else { Step::B });
        let u = e.upper();
        if c.contains(u) {
            continue;
        }
        if upward_walk_escapes(c, u, rng) {
            return Ok(StepOutcome { site: u, edge: Some(e), attempts });
        }
    }
    Err(Error::RejectionOverflow { attempts: REJECTION_CAP })
}

fn sample_exact<R: Rng + ?Sized>(c: &Cluster, rng: &mut R) -> Result<StepOutcome> {
    let site = if exact_feasible(c) {
        activity_distribution::<Dyadic>(c)?.sample(rng)
    } else {
        activity_distribution::<f64>(c)?.sample(rng)
    };
    Ok(StepOutcome { site, edge: None, attempts: 1 })
}

/// Draws the next site without modifying the cluster.
pub fn sample_next<R: Rng + ?Sized>(c: &Cluster, sampler: Sampler, rng: &mut R) -> Result<StepOutcome> {
    match sampler {
        Sampler::Line => sample_line(c, rng),
        Sampler::Edge => sample_edge(c, rng),
        Sampler::Exact => sample_exact(c, rng),
    }
}

fn step<R: Rng + ?Sized>(c: &mut Cluster, sampler: Sampler, rng: &mut R) -> Result<StepOutcome> {
    let out = sample_next(c, sampler, rng)?;
    c.insert(out.site);
    Ok(out)
}

/// One step of construction A (walks dropped from the line `L_{h(C)+1}`).
pub fn step_line_launch<R: Rng + ?Sized>(c: &mut Cluster, rng: &mut R) -> Result<StepOutcome> {
    step(c, Sampler::Line, rng)
}

/// One step of construction B (upward walks fired from cluster edges).
pub fn step_edge_launch<R: Rng + ?Sized>(c: &mut Cluster, rng: &mut R) -> Result<StepOutcome> {
    step(c, Sampler::Edge, rng)
}

/// One step drawn from the exact activity law.
pub fn step_exact<R: Rng + ?Sized>(c: &mut Cluster, rng: &mut R) -> Result<StepOutcome> {
    step(c, Sampler::Exact, rng)
}

/// Runs `n` steps, growing `c` in place. Addition `i` carries time `i`.
pub fn run_discrete<R: RngCore>(c: &mut Cluster, n: u64, sampler: Sampler, rng: &mut R) -> Result<GrowthTrace> {
    let mut trace = GrowthTrace::new(TraceMode::Discrete, c);
    trace.additions.reserve(n as usize);
    for i in 1..=n {
        let out = step(c, sampler, rng)?;
        trace.failed_attempts += out.attempts - 1;
        trace.additions.push(Addition { time: i as f64, site: out.site, edge: out.edge });
    }
    Ok(trace)
}
