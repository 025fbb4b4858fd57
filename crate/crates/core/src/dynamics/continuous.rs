//! Continuous-time DDLA and directed first-passage percolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::discrete::upward_walk_escapes;
use super::{Addition, GrowthTrace, RingQueue, TraceMode};
use crate::activity::{escape_probability, exact_feasible};
use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::exact::{Dyadic, Weight};
use crate::harris::{run_upward, HarrisSystem, WalkOutcome};

/// How an event-driven attempt at a growth edge is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceptance {
    /// Fire an upward walk from the upper end and accept if it escapes.
    Walk,
    /// Accept with the escape probability, computed by a level sweep.
    ExactProbability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuousMode {
    Gillespie(Acceptance),
    Harris,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon >= 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("horizon must be finite and nonnegative, got {horizon}")))
    }
}

fn bernoulli_escape<R: Rng + ?Sized>(c: &Cluster, p: crate::lattice::Site, rng: &mut R) -> bool {
    if exact_feasible(c) {
        let q: Dyadic = escape_probability(p, c);
        if q.exponent() == 0 {
            return !q.is_zero();
        }
        rng.random_range(0..q.denominator()) < q.numerator()
    } else {
        rng.random::<f64>() < escape_probability::<f64>(p, c)
    }
}

/// Event-driven DDLA: attempts arrive at total rate `|growth edges|`, each on
/// a uniform growth edge, and are accepted with the escape probability of its
/// upper end.
pub fn run_gillespie<R: Rng + ?Sized>(
    c: &mut Cluster,
    horizon: f64,
    acceptance: Acceptance,
    rng: &mut R,
) -> Result<GrowthTrace> {
    check_horizon(horizon)?;
    let mut trace = GrowthTrace::new(TraceMode::Continuous, c);
    let mut t = 0.0;
    loop {
        let rate = c.growth_edges().len();
        if rate == 0 {
            break;
        }
        let gap: f64 = rng.sample(Exp1);
        t += gap / rate as f64;
        if t > horizon {
            break;
        }
        let e = c.growth_edges()[rng.random_range(0..rate)];
        let u = e.upper();
        let accepted = match acceptance {
            Acceptance::Walk => upward_walk_escapes(c, u, rng),
            Acceptance::ExactProbability => bernoulli_escape(c, u, rng),
        };
        if accepted {
            c.insert(u);
            trace.additions.push(Addition { time: t, site: u, edge: Some(e) });
        } else {
            trace.failed_attempts += 1;
        }
    }
    Ok(trace)
}

/// Shared clock replay. `accept` decides, for a ring on a growth edge, whether
/// the upper end is added.
fn replay<F>(c: &mut Cluster, horizon: f64, harris: &HarrisSystem, mut accept: F) -> Result<GrowthTrace>
where
    F: FnMut(&Cluster, crate::lattice::DirectedEdge, u64) -> bool,
{
    check_horizon(horizon)?;
    let mut trace = GrowthTrace::new(TraceMode::Continuous, c);
    let mut queue = RingQueue::new(harris);
    for &e in c.growth_edges() {
        queue.watch(e, 0.0);
    }
    while let Some(ring) = queue.pop(horizon) {
        let e = ring.edge;
        if !c.is_growth_edge(&e) {
            queue.forget(e);
            continue;
        }
        if accept(c, e, ring.index) {
            let u = e.upper();
            c.insert(u);
            trace.additions.push(Addition { time: ring.time, site: u, edge: Some(e) });
            queue.forget(e);
            for out in u.out_edges() {
                if c.is_growth_edge(&out) {
                    queue.watch(out, ring.time);
                }
            }
        } else {
            trace.failed_attempts += 1;
            queue.rearm(e);
        }
    }
    Ok(trace)
}

/// DDLA driven by a Harris system: every ring of a growth edge fires the
/// walk attached to that ring, and the upper end is added if the walk escapes.
pub fn run_harris(c: &mut Cluster, horizon: f64, harris: &HarrisSystem) -> Result<GrowthTrace> {
    replay(c, horizon, harris, |c, e, k| {
        let b = *c.bounds().expect("non-empty cluster");
        let mut walk = harris.walk(e, k);
        run_upward(e.upper(), &mut walk, b.hmax, b.amax, b.bmax, |p| c.contains(p)) == WalkOutcome::Escaped
    })
}

/// Directed first-passage percolation: every ring of a growth edge activates
/// its upper end.
pub fn run_dfpp(c0: &Cluster, horizon: f64, harris: &HarrisSystem) -> Result<GrowthTrace> {
    let mut c = c0.clone();
    replay(&mut c, horizon, harris, |_, _, _| true)
}

/// The local, monotone comparison dynamics. Same rule as [`run_dfpp`].
pub fn run_local_baseline(c0: &Cluster, horizon: f64, harris: &HarrisSystem) -> Result<GrowthTrace> {
    run_dfpp(c0, horizon, harris)
}

/// Continuous-time DDLA from `c0` up to `horizon`. The seed keys the Harris
/// system in harris mode and seeds the event generator otherwise.
pub fn run_continuous(c0: &Cluster, horizon: f64, mode: ContinuousMode, seed: u64) -> Result<GrowthTrace> {
    let mut c = c0.clone();
    match mode {
        ContinuousMode::Harris => run_harris(&mut c, horizon, &HarrisSystem::new(seed)),
        ContinuousMode::Gillespie(acceptance) => {
            run_gillespie(&mut c, horizon, acceptance, &mut ChaCha8Rng::seed_from_u64(seed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    const MODES: [ContinuousMode; 3] = [
        ContinuousMode::Harris,
        ContinuousMode::Gillespie(Acceptance::Walk),
        ContinuousMode::Gillespie(Acceptance::ExactProbability),
    ];

    #[test]
    fn zero_horizon_changes_nothing() {
        for mode in MODES {
            let t = run_continuous(&Cluster::origin(), 0.0, mode, 1).unwrap();
            assert!(t.is_empty());
            assert_eq!(t.final_cluster(), Cluster::origin());
        }
        assert!(run_dfpp(&Cluster::origin(), 0.0, &HarrisSystem::new(1)).unwrap().is_empty());
        assert!(run_continuous(&Cluster::origin(), -1.0, ContinuousMode::Harris, 1).is_err());
    }

    #[test]
    fn traces_are_connected_and_reproducible() {
        for mode in MODES {
            let t = run_continuous(&Cluster::origin(), 8.0, mode, 42).unwrap();
            t.check_invariants().unwrap();
            assert!(t.len() > 5);
            assert!(t.additions.iter().all(|a| a.time <= 8.0));
            assert_eq!(t, run_continuous(&Cluster::origin(), 8.0, mode, 42).unwrap());
        }
    }

    #[test]
    fn first_jump_has_rate_two() {
        for mode in MODES {
            let mean: f64 = (0..4000)
                .map(|s| run_continuous(&Cluster::origin(), 8.0, mode, s).unwrap().additions[0].time)
                .sum::<f64>()
                / 4000.0;
            assert!((mean - 0.5).abs() < 0.03, "{mode:?}: mean first jump {mean}");
        }
    }

    #[test]
    fn dfpp_dominates_harris_ddla() {
        for seed in 0..20 {
            let h = HarrisSystem::new(seed);
            let ddla = run_continuous(&Cluster::origin(), 6.0, ContinuousMode::Harris, seed).unwrap();
            let dfpp = run_dfpp(&Cluster::origin(), 6.0, &h).unwrap();
            dfpp.check_invariants().unwrap();
            let activated: rustc_hash::FxHashMap<Site, f64> =
                dfpp.additions.iter().map(|a| (a.site, a.time)).collect();
            for a in &ddla.additions {
                assert!(activated[&a.site] <= a.time, "seed {seed}: {}", a.site);
            }
            assert_eq!(dfpp, run_local_baseline(&Cluster::origin(), 6.0, &h).unwrap());
        }
    }
}
