use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::wilson_interval;
use crate::cluster::Cluster;
use crate::dynamics::{sample_next, Sampler};
use crate::error::Result;
use crate::lattice::Site;

/// Normal quantile of the reported two-sided 95% intervals.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeverAddedPoint {
    pub n: u64,
    /// Conditioned runs in which `(1,0)` is still absent after `n` steps.
    pub absent: u64,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeverAdded {
    pub replicas: u64,
    /// Runs whose first addition is `(0,1)`.
    pub conditioned: u64,
    pub points: Vec<NeverAddedPoint>,
}

/// Step at which `(1,0)` joins a run from the origin whose first addition is
/// `(0,1)`, within `n_max` steps. `None` for runs failing the condition.
fn addition_step(seed: u64, n_max: u64, sampler: Sampler) -> Result<Option<Option<u64>>> {
    let target = Site::new(1, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Cluster::origin();
    let first = sample_next(&c, sampler, &mut rng)?.site;
    if first != Site::new(0, 1) {
        return Ok(None);
    }
    c.insert(first);
    for n in 2..=n_max {
        let p = sample_next(&c, sampler, &mut rng)?.site;
        if p == target {
            return Ok(Some(Some(n)));
        }
        c.insert(p);
    }
    Ok(Some(None))
}

/// Among runs from the origin whose first addition is `(0,1)`, the fraction in
/// which `(1,0)` is absent after `n` steps, for every `n` in `checkpoints`
/// (each at most `n_max`, which is always included).
pub fn never_added_estimator(n_max: u64, seeds: &[u64], sampler: Sampler, checkpoints: &[u64]) -> Result<NeverAdded> {
    let steps: Vec<Option<Option<u64>>> =
        seeds.par_iter().map(|&s| addition_step(s, n_max.max(1), sampler)).collect::<Result<_>>()?;
    let conditioned: Vec<Option<u64>> = steps.into_iter().flatten().collect();
    let mut ns: Vec<u64> = checkpoints.iter().copied().filter(|&n| n <= n_max).chain([n_max]).collect();
    ns.sort_unstable();
    ns.dedup();
    let trials = conditioned.len() as u64;
    let points = ns
        .into_iter()
        .map(|n| {
            let absent = conditioned.iter().filter(|s| s.is_none_or(|k| k > n)).count() as u64;
            let (wilson_lo, wilson_hi) = wilson_interval(absent, trials, WILSON_Z);
            let estimate = if trials == 0 { f64::NAN } else { absent as f64 / trials as f64 };
            NeverAddedPoint { n, absent, estimate, wilson_lo, wilson_hi }
        })
        .collect();
    Ok(NeverAdded { replicas: seeds.len() as u64, conditioned: trials, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates_decrease_from_one() {
        let seeds: Vec<u64> = (0..400).collect();
        let r = never_added_estimator(200, &seeds, Sampler::Line, &[0, 1, 2, 50, 100]).unwrap();
        assert!(r.conditioned > 150 && r.conditioned < 250, "{}", r.conditioned);
        assert_eq!(r.points[0].n, 0);
        assert_eq!(r.points[0].estimate, 1.0);
        assert_eq!(r.points[1].estimate, 1.0);
        assert!(r.points.windows(2).all(|w| w[0].estimate >= w[1].estimate));
        // From {(0,0),(0,1)} the growth sites (1,0), (1,1), (0,2) all have
        // activity 1, so (1,0) joins at step two with probability 1/3.
        let p2 = r.points[2].estimate;
        assert!((p2 - 2.0 / 3.0).abs() < 0.1, "{p2}");
    }
}
