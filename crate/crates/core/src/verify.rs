//! The exact-identity suite: checks that must hold without tolerance.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::activity::{activity_distribution, line_activity_oracle, line_hit_sum, line_launch_law};
use crate::cluster::Cluster;
use crate::dynamics::{run_continuous, run_dfpp, run_discrete, ContinuousMode, Sampler};
use crate::error::{Error, Result};
use crate::exact::Dyadic;
use crate::harris::HarrisSystem;
use crate::influence::{coupling_report, DEFAULT_WINDOW, MAX_WINDOW};
use crate::lattice::Site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Eq1,
    Linesum,
    Linechoice,
    Domination,
    Coupling,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Eq1, Check::Linesum, Check::Linechoice, Check::Domination, Check::Coupling];

    pub fn name(self) -> &'static str {
        match self {
            Check::Eq1 => "eq1",
            Check::Linesum => "linesum",
            Check::Linechoice => "linechoice",
            Check::Domination => "domination",
            Check::Coupling => "coupling",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

/// The cluster-activity function under test, replaceable for fault injection.
pub type ActivityFn = fn(&Cluster) -> Result<Dyadic>;

pub fn activity_total(c: &Cluster) -> Result<Dyadic> {
    Ok(activity_distribution::<Dyadic>(c)?.total)
}

/// Origin animals of sizes 1 to `max_size`, one per seed.
pub fn animal_corpus(seeds: &[u64], max_size: u64) -> Result<Vec<Cluster>> {
    seeds
        .iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = rng.random_range(0..max_size);
            let mut c = Cluster::origin();
            run_discrete(&mut c, n, Sampler::Line, &mut rng)?;
            Ok(c)
        })
        .collect()
}

fn report(check: Check, cases: usize, failure: Option<String>) -> CheckReport {
    CheckReport { check, passed: failure.is_none(), cases, detail: failure.unwrap_or_else(|| "ok".into()) }
}

/// Line formula against the site-by-site activity total.
pub fn check_eq1(corpus: &[Cluster], activity: ActivityFn) -> Result<CheckReport> {
    for (i, c) in corpus.iter().enumerate() {
        let line = line_activity_oracle::<Dyadic>(c)?;
        let total = activity(c)?;
        if line != total {
            return Ok(report(Check::Eq1, corpus.len(), Some(format!("animal {i}: line formula {line}, activity {total}"))));
        }
    }
    Ok(report(Check::Eq1, corpus.len(), None))
}

/// Downward hit sums agree on the lines `h`, `h + 1` and `h + 5`.
pub fn check_linesum(corpus: &[Cluster]) -> Result<CheckReport> {
    for (i, c) in corpus.iter().enumerate() {
        let h = c.height();
        let base = line_hit_sum::<Dyadic>(c, h)?;
        for k in [h + 1, h + 5] {
            let s = line_hit_sum::<Dyadic>(c, k)?;
            if s != base {
                return Ok(report(Check::Linesum, corpus.len(), Some(format!("animal {i}: line {k} sums to {s}, line {h} to {base}"))));
            }
        }
    }
    Ok(report(Check::Linesum, corpus.len(), None))
}

/// Next-site laws from lines `h + 1` and `h + 5` agree with each other and
/// with the activity law.
pub fn check_linechoice(corpus: &[Cluster]) -> Result<CheckReport> {
    for (i, c) in corpus.iter().enumerate() {
        let h = c.height();
        let near = line_launch_law(c, h + 1)?;
        let far = line_launch_law(c, h + 5)?;
        let mut exact = activity_distribution::<Dyadic>(c)?.law_exact();
        exact.retain(|(_, p)| !p.is_zero());
        if near != far || near != exact {
            return Ok(report(Check::Linechoice, corpus.len(), Some(format!("animal {i}: laws differ"))));
        }
    }
    Ok(report(Check::Linechoice, corpus.len(), None))
}

/// Under one Harris system every DDLA addition happens no earlier than the
/// DFPP activation of the same site.
pub fn check_domination(seeds: &[u64], horizon: f64) -> Result<CheckReport> {
    for &seed in seeds {
        let ddla = run_continuous(&Cluster::origin(), horizon, ContinuousMode::Harris, seed)?;
        let dfpp = run_dfpp(&Cluster::origin(), horizon, &HarrisSystem::new(seed))?;
        let activated: FxHashMap<Site, f64> = dfpp.additions.iter().map(|a| (a.site, a.time)).collect();
        for a in &ddla.additions {
            match activated.get(&a.site) {
                Some(&t) if t <= a.time => {}
                _ => {
                    return Ok(report(
                        Check::Domination,
                        seeds.len(),
                        Some(format!("seed {seed}: {} added at {} but not yet activated", a.site, a.time)),
                    ))
                }
            }
        }
    }
    Ok(report(Check::Domination, seeds.len(), None))
}

/// A random perturbation: `F` of one to three sites near the origin at
/// heights 0 to 2, and a random subset `G` of `F`.
pub fn random_instance(seed: u64) -> (Vec<Site>, Vec<Site>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let size = rng.random_range(1..=3);
    let mut f: Vec<Site> = Vec::new();
    while f.len() < size {
        let h = rng.random_range(0..=2i64);
        let d = 2 * rng.random_range(-3..=3i64) + h.rem_euclid(2);
        let p = Site::from_height_deviation(h, d).expect("matching parity");
        if !f.contains(&p) {
            f.push(p);
        }
    }
    let g = f.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    (f, g)
}

/// The coupled dynamics agree off the red set for one random instance per
/// seed. A breach enlarges the strip and reruns.
pub fn check_coupling(seeds: &[u64], horizon: f64) -> Result<CheckReport> {
    for &seed in seeds {
        let (f, g) = random_instance(seed);
        let mut window = DEFAULT_WINDOW;
        let r = loop {
            match coupling_report(&f, &g, horizon, &HarrisSystem::new(seed), window) {
                Err(Error::WindowBreach { .. }) if window < MAX_WINDOW => window *= 2,
                other => break other?,
            }
        };
        if let Some((t, p)) = r.violation {
            return Ok(report(
                Check::Coupling,
                seeds.len(),
                Some(format!("seed {seed}: F={f:?} G={g:?} differ at {p} outside red at time {t}")),
            ));
        }
    }
    Ok(report(Check::Coupling, seeds.len(), None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seeds: Vec<u64>,
    /// Largest animal size in the exact-identity corpus.
    pub max_size: u64,
    pub domination_horizon: f64,
    pub coupling_horizon: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seeds: (0..200).collect(), max_size: 40, domination_horizon: 10.0, coupling_horizon: 6.0 }
    }
}

/// Runs the requested checks. Dynamic checks use at most the first 50 seeds
/// for coupling and 20 for domination unless fewer are given.
pub fn run_checks(checks: &[Check], config: &VerifyConfig, activity: ActivityFn) -> Result<Vec<CheckReport>> {
    let needs_corpus = checks.iter().any(|c| matches!(c, Check::Eq1 | Check::Linesum | Check::Linechoice));
    let corpus = if needs_corpus { animal_corpus(&config.seeds, config.max_size)? } else { Vec::new() };
    checks
        .iter()
        .map(|&c| match c {
            Check::Eq1 => check_eq1(&corpus, activity),
            Check::Linesum => check_linesum(&corpus),
            Check::Linechoice => check_linechoice(&corpus),
            Check::Domination => check_domination(&config.seeds[..config.seeds.len().min(20)], config.domination_horizon),
            Check::Coupling => check_coupling(&config.seeds[..config.seeds.len().min(50)], config.coupling_horizon),
        })
        .collect()
}
