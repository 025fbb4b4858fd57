use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, LinearFit};
use crate::dynamics::run_dfpp;
use crate::error::{Error, Result};
use crate::harris::HarrisSystem;
use crate::influence::truncated_line;
use crate::lattice::Site;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub height: i64,
    pub activated: u64,
    pub trials: u64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub t0: f64,
    pub window: i64,
    pub rows: Vec<DecayRow>,
    /// `ln p` against height, over heights with at least one activation.
    pub fit: Option<LinearFit>,
}

/// Sites of the given height whose deviation is within `reach` of zero.
fn central_sites(height: i64, reach: i64) -> Vec<Site> {
    (-reach..=reach).filter_map(|d| Site::from_height_deviation(height, d)).collect()
}

/// Activation frequencies of DFPP from the truncated horizontal line at time
/// `t0`. Each replica contributes every site within a quarter window of the
/// centre at each height; these sites are identically distributed up to
/// boundary effects.
pub fn activation_decay(t0: f64, heights: &[i64], seeds: &[u64], window: i64) -> Result<DecayTable> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("t0 must be positive, got {t0}")));
    }
    if heights.iter().any(|&h| h < 0) {
        return Err(Error::InvalidParameter("heights must be nonnegative".into()));
    }
    let reach = window / 4;
    let probes: Vec<Vec<Site>> = heights.iter().map(|&h| central_sites(h, reach)).collect();
    let line = truncated_line(window);
    let counts: Vec<Vec<u64>> = seeds
        .par_iter()
        .map(|&seed| {
            let c = run_dfpp(&line, t0, &HarrisSystem::new(seed))?.final_cluster();
            Ok(probes.iter().map(|ps| ps.iter().filter(|&&p| c.contains(p)).count() as u64).collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<DecayRow> = heights
        .iter()
        .enumerate()
        .map(|(i, &height)| {
            let activated: u64 = counts.iter().map(|c| c[i]).sum();
            let trials = (probes[i].len() * seeds.len()) as u64;
            DecayRow { height, activated, trials, probability: activated as f64 / trials as f64 }
        })
        .collect();
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.activated > 0).map(|r| (r.height as f64, r.probability.ln())).collect();
    let fit = linear_fit(&points).ok();
    Ok(DecayTable { t0, window, rows, fit })
}
