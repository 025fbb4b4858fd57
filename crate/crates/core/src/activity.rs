//! Escape probabilities, site and cluster activities, and the line-sum oracle.
//!
//! All quantities are computed by exact level sweeps over path mass. An
//! upward walk from `P` halves its mass onto `P + (1,0)` and `P + (0,1)` at
//! each step; a downward walk does the same toward `P - (1,0)` and
//! `P - (0,1)`. Coordinates are monotone along directed walks, so a sweep
//! only ever needs the lateral range that can still meet the cluster.

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rustc_hash::FxHashMap;

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::exact::{Dyadic, Weight, EXACT_SPAN_LIMIT};
use crate::lattice::Site;

/// Probability that an upward walk started at `p` (the start included) never
/// lands in `c`. Zero when `p` is occupied.
pub fn escape_probability<W: Weight>(p: Site, c: &Cluster) -> W {
    if c.contains(p) {
        return W::zero();
    }
    let Some(bounds) = c.bounds() else {
        return W::one();
    };
    if p.height() > bounds.hmax || p.a > bounds.amax || p.b > bounds.bmax {
        return W::one();
    }
    // mass[i] sits on (p.a + i, p.b + level - i).
    let mut mass = vec![W::one()];
    let mut next: Vec<W> = Vec::new();
    let mut escaped = W::zero();
    let levels = bounds.hmax - p.height();
    for level in 0..=levels {
        let row_b = p.b + level;
        next.clear();
        next.resize(mass.len() + 1, W::zero());
        for (i, m) in mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let site = Site::new(p.a + i as i64, row_b - i as i64);
            if c.contains(site) {
                continue;
            }
            let half = m.half();
            // Step (1,0) lands on index i + 1, step (0,1) on index i.
            if site.a + 1 > bounds.amax {
                escaped.add_assign(&half);
            } else {
                next[i + 1].add_assign(&half);
            }
            if site.b + 1 > bounds.bmax {
                escaped.add_assign(&half);
            } else {
                next[i].add_assign(&half);
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    // Every remaining path now sits above the cluster.
    for m in &mass {
        escaped.add_assign(m);
    }
    escaped
}

/// `escape_probability(p, c) * |{e : l(e) in c, u(e) = p}|`.
pub fn site_activity<W: Weight>(p: Site, c: &Cluster) -> W {
    let multiplicity = c.in_multiplicity(p);
    if multiplicity == 0 {
        return W::zero();
    }
    escape_probability::<W>(p, c).times(multiplicity)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteActivity<W> {
    pub site: Site,
    pub multiplicity: u32,
    pub escape: W,
    pub activity: W,
}

/// Per-site activities over the growth sites of a cluster, sorted by site.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityDistribution<W> {
    pub entries: Vec<SiteActivity<W>>,
    pub total: W,
}

impl<W: Weight> ActivityDistribution<W> {
    /// Normalized next-site law in floating point.
    pub fn law_f64(&self) -> Vec<(Site, f64)> {
        let total = self.total.to_f64();
        self.entries.iter().map(|e| (e.site, e.activity.to_f64() / total)).collect()
    }

    /// Draws the next site with probability proportional to its activity.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        let weights: Vec<W> = self.entries.iter().map(|e| e.activity.clone()).collect();
        self.entries[W::sample_index(&weights, &self.total, rng)].site
    }

    pub fn activity_of(&self, p: Site) -> W {
        self.entries
            .binary_search_by(|e| e.site.cmp(&p))
            .map(|i| self.entries[i].activity.clone())
            .unwrap_or_else(|_| W::zero())
    }
}

impl ActivityDistribution<Dyadic> {
    /// Normalized next-site law as exact rationals. Sums to one exactly.
    pub fn law_exact(&self) -> Vec<(Site, BigRational)> {
        let total = self.total.to_big_rational();
        self.entries
            .iter()
            .map(|e| (e.site, e.activity.to_big_rational() / &total))
            .collect()
    }
}

pub fn activity_distribution<W: Weight>(c: &Cluster) -> Result<ActivityDistribution<W>> {
    if c.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let mut sites = c.growth_sites();
    sites.sort_unstable();
    let mut total = W::zero();
    let entries: Vec<SiteActivity<W>> = sites
        .into_iter()
        .map(|site| {
            let multiplicity = c.in_multiplicity(site);
            let escape = escape_probability::<W>(site, c);
            let activity = escape.times(multiplicity);
            total.add_assign(&activity);
            SiteActivity { site, multiplicity, escape, activity }
        })
        .collect();
    if total.is_zero() {
        return Err(Error::FrozenCluster);
    }
    Ok(ActivityDistribution { entries, total })
}

/// Whether the sweeps over `c` fit the exact dyadic representation.
pub fn exact_feasible(c: &Cluster) -> bool {
    match c.bounds() {
        Some(b) => b.hmax - (b.amin + b.bmin) <= EXACT_SPAN_LIMIT,
        None => true,
    }
}

/// Downward hit probabilities for every site of height `k` that can reach
/// the cluster: `hit(Q) = 1` on the cluster, otherwise the average over the
/// two lower neighbours. Sites that cannot reach any cluster site are omitted.
pub fn downward_hit_row<W: Weight>(c: &Cluster, k: i64) -> Vec<(Site, W)> {
    let Some(b) = c.bounds().copied() else {
        return Vec::new();
    };
    let base = b.amin + b.bmin;
    if k < base {
        return Vec::new();
    }
    // row[i] is the hit probability of (b.amin + i, level - b.amin - i).
    let mut row: Vec<W> = Vec::new();
    for level in base..=k {
        let width = (level - base + 1) as usize;
        let mut next = Vec::with_capacity(width);
        for i in 0..width {
            let site = Site::new(b.amin + i as i64, level - b.amin - i as i64);
            if c.contains(site) {
                next.push(W::one());
                continue;
            }
            // Below along (1,0) is index i - 1 of the previous row, below along (0,1) is index i.
            let left = if i >= 1 { row.get(i - 1).cloned() } else { None };
            let down = row.get(i).cloned();
            let sum = match (left, down) {
                (Some(x), Some(y)) => x.add(&y),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => W::zero(),
            };
            next.push(sum.half());
        }
        row = next;
    }
    row.into_iter()
        .enumerate()
        .map(|(i, w)| (Site::new(b.amin + i as i64, k - b.amin - i as i64), w))
        .collect()
}

/// Sum over the sites of height `k` of the probability that a downward walk
/// started there ever lands in `c`.
pub fn line_hit_sum<W: Weight>(c: &Cluster, k: i64) -> Result<W> {
    let height = c.bounds().ok_or(Error::EmptyCluster)?.hmax;
    if k < height {
        return Err(Error::LineNotAbove { k, height });
    }
    let mut total = W::zero();
    for (_, w) in downward_hit_row::<W>(c, k) {
        total.add_assign(&w);
    }
    Ok(total)
}

/// Cluster activity through the line formula: twice the line hit sum at the
/// cluster's own height.
pub fn line_activity_oracle<W: Weight>(c: &Cluster) -> Result<W> {
    let height = c.bounds().ok_or(Error::EmptyCluster)?.hmax;
    Ok(line_hit_sum::<W>(c, height)?.times(2))
}

/// Unnormalized next-site weights of the line-launch construction with the
/// launch line at height `k > h(C)`: each reachable site of that line sends
/// unit mass down, and mass stepping onto the cluster is credited to the
/// site it stepped from.
pub fn line_launch_weights<W: Weight>(c: &Cluster, k: i64) -> Result<Vec<(Site, W)>> {
    let b = *c.bounds().ok_or(Error::EmptyCluster)?;
    if k <= b.hmax {
        return Err(Error::LineNotAbove { k, height: b.hmax });
    }
    let base = b.amin + b.bmin;
    let mut credit: FxHashMap<Site, W> = FxHashMap::default();
    let width = (k - base + 1) as usize;
    let mut row: Vec<W> = vec![W::one(); width];
    for level in (base + 1..=k).rev() {
        let width = (level - base + 1) as usize;
        let mut next = vec![W::zero(); width - 1];
        for (i, m) in row.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let from = Site::new(b.amin + i as i64, level - b.amin - i as i64);
            let half = m.half();
            // (i - 1) after stepping by -(1,0); i after stepping by -(0,1).
            let targets = [(i.checked_sub(1), from.a > b.amin), (Some(i), from.b > b.bmin)];
            for (j, in_region) in targets {
                let (Some(j), true) = (j, in_region) else { continue };
                let to = Site::new(b.amin + j as i64, level - 1 - b.amin - j as i64);
                if c.contains(to) {
                    credit.entry(from).or_insert_with(W::zero).add_assign(&half);
                } else {
                    next[j].add_assign(&half);
                }
            }
        }
        row = next;
    }
    let mut out: Vec<(Site, W)> = credit.into_iter().collect();
    out.sort_unstable_by_key(|(s, _)| *s);
    Ok(out)
}

/// Exact normalized law of the line-launch construction from height `k`.
pub fn line_launch_law(c: &Cluster, k: i64) -> Result<Vec<(Site, BigRational)>> {
    let weights = line_launch_weights::<Dyadic>(c, k)?;
    let total = weights
        .iter()
        .fold(BigRational::zero(), |acc, (_, w)| acc + w.to_big_rational());
    if total.is_zero() {
        return Err(Error::FrozenCluster);
    }
    Ok(weights.into_iter().map(|(s, w)| (s, w.to_big_rational() / &total)).collect())
}
