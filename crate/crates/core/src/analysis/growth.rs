use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, LinearFit};
use crate::activity::activity_distribution;
use crate::cluster::{Bounds, Cluster};
use crate::dynamics::GrowthTrace;
use crate::error::{Error, Result};
use crate::lattice::{in_cone, Site, Slope};

/// Fits need at least this many sample points.
pub const MIN_FIT_POINTS: usize = 10;

/// About `per_decade` geometrically spaced integers in `[lo, hi]`, both ends included.
pub fn geometric_points(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    assert!(lo >= 1 && lo <= hi && per_decade > 0);
    let steps = ((hi as f64 / lo as f64).log10() * per_decade as f64).ceil().max(1.0) as u32;
    let ratio = (hi as f64 / lo as f64).powf(1.0 / steps as f64);
    let mut v: Vec<u64> = (0..=steps).map(|i| (lo as f64 * ratio.powi(i as i32)).round() as u64).collect();
    *v.last_mut().unwrap() = hi;
    v.dedup();
    v
}

/// Height `h_n` and width `|d|_n` after `n` additions, for each requested `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSamples {
    pub n: Vec<u64>,
    pub heights: Vec<i64>,
    pub widths: Vec<i64>,
}

/// Samples a trace at the given addition counts (beyond the trace length are skipped).
pub fn sample_curve(trace: &GrowthTrace, points: &[u64]) -> CurveSamples {
    let mut points = points.to_vec();
    points.sort_unstable();
    points.dedup();
    let mut bounds = Bounds::from_sites(trace.initial.iter().copied());
    let mut out = CurveSamples { n: Vec::new(), heights: Vec::new(), widths: Vec::new() };
    let mut next = points.iter().peekable();
    for n in 0..=trace.len() as u64 {
        if n > 0 {
            let p = trace.additions[n as usize - 1].site;
            match &mut bounds {
                Some(b) => b.include(p),
                None => bounds = Some(Bounds::of(p)),
            }
        }
        while next.peek() == Some(&&n) {
            next.next();
            if let Some(b) = bounds {
                out.n.push(n);
                out.heights.push(b.hmax);
                out.widths.push(b.dabs());
            }
        }
    }
    out
}

/// Height and width curves with power-law exponents fitted on log–log axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub samples: CurveSamples,
    pub beta_h: LinearFit,
    pub beta_d: LinearFit,
}

fn log_points(curves: &[CurveSamples], values: impl Fn(&CurveSamples) -> &[i64]) -> Vec<(f64, f64)> {
    curves
        .iter()
        .flat_map(|c| c.n.iter().zip(values(c)).map(|(&n, &v)| (n, v)).collect::<Vec<_>>())
        .filter(|&(n, v)| n > 0 && v > 0)
        .map(|(n, v)| ((n as f64).ln(), (v as f64).ln()))
        .collect()
}

/// Fits `h_n ~ n^beta_h` and `|d|_n ~ n^beta_d` over the given sample points.
pub fn growth_exponents(trace: &GrowthTrace, points: &[u64]) -> Result<GrowthCurve> {
    let samples = sample_curve(trace, points);
    let (beta_h, beta_d) = pooled_exponents(std::slice::from_ref(&samples))?;
    Ok(GrowthCurve { samples, beta_h, beta_d })
}

/// Exponents fitted to the log–log points of several curves pooled together.
pub fn pooled_exponents(curves: &[CurveSamples]) -> Result<(LinearFit, LinearFit)> {
    let ph = log_points(curves, |c| &c.heights);
    let pd = log_points(curves, |c| &c.widths);
    let got = ph.len().min(pd.len());
    if got < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { got, need: MIN_FIT_POINTS });
    }
    Ok((linear_fit(&ph)?, linear_fit(&pd)?))
}

/// First addition count `n` (if any) where the counting floor
/// `(h_n + 1)(h_n + 2) / 2 >= n + 1` fails, or where `h_n > n` or `|d|_n > n`.
/// Meaningful for traces grown from the origin.
pub fn height_floor_violation(trace: &GrowthTrace) -> Option<u64> {
    let mut bounds = Bounds::from_sites(trace.initial.iter().copied())?;
    for (i, a) in trace.additions.iter().enumerate() {
        bounds.include(a.site);
        let n = i as i64 + 1;
        let h = bounds.hmax;
        let floor_ok = (h + 1) * (h + 2) / 2 > n && h as f64 >= (2.0 * n as f64).sqrt() - 2.0;
        if !floor_ok || h > n || bounds.dabs() > n {
            return Some(n as u64);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub t: f64,
    pub mean_height: f64,
    pub mean_width: f64,
    pub mean_height_over_t: f64,
    pub mean_width_over_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesTable {
    pub rows: Vec<RateRow>,
    /// Mean height against time.
    pub height_fit: LinearFit,
    /// Mean width against time.
    pub width_fit: LinearFit,
    /// Smallest `d` with `mean width >= sqrt(t) / d` at every grid time.
    pub width_constant: f64,
    /// Smallest `d` with `width >= sqrt(t) / d` at every grid time in every trace.
    pub width_constant_per_trace: f64,
}

/// Height and width at each grid time (state after all additions with time `<= t`).
fn sample_at_times(trace: &GrowthTrace, grid: &[f64]) -> Vec<(i64, i64)> {
    let mut bounds = Bounds::from_sites(trace.initial.iter().copied()).expect("non-empty initial cluster");
    let mut it = trace.additions.iter().peekable();
    grid.iter()
        .map(|&t| {
            while let Some(a) = it.next_if(|a| a.time <= t) {
                bounds.include(a.site);
            }
            (bounds.hmax, bounds.dabs())
        })
        .collect()
}

/// Per-time mean height and width of continuous-time traces, with linear fits.
pub fn continuous_rates(traces: &[GrowthTrace], grid: &[f64]) -> Result<RatesTable> {
    if traces.is_empty() {
        return Err(Error::InvalidParameter("no traces".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("time grid must be positive and increasing".into()));
    }
    let samples: Vec<Vec<(i64, i64)>> = traces.iter().map(|t| sample_at_times(t, grid)).collect();
    let n = traces.len() as f64;
    let mut per_trace = 0.0f64;
    let rows: Vec<RateRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mh = samples.iter().map(|s| s[i].0 as f64).sum::<f64>() / n;
            let md = samples.iter().map(|s| s[i].1 as f64).sum::<f64>() / n;
            for s in &samples {
                per_trace = per_trace.max(t.sqrt() / s[i].1 as f64);
            }
            RateRow { t, mean_height: mh, mean_width: md, mean_height_over_t: mh / t, mean_width_over_t: md / t }
        })
        .collect();
    let height_fit = linear_fit(&rows.iter().map(|r| (r.t, r.mean_height)).collect::<Vec<_>>())?;
    let width_fit = linear_fit(&rows.iter().map(|r| (r.t, r.mean_width)).collect::<Vec<_>>())?;
    let width_constant = rows.iter().map(|r| r.t.sqrt() / r.mean_width).fold(0.0, f64::max);
    Ok(RatesTable { rows, height_fit, width_fit, width_constant, width_constant_per_trace: per_trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowOccupancy {
    /// Second coordinate of the row.
    pub row: i64,
    pub count: u64,
    /// Addition index of the last site added to the row; 0 for initial sites.
    pub last_addition: Option<u64>,
}

/// Occupancy of the rows `{(a, row)}` in the final cluster of a trace.
pub fn row_occupancy(trace: &GrowthTrace, rows: &[i64]) -> Vec<RowOccupancy> {
    let mut out: Vec<RowOccupancy> = rows.iter().map(|&row| RowOccupancy { row, count: 0, last_addition: None }).collect();
    let all = trace.initial.iter().map(|&p| (0u64, p)).chain(trace.additions.iter().enumerate().map(|(i, a)| (i as u64 + 1, a.site)));
    for (index, p) in all {
        for r in out.iter_mut().filter(|r| r.row == p.b) {
            r.count += 1;
            r.last_addition = Some(index);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeHit {
    pub apex: Site,
    /// Addition index of the first site in `apex + C_b`; 0 for initial sites.
    pub first_hit: Option<u64>,
}

impl ConeHit {
    pub fn hit(&self) -> bool {
        self.first_hit.is_some()
    }
}

/// For each apex, whether and when the trace first puts a site in `apex + C_b`.
pub fn cone_occupation(trace: &GrowthTrace, apexes: &[Site], b: Slope) -> Vec<ConeHit> {
    apexes
        .iter()
        .map(|&apex| {
            let first_hit = trace
                .initial
                .iter()
                .any(|&p| in_cone(p, apex, b))
                .then_some(0)
                .or_else(|| trace.additions.iter().position(|a| in_cone(a.site, apex, b)).map(|i| i as u64 + 1));
            ConeHit { apex, first_hit }
        })
        .collect()
}

/// `min act(F) / max(|d|(F), sqrt(h(F)))` over a corpus of animals. Singletons,
/// where the denominator vanishes, are skipped.
pub fn activity_lower_constant(animals: &[Cluster]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for f in animals {
        let denom = (f.dabs() as f64).max((f.height() as f64).sqrt());
        if denom == 0.0 {
            continue;
        }
        let act = activity_distribution::<f64>(f)?.total;
        best = best.min(act / denom);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_continuous, run_discrete, Addition, ContinuousMode, Sampler, TraceMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grown(n: u64, seed: u64) -> GrowthTrace {
        run_discrete(&mut Cluster::origin(), n, Sampler::Line, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn geometric_grid() {
        let g = geometric_points(1000, 100_000, 10);
        assert_eq!(g.first(), Some(&1000));
        assert_eq!(g.last(), Some(&100_000));
        assert_eq!(g.len(), 21);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn curves_are_monotone_and_floored() {
        let t = grown(5000, 2);
        assert_eq!(height_floor_violation(&t), None);
        let s = sample_curve(&t, &geometric_points(1, 5000, 10));
        assert!(s.heights.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.widths.windows(2).all(|w| w[0] <= w[1]));
        let c = growth_exponents(&t, &geometric_points(100, 5000, 10)).unwrap();
        assert!(c.beta_h.slope > 0.3 && c.beta_h.slope < 0.9, "{:?}", c.beta_h);
    }

    #[test]
    fn too_few_points() {
        let t = grown(100, 1);
        assert!(matches!(growth_exponents(&t, &[10, 20, 50]), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn floor_catches_a_flat_trace() {
        // Heights stuck at zero break the floor at the first addition.
        let mut trace = GrowthTrace::new(TraceMode::Discrete, &Cluster::origin());
        for i in 1..=10 {
            let site = Site::new(i, -i);
            trace.additions.push(Addition { time: i as f64, site, edge: None });
        }
        assert_eq!(height_floor_violation(&trace), Some(1));
    }

    #[test]
    fn rows_partition_the_cluster() {
        let t = grown(2000, 4);
        let c = t.final_cluster();
        let rows: Vec<i64> = (0..=c.bounds().unwrap().bmax).collect();
        let occ = row_occupancy(&t, &rows);
        assert_eq!(occ.iter().map(|r| r.count).sum::<u64>(), c.len() as u64);
        let half = GrowthTrace { additions: t.additions[..1000].to_vec(), ..t.clone() };
        for (a, b) in row_occupancy(&half, &rows).iter().zip(&occ) {
            assert!(a.count <= b.count);
        }
    }

    #[test]
    fn cone_hits() {
        let t = grown(500, 5);
        let one = Slope::rational(1, 1).unwrap();
        let hits = cone_occupation(&t, &[Site::ORIGIN, Site::new(1000, -1000)], one);
        assert_eq!(hits[0].first_hit, Some(0));
        assert!(!hits[1].hit());
    }

    #[test]
    fn rates_from_continuous_traces() {
        let traces: Vec<GrowthTrace> = (0..4)
            .map(|s| run_continuous(&Cluster::origin(), 20.0, ContinuousMode::Harris, s).unwrap())
            .collect();
        let grid: Vec<f64> = (1..=20).map(|t| t as f64).collect();
        let r = continuous_rates(&traces, &grid).unwrap();
        assert_eq!(r.rows.len(), 20);
        assert!(r.rows.windows(2).all(|w| w[0].mean_height <= w[1].mean_height));
        assert!(r.height_fit.slope > 0.5);
        assert!(r.width_constant.is_finite() && r.width_constant > 0.0);
    }

    #[test]
    fn activity_constant_is_positive() {
        let animals: Vec<Cluster> = (0..10).map(|s| grown(30, s).final_cluster()).collect();
        let c = activity_lower_constant(&animals).unwrap();
        assert!(c > 0.0 && c.is_finite());
    }
}
