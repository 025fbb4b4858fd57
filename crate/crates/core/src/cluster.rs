//! Occupancy sets and clusters with incrementally maintained aggregates.

use rustc_hash::FxHashMap;

use crate::lattice::{ConeWedgeParams, DirectedEdge, Site, Slope};

/// A dense, growable occupancy bitmap over a bounding box of the lattice.
#[derive(Debug, Clone, Default)]
pub struct SiteGrid {
    a0: i64,
    b0: i64,
    width_a: i64,
    width_b: i64,
    cells: Vec<bool>,
    len: usize,
}

impl SiteGrid {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn index(&self, p: Site) -> Option<usize> {
        let da = p.a - self.a0;
        let db = p.b - self.b0;
        if da < 0 || db < 0 || da >= self.width_a || db >= self.width_b {
            return None;
        }
        Some((da * self.width_b + db) as usize)
    }

    #[inline]
    pub fn contains(&self, p: Site) -> bool {
        match self.index(p) {
            Some(i) => self.cells[i],
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Returns `true` if the site was not present before.
    pub fn insert(&mut self, p: Site) -> bool {
        let i = match self.index(p) {
            Some(i) => i,
            None => {
                self.grow_to(p);
                self.index(p).expect("grid grown to cover site")
            }
        };
        if self.cells[i] {
            return false;
        }
        self.cells[i] = true;
        self.len += 1;
        true
    }

    pub fn remove(&mut self, p: Site) -> bool {
        match self.index(p) {
            Some(i) if self.cells[i] => {
                self.cells[i] = false;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    fn grow_to(&mut self, p: Site) {
        let (mut a_lo, mut a_hi, mut b_lo, mut b_hi) = if self.width_a == 0 {
            (p.a, p.a + 1, p.b, p.b + 1)
        } else {
            (self.a0, self.a0 + self.width_a, self.b0, self.b0 + self.width_b)
        };
        let pad_a = (self.width_a / 2).max(8);
        let pad_b = (self.width_b / 2).max(8);
        if p.a < a_lo {
            a_lo = p.a - pad_a;
        }
        if p.a >= a_hi {
            a_hi = p.a + 1 + pad_a;
        }
        if p.b < b_lo {
            b_lo = p.b - pad_b;
        }
        if p.b >= b_hi {
            b_hi = p.b + 1 + pad_b;
        }
        if self.width_a == 0 {
            a_lo -= 8;
            a_hi += 8;
            b_lo -= 8;
            b_hi += 8;
        }
        let (wa, wb) = (a_hi - a_lo, b_hi - b_lo);
        let mut cells = vec![false; (wa * wb) as usize];
        for da in 0..self.width_a {
            let src = (da * self.width_b) as usize;
            let dst = ((self.a0 + da - a_lo) * wb + (self.b0 - b_lo)) as usize;
            cells[dst..dst + self.width_b as usize]
                .copy_from_slice(&self.cells[src..src + self.width_b as usize]);
        }
        self.a0 = a_lo;
        self.b0 = b_lo;
        self.width_a = wa;
        self.width_b = wb;
        self.cells = cells;
    }
}

/// Extremes of height, deviation and both coordinates over a non-empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub hmin: i64,
    pub hmax: i64,
    pub dmin: i64,
    pub dmax: i64,
    pub amin: i64,
    pub amax: i64,
    pub bmin: i64,
    pub bmax: i64,
}

impl Bounds {
    pub fn of(p: Site) -> Self {
        Bounds {
            hmin: p.height(),
            hmax: p.height(),
            dmin: p.deviation(),
            dmax: p.deviation(),
            amin: p.a,
            amax: p.a,
            bmin: p.b,
            bmax: p.b,
        }
    }

    pub fn include(&mut self, p: Site) {
        let (h, d) = (p.height(), p.deviation());
        self.hmin = self.hmin.min(h);
        self.hmax = self.hmax.max(h);
        self.dmin = self.dmin.min(d);
        self.dmax = self.dmax.max(d);
        self.amin = self.amin.min(p.a);
        self.amax = self.amax.max(p.a);
        self.bmin = self.bmin.min(p.b);
        self.bmax = self.bmax.max(p.b);
    }

    pub fn from_sites<I: IntoIterator<Item = Site>>(sites: I) -> Option<Self> {
        let mut it = sites.into_iter();
        let mut bounds = Bounds::of(it.next()?);
        for p in it {
            bounds.include(p);
        }
        Some(bounds)
    }

    /// `|d|(A)`, the largest absolute deviation.
    pub fn dabs(&self) -> i64 {
        self.dmin.abs().max(self.dmax.abs())
    }
}

/// Edges with lower vertex in the cluster and upper vertex vacant, kept in a
/// swap-remove vector so uniform sampling is O(1).
#[derive(Debug, Clone, Default)]
pub struct GrowthEdges {
    edges: Vec<DirectedEdge>,
    index: FxHashMap<DirectedEdge, usize>,
}

impl GrowthEdges {
    pub(crate) fn insert(&mut self, e: DirectedEdge) {
        if self.index.contains_key(&e) {
            return;
        }
        self.index.insert(e, self.edges.len());
        self.edges.push(e);
    }

    pub(crate) fn remove(&mut self, e: DirectedEdge) {
        if let Some(i) = self.index.remove(&e) {
            self.edges.swap_remove(i);
            if let Some(&moved) = self.edges.get(i) {
                self.index.insert(moved, i);
            }
        }
    }

    pub fn as_slice(&self) -> &[DirectedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &DirectedEdge) -> bool {
        self.index.contains_key(e)
    }
}

/// A finite cluster. Sites are remembered in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Cluster {
    grid: SiteGrid,
    sites: Vec<Site>,
    bounds: Option<Bounds>,
    growth: GrowthEdges,
}

impl Cluster {
    pub fn new() -> Self {
        Self::default()
    }

    /// The single-site cluster `{(0,0)}`.
    pub fn origin() -> Self {
        Self::from_sites([Site::ORIGIN])
    }

    pub fn from_sites<I: IntoIterator<Item = Site>>(sites: I) -> Self {
        let mut c = Cluster::new();
        for p in sites {
            c.insert(p);
        }
        c
    }

    /// Sites of height zero with `|deviation| <= window`: the horizontal line
    /// truncated to a strip.
    pub fn flat_line(window: i64) -> Self {
        let half = window.div_euclid(2);
        Cluster::from_sites((-half..=half).map(|a| Site::new(a, -a)))
    }

    #[inline]
    pub fn contains(&self, p: Site) -> bool {
        self.grid.contains(p)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Sites in insertion order.
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn sorted_sites(&self) -> Vec<Site> {
        let mut v = self.sites.clone();
        v.sort_unstable();
        v
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    /// `h(C)`. Panics on an empty cluster.
    pub fn height(&self) -> i64 {
        self.bounds.expect("height of an empty cluster").hmax
    }

    /// `d(C)`. Panics on an empty cluster.
    pub fn dmax(&self) -> i64 {
        self.bounds.expect("deviation of an empty cluster").dmax
    }

    /// `|d|(C)`. Panics on an empty cluster.
    pub fn dabs(&self) -> i64 {
        self.bounds.expect("deviation of an empty cluster").dabs()
    }

    pub fn growth_edges(&self) -> &[DirectedEdge] {
        self.growth.as_slice()
    }

    pub fn is_growth_edge(&self, e: &DirectedEdge) -> bool {
        self.growth.contains(e)
    }

    /// Number of edges `e` with `l(e)` in the cluster and `u(e) = p`.
    pub fn in_multiplicity(&self, p: Site) -> u32 {
        p.in_edges().iter().filter(|e| self.contains(e.lower)).count() as u32
    }

    /// Distinct upper vertices of growth edges, in first-seen order.
    pub fn growth_sites(&self) -> Vec<Site> {
        let mut seen = rustc_hash::FxHashSet::default();
        self.growth
            .as_slice()
            .iter()
            .map(|e| e.upper())
            .filter(|&u| seen.insert(u))
            .collect()
    }

    /// Adds a site. Returns `false` if it was already present.
    pub fn insert(&mut self, p: Site) -> bool {
        if !self.grid.insert(p) {
            return false;
        }
        self.sites.push(p);
        match &mut self.bounds {
            Some(b) => b.include(p),
            None => self.bounds = Some(Bounds::of(p)),
        }
        for e in p.in_edges() {
            self.growth.remove(e);
        }
        for e in p.out_edges() {
            if !self.grid.contains(e.upper()) {
                self.growth.insert(e);
            }
        }
        true
    }

    /// Recomputes every aggregate from the occupied set and compares it with
    /// the maintained values. Returns a description of the first mismatch.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.grid.len() != self.sites.len() {
            return Err(format!("grid holds {} sites, list {}", self.grid.len(), self.sites.len()));
        }
        let fresh = Bounds::from_sites(self.sites.iter().copied());
        if fresh != self.bounds {
            return Err(format!("bounds {:?} != recomputed {:?}", self.bounds, fresh));
        }
        let mut expected: Vec<DirectedEdge> = self
            .sites
            .iter()
            .flat_map(|p| p.out_edges())
            .filter(|e| !self.contains(e.upper()))
            .collect();
        expected.sort_unstable();
        let mut actual = self.growth.as_slice().to_vec();
        actual.sort_unstable();
        if expected != actual {
            return Err(format!("growth edges {} != recomputed {}", actual.len(), expected.len()));
        }
        if actual.len() > 2 * self.len() {
            return Err("more than two growth edges per site".into());
        }
        Ok(())
    }
}

impl PartialEq for Cluster {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sites.iter().all(|&p| other.contains(p))
    }
}

impl Eq for Cluster {}

impl FromIterator<Site> for Cluster {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        Cluster::from_sites(iter)
    }
}

/// Checks the geometric assumption on a cluster for `(a, K)`: for every site
/// `P`, no site lies in the upward cone of slope `a` with apex `P + (K,K)`,
/// nor in the downward cone with apex `P - (K,K)`. Cones are closed, so the
/// apex itself counts and `K = 0` fails for every non-empty cluster.
pub fn cluster_assumption_holds(c: &Cluster, params: &ConeWedgeParams) -> bool {
    let two_k = 2.0 * params.k;
    let integral = two_k.fract() == 0.0;
    let sites = c.sites();
    for &p in sites {
        for &q in sites {
            let rel = q - p;
            let dev = rel.deviation().abs();
            // Shifting the apex by (K,K) moves the relative height by 2K and
            // leaves the deviation unchanged.
            let violated = if integral {
                let up = rel.height() - two_k as i64;
                let down = -(rel.height() + two_k as i64);
                (up >= 0 && params.a.scaled_le(dev, up)) || (down >= 0 && params.a.scaled_le(dev, down))
            } else {
                upper_cone_real(rel.height() as f64 - two_k, dev, params.a)
                    || upper_cone_real(-(rel.height() as f64 + two_k), dev, params.a)
            };
            if violated {
                return false;
            }
        }
    }
    true
}

fn upper_cone_real(height: f64, dev: i64, a: Slope) -> bool {
    height >= 0.0 && height >= a.value() * dev as f64 - crate::lattice::REAL_SLOPE_TOLERANCE
}
