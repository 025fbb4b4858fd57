//! Growth dynamics: the discrete-time samplers, the continuous-time engines
//! and directed first-passage percolation.

mod continuous;
mod discrete;
mod queue;

pub use continuous::{
    run_continuous, run_dfpp, run_gillespie, run_harris, run_local_baseline, Acceptance, ContinuousMode,
};
pub use discrete::{
    run_discrete, sample_next, step_edge_launch, step_exact, step_line_launch, Sampler, StepOutcome,
    REJECTION_CAP,
};
pub(crate) use queue::RingQueue;

use serde::{Deserialize, Serialize};

use crate::cluster::Cluster;
use crate::lattice::{DirectedEdge, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Discrete,
    Continuous,
}

/// One site added to the cluster. In discrete mode `time` is the step index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Addition {
    pub time: f64,
    pub site: Site,
    pub edge: Option<DirectedEdge>,
}

/// The record of a growth run: the initial cluster and every addition in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub mode: TraceMode,
    pub initial: Vec<Site>,
    pub additions: Vec<Addition>,
    /// Attempts (walks or acceptance draws) that did not add a site.
    pub failed_attempts: u64,
}

impl GrowthTrace {
    pub fn new(mode: TraceMode, initial: &Cluster) -> Self {
        GrowthTrace { mode, initial: initial.sites().to_vec(), additions: Vec::new(), failed_attempts: 0 }
    }

    pub fn len(&self) -> usize {
        self.additions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.additions.is_empty()
    }

    /// Event times `T(1), T(2), ...`.
    pub fn jump_times(&self) -> Vec<f64> {
        self.additions.iter().map(|a| a.time).collect()
    }

    pub fn initial_cluster(&self) -> Cluster {
        Cluster::from_sites(self.initial.iter().copied())
    }

    pub fn final_cluster(&self) -> Cluster {
        let mut c = self.initial_cluster();
        for a in &self.additions {
            c.insert(a.site);
        }
        c
    }

    /// The cluster after every addition with `time <= t`.
    pub fn cluster_at(&self, t: f64) -> Cluster {
        let mut c = self.initial_cluster();
        for a in self.additions.iter().take_while(|a| a.time <= t) {
            c.insert(a.site);
        }
        c
    }

    /// Checks strictly increasing times, that every addition is a fresh site,
    /// and that every added site has a lower neighbour already in the cluster.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut c = self.initial_cluster();
        let mut last = f64::NEG_INFINITY;
        for (i, a) in self.additions.iter().enumerate() {
            if !(a.time > last) {
                return Err(format!("addition {i}: time {} not after {last}", a.time));
            }
            last = a.time;
            if c.in_multiplicity(a.site) == 0 {
                return Err(format!("addition {i}: {} has no lower neighbour in the cluster", a.site));
            }
            if let Some(e) = a.edge {
                if e.upper() != a.site || !c.contains(e.lower) {
                    return Err(format!("addition {i}: edge {e} does not lead from the cluster to {}", a.site));
                }
            }
            if !c.insert(a.site) {
                return Err(format!("addition {i}: {} already occupied", a.site));
            }
            if c.len() != self.initial.len() + i + 1 {
                return Err(format!("addition {i}: cluster size {}", c.len()));
            }
        }
        Ok(())
    }
}
