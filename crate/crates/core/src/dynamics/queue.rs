use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::harris::{Clock, HarrisSystem};
use crate::lattice::DirectedEdge;

/// A pending ring: the `index`-th ring of `edge`, at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ring {
    pub time: f64,
    pub index: u64,
    pub edge: DirectedEdge,
}

impl Eq for Ring {}

impl Ord for Ring {
    // Reversed so the max-heap pops the earliest ring; ties broken by edge.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.edge.cmp(&self.edge))
    }
}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Global time-ordered replay of the clocks of a set of watched edges.
pub(crate) struct RingQueue<'h> {
    harris: &'h HarrisSystem,
    heap: BinaryHeap<Ring>,
    clocks: FxHashMap<DirectedEdge, Clock>,
}

impl<'h> RingQueue<'h> {
    pub fn new(harris: &'h HarrisSystem) -> Self {
        RingQueue { harris, heap: BinaryHeap::new(), clocks: FxHashMap::default() }
    }

    /// Starts watching `e` from time `now`: its next ring strictly after `now` is queued.
    pub fn watch(&mut self, e: DirectedEdge, now: f64) {
        if self.clocks.contains_key(&e) {
            return;
        }
        let mut clock = self.harris.clock(e);
        let (time, index) = clock.next_after(now);
        self.heap.push(Ring { time, index, edge: e });
        self.clocks.insert(e, clock);
    }

    /// Pops the earliest ring not after `horizon`.
    pub fn pop(&mut self, horizon: f64) -> Option<Ring> {
        match self.heap.peek() {
            Some(r) if r.time <= horizon => self.heap.pop(),
            _ => None,
        }
    }

    /// Queues the next ring of a watched edge.
    pub fn rearm(&mut self, e: DirectedEdge) {
        let clock = self.clocks.get_mut(&e).expect("rearming an unwatched edge");
        let (time, index) = clock.next().expect("clock is endless");
        self.heap.push(Ring { time, index, edge: e });
    }

    pub fn forget(&mut self, e: DirectedEdge) {
        self.clocks.remove(&e);
    }
}
