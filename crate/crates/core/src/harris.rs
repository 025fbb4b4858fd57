//! Addressable randomness for the coupled constructions.
//!
//! Every directed edge carries a unit-rate Poisson clock and an infinite
//! family of upward walks. Each stream is a ChaCha8 generator whose seed is a
//! hash of `(master_seed, edge, stream kind, walk index)`, so any stream can
//! be regenerated on demand, in any order, on any thread.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::lattice::{DirectedEdge, Site, Step};

const CLOCK_STREAM: u64 = 0x636c_6f63_6b00_0000;
const WALK_STREAM: u64 = 0x7761_6c6b_0000_0000;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_key(master: u64, edge: DirectedEdge, kind: u64, index: u64) -> u64 {
    let mut k = mix64(master ^ kind);
    k = mix64(k ^ edge.lower.a as u64);
    k = mix64(k ^ edge.lower.b as u64);
    k = mix64(k ^ edge.step.index());
    mix64(k ^ index)
}

/// A seeded family of per-edge clocks and per-edge walk sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarrisSystem {
    master_seed: u64,
}

impl HarrisSystem {
    pub fn new(master_seed: u64) -> Self {
        HarrisSystem { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// The ring times of `e`, in increasing order.
    pub fn clock(&self, e: DirectedEdge) -> Clock {
        Clock {
            rng: ChaCha8Rng::seed_from_u64(stream_key(self.master_seed, e, CLOCK_STREAM, 0)),
            time: 0.0,
            rings: 0,
        }
    }

    /// All ring times of `e` in `[0, horizon]`.
    pub fn clock_times(&self, e: DirectedEdge, horizon: f64) -> Vec<f64> {
        self.clock(e).take_while(|&(t, _)| t <= horizon).map(|(t, _)| t).collect()
    }

    /// The `k`-th walk attached to `e` (`k >= 1`), as an endless step stream.
    pub fn walk(&self, e: DirectedEdge, k: u64) -> Walk {
        Walk::from_rng(ChaCha8Rng::seed_from_u64(stream_key(self.master_seed, e, WALK_STREAM, k)))
    }

    /// The first `n` steps of the `k`-th walk at `e`.
    pub fn walk_steps(&self, e: DirectedEdge, k: u64, n: usize) -> Vec<Step> {
        self.walk(e, k).take(n).collect()
    }
}

/// Iterator over `(ring time, ring index)` of one edge clock. Ring indices start at 1.
#[derive(Debug, Clone)]
pub struct Clock {
    rng: ChaCha8Rng,
    time: f64,
    rings: u64,
}

impl Clock {
    /// Advances past every ring at or before `t` and returns the first ring after it.
    pub fn next_after(&mut self, t: f64) -> (f64, u64) {
        loop {
            let ring = self.next().expect("clock is endless");
            if ring.0 > t {
                return ring;
            }
        }
    }
}

impl Iterator for Clock {
    type Item = (f64, u64);

    fn next(&mut self) -> Option<(f64, u64)> {
        let gap: f64 = self.rng.sample(Exp1);
        self.time += gap;
        self.rings += 1;
        Some((self.time, self.rings))
    }
}

/// An endless symmetric upward walk: each step is `(1,0)` or `(0,1)` with probability 1/2.
#[derive(Debug, Clone)]
pub struct Walk<R = ChaCha8Rng> {
    rng: R,
    word: u64,
    bits_left: u32,
}

impl<R: RngCore> Walk<R> {
    pub fn from_rng(rng: R) -> Self {
        Walk { rng, word: 0, bits_left: 0 }
    }

    /// The underlying generator, for draws that bypass the step stream.
    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    #[inline]
    pub fn next_step(&mut self) -> Step {
        if self.bits_left == 0 {
            self.word = self.rng.next_u64();
            self.bits_left = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.bits_left -= 1;
        Step::from_bit(bit)
    }
}

impl<R: RngCore> Iterator for Walk<R> {
    type Item = Step;

    #[inline]
    fn next(&mut self) -> Option<Step> {
        Some(self.next_step())
    }
}

/// How an upward walk released from a vacant site ends, relative to a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkOutcome {
    Escaped,
    Hit(Site),
}

/// Runs an upward walk from `start` against a membership test, stopping as
/// soon as the walk can no longer meet the set: its height exceeds
/// `max_height`, or one coordinate exceeds the set's largest in that coordinate.
#[inline]
pub fn run_upward<F: Fn(Site) -> bool>(
    start: Site,
    steps: &mut impl Iterator<Item = Step>,
    max_height: i64,
    max_a: i64,
    max_b: i64,
    occupied: F,
) -> WalkOutcome {
    let mut p = start;
    loop {
        if p.height() > max_height || p.a > max_a || p.b > max_b {
            return WalkOutcome::Escaped;
        }
        if occupied(p) {
            return WalkOutcome::Hit(p);
        }
        p = p.step(steps.next().expect("walk is endless"));
    }
}
