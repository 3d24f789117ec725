//! Arc-arrival sequences: uniformly random arrivals with arc values, and the
//! bidirected-path adversary.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Arc, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrivalError {
    #[error("m = {m} exceeds the n(n-1) = {max} ordered pairs")]
    TooManyArcs { m: usize, max: usize },
    #[error("the adversary needs an even n >= 4, got {0}")]
    BadAdversaryN(usize),
    #[error("entry {0} has no arc value")]
    MissingRho(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEntry {
    pub tail: Vertex,
    pub head: Vertex,
    pub rho: Option<f64>,
}

impl ArcEntry {
    pub fn new(tail: Vertex, head: Vertex) -> Self {
        Self { tail, head, rho: None }
    }

    pub fn with_rho(tail: Vertex, head: Vertex, rho: f64) -> Self {
        Self { tail, head, rho: Some(rho) }
    }

    pub fn arc(&self) -> Arc {
        (self.tail, self.head)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSequence {
    pub n: usize,
    pub entries: Vec<ArcEntry>,
    pub seed: Option<u64>,
}

impl ArcSequence {
    pub fn arcs(&self) -> Vec<Arc> {
        self.entries.iter().map(ArcEntry::arc).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `i` with `rho_i <= p` (0 if none).
    pub fn phase_split_index(&self, p: f64) -> Result<usize, ArrivalError> {
        phase_split_index(&self.entries, p)
    }
}

/// Ordered pairs in increasing arc value, as if every one of the `n(n-1)`
/// pairs had received an independent uniform value.
///
/// The values are drawn as successive order statistics, `U(k+1) = U(k) +
/// (1 - U(k))(1 - V^(1/(N-k)))`, and the pair attached to each is drawn
/// uniformly from the pairs not yet used (sparse Fisher-Yates). The joint law
/// matches sorting `N` independent uniforms, but only the consumed prefix is
/// ever materialised, and any prefix is independent of how far the stream is
/// later read.
#[derive(Debug, Clone)]
pub struct UniformArrivals {
    n: usize,
    total: u64,
    drawn: u64,
    last: f64,
    swaps: HashMap<u64, u64>,
    rng: ChaCha8Rng,
}

impl UniformArrivals {
    pub fn new(n: usize, seed: u64) -> Self {
        let total = (n as u64) * (n.saturating_sub(1) as u64);
        Self {
            n,
            total,
            drawn: 0,
            last: 0.0,
            swaps: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pair(&self, index: u64) -> Arc {
        let width = (self.n - 1) as u64;
        let tail = index / width;
        let j = index % width;
        let head = if j < tail { j } else { j + 1 };
        (tail as usize, head as usize)
    }
}

impl Iterator for UniformArrivals {
    type Item = ArcEntry;

    fn next(&mut self) -> Option<ArcEntry> {
        if self.drawn >= self.total {
            return None;
        }
        let remaining = self.total - self.drawn;

        let pick = self.rng.gen_range(self.drawn..self.total);
        let at_pick = *self.swaps.get(&pick).unwrap_or(&pick);
        let at_front = *self.swaps.get(&self.drawn).unwrap_or(&self.drawn);
        self.swaps.insert(pick, at_front);
        self.swaps.remove(&self.drawn);

        // Minimum of `remaining` uniforms on (last, 1).
        let v: f64 = 1.0 - self.rng.gen::<f64>();
        let gap = -(v.ln() / remaining as f64).exp_m1();
        let mut rho = self.last + (1.0 - self.last) * gap;
        if rho <= self.last {
            rho = self.last.next_up();
        }
        rho = rho.min(1.0f64.next_down());
        self.last = rho;
        self.drawn += 1;

        let (tail, head) = self.pair(at_pick);
        Some(ArcEntry::with_rho(tail, head, rho))
    }
}

/// The first `m` pairs of [`UniformArrivals`] for `seed`.
pub fn uniform_random_sequence(n: usize, m: usize, seed: u64) -> Result<ArcSequence, ArrivalError> {
    let max = n * n.saturating_sub(1);
    if m > max {
        return Err(ArrivalError::TooManyArcs { m, max });
    }
    Ok(ArcSequence {
        n,
        entries: UniformArrivals::new(n, seed).take(m).collect(),
        seed: Some(seed),
    })
}

/// Bidirected path built outward from the middle, each new arc pointing
/// into the current path and immediately reversed. Extensions alternate
/// right, left, right, ... so every second arc flips the whole path.
pub fn bidirected_path_adversary(n: usize) -> Result<ArcSequence, ArrivalError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(ArrivalError::BadAdversaryN(n));
    }
    let (mut left, mut right) = (n / 2 - 1, n / 2);
    let mut entries = vec![ArcEntry::new(left, right), ArcEntry::new(right, left)];
    let mut go_right = true;
    while left > 0 || right < n - 1 {
        let (new, end) = if go_right && right < n - 1 || left == 0 {
            right += 1;
            (right, right - 1)
        } else {
            left -= 1;
            (left, left + 1)
        };
        entries.push(ArcEntry::new(new, end));
        entries.push(ArcEntry::new(end, new));
        go_right = !go_right;
    }
    Ok(ArcSequence { n, entries, seed: None })
}

/// Largest `i` with `rho_i <= p`, assuming values ascend.
pub fn phase_split_index(entries: &[ArcEntry], p: f64) -> Result<usize, ArrivalError> {
    let mut idx = 0;
    for (i, e) in entries.iter().enumerate() {
        let rho = e.rho.ok_or(ArrivalError::MissingRho(i))?;
        if rho <= p {
            idx = i + 1;
        }
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn two_vertices_exhaust() {
        let seq = uniform_random_sequence(2, 2, 99).unwrap();
        let set: HashSet<Arc> = seq.arcs().into_iter().collect();
        assert_eq!(set, HashSet::from([(0, 1), (1, 0)]));
    }

    #[test]
    fn full_enumeration_is_sorted_and_distinct() {
        let seq = uniform_random_sequence(10, 90, 3).unwrap();
        let set: HashSet<Arc> = seq.arcs().into_iter().collect();
        assert_eq!(set.len(), 90);
        assert!(seq.arcs().iter().all(|&(t, h)| t != h && t < 10 && h < 10));
        for w in seq.entries.windows(2) {
            assert!(w[0].rho.unwrap() < w[1].rho.unwrap());
        }
        assert!(seq.entries.iter().all(|e| (0.0..1.0).contains(&e.rho.unwrap())));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = uniform_random_sequence(100, 200, 7).unwrap();
        let b = uniform_random_sequence(100, 200, 7).unwrap();
        assert_eq!(a, b);
        let c = uniform_random_sequence(100, 200, 8).unwrap();
        assert_ne!(a, c);
        let longer = uniform_random_sequence(100, 300, 7).unwrap();
        assert_eq!(&longer.entries[..200], &a.entries[..]);
    }

    #[test]
    fn too_many_arcs() {
        assert_eq!(
            uniform_random_sequence(3, 7, 0),
            Err(ArrivalError::TooManyArcs { m: 7, max: 6 })
        );
    }

    #[test]
    fn adversary_small() {
        let seq = bidirected_path_adversary(4).unwrap();
        assert_eq!(seq.arcs(), vec![(1, 2), (2, 1), (3, 2), (2, 3), (0, 1), (1, 0)]);
        let seq = bidirected_path_adversary(6).unwrap();
        assert_eq!(
            seq.arcs(),
            vec![(2, 3), (3, 2), (4, 3), (3, 4), (1, 2), (2, 1), (5, 4), (4, 5), (0, 1), (1, 0)]
        );
        assert_eq!(bidirected_path_adversary(5), Err(ArrivalError::BadAdversaryN(5)));
        assert_eq!(bidirected_path_adversary(2), Err(ArrivalError::BadAdversaryN(2)));
    }

    #[test]
    fn adversary_length() {
        for n in (4..40).step_by(2) {
            let seq = bidirected_path_adversary(n).unwrap();
            assert_eq!(seq.len(), 2 * (n - 1));
            let set: HashSet<Arc> = seq.arcs().into_iter().collect();
            assert_eq!(set.len(), 2 * (n - 1));
        }
    }

    #[test]
    fn split_index_examples() {
        let e = |r| ArcEntry::with_rho(0, 1, r);
        assert_eq!(phase_split_index(&[e(0.6), e(0.7)], 0.5), Ok(0));
        assert_eq!(phase_split_index(&[e(0.1), e(0.2)], 0.5), Ok(2));
        assert_eq!(phase_split_index(&[e(0.1), e(0.3), e(0.9)], 0.5), Ok(2));
        assert_eq!(
            phase_split_index(&[ArcEntry::new(0, 1)], 0.5),
            Err(ArrivalError::MissingRho(0))
        );
    }
}
