//! Minimum-cost spanning arborescences: a classical contraction oracle, a
//! primal-dual algorithm emitting dual certificates, exhaustive ground truth
//! and an adversarial incremental instance.

mod adversary;
mod certificate;
mod edmonds;
mod primal_dual;

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{Arc, Digraph, GraphError, Vertex};

pub use adversary::{incremental_recourse, triangle_adversary, IncrementalReport, TriangleInstance};
pub use certificate::{verify_dual_certificate, CertificateReport, CertificateViolation, DualPacking, DualSet};
pub use edmonds::chu_liu_edmonds;
pub use primal_dual::{min_arborescence_from, min_arborescence_with_certificate, CandidateRule, MinCostSolution};

pub type Weight = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinCostError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("arc {0:?} appears twice")]
    DuplicateArc(Arc),
    #[error("vertices {0:?} are unreachable from the root")]
    Unreachable(Vec<Vertex>),
    #[error("brute force supports n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("candidate arcs into the grown set are all tight but the parent arc of {vertex} is not (stalled)")]
    Stalled { vertex: Vertex },
    #[error("initial arcs do not form a spanning arborescence")]
    NotArborescence,
    #[error("no zero-cost path from {entry} to {vertex} while re-rooting")]
    UpdateFailed { entry: Vertex, vertex: Vertex },
    #[error("re-rooting did not lower the tree cost ({before} -> {after})")]
    NoImprovement { before: Weight, after: Weight },
    #[error("certificate rejected: {0}")]
    Certificate(CertificateReport),
    #[error("adversary needs n >= 9 divisible by 3, got {0}")]
    BadAdversaryN(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedArc {
    pub tail: Vertex,
    pub head: Vertex,
    pub weight: Weight,
}

/// Digraph with nonnegative integer arc costs and a designated root.
#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    n: usize,
    root: Vertex,
    arcs: Vec<WeightedArc>,
    in_arcs: Vec<Vec<usize>>,
    index: HashMap<Arc, usize>,
}

impl WeightedDigraph {
    pub fn new(n: usize, root: Vertex) -> Result<Self, MinCostError> {
        if root >= n {
            return Err(GraphError::VertexOutOfRange { vertex: root, n }.into());
        }
        Ok(Self {
            n,
            root,
            arcs: Vec::new(),
            in_arcs: vec![Vec::new(); n],
            index: HashMap::new(),
        })
    }

    pub fn from_arcs(n: usize, root: Vertex, arcs: &[(Vertex, Vertex, Weight)]) -> Result<Self, MinCostError> {
        let mut g = Self::new(n, root)?;
        for &(t, h, w) in arcs {
            g.add_arc(t, h, w)?;
        }
        Ok(g)
    }

    pub fn add_arc(&mut self, tail: Vertex, head: Vertex, weight: Weight) -> Result<usize, MinCostError> {
        for v in [tail, head] {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n }.into());
            }
        }
        if tail == head {
            return Err(GraphError::SelfLoop(tail).into());
        }
        if self.index.contains_key(&(tail, head)) {
            return Err(MinCostError::DuplicateArc((tail, head)));
        }
        let id = self.arcs.len();
        self.arcs.push(WeightedArc { tail, head, weight });
        self.in_arcs[head].push(id);
        self.index.insert((tail, head), id);
        Ok(id)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn arcs(&self) -> &[WeightedArc] {
        &self.arcs
    }

    pub fn in_arcs(&self, v: Vertex) -> &[usize] {
        &self.in_arcs[v]
    }

    pub fn arc_id(&self, tail: Vertex, head: Vertex) -> Option<usize> {
        self.index.get(&(tail, head)).copied()
    }

    pub fn weight(&self, tail: Vertex, head: Vertex) -> Option<Weight> {
        self.arc_id(tail, head).map(|id| self.arcs[id].weight)
    }

    pub fn digraph(&self) -> Digraph {
        let arcs: Vec<Arc> = self.arcs.iter().map(|a| (a.tail, a.head)).collect();
        Digraph::from_arcs(self.n, &arcs).expect("arcs validated on insertion")
    }

    /// Total weight of `arcs`, `None` if one is missing.
    pub fn cost(&self, arcs: &[Arc]) -> Option<Weight> {
        arcs.iter().map(|&(t, h)| self.weight(t, h)).sum()
    }

    /// Errors with the unreachable set unless every vertex is reachable
    /// from the root.
    pub fn check_spanning(&self) -> Result<(), MinCostError> {
        let reach = self.digraph().reachable_set(self.root)?;
        if reach.len() == self.n {
            return Ok(());
        }
        let mut seen = vec![false; self.n];
        for v in reach {
            seen[v] = true;
        }
        Err(MinCostError::Unreachable((0..self.n).filter(|&v| !seen[v]).collect()))
    }

    /// True iff `tree` is a spanning arborescence rooted at the root.
    pub fn is_spanning_arborescence(&self, tree: &[Arc]) -> bool {
        if tree.len() + 1 != self.n {
            return false;
        }
        let mut parent = vec![None; self.n];
        for &(t, h) in tree {
            if self.arc_id(t, h).is_none() || h == self.root || parent[h].is_some() {
                return false;
            }
            parent[h] = Some(t);
        }
        (0..self.n).all(|v| {
            let mut x = v;
            for _ in 0..self.n {
                match parent[x] {
                    Some(p) => x = p,
                    None => return x == self.root,
                }
            }
            false
        })
    }
}

/// Largest `n` for [`brute_force_min_arborescence`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Minimum over all parent assignments that form a spanning arborescence.
pub fn brute_force_min_arborescence(g: &WeightedDigraph) -> Result<(Vec<Arc>, Weight), MinCostError> {
    if g.n() > BRUTE_FORCE_MAX_N {
        return Err(MinCostError::TooLarge { n: g.n(), max: BRUTE_FORCE_MAX_N });
    }
    g.check_spanning()?;
    let others: Vec<Vertex> = (0..g.n()).filter(|&v| v != g.root()).collect();
    let mut choice = vec![0usize; others.len()];
    let mut best: Option<(Vec<Arc>, Weight)> = None;
    if others.iter().any(|&v| g.in_arcs(v).is_empty()) {
        return Err(MinCostError::Unreachable(others));
    }
    loop {
        let tree: Vec<Arc> = others
            .iter()
            .zip(&choice)
            .map(|(&v, &c)| {
                let a = g.arcs()[g.in_arcs(v)[c]];
                (a.tail, a.head)
            })
            .collect();
        if g.is_spanning_arborescence(&tree) {
            let cost = g.cost(&tree).expect("arcs from graph");
            if best.as_ref().is_none_or(|(_, b)| cost < *b) {
                best = Some((tree, cost));
            }
        }
        let mut i = 0;
        loop {
            if i == others.len() {
                return best.ok_or_else(|| MinCostError::Unreachable(Vec::new()));
            }
            choice[i] += 1;
            if choice[i] < g.in_arcs(others[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arcs() {
        let mut g = WeightedDigraph::new(3, 0).unwrap();
        g.add_arc(0, 1, 2).unwrap();
        assert_eq!(g.add_arc(0, 1, 3), Err(MinCostError::DuplicateArc((0, 1))));
        assert!(g.add_arc(1, 1, 0).is_err());
        assert!(g.add_arc(0, 3, 0).is_err());
        assert!(WeightedDigraph::new(2, 2).is_err());
    }

    #[test]
    fn unreachable_vertices_reported() {
        let g = WeightedDigraph::from_arcs(4, 0, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        assert_eq!(g.check_spanning(), Err(MinCostError::Unreachable(vec![2, 3])));
    }

    #[test]
    fn brute_force_small() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (0, 2, 5), (1, 2, 1)]).unwrap();
        let (tree, cost) = brute_force_min_arborescence(&g).unwrap();
        assert_eq!(cost, 1);
        assert!(g.is_spanning_arborescence(&tree));
    }
}
