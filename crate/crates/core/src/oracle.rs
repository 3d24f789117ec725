//! Independent checks for maximum arborescence forests.

use thiserror::Error;

use crate::forest::{validate_arcs, ArborescenceForest, ValidationReport};
use crate::graph::{Arc, Digraph, Vertex};

/// Largest `n` accepted by [`brute_force_max_forest`].
pub const BRUTE_FORCE_MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute force supports n <= {BRUTE_FORCE_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error("not an arborescence forest: {0}")]
    InvalidForest(ValidationReport),
}

/// Maximum arborescence-forest size: one root per source component of the
/// condensation is necessary and sufficient.
pub fn max_forest_cardinality(g: &Digraph) -> usize {
    g.n() - g.scc().source_components.len()
}

/// Exhaustive search over parent assignments (each vertex takes no parent or
/// one in-arc), pruning as soon as an assignment closes a cycle.
pub fn brute_force_max_forest(g: &Digraph) -> Result<(usize, Vec<Arc>), OracleError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    let mut search = Search {
        g,
        parent: vec![None; n],
        best: 0,
        best_parent: vec![None; n],
    };
    search.go(0, 0);
    let witness: Vec<Arc> = search
        .best_parent
        .iter()
        .enumerate()
        .filter_map(|(h, p)| p.map(|t| (t, h)))
        .collect();
    Ok((search.best, witness))
}

struct Search<'a> {
    g: &'a Digraph,
    parent: Vec<Option<Vertex>>,
    best: usize,
    best_parent: Vec<Option<Vertex>>,
}

impl Search<'_> {
    fn go(&mut self, v: Vertex, size: usize) {
        let n = self.g.n();
        if v == n {
            if size > self.best {
                self.best = size;
                self.best_parent.clone_from(&self.parent);
            }
            return;
        }
        if size + (n - v) <= self.best {
            return;
        }
        let mut tails: Vec<Vertex> = self.g.in_neighbors(v).to_vec();
        tails.sort_unstable();
        for t in tails {
            if self.closes_cycle(t, v) {
                continue;
            }
            self.parent[v] = Some(t);
            self.go(v + 1, size + 1);
            self.parent[v] = None;
        }
        self.go(v + 1, size);
    }

    /// Would giving `v` the parent `t` make `v` its own ancestor?
    fn closes_cycle(&self, t: Vertex, v: Vertex) -> bool {
        let mut x = t;
        let mut steps = 0;
        loop {
            if x == v {
                return true;
            }
            match self.parent[x] {
                Some(p) if steps <= self.g.n() => {
                    x = p;
                    steps += 1;
                }
                _ => return false,
            }
        }
    }
}

/// True iff no root of `forest` reaches a different root in `g`.
pub fn is_maximum(forest: &ArborescenceForest, g: &Digraph) -> Result<bool, OracleError> {
    let report = validate_arcs(g, &forest.arcs());
    if !report.is_ok() {
        return Err(OracleError::InvalidForest(report));
    }
    Ok(find_root_to_root(forest, g).is_none())
}

/// A pair of distinct roots `(r, r')` with `r` reaching `r'`, if any.
pub fn find_root_to_root(forest: &ArborescenceForest, g: &Digraph) -> Option<(Vertex, Vertex)> {
    let n = g.n();
    let mut stamp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for r in forest.roots() {
        stamp[r] = r;
        stack.push(r);
        while let Some(x) = stack.pop() {
            for &y in g.out_neighbors(x) {
                if stamp[y] == r {
                    continue;
                }
                if forest.is_root(y) {
                    return Some((r, y));
                }
                stamp[y] = r;
                stack.push(y);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_examples() {
        assert_eq!(max_forest_cardinality(&Digraph::new(5)), 0);
        let cycle: Vec<Arc> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        assert_eq!(max_forest_cardinality(&Digraph::from_arcs(5, &cycle).unwrap()), 4);
        let two = Digraph::from_arcs(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert_eq!(max_forest_cardinality(&two), 2);
        assert_eq!(brute_force_max_forest(&two).unwrap().0, 2);
    }

    #[test]
    fn brute_force_examples() {
        let g = Digraph::from_arcs(2, &[(0, 1)]).unwrap();
        assert_eq!(brute_force_max_forest(&g).unwrap(), (1, vec![(0, 1)]));
        let tri = Digraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let (size, witness) = brute_force_max_forest(&tri).unwrap();
        assert_eq!(size, 2);
        assert!(validate_arcs(&tri, &witness).is_ok());
        assert_eq!(
            brute_force_max_forest(&Digraph::new(11)),
            Err(OracleError::TooLarge(11))
        );
    }

    #[test]
    fn is_maximum_examples() {
        let g = Digraph::new(3);
        assert!(is_maximum(&ArborescenceForest::empty(3), &g).unwrap());
        let g = Digraph::from_arcs(3, &[(0, 1)]).unwrap();
        assert!(!is_maximum(&ArborescenceForest::empty(3), &g).unwrap());
        let g = Digraph::from_arcs(3, &[(0, 1), (1, 0)]).unwrap();
        let f = ArborescenceForest::from_arcs(&g, &[(0, 1)]).unwrap();
        assert!(is_maximum(&f, &g).unwrap());
        assert_eq!(brute_force_max_forest(&g).unwrap().0, 1);
    }
}
