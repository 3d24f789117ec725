use serde::Serialize;

use crate::graph::{Arc, Vertex};

use super::{chu_liu_edmonds, MinCostError, Weight, WeightedDigraph};

/// Initial weighted graph plus the weight-0 arcs inserted one at a time.
#[derive(Debug, Clone)]
pub struct TriangleInstance {
    pub initial: WeightedDigraph,
    pub insertions: Vec<(Vertex, Vertex, Weight)>,
}

/// Triangle with apex `0`, a left and a right side of `n/3` vertices each
/// hanging down from the apex on weight-1 arcs, and a bottom of `n/3 - 1`
/// vertices joining the two lower corners by weight-0 arcs pointing left.
///
/// Insertions first make the bottom bidirected, then add upward weight-0
/// arcs to the sides from the bottom corner up: one on the right, then two
/// on the left, two on the right, and so on. Whichever side has more upward
/// arcs is cheaper to climb, so the optimum keeps switching between going
/// down the left and crossing the bottom rightwards, and the mirror image.
pub fn triangle_adversary(n: usize) -> Result<TriangleInstance, MinCostError> {
    if n < 9 || !n.is_multiple_of(3) {
        return Err(MinCostError::BadAdversaryN(n));
    }
    let k = n / 3;
    let b = k - 1;
    let left = |i: usize| i; // 1..=k
    let right = |i: usize| k + i; // 1..=k
    let bottom = |i: usize| 2 * k + i; // 1..=b

    let mut arcs = vec![(0, left(1), 1), (0, right(1), 1)];
    for i in 1..k {
        arcs.push((left(i), left(i + 1), 1));
        arcs.push((right(i), right(i + 1), 1));
    }
    let mut row = vec![right(k)];
    row.extend((1..=b).rev().map(bottom));
    row.push(left(k));
    for w in row.windows(2) {
        arcs.push((w[0], w[1], 0));
    }
    let initial = WeightedDigraph::from_arcs(n, 0, &arcs)?;

    let mut insertions: Vec<(Vertex, Vertex, Weight)> = row.windows(2).rev().map(|w| (w[1], w[0], 0)).collect();
    let (mut up_left, mut up_right) = (0, 0);
    let mut on_right = true;
    let mut batch = 1;
    while up_left < k - 1 || up_right < k - 1 {
        let (count, side): (&mut usize, &dyn Fn(usize) -> Vertex) =
            if on_right { (&mut up_right, &right) } else { (&mut up_left, &left) };
        for _ in 0..batch {
            if *count == k - 1 {
                break;
            }
            let lower = k - *count;
            insertions.push((side(lower), side(lower - 1), 0));
            *count += 1;
        }
        on_right = !on_right;
        batch = 2;
    }
    Ok(TriangleInstance { initial, insertions })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncrementalReport {
    pub n: usize,
    /// `|T_i \ T_{i-1}|` per insertion.
    pub per_step: Vec<usize>,
    /// Optimal cost after each insertion.
    pub costs: Vec<Weight>,
    pub total_recourse: u64,
    pub final_tree: Vec<Arc>,
}

impl IncrementalReport {
    /// Insertions after which the maintained tree changed.
    pub fn changes(&self) -> usize {
        self.per_step.iter().filter(|&&r| r > 0).count()
    }
}

/// Recomputes a minimum arborescence after every insertion, keeping the
/// previous tree whenever it is still optimal, and sums the arcs replaced.
pub fn incremental_recourse(instance: &TriangleInstance) -> Result<IncrementalReport, MinCostError> {
    let mut g = instance.initial.clone();
    let (mut tree, _) = chu_liu_edmonds(&g)?;
    let mut report = IncrementalReport {
        n: g.n(),
        per_step: Vec::with_capacity(instance.insertions.len()),
        costs: Vec::with_capacity(instance.insertions.len()),
        total_recourse: 0,
        final_tree: Vec::new(),
    };
    for &(t, h, w) in &instance.insertions {
        g.add_arc(t, h, w)?;
        let (best, cost) = chu_liu_edmonds(&g)?;
        let kept = g.cost(&tree).expect("old tree arcs remain in the graph");
        let changed = if kept == cost {
            0
        } else {
            let changed = best.iter().filter(|a| !tree.contains(a)).count();
            tree = best;
            changed
        };
        report.per_step.push(changed);
        report.costs.push(cost);
        report.total_recourse += changed as u64;
    }
    report.final_tree = tree;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_bad_n() {
        for n in [0, 3, 6, 10, 31] {
            assert_eq!(triangle_adversary(n).err(), Some(MinCostError::BadAdversaryN(n)));
        }
    }

    #[test]
    fn shape_for_nine() {
        let inst = triangle_adversary(9).unwrap();
        // Sides 1,2,3 and 4,5,6; bottom 7,8.
        assert_eq!(inst.initial.arcs().len(), 2 + 4 + 3);
        assert!(inst.initial.check_spanning().is_ok());
        let ins: Vec<Arc> = inst.insertions.iter().map(|&(t, h, _)| (t, h)).collect();
        assert_eq!(ins, vec![(3, 7), (7, 8), (8, 6), (6, 5), (3, 2), (2, 1), (5, 4)]);
    }

    #[test]
    fn weights_are_zero_or_one_and_arcs_distinct() {
        for n in [9, 30, 60] {
            let inst = triangle_adversary(n).unwrap();
            let mut all: HashSet<Arc> = HashSet::new();
            for a in inst.initial.arcs() {
                assert!(a.weight <= 1);
                assert!(all.insert((a.tail, a.head)));
            }
            for &(t, h, w) in &inst.insertions {
                assert_eq!(w, 0);
                assert!(all.insert((t, h)));
            }
            let k = n / 3;
            assert_eq!(inst.insertions.len(), (k - 1) + 1 + 2 * (k - 1));
        }
    }

    #[test]
    fn recourse_is_quadratic_for_thirty() {
        let report = incremental_recourse(&triangle_adversary(30).unwrap()).unwrap();
        assert!(report.total_recourse as f64 >= 900.0 / 20.0, "{}", report.total_recourse);
    }
}
