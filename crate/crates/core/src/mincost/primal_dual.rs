use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::graph::{Arc, Vertex};

use super::certificate::{verify_dual_certificate, DualPacking, DualSet};
use super::{MinCostError, Weight, WeightedDigraph};

/// Which arcs entering the grown set bound the next multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateRule {
    /// Arcs with tail in the subtree, plus the parent arc of the subtree root.
    #[default]
    Arc,
    /// Arcs with tail in the subtree or equal to the tail of the parent arc.
    /// Can stall when a second arc from that tail is already tight.
    Tail,
}

impl FromStr for CandidateRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arc" => Ok(Self::Arc),
            "tail" => Ok(Self::Tail),
            other => Err(format!("unknown candidate rule '{other}' (arc, tail)")),
        }
    }
}

impl fmt::Display for CandidateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Arc => "arc",
            Self::Tail => "tail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinCostSolution {
    /// Sorted by head.
    pub tree: Vec<Arc>,
    pub cost: Weight,
    pub packing: DualPacking,
    /// Number of tree improvements, each followed by a fresh sweep.
    pub restarts: usize,
}

/// A set found while growing, with the vertex whose parent arc it was grown for.
struct Found {
    members: Vec<Vertex>,
    owner: Vertex,
    multiplier: i64,
}

/// Minimum-cost arborescence with a dual packing proving optimality,
/// starting from the BFS tree of the root.
pub fn min_arborescence_with_certificate(
    g: &WeightedDigraph,
    rule: CandidateRule,
) -> Result<MinCostSolution, MinCostError> {
    g.check_spanning()?;
    let initial = bfs_tree(g);
    min_arborescence_from(g, &initial, rule)
}

/// As [`min_arborescence_with_certificate`] but from a given spanning arborescence.
pub fn min_arborescence_from(
    g: &WeightedDigraph,
    initial: &[Arc],
    rule: CandidateRule,
) -> Result<MinCostSolution, MinCostError> {
    g.check_spanning()?;
    if !g.is_spanning_arborescence(initial) {
        return Err(MinCostError::NotArborescence);
    }
    let mut parent: Vec<Option<usize>> = vec![None; g.n()];
    for &(t, h) in initial {
        parent[h] = g.arc_id(t, h);
    }
    let mut restarts = 0;
    loop {
        match sweep(g, &parent, rule)? {
            Sweep::Certified(found) => {
                let tree = tree_arcs(g, &parent);
                let cost = g.cost(&tree).expect("tree arcs come from the graph");
                let packing = DualPacking {
                    sets: found
                        .into_iter()
                        .map(|f| DualSet { vertices: f.members, multiplier: f.multiplier })
                        .collect(),
                };
                let report = verify_dual_certificate(g, &tree, &packing);
                if !report.is_valid() {
                    return Err(MinCostError::Certificate(report));
                }
                return Ok(MinCostSolution { tree, cost, packing, restarts });
            }
            Sweep::Improved(next) => {
                let before = g.cost(&tree_arcs(g, &parent)).expect("tree arcs come from the graph");
                let after_tree = tree_arcs(g, &next);
                if !g.is_spanning_arborescence(&after_tree) {
                    return Err(MinCostError::NotArborescence);
                }
                let after = g.cost(&after_tree).expect("tree arcs come from the graph");
                if after >= before {
                    return Err(MinCostError::NoImprovement { before, after });
                }
                parent = next;
                restarts += 1;
            }
        }
    }
}

enum Sweep {
    Certified(Vec<Found>),
    Improved(Vec<Option<usize>>),
}

fn bfs_tree(g: &WeightedDigraph) -> Vec<Arc> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (id, a) in g.arcs().iter().enumerate() {
        out[a.tail].push(id);
    }
    let mut seen = vec![false; g.n()];
    seen[g.root()] = true;
    let mut queue = VecDeque::from([g.root()]);
    let mut tree = Vec::new();
    while let Some(x) = queue.pop_front() {
        for &id in &out[x] {
            let h = g.arcs()[id].head;
            if !seen[h] {
                seen[h] = true;
                tree.push((x, h));
                queue.push_back(h);
            }
        }
    }
    tree
}

fn tree_arcs(g: &WeightedDigraph, parent: &[Option<usize>]) -> Vec<Arc> {
    let mut tree: Vec<Arc> = parent
        .iter()
        .flatten()
        .map(|&id| (g.arcs()[id].tail, g.arcs()[id].head))
        .collect();
    tree.sort_by_key(|&(t, h)| (h, t));
    tree
}

/// One bottom-up pass over the tree. Either every parent arc is made tight
/// without any arc going negative, or a cheaper tree is produced.
fn sweep(g: &WeightedDigraph, parent: &[Option<usize>], rule: CandidateRule) -> Result<Sweep, MinCostError> {
    let n = g.n();
    let arcs = g.arcs();
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some(id) = p {
            children[arcs[*id].tail].push(v);
        }
    }
    let mut order = vec![g.root()];
    let mut i = 0;
    while i < order.len() {
        order.extend_from_slice(&children[order[i]]);
        i += 1;
    }

    let mut reduced: Vec<i64> = arcs.iter().map(|a| a.weight as i64).collect();
    let mut found: Vec<Found> = Vec::new();
    let mut in_subtree = vec![usize::MAX; n];
    let mut in_set = vec![usize::MAX; n];
    let mut stamp = 0usize;

    for &v in order.iter().rev() {
        let Some(par) = parent[v] else { continue };
        while reduced[par] > 0 {
            stamp += 1;
            let mut subtree = vec![v];
            in_subtree[v] = stamp;
            let mut j = 0;
            while j < subtree.len() {
                for &c in &children[subtree[j]] {
                    in_subtree[c] = stamp;
                    subtree.push(c);
                }
                j += 1;
            }

            // Vertices of the subtree reaching v by tight arcs inside it.
            let mut set = vec![v];
            in_set[v] = stamp;
            let mut j = 0;
            while j < set.len() {
                for &id in g.in_arcs(set[j]) {
                    let t = arcs[id].tail;
                    if in_subtree[t] == stamp && in_set[t] != stamp && reduced[id] == 0 {
                        in_set[t] = stamp;
                        set.push(t);
                    }
                }
                j += 1;
            }

            let par_tail = arcs[par].tail;
            let mut m = i64::MAX;
            let mut entering = Vec::new();
            for &x in &set {
                for &id in g.in_arcs(x) {
                    let t = arcs[id].tail;
                    if in_set[t] == stamp {
                        continue;
                    }
                    entering.push(id);
                    let candidate = in_subtree[t] == stamp
                        || match rule {
                            CandidateRule::Arc => id == par,
                            CandidateRule::Tail => t == par_tail,
                        };
                    if candidate {
                        m = m.min(reduced[id]);
                    }
                }
            }
            if m <= 0 {
                return Err(MinCostError::Stalled { vertex: v });
            }
            for &id in &entering {
                reduced[id] -= m;
            }
            set.sort_unstable();
            found.push(Found { members: set, owner: v, multiplier: m });

            let worst = entering
                .iter()
                .copied()
                .filter(|&id| reduced[id] < 0)
                .min_by_key(|&id| (reduced[id], id));
            if let Some(id) = worst {
                let mut next = parent.to_vec();
                next[arcs[id].head] = Some(id);
                let top = found.len() - 1;
                reroot(g, &reduced, &found, top, arcs[id].head, &mut next)?;
                return Ok(Sweep::Improved(next));
            }
        }
    }
    found.retain(|f| f.multiplier > 0);
    Ok(Sweep::Certified(found))
}

/// Rebuilds the tree inside `found[top]` so that it hangs from `entry`,
/// following tight arcs between the maximal found sets nested inside and
/// recursing into each set the path passes through.
fn reroot(
    g: &WeightedDigraph,
    reduced: &[i64],
    found: &[Found],
    top: usize,
    entry: Vertex,
    parent: &mut [Option<usize>],
) -> Result<(), MinCostError> {
    let arcs = g.arcs();
    let outer = &found[top].members;
    let owner = found[top].owner;

    // Maximal earlier sets strictly inside this one; laminarity means the
    // largest ones are pairwise disjoint.
    let mut inner: Vec<usize> = (0..top)
        .filter(|&k| found[k].members.len() < outer.len() && is_subset(&found[k].members, outer))
        .collect();
    inner.sort_by_key(|&k| std::cmp::Reverse(found[k].members.len()));
    #[derive(Clone, Copy, PartialEq, Eq, Hash)]
    enum Node {
        Single(Vertex),
        Set(usize),
    }
    let mut node_of: HashMap<Vertex, Node> = outer.iter().map(|&x| (x, Node::Single(x))).collect();
    for &k in &inner {
        let k_node = Node::Set(k);
        if found[k].members.iter().any(|x| matches!(node_of[x], Node::Set(_))) {
            continue;
        }
        for x in &found[k].members {
            node_of.insert(*x, k_node);
        }
    }
    let members = |node: Node| -> Vec<Vertex> {
        match node {
            Node::Single(x) => vec![x],
            Node::Set(k) => found[k].members.clone(),
        }
    };

    let start = node_of[&entry];
    let goal = node_of[&owner];
    let mut next_arc: HashMap<Node, usize> = HashMap::new();
    let mut queue = VecDeque::from([goal]);
    let mut seen = HashMap::from([(goal, ())]);
    while let Some(node) = queue.pop_front() {
        if seen.contains_key(&start) {
            break;
        }
        let mut incoming: Vec<usize> = members(node).iter().flat_map(|&x| g.in_arcs(x).iter().copied()).collect();
        incoming.sort_unstable();
        for id in incoming {
            let Some(&from) = node_of.get(&arcs[id].tail) else { continue };
            if from != node && reduced[id] == 0 && !seen.contains_key(&from) {
                seen.insert(from, ());
                next_arc.insert(from, id);
                queue.push_back(from);
            }
        }
    }
    if !seen.contains_key(&start) {
        return Err(MinCostError::UpdateFailed { entry, vertex: owner });
    }

    let (mut node, mut node_entry) = (start, entry);
    loop {
        if let Node::Set(k) = node {
            reroot(g, reduced, found, k, node_entry, parent)?;
        }
        if node == goal {
            return Ok(());
        }
        let id = next_arc[&node];
        let h = arcs[id].head;
        parent[h] = Some(id);
        node = node_of[&h];
        node_entry = h;
    }
}

fn is_subset(small: &[Vertex], big: &[Vertex]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mincost::{brute_force_min_arborescence, chu_liu_edmonds};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn optimal_zero_tree_unchanged() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (1, 2, 0), (2, 0, 4)]).unwrap();
        let sol = min_arborescence_with_certificate(&g, CandidateRule::Arc).unwrap();
        assert_eq!(sol.tree, vec![(0, 1), (1, 2)]);
        assert_eq!(sol.cost, 0);
        assert!(sol.packing.sets.is_empty());
        assert_eq!(sol.restarts, 0);
    }

    #[test]
    fn three_vertex_example() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (0, 2, 5), (1, 2, 1)]).unwrap();
        let sol = min_arborescence_with_certificate(&g, CandidateRule::Arc).unwrap();
        assert_eq!(sol.tree, vec![(0, 1), (1, 2)]);
        assert_eq!(sol.cost, 1);
        assert_eq!(sol.packing.value(), 1);
        assert_eq!(sol.restarts, 1);
    }

    #[test]
    fn tail_rule_stalls_on_tight_sibling_arc() {
        // Root 0 has a tight arc into 2 that is not the parent arc of 1.
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 3), (1, 2, 0), (2, 1, 0), (0, 2, 0)]).unwrap();
        let start = [(0, 1), (1, 2)];
        let sol = min_arborescence_from(&g, &start, CandidateRule::Arc).unwrap();
        assert_eq!((sol.tree, sol.cost), (vec![(2, 1), (0, 2)], 0));
        assert_eq!(
            min_arborescence_from(&g, &start, CandidateRule::Tail),
            Err(MinCostError::Stalled { vertex: 1 })
        );
    }

    #[test]
    fn matches_oracles_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 400 {
            let n = rng.gen_range(2..=6);
            let mut arcs = Vec::new();
            for t in 0..n {
                for h in 0..n {
                    if t != h && rng.gen_bool(0.5) {
                        arcs.push((t, h, rng.gen_range(0..=9)));
                    }
                }
            }
            let g = WeightedDigraph::from_arcs(n, 0, &arcs).unwrap();
            if g.check_spanning().is_err() {
                continue;
            }
            let sol = min_arborescence_with_certificate(&g, CandidateRule::Arc).unwrap();
            assert_eq!(sol.cost, chu_liu_edmonds(&g).unwrap().1);
            assert_eq!(sol.cost, brute_force_min_arborescence(&g).unwrap().1);
            checked += 1;
        }
    }

    #[test]
    fn rejects_unreachable() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 1)]).unwrap();
        assert_eq!(
            min_arborescence_with_certificate(&g, CandidateRule::Arc),
            Err(MinCostError::Unreachable(vec![2]))
        );
    }
}
