use crate::graph::Arc;

use super::{MinCostError, Weight, WeightedDigraph};

/// Minimum-cost spanning arborescence by cycle contraction. Ties between
/// equally cheap entering arcs go to the earlier-inserted arc.
pub fn chu_liu_edmonds(g: &WeightedDigraph) -> Result<(Vec<Arc>, Weight), MinCostError> {
    g.check_spanning()?;
    let edges: Vec<(usize, usize, i64)> = g
        .arcs()
        .iter()
        .map(|a| (a.tail, a.head, a.weight as i64))
        .collect();
    let chosen = contract(g.n(), g.root(), &edges).ok_or_else(|| MinCostError::Unreachable(Vec::new()))?;
    let mut tree: Vec<Arc> = chosen.iter().map(|&i| (edges[i].0, edges[i].1)).collect();
    tree.sort_by_key(|&(t, h)| (h, t));
    let cost = g.cost(&tree).expect("tree arcs come from the graph");
    Ok((tree, cost))
}

/// Returns indices into `edges` of a minimum arborescence rooted at `root`.
fn contract(n: usize, root: usize, edges: &[(usize, usize, i64)]) -> Option<Vec<usize>> {
    let mut best_in: Vec<Option<usize>> = vec![None; n];
    for (i, &(t, h, w)) in edges.iter().enumerate() {
        if t == h || h == root {
            continue;
        }
        match best_in[h] {
            Some(j) if edges[j].2 <= w => {}
            _ => best_in[h] = Some(i),
        }
    }
    if (0..n).any(|v| v != root && best_in[v].is_none()) {
        return None;
    }

    // Find cycles of the best-in functional graph.
    const NONE: usize = usize::MAX;
    let mut cycle_of = vec![NONE; n];
    let mut state = vec![NONE; n];
    let mut cycles = 0;
    for start in 0..n {
        let mut x = start;
        while x != root && state[x] == NONE {
            state[x] = start;
            x = edges[best_in[x].expect("checked above")].0;
        }
        if x != root && state[x] == start && cycle_of[x] == NONE {
            let mut y = x;
            loop {
                cycle_of[y] = cycles;
                y = edges[best_in[y].expect("checked above")].0;
                if y == x {
                    break;
                }
            }
            cycles += 1;
        }
    }
    if cycles == 0 {
        return Some((0..n).filter_map(|v| best_in[v]).collect());
    }

    let mut comp = vec![NONE; n];
    let mut count = cycles;
    for v in 0..n {
        comp[v] = if cycle_of[v] != NONE {
            cycle_of[v]
        } else {
            count += 1;
            count - 1
        };
    }
    let mut sub_edges = Vec::new();
    let mut origin = Vec::new();
    for (i, &(t, h, w)) in edges.iter().enumerate() {
        let (ct, ch) = (comp[t], comp[h]);
        if ct == ch {
            continue;
        }
        let adjusted = if cycle_of[h] != NONE {
            w - edges[best_in[h].expect("cycle vertex has best arc")].2
        } else {
            w
        };
        sub_edges.push((ct, ch, adjusted));
        origin.push(i);
    }
    let sub = contract(count, comp[root], &sub_edges)?;

    let mut entered = vec![false; n];
    let mut chosen: Vec<usize> = sub
        .into_iter()
        .map(|j| {
            let i = origin[j];
            entered[edges[i].1] = true;
            i
        })
        .collect();
    for v in 0..n {
        if cycle_of[v] != NONE && !entered[v] {
            chosen.push(best_in[v].expect("cycle vertex has best arc"));
        }
    }
    Some(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mincost::brute_force_min_arborescence;

    #[test]
    fn zero_path() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (1, 2, 0)]).unwrap();
        assert_eq!(chu_liu_edmonds(&g).unwrap(), (vec![(0, 1), (1, 2)], 0));
    }

    #[test]
    fn forced_arc() {
        let g = WeightedDigraph::from_arcs(2, 0, &[(0, 1, 5), (1, 0, 7)]).unwrap();
        assert_eq!(chu_liu_edmonds(&g).unwrap().1, 5);
    }

    #[test]
    fn contracts_a_cycle() {
        // 1 <-> 2 cheap cycle, entered from the root at either vertex.
        let g = WeightedDigraph::from_arcs(
            4,
            0,
            &[(0, 1, 10), (0, 2, 8), (1, 2, 1), (2, 1, 1), (2, 3, 3), (1, 3, 4), (0, 3, 9)],
        )
        .unwrap();
        let (tree, cost) = chu_liu_edmonds(&g).unwrap();
        assert_eq!(cost, brute_force_min_arborescence(&g).unwrap().1);
        assert_eq!(cost, 12);
        assert!(g.is_spanning_arborescence(&tree));
    }

    #[test]
    fn unreachable_is_rejected() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 1), (2, 1, 1)]).unwrap();
        assert_eq!(chu_liu_edmonds(&g), Err(MinCostError::Unreachable(vec![2])));
    }
}
