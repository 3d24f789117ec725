use arbrec::graph::{Arc, Digraph};
use arbrec::oracle::{brute_force_max_forest, max_forest_cardinality};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_digraph(max_n: usize) -> impl Strategy<Value = (usize, Vec<Arc>)> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<Arc> = (0..n).flat_map(|t| (0..n).map(move |h| (t, h))).filter(|(t, h)| t != h).collect();
        (Just(n), proptest::sample::subsequence(pairs.clone(), 0..=pairs.len()))
    })
}

proptest! {
    #[test]
    fn reachability_is_dual((n, arcs) in arb_digraph(8)) {
        let g = Digraph::from_arcs(n, &arcs).unwrap();
        for u in 0..n {
            let out = g.reachable_set(u).unwrap();
            for v in 0..n {
                let inc = g.in_component(v).unwrap();
                prop_assert_eq!(out.contains(&v), inc.contains(&u));
            }
        }
    }

    #[test]
    fn scc_is_out_meet_in((n, arcs) in arb_digraph(8)) {
        let g = Digraph::from_arcs(n, &arcs).unwrap();
        let scc = g.scc();
        for v in 0..n {
            let out = g.reachable_set(v).unwrap();
            let both: Vec<usize> = g.in_component(v).unwrap().into_iter().filter(|x| out.contains(x)).collect();
            prop_assert_eq!(&scc.components[scc.component_id[v]], &both);
        }
    }

    #[test]
    fn condensation_is_acyclic((n, arcs) in arb_digraph(8)) {
        let g = Digraph::from_arcs(n, &arcs).unwrap();
        let scc = g.scc();
        let c = scc.components.len();
        let cg = Digraph::from_arcs(c, &scc.condensation_arcs).unwrap();
        prop_assert_eq!(cg.scc().components.len(), c);
        let sources = (0..c).filter(|&k| cg.in_neighbors(k).is_empty()).count();
        prop_assert_eq!(sources, scc.source_components.len());
    }
}

#[test]
fn cardinality_oracle_matches_brute_force_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=6);
        let p: f64 = rng.gen_range(0.0..0.6);
        let arcs: Vec<Arc> = (0..n)
            .flat_map(|t| (0..n).map(move |h| (t, h)))
            .filter(|&(t, h)| t != h)
            .filter(|_| rng.gen_bool(p))
            .collect();
        let g = Digraph::from_arcs(n, &arcs).unwrap();
        let (size, forest) = brute_force_max_forest(&g).unwrap();
        assert_eq!(size, max_forest_cardinality(&g), "n={n} arcs={arcs:?}");
        assert_eq!(forest.len(), size);
    }
}
