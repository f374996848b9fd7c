use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kremoval::identity::{self, double_counting, expected_delta_q, squares_spread_check};
use kremoval::process::{run, RunConfig};
use kremoval::{CliqueIndex, Graph, VertexSet};

/// `K_n` minus the edges picked by `mask` bits.
fn graph_from(n: usize, mask: &[bool]) -> Graph {
    let mut g = Graph::new_complete(n).unwrap();
    let mut j = 0;
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if mask[j % mask.len()] {
                g.remove_edge(a, b).unwrap();
            }
            j += 1;
        }
    }
    g
}

fn small_graph() -> impl Strategy<Value = (Graph, usize)> {
    (5usize..=9, 3usize..=5, prop::collection::vec(prop::bool::weighted(0.2), 1..64))
        .prop_filter("k <= n", |(n, k, _)| k <= n)
        .prop_map(|(n, k, mask)| (graph_from(n, &mask), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn double_counting_holds((g, k) in small_graph()) {
        for m in 2..k {
            let d = double_counting(&g, k, m).unwrap();
            prop_assert!(d.holds(), "{:?}", d);
        }
    }

    #[test]
    fn expectation_two_ways((g, k) in small_graph()) {
        if g.count_k_cliques(k) > 0 {
            let e = expected_delta_q(&g, k).unwrap();
            prop_assert_eq!(e.exhaustive, e.formula);
        }
    }

    #[test]
    fn removal_delta_is_conserved((g, k) in small_graph()) {
        for u in g.enumerate_k_cliques(k).unwrap() {
            let delta = CliqueIndex::removal_delta(&g, &u, k);
            let observed = identity::observed_delta_q(&g, &u, k).unwrap();
            prop_assert_eq!(delta.total(), observed);
            prop_assert_eq!(delta.get(k), 1);
        }
    }

    #[test]
    fn samples_are_live_cliques((g, k) in small_graph(), seed in any::<u64>()) {
        let mut index = CliqueIndex::build(&g, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if index.is_empty() {
            prop_assert!(index.sample_uniform(&g, &mut rng).is_err());
        } else {
            for _ in 0..20 {
                let c = index.sample_uniform(&g, &mut rng).unwrap();
                prop_assert!(g.is_complete(&c));
            }
        }
    }

    #[test]
    fn squares_spread_never_fails(
        center in -1e3f64..1e3,
        eps in 0.0f64..10.0,
        offsets in prop::collection::vec(-1.0f64..=1.0, 1..50),
    ) {
        let values: Vec<f64> = offsets.iter().map(|o| center + o * eps).collect();
        prop_assert!(squares_spread_check(&values, eps).unwrap());
    }

    #[test]
    fn edge_list_round_trip((g, _) in small_graph()) {
        let text = g.to_edge_list();
        prop_assert_eq!(Graph::from_edge_list(g.n(), &text).unwrap(), g);
    }

    #[test]
    fn vertex_sets_sorted(v in prop::collection::btree_set(0u32..100, 0..10)) {
        let items: Vec<u32> = v.iter().rev().copied().collect();
        let s = VertexSet::new(items).unwrap();
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(s.len(), v.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_end_k_free(n in 6usize..=24, k in 3usize..=5, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let t = run(RunConfig::new(n, k, seed)).unwrap();
        prop_assert_eq!(t.invariant_violations, 0);
        prop_assert_eq!(t.last().q_k, 0);
        let m = t.hitting_time.unwrap();
        let pairs = (k * (k - 1) / 2) as u64;
        prop_assert_eq!(t.final_edge_count.unwrap(), (n * (n - 1) / 2) as u64 - pairs * m);
    }
}
