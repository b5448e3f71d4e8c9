//! Closed-form counting against brute-force subset enumeration on the
//! explicit host graph.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use inducibility::counting::{
    count_with_apex, flipped_total, induced_count, induced_count_grouped, leading_term, FlipPair,
};
use inducibility::graph::{count_clique_unions, induced_count_general};
use inducibility::profile::turan_sizes;
use inducibility::scalar::rational_to_f64;
use inducibility::{AdjacencyGraph, MultipartitePartition, PatternSpec};

fn pattern() -> impl Strategy<Value = PatternSpec> {
    proptest::collection::vec(1u64..=4, 1..=4)
        .prop_filter("ell <= 6", |v| v.iter().sum::<u64>() <= 6)
        .prop_map(|v| PatternSpec::new(v).unwrap())
}

fn host() -> impl Strategy<Value = MultipartitePartition> {
    proptest::collection::vec(1u64..=6, 1..=6)
        .prop_filter("n <= 12", |v| v.iter().sum::<u64>() <= 12)
        .prop_map(|v| MultipartitePartition::new(v).unwrap())
}

fn brute(f: &PatternSpec, g: &AdjacencyGraph) -> BigInt {
    induced_count_general(f, g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_count_matches_subset_enumeration(f in pattern(), g in host()) {
        let (graph, _) = AdjacencyGraph::from_partition(&g).unwrap();
        prop_assert_eq!(induced_count(&f, &g), brute(&f, &graph));
    }

    #[test]
    fn grouped_count_matches_uniform(f in pattern(), g in host()) {
        prop_assert_eq!(induced_count_grouped(&f, &g).unwrap(), induced_count(&f, &g));
    }

    #[test]
    fn complement_counts_clique_unions(f in pattern(), g in host()) {
        let (graph, _) = AdjacencyGraph::from_partition(&g).unwrap();
        prop_assert_eq!(count_clique_unions(f.sizes(), &graph.complement()), induced_count(&f, &g));
    }

    #[test]
    fn flipped_total_matches_flipped_graph(f in pattern(), g in host(), i in 0usize..6, j in 0usize..6) {
        let k = g.k();
        let (i, j) = (i % k, j % k);
        let pair = if i == j { FlipPair::SamePartAdded(i) } else { FlipPair::CrossPartRemoved(i, j) };
        prop_assume!(!(i == j && g.parts()[i] < 2));
        let graph = AdjacencyGraph::flipped_partition(&g, pair).unwrap();
        prop_assert_eq!(flipped_total(&f, &g, pair).unwrap(), brute(&f, &graph));
    }

    #[test]
    fn apex_count_matches_extended_graph(f in pattern(), g in host(), mask in 0u32..64) {
        let apex: Vec<usize> = (0..g.k()).filter(|p| mask >> p & 1 == 1).collect();
        let (base, _) = AdjacencyGraph::from_partition(&g).unwrap();
        let extended = AdjacencyGraph::with_apex(&g, &apex).unwrap();
        let through = brute(&f, &extended) - brute(&f, &base);
        prop_assert_eq!(count_with_apex(&f, &g, &apex).unwrap(), through);
    }
}

#[test]
fn every_small_pattern_on_every_small_host() {
    // all partitions of ell <= 6 against all partitions of n <= 12
    fn partitions(n: u64) -> Vec<Vec<u64>> {
        fn rec(left: u64, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for p in (1..=cap.min(left)).rev() {
                cur.push(p);
                rec(left - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }
    let hosts: Vec<MultipartitePartition> =
        (1..=12).flat_map(partitions).map(|p| MultipartitePartition::new(p).unwrap()).collect();
    let graphs: Vec<AdjacencyGraph> = hosts.iter().map(|g| AdjacencyGraph::from_partition(g).unwrap().0).collect();
    for ell in 1..=6 {
        for sizes in partitions(ell) {
            let f = PatternSpec::new(sizes).unwrap();
            for (g, graph) in hosts.iter().zip(&graphs) {
                assert_eq!(induced_count(&f, g), brute(&f, graph), "{f} in {g}");
            }
        }
    }
}

#[test]
fn leading_term_approaches_turan_counts() {
    for (lit, m) in [("2,1", 2u64), ("2,2", 2), ("2,1,1", 5), ("3,2", 2)] {
        let f: PatternSpec = lit.parse().unwrap();
        let c = rational_to_f64(&leading_term(&f, m));
        let err = |n: u64| {
            let host = turan_sizes(m as usize, m * n).unwrap();
            let count = induced_count(&f, &host).to_f64().unwrap();
            (count / (n as f64).powi(f.ell() as i32) / c - 1.0).abs()
        };
        let (coarse, fine) = (err(50), err(500));
        assert!(fine < coarse, "{f}: {coarse} -> {fine}");
        assert!(fine < 0.02, "{f}: relative error {fine} at n = 500");
    }
}
