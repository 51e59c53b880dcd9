#![allow(dead_code)]

use proptest::prelude::*;
use robustiso::rational::ratio;
use robustiso::{Assignment, Graph};

pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::empty(n);
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                g.add_edge(u, v).unwrap();
            }
            bit += 1;
        }
    }
    g
}

pub fn arb_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
    (min_n..=max_n, any::<u64>()).prop_map(|(n, mask)| graph_from_mask(n, mask))
}

pub fn arb_pair(min_n: usize, max_n: usize) -> impl Strategy<Value = (Graph, Graph)> {
    (min_n..=max_n, any::<u64>(), any::<u64>()).prop_map(|(n, a, b)| (graph_from_mask(n, a), graph_from_mask(n, b)))
}

pub fn arb_perm(n: usize) -> impl Strategy<Value = Assignment> {
    Just((0..n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Assignment::new(v).unwrap())
}

/// Weighted graph with weights in {1/2, 1, 3/2, 2} on a random edge set.
pub fn arb_weighted(n: usize) -> impl Strategy<Value = Graph> {
    proptest::collection::vec(0u8..5, n * (n - 1) / 2).prop_map(move |codes| {
        let mut g = Graph::empty(n);
        let mut i = 0;
        for u in 0..n {
            for v in u + 1..n {
                if codes[i] > 0 {
                    g.add_weighted_edge(u, v, ratio(codes[i] as i64, 2)).unwrap();
                }
                i += 1;
            }
        }
        g
    })
}

/// Pair whose colour histograms agree: both use the same colour vector up to a shuffle.
pub fn arb_coloured_pair(min_n: usize, max_n: usize, colours: u32) -> impl Strategy<Value = (Graph, Graph)> {
    (min_n..=max_n).prop_flat_map(move |n| {
        (
            proptest::collection::vec(0..colours, n),
            arb_perm(n),
            any::<u64>(),
            any::<u64>(),
        )
            .prop_map(move |(cols, sigma, a, b)| {
                let h_cols: Vec<u32> = (0..n).map(|v| cols[sigma.inverse().get(v)]).collect();
                let g = graph_from_mask(n, a).with_colours(cols).unwrap();
                let h = graph_from_mask(n, b).with_colours(h_cols).unwrap();
                (g, h)
            })
    })
}
