mod common;

use common::*;
use proptest::prelude::*;
use robustiso::graph::{blowup, edit_distance_bruteforce, mixed_neighbourhood};
use robustiso::rational::{int, ratio};
use robustiso::wl::{
    colour_refinement, homogenising_set_coloured, homogenising_set_net, is_homogenising, k_wl_stable, robust_gi,
    wl_distinguishes, Answer, HomogenisingMethod,
};
use robustiso::Graph;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stable_histograms_are_isomorphism_invariant(g in arb_graph(1, 8), sigma in arb_perm(8), k in 1usize..4) {
        let n = g.n();
        let sigma = robustiso::Assignment::new(sigma.as_slice().iter().copied().filter(|&x| x < n).collect()).unwrap();
        let a = k_wl_stable(&g, k).unwrap();
        let b = k_wl_stable(&g.permuted(&sigma).unwrap(), k).unwrap();
        prop_assert_eq!(&a.histogram, &b.histogram);
        prop_assert_eq!(a.histogram.values().sum::<usize>(), n.pow(k as u32));
    }

    #[test]
    fn refinement_is_a_fixed_point(g in arb_graph(1, 10)) {
        let c = colour_refinement(&g, &[]).unwrap();
        for v in 0..g.n() {
            for w in 0..g.n() {
                if c.colour_of[v] == c.colour_of[w] {
                    let count = |x: usize| {
                        let mut by: std::collections::BTreeMap<u32, usize> = Default::default();
                        for u in g.neighbours(x).ones() {
                            *by.entry(c.colour_of[u]).or_default() += 1;
                        }
                        by
                    };
                    prop_assert_eq!(count(v), count(w));
                }
            }
        }
    }

    #[test]
    fn higher_dimensions_distinguish_more((g, h) in arb_pair(2, 7)) {
        for k in 1..=2 {
            if wl_distinguishes(&g, &h, k).unwrap() {
                prop_assert!(wl_distinguishes(&g, &h, k + 1).unwrap());
            }
        }
    }

    #[test]
    fn indistinguishable_pairs_are_close((g, h) in arb_coloured_pair(2, 7, 3), eps_num in 1i64..4) {
        let eps = ratio(eps_num, 4);
        let n = g.n() as i64;
        let s = homogenising_set_coloured(&g, &(&eps / int(2))).unwrap();
        let k = s.vertices.len() + 1;
        if !wl_distinguishes(&g, &h, k).unwrap() {
            let (delta, _) = edit_distance_bruteforce(&g, &h).unwrap();
            prop_assert!(delta <= eps * int(n * n));
        }
    }

    #[test]
    fn coloured_greedy_is_small_and_splits(g in arb_graph(2, 10), cols in proptest::collection::vec(0u32..3, 10), eps_num in 1i64..5) {
        let n = g.n();
        let g = g.with_colours(cols[..n].to_vec()).unwrap();
        let eps = ratio(eps_num, 8);
        let set = homogenising_set_coloured(&g, &eps).unwrap();
        let s = g.max_colour_class() as i64;
        prop_assert!(int(set.vertices.len() as i64) <= int(s - 1) / &eps);
        prop_assert!(is_homogenising(&g, &set.vertices, &eps).unwrap());
        prop_assert!(set.class_counts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn net_individualisation_separates_mixed_neighbourhoods(g in arb_graph(2, 10), eps_num in 1i64..5) {
        let set = homogenising_set_net(&g, &ratio(eps_num, 8)).unwrap();
        let c = colour_refinement(&g, &set.vertices).unwrap();
        for v in 0..g.n() {
            for w in v + 1..g.n() {
                if c.colour_of[v] == c.colour_of[w] {
                    let m = mixed_neighbourhood(&g, v, w).unwrap();
                    prop_assert!(set.vertices.iter().all(|&x| !m.contains(x)));
                }
            }
        }
    }

    #[test]
    fn robust_gi_accepts_relabellings(g in arb_graph(2, 7), sigma in arb_perm(7)) {
        let n = g.n();
        let sigma = robustiso::Assignment::new(sigma.as_slice().iter().copied().filter(|&x| x < n).collect()).unwrap();
        let h = g.permuted(&sigma).unwrap();
        for strategy in [HomogenisingMethod::Net, HomogenisingMethod::ColouredGreedy] {
            prop_assert_eq!(robust_gi(&g, &h, &ratio(1, 2), strategy).unwrap().answer, Answer::Isomorphic);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn blowups_preserve_wl_verdicts((g, h) in arb_coloured_pair(2, 4, 2)) {
        let (g2, h2) = (blowup(&g, 2).unwrap(), blowup(&h, 2).unwrap());
        prop_assert_eq!(wl_distinguishes(&g, &h, 2).unwrap(), wl_distinguishes(&g2, &h2, 2).unwrap());
    }
}

#[test]
fn regular_pair_needs_two_dimensions() {
    let c6 = Graph::cycle(6);
    let two_c3 = Graph::cycle(3).disjoint_union(&Graph::cycle(3));
    assert!(!wl_distinguishes(&c6, &two_c3, 1).unwrap());
    assert!(wl_distinguishes(&c6, &two_c3, 2).unwrap());
    let cert = robust_gi(&c6, &two_c3, &ratio(1, 10), HomogenisingMethod::ColouredGreedy).unwrap();
    assert_eq!(cert.answer, Answer::Far);
}
