//! Colour refinement, k-dimensional Weisfeiler-Leman, ε-homogenising sets and
//! the robust isomorphism test built on them.
//!
//! Colour ids are canonical: each round collects every signature of every
//! graph refined together, sorts them, and renames them to dense integers, so
//! ids can be compared across graphs without hashing.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{are_isomorphic, mixed_neighbourhood, Graph};
use crate::rational::{as_string, int, Rational};
use crate::setsystem::{epsilon_net_greedy, mixed_system};

/// Default cap on `n^k` for k-WL.
pub const DEFAULT_WL_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableColouring {
    pub k: usize,
    /// Colour of each k-tuple, indexed by `Σ v_i n^i`.
    pub colour_of: Vec<u32>,
    pub histogram: BTreeMap<u32, usize>,
    pub rounds: usize,
}

impl StableColouring {
    fn new(k: usize, colour_of: Vec<u32>, rounds: usize) -> Self {
        let mut histogram = BTreeMap::new();
        for &c in &colour_of {
            *histogram.entry(c).or_insert(0) += 1;
        }
        StableColouring {
            k,
            colour_of,
            histogram,
            rounds,
        }
    }

    pub fn class_count(&self) -> usize {
        self.histogram.len()
    }

    /// Vertex classes of a 1-dimensional colouring, ordered by colour.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut by_colour: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (v, &c) in self.colour_of.iter().enumerate() {
            by_colour.entry(c).or_default().push(v);
        }
        by_colour.into_values().collect()
    }
}

/// Renames signatures to dense ids in sorted order; returns the class count.
fn canonical_ids<S: Ord + Clone>(sigs: &[Vec<S>]) -> (Vec<Vec<u32>>, usize) {
    let mut distinct: Vec<&S> = sigs.iter().flatten().collect();
    distinct.sort_unstable();
    distinct.dedup();
    let out = sigs
        .iter()
        .map(|g| {
            g.iter()
                .map(|s| distinct.binary_search(&s).expect("signature present") as u32)
                .collect()
        })
        .collect();
    (out, distinct.len())
}

/// Canonical ids for edge weights across all graphs; 0 means "no edge".
fn weight_ids(graphs: &[&Graph]) -> Vec<HashMap<(usize, usize), u32>> {
    let distinct: BTreeSet<Rational> = graphs
        .iter()
        .flat_map(|g| g.edges().into_iter().map(move |(u, v)| g.weight(u, v)))
        .collect();
    let rank: BTreeMap<Rational, u32> = distinct.into_iter().zip(1..).collect();
    graphs
        .iter()
        .map(|g| {
            g.edges()
                .into_iter()
                .map(|(u, v)| ((u, v), rank[&g.weight(u, v)]))
                .collect()
        })
        .collect()
}

fn edge_id(ids: &HashMap<(usize, usize), u32>, u: usize, v: usize) -> u32 {
    ids.get(&(u.min(v), u.max(v))).copied().unwrap_or(0)
}

/// Previous colour and sorted (weight id, neighbour colour) multiset.
type Signature = (u32, Vec<(u32, u32)>);

/// Joint colour refinement; each graph comes with its individualised vertices.
pub fn colour_refinement_joint(inputs: &[(&Graph, &[usize])]) -> Result<Vec<StableColouring>> {
    let graphs: Vec<&Graph> = inputs.iter().map(|i| i.0).collect();
    let mut initial = Vec::with_capacity(inputs.len());
    for (g, s) in inputs {
        let mut order: Vec<usize> = s.to_vec();
        order.sort_unstable();
        order.dedup();
        if let Some(&bad) = order.iter().find(|&&v| v >= g.n()) {
            return Err(Error::VertexOutOfRange { vertex: bad, n: g.n() });
        }
        let mut indiv = vec![0u32; g.n()];
        for (i, &v) in order.iter().enumerate() {
            indiv[v] = i as u32 + 1;
        }
        initial.push((0..g.n()).map(|v| (g.colour(v), indiv[v])).collect::<Vec<_>>());
    }
    let (mut colours, mut count) = canonical_ids(&initial);
    let weights = weight_ids(&graphs);
    let mut rounds = 0;
    loop {
        let sigs: Vec<Vec<Signature>> = graphs
            .iter()
            .zip(&colours)
            .zip(&weights)
            .map(|((g, col), w)| {
                (0..g.n())
                    .map(|v| {
                        let mut nb: Vec<(u32, u32)> =
                            g.neighbours(v).ones().map(|u| (edge_id(w, u, v), col[u])).collect();
                        nb.sort_unstable();
                        (col[v], nb)
                    })
                    .collect()
            })
            .collect();
        let (next, next_count) = canonical_ids(&sigs);
        rounds += 1;
        if next_count == count {
            colours = next;
            break;
        }
        colours = next;
        count = next_count;
    }
    Ok(colours
        .into_iter()
        .map(|c| StableColouring::new(1, c, rounds))
        .collect())
}

/// 1-WL fixed point with the vertices of `individualised` given unique colours.
pub fn colour_refinement(g: &Graph, individualised: &[usize]) -> Result<StableColouring> {
    Ok(colour_refinement_joint(&[(g, individualised)])?.remove(0))
}

fn tuple_count(n: usize, k: usize, budget: u128) -> Result<usize> {
    let needed = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::budget(format!("{k}-WL tuples"), needed, budget));
    }
    Ok(needed as usize)
}

fn decode(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let v = idx % n;
            idx /= n;
            v
        })
        .collect()
}

/// Joint k-WL refinement (`k >= 2`) of graphs of a common order.
fn k_wl_joint(graphs: &[&Graph], k: usize, budget: u128) -> Result<Vec<StableColouring>> {
    let n = graphs[0].n();
    let total = tuple_count(n, k, budget)?;
    let weights = weight_ids(graphs);
    let atomic: Vec<Vec<Vec<u32>>> = graphs
        .iter()
        .zip(&weights)
        .map(|(g, w)| {
            (0..total)
                .map(|idx| {
                    let t = decode(idx, n, k);
                    let mut ty: Vec<u32> = t.iter().map(|&v| g.colour(v)).collect();
                    for i in 0..k {
                        for j in i + 1..k {
                            ty.push(u32::from(t[i] == t[j]));
                            ty.push(edge_id(w, t[i], t[j]));
                        }
                    }
                    ty
                })
                .collect()
        })
        .collect();
    let (mut colours, mut count) = canonical_ids(&atomic);
    drop(atomic);
    let powers: Vec<usize> = (0..k).map(|i| n.pow(i as u32)).collect();
    let mut rounds = 0;
    loop {
        // Rank of each (tuple, w) entry: the colours of v[w/1], ..., v[w/k].
        let ranks = if k <= 4 {
            neighbour_ranks(&colours, total, n, |col, idx, w| {
                let t = decode(idx, n, k);
                (0..k).fold(0u128, |acc, i| {
                    acc << 32 | col[idx - t[i] * powers[i] + w * powers[i]] as u128
                })
            })
        } else {
            neighbour_ranks(&colours, total, n, |col, idx, w| {
                let t = decode(idx, n, k);
                (0..k)
                    .map(|i| col[idx - t[i] * powers[i] + w * powers[i]])
                    .collect::<Vec<u32>>()
            })
        };
        let sigs: Vec<Vec<(u32, Vec<u32>)>> = ranks
            .iter()
            .zip(&colours)
            .map(|(r, col)| {
                (0..total)
                    .map(|idx| {
                        let mut ms = r[idx * n..(idx + 1) * n].to_vec();
                        ms.sort_unstable();
                        (col[idx], ms)
                    })
                    .collect()
            })
            .collect();
        let (next, next_count) = canonical_ids(&sigs);
        rounds += 1;
        colours = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    Ok(colours
        .into_iter()
        .map(|c| StableColouring::new(k, c, rounds))
        .collect())
}

fn neighbour_ranks<K: Ord + Clone>(
    colours: &[Vec<u32>],
    total: usize,
    n: usize,
    key: impl Fn(&[u32], usize, usize) -> K,
) -> Vec<Vec<u32>> {
    let keys: Vec<Vec<K>> = colours
        .iter()
        .map(|col| {
            (0..total)
                .flat_map(|idx| (0..n).map(move |w| (idx, w)))
                .map(|(idx, w)| key(col, idx, w))
                .collect()
        })
        .collect();
    canonical_ids(&keys).0
}

pub fn k_wl_stable(g: &Graph, k: usize) -> Result<StableColouring> {
    k_wl_stable_budgeted(g, k, DEFAULT_WL_BUDGET)
}

pub fn k_wl_stable_budgeted(g: &Graph, k: usize, budget: u128) -> Result<StableColouring> {
    match k {
        0 => Err(Error::invalid("k must be at least 1")),
        1 => colour_refinement(g, &[]),
        _ if g.n() == 0 => Ok(StableColouring::new(k, Vec::new(), 0)),
        _ => Ok(k_wl_joint(&[g], k, budget)?.remove(0)),
    }
}

/// Jointly refined k-stable colourings of two graphs of equal order.
pub fn k_wl_pair(g: &Graph, h: &Graph, k: usize, budget: u128) -> Result<(StableColouring, StableColouring)> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    let mut both = match k {
        0 => return Err(Error::invalid("k must be at least 1")),
        1 => colour_refinement_joint(&[(g, &[]), (h, &[])])?,
        _ if g.n() == 0 => vec![StableColouring::new(k, Vec::new(), 0); 2],
        _ => k_wl_joint(&[g, h], k, budget)?,
    };
    let second = both.pop().expect("two colourings");
    Ok((both.pop().expect("two colourings"), second))
}

/// Smallest canonical colour with different multiplicities, if any.
pub fn distinguishing_colour(a: &StableColouring, b: &StableColouring) -> Option<u32> {
    let keys: BTreeSet<u32> = a.histogram.keys().chain(b.histogram.keys()).copied().collect();
    keys.into_iter()
        .find(|c| a.histogram.get(c).copied().unwrap_or(0) != b.histogram.get(c).copied().unwrap_or(0))
}

pub fn wl_distinguishes(g: &Graph, h: &Graph, k: usize) -> Result<bool> {
    wl_distinguishes_budgeted(g, h, k, DEFAULT_WL_BUDGET)
}

/// For `k >= n` every tuple covering all vertices carries the full graph in
/// its atomic type, so k-WL is exactly an isomorphism test there; that case is
/// answered by isomorphism search instead of materialising `n^k` tuples.
pub fn wl_distinguishes_budgeted(g: &Graph, h: &Graph, k: usize, budget: u128) -> Result<bool> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k >= 2 && k >= g.n() {
        return Ok(!are_isomorphic(g, h)?);
    }
    let (a, b) = k_wl_pair(g, h, k, budget)?;
    Ok(a.histogram != b.histogram)
}

/// Whether vertices with equal `γ^S` colour have `|M_G(v, w)| <= eps n`.
pub fn is_homogenising(g: &Graph, s: &[usize], eps: &Rational) -> Result<bool> {
    let gamma = colour_refinement(g, s)?;
    Ok(first_violation(g, &gamma, eps).is_none())
}

/// Lexicographically smallest `(v, w)`, `v < w`, with equal colours and a large mixed neighbourhood.
fn first_violation(g: &Graph, gamma: &StableColouring, eps: &Rational) -> Option<(usize, usize)> {
    let limit = eps * int(g.n() as i64);
    for v in 0..g.n() {
        for w in v + 1..g.n() {
            if gamma.colour_of[v] == gamma.colour_of[w] {
                let size = mixed_neighbourhood(g, v, w).expect("in range").count_ones(..);
                if int(size as i64) > limit {
                    return Some((v, w));
                }
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomogenisingMethod {
    Net,
    ColouredGreedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogenisingSet {
    pub vertices: Vec<usize>,
    #[serde(with = "as_string")]
    pub eps: Rational,
    pub method: HomogenisingMethod,
    /// Number of `γ^S` classes before the first and after each added vertex.
    pub class_counts: Vec<usize>,
}

/// A greedy ε-net of the mixed neighbourhood system.
pub fn homogenising_set_net(g: &Graph, eps: &Rational) -> Result<HomogenisingSet> {
    if eps <= &int(0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let capped = eps.clone().min(int(1));
    let vertices = epsilon_net_greedy(&mixed_system(g), &capped)?;
    if !is_homogenising(g, &vertices, eps)? {
        return Err(Error::Internal("greedy net is not homogenising".into()));
    }
    let class_counts = vec![colour_refinement(g, &vertices)?.class_count()];
    Ok(HomogenisingSet {
        vertices,
        eps: eps.clone(),
        method: HomogenisingMethod::Net,
        class_counts,
    })
}

/// Repeatedly individualises `w` for the smallest violating pair `(v, w)`.
pub fn homogenising_set_coloured(g: &Graph, eps: &Rational) -> Result<HomogenisingSet> {
    if eps <= &int(0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let mut vertices = Vec::new();
    let mut gamma = colour_refinement(g, &vertices)?;
    let mut class_counts = vec![gamma.class_count()];
    while let Some((_, w)) = first_violation(g, &gamma, eps) {
        if vertices.len() >= g.n() {
            return Err(Error::Internal("homogenising loop did not terminate".into()));
        }
        vertices.push(w);
        gamma = colour_refinement(g, &vertices)?;
        class_counts.push(gamma.class_count());
    }
    Ok(HomogenisingSet {
        vertices,
        eps: eps.clone(),
        method: HomogenisingMethod::ColouredGreedy,
        class_counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Isomorphic,
    Far,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub answer: Answer,
    #[serde(with = "as_string")]
    pub eps: Rational,
    pub strategy: HomogenisingMethod,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinguishing_colour: Option<u32>,
    /// SHA-256 of both stable histograms, or of the isomorphism verdict when `k >= n`.
    pub histograms_digest: String,
}

/// Individualisation-based test: builds an `eps/3`-homogenising set `S` in
/// `G` and answers `Far` iff `(|S| + 1)`-WL distinguishes `G` and `H`.
pub fn robust_gi(g: &Graph, h: &Graph, eps: &Rational, strategy: HomogenisingMethod) -> Result<Certificate> {
    robust_gi_budgeted(g, h, eps, strategy, DEFAULT_WL_BUDGET)
}

pub fn robust_gi_budgeted(
    g: &Graph,
    h: &Graph,
    eps: &Rational,
    strategy: HomogenisingMethod,
    budget: u128,
) -> Result<Certificate> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    let third = eps / int(3);
    let set = match strategy {
        HomogenisingMethod::Net => homogenising_set_net(g, &third)?,
        HomogenisingMethod::ColouredGreedy => homogenising_set_coloured(g, &third)?,
    };
    let k = set.vertices.len() + 1;
    let (far, distinguishing_colour, digest_input) = if k >= 2 && k >= g.n() {
        let iso = are_isomorphic(g, h)?;
        (!iso, None, format!("isomorphic:{iso}"))
    } else {
        let (a, b) = k_wl_pair(g, h, k, budget)?;
        let colour = distinguishing_colour(&a, &b);
        let text = serde_json::to_string(&(&a.histogram, &b.histogram))?;
        (colour.is_some(), colour, text)
    };
    let digest = Sha256::digest(digest_input.as_bytes());
    Ok(Certificate {
        answer: if far { Answer::Far } else { Answer::Isomorphic },
        eps: eps.clone(),
        strategy,
        s: set.vertices,
        k,
        distinguishing_colour,
        histograms_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Assignment;
    use crate::rational::ratio;

    fn classes(g: &Graph, s: &[usize]) -> Vec<Vec<usize>> {
        let mut c = colour_refinement(g, s).unwrap().classes();
        c.sort();
        c
    }

    #[test]
    fn refinement_examples() {
        assert_eq!(classes(&Graph::empty(4), &[]), vec![vec![0, 1, 2, 3]]);
        assert_eq!(classes(&Graph::cycle(6), &[]), vec![(0..6).collect::<Vec<_>>()]);
        assert_eq!(classes(&Graph::path(3), &[]), vec![vec![0, 2], vec![1]]);
        assert_eq!(classes(&Graph::path(3), &[0]), vec![vec![0], vec![1], vec![2]]);
        assert!(colour_refinement(&Graph::path(3), &[3]).is_err());
    }

    #[test]
    fn k_wl_examples() {
        let k1 = k_wl_stable(&Graph::path(3), 1).unwrap();
        assert_eq!(k1.classes(), vec![vec![0, 2], vec![1]]);
        let k2 = k_wl_stable(&Graph::complete(3), 2).unwrap();
        assert_eq!(k2.class_count(), 2);
        assert_eq!(
            k2.histogram.values().copied().collect::<BTreeSet<_>>(),
            BTreeSet::from([3, 6])
        );
        assert_eq!(k2.colour_of.len(), 9);
        assert_eq!(k_wl_stable(&Graph::empty(5), 1).unwrap().class_count(), 1);
        assert!(matches!(
            k_wl_stable_budgeted(&Graph::empty(20), 3, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn distinguishing_examples() {
        let c5 = Graph::cycle(5);
        let relabelled = c5.permuted(&Assignment::new(vec![2, 4, 1, 0, 3]).unwrap()).unwrap();
        for k in 1..=3 {
            assert!(!wl_distinguishes(&c5, &relabelled, k).unwrap());
        }
        let c6 = Graph::cycle(6);
        let two_triangles = Graph::complete(3).disjoint_union(&Graph::complete(3));
        assert!(!wl_distinguishes(&c6, &two_triangles, 1).unwrap());
        assert!(wl_distinguishes(&c6, &two_triangles, 2).unwrap());
        assert!(wl_distinguishes(&c5, &Graph::cycle(6), 1).is_err());
    }

    #[test]
    fn full_width_shortcut_matches_genuine_run() {
        let pairs = [
            (Graph::path(4), Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()),
            (Graph::cycle(4), Graph::path(4)),
            (
                Graph::path(4),
                Graph::path(4).permuted(&Assignment::reversal(4)).unwrap(),
            ),
        ];
        for (g, h) in pairs {
            let (a, b) = k_wl_pair(&g, &h, 4, DEFAULT_WL_BUDGET).unwrap();
            assert_eq!(a.histogram != b.histogram, wl_distinguishes(&g, &h, 4).unwrap());
        }
    }

    #[test]
    fn homogenising_examples() {
        let c6 = Graph::cycle(6);
        assert!(is_homogenising(&c6, &(0..6).collect::<Vec<_>>(), &ratio(1, 100)).unwrap());
        assert!(is_homogenising(&Graph::empty(5), &[], &ratio(1, 100)).unwrap());
        let star = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        assert!(is_homogenising(&star, &[], &ratio(1, 10)).unwrap());
        assert!(!is_homogenising(&c6, &[], &ratio(1, 2)).unwrap());

        assert!(homogenising_set_net(&Graph::empty(4), &ratio(1, 2))
            .unwrap()
            .vertices
            .is_empty());
        let k4 = homogenising_set_net(&Graph::complete(4), &ratio(2, 5)).unwrap();
        assert_eq!(k4.vertices.len(), 3);
        let net = homogenising_set_net(&c6, &ratio(1, 2)).unwrap();
        assert!(is_homogenising(&c6, &net.vertices, &ratio(1, 2)).unwrap());
    }

    #[test]
    fn coloured_greedy_examples() {
        let discrete = Graph::cycle(5).with_colours(vec![0, 1, 2, 3, 4]).unwrap();
        assert!(homogenising_set_coloured(&discrete, &ratio(1, 2))
            .unwrap()
            .vertices
            .is_empty());
        let paired = Graph::cycle(6).with_colours(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let eps = ratio(1, 3);
        let set = homogenising_set_coloured(&paired, &eps).unwrap();
        assert!(int(set.vertices.len() as i64) <= int(1) / eps.clone());
        assert!(is_homogenising(&paired, &set.vertices, &eps).unwrap());
        assert!(set.class_counts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn robust_gi_examples() {
        let c5 = Graph::cycle(5);
        let relabelled = c5.permuted(&Assignment::new(vec![1, 3, 0, 4, 2]).unwrap()).unwrap();
        let cert = robust_gi(&c5, &relabelled, &ratio(1, 2), HomogenisingMethod::Net).unwrap();
        assert_eq!(cert.answer, Answer::Isomorphic);

        let c6 = Graph::cycle(6);
        let two_triangles = Graph::complete(3).disjoint_union(&Graph::complete(3));
        let cert = robust_gi(&c6, &two_triangles, &ratio(1, 10), HomogenisingMethod::Net).unwrap();
        assert!(cert.k >= 2);
        assert_eq!(cert.answer, Answer::Far);
        let json = serde_json::to_value(&cert).unwrap();
        assert_eq!(json["answer"], "far");
        assert_eq!(json["eps"], "1/10");
        assert_eq!(json["histograms_digest"].as_str().unwrap().len(), 64);
    }
}
