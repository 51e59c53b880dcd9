//! Simple undirected graphs with optional exact weights and vertex colours,
//! plus the edit-cost machinery built directly on them.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, int, scaled_integer, Rational};

/// Default cap on the order accepted by the exhaustive edit-distance search.
pub const DEFAULT_BRUTEFORCE_CAP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<FixedBitSet>,
    /// Keyed by `(min, max)`. Present only for weighted graphs.
    weights: Option<BTreeMap<(usize, usize), Rational>>,
    colours: Option<Vec<u32>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![FixedBitSet::with_capacity(n); n],
            weights: None,
            colours: None,
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(u, v);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for v in 1..n {
            g.insert_edge(v - 1, v);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::path(n);
        if n >= 3 {
            g.insert_edge(0, n - 1);
        }
        g
    }

    /// Disjoint union, second graph shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let mut g = Graph::empty(self.n + other.n);
        for (u, v) in self.edges() {
            g.insert_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.insert_edge(u + self.n, v + self.n);
        }
        if self.is_weighted() || other.is_weighted() {
            let mut w = BTreeMap::new();
            for (u, v) in self.edges() {
                w.insert((u, v), self.weight(u, v));
            }
            for (u, v) in other.edges() {
                w.insert((u + self.n, v + self.n), other.weight(u, v));
            }
            g.weights = Some(w);
        }
        if self.is_coloured() || other.is_coloured() {
            let mut c: Vec<u32> = (0..self.n).map(|v| self.colour(v)).collect();
            c.extend((0..other.n).map(|v| other.colour(v)));
            g.colours = Some(c);
        }
        g
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        Ok(())
    }

    fn insert_edge(&mut self, u: usize, v: usize) {
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    fn check_new_edge(&self, u: usize, v: usize) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::invalid(format!("duplicate edge {u} {v}")));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_new_edge(u, v)?;
        self.insert_edge(u, v);
        if let Some(w) = self.weights.as_mut() {
            w.insert(key(u, v), int(1));
        }
        Ok(())
    }

    /// Adds a weighted edge. Existing unweighted edges become weight 1.
    pub fn add_weighted_edge(&mut self, u: usize, v: usize, weight: Rational) -> Result<()> {
        self.check_new_edge(u, v)?;
        if weight.is_zero() {
            return Err(Error::invalid(format!("edge {u} {v} has weight 0")));
        }
        if self.weights.is_none() {
            let existing = self.edges().into_iter().map(|e| (e, int(1))).collect();
            self.weights = Some(existing);
        }
        self.insert_edge(u, v);
        self.weights.as_mut().unwrap().insert(key(u, v), weight);
        Ok(())
    }

    pub fn set_colour(&mut self, v: usize, colour: u32) -> Result<()> {
        self.check_vertex(v)?;
        let n = self.n;
        self.colours.get_or_insert_with(|| vec![0; n])[v] = colour;
        Ok(())
    }

    pub fn with_colours(mut self, colours: Vec<u32>) -> Result<Self> {
        if colours.len() != self.n {
            return Err(Error::invalid(format!(
                "{} colours for {} vertices",
                colours.len(),
                self.n
            )));
        }
        self.colours = Some(colours);
        Ok(self)
    }

    pub fn without_colours(mut self) -> Self {
        self.colours = None;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones(..)).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].contains(v)
    }

    pub fn neighbours(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.adj[u].ones() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of the pair; 0 for non-edges and 1 for edges of unweighted graphs.
    pub fn weight(&self, u: usize, v: usize) -> Rational {
        if !self.has_edge(u, v) {
            return Rational::zero();
        }
        match &self.weights {
            Some(w) => w[&key(u, v)].clone(),
            None => int(1),
        }
    }

    /// Max absolute stored weight (1 for unweighted graphs with edges).
    pub fn weight_bound(&self) -> Rational {
        self.edges()
            .into_iter()
            .map(|(u, v)| self.weight(u, v).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_coloured(&self) -> bool {
        self.colours.is_some()
    }

    pub fn colours(&self) -> Option<&[u32]> {
        self.colours.as_deref()
    }

    pub fn colour(&self, v: usize) -> u32 {
        self.colours.as_ref().map_or(0, |c| c[v])
    }

    pub fn colour_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for v in 0..self.n {
            *h.entry(self.colour(v)).or_insert(0) += 1;
        }
        h
    }

    /// Largest colour class; `n` for uncoloured graphs.
    pub fn max_colour_class(&self) -> usize {
        self.colour_histogram().values().copied().max().unwrap_or(0)
    }

    /// The image of the graph under a relabelling `sigma` (vertex `v` becomes `sigma(v)`).
    pub fn permuted(&self, sigma: &Assignment) -> Result<Graph> {
        if sigma.len() != self.n {
            return Err(Error::OrderMismatch(self.n, sigma.len()));
        }
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            g.insert_edge(sigma.get(u), sigma.get(v));
        }
        if let Some(w) = &self.weights {
            g.weights = Some(
                w.iter()
                    .map(|(&(u, v), x)| (key(sigma.get(u), sigma.get(v)), x.clone()))
                    .collect(),
            );
        }
        if let Some(c) = &self.colours {
            let mut out = vec![0; self.n];
            for v in 0..self.n {
                out[sigma.get(v)] = c[v];
            }
            g.colours = Some(out);
        }
        Ok(g)
    }

    fn integer_weights(&self, scale: i64) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.n]; self.n];
        for (u, v) in self.edges() {
            let w = scaled_integer(&self.weight(u, v), scale).expect("scale is a common denominator");
            m[u][v] = w;
            m[v][u] = w;
        }
        m
    }
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A permutation of `0..n` in array form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &t in &mapping {
            if t >= n || seen[t] {
                return Err(Error::InvalidAssignment(format!("{mapping:?} is not a permutation")));
            }
            seen[t] = true;
        }
        Ok(Assignment(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Assignment((0..n).collect())
    }

    pub fn reversal(n: usize) -> Self {
        Assignment((0..n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Assignment {
        let mut inv = vec![0; self.0.len()];
        for (v, &t) in self.0.iter().enumerate() {
            inv[t] = v;
        }
        Assignment(inv)
    }
}

impl TryFrom<Vec<usize>> for Assignment {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Assignment::new(v)
    }
}

impl From<Assignment> for Vec<usize> {
    fn from(a: Assignment) -> Self {
        a.0
    }
}

/// An injective partial map, kept sorted by source.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PartialInjection {
    pairs: Vec<(usize, usize)>,
}

impl PartialInjection {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i].0 == pairs[j].0 || pairs[i].1 == pairs[j].1 {
                    return Err(Error::InvalidAssignment(format!(
                        "pairs {:?} and {:?} break injectivity",
                        pairs[i], pairs[j]
                    )));
                }
            }
        }
        Ok(PartialInjection { pairs })
    }

    /// `graph(phi)`.
    pub fn from_assignment(phi: &Assignment) -> Self {
        PartialInjection {
            pairs: phi.as_slice().iter().copied().enumerate().collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn image_of(&self, v: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&v, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn is_within(&self, n: usize) -> bool {
        self.pairs.iter().all(|&(a, b)| a < n && b < n)
    }

    pub fn is_subset_of(&self, phi: &Assignment) -> bool {
        self.pairs.iter().all(|&(v, t)| v < phi.len() && phi.get(v) == t)
    }
}

fn check_orders(g: &Graph, h: &Graph) -> Result<usize> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    Ok(g.n())
}

fn check_colour_preserving(g: &Graph, h: &Graph, pi: &Assignment) -> Result<()> {
    if g.is_coloured() || h.is_coloured() {
        for v in 0..g.n() {
            if g.colour(v) != h.colour(pi.get(v)) {
                return Err(Error::ColourViolation(v));
            }
        }
    }
    Ok(())
}

/// Edit cost of `pi`: mismatched pairs, or total weight change for weighted inputs.
pub fn edit_cost(g: &Graph, h: &Graph, pi: &Assignment) -> Result<Rational> {
    let n = check_orders(g, h)?;
    if pi.len() != n {
        return Err(Error::OrderMismatch(n, pi.len()));
    }
    check_colour_preserving(g, h, pi)?;
    if !g.is_weighted() && !h.is_weighted() {
        let mut count = 0i64;
        for v in 0..n {
            for w in v + 1..n {
                if g.has_edge(v, w) != h.has_edge(pi.get(v), pi.get(w)) {
                    count += 1;
                }
            }
        }
        return Ok(int(count));
    }
    let mut total = Rational::zero();
    for v in 0..n {
        for w in v + 1..n {
            total += (g.weight(v, w) - h.weight(pi.get(v), pi.get(w))).abs();
        }
    }
    Ok(total)
}

/// Exact edit distance by enumerating colour-preserving bijections in
/// lexicographic order; the first minimiser found is returned.
pub fn edit_distance_bruteforce(g: &Graph, h: &Graph) -> Result<(Rational, Assignment)> {
    edit_distance_bruteforce_capped(g, h, DEFAULT_BRUTEFORCE_CAP)
}

pub fn edit_distance_bruteforce_capped(g: &Graph, h: &Graph, cap: usize) -> Result<(Rational, Assignment)> {
    let n = check_orders(g, h)?;
    if g.colour_histogram() != h.colour_histogram() {
        return Err(Error::ColourHistogramMismatch);
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let weights: Vec<Rational> = g
        .edges()
        .into_iter()
        .map(|(u, v)| g.weight(u, v))
        .chain(h.edges().into_iter().map(|(u, v)| h.weight(u, v)))
        .collect();
    let scale =
        common_denominator(&weights).ok_or_else(|| Error::invalid("edge weights too fine for exact brute force"))?;
    let wg = g.integer_weights(scale);
    let wh = h.integer_weights(scale);
    let colours_g: Vec<u32> = (0..n).map(|v| g.colour(v)).collect();
    let colours_h: Vec<u32> = (0..n).map(|v| h.colour(v)).collect();

    let mut search = GedSearch {
        n,
        wg: &wg,
        wh: &wh,
        colours_g: &colours_g,
        colours_h: &colours_h,
        current: vec![usize::MAX; n],
        used: vec![false; n],
        best: None,
    };
    search.descend(0, 0);
    let (cost, mapping) = search
        .best
        .ok_or_else(|| Error::Internal("no colour-preserving bijection enumerated".into()))?;
    Ok((Rational::new(cost.into(), scale.into()), Assignment::new(mapping)?))
}

struct GedSearch<'a> {
    n: usize,
    wg: &'a [Vec<i64>],
    wh: &'a [Vec<i64>],
    colours_g: &'a [u32],
    colours_h: &'a [u32],
    current: Vec<usize>,
    used: Vec<bool>,
    best: Option<(i64, Vec<usize>)>,
}

impl GedSearch<'_> {
    // Costs are non-negative, so a partial cost that already reaches the best
    // cannot produce a strictly better (or lexicographically earlier) completion.
    fn descend(&mut self, v: usize, partial: i64) {
        if let Some((b, _)) = &self.best {
            if partial >= *b {
                return;
            }
        }
        if v == self.n {
            self.best = Some((partial, self.current.clone()));
            return;
        }
        for t in 0..self.n {
            if self.used[t] || self.colours_g[v] != self.colours_h[t] {
                continue;
            }
            let mut add = 0;
            for w in 0..v {
                add += (self.wg[v][w] - self.wh[t][self.current[w]]).abs();
            }
            self.used[t] = true;
            self.current[v] = t;
            self.descend(v + 1, partial + add);
            self.used[t] = false;
        }
        self.current[v] = usize::MAX;
    }
}

/// Colour- and weight-preserving isomorphism search by backtracking.
///
/// Vertices of `g` are placed in breadth-first order so every new vertex is
/// checked against already placed neighbours as early as possible.
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Result<Option<Assignment>> {
    let n = check_orders(g, h)?;
    if g.colour_histogram() != h.colour_histogram() || g.edge_count() != h.edge_count() {
        return Ok(None);
    }
    let mut deg_g: Vec<(u32, usize)> = (0..n).map(|v| (g.colour(v), g.degree(v))).collect();
    let mut deg_h: Vec<(u32, usize)> = (0..n).map(|v| (h.colour(v), h.degree(v))).collect();
    deg_g.sort_unstable();
    deg_h.sort_unstable();
    if deg_g != deg_h {
        return Ok(None);
    }

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in g.neighbours(v).ones() {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if iso_descend(g, h, &order, 0, &mut image, &mut used) {
        return Ok(Some(Assignment::new(image)?));
    }
    Ok(None)
}

fn iso_descend(g: &Graph, h: &Graph, order: &[usize], depth: usize, image: &mut [usize], used: &mut [bool]) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    'targets: for t in 0..g.n() {
        if used[t] || g.colour(v) != h.colour(t) || g.degree(v) != h.degree(t) {
            continue;
        }
        for &u in &order[..depth] {
            let s = image[u];
            if g.has_edge(u, v) != h.has_edge(s, t) {
                continue 'targets;
            }
            if (g.is_weighted() || h.is_weighted()) && g.weight(u, v) != h.weight(s, t) {
                continue 'targets;
            }
        }
        image[v] = t;
        used[t] = true;
        if iso_descend(g, h, order, depth + 1, image, used) {
            return true;
        }
        used[t] = false;
        image[v] = usize::MAX;
    }
    false
}

pub fn are_isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    Ok(find_isomorphism(g, h)?.is_some())
}

/// `N(v) △ N(w)`.
pub fn mixed_neighbourhood(g: &Graph, v: usize, w: usize) -> Result<FixedBitSet> {
    g.check_vertex(v)?;
    g.check_vertex(w)?;
    let mut m = g.neighbours(v).clone();
    m.symmetric_difference_with(g.neighbours(w));
    Ok(m)
}

/// Unweighted graph on the same vertices keeping the edges of weight `> t`.
pub fn threshold_graph(g: &Graph, t: &Rational) -> Graph {
    let mut out = Graph::empty(g.n());
    for (u, v) in g.edges() {
        if &g.weight(u, v) > t {
            out.insert_edge(u, v);
        }
    }
    out.colours = g.colours.clone();
    out
}

/// The `ell`-blowup: vertex `(v, i)` is `v * ell + i`, coloured `(colour(v), i)`
/// encoded as `colour(v) * ell + i`. Each edge becomes a `K_{ell,ell}`.
pub fn blowup(g: &Graph, ell: usize) -> Result<Graph> {
    if ell < 1 {
        return Err(Error::invalid("blowup factor must be at least 1"));
    }
    let n = g.n() * ell;
    let mut out = Graph::empty(n);
    let mut weights = g.is_weighted().then(BTreeMap::new);
    for (v, w) in g.edges() {
        for i in 0..ell {
            for j in 0..ell {
                let (a, b) = (v * ell + i, w * ell + j);
                out.insert_edge(a, b);
                if let Some(map) = weights.as_mut() {
                    map.insert(key(a, b), g.weight(v, w));
                }
            }
        }
    }
    out.weights = weights;
    let colours = (0..n)
        .map(|x| {
            let (v, i) = (x / ell, x % ell);
            u32::try_from(g.colour(v) as usize * ell + i).map_err(|_| Error::invalid("blowup colour ids overflow u32"))
        })
        .collect::<Result<Vec<_>>>()?;
    out.colours = Some(colours);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn k3() -> Graph {
        Graph::complete(3)
    }

    #[test]
    fn edit_cost_examples() {
        let id = Assignment::identity(3);
        assert_eq!(edit_cost(&k3(), &k3(), &id).unwrap(), int(0));
        assert_eq!(edit_cost(&k3(), &Graph::path(3), &id).unwrap(), int(1));

        let mut g = Graph::empty(2);
        g.add_weighted_edge(0, 1, int(3)).unwrap();
        let mut h = Graph::empty(2);
        h.add_weighted_edge(0, 1, int(1)).unwrap();
        assert_eq!(edit_cost(&g, &h, &Assignment::identity(2)).unwrap(), int(2));
    }

    #[test]
    fn edit_cost_rejects_bad_inputs() {
        let id = Assignment::identity(3);
        assert!(matches!(
            edit_cost(&k3(), &Graph::path(4), &id),
            Err(Error::OrderMismatch(3, 4))
        ));
        let g = Graph::path(3).with_colours(vec![0, 1, 0]).unwrap();
        let h = Graph::path(3).with_colours(vec![1, 0, 0]).unwrap();
        assert!(matches!(edit_cost(&g, &h, &id), Err(Error::ColourViolation(0))));
    }

    #[test]
    fn bruteforce_examples() {
        let c4 = Graph::cycle(4);
        let relabelled = c4.permuted(&Assignment::new(vec![2, 0, 3, 1]).unwrap()).unwrap();
        assert_eq!(edit_distance_bruteforce(&c4, &relabelled).unwrap().0, int(0));
        assert_eq!(edit_distance_bruteforce(&k3(), &Graph::path(3)).unwrap().0, int(1));
        let (d, pi) = edit_distance_bruteforce(&Graph::cycle(5), &Graph::path(5)).unwrap();
        assert_eq!(d, int(1));
        assert_eq!(edit_cost(&Graph::cycle(5), &Graph::path(5), &pi).unwrap(), int(1));
    }

    #[test]
    fn bruteforce_tie_break_is_lexicographic() {
        // Every bijection between two edgeless graphs costs 0.
        let (_, pi) = edit_distance_bruteforce(&Graph::empty(4), &Graph::empty(4)).unwrap();
        assert_eq!(pi, Assignment::identity(4));
        // K3 vs path: identity already achieves the optimum 1.
        let (_, pi) = edit_distance_bruteforce(&k3(), &Graph::path(3)).unwrap();
        assert_eq!(pi, Assignment::identity(3));
    }

    #[test]
    fn bruteforce_errors() {
        assert!(matches!(
            edit_distance_bruteforce(&Graph::empty(11), &Graph::empty(11)),
            Err(Error::CapExceeded { n: 11, cap: 10 })
        ));
        let g = Graph::empty(2).with_colours(vec![0, 0]).unwrap();
        let h = Graph::empty(2).with_colours(vec![0, 1]).unwrap();
        assert!(matches!(
            edit_distance_bruteforce(&g, &h),
            Err(Error::ColourHistogramMismatch)
        ));
    }

    #[test]
    fn bruteforce_weighted() {
        let mut g = Graph::empty(3);
        g.add_weighted_edge(0, 1, ratio(1, 2)).unwrap();
        g.add_weighted_edge(1, 2, int(2)).unwrap();
        let mut h = Graph::empty(3);
        h.add_weighted_edge(0, 2, int(2)).unwrap();
        // Best: map the weight-2 edge onto the weight-2 edge, pay 1/2 for the other.
        assert_eq!(edit_distance_bruteforce(&g, &h).unwrap().0, ratio(1, 2));
    }

    #[test]
    fn mixed_neighbourhood_examples() {
        let p = Graph::path(3);
        assert_eq!(mixed_neighbourhood(&p, 1, 1).unwrap().count_ones(..), 0);
        assert_eq!(mixed_neighbourhood(&p, 0, 2).unwrap().count_ones(..), 0);
        let m: Vec<usize> = mixed_neighbourhood(&p, 0, 1).unwrap().ones().collect();
        assert_eq!(m, vec![0, 1, 2]);
        assert!(mixed_neighbourhood(&p, 0, 3).is_err());
    }

    #[test]
    fn threshold_graph_examples() {
        let mut g = Graph::empty(3);
        g.add_weighted_edge(0, 1, int(1)).unwrap();
        g.add_weighted_edge(0, 2, int(2)).unwrap();
        g.add_weighted_edge(1, 2, int(3)).unwrap();
        assert_eq!(threshold_graph(&g, &int(0)).edges(), Graph::complete(3).edges());
        assert_eq!(threshold_graph(&g, &int(3)).edge_count(), 0);
        assert_eq!(threshold_graph(&g, &ratio(3, 2)).edges(), vec![(0, 2), (1, 2)]);
        assert!(!threshold_graph(&g, &int(0)).is_weighted());
    }

    #[test]
    fn blowup_examples() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let b = blowup(&g, 2).unwrap();
        assert_eq!((b.n(), b.edge_count()), (4, 4));
        assert_eq!(b.edges(), vec![(0, 2), (0, 3), (1, 2), (1, 3)]);

        let b = blowup(&k3(), 2).unwrap();
        assert_eq!((b.n(), b.edge_count()), (6, 12));
        assert_eq!(
            b.colour_histogram().into_iter().collect::<Vec<_>>(),
            vec![(0, 3), (1, 3)]
        );

        let one = blowup(&k3(), 1).unwrap();
        assert_eq!(one.edges(), k3().edges());
        assert!(blowup(&k3(), 0).is_err());
    }

    #[test]
    fn isomorphism_search() {
        let c6 = Graph::cycle(6);
        let two_triangles = k3().disjoint_union(&k3());
        assert!(!are_isomorphic(&c6, &two_triangles).unwrap());
        let sigma = Assignment::new(vec![3, 5, 0, 1, 4, 2]).unwrap();
        let image = c6.permuted(&sigma).unwrap();
        let found = find_isomorphism(&c6, &image).unwrap().unwrap();
        assert_eq!(edit_cost(&c6, &image, &found).unwrap(), int(0));
    }

    #[test]
    fn assignment_and_injection_validation() {
        assert!(Assignment::new(vec![0, 0]).is_err());
        assert!(Assignment::new(vec![1, 2]).is_err());
        let a = Assignment::new(vec![2, 0, 1]).unwrap();
        assert_eq!(a.inverse().as_slice(), &[1, 2, 0]);
        assert!(PartialInjection::new(vec![(0, 1), (0, 2)]).is_err());
        assert!(PartialInjection::new(vec![(0, 1), (2, 1)]).is_err());
        let p = PartialInjection::new(vec![(2, 1), (0, 2)]).unwrap();
        assert_eq!(p.pairs(), &[(0, 2), (2, 1)]);
        assert!(p.is_subset_of(&a));
        assert_eq!(p.image_of(2), Some(1));
    }

    #[test]
    fn graph_invariants_enforced() {
        let mut g = Graph::empty(3);
        assert!(g.add_edge(0, 0).is_err());
        g.add_edge(0, 1).unwrap();
        assert!(g.add_edge(1, 0).is_err());
        assert!(g.add_edge(0, 3).is_err());
        assert!(g.add_weighted_edge(1, 2, int(0)).is_err());
        g.add_weighted_edge(1, 2, ratio(-5, 2)).unwrap();
        assert_eq!(g.weight(0, 1), int(1));
        assert_eq!(g.weight_bound(), ratio(5, 2));
    }
}
