//! Instance generators: the QAP separating weak from strong VC bounds, CFI
//! pairs, blowup pairs and seeded random graphs, plus on-disk bundles.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::format::{read_graph, serialize_graph};
use crate::graph::{are_isomorphic, blowup, edit_distance_bruteforce_capped, Graph, DEFAULT_BRUTEFORCE_CAP};
use crate::qap::QapInstance;
use crate::rational::{format_rational, int, parse_rational};
use crate::setsystem::{neighbourhood_system, vc_dimension_exact};
use crate::wl::wl_distinguishes;

/// 0/1 instance with `c(n-1, a, 0, x) = 1` iff `a < 2^k` and bit `x < k` of
/// `a` is set, `k = floor(log2 n)`. Unrestricted VC is `k`; every restriction
/// to a bijection has VC at most 1.
pub fn gen_lemma36_qap(n: usize) -> Result<QapInstance> {
    if n < 4 {
        return Err(Error::invalid("the construction needs n >= 4"));
    }
    let k = n.ilog2() as usize;
    let mut entries = Vec::new();
    for a in 0..1usize << k {
        for x in 0..k {
            if a >> x & 1 == 1 {
                entries.push(([n - 1, a, 0, x], int(1)));
            }
        }
    }
    QapInstance::from_entries(n, entries)
}

/// Two graphs of equal order with provenance and checkable claims.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceBundle {
    pub g: Graph,
    pub h: Graph,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub family: String,
    pub params: BTreeMap<String, Value>,
    pub claims: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
}

/// Base graphs accepted by name.
pub fn stock_base(name: &str) -> Result<Graph> {
    match name {
        "k4" => Ok(Graph::complete(4)),
        "k33" => Graph::from_edges(
            6,
            &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)],
        ),
        "prism" => Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)],
        ),
        "cube" => Graph::from_edges(
            8,
            &[
                (0, 1),
                (1, 3),
                (3, 2),
                (2, 0),
                (4, 5),
                (5, 7),
                (7, 6),
                (6, 4),
                (0, 4),
                (1, 5),
                (2, 6),
                (3, 7),
            ],
        ),
        "petersen" => Graph::from_edges(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
                (5, 7),
                (7, 9),
                (9, 6),
                (6, 8),
                (8, 5),
            ],
        ),
        other => Err(Error::invalid(format!("unknown base graph `{other}`"))),
    }
}

fn is_connected(g: &Graph) -> bool {
    if g.n() == 0 {
        return true;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in g.neighbours(v).ones() {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Gadget graph over a 3-regular base, with the edges listed in `twisted`
/// connecting end vertices crosswise.
///
/// Base vertex `v` contributes four middle vertices `v*4 + j`, one per even
/// subset of its incident edges, and for each incident edge two end vertices.
fn cfi_graph(base: &Graph, twisted: &[(usize, usize)]) -> Graph {
    let nb = base.n();
    let incident: Vec<Vec<(usize, usize)>> = (0..nb)
        .map(|v| {
            let mut es: Vec<(usize, usize)> = base.neighbours(v).ones().map(|u| (v.min(u), v.max(u))).collect();
            es.sort_unstable();
            es
        })
        .collect();
    let end = |v: usize, e: (usize, usize), bit: usize| {
        let pos = incident[v].iter().position(|&f| f == e).expect("incident edge");
        4 * nb + (v * 3 + pos) * 2 + bit
    };
    let even_subsets: [&[usize]; 4] = [&[], &[0, 1], &[0, 2], &[1, 2]];
    let mut g = Graph::empty(10 * nb);
    let mut colours = vec![0u32; 10 * nb];
    for v in 0..nb {
        for (j, subset) in even_subsets.iter().enumerate() {
            let m = v * 4 + j;
            colours[m] = v as u32;
            for (pos, &e) in incident[v].iter().enumerate() {
                let bit = usize::from(subset.contains(&pos));
                g.add_edge(m, end(v, e, bit)).expect("fresh gadget edge");
            }
        }
        for pos in 0..3 {
            for bit in 0..2 {
                colours[4 * nb + (v * 3 + pos) * 2 + bit] = (nb + v * 3 + pos) as u32;
            }
        }
    }
    for (u, v) in base.edges() {
        let flip = twisted.contains(&(u, v));
        for bit in 0..2 {
            let other = if flip { 1 - bit } else { bit };
            g.add_edge(end(u, (u, v), bit), end(v, (u, v), other))
                .expect("fresh connecting edge");
        }
    }
    g.with_colours(colours).expect("one colour per vertex")
}

/// Untwisted and once-twisted CFI graphs over a connected 3-regular base.
pub fn gen_cfi_pair(base: &Graph) -> Result<InstanceBundle> {
    if base.n() == 0 || (0..base.n()).any(|v| base.degree(v) != 3) {
        return Err(Error::invalid("CFI base must be 3-regular"));
    }
    if !is_connected(base) {
        return Err(Error::invalid("CFI base must be connected"));
    }
    let first = base.edges()[0];
    let g = cfi_graph(base, &[]);
    let h = cfi_graph(base, &[first]);
    let mut params = BTreeMap::new();
    params.insert("base".into(), json!(serialize_graph(base)));
    params.insert("twisted_edge".into(), json!([first.0, first.1]));
    let mut claims = BTreeMap::new();
    claims.insert("non_isomorphic".into(), json!(true));
    claims.insert("regular_degree".into(), json!(3));
    claims.insert("max_colour_class".into(), json!(4));
    claims.insert("wl_indistinguishable_k".into(), json!(1));
    claims.insert("vc_neighbourhood_at_most".into(), json!(3));
    Ok(InstanceBundle {
        g,
        h,
        metadata: Metadata {
            family: "cfi".into(),
            params,
            claims,
            seeds: Vec::new(),
        },
    })
}

/// `ℓ`-blowups of both graphs; WL claims carry over and a known base edit
/// distance `δ` becomes the lower bound `ceil(ℓ² δ / 3)`.
pub fn gen_blowup_pair(bundle: &InstanceBundle, ell: usize) -> Result<InstanceBundle> {
    if ell < 1 {
        return Err(Error::invalid("ell must be at least 1"));
    }
    let g = blowup(&bundle.g, ell)?;
    let h = blowup(&bundle.h, ell)?;
    let mut metadata = bundle.metadata.clone();
    metadata.family = format!("blowup({})", bundle.metadata.family);
    metadata.params.insert("ell".into(), json!(ell));
    let mut claims = BTreeMap::new();
    for key in ["non_isomorphic", "wl_indistinguishable_k", "max_colour_class"] {
        if let Some(v) = bundle.metadata.claims.get(key) {
            claims.insert(key.to_string(), v.clone());
        }
    }
    if let Some(d) = bundle.metadata.claims.get("regular_degree").and_then(Value::as_u64) {
        claims.insert("regular_degree".into(), json!(d * ell as u64));
    }
    let base_delta = bundle
        .metadata
        .claims
        .get("edit_distance")
        .and_then(Value::as_str)
        .map(parse_rational)
        .transpose()?;
    if let Some(delta) = base_delta {
        let bound = (delta * int((ell * ell) as i64) / int(3)).ceil();
        claims.insert("edit_distance_at_least".into(), json!(format_rational(&bound)));
    }
    metadata.claims = claims;
    Ok(InstanceBundle { g, h, metadata })
}

/// Bundle for an arbitrary pair, recording the exact edit distance when small.
pub fn bundle_from_pair(g: Graph, h: Graph, family: &str) -> Result<InstanceBundle> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    let mut claims = BTreeMap::new();
    if g.n() <= DEFAULT_BRUTEFORCE_CAP {
        let (delta, _) = edit_distance_bruteforce_capped(&g, &h, DEFAULT_BRUTEFORCE_CAP)?;
        claims.insert("edit_distance".into(), json!(format_rational(&delta)));
    }
    Ok(InstanceBundle {
        g,
        h,
        metadata: Metadata {
            family: family.into(),
            ..Metadata::default()
        },
    }
    .with_claims(claims))
}

impl InstanceBundle {
    fn with_claims(mut self, claims: BTreeMap<String, Value>) -> Self {
        self.metadata.claims.extend(claims);
        self
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("G.graph"), serialize_graph(&self.g))?;
        std::fs::write(dir.join("H.graph"), serialize_graph(&self.h))?;
        let mut meta = serde_json::to_string_pretty(&self.metadata)?;
        meta.push('\n');
        std::fs::write(dir.join("metadata.json"), meta)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let g = read_graph(dir.join("G.graph"))?;
        let h = read_graph(dir.join("H.graph"))?;
        let metadata = serde_json::from_str(&std::fs::read_to_string(dir.join("metadata.json"))?)?;
        if g.n() != h.n() {
            return Err(Error::OrderMismatch(g.n(), h.n()));
        }
        Ok(InstanceBundle { g, h, metadata })
    }

    /// Re-checks every recognised claim; unknown claims are skipped.
    pub fn check_claims(&self) -> Result<BTreeMap<String, bool>> {
        let mut out = BTreeMap::new();
        for (key, value) in &self.metadata.claims {
            let ok = match key.as_str() {
                "non_isomorphic" => !are_isomorphic(&self.g, &self.h)? == value.as_bool().unwrap_or(true),
                "regular_degree" => {
                    let d = value.as_u64().unwrap_or(0) as usize;
                    [&self.g, &self.h].iter().all(|x| (0..x.n()).all(|v| x.degree(v) == d))
                }
                "max_colour_class" => {
                    let s = value.as_u64().unwrap_or(0) as usize;
                    self.g.max_colour_class() <= s && self.h.max_colour_class() <= s
                }
                "wl_indistinguishable_k" => {
                    let k = value.as_u64().unwrap_or(1) as usize;
                    !wl_distinguishes(&self.g, &self.h, k)?
                }
                "vc_neighbourhood_at_most" => {
                    let d = value.as_i64().unwrap_or(0);
                    vc_dimension_exact(&neighbourhood_system(&self.g))? <= d
                        && vc_dimension_exact(&neighbourhood_system(&self.h))? <= d
                }
                "edit_distance" | "edit_distance_at_least" if self.g.n() <= DEFAULT_BRUTEFORCE_CAP => {
                    let claimed = parse_rational(value.as_str().unwrap_or(""))?;
                    let (delta, _) = edit_distance_bruteforce_capped(&self.g, &self.h, DEFAULT_BRUTEFORCE_CAP)?;
                    if key == "edit_distance" {
                        delta == claimed
                    } else {
                        delta >= claimed
                    }
                }
                _ => continue,
            };
            out.insert(key.clone(), ok);
        }
        Ok(out)
    }
}

/// Seeded Erdős–Rényi graph.
pub fn gen_random_graph(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if n < 1 || !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid("need n >= 1 and edge probability in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_graph_from(n, edge_prob, &mut rng))
}

pub(crate) fn random_graph_from(n: usize, edge_prob: f64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                g.add_edge(u, v).expect("fresh edge");
            }
        }
    }
    g
}

/// Rejection-samples until the neighbourhood system has the requested VC dimension.
pub fn gen_random_graph_with_vc(n: usize, edge_prob: f64, target_vc: i64, seed: u64, retries: usize) -> Result<Graph> {
    if n < 1 || !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid("need n >= 1 and edge probability in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..retries.max(1) {
        let g = random_graph_from(n, edge_prob, &mut rng);
        if vc_dimension_exact(&neighbourhood_system(&g))? == target_vc {
            return Ok(g);
        }
    }
    Err(Error::invalid(format!(
        "no graph with VC dimension {target_vc} after {retries} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{edit_distance_bruteforce, Assignment};
    use crate::setsystem::{is_shattered, qap_threshold_system, vc_dimension_exact};

    #[test]
    fn lemma36_examples() {
        let q4 = gen_lemma36_qap(4).unwrap();
        assert_eq!(
            vc_dimension_exact(&qap_threshold_system(&q4, &int(0), None).unwrap()).unwrap(),
            2
        );
        let restricted = qap_threshold_system(&q4, &int(0), Some(&Assignment::identity(4))).unwrap();
        assert!(vc_dimension_exact(&restricted).unwrap() <= 1);
        let q8 = gen_lemma36_qap(8).unwrap();
        let sys = qap_threshold_system(&q8, &int(0), None).unwrap();
        assert!(is_shattered(&sys, &[0, 1, 2]).unwrap());
        assert!(gen_lemma36_qap(3).is_err());
    }

    #[test]
    fn cfi_over_k4() {
        let bundle = gen_cfi_pair(&Graph::complete(4)).unwrap();
        assert_eq!(bundle.g.n(), 40);
        assert_eq!(bundle.h.n(), 40);
        assert!((0..40).all(|v| bundle.g.degree(v) == 3 && bundle.h.degree(v) == 3));
        assert_eq!(bundle.g.max_colour_class(), 4);
        assert!(!wl_distinguishes(&bundle.g, &bundle.h, 1).unwrap());
        assert!(!are_isomorphic(&bundle.g, &bundle.h).unwrap());
        assert!(bundle.check_claims().unwrap().values().all(|&ok| ok));
        let untwisted = cfi_graph(&Graph::complete(4), &[]);
        assert!(are_isomorphic(&bundle.g, &untwisted).unwrap());
    }

    #[test]
    fn cfi_rejects_bad_bases() {
        assert!(gen_cfi_pair(&Graph::cycle(5)).is_err());
        let two_k4 = Graph::complete(4).disjoint_union(&Graph::complete(4));
        assert!(gen_cfi_pair(&two_k4).is_err());
        for name in ["k4", "k33", "prism", "cube", "petersen"] {
            assert!(gen_cfi_pair(&stock_base(name).unwrap()).is_ok(), "{name}");
        }
    }

    #[test]
    fn blowup_examples() {
        let base = bundle_from_pair(Graph::complete(3), Graph::path(3), "pair").unwrap();
        let one = gen_blowup_pair(&base, 1).unwrap();
        assert!(are_isomorphic(&one.g, &base.g.clone().with_colours(vec![0; 3]).unwrap()).unwrap());
        let two = gen_blowup_pair(&base, 2).unwrap();
        assert_eq!(two.metadata.claims["edit_distance_at_least"], json!("2"));
        let (delta, _) = edit_distance_bruteforce(&two.g, &two.h).unwrap();
        assert!(delta >= int(2));
        assert!(two.check_claims().unwrap().values().all(|&ok| ok));
        assert!(gen_blowup_pair(&base, 0).is_err());
    }

    #[test]
    fn random_graph_examples() {
        assert_eq!(gen_random_graph(6, 0.0, 1).unwrap(), Graph::empty(6));
        assert_eq!(gen_random_graph(6, 1.0, 1).unwrap(), Graph::complete(6));
        let a = gen_random_graph(12, 0.5, 42).unwrap();
        assert_eq!(a, gen_random_graph(12, 0.5, 42).unwrap());
        let g = gen_random_graph_with_vc(8, 0.5, 2, 3, 200).unwrap();
        assert_eq!(vc_dimension_exact(&neighbourhood_system(&g)).unwrap(), 2);
        assert!(gen_random_graph_with_vc(4, 0.0, 3, 0, 5).is_err());
    }

    #[test]
    fn bundles_round_trip_on_disk() {
        let dir = std::env::temp_dir().join(format!("robustiso-bundle-{}", std::process::id()));
        let bundle = gen_cfi_pair(&Graph::complete(4)).unwrap();
        bundle.save(&dir).unwrap();
        assert_eq!(InstanceBundle::load(&dir).unwrap(), bundle);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
