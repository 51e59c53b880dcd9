//! Set systems over `0..ground_size`, exact VC dimension, ε-nets and
//! ε-approximations, and the graph/QAP set systems built on them.
//!
//! Shattering is hereditary, so the exact VC search only extends sets that
//! are already shattered. By Pajor's lemma a family shatters at most `|F|`
//! sets, which keeps the level-wise search small even on large ground sets.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use num::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{mixed_neighbourhood, threshold_graph, Assignment, Graph};
use crate::qap::QapInstance;
use crate::rational::{int, to_f64, Rational};

/// Default cap on the size of candidate shattered sets.
pub const DEFAULT_VC_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    ground_size: usize,
    sets: Vec<FixedBitSet>,
}

impl SetSystem {
    pub fn new(ground_size: usize, sets: impl IntoIterator<Item = FixedBitSet>) -> Result<Self> {
        let mut out = Vec::new();
        for mut s in sets {
            if s.ones().any(|e| e >= ground_size) {
                return Err(Error::invalid("set member outside the ground set"));
            }
            s.grow(ground_size);
            out.push(s);
        }
        out.sort();
        out.dedup();
        Ok(SetSystem { ground_size, sets: out })
    }

    pub fn from_lists(ground_size: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let sets = lists.iter().map(|l| {
            let mut s = FixedBitSet::with_capacity(ground_size.max(l.iter().max().map_or(0, |m| m + 1)));
            for &e in l {
                s.insert(e);
            }
            s
        });
        Self::new(ground_size, sets.collect::<Vec<_>>())
    }

    pub fn power_set(ground_size: usize) -> Self {
        let sets = (0u64..1 << ground_size).map(|mask| {
            let mut s = FixedBitSet::with_capacity(ground_size);
            for e in 0..ground_size {
                if mask >> e & 1 == 1 {
                    s.insert(e);
                }
            }
            s
        });
        Self::new(ground_size, sets.collect::<Vec<_>>()).expect("members are in range")
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn sets(&self) -> &[FixedBitSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Sorted member lists, handy for assertions.
    pub fn as_lists(&self) -> Vec<Vec<usize>> {
        let mut l: Vec<Vec<usize>> = self.sets.iter().map(|s| s.ones().collect()).collect();
        l.sort();
        l
    }

    /// Number of distinct traces `H ∩ X`.
    pub fn trace_count(&self, x: &[usize]) -> usize {
        let mut masks: Vec<u64> = self.sets.iter().map(|s| trace_mask(s, x)).collect();
        masks.sort_unstable();
        masks.dedup();
        masks.len()
    }
}

fn trace_mask(s: &FixedBitSet, x: &[usize]) -> u64 {
    x.iter()
        .enumerate()
        .fold(0u64, |m, (i, &e)| m | ((s.contains(e) as u64) << i))
}

/// `{N(v)}`.
pub fn neighbourhood_system(g: &Graph) -> SetSystem {
    SetSystem::new(g.n(), (0..g.n()).map(|v| g.neighbours(v).clone()).collect::<Vec<_>>())
        .expect("neighbourhoods lie in V(G)")
}

/// `{N(v) △ N(w)}` over all pairs, including `v = w`.
pub fn mixed_system(g: &Graph) -> SetSystem {
    let mut sets = Vec::with_capacity(g.n() * g.n());
    for v in 0..g.n() {
        for w in v..g.n() {
            sets.push(mixed_neighbourhood(g, v, w).expect("vertices in range"));
        }
    }
    SetSystem::new(g.n(), sets).expect("mixed neighbourhoods lie in V(G)")
}

/// `H^t_c` over `[n]×[n]` (element `(w, w')` encoded `w * n + w'`), or with
/// `phi` given, its restriction to `graph(phi)` encoded by first coordinate.
pub fn qap_threshold_system(q: &QapInstance, t: &Rational, phi: Option<&Assignment>) -> Result<SetSystem> {
    let n = q.n();
    let mut sets = Vec::with_capacity(n * n);
    match phi {
        None => {
            for v in 0..n {
                for vp in 0..n {
                    let mut s = FixedBitSet::with_capacity(n * n);
                    for w in 0..n {
                        for wp in 0..n {
                            if q.exceeds(v, vp, w, wp, t) {
                                s.insert(w * n + wp);
                            }
                        }
                    }
                    sets.push(s);
                }
            }
            SetSystem::new(n * n, sets)
        }
        Some(phi) => {
            if phi.len() != n {
                return Err(Error::OrderMismatch(n, phi.len()));
            }
            for v in 0..n {
                for vp in 0..n {
                    let mut s = FixedBitSet::with_capacity(n);
                    for w in 0..n {
                        if q.exceeds(v, vp, w, phi.get(w), t) {
                            s.insert(w);
                        }
                    }
                    sets.push(s);
                }
            }
            SetSystem::new(n, sets)
        }
    }
}

pub fn is_shattered(s: &SetSystem, x: &[usize]) -> Result<bool> {
    if x.iter().any(|&e| e >= s.ground_size()) {
        return Err(Error::invalid("shattering candidate outside the ground set"));
    }
    let mut xs = x.to_vec();
    xs.sort_unstable();
    xs.dedup();
    if xs.len() > 63 {
        return Ok(false);
    }
    Ok(shatters(s, &xs))
}

fn shatters(s: &SetSystem, x: &[usize]) -> bool {
    let need = 1usize << x.len();
    s.len() >= need && s.trace_count(x) == need
}

/// VC dimension with the default cap; `-1` for the empty family.
pub fn vc_dimension_exact(s: &SetSystem) -> Result<i64> {
    vc_dimension_capped(s, DEFAULT_VC_CAP)
}

pub fn vc_dimension_capped(s: &SetSystem, cap: usize) -> Result<i64> {
    Ok(match largest_shattered(s, cap)? {
        None => -1,
        Some(x) => x.len() as i64,
    })
}

/// A largest shattered set (lexicographically first at its size), or `None`
/// when the family is empty and not even `∅` is shattered.
pub fn largest_shattered(s: &SetSystem, cap: usize) -> Result<Option<Vec<usize>>> {
    if s.is_empty() {
        return Ok(None);
    }
    // Elements in no set or in every set never belong to a shattered set of size >= 1.
    let useful: Vec<usize> = (0..s.ground_size())
        .filter(|&e| {
            let hits = s.sets().iter().filter(|h| h.contains(e)).count();
            hits > 0 && hits < s.len()
        })
        .collect();
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best = Vec::new();
    let mut seen = Vec::new();
    loop {
        let known: HashSet<&[usize]> = level.iter().map(Vec::as_slice).collect();
        let mut next = Vec::new();
        for x in &level {
            if x.len() >= 63 {
                break;
            }
            let base: Vec<u64> = s.sets().iter().map(|h| trace_mask(h, x)).collect();
            let start = x.last().map_or(0, |&l| useful.partition_point(|&e| e <= l));
            for &e in &useful[start..] {
                let mut y = x.clone();
                y.push(e);
                // Every subset of a shattered set is shattered.
                let closed = (0..x.len()).all(|i| {
                    let mut z = y.clone();
                    z.remove(i);
                    known.contains(z.as_slice())
                });
                if closed && extension_shatters(s, &base, x.len(), e, &mut seen) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return Ok(Some(best));
        }
        if next[0].len() > cap {
            return Err(Error::CapExceeded { n: next[0].len(), cap });
        }
        best = next[0].clone();
        level = next;
    }
}

/// Whether `X ∪ {e}` is shattered, given the traces `base` of `X` (`|X| = k`).
fn extension_shatters(s: &SetSystem, base: &[u64], k: usize, e: usize, seen: &mut Vec<u64>) -> bool {
    let need = 1usize << (k + 1);
    if s.len() < need {
        return false;
    }
    seen.clear();
    seen.resize(need.div_ceil(64), 0);
    let mut count = 0;
    for (h, &m) in s.sets().iter().zip(base) {
        let t = (m | (h.contains(e) as u64) << k) as usize;
        let (word, bit) = (t / 64, t % 64);
        if seen[word] >> bit & 1 == 0 {
            seen[word] |= 1 << bit;
            count += 1;
            if count == need {
                return true;
            }
        }
    }
    false
}

/// Max VC dimension of the neighbourhood systems of all threshold graphs.
pub fn weighted_graph_vc(g: &Graph) -> Result<i64> {
    let mut weights: Vec<Rational> = g.edges().into_iter().map(|(u, v)| g.weight(u, v)).collect();
    weights.sort();
    weights.dedup();
    let below = weights.first().map_or_else(|| int(0), |m| m - int(1));
    let mut best = 0;
    for t in std::iter::once(below).chain(weights) {
        best = best.max(vc_dimension_exact(&neighbourhood_system(&threshold_graph(g, &t)))?);
    }
    Ok(best)
}

/// Default work budget (trace evaluations) for the weak-VC test.
pub const DEFAULT_WEAK_VC_WORK: u128 = 50_000_000;

/// Decides whether `VC(H^t_{c,φ}) <= d` for every threshold `t` and bijection `φ`.
///
/// Every partial injection of size `d + 1` extends to a bijection, so the
/// answer is "no" exactly when some threshold system shatters such a partial
/// injection. Candidates are grown from shattered partial injections only.
pub fn weak_vc_test(q: &QapInstance, d: usize, work_budget: u128) -> Result<bool> {
    Ok(weak_vc_search(q, d + 1, work_budget)? <= d)
}

/// Largest size of a partial injection shattered by some `H^t_c`, stopping
/// early once `stop_at` is reached.
pub fn weak_vc_dimension(q: &QapInstance, work_budget: u128) -> Result<usize> {
    weak_vc_search(q, usize::MAX, work_budget)
}

fn weak_vc_search(q: &QapInstance, stop_at: usize, work_budget: u128) -> Result<usize> {
    let n = q.n();
    let mut work: u128 = 0;
    let mut best = 0;
    let mut seen_systems = HashSet::new();
    for t in q.thresholds() {
        let sys = qap_threshold_system(q, &t, None)?;
        if !seen_systems.insert(sys.as_lists()) {
            continue;
        }
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];
        let mut size = 0;
        while size < stop_at && !level.is_empty() {
            let mut next = Vec::new();
            for x in &level {
                let start = x.last().map_or(0, |&l| l + 1);
                for e in start..n * n {
                    let (w, wp) = (e / n, e % n);
                    if x.iter().any(|&f| f / n == w || f % n == wp) {
                        continue;
                    }
                    work += sys.len() as u128;
                    if work > work_budget {
                        return Err(Error::budget("weak VC test", work, work_budget));
                    }
                    let mut y = x.clone();
                    y.push(e);
                    if shatters(&sys, &y) {
                        next.push(y);
                    }
                }
            }
            if !next.is_empty() {
                size += 1;
            }
            level = next;
        }
        best = best.max(size);
        if best >= stop_at {
            break;
        }
    }
    Ok(best)
}

fn is_large(h: &FixedBitSet, eps: &Rational, ground: usize) -> bool {
    int(h.count_ones(..) as i64) > eps * int(ground as i64)
}

/// Whether `net` hits every member larger than `eps * ground_size`.
pub fn is_epsilon_net(s: &SetSystem, eps: &Rational, net: &[usize]) -> bool {
    s.sets()
        .iter()
        .filter(|h| is_large(h, eps, s.ground_size()))
        .all(|h| net.iter().any(|&e| h.contains(e)))
}

/// Size guarantee checked after the greedy construction.
pub fn epsilon_net_size_bound(s: &SetSystem, eps: &Rational) -> usize {
    if !s.sets().iter().any(|h| is_large(h, eps, s.ground_size())) {
        return 0;
    }
    let raw = (s.len() as f64).ln() / to_f64(eps);
    (raw - 1e-9).ceil().max(1.0) as usize
}

/// Greedy max-coverage ε-net; ties go to the smallest element.
pub fn epsilon_net_greedy(s: &SetSystem, eps: &Rational) -> Result<Vec<usize>> {
    if !eps.is_positive() || eps > &int(1) {
        return Err(Error::invalid("epsilon-net needs 0 < eps <= 1"));
    }
    let mut pending: Vec<&FixedBitSet> = s.sets().iter().filter(|h| is_large(h, eps, s.ground_size())).collect();
    let mut net = Vec::new();
    while !pending.is_empty() {
        let mut counts = vec![0usize; s.ground_size()];
        for h in &pending {
            for e in h.ones() {
                counts[e] += 1;
            }
        }
        let pick = (0..s.ground_size())
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .filter(|&e| counts[e] > 0)
            .ok_or_else(|| Error::Internal("large set with no elements".into()))?;
        net.push(pick);
        pending.retain(|h| !h.contains(pick));
    }
    net.sort_unstable();
    let bound = epsilon_net_size_bound(s, eps);
    if net.len() > bound {
        return Err(Error::Internal(format!(
            "greedy net of size {} exceeds ln|H|/eps bound {bound}",
            net.len()
        )));
    }
    Ok(net)
}

/// Sample size `ceil(c * (d + ln(1/gamma)) / eps^2)`, at least 1.
pub fn approximation_sample_size(eps: &Rational, gamma: &Rational, d: usize, c_approx: f64) -> usize {
    let e = to_f64(eps);
    let g = to_f64(gamma);
    let raw = c_approx * (d as f64 + (1.0 / g).ln()) / (e * e);
    (raw - 1e-9).ceil().max(1.0) as usize
}

/// Exact check of `|H| ∈ [(n/|S|)|H ∩ S| ± eps n]` for every member; `sample`
/// is a multiset.
pub fn is_epsilon_approximation(s: &SetSystem, eps: &Rational, sample: &[usize]) -> bool {
    if sample.is_empty() {
        return false;
    }
    let n = int(s.ground_size() as i64);
    let m = int(sample.len() as i64);
    let slack = eps * &n * &m;
    s.sets().iter().all(|h| {
        let size = int(h.count_ones(..) as i64);
        let hits = int(sample.iter().filter(|&&e| h.contains(e)).count() as i64);
        (size * &m - &n * hits).abs() <= slack
    })
}

#[derive(Clone, Debug)]
pub struct SamplingOptions {
    /// Constant in front of the sample-size bound.
    pub c_approx: f64,
    /// Verified attempts before giving up.
    pub attempts: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            c_approx: 1.0,
            attempts: 10,
        }
    }
}

/// One uniform with-replacement sample of the given size.
pub fn uniform_sample(ground_size: usize, size: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut out: Vec<usize> = (0..size).map(|_| rng.gen_range(0..ground_size)).collect();
    out.sort_unstable();
    out
}

/// Uniform multiset sample, verified exactly and redrawn on failure.
pub fn epsilon_approximation_sample(
    s: &SetSystem,
    eps: &Rational,
    gamma: &Rational,
    d: Option<usize>,
    seed: u64,
    opts: &SamplingOptions,
) -> Result<Vec<usize>> {
    let one = int(1);
    if !eps.is_positive() || eps >= &one || !gamma.is_positive() || gamma >= &one {
        return Err(Error::invalid("epsilon-approximation needs 0 < eps, gamma < 1"));
    }
    if s.ground_size() == 0 {
        return Err(Error::invalid("cannot sample from an empty ground set"));
    }
    let d = match d {
        Some(d) => d,
        None => vc_dimension_exact(s)?.max(0) as usize,
    };
    let size = approximation_sample_size(eps, gamma, d, opts.c_approx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.attempts {
        let sample = uniform_sample(s.ground_size(), size, &mut rng);
        if is_epsilon_approximation(s, eps, &sample) {
            return Ok(sample);
        }
    }
    Err(Error::ApproximationFailed(opts.attempts))
}

/// Default cap on the number of `s`-subsets scanned by [`sauer_shelah_check`].
pub const DEFAULT_SAUER_SHELAH_WORK: u128 = 5_000_000;

/// Checks `max_{|X| = s} |H ∩ X| <= (e s / d)^d` with `d` the VC dimension.
pub fn sauer_shelah_check(s: &SetSystem, size: usize) -> Result<bool> {
    let d = vc_dimension_exact(s)?;
    if d < 1 || (size as i64) < d || size > s.ground_size() || size > 63 {
        return Err(Error::invalid("Sauer-Shelah check needs 1 <= d <= s <= ground size"));
    }
    let subsets = binomial(s.ground_size(), size);
    if subsets > DEFAULT_SAUER_SHELAH_WORK {
        return Err(Error::budget(
            "Sauer-Shelah subsets",
            subsets,
            DEFAULT_SAUER_SHELAH_WORK,
        ));
    }
    let d = d as f64;
    let bound = (std::f64::consts::E * size as f64 / d).powf(d);
    let mut x: Vec<usize> = (0..size).collect();
    loop {
        if s.trace_count(&x) as f64 > bound + 1e-9 {
            return Ok(false);
        }
        if !next_combination(&mut x, s.ground_size()) {
            return Ok(true);
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Advances `x` to the next `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(x: &mut [usize], n: usize) -> bool {
    let k = x.len();
    for i in (0..k).rev() {
        if x[i] < n - k + i {
            x[i] += 1;
            for j in i + 1..k {
                x[j] = x[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `|H| / n` as a float, for reporting.
pub fn density(h: &FixedBitSet, ground: usize) -> f64 {
    h.count_ones(..) as f64 / ground as f64
}
