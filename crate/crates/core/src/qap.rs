//! Quadratic assignment instances, the edit-distance reductions, and the
//! threshold discretisation used to estimate `b_alpha` from set sizes.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{Assignment, Graph, PartialInjection};
use crate::rational::{common_denominator, int, scaled_integer, Rational};

/// Default cap on the order accepted by [`qap_bruteforce`].
pub const DEFAULT_QAP_CAP: usize = 9;

/// Orders at or above this use sparse coefficient storage.
pub const SPARSE_FROM_ORDER: usize = 12;

static ZERO: LazyLock<Rational> = LazyLock::new(Rational::zero);

#[derive(Clone, Debug, PartialEq, Eq)]
enum Coefficients {
    Dense(Vec<Rational>),
    Sparse(BTreeMap<[usize; 4], Rational>),
}

/// Integer copy of a dense table: `values[i] = coeff[i] * scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ScaledTable {
    scale: i64,
    values: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QapInstance {
    n: usize,
    coeffs: Coefficients,
    bound: Rational,
    scaled: Option<ScaledTable>,
}

impl QapInstance {
    pub fn zero(n: usize) -> Self {
        Self::from_entries(n, std::iter::empty()).expect("empty entry list is valid")
    }

    /// Builds an instance from explicit entries; unlisted coefficients are 0.
    /// Later duplicates overwrite earlier ones.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = ([usize; 4], Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, value) in entries {
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::VertexOutOfRange { vertex: bad, n });
            }
            if value.is_zero() {
                map.remove(&idx);
            } else {
                map.insert(idx, value);
            }
        }
        Ok(Self::from_map(n, map))
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Rational) -> Self {
        let mut map = BTreeMap::new();
        for v in 0..n {
            for vp in 0..n {
                for w in 0..n {
                    for wp in 0..n {
                        let c = f(v, vp, w, wp);
                        if !c.is_zero() {
                            map.insert([v, vp, w, wp], c);
                        }
                    }
                }
            }
        }
        Self::from_map(n, map)
    }

    fn from_map(n: usize, map: BTreeMap<[usize; 4], Rational>) -> Self {
        let bound = map.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero);
        let coeffs = if n >= SPARSE_FROM_ORDER {
            Coefficients::Sparse(map)
        } else {
            let mut dense = vec![Rational::zero(); n.pow(4)];
            for ([v, vp, w, wp], c) in map {
                dense[((v * n + vp) * n + w) * n + wp] = c;
            }
            Coefficients::Dense(dense)
        };
        let scaled = match &coeffs {
            Coefficients::Dense(values) => scale_table(values),
            Coefficients::Sparse(_) => None,
        };
        QapInstance {
            n,
            coeffs,
            bound,
            scaled,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `B = max |c|`.
    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.coeffs, Coefficients::Sparse(_))
    }

    pub fn coeff(&self, v: usize, vp: usize, w: usize, wp: usize) -> &Rational {
        let n = self.n;
        match &self.coeffs {
            Coefficients::Dense(d) => &d[((v * n + vp) * n + w) * n + wp],
            Coefficients::Sparse(m) => m.get(&[v, vp, w, wp]).unwrap_or(&ZERO),
        }
    }

    /// Nonzero coefficients in lexicographic index order.
    pub fn nonzero_entries(&self) -> Vec<([usize; 4], Rational)> {
        match &self.coeffs {
            Coefficients::Sparse(m) => m.iter().map(|(k, v)| (*k, v.clone())).collect(),
            Coefficients::Dense(d) => {
                let n = self.n;
                d.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| {
                        let idx = [i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n];
                        (idx, c.clone())
                    })
                    .collect()
            }
        }
    }

    /// Whether some coefficient is implicitly zero (not stored).
    fn has_implicit_zero(&self) -> bool {
        let stored = match &self.coeffs {
            Coefficients::Sparse(m) => m.len(),
            Coefficients::Dense(d) => d.iter().filter(|c| !c.is_zero()).count(),
        };
        stored < self.n.pow(4)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonzero_entries().iter().all(|(_, c)| !c.is_negative())
    }

    /// Sorted distinct coefficient values, including the implicit 0.
    pub fn distinct_values(&self) -> Vec<Rational> {
        let mut vals: Vec<Rational> = self.nonzero_entries().into_iter().map(|(_, c)| c).collect();
        if self.has_implicit_zero() {
            vals.push(Rational::zero());
        }
        vals.sort();
        vals.dedup();
        vals
    }

    /// Candidate thresholds: one value below the minimum, then every distinct value.
    pub fn thresholds(&self) -> Vec<Rational> {
        let values = self.distinct_values();
        let mut out = Vec::with_capacity(values.len() + 1);
        if let Some(min) = values.first() {
            out.push(min - int(1));
        } else {
            out.push(int(-1));
        }
        out.extend(values);
        out
    }

    /// `c(v, v', w, w') > t`.
    pub fn exceeds(&self, v: usize, vp: usize, w: usize, wp: usize, t: &Rational) -> bool {
        self.coeff(v, vp, w, wp) > t
    }

    fn scaled_index(&self, v: usize, vp: usize, w: usize, wp: usize) -> usize {
        let n = self.n;
        ((v * n + vp) * n + w) * n + wp
    }
}

fn scale_table(values: &[Rational]) -> Option<ScaledTable> {
    let scale = common_denominator(values.iter().filter(|c| !c.is_zero()))?;
    let ints = values
        .iter()
        .map(|c| scaled_integer(c, scale).filter(|x| x.unsigned_abs() < 1 << 40))
        .collect::<Option<Vec<i64>>>()?;
    Some(ScaledTable { scale, values: ints })
}

fn check_phi(q: &QapInstance, phi: &Assignment) -> Result<()> {
    if phi.len() != q.n() {
        return Err(Error::OrderMismatch(q.n(), phi.len()));
    }
    Ok(())
}

/// `sum_v sum_w c(v, phi(v), w, phi(w))`, diagonal terms included.
pub fn qap_cost(q: &QapInstance, phi: &Assignment) -> Result<Rational> {
    check_phi(q, phi)?;
    let n = q.n();
    if let Some(table) = &q.scaled {
        let mut total: i128 = 0;
        for v in 0..n {
            for w in 0..n {
                total += table.values[q.scaled_index(v, phi.get(v), w, phi.get(w))] as i128;
            }
        }
        return Ok(Rational::new(total.into(), table.scale.into()));
    }
    let mut total = Rational::zero();
    for v in 0..n {
        for w in 0..n {
            total += q.coeff(v, phi.get(v), w, phi.get(w));
        }
    }
    Ok(total)
}

/// 0/1 instance: `c = 1` iff `vw ∈ E(G)` disagrees with `v'w' ∈ E(H)`.
/// Vertex colours are ignored.
pub fn ged_to_qap(g: &Graph, h: &Graph) -> Result<QapInstance> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    if g.is_weighted() || h.is_weighted() {
        return Err(Error::WeightedInput);
    }
    Ok(QapInstance::from_fn(g.n(), |v, vp, w, wp| {
        int((g.has_edge(v, w) != h.has_edge(vp, wp)) as i64)
    }))
}

/// `c = |ω_G(v, w) − ω_H(v', w')|`, with non-edges (and the diagonal) weighing 0.
pub fn weighted_ged_to_qap(g: &Graph, h: &Graph) -> Result<QapInstance> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    let n = g.n();
    let wg: Vec<Vec<Rational>> = (0..n).map(|v| (0..n).map(|w| g.weight(v, w)).collect()).collect();
    let wh: Vec<Vec<Rational>> = (0..n).map(|v| (0..n).map(|w| h.weight(v, w)).collect()).collect();
    Ok(QapInstance::from_fn(n, |v, vp, w, wp| (&wg[v][w] - &wh[vp][wp]).abs()))
}

pub fn qap_bruteforce(q: &QapInstance) -> Result<(Rational, Assignment)> {
    qap_bruteforce_capped(q, DEFAULT_QAP_CAP)
}

/// Minimum cost over all `n!` assignments, lexicographically first minimiser.
pub fn qap_bruteforce_capped(q: &QapInstance, cap: usize) -> Result<(Rational, Assignment)> {
    let n = q.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let table = q
        .scaled
        .as_ref()
        .ok_or_else(|| Error::invalid("coefficients too fine for exact brute force"))?;
    let mut search = QapSearch {
        q,
        table: &table.values,
        prune: q.is_nonnegative(),
        current: vec![usize::MAX; n],
        used: vec![false; n],
        best: None,
    };
    search.descend(0, 0);
    let (cost, mapping) = search.best.expect("at least one assignment exists");
    Ok((
        Rational::new(cost.into(), table.scale.into()),
        Assignment::new(mapping)?,
    ))
}

struct QapSearch<'a> {
    q: &'a QapInstance,
    table: &'a [i64],
    prune: bool,
    current: Vec<usize>,
    used: Vec<bool>,
    best: Option<(i128, Vec<usize>)>,
}

impl QapSearch<'_> {
    fn descend(&mut self, v: usize, partial: i128) {
        let n = self.q.n();
        if self.prune {
            if let Some((b, _)) = &self.best {
                if partial >= *b {
                    return;
                }
            }
        }
        if v == n {
            if self.best.as_ref().is_none_or(|(b, _)| partial < *b) {
                self.best = Some((partial, self.current.clone()));
            }
            return;
        }
        for t in 0..n {
            if self.used[t] {
                continue;
            }
            let mut add = self.table[self.q.scaled_index(v, t, v, t)] as i128;
            for w in 0..v {
                let tw = self.current[w];
                add += self.table[self.q.scaled_index(v, t, w, tw)] as i128;
                add += self.table[self.q.scaled_index(w, tw, v, t)] as i128;
            }
            self.used[t] = true;
            self.current[v] = t;
            self.descend(v + 1, partial + add);
            self.used[t] = false;
        }
        self.current[v] = usize::MAX;
    }
}

/// `b_alpha(v, v') = (n / |alpha|) * sum_{(w, w') in alpha} c(v, v', w, w')`.
pub fn b_alpha(q: &QapInstance, alpha: &PartialInjection, v: usize, vp: usize) -> Result<Rational> {
    if alpha.is_empty() {
        return Err(Error::invalid("b_alpha needs a non-empty partial injection"));
    }
    if !alpha.is_within(q.n()) || v >= q.n() || vp >= q.n() {
        return Err(Error::invalid("index outside the instance order"));
    }
    let mut sum = Rational::zero();
    for &(w, wp) in alpha.pairs() {
        sum += q.coeff(v, vp, w, wp);
    }
    Ok(sum * Rational::new(q.n().into(), alpha.len().into()))
}

/// Left boundaries of `k = ceil(24 B / eps)` intervals of length `2B/k` covering `[-B, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdGrid {
    pub bound: Rational,
    pub k: usize,
    pub thresholds: Vec<Rational>,
}

impl ThresholdGrid {
    pub fn step(&self) -> Rational {
        &self.bound * int(2) / int(self.k as i64)
    }

    /// Index of the interval `[T_i, T_i + 2B/k)` holding `x`, if `-B <= x < B`.
    pub fn interval_of(&self, x: &Rational) -> Option<usize> {
        if x < &-self.bound.clone() || x >= &self.bound {
            return None;
        }
        let i = ((x + &self.bound) / self.step()).floor().to_integer();
        usize::try_from(i).ok()
    }
}

pub fn threshold_grid(bound: &Rational, eps: &Rational) -> Result<ThresholdGrid> {
    if !bound.is_positive() || !eps.is_positive() {
        return Err(Error::invalid("threshold grid needs B > 0 and eps > 0"));
    }
    let k = (bound * int(24) / eps).ceil().to_integer();
    let k = usize::try_from(k).map_err(|_| Error::invalid("threshold grid too fine"))?;
    let step = bound * int(2) / int(k as i64);
    let thresholds = (0..k).map(|i| -bound + &step * int(i as i64)).collect();
    Ok(ThresholdGrid {
        bound: bound.clone(),
        k,
        thresholds,
    })
}

/// Result of comparing `b_alpha` with its threshold-count estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanEstimate {
    pub b_alpha: Rational,
    pub lower: Rational,
    pub upper: Rational,
    pub contained: bool,
}

/// `|M^t_alpha(v, v')|`: pairs of `alpha` whose coefficient with `(v, v')` exceeds `t`.
pub fn restricted_count(q: &QapInstance, alpha: &PartialInjection, v: usize, vp: usize, t: &Rational) -> usize {
    alpha
        .pairs()
        .iter()
        .filter(|&&(w, wp)| q.exceeds(v, vp, w, wp, t))
        .count()
}

/// Checks `b_alpha ∈ [(2B/k) Σ_t (n/|α|)|M^t_α| − Bn ± (2B/k) n]`.
pub fn mean_threshold_estimate(
    q: &QapInstance,
    alpha: &PartialInjection,
    grid: &ThresholdGrid,
    v: usize,
    vp: usize,
) -> Result<MeanEstimate> {
    if &grid.bound < q.bound() {
        return Err(Error::invalid("grid bound is smaller than the instance bound"));
    }
    let b = b_alpha(q, alpha, v, vp)?;
    let n = int(q.n() as i64);
    let scale = Rational::new(q.n().into(), alpha.len().into());
    let total: usize = grid
        .thresholds
        .iter()
        .map(|t| restricted_count(q, alpha, v, vp, t))
        .sum();
    let step = grid.step();
    let centre = &step * scale * int(total as i64) - &grid.bound * &n;
    let slack = &step * &n;
    let lower = &centre - &slack;
    let upper = &centre + &slack;
    let contained = lower <= b && b <= upper;
    Ok(MeanEstimate {
        b_alpha: b,
        lower,
        upper,
        contained,
    })
}

/// Number of distinct coefficient values, the implicit 0 included.
pub fn distinct_value_count(q: &QapInstance) -> usize {
    q.distinct_values().len()
}
