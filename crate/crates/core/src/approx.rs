//! Additive approximation for QAP and graph edit distance: enumerate small
//! partial injections α, solve the α-guided LP relaxation, round it to a
//! matching, complete it, and keep the cheapest bijection found.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edit_cost, Assignment, Graph, PartialInjection};
use crate::lp::{simplex, Constraint, GeneralLp, HybridRational, LpResult, LpScalar, Sense};
use crate::qap::{b_alpha, ged_to_qap, qap_cost, weighted_ged_to_qap, QapInstance};
use crate::rational::{as_string, int, to_f64, Rational};
use crate::setsystem::binomial;

/// `ceil(c_m * B^2 / eps^2 * (d + ln K))`, clamped to `[1, n]`.
pub fn m_bound(bound: &Rational, eps: &Rational, d: usize, k: usize, n: usize, c_m: f64) -> Result<usize> {
    if !bound.is_positive() || !eps.is_positive() || k == 0 || c_m.is_nan() || c_m <= 0.0 {
        return Err(Error::invalid("m_bound needs B, eps, K and C_m positive"));
    }
    let (b, e) = (to_f64(bound), to_f64(eps));
    let raw = c_m * b * b / (e * e) * (d as f64 + (k as f64).ln());
    let m = (raw - 1e-9).ceil().max(1.0) as usize;
    Ok(m.clamp(1, n.max(1)))
}

/// Two-sided row `lo <= coeffs · x <= hi` for one pair `(v, v')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandRow {
    pub v: usize,
    pub vp: usize,
    /// Nonzero `(w * n + w', c(v, v', w, w'))` entries.
    pub coeffs: Vec<(usize, Rational)>,
    pub lo: Rational,
    pub hi: Rational,
}

/// `minimise Σ b_α(v,v') x(v,v')` over the assignment polytope, subject to
/// `|a(v,v') · x − b_α(v,v')| <= eps n / 3` for every pair. Variable `(v, v')`
/// has index `v * n + v'`; the assignment rows are implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<Rational>,
    pub bands: Vec<BandRow>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.n * self.n
    }

    pub fn assignment_row_count(&self) -> usize {
        2 * self.n
    }

    pub fn inequality_row_count(&self) -> usize {
        2 * self.bands.len()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, xi)| c * xi).sum()
    }

    /// Objective of a (partial) matching.
    pub fn matching_objective(&self, pairs: &[(usize, usize)]) -> Rational {
        pairs.iter().map(|&(v, vp)| &self.objective[v * self.n + vp]).sum()
    }

    /// Exact feasibility check of a candidate point.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        let n = self.n;
        if x.len() != n * n || x.iter().any(|xi| xi.is_negative()) {
            return false;
        }
        let one = int(1);
        for i in 0..n {
            let row: Rational = (0..n).map(|j| &x[i * n + j]).sum();
            let col: Rational = (0..n).map(|j| &x[j * n + i]).sum();
            if row != one || col != one {
                return false;
            }
        }
        self.bands.iter().all(|b| {
            let lhs: Rational = b.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
            b.lo <= lhs && lhs <= b.hi
        })
    }
}

pub fn build_alpha_lp(q: &QapInstance, alpha: &PartialInjection, eps: &Rational) -> Result<LinearProgram> {
    if alpha.is_empty() {
        return Err(Error::invalid("the LP needs a non-empty partial injection"));
    }
    if !eps.is_positive() {
        return Err(Error::invalid("eps must be positive"));
    }
    let n = q.n();
    let slack = eps * int(n as i64) / int(3);
    let mut objective = Vec::with_capacity(n * n);
    let mut bands = Vec::with_capacity(n * n);
    for v in 0..n {
        for vp in 0..n {
            let b = b_alpha(q, alpha, v, vp)?;
            let mut coeffs = Vec::new();
            for w in 0..n {
                for wp in 0..n {
                    let c = q.coeff(v, vp, w, wp);
                    if !c.is_zero() {
                        coeffs.push((w * n + wp, c.clone()));
                    }
                }
            }
            bands.push(BandRow {
                v,
                vp,
                coeffs,
                lo: &b - &slack,
                hi: &b + &slack,
            });
            objective.push(b);
        }
    }
    Ok(LinearProgram { n, objective, bands })
}

/// Bounds on `coeffs · x` over the assignment polytope, from per-row and
/// per-column extremes.
fn activity_range(n: usize, coeffs: &[(usize, Rational)]) -> (Rational, Rational) {
    let mut dense = vec![<Rational as Zero>::zero(); n * n];
    for (j, a) in coeffs {
        dense[*j] = a.clone();
    }
    let extreme = |by_row: bool, pick_max: bool| -> Rational {
        (0..n)
            .map(|i| {
                let line = (0..n).map(|j| if by_row { &dense[i * n + j] } else { &dense[j * n + i] });
                if pick_max { line.max() } else { line.min() }
                    .cloned()
                    .unwrap_or_default()
            })
            .sum()
    };
    let lo = extreme(true, false).max(extreme(false, false));
    let hi = extreme(true, true).min(extreme(false, true));
    (lo, hi)
}

/// Band rows that still constrain the polytope, merged by coefficient vector.
/// `None` when some row can never be satisfied.
type PresolvedRow = (Vec<(usize, Rational)>, Option<Rational>, Option<Rational>);

fn presolve(lp: &LinearProgram) -> Option<Vec<PresolvedRow>> {
    let mut merged: BTreeMap<&[(usize, Rational)], (Rational, Rational)> = BTreeMap::new();
    for b in &lp.bands {
        let entry = merged.entry(&b.coeffs).or_insert_with(|| (b.lo.clone(), b.hi.clone()));
        if b.lo > entry.0 {
            entry.0 = b.lo.clone();
        }
        if b.hi < entry.1 {
            entry.1 = b.hi.clone();
        }
    }
    let mut rows = Vec::new();
    for (coeffs, (lo, hi)) in merged {
        if lo > hi {
            return None;
        }
        let (min, max) = activity_range(lp.n, coeffs);
        if max < lo || min > hi {
            return None;
        }
        let lo = (lo > min).then_some(lo);
        let hi = (hi < max).then_some(hi);
        if lo.is_some() || hi.is_some() {
            rows.push((coeffs.to_vec(), lo, hi));
        }
    }
    Some(rows)
}

fn to_general<T: LpScalar>(lp: &LinearProgram) -> Option<GeneralLp<T>> {
    let n = lp.n;
    let bands = presolve(lp)?;
    let mut constraints = Vec::with_capacity(2 * n + 2 * bands.len());
    for i in 0..n {
        for by_row in [true, false] {
            constraints.push(Constraint {
                coeffs: (0..n)
                    .map(|j| (if by_row { i * n + j } else { j * n + i }, T::one()))
                    .collect(),
                sense: Sense::Eq,
                rhs: T::one(),
            });
        }
    }
    for (coeffs, lo, hi) in bands {
        let converted: Vec<(usize, T)> = coeffs.iter().map(|(j, a)| (*j, T::from_rational(a))).collect();
        if let Some(lo) = lo {
            constraints.push(Constraint {
                coeffs: converted.clone(),
                sense: Sense::Ge,
                rhs: T::from_rational(&lo),
            });
        }
        if let Some(hi) = hi {
            constraints.push(Constraint {
                coeffs: converted,
                sense: Sense::Le,
                rhs: T::from_rational(&hi),
            });
        }
    }
    Some(GeneralLp {
        num_vars: n * n,
        objective: lp.objective.iter().map(T::from_rational).collect(),
        constraints,
    })
}

/// An optimal point of the LP; `values[v * n + v']`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution<T = Rational> {
    pub n: usize,
    pub values: Vec<T>,
    pub objective: T,
}

impl<T: LpScalar> FractionalSolution<T> {
    pub fn value(&self, v: usize, vp: usize) -> &T {
        &self.values[v * self.n + vp]
    }
}

/// Solves the LP with scalar type `T`; `Ok(None)` means infeasible.
pub fn solve_lp_with<T: LpScalar>(lp: &LinearProgram) -> Result<Option<FractionalSolution<T>>> {
    let Some(general) = to_general::<T>(lp) else {
        return Ok(None);
    };
    match simplex(&general)? {
        LpResult::Optimal { x, objective } => Ok(Some(FractionalSolution {
            n: lp.n,
            values: x,
            objective,
        })),
        LpResult::Infeasible => Ok(None),
        LpResult::Unbounded => Err(Error::Numerical("bounded LP reported unbounded".into())),
    }
}

/// Exact rational solve.
pub fn solve_lp(lp: &LinearProgram) -> Result<Option<FractionalSolution>> {
    Ok(solve_lp_with::<HybridRational>(lp)?.map(|f| FractionalSolution {
        n: f.n,
        values: f.values.iter().map(HybridRational::to_rational).collect(),
        objective: f.objective.to_rational(),
    }))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpBackend {
    /// Rational simplex, exact optimum.
    #[default]
    Exact,
    /// `f64` simplex with tolerance [`crate::lp::FLOAT_TOLERANCE`].
    Float,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingOptions {
    pub retries: usize,
    /// Prefer roundings with `Σ b_α z <= ζ` before comparing objectives.
    pub zeta_row: bool,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        RoundingOptions {
            retries: 32,
            zeta_row: false,
        }
    }
}

/// Visits sources in random order, drawing each target in proportion to its
/// remaining fractional mass; draws below `1/(2n)` are discarded.
fn round_once(x: &[f64], n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let floor = 1.0 / (2.0 * n as f64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut used = vec![false; n];
    let mut pairs = Vec::new();
    for v in order {
        let weight = |t: usize| if used[t] { 0.0 } else { x[v * n + t].max(0.0) };
        let total: f64 = (0..n).map(weight).sum();
        if total <= 1e-12 {
            continue;
        }
        let mut r = rng.gen::<f64>() * total;
        let mut pick = None;
        for t in 0..n {
            let w = weight(t);
            if w <= 0.0 {
                continue;
            }
            pick = Some(t);
            if r < w {
                break;
            }
            r -= w;
        }
        let t = pick.expect("positive total mass");
        if x[v * n + t] + 1e-12 >= floor {
            used[t] = true;
            pairs.push((v, t));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// ζ-row violation, then more pairs, then lower objective.
type RoundingKey = (bool, std::cmp::Reverse<usize>, Rational);

/// Best of `retries` seeded roundings: most matched pairs, then lowest LP objective.
pub fn round_apec<T: LpScalar>(
    frac: &FractionalSolution<T>,
    lp: &LinearProgram,
    seed: u64,
    opts: &RoundingOptions,
) -> PartialInjection {
    let x: Vec<f64> = frac.values.iter().map(LpScalar::to_f64).collect();
    let zeta = frac.objective.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(RoundingKey, Vec<(usize, usize)>)> = None;
    for _ in 0..opts.retries.max(1) {
        let pairs = round_once(&x, frac.n, &mut rng);
        let obj = lp.matching_objective(&pairs);
        let over_zeta = opts.zeta_row && to_f64(&obj) > zeta + 1e-9;
        let key = (over_zeta, std::cmp::Reverse(pairs.len()), obj);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, pairs));
        }
    }
    let pairs = best.map(|b| b.1).unwrap_or_default();
    PartialInjection::new(pairs).expect("rounding keeps targets distinct")
}

/// Unmatched sources, in increasing order, take the smallest unused target.
pub fn complete_matching(partial: &PartialInjection, n: usize) -> Result<Assignment> {
    if !partial.is_within(n) {
        return Err(Error::invalid("partial matching outside the order"));
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(v, t) in partial.pairs() {
        map[v] = t;
        used[t] = true;
    }
    let mut free = (0..n).filter(|&t| !used[t]).collect::<Vec<_>>().into_iter();
    for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = free.next().expect("as many free targets as free sources");
    }
    Assignment::new(map)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every partial injection of each size up to `m`.
    #[default]
    Exhaustive,
    /// A fixed number of seeded random partial injections per size; no guarantee.
    Sampled,
}

#[derive(Clone, Debug)]
pub struct ApproxOptions {
    pub backend: LpBackend,
    pub rounding: RoundingOptions,
    /// Partial injections drawn per size in sampled mode.
    pub samples_per_size: usize,
    pub trace: bool,
    /// Cap on the number of partial injections processed.
    pub max_alphas: u128,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            backend: LpBackend::Exact,
            rounding: RoundingOptions::default(),
            samples_per_size: 64,
            trace: false,
            max_alphas: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaTrace {
    pub alpha: PartialInjection,
    /// LP optimum, absent when infeasible.
    pub zeta: Option<String>,
    #[serde(with = "crate::rational::as_string_opt")]
    pub cost: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub best_assignment: Assignment,
    #[serde(with = "as_string")]
    pub best_cost: Rational,
    pub alphas_tried: usize,
    pub lps_infeasible: usize,
    pub seed: u64,
    pub mode: Mode,
    pub m: usize,
    #[serde(with = "as_string")]
    pub eps: Rational,
    pub backend: LpBackend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<AlphaTrace>>,
}

/// Number of partial injections of size `s` on `[n]`.
pub fn alpha_count(n: usize, s: usize) -> u128 {
    binomial(n, s) * (n - s.min(n) + 1..=n).map(|x| x as u128).product::<u128>()
}

/// All partial injections of size `s`, by source set then target tuple, both lexicographic.
pub fn alphas_of_size(n: usize, s: usize) -> Vec<PartialInjection> {
    let mut out = Vec::new();
    if s > n {
        return out;
    }
    let mut sources: Vec<usize> = (0..s).collect();
    loop {
        let mut targets = Vec::with_capacity(s);
        let mut used = vec![false; n];
        arrangements(n, s, &mut targets, &mut used, &mut |t| {
            let pairs = sources.iter().copied().zip(t.iter().copied()).collect();
            out.push(PartialInjection::new(pairs).expect("distinct sources and targets"));
        });
        if !crate::setsystem::next_combination(&mut sources, n) {
            return out;
        }
    }
}

fn arrangements(n: usize, s: usize, cur: &mut Vec<usize>, used: &mut [bool], emit: &mut impl FnMut(&[usize])) {
    if cur.len() == s {
        emit(cur);
        return;
    }
    for t in 0..n {
        if !used[t] {
            used[t] = true;
            cur.push(t);
            arrangements(n, s, cur, used, emit);
            cur.pop();
            used[t] = false;
        }
    }
}

fn sample_alphas(n: usize, s: usize, count: usize, rng: &mut impl Rng) -> Vec<PartialInjection> {
    (0..count)
        .map(|_| {
            let mut sources = rand::seq::index::sample(rng, n, s).into_vec();
            sources.sort_unstable();
            let targets = rand::seq::index::sample(rng, n, s).into_vec();
            PartialInjection::new(sources.into_iter().zip(targets).collect()).expect("distinct indices")
        })
        .collect()
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct AlphaOutcome {
    zeta: Option<String>,
    result: Option<(Assignment, Rational)>,
}

fn run_alpha(
    q: &QapInstance,
    alpha: &PartialInjection,
    eps: &Rational,
    seed: u64,
    opts: &ApproxOptions,
) -> Result<AlphaOutcome> {
    let lp = build_alpha_lp(q, alpha, eps)?;
    let rounded = match opts.backend {
        LpBackend::Exact => solve_lp(&lp)?.map(|f| {
            let z = f.objective.to_string();
            (z, round_apec(&f, &lp, seed, &opts.rounding))
        }),
        LpBackend::Float => solve_lp_with::<f64>(&lp)?.map(|f| {
            let z = format!("{:.9}", f.objective);
            (z, round_apec(&f, &lp, seed, &opts.rounding))
        }),
    };
    let Some((zeta, partial)) = rounded else {
        return Ok(AlphaOutcome {
            zeta: None,
            result: None,
        });
    };
    let phi = complete_matching(&partial, q.n())?;
    let cost = qap_cost(q, &phi)?;
    Ok(AlphaOutcome {
        zeta: Some(zeta),
        result: Some((phi, cost)),
    })
}

/// Partial injections processed between early-termination checks.
const BATCH: usize = 64;

pub fn approximate_qap(
    q: &QapInstance,
    eps: &Rational,
    m: usize,
    seed: u64,
    mode: Mode,
    opts: &ApproxOptions,
) -> Result<ApproxReport> {
    let n = q.n();
    if m < 1 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if !eps.is_positive() {
        return Err(Error::invalid("eps must be positive"));
    }
    let m = m.min(n);
    let alphas: Vec<PartialInjection> = match mode {
        Mode::Exhaustive => {
            let total: u128 = (1..=m).map(|s| alpha_count(n, s)).sum();
            if total > opts.max_alphas {
                return Err(Error::budget("partial injections", total, opts.max_alphas));
            }
            (1..=m).flat_map(|s| alphas_of_size(n, s)).collect()
        }
        Mode::Sampled => {
            let total = (m * opts.samples_per_size) as u128;
            if total > opts.max_alphas {
                return Err(Error::budget("partial injections", total, opts.max_alphas));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            (1..=m)
                .flat_map(|s| sample_alphas(n, s, opts.samples_per_size, &mut rng))
                .collect()
        }
    };
    let stop_at_zero = q.is_nonnegative();
    let mut best: Option<(Assignment, Rational)> = None;
    let mut tried = 0;
    let mut infeasible = 0;
    let mut trace = opts.trace.then(Vec::new);
    'batches: for (b, chunk) in alphas.chunks(BATCH).enumerate() {
        let outcomes: Vec<Result<AlphaOutcome>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, alpha)| run_alpha(q, alpha, eps, mix_seed(seed, (b * BATCH + i) as u64), opts))
            .collect();
        for (alpha, outcome) in chunk.iter().zip(outcomes) {
            let outcome = outcome?;
            tried += 1;
            if let Some(t) = trace.as_mut() {
                t.push(AlphaTrace {
                    alpha: alpha.clone(),
                    zeta: outcome.zeta.clone(),
                    cost: outcome.result.as_ref().map(|r| r.1.clone()),
                });
            }
            match outcome.result {
                None => infeasible += 1,
                Some((phi, cost)) => {
                    if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                        best = Some((phi, cost));
                    }
                }
            }
            if stop_at_zero && best.as_ref().is_some_and(|(_, c)| c.is_zero()) {
                break 'batches;
            }
        }
    }
    let (best_assignment, best_cost) = match best {
        Some(b) => b,
        None => {
            let phi = Assignment::identity(n);
            let cost = qap_cost(q, &phi)?;
            (phi, cost)
        }
    };
    Ok(ApproxReport {
        best_assignment,
        best_cost,
        alphas_tried: tried,
        lps_infeasible: infeasible,
        seed,
        mode,
        m,
        eps: eps.clone(),
        backend: opts.backend,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GedApproximation {
    pub assignment: Assignment,
    pub cost: Rational,
    pub report: ApproxReport,
}

/// Runs [`approximate_qap`] on the edit-distance reduction with `2 eps`,
/// compensating for each edge being counted twice.
pub fn approximate_ged(
    g: &Graph,
    h: &Graph,
    eps: &Rational,
    m: usize,
    seed: u64,
    mode: Mode,
    opts: &ApproxOptions,
) -> Result<GedApproximation> {
    if g.n() != h.n() {
        return Err(Error::OrderMismatch(g.n(), h.n()));
    }
    if g.is_coloured() || h.is_coloured() {
        return Err(Error::invalid(
            "the approximation does not enforce colour preservation; strip colours first",
        ));
    }
    let q = if g.is_weighted() || h.is_weighted() {
        weighted_ged_to_qap(g, h)?
    } else {
        ged_to_qap(g, h)?
    };
    let report = approximate_qap(&q, &(eps * int(2)), m, seed, mode, opts)?;
    let cost = edit_cost(g, h, &report.best_assignment)?;
    Ok(GedApproximation {
        assignment: report.best_assignment.clone(),
        cost,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edit_distance_bruteforce;
    use crate::qap::qap_bruteforce;
    use crate::rational::ratio;

    #[test]
    fn m_bound_examples() {
        assert_eq!(m_bound(&int(1), &int(1), 1, 2, 100, 1.0).unwrap(), 2);
        assert_eq!(m_bound(&int(1), &ratio(1, 2), 3, 2, 100, 1.0).unwrap(), 15);
        assert_eq!(m_bound(&int(1), &ratio(1, 2), 3, 2, 6, 1.0).unwrap(), 6);
        assert!(m_bound(&int(1), &int(1), 1, 2, 100, 0.0).is_err());
        assert!(m_bound(&int(0), &int(1), 1, 2, 100, 1.0).is_err());
    }

    #[test]
    fn lp_shape_for_order_two() {
        let q = QapInstance::from_fn(2, |v, vp, w, wp| int((v + vp + w + wp) as i64 % 2));
        let alpha = PartialInjection::new(vec![(0, 0)]).unwrap();
        let lp = build_alpha_lp(&q, &alpha, &int(1)).unwrap();
        assert_eq!(lp.num_vars(), 4);
        assert_eq!(lp.assignment_row_count(), 4);
        assert_eq!(lp.inequality_row_count(), 8);
        assert!(build_alpha_lp(&q, &PartialInjection::default(), &int(1)).is_err());
    }

    #[test]
    fn zero_instance_lp() {
        let q = QapInstance::zero(3);
        let alpha = PartialInjection::new(vec![(1, 2)]).unwrap();
        let lp = build_alpha_lp(&q, &alpha, &int(1)).unwrap();
        assert!(lp.objective.iter().all(Zero::is_zero));
        assert!(lp
            .bands
            .iter()
            .all(|b| b.coeffs.is_empty() && b.lo == int(-1) && b.hi == int(1)));
        let sol = solve_lp(&lp).unwrap().unwrap();
        assert!(sol.objective.is_zero());
        assert!(lp.is_feasible(&sol.values));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let q = QapInstance::from_fn(3, |_, _, _, _| int(1));
        let alpha = PartialInjection::new(vec![(0, 0)]).unwrap();
        let mut lp = build_alpha_lp(&q, &alpha, &int(1)).unwrap();
        // a · x = 3 on the polytope; demand at least 3 + 3 + 1.
        lp.bands[0].lo = int(7);
        lp.bands[0].hi = int(8);
        assert!(solve_lp(&lp).unwrap().is_none());
        assert!(solve_lp_with::<f64>(&lp).unwrap().is_none());
    }

    #[test]
    fn zeta_bound_on_triangle_vs_path() {
        let (g, h) = (Graph::complete(3), Graph::path(3));
        let q = ged_to_qap(&g, &h).unwrap();
        let (best, phi) = qap_bruteforce(&q).unwrap();
        let eps = int(2);
        let alpha = PartialInjection::from_assignment(&phi);
        let lp = build_alpha_lp(&q, &alpha, &eps).unwrap();
        let sol = solve_lp(&lp).unwrap().unwrap();
        assert!(lp.is_feasible(&sol.values));
        assert!(sol.objective <= best + eps / int(3) * int(9));
    }

    #[test]
    fn exact_and_float_agree() {
        let (g, h) = (Graph::cycle(5), Graph::path(5));
        let q = ged_to_qap(&g, &h).unwrap();
        for alpha in alphas_of_size(5, 1).into_iter().take(8) {
            let lp = build_alpha_lp(&q, &alpha, &int(1)).unwrap();
            let exact = solve_lp(&lp).unwrap();
            let float = solve_lp_with::<f64>(&lp).unwrap();
            match (exact, float) {
                (Some(e), Some(f)) => assert!((to_f64(&e.objective) - f.objective).abs() < 1e-6),
                (None, None) => {}
                other => panic!("backends disagree: {other:?}"),
            }
        }
    }

    #[test]
    fn rounding_examples() {
        let n = 4;
        let lp = build_alpha_lp(
            &QapInstance::zero(n),
            &PartialInjection::new(vec![(0, 0)]).unwrap(),
            &int(1),
        )
        .unwrap();
        let phi = Assignment::new(vec![2, 0, 3, 1]).unwrap();
        let mut values = vec![int(0); n * n];
        for v in 0..n {
            values[v * n + phi.get(v)] = int(1);
        }
        let integral = FractionalSolution {
            n,
            values,
            objective: int(0),
        };
        let rounded = round_apec(&integral, &lp, 5, &RoundingOptions::default());
        assert_eq!(rounded, PartialInjection::from_assignment(&phi));

        let mut mix = vec![int(0); n * n];
        for v in 0..n {
            mix[v * n + v] += ratio(1, 2);
            mix[v * n + (n - 1 - v)] += ratio(1, 2);
        }
        let mixed = FractionalSolution {
            n,
            values: mix.clone(),
            objective: int(0),
        };
        for seed in 0..10 {
            let r = round_apec(&mixed, &lp, seed, &RoundingOptions::default());
            assert!(r.pairs().iter().all(|&(v, t)| mix[v * n + t] > int(0)));
        }

        let uniform = FractionalSolution {
            n: 3,
            values: vec![ratio(1, 3); 9],
            objective: int(0),
        };
        let lp3 = build_alpha_lp(
            &QapInstance::zero(3),
            &PartialInjection::new(vec![(0, 0)]).unwrap(),
            &int(1),
        )
        .unwrap();
        assert_eq!(round_apec(&uniform, &lp3, 11, &RoundingOptions::default()).len(), 3);
    }

    #[test]
    fn completion_examples() {
        let p = PartialInjection::new(vec![(0, 2)]).unwrap();
        assert_eq!(complete_matching(&p, 3).unwrap().as_slice(), &[2, 0, 1]);
        assert_eq!(
            complete_matching(&PartialInjection::default(), 3).unwrap(),
            Assignment::identity(3)
        );
        let full = PartialInjection::from_assignment(&Assignment::reversal(4));
        assert_eq!(complete_matching(&full, 4).unwrap(), Assignment::reversal(4));
    }

    #[test]
    fn alpha_enumeration_order_and_count() {
        let all = alphas_of_size(3, 2);
        assert_eq!(all.len() as u128, alpha_count(3, 2));
        assert_eq!(all.len(), 18);
        assert_eq!(all[0].pairs(), &[(0, 0), (1, 1)]);
        assert_eq!(all[1].pairs(), &[(0, 0), (1, 2)]);
        assert_eq!(all[6].pairs(), &[(0, 0), (2, 1)]);
        assert_eq!(alpha_count(6, 2), 450);
    }

    #[test]
    fn approximation_examples() {
        let opts = ApproxOptions::default();
        let zero = approximate_qap(&QapInstance::zero(4), &int(1), 2, 1, Mode::Exhaustive, &opts).unwrap();
        assert!(zero.best_cost.is_zero());
        assert_eq!(zero.alphas_tried, 1);

        let (g, h) = (Graph::complete(3), Graph::path(3));
        let r = approximate_ged(&g, &h, &int(1), 2, 3, Mode::Exhaustive, &opts).unwrap();
        assert!(r.cost <= int(10));
        assert_eq!(r.cost, edit_cost(&g, &h, &r.assignment).unwrap());
        assert_eq!(
            r.report.best_cost,
            qap_cost(&ged_to_qap(&g, &h).unwrap(), &r.assignment).unwrap()
        );

        let two_triangles = Graph::complete(3).disjoint_union(&Graph::complete(3));
        let c6 = Graph::cycle(6);
        let q = ged_to_qap(&two_triangles, &c6).unwrap();
        let (opt, _) = qap_bruteforce(&q).unwrap();
        let r = approximate_qap(&q, &int(1), 2, 9, Mode::Exhaustive, &opts).unwrap();
        assert!(r.best_cost <= opt + int(36));

        let mut a = Graph::empty(2);
        a.add_weighted_edge(0, 1, int(3)).unwrap();
        let mut b = Graph::empty(2);
        b.add_weighted_edge(0, 1, int(1)).unwrap();
        let r = approximate_ged(&a, &b, &int(1), 2, 0, Mode::Exhaustive, &opts).unwrap();
        assert_eq!(edit_distance_bruteforce(&a, &b).unwrap().0, int(2));
        assert!(r.cost <= int(6));
    }

    #[test]
    fn reports_are_deterministic_and_serialise_rationals() {
        let (g, h) = (Graph::cycle(5), Graph::path(5));
        let q = ged_to_qap(&g, &h).unwrap();
        let opts = ApproxOptions {
            trace: true,
            ..ApproxOptions::default()
        };
        let a = approximate_qap(&q, &ratio(1, 2), 1, 42, Mode::Sampled, &opts).unwrap();
        let b = approximate_qap(&q, &ratio(1, 2), 1, 42, Mode::Sampled, &opts).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["eps"], "1/2");
        assert!(json["best_cost"].is_string());
        let back: ApproxReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn coloured_inputs_are_rejected() {
        let g = Graph::path(3).with_colours(vec![0, 1, 0]).unwrap();
        let opts = ApproxOptions::default();
        assert!(approximate_ged(&g, &g, &int(1), 1, 0, Mode::Exhaustive, &opts).is_err());
    }
}
