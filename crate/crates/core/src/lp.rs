//! Two-phase dense simplex, generic over exact rationals and `f64`.
//!
//! Pivoting uses the most negative reduced cost and switches to Bland's rule
//! after a run of degenerate pivots, so the pivot sequence is deterministic and
//! always terminates. Row eliminations only touch the nonzero columns of the
//! pivot row, which keeps sparse assignment-style tableaus cheap.

use std::fmt::Debug;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// Arithmetic needed by the simplex.
pub trait LpScalar: Clone + Debug + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero_ish(&self) -> bool;
    fn is_positive_ish(&self) -> bool;
    fn is_negative_ish(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    /// `self -= factor * x`.
    fn sub_mul(&mut self, factor: &Self, x: &Self);
}

impl LpScalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        int(1)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
    fn is_zero_ish(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive_ish(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative_ish(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul(&mut self, factor: &Self, x: &Self) {
        *self -= factor * x;
    }
}

/// Exact rational that stays on machine integers until a result overflows.
#[derive(Clone, Debug)]
pub enum HybridRational {
    /// `num / den` in lowest terms with `den > 0`.
    Small(i64, i64),
    Big(Box<Rational>),
}

impl HybridRational {
    fn small(num: i128, den: i128) -> Self {
        let g = num::integer::gcd(num, den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => HybridRational::Small(n, d),
            _ => HybridRational::big(Rational::new(n.into(), d.into())),
        }
    }

    fn big(r: Rational) -> Self {
        match (i64::try_from(r.numer()), i64::try_from(r.denom())) {
            (Ok(n), Ok(d)) => HybridRational::Small(n, d),
            _ => HybridRational::Big(Box::new(r)),
        }
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            HybridRational::Small(n, d) => Rational::new((*n).into(), (*d).into()),
            HybridRational::Big(r) => (**r).clone(),
        }
    }

    fn signum(&self) -> i32 {
        match self {
            HybridRational::Small(n, _) => n.signum() as i32,
            HybridRational::Big(r) => {
                if Signed::is_positive(&**r) {
                    1
                } else if Signed::is_negative(&**r) {
                    -1
                } else {
                    0
                }
            }
        }
    }

    fn binary(
        &self,
        other: &Self,
        small: impl Fn(i128, i128, i128, i128) -> Option<(i128, i128)>,
        big: impl Fn(Rational, Rational) -> Rational,
    ) -> Self {
        if let (HybridRational::Small(a, b), HybridRational::Small(c, d)) = (self, other) {
            if let Some((n, d)) = small(*a as i128, *b as i128, *c as i128, *d as i128) {
                return HybridRational::small(n, d);
            }
        }
        HybridRational::big(big(self.to_rational(), other.to_rational()))
    }
}

impl PartialEq for HybridRational {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(std::cmp::Ordering::Equal)
    }
}

impl PartialOrd for HybridRational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (HybridRational::Small(a, b), HybridRational::Small(c, d)) => {
                Some((*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)))
            }
            _ => self.to_rational().partial_cmp(&other.to_rational()),
        }
    }
}

impl LpScalar for HybridRational {
    fn zero() -> Self {
        HybridRational::Small(0, 1)
    }
    fn one() -> Self {
        HybridRational::Small(1, 1)
    }
    fn from_rational(r: &Rational) -> Self {
        HybridRational::big(r.clone())
    }
    fn to_f64(&self) -> f64 {
        match self {
            HybridRational::Small(n, d) => *n as f64 / *d as f64,
            HybridRational::Big(r) => crate::rational::to_f64(r),
        }
    }
    fn is_zero_ish(&self) -> bool {
        self.signum() == 0
    }
    fn is_positive_ish(&self) -> bool {
        self.signum() > 0
    }
    fn is_negative_ish(&self) -> bool {
        self.signum() < 0
    }
    fn neg(&self) -> Self {
        match self {
            HybridRational::Small(n, d) => HybridRational::small(-(*n as i128), *d as i128),
            HybridRational::Big(r) => HybridRational::big(-(**r).clone()),
        }
    }
    fn add(&self, other: &Self) -> Self {
        self.binary(
            other,
            |a, b, c, d| Some((a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?, b.checked_mul(d)?)),
            |x, y| x + y,
        )
    }
    fn mul(&self, other: &Self) -> Self {
        self.binary(
            other,
            |a, b, c, d| Some((a.checked_mul(c)?, b.checked_mul(d)?)),
            |x, y| x * y,
        )
    }
    fn div(&self, other: &Self) -> Self {
        self.binary(
            other,
            |a, b, c, d| Some((a.checked_mul(d)?, b.checked_mul(c)?)),
            |x, y| x / y,
        )
    }
    fn sub_mul(&mut self, factor: &Self, x: &Self) {
        let prod = factor.mul(x);
        *self = self.add(&prod.neg());
    }
}

/// Tolerance of the floating-point backend.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        crate::rational::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero_ish(&self) -> bool {
        self.abs() <= FLOAT_TOLERANCE
    }
    fn is_positive_ish(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn is_negative_ish(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul(&mut self, factor: &Self, x: &Self) {
        *self -= factor * x;
        if self.abs() < 1e-12 {
            *self = 0.0;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

/// `minimise objective · x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct GeneralLp<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult<T> {
    Optimal { x: Vec<T>, objective: T },
    Infeasible,
    Unbounded,
}

/// Pivot cap guarding against runaway loops.
pub const MAX_PIVOTS: usize = 200_000;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry holds minus the objective value.
    cost: Vec<T>,
    basis: Vec<usize>,
    /// Columns that may not enter the basis.
    banned: Vec<bool>,
    pivots: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        let nz: Vec<usize> = (0..=self.width()).filter(|&k| !self.rows[r][k].is_zero_ish()).collect();
        for &k in &nz {
            self.rows[r][k] = self.rows[r][k].div(&p);
        }
        self.rows[r][j] = T::one();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<T>| {
            if row[j].is_zero_ish() {
                return;
            }
            let f = row[j].clone();
            for &k in &nz {
                row[k].sub_mul(&f, &pivot_row[k]);
            }
            row[j] = T::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = j;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the current cost row. Returns `false` if unbounded.
    fn optimise(&mut self) -> Result<bool> {
        let mut degenerate = 0;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical(format!("no convergence after {MAX_PIVOTS} pivots")));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let candidates = (0..self.width()).filter(|&j| !self.banned[j] && self.cost[j].is_negative_ish());
            let entering = if bland {
                candidates.min()
            } else {
                candidates.fold(None, |best: Option<usize>, j| match best {
                    Some(b) if self.cost[b] <= self.cost[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(j) = entering else {
                return Ok(true);
            };
            let rhs = self.width();
            let mut leave: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive_ish() {
                    continue;
                }
                let ratio = row[rhs].div(&row[j]);
                let better = match &leave {
                    None => true,
                    Some((b, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*b]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.is_zero_ish() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
        }
    }
}

/// Sparse row, sense and right-hand side.
type Row<T> = (Vec<(usize, T)>, Sense, T);

/// Solves a general-form LP with the two-phase simplex.
pub fn simplex<T: LpScalar>(lp: &GeneralLp<T>) -> Result<LpResult<T>> {
    let nv = lp.num_vars;
    if lp.objective.len() != nv {
        return Err(Error::invalid("objective length differs from variable count"));
    }
    let m = lp.constraints.len();
    let mut rows_in: Vec<Row<T>> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.coeffs.iter().any(|&(j, _)| j >= nv) {
            return Err(Error::invalid("constraint references an unknown variable"));
        }
        if c.rhs.is_negative_ish() {
            let sense = match c.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            rows_in.push((
                c.coeffs.iter().map(|(j, a)| (*j, a.neg())).collect(),
                sense,
                c.rhs.neg(),
            ));
        } else {
            rows_in.push((c.coeffs.clone(), c.sense, c.rhs.clone()));
        }
    }
    let slack_count = rows_in.iter().filter(|r| r.1 != Sense::Eq).count();
    let art_count = rows_in.iter().filter(|r| r.1 != Sense::Le).count();
    let width = nv + slack_count + art_count;
    let art_start = nv + slack_count;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (nv, art_start);
    for (coeffs, sense, rhs) in rows_in {
        let mut row = vec![T::zero(); width + 1];
        for (j, a) in coeffs {
            row[j] = row[j].add(&a);
        }
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = T::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = T::one().neg();
                next_slack += 1;
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }

    // Phase 1: minimise the sum of artificials.
    let mut cost = vec![T::zero(); width + 1];
    for (row, &b) in rows.iter().zip(&basis) {
        if b >= art_start {
            for k in (0..art_start).chain(std::iter::once(width)) {
                if !row[k].is_zero_ish() {
                    cost[k] = cost[k].add(&row[k].neg());
                }
            }
        }
    }
    let mut t = Tableau {
        rows,
        cost,
        basis,
        banned: vec![false; width],
        pivots: 0,
    };
    if art_count > 0 {
        t.optimise()?;
        if t.cost[width].neg().is_positive_ish() {
            return Ok(LpResult::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out, deleting redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero_ish()) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for j in art_start..width {
            t.banned[j] = true;
        }
    }

    // Phase 2: original objective.
    let mut cost = vec![T::zero(); width + 1];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = c.clone();
    }
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < nv && !lp.objective[b].is_zero_ish() {
            let cb = lp.objective[b].clone();
            for k in 0..=width {
                if !row[k].is_zero_ish() {
                    cost[k].sub_mul(&cb, &row[k]);
                }
            }
        }
    }
    t.cost = cost;
    if !t.optimise()? {
        return Ok(LpResult::Unbounded);
    }
    let mut x = vec![T::zero(); nv];
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < nv {
            x[b] = row[width].clone();
        }
    }
    let objective = x
        .iter()
        .zip(&lp.objective)
        .fold(T::zero(), |acc, (xi, ci)| acc.add(&xi.mul(ci)));
    Ok(LpResult::Optimal { x, objective })
}

impl<T: LpScalar> GeneralLp<T> {
    /// Largest violation of any constraint or sign bound, as a float.
    pub fn max_violation(&self, x: &[T]) -> f64 {
        let mut worst = x.iter().map(|v| (-v.to_f64()).max(0.0)).fold(0.0, f64::max);
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|(j, a)| a.to_f64() * x[*j].to_f64()).sum();
            let rhs = c.rhs.to_f64();
            let v = match c.sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
                Sense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn row(coeffs: &[(usize, i64)], sense: Sense, rhs: i64) -> Constraint<Rational> {
        Constraint {
            coeffs: coeffs.iter().map(|&(j, a)| (j, int(a))).collect(),
            sense,
            rhs: int(rhs),
        }
    }

    fn lp(objective: &[i64], constraints: Vec<Constraint<Rational>>) -> GeneralLp<Rational> {
        GeneralLp {
            num_vars: objective.len(),
            objective: objective.iter().map(|&c| int(c)).collect(),
            constraints,
        }
    }

    fn to_float(lp: &GeneralLp<Rational>) -> GeneralLp<f64> {
        GeneralLp {
            num_vars: lp.num_vars,
            objective: lp.objective.iter().map(f64::from_rational).collect(),
            constraints: lp
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.iter().map(|(j, a)| (*j, f64::from_rational(a))).collect(),
                    sense: c.sense,
                    rhs: f64::from_rational(&c.rhs),
                })
                .collect(),
        }
    }

    fn to_hybrid(lp: &GeneralLp<Rational>) -> GeneralLp<HybridRational> {
        GeneralLp {
            num_vars: lp.num_vars,
            objective: lp.objective.iter().map(HybridRational::from_rational).collect(),
            constraints: lp
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c
                        .coeffs
                        .iter()
                        .map(|(j, a)| (*j, HybridRational::from_rational(a)))
                        .collect(),
                    sense: c.sense,
                    rhs: HybridRational::from_rational(&c.rhs),
                })
                .collect(),
        }
    }

    #[test]
    fn hybrid_arithmetic_promotes_on_overflow() {
        let big = HybridRational::Small(i64::MAX, 1);
        let sq = big.mul(&big);
        assert!(matches!(sq, HybridRational::Big(_)));
        assert_eq!(sq.to_rational(), int(i64::MAX) * int(i64::MAX));
        let back = sq.div(&big);
        assert!(matches!(back, HybridRational::Small(n, 1) if n == i64::MAX));
        let third = HybridRational::Small(1, 3);
        assert_eq!(third.add(&third).to_rational(), ratio(2, 3));
        assert!(third < HybridRational::Small(1, 2));
        let mut x = HybridRational::one();
        x.sub_mul(&third, &HybridRational::Small(3, 1));
        assert!(x.is_zero_ish());
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let p = lp(
            &[-3, -5],
            vec![
                row(&[(0, 1)], Sense::Le, 4),
                row(&[(1, 2)], Sense::Le, 12),
                row(&[(0, 3), (1, 2)], Sense::Le, 18),
            ],
        );
        assert_eq!(
            simplex(&p).unwrap(),
            LpResult::Optimal {
                x: vec![int(2), int(6)],
                objective: int(-36)
            }
        );
        match simplex(&to_float(&p)).unwrap() {
            LpResult::Optimal { objective, .. } => assert!((objective + 36.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 3, x - y >= -1/2 ... scaled: 2x - 2y >= -1.
        let p = lp(
            &[1, 2],
            vec![
                row(&[(0, 1), (1, 1)], Sense::Eq, 3),
                row(&[(0, 2), (1, -2)], Sense::Ge, -1),
            ],
        );
        match simplex(&p).unwrap() {
            LpResult::Optimal { x, objective } => {
                assert_eq!(x, vec![int(3), int(0)]);
                assert_eq!(objective, int(3));
            }
            other => panic!("{other:?}"),
        }
        let q = lp(
            &[-1, 0],
            vec![
                row(&[(0, 1), (1, 1)], Sense::Eq, 3),
                row(&[(0, 2), (1, -2)], Sense::Le, 1),
            ],
        );
        match simplex(&q).unwrap() {
            LpResult::Optimal { x, .. } => assert_eq!(x, vec![ratio(7, 4), ratio(5, 4)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[1], vec![row(&[(0, 1)], Sense::Ge, 2), row(&[(0, 1)], Sense::Le, 1)]);
        assert_eq!(simplex(&p).unwrap(), LpResult::Infeasible);
        let q = lp(&[-1, 0], vec![row(&[(0, 1), (1, -1)], Sense::Le, 1)]);
        assert_eq!(simplex(&q).unwrap(), LpResult::Unbounded);
        assert_eq!(simplex(&to_float(&p)).unwrap(), LpResult::Infeasible);
        assert_eq!(simplex(&to_hybrid(&p)).unwrap(), LpResult::Infeasible);
        assert_eq!(simplex(&to_hybrid(&q)).unwrap(), LpResult::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let p = lp(
            &[1, 1],
            vec![
                row(&[(0, 1), (1, 1)], Sense::Eq, 2),
                row(&[(0, 2), (1, 2)], Sense::Eq, 4),
                row(&[(0, 1)], Sense::Eq, 1),
            ],
        );
        match simplex(&p).unwrap() {
            LpResult::Optimal { x, objective } => {
                assert_eq!(x, vec![int(1), int(1)]);
                assert_eq!(objective, int(2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook rule without anti-cycling.
        let p = GeneralLp {
            num_vars: 4,
            objective: vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6)],
            constraints: vec![
                Constraint {
                    coeffs: vec![(0, ratio(1, 4)), (1, int(-60)), (2, ratio(-1, 25)), (3, int(9))],
                    sense: Sense::Le,
                    rhs: int(0),
                },
                Constraint {
                    coeffs: vec![(0, ratio(1, 2)), (1, int(-90)), (2, ratio(-1, 50)), (3, int(3))],
                    sense: Sense::Le,
                    rhs: int(0),
                },
                Constraint {
                    coeffs: vec![(2, int(1))],
                    sense: Sense::Le,
                    rhs: int(1),
                },
            ],
        };
        match simplex(&p).unwrap() {
            LpResult::Optimal { objective, .. } => assert_eq!(objective, ratio(-1, 20)),
            other => panic!("{other:?}"),
        }
        match simplex(&to_hybrid(&p)).unwrap() {
            LpResult::Optimal { objective, .. } => assert_eq!(objective.to_rational(), ratio(-1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
