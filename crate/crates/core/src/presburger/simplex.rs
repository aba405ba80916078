//! Exact two-phase primal simplex with Bland's rule.
//!
//! Every variable is non-negative and the objective minimizes the sum of
//! the original variables. Arithmetic runs on 128-bit rationals and falls
//! back to arbitrary precision when an operation would overflow.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sense {
    Le,
    Eq,
}

/// `Σ coeffs · x  (≤ | =)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub coeffs: Vec<(usize, BigInt)>,
    pub sense: Sense,
    pub rhs: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LpResult {
    Infeasible,
    Optimal(Vec<BigRational>),
}

trait Field: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn signum(&self) -> Ordering;
    fn compare(&self, o: &Self) -> Ordering;
    fn to_big(&self) -> BigRational;
}

type Small = Ratio<i128>;

impl Field for Small {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i64().map(|x| Ratio::from_integer(i128::from(x)))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn signum(&self) -> Ordering {
        self.numer().cmp(&0)
    }
    fn compare(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(BigRational::from_integer(v.clone()))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn signum(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn compare(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

/// Minimizes `Σ x` subject to `rows` and `x ≥ 0`.
#[cfg(test)]
pub(crate) fn minimize_sum(nvars: usize, rows: &[Row]) -> LpResult {
    minimize_sum_with_cut(nvars, rows).0
}

/// Like [`minimize_sum`], and when the optimum is fractional also returns a
/// Gomory fractional cut: a `≤` row over the original variables that every
/// integer solution of `rows` satisfies but the returned vertex violates.
pub(crate) fn minimize_sum_with_cut(nvars: usize, rows: &[Row]) -> (LpResult, Option<Row>) {
    if let Some(r) = Tableau::<Small>::solve(nvars, rows) {
        return r;
    }
    Tableau::<BigRational>::solve(nvars, rows).expect("arbitrary precision does not overflow")
}

fn frac(v: &BigRational) -> BigRational {
    v - v.floor()
}

struct Tableau<F: Field> {
    a: Vec<Vec<F>>,
    b: Vec<F>,
    basis: Vec<usize>,
    d: Vec<F>,
    v: F,
    allowed: Vec<bool>,
}

impl<F: Field> Tableau<F> {
    fn solve(nvars: usize, rows: &[Row]) -> Option<(LpResult, Option<Row>)> {
        let m = rows.len();
        let slacks = rows.iter().filter(|r| r.sense == Sense::Le).count();
        // decide row signs and which rows need an artificial column
        let mut needs_art = Vec::with_capacity(m);
        for r in rows {
            let negate = r.rhs.is_negative();
            needs_art.push(r.sense == Sense::Eq || negate);
        }
        let arts = needs_art.iter().filter(|&&x| x).count();
        let ncols = nvars + slacks + arts;
        let mut a = vec![vec![F::zero(); ncols]; m];
        let mut b = vec![F::zero(); m];
        let mut basis = vec![0; m];
        let mut slack_col = nvars;
        let mut art_col = nvars + slacks;
        let mut cost = vec![F::zero(); ncols];
        // original row of every slack column
        let mut slack_row = Vec::with_capacity(slacks);
        for (i, r) in rows.iter().enumerate() {
            let negate = r.rhs.is_negative();
            let sign = |x: &BigInt| if negate { -x } else { x.clone() };
            for (j, c) in &r.coeffs {
                let cur = a[i][*j].clone();
                a[i][*j] = cur.add(&F::from_big(&sign(c))?)?;
            }
            b[i] = F::from_big(&sign(&r.rhs))?;
            if r.sense == Sense::Le {
                a[i][slack_col] = if negate { F::zero().sub(&F::one())? } else { F::one() };
                if !needs_art[i] {
                    basis[i] = slack_col;
                }
                slack_row.push(i);
                slack_col += 1;
            }
            if needs_art[i] {
                a[i][art_col] = F::one();
                basis[i] = art_col;
                cost[art_col] = F::one();
                art_col += 1;
            }
        }
        let mut t = Tableau {
            a,
            b,
            basis,
            d: Vec::new(),
            v: F::zero(),
            allowed: vec![true; ncols],
        };
        t.set_costs(&cost)?;
        t.optimize()?;
        if t.v.signum() != Ordering::Equal {
            return Some((LpResult::Infeasible, None));
        }
        // drive artificial columns out of the basis
        let first_art = nvars + slacks;
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= first_art {
                match (0..first_art).find(|&j| !t.a[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j)?,
                    None => {
                        t.a.remove(i);
                        t.b.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in first_art..ncols {
            t.allowed[j] = false;
        }
        let mut cost = vec![F::zero(); ncols];
        for c in cost.iter_mut().take(nvars) {
            *c = F::one();
        }
        t.set_costs(&cost)?;
        t.optimize()?;
        let mut x = vec![<BigRational as Zero>::zero(); nvars];
        for (i, &j) in t.basis.iter().enumerate() {
            if j < nvars {
                x[j] = t.b[i].to_big();
            }
        }
        let cut = t.gomory_cut(nvars, rows, &slack_row);
        Some((LpResult::Optimal(x), cut))
    }

    /// Derives a cut from the basic original variable whose value has the
    /// fractional part closest to one half. Slack variables are integral
    /// because rows have integer data, so the row `x_B + Σ ā_j x_j = b̄`
    /// yields `Σ frac(ā_j) x_j ≥ frac(b̄)` over the non-basic columns.
    fn gomory_cut(&self, nvars: usize, rows: &[Row], slack_row: &[usize]) -> Option<Row> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let (r, f0) = self
            .basis
            .iter()
            .enumerate()
            .filter(|&(_, &j)| j < nvars)
            .map(|(i, _)| (i, frac(&self.b[i].to_big())))
            .filter(|(_, f)| !Zero::is_zero(f))
            .min_by_key(|(_, f)| (f - &half).abs())?;
        let first_art = nvars + slack_row.len();
        // Σ coef_j x_j + konst ≥ f0 over the original variables
        let mut coef = vec![<BigRational as Zero>::zero(); nvars];
        let mut konst = <BigRational as Zero>::zero();
        for (j, a) in self.a[r].iter().enumerate().take(first_art) {
            if self.basis.contains(&j) || a.is_zero() {
                continue;
            }
            let f = frac(&a.to_big());
            if Zero::is_zero(&f) {
                continue;
            }
            if j < nvars {
                coef[j] += f;
            } else {
                // slack s = rhs − Σ c·x
                let row = &rows[slack_row[j - nvars]];
                konst += &f * BigRational::from_integer(row.rhs.clone());
                for (k, c) in &row.coeffs {
                    coef[*k] -= &f * BigRational::from_integer(c.clone());
                }
            }
        }
        // −Σ coef·x ≤ konst − f0, scaled to integers
        let lcm = coef
            .iter()
            .chain(std::iter::once(&konst))
            .fold(BigInt::one(), |l, v| num_integer::Integer::lcm(&l, v.denom()));
        let scale = BigRational::from_integer(lcm);
        let coeffs: Vec<(usize, BigInt)> = coef
            .iter()
            .enumerate()
            .filter(|(_, c)| !Zero::is_zero(*c))
            .map(|(j, c)| (j, -(c * &scale).to_integer()))
            .collect();
        let rhs = ((konst - f0) * &scale).floor().to_integer();
        Some(Row {
            coeffs,
            sense: Sense::Le,
            rhs,
        })
    }

    fn set_costs(&mut self, cost: &[F]) -> Option<()> {
        let mut d = cost.to_vec();
        let mut v = F::zero();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &cost[bj];
            if cb.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if !self.a[i][j].is_zero() {
                    *dj = dj.sub(&cb.mul(&self.a[i][j])?)?;
                }
            }
            v = v.add(&cb.mul(&self.b[i])?)?;
        }
        self.d = d;
        self.v = v;
        Some(())
    }

    fn optimize(&mut self) -> Option<()> {
        loop {
            let Some(c) = (0..self.d.len()).find(|&j| self.allowed[j] && self.d[j].signum() == Ordering::Less) else {
                return Some(());
            };
            let mut best: Option<(usize, F)> = None;
            for i in 0..self.a.len() {
                if self.a[i][c].signum() != Ordering::Greater {
                    continue;
                }
                let ratio = self.b[i].div(&self.a[i][c])?;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => match ratio.compare(br) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*bi],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            // the objective is bounded below, so a leaving row exists
            let (r, _) = best?;
            self.pivot(r, c)?;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
        let p = self.a[r][c].clone();
        let nz: Vec<usize> = (0..self.a[r].len()).filter(|&j| !self.a[r][j].is_zero()).collect();
        for &j in &nz {
            self.a[r][j] = self.a[r][j].div(&p)?;
        }
        self.b[r] = self.b[r].div(&p)?;
        let row_r = self.a[r].clone();
        let b_r = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for &j in &nz {
                self.a[i][j] = self.a[i][j].sub(&f.mul(&row_r[j])?)?;
            }
            self.b[i] = self.b[i].sub(&f.mul(&b_r)?)?;
        }
        if !self.d[c].is_zero() {
            let f = self.d[c].clone();
            for &j in &nz {
                self.d[j] = self.d[j].sub(&f.mul(&row_r[j])?)?;
            }
            self.v = self.v.add(&f.mul(&b_r)?)?;
        }
        self.basis[r] = c;
        Some(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, i64)], sense: Sense, rhs: i64) -> Row {
        Row {
            coeffs: coeffs.iter().map(|&(j, c)| (j, BigInt::from(c))).collect(),
            sense,
            rhs: BigInt::from(rhs),
        }
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn feasible_minimum() {
        // x + y ≥ 3, x ≤ 1 → min x + y = 3
        let rows = [row(&[(0, -1), (1, -1)], Sense::Le, -3), row(&[(0, 1)], Sense::Le, 1)];
        match minimize_sum(2, &rows) {
            LpResult::Optimal(x) => assert_eq!(&x[0] + &x[1], q(3, 1)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn infeasible_system() {
        let rows = [row(&[(0, 1)], Sense::Le, 1), row(&[(0, -1)], Sense::Le, -2)];
        assert_eq!(minimize_sum(1, &rows), LpResult::Infeasible);
    }

    #[test]
    fn fractional_vertex() {
        // 2x = 1
        let rows = [row(&[(0, 2)], Sense::Eq, 1)];
        assert_eq!(minimize_sum(1, &rows), LpResult::Optimal(vec![q(1, 2)]));
    }

    #[test]
    fn redundant_equalities() {
        let rows = [
            row(&[(0, 1), (1, 1)], Sense::Eq, 2),
            row(&[(0, 2), (1, 2)], Sense::Eq, 4),
        ];
        match minimize_sum(2, &rows) {
            LpResult::Optimal(x) => assert_eq!(&x[0] + &x[1], q(2, 1)),
            r => panic!("{r:?}"),
        }
    }

    fn satisfies(r: &Row, x: &[i64]) -> bool {
        let lhs: BigInt = r.coeffs.iter().map(|(j, c)| c * BigInt::from(x[*j])).sum();
        match r.sense {
            Sense::Le => lhs <= r.rhs,
            Sense::Eq => lhs == r.rhs,
        }
    }

    #[test]
    fn gomory_cut_separates_vertex_and_keeps_integer_points() {
        // 3 ≤ 2x + 2y ≤ 7 has its minimum at x + y = 3/2
        let rows = [
            row(&[(0, 2), (1, 2)], Sense::Le, 7),
            row(&[(0, -2), (1, -2)], Sense::Le, -3),
        ];
        let (res, cut) = minimize_sum_with_cut(2, &rows);
        let LpResult::Optimal(x) = res else { panic!("feasible") };
        assert_eq!(&x[0] + &x[1], q(3, 2));
        let cut = cut.expect("fractional vertex yields a cut");
        let lhs: BigRational = cut
            .coeffs
            .iter()
            .map(|(j, c)| &x[*j] * BigRational::from_integer(c.clone()))
            .sum();
        assert!(lhs > BigRational::from_integer(cut.rhs.clone()));
        for a in 0..5 {
            for b in 0..5 {
                if rows.iter().all(|r| satisfies(r, &[a, b])) {
                    assert!(satisfies(&cut, &[a, b]), "cut removes ({a}, {b})");
                }
            }
        }
    }

    #[test]
    fn integral_optimum_has_no_cut() {
        let rows = [row(&[(0, -1), (1, -1)], Sense::Le, -3)];
        assert!(minimize_sum_with_cut(2, &rows).1.is_none());
    }

    #[test]
    fn huge_coefficients_fall_back() {
        let big = BigInt::from(10u32).pow(40);
        let rows = [Row {
            coeffs: vec![(0, BigInt::from(1))],
            sense: Sense::Eq,
            rhs: big.clone(),
        }];
        assert_eq!(
            minimize_sum(1, &rows),
            LpResult::Optimal(vec![BigRational::from_integer(big)])
        );
    }
}
