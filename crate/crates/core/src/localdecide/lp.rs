//! Exact feasibility of `A x = b, x ≥ 0` over the rationals.
//!
//! Phase-I simplex on a dense tableau with Bland's rule. An infeasible system
//! comes back with a Farkas vector `y` such that `yᵀA ≤ 0` and `yᵀb > 0`, read
//! off the artificial columns of the final tableau.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// `x ≥ 0` with `A x = b`.
    Feasible(Vec<Rational>),
    /// `y` with `yᵀA ≤ 0` and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

pub fn lp_feasibility(a: &[Vec<Rational>], b: &[Rational]) -> Result<LpOutcome, LpError> {
    let m = a.len();
    if b.len() != m {
        return Err(LpError::DimensionMismatch(format!(
            "{m} rows but {} right-hand sides",
            b.len()
        )));
    }
    let n = a.first().map_or(0, Vec::len);
    if let Some((i, row)) = a.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(LpError::DimensionMismatch(format!(
            "row {i} has {} columns, expected {n}",
            row.len()
        )));
    }
    let outcome = Tableau::new(a, b).solve();
    debug_assert!(check(a, b, &outcome), "simplex produced an invalid answer");
    Ok(outcome)
}

/// Exact check of either outcome against the system.
pub fn check(a: &[Vec<Rational>], b: &[Rational], outcome: &LpOutcome) -> bool {
    let n = a.first().map_or(0, Vec::len);
    match outcome {
        LpOutcome::Feasible(x) => {
            x.len() == n
                && x.iter().all(|v| !v.is_negative())
                && a.iter()
                    .zip(b)
                    .all(|(row, bi)| row.iter().zip(x).map(|(r, v)| r * v).sum::<Rational>() == *bi)
        }
        LpOutcome::Infeasible(y) => {
            y.len() == a.len()
                && (0..n).all(|j| {
                    !a.iter()
                        .zip(y)
                        .map(|(row, yi)| &row[j] * yi)
                        .sum::<Rational>()
                        .is_positive()
                })
                && y.iter().zip(b).map(|(yi, bi)| yi * bi).sum::<Rational>().is_positive()
        }
    }
}

struct Tableau {
    n: usize,
    /// rows × (n + m): original columns followed by artificials
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// reduced costs of the phase-I objective
    cost: Vec<Rational>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn new(a: &[Vec<Rational>], b: &[Rational]) -> Self {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for (i, (row, bi)) in a.iter().zip(b).enumerate() {
            let flip = bi.is_negative();
            let mut r: Vec<Rational> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
            r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            rows.push(r);
            rhs.push(if flip { -bi } else { bi.clone() });
            flipped.push(flip);
        }
        let mut cost = vec![Rational::zero(); n + m];
        for (j, c) in cost.iter_mut().enumerate().take(n) {
            *c = -rows.iter().map(|r| &r[j]).sum::<Rational>();
        }
        Tableau {
            n,
            rows,
            rhs,
            basis: (n..n + m).collect(),
            cost,
            flipped,
        }
    }

    fn solve(mut self) -> LpOutcome {
        while let Some(enter) = self.cost.iter().position(|c| c.is_negative()) {
            let leave = self.ratio_test(enter).expect("phase-I objective is bounded below");
            self.pivot(leave, enter);
        }
        let m = self.rows.len();
        let infeasibility: Rational = (0..m).filter(|&i| self.basis[i] >= self.n).map(|i| &self.rhs[i]).sum();
        if infeasibility.is_positive() {
            // y = c_Bᵀ B⁻¹, and B⁻¹ sits in the artificial columns
            let y = (0..m)
                .map(|k| {
                    let col = self.n + k;
                    let v: Rational = (0..m)
                        .filter(|&i| self.basis[i] >= self.n)
                        .map(|i| &self.rows[i][col])
                        .sum();
                    if self.flipped[k] {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            LpOutcome::Infeasible(y)
        } else {
            let mut x = vec![Rational::zero(); self.n];
            for (i, &j) in self.basis.iter().enumerate() {
                if j < self.n {
                    x[j] = self.rhs[i].clone();
                }
            }
            LpOutcome::Feasible(x)
        }
    }

    /// Minimum ratio over rows with positive pivot entry; ties go to the
    /// smallest basic index (Bland).
    fn ratio_test(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[col].is_positive() {
                continue;
            }
            let r = &self.rhs[i] / &row[col];
            let better = match &best {
                None => true,
                Some((bi, br)) => r < *br || (r == *br && self.basis[i] < self.basis[*bi]),
            };
            if better {
                best = Some((i, r));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }
}
