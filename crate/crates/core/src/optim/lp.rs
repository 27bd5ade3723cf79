//! Dense-tableau primal simplex with Bland's anti-cycling rule.
//!
//! Two entry points: [`solve_standard`] handles `min/max c.x` over
//! `x >= 0` with arbitrary `<=`, `=`, `>=` rows, and [`lp_solve`] adds the
//! probability-simplex row `sum x = 1` on top of it.

use serde::{Deserialize, Serialize};

/// Phase-1 infeasibility threshold.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn flip(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        LpRow { coeffs, relation, rhs }
    }
}

/// A linear program over the probability simplex: `p >= 0`, `sum p = 1`
/// are implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// `point` is a probability vector on the problem's atoms; present iff optimal.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub value: Option<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Outcome of a general nonnegative-variable LP.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

pub fn lp_solve(prob: &LpProblem, direction: Direction) -> LpSolution {
    let n = prob.objective.len();
    let mut rows = prob.rows.clone();
    rows.push(LpRow::new(vec![1.0; n], Relation::Eq, 1.0));
    match solve_standard(&prob.objective, &rows, direction) {
        Outcome::Optimal { x, .. } => {
            let mut p: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            let value = prob.objective.iter().zip(&p).map(|(c, v)| c * v).sum();
            LpSolution { status: LpStatus::Optimal, point: Some(p), value: Some(value) }
        }
        Outcome::Infeasible => LpSolution { status: LpStatus::Infeasible, point: None, value: None },
        Outcome::Unbounded => unreachable!("simplex-constrained LP cannot be unbounded"),
    }
}

struct Tableau {
    // m rows of width ncols + 1; last entry is the right-hand side
    rows: Vec<Vec<f64>>,
    // reduced costs, last entry is minus the objective value
    z: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (v, p) in self.z.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, c: &[f64]) {
        self.z = vec![0.0; self.ncols + 1];
        self.z[..c.len()].copy_from_slice(c);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.z[b];
            if cb != 0.0 {
                for (v, t) in self.z.iter_mut().zip(&self.rows[i]) {
                    *v -= cb * t;
                }
            }
        }
    }

    /// Minimizes the current cost row. Returns false on unboundedness.
    fn run(&mut self, allowed: usize) -> bool {
        let rhs = self.ncols;
        loop {
            // Bland: lowest-index improving column
            let Some(enter) = (0..allowed).find(|&j| self.z[j] < -COST_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if (!tie && ratio < lr) || (tie && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves `direction c.x` subject to `rows` and `x >= 0`.
pub fn solve_standard(c: &[f64], rows: &[LpRow], direction: Direction) -> Outcome {
    let n = c.len();
    let m = rows.len();
    let cost: Vec<f64> = match direction {
        Direction::Min => c.to_vec(),
        Direction::Max => c.iter().map(|v| -v).collect(),
    };

    // canonical rows with rhs >= 0
    let canon: Vec<(Vec<f64>, Relation, f64)> = rows
        .iter()
        .map(|r| {
            debug_assert_eq!(r.coeffs.len(), n);
            if r.rhs < 0.0 {
                (r.coeffs.iter().map(|v| -v).collect(), r.relation.flip(), -r.rhs)
            } else {
                (r.coeffs.clone(), r.relation, r.rhs)
            }
        })
        .collect();

    let n_slack = canon.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = canon.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = n + n_slack;
    let ncols = art_start + n_art;

    let mut tab = Tableau { rows: Vec::with_capacity(m), z: vec![], basis: vec![0; m], ncols };
    let (mut s, mut a) = (n, art_start);
    for (i, (coeffs, rel, rhs)) in canon.iter().enumerate() {
        let mut row = vec![0.0; ncols + 1];
        row[..n].copy_from_slice(coeffs);
        row[ncols] = *rhs;
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                tab.basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
        }
        tab.rows.push(row);
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        phase1[art_start..].iter_mut().for_each(|v| *v = 1.0);
        tab.set_costs(&phase1);
        tab.run(ncols);
        let infeas = -tab.z[ncols];
        let scale = 1.0 + canon.iter().map(|r| r.2).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Outcome::Infeasible;
        }
        // drive remaining artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                let col = (0..art_start)
                    .filter(|&j| tab.rows[i][j].abs() > 1e-9)
                    .max_by(|&x, &y| tab.rows[i][x].abs().total_cmp(&tab.rows[i][y].abs()));
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    tab.set_costs(&cost);
    if !tab.run(art_start) {
        return Outcome::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[i][ncols].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Outcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[f64], rel: Relation, rhs: f64) -> LpRow {
        LpRow::new(c.to_vec(), rel, rhs)
    }

    #[test]
    fn min_coordinate_over_simplex() {
        let prob = LpProblem { objective: vec![1.0, 0.0, 0.0], rows: vec![] };
        let sol = lp_solve(&prob, Direction::Min);
        assert!(sol.is_optimal());
        assert_eq!(sol.value, Some(0.0));
        assert_eq!(sol.point.unwrap()[0], 0.0);
    }

    #[test]
    fn max_with_upper_bound() {
        let prob = LpProblem {
            objective: vec![1.0, 0.0],
            rows: vec![row(&[1.0, 0.0], Relation::Le, 0.6)],
        };
        let sol = lp_solve(&prob, Direction::Max);
        assert!((sol.value.unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let prob = LpProblem {
            objective: vec![3.0, -1.0],
            rows: vec![row(&[1.0, 0.0], Relation::Ge, 0.7), row(&[1.0, 0.0], Relation::Le, 0.2)],
        };
        let sol = lp_solve(&prob, Direction::Min);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.point.is_none() && sol.value.is_none());
    }

    #[test]
    fn beale_cycling_instance_terminates() {
        // Beale's example cycles under the largest-coefficient rule.
        let c = [-0.75, 150.0, -0.02, 6.0];
        let rows = vec![
            row(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0),
            row(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0),
            row(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
        ];
        match solve_standard(&c, &rows, Direction::Min) {
            Outcome::Optimal { x, value } => {
                assert!((value + 0.05).abs() < 1e-12, "value {value}");
                assert!((x[0] - 0.04).abs() < 1e-12 && (x[2] - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbounded_general_problem() {
        let rows = vec![row(&[1.0, -1.0], Relation::Le, 1.0)];
        assert_eq!(solve_standard(&[-1.0, 0.0], &rows, Direction::Min), Outcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let prob = LpProblem {
            objective: vec![0.0, 1.0, 2.0],
            rows: vec![
                row(&[1.0, 1.0, 1.0], Relation::Eq, 1.0),
                row(&[0.0, 1.0, 2.0], Relation::Eq, 1.0),
                row(&[0.0, 2.0, 4.0], Relation::Eq, 2.0),
            ],
        };
        let sol = lp_solve(&prob, Direction::Max);
        assert!((sol.value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows() {
        // -p1 <= -0.3  <=>  p1 >= 0.3
        let prob = LpProblem { objective: vec![1.0, 0.0], rows: vec![row(&[-1.0, 0.0], Relation::Le, -0.3)] };
        let sol = lp_solve(&prob, Direction::Min);
        assert!((sol.value.unwrap() - 0.3).abs() < 1e-12);
    }
}
