//! Min-score estimation, game-against-nature value bounds and the robust
//! (maxmin) action choice for decisional scores.

use serde::Serialize;

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::frame::Dist;
use crate::optim::cg::{cg_minimize, CgOptions};
use crate::optim::lp::{solve_standard, Direction, LpRow, Outcome, Relation};
use crate::scoring::{h_raw, PayoffMatrix, ScoreRule};

/// Solver settings used by the inference entry points.
pub const INFERENCE_CG: CgOptions = CgOptions { gap_tol: 1e-10, max_iter: 10_000 };

#[derive(Clone, Debug)]
pub struct Estimate {
    pub q: Dist,
    /// `H(q)`.
    pub h_value: f64,
    /// `H(q) - min_{P in K} G(P, q)`; an upper bound on the distance of
    /// `H(q)` from the minimum of `H` over the set.
    pub certificate_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxminSolution {
    pub weights: Vec<f64>,
    pub value: f64,
}

pub(crate) fn log_grad(q: &[f64]) -> Vec<f64> {
    q.iter().map(|x| x.max(1e-300).ln() + 1.0).collect()
}

fn objective_grad(rule: &ScoreRule) -> fn(&[f64]) -> Vec<f64> {
    match rule {
        ScoreRule::Log => log_grad,
        _ => |q: &[f64]| q.iter().map(|x| 2.0 * x).collect(),
    }
}

/// Score of `q` at every atom, as the coefficient vector of the linear
/// map `P -> G(P, q)`. Atoms that `k` forces to zero get coefficient 0.
fn score_coefficients(k: &CredalSet, rule: &ScoreRule, q: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = q.len();
    let mut c = Vec::with_capacity(n);
    let sq: f64 = q.iter().map(|x| x * x).sum();
    for i in 0..n {
        let v = match rule {
            ScoreRule::Log if q[i] > 0.0 => q[i].ln(),
            ScoreRule::Log => {
                let (_, hi) = k.prob_bounds(&k.frame().atom(i))?;
                if hi > 1e-12 {
                    return Ok(None);
                }
                0.0
            }
            _ => 2.0 * q[i] - sq,
        };
        c.push(v);
    }
    Ok(Some(c))
}

pub fn min_score_estimate(k: &CredalSet, rule: &ScoreRule) -> Result<Estimate> {
    min_score_estimate_with(k, rule, &INFERENCE_CG)
}

/// The member of `k` minimizing `H`, with a certificate computed by LP.
pub fn min_score_estimate_with(k: &CredalSet, rule: &ScoreRule, opts: &CgOptions) -> Result<Estimate> {
    if !rule.is_strictly_proper() {
        return Err(Error::UnsupportedRule("decisional scores: use decisional_maxmin".into()));
    }
    let h = |q: &[f64]| h_raw(rule, q);
    let res = cg_minimize(h, objective_grad(rule), k, opts)?;
    let q = res.point;
    let h_value = h_raw(rule, q.probs());
    let certificate_gap = match score_coefficients(k, rule, q.probs())? {
        Some(c) => h_value - k.min_linear_lp(&c)?,
        None => f64::INFINITY,
    };
    Ok(Estimate { q, h_value, certificate_gap })
}

/// Bounds `max_Q min_P G(P, Q) <= V(K) <= min_P H(P)`.
pub fn game_bounds(k: &CredalSet, rule: &ScoreRule) -> Result<GameBounds> {
    game_bounds_with(k, rule, &INFERENCE_CG)
}

pub fn game_bounds_with(k: &CredalSet, rule: &ScoreRule, opts: &CgOptions) -> Result<GameBounds> {
    match rule {
        ScoreRule::Decisional(u) => {
            let upper = min_max_expected_payoff(k, u)?;
            let lower = decisional_maxmin(k, u)?.value;
            Ok(GameBounds { lower, upper })
        }
        _ => {
            let est = min_score_estimate_with(k, rule, opts)?;
            Ok(GameBounds { lower: est.h_value - est.certificate_gap.max(0.0), upper: est.h_value })
        }
    }
}

/// `min_{P in K} max_a E_P[U(a, .)]` by LP with an epigraph variable.
fn min_max_expected_payoff(k: &CredalSet, u: &PayoffMatrix) -> Result<f64> {
    let n = k.frame().len();
    if u.n_atoms() != n {
        return Err(Error::FrameMismatch);
    }
    if k.has_constraint_form() {
        // variables: p (n), t+, t-
        let nv = n + 2;
        let mut rows: Vec<LpRow> = k
            .lp_rows()
            .into_iter()
            .map(|r| {
                let mut c = r.coeffs;
                c.extend([0.0, 0.0]);
                LpRow::new(c, r.relation, r.rhs)
            })
            .collect();
        let mut sum = vec![1.0; n];
        sum.extend([0.0, 0.0]);
        rows.push(LpRow::new(sum, Relation::Eq, 1.0));
        for row in u.rows() {
            let mut c = row.clone();
            c.extend([-1.0, 1.0]);
            rows.push(LpRow::new(c, Relation::Le, 0.0));
        }
        let mut obj = vec![0.0; nv];
        obj[n] = 1.0;
        obj[n + 1] = -1.0;
        match solve_standard(&obj, &rows, Direction::Min) {
            Outcome::Optimal { value, .. } => Ok(value),
            _ => Err(Error::EmptySet),
        }
    } else {
        // mixtures of generators: min over lambda of max_a sum_j lambda_j M[a][j]
        let m = payoff_against_vertices(k, u)?;
        let (_, value) = solve_matrix_game(&transpose_neg(&m))?;
        Ok(-value)
    }
}

/// `M[a][j]`: expected payoff of action `a` under vertex `j`.
fn payoff_against_vertices(k: &CredalSet, u: &PayoffMatrix) -> Result<Vec<Vec<f64>>> {
    let verts = k.vertices()?;
    if u.n_atoms() != k.frame().len() {
        return Err(Error::FrameMismatch);
    }
    Ok(u.rows()
        .iter()
        .map(|row| verts.iter().map(|v| row.iter().zip(v.probs()).map(|(x, p)| x * p).sum()).collect())
        .collect())
}

fn transpose_neg(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|row| -row[j]).collect()).collect()
}

/// Row player maximizes `min_j sum_a w_a m[a][j]` over mixed `w`.
fn solve_matrix_game(m: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let na = m.len();
    let nj = m[0].len();
    // variables: w (na), t+, t-
    let nv = na + 2;
    let mut rows = Vec::with_capacity(nj + 1);
    for j in 0..nj {
        let mut c: Vec<f64> = m.iter().map(|row| row[j]).collect();
        c.extend([-1.0, 1.0]);
        rows.push(LpRow::new(c, Relation::Ge, 0.0));
    }
    let mut sum = vec![1.0; na];
    sum.extend([0.0, 0.0]);
    rows.push(LpRow::new(sum, Relation::Eq, 1.0));
    let mut obj = vec![0.0; nv];
    obj[na] = 1.0;
    obj[na + 1] = -1.0;
    match solve_standard(&obj, &rows, Direction::Max) {
        Outcome::Optimal { x, value } => {
            let mut w: Vec<f64> = x[..na].iter().map(|v| v.max(0.0)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            Ok((w, value))
        }
        _ => Err(Error::EmptySet),
    }
}

/// Mixed action maximizing the worst-case expected payoff over `k`.
pub fn decisional_maxmin(k: &CredalSet, u: &PayoffMatrix) -> Result<MaxminSolution> {
    let m = payoff_against_vertices(k, u)?;
    let (weights, value) = solve_matrix_game(&m)?;
    Ok(MaxminSolution { weights, value })
}
