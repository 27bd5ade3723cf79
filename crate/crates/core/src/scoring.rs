//! Proper scoring rules and the expected-score functionals
//! `G(P, Q) = sum_e P(e) S(Q, e)` and `H(P) = G(P, P)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Dist;

/// Payoffs `u[a][i]` of action `a` when atom `i` obtains.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMatrix {
    actions: Vec<String>,
    u: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn new(actions: Vec<String>, u: Vec<Vec<f64>>) -> Result<Self> {
        if actions.is_empty() || actions.len() != u.len() {
            return Err(Error::validation("payoff matrix needs one row per action and at least one action"));
        }
        let width = u[0].len();
        if width == 0 || u.iter().any(|row| row.len() != width) {
            return Err(Error::validation("payoff rows must be non-empty and of equal length"));
        }
        if u.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("payoffs must be finite"));
        }
        Ok(PayoffMatrix { actions, u })
    }

    /// Unnamed actions `act1..actm`.
    pub fn from_rows(u: Vec<Vec<f64>>) -> Result<Self> {
        let actions = (1..=u.len()).map(|i| format!("act{i}")).collect();
        PayoffMatrix::new(actions, u)
    }

    pub fn identity(n: usize) -> Self {
        let u = (0..n).map(|a| (0..n).map(|i| if a == i { 1.0 } else { 0.0 }).collect()).collect();
        PayoffMatrix::from_rows(u).unwrap()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn n_actions(&self) -> usize {
        self.u.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.u[0].len()
    }

    /// Expected payoff of each action under `p`.
    pub fn expected_payoffs(&self, p: &[f64]) -> Vec<f64> {
        self.u.iter().map(|row| row.iter().zip(p).map(|(u, q)| u * q).sum()).collect()
    }

    fn check_width(&self, n: usize) -> Result<()> {
        if self.n_atoms() == n {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScoreRule {
    Log,
    Quadratic,
    Decisional(PayoffMatrix),
}

impl ScoreRule {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreRule::Log => "log",
            ScoreRule::Quadratic => "quad",
            ScoreRule::Decisional(_) => "decisional",
        }
    }

    /// Log and Quadratic are strictly proper; Decisional is not.
    pub fn is_strictly_proper(&self) -> bool {
        !matches!(self, ScoreRule::Decisional(_))
    }
}

/// Lowest-index argmax of the expected payoff under `q`.
pub(crate) fn best_action_index(u: &PayoffMatrix, q: &[f64]) -> usize {
    let ev = u.expected_payoffs(q);
    let mut best = 0;
    for (a, v) in ev.iter().enumerate().skip(1) {
        if *v > ev[best] {
            best = a;
        }
    }
    best
}

pub fn best_action(u: &PayoffMatrix, q: &Dist) -> Result<usize> {
    u.check_width(q.len())?;
    Ok(best_action_index(u, q.probs()))
}

fn score_raw(rule: &ScoreRule, q: &[f64], i: usize) -> f64 {
    match rule {
        ScoreRule::Log => {
            if q[i] > 0.0 {
                q[i].ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        ScoreRule::Quadratic => 2.0 * q[i] - q.iter().map(|x| x * x).sum::<f64>(),
        ScoreRule::Decisional(u) => u.rows()[best_action_index(u, q)][i],
    }
}

fn g_raw(rule: &ScoreRule, p: &[f64], q: &[f64]) -> f64 {
    match rule {
        ScoreRule::Decisional(u) => {
            let a = best_action_index(u, q);
            u.rows()[a].iter().zip(p).map(|(v, w)| v * w).sum()
        }
        // terms with p_i = 0 contribute nothing, even against a -inf score
        _ => p.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, w)| w * score_raw(rule, q, i)).sum(),
    }
}

pub(crate) fn h_raw(rule: &ScoreRule, p: &[f64]) -> f64 {
    match rule {
        ScoreRule::Log => p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum(),
        ScoreRule::Quadratic => p.iter().map(|x| x * x).sum(),
        ScoreRule::Decisional(u) => u.expected_payoffs(p).into_iter().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// `S(Q, e)` for the atom `atom_index`. The log score returns `-inf` when
/// `q` puts no mass on the atom.
pub fn score(rule: &ScoreRule, q: &Dist, atom_index: usize) -> Result<f64> {
    if atom_index >= q.len() {
        return Err(Error::validation(format!("atom index {atom_index} out of range")));
    }
    if let ScoreRule::Decisional(u) = rule {
        u.check_width(q.len())?;
    }
    Ok(score_raw(rule, q.probs(), atom_index))
}

pub fn expected_score_g(rule: &ScoreRule, p: &Dist, q: &Dist) -> Result<f64> {
    p.frame().check(q.frame())?;
    if let ScoreRule::Decisional(u) = rule {
        u.check_width(p.len())?;
    }
    Ok(g_raw(rule, p.probs(), q.probs()))
}

pub fn self_score_h(rule: &ScoreRule, p: &Dist) -> Result<f64> {
    if let ScoreRule::Decisional(u) = rule {
        u.check_width(p.len())?;
    }
    Ok(h_raw(rule, p.probs()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropernessReport {
    pub trials: usize,
    pub violations: usize,
    pub max_violation: f64,
}

/// A point drawn uniformly from the `n`-simplex.
pub(crate) fn sample_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Samples `(P, Q)` pairs uniformly from the simplex and counts violations
/// of `G(P, Q) <= H(P) + 1e-12`. Log and Quadratic rules draw the frame
/// size uniformly from 2..=6; a decisional rule uses its matrix width.
pub fn check_proper(rule: &ScoreRule, trials: usize, seed: u64) -> Result<PropernessReport> {
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    for _ in 0..trials {
        let n = match rule {
            ScoreRule::Decisional(u) => u.n_atoms(),
            _ => rng.gen_range(2..=6),
        };
        let p = sample_simplex(&mut rng, n);
        let q = sample_simplex(&mut rng, n);
        let excess = g_raw(rule, &p, &q) - h_raw(rule, &p);
        if excess > 1e-12 {
            violations += 1;
        }
        max_violation = max_violation.max(excess);
    }
    Ok(PropernessReport { trials, violations, max_violation })
}
