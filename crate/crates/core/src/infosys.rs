//! Information systems: joint knowledge over hypotheses and observations,
//! the conditional expected score `H(E|I)`, and the unknown-prior binary
//! channel.
//!
//! Joint distributions live on a product frame whose atoms are ordered
//! row-major, `(e_0, i_0), (e_0, i_1), ...`, so entry `j * |I| + l` is
//! `P(e_j, i_l)`.

use serde::Serialize;

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::frame::{Dist, Frame};
use crate::inference::{Estimate, INFERENCE_CG};
use crate::optim::cg::{cg_minimize, CgOptions};
use crate::optim::line::{bisect_increasing, minimize_1d};
use crate::scoring::{h_raw, ScoreRule};

pub const MAX_OBSERVATIONS: usize = 20;

/// Tolerance handed to `minimize_1d` when searching for the best prior.
const PRIOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFrame {
    e: Frame,
    i: Frame,
    joint: Frame,
}

impl ProductFrame {
    pub fn new(e: &Frame, i: &Frame) -> Result<Self> {
        let mut names = Vec::with_capacity(e.len() * i.len());
        for a in e.atoms() {
            for b in i.atoms() {
                names.push(format!("({a},{b})"));
            }
        }
        let joint = Frame::new(&names)?;
        Ok(ProductFrame { e: e.clone(), i: i.clone(), joint })
    }

    pub fn hypotheses(&self) -> &Frame {
        &self.e
    }

    pub fn observations(&self) -> &Frame {
        &self.i
    }

    pub fn joint(&self) -> &Frame {
        &self.joint
    }

    pub fn index(&self, j: usize, l: usize) -> usize {
        j * self.i.len() + l
    }

    pub fn e_marginal(&self, d: &Dist) -> Result<Dist> {
        self.joint.check(d.frame())?;
        let ni = self.i.len();
        let m: Vec<f64> = d.probs().chunks(ni).map(|row| row.iter().sum()).collect();
        Ok(Dist::from_solver(&self.e, m))
    }

    pub fn i_marginal(&self, d: &Dist) -> Result<Dist> {
        self.joint.check(d.frame())?;
        let ni = self.i.len();
        let mut m = vec![0.0; ni];
        for (k, p) in d.probs().iter().enumerate() {
            m[k % ni] += p;
        }
        Ok(Dist::from_solver(&self.i, m))
    }
}

#[derive(Clone, Debug)]
pub struct InfoSystem {
    frames: ProductFrame,
    k_joint: CredalSet,
}

impl InfoSystem {
    pub fn new(frames: ProductFrame, k_joint: CredalSet) -> Result<Self> {
        frames.joint.check(k_joint.frame())?;
        if k_joint.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(InfoSystem { frames, k_joint })
    }

    /// The unknown-prior family `{binary_joint(p, ch) : p in [0, 1]}`.
    pub fn binary(ch: &BinaryChannel) -> Result<Self> {
        let g = vec![binary_joint(0.0, ch)?, binary_joint(1.0, ch)?];
        let frames = ch.product_frame()?;
        let k = CredalSet::from_generators(frames.joint(), g)?;
        Ok(InfoSystem { frames, k_joint: k })
    }

    pub fn frames(&self) -> &ProductFrame {
        &self.frames
    }

    pub fn knowledge(&self) -> &CredalSet {
        &self.k_joint
    }
}

/// A two-hypothesis channel observed `n_obs` times. `q` is the chance of a
/// success under `e`, `r` under not-`e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BinaryChannel {
    q: f64,
    r: f64,
    n_obs: usize,
    relabeled: bool,
}

impl BinaryChannel {
    /// Inputs with `q < r` are brought to `q >= r` by swapping what counts
    /// as a success; `relabeled()` reports whether that happened.
    pub fn new(q: f64, r: f64, n_obs: usize) -> Result<Self> {
        for (name, v) in [("q", q), ("r", r)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if n_obs == 0 || n_obs > MAX_OBSERVATIONS {
            return Err(Error::validation(format!("n_obs must be in 1..={MAX_OBSERVATIONS}, got {n_obs}")));
        }
        let (q, r, relabeled) = if q < r { (1.0 - q, 1.0 - r, true) } else { (q, r, false) };
        Ok(BinaryChannel { q, r, n_obs, relabeled })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn relabeled(&self) -> bool {
        self.relabeled
    }

    pub fn with_observations(&self, n_obs: usize) -> Result<Self> {
        if n_obs == 0 || n_obs > MAX_OBSERVATIONS {
            return Err(Error::validation(format!("n_obs must be in 1..={MAX_OBSERVATIONS}, got {n_obs}")));
        }
        Ok(BinaryChannel { n_obs, ..*self })
    }

    /// `{e, not_e}` times the success counts, largest count first. A single
    /// observation uses the names `i` and `not_i`.
    pub fn product_frame(&self) -> Result<ProductFrame> {
        let e = Frame::new(&["e", "not_e"])?;
        let i = if self.n_obs == 1 {
            Frame::new(&["i", "not_i"])?
        } else {
            Frame::new(&(0..=self.n_obs).rev().map(|k| format!("k{k}")).collect::<Vec<_>>())?
        };
        ProductFrame::new(&e, &i)
    }

    /// Joint weights in product-frame order, without building a frame.
    fn weights(&self, p: f64) -> Vec<f64> {
        let n = self.n_obs;
        let row = |prior: f64, s: f64| -> Vec<f64> {
            (0..=n).rev().map(|k| prior * binomial(n, k) * s.powi(k as i32) * (1.0 - s).powi((n - k) as i32)).collect()
        };
        let mut w = row(p, self.q);
        w.extend(row(1.0 - p, self.r));
        w
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `P(e, k) = p C(N,k) q^k (1-q)^(N-k)` and the same with `1 - p`, `r`
/// for not-`e`. Limited by the frame size to `N <= 11`.
pub fn binary_joint(p: f64, ch: &BinaryChannel) -> Result<Dist> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::validation(format!("prior {p} is outside [0, 1]")));
    }
    let pf = ch.product_frame()?;
    Ok(Dist::from_solver(pf.joint(), ch.weights(p)))
}

/// `sum_l P(i_l) H(P(. | i_l))` on a row-major joint with `ni` columns.
fn conditional_score_raw(j: &[f64], ni: usize, rule: &ScoreRule) -> f64 {
    let ne = j.len() / ni;
    let mut total = 0.0;
    let mut post = vec![0.0; ne];
    for l in 0..ni {
        let c: f64 = (0..ne).map(|e| j[e * ni + l]).sum();
        if c <= 0.0 {
            continue;
        }
        match rule {
            // sum_e J ln(J / c), avoiding the division inside the log
            ScoreRule::Log => {
                total += (0..ne)
                    .map(|e| j[e * ni + l])
                    .filter(|&x| x > 0.0)
                    .map(|x| x * (x.ln() - c.ln()))
                    .sum::<f64>();
            }
            _ => {
                for (e, slot) in post.iter_mut().enumerate() {
                    *slot = j[e * ni + l] / c;
                }
                total += c * h_raw(rule, &post);
            }
        }
    }
    total
}

/// Expected score of the posterior, averaged over observations. Columns
/// with zero probability contribute nothing.
pub fn conditional_score(pf: &ProductFrame, joint: &Dist, rule: &ScoreRule) -> Result<f64> {
    pf.joint.check(joint.frame())?;
    if let ScoreRule::Decisional(u) = rule {
        if u.n_atoms() != pf.e.len() {
            return Err(Error::FrameMismatch);
        }
    }
    Ok(conditional_score_raw(joint.probs(), pf.i.len(), rule))
}

fn conditional_grad(j: &[f64], ni: usize, rule: &ScoreRule) -> Vec<f64> {
    let ne = j.len() / ni;
    let mut g = vec![0.0; j.len()];
    for l in 0..ni {
        let c: f64 = (0..ne).map(|e| j[e * ni + l]).sum();
        if c <= 0.0 {
            continue;
        }
        let s: f64 = (0..ne).map(|e| j[e * ni + l].powi(2)).sum();
        for e in 0..ne {
            let x = j[e * ni + l];
            g[e * ni + l] = match rule {
                ScoreRule::Log => x.max(1e-300).ln() - c.ln(),
                _ => 2.0 * x / c - s / (c * c),
            };
        }
    }
    g
}

/// The joint in the system's knowledge set with the smallest `H(E|I)`.
/// The certificate is the Frank-Wolfe gap at the returned joint, computed
/// by a separate linear minimization over the set.
pub fn min_score_joint(sys: &InfoSystem, rule: &ScoreRule) -> Result<Estimate> {
    min_score_joint_with(sys, rule, &INFERENCE_CG)
}

pub fn min_score_joint_with(sys: &InfoSystem, rule: &ScoreRule, opts: &CgOptions) -> Result<Estimate> {
    if !rule.is_strictly_proper() {
        return Err(Error::UnsupportedRule("joint inference needs log or quadratic scores".into()));
    }
    let ni = sys.frames.i.len();
    let k = &sys.k_joint;
    let res = cg_minimize(|x| conditional_score_raw(x, ni, rule), |x| conditional_grad(x, ni, rule), k, opts)?;
    let q = res.point;
    let mut g = conditional_grad(q.probs(), ni, rule);
    for (idx, gi) in g.iter_mut().enumerate() {
        let (_, hi) = k.prob_bounds(&k.frame().atom(idx))?;
        if hi <= 0.0 {
            *gi = 0.0;
        }
    }
    let gx: f64 = g.iter().zip(q.probs()).map(|(a, b)| a * b).sum();
    let certificate_gap = (gx - k.min_linear_lp(&g)?).max(0.0);
    let h_value = conditional_score_raw(q.probs(), ni, rule);
    Ok(Estimate { q, h_value, certificate_gap })
}

/// `x ln x + (1 - x) ln(1 - x)`, with `0 ln 0 = 0`.
pub fn neg_binary_entropy(x: f64) -> f64 {
    [x, 1.0 - x].iter().filter(|&&t| t > 0.0).map(|t| t * t.ln()).sum()
}

/// Derivative in `p` of the one-observation conditional log score. It is
/// increasing in `p`; the best prior is its root.
pub fn eq3_residual(p: f64, q: f64, r: f64) -> f64 {
    let m = p * q + (1.0 - p) * r;
    (p / (1.0 - p)).ln() + neg_binary_entropy(q) - neg_binary_entropy(r) - (q - r) * (m / (1.0 - m)).ln()
}

/// The prior minimizing the expected log score of a single observation of
/// the channel `(q, r)`, from the stationarity condition.
pub fn eq3_solve(q: f64, r: f64) -> Result<f64> {
    let ch = BinaryChannel::new(q, r, 1)?;
    let (q, r) = (ch.q, ch.r);
    if q == r {
        return Ok(0.5);
    }
    if q == 1.0 && r == 0.0 {
        return Err(Error::validation("a noiseless channel leaves every prior optimal"));
    }
    let (lo, hi) = (1e-12, 1.0 - 1e-12);
    match bisect_increasing(|p| eq3_residual(p, q, r), lo, hi, 1e-15) {
        Some(p) => Ok(p),
        None => minimize_1d(|p| conditional_score_raw(&ch.weights(p), 2, &ScoreRule::Log), 0.0, 1.0, PRIOR_TOL),
    }
}

/// The prior minimizing the expected log score for `ch.n_obs()`
/// observations, found by a one-dimensional search.
///
/// Golden section alone stalls near `sqrt(eps)` because the objective is
/// flat at its minimum, so the bracket it leaves is narrowed further by
/// bisection on the analytic derivative.
pub fn best_prior(ch: &BinaryChannel) -> Result<f64> {
    let ni = ch.n_obs + 1;
    let p0 = minimize_1d(|p| conditional_score_raw(&ch.weights(p), ni, &ScoreRule::Log), 0.0, 1.0, PRIOR_TOL)?;
    let (lo, hi) = ((p0 - 1e-6).max(1e-12), (p0 + 1e-6).min(1.0 - 1e-12));
    Ok(bisect_increasing(|p| prior_slope(ch, p), lo, hi, 1e-16).unwrap_or(p0))
}

/// `d/dp` of the expected log score: `sum_k a_k ln(P(e|k)) - b_k ln(P(not e|k))`
/// with `a_k`, `b_k` the likelihoods of count `k`.
fn prior_slope(ch: &BinaryChannel, p: f64) -> f64 {
    let lik = ch.weights(1.0);
    let (alpha, _) = lik.split_at(ch.n_obs + 1);
    let lik = ch.weights(0.0);
    let (_, beta) = lik.split_at(ch.n_obs + 1);
    alpha
        .iter()
        .zip(beta)
        .map(|(&al, &be)| {
            let (a, b) = (p * al, (1.0 - p) * be);
            let c = a + b;
            let ta = if al > 0.0 { al * (a / c).ln() } else { 0.0 };
            let tb = if be > 0.0 { be * (b / c).ln() } else { 0.0 };
            ta - tb
        })
        .sum()
}

/// The prior under which one success leaves `e` at even odds.
pub fn uninformative_prior(q: f64, r: f64) -> Result<f64> {
    let ch = BinaryChannel::new(q, r, 1)?;
    if ch.q + ch.r == 0.0 {
        return Err(Error::validation("success is impossible under both hypotheses"));
    }
    Ok(ch.r / (ch.q + ch.r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub p1: f64,
    pub p2: f64,
    /// Chance of a second success after updating `p1` on a first one.
    pub predictive_transfer: f64,
    /// The same chance from the two-observation system at prior `p2`.
    pub predictive_joint: f64,
    pub gap: f64,
}

/// Compares carrying the one-observation posterior forward as a prior
/// against re-solving the two-observation system.
pub fn posterior_transfer_gap(ch: &BinaryChannel) -> Result<TransferReport> {
    let (q, r) = (ch.q, ch.r);
    let p1 = best_prior(&ch.with_observations(1)?)?;
    let p2 = best_prior(&ch.with_observations(2)?)?;
    let pi = p1 * q / (p1 * q + (1.0 - p1) * r);
    let predictive_transfer = pi * q + (1.0 - pi) * r;
    let predictive_joint = (p2 * q * q + (1.0 - p2) * r * r) / (p2 * q + (1.0 - p2) * r);
    Ok(TransferReport { p1, p2, predictive_transfer, predictive_joint, gap: (predictive_transfer - predictive_joint).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PriorRow {
    pub n: usize,
    pub p_star: f64,
}

/// `best_prior` for each observation count, computed in parallel. Rows
/// come back in the order of `ns`.
pub fn prior_study(q: f64, r: f64, ns: &[usize]) -> Result<Vec<PriorRow>> {
    let base = BinaryChannel::new(q, r, 1)?;
    let channels = ns.iter().map(|&n| base.with_observations(n)).collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = channels.iter().map(|ch| s.spawn(move || best_prior(ch))).collect();
        handles.into_iter().map(|h| h.join().expect("prior worker panicked")).collect()
    });
    ns.iter().zip(results).map(|(&n, p)| Ok(PriorRow { n, p_star: p? })).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DownplayRow {
    pub q: f64,
    pub r: f64,
    pub h_q: f64,
    pub h_r: f64,
    pub p_star: f64,
    /// `p_star < 0.5`.
    pub below_half: bool,
    /// Whether the hypothesis with the sharper likelihood (larger
    /// `x ln x + (1-x) ln(1-x)`) receives prior weight below one half.
    pub sharper_downweighted: bool,
}

const TIE_TOL: f64 = 1e-9;

/// One-observation best priors over a grid of channels. Purely descriptive.
pub fn downplay_survey(grid: &[(f64, f64)]) -> Result<Vec<DownplayRow>> {
    grid.iter()
        .map(|&(q, r)| {
            let ch = BinaryChannel::new(q, r, 1)?;
            let p_star = best_prior(&ch)?;
            let (h_q, h_r) = (neg_binary_entropy(ch.q), neg_binary_entropy(ch.r));
            // symmetric channels sit at one half up to rounding; call those ties
            let below_half = p_star < 0.5 - TIE_TOL;
            let above_half = p_star > 0.5 + TIE_TOL;
            let sharper_downweighted = if h_q > h_r + TIE_TOL {
                below_half
            } else if h_r > h_q + TIE_TOL {
                above_half
            } else {
                false
            };
            Ok(DownplayRow { q: ch.q, r: ch.r, h_q, h_r, p_star, below_half, sharper_downweighted })
        })
        .collect()
}

/// The default grid for the survey: `q` in 0.55..0.95 and `r` below it.
pub fn default_survey_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for qi in 0..5 {
        for ri in 0..=qi + 4 {
            g.push(((55 + 10 * qi) as f64 / 100.0, (5 + 10 * ri) as f64 / 100.0));
        }
    }
    g
}
