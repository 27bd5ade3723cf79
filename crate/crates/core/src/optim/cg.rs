//! Conditional-gradient (Frank-Wolfe) minimization over a knowledge set.
//!
//! The iterate is kept as an explicit convex combination of the set's
//! vertices, which allows away steps and gives linear convergence on
//! polytopes. Linear subproblems are solved exactly over the vertex list.

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::frame::Dist;

use super::line::bisect_increasing;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub gap_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { gap_tol: 1e-8, max_iter: 10_000 }
    }
}

impl CgOptions {
    fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::validation("gap_tol must be positive and max_iter at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CgResult {
    pub point: Dist,
    /// Frank-Wolfe duality gap `max_{s in K} grad(q) . (q - s)`.
    pub gap: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes a convex `f` over `k`. `f` and `grad` take probability vectors
/// on `k`'s frame. Atoms with zero upper probability over `k` are treated
/// as eliminated: their gradient entries are ignored.
///
/// Hitting `max_iter` is not an error; the result reports `converged = false`
/// together with the gap of the best iterate.
pub fn cg_minimize<F, G>(f: F, grad: G, k: &CredalSet, opts: &CgOptions) -> Result<CgResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    opts.validate()?;
    let verts: Vec<&[f64]> = k.vertices()?.iter().map(|d| d.probs()).collect();
    let n = k.frame().len();
    let m = verts.len();
    let support: Vec<bool> = (0..n).map(|i| verts.iter().any(|v| v[i] > 0.0)).collect();

    let masked_grad = |x: &[f64]| -> Vec<f64> {
        let mut g = grad(x);
        for (gi, &s) in g.iter_mut().zip(&support) {
            if !s {
                *gi = 0.0;
            }
        }
        g
    };
    let combine = |w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (wj, v) in w.iter().zip(&verts) {
            if *wj > 0.0 {
                x.iter_mut().zip(v.iter()).for_each(|(xi, vi)| *xi += wj * vi);
            }
        }
        x
    };

    let mut weights = vec![1.0 / m as f64; m];
    let mut x = combine(&weights);
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut iterations = 0;

    loop {
        let g = masked_grad(&x);
        let scores: Vec<f64> = verts.iter().map(|v| dot(&g, v)).collect();
        let gx = dot(&g, &x);
        let (s_idx, s_val) = scores
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let gap = (gx - s_val).max(0.0);
        let fx = f(&x);
        if best.as_ref().map_or(true, |b| gap < b.2) {
            best = Some((x.clone(), fx, gap));
        }
        if gap <= opts.gap_tol || iterations >= opts.max_iter {
            let (bx, bf, bg) = best.unwrap();
            return Ok(CgResult {
                point: Dist::from_solver(k.frame(), bx),
                gap: bg,
                value: bf,
                iterations,
                converged: bg <= opts.gap_tol,
            });
        }
        iterations += 1;

        let (a_idx, a_val) = scores
            .iter()
            .copied()
            .enumerate()
            .filter(|(j, _)| weights[*j] > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();

        let fw_step = gap >= a_val - gx;
        let (dir, gamma_max): (Vec<f64>, f64) = if fw_step {
            (verts[s_idx].iter().zip(&x).map(|(s, xi)| s - xi).collect(), 1.0)
        } else {
            let wa = weights[a_idx];
            (x.iter().zip(verts[a_idx]).map(|(xi, a)| xi - a).collect(), wa / (1.0 - wa))
        };

        // exact line search: root of the directional derivative
        let slope = |t: f64| -> f64 {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let gy = masked_grad(&y);
            let s: f64 = gy.iter().zip(&dir).filter(|(_, d)| **d != 0.0).map(|(g, d)| g * d).sum();
            if s.is_nan() {
                f64::INFINITY
            } else {
                s
            }
        };
        let gamma = if slope(gamma_max) <= 0.0 {
            gamma_max
        } else {
            bisect_increasing(slope, 0.0, gamma_max, 1e-16 * gamma_max.max(1e-300)).unwrap_or(0.0)
        };
        if gamma <= 0.0 {
            // no progress possible along the chosen direction
            let (bx, bf, bg) = best.unwrap();
            return Ok(CgResult {
                point: Dist::from_solver(k.frame(), bx),
                gap: bg,
                value: bf,
                iterations,
                converged: bg <= opts.gap_tol,
            });
        }

        if fw_step {
            weights.iter_mut().for_each(|w| *w *= 1.0 - gamma);
            weights[s_idx] += gamma;
        } else {
            weights.iter_mut().for_each(|w| *w *= 1.0 + gamma);
            weights[a_idx] -= gamma;
            if gamma >= gamma_max || weights[a_idx] < 1e-15 {
                weights[a_idx] = 0.0;
            }
        }
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        x = combine(&weights);
    }
}
