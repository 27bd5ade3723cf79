use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimizer of a convex (unimodal) `f` on
/// `[a, b]`. `f` is only evaluated strictly inside the interval.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::validation(format!("empty interval [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > 2.0 * tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
        if !(c > lo && d < hi) {
            // interval exhausted at float resolution
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection for a sign change of an increasing function on `[a, b]`.
/// Returns `None` if `g(a)` and `g(b)` do not bracket a root.
pub(crate) fn bisect_increasing<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: f64) -> Option<f64> {
    let (ga, gb) = (g(a), g(b));
    if ga > 0.0 || gb < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let x = minimize_1d(|x| x * x, -1.0, 1.0, 1e-10).unwrap();
        assert!(x.abs() <= 1e-10);
        let x = minimize_1d(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() <= 1e-10);
    }

    #[test]
    fn binary_entropy_maximum() {
        let neg_h = |x: f64| x * x.ln() + (1.0 - x) * (1.0 - x).ln();
        let x = minimize_1d(neg_h, 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.5).abs() <= 1e-8);
    }

    #[test]
    fn bad_interval() {
        assert!(minimize_1d(|x| x, 1.0, 1.0, 1e-6).is_err());
        assert!(minimize_1d(|x| x, 2.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn monotone_minimizer_at_edge() {
        let x = minimize_1d(|x| x, 0.0, 1.0, 1e-10).unwrap();
        assert!(x <= 1e-10);
    }

    #[test]
    fn bisection() {
        let r = bisect_increasing(|x| x * x * x - 0.125, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.5).abs() < 1e-13);
        assert!(bisect_increasing(|x| x + 1.0, 0.0, 1.0, 1e-9).is_none());
    }
}
