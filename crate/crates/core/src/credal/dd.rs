//! Double-description method for pointed polyhedral cones, plus the two
//! conversions built on it: vertices of an H-described subset of the
//! simplex, and facets of the convex hull of a finite point set.

const ZERO_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale_inf(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

/// Numerical rank of a set of rows, by Gaussian elimination with partial
/// pivoting.
pub(crate) fn rank(rows: &[&[f64]], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut rank = 0;
    for col in 0..dim {
        if rank == m.len() {
            break;
        }
        let (piv, val) = (rank..m.len())
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if val <= RANK_TOL {
            continue;
        }
        m.swap(rank, piv);
        let prow = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[col] / prow[col];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&prow).skip(col) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Extreme rays of the pointed cone `{x : A x <= 0, E x = 0}` in `R^dim`.
///
/// The inequality rows must have full column rank (the cone without `E`
/// is pointed); `n` independent rows among them seed the iteration.
/// Rays are returned scaled to unit max-norm.
pub(crate) fn extreme_rays(dim: usize, ineq: &[Vec<f64>], eq: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let normalize = |r: &Vec<f64>| -> Option<Vec<f64>> {
        let nr = norm2(r);
        (nr > 1e-14).then(|| r.iter().map(|x| x / nr).collect())
    };
    let ineq: Vec<Vec<f64>> = ineq.iter().filter_map(normalize).collect();
    let eq: Vec<Vec<f64>> = eq.iter().filter_map(normalize).collect();

    // greedy choice of `dim` independent inequality rows
    let mut basis_idx: Vec<usize> = Vec::with_capacity(dim);
    for (i, r) in ineq.iter().enumerate() {
        if basis_idx.len() == dim {
            break;
        }
        let mut trial: Vec<&[f64]> = basis_idx.iter().map(|&j| ineq[j].as_slice()).collect();
        trial.push(r);
        if rank(&trial, dim) == trial.len() {
            basis_idx.push(i);
        }
    }
    assert_eq!(basis_idx.len(), dim, "cone is not pointed");

    // rays of {M x <= 0} are the columns of -M^{-1}
    let m: Vec<Vec<f64>> = basis_idx.iter().map(|&i| ineq[i].clone()).collect();
    let inv = invert(&m).expect("independent rows are invertible");
    let mut rays: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut r: Vec<f64> = (0..dim).map(|i| -inv[i][k]).collect();
            scale_inf(&mut r);
            r
        })
        .collect();

    let mut processed: Vec<Vec<f64>> = m;
    let order: Vec<(&Vec<f64>, bool)> = eq
        .iter()
        .map(|r| (r, true))
        .chain(ineq.iter().enumerate().filter(|(i, _)| !basis_idx.contains(i)).map(|(_, r)| (r, false)))
        .collect();

    for (row, is_eq) in order {
        let vals: Vec<f64> = rays.iter().map(|r| dot(row, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > ZERO_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -ZERO_TOL).collect();
        if pos.is_empty() && (!is_eq || neg.is_empty()) {
            processed.push(row.clone());
            continue;
        }
        let zero_sets: Vec<Vec<usize>> = rays
            .iter()
            .map(|r| (0..processed.len()).filter(|&k| dot(&processed[k], r).abs() <= ZERO_TOL).collect())
            .collect();

        let mut next: Vec<Vec<f64>> = (0..rays.len())
            .filter(|&i| vals[i].abs() <= ZERO_TOL || (!is_eq && vals[i] < 0.0))
            .map(|i| rays[i].clone())
            .collect();

        for &ip in &pos {
            for &im in &neg {
                let common: Vec<usize> =
                    zero_sets[ip].iter().copied().filter(|k| zero_sets[im].contains(k)).collect();
                if dim >= 2 && common.len() < dim - 2 {
                    continue;
                }
                let common_rows: Vec<&[f64]> = common.iter().map(|&k| processed[k].as_slice()).collect();
                if rank(&common_rows, dim) != dim.saturating_sub(2) {
                    continue;
                }
                let (a, b) = (vals[ip], -vals[im]);
                let mut r: Vec<f64> = rays[im].iter().zip(&rays[ip]).map(|(m, p)| a * m + b * p).collect();
                scale_inf(&mut r);
                next.push(r);
            }
        }
        dedup(&mut next, 1e-10);
        rays = next;
        processed.push(row.clone());
        if rays.is_empty() {
            break;
        }
    }
    rays
}

pub(crate) fn dedup(v: &mut Vec<Vec<f64>>, tol: f64) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(v.len());
    for r in v.drain(..) {
        if !out.iter().any(|o| o.iter().zip(&r).all(|(a, b)| (a - b).abs() <= tol)) {
            out.push(r);
        }
    }
    *v = out;
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col];
        a[col].iter_mut().for_each(|x| *x /= p);
        let prow = a[col].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != col {
                let f = row[col];
                if f != 0.0 {
                    row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Vertices of `{p >= 0, sum p = 1, g_k . p <= 0, h_l . p = 0}` where the
/// rows are the homogenized constraints `a - b*1`.
pub(crate) fn simplex_vertices(n: usize, ineq: &[Vec<f64>], eq: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { -1.0 } else { 0.0 }).collect())
        .collect();
    rows.extend(ineq.iter().cloned());
    let rays = extreme_rays(n, &rows, eq);
    let mut out: Vec<Vec<f64>> = rays
        .into_iter()
        .filter_map(|mut r| {
            for x in r.iter_mut() {
                if x.abs() < 1e-13 {
                    *x = 0.0;
                }
            }
            if r.iter().any(|&x| x < 0.0) {
                return None;
            }
            let s: f64 = r.iter().sum();
            (s > 0.0).then(|| r.iter().map(|x| x / s).collect())
        })
        .collect();
    dedup(&mut out, 1e-9);
    out
}

/// Inequalities `c . p <= d` and equalities `c . p = d` describing the
/// convex hull of `points`.
pub(crate) struct HullFacets {
    pub le: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

fn gram_schmidt_add(basis: &mut Vec<Vec<f64>>, v: &[f64], tol: f64) -> bool {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let nw = norm2(&w);
    if nw > tol {
        basis.push(w.into_iter().map(|x| x / nw).collect());
        true
    } else {
        false
    }
}

pub(crate) fn hull_facets(points: &[Vec<f64>]) -> HullFacets {
    let n = points[0].len();
    let v0 = &points[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let d: Vec<f64> = p.iter().zip(v0).map(|(a, b)| a - b).collect();
        gram_schmidt_add(&mut basis, &d, 1e-10);
    }
    let k = basis.len();

    // orthogonal complement spans the affine-hull equalities
    let mut full = basis.clone();
    let mut eq = Vec::new();
    for i in 0..n {
        let e: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
        if gram_schmidt_add(&mut full, &e, 1e-8) {
            let c = full.last().unwrap().clone();
            let d = dot(&c, v0);
            eq.push((c, d));
        }
    }

    let mut le = Vec::new();
    if k > 0 {
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                let d: Vec<f64> = p.iter().zip(v0).map(|(a, b)| a - b).collect();
                let mut r: Vec<f64> = basis.iter().map(|b| dot(b, &d)).collect();
                r.push(1.0);
                r
            })
            .collect();
        for h in extreme_rays(k + 1, &rows, &[]) {
            let mut c = vec![0.0; n];
            for (hc, b) in h[..k].iter().zip(&basis) {
                c.iter_mut().zip(b).for_each(|(x, y)| *x += hc * y);
            }
            let nc = norm2(&c);
            if nc < 1e-12 {
                continue;
            }
            let d = dot(&c, v0) - h[k];
            le.push((c.iter().map(|x| x / nc).collect(), d / nc));
        }
    }
    HullFacets { le, eq }
}
