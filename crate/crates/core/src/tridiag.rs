//! Symmetric tridiagonal eigenproblems and banded solves.
//!
//! A symmetric tridiagonal matrix is stored as its diagonal `d` (length n)
//! and off-diagonal `e` (length n - 1).

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The k-th smallest eigenvalue (k = 0, 1, ...) by bisection.
pub fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs());
    lo -= 1e-12 * scale + f64::MIN_POSITIVE;
    hi += 1e-12 * scale + f64::MIN_POSITIVE;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves (T - shift I) x = b with partial pivoting; returns None when singular.
pub fn solve_shifted(d: &[f64], e: &[f64], shift: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = d.len();
    if n == 1 {
        let p = d[0] - shift;
        return if p == 0.0 { None } else { Some(vec![b[0] / p]) };
    }
    // rows stored as (u0, u1, u2) for columns (i, i+1, i+2) after elimination
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let mut cur_diag = d[0] - shift;
    let mut cur_sup = e[0];
    let mut cur_sup2 = 0.0;
    for i in 0..n - 1 {
        let sub = e[i];
        let next_diag = d[i + 1] - shift;
        let next_sup = if i + 1 < n - 1 { e[i + 1] } else { 0.0 };
        if cur_diag.abs() >= sub.abs() {
            if cur_diag == 0.0 {
                return None;
            }
            let l = sub / cur_diag;
            u0[i] = cur_diag;
            u1[i] = cur_sup;
            u2[i] = cur_sup2;
            rhs[i + 1] -= l * rhs[i];
            cur_diag = next_diag - l * cur_sup;
            cur_sup = next_sup - l * cur_sup2;
            cur_sup2 = 0.0;
        } else {
            let l = cur_diag / sub;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= l * rhs[i];
            let nd = cur_sup - l * next_diag;
            let ns = cur_sup2 - l * next_sup;
            cur_diag = nd;
            cur_sup = ns;
            cur_sup2 = 0.0;
        }
    }
    u0[n - 1] = cur_diag;
    if cur_diag == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / u0[i];
    }
    Some(x)
}

/// Eigenvector for an accurately known eigenvalue by inverse iteration.
pub fn inverse_iteration(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    let scale = d.iter().chain(e.iter()).fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut shift = lambda + 1e-14 * scale;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 101) as f64 / 101.0)).collect();
    normalize(&mut x);
    for _ in 0..4 {
        match solve_shifted(d, e, shift, &x) {
            Some(y) => {
                x = y;
                normalize(&mut x);
            }
            None => shift += 1e-12 * scale,
        }
    }
    x
}

fn normalize(x: &mut [f64]) {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
}

/// The `count` lowest eigenpairs, eigenvectors orthonormalized.
pub fn lowest_eigenpairs(d: &[f64], e: &[f64], count: usize) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for k in 0..count.min(d.len()) {
        let lam = kth_eigenvalue(d, e, k);
        let mut v = inverse_iteration(d, e, lam);
        for _ in 0..2 {
            for (_, u) in &out {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= dot * ui);
            }
            normalize(&mut v);
        }
        out.push((lam, v));
    }
    out
}

/// Full eigendecomposition by implicit QL. Returns eigenvalues in increasing
/// order and the eigenvectors as rows of a row-major n×n array.
pub fn full_eigen(d: &[f64], e: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = d.len();
    let mut dd = d.to_vec();
    let mut ee = vec![0.0; n];
    ee[..n.saturating_sub(1)].copy_from_slice(e);
    // z[k] is column k of the accumulated rotation, stored as a row
    let mut z: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd_sum = dd[m].abs() + dd[m + 1].abs();
                if ee[m].abs() <= f64::EPSILON * dd_sum {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { what: "tridiagonal QL", detail: format!("index {l}") });
            }
            let mut g = (dd[l + 1] - dd[l]) / (2.0 * ee[l]);
            let mut r = g.hypot(1.0);
            g = dd[m] - dd[l] + ee[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * ee[i];
                let b = c * ee[i];
                r = f.hypot(g);
                ee[i + 1] = r;
                if r == 0.0 {
                    dd[i + 1] -= p;
                    ee[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = dd[i + 1] - p;
                r = (dd[i] - g) * s + 2.0 * c * b;
                p = s * r;
                dd[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let fz = row[i + 1];
                    row[i + 1] = s * row[i] + c * fz;
                    row[i] = c * row[i] - s * fz;
                }
            }
            if underflow {
                continue;
            }
            dd[l] -= p;
            ee[l] = g;
            ee[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dd[a].total_cmp(&dd[b]));
    let vals = order.iter().map(|&k| dd[k]).collect();
    let vecs = order.iter().map(|&k| (0..n).map(|i| z[i][k]).collect()).collect();
    Ok((vals, vecs))
}

/// Thomas algorithm for a tridiagonal system (no pivoting): sub[i] couples
/// rows i+1 and i, sup[i] couples rows i and i+1.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = rhs.to_vec();
    let mut beta = diag[0];
    x[0] /= beta;
    for i in 1..n {
        c[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i - 1] * c[i];
        x[i] = (x[i] - sub[i - 1] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}
