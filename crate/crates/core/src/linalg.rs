//! Dense vector kernels and the two small factorizations the models need.
//!
//! Matrices are stored column-major as `Vec<Vec<f64>>` (one `Vec` per
//! column), which matches how the projection treats features as vectors in
//! row space.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y -= alpha * x`
#[inline]
pub fn sub_scaled(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

pub fn mean(a: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().sum::<f64>() / a.len() as f64
}

/// Cosine of the angle between two vectors; `None` when either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot(a, b) / (na * nb))
    }
}

/// Solves `min ||A x - b||` (optionally with a ridge term `ridge * ||x||^2`)
/// by Householder QR of `A`, given as columns.
///
/// Returns `Err(dependent)` with the indices of columns whose residual after
/// orthogonalization against the preceding columns falls below
/// `rank_tol * ||a_k||` when no ridge term is supplied.
pub fn qr_least_squares(
    columns: &[Vec<f64>],
    b: &[f64],
    ridge: f64,
    rank_tol: f64,
) -> core::result::Result<Vec<f64>, Vec<usize>> {
    let p = columns.len();
    let n = b.len();
    let extra = if ridge > 0.0 { p } else { 0 };
    let rows = n + extra;
    let root = ridge.sqrt();

    let mut a: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            debug_assert_eq!(c.len(), n);
            let mut col = Vec::with_capacity(rows);
            col.extend_from_slice(c);
            if extra > 0 {
                col.extend((0..p).map(|i| if i == j { root } else { 0.0 }));
            }
            col
        })
        .collect();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut rhs = Vec::with_capacity(rows);
    rhs.extend_from_slice(b);
    rhs.resize(rows, 0.0);

    let mut diag = vec![0.0; p];
    let mut dependent = Vec::new();
    for k in 0..p.min(rows) {
        let (head, tail) = a.split_at_mut(k + 1);
        let ak = &mut head[k];
        let sub_norm = norm(&ak[k..]);
        if sub_norm == 0.0 || sub_norm <= rank_tol * col_norms[k] {
            dependent.push(k);
        }
        if sub_norm == 0.0 {
            continue;
        }
        let alpha = if ak[k] > 0.0 { -sub_norm } else { sub_norm };
        ak[k] -= alpha;
        let v = &ak[k..];
        let vnorm2 = dot(v, v);
        for aj in tail.iter_mut() {
            let s = 2.0 * dot(v, &aj[k..]) / vnorm2;
            sub_scaled(&mut aj[k..], s, v);
        }
        let s = 2.0 * dot(v, &rhs[k..]) / vnorm2;
        sub_scaled(&mut rhs[k..], s, v);
        diag[k] = alpha;
    }
    if p > rows {
        dependent.extend(rows..p);
    }
    if !dependent.is_empty() && ridge == 0.0 {
        return Err(dependent);
    }

    // Back substitution on R (upper triangle of `a` with diagonal in `diag`).
    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        if diag[k] == 0.0 {
            x[k] = 0.0;
            continue;
        }
        let mut acc = rhs[k];
        for (j, aj) in a.iter().enumerate().skip(k + 1) {
            acc -= aj[k] * x[j];
        }
        x[k] = acc / diag[k];
    }
    Ok(x)
}

/// Solves `A x = b` for a symmetric positive definite `A` (row-major `p x p`).
pub fn cholesky_solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let p = b.len();
    let l = cholesky(a, p)?;
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * p + k] * z[k];
        }
        z[i] = acc / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = z[i];
        for k in i + 1..p {
            acc -= l[k * p + i] * x[k];
        }
        x[i] = acc / l[i * p + i];
    }
    Ok(x)
}

/// Lower Cholesky factor of a row-major SPD matrix.
pub fn cholesky(a: &[f64], p: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), p * p);
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut acc = a[i * p + j];
            for k in 0..j {
                acc -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if acc <= 0.0 || !acc.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * p + i] = acc.sqrt();
            } else {
                l[i * p + j] = acc / l[j * p + j];
            }
        }
    }
    Ok(l)
}
