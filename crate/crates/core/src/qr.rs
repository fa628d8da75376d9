//! Thin Householder QR.

use crate::error::{LinalgError, Result};
use crate::matrix::{dot, DenseMatrix};

/// Relative threshold below which a column is treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Thin factorization `h = q * r` with `q` of size `m x p` and `r` of size `p x p`.
#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: DenseMatrix,
    /// Upper triangular with a nonnegative diagonal.
    pub r: DenseMatrix,
    /// Number of columns that were numerically independent of the earlier ones.
    pub rank: usize,
}

impl QrResult {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.r.cols()
    }
}

/// Householder QR of a tall matrix.
///
/// A column whose remaining norm falls to `RANK_TOLERANCE * ‖h‖_F` or below gets
/// a zero diagonal in `r`; the matching column of `q` is then the unreflected
/// basis vector, which is still a unit vector orthogonal to all other columns.
pub fn qr_thin(h: &DenseMatrix) -> Result<QrResult> {
    let (m, p) = h.shape();
    if m < p {
        return Err(LinalgError::InvalidShape {
            rows: m,
            cols: p,
            reason: "thin QR needs rows >= cols",
        });
    }
    let tol = RANK_TOLERANCE * h.frobenius_norm();
    let mut work = h.clone();
    let mut r = DenseMatrix::zeros(p, p);
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(p);
    let mut rank = 0;

    for k in 0..p {
        let x = &work.col(k)[k..];
        let norm_x = dot(x, x).sqrt();
        if norm_x <= tol {
            reflectors.push(None);
            r.set(k, k, 0.0);
            for j in k + 1..p {
                r.set(k, j, work.get(k, j));
            }
            continue;
        }
        rank += 1;
        let alpha = if x[0] >= 0.0 { -norm_x } else { norm_x };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        for j in k..p {
            apply_reflector(&v, vv, &mut work.col_mut(j)[k..]);
        }
        r.set(k, k, alpha);
        for j in k + 1..p {
            r.set(k, j, work.get(k, j));
        }
        reflectors.push(Some(v));
    }

    // q = H_0 H_1 ... H_{p-1} [I; 0]
    let mut q = DenseMatrix::zeros(m, p);
    for k in 0..p {
        q.set(k, k, 1.0);
    }
    for k in (0..p).rev() {
        if let Some(v) = &reflectors[k] {
            let vv = dot(v, v);
            for j in k..p {
                apply_reflector(v, vv, &mut q.col_mut(j)[k..]);
            }
        }
    }

    for k in 0..p {
        if r.get(k, k) < 0.0 {
            for j in k..p {
                r.set(k, j, -r.get(k, j));
            }
            q.col_mut(k).iter_mut().for_each(|x| *x = -*x);
        }
    }

    Ok(QrResult { q, r, rank })
}

/// `y -= 2 v (vᵀy) / (vᵀv)`
#[inline]
fn apply_reflector(v: &[f64], vv: f64, y: &mut [f64]) {
    let s = 2.0 * dot(v, y) / vv;
    if s != 0.0 {
        for (yi, vi) in y.iter_mut().zip(v) {
            *yi -= s * vi;
        }
    }
}
