//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::error::{LinalgError, Result};
use crate::matrix::DenseMatrix;

/// Convergence target for the off-diagonal Frobenius norm, relative to `‖s‖_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
/// Upper bound on full sweeps over all `(p, q)` pairs.
pub const MAX_SWEEPS: usize = 30;
/// Allowed `‖s − sᵀ‖_max`, relative to `‖s‖_max`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigResult {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
    pub sweeps: usize,
}

/// Eigendecomposition `s = V diag(λ) Vᵀ` of a symmetric matrix.
///
/// The input is symmetrized as `(s + sᵀ)/2` before iterating. Eigenvalues are
/// sorted descending with a stable sort, so ties keep the order in which the
/// rotations left them on the diagonal.
pub fn eig_sym(s: &DenseMatrix) -> Result<EigResult> {
    let (rows, cols) = s.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    let n = rows;
    let scale = s.max_abs();
    let mut max_asymmetry: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            max_asymmetry = max_asymmetry.max((s.get(i, j) - s.get(j, i)).abs());
        }
    }
    let tolerance = SYMMETRY_TOLERANCE * scale;
    if max_asymmetry > tolerance {
        return Err(LinalgError::NotSymmetric {
            max_asymmetry,
            tolerance,
        });
    }

    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            a[j * n + i] = 0.5 * (s.get(i, j) + s.get(j, i));
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let target = OFF_DIAGONAL_TOLERANCE * s.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable, so equal eigenvalues keep their diagonal order
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let columns = order
        .iter()
        .map(|&k| v[k * n..(k + 1) * n].to_vec())
        .collect();
    Ok(EigResult {
        eigenvalues,
        eigenvectors: DenseMatrix::from_columns_unchecked(n, columns),
        sweeps,
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += a[j * n + i] * a[j * n + i];
            }
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`; `a` is a full symmetric matrix.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[q * n + p];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + tau.hypot(1.0))
    } else {
        -1.0 / (-tau + tau.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // a <- a J, column-wise (contiguous)
    rotate_columns(a, n, p, q, c, s);
    // a <- Jᵀ a: by symmetry rows p, q equal the updated columns off the 2x2 block
    for k in 0..n {
        if k != p && k != q {
            a[k * n + p] = a[p * n + k];
            a[k * n + q] = a[q * n + k];
        }
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[q * n + p] = 0.0;
    a[p * n + q] = 0.0;

    rotate_columns(v, n, p, q, c, s);
}

#[inline]
fn rotate_columns(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = m.split_at_mut(q * n);
    let cp = &mut lo[p * n..(p + 1) * n];
    let cq = &mut hi[..n];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
