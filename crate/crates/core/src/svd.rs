//! The three SVD routes: Gram-matrix truncated SVD, randomized PCA and block Krylov.
//!
//! All three expect a tall input (`rows >= cols`); [`svd_any_shape`] handles wide
//! matrices by factoring the transpose and swapping the factors.

use std::fmt;
use std::str::FromStr;

use crate::eig::eig_sym;
use crate::error::{LinalgError, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::qr::qr_thin;
use crate::random::{gaussian_matrix, RngSeed};

/// A Gram eigenvalue is kept only if `λ_i > RANK_CUTOFF * λ_1`.
///
/// This is `σ_i > 1e-6 σ_1` in singular-value terms. The Gram matrix carries an
/// absolute rounding error of order `ε λ_1`, so singular values below this cut
/// are indistinguishable from zero and `u_i = A v_i / σ_i` would be noise.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Truncated,
    Randomized,
    Krylov,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Truncated, Method::Randomized, Method::Krylov];

    pub fn name(self) -> &'static str {
        match self {
            Method::Truncated => "truncated",
            Method::Randomized => "randomized",
            Method::Krylov => "krylov",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "truncated" => Ok(Method::Truncated),
            "randomized" => Ok(Method::Randomized),
            "krylov" => Ok(Method::Krylov),
            other => Err(LinalgError::InvalidParameter(format!(
                "unknown method `{other}`"
            ))),
        }
    }
}

/// Parameters of the two sketching methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodParams {
    /// Sketch width `l`, the number of Gaussian test vectors.
    pub sketch_width: usize,
    /// Power (randomized) or Krylov block count `i`.
    pub iterations: usize,
    pub seed: RngSeed,
}

impl MethodParams {
    /// `l = ⌈n/2⌉`, `i = 1`.
    pub fn for_columns(n: usize) -> Self {
        Self::with_fraction(n, 0.5)
    }

    /// `l = ⌈fraction · n⌉` clamped to `[1, n]`, `i = 1`.
    pub fn with_fraction(n: usize, fraction: f64) -> Self {
        let l = ((fraction * n as f64).ceil() as usize).clamp(1, n.max(1));
        Self {
            sketch_width: l,
            iterations: 1,
            seed: RngSeed::default(),
        }
    }

    pub fn iterations(mut self, i: usize) -> Self {
        self.iterations = i;
        self
    }

    pub fn seed(mut self, seed: RngSeed) -> Self {
        self.seed = seed;
        self
    }
}

/// `A ≈ U diag(sigma) Vᵀ` with `rank` retained triplets.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `m x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Descending, strictly positive.
    pub sigma: Vec<f64>,
    /// `n x r`, orthonormal columns.
    pub v: DenseMatrix,
    pub method: Method,
    /// Every singular value the Gram eigendecomposition produced, including the
    /// ones below the rank cutoff, descending. Unaffected by [`truncate_rank`].
    pub spectrum: Vec<f64>,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let us = self
            .u
            .scale_columns(&self.sigma)
            .expect("sigma length equals rank");
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }

    fn swapped(self) -> SvdResult {
        SvdResult {
            u: self.v,
            v: self.u,
            ..self
        }
    }
}

/// SVD through the eigendecomposition of the `n x n` Gram matrix `AᵀA`.
///
/// `σ_i = √λ_i` and `u_i = A v_i / σ_i`; the `m x m` matrix `AAᵀ` is never
/// formed. Each `v_i` is signed so its largest-magnitude entry is positive.
pub fn truncated_svd(a: &DenseMatrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    require_tall(m, n)?;
    let eig = eig_sym(&a.gram())?;
    let spectrum: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();

    let top = eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let rank = if top > 0.0 {
        eig.eigenvalues
            .iter()
            .take_while(|&&l| l > RANK_CUTOFF * top)
            .count()
    } else {
        0
    };

    let mut v = eig.eigenvectors.columns(0..rank);
    for j in 0..rank {
        let col = v.col_mut(j);
        if leading_sign_negative(col) {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
    // σ_i = ‖A v_i‖ equals √λ_i in exact arithmetic, and keeps ‖u_i‖ = 1 when
    // λ_i carries the O(ε‖A‖²) rounding of the Gram matrix
    let av = a.matmul(&v)?;
    let norms: Vec<f64> = (0..rank)
        .map(|j| dot(av.col(j), av.col(j)).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = DenseMatrix::from_columns_unchecked(
        m,
        order
            .iter()
            .map(|&j| av.col(j).iter().map(|x| x / norms[j]).collect())
            .collect(),
    );
    let v =
        DenseMatrix::from_columns_unchecked(n, order.iter().map(|&j| v.col(j).to_vec()).collect());
    let mut spectrum = spectrum;
    spectrum[..rank].copy_from_slice(&sigma);

    Ok(SvdResult {
        u,
        sigma,
        v,
        method: Method::Truncated,
        spectrum,
    })
}

/// Randomized PCA: a Gaussian sketch `AG`, `i` power steps `A(AᵀH)`, then an
/// exact SVD of the projected matrix `T = AᵀQ`.
pub fn randomized_pca(a: &DenseMatrix, params: &MethodParams) -> Result<SvdResult> {
    let (m, n) = a.shape();
    require_tall(m, n)?;
    let l = params.sketch_width;
    if l == 0 || l > n {
        return Err(LinalgError::InvalidParameter(format!(
            "sketch width {l} must lie in [1, {n}]"
        )));
    }
    let g = gaussian_matrix(n, l, params.seed);
    let mut h = a.matmul(&g)?;
    for _ in 0..params.iterations {
        h = a.matmul(&a.tr_matmul(&h)?)?;
    }
    let q = qr_thin(&h)?.q;
    project_and_factor(a, &q, Method::Randomized)
}

/// Block Krylov SVD: the range finder uses every block `[AG | (AAᵀ)AG | … | (AAᵀ)^i AG]`.
///
/// Each block is scaled to unit Frobenius norm before concatenation. That leaves
/// the spanned subspace unchanged and keeps the early blocks above the QR rank
/// tolerance when `σ_1^{2i}` is large.
pub fn krylov_svd(a: &DenseMatrix, params: &MethodParams) -> Result<SvdResult> {
    let (m, n) = a.shape();
    require_tall(m, n)?;
    let l = params.sketch_width;
    let i = params.iterations;
    if l == 0 || l > n {
        return Err(LinalgError::InvalidParameter(format!(
            "sketch width {l} must lie in [1, {n}]"
        )));
    }
    if i == 0 {
        return Err(LinalgError::InvalidParameter(
            "block Krylov needs at least one iteration".into(),
        ));
    }
    let width = (i + 1) * l;
    if width > m {
        return Err(LinalgError::InvalidParameter(format!(
            "block width (i+1)*l = {width} exceeds row count {m}"
        )));
    }

    let g = gaussian_matrix(n, l, params.seed);
    let mut blocks = Vec::with_capacity(i + 1);
    let mut h = a.matmul(&g)?;
    for _ in 0..i {
        let next = a.matmul(&a.tr_matmul(&h)?)?;
        blocks.push(normalized(h));
        h = next;
    }
    blocks.push(normalized(h));
    let q = qr_thin(&DenseMatrix::hcat(&blocks)?)?.q;
    project_and_factor(a, &q, Method::Krylov)
}

/// Shared tail of both sketching methods: `T = AᵀQ = Ṽ Σ Wᵀ`, `U = QW`, `V = Ṽ`.
fn project_and_factor(a: &DenseMatrix, q: &DenseMatrix, method: Method) -> Result<SvdResult> {
    let t = a.tr_matmul(q)?;
    let (n, width) = t.shape();
    let (v_tilde, w, sigma, spectrum) = if width <= n {
        let small = truncated_svd(&t)?;
        (small.u, small.v, small.sigma, small.spectrum)
    } else {
        // wider than tall: factor Tᵀ = W Σ Ṽᵀ instead; the surplus width carries no rank
        let small = truncated_svd(&t.transpose())?;
        (small.v, small.u, small.sigma, small.spectrum)
    };
    let mut u = q.matmul(&w)?;
    let mut v = v_tilde;
    for j in 0..sigma.len() {
        if leading_sign_negative(v.col(j)) {
            v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SvdResult {
        u,
        sigma,
        v,
        method,
        spectrum,
    })
}

/// Keeps the leading `k` singular triplets.
pub fn truncate_rank(s: &SvdResult, k: usize) -> Result<SvdResult> {
    if k == 0 || k > s.rank() {
        return Err(LinalgError::InvalidParameter(format!(
            "rank {k} must lie in [1, {}]",
            s.rank()
        )));
    }
    Ok(SvdResult {
        u: s.u.columns(0..k),
        sigma: s.sigma[..k].to_vec(),
        v: s.v.columns(0..k),
        method: s.method,
        spectrum: s.spectrum.clone(),
    })
}

/// Runs `method` on a tall matrix.
pub fn decompose(a: &DenseMatrix, method: Method, params: &MethodParams) -> Result<SvdResult> {
    match method {
        Method::Truncated => truncated_svd(a),
        Method::Randomized => randomized_pca(a, params),
        Method::Krylov => krylov_svd(a, params),
    }
}

/// Like [`decompose`] but accepts wide matrices by factoring `Aᵀ` and swapping
/// `U` and `V`. `params` always refer to the tall orientation, so for a wide
/// input the sketch width is bounded by the row count.
pub fn svd_any_shape(a: &DenseMatrix, method: Method, params: &MethodParams) -> Result<SvdResult> {
    if a.rows() >= a.cols() {
        decompose(a, method, params)
    } else {
        Ok(decompose(&a.transpose(), method, params)?.swapped())
    }
}

fn require_tall(m: usize, n: usize) -> Result<()> {
    if m < n || n == 0 {
        return Err(LinalgError::InvalidShape {
            rows: m,
            cols: n,
            reason: "expected rows >= cols >= 1 (transpose wide inputs)",
        });
    }
    Ok(())
}

fn normalized(mut h: DenseMatrix) -> DenseMatrix {
    let norm = h.frobenius_norm();
    if norm > 0.0 {
        for j in 0..h.cols() {
            h.col_mut(j).iter_mut().for_each(|x| *x /= norm);
        }
    }
    h
}

/// True when the first entry of largest magnitude is negative.
fn leading_sign_negative(col: &[f64]) -> bool {
    let mut best = 0.0f64;
    let mut sign_negative = false;
    for &x in col {
        if x.abs() > best {
            best = x.abs();
            sign_negative = x < 0.0;
        }
    }
    sign_negative
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::orthonormality_defect;

    fn delta(a: &DenseMatrix, s: &SvdResult) -> f64 {
        a.sub(&s.reconstruct()).unwrap().frobenius_norm() / a.frobenius_norm()
    }

    /// Power iteration with deflation on `AᵀA`, independent of the Jacobi path.
    fn power_deflation_sigma(a: &DenseMatrix) -> Vec<f64> {
        let n = a.cols();
        let g = a.gram();
        let mut s: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| g.get(i, j)).collect())
            .collect();
        let mut out = Vec::new();
        for k in 0..n {
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + k * 3) % 5) as f64).collect();
            let mut lambda = 0.0;
            for _ in 0..20_000 {
                let y: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| s[i][j] * x[j]).sum())
                    .collect();
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
                let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
                x = next;
                lambda = norm;
                if diff < 1e-15 {
                    break;
                }
            }
            out.push(lambda.sqrt());
            for i in 0..n {
                for j in 0..n {
                    s[i][j] -= lambda * x[i] * x[j];
                }
            }
        }
        out
    }

    #[test]
    fn embedded_diagonal() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 4.0], [0.0, 0.0]]).unwrap();
        let s = truncated_svd(&a).unwrap();
        assert_eq!(s.sigma, vec![4.0, 3.0]);
        assert_eq!(
            s.v,
            DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
        );
        assert_eq!(
            s.u,
            DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]]).unwrap()
        );
    }

    #[test]
    fn sigma_is_root_of_gram_eigenvalue() {
        // AᵀA = diag(4, 1)
        let a = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let s = truncated_svd(&a).unwrap();
        assert_eq!(s.sigma[0], 2.0);
    }

    #[test]
    fn matches_power_iteration_oracle() {
        let a = gaussian_matrix(12, 5, RngSeed(11));
        let s = truncated_svd(&a).unwrap();
        let oracle = power_deflation_sigma(&a);
        for (x, y) in s.sigma.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-6 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn sign_convention() {
        let a = gaussian_matrix(9, 4, RngSeed(5));
        let s = truncated_svd(&a).unwrap();
        for j in 0..s.rank() {
            assert!(!leading_sign_negative(s.v.col(j)));
        }
    }

    #[test]
    fn rank_deficient_drops_columns() {
        let b = gaussian_matrix(10, 2, RngSeed(1));
        let c = gaussian_matrix(2, 4, RngSeed(2));
        let a = b.matmul(&c).unwrap();
        let s = truncated_svd(&a).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.spectrum.len(), 4);
        assert!(orthonormality_defect(&s.u) <= 1e-8);
        assert!(delta(&a, &s) <= 1e-8);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let z = DenseMatrix::zeros(6, 3);
        for method in Method::ALL {
            let s = decompose(&z, method, &MethodParams::for_columns(3)).unwrap();
            assert_eq!(s.rank(), 0, "{method}");
            assert!(s.spectrum.iter().all(|&x| x == 0.0));
            assert_eq!(s.reconstruct(), z);
        }
    }

    #[test]
    fn wide_input_rejected_but_wrapper_handles_it() {
        let a = gaussian_matrix(3, 7, RngSeed(9));
        assert!(truncated_svd(&a).is_err());
        let s = svd_any_shape(&a, Method::Truncated, &MethodParams::for_columns(3)).unwrap();
        assert_eq!(s.u.shape(), (3, 3));
        assert_eq!(s.v.shape(), (7, 3));
        assert!(delta(&a, &s) <= 1e-10);
    }

    #[test]
    fn parameter_errors() {
        let a = gaussian_matrix(10, 4, RngSeed(0));
        let p = MethodParams::for_columns(4);
        assert!(randomized_pca(
            &a,
            &MethodParams {
                sketch_width: 5,
                ..p
            }
        )
        .is_err());
        assert!(randomized_pca(
            &a,
            &MethodParams {
                sketch_width: 0,
                ..p
            }
        )
        .is_err());
        assert!(krylov_svd(&a, &p.iterations(0)).is_err());
        // (i+1) l = 12 > 10 rows
        assert!(krylov_svd(
            &a,
            &MethodParams {
                sketch_width: 4,
                ..p
            }
            .iterations(2)
        )
        .is_err());
        assert!(randomized_pca(&a, &p.iterations(0)).is_ok());
    }

    #[test]
    fn truncate_rank_bounds() {
        let s = truncated_svd(&DenseMatrix::from_diag(&[4.0, 3.0])).unwrap();
        let same = truncate_rank(&s, 2).unwrap();
        assert_eq!(same.sigma, s.sigma);
        assert_eq!(same.u, s.u);
        assert_eq!(truncate_rank(&s, 1).unwrap().sigma, vec![4.0]);
        assert!(truncate_rank(&s, 0).is_err());
        assert!(truncate_rank(&s, 3).is_err());
    }

    #[test]
    fn krylov_with_default_width_is_exact() {
        // (i+1) l = n, and the Krylov space lies inside range(A)
        let a = gaussian_matrix(60, 10, RngSeed(4));
        let s = krylov_svd(&a, &MethodParams::for_columns(10)).unwrap();
        assert_eq!(s.rank(), 10);
        assert!(delta(&a, &s) <= 1e-8);
    }

    #[test]
    fn odd_width_krylov_takes_transposed_path() {
        let a = gaussian_matrix(40, 7, RngSeed(8));
        let p = MethodParams::for_columns(7);
        assert_eq!(p.sketch_width, 4);
        let s = krylov_svd(&a, &p).unwrap();
        assert_eq!(s.rank(), 7);
        assert!(orthonormality_defect(&s.u) <= 1e-8);
        assert!(orthonormality_defect(&s.v) <= 1e-8);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("econ".parse::<Method>().is_err());
    }
}
