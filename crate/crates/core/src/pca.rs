//! PCA on top of an [`SvdResult`]: centering, cumulative explained variance,
//! projection and the relative Frobenius residual.

use crate::error::{LinalgError, Result};
use crate::matrix::DenseMatrix;
use crate::svd::{svd_any_shape, Method, MethodParams, SvdResult};

/// Which axis of the data matrix indexes examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `A` is `features x examples`; the basis is `U` and `Y = UᵀA`.
    ColumnsAreExamples,
    /// `A` is `examples x features`; the basis is `V` and `Y = AV`.
    RowsAreExamples,
}

impl Orientation {
    fn feature_count(self, a: &DenseMatrix) -> usize {
        match self {
            Orientation::ColumnsAreExamples => a.rows(),
            Orientation::RowsAreExamples => a.cols(),
        }
    }
}

/// Subtracts the per-feature mean. Returns the centered matrix and the means.
pub fn center(a: &DenseMatrix, orientation: Orientation) -> (DenseMatrix, Vec<f64>) {
    let (m, n) = a.shape();
    match orientation {
        Orientation::RowsAreExamples => {
            let mean: Vec<f64> = (0..n)
                .map(|j| a.col(j).iter().sum::<f64>() / m as f64)
                .collect();
            (subtract_mean(a, &mean, orientation), mean)
        }
        Orientation::ColumnsAreExamples => {
            let mut mean = vec![0.0; m];
            for j in 0..n {
                for (acc, x) in mean.iter_mut().zip(a.col(j)) {
                    *acc += x;
                }
            }
            mean.iter_mut().for_each(|x| *x /= n as f64);
            (subtract_mean(a, &mean, orientation), mean)
        }
    }
}

/// Subtracts a previously computed per-feature mean.
pub fn subtract_mean(a: &DenseMatrix, mean: &[f64], orientation: Orientation) -> DenseMatrix {
    match orientation {
        Orientation::RowsAreExamples => {
            DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j) - mean[j])
        }
        Orientation::ColumnsAreExamples => {
            DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j) - mean[i])
        }
    }
}

/// Sum of all Gram eigenvalues, taken as `‖A‖_F²`.
///
/// `tr(AᵀA) = tr(AAᵀ) = Σ λ_i = Σ a_ij²`, so the total is available without
/// any eigendecomposition and stays exact when the SVD was rank-limited.
pub fn total_variance(a: &DenseMatrix) -> f64 {
    a.frobenius_norm_sq()
}

/// Outcome of cumulative explained variance selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// `k` components reach the threshold with cumulative ratio `ratio`.
    Components { k: usize, ratio: f64 },
    /// The stored eigenvalues only explain `captured` of the total variance.
    InsufficientSpectrum { captured: f64 },
}

impl Selection {
    pub fn components(self) -> Option<usize> {
        match self {
            Selection::Components { k, .. } => Some(k),
            Selection::InsufficientSpectrum { .. } => None,
        }
    }
}

/// Smallest `K >= 1` with `Σ_{i<=K} λ_i / total >= t`.
pub fn select_components(eigenvalues: &[f64], total: f64, t: f64) -> Result<Selection> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LinalgError::InvalidParameter(format!(
            "threshold {t} must lie in [0, 1]"
        )));
    }
    if total.is_nan() || total <= 0.0 {
        return Err(LinalgError::ZeroMatrix("explained variance"));
    }
    if eigenvalues.iter().any(|&l| l < 0.0) || eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(LinalgError::InvalidParameter(
            "eigenvalues must be nonnegative and descending".into(),
        ));
    }
    let mut cumulative = 0.0;
    for (idx, &l) in eigenvalues.iter().enumerate() {
        cumulative += l;
        let ratio = cumulative / total;
        if ratio >= t {
            return Ok(Selection::Components { k: idx + 1, ratio });
        }
    }
    Ok(Selection::InsufficientSpectrum {
        captured: cumulative / total,
    })
}

/// A fitted PCA basis.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Orthonormal projection columns (`U` or `V` depending on orientation).
    pub basis: DenseMatrix,
    /// `λ_i = σ_i²`, descending.
    pub eigenvalues: Vec<f64>,
    /// `‖A_centered‖_F²`, including variance outside the stored spectrum.
    pub total_variance: f64,
    pub orientation: Orientation,
    /// Per-feature mean removed before fitting (zeros when fitted uncentered).
    pub mean: Vec<f64>,
    pub svd: SvdResult,
}

impl PcaModel {
    /// Fits a model. With `center_data == false` the input is taken as already centered.
    pub fn fit(
        a: &DenseMatrix,
        orientation: Orientation,
        method: Method,
        params: &MethodParams,
        center_data: bool,
    ) -> Result<PcaModel> {
        let (data, mean) = if center_data {
            center(a, orientation)
        } else {
            (a.clone(), vec![0.0; orientation.feature_count(a)])
        };
        let svd = svd_any_shape(&data, method, params)?;
        Ok(Self::from_svd(
            svd,
            orientation,
            total_variance(&data),
            mean,
        ))
    }

    pub fn from_svd(
        svd: SvdResult,
        orientation: Orientation,
        total_variance: f64,
        mean: Vec<f64>,
    ) -> PcaModel {
        let basis = match orientation {
            Orientation::ColumnsAreExamples => svd.u.clone(),
            Orientation::RowsAreExamples => svd.v.clone(),
        };
        PcaModel {
            basis,
            eigenvalues: svd.sigma.iter().map(|s| s * s).collect(),
            total_variance,
            orientation,
            mean,
            svd,
        }
    }

    /// Per-component `λ_i / total`.
    pub fn explained_ratios(&self) -> Vec<f64> {
        if self.total_variance <= 0.0 {
            return vec![0.0; self.eigenvalues.len()];
        }
        self.eigenvalues
            .iter()
            .map(|l| l / self.total_variance)
            .collect()
    }

    pub fn select(&self, t: f64) -> Result<Selection> {
        select_components(&self.eigenvalues, self.total_variance, t)
    }

    /// Keeps the first `k` components.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        let svd = crate::svd::truncate_rank(&self.svd, k)?;
        Ok(Self::from_svd(
            svd,
            self.orientation,
            self.total_variance,
            self.mean.clone(),
        ))
    }

    /// Projects raw data onto the basis after removing the model mean.
    pub fn transform(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        transform(self, a)
    }

    /// `mean + B Bᵀ (x − mean)` for example `index` of `a`, where `B` is the basis.
    pub fn reconstruct_example(&self, a: &DenseMatrix, index: usize) -> Result<Vec<f64>> {
        let x = match self.orientation {
            Orientation::RowsAreExamples if index < a.rows() => a.row(index),
            Orientation::ColumnsAreExamples if index < a.cols() => a.col(index).to_vec(),
            _ => {
                return Err(LinalgError::InvalidParameter(format!(
                    "example index {index} out of range"
                )))
            }
        };
        if x.len() != self.basis.rows() {
            return Err(LinalgError::DimensionMismatch {
                op: "reconstruct_example",
                left_rows: x.len(),
                left_cols: 1,
                right_rows: self.basis.rows(),
                right_cols: self.basis.cols(),
            });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        let centered = DenseMatrix::from_raw_unchecked(centered.len(), 1, centered);
        let coords = self.basis.tr_matmul(&centered)?;
        let back = self.basis.matmul(&coords)?;
        Ok(back
            .col(0)
            .iter()
            .zip(&self.mean)
            .map(|(v, m)| v + m)
            .collect())
    }
}

/// `Y = Uᵀ(A − mean)` or `Y = (A − mean)V`, depending on the model orientation.
pub fn transform(model: &PcaModel, a: &DenseMatrix) -> Result<DenseMatrix> {
    let features = model.orientation.feature_count(a);
    if features != model.basis.rows() || features != model.mean.len() {
        let (rows, cols) = a.shape();
        return Err(LinalgError::DimensionMismatch {
            op: "pca transform",
            left_rows: rows,
            left_cols: cols,
            right_rows: model.basis.rows(),
            right_cols: model.basis.cols(),
        });
    }
    let centered = if model.mean.iter().all(|&x| x == 0.0) {
        a.clone()
    } else {
        subtract_mean(a, &model.mean, model.orientation)
    };
    match model.orientation {
        Orientation::ColumnsAreExamples => model.basis.tr_matmul(&centered),
        Orientation::RowsAreExamples => centered.matmul(&model.basis),
    }
}

/// `δ = ‖A − UΣVᵀ‖_F / ‖A‖_F`.
pub fn residual_delta(a: &DenseMatrix, s: &SvdResult) -> Result<f64> {
    if s.u.rows() != a.rows() || s.v.rows() != a.cols() {
        return Err(LinalgError::DimensionMismatch {
            op: "residual_delta",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: s.u.rows(),
            right_cols: s.v.rows(),
        });
    }
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(LinalgError::ZeroMatrix("residual rate"));
    }
    Ok(a.sub(&s.reconstruct())?.frobenius_norm() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::eig_sym;
    use crate::random::{gaussian_matrix, RngSeed};
    use crate::svd::{truncate_rank, truncated_svd};

    #[test]
    fn centering_examples() {
        let a = DenseMatrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let (c, mean) = center(&a, Orientation::RowsAreExamples);
        assert_eq!(mean, vec![2.0]);
        assert_eq!(c, DenseMatrix::from_rows(&[[-1.0], [0.0], [1.0]]).unwrap());

        let (again, mean2) = center(&c, Orientation::RowsAreExamples);
        assert_eq!(again, c);
        assert_eq!(mean2, vec![0.0]);

        let constant = DenseMatrix::from_rows(&[[5.0, 5.0, 5.0]]).unwrap();
        let (c, mean) = center(&constant, Orientation::ColumnsAreExamples);
        assert_eq!(mean, vec![5.0]);
        assert_eq!(c, DenseMatrix::zeros(1, 3));
    }

    #[test]
    fn centered_features_have_zero_mean() {
        let a = gaussian_matrix(17, 5, RngSeed(2));
        for orientation in [
            Orientation::RowsAreExamples,
            Orientation::ColumnsAreExamples,
        ] {
            let (c, _) = center(&a, orientation);
            let (_, again) = center(&c, orientation);
            assert!(again.iter().all(|m| m.abs() <= 1e-12));
        }
    }

    #[test]
    fn total_variance_examples() {
        assert_eq!(total_variance(&DenseMatrix::from_diag(&[3.0, 4.0])), 25.0);
        assert_eq!(total_variance(&DenseMatrix::zeros(3, 3)), 0.0);
        let a = gaussian_matrix(10, 4, RngSeed(8));
        let sum: f64 = eig_sym(&a.gram()).unwrap().eigenvalues.iter().sum();
        let tv = total_variance(&a);
        assert!((tv - sum).abs() <= 1e-8 * tv);
    }

    #[test]
    fn selection_examples() {
        let l = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(
            select_components(&l, 10.0, 0.7).unwrap().components(),
            Some(2)
        );
        assert_eq!(
            select_components(&l, 10.0, 0.0).unwrap().components(),
            Some(1)
        );
        assert_eq!(
            select_components(&l, 10.0, 1.0).unwrap().components(),
            Some(4)
        );
        assert_eq!(
            select_components(&l[..2], 10.0, 0.9).unwrap(),
            Selection::InsufficientSpectrum { captured: 0.7 }
        );
        assert!(matches!(
            select_components(&l, 0.0, 0.5),
            Err(LinalgError::ZeroMatrix(_))
        ));
        assert!(select_components(&l, 10.0, 1.5).is_err());
        assert!(select_components(&[1.0, 2.0], 3.0, 0.5).is_err());
    }

    #[test]
    fn selection_is_monotone_in_threshold() {
        let l = [5.0, 2.5, 2.5, 1.0, 0.5, 0.1];
        let total = 12.0;
        let mut last = 0;
        for step in 0..=100 {
            let t = step as f64 / 100.0;
            let k = match select_components(&l, total, t).unwrap() {
                Selection::Components { k, .. } => k,
                Selection::InsufficientSpectrum { .. } => l.len() + 1,
            };
            assert!(k >= last);
            last = k;
        }
    }

    #[test]
    fn identity_basis_transform() {
        let svd = truncated_svd(&DenseMatrix::identity(3)).unwrap();
        let model = PcaModel::from_svd(svd, Orientation::ColumnsAreExamples, 3.0, vec![0.0; 3]);
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(model.transform(&a).unwrap(), a);
        assert!(model.transform(&DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn projecting_a_basis_direction() {
        let a = gaussian_matrix(8, 20, RngSeed(4));
        let model = PcaModel::fit(
            &a,
            Orientation::ColumnsAreExamples,
            Method::Truncated,
            &MethodParams::for_columns(8),
            false,
        )
        .unwrap();
        let scale = 2.5;
        let point = DenseMatrix::from_fn(8, 1, |i, _| scale * model.basis.get(i, 0));
        let y = model.transform(&point).unwrap();
        assert!((y.get(0, 0) - scale).abs() <= 1e-12);
        for i in 1..y.rows() {
            assert!(y.get(i, 0).abs() <= 1e-12);
        }
    }

    #[test]
    fn transformed_covariance_is_diagonal() {
        let a = gaussian_matrix(30, 6, RngSeed(12));
        for orientation in [
            Orientation::RowsAreExamples,
            Orientation::ColumnsAreExamples,
        ] {
            let model = PcaModel::fit(
                &a,
                orientation,
                Method::Truncated,
                &MethodParams::for_columns(6),
                true,
            )
            .unwrap();
            let y = model.transform(&a).unwrap();
            let cov = match orientation {
                Orientation::RowsAreExamples => y.gram(),
                Orientation::ColumnsAreExamples => y.transpose().gram(),
            };
            let top = model.eigenvalues[0];
            for i in 0..cov.rows() {
                for j in 0..cov.cols() {
                    if i == j {
                        assert!((cov.get(i, i) - model.eigenvalues[i]).abs() <= 1e-8 * top);
                    } else {
                        assert!(cov.get(i, j).abs() <= 1e-8 * top);
                    }
                }
            }
        }
    }

    #[test]
    fn full_rank_reconstruction_returns_the_example() {
        let a = gaussian_matrix(15, 4, RngSeed(21));
        let model = PcaModel::fit(
            &a,
            Orientation::RowsAreExamples,
            Method::Truncated,
            &MethodParams::for_columns(4),
            true,
        )
        .unwrap();
        let x = model.reconstruct_example(&a, 3).unwrap();
        for (got, want) in x.iter().zip(a.row(3)) {
            assert!((got - want).abs() <= 1e-10);
        }
        let one = model.truncated(1).unwrap();
        let approx = one.reconstruct_example(&a, 3).unwrap();
        assert!(approx
            .iter()
            .zip(a.row(3))
            .any(|(g, w)| (g - w).abs() > 1e-6));
        assert!(model.reconstruct_example(&a, 15).is_err());
    }

    #[test]
    fn delta_examples() {
        let a = DenseMatrix::from_diag(&[4.0, 3.0]);
        let s = truncated_svd(&a).unwrap();
        assert!(residual_delta(&a, &s).unwrap() <= 1e-8);
        let d = residual_delta(&a, &truncate_rank(&s, 1).unwrap()).unwrap();
        assert!((d - 0.6).abs() <= 1e-15);
        assert!(matches!(
            residual_delta(&DenseMatrix::zeros(2, 2), &s),
            Err(LinalgError::ZeroMatrix(_))
        ));
        assert!(residual_delta(&DenseMatrix::zeros(3, 2), &s).is_err());
    }

    #[test]
    fn delta_is_monotone_in_rank() {
        let a = gaussian_matrix(25, 7, RngSeed(6));
        let s = truncated_svd(&a).unwrap();
        let total: f64 = s.sigma.iter().map(|x| x * x).sum();
        let mut last = f64::INFINITY;
        for k in 1..=s.rank() {
            let d = residual_delta(&a, &truncate_rank(&s, k).unwrap()).unwrap();
            let tail: f64 = s.sigma[k..].iter().map(|x| x * x).sum();
            assert!((d * d - tail / total).abs() <= 1e-8);
            assert!(d <= last + 1e-15);
            last = d;
        }
    }
}
