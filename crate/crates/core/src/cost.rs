//! Closed-form FLOP and storage models for the three SVD routes.
//!
//! Each method has a general estimator in `(m, n, l, i)` and a closed form for
//! the usual setting `l = n/2, i = 1` (the `*_half_width` functions). Formulas
//! keep their printed coefficients and fractional terms; nothing is rounded.
//!
//! The closed forms are not all consistent with the general ones:
//!
//! * Randomized time agrees exactly: `n²/2 + 11/4·mn² + n³/6`.
//! * Krylov space agrees exactly. At `l = n/2, i = 1` the terms
//!   `mn + 7ml + 5nl + 2(2l)²` become `mn + 7/2·mn + 5/2·n² + 2n²`, which is
//!   `9/2·mn + 9/2·n²`.
//! * Krylov time does not. The general form multiplies its bracket by
//!   `(i+1)²l² = n²`, while the closed form multiplies the same bracket by
//!   `4n²`, so `half_width − general = 3n²(m² + n² + 2m − 2n/3)`.
//! * Randomized space does not either. The general form gives `5/2·mn + 2n²`,
//!   while the closed form is `9/2·mn + 3n²`, a gap of `2mn + n²`.
//!
//! The general Krylov time also carries an `m²` term. Summing its own steps
//! (QR `2mw² − 2w³/3`, small SVD `nw²`, `QW` product `mw²`, `w = (i+1)l`)
//! gives `w²(3m + n − 2w/3)` instead; [`krylov_cost_per_step`] evaluates that.

use crate::error::{LinalgError, Result};
use crate::svd::{Method, MethodParams};

pub const BYTES_PER_ENTRY: f64 = 8.0;

/// Modeled cost of one factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub flops: f64,
    pub space_entries: f64,
    /// Always `8 * space_entries`.
    pub space_bytes: f64,
}

impl CostEstimate {
    fn new(flops: f64, space_entries: f64) -> Self {
        Self {
            flops,
            space_entries,
            space_bytes: BYTES_PER_ENTRY * space_entries,
        }
    }
}

fn check_domain(m: usize, n: usize, l: usize) -> Result<()> {
    if !(m >= n && n >= l && l >= 1) {
        return Err(LinalgError::InvalidParameter(format!(
            "cost model needs m >= n >= l >= 1, got m={m}, n={n}, l={l}"
        )));
    }
    Ok(())
}

/// Block Krylov with sketch width `l` and `i >= 1` power blocks.
///
/// Time: `nl + (3i+2)mnl + (i+1)²l²(m² + n² + 2m − 2/3·(i+1)l)`.
/// Space: `mn + (3i+4)ml + (2i+3)nl + 2((i+1)l)²`.
pub fn krylov_cost(m: usize, n: usize, l: usize, i: usize) -> Result<CostEstimate> {
    check_domain(m, n, l)?;
    if i == 0 {
        return Err(LinalgError::InvalidParameter(
            "Krylov cost model needs i >= 1".into(),
        ));
    }
    let (m, n, l, i) = (m as f64, n as f64, l as f64, i as f64);
    let w = (i + 1.0) * l;
    let flops =
        n * l + (3.0 * i + 2.0) * m * n * l + w * w * (m * m + n * n + 2.0 * m - 2.0 / 3.0 * w);
    let space = m * n + (3.0 * i + 4.0) * m * l + (2.0 * i + 3.0) * n * l + 2.0 * w * w;
    Ok(CostEstimate::new(flops, space))
}

/// Krylov time as the sum of its individual steps; space as in [`krylov_cost`].
///
/// Time: `nl + (3i+2)mnl + w²(3m + n − 2w/3)` with `w = (i+1)l`.
pub fn krylov_cost_per_step(m: usize, n: usize, l: usize, i: usize) -> Result<CostEstimate> {
    let printed = krylov_cost(m, n, l, i)?;
    let (m, n, l, i) = (m as f64, n as f64, l as f64, i as f64);
    let w = (i + 1.0) * l;
    let flops = n * l + (3.0 * i + 2.0) * m * n * l + w * w * (3.0 * m + n - 2.0 / 3.0 * w);
    Ok(CostEstimate::new(flops, printed.space_entries))
}

/// Randomized PCA with sketch width `l` and `i >= 0` power steps.
///
/// Time: `nl + (2i+2)mnl + l²(3m + n − 2l/3)`. Space: `mn + 3ml + 3nl + 2l²`.
pub fn randomized_cost(m: usize, n: usize, l: usize, i: usize) -> Result<CostEstimate> {
    check_domain(m, n, l)?;
    let (m, n, l, i) = (m as f64, n as f64, l as f64, i as f64);
    let flops = n * l + (2.0 * i + 2.0) * m * n * l + l * l * (3.0 * m + n - 2.0 / 3.0 * l);
    let space = m * n + 3.0 * m * l + 3.0 * n * l + 2.0 * l * l;
    Ok(CostEstimate::new(flops, space))
}

/// Gram-matrix truncated SVD. Time: `2mn² + n³ + n + mn`. Space: `3n² + 3n + 2mn`.
pub fn truncated_cost(m: usize, n: usize) -> Result<CostEstimate> {
    check_domain(m, n, 1)?;
    let (m, n) = (m as f64, n as f64);
    let flops = 2.0 * m * n * n + n * n * n + n + m * n;
    let space = 3.0 * n * n + 3.0 * n + 2.0 * m * n;
    Ok(CostEstimate::new(flops, space))
}

/// Krylov closed form at `l = n/2, i = 1`:
/// time `n²/2 + 5/2·mn² + 4(m²n² + 2mn² + n⁴ − 2/3·n³)`, space `9/2·mn + 9/2·n²`.
pub fn krylov_cost_half_width(m: usize, n: usize) -> Result<CostEstimate> {
    check_domain(m, n, 1)?;
    let (m, n) = (m as f64, n as f64);
    let flops = n * n / 2.0
        + 2.5 * m * n * n
        + 4.0 * (m * m * n * n + 2.0 * m * n * n + n.powi(4) - 2.0 / 3.0 * n.powi(3));
    let space = 4.5 * m * n + 4.5 * n * n;
    Ok(CostEstimate::new(flops, space))
}

/// Randomized closed form at `l = n/2, i = 1`:
/// time `n²/2 + 11/4·mn² + n³/6`, space `9/2·mn + 3n²`.
pub fn randomized_cost_half_width(m: usize, n: usize) -> Result<CostEstimate> {
    check_domain(m, n, 1)?;
    let (m, n) = (m as f64, n as f64);
    let flops = n * n / 2.0 + 2.75 * m * n * n + n.powi(3) / 6.0;
    let space = 4.5 * m * n + 3.0 * n * n;
    Ok(CostEstimate::new(flops, space))
}

/// General estimate for `method` using the sketch parameters in `params`.
pub fn cost_for(method: Method, m: usize, n: usize, params: &MethodParams) -> Result<CostEstimate> {
    match method {
        Method::Truncated => truncated_cost(m, n),
        Method::Randomized => randomized_cost(m, n, params.sketch_width, params.iterations),
        Method::Krylov => krylov_cost(m, n, params.sketch_width, params.iterations),
    }
}

/// Closed-form estimate for `method` at `l = n/2, i = 1`.
pub fn half_width_cost_for(method: Method, m: usize, n: usize) -> Result<CostEstimate> {
    match method {
        Method::Truncated => truncated_cost(m, n),
        Method::Randomized => randomized_cost_half_width(m, n),
        Method::Krylov => krylov_cost_half_width(m, n),
    }
}
