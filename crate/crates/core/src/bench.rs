//! Timing harness over a grid of Gaussian test matrices.

use std::io::{self, Write};
use std::time::Instant;

use crate::cost::cost_for;
use crate::error::{LinalgError, Result};
use crate::pca::residual_delta;
use crate::random::{gaussian_matrix, RngSeed};
use crate::svd::{decompose, Method, MethodParams};

/// Row sizes of the reference experiment grid.
pub const PAPER_ROWS: [usize; 5] = [2000, 4000, 6000, 8000, 10000];
/// Column sizes of the reference experiment grid, as printed (700 is absent).
pub const PAPER_COLS: [usize; 12] = [
    100, 200, 300, 400, 500, 600, 800, 900, 1000, 1200, 1500, 2000,
];

pub const CSV_HEADER: &str =
    "method,m,n,repeats,mean_seconds,std_seconds,delta,model_flops,model_space_bytes";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub row_sizes: Vec<usize>,
    pub col_sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub repeats: usize,
    pub seed: RngSeed,
    /// `l = ⌈l_fraction · n⌉`.
    pub l_fraction: f64,
    pub iterations: usize,
    /// Cells whose input matrix would exceed this many bytes are skipped.
    pub memory_cap_bytes: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            row_sizes: PAPER_ROWS.to_vec(),
            col_sizes: PAPER_COLS.to_vec(),
            methods: Method::ALL.to_vec(),
            repeats: 10,
            seed: RngSeed(42),
            l_fraction: 0.5,
            iterations: 1,
            memory_cap_bytes: 2 << 30,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.row_sizes.is_empty() || self.col_sizes.is_empty() || self.methods.is_empty() {
            return Err(LinalgError::InvalidParameter(
                "benchmark grid is empty".into(),
            ));
        }
        if self.row_sizes.contains(&0) || self.col_sizes.contains(&0) {
            return Err(LinalgError::InvalidParameter(
                "grid sizes must be positive".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(LinalgError::InvalidParameter(
                "repeats must be at least 1".into(),
            ));
        }
        if !(self.l_fraction > 0.0 && self.l_fraction <= 1.0) {
            return Err(LinalgError::InvalidParameter(format!(
                "l fraction {} must lie in (0, 1]",
                self.l_fraction
            )));
        }
        Ok(())
    }

    /// Sketch parameters for an `m x n` cell at trial `trial`.
    pub fn params_for(&self, m: usize, n: usize, trial: usize) -> MethodParams {
        MethodParams::with_fraction(n, self.l_fraction)
            .iterations(self.iterations)
            .seed(self.trial_seed(m, n, trial).derive(1))
    }

    /// Seed of the input matrix for one trial of one cell.
    pub fn trial_seed(&self, m: usize, n: usize, trial: usize) -> RngSeed {
        self.seed
            .derive(m as u64)
            .derive(n as u64)
            .derive(trial as u64)
    }

    fn sorted_cells(&self) -> Vec<(usize, usize)> {
        let mut rows = self.row_sizes.clone();
        let mut cols = self.col_sizes.clone();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        rows.iter()
            .flat_map(|&m| cols.iter().map(move |&n| (m, n)))
            .collect()
    }

    fn sorted_methods(&self) -> Vec<Method> {
        let mut methods = self.methods.clone();
        methods.sort_by_key(|m| m.name());
        methods.dedup();
        methods
    }
}

/// One `(method, m, n)` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub repeats: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    /// Relative Frobenius residual of the first trial's factorization.
    pub delta: f64,
    pub model_flops: f64,
    pub model_space_bytes: f64,
}

impl BenchRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.method.name(),
            self.m,
            self.n,
            self.repeats,
            self.mean_seconds,
            self.std_seconds,
            self.delta,
            self.model_flops,
            self.model_space_bytes
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub method: Option<Method>,
    pub m: usize,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutcome {
    /// Ordered by `m`, then `n`, then method name.
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedCell>,
}

pub fn run_grid(cfg: &BenchConfig) -> Result<BenchOutcome> {
    run_grid_with_progress(cfg, |_| {})
}

/// Runs every cell sequentially, calling `progress` after each finished record.
pub fn run_grid_with_progress(
    cfg: &BenchConfig,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<BenchOutcome> {
    cfg.validate()?;
    let methods = cfg.sorted_methods();
    let mut outcome = BenchOutcome::default();

    for (m, n) in cfg.sorted_cells() {
        if m < n {
            outcome.skipped.push(SkippedCell {
                method: None,
                m,
                n,
                reason: "rows < cols".into(),
            });
            continue;
        }
        let bytes = (m as u64).saturating_mul(n as u64).saturating_mul(8);
        if bytes > cfg.memory_cap_bytes {
            outcome.skipped.push(SkippedCell {
                method: None,
                m,
                n,
                reason: format!("input needs {bytes} bytes, cap is {}", cfg.memory_cap_bytes),
            });
            continue;
        }

        let probe = cfg.params_for(m, n, 0);
        let mut active: Vec<Method> = Vec::new();
        for &method in &methods {
            if method == Method::Krylov
                && (cfg.iterations == 0 || (cfg.iterations + 1) * probe.sketch_width > m)
            {
                outcome.skipped.push(SkippedCell {
                    method: Some(method),
                    m,
                    n,
                    reason: "block width (i+1)*l exceeds m or i = 0".into(),
                });
                continue;
            }
            active.push(method);
        }

        let mut timings: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.repeats); active.len()];
        let mut deltas = vec![0.0; active.len()];
        let mut failed: Vec<Option<String>> = vec![None; active.len()];
        for trial in 0..cfg.repeats {
            let a = gaussian_matrix(m, n, cfg.trial_seed(m, n, trial));
            let params = cfg.params_for(m, n, trial);
            for (slot, &method) in active.iter().enumerate() {
                if failed[slot].is_some() {
                    continue;
                }
                let start = Instant::now();
                let result = decompose(&a, method, &params);
                let elapsed = start.elapsed().as_secs_f64();
                match result {
                    Ok(svd) => {
                        timings[slot].push(elapsed);
                        if trial == 0 {
                            deltas[slot] = residual_delta(&a, &svd)?;
                        }
                    }
                    Err(e) => failed[slot] = Some(e.to_string()),
                }
            }
        }

        for (slot, &method) in active.iter().enumerate() {
            if let Some(reason) = failed[slot].take() {
                outcome.skipped.push(SkippedCell {
                    method: Some(method),
                    m,
                    n,
                    reason,
                });
                continue;
            }
            let (mean, std) = mean_std(&timings[slot]);
            let cost = cost_for(method, m, n, &probe)?;
            let record = BenchRecord {
                method,
                m,
                n,
                repeats: cfg.repeats,
                mean_seconds: mean,
                std_seconds: std,
                delta: deltas[slot],
                model_flops: cost.flops,
                model_space_bytes: cost.space_bytes,
            };
            progress(&record);
            outcome.records.push(record);
        }
    }
    Ok(outcome)
}

/// Mean and sample standard deviation (0 for a single sample).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes the header and one line per record, LF terminated.
pub fn write_csv<W: Write>(records: &[BenchRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()
}

/// Method rankings for one grid cell, fastest or cheapest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOrdering {
    pub m: usize,
    pub n: usize,
    pub by_seconds: Vec<Method>,
    pub by_model_flops: Vec<Method>,
    pub by_model_space: Vec<Method>,
}

impl CellOrdering {
    pub fn measured_matches_model(&self) -> bool {
        self.by_seconds == self.by_model_flops
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub cells: Vec<CellOrdering>,
    /// Fraction of cells whose measured ranking equals the modeled FLOP ranking.
    pub agreement: f64,
}

impl OrderingReport {
    pub fn fraction_measured(&self, expected: &[Method]) -> f64 {
        self.fraction(|c| c.by_seconds == expected)
    }

    pub fn fraction_model_flops(&self, expected: &[Method]) -> f64 {
        self.fraction(|c| c.by_model_flops == expected)
    }

    pub fn fraction_model_space(&self, expected: &[Method]) -> f64 {
        self.fraction(|c| c.by_model_space == expected)
    }

    fn fraction(&self, pred: impl Fn(&CellOrdering) -> bool) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|c| pred(c)).count() as f64 / self.cells.len() as f64
    }
}

/// Ranks methods per `(m, n)` cell by measured time and by the cost models.
pub fn summarize_ordering(records: &[BenchRecord]) -> OrderingReport {
    let mut keys: Vec<(usize, usize)> = records.iter().map(|r| (r.m, r.n)).collect();
    keys.sort_unstable();
    keys.dedup();

    let cells: Vec<CellOrdering> = keys
        .into_iter()
        .map(|(m, n)| {
            let cell: Vec<&BenchRecord> = records.iter().filter(|r| r.m == m && r.n == n).collect();
            let rank = |key: &dyn Fn(&BenchRecord) -> f64| {
                let mut sorted = cell.clone();
                sorted.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.method.cmp(&b.method)));
                sorted.iter().map(|r| r.method).collect::<Vec<_>>()
            };
            CellOrdering {
                m,
                n,
                by_seconds: rank(&|r| r.mean_seconds),
                by_model_flops: rank(&|r| r.model_flops),
                by_model_space: rank(&|r| r.model_space_bytes),
            }
        })
        .collect();

    let agreement = if cells.is_empty() {
        1.0
    } else {
        cells.iter().filter(|c| c.measured_matches_model()).count() as f64 / cells.len() as f64
    };
    OrderingReport { cells, agreement }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: Method, m: usize, n: usize, secs: f64, flops: f64) -> BenchRecord {
        BenchRecord {
            method,
            m,
            n,
            repeats: 1,
            mean_seconds: secs,
            std_seconds: 0.0,
            delta: 0.0,
            model_flops: flops,
            model_space_bytes: flops,
        }
    }

    #[test]
    fn reference_grid_has_sixty_cells() {
        let cfg = BenchConfig::default();
        assert_eq!(cfg.sorted_cells().len(), 60);
        assert!(cfg.sorted_cells().iter().all(|&(m, n)| m >= n));
        assert_eq!(cfg.repeats, 10);
    }

    #[test]
    fn validation() {
        let bad = BenchConfig {
            repeats: 0,
            ..BenchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = BenchConfig {
            l_fraction: 0.0,
            ..BenchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = BenchConfig {
            col_sizes: vec![],
            ..BenchConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn memory_cap_skips_instead_of_failing() {
        let cfg = BenchConfig {
            row_sizes: vec![40, 100],
            col_sizes: vec![10],
            methods: vec![Method::Truncated],
            repeats: 1,
            memory_cap_bytes: 40 * 10 * 8,
            ..BenchConfig::default()
        };
        let out = run_grid(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!((out.skipped[0].m, out.skipped[0].n), (100, 10));
    }

    #[test]
    fn wide_cells_are_skipped() {
        let cfg = BenchConfig {
            row_sizes: vec![8],
            col_sizes: vec![4, 16],
            methods: vec![Method::Truncated],
            repeats: 1,
            ..BenchConfig::default()
        };
        let out = run_grid(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.skipped[0].reason, "rows < cols");
    }

    #[test]
    fn single_method_ordering_is_trivial() {
        let report = summarize_ordering(&[record(Method::Truncated, 10, 5, 1.0, 1.0)]);
        assert_eq!(report.agreement, 1.0);
        assert_eq!(report.cells[0].by_seconds, vec![Method::Truncated]);
    }

    #[test]
    fn ordering_agreement_counts_cells() {
        let records = vec![
            record(Method::Krylov, 10, 5, 3.0, 30.0),
            record(Method::Randomized, 10, 5, 2.0, 20.0),
            record(Method::Truncated, 10, 5, 1.0, 10.0),
            record(Method::Krylov, 20, 5, 1.0, 30.0),
            record(Method::Randomized, 20, 5, 2.0, 20.0),
            record(Method::Truncated, 20, 5, 3.0, 10.0),
        ];
        let report = summarize_ordering(&records);
        assert_eq!(report.cells.len(), 2);
        assert_eq!(report.agreement, 0.5);
        let expected = [Method::Truncated, Method::Randomized, Method::Krylov];
        assert_eq!(report.fraction_model_flops(&expected), 1.0);
        assert_eq!(report.fraction_measured(&expected), 0.5);
    }

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        let r = BenchRecord {
            delta: 0.125,
            model_flops: 22010.0,
            model_space_bytes: 18640.0,
            ..record(Method::Truncated, 100, 10, 0.5, 0.0)
        };
        write_csv(&[r], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "method,m,n,repeats,mean_seconds,std_seconds,delta,model_flops,model_space_bytes\n\
             truncated,100,10,1,0.5,0,0.125,22010,18640\n"
        );
    }

    #[test]
    fn mean_and_sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
