use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use svd_compare::bench::{run_grid_with_progress, write_csv, BenchConfig};
use svd_compare::cost::{cost_for, half_width_cost_for};
use svd_compare::io::{
    image_from_row, images_to_matrix, read_idx_images, read_matrix_csv, save_matrix_csv,
    save_vector_csv, write_pgm, DataError,
};
use svd_compare::pca::{Orientation, PcaModel, Selection};
use svd_compare::svd::svd_any_shape;
use svd_compare::{LinalgError, Method, MethodParams, RngSeed};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Compare Gram-matrix, randomized and block Krylov SVD.
#[derive(Debug, Parser)]
#[command(name = "svdcmp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Time every method on a grid of Gaussian matrices and write a CSV report.
    Bench(BenchArgs),
    /// Factor a CSV matrix and write U, the singular values and V.
    Svd(SvdArgs),
    /// Fit PCA to an image set and pick the component count for a variance threshold.
    Pca(PcaArgs),
    /// Rebuild one image from its first k principal components.
    Reconstruct(ReconstructArgs),
    /// Print modeled FLOP and storage costs for all three methods.
    Cost(CostArgs),
}

#[derive(Debug, Args)]
struct SketchArgs {
    /// Sketch width as a fraction of the column count.
    #[arg(long, default_value_t = 0.5)]
    l_fraction: f64,
    /// Power steps (randomized) or extra Krylov blocks.
    #[arg(long, default_value_t = 1)]
    iters: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SketchArgs {
    fn params(&self, n: usize) -> Result<MethodParams> {
        check_fraction(self.l_fraction)?;
        Ok(MethodParams::with_fraction(n, self.l_fraction)
            .iterations(self.iters)
            .seed(RngSeed(self.seed)))
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    rows: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    cols: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "truncated,randomized,krylov")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    l_fraction: f64,
    #[arg(long, default_value_t = 1)]
    iters: usize,
}

#[derive(Debug, Args)]
struct SvdArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "truncated")]
    method: Method,
    #[arg(long)]
    out_u: PathBuf,
    #[arg(long)]
    out_s: PathBuf,
    #[arg(long)]
    out_v: PathBuf,
    #[command(flatten)]
    sketch: SketchArgs,
}

#[derive(Debug, Args)]
struct PcaArgs {
    /// IDX image file, or a `.csv` matrix with one example per row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, value_parser = parse_method, default_value = "truncated")]
    method: Method,
    /// Per-component eigenvalue and explained variance table.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Treat the input as already centered.
    #[arg(long)]
    no_center: bool,
    #[command(flatten)]
    sketch: SketchArgs,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_parser = parse_method, default_value = "truncated")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out_original: Option<PathBuf>,
    /// Sketch width for the randomized and Krylov methods (defaults to k).
    #[arg(long)]
    sketch_width: Option<usize>,
    #[arg(long, default_value_t = 1)]
    iters: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    no_center: bool,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 0.5)]
    l_fraction: f64,
    #[arg(long, default_value_t = 1)]
    iters: usize,
}

/// Bad flag values found after parsing.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: LinalgError| e.to_string())
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--l-fraction {f} must lie in (0, 1]")))
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<DataError>() {
            return match e {
                DataError::Matrix(inner) => linalg_code(inner),
                _ => EXIT_DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<LinalgError>() {
            return linalg_code(e);
        }
        if cause.is::<std::io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_NUMERICAL
}

fn linalg_code(e: &LinalgError) -> u8 {
    match e {
        LinalgError::InvalidParameter(_) => EXIT_USAGE,
        LinalgError::NonFinite { .. } | LinalgError::InvalidShape { .. } => EXIT_DATA,
        _ => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Svd(args) => svd(args),
        Command::Pca(args) => pca(args),
        Command::Reconstruct(args) => reconstruct(args),
        Command::Cost(args) => cost(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    check_fraction(args.l_fraction)?;
    let cfg = BenchConfig {
        row_sizes: args.rows,
        col_sizes: args.cols,
        methods: args.methods,
        repeats: args.repeats,
        seed: RngSeed(args.seed),
        l_fraction: args.l_fraction,
        iterations: args.iters,
        ..BenchConfig::default()
    };
    let outcome = run_grid_with_progress(&cfg, |r| {
        eprintln!(
            "{:>10} {:>6} x {:<5} mean {:.4}s  delta {:.3e}",
            r.method.name(),
            r.m,
            r.n,
            r.mean_seconds,
            r.delta
        );
    })?;
    for skip in &outcome.skipped {
        let method = skip.method.map_or("all methods", Method::name);
        eprintln!(
            "skipped {} x {} ({method}): {}",
            skip.m, skip.n, skip.reason
        );
    }
    let file =
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut out = BufWriter::new(file);
    write_csv(&outcome.records, &mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} records to {}",
        outcome.records.len(),
        args.out.display()
    );
    Ok(())
}

fn svd(args: SvdArgs) -> Result<()> {
    let a = read_matrix_csv(&args.input)?;
    let params = args.sketch.params(a.rows().min(a.cols()))?;
    let s = svd_any_shape(&a, args.method, &params)?;
    save_matrix_csv(&s.u, &args.out_u)?;
    save_vector_csv(&s.sigma, &args.out_s)?;
    save_matrix_csv(&s.v, &args.out_v)?;
    println!(
        "rank {} of {}x{} ({})",
        s.rank(),
        a.rows(),
        a.cols(),
        args.method
    );
    Ok(())
}

fn load_examples(path: &Path) -> Result<svd_compare::DenseMatrix> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(read_matrix_csv(path)?)
    } else {
        Ok(images_to_matrix(&read_idx_images(path)?))
    }
}

fn pca(args: PcaArgs) -> Result<()> {
    let a = load_examples(&args.input)?;
    let params = args.sketch.params(a.rows().min(a.cols()))?;
    let model = PcaModel::fit(
        &a,
        Orientation::RowsAreExamples,
        args.method,
        &params,
        !args.no_center,
    )?;

    if let Some(path) = &args.report {
        write_report(&model, path)?;
    }
    match model.select(args.threshold)? {
        Selection::Components { k, ratio } => {
            println!("K = {k}");
            println!("cumulative explained variance = {ratio}");
            Ok(())
        }
        Selection::InsufficientSpectrum { captured } => Err(anyhow::anyhow!(
            "the {} computed components explain only {captured} of the variance, below {}",
            model.eigenvalues.len(),
            args.threshold
        )),
    }
}

fn write_report(model: &PcaModel, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "component,eigenvalue,ratio,cumulative_ratio")?;
    let mut cumulative = 0.0;
    for (i, (l, r)) in model
        .eigenvalues
        .iter()
        .zip(model.explained_ratios())
        .enumerate()
    {
        cumulative += r;
        writeln!(out, "{},{l},{r},{cumulative}", i + 1)?;
    }
    out.flush()
        .with_context(|| format!("writing {}", path.display()))
}

fn reconstruct(args: ReconstructArgs) -> Result<()> {
    let set = read_idx_images(&args.input)?;
    if args.index >= set.count {
        return Err(usage(format!(
            "--index {} out of range for {} images",
            args.index, set.count
        )));
    }
    let a = images_to_matrix(&set);
    let features = a.cols();
    if args.k == 0 || args.k > features.min(a.rows()) {
        return Err(usage(format!(
            "--k {} must lie in [1, {}]",
            args.k,
            features.min(a.rows())
        )));
    }
    let params = MethodParams {
        sketch_width: args.sketch_width.unwrap_or(args.k),
        iterations: args.iters,
        seed: RngSeed(args.seed),
    };
    let model = PcaModel::fit(
        &a,
        Orientation::RowsAreExamples,
        args.method,
        &params,
        !args.no_center,
    )?;
    let k = args.k.min(model.eigenvalues.len());
    if k < args.k {
        eprintln!("only {k} components available, using all of them");
    }
    let model = model.truncated(k)?;
    let rebuilt = model.reconstruct_example(&a, args.index)?;
    write_pgm(&image_from_row(&rebuilt, set.height, set.width)?, &args.out)?;
    if let Some(path) = &args.out_original {
        write_pgm(
            &image_from_row(&a.row(args.index), set.height, set.width)?,
            path,
        )?;
    }
    println!(
        "image {} rebuilt from {k} of {features} components ({:.4} of variance)",
        args.index,
        model.explained_ratios().iter().sum::<f64>()
    );
    Ok(())
}

fn cost(args: CostArgs) -> Result<()> {
    check_fraction(args.l_fraction)?;
    let (m, n) = (args.rows, args.cols);
    let params = MethodParams::with_fraction(n, args.l_fraction).iterations(args.iters);
    println!(
        "m = {m}, n = {n}, l = {}, i = {}",
        params.sketch_width, params.iterations
    );
    println!(
        "{:<11} {:<11} {:>24} {:>20} {:>20}",
        "method", "form", "flops", "space_entries", "space_bytes"
    );
    for method in Method::ALL {
        let rows = [
            ("general", cost_for(method, m, n, &params)),
            ("half-width", half_width_cost_for(method, m, n)),
        ];
        for (form, estimate) in rows {
            match estimate {
                Ok(c) => println!(
                    "{:<11} {:<11} {:>24} {:>20} {:>20}",
                    method.name(),
                    form,
                    c.flops,
                    c.space_entries,
                    c.space_bytes
                ),
                Err(LinalgError::InvalidParameter(reason)) if form == "general" => {
                    println!("{:<11} {:<11} n/a ({reason})", method.name(), form)
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    println!("half-width rows use the closed forms at l = n/2, i = 1");
    Ok(())
}
