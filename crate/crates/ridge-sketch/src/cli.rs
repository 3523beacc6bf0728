//! The `ridge-sketch` command line.
//!
//! Exit codes: `0` on success, `1` when a run fails (a JSON error record is
//! written to stderr), `2` on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ridge_sketch_core::{
    generate_problem, EmbeddingKind, EmbeddingSpec, GeneratorSpec, LCurve, LsqrConfig, Method,
    ProblemInstance, SdSource, SketchChoice, Spectrum, SweepRequest,
};
use serde_json::json;

use crate::bench::{run_bench, BenchConfig};
use crate::grid::parse_grid;
use crate::io::{read_problem, write_problem, IoError};
use crate::report::{write_csv, ReportOptions, SweepReport};
use crate::runner::{run_parallel, RunError};

/// Overrides every seed given on the command line.
pub const SEED_ENV: &str = "RIDGE_SKETCH_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ridge-sketch",
    version,
    about = "Sketch-preconditioned LSQR for ridge regression over many λ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic problem b = A x + η with a log-spaced spectrum.
    Generate(GenerateArgs),
    /// Solve for every λ in a grid and write a report.
    Sweep(SweepArgs),
    /// Emit L-curve points and the detected corner.
    Lcurve(LcurveArgs),
    /// Compare marginal per-λ cost of several methods.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    sigma_min: f64,
    /// Norm of the additive noise η.
    #[arg(long, default_value_t = 1e-3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    /// Matrix output path; `.b` and `.meta.json` files are written beside it.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Chol,
    Lowrank,
    #[value(alias = "qr_baseline")]
    QrBaseline,
    Unpreconditioned,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Chol => Method::Cholesky,
            MethodArg::Lowrank => Method::LowRank,
            MethodArg::QrBaseline => Method::QrBaseline,
            MethodArg::Unpreconditioned => Method::Unpreconditioned,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Gaussian,
    Srtt,
    Sparse,
}

impl From<KindArg> for EmbeddingKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gaussian => EmbeddingKind::Gaussian,
            KindArg::Srtt => EmbeddingKind::Srtt,
            KindArg::Sparse => EmbeddingKind::Sparse,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Matrix file (RSKM, or Matrix Market with a `.mtx` extension).
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Right-hand side file; defaults to the matrix path with extension `.b`.
    #[arg(long)]
    rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "chol")]
    method: MethodArg,
    /// λ grid: `a:b:Klog`, `a:b:Klin` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    lambdas: String,
    /// Oversampling factor α ≥ 1.
    #[arg(long, visible_alias = "oversampling", default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    embedding: KindArg,
    /// Fixed sketch size; chosen from α and the problem shape when absent.
    #[arg(long)]
    sketch_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Guess of the statistical dimension at the smallest λ (low-rank only).
    #[arg(long)]
    sd_guess: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Worker threads for the per-λ solves; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record the LSQR residual history of every solve.
    #[arg(long)]
    history: bool,
    /// Include solution vectors in the JSON report.
    #[arg(long)]
    include_solutions: bool,
}

#[derive(Debug, Args)]
struct LcurveArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// CSV output (lambda, log10 residual, log10 norm); stdout when absent.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Problem to benchmark; a synthetic one is generated when absent.
    #[arg(short = 'i', long = "input")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 12000)]
    m: usize,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1e-6)]
    sigma_min: f64,
    #[arg(long, value_delimiter = ',', default_value = "chol,qr-baseline")]
    methods: Vec<MethodArg>,
    /// Sketch size is `α·min(m, n)`.
    #[arg(long, visible_alias = "alpha", default_value_t = 20.0)]
    oversampling: f64,
    #[arg(long, value_enum, default_value = "srtt")]
    embedding: KindArg,
    #[arg(long, allow_hyphen_values = true, default_value = "10:1e-10:15log")]
    lambdas: String,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Solver(#[from] ridge_sketch_core::Error),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Io(_) | Self::Write { .. } => "io",
            Self::Run(RunError::Pool(_)) => "threads",
            Self::Run(RunError::Solver(e)) | Self::Solver(e) => solver_kind(e),
        }
    }

    fn record(&self) -> serde_json::Value {
        let mut v = json!({ "error": { "kind": self.kind(), "message": self.to_string() } });
        if let Self::Run(RunError::Solver(ridge_sketch_core::Error::AtLambda {
            index, lambda, ..
        })) = self
        {
            v["error"]["lambda_index"] = json!(index);
            v["error"]["lambda"] = json!(lambda);
        }
        v
    }
}

fn solver_kind(e: &ridge_sketch_core::Error) -> &'static str {
    use ridge_sketch_core::Error as E;
    match e {
        E::AtLambda { source, .. } => solver_kind(source),
        E::IllConditioned { .. } | E::SingularPreconditioner { .. } => "ill_conditioned",
        E::InvalidSketch { .. } | E::InvalidTruncation { .. } => "invalid_sketch",
        _ => "numerical",
    }
}

fn seed_override(seed: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(seed),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(io::Error::from)
        .and_then(|_| w.flush())
        .map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let g = &args.gen;
    let spec = GeneratorSpec {
        m: g.m,
        n: g.n,
        spectrum: Spectrum::ExpDecay {
            max: g.sigma_max,
            min: g.sigma_min,
        },
        noise_norm: g.noise,
        seed: seed_override(g.seed)?,
    };
    let generated = generate_problem(&spec)?;
    let paths = write_problem(&args.output, &generated)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

struct Prepared {
    problem: ProblemInstance,
    lambdas: Vec<f64>,
    method: Method,
    sketch: SketchChoice,
    alpha: f64,
    solver: LsqrConfig,
    sd: SdSource,
    threads: Option<usize>,
}

fn prepare(args: &SolveArgs, history: bool) -> Result<Prepared, CliError> {
    let lambdas = parse_grid(&args.lambdas).map_err(|e| CliError::Usage(e.to_string()))?;
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let problem = read_problem(&args.input, args.rhs.as_deref())?;
    let seed = seed_override(args.seed)?;
    let kind = args.embedding.into();
    let sketch = match args.sketch_size {
        Some(s) => SketchChoice::Fixed(EmbeddingSpec::new(kind, s, seed)),
        None => SketchChoice::Auto { kind, seed },
    };
    Ok(Prepared {
        problem,
        lambdas,
        method: args.method.into(),
        sketch,
        alpha: args.alpha,
        solver: LsqrConfig {
            rel_tolerance: args.tol,
            max_iterations: args.max_iter,
            record_history: history,
        },
        sd: SdSource::Auto {
            guess: args.sd_guess,
        },
        threads: args.threads,
    })
}

impl Prepared {
    fn request(&self) -> SweepRequest<'_> {
        SweepRequest {
            problem: &self.problem,
            lambdas: self.lambdas.clone(),
            method: self.method,
            sketch: self.sketch,
            oversampling: self.alpha,
            solver: self.solver,
            sd: self.sd.clone(),
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let p = prepare(&args.solve, args.history)?;
    let result = run_parallel(&p.request(), p.threads)?;
    let report = SweepReport::from_result(
        &result,
        (p.problem.rows(), p.problem.cols()),
        &ReportOptions {
            oversampling: p.alpha,
            tolerance: p.solver.rel_tolerance,
            include_solutions: args.include_solutions,
        },
    );
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    let csv_err = |path: &Path, e: csv::Error| CliError::Write {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    };
    match &args.csv {
        Some(path) => write_csv(create(path)?, &report).map_err(|e| csv_err(path, e))?,
        None if args.report.is_none() => {
            write_csv(io::stdout().lock(), &report).map_err(|e| csv_err(Path::new("-"), e))?
        }
        None => {}
    }
    Ok(())
}

fn write_lcurve<W: Write>(w: W, curve: &LCurve) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "log10_residual", "log10_solution_norm", "corner"])?;
    for (i, p) in curve.points.iter().enumerate() {
        out.write_record([
            p.lambda.to_string(),
            p.log_residual.to_string(),
            p.log_solution_norm.to_string(),
            u8::from(curve.corner == Some(i)).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_lcurve(args: LcurveArgs) -> Result<(), CliError> {
    let p = prepare(&args.solve, false)?;
    let result = run_parallel(&p.request(), p.threads)?;
    let curve = ridge_sketch_core::lcurve(&result);
    let path = args.output.clone().unwrap_or_else(|| PathBuf::from("-"));
    let res = match &args.output {
        Some(out) => write_lcurve(create(out)?, &curve),
        None => write_lcurve(io::stdout().lock(), &curve),
    };
    res.map_err(|e| CliError::Write {
        path,
        source: io::Error::other(e),
    })?;
    match curve.corner_point() {
        Some(c) => eprintln!("corner: lambda = {:e}", c.lambda),
        None => eprintln!("corner: undefined (fewer than 3 usable points)"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let lambdas = parse_grid(&args.lambdas).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = seed_override(args.seed)?;
    let problem = match &args.input {
        Some(path) => read_problem(path, None)?,
        None => {
            generate_problem(&GeneratorSpec {
                m: args.m,
                n: args.n,
                spectrum: Spectrum::ExpDecay {
                    max: 1.0,
                    min: args.sigma_min,
                },
                noise_norm: 1e-3,
                seed,
            })?
            .problem
        }
    };
    let cfg = BenchConfig {
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        lambdas,
        runs: args.runs,
        kind: args.embedding.into(),
        oversampling: args.oversampling,
        seed,
        solver: LsqrConfig::with_tolerance(args.tol),
    };
    let report = run_bench(&problem, &cfg)?;
    for t in &report.methods {
        println!(
            "{:<18} s={:<8} median per-λ {:.6} s  (runs: {})",
            t.method.name(),
            t.sketch_size.map_or("-".to_string(), |s| s.to_string()),
            t.median_per_lambda_s,
            t.per_lambda_s
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lcurve(a) => cmd_lcurve(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("{}", e.record());
            1
        }
    }
}
