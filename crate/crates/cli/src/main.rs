//! `qdcart`: quantile dyadic CART denoising from the command line.
//!
//! Exit status is 0 on success, 1 on internal errors, 2 on usage or parse
//! errors and 3 when `gamma` exceeds the number of cells. `QDCART_THREADS`
//! caps the worker pool.

mod config;
mod table;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdcart::harness::{run_benchmark, BenchSpec, BENCH_HEADER, SURFACE_HEADER};
use qdcart::tuning::{bic_sigma, default_gamma, default_grid};
use qdcart::{
    fit, generate, grid_1d, grid_2d, select_lambda, DfMode, Error, LambdaGrid, LatticeShape, Method, QuantileLevel,
    Scenario, SolverConfig,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } => 3,
            Error::Internal(_) => 1,
            Error::Usage(_) | Error::Data(_) | Error::Config(_) | Error::Unsupported(_) => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qdcart", version, about = "Quantile dyadic CART denoising on lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one penalty (or the BIC choice) and write the fitted values.
    Denoise(DenoiseArgs),
    /// Write one replicate of a benchmark scenario.
    Simulate(SimulateArgs),
    /// Oracle-MSE Monte-Carlo benchmark.
    Benchmark(BenchmarkArgs),
    /// BIC table over a penalty grid; writes the selected fit.
    Tune(TuneArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Quantile level in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Minimum cells per rectangle (default: 8 on a line, ceil(log2 N) otherwise).
    #[arg(long)]
    gamma: Option<usize>,
    #[arg(long, default_value = "qdcart")]
    method: Method,
    /// Lattice shape as d:n1[,n2...]; inferred from the CSV layout when absent.
    #[arg(long)]
    shape: Option<String>,
}

#[derive(Args)]
struct DenoiseArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, required_unless_present = "bic", conflicts_with = "bic")]
    lambda: Option<f64>,
    /// Choose the penalty by BIC over the default grid.
    #[arg(long)]
    bic: bool,
    /// Degrees of freedom for --bic (default: jump on a line, leaf otherwise).
    #[arg(long, value_enum)]
    df: Option<DfArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes <OUTPUT>_y.csv and <OUTPUT>_theta.csv.
    output: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// CSV destination for the result rows.
    output: PathBuf,
    /// key=value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated scenario ids.
    #[arg(long)]
    scenarios: Option<String>,
    /// Comma-separated side lengths.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated methods.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated penalties for --grid custom.
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long)]
    gamma: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the per-penalty surface to <OUTPUT stem>_surface.csv.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct TuneArgs {
    input: PathBuf,
    /// Destination of the selected fit.
    output: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    /// Penalty grid (default: 1d on a line, 2d otherwise).
    #[arg(long, value_enum)]
    grid: Option<GridArg>,
    /// Comma-separated penalties for --grid custom.
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long, value_enum)]
    df: Option<DfArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum DfArg {
    Jump,
    Leaf,
}

impl DfArg {
    fn mode(self) -> DfMode {
        match self {
            DfArg::Jump => DfMode::JumpCount,
            DfArg::Leaf => DfMode::LeafCount,
        }
    }
}

fn default_df(shape: &LatticeShape) -> DfMode {
    if shape.ndim() == 1 {
        DfMode::JumpCount
    } else {
        DfMode::LeafCount
    }
}

fn load(input: &Path, shape: Option<&str>) -> CliResult<(LatticeShape, Vec<f64>)> {
    let shape = shape.map(table::parse_shape).transpose()?;
    table::to_lattice(&table::read(input)?, shape)
}

fn solver_config(args: &FitArgs, shape: &LatticeShape, lambda: f64) -> CliResult<SolverConfig> {
    let tau = QuantileLevel::new(args.tau)?;
    let gamma = args.gamma.unwrap_or_else(|| default_gamma(shape));
    let cfg = SolverConfig::new(args.method, tau, lambda, gamma)?;
    cfg.check_shape(shape)?;
    Ok(cfg)
}

fn build_grid(kind: Option<GridArg>, lambdas: Option<&str>, shape: &LatticeShape) -> CliResult<LambdaGrid> {
    match (kind, lambdas) {
        (Some(GridArg::Custom), Some(list)) | (None, Some(list)) => {
            Ok(LambdaGrid::custom(config::list("lambdas", list)?)?)
        }
        (Some(GridArg::Custom), None) => Err(CliError::usage("--grid custom needs --lambdas")),
        (Some(_), Some(_)) => Err(CliError::usage("--lambdas only applies to --grid custom")),
        (Some(GridArg::OneD), None) => Ok(grid_1d()),
        (Some(GridArg::TwoD), None) => Ok(grid_2d()),
        (None, None) => Ok(default_grid(shape)),
    }
}

fn denoise(args: &DenoiseArgs) -> CliResult {
    let (shape, y) = load(&args.input, args.fit.shape.as_deref())?;
    if let Some(lambda) = args.lambda {
        let cfg = solver_config(&args.fit, &shape, lambda)?;
        let result = fit(&shape, &y, &cfg)?;
        table::write(&args.output, &shape, &result.theta_hat)?;
        println!("objective={}", result.objective);
        println!("leaves={}", result.leaf_count());
    } else {
        let grid = default_grid(&shape);
        let cfg = solver_config(&args.fit, &shape, grid.values()[0])?;
        let df = args.df.map_or_else(|| default_df(&shape), DfArg::mode);
        let sel = select_lambda(&shape, &y, &cfg, &grid, df)?;
        table::write(&args.output, &shape, &sel.fit.theta_hat)?;
        println!("objective={}", sel.fit.objective);
        println!("leaves={}", sel.fit.leaf_count());
        println!("lambda={}", sel.lambda);
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> CliResult {
    let scenario = Scenario::new(args.scenario, args.n)?;
    let data = generate(&scenario, args.seed);
    let shape = scenario.shape();
    table::write(&suffixed(&args.output, "_y", "csv"), &shape, &data.y)?;
    table::write(&suffixed(&args.output, "_theta", "csv"), &shape, &data.theta_star)?;
    Ok(())
}

/// `dir/stem<suffix>.<ext>`, dropping any extension already on `path`.
fn suffixed(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn bench_spec(args: &BenchmarkArgs) -> CliResult<BenchSpec> {
    let mut settings: BTreeMap<String, String> = match &args.config {
        Some(path) => config::read(path)?,
        None => BTreeMap::new(),
    };
    let flags = [
        ("scenarios", args.scenarios.clone()),
        ("sizes", args.sizes.clone()),
        ("methods", args.methods.clone()),
        ("replicates", args.replicates.map(|v| v.to_string())),
        ("grid", args.grid.clone()),
        ("lambdas", args.lambdas.clone()),
        ("gamma", args.gamma.map(|v| v.to_string())),
        ("tau", args.tau.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            settings.insert(key.to_string(), value);
        }
    }

    let mut spec = BenchSpec::default();
    for (key, value) in &settings {
        match key.as_str() {
            "scenarios" => spec.scenarios = config::list(key, value)?,
            "sizes" => spec.sizes = config::list(key, value)?,
            "methods" => spec.methods = config::list(key, value)?,
            "replicates" => spec.replicates = config::scalar(key, value)?,
            "gamma" => spec.gamma = Some(config::scalar(key, value)?),
            "tau" => spec.tau = QuantileLevel::new(config::scalar(key, value)?)?,
            "seed" => spec.base_seed = config::scalar(key, value)?,
            _ => {}
        }
    }
    let lambdas = settings.get("lambdas").map(String::as_str);
    spec.grid = match settings.get("grid").map(String::as_str) {
        None if lambdas.is_none() => None,
        None | Some("custom") => Some(LambdaGrid::custom(config::list(
            "lambdas",
            lambdas.ok_or_else(|| CliError::usage("grid custom needs lambdas"))?,
        )?)?),
        Some("1d") => Some(grid_1d()),
        Some("2d") => Some(grid_2d()),
        Some(other) => return Err(CliError::usage(format!("grid must be 1d, 2d or custom, got {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn benchmark(args: &BenchmarkArgs) -> CliResult {
    let spec = bench_spec(args)?;
    let report = run_benchmark(&spec)?;
    let mut out = format!("{BENCH_HEADER}\n");
    for row in &report.rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    write_text(&args.output, &out)?;
    if args.full {
        let mut surface = format!("{SURFACE_HEADER}\n");
        for point in &report.surface {
            surface.push_str(&point.to_csv());
            surface.push('\n');
        }
        write_text(&suffixed(&args.output, "_surface", "csv"), &surface)?;
    }
    Ok(())
}

fn tune(args: &TuneArgs) -> CliResult {
    let (shape, y) = load(&args.input, args.fit.shape.as_deref())?;
    let grid = build_grid(args.grid, args.lambdas.as_deref(), &shape)?;
    let cfg = solver_config(&args.fit, &shape, grid.values()[0])?;
    let df = args.df.map_or_else(|| default_df(&shape), DfArg::mode);
    let sel = select_lambda(&shape, &y, &cfg, &grid, df)?;
    table::write(&args.output, &shape, &sel.fit.theta_hat)?;

    let mut out = String::new();
    let df_name = match df {
        DfMode::JumpCount => "jump",
        DfMode::LeafCount => "leaf",
    };
    writeln!(out, "# method={}", cfg.method).unwrap();
    writeln!(out, "# tau={}", cfg.tau).unwrap();
    writeln!(out, "# sigma={}", bic_sigma(cfg.tau)).unwrap();
    writeln!(out, "# gamma={}", cfg.gamma).unwrap();
    writeln!(out, "# df={df_name}").unwrap();
    writeln!(out, "# selected_lambda={}", sel.lambda).unwrap();
    writeln!(out, "lambda,v,loss,bic").unwrap();
    for s in &sel.scores {
        writeln!(out, "{},{},{},{}", s.lambda, s.df, s.loss, s.bic).unwrap();
    }
    print!("{out}");
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}

fn init_threads() -> CliResult {
    let Ok(value) = std::env::var("QDCART_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("QDCART_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::internal(format!("cannot start worker pool: {e}")))
}

fn run(cli: &Cli) -> CliResult {
    init_threads()?;
    match &cli.command {
        Command::Denoise(args) => denoise(args),
        Command::Simulate(args) => simulate(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Tune(args) => tune(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
