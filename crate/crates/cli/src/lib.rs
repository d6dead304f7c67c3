//! Command-line front end for `covfn`: single estimates from a data file
//! and simulation studies from a flat configuration file.

pub mod config;
pub mod data;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covfn::estimators::{bias_reduced_estimate, EstimateReport, EstimatorKind};
use covfn::experiments::{run_experiment, BSpec, ResultTable};
use covfn::linalg::{schatten_norm, ScalarFunction, SchattenP, SymMat};
use covfn::sampling::RngStream;

pub use config::RawConfig;
pub use data::load_data_csv;
pub use error::{CliError, CliResult};
use render::{render, Format};

/// Environment variable capping the worker thread count (0 or unset: auto).
pub const THREADS_ENV: &str = "COVFN_THREADS";

/// Stream id used for the bootstrap chains of `estimate`.
pub const ESTIMATE_STREAM: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "covfn",
    version,
    about = "Bias-reduced estimation of smooth covariance functionals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate <f(Σ), B> from a data file.
    Estimate(EstimateArgs),
    /// Run a simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutFormat,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV file with one observation per row.
    #[arg(long)]
    pub data: PathBuf,
    /// Skip the first line of the data file.
    #[arg(long)]
    pub header: bool,
    /// Function spec NAME[:p1,p2,...].
    #[arg(long = "fn", default_value = "identity")]
    pub function: String,
    /// identity | rank1:INDEX | file:PATH (normalized to nuclear norm 1).
    #[arg(long = "B", default_value = "identity")]
    pub b: String,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub chains: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub experiment: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long = "B")]
    pub b: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long = "M")]
    pub m: Option<String>,
    #[arg(long = "N")]
    pub chains: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Test matrix from `identity`, `rank1:I` or `file:PATH`, normalized to
/// nuclear norm 1. Returns the matrix and the factor applied.
pub fn build_test_matrix(spec: &str, d: usize) -> CliResult<(SymMat<f64>, f64)> {
    if let Some(path) = spec.strip_prefix("file:") {
        let path = Path::new(path);
        let (rows, cols, values) = data::load_numeric(path, false)?;
        if rows != cols || rows != d {
            return Err(covfn::Error::DimMismatch {
                expected: d,
                got: if rows == cols { rows } else { rows.max(cols) },
            }
            .into());
        }
        let raw = SymMat::from_row_major(d, &values)?;
        let nuclear = schatten_norm(&raw, SchattenP::One)?;
        if nuclear == 0.0 {
            return Err(covfn::Error::ZeroMatrix.into());
        }
        return Ok((raw.scale(1.0 / nuclear), 1.0 / nuclear));
    }
    let parsed: BSpec = spec
        .parse()
        .map_err(|e: covfn::Error| CliError::Usage(format!("invalid --B: {e}")))?;
    match parsed {
        BSpec::IdentityNormalized | BSpec::RankOne(_) => Ok(parsed.build(d, true, 0)?),
        _ => Err(CliError::Usage(format!(
            "invalid --B {spec:?}: expected identity, rank1:INDEX or file:PATH"
        ))),
    }
}

/// One-row table describing an estimate.
///
/// `seed` and `stream` identify the random stream the chains used, so the
/// row can be re-run on its own.
pub fn report_table(
    report: &EstimateReport<f64>,
    seed: u64,
    meta: &[(&str, String)],
) -> ResultTable {
    let mut t = ResultTable::new([
        "estimate",
        "ci_lower",
        "ci_upper",
        "sigma_hat",
        "mc_stderr",
        "alpha",
        "n",
        "d",
        "k",
        "chains",
        "chain_failures",
        "estimator",
        "seed",
        "stream",
    ]);
    for (k, v) in meta {
        t.set_meta(*k, v.clone());
    }
    let kind = match report.kind {
        EstimatorKind::Plugin | EstimatorKind::BiasReduced { k: 0 } => "plugin",
        EstimatorKind::BiasReduced { .. } => "bias_reduced",
    };
    t.push_row(vec![
        report.functional_value.into(),
        report.ci.0.into(),
        report.ci.1.into(),
        report.sigma_hat.into(),
        report.mc_stderr.into(),
        report.alpha.into(),
        report.n.into(),
        report.d.into(),
        report.k.into(),
        report.chains.into(),
        report.chain_failures.into(),
        kind.into(),
        seed.into(),
        ESTIMATE_STREAM.into(),
    ])
    .expect("row matches columns");
    t
}

fn run_estimate(
    args: &EstimateArgs,
    err: &mut (dyn Write + Send),
) -> CliResult<(ResultTable, u64)> {
    let f: ScalarFunction<f64> = args
        .function
        .parse()
        .map_err(|e: covfn::Error| CliError::Usage(format!("invalid --fn: {e}")))?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    if args.k > 0 && args.chains == 0 {
        return Err(CliError::Usage(
            "--chains must be at least 1 when --k > 0".into(),
        ));
    }
    let x = load_data_csv(&args.data, args.header)?;
    let (b, factor) = build_test_matrix(&args.b, x.d())?;
    let rng = RngStream::new(args.seed, ESTIMATE_STREAM);
    let report = bias_reduced_estimate(&x, &f, &b, args.k, args.chains, &rng, args.alpha)?;

    let half_width = report.sigma_hat / (report.n as f64).sqrt();
    if report.mc_stderr > 0.1 * half_width {
        writeln!(
            err,
            "warning: Monte Carlo standard error {:.3e} exceeds 10% of sigma_hat/sqrt(n) = {:.3e}; consider more --chains",
            report.mc_stderr, half_width
        )?;
    }
    let meta = [
        ("data", args.data.display().to_string()),
        ("header", args.header.to_string()),
        ("fn", f.to_string()),
        ("B", args.b.clone()),
        ("B_scale", render::format_float(factor).unwrap_or_default()),
        ("k", args.k.to_string()),
        ("chains", args.chains.to_string()),
        ("alpha", args.alpha.to_string()),
    ];
    Ok((report_table(&report, args.seed, &meta), args.seed))
}

fn run_simulate(args: &SimulateArgs) -> CliResult<(ResultTable, u64)> {
    let mut raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let overrides = [
        ("experiment", &args.experiment),
        ("d", &args.d),
        ("n", &args.n),
        ("k", &args.k),
        ("fn", &args.function),
        ("B", &args.b),
        ("sigma", &args.sigma),
        ("M", &args.m),
        ("N", &args.chains),
        ("alpha", &args.alpha),
        ("seed", &args.seed),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            raw.set(key, v.clone())?;
        }
    }
    let cfg = raw.resolve()?;
    Ok((run_experiment(&cfg)?, cfg.seed))
}

fn write_output(text: &str, out: Option<&Path>, stdout: &mut (dyn Write + Send)) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn execute(
    cli: &Cli,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> CliResult<()> {
    let started = Instant::now();
    let (table, seed, output) = match &cli.command {
        Command::Estimate(a) => {
            let (t, s) = run_estimate(a, stderr)?;
            (t, s, &a.output)
        }
        Command::Simulate(a) => {
            let (t, s) = run_simulate(a)?;
            (t, s, &a.output)
        }
    };
    let text = render(&table, seed, output.format.into())?;
    write_output(&text, output.out.as_deref(), stdout)?;
    writeln!(stderr, "elapsed: {:.3} s", started.elapsed().as_secs_f64())?;
    Ok(())
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_cli<I, T>(
    argv: I,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut (dyn Write + Send) = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, stdout, stderr)),
            Err(e) => Err(CliError::Usage(format!(
                "cannot start {n} worker threads: {e}"
            ))),
        },
        None => execute(&cli, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if let CliError::Usage(_) | CliError::Config { .. } = e {
                let _ = writeln!(
                    stderr,
                    "usage: covfn <estimate|simulate> [OPTIONS]  (see covfn --help)"
                );
            }
            e.exit_code()
        }
    }
}
