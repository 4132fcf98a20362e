//! `backscatter-sim sweep | analytic | selftest`.
//!
//! Exit codes: 0 success, 1 bad usage or config, 2 I/O failure, 3 selftest
//! failure.

pub mod config;
pub mod output;

use crate::analysis::{self, VarPair};
use crate::montecarlo::{self, SweepAxis};
use crate::selftest;
use clap::{Args, Parser, Subcommand};
use config::{ConfigError, RunConfig};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

pub const THREADS_ENV: &str = "BACKSCATTER_SIM_THREADS";

/// `10^(dB/10)`. The only place decibels are turned into linear power.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Parser)]
#[command(name = "backscatter-sim", version, about = "Manchester-coded ambient backscatter BER simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a parameter sweep and write `<out>.csv` and `<out>.manifest`.
    Sweep(SweepArgs),
    /// Evaluate one closed-form BER expression.
    Analytic(AnalyticArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment config file (`key = value` lines).
    pub config: PathBuf,
    /// N, T, gamma_db, rcd or prior. Overrides `axis` in the config.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated axis values. Overrides `values` in the config.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Output path prefix.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write `<out>.svg`.
    #[arg(long)]
    pub plot: bool,
    /// Worker threads; falls back to BACKSCATTER_SIM_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Formula name; see the list printed for an unknown name.
    pub formula: Option<String>,
    #[arg(long = "formula", conflicts_with = "formula")]
    pub formula_flag: Option<String>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// |h0|^2
    #[arg(long)]
    pub h0: Option<f64>,
    /// |h1|^2
    #[arg(long)]
    pub h1: Option<f64>,
    /// Linear SNR.
    #[arg(long, conflicts_with = "gamma_db")]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_db: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Per-symbol SeCoMC error for `nocomc-compose`.
    #[arg(long)]
    pub p: Option<f64>,
}

/// Formula names accepted by `analytic`.
pub const FORMULAS: [&str; 13] = [
    "secomc-exact",
    "nocomc-exact",
    "secomc-approx",
    "secomc-floor",
    "nocomc-approx",
    "nocomc-floor",
    "baseline-approx",
    "secomc-det-approx",
    "secomc-det-highsnr",
    "nocomc-det-approx",
    "nocomc-det-highsnr",
    "nocomc-compose",
    "rcd",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Analytic(a) => cmd_analytic(&a, out),
        Command::Selftest => return cmd_selftest(out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        return if n >= 1 {
            Ok(Some(n))
        } else {
            Err(CliError::Usage("--threads must be >= 1".into()))
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV}=`{v}` is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Effective run description after command-line overrides.
pub fn resolve_sweep(text: &str, a: &SweepArgs) -> Result<RunConfig, CliError> {
    let mut rc = RunConfig::parse(text)?;
    if let Some(s) = &a.axis {
        rc.axis = Some(config::parse_axis("--axis", s)?);
    }
    if let Some(v) = &a.values {
        rc.values = Some(config::parse_values("--values", v)?);
    }
    if let Some(seed) = a.seed {
        rc.seed = seed;
    }
    if rc.axis.is_none() {
        return Err(CliError::Usage("no sweep axis: give --axis or `axis` in the config".into()));
    }
    if rc.values.is_none() {
        return Err(CliError::Usage("no sweep values: give --values or `values` in the config".into()));
    }
    rc.experiment()?;
    Ok(rc)
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    // A missing or unreadable config is a configuration problem.
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", a.config.display())))?;
    let rc = resolve_sweep(&text, a)?;
    let threads = thread_count(a.threads)?;
    let base = rc.experiment()?;
    let axis: SweepAxis = rc.axis.expect("resolved");
    let values = rc.values.clone().expect("resolved");

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let table = pool.install(|| montecarlo::sweep(&base, axis, &values))?;

    let csv_path = with_extension(&a.out, "csv");
    let manifest_path = with_extension(&a.out, "manifest");
    let svg_path = with_extension(&a.out, "svg");
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut manifest = format!(
        "# backscatter-sim run manifest\nversion = {}\ntimestamp = {timestamp}\ncsv = {}\nmanifest = {}\n",
        env!("CARGO_PKG_VERSION"),
        csv_path.display(),
        manifest_path.display(),
    );
    if a.plot {
        manifest.push_str(&format!("plot = {}\n", svg_path.display()));
    }
    manifest.push_str(&rc.to_text());
    output::write_atomic(&manifest_path, &manifest).map_err(|e| io_err(&manifest_path, e))?;
    output::write_atomic(&csv_path, &output::csv(&table)).map_err(|e| io_err(&csv_path, e))?;
    if a.plot {
        output::write_atomic(&svg_path, &output::svg(&table)).map_err(|e| io_err(&svg_path, e))?;
    }
    let _ = writeln!(out, "wrote {} ({} rows)", csv_path.display(), table.rows.len());
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str, formula: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("`{formula}` needs --{flag}")))
}

pub fn evaluate_formula(a: &AnalyticArgs) -> Result<f64, CliError> {
    let name = a
        .formula
        .as_deref()
        .or(a.formula_flag.as_deref())
        .ok_or_else(|| CliError::Usage(format!("no formula given; valid names: {}", FORMULAS.join(", "))))?;
    if !FORMULAS.contains(&name) {
        return Err(CliError::Usage(format!(
            "unknown formula `{name}`; valid names: {}",
            FORMULAS.join(", ")
        )));
    }
    let n = || need(a.n, "n", name);
    let gamma = || match (a.gamma, a.gamma_db) {
        (Some(g), _) => Ok(g),
        (None, Some(db)) => Ok(db_to_linear(db)),
        (None, None) => Err(CliError::Usage(format!("`{name}` needs --gamma or --gamma-db"))),
    };
    let h = || Ok::<_, CliError>((need(a.h0, "h0", name)?, need(a.h1, "h1", name)?));
    let vars = || -> Result<VarPair, CliError> {
        Ok(VarPair::new(need(a.sigma0, "sigma0", name)?, need(a.sigma1, "sigma1", name)?)?)
    };
    let v = match name {
        "secomc-exact" => analysis::ber_secomc_gaussian_exact(vars()?, n()?)?,
        "nocomc-exact" => analysis::ber_nocomc_gaussian_exact(vars()?, n()?)?,
        "nocomc-compose" => {
            let p = need(a.p, "p", name)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")));
            }
            analysis::ber_nocomc_from_secomc(p)
        }
        "rcd" => {
            let (h0, h1) = h()?;
            crate::signal_model::rcd_from_powers(h0, h1)?
        }
        _ => {
            let (h0, h1) = h()?;
            if !(h0 >= 0.0 && h1 >= 0.0) {
                return Err(CliError::Usage("--h0 and --h1 are squared magnitudes, >= 0".into()));
            }
            let n = n()?;
            if n < 1 {
                return Err(CliError::Usage("--n must be >= 1".into()));
            }
            match name {
                "secomc-floor" => analysis::ber_secomc_gaussian_floor(h0, h1, n),
                "nocomc-floor" => analysis::ber_nocomc_gaussian_floor(h0, h1, n),
                _ => {
                    let g = gamma()?;
                    if !(g > 0.0) {
                        return Err(CliError::Usage("SNR must be positive".into()));
                    }
                    match name {
                        "secomc-approx" => analysis::ber_secomc_gaussian_approx(h0, h1, g, n),
                        "nocomc-approx" => analysis::ber_nocomc_gaussian_approx(h0, h1, g, n),
                        "baseline-approx" => analysis::ber_baseline_gaussian_approx(h0, h1, g, n),
                        "secomc-det-approx" => analysis::ber_secomc_deterministic_approx(h0, h1, g, n),
                        "secomc-det-highsnr" => analysis::ber_secomc_deterministic_highsnr(h0, h1, g, n),
                        "nocomc-det-approx" => analysis::ber_nocomc_deterministic_approx(h0, h1, g, n),
                        "nocomc-det-highsnr" => analysis::ber_nocomc_deterministic_highsnr(h0, h1, g, n),
                        _ => unreachable!("name checked against FORMULAS"),
                    }
                }
            }
        }
    };
    Ok(v)
}

pub fn cmd_analytic(a: &AnalyticArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let v = evaluate_formula(a)?;
    writeln!(out, "{v}").map_err(|e| CliError::Io(e.to_string()))
}

pub fn cmd_selftest(out: &mut dyn Write) -> i32 {
    let report = selftest::run();
    let _ = writeln!(out, "{report}");
    report.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run(
            std::iter::once("backscatter-sim").chain(args.iter().copied()),
            &mut o,
            &mut e,
        );
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-3.0) - 0.501_187_233_627_272_2).abs() < 1e-15);
    }

    #[test]
    fn analytic_examples() {
        let (c, o, _) = run_args(&["analytic", "secomc-exact", "--sigma0", "1", "--sigma1", "1", "--n", "20"]);
        assert_eq!((c, o.trim()), (0, "0.5"));
        let (c, o, _) = run_args(&["analytic", "nocomc-compose", "--p", "0.1"]);
        assert_eq!(c, 0);
        assert!((o.trim().parse::<f64>().unwrap() - 0.18).abs() < 1e-15);
        let (c, o, _) = run_args(&["analytic", "--formula", "secomc-exact", "--sigma0", "1", "--sigma1", "2", "--n", "1"]);
        assert_eq!(c, 0);
        assert!((o.trim().parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let (c, o, _) = run_args(&["analytic", "secomc-approx", "--h0", "1", "--h1", "1", "--gamma-db", "-3", "--n", "5"]);
        assert_eq!((c, o.trim()), (0, "0.5"));
    }

    #[test]
    fn analytic_errors() {
        let (c, _, e) = run_args(&["analytic", "secomc-magic", "--n", "3"]);
        assert_eq!(c, EXIT_USAGE);
        for f in FORMULAS {
            assert!(e.contains(f), "{f} missing from {e}");
        }
        let (c, _, e) = run_args(&["analytic", "secomc-exact", "--sigma0", "1", "--n", "3"]);
        assert_eq!(c, EXIT_USAGE);
        assert!(e.contains("--sigma1"));
        let (c, _, _) = run_args(&["analytic", "nocomc-compose", "--p", "2"]);
        assert_eq!(c, EXIT_USAGE);
        let (c, _, _) = run_args(&["analytic", "secomc-exact", "--sigma0", "0", "--sigma1", "1", "--n", "3"]);
        assert_eq!(c, EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["sweep"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn thread_flag_validation() {
        assert!(thread_count(Some(0)).is_err());
        assert_eq!(thread_count(Some(3)).unwrap(), Some(3));
    }
}
