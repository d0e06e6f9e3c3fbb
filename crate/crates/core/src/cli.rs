//! The `agl` command line. Exit codes: 0 success, 1 negative verdict from
//! `check` or `certify`, 2 bad input.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_table, write_bound_csv};
use crate::certifier::{certify, CertifyOptions};
use crate::engine::agl_report;
use crate::error::AglError;
use crate::lab::{
    asymptotic_experiment, conjecture_probe, search_psi, write_asymptotic_csv, write_probe_csv, write_trace_csv,
    SearchOptions,
};
use crate::rational::{critical_points, RationalFunction, Tolerances};
#[cfg(test)]
use crate::rational::Complex;
use crate::region::ConvexRegion;
use crate::svg::{render_svg, Scene};

/// A function together with the region it is tested against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub function: RationalFunction,
    pub region: ConvexRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "agl", version, about = "Critical points of rational functions near convex sets")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `name=value`; names are root_tol, cluster_tol,
    /// membership_tol, contour_tol and max_iterations.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Instance JSON file, `-` for stdin.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    eps: f64,
}

#[derive(Debug, Args)]
struct RegionArgs {
    /// Region as inline JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "disk")]
    region: Option<String>,
    /// The unit disk (the default when no region is given).
    #[arg(long)]
    disk: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count critical points near K and report the verdict.
    Check(InstanceArgs),
    /// Closed-form bounds for k = n − gap.
    Bounds {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1)]
        gap: u64,
        /// Diameter of K.
        #[arg(long, default_value_t = 2.0)]
        s: f64,
    },
    /// Certify the critical-point count with a Rouché contour.
    Certify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 256)]
        min_samples: usize,
    },
    /// Search for configurations needing a large ε.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
    },
    /// Fractions of zeros in K and critical points in K_ε with a few zeros held outside.
    Asymptotic {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40,80")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        outside: usize,
    },
    /// Failure rates of random instances across k/(n − k) ratios.
    Probe {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Draw an instance as SVG.
    Plot {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps: f64,
        /// Also attempt a certificate for this k and draw its contour.
        #[arg(long)]
        k: Option<usize>,
    },
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Io(String),
}

impl From<AglError> for Failure {
    fn from(e: AglError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = std::result::Result<(Vec<u8>, bool), Failure>;

fn parse_tolerances(overrides: &[String]) -> std::result::Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("--tol expects NAME=VALUE, got {item:?}")))?;
        let bad = |_| Failure::Input(format!("bad value for {name}: {value:?}"));
        let real = || value.parse::<f64>().map_err(bad).and_then(|v| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Failure::Input(format!("{name} must be positive and finite")))
            }
        });
        match name {
            "root_tol" => tol.root_tol = real()?,
            "cluster_tol" => tol.cluster_tol = real()?,
            "membership_tol" => tol.membership_tol = real()?,
            "contour_tol" => tol.contour_tol = real()?,
            "max_iterations" => {
                tol.max_iterations = value.parse().map_err(|_| Failure::Input(format!("bad value for {name}: {value:?}")))?
            }
            _ => return Err(Failure::Input(format!("unknown tolerance {name:?}"))),
        }
    }
    Ok(tol)
}

fn read_source(path: &Path) -> std::result::Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn read_instance(path: &Path) -> std::result::Result<Instance, Failure> {
    let text = read_source(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_region(args: &RegionArgs) -> std::result::Result<ConvexRegion, Failure> {
    match &args.region {
        None => Ok(ConvexRegion::unit_disk()),
        Some(text) if text.trim_start().starts_with('{') => Ok(serde_json::from_str(text)?),
        Some(path) => {
            let text = read_source(Path::new(path))?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn check_eps(eps: f64) -> std::result::Result<(), Failure> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("eps {eps} must be finite and >= 0")))
    }
}

fn json_bytes<T: Serialize>(value: &T) -> std::result::Result<Vec<u8>, Failure> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> crate::error::Result<()>) -> std::result::Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn single_row<T: Serialize>(row: &T) -> std::result::Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(row).map_err(|e| Failure::Io(e.to_string()))?;
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

#[derive(Serialize)]
struct CheckRow {
    n: usize,
    k: usize,
    eps: f64,
    zeros_in_k: usize,
    critical_in_k_eps: usize,
    holds: bool,
    required_epsilon: Option<f64>,
}

#[derive(Serialize)]
struct CertifyRow {
    eps: f64,
    k: usize,
    offset_distance: Option<f64>,
    sample_count: usize,
    margin: Option<f64>,
    winding: Option<i64>,
    critical_lower_bound: Option<i64>,
    valid: bool,
    failure: String,
}

fn execute(cli: &Cli) -> CmdResult {
    let tol = parse_tolerances(&cli.tol)?;
    let format = cli.format;
    match &cli.command {
        Command::Check(args) => {
            check_eps(args.eps)?;
            let inst = read_instance(&args.instance)?;
            let report = agl_report(&inst.function, &inst.region, args.eps, args.k, &tol)?;
            let bytes = match format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&report)?,
                Format::Csv => single_row(&CheckRow {
                    n: report.n,
                    k: report.k_requested,
                    eps: report.eps,
                    zeros_in_k: report.zeros_in_k,
                    critical_in_k_eps: report.critical_in_k_eps,
                    holds: report.holds,
                    required_epsilon: report.required_epsilon,
                })?,
            };
            Ok((bytes, report.holds))
        }
        Command::Bounds { n, gap, s } => {
            let rows = bound_table(n, *gap, *s)?;
            let bytes = match format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&rows)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_bound_csv(&rows, &mut buf)?;
                    buf
                }
            };
            Ok((bytes, true))
        }
        Command::Certify { instance, min_samples } => {
            let inst = read_instance(&instance.instance)?;
            let opts = CertifyOptions {
                min_samples: *min_samples,
                seed: cli.seed,
                ..CertifyOptions::default()
            };
            let cert = certify(&inst.function, &inst.region, instance.eps, instance.k, &opts, &tol)?;
            let bytes = match format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&cert)?,
                Format::Csv => single_row(&CertifyRow {
                    eps: cert.eps,
                    k: cert.k,
                    offset_distance: cert.offset_distance,
                    sample_count: cert.sample_count,
                    margin: cert.margin,
                    winding: cert.winding,
                    critical_lower_bound: cert.critical_lower_bound,
                    valid: cert.valid,
                    failure: cert
                        .failure
                        .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
                        .unwrap_or_default(),
                })?,
            };
            Ok((bytes, cert.valid))
        }
        Command::Search { n, k, region, restarts, iters } => {
            let region = read_region(region)?;
            let opts = SearchOptions {
                restarts: *restarts,
                iters: *iters,
                seed: cli.seed,
            };
            let result = search_psi(*n, *k, &region, &opts)?;
            let bytes = match format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&result)?,
                Format::Csv => csv_bytes(|b| write_trace_csv(&result.trace, b))?,
            };
            Ok((bytes, true))
        }
        Command::Asymptotic { region, eps, n, outside } => {
            check_eps(*eps)?;
            let region = read_region(region)?;
            let rows = asymptotic_experiment(&region, *eps, n, *outside, cli.seed)?;
            let bytes = match format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&rows)?,
                Format::Csv => csv_bytes(|b| write_asymptotic_csv(&rows, b))?,
            };
            Ok((bytes, true))
        }
        Command::Probe { region, eps, ratios, trials } => {
            check_eps(*eps)?;
            let region = read_region(region)?;
            let rows = conjecture_probe(&region, *eps, ratios, *trials, cli.seed)?;
            let bytes = match format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&rows)?,
                Format::Csv => csv_bytes(|b| write_probe_csv(&rows, b))?,
            };
            Ok((bytes, true))
        }
        Command::Plot { instance, eps, k } => {
            check_eps(*eps)?;
            let inst = read_instance(instance)?;
            let mut scene = Scene::new(inst.region.clone(), *eps);
            scene.zeros = inst.function.zeros.clone();
            scene.poles = inst.function.poles.clone();
            scene.critical = critical_points(&inst.function, &tol)?.points;
            if let Some(k) = k {
                let opts = CertifyOptions {
                    seed: cli.seed,
                    ..CertifyOptions::default()
                };
                let cert = certify(&inst.function, &inst.region, *eps, *k, &opts, &tol)?;
                scene.contour = cert.contour;
                scene.exclusions = Some(cert.exclusions);
            }
            Ok((render_svg(&scene).into_bytes(), true))
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((bytes, positive)) => {
            if let Err(e) = emit(cli.out.as_deref(), &bytes) {
                eprintln!("agl: cannot write output: {e}");
                return 2;
            }
            if positive {
                0
            } else {
                1
            }
        }
        Err(Failure::Input(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("agl: {msg}");
            2
        }
    }
}
