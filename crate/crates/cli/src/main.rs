//! `cavcorr`: correlations of two detectors in a cylindrical cavity.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavcorr::cavity;
use cavcorr::freespace::{free_negativity_boundary, write_boundary_csv};
use cavcorr::series::{write_trace_csv, Spacing};
use cavcorr::specfun::BesselZeroTable;
use cavcorr::sweep::{
    self, evaluate_set, parse_config, physical, Axis, Format, GridPoint, RunOptions, SweepSpec,
    TOOL_VERSION,
};
use cavcorr::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "cavcorr",
    version,
    about = "Entanglement, mutual information and discord of two detectors in a cylindrical cavity"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point.
    Point(Common),
    /// Evaluate a grid with up to two varying axes.
    Sweep(Common),
    /// Two-axis grid plus zero-negativity contour and free-space overlay.
    Density(Common),
    /// Partial-sum trace of a mode series at one point.
    Converge(ConvergeArgs),
    /// Export a verified table of Bessel zeros.
    Modes(ModesArgs),
    /// Free-space zero-negativity boundary.
    FreespaceBoundary(BoundaryArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ωσ: a value, a list `a,b,c`, or `min:max:n:log|lin`.
    #[arg(long)]
    omega_sigma: Option<String>,
    /// ρ0/σ, same syntax.
    #[arg(long)]
    rho0_sigma: Option<String>,
    /// σ/R, same syntax.
    #[arg(long = "sigma-r")]
    sigma_r: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Tolerance of the oscillating M series.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    nmax_x: Option<usize>,
    #[arg(long)]
    nmax_m: Option<usize>,
    #[arg(long)]
    mmax: Option<u32>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue an interrupted run from its manifest.
    #[arg(long)]
    resume: bool,
    /// Exit 0 even if some series did not converge.
    #[arg(long)]
    allow_unconverged: bool,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, hide = true)]
    stop_after: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesArg {
    M,
    XAa,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Log,
    Lin,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = SeriesArg::M)]
    series: SeriesArg,
    /// Rows kept in the trace.
    #[arg(long, default_value_t = 200)]
    n_points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    spacing: SpacingArg,
    /// Terms summed; defaults to twice what the production sum needs.
    #[arg(long)]
    n_terms: Option<usize>,
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long, default_value_t = 0)]
    mmax: u32,
    #[arg(long, default_value_t = 100)]
    nmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reload and verify an existing table instead of computing one.
    #[arg(long, conflicts_with = "out")]
    verify: Option<PathBuf>,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long, default_value = "0.05:3:30:log")]
    omega_sigma: String,
    /// Separation grid d/σ.
    #[arg(long, default_value = "0.1:10:60:log")]
    d_sigma: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Point(c) => cmd_point(&c),
        Command::Sweep(c) => cmd_sweep(&c, false),
        Command::Density(c) => cmd_sweep(&c, true),
        Command::Converge(a) => cmd_converge(&a),
        Command::Modes(a) => cmd_modes(&a),
        Command::FreespaceBoundary(a) => cmd_boundary(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

impl Common {
    fn spec(&self) -> Result<SweepSpec> {
        let mut map = match &self.config {
            Some(p) => parse_config(&fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        set("omega_sigma", self.omega_sigma.clone());
        set("rho0_sigma", self.rho0_sigma.clone());
        set("sigma_r", self.sigma_r.clone());
        set("lambda", self.lambda.map(|v| v.to_string()));
        set("tol", self.tol.map(|v| v.to_string()));
        set("nmax_x", self.nmax_x.map(|v| v.to_string()));
        set("nmax_m", self.nmax_m.map(|v| v.to_string()));
        set("mmax", self.mmax.map(|v| v.to_string()));
        set(
            "format",
            self.format.map(|f| match f {
                FormatArg::Csv => "csv".into(),
                FormatArg::Json => "json".into(),
            }),
        );
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        SweepSpec::from_pairs(&map)
    }

    /// A single point; every axis must hold exactly one value.
    fn point(&self, spec: &SweepSpec) -> Result<GridPoint> {
        for (name, a) in [
            ("omega_sigma", &spec.omega_sigma),
            ("rho0_sigma", &spec.rho0_sigma),
            ("sigma_r", &spec.sigma_r),
        ] {
            if a.len() != 1 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be a single value here"
                )));
            }
        }
        let p = GridPoint {
            omega_sigma: spec.omega_sigma.values[0],
            rho0_sigma: spec.rho0_sigma.values[0],
            sigma_r: spec.sigma_r.values[0],
        };
        p.validate()?;
        Ok(p)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn unconverged_exit(n: usize, allow: bool) -> ExitCode {
    if n > 0 && !allow {
        eprintln!(
            "{n} point(s) did not converge (NaN rows flagged); pass --allow-unconverged to accept"
        );
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_point(c: &Common) -> Result<ExitCode> {
    let spec = c.spec()?;
    let p = c.point(&spec)?;
    let set = evaluate_set(&p, spec.lambda, &spec.cutoffs)?;
    let row = sweep::Row::from_set(&p, spec.lambda, &set);
    let mut w = output(c.out.as_deref())?;
    match spec.format {
        Format::Csv => sweep::write_rows(&mut w, std::slice::from_ref(&row), Format::Csv)?,
        Format::Json => {
            let (det, cav) = physical(&p, spec.lambda)?;
            let measures = if set.is_finite() {
                cavcorr::measures::discord(&set).ok()
            } else {
                None
            };
            let doc = json!({
                "provenance": {
                    "tool_version": TOOL_VERSION,
                    "spec_hash": spec.hash(),
                    "point": p,
                    "lambda": spec.lambda,
                    "sigma": det.sigma,
                    "radius": cav.radius,
                    "rho0": cav.rho0,
                    "cutoffs": spec.cutoffs,
                    "entropy_base": "e",
                },
                "correlations": set,
                "measures": measures,
            });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(unconverged_exit(
        usize::from(!set.all_converged()),
        c.allow_unconverged,
    ))
}

fn cmd_sweep(c: &Common, density: bool) -> Result<ExitCode> {
    let spec = c.spec()?;
    let out = spec
        .out_path
        .clone()
        .ok_or_else(|| Error::InvalidParams("--out is required".into()))?;
    let opts = RunOptions {
        threads: c.threads,
        resume: c.resume,
        stop_after: c.stop_after,
    };
    let run = if density {
        let d = sweep::run_density(&spec, &out, &opts)?;
        if d.run.complete() {
            if d.contour_empty() {
                eprintln!("contour: empty (no zero-negativity crossing on this grid)");
            } else {
                eprintln!("contour: {}", d.contour_path.display());
            }
            eprintln!("free-space boundary: {}", d.boundary_path.display());
        }
        d.run
    } else {
        sweep::run_sweep(&spec, &out, &opts)?
    };
    let m = &run.manifest;
    if !run.complete() {
        eprintln!(
            "stopped with {}/{} points done; rerun with --resume",
            m.completed_count(),
            m.grid_size
        );
        return Ok(ExitCode::SUCCESS);
    }
    eprintln!(
        "{} points written to {} in {:.1} s",
        m.grid_size,
        out.display(),
        m.wall_time_s
    );
    Ok(unconverged_exit(m.unconverged_count(), c.allow_unconverged))
}

fn cmd_converge(a: &ConvergeArgs) -> Result<ExitCode> {
    let spec = a.common.spec()?;
    let p = a.common.point(&spec)?;
    let spacing = match a.spacing {
        SpacingArg::Log => Spacing::Log,
        SpacingArg::Lin => Spacing::Linear,
    };
    let (det, cav) = physical(&p, spec.lambda)?;
    let (rows, summary) = match a.series {
        SeriesArg::M => {
            let diag = match cavity::m_ab(&det, &cav, &spec.cutoffs) {
                Ok((_, d)) => d,
                Err(e) => e.diagnostics().cloned().ok_or(e)?,
            };
            let n = a.n_terms.unwrap_or((2 * diag.terms_used).max(64));
            (
                sweep::m_trace(&p, spec.lambda, n, a.n_points, spacing)?,
                diag.summary(),
            )
        }
        SeriesArg::XAa => {
            let (_, diag) = cavity::x_aa(&det, &cav, &spec.cutoffs)?;
            let n = a.n_terms.unwrap_or((2 * diag.terms_used).max(64));
            (
                sweep::x_aa_trace(&p, spec.lambda, n, a.n_points, spacing)?,
                diag.summary(),
            )
        }
    };
    let mut w = output(a.common.out.as_deref())?;
    write_trace_csv(&mut w, &rows)?;
    w.flush()?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(unconverged_exit(
        usize::from(!summary.converged),
        a.common.allow_unconverged,
    ))
}

fn cmd_modes(a: &ModesArgs) -> Result<ExitCode> {
    if let Some(path) = &a.verify {
        let t = BesselZeroTable::read(BufReader::new(File::open(path)?))?;
        eprintln!("{}: {} orders verified", path.display(), t.columns.len());
        return Ok(ExitCode::SUCCESS);
    }
    if a.nmax == 0 {
        return Err(Error::InvalidParams("--nmax must be >= 1".into()));
    }
    let t = BesselZeroTable::compute(a.mmax, a.nmax)?;
    t.verify()?;
    let mut w = output(a.out.as_deref())?;
    t.write(&mut w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_boundary(a: &BoundaryArgs) -> Result<ExitCode> {
    let os = Axis::parse(&a.omega_sigma)?;
    let d = Axis::parse(&a.d_sigma)?;
    let pts = free_negativity_boundary(&os.values, &d.values)?;
    let mut w = output(a.out.as_deref())?;
    write_boundary_csv(&mut w, &pts)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
