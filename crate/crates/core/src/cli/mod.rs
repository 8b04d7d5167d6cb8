//! The `metaslit` command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence.
//! `METASLIT_THREADS` caps the worker threads used by sweeps.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::beam;
use crate::error::Error;
use crate::sweep::{run_sweep, Preset, Reason, SweepKind};
use config::{Format, RunConfig};
use output::Quantity;

/// Environment variable capping the sweep thread pool.
pub const THREADS_ENV: &str = "METASLIT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "metaslit", version, about = "Metasurface LED link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radiation pattern table: phi_rad, k0L, M, G_scaled, G.
    Pattern {
        #[command(flatten)]
        common: Common,
        /// Total slit count 2M+1 (1 gives the lone omnidirectional slit).
        #[arg(long)]
        slits: Option<u32>,
    },
    /// Received power and SIR against M, frequency or any link parameter.
    Link(Common),
    /// Misaligned-receiver map over tilt and shift.
    Map(Common),
    /// Lobe count, beamwidth, slit bounds and reference powers.
    Analyze(Common),
    /// Print a preset (with any config and overrides applied) as a config file.
    PresetDump(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config merged over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// fig2a, fig2b, fig3, fig4, fig5_small or fig5_large.
    #[arg(long)]
    preset: Option<String>,
    /// Dotted-path assignment, e.g. fixed.M=300 or axis.0.count=11.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Convergence { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: message.into() }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_failure(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(common: &Common, default: Preset, extra: &[String]) -> Result<RunConfig, Failure> {
    let preset = match &common.preset {
        Some(name) => Preset::from_name(name)?,
        None => default,
    };
    let mut overrides = common.overrides.clone();
    overrides.extend_from_slice(extra);
    let mut run = config::load(preset, common.config.as_deref(), &overrides)?;
    if let Some(f) = common.format {
        run.output.format = f;
    }
    if let Some(p) = &common.out {
        run.output.path = Some(p.clone());
    }
    Ok(run)
}

fn require_kind(run: &RunConfig, allowed: &[SweepKind], command: &str) -> Result<(), Failure> {
    if allowed.contains(&run.kind) {
        Ok(())
    } else {
        Err(config_failure(format!("`{command}` cannot run a {:?} configuration", run.kind)))
    }
}

fn emit(run: &RunConfig, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match &run.output.path {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| config_failure(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(|e| config_failure(e.to_string())),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Pattern { common, slits } => {
            let extra: Vec<String> = slits.map(|s| format!("fixed.slits={s}")).into_iter().collect();
            let mut run = load(&common, Preset::Fig2a, &extra)?;
            if slits.is_some() {
                // the slit count replaces any series over M or k0L
                run.axis.retain(|a| a.param == crate::sweep::AxisParam::Phi);
            }
            require_kind(&run, &[SweepKind::Pattern], "pattern")?;
            table(&run, stdout)
        }
        Command::Link(common) => {
            let run = load(&common, Preset::Fig3, &[])?;
            require_kind(&run, &[SweepKind::MSweep, SweepKind::FreqSweep, SweepKind::Custom], "link")?;
            table(&run, stdout)
        }
        Command::Map(common) => {
            let run = load(&common, Preset::Fig5Small, &[])?;
            require_kind(&run, &[SweepKind::MisalignMap], "map")?;
            table(&run, stdout)
        }
        Command::Analyze(common) => {
            let run = load(&common, Preset::Fig3, &[])?;
            analyze(&run, stdout)
        }
        Command::PresetDump(common) => {
            let run = load(&common, Preset::Fig3, &[])?;
            let mut dumped = run.clone();
            dumped.output.path = None;
            emit(&run, dumped.to_toml().as_bytes(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn table(run: &RunConfig, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let result = run_sweep(&run.spec())?;
    let mut buf = Vec::new();
    match run.output.format {
        Format::Csv => output::write_csv(&result, &mut buf).map_err(|e| config_failure(e.to_string()))?,
        Format::Json => {
            serde_json::to_writer(&mut buf, &output::to_json(&result)).map_err(|e| config_failure(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    emit(run, &buf, stdout)?;
    if result.has_reason(Reason::NonConvergence) {
        return Err(Failure {
            code: EXIT_NONCONVERGENCE,
            message: "quadrature did not converge for some rows (sentinel_reason = non_convergence)".into(),
        });
    }
    Ok(EXIT_OK)
}

fn analysis(run: &RunConfig) -> Result<Vec<Quantity>, Error> {
    let p = &run.fixed;
    let geom = p.geometry()?;
    let wave = p.wave()?;
    let q = |quantity, value: f64, unit| Quantity { quantity, value: Some(value), unit, note: String::new() };
    let mut rows = vec![
        q("M", f64::from(geom.m()), "count"),
        q("wavelength", wave.wavelength() * 1e9, "nm"),
        q("k0L", wave.k0() * geom.pitch(), "rad"),
        q("V", beam::lobe_count(&geom, &wave) as f64, "count"),
        q("V_simplified", beam::lobe_count_simplified(&geom, &wave) as f64, "count"),
    ];
    rows.push(match beam::beamwidth(&geom, &wave) {
        Ok(w) => q("beamwidth", w, "rad"),
        Err(Error::BeamFillsHalfSpace { .. }) => Quantity {
            quantity: "beamwidth",
            value: None,
            unit: "rad",
            note: "main lobe fills half-space".into(),
        },
        Err(e) => return Err(e),
    });
    if geom.m() >= 1 {
        let min_m = beam::min_slits(&wave, geom.pitch(), p.h_mm * 1e-3, geom.d())?;
        rows.push(q("min_M", min_m as f64, "count"));
    }
    rows.push(q("N", geom.capacity() as f64, "count"));
    rows.push(match beam::g_max_with(&geom, &wave, &run.quadrature.settings()) {
        Ok(g) => q("g_max", g, "rad"),
        Err(Error::UnsupportedRegime { k0a }) => Quantity {
            quantity: "g_max",
            value: None,
            unit: "rad",
            note: format!("unsupported regime: k0a = {k0a} is not below pi"),
        },
        Err(e) => return Err(e),
    });
    if let Some(g) = rows.last().and_then(|r| r.value) {
        rows.push(q("P_max", g / (beam::ETA0 * std::f64::consts::PI * wave.k0()), "W/m"));
    }
    Ok(rows)
}

fn analyze(run: &RunConfig, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let rows = analysis(run)?;
    let mut buf = Vec::new();
    match run.output.format {
        Format::Csv => output::write_report_csv(&rows, &mut buf).map_err(|e| config_failure(e.to_string()))?,
        Format::Json => {
            serde_json::to_writer(&mut buf, &serde_json::json!({ "quantities": rows }))
                .map_err(|e| config_failure(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    emit(run, &buf, stdout)?;
    Ok(EXIT_OK)
}
