//! `ghost`: measure, fit and classify bottleneck passage times from the
//! command line.
//!
//! Every subcommand writes its data to stdout (or `--out`) and nothing
//! else; diagnostics go to stderr. Identical invocations produce identical
//! bytes, so outputs are safe to diff and cache. Exit codes: 0 on success,
//! 2 for an invalid invocation, 3 when the requested computation fails.

mod config;

use std::env;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ghost::csvio::{read_sweep_csv, write_sweep_csv};
use ghost::pendulum::{
    bottleneck_sweep, bottleneck_time, default_bottleneck_interval, rotation_period, wave,
    PendulumParams,
};
use ghost::scaling::{classify, regime_scan, sweep, Spacing};
use ghost::{
    Engine, EngineConfig, Interval, OdeConfig, ParamMap, PhaseFn, QuadratureConfig, ScalingError,
    ScalingSample, SelectConfig, SweepEngine, SweepSpec, VectorField1D,
};

use config::{
    parse_engine, parse_param, parse_phase, resolve, resolve_opt, CliError, FileConfig,
    OutputFormat, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "ghost",
    version,
    about = "Passage-time scaling near vanished equilibria"
)]
struct Cli {
    /// Defaults file with key = value lines mirroring the long flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure passage times over a log-spaced r grid and emit CSV.
    Sweep(SweepArgs),
    /// Fit a sweep against the candidate laws and emit the winner as JSON.
    Fit(FitArgs),
    /// Classify the |x|^alpha family across an exponent grid, as JSON.
    Scan(ScanArgs),
    /// Pendulum bottleneck crawls and full revolutions, as CSV.
    Pendulum(PendulumArgs),
    /// Recompute the three reference families and print their classes.
    Table,
    /// Emit plot-ready rate curves and pendulum wave profiles as CSV.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Phase family: quadratic, power:<alpha>, monomial:<m>, pendulum:<a>.
    #[arg(long)]
    phase: Option<String>,
    /// Parameter map: identity, evenpower:<k>, invsqexp.
    #[arg(long)]
    param: Option<String>,
    /// Smallest distance to the bifurcation in the grid.
    #[arg(long = "r-lo", value_name = "R")]
    r_lo: Option<f64>,
    /// Largest distance to the bifurcation in the grid.
    #[arg(long = "r-hi", value_name = "R")]
    r_hi: Option<f64>,
    /// Grid size; at least 3.
    #[arg(long)]
    points: Option<u32>,
    /// quadrature or ode.
    #[arg(long)]
    engine: Option<String>,
    /// Left end of the passage window.
    #[arg(long = "interval-lo", value_name = "X", allow_negative_numbers = true)]
    interval_lo: Option<f64>,
    /// Right end of the passage window.
    #[arg(long = "interval-hi", value_name = "X", allow_negative_numbers = true)]
    interval_hi: Option<f64>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep CSV to fit; stdin when omitted.
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Comma-separated phase exponents, e.g. 0.5,1,2.
    #[arg(long)]
    alphas: Option<String>,
    /// Smallest distance to the bifurcation in each sweep.
    #[arg(long = "r-lo", value_name = "R")]
    r_lo: Option<f64>,
    /// Largest distance to the bifurcation in each sweep.
    #[arg(long = "r-hi", value_name = "R")]
    r_hi: Option<f64>,
    /// Grid size per sweep; at least 3.
    #[arg(long)]
    points: Option<u32>,
    /// quadrature or ode.
    #[arg(long)]
    engine: Option<String>,
    /// Left end of the passage window.
    #[arg(long = "interval-lo", value_name = "X", allow_negative_numbers = true)]
    interval_lo: Option<f64>,
    /// Right end of the passage window.
    #[arg(long = "interval-hi", value_name = "X", allow_negative_numbers = true)]
    interval_hi: Option<f64>,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PendulumArgs {
    /// Wave steepness exponent.
    #[arg(long)]
    a: Option<f64>,
    /// Single drive value; emits one row instead of a sweep over omega = 1 + r.
    #[arg(long)]
    omega: Option<f64>,
    /// bottleneck (default) or rotation.
    #[arg(long)]
    mode: Option<String>,
    /// Smallest omega - 1 in the sweep grid.
    #[arg(long = "r-lo", value_name = "R")]
    r_lo: Option<f64>,
    /// Largest omega - 1 in the sweep grid.
    #[arg(long = "r-hi", value_name = "R")]
    r_hi: Option<f64>,
    /// Grid size; at least 3.
    #[arg(long)]
    points: Option<u32>,
    /// quadrature or ode; rotation mode is quadrature only.
    #[arg(long)]
    engine: Option<String>,
    /// Left end of the bottleneck window.
    #[arg(
        long = "interval-lo",
        value_name = "THETA",
        allow_negative_numbers = true
    )]
    interval_lo: Option<f64>,
    /// Right end of the bottleneck window.
    #[arg(
        long = "interval-hi",
        value_name = "THETA",
        allow_negative_numbers = true
    )]
    interval_hi: Option<f64>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    /// Grid points per curve; at least 2.
    #[arg(long)]
    points: Option<u32>,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ghost: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let file = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(args, &file),
        Command::Fit(args) => cmd_fit(args, &file),
        Command::Scan(args) => cmd_scan(args, &file),
        Command::Pendulum(args) => cmd_pendulum(args, &file),
        Command::Table => cmd_table(),
        Command::Curves(args) => cmd_curves(args, &file),
    }
}

/// Honor `GHOST_THREADS` before any parallel work; 0 or unset means let
/// the pool size itself.
fn init_threads() -> Result<(), CliError> {
    let text = match env::var("GHOST_THREADS") {
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(CliError::Usage(format!("GHOST_THREADS: {err}"))),
        Ok(text) => text,
    };
    let threads: usize = text.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "GHOST_THREADS must be a nonnegative integer, got `{text}`"
        ))
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|err| CliError::Compute(err.to_string()))?;
    }
    Ok(())
}

/// Write the finished output in one shot so files and stdout carry
/// identical bytes.
fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|err| CliError::Compute(format!("cannot write {}: {err}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|()| stdout.flush())
                .map_err(|err| CliError::Compute(err.to_string()))
        }
    }
}

/// Spec construction and field validation are usage errors; failures on a
/// valid spec are computation errors.
fn scaling_err(err: ScalingError) -> CliError {
    match &err {
        ScalingError::InvalidSpec { .. } | ScalingError::Field(_) => {
            CliError::Usage(err.to_string())
        }
        _ => CliError::Compute(err.to_string()),
    }
}

fn parse_format(text: &str) -> Result<OutputFormat, CliError> {
    match text {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(CliError::Usage(format!(
            "unknown format `{other}` (expected csv or json)"
        ))),
    }
}

/// Samples as the chosen format; CSV carries the field labels, JSON is a
/// bare array of (r, t) records.
fn render_samples(
    cfg: &RunConfig,
    samples: &[ScalingSample],
    engine_label: Engine,
) -> Result<Vec<u8>, CliError> {
    match cfg.format {
        OutputFormat::Csv => {
            let mut bytes = Vec::new();
            write_sweep_csv(&mut bytes, samples, engine_label, &cfg.phase, &cfg.param)
                .map_err(|err| CliError::Compute(err.to_string()))?;
            Ok(bytes)
        }
        OutputFormat::Json => {
            let mut bytes =
                serde_json::to_vec(samples).map_err(|err| CliError::Compute(err.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

fn resolve_interval(
    flag_lo: Option<f64>,
    flag_hi: Option<f64>,
    file: &FileConfig,
    default: Interval,
) -> Result<Interval, CliError> {
    let lo = resolve(flag_lo, file.get("interval-lo")?, default.lo());
    let hi = resolve(flag_hi, file.get("interval-hi")?, default.hi());
    Interval::new(lo, hi).map_err(|err| CliError::Usage(err.to_string()))
}

fn resolve_engine(
    flag: Option<&str>,
    file: &FileConfig,
    default: SweepEngine,
) -> Result<SweepEngine, CliError> {
    match resolve_opt(flag, file.raw("engine")) {
        Some(text) => parse_engine(text),
        None => Ok(default),
    }
}

fn resolve_out(flag: Option<&Path>, file: &FileConfig) -> Option<PathBuf> {
    resolve_opt(
        flag.map(Path::to_path_buf),
        file.raw("out").map(PathBuf::from),
    )
}

fn sweep_config(args: &SweepArgs, file: &FileConfig) -> Result<RunConfig, CliError> {
    let base = SweepSpec::default();
    let phase = match resolve_opt(args.phase.as_deref(), file.raw("phase")) {
        Some(text) => parse_phase(text)?,
        None => PhaseFn::Quadratic,
    };
    let param = match resolve_opt(args.param.as_deref(), file.raw("param")) {
        Some(text) => parse_param(text)?,
        None => ParamMap::Identity,
    };
    let format = match resolve_opt(args.format.as_deref(), file.raw("format")) {
        Some(text) => parse_format(text)?,
        None => OutputFormat::Csv,
    };
    Ok(RunConfig {
        phase,
        param,
        r_lo: resolve(args.r_lo, file.get("r-lo")?, base.r_lo()),
        r_hi: resolve(args.r_hi, file.get("r-hi")?, base.r_hi()),
        points: resolve(args.points, file.get("points")?, base.points()),
        engine: resolve_engine(args.engine.as_deref(), file, base.engine())?,
        interval: resolve_interval(args.interval_lo, args.interval_hi, file, base.interval())?,
        out: resolve_out(args.out.as_deref(), file),
        format,
    })
}

fn cmd_sweep(args: &SweepArgs, file: &FileConfig) -> Result<(), CliError> {
    let cfg = sweep_config(args, file)?;
    let field =
        VectorField1D::new(cfg.phase, cfg.param).map_err(|err| CliError::Usage(err.to_string()))?;
    let spec = SweepSpec::new(
        cfg.r_lo,
        cfg.r_hi,
        cfg.points,
        Spacing::Log,
        cfg.engine,
        cfg.interval,
    )
    .map_err(scaling_err)?;
    let samples = sweep(&field, &spec).map_err(scaling_err)?;
    let bytes = render_samples(&cfg, &samples, cfg.engine.into())?;
    emit(&bytes, cfg.out.as_deref())
}

fn cmd_fit(args: &FitArgs, file: &FileConfig) -> Result<(), CliError> {
    let input = resolve_opt(args.input.clone(), file.raw("in").map(PathBuf::from));
    let raw = match &input {
        Some(path) => fs::read(path)
            .map_err(|err| CliError::Usage(format!("cannot read {}: {err}", path.display())))?,
        None => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|err| CliError::Compute(err.to_string()))?;
            buf
        }
    };
    let table = read_sweep_csv(raw.as_slice())
        .map_err(|err| CliError::Usage(format!("malformed sweep CSV: {err}")))?;
    let fit = classify(&table.samples(), &SelectConfig::default()).map_err(scaling_err)?;
    let mut bytes = serde_json::to_vec(&fit).map_err(|err| CliError::Compute(err.to_string()))?;
    bytes.push(b'\n');
    emit(&bytes, resolve_out(args.out.as_deref(), file).as_deref())
}

/// The exponent grid walked when `scan` gets no `--alphas`: two from each
/// side of the boundary, the boundary itself, and the reference case 0.5.
const DEFAULT_ALPHAS: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0];

fn parse_alphas(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .map(|item| {
            f64::from_str(item)
                .map_err(|_| CliError::Usage(format!("bad alpha `{item}` in --alphas")))
        })
        .collect()
}

fn cmd_scan(args: &ScanArgs, file: &FileConfig) -> Result<(), CliError> {
    let alphas = match resolve_opt(args.alphas.as_deref(), file.raw("alphas")) {
        Some(text) => parse_alphas(text)?,
        None => DEFAULT_ALPHAS.to_vec(),
    };
    let base = SweepSpec::regime_default();
    let spec = SweepSpec::new(
        resolve(args.r_lo, file.get("r-lo")?, base.r_lo()),
        resolve(args.r_hi, file.get("r-hi")?, base.r_hi()),
        resolve(args.points, file.get("points")?, base.points()),
        Spacing::Log,
        resolve_engine(args.engine.as_deref(), file, base.engine())?,
        resolve_interval(args.interval_lo, args.interval_hi, file, base.interval())?,
    )
    .map_err(scaling_err)?;
    let map = regime_scan(&alphas, &spec).map_err(scaling_err)?;
    let mut bytes = serde_json::to_vec(&map).map_err(|err| CliError::Compute(err.to_string()))?;
    bytes.push(b'\n');
    emit(&bytes, resolve_out(args.out.as_deref(), file).as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PendulumMode {
    Bottleneck,
    Rotation,
}

impl FromStr for PendulumMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bottleneck" => Ok(PendulumMode::Bottleneck),
            "rotation" => Ok(PendulumMode::Rotation),
            other => Err(format!(
                "unknown mode `{other}` (expected bottleneck or rotation)"
            )),
        }
    }
}

fn cmd_pendulum(args: &PendulumArgs, file: &FileConfig) -> Result<(), CliError> {
    let a = resolve(args.a, file.get("a")?, 2.0);
    let mode: PendulumMode = resolve_opt(args.mode.as_deref(), file.raw("mode"))
        .unwrap_or("bottleneck")
        .parse()
        .map_err(CliError::Usage)?;
    let engine = resolve_engine(args.engine.as_deref(), file, SweepEngine::Quadrature)?;
    if mode == PendulumMode::Rotation && engine == SweepEngine::Ode {
        return Err(CliError::Usage(
            "rotation mode supports the quadrature engine only".into(),
        ));
    }
    let base = SweepSpec::default();
    let cfg = RunConfig {
        phase: PhaseFn::pendulum_wave(a).map_err(|err| CliError::Usage(err.to_string()))?,
        param: ParamMap::Identity,
        r_lo: resolve(args.r_lo, file.get("r-lo")?, base.r_lo()),
        r_hi: resolve(args.r_hi, file.get("r-hi")?, base.r_hi()),
        points: resolve(args.points, file.get("points")?, base.points()),
        engine,
        interval: resolve_interval(
            args.interval_lo,
            args.interval_hi,
            file,
            default_bottleneck_interval(),
        )?,
        out: resolve_out(args.out.as_deref(), file),
        format: match resolve_opt(args.format.as_deref(), file.raw("format")) {
            Some(text) => parse_format(text)?,
            None => OutputFormat::Csv,
        },
    };
    let omega = resolve_opt(args.omega, file.get("omega")?);

    let quad = QuadratureConfig::default();
    let ode = OdeConfig::default();
    let samples: Vec<ScalingSample> = match (mode, omega) {
        (PendulumMode::Bottleneck, Some(omega)) => {
            let p =
                PendulumParams::new(a, omega).map_err(|err| CliError::Usage(err.to_string()))?;
            let engine_cfg = match engine {
                SweepEngine::Quadrature => EngineConfig::Quadrature(&quad),
                SweepEngine::Ode => EngineConfig::Ode(&ode),
            };
            let result = bottleneck_time(p, cfg.interval, engine_cfg).map_err(|err| {
                CliError::Compute(format!(
                    "pendulum bottleneck failed at r = {}: {err}",
                    omega - 1.0
                ))
            })?;
            vec![ScalingSample {
                r: omega - 1.0,
                t: result.time,
            }]
        }
        (PendulumMode::Rotation, Some(omega)) => {
            let p =
                PendulumParams::new(a, omega).map_err(|err| CliError::Usage(err.to_string()))?;
            let t = rotation_period(p, &quad).map_err(|err| {
                CliError::Compute(format!(
                    "pendulum rotation failed at r = {}: {err}",
                    omega - 1.0
                ))
            })?;
            vec![ScalingSample { r: omega - 1.0, t }]
        }
        (PendulumMode::Bottleneck, None) => {
            let spec = pendulum_spec(&cfg)?;
            bottleneck_sweep(a, &spec).map_err(scaling_err)?
        }
        (PendulumMode::Rotation, None) => {
            let spec = pendulum_spec(&cfg)?;
            let measured: Vec<Result<ScalingSample, CliError>> = spec
                .grid()
                .par_iter()
                .map(|&r| {
                    let p = PendulumParams::new(a, 1.0 + r)
                        .map_err(|err| CliError::Usage(err.to_string()))?;
                    rotation_period(p, &quad)
                        .map(|t| ScalingSample { r, t })
                        .map_err(|err| {
                            CliError::Compute(format!("pendulum rotation failed at r = {r}: {err}"))
                        })
                })
                .collect();
            measured.into_iter().collect::<Result<Vec<_>, _>>()?
        }
    };

    let label = match mode {
        PendulumMode::Bottleneck => Engine::from(engine),
        PendulumMode::Rotation => Engine::Quadrature,
    };
    let bytes = render_samples(&cfg, &samples, label)?;
    emit(&bytes, cfg.out.as_deref())
}

fn pendulum_spec(cfg: &RunConfig) -> Result<SweepSpec, CliError> {
    SweepSpec::new(
        cfg.r_lo,
        cfg.r_hi,
        cfg.points,
        Spacing::Log,
        cfg.engine,
        cfg.interval,
    )
    .map_err(scaling_err)
}

/// The three flows whose slowdown classes bracket the subject: sqrt(|x|)
/// saturates, |x| grows logarithmically, x^2 diverges as r^(-1/2).
fn cmd_table() -> Result<(), CliError> {
    let window = Interval::new(0.0, 1.0).map_err(|err| CliError::Compute(err.to_string()))?;
    let spec = SweepSpec::default().with_interval(window);
    let rows: [(&str, PhaseFn); 3] = [
        (
            "sqrt(|x|)",
            PhaseFn::power(0.5).map_err(|err| CliError::Compute(err.to_string()))?,
        ),
        (
            "|x|",
            PhaseFn::power(1.0).map_err(|err| CliError::Compute(err.to_string()))?,
        ),
        ("x^2", PhaseFn::Quadratic),
    ];
    let mut out = Vec::new();
    let mut push = |line: String| -> Result<(), CliError> {
        writeln!(out, "{line}").map_err(|err| CliError::Compute(err.to_string()))
    };
    push(format!("{:<10}  {:<12}  law", "field", "class"))?;
    for (label, phase) in rows {
        let field = VectorField1D::new(phase, ParamMap::Identity)
            .map_err(|err| CliError::Compute(err.to_string()))?;
        let samples = sweep(&field, &spec).map_err(scaling_err)?;
        let fit = classify(&samples, &SelectConfig::default()).map_err(scaling_err)?;
        let (class, law) = describe_fit(&fit);
        push(format!("{label:<10}  {class:<12}  {law}"))?;
    }
    emit(&out, None)
}

fn describe_fit(fit: &ghost::ScalingFit) -> (String, String) {
    match fit.model {
        ghost::ScalingModel::Constant => ("constant".into(), format!("t -> {:.3}", fit.prefactor)),
        ghost::ScalingModel::Logarithmic => (
            "logarithmic".into(),
            format!(
                "t ~ {:.3} ln(1/r) {:+.3}",
                fit.prefactor,
                fit.intercept.unwrap_or(0.0)
            ),
        ),
        ghost::ScalingModel::PowerLaw => {
            let p = fit.exponent.unwrap_or(f64::NAN);
            let class = if (p - 0.5).abs() <= 0.02 {
                "square-root".into()
            } else {
                format!("power {p:.3}")
            };
            (class, format!("t ~ {:.3} r^-{:.3}", fit.prefactor, p))
        }
    }
}

fn linspace(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    let last = f64::from(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * f64::from(i) / last
            }
        })
        .collect()
}

/// Figure data: rate curves r + |x|^a across the fold, and the pendulum
/// rate profiles omega -+ F_a at the critical drive omega = 1.
fn cmd_curves(args: &CurvesArgs, file: &FileConfig) -> Result<(), CliError> {
    let points = resolve(args.points, file.get("points")?, 201);
    if points < 2 {
        return Err(CliError::Usage("curves need at least 2 points".into()));
    }
    let out = resolve_out(args.out.as_deref(), file);
    let shapes = [0.5, 1.0, 2.0];
    let offsets = [-0.5, 0.0, 0.5];

    let mut bytes = Vec::new();
    let mut push = |line: String| -> Result<(), CliError> {
        writeln!(bytes, "{line}").map_err(|err| CliError::Compute(err.to_string()))
    };
    push("series,x,y".into())?;
    for a in shapes {
        let phase = PhaseFn::power(a).map_err(|err| CliError::Compute(err.to_string()))?;
        for r in offsets {
            for x in linspace(-1.5, 1.5, points) {
                let y = phase
                    .eval(x)
                    .map_err(|err| CliError::Compute(err.to_string()))?
                    + r;
                push(format!("power:{a}@r={r},{x:.16e},{y:.16e}"))?;
            }
        }
    }
    for a in shapes {
        for (tag, sign) in [("one-minus", -1.0), ("one-plus", 1.0)] {
            for theta in linspace(-std::f64::consts::PI, std::f64::consts::PI, points) {
                let f = wave(a, theta).map_err(|err| CliError::Compute(err.to_string()))?;
                let y = 1.0 + sign * f;
                push(format!("pendulum:{a}@{tag},{theta:.16e},{y:.16e}"))?;
            }
        }
    }
    emit(&bytes, out.as_deref())
}
