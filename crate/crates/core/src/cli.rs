//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 computation failure,
//! 3 verification failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ci_engine::{self, CiEstimate, Quantity, ThresholdOptions};
use crate::error::Error;
use crate::lattice::{build_torus, BoundarySector, GaugeConfig};
use crate::majorana::{build_hamiltonian, spectrum, Hopping, MajoranaModel};
use crate::stabilizer_oracle::{
    color_code, exact_ci, find_crossing, parse_code, renyi_ci, rotated_surface, single_qubit, toric_code,
    ChannelKind, PauliChannel, StabilizerCode,
};
use crate::verify::{run_suite, Level, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TORIC_CI_WORKERS";
/// Version of the CSV/JSON output layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "quantity,lx,ly,p,mean,std_err,n_samples,n_clamped,seed";

#[derive(Debug, Parser)]
#[command(name = "toric-ci", version, about = "Coherent information of the decohered toric code")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a quantity over lattice sizes and error rates.
    Sweep(SweepArgs),
    /// Locate the crossing point between two lattice sizes.
    Threshold(ThresholdArgs),
    /// Run the cross-oracle verification suites.
    Verify(VerifyArgs),
    /// Spectrum of the clean Majorana model against hopping.
    Spectrum(SpectrumArgs),
    /// Exact coherent information of small stabilizer codes.
    StabilizerCi(StabilizerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HoppingArg {
    T1,
    T2,
}

impl From<HoppingArg> for Hopping {
    fn from(h: HoppingArg) -> Self {
        match h {
            HoppingArg::T1 => Hopping::T1,
            HoppingArg::T2 => Hopping::T2,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_quantity)]
    pub quantity: Quantity,
    /// Lattice sizes, e.g. `4,8` or `4x6,8x8`.
    #[arg(long = "l", value_parser = parse_dims)]
    pub dims: Dims,
    /// Error rates as `min:max:steps` (inclusive) or a comma list.
    #[arg(long, value_parser = parse_grid)]
    pub p: Grid,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Hopping used for the fugacity.
    #[arg(long, value_enum, default_value_t = HoppingArg::T1)]
    pub hopping: HoppingArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = parse_quantity, default_value = "ci")]
    pub quantity: Quantity,
    /// One size (Renyi-2) or two sizes.
    #[arg(long = "l", value_parser = parse_dims)]
    pub dims: Dims,
    #[arg(long, default_value_t = 0.08)]
    pub p_lo: f64,
    #[arg(long, default_value_t = 0.14)]
    pub p_hi: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 16)]
    pub max_probes: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value_t = LevelArg::Fast)]
    pub level: LevelArg,
    /// Debug: flip one intra-cell coupling sign to exercise the suite.
    #[arg(long)]
    pub mutate_intra_cell: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Lattice size, e.g. `16` or `8x12`.
    #[arg(long = "l", value_parser = parse_dims)]
    pub dims: Dims,
    #[arg(long, default_value = "PP", value_parser = parse_sector)]
    pub sector: BoundarySector,
    /// Hopping values as `min:max:steps` or a comma list.
    #[arg(long, value_parser = parse_grid)]
    pub t: Grid,
    /// Emit only the smallest |lambda| per hopping value.
    #[arg(long)]
    pub min_only: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StabilizerArgs {
    /// Codes: single, toric-LXxLY, surface-D, color-D or file:PATH.
    #[arg(long, value_delimiter = ',', required = true)]
    pub code: Vec<String>,
    #[arg(long, value_parser = parse_channel)]
    pub channel: ChannelKind,
    #[arg(long, value_parser = parse_grid)]
    pub p: Grid,
    /// Renyi index 2 or 3 instead of the von Neumann CI.
    #[arg(long)]
    pub renyi: Option<u32>,
    /// With two codes, also report where their curves cross.
    #[arg(long)]
    pub crossing: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Lattice sizes as `(lx, ly)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dims(pub Vec<(usize, usize)>);

/// A list of parameter values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid(pub Vec<f64>);

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_channel(s: &str) -> Result<ChannelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sector(s: &str) -> Result<BoundarySector, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    let one = |item: &str| -> Result<(usize, usize), String> {
        let num = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad lattice size {item:?}"));
        let (lx, ly) = match item.split_once('x') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => {
                let l = num(item)?;
                (l, l)
            }
        };
        if lx == 0 || ly == 0 {
            return Err(format!("lattice size {item:?} must be positive"));
        }
        Ok((lx, ly))
    };
    let dims = s.split(',').map(one).collect::<Result<Vec<_>, _>>()?;
    Ok(Dims(dims))
}

/// Parses `min:max:steps` (endpoints included) or a comma list.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, steps] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count {steps:?}"))?;
            if steps == 0 || (steps == 1 && lo != hi) || hi < lo {
                return Err(format!("invalid grid {s:?}"));
            }
            if steps == 1 {
                vec![lo]
            } else {
                (0..steps)
                    .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                    .collect()
            }
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected min:max:steps or a comma list, got {s:?}")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite value in {s:?}"));
    }
    Ok(Grid(values))
}

/// One output row, in CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub lx: usize,
    pub ly: usize,
    pub p: f64,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub n_clamped: usize,
    pub seed: u64,
}

impl From<&CiEstimate> for Row {
    fn from(e: &CiEstimate) -> Self {
        Row {
            quantity: e.quantity.to_string(),
            lx: e.lx,
            ly: e.ly,
            p: e.p,
            mean: e.mean,
            std_err: e.std_err,
            n_samples: e.n_samples,
            n_clamped: e.n_clamped,
            seed: e.seed,
        }
    }
}

#[derive(Serialize)]
struct JsonDoc<'a, C: Serialize, R: Serialize> {
    version: &'static str,
    schema: u32,
    command: &'static str,
    config: &'a C,
    wall_time_s: f64,
    rows: R,
}

/// Failure of a command, tagged with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoBracket { .. }
            | Error::ClampBudgetExceeded { .. }
            | Error::DegenerateSectors
            | Error::NotAntisymmetric { .. }
            | Error::OddDimension(_) => EXIT_COMPUTE,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_COMPUTE,
            message: format!("I/O error: {e}"),
        }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: msg.into(),
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.workers {
        Some(0) => Err(config_error("worker count must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(&cli.command, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(config_error(format!("cannot start {n} workers: {e}"))),
        },
        None => dispatch(&cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Threshold(a) => cmd_threshold(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::StabilizerCi(a) => cmd_stabilizer_ci(a, out, err),
    }
}

/// Runs `f` against the output file, or against `out` when no path is set.
fn with_output(path: &Option<PathBuf>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(create(p)?);
            f(&mut w)?;
            w.flush()
        }
        None => f(out),
    }
}

fn create(p: &Path) -> io::Result<File> {
    File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}

fn write_rows<C: Serialize>(
    w: &mut dyn Write,
    format: Format,
    command: &'static str,
    config: &C,
    started: Instant,
    rows: &[Row],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            for r in rows {
                wr.serialize(r)?;
            }
            if rows.is_empty() {
                wr.write_record(CSV_HEADER.split(','))?;
            }
            wr.flush()
        }
        Format::Json => {
            let doc = JsonDoc {
                version: env!("CARGO_PKG_VERSION"),
                schema: SCHEMA_VERSION,
                command,
                config,
                wall_time_s: started.elapsed().as_secs_f64(),
                rows,
            };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
    }
}

fn check_rates(ps: &[f64], hi: f64) -> Result<(), Failure> {
    if ps.is_empty() {
        return Err(config_error("empty p grid"));
    }
    match ps.iter().find(|p| !(0.0..=hi).contains(*p)) {
        Some(p) => Err(config_error(format!("error rate {p} outside [0, {hi}]"))),
        None => Ok(()),
    }
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Outcome {
    let started = Instant::now();
    check_rates(&a.p.0, 0.5)?;
    if a.samples == 0 {
        return Err(config_error("--samples must be at least 1"));
    }
    let mut dims = a.dims.0.clone();
    dims.sort_unstable();
    dims.dedup();
    let mut ps = a.p.0.clone();
    ps.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(dims.len() * ps.len());
    for &(lx, ly) in &dims {
        let lat = build_torus(lx, ly)?;
        for &p in &ps {
            let est = match a.quantity {
                Quantity::Fugacity => ci_engine::vortex_fugacity_with(&lat, p, a.samples, a.seed, a.hopping.into())?,
                q => ci_engine::estimate(q, &lat, p, a.samples, a.seed)?,
            };
            rows.push(Row::from(&est));
        }
    }
    with_output(&a.output, out, |w| write_rows(w, a.format, "sweep", a, started, &rows))?;
    Ok(EXIT_OK)
}

pub fn cmd_threshold(a: &ThresholdArgs, out: &mut dyn Write) -> Outcome {
    let (l0, l1) = match (a.quantity, a.dims.0.as_slice()) {
        (Quantity::Renyi2, [d]) => (*d, *d),
        (_, [d0, d1]) => (*d0, *d1),
        (Quantity::Renyi2, _) => return Err(config_error("renyi2 threshold takes one or two sizes")),
        _ => return Err(config_error("threshold needs exactly two lattice sizes")),
    };
    if a.samples == 0 {
        return Err(config_error("--samples must be at least 1"));
    }
    if !(a.tol > 0.0) {
        return Err(config_error("--tol must be positive"));
    }
    let lat0 = build_torus(l0.0, l0.1)?;
    let lat1 = build_torus(l1.0, l1.1)?;
    let opts = ThresholdOptions {
        p_lo: a.p_lo,
        p_hi: a.p_hi,
        samples: a.samples,
        seed: a.seed,
        tol: a.tol,
        max_probes: a.max_probes,
    };
    let report = ci_engine::find_threshold((&lat0, &lat1), a.quantity, &opts)?;
    with_output(&a.output, out, |w| match a.format {
        ReportFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                version: &'static str,
                schema: u32,
                config: &'a ThresholdArgs,
                report: &'a ci_engine::ThresholdReport,
            }
            let doc = Doc {
                version: env!("CARGO_PKG_VERSION"),
                schema: SCHEMA_VERSION,
                config: a,
                report: &report,
            };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        ReportFormat::Text => {
            writeln!(w, "quantity   {}", report.quantity)?;
            writeln!(w, "estimate   {:.6} +- {:.6}", report.estimate, report.std_err)?;
            writeln!(w, "bracket    [{:.6}, {:.6}]", report.bracket.0, report.bracket.1)?;
            writeln!(w, "stop       {:?}", report.stop)?;
            writeln!(w, "probes     p, difference, error")?;
            for pr in &report.probes {
                writeln!(w, "  {:.6}  {:+.6}  {:.6}", pr.p, pr.diff, pr.diff_err)?;
            }
            Ok(())
        }
    })?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let level = match a.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let started = Instant::now();
    let results = run_suite(&VerifyOptions {
        level,
        mutate_intra_cell: a.mutate_intra_cell,
    });
    let mut failed = 0;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!r.passed);
        writeln!(out, "{tag}  {}: {}", r.name, r.detail)?;
    }
    writeln!(
        out,
        "{} of {} checks passed in {:.1} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    )?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

pub fn cmd_spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Outcome {
    let [(lx, ly)] = a.dims.0.as_slice() else {
        return Err(config_error("spectrum takes a single lattice size"));
    };
    if a.t.0.is_empty() {
        return Err(config_error("empty hopping grid"));
    }
    let lat = build_torus(*lx, *ly)?;
    let eta = GaugeConfig::uniform(&lat);
    let mut table = Vec::with_capacity(a.t.0.len());
    for &t in &a.t.0 {
        let h = build_hamiltonian(&MajoranaModel::new(&lat, t, &eta, a.sector))?;
        table.push((t, spectrum(&h)));
    }
    with_output(&a.output, out, |w| {
        let mut wr = csv::Writer::from_writer(w);
        let n = table.first().map_or(0, |r| r.1.len());
        let mut header = vec!["t".to_string()];
        if a.min_only {
            header.push("min_abs_lambda".into());
        } else {
            header.extend((1..=n).map(|i| format!("lambda_{i}")));
        }
        wr.write_record(&header)?;
        for (t, sp) in &table {
            let mut rec = vec![t.to_string()];
            if a.min_only {
                rec.push(sp.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())).to_string());
            } else {
                rec.extend(sp.iter().map(f64::to_string));
            }
            wr.write_record(&rec)?;
        }
        wr.flush()
    })?;
    Ok(EXIT_OK)
}

/// Resolves a built-in code name or `file:PATH` fixture.
pub fn code_by_name(name: &str) -> Result<StabilizerCode, Failure> {
    if let Some(path) = name.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{path}: {e}")))?;
        return Ok(parse_code(&text)?);
    }
    let distance = |s: &str| s.parse::<usize>().map_err(|_| config_error(format!("bad distance in {name:?}")));
    Ok(match name.split_once('-') {
        _ if name == "single" => single_qubit(),
        Some(("surface", d)) => rotated_surface(distance(d)?)?,
        Some(("color", d)) => color_code(distance(d)?)?,
        Some(("toric", dims)) => match parse_dims(dims).map_err(config_error)?.0.as_slice() {
            [(lx, ly)] => toric_code(*lx, *ly)?,
            _ => return Err(config_error(format!("bad toric size in {name:?}"))),
        },
        _ => return Err(config_error(format!("unknown code {name:?}"))),
    })
}

pub fn cmd_stabilizer_ci(a: &StabilizerArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let started = Instant::now();
    check_rates(&a.p.0, 1.0)?;
    if let Some(n) = a.renyi {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedRenyiIndex(n).into());
        }
    }
    let codes = a.code.iter().map(|c| code_by_name(c)).collect::<Result<Vec<_>, _>>()?;
    let label = match a.renyi {
        Some(n) => format!("renyi{n}"),
        None => "ci".into(),
    };
    let mut rows = Vec::new();
    for code in &codes {
        for &p in &a.p.0 {
            let ch = PauliChannel::new(a.channel, p)?;
            let value = match a.renyi {
                Some(n) => renyi_ci(code, &ch, n)?,
                None => exact_ci(code, &ch)?,
            };
            rows.push(Row {
                quantity: format!("{label}:{}:{}", code.name(), a.channel),
                lx: code.n_phys(),
                ly: code.k_logical(),
                p,
                mean: value,
                std_err: 0.0,
                n_samples: 0,
                n_clamped: 0,
                seed: 0,
            });
        }
    }
    with_output(&a.output, out, |w| write_rows(w, a.format, "stabilizer-ci", a, started, &rows))?;
    if a.crossing {
        let [c0, c1] = codes.as_slice() else {
            return Err(config_error("--crossing needs exactly two codes"));
        };
        let lo = a.p.0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a.p.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = find_crossing(c0, c1, a.channel, lo, hi, 1e-7)?;
        writeln!(err, "crossing {} / {}: p = {p:.6}", c0.name(), c1.name())?;
    }
    Ok(EXIT_OK)
}
