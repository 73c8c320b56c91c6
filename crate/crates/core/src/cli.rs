//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::{ExtremalFunction, Form};
use crate::radii::{CubicLeading, RadiusEquation};
use crate::verify::{self, Path, Record, Tag, TheoremCheck, Verdict, VerificationReport, ROOT_TOL};

/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "BOHR_SEED";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_ROOT: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bohr", version, about = "Certified Bohr-type radii on the polydisk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate certified roots of the radius equations.
    Radii(RadiiArgs),
    /// Check one theorem or lemma.
    Verify(VerifyArgs),
    /// Check theorems over grids of n, N and a0.
    Sweep(SweepArgs),
    /// Print the Taylor coefficients of an extremal function.
    SeriesDump(DumpArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RadiiArgs {
    /// psi, psi-prime, r-a0, cubic-a0, cubic-a0-sq, sqrt17, quartic, tilde, tilde-prime or all.
    #[arg(long, default_value = "all")]
    pub family: String,
    /// Dimensions, `lo..hi` inclusive.
    #[arg(long, default_value = "1")]
    pub n: IntRange,
    /// Cutoffs N, `lo..hi` inclusive.
    #[arg(long = "N", default_value = "1")]
    pub cutoff: IntRange,
    /// Values of a0, `start:step:end`.
    #[arg(long, default_value = "0")]
    pub a0: Grid,
    #[arg(long, default_value_t = ROOT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Closed,
    Series,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// 2.1a, 2.1b, 2.2a, 2.2b, 2.3i, 2.3j, 2.4m, 2.4n, lemma1, lemma2, lemma4 or lemma5.
    #[arg(long)]
    pub theorem: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 1)]
    pub cutoff: u32,
    #[arg(long, default_value_t = 0.0)]
    pub a0: f64,
    /// Relative offset from the root; defaults to 1e-3 below and 1e-2 for sharpness.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Check sharpness instead of the inequality.
    #[arg(long)]
    pub sharp: bool,
    #[arg(long, value_enum, default_value_t = PathArg::Closed)]
    pub path: PathArg,
    /// Truncation degree of the series path.
    #[arg(long = "K", default_value_t = 60)]
    pub degree: u32,
    /// Seed for sampled lemma checks; falls back to the BOHR_SEED variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random points per instance for the sampled lemma checks.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// A theorem tag or `all`.
    #[arg(long, default_value = "all")]
    pub theorem: String,
    #[arg(long, default_value = "1..3")]
    pub n: IntRange,
    #[arg(long = "N", default_value = "1..5")]
    pub cutoff: IntRange,
    #[arg(long, default_value = "0:0.25:0.75")]
    pub a0: Grid,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sharp: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value = "minus")]
    pub form: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "K")]
    pub degree: u32,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Inclusive integer range written `lo..hi` or as a single value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntRange(pub RangeInclusive<u32>);

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((lo, hi)) => (parse(lo)?, parse(hi.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(IntRange(lo..=hi))
    }
}

/// Grid written `start:step:end` or as a single value.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Grid(vec![parse(v)?])),
            [start, step, end] => {
                let (start, step, end) = (parse(start)?, parse(step)?, parse(end)?);
                if step.is_nan() || step <= 0.0 || end < start {
                    return Err(format!("empty grid `{s}`"));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                // rounding keeps 0.1·3 from printing as 0.30000000000000004
                Ok(Grid((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()))
            }
            _ => Err(format!("expected `start:step:end`, got `{s}`")),
        }
    }
}

/// Maps an error to its exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoRoot { .. } => EXIT_NO_ROOT,
        _ => EXIT_CONFIG,
    }
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn seed(explicit: Option<u64>) -> Result<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(verify::DEFAULT_SEED),
    }
}

fn open(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("write failed: {e}"))
}

trait Row: Serialize {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

impl Row for Record {
    const HEADER: &'static [&'static str] =
        &["theorem", "check", "n", "N", "a0", "x", "value", "tail", "bound", "verdict"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.theorem.to_string(),
            self.check.to_string(),
            self.n.to_string(),
            opt(&self.cutoff),
            self.a0.map_or_else(|| "-".into(), |a| format!("{a:.6}")),
            format!("{:.12}", self.x),
            format!("{:.12}", self.value),
            format!("{:.3e}", self.tail),
            format!("{:.12}", self.bound),
            self.verdict.to_string(),
        ]
    }
}

/// One row of `radii` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusRow {
    pub family: &'static str,
    pub n: usize,
    #[serde(rename = "N")]
    pub cutoff: Option<u32>,
    pub a0: Option<f64>,
    pub x: f64,
    pub r: f64,
    pub width: f64,
}

impl Row for RadiusRow {
    const HEADER: &'static [&'static str] = &["family", "n", "N", "a0", "x", "r", "width"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.family.to_string(),
            self.n.to_string(),
            opt(&self.cutoff),
            self.a0.map_or_else(|| "-".into(), |a| format!("{a:.6}")),
            format!("{:.12}", self.x),
            format!("{:.12}", self.r),
            format!("{:.1e}", self.width),
        ]
    }
}

fn emit<R: Row>(rows: &[R], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Table => {
            let cells: Vec<Vec<String>> = rows.iter().map(R::cells).collect();
            let widths: Vec<usize> = (0..R::HEADER.len())
                .map(|i| cells.iter().map(|c| c[i].len()).chain([R::HEADER[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
            };
            writeln!(out, "{}", line(R::HEADER.to_vec())).map_err(io_err)?;
            for c in &cells {
                writeln!(out, "{}", line(c.iter().map(String::as_str).collect())).map_err(io_err)?;
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut *out);
            for r in rows {
                w.serialize(r).map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Jsonl => {
            for r in rows {
                serde_json::to_writer(&mut *out, r).map_err(io_err)?;
                writeln!(out).map_err(io_err)?;
            }
        }
    }
    Ok(())
}

fn families(name: &str, cutoff: u32, a0: f64) -> Result<Vec<RadiusEquation>> {
    let all = [
        RadiusEquation::Psi { cutoff },
        RadiusEquation::PsiPrime { cutoff },
        RadiusEquation::RA0Closed { a0 },
        RadiusEquation::CubicA0 { a0, leading: CubicLeading::Cube },
        RadiusEquation::CubicA0 { a0, leading: CubicLeading::Square },
        RadiusEquation::Sqrt17Closed,
        RadiusEquation::Quartic,
        RadiusEquation::Tilde { cutoff },
        RadiusEquation::TildePrime { cutoff },
    ];
    if name == "all" {
        return Ok(all.to_vec());
    }
    all.into_iter()
        .find(|e| e.family_name() == name)
        .map(|e| vec![e])
        .ok_or_else(|| Error::InvalidParameter(format!("unknown family `{name}`")))
}

/// Certified radius table, one row per (family, n, N, a0).
pub fn radius_rows(args: &RadiiArgs) -> Result<Vec<RadiusRow>> {
    if args.tol < 1e-14 {
        return Err(Error::InvalidParameter(format!("tolerance {} is below 1e-14", args.tol)));
    }
    families(&args.family, 1, 0.0)?;
    let mut rows = Vec::new();
    for n in args.n.0.clone() {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut seen = Vec::new();
        for cutoff in args.cutoff.0.clone() {
            for &a0 in &args.a0.0 {
                for eq in families(&args.family, cutoff, a0)? {
                    if seen.contains(&eq) {
                        continue;
                    }
                    seen.push(eq);
                    let cert = eq.solve(args.tol)?;
                    let x = cert.midpoint();
                    rows.push(RadiusRow {
                        family: eq.family_name(),
                        n: n as usize,
                        cutoff: eq.cutoff(),
                        a0: eq.a0(),
                        x,
                        r: x / n as f64,
                        width: cert.width,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Runs one verification and returns its report.
pub fn verify_report(args: &VerifyArgs) -> Result<VerificationReport> {
    let tag: Tag = args.theorem.parse()?;
    if args.n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !tag.is_theorem() {
        return verify::check_lemma(tag, args.n, args.cutoff, seed(args.seed)?, args.samples);
    }
    let path = match args.path {
        PathArg::Closed => Path::Closed,
        PathArg::Series => Path::Series { degree: args.degree },
    };
    let check = TheoremCheck::new(tag, args.n, args.cutoff, args.a0).with_path(path);
    if args.sharp {
        check.check_sharp(args.eps.unwrap_or(1e-2))
    } else {
        check.check_below(args.eps.unwrap_or(1e-3))
    }
}

fn summary(report: &VerificationReport) -> String {
    let mut s = format!(
        "{} {} n={} {}: {} margin={:.3e}",
        report.theorem,
        report.check,
        report.n,
        report.cutoff.map(|c| format!("N={c}")).or(report.a0.map(|a| format!("a0={a}"))).unwrap_or_default(),
        report.verdict,
        report.margin,
    );
    if let Some(w) = report.witness {
        s.push_str(&format!(" witness a={w}"));
    }
    if report.heuristic {
        s.push_str(" (HEURISTIC)");
    }
    s
}

fn cmd_radii(args: &RadiiArgs) -> Result<i32> {
    let rows = radius_rows(args)?;
    let mut out = open(&args.out.output)?;
    emit(&rows, args.out.format, &mut out)?;
    out.flush().map_err(io_err)?;
    Ok(EXIT_PASS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let report = verify_report(args)?;
    let mut out = open(&args.out.output)?;
    emit(&report.records, args.out.format, &mut out)?;
    out.flush().map_err(io_err)?;
    eprintln!("{}", summary(&report));
    Ok(verdict_code(report.verdict))
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let tags: Vec<Tag> = if args.theorem == "all" { Tag::THEOREMS.to_vec() } else { vec![args.theorem.parse()?] };
    let mut records = Vec::new();
    let mut verdict = Verdict::Pass;
    for tag in tags {
        for n in args.n.0.clone() {
            let params: Vec<(u32, f64)> = if tag.uses_a0() {
                args.a0.0.iter().map(|&a| (1, a)).collect()
            } else if tag.uses_cutoff() {
                args.cutoff.0.clone().map(|c| (c, 0.0)).collect()
            } else {
                vec![(1, 0.0)]
            };
            for (cutoff, a0) in params {
                let check = TheoremCheck::new(tag, n as usize, cutoff, a0);
                let report = if args.sharp {
                    check.check_sharp(args.eps.unwrap_or(1e-2))?
                } else {
                    check.check_below(args.eps.unwrap_or(1e-3))?
                };
                eprintln!("{}", summary(&report));
                verdict = match (verdict, report.verdict) {
                    (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
                    (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
                    _ => Verdict::Pass,
                };
                records.extend(report.records);
            }
        }
    }
    let mut out = open(&args.out.output)?;
    emit(&records, args.out.format, &mut out)?;
    out.flush().map_err(io_err)?;
    Ok(verdict_code(verdict))
}

fn cmd_series_dump(args: &DumpArgs) -> Result<i32> {
    let form: Form = args.form.parse()?;
    let w = ExtremalFunction::new(args.a, form, args.n)?;
    let mut out = open(&args.output)?;
    w.to_series(args.degree).write_dump(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(EXIT_PASS)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Radii(a) => cmd_radii(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::SeriesDump(a) => cmd_series_dump(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
