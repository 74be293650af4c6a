//! Config ingestion, orchestration and table output for the `lvanish` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_fundamental_discriminant, Rational};
use crate::gamma0::build_context;
use crate::localpoly::{nonconst_sum, weighted_poly, zagier_sum, zagier_zero_poly, HeckeSpec, LocalPolyParams};
use crate::maassnum::{check_hecke_relation, ComplexPoint, MaassEvalConfig, MaassForm};
use crate::qforms::GL2Matrix;
use crate::vanish::{decide, D0Choice, VanishJob, VanishReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Computation(_) => EXIT_COMPUTATION,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Computation(e.to_string())
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed rational {0:?}")]
pub struct ParseRationalError(pub String);

/// `p/q` in lowest terms, integers without `/1`.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `p`, `p/q`, and the Unicode minus sign.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim().replace('\u{2212}', "-");
    let int = |x: &str| {
        if x.is_empty() || x.starts_with('+') || x.contains(char::is_whitespace) {
            return Err(err());
        }
        BigInt::from_str(x).map_err(|_| err())
    };
    match t.split_once('/') {
        None => Ok(Rational::from_integer(int(&t)?)),
        Some((p, q)) => {
            let q = int(q)?;
            if q.is_zero() || q.is_negative() {
                return Err(err());
            }
            Ok(Rational::new(int(p)?, q))
        }
    }
}

/// TOML integers are 64-bit; larger values go in strings.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BigIntValue {
    Int(i64),
    Str(String),
}

impl BigIntValue {
    pub fn to_bigint(&self) -> Result<BigInt, CliError> {
        match self {
            BigIntValue::Int(i) => Ok(BigInt::from(*i)),
            BigIntValue::Str(s) => BigInt::from_str(s.trim()).map_err(|_| invalid(format!("not an integer: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Decide,
    Table,
    Zagier,
    MaassCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HeckeEntry {
    pub p: u64,
    pub shift: i64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HeckeFile {
    pub hecke: Vec<HeckeEntry>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RangeFilter {
    pub min: BigIntValue,
    pub max: BigIntValue,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ZagierSection {
    #[serde(default)]
    pub deltas: Vec<BigIntValue>,
    #[serde(default)]
    pub points: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaassSection {
    pub a_bound: u64,
    #[serde(default = "default_window")]
    pub b_window: u32,
    /// `[re, im]` pairs.
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub hecke_prime: Option<u64>,
}

fn default_window() -> u32 {
    30
}

/// Schema of the job file.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "D0", default)]
    pub d0: Option<BigIntValue>,
    #[serde(rename = "D0_choices", default)]
    pub d0_choices: Vec<BigIntValue>,
    #[serde(rename = "D", default)]
    pub d: Vec<BigIntValue>,
    #[serde(rename = "D_range", default)]
    pub d_range: Option<RangeFilter>,
    #[serde(default)]
    pub hecke: Vec<HeckeEntry>,
    /// Relative to the config file.
    #[serde(default)]
    pub hecke_file: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub base_point: Option<String>,
    #[serde(default)]
    pub points: Vec<String>,
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default)]
    pub zagier: Option<ZagierSection>,
    #[serde(default)]
    pub maass: Option<MaassSection>,
}

fn default_mode() -> Mode {
    Mode::Decide
}

fn default_format() -> Format {
    Format::Text
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = toml::from_str(text).map_err(invalid)?;
        if cfg.k < 2 {
            return Err(invalid(format!("k must be at least 2, got {}", cfg.k)));
        }
        if cfg.n == 0 {
            return Err(invalid("N must be positive"));
        }
        if cfg.d0.is_some() && !cfg.d0_choices.is_empty() {
            return Err(invalid("give either D0 or D0_choices, not both"));
        }
        if cfg.d0.is_none() && cfg.d0_choices.is_empty() && cfg.mode != Mode::Zagier {
            return Err(invalid("missing D0 or D0_choices"));
        }
        if !cfg.hecke.is_empty() && cfg.hecke_file.is_some() {
            return Err(invalid("give either hecke or hecke_file, not both"));
        }
        for p in cfg.points.iter().chain(cfg.base_point.iter()) {
            parse_rational(p).map_err(invalid)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(f) = &cfg.hecke_file {
            let full = path.parent().unwrap_or(Path::new(".")).join(f);
            let data = std::fs::read_to_string(&full).map_err(|e| invalid(format!("{}: {e}", full.display())))?;
            let hf: HeckeFile = toml::from_str(&data).map_err(invalid)?;
            cfg.hecke = hf.hecke;
            cfg.hecke_file = None;
        }
        Ok(cfg)
    }

    pub fn hecke_spec(&self) -> Result<HeckeSpec, CliError> {
        let spec = HeckeSpec::new(self.hecke.iter().map(|h| (h.p, h.shift)).collect());
        spec.validate(self.n).map_err(invalid)?;
        Ok(spec)
    }

    pub fn d0_choice(&self) -> Result<D0Choice, CliError> {
        match &self.d0 {
            Some(d0) => Ok(D0Choice::Fixed(d0.to_bigint()?)),
            None => Ok(D0Choice::Auto(
                self.d0_choices
                    .iter()
                    .map(|v| v.to_bigint())
                    .collect::<Result<_, _>>()?,
            )),
        }
    }

    /// Listed `D`s, then fundamental discriminants of the right sign from `D_range`.
    pub fn candidates(&self) -> Result<Vec<BigInt>, CliError> {
        let mut out: Vec<BigInt> = self.d.iter().map(|v| v.to_bigint()).collect::<Result<_, _>>()?;
        if let Some(r) = &self.d_range {
            let (lo, hi) = (r.min.to_bigint()?, r.max.to_bigint()?);
            let mut d = lo;
            while d <= hi {
                let sign_ok = if self.k.is_multiple_of(2) {
                    d.is_positive()
                } else {
                    d.is_negative()
                };
                if sign_ok && is_fundamental_discriminant(&d) && !out.contains(&d) {
                    out.push(d.clone());
                }
                d += 1;
            }
        }
        Ok(out)
    }

    pub fn parsed_points(&self) -> Result<Vec<Rational>, CliError> {
        self.points.iter().map(|p| parse_rational(p).map_err(invalid)).collect()
    }

    pub fn base(&self) -> Result<Rational, CliError> {
        match &self.base_point {
            Some(s) => parse_rational(s).map_err(invalid),
            None => Ok(Rational::zero()),
        }
    }
}

/// Rows keyed by a label, columns by evaluation point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputTable {
    pub row_key: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

impl OutputTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let head: Vec<&str> = std::iter::once(self.row_key.as_str())
            .chain(self.columns.iter().map(String::as_str))
            .collect();
        s.push_str(&head.join(","));
        s.push('\n');
        for (label, cells) in &self.rows {
            s.push_str(label);
            for c in cells {
                s.push(',');
                s.push_str(c);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = std::iter::once(self.row_key.len())
            .chain(self.columns.iter().map(String::len))
            .collect();
        for (label, cells) in &self.rows {
            widths[0] = widths[0].max(label.len());
            for (i, c) in cells.iter().enumerate() {
                widths[i + 1] = widths[i + 1].max(c.len());
            }
        }
        let line = |cells: Vec<&str>| -> String {
            let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut s = line(
            std::iter::once(self.row_key.as_str())
                .chain(self.columns.iter().map(String::as_str))
                .collect(),
        );
        for (label, cells) in &self.rows {
            s.push_str(&line(
                std::iter::once(label.as_str())
                    .chain(cells.iter().map(String::as_str))
                    .collect(),
            ));
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
            Format::Json => serde_json::to_string_pretty(self).expect("serializable") + "\n",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lvanish", about = "Decide vanishing of twisted central L-value products")]
pub struct Args {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Comma-separated rationals, e.g. `1,1/2,4/5,0`.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<String>>,
    /// Largest denominator among the Hecke leaves of any evaluation point.
    #[arg(long)]
    pub max_denominator: Option<BigInt>,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn job_from(cfg: &JobConfig, bound: Option<BigInt>) -> Result<VanishJob, CliError> {
    let mut job = VanishJob::new(cfg.k, cfg.n, cfg.d0_choice()?, cfg.candidates()?, cfg.hecke_spec()?);
    job.base_point = cfg.base()?;
    job.extra_points = cfg.parsed_points()?;
    job.max_denominator = bound;
    Ok(job)
}

fn rejected_lines(r: &VanishReport) -> String {
    let mut s = String::new();
    for rej in &r.rejected {
        let _ = writeln!(s, "rejected D={}: {}", rej.d, rej.reason);
    }
    s
}

fn render_decide(r: &VanishReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("serializable") + "\n",
        Format::Csv => {
            let mut s = String::from("D,D0,verdict,rounds\n");
            for rep in &r.reports {
                let _ = writeln!(s, "{},{},{},{}", rep.d, rep.d0, rep.verdict, rep.rounds_used);
            }
            s
        }
        Format::Text => {
            let mut s = format!("k={} N={}  (Atkin-Lehner conditions assumed)\n", r.k, r.n);
            for rep in &r.reports {
                let _ = writeln!(
                    s,
                    "D={} D0={}: {} after {} round(s)",
                    rep.d, rep.d0, rep.verdict, rep.rounds_used
                );
                for e in &rep.table {
                    let _ = writeln!(s, "  P({}) = {}", render_rational(&e.point), render_rational(&e.value));
                }
            }
            s + &rejected_lines(r)
        }
    }
}

/// `P(x)` for every candidate at the configured points, or at the generator images `gamma_i . 0`.
pub fn value_table(cfg: &JobConfig, bound: Option<BigInt>) -> Result<(OutputTable, VanishReport), CliError> {
    let points = if cfg.points.is_empty() {
        build_context(cfg.n).map_err(failed)?.first_round_points()
    } else {
        cfg.parsed_points()?
    };
    let mut job = job_from(cfg, bound)?;
    job.extra_points.clear();
    let mut report = VanishReport {
        k: cfg.k,
        n: cfg.n,
        reports: Vec::new(),
        rejected: Vec::new(),
        atkin_lehner_asserted: true,
    };
    let mut rows = Vec::new();
    for d in &job.candidates {
        let d0 = match &job.d0 {
            D0Choice::Fixed(d0) => Some(d0.clone()),
            D0Choice::Auto(c) => crate::vanish::select_d0(cfg.n, d, c),
        };
        let params = match d0
            .ok_or_else(|| format!("no configured D0 matches D = {d}"))
            .and_then(|d0| LocalPolyParams::new(cfg.k, cfg.n, d.clone(), d0).map_err(|e| e.to_string()))
        {
            Ok(p) => p,
            Err(reason) => {
                report.rejected.push(crate::vanish::Rejection { d: d.clone(), reason });
                continue;
            }
        };
        let ev = crate::vanish::Evaluator::with_bound(
            params,
            job.hecke.clone(),
            &job.base_point,
            job.max_denominator.clone(),
        )
        .map_err(failed)?;
        let cells: Result<Vec<String>, CliError> = points
            .iter()
            .map(|x| ev.p_relative(x).map(|v| render_rational(&v)).map_err(failed))
            .collect();
        rows.push((d.to_string(), cells?));
    }
    let table = OutputTable {
        row_key: "D".into(),
        columns: points.iter().map(render_rational).collect(),
        rows,
    };
    Ok((table, report))
}

/// Weighted polynomials and values at each `x0` for the first candidate, and
/// `p_{N,Delta}` at the configured points for each listed `Delta`.
pub fn zagier_tables(cfg: &JobConfig) -> Result<Vec<(String, OutputTable)>, CliError> {
    let points = cfg.parsed_points()?;
    let mut out = Vec::new();
    let cands = cfg.candidates()?;
    if let (Some(d), Ok(D0Choice::Fixed(d0))) = (cands.first(), cfg.d0_choice()) {
        let params = LocalPolyParams::new(cfg.k, cfg.n, d.clone(), d0).map_err(invalid)?;
        let mut rows = Vec::new();
        for x in &points {
            let poly = weighted_poly(&params, x).map_err(failed)?;
            let v = nonconst_sum(&params, x).map_err(failed)?;
            rows.push((render_rational(x), vec![poly.to_string(), render_rational(&v)]));
        }
        out.push((
            format!(
                "weighted sums, k={} N={} D={} D0={}",
                cfg.k,
                cfg.n,
                params.d.value(),
                params.d0.value()
            ),
            OutputTable {
                row_key: "x0".into(),
                columns: vec!["polynomial".into(), "value".into()],
                rows,
            },
        ));
    }
    if let Some(z) = &cfg.zagier {
        let zp: Vec<Rational> = z
            .points
            .iter()
            .map(|p| parse_rational(p).map_err(invalid))
            .collect::<Result<_, _>>()?;
        let mut rows = Vec::new();
        for dv in &z.deltas {
            let delta = dv.to_bigint()?;
            let cells: Result<Vec<String>, CliError> = zp
                .iter()
                .map(|x| {
                    zagier_sum(cfg.n, &delta, x)
                        .map(|v| render_rational(&v))
                        .map_err(failed)
                })
                .collect();
            let mut cells = cells?;
            let (p0, _, _) = zagier_zero_poly(cfg.n, &delta).map_err(failed)?;
            cells.push(p0.to_string());
            rows.push((delta.to_string(), cells));
        }
        let mut columns: Vec<String> = zp.iter().map(render_rational).collect();
        columns.push("p0".into());
        out.push((
            format!("unweighted sums, N={}", cfg.n),
            OutputTable {
                row_key: "Delta".into(),
                columns,
                rows,
            },
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualLine {
    pub check: String,
    pub point: [f64; 2],
    pub residual: f64,
    pub relative: f64,
}

pub fn maass_residuals(cfg: &JobConfig) -> Result<Vec<ResidualLine>, CliError> {
    let m = cfg
        .maass
        .as_ref()
        .ok_or_else(|| invalid("maass-check needs a [maass] section"))?;
    let d = cfg
        .candidates()?
        .first()
        .cloned()
        .ok_or_else(|| invalid("maass-check needs a D"))?;
    let d0 = match cfg.d0_choice()? {
        D0Choice::Fixed(d0) => d0,
        D0Choice::Auto(c) => crate::vanish::select_d0(cfg.n, &d, &c).ok_or_else(|| invalid("no matching D0"))?,
    };
    let params = LocalPolyParams::new(cfg.k, cfg.n, d, d0).map_err(invalid)?;
    let mc = MaassEvalConfig::new(params, m.a_bound, m.b_window).map_err(invalid)?;
    let form = MaassForm::new(mc.clone()).map_err(failed)?;
    let ctx = build_context(cfg.n).map_err(failed)?;
    let gens: Vec<GL2Matrix> = ctx.generators.iter().filter(|g| !g.m21.is_zero()).cloned().collect();
    let mut out = Vec::new();
    for &[re, im] in &m.points {
        let z = ComplexPoint::new(re, im).map_err(invalid)?;
        let scale = form.eval(z).map_err(failed)?.value.norm();
        let rel = |r: f64| if scale > 0.0 { r / scale } else { r };
        for (i, g) in gens.iter().enumerate() {
            let r = form.check_modularity(g, z).map_err(failed)?;
            out.push(ResidualLine {
                check: format!("modularity g{}", i + 1),
                point: [re, im],
                residual: r,
                relative: rel(r),
            });
        }
        let r = form.check_fricke(z).map_err(failed)?;
        out.push(ResidualLine {
            check: "fricke".into(),
            point: [re, im],
            residual: r,
            relative: rel(r),
        });
    }
    if let Some(p) = m.hecke_prime {
        let zs: Vec<ComplexPoint> = m
            .points
            .iter()
            .map(|&[re, im]| ComplexPoint::new(re, im))
            .collect::<Result<_, _>>()
            .map_err(invalid)?;
        let r = check_hecke_relation(&mc, p, &zs).map_err(failed)?;
        let scale = zs
            .iter()
            .map(|&z| form.hecke_tp(p, z).map(|v| v.norm()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(failed)?;
        let s = scale.into_iter().fold(f64::INFINITY, f64::min);
        out.push(ResidualLine {
            check: format!("hecke T_{p}"),
            point: [f64::NAN, f64::NAN],
            residual: r,
            relative: r / s,
        });
    }
    Ok(out)
}

fn render_residuals(lines: &[ResidualLine], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(lines).expect("serializable") + "\n",
        Format::Csv => {
            let mut s = String::from("check,re,im,residual,relative\n");
            for l in lines {
                let _ = writeln!(
                    s,
                    "{},{},{},{:e},{:e}",
                    l.check, l.point[0], l.point[1], l.residual, l.relative
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for l in lines {
                let _ = writeln!(
                    s,
                    "{:<14} z=({}, {})  residual {:.3e}  relative {:.3e}",
                    l.check, l.point[0], l.point[1], l.residual, l.relative
                );
            }
            s
        }
    }
}

/// Runs a parsed command line and returns the report text.
pub fn execute(args: &Args) -> Result<String, CliError> {
    let mut cfg = JobConfig::load(&args.config)?;
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(p) = &args.points {
        for s in p {
            parse_rational(s).map_err(invalid)?;
        }
        cfg.points = p.clone();
    }
    let bound = if args.force { None } else { args.max_denominator.clone() };
    match cfg.mode {
        Mode::Decide => {
            let job = job_from(&cfg, bound)?;
            let report = decide(&job).map_err(failed)?;
            Ok(render_decide(&report, cfg.format))
        }
        Mode::Table => {
            let (table, report) = value_table(&cfg, bound)?;
            let mut s = table.render(cfg.format);
            if cfg.format == Format::Text {
                s += &rejected_lines(&report);
            } else {
                for r in &report.rejected {
                    eprintln!("rejected D={}: {}", r.d, r.reason);
                }
            }
            Ok(s)
        }
        Mode::Zagier => {
            let tables = zagier_tables(&cfg)?;
            let mut s = String::new();
            for (title, t) in tables {
                if cfg.format == Format::Text {
                    let _ = writeln!(s, "# {title}");
                }
                s += &t.render(cfg.format);
            }
            Ok(s)
        }
        Mode::MaassCheck => Ok(render_residuals(&maass_residuals(&cfg)?, cfg.format)),
    }
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match execute(&args) {
        Ok(out) => match &args.output {
            Some(path) => match std::fs::write(path, out) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    EXIT_COMPUTATION
                }
            },
            None => {
                print!("{out}");
                EXIT_OK
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;

    #[test]
    fn rational_rendering() {
        assert_eq!(render_rational(&rat(-25, 343)), "-25/343");
        assert_eq!(render_rational(&rat(0, 5)), "0");
        assert_eq!(render_rational(&rat(12, 1)), "12");
        assert_eq!(parse_rational("17272/25").unwrap(), rat(17272, 25));
        assert_eq!(parse_rational("\u{2212}25/343").unwrap(), rat(-25, 343));
        assert_eq!(parse_rational(" 4/6 ").unwrap(), rat(2, 3));
        for bad in ["", "1/0", "a", "1/-2", "1//2", "+3", "1 /2", "/3"] {
            assert!(parse_rational(bad).is_err(), "{bad:?}");
        }
    }

    proptest! {
        #[test]
        fn rational_round_trip(p in any::<i64>(), q in 1i64..i64::MAX) {
            let r = rat(p, q);
            prop_assert_eq!(parse_rational(&render_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn config_validation() {
        assert!(JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nD = [28]\n").is_ok());
        assert!(JobConfig::from_toml("k = 2\nN = 9\nD = [28]\n").is_err());
        assert!(JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nD0_choices = [5]\n").is_err());
        assert!(JobConfig::from_toml("k = 1\nN = 9\nD0 = 13\n").is_err());
        assert!(JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nbogus = 1\n").is_err());
        assert!(JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\npoints = [\"1/0\"]\n").is_err());
        let big = JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nD = [\"123456789012345678901234567890\"]\n").unwrap();
        assert_eq!(
            big.candidates().unwrap()[0].to_string(),
            "123456789012345678901234567890"
        );
    }

    #[test]
    fn range_filter() {
        let cfg = JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nD_range = { min = 1, max = 30 }\n").unwrap();
        let c: Vec<String> = cfg.candidates().unwrap().iter().map(|d| d.to_string()).collect();
        assert_eq!(c, ["1", "5", "8", "12", "13", "17", "21", "24", "28", "29"]);
    }

    #[test]
    fn text_and_csv_agree() {
        let cfg =
            JobConfig::from_toml("k = 2\nN = 9\nD0_choices = [13, 5]\nD = [28, 53, 172]\nmode = \"table\"\n").unwrap();
        let (t, rep) = value_table(&cfg, None).unwrap();
        assert!(rep.rejected.is_empty());
        assert_eq!(t.columns, ["1", "1/2", "4/5", "0"]);
        let csv = t.to_csv();
        assert!(csv.starts_with("D,1,1/2,4/5,0\n28,0,12,96/25,0\n"));
        let text = t.to_text();
        for (label, cells) in &t.rows {
            let line = text
                .lines()
                .find(|l| l.trim_start().starts_with(label.as_str()))
                .unwrap();
            let words: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(
                &words[1..],
                cells.iter().map(String::as_str).collect::<Vec<_>>().as_slice()
            );
        }
    }

    #[test]
    fn empty_candidate_list() {
        let cfg = JobConfig::from_toml("k = 2\nN = 9\nD0 = 13\nmode = \"table\"\n").unwrap();
        let (t, _) = value_table(&cfg, None).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv(), "D,1,1/2,4/5,0\n");
    }
}
