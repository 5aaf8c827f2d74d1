//! Command-line front end.
//!
//! Exit codes: `0` success, `1` domain error, `2` verification
//! disagreement, `64` usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde::Serialize;
use serde_json::json;

use crate::closed_form::{evaluate, ClosedFormResult, Theorem};
use crate::error::{Error, Result};
use crate::gcd_identities::{divides_uu, divides_vu, gcd_uu, gcd_uv, gcd_vv, GcdWitness};
use crate::lucas::{make_params, u_exact, uv_mod, v_exact, LucasParams};
use crate::rank::{default_scan_cap, tau_scan, tau_with, FactorConfig, TauResult};
use crate::valuation::{nu_int, nu_u, nu_v, TermValuation};
use crate::verifier::{
    check_delta_negative_fixtures, default_grid, reproduce_remark, sweep, write_csv, OracleKind,
    SweepConfig, SweepRanges, SweepReport, DEFAULT_SCAN_LIMIT, DEFAULT_SCAN_THRESHOLD,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable that overrides `--jobs`.
pub const JOBS_ENV: &str = "LUCAS_RANK_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lucas-rank", version, about = "Order of appearance in Lucas sequences")]
pub struct CliConfig {
    /// First recurrence coefficient.
    #[arg(long, global = true, default_value_t = 1, allow_negative_numbers = true)]
    pub a: i64,
    /// Second recurrence coefficient.
    #[arg(long, global = true, default_value_t = 1, allow_negative_numbers = true)]
    pub b: i64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Seed for the randomized parts of factoring.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sequence terms.
    #[command(subcommand)]
    Seq(SeqCommand),
    /// p-adic valuations.
    #[command(subcommand)]
    Val(ValCommand),
    /// gcds of two sequence terms.
    #[command(subcommand)]
    Gcd(GcdCommand),
    /// Divisibility between sequence terms by the index criterion.
    #[command(subcommand)]
    Divides(DividesCommand),
    /// tau(m) by factoring and lifting.
    Tau {
        #[arg(long, value_parser = parse_biguint)]
        m: BigUint,
    },
    /// tau(m) by stepping the recurrence.
    TauScan {
        #[arg(long, value_parser = parse_biguint)]
        m: BigUint,
        /// Largest index tried; defaults to 10 m^2 + 10.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Closed forms for the rank of products.
    #[command(subcommand)]
    Formula(FormulaCommand),
    /// Sweeps against brute-force oracles.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Subcommand)]
pub enum SeqCommand {
    /// U_n exactly.
    U {
        #[arg(long)]
        n: u64,
    },
    /// V_n exactly.
    V {
        #[arg(long)]
        n: u64,
    },
    /// (U_n mod M, V_n mod M).
    Mod {
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = parse_biguint)]
        modulus: BigUint,
    },
}

#[derive(Debug, Subcommand)]
pub enum ValCommand {
    /// nu_p(U_n) by the closed formula.
    U {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// nu_p(V_n) by the closed formula.
    V {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// nu_p(x) of an integer.
    Int {
        #[arg(long)]
        p: u64,
        #[arg(long, value_parser = parse_bigint, allow_negative_numbers = true)]
        x: BigInt,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct IndexPair {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub n: u64,
}

#[derive(Debug, Subcommand)]
pub enum GcdCommand {
    /// gcd(U_m, U_n).
    Uu(IndexPair),
    /// gcd(V_m, V_n).
    Vv(IndexPair),
    /// gcd(U_m, V_n).
    Uv(IndexPair),
}

#[derive(Debug, Subcommand)]
pub enum DividesCommand {
    /// Whether U_n | U_m.
    Uu(IndexPair),
    /// Whether V_n | U_m.
    Vu(IndexPair),
}

#[derive(Debug, Subcommand)]
pub enum FormulaCommand {
    /// tau(U_m V_n).
    UmVn(IndexPair),
    /// tau(U_m U_n).
    UmUn(IndexPair),
    /// tau(V_m V_n).
    VmVn(IndexPair),
    /// tau(U_n U_{n+p} U_{n+2p}) for an odd prime p.
    Triple {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Sweep one formula over a grid of inputs.
    Sweep(SweepArgs),
    /// The F_50 F_55 F_60 comparison against the earlier formula.
    Remark,
    /// Negative-discriminant counterexamples to the index criteria.
    Fixtures,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_theorem)]
    pub theorem: Theorem,
    /// First index range (`m`, or `n` for the triple), as `LO..=HI` or a comma list.
    #[arg(long, value_parser = parse_range)]
    pub first: Option<IndexList>,
    /// Second index range (`n`, or `p` for the triple).
    #[arg(long, value_parser = parse_range)]
    pub second: Option<IndexList>,
    #[arg(long, value_parser = parse_oracle, default_value = "divisor-minimality")]
    pub oracle: OracleKind,
    /// Sweep the built-in parameter grid instead of `--a/--b`.
    #[arg(long)]
    pub grid: bool,
    /// Also write one CSV row per cell to this path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Record per-cell wall time (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long, default_value_t = DEFAULT_SCAN_THRESHOLD)]
    pub scan_threshold: u64,
    #[arg(long, default_value_t = DEFAULT_SCAN_LIMIT)]
    pub scan_limit: u64,
}

/// Indices given as `LO..=HI` or `i,j,k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexList(pub Vec<u64>);

fn parse_biguint(s: &str) -> std::result::Result<BigUint, String> {
    s.parse().map_err(|_| format!("not a non-negative integer: {s:?}"))
}

fn parse_bigint(s: &str) -> std::result::Result<BigInt, String> {
    s.parse().map_err(|_| format!("not an integer: {s:?}"))
}

fn parse_theorem(s: &str) -> std::result::Result<Theorem, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_oracle(s: &str) -> std::result::Result<OracleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<IndexList, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| format!("bad index {t:?}"))
    };
    if let Some((lo, hi)) = s.split_once("..=") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IndexList((lo..=hi).collect()))
    } else {
        s.split(',').map(num).collect::<std::result::Result<_, _>>().map(IndexList)
    }
}

enum Failure {
    Domain(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

struct Printer<'a> {
    format: OutputFormat,
    out: &'a mut dyn Write,
}

impl Printer<'_> {
    fn emit<T: Serialize>(&mut self, text: impl FnOnce() -> String, value: &T) -> io::Result<()> {
        match self.format {
            OutputFormat::Text => writeln!(self.out, "{}", text()),
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut *self.out, value)?;
                writeln!(self.out)
            }
        }
    }
}

/// Parses `argv` (including the program name) and runs the command,
/// writing to the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let jobs = match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(j) if j > 0 => j,
            _ => {
                let _ = writeln!(err, "error: {JOBS_ENV} must be a positive integer, got {v:?}");
                return EXIT_USAGE;
            }
        },
        Err(_) => config.jobs,
    };
    let mut printer = Printer {
        format: config.format,
        out,
    };
    match execute(&config, jobs, &mut printer, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_DISAGREEMENT,
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

/// Returns whether every verification it ran agreed.
fn execute(
    config: &CliConfig,
    jobs: usize,
    printer: &mut Printer<'_>,
    err: &mut dyn Write,
) -> std::result::Result<bool, Failure> {
    let params = || make_params(config.a, config.b);
    match &config.command {
        Command::Seq(cmd) => {
            let params = params()?;
            match *cmd {
                SeqCommand::U { n } => {
                    let v = u_exact(&params, n)?;
                    printer.emit(|| v.to_string(), &term_json(&params, "U", n, &v.0))?;
                }
                SeqCommand::V { n } => {
                    let v = v_exact(&params, n)?;
                    printer.emit(|| v.to_string(), &term_json(&params, "V", n, &v.0))?;
                }
                SeqCommand::Mod { n, ref modulus } => {
                    let (u, v) = uv_mod(&params, n, modulus)?;
                    let value = json!({
                        "a": params.a(), "b": params.b(), "n": n,
                        "modulus": modulus.to_string(),
                        "u": u.to_string(), "v": v.to_string(),
                    });
                    printer.emit(|| format!("{u} {v}"), &value)?;
                }
            }
        }
        Command::Val(cmd) => match *cmd {
            ValCommand::U { p, n } => emit_valuation(printer, nu_u(&params()?, p, n)?)?,
            ValCommand::V { p, n } => emit_valuation(printer, nu_v(&params()?, p, n)?)?,
            ValCommand::Int { p, ref x } => {
                let v = nu_int(p, x)?;
                printer.emit(|| v.value.to_string(), &v)?;
            }
        },
        Command::Gcd(cmd) => {
            let params = params()?;
            let witness = match *cmd {
                GcdCommand::Uu(IndexPair { m, n }) => gcd_uu(&params, m, n)?,
                GcdCommand::Vv(IndexPair { m, n }) => gcd_vv(&params, m, n)?,
                GcdCommand::Uv(IndexPair { m, n }) => gcd_uv(&params, m, n)?,
            };
            emit_gcd(printer, &witness)?;
        }
        Command::Divides(cmd) => {
            let params = params()?;
            let (kind, pair, divides) = match *cmd {
                DividesCommand::Uu(pair) => ("uu", pair, divides_uu(&params, pair.n, pair.m)?),
                DividesCommand::Vu(pair) => ("vu", pair, divides_vu(&params, pair.n, pair.m)?),
            };
            let value = json!({
                "a": params.a(), "b": params.b(), "kind": kind,
                "n": pair.n, "m": pair.m, "divides": divides,
            });
            printer.emit(|| divides.to_string(), &value)?;
        }
        Command::Tau { m } => {
            let mut factor = FactorConfig::default();
            if let Some(seed) = config.seed {
                factor.seed = seed;
            }
            emit_tau(printer, &tau_with(&params()?, m, &factor)?)?;
        }
        Command::TauScan { m, cap } => {
            let cap = cap.unwrap_or_else(|| default_scan_cap(m));
            emit_tau(printer, &tau_scan(&params()?, m, cap)?)?;
        }
        Command::Formula(cmd) => {
            let params = params()?;
            let (theorem, first, second) = match *cmd {
                FormulaCommand::UmVn(IndexPair { m, n }) => (Theorem::UmVn, m, n),
                FormulaCommand::UmUn(IndexPair { m, n }) => (Theorem::UmUn, m, n),
                FormulaCommand::VmVn(IndexPair { m, n }) => (Theorem::VmVn, m, n),
                FormulaCommand::Triple { n, p } => (Theorem::Triple, n, p),
            };
            let result = evaluate(&params, theorem, first, second)?;
            emit_formula(printer, &result)?;
        }
        Command::Verify(cmd) => return verify(config, jobs, cmd, printer, err),
    }
    Ok(true)
}

fn term_json(params: &LucasParams, seq: &str, n: u64, value: &BigInt) -> serde_json::Value {
    json!({
        "a": params.a(), "b": params.b(), "sequence": seq, "n": n,
        "value": value.to_string(),
    })
}

/// The serde name of a unit enum variant.
fn tag<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn emit_valuation(printer: &mut Printer<'_>, v: TermValuation) -> io::Result<()> {
    printer.emit(|| format!("{} ({})", v.valuation.value, tag(&v.case)), &v)
}

fn emit_gcd(printer: &mut Printer<'_>, w: &GcdWitness) -> io::Result<()> {
    printer.emit(|| format!("{} ({}, d={})", w.value, tag(&w.branch), w.d), w)
}

fn emit_tau(printer: &mut Printer<'_>, t: &TauResult) -> io::Result<()> {
    printer.emit(|| t.value.to_string(), t)
}

fn emit_formula(printer: &mut Printer<'_>, r: &ClosedFormResult) -> io::Result<()> {
    printer.emit(|| format!("{} ({})", r.value, r.case_label), r)
}

fn verify(
    config: &CliConfig,
    jobs: usize,
    cmd: &VerifyCommand,
    printer: &mut Printer<'_>,
    err: &mut dyn Write,
) -> std::result::Result<bool, Failure> {
    match cmd {
        VerifyCommand::Remark => {
            let report = reproduce_remark();
            let agree = report.all_agree();
            printer.emit(|| remark_text(&report), &report)?;
            Ok(agree)
        }
        VerifyCommand::Fixtures => {
            let report = check_delta_negative_fixtures();
            let text = || {
                let mut lines: Vec<String> = report
                    .fixtures
                    .iter()
                    .map(|f| {
                        format!(
                            "{} n={} m={}: divisor {} dividend {} divides={} index-criterion={} rejected={} agree={}",
                            f.params, f.n, f.m, f.divisor, f.dividend, f.divides,
                            f.index_criterion, f.rejected_as_ineligible, f.agree
                        )
                    })
                    .collect();
                lines.push(format!("{} of {} fixtures agree", report.agreed, report.total));
                lines.join("\n")
            };
            printer.emit(text, &report)?;
            Ok(report.disagreed == 0)
        }
        VerifyCommand::Sweep(args) => {
            let defaults = SweepRanges::default_for(args.theorem);
            let ranges = SweepRanges {
                first: args.first.clone().map_or(defaults.first, |l| l.0),
                second: args.second.clone().map_or(defaults.second, |l| l.0),
            };
            let sweep_config = SweepConfig {
                oracle: args.oracle,
                scan_threshold: args.scan_threshold,
                scan_limit: args.scan_limit,
                jobs,
                timing: args.timing,
            };
            let grid = if args.grid {
                default_grid()
            } else {
                vec![make_params(config.a, config.b)?]
            };
            let reports = grid
                .iter()
                .map(|params| sweep(params, args.theorem, &ranges, &sweep_config))
                .collect::<Result<Vec<SweepReport>>>()?;
            if let Some(path) = &args.csv {
                write_csv(&reports, File::create(path)?)?;
            }
            for report in &reports {
                for cell in report.cells.iter().filter(|c| !c.agree) {
                    writeln!(
                        err,
                        "disagreement: {} {} {:?} closed={} oracle={:?} {}",
                        report.params,
                        report.theorem,
                        cell.inputs,
                        cell.closed_form_value,
                        cell.oracle_value.as_ref().map(|v| v.to_string()),
                        cell.note.as_deref().unwrap_or("")
                    )?;
                }
            }
            let agree = reports.iter().all(SweepReport::all_agree);
            let text = || {
                reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{} {}: {} cells, {} agreed, {} disagreed",
                            r.params, r.theorem, r.summary.total, r.summary.agreed,
                            r.summary.disagreed
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            if args.grid {
                printer.emit(text, &reports)?;
            } else {
                printer.emit(text, &reports[0])?;
            }
            Ok(agree)
        }
    }
}

fn remark_text(report: &SweepReport) -> String {
    let cell = &report.cells[0];
    let mut text = format!(
        "tau(U_50 U_55 U_60) = {} ({})",
        cell.closed_form_value, cell.case_label
    );
    if let Some(r) = &report.remark {
        text.push_str(&format!(
            "\nearlier formula: {} = {} * {}\nagree: {}",
            r.previous_formula_value,
            r.ratio,
            cell.closed_form_value,
            report.all_agree()
        ));
    }
    text
}
