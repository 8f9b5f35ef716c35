//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid computation, 2 argument error,
//! 3 assertion threshold exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::json;

use crate::cyclesim::run_cycles;
use crate::error::Error;
use crate::fxp::DividerConfig;
use crate::goldschmidt::{divide, MultiplierStrategy};
use crate::harness::{
    direct_div_error_sweep, exact_quotient, mantissa_fraction, mult_error_sweep, relative_error,
    run_table1, sweep, ErrorReport, RNG_ALGORITHM,
};
use crate::mitchell::MultMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSERT: i32 = 3;

/// Environment variable naming a `key = value` config file.
pub const CONFIG_ENV: &str = "GOLDMITCH_CONFIG";

const DEFAULT_SEED: u64 = 42;
const DEFAULT_COUNT: u64 = 10_000;
/// Pass bar used by `table1` when no `--assert-max` is given.
const TABLE1_THRESHOLD: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(
    name = "goldmitch",
    version,
    about = "Fixed-point Goldschmidt divider with Mitchell multipliers: bit-accurate model and error harness"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, value_parser = parse_u32)]
    pub width_dividend: Option<u32>,
    #[arg(long, global = true, value_parser = parse_u32)]
    pub width_divisor: Option<u32>,
    /// Fraction bits of the internal registers.
    #[arg(long, global = true, value_parser = parse_u32)]
    pub extension: Option<u32>,
    #[arg(long, global = true, value_parser = parse_u32)]
    pub width_quo: Option<u32>,
    /// Output fraction bits plus one.
    #[arg(long, global = true, value_parser = parse_u32)]
    pub width_fra: Option<u32>,
    #[arg(long, global = true, value_parser = parse_u32)]
    pub iterations: Option<u32>,
    /// exact, mitchell_corrected or mitchell_uncorrected.
    #[arg(long, global = true, value_parser = MultiplierStrategy::from_str)]
    pub strategy: Option<MultiplierStrategy>,
    #[arg(long, global = true, value_parser = parse_u64)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_u64)]
    pub count: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Exit with status 3 when the maximum relative error exceeds this.
    #[arg(long, global = true)]
    pub assert_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Uncorrected,
    Corrected,
    /// Log-subtraction division instead of multiplication.
    DirectDiv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divide two signed integers.
    Divide {
        #[arg(allow_hyphen_values = true, value_parser = parse_i128)]
        dividend: i128,
        #[arg(allow_hyphen_values = true, value_parser = parse_i128)]
        divisor: i128,
    },
    /// Random accuracy sweep against the exact quotient.
    Sweep,
    /// Reproduce the eight reference calculation examples.
    Table1,
    /// Exhaustive Mitchell error sweep over all nonzero operand pairs.
    Multsweep {
        #[arg(long, default_value_t = 8, value_parser = parse_u32)]
        width: u32,
        #[arg(long, value_enum, default_value_t = SweepMode::Corrected)]
        mode: SweepMode,
    },
    /// Per-cycle register trace of one division, as CSV.
    Trace {
        #[arg(allow_hyphen_values = true, value_parser = parse_i128)]
        dividend: i128,
        #[arg(allow_hyphen_values = true, value_parser = parse_i128)]
        divisor: i128,
    },
}

fn split_radix(s: &str) -> (bool, &str, u32) {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    match body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        Some(hex) => (neg, hex, 16),
        None => (neg, body, 10),
    }
}

/// Decimal or `0x` hexadecimal, optionally signed.
pub fn parse_i128(s: &str) -> Result<i128, String> {
    let (neg, body, radix) = split_radix(s.trim());
    let mag = u128::from_str_radix(body, radix).map_err(|e| format!("{s:?}: {e}"))?;
    if neg {
        0i128
            .checked_sub_unsigned(mag)
            .ok_or_else(|| format!("{s:?} out of range"))
    } else {
        i128::try_from(mag).map_err(|_| format!("{s:?} out of range"))
    }
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    let (neg, body, radix) = split_radix(s.trim());
    if neg {
        return Err(format!("{s:?} must not be negative"));
    }
    u64::from_str_radix(body, radix).map_err(|e| format!("{s:?}: {e}"))
}

pub fn parse_u32(s: &str) -> Result<u32, String> {
    let v = parse_u64(s)?;
    u32::try_from(v).map_err(|_| format!("{s:?} out of range"))
}

/// Reads `key = value` lines; keys are the long flag names. Lines starting
/// with `#` are comments.
pub fn parse_config_file(text: &str) -> Result<GlobalOpts, String> {
    let mut o = GlobalOpts::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        let at = |e: String| format!("line {}: {e}", n + 1);
        match key.as_str() {
            "width-dividend" => o.width_dividend = Some(parse_u32(value).map_err(at)?),
            "width-divisor" => o.width_divisor = Some(parse_u32(value).map_err(at)?),
            "extension" => o.extension = Some(parse_u32(value).map_err(at)?),
            "width-quo" => o.width_quo = Some(parse_u32(value).map_err(at)?),
            "width-fra" => o.width_fra = Some(parse_u32(value).map_err(at)?),
            "iterations" => o.iterations = Some(parse_u32(value).map_err(at)?),
            "strategy" => o.strategy = Some(value.parse().map_err(at)?),
            "seed" => o.seed = Some(parse_u64(value).map_err(at)?),
            "count" => o.count = Some(parse_u64(value).map_err(at)?),
            "format" => {
                o.format = Some(OutputFormat::from_str(value, true).map_err(at)?);
            }
            "output" => o.output = Some(PathBuf::from(value)),
            "assert-max" => {
                o.assert_max = Some(value.parse().map_err(|e| at(format!("{value:?}: {e}")))?);
            }
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }
    Ok(o)
}

/// Flags layered over the config file layered over the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub divider: DividerConfig,
    pub seed: u64,
    pub count: u64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub assert_max: Option<f64>,
}

impl CliConfig {
    pub fn resolve(flags: &GlobalOpts, file: Option<&GlobalOpts>) -> CliConfig {
        let empty = GlobalOpts::default();
        let file = file.unwrap_or(&empty);
        let d = DividerConfig::default();
        macro_rules! pick {
            ($f:ident, $default:expr) => {
                flags.$f.clone().or(file.$f.clone()).unwrap_or($default)
            };
        }
        CliConfig {
            divider: DividerConfig {
                width_dividend: pick!(width_dividend, d.width_dividend),
                width_divisor: pick!(width_divisor, d.width_divisor),
                extension: pick!(extension, d.extension),
                width_quo: pick!(width_quo, d.width_quo),
                width_fra: pick!(width_fra, d.width_fra),
                iterations: pick!(iterations, d.iterations),
                strategy: pick!(strategy, d.strategy),
            },
            seed: pick!(seed, DEFAULT_SEED),
            count: pick!(count, DEFAULT_COUNT),
            format: pick!(format, OutputFormat::Text),
            output: flags.output.clone().or(file.output.clone()),
            assert_max: flags.assert_max.or(file.assert_max),
        }
    }
}

/// Formats with 12 significant digits in positional notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (11 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn rat_sig12(q: &num_rational::BigRational) -> String {
    sig12(q.to_f64().unwrap_or(f64::NAN))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroDivisor | Error::Overflow { .. } | Error::ZeroOperand | Error::Negative => {
                EXIT_INVALID
            }
            Error::InvalidFormat(_) | Error::InvalidConfig(_) | Error::OutOfRange { .. } => {
                EXIT_USAGE
            }
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
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// `config_text` is the content of the `GOLDMITCH_CONFIG` file, if any.
pub fn run<I, T>(
    args: I,
    config_text: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let file = match config_text.map(parse_config_file).transpose() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(stderr, "error: {CONFIG_ENV}: {e}");
            return EXIT_USAGE;
        }
    };
    let cfg = CliConfig::resolve(&cli.opts, file.as_ref());
    match execute(&cli.command, &cfg, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_env() -> i32 {
    let config_text = match std::env::var_os(CONFIG_ENV) {
        Some(path) => match fs::read_to_string(&path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {CONFIG_ENV}={}: {e}", PathBuf::from(path).display());
                return EXIT_USAGE;
            }
        },
        None => None,
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(
        std::env::args_os(),
        config_text.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

fn emit(cfg: &CliConfig, stdout: &mut dyn Write, body: &[u8]) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn check_max(report_max: f64, threshold: Option<f64>, stderr: &mut dyn Write) -> i32 {
    match threshold {
        Some(t) if report_max > t => {
            let _ = writeln!(
                stderr,
                "assertion failed: max relative error {} > {}",
                sig12(report_max),
                t
            );
            EXIT_ASSERT
        }
        _ => EXIT_OK,
    }
}

fn execute(
    command: &Command,
    cfg: &CliConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    cfg.divider.validate()?;
    if let Some(t) = cfg.assert_max {
        if t.is_nan() || t < 0.0 {
            return Err(Failure::usage("--assert-max must be a non-negative number"));
        }
    }
    match command {
        Command::Divide { dividend, divisor } => cmd_divide(*dividend, *divisor, cfg, stdout),
        Command::Sweep => cmd_sweep(cfg, stdout, stderr),
        Command::Table1 => cmd_table1(cfg, stdout, stderr),
        Command::Multsweep { width, mode } => cmd_multsweep(*width, *mode, cfg, stdout, stderr),
        Command::Trace { dividend, divisor } => cmd_trace(*dividend, *divisor, cfg, stdout, stderr),
    }
}

fn config_json(d: &DividerConfig) -> serde_json::Value {
    serde_json::to_value(d).expect("config serializes")
}

fn records_csv(report: &ErrorReport) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dividend", "divisor", "exact", "computed", "rel_err"])?;
    for r in &report.records {
        w.write_record([
            r.dividend.to_string(),
            r.divisor.to_string(),
            rat_sig12(&r.exact),
            rat_sig12(&r.computed),
            rat_sig12(&r.rel_err),
        ])?;
    }
    w.into_inner().map_err(|e| Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    })
}

fn cmd_divide(
    dividend: i128,
    divisor: i128,
    cfg: &CliConfig,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let d = &cfg.divider;
    let q = divide(d.dividend(dividend)?, d.divisor(divisor)?, d)?;
    let exact = exact_quotient(dividend, divisor)?;
    let computed = q.to_rational();
    let err = relative_error(&computed, &exact);
    let err_f = err.to_f64().unwrap_or(f64::NAN);
    let frac_digits = (q.frac_bits as usize).div_ceil(4).max(1);
    let frac_hex = format!("{:#0w$x}", q.frac_part, w = frac_digits + 2);
    let body = match cfg.format {
        OutputFormat::Text => format!(
            "dividend   {dividend}\n\
             divisor    {divisor}\n\
             strategy   {}\n\
             sign       {}\n\
             int_part   {} ({:#x})\n\
             frac_part  {frac_hex} ({} bits)\n\
             quotient   {}\n\
             exact      {}\n\
             rel_err    {} ({}%)\n",
            d.strategy,
            q.sign as u8,
            q.int_part,
            q.int_part,
            q.frac_bits,
            rat_sig12(&computed),
            rat_sig12(&exact),
            rat_sig12(&err),
            sig12(err_f * 100.0),
        ),
        OutputFormat::Json => {
            let v = json!({
                "config": config_json(d),
                "dividend": dividend.to_string(),
                "divisor": divisor.to_string(),
                "sign": q.sign as u8,
                "int_part": q.int_part.to_string(),
                "frac_part": frac_hex,
                "quotient": rat_sig12(&computed),
                "exact": rat_sig12(&exact),
                "rel_err": err_f,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        OutputFormat::Csv => format!(
            "dividend,divisor,exact,computed,rel_err\n{dividend},{divisor},{},{},{}\n",
            rat_sig12(&exact),
            rat_sig12(&computed),
            rat_sig12(&err)
        ),
    };
    emit(cfg, stdout, body.as_bytes())?;
    Ok(EXIT_OK)
}

fn report_text(title: &[(&str, String)], r: &ErrorReport, pair_sep: &str) -> String {
    let mut s = String::new();
    for (k, v) in title {
        s.push_str(&format!("{k:<14}{v}\n"));
    }
    s.push_str(&format!("{:<14}{}\n", "count", r.count));
    s.push_str(&format!("{:<14}{}\n", "max_rel_err", sig12(r.max_rel_err)));
    s.push_str(&format!(
        "{:<14}{}\n",
        "mean_rel_err",
        sig12(r.mean_rel_err)
    ));
    s.push_str(&format!("{:<14}{}\n", "p99_rel_err", sig12(r.p99_rel_err)));
    if let Some((a, b)) = r.worst_case {
        s.push_str(&format!("{:<14}{a}{pair_sep}{b}\n", "worst_case"));
    }
    s
}

fn cmd_sweep(
    cfg: &CliConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    if cfg.count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    let d = &cfg.divider;
    let report = sweep(d, cfg.count, cfg.seed)?;
    let body = match cfg.format {
        OutputFormat::Text => report_text(
            &[
                ("strategy", d.strategy.to_string()),
                (
                    "widths",
                    format!(
                        "dividend={} divisor={} extension={} quo={} fra={} iterations={}",
                        d.width_dividend,
                        d.width_divisor,
                        d.extension,
                        d.width_quo,
                        d.width_fra,
                        d.iterations
                    ),
                ),
                ("rng", RNG_ALGORITHM.to_string()),
                ("seed", cfg.seed.to_string()),
            ],
            &report,
            " / ",
        ),
        OutputFormat::Json => {
            let v = json!({
                "config": config_json(d),
                "count": report.count,
                "seed": cfg.seed,
                "rng": RNG_ALGORITHM,
                "max_rel_err": report.max_rel_err,
                "mean_rel_err": report.mean_rel_err,
                "p99_rel_err": report.p99_rel_err,
                "worst_case": report.worst_case.map(|(a, b)| json!({
                    "dividend": a.to_string(),
                    "divisor": b.to_string(),
                })),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        OutputFormat::Csv => String::from_utf8(records_csv(&report)?).expect("utf8"),
    };
    emit(cfg, stdout, body.as_bytes())?;
    Ok(check_max(report.max_rel_err, cfg.assert_max, stderr))
}

fn cmd_table1(
    cfg: &CliConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let rows = run_table1(&cfg.divider)?;
    let threshold = cfg.assert_max.unwrap_or(TABLE1_THRESHOLD);
    let errs: Vec<f64> = rows
        .iter()
        .map(|r| r.rel_err.to_f64().unwrap_or(f64::INFINITY))
        .collect();
    let body = match cfg.format {
        OutputFormat::Text => {
            let mut s = format!(
                "{:>12} {:>12} {:>16} {:>16} {:>12} {:>12} {:>10}\n",
                "dividend", "divisor", "exact", "computed", "rel_err(%)", "published", "pub_err(%)"
            );
            for (r, e) in rows.iter().zip(&errs) {
                s.push_str(&format!(
                    "{:>12} {:>12} {:>16} {:>16} {:>12} {:>12} {:>10}\n",
                    r.case.dividend,
                    r.case.divisor,
                    rat_sig12(&r.case.expected_quotient),
                    rat_sig12(&r.computed),
                    format!("{:.4}", e * 100.0),
                    r.case
                        .published_computed
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_default(),
                    r.case
                        .published_rel_err
                        .map(|v| format!("{v:.2}"))
                        .unwrap_or_default(),
                ));
            }
            s
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["dividend", "divisor", "exact", "computed", "rel_err"])?;
            for r in &rows {
                w.write_record([
                    r.case.dividend.to_string(),
                    r.case.divisor.to_string(),
                    rat_sig12(&r.case.expected_quotient),
                    rat_sig12(&r.computed),
                    rat_sig12(&r.rel_err),
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure {
                code: EXIT_INVALID,
                message: e.to_string(),
            })?)
            .expect("utf8")
        }
        OutputFormat::Json => {
            let items: Vec<_> = rows
                .iter()
                .zip(&errs)
                .map(|(r, e)| {
                    json!({
                        "dividend": r.case.dividend.to_string(),
                        "divisor": r.case.divisor.to_string(),
                        "exact": rat_sig12(&r.case.expected_quotient),
                        "computed": rat_sig12(&r.computed),
                        "rel_err": e,
                        "published_computed": r.case.published_computed,
                        "published_rel_err_pct": r.case.published_rel_err,
                    })
                })
                .collect();
            let v = json!({ "config": config_json(&cfg.divider), "rows": items });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    };
    emit(cfg, stdout, body.as_bytes())?;
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    if errs.iter().any(|e| *e >= threshold) {
        let _ = writeln!(
            stderr,
            "assertion failed: max relative error {} >= {threshold}",
            sig12(worst)
        );
        return Ok(EXIT_ASSERT);
    }
    Ok(EXIT_OK)
}

fn cmd_multsweep(
    width: u32,
    mode: SweepMode,
    cfg: &CliConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let (report, name) = match mode {
        SweepMode::Uncorrected => (
            mult_error_sweep(width, MultMode::Uncorrected)?,
            "uncorrected",
        ),
        SweepMode::Corrected => (mult_error_sweep(width, MultMode::Corrected)?, "corrected"),
        SweepMode::DirectDiv => (direct_div_error_sweep(width)?, "direct_div"),
    };
    let body = match cfg.format {
        OutputFormat::Json => {
            let v = json!({
                "width": width,
                "mode": name,
                "count": report.count,
                "max_rel_err": report.max_rel_err,
                "mean_rel_err": report.mean_rel_err,
                "p99_rel_err": report.p99_rel_err,
                "worst_case": report.worst_case.map(|(a, b)| json!({ "lhs": a, "rhs": b })),
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        _ => {
            let mut fracs = String::new();
            if let Some((a, b)) = report.worst_case {
                let fa = mantissa_fraction(a as u64)?;
                let fb = mantissa_fraction(b as u64)?;
                fracs = format!("{} , {}", rat_sig12(&fa), rat_sig12(&fb));
            }
            let sep = if mode == SweepMode::DirectDiv {
                " / "
            } else {
                " x "
            };
            let mut s = report_text(
                &[("width", width.to_string()), ("mode", name.to_string())],
                &report,
                sep,
            );
            s.push_str(&format!("{:<14}{}\n", "worst_x", fracs));
            s
        }
    };
    emit(cfg, stdout, body.as_bytes())?;
    Ok(check_max(report.max_rel_err, cfg.assert_max, stderr))
}

fn cmd_trace(
    dividend: i128,
    divisor: i128,
    cfg: &CliConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let d = &cfg.divider;
    let (q, trace) = run_cycles(d.dividend(dividend)?, d.divisor(divisor)?, d)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    emit(cfg, stdout, &buf)?;
    let _ = writeln!(
        stderr,
        "quotient {} ({q}), {} cycles",
        rat_sig12(&q.to_rational()),
        trace.len()
    );
    Ok(EXIT_OK)
}
