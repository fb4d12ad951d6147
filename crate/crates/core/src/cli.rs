//! `pf-forge` command line.
//!
//! Exit status: 0 on success or pass, 1 when a check fails with a witness,
//! 2 on any error. Errors go to stderr as `error[CODE]: message`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::One;
use serde_json::json;

use crate::constructors::{
    build_perturbed, coeffs_inv_pow, epsilon_bound, lacunary_h, pf_infinity_sample, verify_plan, CertMode,
    PfInfinitySpec,
};
use crate::deflation::{boundary_limit, deflate, deflate_unchecked, estimate_radius};
use crate::domain::{
    blowup_csv, blowup_witness, build_pole_sum, compose_pfr_domain, taylor_coeffs, validate_domain, ComposeOptions,
    DomainSpec,
};
use crate::error::{PfError, Result};
use crate::pf_check::{check_all_minors_with, check_contiguous, contiguous_minors, schoenberg_certificate, ScanOptions};
use crate::rational::{parse_rational, Rational};
use crate::seqcore::CoeffSeq;

pub const BUDGET_ENV: &str = "PF_FORGE_BUDGET";

/// Exit status of a successful run, or of a passing check.
pub const EXIT_PASS: i32 = 0;
/// A check failed and a witness was reported.
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pf-forge", version, about = "Exact tools for Pólya frequency sequences of finite order")]
pub struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Strict criterion on contiguous minors.
    Contiguous,
    /// Every minor of order <= r (budgeted).
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Certified,
    Windowed,
}

impl From<ModeArg> for CertMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Certified => CertMode::Certified,
            ModeArg::Windowed => CertMode::Windowed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a sequence for PF_r on a window.
    Check(CheckArgs),
    /// Certified perturbation of 1/(1-z)^{r^2} by a bounded series g.
    Perturb(PerturbArgs),
    /// Pole sum and Taylor coefficients for a polygonal domain.
    Domain(DomainArgs),
    /// PF_r generating function with singularities on a domain boundary.
    Compose(ComposeArgs),
    /// Multiply the generating function by (1 - z/T).
    Deflate(DeflateArgs),
    /// Partial sums (1 - x/T)^power f(x) near the boundary.
    Limit(LimitArgs),
    /// Emit a sample sequence.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Sequence as JSON {"coeffs": [...]} or a k,coeff CSV; stdin when absent.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long)]
    pub r: usize,
    /// Largest index checked; defaults to the largest the input supports.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, value_enum, default_value = "contiguous")]
    pub method: Method,
    /// Attach ratio evidence and the conditional certificate label.
    #[arg(long)]
    pub ratios: bool,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 0)]
    pub alpha: usize,
    /// Built-in g; alternatively pass --input with --C.
    #[arg(long, value_enum)]
    pub g: Option<BuiltinG>,
    #[command(flatten)]
    pub input: InputArg,
    /// Bound on |g^{(p)} coefficients|; defaults to 3 for the lacunary series.
    #[arg(long = "C")]
    pub c: Option<String>,
    #[arg(long, value_enum, default_value = "certified")]
    pub mode: ModeArg,
    /// Scan limit for windowed mode.
    #[arg(long = "K", default_value_t = 2000)]
    pub k: usize,
    /// Largest coefficient index emitted.
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    /// Also check every contiguous minor against half the main term up to this k.
    #[arg(long)]
    pub verify: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinG {
    /// h(z) = sum_k z^{k!}
    Lacunary,
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Domain JSON {"vertices": [{"re": "..", "im": ".."}, ...], "symmetric": bool}.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub terms: usize,
    /// Largest Taylor index.
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    /// Terms whose blow-up along alpha = 2^-j is reported.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub poles: Vec<usize>,
    /// Largest j in alpha = 2^-j.
    #[arg(long, default_value_t = 20)]
    pub depth: u32,
    /// Write the alpha,lower_bound table here.
    #[arg(long)]
    pub blowup: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    #[arg(long, default_value_t = 16)]
    pub terms: usize,
    #[arg(long, value_enum, default_value = "certified")]
    pub mode: ModeArg,
    #[arg(long = "K", default_value_t = 2000)]
    pub k: usize,
    /// Run the contiguous check at order r on the output.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct DeflateArgs {
    #[command(flatten)]
    pub input: InputArg,
    /// Radius; estimated from coefficient ratios when absent.
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Attach the all-minors verdict at order r - steps.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Skip the positivity precondition.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub input: InputArg,
    #[arg(long = "T")]
    pub t: String,
    #[arg(long, default_value_t = 1)]
    pub power: u32,
    /// Points in (0, T), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    /// Exponent for inv-pow.
    #[arg(long, default_value_t = 1)]
    pub power: usize,
    #[arg(long, default_value = "0")]
    pub gamma: String,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub betas: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// 1/(1-z)^power
    InvPow,
    /// sum_k z^{k!}
    Lacunary,
    /// e^{gamma z} prod(1 + alpha z) / prod(1 - beta z)
    PfInf,
}

/// Text to emit plus the exit status it implies.
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, status: EXIT_PASS }
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| PfError::Io(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_seq(input: &InputArg) -> Result<CoeffSeq> {
    let text = read_text(input.input.as_deref())?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        CoeffSeq::from_json(trimmed)
    } else {
        CoeffSeq::from_csv(trimmed)
    }
}

fn read_domain(path: &Path) -> Result<DomainSpec> {
    DomainSpec::from_json(&read_text(Some(path))?)
}

fn budget() -> Result<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| PfError::Parse(format!("{BUDGET_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(ScanOptions::default().budget),
    }
}

fn json_line(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn cmd_check(a: &CheckArgs, format: Format) -> Result<Outcome> {
    let c = read_seq(&a.input)?;
    if a.r == 0 {
        return Err(PfError::ParameterOutOfRange("r must be at least 1".into()));
    }
    let verdict = match a.method {
        Method::Contiguous => {
            let max = (c.window() + 1).checked_sub(a.r).ok_or_else(|| {
                PfError::IndexOutOfWindow { index: a.r as i64 - 1, window: c.window() }
            })?;
            let window = a.window.unwrap_or(max);
            if format == Format::Csv {
                let table = contiguous_minors(&c, a.r, window)?;
                let mut out = String::from("n,k,minor\n");
                for (n, row) in table.iter().enumerate() {
                    for (k, v) in row.iter().enumerate() {
                        out.push_str(&format!("{},{k},{v}\n", n + 1));
                    }
                }
                let verdict = check_contiguous(&c, a.r, window)?;
                return Ok(Outcome { text: out, status: if verdict.passed() { EXIT_PASS } else { EXIT_FAIL } });
            }
            if a.ratios {
                schoenberg_certificate(&c, a.r, window, true)?
            } else {
                check_contiguous(&c, a.r, window)?
            }
        }
        Method::All => {
            if format == Format::Csv {
                return Err(PfError::ParameterOutOfRange("csv output is only available for --method contiguous".into()));
            }
            let window = a.window.unwrap_or(c.window());
            check_all_minors_with(&c, a.r, window, ScanOptions { budget: budget()? })?
        }
    };
    let status = if verdict.passed() { EXIT_PASS } else { EXIT_FAIL };
    Ok(Outcome { text: with_newline(verdict.to_json()), status })
}

fn cmd_perturb(a: &PerturbArgs, format: Format) -> Result<Outcome> {
    let (g, c_bound) = match (a.g, &a.input.input) {
        (Some(_), Some(_)) => {
            return Err(PfError::ParameterOutOfRange("pass either --g or --input, not both".into()));
        }
        (Some(BuiltinG::Lacunary), None) => {
            let c = a.c.as_deref().map(parse_rational).transpose()?.unwrap_or_else(|| Rational::from_integer(3.into()));
            let need = a.window.max(a.verify.unwrap_or(0) + a.r + a.alpha);
            (lacunary_h(need), c)
        }
        (None, _) => {
            let c = a
                .c
                .as_deref()
                .ok_or_else(|| PfError::ParameterOutOfRange("--C is required with --input".into()))?;
            (read_seq(&a.input)?, parse_rational(c)?)
        }
    };
    let plan = epsilon_bound(a.r, a.alpha, &c_bound, a.mode.into(), a.k)?;
    let f = build_perturbed(&g, a.r, &plan.epsilon, a.window)?;
    let check = a.verify.map(|w| verify_plan(&plan, &g, w)).transpose()?;
    let status = match &check {
        Some(c) if !(c.positive && c.margin) => EXIT_FAIL,
        _ => EXIT_PASS,
    };
    let text = match format {
        Format::Csv => f.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(&f)?;
            v["plan"] = serde_json::to_value(&plan)?;
            if let Some(c) = check {
                v["check"] = serde_json::to_value(c)?;
            }
            json_line(&v)
        }
    };
    Ok(Outcome { text, status })
}

fn dyadic_alphas(depth: u32) -> Vec<Rational> {
    (1..=depth).map(|j| Rational::new(BigInt::one(), BigInt::one() << j)).collect()
}

fn cmd_domain(a: &DomainArgs, format: Format) -> Result<Outcome> {
    let spec = read_domain(&a.input)?;
    let validation = validate_domain(&spec)?;
    let pole_sum = build_pole_sum(&spec, a.terms)?;
    let series = taylor_coeffs(&pole_sum, a.window);
    let alphas = dyadic_alphas(a.depth);
    let mut blowups = Vec::new();
    for &p in &a.poles {
        blowups.push((p, blowup_witness(&pole_sum, p, &alphas)?));
    }
    if let Some(path) = &a.blowup {
        let mut csv = String::new();
        for (_, pts) in &blowups {
            csv.push_str(&blowup_csv(pts));
        }
        write_file(path, &csv)?;
    }
    let text = match format {
        Format::Csv => series.to_csv(),
        Format::Json => {
            let blow: Vec<_> = blowups.iter().map(|(p, pts)| json!({ "term": p, "points": pts })).collect();
            json_line(&json!({
                "validation": validation,
                "pole_sum": pole_sum,
                "taylor": series,
                "bound_holds": series.bound_holds(),
                "blowup": blow,
            }))
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_compose(a: &ComposeArgs, format: Format) -> Result<Outcome> {
    let spec = read_domain(&a.input)?;
    let opts = ComposeOptions { terms: a.terms, mode: a.mode.into(), k: a.k };
    let comp = compose_pfr_domain(&spec, a.r, a.window, opts)?;
    let verdict = if a.check {
        let window = (comp.coeffs.window() + 1).saturating_sub(a.r);
        Some(check_contiguous(&comp.coeffs, a.r, window)?)
    } else {
        None
    };
    let status = match &verdict {
        Some(v) if !v.passed() => EXIT_FAIL,
        _ => EXIT_PASS,
    };
    let text = match format {
        Format::Csv => comp.coeffs.to_csv(),
        Format::Json => {
            let mut v = serde_json::to_value(&comp)?;
            if let Some(verdict) = verdict {
                v["verdict"] = serde_json::to_value(verdict)?;
            }
            json_line(&v)
        }
    };
    Ok(Outcome { text, status })
}

fn cmd_deflate(a: &DeflateArgs, format: Format) -> Result<Outcome> {
    let c = read_seq(&a.input)?;
    let (t, radius) = match &a.t {
        Some(t) => (parse_rational(t)?, None),
        None => {
            let b = estimate_radius(&c)?;
            if !b.monotone {
                eprintln!("warning: coefficient ratios are not monotone at k = {:?}", b.violations);
            }
            (b.t_lo.clone(), Some(b))
        }
    };
    let mut res = if a.force { deflate_unchecked(&c, &t, a.steps)? } else { deflate(&c, &t, a.steps)? };
    res.radius = radius;
    if let Some(r) = a.r {
        if r <= a.steps {
            return Err(PfError::ParameterOutOfRange(format!("order r = {r} must exceed steps = {}", a.steps)));
        }
        let window = a.window.unwrap_or(res.deflated.window());
        res.verdict = Some(check_all_minors_with(&res.deflated, r - a.steps, window, ScanOptions { budget: budget()? })?);
    }
    let status = match &res.verdict {
        Some(v) if !v.passed() => EXIT_FAIL,
        _ => EXIT_PASS,
    };
    let text = match format {
        Format::Csv => res.deflated.to_csv(),
        Format::Json => with_newline(res.to_json()),
    };
    Ok(Outcome { text, status })
}

fn cmd_limit(a: &LimitArgs, format: Format) -> Result<Outcome> {
    let c = read_seq(&a.input)?;
    let t = parse_rational(&a.t)?;
    let xs = a.x.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>>>()?;
    let lim = boundary_limit(&c, &t, a.power, &xs)?;
    for p in lim.points.iter().filter(|p| p.tail_flag) {
        eprintln!("warning: truncation tail may be significant at x = {}", p.x);
    }
    let text = match format {
        Format::Csv => lim.to_csv(),
        Format::Json => json_line(&serde_json::to_value(&lim)?),
    };
    Ok(Outcome::ok(text))
}

fn cmd_gen(a: &GenArgs, format: Format) -> Result<Outcome> {
    let c = match a.kind {
        GenKind::InvPow => coeffs_inv_pow(a.power, a.window)?,
        GenKind::Lacunary => lacunary_h(a.window),
        GenKind::PfInf => {
            let parse_all = |v: &[String]| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>();
            let spec = PfInfinitySpec { gamma: parse_rational(&a.gamma)?, alphas: parse_all(&a.alphas)?, betas: parse_all(&a.betas)? };
            pf_infinity_sample(&spec, a.window)?
        }
    };
    let text = match format {
        Format::Csv => c.to_csv(),
        Format::Json => with_newline(c.to_json()),
    };
    Ok(Outcome::ok(text))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| PfError::Io(format!("{}: {e}", path.display())))
}

/// Runs a parsed command line and returns its output.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let default_format = if matches!(cli.command, Command::Limit(_)) { Format::Csv } else { Format::Json };
    let format = cli.format.unwrap_or(default_format);
    let go = || match &cli.command {
        Command::Check(a) => cmd_check(a, format),
        Command::Perturb(a) => cmd_perturb(a, format),
        Command::Domain(a) => cmd_domain(a, format),
        Command::Compose(a) => cmd_compose(a, format),
        Command::Deflate(a) => cmd_deflate(a, format),
        Command::Limit(a) => cmd_limit(a, format),
        Command::Gen(a) => cmd_gen(a, format),
    };
    match cli.jobs {
        Some(0) => Err(PfError::ParameterOutOfRange("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PfError::Io(e.to_string()))?
            .install(go),
        None => go(),
    }
}

fn report(err: &PfError) -> i32 {
    eprintln!("error[{}]: {err}", err.code());
    EXIT_ERROR
}

/// Entry point used by the binary: parses, runs, writes, and maps the result
/// to an exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let written = match &cli.output {
        Some(path) => write_file(path, &outcome.text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(outcome.text.as_bytes()).and_then(|_| out.flush()).map_err(PfError::from)
        }
    };
    match written {
        Ok(()) => outcome.status,
        Err(e) => report(&e),
    }
}
