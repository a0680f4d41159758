//! Command-line driver.  Every subcommand prints one JSON report.
//!
//! Exit codes: 0 verified, 1 usage or precision error, 2 mismatch,
//! 3 ambiguity or instability.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cohom::{bessel_gamma_search, verify_dwork, ODEParams};
use crate::cyclo::cyclo_report;
use crate::error::{Error, Result};
use crate::frobq::{verify_main_theorem, SearchConfig, StageRecord, Verdict};
use crate::hyperq::{congruence_suite, QHParams};
use crate::padic::PRational;
use crate::qspecial::QContext;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qfrob", version, about = "Frobenius intertwiners of p-adic q-hypergeometric equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Digit search for Lambda in the q-difference case, compared with the Gamma_{p,q} closed form.
    Search(Options),
    /// Dwork Frobenius of the classical hypergeometric equation.
    Dwork(Options),
    /// Frobenius of the projective-space operator z - prod (D - a_i).
    Projective(Options),
    /// Nilpotent part of the Frobenius of z - D^n.
    Bessel(Options),
    /// Gamma_{p,q}(x) modulo p^prec.
    GammaPq(Options),
    /// Congruence suite or the full theorem check.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Root-of-unity identities over Z[q]/Phi_{p^s}.
    Cyclo(Options),
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Polynomial, bracket-ratio, vertex and fundamental-matrix congruences at level s
    Congruences(Options),
    /// Digit search plus closed form, exit status reflects the verdict
    Theorem(Options),
}

/// Experiment parameters; also the schema of `--config` files.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(long)]
    pub p: Option<u64>,
    /// q = 1 + t.
    #[arg(long)]
    pub t: Option<PRational>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<PRational>>,
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<PRational>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<PRational>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub smax: Option<u32>,
    #[arg(long)]
    pub prec: Option<u32>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub guard: Option<u32>,
    #[arg(long)]
    pub mmax: Option<usize>,
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub max_offset: Option<u32>,
    #[arg(long)]
    pub max_survivors: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<u64>,
    /// Repeat the search at (M+20, W+2) and require identical digits.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub recheck: Option<bool>,
    #[arg(long)]
    pub imin: Option<i64>,
    #[arg(long)]
    pub imax: Option<i64>,
}

impl ExperimentConfig {
    /// Fields set here win over `base`.
    pub fn over(self, base: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            p: self.p.or(base.p),
            t: self.t.or(base.t),
            a: self.a.or(base.a),
            h: self.h.or(base.h),
            x: self.x.or(base.x),
            n: self.n.or(base.n),
            s: self.s.or(base.s),
            smax: self.smax.or(base.smax),
            prec: self.prec.or(base.prec),
            order: self.order.or(base.order),
            guard: self.guard.or(base.guard),
            mmax: self.mmax.or(base.mmax),
            window: self.window.or(base.window),
            max_offset: self.max_offset.or(base.max_offset),
            max_survivors: self.max_survivors.or(base.max_survivors),
            max_candidates: self.max_candidates.or(base.max_candidates),
            recheck: self.recheck.or(base.recheck),
            imin: self.imin.or(base.imin),
            imax: self.imax.or(base.imax),
        }
    }

    fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
        v.clone().ok_or_else(|| Error::InvalidParameter(format!("missing --{name}")))
    }

    fn search_config(&self, digits: u32) -> SearchConfig {
        let mut cfg = SearchConfig::new(digits);
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = self.guard {
            cfg.guard = v;
        }
        if self.mmax.is_some() {
            cfg.max_pole = self.mmax;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.max_offset {
            cfg.max_offset = v;
        }
        if let Some(v) = self.max_survivors {
            cfg.max_survivors = v;
        }
        if let Some(v) = self.max_candidates {
            cfg.max_candidates = v;
        }
        cfg.recheck = self.recheck.unwrap_or(false);
        cfg
    }

    fn q_params(&self, prec: u32) -> Result<QHParams> {
        let ctx = QContext::new(Self::need(&self.p, "p")?, Self::need(&self.t, "t")?, prec)?;
        QHParams::new(ctx, Self::need(&self.a, "a")?, Self::need(&self.h, "h")?)
    }
}

#[derive(Args, Debug)]
struct Options {
    #[command(flatten)]
    config: ExperimentConfig,
    /// JSON file with experiment parameters; flags override its values.
    #[arg(long = "config", value_name = "FILE")]
    config_file: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-stage survivor tables on stderr.
    #[arg(long)]
    verbose: bool,
    /// Include wall time in the report (makes it non-reproducible byte for byte).
    #[arg(long)]
    timing: bool,
}

impl Options {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let base = match &self.config_file {
            None => ExperimentConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidParameter(format!("bad config {}: {e}", path.display())))?
            }
        };
        Ok(self.config.clone().over(base))
    }
}

struct Outcome {
    report: Value,
    code: i32,
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Verified => EXIT_OK,
        Verdict::Mismatch => EXIT_MISMATCH,
        Verdict::Unstable => EXIT_AMBIGUOUS,
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn print_stages(stages: &[StageRecord]) {
    let mut err = std::io::stderr().lock();
    for st in stages {
        let _ = writeln!(
            err,
            "stage {:>2}  mod p^{:<2}  prefix {:>2}  candidates {:>5}  survivors {}",
            st.stage,
            st.level,
            st.prefix_length,
            st.candidates,
            st.survivors.len()
        );
        for sv in st.survivors.iter().take(8) {
            let _ = writeln!(err, "    {:?}  (pole order {})", sv.digits, sv.witness);
        }
    }
}

fn run_command(cmd: &Command, opts: &Options, cfg: &ExperimentConfig) -> Result<Outcome> {
    match cmd {
        Command::Search(_) | Command::Verify { what: VerifyCommand::Theorem(_) } => {
            let digits = ExperimentConfig::need(&cfg.smax, "smax")?;
            let mut sc = cfg.search_config(digits);
            if matches!(cmd, Command::Verify { .. }) {
                sc.recheck = cfg.recheck.unwrap_or(true);
            }
            let params = cfg.q_params(sc.precision())?;
            let r = verify_main_theorem(&params, &sc)?;
            if opts.verbose {
                print_stages(&r.search.search.stages);
            }
            let code = verdict_code(&r.verdict);
            Ok(Outcome {
                report: json!({
                    "digits": r.search.search.digits,
                    "match": r.matches,
                    "search_config": sc,
                    "result": r,
                }),
                code,
            })
        }
        Command::Dwork(_) | Command::Projective(_) => {
            let digits = ExperimentConfig::need(&cfg.smax, "smax")?;
            let sc = cfg.search_config(digits);
            let p = ExperimentConfig::need(&cfg.p, "p")?;
            let a = ExperimentConfig::need(&cfg.a, "a")?;
            let h = match cmd {
                Command::Dwork(_) => Some(ExperimentConfig::need(&cfg.h, "h")?),
                _ => None,
            };
            let params = ODEParams::new(p, a, h)?;
            let r = verify_dwork(&params, &sc)?;
            if opts.verbose {
                print_stages(&r.search.search.stages);
            }
            let code = verdict_code(&r.verdict);
            Ok(Outcome {
                report: json!({
                    "digits": r.search.search.digits,
                    "match": r.comparisons[0].matches,
                    "search_config": sc,
                    "result": r,
                }),
                code,
            })
        }
        Command::Bessel(_) => {
            let p = ExperimentConfig::need(&cfg.p, "p")?;
            let n = cfg.n.unwrap_or(2);
            let digits = cfg.prec.or(cfg.smax).ok_or_else(|| Error::InvalidParameter("missing --prec".into()))?;
            let sc = cfg.search_config(digits);
            let r = bessel_gamma_search(p, n, &sc)?;
            if opts.verbose {
                print_stages(&r.search.search.stages);
            }
            let code = verdict_code(&r.verdict);
            Ok(Outcome {
                report: json!({
                    "digits": r.search.search.digits,
                    "match": r.comparisons[0].matches,
                    "search_config": sc,
                    "result": r,
                }),
                code,
            })
        }
        Command::GammaPq(_) => {
            let p = ExperimentConfig::need(&cfg.p, "p")?;
            let t = ExperimentConfig::need(&cfg.t, "t")?;
            let x = ExperimentConfig::need(&cfg.x, "x")?;
            let prec = ExperimentConfig::need(&cfg.prec, "prec")?;
            let ctx = QContext::new(p, t, prec)?;
            let v = ctx.gamma_pq(&x, prec)?;
            Ok(Outcome {
                report: json!({
                    "residue": v.residue().to_string(),
                    "modulus": format!("{p}^{prec}"),
                    "digits": v.digits(prec)?,
                }),
                code: EXIT_OK,
            })
        }
        Command::Verify { what: VerifyCommand::Congruences(_) } => {
            let p = ExperimentConfig::need(&cfg.p, "p")?;
            let t = cfg.t.clone().unwrap_or_else(|| PRational::int(p as i64));
            let s = ExperimentConfig::need(&cfg.s, "s")?;
            let order = cfg.order.unwrap_or(12);
            let a = ExperimentConfig::need(&cfg.a, "a")?;
            let ctx = QContext::new(p, t, s + 8)?;
            let r = congruence_suite(&ctx, &a, s, order, cfg.imin.unwrap_or(-12)..=cfg.imax.unwrap_or(12))?;
            let code = if r.all_hold { EXIT_OK } else { EXIT_MISMATCH };
            Ok(Outcome { report: to_value(&r), code })
        }
        Command::Cyclo(_) => {
            let p = ExperimentConfig::need(&cfg.p, "p")?;
            let s = ExperimentConfig::need(&cfg.s, "s")?;
            let r = cyclo_report(p, s, cfg.imin.unwrap_or(-12)..=cfg.imax.unwrap_or(12))?;
            let code = if r.all_hold { EXIT_OK } else { EXIT_MISMATCH };
            Ok(Outcome { report: to_value(&r), code })
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Search(_) => "search",
        Command::Dwork(_) => "dwork",
        Command::Projective(_) => "projective",
        Command::Bessel(_) => "bessel",
        Command::GammaPq(_) => "gamma-pq",
        Command::Verify { what: VerifyCommand::Congruences(_) } => "verify congruences",
        Command::Verify { what: VerifyCommand::Theorem(_) } => "verify theorem",
        Command::Cyclo(_) => "cyclo",
    }
}

fn options(cmd: &Command) -> &Options {
    match cmd {
        Command::Search(o)
        | Command::Dwork(o)
        | Command::Projective(o)
        | Command::Bessel(o)
        | Command::GammaPq(o)
        | Command::Cyclo(o)
        | Command::Verify { what: VerifyCommand::Congruences(o) }
        | Command::Verify { what: VerifyCommand::Theorem(o) } => o,
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::MultipleSurvivors { .. } => EXIT_AMBIGUOUS,
        _ => EXIT_ERROR,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DenominatorNotUnit { .. } => "denominator_not_unit",
        Error::PrecisionExceeded { .. } => "precision_exceeded",
        Error::NonUnitDivisor { .. } => "non_unit_divisor",
        Error::NonUnitConstantTerm => "non_unit_constant_term",
        Error::SingularConstantTerm { .. } => "singular_constant_term",
        Error::PrecisionExhausted(_) => "precision_exhausted",
        Error::DegenerateDenominator { .. } => "degenerate_denominator",
        Error::NoStabilization { .. } => "no_stabilization",
        Error::NoSurvivor { .. } => "no_survivor",
        Error::MultipleSurvivors { .. } => "multiple_survivors",
        Error::InvalidParameter(_) => "invalid_parameter",
    }
}

/// Parse `argv`, run, write the report; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let opts = options(&cli.command);
    let name = command_name(&cli.command);
    let start = Instant::now();
    let (mut report, code) = match opts.resolve() {
        Err(e) => (error_report(name, None, &e), EXIT_ERROR),
        Ok(cfg) => match run_command(&cli.command, opts, &cfg) {
            Ok(out) => {
                let mut report = json!({ "command": name, "inputs": echo(&cfg) });
                merge(&mut report, out.report);
                report["exit_code"] = json!(out.code);
                (report, out.code)
            }
            Err(e) => {
                eprintln!("qfrob {name}: {e}");
                (error_report(name, Some(&cfg), &e), error_code(&e))
            }
        },
    };
    if opts.timing {
        let ms = start.elapsed().as_secs_f64() * 1000.0;
        report["wall_time_ms"] = json!((ms * 1000.0).round() / 1000.0);
    }
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("qfrob: cannot write {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    code
}

fn error_report(name: &str, cfg: Option<&ExperimentConfig>, e: &Error) -> Value {
    let mut detail = json!({ "kind": error_kind(e), "message": e.to_string() });
    if let Error::MultipleSurvivors { stage, count, sample } = e {
        detail["stage"] = json!(stage);
        detail["count"] = json!(count);
        detail["sample"] = json!(sample);
    }
    json!({
        "command": name,
        "inputs": cfg.map(echo),
        "error": detail,
        "exit_code": error_code(e),
    })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        for (k, v) in b {
            a.insert(k, v);
        }
    }
}

/// The effective configuration without unset fields.
fn echo(cfg: &ExperimentConfig) -> Value {
    let mut v = to_value(cfg);
    if let Value::Object(m) = &mut v {
        m.retain(|_, x| !x.is_null());
    }
    v
}
