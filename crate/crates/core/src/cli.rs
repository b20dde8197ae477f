//! `ni-certify` front end: argument parsing, file I/O and run reports.
//!
//! Exit codes: 0 affirmative (Stable, RobustlyStabilizing, counterexample
//! verified, NI), 1 negative, 2 usage or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::classify::{classify_ni_with, ClassifyOptions};
use crate::converse::{
    necessity_check_with, sufficiency_check, synthesize_destabilizer, verify_counterexample, ClassKind,
    NecessityStatus, UncertaintyClass, PIN_TOL,
};
use crate::error::Error;
use crate::json::{matrix_from_str, system_from_str, system_to_string};
use crate::sampler::{sample_plant, SampleSpec};
use crate::stability::{
    lemma2_check, lemma3_check, lemma4_check, oracle_stability, theorem1_check, theorem2_check, PsiParameter,
    Status, MARGIN, ORACLE_TOL,
};
use crate::tfm::TransferMatrix;

pub const EXIT_AFFIRMATIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "NI_CERTIFY_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ni-certify", version, about = "Negative-imaginary classification, stability certificates and destabilizer synthesis")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Write the machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Eigenvalue tolerance of the frequency test.
    #[arg(long, global = true, default_value_t = ClassifyOptions::default().tol)]
    tol: f64,
    #[arg(long, global = true, default_value_t = ClassifyOptions::default().omega_min)]
    omega_min: f64,
    #[arg(long, global = true, default_value_t = ClassifyOptions::default().omega_max)]
    omega_max: f64,
    /// Base log-spaced grid size.
    #[arg(long, global = true, default_value_t = ClassifyOptions::default().base_points)]
    grid_points: usize,
    /// Local minima refined per sweep.
    #[arg(long, global = true, default_value_t = ClassifyOptions::default().refine)]
    refine: usize,
}

impl GridArgs {
    fn options(&self) -> Result<ClassifyOptions, Error> {
        let o = ClassifyOptions {
            tol: self.tol,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            base_points: self.grid_points,
            refine: self.refine,
        };
        if !(o.tol >= 0.0 && o.omega_min > 0.0 && o.omega_max > o.omega_min && o.base_points >= 2) {
            return Err(Error::Parse(
                "need tol >= 0, 0 < omega-min < omega-max and at least 2 grid points".into(),
            ));
        }
        Ok(o)
    }
}

#[derive(Args, Debug)]
struct ClassArgs {
    /// Uncertainty class (see README for the list).
    #[arg(long = "class", value_parser = parse_class)]
    kind: ClassKind,
    /// Static-gain bound for the bounded classes.
    #[arg(long)]
    gamma: Option<f64>,
}

impl ClassArgs {
    fn class(&self) -> Result<UncertaintyClass, Error> {
        UncertaintyClass::new(self.kind, self.gamma)
    }
}

fn parse_class(s: &str) -> Result<ClassKind, String> {
    s.parse().map_err(|e: Error| {
        let names: Vec<_> = ClassKind::ALL.iter().map(|k| k.cli_name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Oracle,
    Lemma2,
    Lemma3,
    Lemma4,
    Thm1,
    Thm2,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Classify a system as SNI, NI or not NI.
    Classify { plant: PathBuf },
    /// Decide internal stability of the positive-feedback loop [P, C].
    Certify {
        plant: PathBuf,
        controller: PathBuf,
        #[arg(long, value_enum, default_value = "oracle")]
        method: Method,
        /// Psi matrix for lemma4: a JSON list of rows, inline or as a file.
        #[arg(long)]
        psi: Option<String>,
    },
    /// Check whether a controller stabilizes every plant in a class.
    RobustCheck {
        #[command(flatten)]
        class: ClassArgs,
        controller: PathBuf,
    },
    /// Build and verify an in-class plant that destabilizes the controller.
    Attack {
        #[command(flatten)]
        class: ClassArgs,
        controller: PathBuf,
        /// Where to write the recipe JSON (it embeds the plant).
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Sample in-class plants and confirm each closed loop is stable.
    ProveSufficiency {
        #[command(flatten)]
        class: ClassArgs,
        controller: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a random plant from a class.
    Sample {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(short = 'n', long = "dim", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        modes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::Classify { .. } => "classify",
            Verb::Certify { .. } => "certify",
            Verb::RobustCheck { .. } => "robust-check",
            Verb::Attack { .. } => "attack",
            Verb::ProveSufficiency { .. } => "prove-sufficiency",
            Verb::Sample { .. } => "sample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub omega_min: f64,
    pub omega_max: f64,
    pub base_points: usize,
    pub refine: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub threads: usize,
}

/// Everything a run decided, with the inputs and settings it depended on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub verb: String,
    pub exit_code: i32,
    /// One-word outcome, e.g. `SNI`, `Stable`, `Violated`, `Verified`.
    pub verdict: String,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    /// Full structured result of the underlying analysis.
    pub verdicts: Value,
    pub witnesses: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub grid: Option<GridMetadata>,
    pub timing: Timing,
    pub error: Option<String>,
}

impl RunReport {
    fn new(verb: &str) -> Self {
        RunReport {
            verb: verb.into(),
            exit_code: EXIT_USAGE,
            verdict: String::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            verdicts: Value::Null,
            witnesses: Value::Null,
            tolerances: BTreeMap::new(),
            grid: None,
            timing: Timing {
                elapsed_ms: 0.0,
                threads: 0,
            },
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Human-readable summary.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}: {} (exit {})\n", self.verb, self.verdict, self.exit_code);
        if let Some(e) = &self.error {
            s += &format!("  error: {e}\n");
        }
        for f in &self.inputs {
            s += &format!("  {} {} sha256:{}\n", f.role, f.path, &f.sha256[..16]);
        }
        if !self.witnesses.is_null() {
            s += &format!("  witness: {}\n", without_nulls(&self.witnesses));
        }
        for o in &self.outputs {
            s += &format!("  wrote {o}\n");
        }
        s += &format!("  {:.1} ms on {} threads\n", self.timing.elapsed_ms, self.timing.threads);
        s
    }
}

fn without_nulls(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(_, x)| !x.is_null())
                .map(|(k, x)| (k.clone(), without_nulls(x)))
                .collect(),
        ),
        other => other.clone(),
    }
}

fn label<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => "?".into(),
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

/// Errors that are verdicts about the system rather than bad input.
fn negative(e: &Error) -> bool {
    matches!(
        e,
        Error::SufficiencyCounterexampleFound { .. } | Error::NotSynthesizable(_) | Error::VerificationFailed(_)
    )
}

struct Ctx {
    report: RunReport,
}

impl Ctx {
    fn read(&mut self, role: &str, path: &Path) -> Result<String, Error> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.report.inputs.push(InputFile {
            role: role.into(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Reads a system file; recipe files from `attack` are accepted too.
    fn system(&mut self, role: &str, path: &Path) -> Result<TransferMatrix, Error> {
        let text = self.read(role, path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        match value.get("plant") {
            Some(p) if value.get("entries").is_none() => system_from_str(&p.to_string()),
            _ => system_from_str(&text),
        }
    }

    fn write(&mut self, path: &Path, text: &str) -> Result<(), Error> {
        std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.report.outputs.push(path.display().to_string());
        Ok(())
    }

    fn grid(&mut self, o: &ClassifyOptions) {
        self.report.tolerances.insert("ni_tol".into(), o.tol);
        self.report.grid = Some(GridMetadata {
            omega_min: o.omega_min,
            omega_max: o.omega_max,
            base_points: o.base_points,
            refine: o.refine,
        });
    }

    fn decide(&mut self, verdict: impl Into<String>, ok: bool) {
        self.report.verdict = verdict.into();
        self.report.exit_code = if ok { EXIT_AFFIRMATIVE } else { EXIT_NEGATIVE };
    }
}

fn execute(cli: &Cli, ctx: &mut Ctx) -> Result<(), Error> {
    let opts = cli.grid.options()?;
    match &cli.verb {
        Verb::Classify { plant } => {
            let g = ctx.system("plant", plant)?;
            ctx.grid(&opts);
            let c = classify_ni_with(&g, &opts);
            ctx.report.witnesses = to_value(&c.witness);
            ctx.report.verdicts = to_value(&c);
            ctx.decide(label(&c.verdict), c.verdict.is_ni());
        }
        Verb::Certify {
            plant,
            controller,
            method,
            psi,
        } => {
            let p = ctx.system("plant", plant)?;
            let c = ctx.system("controller", controller)?;
            if p.dim() != c.dim() {
                return Err(Error::DimensionMismatch(format!("plant is {0}x{0}, controller {1}x{1}", p.dim(), c.dim())));
            }
            ctx.report.tolerances.insert("margin".into(), MARGIN);
            ctx.report.tolerances.insert("oracle_tol".into(), ORACLE_TOL);
            let psi = match psi {
                Some(text) => {
                    let path = Path::new(text);
                    let raw = if path.is_file() { ctx.read("psi", path)? } else { text.clone() };
                    Some(PsiParameter::new(matrix_from_str(&raw)?, &p.instantaneous_gain())?)
                }
                None => None,
            };
            let v = match method {
                Method::Oracle => oracle_stability(&p, &c)?,
                Method::Lemma2 => lemma2_check(&p, &c)?,
                Method::Lemma3 => lemma3_check(&p, &c)?,
                Method::Lemma4 => lemma4_check(&p, &c, psi.as_ref())?,
                Method::Thm2 => theorem2_check(&p, &c)?,
                Method::Thm1 => {
                    let h = theorem1_check(&p, &c)?;
                    ctx.report.verdicts = to_value(&h);
                    let status = if h.equivalent_verdict { Status::Stable } else { Status::Unstable };
                    ctx.decide(label(&status), h.equivalent_verdict);
                    return Ok(());
                }
            };
            ctx.report.witnesses = json!({
                "offending_pole": to_value(&v.offending_pole),
                "failed_condition": v.failed_condition,
            });
            ctx.report.verdicts = to_value(&v);
            ctx.decide(label(&v.status), v.status == Status::Stable);
        }
        Verb::RobustCheck { class, controller } => {
            let cls = class.class()?;
            let c = ctx.system("controller", controller)?;
            ctx.grid(&opts);
            let v = necessity_check_with(&c, &cls, &opts)?;
            ctx.report.witnesses = to_value(&v.violation);
            ctx.report.verdicts = to_value(&v);
            ctx.decide(label(&v.status), v.status == NecessityStatus::RobustlyStabilizing);
        }
        Verb::Attack { class, controller, out } => {
            let cls = class.class()?;
            let c = ctx.system("controller", controller)?;
            ctx.grid(&opts);
            ctx.report.tolerances.insert("pin_tol".into(), PIN_TOL);
            let v = necessity_check_with(&c, &cls, &opts)?;
            if v.status == NecessityStatus::RobustlyStabilizing {
                ctx.report.verdicts = to_value(&v);
                ctx.decide("NoCounterexample", false);
                return Ok(());
            }
            let rec = synthesize_destabilizer(&c, &cls, &v)?;
            let check = verify_counterexample(&rec, &c, &cls)?;
            let recipe = serde_json::to_string_pretty(&rec).expect("recipe is serializable");
            if let Some(path) = out {
                ctx.write(path, &recipe)?;
            }
            ctx.report.witnesses = to_value(&rec);
            ctx.report.verdicts = json!({ "necessity": to_value(&v), "verification": to_value(&check) });
            ctx.decide("Verified", true);
        }
        Verb::ProveSufficiency {
            class,
            controller,
            samples,
            seed,
        } => {
            let cls = class.class()?;
            let c = ctx.system("controller", controller)?;
            ctx.report.tolerances.insert("oracle_tol".into(), ORACLE_TOL);
            match sufficiency_check(&c, &cls, *samples, *seed) {
                Ok(r) => {
                    ctx.report.verdicts = to_value(&r);
                    ctx.decide("AllStable", true);
                }
                Err(Error::PreconditionViolated(why)) => {
                    ctx.report.verdicts = json!({ "precondition": why });
                    ctx.decide("NotApplicable", false);
                }
                Err(e) => return Err(e),
            }
        }
        Verb::Sample {
            class,
            n,
            modes,
            seed,
            scale,
            out,
        } => {
            let mut spec = SampleSpec::new(class.class()?, *n, *modes, *seed);
            spec.scale = *scale;
            let p = sample_plant(&spec)?;
            let text = system_to_string(&p);
            if let Some(path) = out {
                ctx.write(path, &text)?;
            }
            ctx.report.verdicts = json!({ "spec": to_value(&spec), "plant": serde_json::from_str::<Value>(&text).unwrap_or(Value::Null) });
            ctx.decide("Sampled", true);
        }
    }
    Ok(())
}

fn thread_count() -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Parse(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `argv` (program name first), runs the verb and emits the report:
/// text on stdout, plus JSON at `--json` when given.
pub fn run<I, T>(argv: I) -> (i32, RunReport)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let start = Instant::now();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_AFFIRMATIVE };
            let _ = e.print();
            let mut report = RunReport::new("");
            report.exit_code = code;
            report.verdict = if code == 0 { "Help" } else { "UsageError" }.into();
            report.error = (code != 0).then(|| e.to_string());
            return (code, report);
        }
    };
    let mut ctx = Ctx {
        report: RunReport::new(cli.verb.name()),
    };
    let outcome = thread_count().and_then(|k| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(k) = k {
            b = b.num_threads(k);
        }
        let pool = b.build().map_err(|e| Error::Parse(e.to_string()))?;
        ctx.report.timing.threads = pool.current_num_threads();
        pool.install(|| execute(&cli, &mut ctx))
    });
    if let Err(e) = outcome {
        ctx.report.exit_code = if negative(&e) { EXIT_NEGATIVE } else { EXIT_USAGE };
        ctx.report.verdict = if negative(&e) { "Failed" } else { "InputError" }.into();
        ctx.report.error = Some(e.to_string());
    }
    ctx.report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, ctx.report.to_json()) {
            eprintln!("cannot write {}: {e}", path.display());
            ctx.report.exit_code = EXIT_USAGE;
        }
    }
    print!("{}", ctx.report.to_text());
    if let Some(e) = &ctx.report.error {
        eprintln!("ni-certify: {e}");
    }
    (ctx.report.exit_code, ctx.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_class_name_parses() {
        for k in ClassKind::ALL {
            assert_eq!(parse_class(k.cli_name()), Ok(k));
        }
        assert!(parse_class("sni").is_err());
    }

    #[test]
    fn unknown_verb_is_usage_error() {
        let (code, rep) = run(["ni-certify", "frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(rep.error.is_some());
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, rep) = run(["ni-certify", "classify", "/nonexistent/plant.json"]);
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(rep.verdict, "InputError");
    }

    #[test]
    fn thread_env_unset_or_valid() {
        // Parsing only; the variable is not set in this process.
        assert!(matches!(thread_count(), Ok(None) | Ok(Some(_))));
    }

    #[test]
    fn report_round_trip() {
        let mut r = RunReport::new("classify");
        r.verdicts = json!({"a": [1.5, -2e-300], "b": null});
        r.tolerances.insert("ni_tol".into(), 1e-9);
        r.timing.elapsed_ms = 0.1 + 0.2;
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }
}
