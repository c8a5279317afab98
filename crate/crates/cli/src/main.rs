//! `hitasym`: exact hitting-time statistics, the realization pipeline and the
//! Monte Carlo cross-check from the command line.
//!
//! Exit status is 0 when every requested check passes, 1 on a violation or an
//! input that breaks an invariant, 2 on usage, schema or I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hitasym_core::conditions::{
    check_class_f, check_conditions_c, inequality_i_witness, to_rational_f,
};
use hitasym_core::distributions::rational::to_f64;
use hitasym_core::distributions::{
    format_rational, levy_distance, parse_rational, sup_distance, sup_distance_all, Builtin, Cdf,
    Curve,
};
use hitasym_core::json::{read_document, step_csv, target_csv, Document, LoadError};
use hitasym_core::montecarlo::simulate_hitting;
use hitasym_core::odometer::realize;
use hitasym_core::rationalize::{
    check_star, rationalize_step_with_budget, rationalize_target_with_budget,
};
use hitasym_core::stamp::{build_system, derive_params, make_stamp, verify_roundtrip};
use hitasym_core::{Error, Rational, StepCdf, TargetF};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hitasym",
    version,
    about = "Hitting-time distributions: exact engine, realization pipeline, simulation"
)]
struct Cli {
    /// Output encoding; CSV renders curves as `t,F` rows.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Ks,
    Sup,
    Levy,
}

#[derive(Subcommand)]
enum Command {
    /// Conditions C and inequality (I) for a step CDF, rational CDF or cyclic system.
    CheckCdf { input: PathBuf },
    /// Membership of a piecewise-linear target in the class of concave limits.
    CheckClassf { input: PathBuf },
    /// Build the cyclic system and stamp for a rational CDF.
    Stamp {
        input: PathBuf,
        /// Check that the built system reproduces the input exactly.
        #[arg(long)]
        verify: bool,
    },
    /// Hitting-time CDF of a cyclic system.
    Hitting { input: PathBuf },
    /// Return-time CDF of a cyclic system.
    Return { input: PathBuf },
    /// Rational approximation within eps of a target or step CDF.
    Rationalize {
        input: PathBuf,
        #[arg(long)]
        eps: String,
        /// Print N, q, K and the closeness verdict to standard error.
        #[arg(long)]
        report: bool,
    },
    /// Realize a target along a decreasing eps schedule on odometer towers.
    Realize {
        /// A target JSON file or a builtin such as `exp1` or `scaled_exp(1/2,2)`.
        #[arg(long)]
        target: String,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<String>,
        #[arg(long, default_value_t = 2)]
        margin: u32,
        /// Sampling mesh for builtin targets.
        #[arg(long, default_value = "1/64")]
        mesh: String,
        /// Write each stage's marked set as a cyclic-system JSON here.
        #[arg(long)]
        emit_sets: Option<PathBuf>,
        /// Write each stage's hitting CDF as CSV here.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Sample hitting times of a system description.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "HITASYM_SEED", default_value_t = 0)]
        seed: u64,
        /// Trajectories longer than this are censored.
        #[arg(long, default_value_t = 1_000_000)]
        horizon: u64,
    },
    /// Distance between two curve files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::Ks)]
        metric: Metric,
        /// Right end of the window for `sup`; defaults to the last knot of either curve.
        #[arg(long)]
        horizon: Option<String>,
    },
}

/// A failed run: the message goes to standard error, the code is the exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Invariant(_) => Failure::invalid(e.to_string()),
            LoadError::Io(_) | LoadError::Schema(_) => Failure::usage(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::usage(e.to_string()),
            _ => Failure::invalid(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<(), Failure> {
        let text = if text.ends_with('\n') {
            text.to_string()
        } else {
            format!("{text}\n")
        };
        match &self.out {
            Some(path) => write_file(path, &text),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::usage(format!("cannot write output: {e}"))),
        }
    }

    fn json(&self, value: &serde_json::Value) -> Result<(), Failure> {
        self.emit(&serde_json::to_string_pretty(value).expect("plain data"))
    }

    fn step(&self, f: &StepCdf) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.emit(&Document::Step(f.clone()).to_json()),
            Format::Csv => self.emit(&step_csv(f)),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", path.display())))
}

fn parse_arg(name: &str, text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::usage(format!("--{name}: {e}")))
}

fn mismatch(path: &Path, doc: &Document, wanted: &str) -> Failure {
    Failure::usage(format!(
        "{}: expected {wanted}, found a {} document",
        path.display(),
        doc.kind()
    ))
}

/// Any document that denotes a step CDF: the curve itself, a rational CDF,
/// a cyclic system (its hitting CDF) or a sample (its empirical CDF).
fn step_of(path: &Path, doc: Document) -> Result<StepCdf, Failure> {
    Ok(match doc {
        Document::Step(f) => f,
        Document::Rational(f) => f.step_cdf(),
        Document::Cyclic(s) => s.hitting_cdf(),
        Document::Empirical(e) => e.to_step_cdf()?,
        other => return Err(mismatch(path, &other, "a step CDF")),
    })
}

fn load_step(path: &Path) -> Result<StepCdf, Failure> {
    step_of(path, read_document(path)?)
}

fn load_curve(path: &Path) -> Result<Curve, Failure> {
    match read_document(path)? {
        Document::Target(f) => Ok(Curve::Target(f)),
        doc => step_of(path, doc).map(Curve::Step),
    }
}

fn load_cyclic(path: &Path) -> Result<hitasym_core::CyclicSystem, Failure> {
    match read_document(path)? {
        Document::Cyclic(s) => Ok(s),
        Document::System(hitasym_core::montecarlo::SystemSpec::Cyclic(s)) => Ok(s),
        other => Err(mismatch(path, &other, "a cyclic system")),
    }
}

fn load_target(spec: &str, mesh: &Rational) -> Result<TargetF, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        return match read_document(path)? {
            Document::Target(f) => Ok(f),
            other => Err(mismatch(path, &other, "a piecewise-linear target")),
        };
    }
    let builtin = Builtin::parse(spec).map_err(|e| Failure::usage(format!("--target: {e}")))?;
    builtin
        .sample(mesh)
        .map_err(|e| Failure::usage(format!("--target: {e}")))
}

fn rational_json(x: &Rational) -> serde_json::Value {
    json!({ "exact": format_rational(x), "approx": to_f64(x) })
}

fn check_cdf(out: &Output, input: &Path) -> Outcome {
    let f = load_step(input)?;
    let conditions = check_conditions_c(&f);
    let inequality = f.jumps().first().map(|(alpha, _)| {
        let witness = inequality_i_witness(&f, alpha);
        json!({
            "alpha": format_rational(alpha),
            "holds": witness.is_none(),
            "witness": witness.map(|(s, t)| json!({ "s": format_rational(&s), "t": format_rational(&t) })),
        })
    });
    let inequality_ok = inequality
        .as_ref()
        .is_none_or(|v| v["holds"] == json!(true));
    let rational = if conditions.pass {
        to_rational_f(&f)
            .ok()
            .map(|r| serde_json::to_value(r).expect("plain data"))
    } else {
        None
    };
    for v in &conditions.violations {
        eprintln!("violation: {v}");
    }
    let pass = conditions.pass && inequality_ok;
    out.json(&json!({
        "pass": pass,
        "conditions": conditions,
        "inequality_i": inequality,
        "rational_f": rational,
    }))?;
    Ok(pass)
}

fn check_classf(out: &Output, input: &Path) -> Outcome {
    let f = match read_document(input)? {
        Document::Target(f) => f,
        other => return Err(mismatch(input, &other, "a piecewise-linear target")),
    };
    let report = check_class_f(&f);
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    out.json(&serde_json::to_value(&report).expect("plain data"))?;
    Ok(report.pass)
}

fn stamp(out: &Output, input: &Path, verify: bool) -> Outcome {
    let f = match read_document(input)? {
        Document::Rational(f) => f,
        other => return Err(mismatch(input, &other, "a rational CDF")),
    };
    let params = derive_params(&f)?;
    let system = build_system(&params);
    let verified = verify.then(|| verify_roundtrip(&f));
    if verified == Some(false) {
        eprintln!("round trip failed: the built system does not reproduce the input");
    }
    match out.format {
        Format::Csv => out.step(&system.hitting_cdf())?,
        Format::Json => out.json(&json!({
            "params": params,
            "system": system,
            "stamp": make_stamp(&params),
            "verified": verified,
        }))?,
    }
    Ok(verified != Some(false))
}

fn rationalize(out: &Output, input: &Path, eps: &str, report: bool) -> Outcome {
    let eps = parse_arg("eps", eps)?;
    if eps <= Rational::from_integer(0.into()) {
        return Err(Failure::usage("--eps must be positive"));
    }
    let doc = read_document(input)?;
    let (result, star) = match &doc {
        Document::Target(f0) => {
            let r = rationalize_target_with_budget(f0, &eps)?;
            let star = check_star(f0, &r.rational_f, &eps);
            (r, star)
        }
        Document::Step(f0) => {
            let r = rationalize_step_with_budget(f0, &eps)?;
            let star = check_star(f0, &r.rational_f, &eps);
            (r, star)
        }
        other => return Err(mismatch(input, other, "a target or step CDF")),
    };
    let f = &result.rational_f;
    if report {
        eprintln!(
            "N = {}, q = {}, K = {}, closeness within eps: {}",
            result.budget.n,
            f.q(),
            f.len(),
            if star { "pass" } else { "fail" }
        );
    }
    match out.format {
        Format::Json => out.emit(&Document::Rational(f.clone()).to_json())?,
        Format::Csv => out.step(&f.step_cdf())?,
    }
    Ok(star)
}

const SETS_NOTE: &str = "Residue i of each system encodes the m-cylinder of the dyadic odometer whose index is i - 1.\n";

fn realize_cmd(
    out: &Output,
    target: &str,
    eps_list: &[String],
    margin: u32,
    mesh: &str,
    emit_sets: Option<&Path>,
    csv_dir: Option<&Path>,
) -> Outcome {
    let mesh = parse_arg("mesh", mesh)?;
    let schedule = eps_list
        .iter()
        .map(|e| parse_arg("eps-list", e))
        .collect::<Result<Vec<_>, _>>()?;
    let f0 = load_target(target, &mesh)?;
    let trace = match realize(&f0, &schedule, margin) {
        Err(Error::BadSchedule) => {
            return Err(Failure::usage(
                "--eps-list must be positive and strictly decreasing",
            ))
        }
        other => other?,
    };
    let mut pass = true;
    for (i, s) in trace.stages.iter().enumerate() {
        let within =
            s.levy_distance <= &s.eps * Rational::from_integer(2.into()) && s.measure < s.eps;
        pass &= within;
        eprintln!(
            "stage {i}: eps = {}, q = {}, m = {}, mu = {:.6}, levy = {:.6}{}",
            format_rational(&s.eps),
            s.q,
            s.m,
            to_f64(&s.measure),
            to_f64(&s.levy_distance),
            if within { "" } else { " (outside 2 eps)" }
        );
    }
    if let Some(dir) = emit_sets {
        create_dir(dir)?;
        write_file(&dir.join("NOTE.txt"), SETS_NOTE)?;
        for (i, s) in trace.stages.iter().enumerate() {
            write_file(
                &dir.join(format!("stage_{i}.json")),
                &Document::Cyclic(s.system()).to_json(),
            )?;
        }
        eprint!("{SETS_NOTE}");
    }
    if let Some(dir) = csv_dir {
        create_dir(dir)?;
        write_file(&dir.join("target.csv"), &target_csv(&f0))?;
        for (i, s) in trace.stages.iter().enumerate() {
            write_file(
                &dir.join(format!("stage_{i}.csv")),
                &step_csv(&s.hitting_cdf),
            )?;
        }
    }
    match out.format {
        Format::Json => out.json(&serde_json::to_value(&trace).expect("plain data"))?,
        Format::Csv => {
            let mut text = String::from("stage,eps,q,m,r,leftover,measure,levy_distance\n");
            for (i, s) in trace.stages.iter().enumerate() {
                text.push_str(&format!(
                    "{i},{},{},{},{},{},{},{}\n",
                    format_rational(&s.eps),
                    s.q,
                    s.m,
                    s.r,
                    s.leftover,
                    format_rational(&s.measure),
                    format_rational(&s.levy_distance)
                ));
            }
            out.emit(&text)?;
        }
    }
    Ok(pass)
}

fn simulate(out: &Output, system: &Path, samples: u64, seed: u64, horizon: u64) -> Outcome {
    let spec = match read_document(system)? {
        Document::System(s) => s,
        Document::Cyclic(s) => hitasym_core::montecarlo::SystemSpec::Cyclic(s),
        other => return Err(mismatch(system, &other, "a system description")),
    };
    let e = simulate_hitting(&spec, samples, seed, horizon)?;
    if e.censored() > 0 {
        eprintln!(
            "{} of {samples} trajectories censored at horizon {horizon}",
            e.censored()
        );
    }
    match out.format {
        Format::Json => out.emit(&Document::Empirical(e.clone()).to_json())?,
        Format::Csv => out.emit(&format!("# seed {seed}\n{}", step_csv(&e.to_step_cdf()?)))?,
    }
    Ok(true)
}

fn distance(out: &Output, a: &Path, b: &Path, metric: Metric, horizon: Option<&str>) -> Outcome {
    let f = load_curve(a)?;
    let g = load_curve(b)?;
    let (name, d) = match metric {
        Metric::Ks => ("ks", sup_distance_all(&f, &g)),
        Metric::Levy => ("levy", levy_distance(&f, &g)),
        Metric::Sup => {
            let h = match horizon {
                Some(h) => parse_arg("horizon", h)?,
                None => f
                    .knots()
                    .into_iter()
                    .chain(g.knots())
                    .max()
                    .unwrap_or_else(|| Rational::from_integer(1.into())),
            };
            if h <= Rational::from_integer(0.into()) {
                return Err(Failure::usage("--horizon must be positive"));
            }
            ("sup", sup_distance(&f, &g, &h))
        }
    };
    match out.format {
        Format::Json => out.json(&json!({ "metric": name, "distance": rational_json(&d) }))?,
        Format::Csv => out.emit(&format!(
            "metric,exact,approx\n{name},{},{}",
            format_rational(&d),
            to_f64(&d)
        ))?,
    }
    Ok(true)
}

fn echo_config(command: &Command) {
    let line = match command {
        Command::CheckCdf { input } => format!("check-cdf input={}", input.display()),
        Command::CheckClassf { input } => format!("check-classf input={}", input.display()),
        Command::Stamp { input, verify } => {
            format!("stamp input={} verify={verify}", input.display())
        }
        Command::Hitting { input } => format!("hitting input={}", input.display()),
        Command::Return { input } => format!("return input={}", input.display()),
        Command::Rationalize { input, eps, .. } => {
            format!("rationalize input={} eps={eps}", input.display())
        }
        Command::Realize {
            target,
            eps_list,
            margin,
            mesh,
            ..
        } => format!(
            "realize target={target} eps-list={} margin={margin} mesh={mesh}",
            eps_list.join(",")
        ),
        Command::Simulate {
            system,
            samples,
            seed,
            horizon,
        } => format!(
            "simulate system={} samples={samples} seed={seed} horizon={horizon}",
            system.display()
        ),
        Command::Distance { a, b, .. } => format!("distance a={} b={}", a.display(), b.display()),
    };
    eprintln!("hitasym {line}");
}

fn run(cli: Cli) -> Outcome {
    let out = Output {
        format: cli.format,
        out: cli.out,
    };
    echo_config(&cli.command);
    match cli.command {
        Command::CheckCdf { input } => check_cdf(&out, &input),
        Command::CheckClassf { input } => check_classf(&out, &input),
        Command::Stamp { input, verify } => stamp(&out, &input, verify),
        Command::Hitting { input } => out.step(&load_cyclic(&input)?.hitting_cdf()).map(|_| true),
        Command::Return { input } => out.step(&load_cyclic(&input)?.return_cdf()).map(|_| true),
        Command::Rationalize { input, eps, report } => rationalize(&out, &input, &eps, report),
        Command::Realize {
            target,
            eps_list,
            margin,
            mesh,
            emit_sets,
            csv_dir,
        } => realize_cmd(
            &out,
            &target,
            &eps_list,
            margin,
            &mesh,
            emit_sets.as_deref(),
            csv_dir.as_deref(),
        ),
        Command::Simulate {
            system,
            samples,
            seed,
            horizon,
        } => simulate(&out, &system, samples, seed, horizon),
        Command::Distance {
            a,
            b,
            metric,
            horizon,
        } => distance(&out, &a, &b, metric, horizon.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
