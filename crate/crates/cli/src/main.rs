//! `stieltjes` command-line front end.
//!
//! Exit codes: 0 success, 1 malformed input or usage, 2 a verification
//! failed numerically, 3 a precondition of the requested identity fails.

mod batch;
mod doc;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stieltjes::oracle::oracle_integrate;
use stieltjes::random::{
    FlatContinuity, InstanceGenerator, InstanceShape, IntegrandKind, SEED_ENV,
};
use stieltjes::scalar::to_f64;
use stieltjes::substitution::{Identity, ATOMIC_TOLERANCE};
use stieltjes::{
    check_inequalities, check_sandwich, decompose, integrate, measure_from, verify_identity, Error,
    InverseSide, MonotoneFn, Monotonicity, OracleConfig, PiecewiseFn, SampleRule, Scalar, Side,
    VerificationReport, VerifyOptions,
};

use crate::doc::{AnyFn, DocError};

#[derive(Parser)]
#[command(
    name = "stieltjes",
    version,
    about = "Exact Lebesgue-Stieltjes integrals and substitution checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Value,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum InverseArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Left,
    Right,
    Midpoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlatArg {
    Free,
    Right,
    Left,
    Continuous,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegrandArg {
    Arbitrary,
    Continuous,
    Increasing,
    Decreasing,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function (monotone or integrand); several --at give an array.
    Eval {
        file: PathBuf,
        #[arg(long, required = true, allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long, value_enum, default_value = "value")]
        side: SideArg,
    },
    /// Generalized inverse X (left), Ξ (right), or the selector (1-θ)X + θΞ.
    Invert {
        file: PathBuf,
        #[arg(long, value_enum, conflicts_with = "theta")]
        side: Option<InverseArg>,
        #[arg(long)]
        theta: Option<String>,
    },
    /// The composition N ∘ M.
    Compose { n: PathBuf, m: PathBuf },
    /// Flat levels of M with the ends of their level sets.
    Flats { m: PathBuf },
    /// N = n1 + n2 + n3 with respect to the flat levels of M.
    Decompose { n: PathBuf, m: PathBuf },
    /// Closed-form ∫ f dF, optionally next to the brute-force sum.
    Integrate {
        f: PathBuf,
        #[arg(value_name = "F")]
        big_f: PathBuf,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-4)]
        mesh: f64,
        #[arg(long, value_enum, default_value = "midpoint")]
        rule: RuleArg,
    },
    /// Check a substitution identity (eq1..eq6).
    Verify {
        tag: String,
        /// f on the domain of M (eq1, eq3-eq5) or g on its range (eq2, eq6).
        integrand: PathBuf,
        m: PathBuf,
        n: PathBuf,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Report even when the hypothesis of the identity fails.
        #[arg(long)]
        force: bool,
        /// Inverse carrying the n1 term in eq5/eq6.
        #[arg(long, value_enum, default_value = "left")]
        side: InverseArg,
        /// Compare interval masses at x (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<String>,
    },
    /// One-sided bounds for a monotone integrand.
    Inequalities {
        /// g on the range of M, or f on its domain with --domain-integrand.
        g: PathBuf,
        m: PathBuf,
        n: PathBuf,
        #[arg(long)]
        decreasing: bool,
        /// Treat the integrand as f on the domain of M (sandwich only).
        #[arg(long)]
        domain_integrand: bool,
        #[arg(long, default_value_t = ATOMIC_TOLERANCE)]
        tol: f64,
    },
    /// CSV rows x,left,value,right for plotting.
    PlotData {
        file: PathBuf,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Random instance (seed from --seed or STIELTJES_SEED).
    Generate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "free")]
        n_at_flats: FlatArg,
        #[arg(long)]
        continuous_m: bool,
        #[arg(long)]
        strict_m: bool,
        #[arg(long, value_enum, default_value = "arbitrary")]
        integrand: IntegrandArg,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(0..=3))]
        max_degree: u8,
        /// Write batch instance files here instead of printing one instance.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value = "eq5")]
        identity: String,
    },
    /// Verify every *.json instance in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Why a command did not produce its normal output.
enum Failure {
    Input { source: String, err: DocError },
    Core(Error),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_precondition() => 3,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input { source, err } => format!("{source}: {err}"),
            Failure::Core(e) => e.to_string(),
            Failure::Usage(m) => m.clone(),
        }
    }

    fn json(&self) -> Value {
        let body = match self {
            Failure::Input { source, err } => json!({
                "kind": "input",
                "file": source,
                "path": err.path,
                "message": err.message,
            }),
            Failure::Core(Error::Precondition {
                identity,
                reason,
                location,
            }) => json!({
                "kind": "precondition",
                "identity": identity.tag(),
                "level": location,
                "reason": reason,
                "message": self.message(),
            }),
            Failure::Core(e) => json!({ "kind": "invalid", "message": e.to_string() }),
            Failure::Usage(m) => json!({ "kind": "usage", "message": m }),
        };
        json!({ "error": body })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<u8, Failure>;

fn read_value(path: &Path) -> Result<Value, Failure> {
    let source = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Failure::Input {
        source: source.clone(),
        err: DocError {
            path: String::new(),
            message: format!("cannot read: {e}"),
        },
    })?;
    doc::parse_json(&text).map_err(|err| Failure::Input { source, err })
}

fn load<T>(path: &Path, build: fn(Value) -> Result<T, DocError>) -> Result<T, Failure> {
    build(read_value(path)?).map_err(|err| Failure::Input {
        source: path.display().to_string(),
        err,
    })
}

fn load_monotone(path: &Path) -> Result<MonotoneFn, Failure> {
    load(path, doc::monotone_from_value)
}

fn load_integrand(path: &Path) -> Result<PiecewiseFn, Failure> {
    load(path, doc::integrand_from_value)
}

fn arg_scalar(name: &str, text: &str) -> Result<Scalar, Failure> {
    doc::parse_scalar(text).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn emit(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn side(arg: SideArg) -> Side {
    match arg {
        SideArg::Left => Side::Left,
        SideArg::Value => Side::Value,
        SideArg::Right => Side::Right,
    }
}

fn inverse_side(arg: InverseArg) -> InverseSide {
    match arg {
        InverseArg::Left => InverseSide::Left,
        InverseArg::Right => InverseSide::Right,
    }
}

fn report_code(reports: &[VerificationReport]) -> u8 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        2
    }
}

fn parse_identity(tag: &str) -> Result<Identity, Failure> {
    match Identity::from_tag(tag) {
        Some(id) if !id.is_inequality() => Ok(id),
        Some(_) => Err(Failure::Usage(format!(
            "{tag} is an inequality; use `inequalities`"
        ))),
        None => Err(Failure::Usage(format!(
            "unknown identity tag {tag:?} (expected eq1..eq6)"
        ))),
    }
}

fn plot_rows(file: &Path, samples: usize) -> Result<Vec<[f64; 4]>, Failure> {
    let rows = match doc::any_from_value(read_value(file)?).map_err(|err| Failure::Input {
        source: file.display().to_string(),
        err,
    })? {
        AnyFn::Monotone(f) => f
            .sample_points(samples)
            .iter()
            .map(|x| {
                Ok([
                    to_f64(x),
                    to_f64(&f.eval_at(x, Side::Left)?),
                    to_f64(&f.eval_at(x, Side::Value)?),
                    to_f64(&f.eval_at(x, Side::Right)?),
                ])
            })
            .collect::<Result<Vec<_>, Error>>()?,
        AnyFn::Integrand(f) => {
            let grid = MonotoneFn::identity(f.lo().clone(), f.hi().clone())?;
            let mut xs = grid.sample_points(samples);
            xs.extend(f.boundaries().iter().cloned());
            xs.sort();
            xs.dedup();
            xs.iter()
                .map(|x| {
                    Ok([
                        to_f64(x),
                        to_f64(&f.limit(x, Side::Left)?),
                        to_f64(&f.limit(x, Side::Value)?),
                        to_f64(&f.limit(x, Side::Right)?),
                    ])
                })
                .collect::<Result<Vec<_>, Error>>()?
        }
    };
    Ok(rows)
}

fn shape_from(
    n_at_flats: FlatArg,
    continuous_m: bool,
    strict_m: bool,
    integrand: IntegrandArg,
    max_degree: u8,
) -> InstanceShape {
    InstanceShape {
        n_at_flats: match n_at_flats {
            FlatArg::Free => FlatContinuity::Free,
            FlatArg::Right => FlatContinuity::Right,
            FlatArg::Left => FlatContinuity::Left,
            FlatArg::Continuous => FlatContinuity::Continuous,
        },
        m_continuous: continuous_m,
        m_strict: strict_m,
        integrand: match integrand {
            IntegrandArg::Arbitrary => IntegrandKind::Arbitrary,
            IntegrandArg::Continuous => IntegrandKind::Continuous,
            IntegrandArg::Increasing => IntegrandKind::Monotone(Monotonicity::Increasing),
            IntegrandArg::Decreasing => IntegrandKind::Monotone(Monotonicity::Decreasing),
        },
        max_degree: max_degree as usize,
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Eval { file, at, side: s } => {
            let f = doc::any_from_value(read_value(&file)?).map_err(|err| Failure::Input {
                source: file.display().to_string(),
                err,
            })?;
            let mut values = Vec::with_capacity(at.len());
            for text in &at {
                let x = arg_scalar("at", text)?;
                let v = match &f {
                    AnyFn::Monotone(f) => f.eval_at(&x, side(s))?,
                    AnyFn::Integrand(f) => f.limit(&x, side(s))?,
                };
                values.push(doc::scalar_json(&v));
            }
            match <[Value; 1]>::try_from(values) {
                Ok([single]) => emit(&single),
                Err(values) => emit(&Value::Array(values)),
            }
        }
        Command::Invert {
            file,
            side: s,
            theta,
        } => {
            let m = load_monotone(&file)?;
            let w = match (s, theta) {
                (_, Some(t)) => m.selector_inverse(&arg_scalar("theta", &t)?)?,
                (Some(InverseArg::Right), None) => m.right_inverse()?,
                (Some(InverseArg::Left) | None, None) => m.left_inverse()?,
            };
            emit(&doc::monotone_json(&w));
        }
        Command::Compose { n, m } => {
            let (n, m) = (load_monotone(&n)?, load_monotone(&m)?);
            emit(&doc::monotone_json(&n.compose(&m)?));
        }
        Command::Flats { m } => {
            emit(&doc::flats_json(&load_monotone(&m)?.flat_levels()));
        }
        Command::Decompose { n, m } => {
            let (n, m) = (load_monotone(&n)?, load_monotone(&m)?);
            emit(&doc::decomposition_json(&decompose(&n, &m.flat_levels())?));
        }
        Command::Integrate {
            f,
            big_f,
            oracle,
            mesh,
            rule,
        } => {
            let (f, big_f) = (load_integrand(&f)?, load_monotone(&big_f)?);
            let exact = integrate(&f, &measure_from(&big_f))?;
            let mut out = json!({ "value": doc::scalar_json(&exact) });
            if oracle {
                let rule = match rule {
                    RuleArg::Left => SampleRule::Left,
                    RuleArg::Right => SampleRule::Right,
                    RuleArg::Midpoint => SampleRule::Midpoint,
                };
                let approx = oracle_integrate(&f, &big_f, &OracleConfig::new(mesh, rule)?)?;
                out["oracle"] = json!({
                    "mesh": mesh,
                    "rule": format!("{rule:?}").to_lowercase(),
                    "value": approx,
                    "error": (approx - to_f64(&exact)).abs(),
                });
            }
            emit(&out);
        }
        Command::Verify {
            tag,
            integrand,
            m,
            n,
            theta,
            tol,
            force,
            side: s,
            probe,
        } => {
            let identity = parse_identity(&tag)?;
            let options = VerifyOptions {
                theta: match theta {
                    Some(t) => arg_scalar("theta", &t)?,
                    None => VerifyOptions::default().theta,
                },
                side: inverse_side(s),
                force,
                tolerance: tol,
                probes: probe
                    .iter()
                    .map(|p| arg_scalar("probe", p))
                    .collect::<Result<_, _>>()?,
            };
            let f = load_integrand(&integrand)?;
            let (m, n) = (load_monotone(&m)?, load_monotone(&n)?);
            let report = verify_identity(identity, &f, &m, &n, &options)?;
            emit(&doc::report_json(&report));
            return Ok(report_code(std::slice::from_ref(&report)));
        }
        Command::Inequalities {
            g,
            m,
            n,
            decreasing,
            domain_integrand,
            tol,
        } => {
            let direction = if decreasing {
                Monotonicity::Decreasing
            } else {
                Monotonicity::Increasing
            };
            let g = load_integrand(&g)?;
            let (m, n) = (load_monotone(&m)?, load_monotone(&n)?);
            let reports = if domain_integrand {
                check_sandwich(&g, direction, &m, &n, tol)?
            } else {
                check_inequalities(&g, direction, &m, &n, tol)?
            };
            emit(&Value::Array(
                reports.iter().map(doc::report_json).collect(),
            ));
            return Ok(report_code(&reports));
        }
        Command::PlotData { file, samples } => {
            let rows = plot_rows(&file, samples)?;
            let mut out = std::io::stdout().lock();
            let write = || -> std::io::Result<()> {
                writeln!(out, "x,left,value,right")?;
                for [x, l, v, r] in rows {
                    writeln!(out, "{x},{l},{v},{r}")?;
                }
                Ok(())
            };
            write().map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
        }
        Command::Generate {
            seed,
            n_at_flats,
            continuous_m,
            strict_m,
            integrand,
            max_degree,
            out,
            count,
            identity,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => match std::env::var(SEED_ENV) {
                    Ok(v) => v.trim().parse().map_err(|_| {
                        Failure::Usage(format!("{SEED_ENV} must be an unsigned integer"))
                    })?,
                    Err(_) => 0,
                },
            };
            let shape = shape_from(n_at_flats, continuous_m, strict_m, integrand, max_degree);
            let mut gen = InstanceGenerator::new(seed);
            match out {
                None => {
                    let inst = gen.instance(&shape);
                    emit(&json!({
                        "seed": seed,
                        "M": doc::monotone_json(&inst.m),
                        "N": doc::monotone_json(&inst.n),
                        "f": doc::integrand_json(&inst.f),
                        "g": doc::integrand_json(&inst.g),
                    }));
                }
                Some(dir) => {
                    let identity = parse_identity(&identity)?;
                    let written = batch::write_instances(&dir, identity, &mut gen, &shape, count)
                        .map_err(|e| {
                        Failure::Usage(format!("cannot write {}: {e}", dir.display()))
                    })?;
                    emit(&json!(written));
                }
            }
        }
        Command::Batch { dir, jobs } => return batch::run(&dir, jobs),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            emit(&failure.json());
            ExitCode::from(failure.code())
        }
    }
}
