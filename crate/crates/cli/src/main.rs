use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qil_core::classes::{
    check_membership, classify, Certificate, ClassFamily, ClassSpec, Classification,
    MAX_CLASSIFY_ORDER,
};
use qil_core::harness::{self, DimRange, Suite, SuiteConfig};
use qil_core::json::{read_matrix, write_matrix};
use qil_core::{generate, spectral, structure};
use qil_core::{
    CMatrix, Conjugation, ConstructionCertificate, DKind, Error, ToleranceConfig, Verdict,
};

const EXIT_PASS: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;

/// Environment variable overriding the default relative zero tolerance.
const TOL_ENV: &str = "QIL_TOL";

#[derive(Parser)]
#[command(
    name = "qil",
    version,
    about = "Verify n-quasi operator classes on dense complex matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded verification suites and print a JSON report.
    Verify {
        /// Suite name, repeatable; `all` selects every suite.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Inclusive range such as `2..6`.
        #[arg(long, default_value = "2..6")]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative zero tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Break a commutation hypothesis in the product and perturbation generators.
        #[arg(long)]
        sabotage: bool,
    },
    /// Test membership of a matrix in a class and report its minimal order.
    Check {
        s: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long)]
        kind: Option<String>,
        /// Companion operator for left m-invertible pairs.
        #[arg(long)]
        t: Option<PathBuf>,
        /// Symmetric unitary `J` with `C(x) = J·conj(x)`.
        #[arg(long)]
        conjugation: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a constructive result on a matrix and print its certificate.
    Construct {
        s: PathBuf,
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Power of `S` to invert (`thm10-cp`).
        #[arg(long, default_value_t = 1)]
        p: u32,
        #[arg(long, default_value = "delta")]
        kind: String,
        /// Companion operator `T` for `thm10-cp`; defaults to `S*`.
        #[arg(long)]
        t: Option<PathBuf>,
        #[arg(long)]
        conjugation: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Eigenvalues, pole orders and Riesz projections of a matrix.
    Spectral {
        a: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Generate a certified class member and write its matrices to a directory.
    Gen {
        #[arg(long)]
        class: String,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    /// Weighted similarity `A, Q, P` (and `B, L` when `S` is invertible).
    Pro00,
    /// The conjugated weighted similarity.
    Pro110,
    /// Explicit left inverse `C_p` of `Sᵖ`.
    #[value(name = "thm10-cp")]
    Thm10Cp,
}

#[derive(Serialize)]
struct CheckOutput {
    certificate: Certificate,
    minimal_m: Option<u32>,
    strict: bool,
}

fn tolerance(flag: Option<f64>) -> Result<ToleranceConfig, Error> {
    let zero_rel = match (flag, std::env::var(TOL_ENV)) {
        (Some(v), _) => Some(v),
        (None, Ok(text)) => Some(
            text.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("{TOL_ENV}='{text}' is not a number")))?,
        ),
        (None, Err(_)) => None,
    };
    let tol = match zero_rel {
        Some(v) => ToleranceConfig::default().with_zero_rel(v),
        None => ToleranceConfig::default(),
    };
    tol.validate()?;
    Ok(tol)
}

fn exit_for_error(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Failed => EXIT_FAILURE,
        Verdict::Passed | Verdict::Vacuous => EXIT_PASS,
    }
}

fn read_conjugation(
    path: Option<&Path>,
    tol: &ToleranceConfig,
) -> Result<Option<Conjugation>, Error> {
    path.map(|p| Conjugation::new(read_matrix(p)?, tol))
        .transpose()
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Verify {
            suites,
            trials,
            dims,
            seed,
            tol,
            report,
            sabotage,
        } => {
            let mut selected = Vec::new();
            for name in &suites {
                selected.extend(Suite::parse_list(name)?);
            }
            let config = SuiteConfig {
                suites: selected,
                trials,
                dims: dims.parse::<DimRange>()?,
                seed,
                tol: tolerance(tol)?,
                sabotage,
                report_path: report,
            };
            let report = harness::run_and_write(&config)?;
            println!("{}", report.to_json());
            Ok(if report.overall {
                EXIT_PASS
            } else {
                EXIT_FAILURE
            })
        }
        Command::Check {
            s,
            class,
            m,
            n,
            kind,
            t,
            conjugation,
            tol,
        } => {
            let tol = tolerance(tol)?;
            let family: ClassFamily = class.parse()?;
            if let Some(kind) = kind {
                let kind: DKind = kind.parse()?;
                if kind != family.kind() {
                    return Err(Error::InvalidInput(format!(
                        "{family} is defined through {}, not {kind}",
                        family.kind()
                    )));
                }
            }
            let s = read_matrix(&s)?;
            let t = t.map(|p| read_matrix(&p)).transpose()?;
            let conj = read_conjugation(conjugation.as_deref(), &tol)?;
            let mut spec = ClassSpec::new(family, m, n);
            spec.conjugation = conj.clone();
            let certificate = check_membership(&spec, &s, t.as_ref(), &tol)?;
            let pair = spec.defining_pair(&s, t.as_ref())?;
            let Classification {
                minimal_m, strict, ..
            } = classify(&pair, n, MAX_CLASSIFY_ORDER, conj.as_ref(), &tol)?;
            let passed = certificate.passed;
            print_json(&CheckOutput {
                certificate,
                minimal_m,
                strict,
            })?;
            Ok(if passed { EXIT_PASS } else { EXIT_FAILURE })
        }
        Command::Construct {
            s,
            theorem,
            m,
            n,
            p,
            kind,
            t,
            conjugation,
            tol,
        } => {
            let tol = tolerance(tol)?;
            let kind: DKind = kind.parse()?;
            let s = read_matrix(&s)?;
            let cert = construct(
                theorem,
                &s,
                t.as_deref(),
                conjugation.as_deref(),
                kind,
                m,
                n,
                p,
                &tol,
            )?;
            print_json(&cert)?;
            Ok(verdict_exit(cert.verdict))
        }
        Command::Spectral { a, tol } => {
            let tol = tolerance(tol)?;
            let a = read_matrix(&a)?;
            print_json(&spectral::spectral_report(&a, &tol)?)?;
            Ok(EXIT_PASS)
        }
        Command::Gen {
            class,
            m,
            n,
            dim,
            seed,
            out,
            tol,
        } => {
            let tol = tolerance(tol)?;
            let family: ClassFamily = class.parse()?;
            let inst = generate::gen_instance(&ClassSpec::new(family, m, n), dim, seed, &tol)?;
            std::fs::create_dir_all(&out)?;
            write_matrix(&out.join("S.json"), &inst.s)?;
            write_matrix(&out.join("T.json"), &inst.t)?;
            if let Some(j) = &inst.conjugation {
                write_matrix(&out.join("J.json"), j.matrix())?;
            }
            let text = serde_json::to_string_pretty(&inst.certificate)?;
            std::fs::write(out.join("certificate.json"), text + "\n")?;
            print_json(&inst.certificate)?;
            Ok(EXIT_PASS)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn construct(
    theorem: Theorem,
    s: &CMatrix,
    t: Option<&Path>,
    conjugation: Option<&Path>,
    kind: DKind,
    m: u32,
    n: u32,
    p: u32,
    tol: &ToleranceConfig,
) -> Result<ConstructionCertificate, Error> {
    match theorem {
        Theorem::Pro00 => {
            let invertible = qil_core::linalg::rank(s, tol)? == s.nrows();
            if invertible {
                structure::construct_b(kind, s, m, n, tol)
            } else {
                structure::construct_aqp(kind, s, m, n, tol)
            }
        }
        Theorem::Pro110 => {
            let conj = read_conjugation(conjugation, tol)?
                .ok_or_else(|| Error::InvalidInput("pro110 needs --conjugation".into()))?;
            structure::construct_conjugated(kind, s, &conj, m, n, tol)
        }
        Theorem::Thm10Cp => {
            let t = match t {
                Some(path) => read_matrix(path)?,
                None => s.adjoint(),
            };
            structure::left_inverse_cp(&t, s, m, p, tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for_error(&e))
        }
    }
}
