//! `doslab`: command-line front end.
//!
//! Every subcommand prints one JSON report on stdout (and to `--report` when
//! given). Exit status: 0 on success, 1 when a checked property fails, 2 on
//! invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use doslab::bqpcount::{accepting_dimension, VerifierInstance};
use doslab::clockcomp::{analyze_ground_space, compile_clock, gap_bound, FinalVariant, GROUND_TOL};
use doslab::hamdos::{
    count_dos, count_ground, dos_verifier_omega, quadratic_shift, DosQuery, LocalHamiltonian,
};
use doslab::numkit::{eigvalsh, principal_angles, projector_difference_bound, ComplexMatrix};
use doslab::pathsum::{path_cap_from_env, reconstruct, PathOptions};
use doslab::qcirc::{omega_for_outcome, plant_verifier, Circuit};
use doslab::Error;

#[derive(Parser)]
#[command(
    name = "doslab",
    version,
    about = "Counting accepting subspaces, clock Hamiltonians, DOS and path sums"
)]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum of the verifier operator and the accepting dimension.
    Omega {
        circuit: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Outcome of qubit 0 that counts as acceptance.
        #[arg(long, default_value_t = 1)]
        accept_bit: usize,
    },
    /// Generate a verifier with a prescribed accepting dimension.
    Plant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Total circuit length (at least 1).
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile a circuit into its clock Hamiltonian.
    Compile {
        circuit: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long = "final", default_value = "projector")]
        variant: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ground-space dimension below e1 given a gap (e1, e2) and floor e0.
    Degeneracy {
        #[arg(long)]
        ham: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        e0: f64,
        #[arg(long, allow_negative_numbers = true)]
        e1: f64,
        #[arg(long, allow_negative_numbers = true)]
        e2: f64,
    },
    /// Number of eigenvalues in [e1, e2] with grace width delta.
    Dos {
        #[arg(long)]
        ham: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        e1: f64,
        #[arg(long, allow_negative_numbers = true)]
        e2: f64,
        #[arg(long)]
        delta: f64,
        /// Report eigenvalues in the grace intervals instead of failing.
        #[arg(long)]
        grace: bool,
        /// Write the eigenvalue histogram as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Quadratic shift H' = nu (H - e1)(H - e2) and its verifier thresholds.
    Shift {
        #[arg(long)]
        ham: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        e1: f64,
        #[arg(long, allow_negative_numbers = true)]
        e2: f64,
        #[arg(long)]
        delta: f64,
        /// Write the shifted Hamiltonian JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Path-sum trace, integer model count and reconstruction.
    TraceCount {
        circuit: PathBuf,
        #[arg(long, requires = "b")]
        a: Option<f64>,
        #[arg(long, requires = "a")]
        b: Option<f64>,
        /// Amplification rounds (default n + 2).
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        exact_rational: bool,
        #[arg(long, default_value_t = 1)]
        accept_bit: usize,
    },
    /// Principal angles of two projectors and the difference bound.
    VerifyBound {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// Plant, count, compile, diagonalize and path-sum one instance.
    EndToEnd {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
}

/// A report plus the names of the checks that failed.
struct Outcome {
    report: Value,
    failures: Vec<String>,
}

impl Outcome {
    fn ok(report: impl Serialize) -> anyhow::Result<Self> {
        Ok(Self {
            report: serde_json::to_value(report)?,
            failures: Vec::new(),
        })
    }
}

enum Failure {
    /// A checked property of a valid instance does not hold.
    Assertion(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(inner) if is_assertion(inner) => Failure::Assertion(format!("{e:#}")),
            _ => Failure::Input(e),
        }
    }
}

/// Promise and precondition violations of otherwise well-formed instances.
fn is_assertion(e: &Error) -> bool {
    use doslab::bqpcount::BqpError;
    use doslab::clockcomp::ClockError;
    use doslab::hamdos::HamError;
    match e {
        Error::Bqp(BqpError::PromiseViolation { .. }) => true,
        Error::Clock(ClockError::Promise(_)) => true,
        Error::Ham(h) => matches!(
            h,
            HamError::GraceViolation(_)
                | HamError::BelowGround(_)
                | HamError::InsideGap(_)
                | HamError::Disagreement { .. }
                | HamError::Bqp(BqpError::PromiseViolation { .. })
        ),
        _ => false,
    }
}

trait Lib<T> {
    fn lib(self) -> anyhow::Result<T>;
}

impl<T, E: Into<Error>> Lib<T> for Result<T, E> {
    fn lib(self) -> anyhow::Result<T> {
        self.map_err(|e| anyhow::Error::new(e.into()))
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_circuit(path: &Path) -> anyhow::Result<Circuit> {
    Circuit::parse(&read(path)?)
        .lib()
        .with_context(|| format!("invalid circuit file {}", path.display()))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    serde_json::from_str(&read(path)?)
        .with_context(|| format!("invalid {what} JSON in {}", path.display()))
}

fn pretty(v: &impl Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

fn thresholds_for(eps: f64) -> (f64, f64) {
    (1.0 - eps, eps)
}

fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Omega {
            circuit,
            a,
            b,
            accept_bit,
        } => {
            if accept_bit > 1 {
                return Err(Failure::Input(anyhow!("--accept-bit must be 0 or 1")));
            }
            let c = load_circuit(&circuit)?;
            let omega = omega_for_outcome(&c, accept_bit);
            let mut spectrum = eigvalsh(&omega).lib()?;
            spectrum.reverse();
            let v = VerifierInstance::new(omega, c.inputs(), a, b).lib()?;
            let count = accepting_dimension(&v).lib()?;
            let mut failures = Vec::new();
            check(
                &mut failures,
                count.promise_ok,
                "gap promise: eigenvalues strictly between b and a",
            );
            Ok(Outcome {
                report: json!({
                    "qubits": c.qubits(),
                    "inputs": c.inputs(),
                    "length": c.len(),
                    "a": a,
                    "b": b,
                    "accept_bit": accept_bit,
                    "spectrum": spectrum,
                    "count": count,
                }),
                failures,
            })
        }
        Command::Plant {
            n,
            d,
            t,
            seed,
            eps,
            out,
        } => {
            if t == 0 {
                return Err(Failure::Input(anyhow!(
                    "--t is the total circuit length and must be at least 1"
                )));
            }
            let p = plant_verifier(n, d, t - 1, eps, seed).lib()?;
            write(&out, &p.circuit.serialize())?;
            Outcome::ok(json!({
                "out": out.display().to_string(),
                "qubits": p.circuit.qubits(),
                "inputs": n,
                "length": p.circuit.len(),
                "d": d,
                "eps": eps,
                "seed": seed,
                "accepted_inputs": p.accepted_inputs,
            }))
            .map_err(Failure::Input)
        }
        Command::Compile {
            circuit,
            a,
            b,
            variant,
            out,
        } => {
            let c = load_circuit(&circuit)?;
            let variant: FinalVariant = variant.parse().lib()?;
            let h = compile_clock(&c, variant, a, b).lib()?;
            write(&out, &pretty(&h.to_json()).map_err(Failure::Input)?)?;
            Outcome::ok(json!({
                "out": out.display().to_string(),
                "dim": h.matrix().dim(),
                "site_dims": h.local().site_dims(),
                "terms": h.local().terms().len(),
                "clock": h.info(),
            }))
            .map_err(Failure::Input)
        }
        Command::Degeneracy { ham, e0, e1, e2 } => {
            let h: LocalHamiltonian = load_json(&ham, "Hamiltonian")?;
            let count = count_ground(&h, e0, e1, e2).lib()?;
            Outcome::ok(json!({ "e0": e0, "e1": e1, "e2": e2, "count": count }))
                .map_err(Failure::Input)
        }
        Command::Dos {
            ham,
            e1,
            e2,
            delta,
            grace,
            csv,
        } => {
            let h: LocalHamiltonian = load_json(&ham, "Hamiltonian")?;
            let q = DosQuery::new(e1, e2, delta).lib()?;
            let r = count_dos(&h, &q, grace).lib()?;
            if let Some(path) = csv {
                write(&path, &r.histogram.to_csv())?;
            }
            Outcome::ok(json!({ "query": q, "grace_mode": grace, "report": r }))
                .map_err(Failure::Input)
        }
        Command::Shift {
            ham,
            e1,
            e2,
            delta,
            out,
        } => {
            let h: LocalHamiltonian = load_json(&ham, "Hamiltonian")?;
            let q = DosQuery::new(e1, e2, delta).lib()?;
            let s = quadratic_shift(&h, &q).lib()?;
            let v = dos_verifier_omega(&s).lib()?;
            let count = accepting_dimension(&v).lib()?;
            if let Some(path) = &out {
                write(path, &pretty(&s.h_prime).map_err(Failure::Input)?)?;
            }
            let window = count_dos(&h, &q, true).lib()?;
            let mut failures = Vec::new();
            check(
                &mut failures,
                !count.promise_ok
                    || window.grace_violations.is_empty() && count.dim_accept == window.count,
                "accepting dimension of the shifted verifier differs from the window count",
            );
            Ok(Outcome {
                report: json!({
                    "out": out.map(|p| p.display().to_string()),
                    "nu": s.nu,
                    "m_terms": s.m_terms,
                    "a_neg": s.a_neg,
                    "b_pos": s.b_pos,
                    "a": v.a(),
                    "b": v.b(),
                    "verifier_qubits": v.n(),
                    "dim_accept": count.dim_accept,
                    "promise_ok": count.promise_ok,
                    "window_count": window.count,
                }),
                failures,
            })
        }
        Command::TraceCount {
            circuit,
            a,
            b,
            r,
            exact_rational,
            accept_bit,
        } => {
            let c = load_circuit(&circuit)?;
            let cap = path_cap_from_env().map_err(|e| Failure::Input(anyhow!(e)))?;
            let opts = PathOptions {
                accept_bit,
                cap,
                thresholds: a.zip(b),
                rounds: r,
                exact_rational,
            };
            let rep = reconstruct(&c, &opts).lib()?;
            let mut failures = Vec::new();
            check(
                &mut failures,
                (rep.trace_pathsum - rep.trace_direct).abs() <= 1e-9,
                "path-sum trace differs from tr Ω by more than 1e-9",
            );
            check(
                &mut failures,
                (rep.estimate - rep.trace_direct).abs() <= 0.25,
                "reconstructed estimate differs from tr Ω by more than 1/4",
            );
            check(
                &mut failures,
                rep.dim_estimate == rep.dim_accept,
                "dimension estimate differs from the accepting dimension",
            );
            Ok(Outcome {
                report: serde_json::to_value(&rep).map_err(|e| Failure::Input(e.into()))?,
                failures,
            })
        }
        Command::VerifyBound { p, q } => {
            let pm: ComplexMatrix = load_json(&p, "matrix")?;
            let qm: ComplexMatrix = load_json(&q, "matrix")?;
            let angles = principal_angles(&pm, &qm).lib()?;
            let bound = projector_difference_bound(&pm, &qm).lib()?;
            let mut failures = Vec::new();
            check(
                &mut failures,
                bound.bound_holds,
                "P - Q >= -sqrt(||Q(1-P)Q||) fails",
            );
            check(
                &mut failures,
                (bound.min_eig + angles.max_sine()).abs() <= 1e-9,
                "least eigenvalue of P - Q differs from -max sin θ",
            );
            Ok(Outcome {
                report: json!({ "angles": angles, "bound": bound, "max_sine": angles.max_sine() }),
                failures,
            })
        }
        Command::EndToEnd { n, d, t, seed, eps } => end_to_end(n, d, t, seed, eps),
    }
}

fn end_to_end(n: usize, d: usize, t: usize, seed: u64, eps: f64) -> Result<Outcome, Failure> {
    if t == 0 {
        return Err(Failure::Input(anyhow!(
            "--t is the total circuit length and must be at least 1"
        )));
    }
    let p = plant_verifier(n, d, t - 1, eps, seed).lib()?;
    let c = &p.circuit;
    let (a, b) = thresholds_for(eps);
    let v = VerifierInstance::new(omega_for_outcome(c, 1), n, a, b).lib()?;
    let omega_count = accepting_dimension(&v).lib()?;

    let h = compile_clock(c, FinalVariant::Projector, a, b).lib()?;
    let ground = analyze_ground_space(&h, d).lib()?;
    let hamdos_count = count_ground(h.local(), 0.0, GROUND_TOL, gap_bound(c.len())).lib()?;

    let cap = path_cap_from_env().map_err(|e| Failure::Input(anyhow!(e)))?;
    let trace = reconstruct(
        c,
        &PathOptions {
            cap,
            thresholds: Some((a, b)),
            ..PathOptions::default()
        },
    )
    .lib()?;

    let mut failures = Vec::new();
    check(
        &mut failures,
        omega_count.dim_accept == d,
        "accepting dimension differs from d",
    );
    check(
        &mut failures,
        ground.degeneracy == d && ground.ok,
        "clock ground space check failed",
    );
    check(
        &mut failures,
        hamdos_count == d,
        "ground count from the Hamiltonian differs from d",
    );
    check(
        &mut failures,
        trace.dim_estimate == Some(d),
        "path-sum dimension estimate differs from d",
    );
    check(
        &mut failures,
        (trace.estimate - trace.trace_direct).abs() <= 0.25,
        "reconstructed estimate differs from tr Ω by more than 1/4",
    );
    Ok(Outcome {
        report: json!({
            "n": n,
            "d": d,
            "length": c.len(),
            "seed": seed,
            "eps": eps,
            "a": a,
            "b": b,
            "counts": {
                "omega": omega_count.dim_accept,
                "clock": ground.degeneracy,
                "degeneracy": hamdos_count,
                "trace": trace.dim_estimate,
            },
            "ground": ground,
            "trace_direct": trace.trace_direct,
            "estimate": trace.estimate,
            "agree": failures.is_empty(),
        }),
        failures,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report_path = cli.report.clone();
    match run(cli.command) {
        Ok(out) => {
            let text = match pretty(&out.report) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            print!("{text}");
            if let Some(path) = report_path {
                if let Err(e) = write(&path, &text) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("check failed: {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
