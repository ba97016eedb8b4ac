//! Command-line front end: problem files in, derived equation systems and
//! verification reports out.
//!
//! Exit codes: 0 = success / all checks passed, 1 = a check failed,
//! 2 = input error (bad file, parse or validation failure).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use jetvar::dedonder::{self, hamiltonian, recover_lagrangian};
use jetvar::error::Error;
use jetvar::hamjac::{self, Flatness};
use jetvar::jetcalc;
use jetvar::numcheck::{self, OracleConfig};
use jetvar::problem::ProblemFile;
use jetvar::variational::{self, Hyperregularity};

#[derive(Parser)]
#[command(name = "jetvar", version, about = "Variational calculus on jet coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write machine-readable output to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Override the oracle seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the oracle relative tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Euler-Lagrange equations of the Lagrangian.
    El { file: PathBuf },
    /// Constraint (momentum) equations cutting out the Legendre image.
    Constraint { file: PathBuf },
    /// Top-jet Hessian and the hyperregularity verdict.
    Hessian { file: PathBuf },
    /// The de Donder Hamiltonian and the eliminated top jets.
    Hamiltonian { file: PathBuf },
    /// The first-order Hamilton-de Donder-Weyl system.
    Hdwe { file: PathBuf },
    /// Classical Hamilton-Jacobi check for the ansatz S.
    HjCheck { file: PathBuf },
    /// Generalized Hamilton-Jacobi residuals for the section T.
    HjGenCheck { file: PathBuf },
    /// Curvature/flatness of the connection induced by T (or by d^V S).
    Flatness { file: PathBuf },
    /// Divergence covariance: momentum shift and Hamiltonian shift for rho,
    /// plus residual-set equality when a section T is given.
    Equiv { file: PathBuf },
    /// Recover a Lagrangian from a bare Hamiltonian.
    Recover { file: PathBuf },
    /// Run the built-in end-to-end biharmonic verification suite.
    VerifyBiharmonic {
        /// Optional problem file; only its [oracle] table is used.
        file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path, cli: &Cli) -> Result<ProblemFile, Error> {
    let mut pf = ProblemFile::load(path)?;
    if let Some(seed) = cli.seed {
        pf.oracle.seed = seed;
    }
    if let Some(tol) = cli.tol {
        pf.oracle.tol_rel = tol;
    }
    Ok(pf)
}

fn write_json(cli: &Cli, value: &serde_json::Value) -> Result<(), Error> {
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Invalid(format!("json: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    match &cli.command {
        Command::El { file } => {
            let pf = load(file, cli)?;
            let p = pf.require_lagrangian()?;
            let set = variational::euler_lagrange(p)?;
            for eq in &set.equations {
                println!("{} = 0", eq.lhs.render(pf.m));
            }
            write_json(cli, &set.to_json())?;
            Ok(true)
        }
        Command::Constraint { file } => {
            let pf = load(file, cli)?;
            let set = variational::constraint_equations(pf.require_lagrangian()?);
            for eq in &set.equations {
                println!("{}: {} = 0", eq.label, eq.lhs.render(pf.m));
            }
            write_json(cli, &set.to_json())?;
            Ok(true)
        }
        Command::Hessian { file } => {
            let pf = load(file, cli)?;
            let p = pf.require_lagrangian()?;
            let (pairs, h) = variational::hessian(p);
            for (r, (alpha, index)) in pairs.iter().enumerate() {
                let row: Vec<String> =
                    (0..pairs.len()).map(|c| h.at(r, c).render(pf.m)).collect();
                println!("u{alpha}{index}: [{}]", row.join(", "));
            }
            let verdict = variational::is_hyperregular(p)?;
            let (word, detail) = match &verdict {
                Hyperregularity::Yes { det } => ("hyperregular", det.render(pf.m)),
                Hyperregularity::No { det, witness } => {
                    let w = witness
                        .as_ref()
                        .map(|_| " (zero found at a sampled point)".to_string())
                        .unwrap_or_default();
                    ("degenerate", format!("{}{w}", det.render(pf.m)))
                }
                Hyperregularity::Undetermined { det } => ("undetermined", det.render(pf.m)),
            };
            println!("verdict: {word}, det = {detail}");
            write_json(
                cli,
                &json!({
                    "pairs": pairs.iter().map(|(a, i)| format!("({a},{i})")).collect::<Vec<_>>(),
                    "entries": (0..pairs.len())
                        .map(|r| (0..pairs.len()).map(|c| h.at(r, c).render(pf.m)).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                    "verdict": word,
                    "det": detail,
                }),
            )?;
            Ok(!matches!(verdict, Hyperregularity::No { .. }))
        }
        Command::Hamiltonian { file } => {
            let pf = load(file, cli)?;
            let hd = hamiltonian(pf.require_lagrangian()?)?;
            println!("H = {}", hd.hamiltonian.render(pf.m));
            for ((alpha, j), s) in &hd.top_jets {
                println!("s{alpha}{j} = {}", s.render(pf.m));
            }
            write_json(cli, &hd.to_json())?;
            Ok(true)
        }
        Command::Hdwe { file } => {
            let pf = load(file, cli)?;
            let hd = hamiltonian(pf.require_lagrangian()?)?;
            let sys = dedonder::hdwe(&hd);
            for eq in &sys.equations {
                println!("{}", eq.render(sys.n, sys.m));
            }
            // with a [candidate] table, also substitute it into the system
            let mut pass = true;
            let mut check_json = None;
            if let Some(candidate) = &pf.candidate {
                let report = numcheck::hdwe_solution_check(&sys, candidate, &pf.oracle)?;
                pass = report.pass();
                print!("{}", report.render());
                println!("candidate: {}", if pass { "solves the system" } else { "FAILS" });
                check_json = Some(report.to_json());
            }
            let mut value = sys.to_json();
            if let Some(c) = check_json {
                value["candidate"] = c;
            }
            write_json(cli, &value)?;
            Ok(pass)
        }
        Command::HjCheck { file } => {
            let pf = load(file, cli)?;
            let s = pf
                .ansatz
                .as_ref()
                .ok_or_else(|| Error::Invalid("ansatz S required: add an [ansatz] table".into()))?;
            let hd = hamiltonian(pf.require_lagrangian()?)?;
            let (set, f) = hamjac::classical_hj_residual(&hd, s)?;
            let pass = set.all_zero();
            println!("f = {}", f.render(pf.m));
            for eq in &set.equations {
                println!("{}: {} = 0", eq.label, eq.lhs.render(pf.m));
            }
            println!("classical HJ system: {}", if pass { "satisfied" } else { "violated" });
            write_json(
                cli,
                &json!({ "f": f.render(pf.m), "residuals": set.to_json(), "pass": pass }),
            )?;
            Ok(pass)
        }
        Command::HjGenCheck { file } => {
            let pf = load(file, cli)?;
            let t = pf.section.as_ref().ok_or_else(|| {
                Error::Invalid("section T required: add a [section] table".into())
            })?;
            let hd = hamiltonian(pf.require_lagrangian()?)?;
            let res = hamjac::generalized_hj_residual(&hd, t)?;
            let pass = res.all_zero();
            for set in [&res.flatness, &res.hj] {
                for eq in &set.equations {
                    println!("{}: {} = 0", eq.label, eq.lhs.render(pf.m));
                }
            }
            println!("generalized HJ problem: {}", if pass { "solved" } else { "not solved" });
            write_json(cli, &res.to_json())?;
            Ok(pass)
        }
        Command::Flatness { file } => {
            let pf = load(file, cli)?;
            let t = match (&pf.section, &pf.ansatz) {
                (Some(t), _) => t.clone(),
                (None, Some(s)) => jetcalc::vertical_differential(s),
                (None, None) => {
                    return Err(Error::Invalid(
                        "section T (or ansatz S) required for flatness".into(),
                    ))
                }
            };
            let hd = hamiltonian(pf.require_lagrangian()?)?;
            let curv = hamjac::curvature(&hd, &t)?;
            for ((alpha, index, i, j), c) in &curv.components {
                if !c.is_zero() {
                    println!("R[{alpha}; {index}; {i},{j}] = {}", c.render(pf.m));
                }
            }
            let word = match &curv.verdict {
                Flatness::Flat => "flat",
                Flatness::NotFlat { .. } => "not flat",
                Flatness::Undetermined { .. } => "undetermined",
            };
            println!("connection: {word}");
            write_json(
                cli,
                &json!({
                    "verdict": word,
                    "components": curv
                        .components
                        .iter()
                        .map(|((a, idx, i, j), c)| {
                            json!({ "index": format!("({a},{idx},{i},{j})"), "expr": c.render(pf.m) })
                        })
                        .collect::<Vec<_>>(),
                }),
            )?;
            Ok(curv.verdict == Flatness::Flat)
        }
        Command::Equiv { file } => {
            let pf = load(file, cli)?;
            let rho = pf.divergence.as_ref().ok_or_else(|| {
                Error::Invalid("divergence rho required: add a [divergence] table".into())
            })?;
            let p = pf.require_lagrangian()?;
            let mut report = dedonder::psi_covariance(p, rho)?;
            if let Some(t) = &pf.section {
                let eq = hamjac::equivalence_check(p, rho, t)?;
                report.checks.extend(eq.checks);
            }
            for c in &report.checks {
                println!("[{}] {}", if c.pass { "PASS" } else { "FAIL" }, c.label);
            }
            let pass = report.pass();
            write_json(cli, &report.to_json(pf.m))?;
            Ok(pass)
        }
        Command::Recover { file } => {
            let pf = load(file, cli)?;
            let hd = pf.hamiltonian.as_ref().ok_or_else(|| {
                Error::Invalid("bare Hamiltonian required: set [problem].hamiltonian".into())
            })?;
            match recover_lagrangian(hd) {
                Ok(rec) => {
                    println!("L = {}", rec.problem.lagrangian.render(pf.m));
                    write_json(
                        cli,
                        &json!({
                            "lagrangian": rec.problem.lagrangian.render(pf.m),
                            "order": rec.problem.order,
                            "report": rec.report.to_json(pf.m),
                        }),
                    )?;
                    Ok(true)
                }
                Err(e @ (Error::NotLagrangian { .. } | Error::NonAffineFiberDerivative(_))) => {
                    println!("rejected: {e}");
                    write_json(cli, &json!({ "rejected": e.to_string() }))?;
                    Ok(false)
                }
                Err(e) => Err(e),
            }
        }
        Command::VerifyBiharmonic { file } => {
            let mut cfg = OracleConfig::default();
            if let Some(path) = file {
                cfg = load(path, cli)?.oracle;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(tol) = cli.tol {
                cfg.tol_rel = tol;
            }
            let report = numcheck::biharmonic_suite(&cfg)?;
            print!("{}", report.render());
            let pass = report.pass();
            println!("suite: {}", if pass { "all checks passed" } else { "FAILED" });
            write_json(cli, &report.to_json())?;
            Ok(pass)
        }
    }
}
