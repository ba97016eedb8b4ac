//! Problem files: a TOML document describing the dimensions, the
//! Lagrangian (or a bare Hamiltonian), and optional divergence forms,
//! ansatz components, section coefficients, candidate solutions, and
//! oracle settings. See the repository README for the field reference.

use std::collections::BTreeMap;
use std::path::Path;

use num::{BigInt, BigRational};
use serde::Deserialize;

use crate::dedonder::HamiltonianData;
use crate::error::{Error, Result};
use crate::expr::{parse, parse_variable, Expr, ParseContext, VarId};
use crate::hamjac::SectionT;
use crate::jetcalc::HorizontalForm;
use crate::numcheck::OracleConfig;
use crate::variational::LagrangianProblem;

#[derive(Debug, Deserialize)]
struct RawFile {
    problem: RawProblem,
    divergence: Option<RawDivergence>,
    ansatz: Option<RawAnsatz>,
    section: Option<BTreeMap<String, String>>,
    candidate: Option<BTreeMap<String, String>>,
    oracle: Option<RawOracle>,
}

#[derive(Debug, Deserialize)]
struct RawProblem {
    n: u8,
    m: Option<u8>,
    order: usize,
    lagrangian: Option<String>,
    hamiltonian: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawDivergence {
    rho: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawAnsatz {
    s: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawOracle {
    seed: Option<u64>,
    samples: Option<usize>,
    fd_step: Option<String>,
    tol_rel: Option<f64>,
}

/// A fully validated problem file.
#[derive(Debug)]
pub struct ProblemFile {
    pub n: u8,
    pub m: u8,
    /// Theory order `l + 1`.
    pub order: usize,
    pub lagrangian: Option<LagrangianProblem>,
    pub hamiltonian: Option<HamiltonianData>,
    pub divergence: Option<HorizontalForm>,
    pub ansatz: Option<HorizontalForm>,
    pub section: Option<SectionT>,
    pub candidate: Option<BTreeMap<VarId, Expr>>,
    pub oracle: OracleConfig,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<ProblemFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        ProblemFile::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<ProblemFile> {
        let raw: RawFile =
            toml::from_str(text).map_err(|e| Error::Invalid(format!("problem file: {e}")))?;
        let n = raw.problem.n;
        let m = raw.problem.m.unwrap_or(1);
        let order = raw.problem.order;
        if n == 0 || m == 0 || order == 0 {
            return Err(Error::Invalid(
                "[problem] n, m and order must be positive".into(),
            ));
        }
        let l = order - 1;

        let lagrangian = raw
            .problem
            .lagrangian
            .as_deref()
            .map(|text| -> Result<LagrangianProblem> {
                let ctx = ParseContext::lagrangian(n, m, order);
                let e = parse(text, &ctx)
                    .map_err(|e| Error::Invalid(format!("[problem].lagrangian: {e}")))?;
                LagrangianProblem::new(n, m, order, e)
            })
            .transpose()?;

        let hamiltonian = raw
            .problem
            .hamiltonian
            .as_deref()
            .map(|text| -> Result<HamiltonianData> {
                let ctx = ParseContext::with_momenta(n, m, l, l);
                let e = parse(text, &ctx)
                    .map_err(|e| Error::Invalid(format!("[problem].hamiltonian: {e}")))?;
                HamiltonianData::from_hamiltonian(n, m, l, e)
            })
            .transpose()?;

        if lagrangian.is_none() && hamiltonian.is_none() {
            return Err(Error::Invalid(
                "[problem] needs a lagrangian (or a hamiltonian for `recover`)".into(),
            ));
        }

        let jets_ctx = ParseContext::on_jets(n, m, l);
        let divergence = raw
            .divergence
            .map(|d| -> Result<HorizontalForm> {
                let comps = d
                    .rho
                    .iter()
                    .map(|t| {
                        parse(t, &jets_ctx)
                            .map_err(|e| Error::Invalid(format!("[divergence].rho: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HorizontalForm::new(n, m, l, comps)
            })
            .transpose()?;

        let ansatz = raw
            .ansatz
            .map(|a| -> Result<HorizontalForm> {
                let comps = a
                    .s
                    .iter()
                    .map(|t| {
                        parse(t, &jets_ctx).map_err(|e| Error::Invalid(format!("[ansatz].s: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HorizontalForm::new(n, m, l, comps)
            })
            .transpose()?;

        let key_ctx = ParseContext::with_momenta(n, m, l, l);
        let section = raw
            .section
            .map(|entries| -> Result<SectionT> {
                let mut t = SectionT::zero(n, m, l);
                for (key, value) in entries {
                    let var = parse_variable(&key, &key_ctx)
                        .map_err(|e| Error::Invalid(format!("[section] key `{key}`: {e}")))?;
                    let VarId::Momentum(alpha, index, dir) = var else {
                        return Err(Error::Invalid(format!(
                            "[section] key `{key}` must name a momentum coordinate"
                        )));
                    };
                    let e = parse(&value, &jets_ctx)
                        .map_err(|e| Error::Invalid(format!("[section] `{key}`: {e}")))?;
                    t.set(alpha, index, dir, e)?;
                }
                Ok(t)
            })
            .transpose()?;

        let base_ctx = ParseContext::base_only(n);
        let candidate = raw
            .candidate
            .map(|entries| -> Result<BTreeMap<VarId, Expr>> {
                let mut map = BTreeMap::new();
                for (key, value) in entries {
                    let var = parse_variable(&key, &key_ctx)
                        .map_err(|e| Error::Invalid(format!("[candidate] key `{key}`: {e}")))?;
                    match &var {
                        VarId::Jet(..) | VarId::Momentum(..) => {}
                        _ => {
                            return Err(Error::Invalid(format!(
                                "[candidate] key `{key}` must name a jet or momentum coordinate"
                            )))
                        }
                    }
                    let e = parse(&value, &base_ctx)
                        .map_err(|e| Error::Invalid(format!("[candidate] `{key}`: {e}")))?;
                    map.insert(var, e);
                }
                Ok(map)
            })
            .transpose()?;

        let mut oracle = OracleConfig::default();
        if let Some(o) = raw.oracle {
            if let Some(seed) = o.seed {
                oracle.seed = seed;
            }
            if let Some(samples) = o.samples {
                if samples == 0 {
                    return Err(Error::Invalid("[oracle].samples must be at least 1".into()));
                }
                oracle.samples = samples;
            }
            if let Some(step) = o.fd_step {
                oracle.fd_step = parse_rational(&step)
                    .ok_or_else(|| Error::Invalid(format!("[oracle].fd_step: bad rational `{step}`")))?;
                if oracle.fd_step <= num::Zero::zero() {
                    return Err(Error::Invalid("[oracle].fd_step must be positive".into()));
                }
            }
            if let Some(tol) = o.tol_rel {
                if tol <= 0.0 {
                    return Err(Error::Invalid("[oracle].tol_rel must be positive".into()));
                }
                oracle.tol_rel = tol;
            }
        }

        Ok(ProblemFile {
            n,
            m,
            order,
            lagrangian,
            hamiltonian,
            divergence,
            ansatz,
            section,
            candidate,
            oracle,
        })
    }

    pub fn require_lagrangian(&self) -> Result<&LagrangianProblem> {
        self.lagrangian
            .as_ref()
            .ok_or_else(|| Error::Invalid("this command needs [problem].lagrangian".into()))
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let num: BigInt = a.trim().parse().ok()?;
        let den: BigInt = b.trim().parse().ok()?;
        if den == BigInt::from(0) {
            return None;
        }
        Some(BigRational::new(num, den))
    } else {
        let v: BigInt = text.parse().ok()?;
        Some(BigRational::from_integer(v))
    }
}
