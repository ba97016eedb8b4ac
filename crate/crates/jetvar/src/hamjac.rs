//! Hamilton-Jacobi machinery: the jet connection induced by a momentum
//! section, its curvature and flatness, the generalized HJ residual system,
//! the classical HJ equations for an ansatz, and equivalence of the HJ
//! problems of Lagrangians differing by a total divergence.

use std::collections::BTreeMap;

use serde_json::json;

use crate::dedonder::{hamiltonian, HamiltonianData, Report};
use crate::error::{Error, Result};
use crate::expr::{Expr, VarId};
use crate::jetcalc::{self, HorizontalForm, JetContext};
use crate::multiindex::MultiIndex;
use crate::variational::{add_divergence, hessian, Equation, EquationSet, LagrangianProblem};

/// A section of the reduced multimomentum bundle over the order-`l` jet
/// space: coefficient functions `T^{I.i}_alpha` on jets only (no momenta),
/// for all `|I| <= l`. Unset coefficients are zero.
#[derive(Clone, Debug)]
pub struct SectionT {
    pub n: u8,
    pub m: u8,
    pub l: usize,
    coeffs: BTreeMap<(u8, MultiIndex, u8), Expr>,
}

impl SectionT {
    pub fn zero(n: u8, m: u8, l: usize) -> Self {
        SectionT { n, m, l, coeffs: BTreeMap::new() }
    }

    pub fn set(&mut self, alpha: u8, index: MultiIndex, dir: u8, value: Expr) -> Result<()> {
        if alpha == 0 || alpha > self.m {
            return Err(Error::IndexOutOfRange { index: alpha as usize, max: self.m as usize });
        }
        if dir == 0 || dir > self.n {
            return Err(Error::IndexOutOfRange { index: dir as usize, max: self.n as usize });
        }
        if index.order() > self.l {
            return Err(Error::OrderOverflow { order: index.order(), max: self.l });
        }
        if value.contains_momentum() {
            return Err(Error::Invalid("section coefficients must not contain momenta".into()));
        }
        if value.max_jet_order() > self.l {
            return Err(Error::OrderOverflow { order: value.max_jet_order(), max: self.l });
        }
        if value.is_zero() {
            self.coeffs.remove(&(alpha, index, dir));
        } else {
            self.coeffs.insert((alpha, index, dir), value);
        }
        Ok(())
    }

    pub fn get(&self, alpha: u8, index: &MultiIndex, dir: u8) -> Expr {
        self.coeffs
            .get(&(alpha, index.clone(), dir))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Substitution replacing every momentum coordinate `|I| <= l` by the
    /// matching coefficient (zero when unset).
    pub fn momentum_bindings(&self) -> BTreeMap<VarId, Expr> {
        let mut map = BTreeMap::new();
        for alpha in 1..=self.m {
            for index in MultiIndex::enumerate(self.n, self.l) {
                for i in 1..=self.n {
                    map.insert(
                        VarId::Momentum(alpha, index.clone(), i),
                        self.get(alpha, &index, i),
                    );
                }
            }
        }
        map
    }

    /// Coefficient-wise sum (used for the shifted section `T + d^V rho`).
    pub fn add(&self, other: &SectionT) -> Result<SectionT> {
        if self.n != other.n || self.m != other.m || self.l != other.l {
            return Err(Error::DimensionMismatch("section dimensions differ".into()));
        }
        let mut out = self.clone();
        for ((alpha, index, dir), v) in &other.coeffs {
            let sum = &out.get(*alpha, index, *dir) + v;
            out.set(*alpha, index.clone(), *dir, sum)?;
        }
        Ok(out)
    }
}

/// The symbols of the connection `leg^{-1} o T`: for `|I| < l` these are
/// the jet coordinates `u^alpha_{Ii}` themselves, for `|I| = l` the
/// eliminated top jets composed with `T`. The top-jet substitutions realize
/// "compose with the connection" on total derivatives.
#[derive(Clone, Debug)]
pub struct ConnectionSymbols {
    pub symbols: BTreeMap<(u8, MultiIndex, u8), Expr>,
    top: BTreeMap<VarId, Expr>,
}

impl ConnectionSymbols {
    pub fn symbol(&self, alpha: u8, index: &MultiIndex, dir: u8) -> &Expr {
        &self.symbols[&(alpha, index.clone(), dir)]
    }

    /// Replace every order-`(l+1)` jet produced by a total derivative with
    /// the corresponding connection symbol.
    pub fn compose(&self, e: &Expr) -> Result<Expr> {
        e.substitute(&self.top)
    }
}

pub fn nabla_symbols(hd: &HamiltonianData, t: &SectionT) -> Result<ConnectionSymbols> {
    if t.n != hd.n || t.m != hd.m || t.l != hd.l {
        return Err(Error::DimensionMismatch("section does not match the Hamiltonian".into()));
    }
    let bindings = t.momentum_bindings();
    let mut symbols = BTreeMap::new();
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            for i in 1..=hd.n {
                let d = hd.hamiltonian.partial(&VarId::Momentum(alpha, index.clone(), i));
                symbols.insert((alpha, index.clone(), i), d.substitute(&bindings)?);
            }
        }
    }
    let mut top = BTreeMap::new();
    for ((alpha, j), s) in &hd.top_jets {
        top.insert(VarId::Jet(*alpha, j.clone()), s.substitute(&bindings)?);
    }
    Ok(ConnectionSymbols { symbols, top })
}

/// Flatness verdict for the induced connection.
#[derive(Clone, Debug, PartialEq)]
pub enum Flatness {
    Flat,
    /// A curvature component is a nonzero expression free of opaque
    /// symbols, hence nonzero at some point.
    NotFlat { witness: (u8, MultiIndex, u8, u8) },
    /// Nonzero components exist but involve opaque function symbols, so
    /// the verdict depends on the unspecified functions.
    Undetermined { witness: (u8, MultiIndex, u8, u8) },
}

#[derive(Clone, Debug)]
pub struct CurvatureReport {
    /// Components `R^alpha_{I.ij}` for `i < j`, all `|I| <= l`.
    pub components: BTreeMap<(u8, MultiIndex, u8, u8), Expr>,
    pub verdict: Flatness,
}

/// Curvature of the connection induced by `T`:
/// `R^alpha_{I.ij} = 1/2 (D_i nabla^alpha_{I.j} - D_j nabla^alpha_{I.i})`
/// composed with the connection. Components with `|I| < l` vanish
/// identically; the top components decide flatness.
pub fn curvature(hd: &HamiltonianData, t: &SectionT) -> Result<CurvatureReport> {
    let syms = nabla_symbols(hd, t)?;
    let ctx = JetContext::new(hd.n, hd.m, hd.l + 1);
    let half = Expr::rational(1, 2);
    let mut components = BTreeMap::new();
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            for i in 1..=hd.n {
                for j in (i + 1)..=hd.n {
                    let di = jetcalc::total_derivative(syms.symbol(alpha, &index, j), i, &ctx)?;
                    let dj = jetcalc::total_derivative(syms.symbol(alpha, &index, i), j, &ctx)?;
                    let r = &half * &syms.compose(&(&di - &dj))?;
                    components.insert((alpha, index.clone(), i, j), r);
                }
            }
        }
    }
    let verdict = match components.iter().find(|(_, e)| !e.is_zero()) {
        None => Flatness::Flat,
        Some((k, e)) => {
            if e.contains_opaque() {
                Flatness::Undetermined { witness: k.clone() }
            } else {
                Flatness::NotFlat { witness: k.clone() }
            }
        }
    };
    Ok(CurvatureReport { components, verdict })
}

/// The two residual families of the generalized HJ problem for a section
/// `T`: the flatness family (top curvature components) and the HJ family
/// `D_i T^{J.i}_beta o nabla + (dH/du^beta_J) o T`, `|J| <= l`. `T` solves
/// the problem iff every equation is the zero normal form.
#[derive(Clone, Debug)]
pub struct ResidualSystem {
    pub flatness: EquationSet,
    pub hj: EquationSet,
}

impl ResidualSystem {
    pub fn all_zero(&self) -> bool {
        self.flatness.all_zero() && self.hj.all_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fam = |set: &EquationSet| {
            set.equations
                .iter()
                .map(|e| {
                    let idx = match e.dirs {
                        Some((i, j)) => format!("({},{},{},{})", e.alpha, e.index, i, j),
                        None => format!("({},{})", e.alpha, e.index),
                    };
                    json!({ "index": idx, "expr": e.lhs.render(set.m) })
                })
                .collect::<Vec<_>>()
        };
        json!({ "flatness": fam(&self.flatness), "hj": fam(&self.hj) })
    }
}

pub fn generalized_hj_residual(hd: &HamiltonianData, t: &SectionT) -> Result<ResidualSystem> {
    let syms = nabla_symbols(hd, t)?;
    let curv = curvature(hd, t)?;
    let bindings = t.momentum_bindings();
    let ctx = JetContext::new(hd.n, hd.m, hd.l + 1);

    let mut flatness = Vec::new();
    for ((alpha, index, i, j), r) in &curv.components {
        if index.order() < hd.l {
            continue;
        }
        flatness.push(Equation {
            label: format!("R[{alpha}; {index}; {i},{j}]"),
            alpha: *alpha,
            index: index.clone(),
            dirs: Some((*i, *j)),
            lhs: r.clone(),
        });
    }

    let mut hj = Vec::new();
    for beta in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            let mut div = Expr::zero();
            for i in 1..=hd.n {
                div = &div + &jetcalc::total_derivative(&t.get(beta, &index, i), i, &ctx)?;
            }
            let dh = hd
                .hamiltonian
                .partial(&VarId::Jet(beta, index.clone()))
                .substitute(&bindings)?;
            hj.push(Equation {
                label: format!("HJ[{beta}; {index}]"),
                alpha: beta,
                index: index.clone(),
                dirs: None,
                lhs: &syms.compose(&div)? + &dh,
            });
        }
    }

    Ok(ResidualSystem {
        flatness: EquationSet { name: "flatness".into(), m: hd.m, equations: flatness },
        hj: EquationSet { name: "hj".into(), m: hd.m, equations: hj },
    })
}

/// The flatness family in the contracted form using the inverse Hessian
/// `M` of the source theory:
/// `1/2 sum_{|K|=l} (M_{(alpha,Ij),(beta,Kk)} D_i - M_{(alpha,Ii),(beta,Kk)} D_j) T^{K.k}_beta o nabla`.
/// For theories whose constraint offsets carry no jet dependence (constant
/// Hessian, linear top part with constant coefficients) this equals the
/// direct curvature components.
pub fn flatness_m_contracted(hd: &HamiltonianData, t: &SectionT) -> Result<EquationSet> {
    let source = hd
        .source
        .as_ref()
        .ok_or_else(|| Error::Invalid("contracted flatness needs the source Lagrangian".into()))?;
    let (pairs, h) = hessian(source);
    let m_inv = h
        .inverse()?
        .ok_or_else(|| Error::SingularMatrix("Hessian is not invertible".into()))?;
    let pos = |alpha: u8, a: &MultiIndex| -> usize {
        pairs
            .iter()
            .position(|(b, t)| *b == alpha && t == a)
            .expect("top pair present")
    };
    let syms = nabla_symbols(hd, t)?;
    let ctx = JetContext::new(hd.n, hd.m, hd.l + 1);
    let half = Expr::rational(1, 2);
    let mut equations = Vec::new();
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate_exact(hd.n, hd.l) {
            for i in 1..=hd.n {
                for j in (i + 1)..=hd.n {
                    let row_i = pos(alpha, &index.concat(i)?);
                    let row_j = pos(alpha, &index.concat(j)?);
                    let mut acc = Expr::zero();
                    for beta in 1..=hd.m {
                        for k in MultiIndex::enumerate_exact(hd.n, hd.l) {
                            for kk in 1..=hd.n {
                                let col = pos(beta, &k.concat(kk)?);
                                let tkk = t.get(beta, &k, kk);
                                let di = jetcalc::total_derivative(&tkk, i, &ctx)?;
                                let dj = jetcalc::total_derivative(&tkk, j, &ctx)?;
                                let term = &(m_inv.at(row_j, col) * &di)
                                    - &(m_inv.at(row_i, col) * &dj);
                                acc = &acc + &term;
                            }
                        }
                    }
                    equations.push(Equation {
                        label: format!("Rm[{alpha}; {index}; {i},{j}]"),
                        alpha,
                        index: index.clone(),
                        dirs: Some((i, j)),
                        lhs: &half * &syms.compose(&acc)?,
                    });
                }
            }
        }
    }
    Ok(EquationSet { name: "flatness-contracted".into(), m: hd.m, equations })
}

/// Classical HJ residuals for an ansatz `S`: the equations
/// `d/du^beta_J (d_i S^i + H o d^V S) = 0`, `|J| <= l`, together with the
/// scalar `f = d_i S^i + H o d^V S` itself. `S` solves the HJ equations iff
/// `f` depends on the base variables only, i.e. iff every equation is zero.
pub fn classical_hj_residual(
    hd: &HamiltonianData,
    s: &HorizontalForm,
) -> Result<(EquationSet, Expr)> {
    if s.n != hd.n || s.m != hd.m || s.l > hd.l {
        return Err(Error::DimensionMismatch("ansatz does not match the Hamiltonian".into()));
    }
    let mut bindings = BTreeMap::new();
    for beta in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            for i in 1..=hd.n {
                let c = s.component(i).partial(&VarId::Jet(beta, index.clone()));
                bindings.insert(VarId::Momentum(beta, index.clone(), i), c);
            }
        }
    }
    let mut f = hd.hamiltonian.substitute(&bindings)?;
    for i in 1..=hd.n {
        f = &f + &s.component(i).partial(&VarId::Base(i));
    }
    let mut equations = Vec::new();
    for beta in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            equations.push(Equation {
                label: format!("HJc[{beta}; {index}]"),
                alpha: beta,
                index: index.clone(),
                dirs: None,
                lhs: f.partial(&VarId::Jet(beta, index.clone())),
            });
        }
    }
    Ok((EquationSet { name: "hj-classical".into(), m: hd.m, equations }, f))
}

/// Local integrability of `T`: true iff the vertical Jacobian is symmetric,
/// `d T^{J.i}_beta / d u^gamma_K = d T^{K.i}_gamma / d u^beta_J` for all
/// pairs, which characterizes `T = d^V S` locally. Returns the first
/// failing pair as a witness.
#[allow(clippy::type_complexity)]
pub fn dv_closed_check(
    t: &SectionT,
) -> (bool, Option<((u8, MultiIndex), (u8, MultiIndex), u8)>) {
    let indices = MultiIndex::enumerate(t.n, t.l);
    let mut pairs = Vec::new();
    for beta in 1..=t.m {
        for j in &indices {
            pairs.push((beta, j.clone()));
        }
    }
    for a in 0..pairs.len() {
        for b in (a + 1)..pairs.len() {
            let (beta, j) = &pairs[a];
            let (gamma, k) = &pairs[b];
            for i in 1..=t.n {
                let lhs = t.get(*beta, j, i).partial(&VarId::Jet(*gamma, k.clone()));
                let rhs = t.get(*gamma, k, i).partial(&VarId::Jet(*beta, j.clone()));
                if lhs != rhs {
                    return (false, Some(((*beta, j.clone()), (*gamma, k.clone()), i)));
                }
            }
        }
    }
    (true, None)
}

/// Equivalence of HJ problems under a total divergence: the residual
/// system of `T` for the theory `L` equals, equation by equation as normal
/// forms, the residual system of `T + d^V rho` for `L + div rho` — whether
/// or not `T` is a solution.
pub fn equivalence_check(
    p: &LagrangianProblem,
    rho: &HorizontalForm,
    t: &SectionT,
) -> Result<Report> {
    let hd = hamiltonian(p)?;
    let r1 = generalized_hj_residual(&hd, t)?;
    let shifted = add_divergence(p, rho)?;
    let hd_tilde = hamiltonian(&shifted)?;
    let t_tilde = t.add(&jetcalc::vertical_differential(rho))?;
    let r2 = generalized_hj_residual(&hd_tilde, &t_tilde)?;

    let mut report = Report { name: "hj-equivalence".into(), checks: Vec::new() };
    for (set1, set2) in [(&r1.flatness, &r2.flatness), (&r1.hj, &r2.hj)] {
        if set1.equations.len() != set2.equations.len() {
            return Err(Error::Invalid("residual systems have different shapes".into()));
        }
        for (e1, e2) in set1.equations.iter().zip(&set2.equations) {
            report.push(format!("{} = {}~", e1.label, e2.label), &e1.lhs - &e2.lhs);
        }
    }
    Ok(report)
}
