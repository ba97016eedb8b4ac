//! The Hamiltonian side: elimination of the top-order jets, the de Donder
//! Hamiltonian, the Hamilton-de Donder-Weyl equations, fiber-derivative
//! consistency, the momentum-shift covariance under total divergences, and
//! recovery of a Lagrangian from a bare Hamiltonian.

use std::collections::BTreeMap;

use num::BigRational;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::{render_atom_for, Atom, Expr, VarId};
use crate::jetcalc::HorizontalForm;
use crate::linalg::{self, ExprMatrix};
use crate::multiindex::MultiIndex;
use crate::variational::{constraint_equations, LagrangianProblem};

/// A Hamiltonian section in coordinates: the Hamiltonian `H(x, u_{<=l}, p)`
/// together with the eliminated top-order jets `s^alpha_J(x, u_{<=l}, p)`,
/// `|J| = l + 1`, and (when derived from one) the source Lagrangian theory.
#[derive(Clone, Debug)]
pub struct HamiltonianData {
    pub n: u8,
    pub m: u8,
    pub l: usize,
    pub hamiltonian: Expr,
    pub top_jets: BTreeMap<(u8, MultiIndex), Expr>,
    pub source: Option<LagrangianProblem>,
}

impl HamiltonianData {
    /// Wrap a bare Hamiltonian (no Lagrangian attached). The top-jet
    /// expressions are read off the fiber derivative through a fixed
    /// splitting; `recover_lagrangian` validates that the choice does not
    /// matter.
    pub fn from_hamiltonian(n: u8, m: u8, l: usize, hamiltonian: Expr) -> Result<Self> {
        if hamiltonian.max_jet_order() > l {
            return Err(Error::OrderOverflow { order: hamiltonian.max_jet_order(), max: l });
        }
        if hamiltonian.max_momentum_order().unwrap_or(0) > l {
            return Err(Error::OrderOverflow {
                order: hamiltonian.max_momentum_order().unwrap(),
                max: l,
            });
        }
        let mut top_jets = BTreeMap::new();
        for alpha in 1..=m {
            for top in MultiIndex::enumerate_exact(n, l + 1) {
                let (j, dir) = top.splits().into_iter().next().expect("|J| >= 1");
                let s = hamiltonian.partial(&VarId::Momentum(alpha, j, dir));
                top_jets.insert((alpha, top), s);
            }
        }
        Ok(HamiltonianData { n, m, l, hamiltonian, top_jets, source: None })
    }

    /// All momentum coordinates `(alpha, I, i)` with `|I| <= l`.
    pub fn momentum_vars(&self) -> Vec<(u8, MultiIndex, u8)> {
        let mut out = Vec::new();
        for alpha in 1..=self.m {
            for index in MultiIndex::enumerate(self.n, self.l) {
                for i in 1..=self.n {
                    out.push((alpha, index.clone(), i));
                }
            }
        }
        out
    }

    /// JSON export: `{"H": "<expr>", "top_jets": {"(alpha,J)": "<expr>"}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let top: BTreeMap<String, String> = self
            .top_jets
            .iter()
            .map(|((alpha, j), e)| (format!("({alpha},{j})"), e.render(self.m)))
            .collect();
        json!({ "H": self.hamiltonian.render(self.m), "top_jets": top })
    }
}

/// Solve the constraint equations for the top-order jets. The supported
/// class is systems affine in the top jets (Lagrangians at most quadratic
/// there); the coefficient matrix is exactly the top-jet Hessian and the
/// solve is exact, with rational-function entries when the Hessian is not
/// constant.
pub fn solve_top_jets(p: &LagrangianProblem) -> Result<BTreeMap<(u8, MultiIndex), Expr>> {
    let pairs = p.top_pairs();
    let constraints = constraint_equations(p);
    let k = pairs.len();
    let mut a = ExprMatrix::zero(k, k);
    let mut rhs = Vec::with_capacity(k);
    for (r, eq) in constraints.equations.iter().enumerate() {
        let mut remainder = eq.lhs.clone();
        for (c, (beta, top)) in pairs.iter().enumerate() {
            let coeff = eq.lhs.partial(&VarId::Jet(*beta, top.clone()));
            if coeff.max_jet_order() > p.l() {
                return Err(Error::NonAffineConstraint { label: eq.label.clone() });
            }
            remainder = &remainder - &(&coeff * &Expr::jet(*beta, top.clone()));
            *a.at_mut(r, c) = coeff;
        }
        if remainder.max_jet_order() > p.l() {
            return Err(Error::NonAffineConstraint { label: eq.label.clone() });
        }
        rhs.push(-&remainder);
    }
    let solution = a
        .solve(&rhs)
        .map_err(|_| Error::SingularMatrix("top-jet Hessian is not invertible".into()))?;
    Ok(pairs.into_iter().zip(solution).collect())
}

/// The de Donder Hamiltonian `H = E` with the top jets eliminated, where
/// `E = sum p^{I.i}_alpha u^alpha_{Ii} - L`.
pub fn hamiltonian(p: &LagrangianProblem) -> Result<HamiltonianData> {
    let top_jets = solve_top_jets(p)?;
    let mut energy = -&p.lagrangian;
    for alpha in 1..=p.m {
        for index in MultiIndex::enumerate(p.n, p.l()) {
            for i in 1..=p.n {
                let term = &Expr::momentum(alpha, index.clone(), i)
                    * &Expr::jet(alpha, index.concat(i)?);
                energy = &energy + &term;
            }
        }
    }
    let bindings: BTreeMap<VarId, Expr> = top_jets
        .iter()
        .map(|((alpha, j), e)| (VarId::Jet(*alpha, j.clone()), e.clone()))
        .collect();
    let h = energy.substitute(&bindings)?;
    Ok(HamiltonianData {
        n: p.n,
        m: p.m,
        l: p.l(),
        hamiltonian: h,
        top_jets,
        source: Some(p.clone()),
    })
}

/// One equation of the first-order Hamilton-de Donder-Weyl system. The
/// `,_i` differentiations are formal tags on the dependent variables, not
/// new symbols; numeric checks substitute candidate solutions and
/// differentiate in the base variables.
#[derive(Clone, Debug)]
pub enum HdweEquation {
    /// `sum_i p^{I.i}_alpha ,_i = rhs` with `rhs = -dH/du^alpha_I`.
    MomentumDivergence { alpha: u8, index: MultiIndex, rhs: Expr },
    /// `u^alpha_I ,_i = rhs` with `rhs = dH/dp^{I.i}_alpha`.
    JetGradient { alpha: u8, index: MultiIndex, dir: u8, rhs: Expr },
}

impl HdweEquation {
    pub fn render(&self, n: u8, m: u8) -> String {
        match self {
            HdweEquation::MomentumDivergence { alpha, index, rhs } => {
                let lhs: Vec<String> = (1..=n)
                    .map(|i| {
                        let v = render_atom_for(
                            &Atom::Var(VarId::Momentum(*alpha, index.clone(), i)),
                            m,
                        );
                        format!("{v},_{i}")
                    })
                    .collect();
                format!("{} = {}", lhs.join(" + "), rhs.render(m))
            }
            HdweEquation::JetGradient { alpha, index, dir, rhs } => {
                let v = render_atom_for(&Atom::Var(VarId::Jet(*alpha, index.clone())), m);
                format!("{v},_{dir} = {}", rhs.render(m))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HdweSystem {
    pub n: u8,
    pub m: u8,
    pub l: usize,
    pub equations: Vec<HdweEquation>,
}

impl HdweSystem {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "equations": self
                .equations
                .iter()
                .map(|e| e.render(self.n, self.m))
                .collect::<Vec<_>>(),
        })
    }
}

/// The Hamilton-de Donder-Weyl equations of a Hamiltonian section: for each
/// `(alpha, I)` with `|I| <= l`, one momentum-divergence equation and `n`
/// jet-gradient equations.
pub fn hdwe(hd: &HamiltonianData) -> HdweSystem {
    let mut equations = Vec::new();
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            let rhs = -&hd.hamiltonian.partial(&VarId::Jet(alpha, index.clone()));
            equations.push(HdweEquation::MomentumDivergence {
                alpha,
                index: index.clone(),
                rhs,
            });
            for i in 1..=hd.n {
                let rhs = hd.hamiltonian.partial(&VarId::Momentum(alpha, index.clone(), i));
                equations.push(HdweEquation::JetGradient { alpha, index: index.clone(), dir: i, rhs });
            }
        }
    }
    HdweSystem { n: hd.n, m: hd.m, l: hd.l, equations }
}

/// One verified identity in a report.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub label: String,
    pub pass: bool,
    pub residual: Expr,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub checks: Vec<IdentityCheck>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn push(&mut self, label: String, residual: Expr) {
        let pass = residual.is_zero();
        self.checks.push(IdentityCheck { label, pass, residual });
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self, m: u8) -> serde_json::Value {
        json!({
            "name": self.name,
            "pass": self.pass(),
            "checks": self
                .checks
                .iter()
                .map(|c| {
                    json!({
                        "label": c.label,
                        "pass": c.pass,
                        "residual": c.residual.render(m),
                    })
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Verify the fiber-derivative identities of a Hamiltonian section:
///
/// (a) `dH/dp^{I.i}_alpha = u^alpha_{Ii}` for `|I| < l`;
/// (b) `dH/dp^{I.i}_alpha = s^alpha_{Ii}` for `|I| = l`;
/// (c) well-definedness: the derivative depends on `(I, i)` only through
///     the multiset `Ii`.
pub fn fiber_derivative_check(hd: &HamiltonianData) -> Report {
    let mut report = Report { name: "fiber-derivative".into(), checks: Vec::new() };
    let pvar = |alpha: u8, index: &MultiIndex, i: u8| {
        render_atom_for(&Atom::Var(VarId::Momentum(alpha, index.clone(), i)), hd.m)
    };
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate(hd.n, hd.l) {
            for i in 1..=hd.n {
                let d = hd.hamiltonian.partial(&VarId::Momentum(alpha, index.clone(), i));
                let target = index.concat(i).expect("direction validated");
                if index.order() < hd.l {
                    let uvar = render_atom_for(&Atom::Var(VarId::Jet(alpha, target.clone())), hd.m);
                    let residual = &d - &Expr::jet(alpha, target.clone());
                    report.push(format!("(a) dH/d{} = {uvar}", pvar(alpha, &index, i)), residual);
                } else {
                    let s = &hd.top_jets[&(alpha, target.clone())];
                    let residual = &d - s;
                    report.push(
                        format!("(b) dH/d{} = s{alpha}{target}", pvar(alpha, &index, i)),
                        residual,
                    );
                }
            }
        }
    }
    // (c): agreement across splittings of each multiset
    for alpha in 1..=hd.m {
        for target in MultiIndex::enumerate_exact(hd.n, hd.l + 1) {
            let splits = target.splits();
            let (j0, i0) = &splits[0];
            let first = hd.hamiltonian.partial(&VarId::Momentum(alpha, j0.clone(), *i0));
            for (j, i) in &splits[1..] {
                let other = hd.hamiltonian.partial(&VarId::Momentum(alpha, j.clone(), *i));
                report.push(
                    format!("(c) dH/d{} = dH/d{}", pvar(alpha, j0, *i0), pvar(alpha, j, *i)),
                    &first - &other,
                );
            }
        }
    }
    report
}

/// The momentum shift induced by a divergence form: the substitution
/// `p^{K.i}_beta -> p^{K.i}_beta - d(rho^i)/du^beta_K` for all `|K| <= l`.
pub fn psi_shift(rho: &HorizontalForm, l: usize) -> BTreeMap<VarId, Expr> {
    let mut map = BTreeMap::new();
    for beta in 1..=rho.m {
        for index in MultiIndex::enumerate(rho.n, l) {
            for i in 1..=rho.n {
                let shift = rho.component(i).partial(&VarId::Jet(beta, index.clone()));
                let var = VarId::Momentum(beta, index.clone(), i);
                map.insert(var.clone(), &Expr::var(var) - &shift);
            }
        }
    }
    map
}

/// Verify the covariance of the Hamiltonian picture under addition of a
/// total divergence to the Lagrangian: with `Psi` the momentum shift, the
/// eliminated jets transform by substitution (`s~ = s o Psi`, equivalently
/// the shifted theory's inverse Legendre transform factors through `Psi`),
/// and the Hamiltonians satisfy `H~ = H o Psi - sum_i d(rho^i)/dx^i`. Both
/// sides are derived independently and compared as normal forms.
pub fn psi_covariance(p: &LagrangianProblem, rho: &HorizontalForm) -> Result<Report> {
    let hd = hamiltonian(p)?;
    let shifted = crate::variational::add_divergence(p, rho)?;
    let hd_tilde = hamiltonian(&shifted)?;
    let shift = psi_shift(rho, p.l());

    let mut report = Report { name: "psi-covariance".into(), checks: Vec::new() };
    for ((alpha, j), s) in &hd.top_jets {
        let transported = s.substitute(&shift)?;
        let residual = &hd_tilde.top_jets[&(*alpha, j.clone())] - &transported;
        report.push(format!("(iv/v) s~{alpha}{j} = s{alpha}{j} o Psi"), residual);
    }
    let mut base_div = Expr::zero();
    for i in 1..=p.n {
        base_div = &base_div + &rho.component(i).partial(&VarId::Base(i));
    }
    let transported = &hd.hamiltonian.substitute(&shift)? - &base_div;
    report.push(
        "(vi) H~ = H o Psi - d_i rho^i".to_string(),
        &hd_tilde.hamiltonian - &transported,
    );
    Ok(report)
}

/// A Lagrangian recovered from a bare Hamiltonian section, with the
/// conditions that were verified along the way.
#[derive(Clone, Debug)]
pub struct RecoveredLagrangian {
    pub problem: LagrangianProblem,
    pub report: Report,
}

/// Recover the Lagrangian of a Hamiltonian section, when one exists.
///
/// Checks, in order: (a) the lower fiber derivatives are the matching jet
/// coordinates; (b) the top fiber derivatives depend only on the index
/// multiset; affineness of the top fiber derivatives in the momenta with
/// constant coefficients; (c) the second-derivative rank condition (full
/// rank equal to the number of top jet coordinates). On success the energy
/// `sum p dH/dp - H` is checked to be constant along the fibers of the
/// fiber derivative and pushed down through a section of it, yielding `L`
/// on the order-`(l+1)` jet space.
///
/// Connectedness of the fiber-derivative fibers has no finite symbolic
/// test and is assumed; in the affine class handled here the fibers are
/// affine subspaces, so the assumption holds.
pub fn recover_lagrangian(hd: &HamiltonianData) -> Result<RecoveredLagrangian> {
    let mut report = Report { name: "recover-lagrangian".into(), checks: Vec::new() };
    let h = &hd.hamiltonian;
    let pvar = |alpha: u8, index: &MultiIndex, i: u8| {
        render_atom_for(&Atom::Var(VarId::Momentum(alpha, index.clone(), i)), hd.m)
    };

    // (a) lower fiber derivatives; vacuous for first-order theories (l = 0)
    if hd.l > 0 {
        for alpha in 1..=hd.m {
            for index in MultiIndex::enumerate(hd.n, hd.l - 1) {
                for i in 1..=hd.n {
                    let d = h.partial(&VarId::Momentum(alpha, index.clone(), i));
                    let want = Expr::jet(alpha, index.concat(i)?);
                    if d != want {
                        return Err(Error::NotLagrangian {
                            condition: 'a',
                            witness: format!(
                                "dH/d{} = {} but the jet coordinate {} is required",
                                pvar(alpha, &index, i),
                                d.render(hd.m),
                                render_atom_for(
                                    &Atom::Var(VarId::Jet(alpha, index.concat(i)?)),
                                    hd.m
                                ),
                            ),
                        });
                    }
                    report.push(format!("(a) dH/d{}", pvar(alpha, &index, i)), &d - &want);
                }
            }
        }
    }

    // (b) top fiber derivatives are well defined on index multisets
    let top_multisets: Vec<(u8, MultiIndex)> = {
        let mut v = Vec::new();
        for alpha in 1..=hd.m {
            for a in MultiIndex::enumerate_exact(hd.n, hd.l + 1) {
                v.push((alpha, a));
            }
        }
        v
    };
    let mut s_top: BTreeMap<(u8, MultiIndex), Expr> = BTreeMap::new();
    for (alpha, target) in &top_multisets {
        let splits = target.splits();
        let (j0, i0) = &splits[0];
        let first = h.partial(&VarId::Momentum(*alpha, j0.clone(), *i0));
        for (j, i) in &splits[1..] {
            let other = h.partial(&VarId::Momentum(*alpha, j.clone(), *i));
            if first != other {
                return Err(Error::NotLagrangian {
                    condition: 'b',
                    witness: format!(
                        "dH/d{} and dH/d{} disagree for the multiset {target}",
                        pvar(*alpha, j0, *i0),
                        pvar(*alpha, j, *i),
                    ),
                });
            }
        }
        report.push(format!("(b) fiber derivative at ({alpha},{target})"), Expr::zero());
        s_top.insert((*alpha, target.clone()), first);
    }

    // affine decomposition of the top fiber derivatives over the top momenta
    let top_momenta: Vec<(u8, MultiIndex, u8)> = {
        let mut v = Vec::new();
        for beta in 1..=hd.m {
            for k in MultiIndex::enumerate_exact(hd.n, hd.l) {
                for i in 1..=hd.n {
                    v.push((beta, k.clone(), i));
                }
            }
        }
        v
    };
    let mut coeff_rows: Vec<Vec<BigRational>> = Vec::with_capacity(top_multisets.len());
    let mut offsets: Vec<Expr> = Vec::with_capacity(top_multisets.len());
    for key in &top_multisets {
        let s = &s_top[&(key.0, key.1.clone())];
        let mut row = Vec::with_capacity(top_momenta.len());
        let mut rest = s.clone();
        for (beta, k, i) in &top_momenta {
            let var = VarId::Momentum(*beta, k.clone(), *i);
            let c = s.partial(&var);
            let Some(c) = c.as_constant() else {
                return Err(Error::NonAffineFiberDerivative(format!(
                    "d(s{}{})/dp{beta}[{k};{i}] is not constant",
                    key.0, key.1
                )));
            };
            rest = &rest - &(&Expr::from_rational(c.clone()) * &Expr::var(var));
            row.push(c);
        }
        if rest.contains_momentum() {
            return Err(Error::NonAffineFiberDerivative(format!(
                "s{}{} is not affine in the momenta",
                key.0, key.1
            )));
        }
        coeff_rows.push(row);
        offsets.push(rest);
    }

    // (c) rank condition: rows over all splittings (alpha, I, i), columns
    // over top jet pairs; the entry sums the affine coefficients across the
    // splittings of the column multiset.
    let mut rank_rows: Vec<Vec<BigRational>> = Vec::new();
    for alpha in 1..=hd.m {
        for index in MultiIndex::enumerate_exact(hd.n, hd.l) {
            for i in 1..=hd.n {
                let target = index.concat(i)?;
                let row_of = top_multisets
                    .iter()
                    .position(|(a, t)| *a == alpha && *t == target)
                    .expect("every concatenation is a top multiset");
                let mut row = Vec::with_capacity(top_multisets.len());
                for (beta, a) in &top_multisets {
                    let mut acc = BigRational::from_integer(0.into());
                    for (j1, j) in a.splits() {
                        let col = top_momenta
                            .iter()
                            .position(|(b, k, d)| b == beta && *k == j1 && *d == j)
                            .expect("split of a top multiset is a top momentum");
                        acc += &coeff_rows[row_of][col];
                    }
                    row.push(acc);
                }
                rank_rows.push(row);
            }
        }
    }
    let need = top_multisets.len();
    let rank = linalg::rank_rational(&rank_rows);
    if rank != need {
        return Err(Error::NotLagrangian {
            condition: 'c',
            witness: format!("second-derivative matrix has rank {rank}, need {need}"),
        });
    }
    report.push(format!("(c) rank condition ({rank} = {need})"), Expr::zero());

    // the energy, constant along fibers of the fiber derivative
    let mut energy = -h;
    for (alpha, index, i) in hd.momentum_vars() {
        let q = VarId::Momentum(alpha, index.clone(), i);
        energy = &energy + &(&Expr::var(q.clone()) * &h.partial(&q));
    }
    for (alpha, index, i) in hd.momentum_vars() {
        if index.order() == hd.l {
            continue;
        }
        let d = energy.partial(&VarId::Momentum(alpha, index.clone(), i));
        if !d.is_zero() {
            return Err(Error::Invalid(format!(
                "energy depends on the lower momentum p{alpha}[{index};{i}]"
            )));
        }
    }
    for v in linalg::nullspace_rational(&coeff_rows) {
        let mut d = Expr::zero();
        for (c, (beta, k, i)) in v.iter().zip(&top_momenta) {
            if num::Zero::is_zero(c) {
                continue;
            }
            let dq = energy.partial(&VarId::Momentum(*beta, k.clone(), *i));
            d = &d + &(&Expr::from_rational(c.clone()) * &dq);
        }
        if !d.is_zero() {
            return Err(Error::Invalid(
                "energy is not constant along the fibers of the fiber derivative".into(),
            ));
        }
    }
    report.push("energy constant along fibers".into(), Expr::zero());

    // a section of the fiber derivative: solve for the momenta in terms of
    // the top jets, free directions set to zero
    let rhs: Vec<Expr> = top_multisets
        .iter()
        .zip(&offsets)
        .map(|((alpha, a), d)| &Expr::jet(*alpha, a.clone()) - d)
        .collect();
    let section = linalg::particular_solution_rational(&coeff_rows, &rhs)?.ok_or_else(|| {
        Error::NotLagrangian {
            condition: 'c',
            witness: "fiber-derivative system is inconsistent".into(),
        }
    })?;
    let bindings: BTreeMap<VarId, Expr> = top_momenta
        .iter()
        .cloned()
        .zip(section)
        .map(|((beta, k, i), e)| (VarId::Momentum(beta, k, i), e))
        .collect();
    let lagrangian = energy.substitute(&bindings)?;
    if lagrangian.contains_momentum() {
        return Err(Error::Invalid("recovered Lagrangian still contains momenta".into()));
    }
    let problem = LagrangianProblem::new(hd.n, hd.m, hd.l + 1, lagrangian)?;
    Ok(RecoveredLagrangian { problem, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};

    fn mi(n: u8, e: &[u8]) -> MultiIndex {
        MultiIndex::new(n, e).unwrap()
    }

    fn biharmonic() -> LagrangianProblem {
        let ctx = ParseContext::lagrangian(2, 1, 2);
        let l = parse("1/2*u[1,1]^2 + u[1,2]^2 + 1/2*u[2,2]^2", &ctx).unwrap();
        LagrangianProblem::new(2, 1, 2, l).unwrap()
    }

    fn first_order() -> LagrangianProblem {
        let ctx = ParseContext::lagrangian(1, 1, 1);
        LagrangianProblem::new(1, 1, 1, parse("1/2*u[1]^2", &ctx).unwrap()).unwrap()
    }

    #[test]
    fn biharmonic_top_jets() {
        let s = solve_top_jets(&biharmonic()).unwrap();
        let pc = ParseContext::with_momenta(2, 1, 2, 1);
        assert_eq!(s[&(1, mi(2, &[1, 1]))], parse("p[1;1]", &pc).unwrap());
        assert_eq!(
            s[&(1, mi(2, &[1, 2]))],
            parse("1/2*p[1;2] + 1/2*p[2;1]", &pc).unwrap()
        );
        assert_eq!(s[&(1, mi(2, &[2, 2]))], parse("p[2;2]", &pc).unwrap());
    }

    #[test]
    fn top_jets_satisfy_constraints() {
        for p in [biharmonic(), first_order()] {
            let s = solve_top_jets(&p).unwrap();
            let bindings: BTreeMap<VarId, Expr> = s
                .iter()
                .map(|((a, j), e)| (VarId::Jet(*a, j.clone()), e.clone()))
                .collect();
            for eq in constraint_equations(&p).equations {
                assert!(eq.lhs.substitute(&bindings).unwrap().is_zero(), "{}", eq.label);
            }
        }
    }

    #[test]
    fn random_quadratic_back_substitution() {
        // random constant positive-definite-ish quadratic Lagrangians solve
        // exactly
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let tops = MultiIndex::enumerate_exact(2, 2);
            let mut l = Expr::zero();
            for (k, t) in tops.iter().enumerate() {
                let c = rng.gen_range(1i64..5);
                let u = Expr::jet(1, t.clone());
                l = &l + &(&Expr::from_int(c) * &(&u * &u));
                let v = Expr::jet(1, tops[(k + 1) % tops.len()].clone());
                l = &l + &(&Expr::rational(rng.gen_range(-1i64..=1), 3) * &(&u * &v));
                l = &l + &(&Expr::from_int(rng.gen_range(-2i64..=2)) * &u);
            }
            let p = match LagrangianProblem::new(2, 1, 2, l) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let s = match solve_top_jets(&p) {
                Ok(s) => s,
                Err(_) => continue, // a degenerate draw
            };
            let bindings: BTreeMap<VarId, Expr> = s
                .iter()
                .map(|((a, j), e)| (VarId::Jet(*a, j.clone()), e.clone()))
                .collect();
            for eq in constraint_equations(&p).equations {
                assert!(eq.lhs.substitute(&bindings).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn nonlinear_constraint_rejected() {
        let ctx = ParseContext::lagrangian(1, 1, 2);
        let p = LagrangianProblem::new(1, 1, 2, parse("1/4*u[1,1]^4", &ctx).unwrap()).unwrap();
        assert!(matches!(
            solve_top_jets(&p),
            Err(Error::NonAffineConstraint { .. })
        ));
    }

    #[test]
    fn biharmonic_hamiltonian_matches_expected() {
        let hd = hamiltonian(&biharmonic()).unwrap();
        let pc = ParseContext::with_momenta(2, 1, 1, 1);
        // H = p^{.i} u_i + 1/2 p_{(i.j)} p^{(i.j)}, expanded over ordered pairs
        let expected = parse(
            "p[;1]*u[1] + p[;2]*u[2] \
             + 1/2*p[1;1]^2 + 1/2*p[2;2]^2 \
             + 1/4*p[1;2]^2 + 1/4*p[2;1]^2 + 1/2*p[1;2]*p[2;1]",
            &pc,
        )
        .unwrap();
        assert_eq!(hd.hamiltonian, expected);
    }

    #[test]
    fn first_order_hamiltonian() {
        let hd = hamiltonian(&first_order()).unwrap();
        let pc = ParseContext::with_momenta(1, 1, 0, 0);
        assert_eq!(hd.hamiltonian, parse("1/2*p[;1]^2", &pc).unwrap());
        assert_eq!(hd.top_jets[&(1, mi(1, &[1]))], parse("p[;1]", &pc).unwrap());
    }

    #[test]
    fn biharmonic_hdwe_families() {
        let hd = hamiltonian(&biharmonic()).unwrap();
        let sys = hdwe(&hd);
        // (count of multi-indices |I| <= l) * m * (n + 1)
        assert_eq!(sys.equations.len(), 9);
        let pc = ParseContext::with_momenta(2, 1, 1, 1);
        for eq in &sys.equations {
            match eq {
                HdweEquation::MomentumDivergence { index, rhs, .. } => {
                    if index.is_empty() {
                        // p^{.i},_i = 0
                        assert!(rhs.is_zero());
                    } else {
                        // p^{j.i},_i = -p^{.j}
                        let j = index.entries()[0];
                        let want = -&Expr::momentum(1, mi(2, &[]), j);
                        assert_eq!(rhs, &want);
                    }
                }
                HdweEquation::JetGradient { index, dir, rhs, .. } => {
                    if index.is_empty() {
                        // u,_i = u_i
                        assert_eq!(rhs, &Expr::jet(1, mi(2, &[*dir])));
                    } else {
                        // u_i,_j = p_{(i.j)}
                        let i = index.entries()[0];
                        let want = parse(&format!("1/2*p[{i};{dir}] + 1/2*p[{dir};{i}]"), &pc).unwrap();
                        assert_eq!(rhs, &want);
                    }
                }
            }
        }
    }

    #[test]
    fn first_order_hdwe() {
        let hd = hamiltonian(&first_order()).unwrap();
        let sys = hdwe(&hd);
        assert_eq!(sys.equations.len(), 2);
        match &sys.equations[0] {
            HdweEquation::MomentumDivergence { rhs, .. } => assert!(rhs.is_zero()),
            other => panic!("unexpected {other:?}"),
        }
        match &sys.equations[1] {
            HdweEquation::JetGradient { rhs, .. } => {
                assert_eq!(rhs, &Expr::momentum(1, mi(1, &[]), 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fiber_derivative_report_passes_for_derived_hamiltonians() {
        for p in [biharmonic(), first_order()] {
            let hd = hamiltonian(&p).unwrap();
            let report = fiber_derivative_check(&hd);
            assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
        }
        // third-order theory exercises the |I| < l case
        let ctx = ParseContext::lagrangian(1, 1, 3);
        let p = LagrangianProblem::new(1, 1, 3, parse("1/2*u[1,1,1]^2", &ctx).unwrap()).unwrap();
        let hd = hamiltonian(&p).unwrap();
        let report = fiber_derivative_check(&hd);
        assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
        // dH/dp[1;1] = u[1,1] explicitly
        let d = hd.hamiltonian.partial(&VarId::Momentum(1, mi(1, &[1]), 1));
        assert_eq!(d, Expr::jet(1, mi(1, &[1, 1])));
    }

    #[test]
    fn psi_covariance_simple_cases() {
        let p = biharmonic();
        // rho = 0: identity transform
        let report = psi_covariance(&p, &HorizontalForm::zero(2, 1, 1)).unwrap();
        assert!(report.pass());

        // rho depending on x only: H~ = H - d_i rho^i and Psi = id
        let pc = ParseContext::on_jets(2, 1, 1);
        let rho = HorizontalForm::new(
            2,
            1,
            1,
            vec![parse("x1^2*x2", &pc).unwrap(), parse("x2", &pc).unwrap()],
        )
        .unwrap();
        let report = psi_covariance(&p, &rho).unwrap();
        assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
        let hd = hamiltonian(&p).unwrap();
        let hd2 = hamiltonian(&crate::variational::add_divergence(&p, &rho).unwrap()).unwrap();
        let div = parse("2*x1*x2 + 1", &pc).unwrap();
        assert_eq!(hd2.hamiltonian, &hd.hamiltonian - &div);

        // rho^1 = u: the empty-index momentum is shifted by 1
        let rho = HorizontalForm::new(2, 1, 1, vec![parse("u[]", &pc).unwrap(), Expr::zero()]).unwrap();
        let report = psi_covariance(&p, &rho).unwrap();
        assert!(report.pass(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn recover_round_trips() {
        for p in [biharmonic(), first_order()] {
            let hd = hamiltonian(&p).unwrap();
            let bare = HamiltonianData::from_hamiltonian(hd.n, hd.m, hd.l, hd.hamiltonian.clone())
                .unwrap();
            let rec = recover_lagrangian(&bare).unwrap();
            assert_eq!(rec.problem.lagrangian, p.lagrangian);
            assert_eq!(rec.problem.order, p.order);
        }
    }

    #[test]
    fn recover_rejects_non_lagrangian_hamiltonian() {
        // H = p^{.1} p^{.2} on an l = 1 theory: dH/dp[;1] = p[;2] != u[1]
        let pc = ParseContext::with_momenta(2, 1, 1, 1);
        let h = parse("p[;1]*p[;2]", &pc).unwrap();
        let bare = HamiltonianData::from_hamiltonian(2, 1, 1, h).unwrap();
        match recover_lagrangian(&bare) {
            Err(Error::NotLagrangian { condition: 'a', witness }) => {
                assert!(witness.contains("dH/dp"), "{witness}");
            }
            other => panic!("expected condition (a) failure, got {other:?}"),
        }
    }
}
