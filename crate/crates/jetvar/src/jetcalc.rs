//! Jet-calculus operators: total derivatives, prolongation, vertical
//! differential, total divergence.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, VarId};
use crate::hamjac::SectionT;
use crate::multiindex::MultiIndex;

/// Dimensions plus the truncation ceiling for total derivatives. Applying
/// `D_i` raises the jet order of an expression by exactly one; the ceiling
/// bounds how far that is allowed to go.
#[derive(Clone, Copy, Debug)]
pub struct JetContext {
    pub n: u8,
    pub m: u8,
    pub max_order: usize,
}

impl JetContext {
    pub fn new(n: u8, m: u8, max_order: usize) -> Self {
        JetContext { n, m, max_order }
    }
}

/// The `i`th total derivative `D_i = d/dx^i + sum u^a_{Ii} d/du^a_I`,
/// acting on the jet variables actually present. Opaque symbols `f,_J`
/// differentiate to `f,_{Ji}`; parameters are constants. Momentum
/// variables have no total derivative.
pub fn total_derivative(e: &Expr, i: u8, ctx: &JetContext) -> Result<Expr> {
    if i == 0 || i > ctx.n {
        return Err(Error::IndexOutOfRange { index: i as usize, max: ctx.n as usize });
    }
    let order = e.max_jet_order();
    if order >= ctx.max_order {
        return Err(Error::OrderOverflow { order: order + 1, max: ctx.max_order });
    }
    let mut out = Expr::zero();
    for atom in e.free_atoms() {
        let image = match &atom {
            Atom::Var(VarId::Base(j)) => {
                if *j == i {
                    Expr::one()
                } else {
                    continue;
                }
            }
            Atom::Var(VarId::Jet(alpha, index)) => Expr::jet(*alpha, index.concat(i)?),
            Atom::Var(VarId::Momentum(..)) => {
                return Err(Error::MomentumDerivative(atom.to_string()))
            }
            Atom::Var(VarId::Param(_)) => continue,
            Atom::Opaque { name, derivs } => Expr::opaque_deriv(name, derivs.concat(i)?),
        };
        let fp = e.formal_partial_atom(&atom);
        if fp.is_zero() {
            continue;
        }
        out = &out + &(&fp * &image);
    }
    Ok(out)
}

/// Iterated total derivative `D_I = D_{i_1} ... D_{i_k}`; the result is
/// independent of the entry order because total derivatives commute.
pub fn total_derivative_multi(e: &Expr, index: &MultiIndex, ctx: &JetContext) -> Result<Expr> {
    let mut out = e.clone();
    for &i in index.entries() {
        out = total_derivative(&out, i, ctx)?;
    }
    Ok(out)
}

/// Jet prolongation of a section given by `m` expressions in the base
/// variables (opaque symbols and parameters allowed): maps `(alpha, I)` to
/// the iterated base derivative of `s^alpha`, for all `|I| <= k`.
pub fn prolong(
    sections: &[Expr],
    k: usize,
    ctx: &JetContext,
) -> Result<BTreeMap<(u8, MultiIndex), Expr>> {
    if sections.len() != ctx.m as usize {
        return Err(Error::DimensionMismatch(format!(
            "expected {} section components, got {}",
            ctx.m,
            sections.len()
        )));
    }
    for (k, s) in sections.iter().enumerate() {
        if s.free_vars()
            .iter()
            .any(|v| matches!(v, VarId::Jet(..) | VarId::Momentum(..)))
        {
            return Err(Error::Invalid(format!(
                "section component {} must depend on base variables only",
                k + 1
            )));
        }
    }
    let dctx = JetContext::new(ctx.n, ctx.m, usize::MAX);
    let mut out = BTreeMap::new();
    for (a, s) in sections.iter().enumerate() {
        let alpha = (a + 1) as u8;
        for index in MultiIndex::enumerate(ctx.n, k) {
            let value = if index.is_empty() {
                s.clone()
            } else {
                // reuse the previously computed shorter prolongation
                let mut entries = index.entries().to_vec();
                let last = entries.pop().unwrap();
                let parent = MultiIndex::new(ctx.n, &entries)?;
                let base: &Expr = out
                    .get(&(alpha, parent))
                    .expect("enumeration is ordered by length");
                total_derivative(base, last, &dctx)?
            };
            out.insert((alpha, index), value);
        }
    }
    Ok(out)
}

/// An `(n-1)`-horizontal form on the order-`l` jet space, given by its `n`
/// coefficient functions (no momentum variables). Also serves as the
/// Hamilton-Jacobi ansatz `S`.
#[derive(Clone, Debug)]
pub struct HorizontalForm {
    pub n: u8,
    pub m: u8,
    pub l: usize,
    components: Vec<Expr>,
}

impl HorizontalForm {
    pub fn new(n: u8, m: u8, l: usize, components: Vec<Expr>) -> Result<Self> {
        if components.len() != n as usize {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} components, got {}",
                components.len()
            )));
        }
        for (k, c) in components.iter().enumerate() {
            if c.contains_momentum() {
                return Err(Error::Invalid(format!(
                    "component {} contains momentum variables",
                    k + 1
                )));
            }
            if c.max_jet_order() > l {
                return Err(Error::OrderOverflow { order: c.max_jet_order(), max: l });
            }
        }
        Ok(HorizontalForm { n, m, l, components })
    }

    pub fn zero(n: u8, m: u8, l: usize) -> Self {
        HorizontalForm { n, m, l, components: vec![Expr::zero(); n as usize] }
    }

    pub fn component(&self, i: u8) -> &Expr {
        &self.components[(i - 1) as usize]
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

/// Vertical differential `d^V`: the section with coefficients
/// `T^{J.i}_beta = d rho^i / d u^beta_J`, `|J| <= l`.
pub fn vertical_differential(rho: &HorizontalForm) -> SectionT {
    let mut t = SectionT::zero(rho.n, rho.m, rho.l);
    for i in 1..=rho.n {
        for beta in 1..=rho.m {
            for index in MultiIndex::enumerate(rho.n, rho.l) {
                let c = rho.component(i).partial(&VarId::Jet(beta, index.clone()));
                if !c.is_zero() {
                    t.set(beta, index.clone(), i, c).expect("coefficient validated by rho");
                }
            }
        }
    }
    t
}

/// Total divergence `sum_i D_i rho^i`, an expression of order `l + 1`.
pub fn total_divergence(rho: &HorizontalForm, ctx: &JetContext) -> Result<Expr> {
    let mut out = Expr::zero();
    for i in 1..=rho.n {
        out = &out + &total_derivative(rho.component(i), i, ctx)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};

    fn mi(n: u8, e: &[u8]) -> MultiIndex {
        MultiIndex::new(n, e).unwrap()
    }

    #[test]
    fn total_derivative_of_fiber_variable() {
        let ctx = JetContext::new(1, 1, 2);
        let u = Expr::jet(1, mi(1, &[]));
        assert_eq!(total_derivative(&u, 1, &ctx).unwrap(), Expr::jet(1, mi(1, &[1])));
    }

    #[test]
    fn total_derivative_leibniz() {
        let ctx = JetContext::new(2, 1, 3);
        let pc = ParseContext::lagrangian(2, 1, 2);
        let e = parse("x1*u[2]", &pc).unwrap();
        let d = total_derivative(&e, 1, &ctx).unwrap();
        let expected = parse("u[2] + x1*u[1,2]", &pc).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn total_derivative_order_overflow() {
        let ctx = JetContext::new(1, 1, 1);
        let e = Expr::jet(1, mi(1, &[1]));
        assert!(matches!(
            total_derivative(&e, 1, &ctx),
            Err(Error::OrderOverflow { .. })
        ));
    }

    #[test]
    fn total_derivative_rejects_momenta() {
        let ctx = JetContext::new(1, 1, 4);
        let e = Expr::momentum(1, mi(1, &[]), 1);
        assert!(matches!(
            total_derivative(&e, 1, &ctx),
            Err(Error::MomentumDerivative(_))
        ));
    }

    #[test]
    fn multi_derivative_matches_hand_expansion() {
        let ctx = JetContext::new(1, 1, 4);
        let pc = ParseContext::lagrangian(1, 1, 2);
        let e = parse("1/2*u[]^2", &pc).unwrap();
        let d = total_derivative_multi(&e, &mi(1, &[1, 1]), &ctx).unwrap();
        let expected = parse("u[1]^2 + u[]*u[1,1]", &pc).unwrap();
        assert_eq!(d, expected);
        // empty composition is the identity
        assert_eq!(total_derivative_multi(&e, &mi(1, &[]), &ctx).unwrap(), e);
    }

    #[test]
    fn total_derivatives_commute() {
        use rand::SeedableRng;
        let ctx = JetContext::new(2, 1, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let vars: Vec<Atom> = [
            Atom::Var(VarId::Base(1)),
            Atom::Var(VarId::Base(2)),
            Atom::Var(VarId::Jet(1, mi(2, &[]))),
            Atom::Var(VarId::Jet(1, mi(2, &[1]))),
            Atom::Var(VarId::Jet(1, mi(2, &[2]))),
        ]
        .to_vec();
        for _ in 0..20 {
            let e = crate::numcheck::random_polynomial(&vars, 3, 6, &mut rng);
            let d12 = total_derivative(&total_derivative(&e, 1, &ctx).unwrap(), 2, &ctx).unwrap();
            let d21 = total_derivative(&total_derivative(&e, 2, &ctx).unwrap(), 1, &ctx).unwrap();
            assert_eq!(d12, d21);
        }
    }

    #[test]
    fn prolong_product_section() {
        let ctx = JetContext::new(2, 1, 8);
        let pc = ParseContext::lagrangian(2, 1, 0);
        let s = parse("x1*x2", &pc).unwrap();
        let j = prolong(&[s], 2, &ctx).unwrap();
        assert_eq!(j[&(1, mi(2, &[]))], parse("x1*x2", &pc).unwrap());
        assert_eq!(j[&(1, mi(2, &[1]))], parse("x2", &pc).unwrap());
        assert_eq!(j[&(1, mi(2, &[2]))], parse("x1", &pc).unwrap());
        assert_eq!(j[&(1, mi(2, &[1, 2]))], Expr::one());
        assert!(j[&(1, mi(2, &[1, 1]))].is_zero());
        assert!(j[&(1, mi(2, &[2, 2]))].is_zero());
    }

    #[test]
    fn prolong_opaque_section() {
        let ctx = JetContext::new(2, 1, 8);
        let phi = Expr::opaque("phi", 2);
        let j = prolong(std::slice::from_ref(&phi), 1, &ctx).unwrap();
        assert_eq!(j[&(1, mi(2, &[]))], phi);
        assert_eq!(j[&(1, mi(2, &[1]))], Expr::opaque_deriv("phi", mi(2, &[1])));
        assert_eq!(j[&(1, mi(2, &[2]))], Expr::opaque_deriv("phi", mi(2, &[2])));
    }

    #[test]
    fn total_divergence_basics() {
        let ctx = JetContext::new(1, 1, 2);
        let u = Expr::jet(1, mi(1, &[]));
        let rho = HorizontalForm::new(1, 1, 0, vec![u]).unwrap();
        assert_eq!(total_divergence(&rho, &ctx).unwrap(), Expr::jet(1, mi(1, &[1])));

        let rho = HorizontalForm::new(2, 1, 0, vec![Expr::from_int(3), Expr::from_int(-1)]).unwrap();
        let ctx = JetContext::new(2, 1, 2);
        assert!(total_divergence(&rho, &ctx).unwrap().is_zero());
    }

    #[test]
    fn vertical_differential_of_fiber_component() {
        // rho = (u, 0) on J^0: T^{().1} = 1, everything else 0
        let u = Expr::jet(1, mi(2, &[]));
        let rho = HorizontalForm::new(2, 1, 0, vec![u, Expr::zero()]).unwrap();
        let t = vertical_differential(&rho);
        assert_eq!(t.get(1, &mi(2, &[]), 1), Expr::one());
        assert!(t.get(1, &mi(2, &[]), 2).is_zero());

        // coefficients in x only give T = 0
        let rho = HorizontalForm::new(
            2,
            1,
            0,
            vec![Expr::base(1), &Expr::base(2) * &Expr::base(2)],
        )
        .unwrap();
        assert!(vertical_differential(&rho).is_zero());
    }

    #[test]
    fn prolong_chain_rule_consistency() {
        // substituting the prolongation into D_i(e) equals the base
        // derivative of (e with the prolongation substituted)
        use rand::SeedableRng;
        use std::collections::BTreeMap;
        let ctx = JetContext::new(2, 1, 4);
        let pc = ParseContext::lagrangian(2, 1, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let base_vars = [Atom::Var(VarId::Base(1)), Atom::Var(VarId::Base(2))];
        for _ in 0..10 {
            let s = crate::numcheck::random_polynomial(&base_vars, 3, 5, &mut rng);
            let e = parse("u[1]^2 - x2*u[] + u[2]*u[1]", &pc).unwrap();
            for i in 1..=2u8 {
                let de = total_derivative(&e, i, &ctx).unwrap();
                let j2 = prolong(std::slice::from_ref(&s), 2, &ctx).unwrap();
                let bind: BTreeMap<VarId, Expr> =
                    j2.iter().map(|((a, idx), v)| (VarId::Jet(*a, idx.clone()), v.clone())).collect();
                let lhs = de.substitute(&bind).unwrap();
                let rhs = e.substitute(&bind).unwrap().partial(&VarId::Base(i));
                assert_eq!(lhs, rhs);
            }
        }
    }
}
