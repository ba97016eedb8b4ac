//! The Lagrangian side: Euler-Lagrange operator, top-jet Hessian,
//! hyperregularity, constraint equations, and equivalence under total
//! divergences.

use num::{BigInt, BigRational, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, Point, VarId};
use crate::jetcalc::{self, HorizontalForm, JetContext};
use crate::linalg::ExprMatrix;
use crate::multiindex::MultiIndex;

/// A Lagrangian field theory in coordinates: base dimension `n`, fiber
/// dimension `m`, order `l + 1 >= 1`, and the density coefficient `L` on
/// the order-`(l+1)` jet space.
#[derive(Clone, Debug)]
pub struct LagrangianProblem {
    pub n: u8,
    pub m: u8,
    /// The theory order `l + 1`.
    pub order: usize,
    pub lagrangian: Expr,
}

impl LagrangianProblem {
    pub fn new(n: u8, m: u8, order: usize, lagrangian: Expr) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("theory order must be at least 1".into()));
        }
        if lagrangian.contains_momentum() {
            return Err(Error::Invalid(
                "a Lagrangian density must not contain momentum variables".into(),
            ));
        }
        if lagrangian.max_jet_order() > order {
            return Err(Error::OrderOverflow {
                order: lagrangian.max_jet_order(),
                max: order,
            });
        }
        Ok(LagrangianProblem { n, m, order, lagrangian })
    }

    /// `l = order - 1`, the momentum-side order.
    pub fn l(&self) -> usize {
        self.order - 1
    }

    /// Derivative context covering everything the pipeline needs
    /// (Euler-Lagrange expressions live on the order-`(2l+2)` jet space).
    pub fn ctx(&self) -> JetContext {
        JetContext::new(self.n, self.m, 2 * self.order)
    }

    /// Index pairs `(alpha, I)` with `|I| = order`, in the canonical
    /// (fiber, then length-lex) order used for Hessian rows and columns.
    pub fn top_pairs(&self) -> Vec<(u8, MultiIndex)> {
        let mut out = Vec::new();
        for alpha in 1..=self.m {
            for index in MultiIndex::enumerate_exact(self.n, self.order) {
                out.push((alpha, index));
            }
        }
        out
    }
}

/// A labeled system `lhs = 0`. Labels carry the `(alpha, I)` pair (and the
/// direction pair for curvature components) so rows can be addressed by
/// multi-index.
#[derive(Clone, Debug)]
pub struct Equation {
    pub label: String,
    pub alpha: u8,
    pub index: MultiIndex,
    /// Direction pair for skew-indexed (curvature) families.
    pub dirs: Option<(u8, u8)>,
    pub lhs: Expr,
}

#[derive(Clone, Debug)]
pub struct EquationSet {
    pub name: String,
    pub m: u8,
    pub equations: Vec<Equation>,
}

impl EquationSet {
    pub fn all_zero(&self) -> bool {
        self.equations.iter().all(|e| e.lhs.is_zero())
    }

    pub fn first_nonzero(&self) -> Option<&Equation> {
        self.equations.iter().find(|e| !e.lhs.is_zero())
    }

    /// JSON export: `{"vars": [...], "equations": ["<expr> = 0", ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut vars = std::collections::BTreeSet::new();
        for eq in &self.equations {
            for a in eq.lhs.free_atoms() {
                vars.insert(crate::expr::render_atom_for(&a, self.m));
            }
        }
        json!({
            "vars": vars.into_iter().collect::<Vec<_>>(),
            "equations": self
                .equations
                .iter()
                .map(|e| format!("{} = 0", e.lhs.render(self.m)))
                .collect::<Vec<_>>(),
        })
    }
}

/// The variational derivatives `deltaL/deltau^alpha = sum_{|I| <= l+1}
/// (-1)^{|I|} D_I (dL/du^alpha_I)`, one per fiber component, on the
/// order-`(2l+2)` jet space.
pub fn variational_derivative(p: &LagrangianProblem) -> Result<Vec<Expr>> {
    let ctx = p.ctx();
    let mut out = Vec::with_capacity(p.m as usize);
    for alpha in 1..=p.m {
        let mut acc = Expr::zero();
        for index in MultiIndex::enumerate(p.n, p.order) {
            let d = p.lagrangian.partial(&VarId::Jet(alpha, index.clone()));
            if d.is_zero() {
                continue;
            }
            let term = jetcalc::total_derivative_multi(&d, &index, &ctx)?;
            acc = if index.order() % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        out.push(acc);
    }
    Ok(out)
}

/// Euler-Lagrange equations as a labeled system.
pub fn euler_lagrange(p: &LagrangianProblem) -> Result<EquationSet> {
    let vd = variational_derivative(p)?;
    let equations = vd
        .into_iter()
        .enumerate()
        .map(|(a, lhs)| {
            let alpha = (a + 1) as u8;
            Equation {
                label: format!("EL[{alpha}]"),
                alpha,
                index: MultiIndex::empty(p.n),
                dirs: None,
                lhs,
            }
        })
        .collect();
    Ok(EquationSet { name: "euler-lagrange".into(), m: p.m, equations })
}

/// The top-jet Hessian `|| d^2 L / du^alpha_I du^beta_K ||`,
/// `|I| = |K| = l+1`, in the `top_pairs` order. Symmetric by construction.
pub fn hessian(p: &LagrangianProblem) -> (Vec<(u8, MultiIndex)>, ExprMatrix) {
    let pairs = p.top_pairs();
    let k = pairs.len();
    let mut h = ExprMatrix::zero(k, k);
    for (r, (alpha, i)) in pairs.iter().enumerate() {
        let first = p.lagrangian.partial(&VarId::Jet(*alpha, i.clone()));
        for (c, (beta, kk)) in pairs.iter().enumerate() {
            *h.at_mut(r, c) = first.partial(&VarId::Jet(*beta, kk.clone()));
        }
    }
    (pairs, h)
}

/// Outcome of the hyperregularity test.
#[derive(Clone, Debug)]
pub enum Hyperregularity {
    /// The Hessian determinant is a nonzero constant.
    Yes { det: Expr },
    /// The determinant vanishes identically, or a rational zero was found.
    No { det: Expr, witness: Option<Point> },
    /// Nonconstant determinant with no zero found by sampling.
    Undetermined { det: Expr },
}

impl Hyperregularity {
    pub fn is_yes(&self) -> bool {
        matches!(self, Hyperregularity::Yes { .. })
    }
}

const SAMPLE_SEED: u64 = 42;
const SAMPLE_COUNT: usize = 50;

/// Hyperregularity: invertibility of the top-jet Hessian. Exact when the
/// determinant is constant; otherwise a zero of the determinant is searched
/// at the origin and at seeded random rational points, and found zeros are
/// returned as witnesses.
pub fn is_hyperregular(p: &LagrangianProblem) -> Result<Hyperregularity> {
    let (_, h) = hessian(p);
    let det = h.det()?;
    if det.is_zero() {
        return Ok(Hyperregularity::No { det, witness: None });
    }
    if det.as_constant().is_some() {
        return Ok(Hyperregularity::Yes { det });
    }
    let atoms: Vec<Atom> = det.free_atoms().into_iter().collect();
    // the origin first: degenerate points of physical theories tend to sit there
    let mut candidates: Vec<Point> = Vec::with_capacity(SAMPLE_COUNT + 1);
    let mut origin = Point::new();
    for a in &atoms {
        origin.set_atom(a.clone(), BigRational::from_integer(BigInt::from(0)));
    }
    candidates.push(origin);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..SAMPLE_COUNT {
        let mut pt = Point::new();
        for a in &atoms {
            let num = rng.gen_range(-100i64..=100);
            let den = rng.gen_range(1i64..=20);
            pt.set_atom(a.clone(), BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        candidates.push(pt);
    }
    for pt in candidates {
        match det.eval(&pt) {
            Ok(v) if num::Zero::is_zero(&v) => {
                return Ok(Hyperregularity::No { det, witness: Some(pt) });
            }
            _ => {}
        }
    }
    Ok(Hyperregularity::Undetermined { det })
}

/// The constraint equations cutting out the momentum image: one equation
/// `dL/du^alpha_I - sum_{(J,i): Ji = I} p^{J.i}_alpha = 0` per pair with
/// `|I| = l + 1`.
pub fn constraint_equations(p: &LagrangianProblem) -> EquationSet {
    let mut equations = Vec::new();
    for (alpha, index) in p.top_pairs() {
        let mut lhs = p.lagrangian.partial(&VarId::Jet(alpha, index.clone()));
        for (j, dir) in index.splits() {
            lhs = &lhs - &Expr::momentum(alpha, j, dir);
        }
        equations.push(Equation {
            label: format!("P[{alpha}; {index}]"),
            alpha,
            index,
            dirs: None,
            lhs,
        });
    }
    EquationSet { name: "constraint".into(), m: p.m, equations }
}

/// The equivalent Lagrangian `L + div(rho)`; the divergence of a form on
/// the order-`l` jet space has order at most `l + 1`, so the theory order
/// is unchanged, and so are the Euler-Lagrange expressions and the Hessian.
pub fn add_divergence(p: &LagrangianProblem, rho: &HorizontalForm) -> Result<LagrangianProblem> {
    if rho.n != p.n || rho.m != p.m {
        return Err(Error::DimensionMismatch(
            "divergence form dimensions do not match the problem".into(),
        ));
    }
    if rho.l > p.l() {
        return Err(Error::OrderOverflow { order: rho.l, max: p.l() });
    }
    let div = jetcalc::total_divergence(rho, &p.ctx())?;
    LagrangianProblem::new(p.n, p.m, p.order, &p.lagrangian + &div)
}

/// Seeded random polynomial point evaluation for numeric spot checks.
pub fn random_rational(rng: &mut ChaCha8Rng, num_bound: i64, den_bound: i64) -> BigRational {
    let num = rng.gen_range(-num_bound..=num_bound);
    let den = rng.gen_range(1..=den_bound);
    BigRational::from_i64(num).unwrap() / BigRational::from_i64(den).unwrap()
}
