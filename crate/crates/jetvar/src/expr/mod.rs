//! Immutable symbolic expressions with exact rational coefficients.
//!
//! An [`Expr`] is kept in a canonical normal form at all times: a quotient
//! `num / den` of expanded multivariate polynomials over [`Atom`]s, with
//! `den = 1` for polynomial expressions. Building an expression through any
//! of the arithmetic operations re-normalizes, so normalization is
//! idempotent by construction and structural comparison of polynomial
//! expressions coincides with mathematical equality. Quotients are compared
//! by cross-multiplication, which stays exact without polynomial gcd.
//!
//! Atoms are the jet-space coordinates (base variables `x^i`, jet variables
//! `u^alpha_I`, momenta `p^{I.i}_alpha`), free symbolic parameters, and
//! opaque function symbols `f(x)` of the base variables only. Differentiating
//! an opaque symbol produces a fresh derivative symbol with a sorted index
//! multiset, so symmetry of mixed derivatives holds structurally.

mod parse;
mod poly;
mod print;

pub use parse::{parse, parse_ast, parse_variable, Ast, ParseContext};
pub use poly::{Monomial, Poly};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

/// A named coordinate of the jet/momentum picture.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum VarId {
    /// Base coordinate `x^i`, `1 <= i <= n`.
    Base(u8),
    /// Jet coordinate `u^alpha_I`.
    Jet(u8, MultiIndex),
    /// Momentum coordinate `p^{I.i}_alpha`.
    Momentum(u8, MultiIndex, u8),
    /// Free symbolic constant.
    Param(String),
}

impl VarId {
    fn rank(&self) -> u8 {
        match self {
            VarId::Base(_) => 0,
            VarId::Jet(..) => 1,
            VarId::Momentum(..) => 2,
            VarId::Param(_) => 3,
        }
    }
}

impl PartialOrd for VarId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VarId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (VarId::Base(a), VarId::Base(b)) => a.cmp(b),
            (VarId::Jet(a, i), VarId::Jet(b, j)) => a.cmp(b).then_with(|| i.cmp(j)),
            (VarId::Momentum(a, i, d), VarId::Momentum(b, j, e)) => {
                a.cmp(b).then_with(|| i.cmp(j)).then_with(|| d.cmp(e))
            }
            (VarId::Param(a), VarId::Param(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()).then(Ordering::Equal),
        }
    }
}

/// A multiplicative atom of the polynomial normal form: either a coordinate
/// or an opaque function symbol `f,_I(x)` with a canonical (sorted)
/// derivative multiset.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    Var(VarId),
    Opaque { name: String, derivs: MultiIndex },
}

impl Atom {
    fn rank(&self) -> u8 {
        match self {
            Atom::Var(v) => v.rank(),
            Atom::Opaque { .. } => 4,
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Atom::Var(a), Atom::Var(b)) => a.cmp(b),
            (
                Atom::Opaque { name: a, derivs: i },
                Atom::Opaque { name: b, derivs: j },
            ) => a.cmp(b).then_with(|| i.cmp(j)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render_atom(self, false))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render_atom(&Atom::Var(self.clone()), false))
    }
}

/// Canonical-form symbolic expression. See the module docs.
#[derive(Clone, Eq, Debug)]
pub struct Expr {
    num: Poly,
    den: Poly,
}

impl PartialEq for Expr {
    /// Semantic equality: cross-multiplied polynomial identity.
    fn eq(&self, other: &Self) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Expr {
    fn from_parts(num: Poly, den: Poly) -> Result<Expr> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Expr { num, den: Poly::one() });
        }
        if let Some(c) = den.as_constant() {
            let inv = BigRational::one() / c;
            return Ok(Expr { num: num.scale(&inv), den: Poly::one() });
        }
        // strip the common monomial content first; it often unblocks the
        // exact-division shortcut below
        let cn = num.content_monomial();
        let cd = den.content_monomial();
        let common = Monomial(
            cn.0.iter()
                .filter_map(|(a, e)| {
                    let k = (*e).min(cd.exponent_of(a));
                    (k > 0).then(|| (a.clone(), k))
                })
                .collect(),
        );
        let mut num = num.div_monomial(&common);
        let mut den = den.div_monomial(&common);
        if let Some(c) = den.as_constant() {
            let inv = BigRational::one() / c;
            return Ok(Expr { num: num.scale(&inv), den: Poly::one() });
        }
        if let Some(q) = num.exact_div(&den) {
            return Ok(Expr { num: q, den: Poly::one() });
        }
        if let Some(q) = den.exact_div(&num) {
            let mut q = q;
            let s = q.monic();
            return Ok(Expr { num: Poly::constant(s), den: q });
        }
        let s = den.monic();
        num = num.scale(&s);
        Ok(Expr { num, den })
    }

    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Expr {
        Expr { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(k: i64) -> Expr {
        Expr::from_rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        assert!(den != 0, "rational literal with zero denominator");
        Expr::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(c: BigRational) -> Expr {
        Expr { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn var(v: VarId) -> Expr {
        Expr::atom(Atom::Var(v))
    }

    pub fn base(i: u8) -> Expr {
        Expr::var(VarId::Base(i))
    }

    pub fn jet(alpha: u8, index: MultiIndex) -> Expr {
        Expr::var(VarId::Jet(alpha, index))
    }

    pub fn momentum(alpha: u8, index: MultiIndex, dir: u8) -> Expr {
        Expr::var(VarId::Momentum(alpha, index, dir))
    }

    pub fn param(name: &str) -> Expr {
        Expr::var(VarId::Param(name.to_string()))
    }

    /// Opaque function symbol `name(x)` on an `n`-dimensional base.
    pub fn opaque(name: &str, n: u8) -> Expr {
        Expr::atom(Atom::Opaque { name: name.to_string(), derivs: MultiIndex::empty(n) })
    }

    /// Derivative symbol `name,_I(x)`.
    pub fn opaque_deriv(name: &str, derivs: MultiIndex) -> Expr {
        Expr::atom(Atom::Opaque { name: name.to_string(), derivs })
    }

    pub fn atom(a: Atom) -> Expr {
        Expr { num: Poly::atom(a), den: Poly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().is_some()
    }

    /// Some(c) when the expression is the constant `c`.
    pub fn as_constant(&self) -> Option<BigRational> {
        if !self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            return None;
        }
        self.num.as_constant()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn pow(&self, e: u32) -> Expr {
        Expr { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn pow_i(&self, e: i64) -> Result<Expr> {
        if e >= 0 {
            Ok(self.pow(u32::try_from(e).map_err(|_| Error::Invalid("exponent too large".into()))?))
        } else {
            let p = self.pow(
                u32::try_from(-e).map_err(|_| Error::Invalid("exponent too large".into()))?,
            );
            Expr::from_parts(p.den, p.num)
        }
    }

    pub fn div(&self, other: &Expr) -> Result<Expr> {
        Expr::from_parts(&self.num * &other.den, &self.den * &other.num)
    }

    /// Exact structural/semantic equality test. For this canonical
    /// representation, equality of rational functions is decidable by
    /// cross-multiplication; no sampling is involved.
    pub fn equals(&self, other: &Expr) -> bool {
        self == other
    }

    /// Formal partial derivative treating every atom as independent.
    pub fn formal_partial_atom(&self, a: &Atom) -> Expr {
        let dn = self.num.formal_partial(a);
        if self.is_polynomial() {
            return Expr { num: dn, den: Poly::one() };
        }
        let dd = self.den.formal_partial(a);
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        let den = &self.den * &self.den;
        Expr::from_parts(num, den).expect("denominator square is nonzero")
    }

    /// Partial derivative with respect to a coordinate. Differentiating by a
    /// base variable also applies the chain rule to opaque function symbols,
    /// which depend on the base variables.
    ///
    /// Panics if an opaque symbol's base dimension does not admit the
    /// requested direction (a dimension mismatch between contexts).
    pub fn partial(&self, v: &VarId) -> Expr {
        let mut out = self.formal_partial_atom(&Atom::Var(v.clone()));
        if let VarId::Base(i) = v {
            for a in self.free_atoms() {
                if let Atom::Opaque { name, derivs } = &a {
                    let fp = self.formal_partial_atom(&a);
                    if fp.is_zero() {
                        continue;
                    }
                    let next = derivs
                        .concat(*i)
                        .unwrap_or_else(|_| panic!("direction {i} exceeds base dimension of {a}"));
                    out = &out + &(&fp * &Expr::opaque_deriv(name, next));
                }
            }
        }
        out
    }

    /// Simultaneous substitution of coordinates by expressions.
    pub fn substitute(&self, bindings: &BTreeMap<VarId, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let atom_map: BTreeMap<Atom, Expr> = bindings
            .iter()
            .map(|(v, e)| (Atom::Var(v.clone()), e.clone()))
            .collect();
        self.substitute_atoms(&atom_map)
    }

    /// Simultaneous substitution at the atom level (also reaches opaque
    /// function symbols).
    pub fn substitute_atoms(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
        let num = subst_poly(&self.num, bindings)?;
        if self.is_polynomial() {
            return Ok(num);
        }
        let den = subst_poly(&self.den, bindings)?;
        num.div(&den)
    }

    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.num.atoms(&mut out);
        self.den.atoms(&mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        self.free_atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Var(v) => Some(v),
                Atom::Opaque { .. } => None,
            })
            .collect()
    }

    /// Highest jet order occurring in the expression (0 if no jets).
    pub fn max_jet_order(&self) -> usize {
        self.free_atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Var(VarId::Jet(_, i)) => Some(i.order()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn contains_momentum(&self) -> bool {
        self.free_atoms()
            .iter()
            .any(|a| matches!(a, Atom::Var(VarId::Momentum(..))))
    }

    pub fn max_momentum_order(&self) -> Option<usize> {
        self.free_atoms()
            .iter()
            .filter_map(|a| match a {
                Atom::Var(VarId::Momentum(_, i, _)) => Some(i.order()),
                _ => None,
            })
            .max()
    }

    pub fn contains_opaque(&self) -> bool {
        self.free_atoms().iter().any(|a| matches!(a, Atom::Opaque { .. }))
    }

    /// Exact evaluation at a rational point. Every free atom must be bound.
    pub fn eval(&self, pt: &Point) -> Result<BigRational> {
        let lookup = |a: &Atom| {
            pt.get(a)
                .cloned()
                .ok_or_else(|| Error::MissingBinding(a.to_string()))
        };
        let n = self.num.eval(&lookup)?;
        if self.is_polynomial() {
            return Ok(n);
        }
        let d = self.den.eval(&lookup)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(n / d)
    }

    pub fn eval_f64(&self, pt: &Point) -> Result<f64> {
        self.eval(pt)?
            .to_f64()
            .ok_or_else(|| Error::Invalid("value not representable as f64".into()))
    }

    /// Rewrite opaque derivative symbols of `name` modulo the linear
    /// relation `sum_{i,j} name,_{K i i j j} = 0` (the bilaplacian of the
    /// symbol and all its derivatives vanish). Any symbol whose index
    /// multiset contains the top direction four times is eliminated in
    /// favor of lower symbols; the result is a linear normal form.
    pub fn assume_biharmonic(&self, name: &str) -> Expr {
        let mut cur = self.clone();
        loop {
            let target = cur.free_atoms().into_iter().find(|a| match a {
                Atom::Opaque { name: f, derivs } => {
                    f == name && derivs.count(derivs.n()) >= 4
                }
                _ => false,
            });
            let Some(atom) = target else {
                return cur;
            };
            let Atom::Opaque { derivs, .. } = &atom else { unreachable!() };
            let n = derivs.n();
            let top4 = MultiIndex::new(n, &[n, n, n, n]).unwrap();
            let k = derivs.minus(&top4).unwrap();
            let mut repl = Expr::zero();
            for i in 1..=n {
                for j in 1..=n {
                    if i == n && j == n {
                        continue;
                    }
                    let idx = k.plus(&MultiIndex::new(n, &[i, i, j, j]).unwrap());
                    repl = &repl - &Expr::opaque_deriv(name, idx);
                }
            }
            let mut map = BTreeMap::new();
            map.insert(atom, repl);
            cur = cur
                .substitute_atoms(&map)
                .expect("linear rewrite cannot introduce a zero denominator");
        }
    }

    /// Deterministic rendering; `m` selects whether fiber indices are
    /// printed (`u1[..]`) or elided (`u[..]`, single-field theories).
    pub fn render(&self, m: u8) -> String {
        print::render_expr(self, m == 1)
    }
}

/// Render a single atom the way [`Expr::render`] would.
pub fn render_atom_for(a: &Atom, m: u8) -> String {
    print::render_atom(a, m == 1)
}

fn subst_poly(p: &Poly, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
    let mut acc = Expr::zero();
    for (mono, c) in &p.terms {
        let mut term = Expr::from_rational(c.clone());
        for (a, e) in &mono.0 {
            let base = match bindings.get(a) {
                Some(b) => b.clone(),
                None => Expr::atom(a.clone()),
            };
            term = &term * &base.pow(*e);
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            return Expr::from_parts(num, self.den.clone()).expect("denominator unchanged");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        Expr::from_parts(num, den).expect("product of nonzero denominators")
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::from_parts(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product of nonzero denominators")
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render_expr(self, false))
    }
}

/// A total assignment of rational values to atoms, for exact evaluation.
#[derive(Clone, Debug, Default)]
pub struct Point {
    vals: BTreeMap<Atom, BigRational>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn set(&mut self, v: VarId, val: BigRational) -> &mut Self {
        self.vals.insert(Atom::Var(v), val);
        self
    }

    pub fn set_atom(&mut self, a: Atom, val: BigRational) -> &mut Self {
        self.vals.insert(a, val);
        self
    }

    pub fn set_int(&mut self, v: VarId, val: i64) -> &mut Self {
        self.set(v, BigRational::from_integer(BigInt::from(val)))
    }

    pub fn get(&self, a: &Atom) -> Option<&BigRational> {
        self.vals.get(a)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.vals.keys()
    }
}
