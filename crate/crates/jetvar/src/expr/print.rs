//! Deterministic ASCII rendering of expressions.
//!
//! The printer emits the same grammar the parser accepts, so
//! `parse(print(e)) == e` for every canonical-form expression. Terms are
//! printed in the canonical monomial order (degree, then atom sequence),
//! which keeps golden-file output stable.

use num::{BigRational, One, Signed};

use super::poly::Poly;
use super::{Atom, Expr, VarId};

pub(super) fn render_atom(a: &Atom, elide_alpha: bool) -> String {
    match a {
        Atom::Var(VarId::Base(i)) => format!("x{i}"),
        Atom::Var(VarId::Jet(alpha, index)) => {
            if elide_alpha {
                format!("u{}", index_list(index.entries()))
            } else {
                format!("u{alpha}{}", index_list(index.entries()))
            }
        }
        Atom::Var(VarId::Momentum(alpha, index, dir)) => {
            let body: String = index
                .entries()
                .iter()
                .map(u8::to_string)
                .collect::<Vec<_>>()
                .join(",");
            if elide_alpha {
                format!("p[{body};{dir}]")
            } else {
                format!("p{alpha}[{body};{dir}]")
            }
        }
        Atom::Var(VarId::Param(name)) => name.clone(),
        Atom::Opaque { name, derivs } => format!("@{name}{}", index_list(derivs.entries())),
    }
}

fn index_list(entries: &[u8]) -> String {
    let body: String = entries.iter().map(u8::to_string).collect::<Vec<_>>().join(",");
    format!("[{body}]")
}

fn render_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn render_poly(p: &Poly, elide_alpha: bool) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    // leading terms first
    for (k, (mono, coeff)) in p.terms.iter().rev().enumerate() {
        let mag = coeff.abs();
        if k == 0 {
            if coeff.is_negative() {
                out.push('-');
            }
        } else if coeff.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut factors: Vec<String> = Vec::new();
        if !mag.is_one() || mono.0.is_empty() {
            factors.push(render_rational(&mag));
        }
        for (a, e) in &mono.0 {
            let v = render_atom(a, elide_alpha);
            if *e == 1 {
                factors.push(v);
            } else {
                factors.push(format!("{v}^{e}"));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

pub(super) fn render_expr(e: &Expr, elide_alpha: bool) -> String {
    if e.is_polynomial() {
        render_poly(e.numerator(), elide_alpha)
    } else {
        format!(
            "({})/({})",
            render_poly(e.numerator(), elide_alpha),
            render_poly(e.denominator(), elide_alpha)
        )
    }
}
