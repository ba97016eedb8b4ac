//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := primary ('^' '-'? integer)*
//! primary:= integer | '(' expr ')' | variable | '@' name '[' i1,...,ik ']'
//! ```
//!
//! Variables: base coordinates `x1 .. xn`; jets `u[i1,...,ik]` (or
//! `u2[...]` to pick the fiber component, `u[]` for the fiber variable
//! itself); momenta `p[i1,...,ik;i]` (e.g. `p[;2]`, `p[1,1;2]`, `p2[1;1]`);
//! any other identifier is a free parameter. `@f[...]` names an opaque
//! function symbol of the base variables together with a derivative index
//! multiset. Rational literals are written `3/4`.
//!
//! Parsing proceeds in two stages: source text to a plain syntax tree
//! ([`Ast`]), then lowering to the canonical [`Expr`] form. The tree is kept
//! public so tests can evaluate unnormalized expressions independently.

use num::{BigInt, BigRational, ToPrimitive, Zero};

use super::{Atom, Expr, Point, VarId};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

/// Declared dimensions and variable caps for a parse.
#[derive(Clone, Debug)]
pub struct ParseContext {
    pub n: u8,
    pub m: u8,
    /// Highest admissible jet order `|I|` for `u[I]`.
    pub max_jet_order: usize,
    /// Highest admissible momentum order `|I|` for `p[I;i]`; `None` forbids
    /// momentum variables entirely.
    pub max_momentum_order: Option<usize>,
}

impl ParseContext {
    pub fn new(n: u8, m: u8, max_jet_order: usize, max_momentum_order: Option<usize>) -> Self {
        ParseContext { n, m, max_jet_order, max_momentum_order }
    }

    /// Context for a Lagrangian density of the given order: jets up to the
    /// order, no momenta.
    pub fn lagrangian(n: u8, m: u8, order: usize) -> Self {
        ParseContext::new(n, m, order, None)
    }

    /// Context for coefficients on the order-`l` jet space (divergence
    /// forms, ansatz components, section coefficients): no momenta.
    pub fn on_jets(n: u8, m: u8, l: usize) -> Self {
        ParseContext::new(n, m, l, None)
    }

    /// Context for expressions in base variables only (candidate solutions).
    pub fn base_only(n: u8) -> Self {
        ParseContext::new(n, 1, 0, None)
    }

    /// Context admitting momenta up to order `l` (Hamiltonians, equation
    /// re-parsing).
    pub fn with_momenta(n: u8, m: u8, max_jet_order: usize, l: usize) -> Self {
        ParseContext::new(n, m, max_jet_order, Some(l))
    }
}

/// Surface syntax tree, prior to normalization.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Rat(BigRational),
    Var(VarId),
    Opaque { name: String, derivs: MultiIndex },
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Neg(Box<Ast>),
    Pow(Box<Ast>, i64),
}

impl Ast {
    /// Lower to canonical form.
    pub fn lower(&self) -> Result<Expr> {
        Ok(match self {
            Ast::Rat(c) => Expr::from_rational(c.clone()),
            Ast::Var(v) => Expr::var(v.clone()),
            Ast::Opaque { name, derivs } => Expr::opaque_deriv(name, derivs.clone()),
            Ast::Add(a, b) => &a.lower()? + &b.lower()?,
            Ast::Sub(a, b) => &a.lower()? - &b.lower()?,
            Ast::Mul(a, b) => &a.lower()? * &b.lower()?,
            Ast::Div(a, b) => a.lower()?.div(&b.lower()?)?,
            Ast::Neg(a) => -&a.lower()?,
            Ast::Pow(a, e) => a.lower()?.pow_i(*e)?,
        })
    }

    /// Every atom mentioned in the tree (canonicalization may drop some).
    pub fn atoms(&self, out: &mut std::collections::BTreeSet<Atom>) {
        match self {
            Ast::Rat(_) => {}
            Ast::Var(v) => {
                out.insert(Atom::Var(v.clone()));
            }
            Ast::Opaque { name, derivs } => {
                out.insert(Atom::Opaque { name: name.clone(), derivs: derivs.clone() });
            }
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
            Ast::Neg(a) | Ast::Pow(a, _) => a.atoms(out),
        }
    }

    /// Direct tree evaluation, without any normalization. Used as an
    /// independent oracle against evaluation of the canonical form.
    pub fn eval(&self, pt: &Point) -> Result<BigRational> {
        Ok(match self {
            Ast::Rat(c) => c.clone(),
            Ast::Var(v) => pt
                .get(&Atom::Var(v.clone()))
                .cloned()
                .ok_or_else(|| Error::MissingBinding(v.to_string()))?,
            Ast::Opaque { name, derivs } => {
                let a = Atom::Opaque { name: name.clone(), derivs: derivs.clone() };
                pt.get(&a).cloned().ok_or_else(|| Error::MissingBinding(a.to_string()))?
            }
            Ast::Add(a, b) => a.eval(pt)? + b.eval(pt)?,
            Ast::Sub(a, b) => a.eval(pt)? - b.eval(pt)?,
            Ast::Mul(a, b) => a.eval(pt)? * b.eval(pt)?,
            Ast::Div(a, b) => {
                let d = b.eval(pt)?;
                if d.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                a.eval(pt)? / d
            }
            Ast::Neg(a) => -a.eval(pt)?,
            Ast::Pow(a, e) => {
                let base = a.eval(pt)?;
                if *e >= 0 {
                    num::traits::Pow::pow(base, *e as u64)
                } else {
                    if base.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    num::traits::Pow::pow(base, *e)
                }
            }
        })
    }
}

/// Parse source text to canonical form.
pub fn parse(text: &str, ctx: &ParseContext) -> Result<Expr> {
    parse_ast(text, ctx)?.lower()
}

/// Parse source text to the surface tree.
pub fn parse_ast(text: &str, ctx: &ParseContext) -> Result<Ast> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, ctx, end_col: text.chars().count() + 1 };
    let ast = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(p.err_here("unexpected trailing input"));
    }
    Ok(ast)
}

/// Parse text that must denote a single coordinate (used for keyed tables
/// in problem files).
pub fn parse_variable(text: &str, ctx: &ParseContext) -> Result<VarId> {
    match parse_ast(text, ctx)? {
        Ast::Var(v) => Ok(v),
        _ => Err(Error::Invalid(format!("expected a single variable, got `{text}`"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    At,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse { col, msg: format!("bad integer `{lit}`") })?;
                out.push((Tok::Int(v), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            '@' => {
                out.push((Tok::At, col));
                i += 1;
            }
            '[' => {
                out.push((Tok::LBracket, col));
                i += 1;
            }
            ']' => {
                out.push((Tok::RBracket, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            ';' => {
                out.push((Tok::Semi, col));
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            other => {
                return Err(Error::Parse { col, msg: format!("unexpected character `{other}`") });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a ParseContext,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err_here(&self, msg: &str) -> Error {
        Error::Parse { col: self.col(), msg: msg.to_string() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(&format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Ast::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Ast::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Ast::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let mut base = self.primary()?;
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let e = match self.bump() {
                Some(Tok::Int(v)) => v
                    .to_i64()
                    .ok_or_else(|| self.err_here("exponent out of range"))?,
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here("expected integer exponent"));
                }
            };
            base = Ast::Pow(Box::new(base), if neg { -e } else { e });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast> {
        let col = self.col();
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Ast::Rat(BigRational::from_integer(v))),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::At) => {
                let name = match self.bump() {
                    Some(Tok::Ident(s)) => s,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err_here("expected function name after `@`"));
                    }
                };
                self.expect(&Tok::LBracket, "`[` after opaque function name")?;
                let entries = self.index_list_until(&Tok::RBracket)?;
                self.expect(&Tok::RBracket, "`]`")?;
                let derivs = MultiIndex::new(self.ctx.n, &entries)
                    .map_err(|e| Error::Parse { col, msg: e.to_string() })?;
                Ok(Ast::Opaque { name, derivs })
            }
            Some(Tok::Ident(s)) => self.ident(s, col),
            Some(other) => Err(Error::Parse { col, msg: format!("unexpected token `{other:?}`") }),
            None => Err(Error::Parse { col, msg: "unexpected end of input".to_string() }),
        }
    }

    fn ident(&mut self, s: String, col: usize) -> Result<Ast> {
        // base coordinate `x<digits>`
        if let Some(rest) = s.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let i: usize = rest
                    .parse()
                    .map_err(|_| Error::Parse { col, msg: format!("bad base index `{rest}`") })?;
                if i == 0 || i > self.ctx.n as usize {
                    return Err(Error::Parse {
                        col,
                        msg: format!("base index {i} out of range 1..={}", self.ctx.n),
                    });
                }
                return Ok(Ast::Var(VarId::Base(i as u8)));
            }
        }
        // jet `u<alpha>[...]` or momentum `p<alpha>[...;i]`
        for (prefix, is_jet) in [("u", true), ("p", false)] {
            if let Some(rest) = s.strip_prefix(prefix) {
                if rest.is_empty() || rest.bytes().all(|b| b.is_ascii_digit()) {
                    let alpha: usize = if rest.is_empty() {
                        1
                    } else {
                        rest.parse().map_err(|_| Error::Parse {
                            col,
                            msg: format!("bad fiber index `{rest}`"),
                        })?
                    };
                    if alpha == 0 || alpha > self.ctx.m as usize {
                        return Err(Error::Parse {
                            col,
                            msg: format!("fiber index {alpha} out of range 1..={}", self.ctx.m),
                        });
                    }
                    self.expect(&Tok::LBracket, &format!("`[` after `{s}`"))?;
                    return if is_jet {
                        self.jet_var(alpha as u8, col)
                    } else {
                        self.momentum_var(alpha as u8, col)
                    };
                }
            }
        }
        Ok(Ast::Var(VarId::Param(s)))
    }

    fn jet_var(&mut self, alpha: u8, col: usize) -> Result<Ast> {
        let entries = self.index_list_until(&Tok::RBracket)?;
        self.expect(&Tok::RBracket, "`,` or `]`")?;
        if entries.len() > self.ctx.max_jet_order {
            return Err(Error::Parse {
                col,
                msg: format!(
                    "jet order {} exceeds declared maximum {}",
                    entries.len(),
                    self.ctx.max_jet_order
                ),
            });
        }
        let index = MultiIndex::new(self.ctx.n, &entries)
            .map_err(|e| Error::Parse { col, msg: e.to_string() })?;
        Ok(Ast::Var(VarId::Jet(alpha, index)))
    }

    fn momentum_var(&mut self, alpha: u8, col: usize) -> Result<Ast> {
        let Some(max_mom) = self.ctx.max_momentum_order else {
            return Err(Error::Parse {
                col,
                msg: "momentum variables are not allowed in this context".to_string(),
            });
        };
        let entries = self.index_list_until(&Tok::Semi)?;
        self.expect(&Tok::Semi, "`;`")?;
        let dir = match self.bump() {
            Some(Tok::Int(v)) => v.to_u64().unwrap_or(0),
            _ => {
                self.pos -= 1;
                return Err(self.err_here("expected direction index"));
            }
        };
        self.expect(&Tok::RBracket, "`]`")?;
        if dir == 0 || dir > self.ctx.n as u64 {
            return Err(Error::Parse {
                col,
                msg: format!("direction index {dir} out of range 1..={}", self.ctx.n),
            });
        }
        if entries.len() > max_mom {
            return Err(Error::Parse {
                col,
                msg: format!(
                    "momentum order {} exceeds declared maximum {max_mom}",
                    entries.len()
                ),
            });
        }
        let index = MultiIndex::new(self.ctx.n, &entries)
            .map_err(|e| Error::Parse { col, msg: e.to_string() })?;
        Ok(Ast::Var(VarId::Momentum(alpha, index, dir as u8)))
    }

    /// Comma-separated index list; stops (without consuming) at `stop`.
    fn index_list_until(&mut self, stop: &Tok) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        if self.peek() == Some(stop) {
            return Ok(out);
        }
        loop {
            let col = self.col();
            match self.bump() {
                Some(Tok::Int(v)) => {
                    let i = v.to_u64().unwrap_or(0);
                    if i == 0 || i > self.ctx.n as u64 {
                        return Err(Error::Parse {
                            col,
                            msg: format!("index {i} out of range 1..={}", self.ctx.n),
                        });
                    }
                    out.push(i as u8);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.err_here("expected index"));
                }
            }
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                continue;
            }
            return Ok(out);
        }
    }
}
