//! Expanded multivariate polynomials over expression atoms.
//!
//! The canonical form is a sorted map monomial -> nonzero rational
//! coefficient. Monomials are ordered by total degree, then by their
//! sorted atom/exponent sequence, which makes printing and matrix layouts
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigRational, One, Signed, Zero};

use super::Atom;
use crate::error::Result;

/// A power product of atoms; exponents are >= 1 and atoms are sorted.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monomial(pub Vec<(Atom, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|(_, e)| u64::from(*e)).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out: Vec<(Atom, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Exact monomial quotient, if `other` divides `self`.
    pub fn div(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::new();
        let mut j = 0;
        for (a, e) in &self.0 {
            let mut e = *e;
            if j < other.0.len() && other.0[j].0 == *a {
                if other.0[j].1 > e {
                    return None;
                }
                e -= other.0[j].1;
                j += 1;
            }
            if e > 0 {
                out.push((a.clone(), e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn exponent_of(&self, a: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(b, _)| b == a)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order: total degree first, then the exponent
    /// vectors compared along ascending atoms (earlier atoms more
    /// significant). This is a proper monomial order, so leading terms are
    /// multiplicative and exact division by leading-term elimination is
    /// complete.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                // a positive exponent on an atom the other side lacks
                // makes this monomial lexicographically greater
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, e)), Some((b, f))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match e.cmp(f) {
                            Ordering::Equal => {}
                            o => return o,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        Poly { terms }
    }

    pub fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::atom(a), BigRational::one());
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(c) if the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.0.is_empty() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> u64 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn insert_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Leading (greatest) term in the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Exact polynomial division: Some(q) with `self = q * d`, if it exists.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (dlm, dlc) = d.leading()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rlm, rlc)) = rem.leading() {
            let qm = rlm.div(dlm)?;
            let qc = rlc / dlc;
            let mut t = Poly::zero();
            t.insert_term(qm, qc);
            rem = &rem - &(&t * d);
            quot = &quot + &t;
        }
        Some(quot)
    }

    /// Formal partial derivative with respect to a single atom (all atoms
    /// treated as independent).
    pub fn formal_partial(&self, a: &Atom) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent_of(a);
            if e == 0 {
                continue;
            }
            let mut factors: Vec<(Atom, u32)> = Vec::with_capacity(m.0.len());
            for (b, k) in &m.0 {
                if b == a {
                    if *k > 1 {
                        factors.push((b.clone(), k - 1));
                    }
                } else {
                    factors.push((b.clone(), *k));
                }
            }
            out.insert_term(Monomial(factors), c * BigRational::from_integer(e.into()));
        }
        out
    }

    pub fn atoms(&self, out: &mut BTreeSet<Atom>) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                out.insert(a.clone());
            }
        }
    }

    pub fn eval(&self, lookup: &impl Fn(&Atom) -> Result<BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (a, e) in &m.0 {
                let v = lookup(a)?;
                for _ in 0..*e {
                    term *= &v;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Make the leading coefficient 1; returns the scaling factor applied.
    pub fn monic(&mut self) -> BigRational {
        if let Some((_, c)) = self.leading() {
            let c = c.clone();
            let inv = BigRational::one() / &c;
            *self = self.scale(&inv);
            inv
        } else {
            BigRational::one()
        }
    }

    /// Greatest common monomial divisor of all terms.
    pub fn content_monomial(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            Some(m) => m.clone(),
            None => return Monomial::unit(),
        };
        iter.fold(first, |acc, m| {
            Monomial(
                acc.0
                    .iter()
                    .filter_map(|(a, e)| {
                        let other = m.exponent_of(a);
                        let k = (*e).min(other);
                        (k > 0).then(|| (a.clone(), k))
                    })
                    .collect(),
            )
        })
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        if m.0.is_empty() {
            return self.clone();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.div(m).expect("content divides every term"), c.clone()))
                .collect(),
        }
    }

    pub fn abs_is_negative_leading(&self) -> bool {
        self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}
