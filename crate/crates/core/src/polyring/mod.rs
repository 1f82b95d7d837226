//! Sparse polynomials over Q, Pfaffians and Groebner machinery.

mod groebner;
mod ideal;
mod order;
mod parse;
mod pfaffian;

pub use groebner::{groebner_basis, Budget, DEFAULT_BUDGET};
pub use ideal::Ideal;
pub use order::MonomialOrder;
pub use pfaffian::{pfaffian4, pfaffian_degrees, pfaffians5, DegreeMatrix, GradedSkewMatrix};

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// Ordered variable names.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    names: Vec<String>,
}

impl Ring {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<Ring> {
        Arc::new(Ring { names: names.iter().map(|s| s.as_ref().to_string()).collect() })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn var(self: &Arc<Self>, name: &str) -> Result<Polynomial> {
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::Invalid(format!("unknown variable {name}")))?;
        Ok(Polynomial::var(self, i))
    }

    pub fn parse(self: &Arc<Self>, s: &str) -> Result<Polynomial> {
        parse::parse(self, s)
    }
}

pub type Exponent = Vec<u32>;

/// Result of a weighted degree query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Homogeneous(i64),
    Nonhomogeneous,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    ring: Arc<Ring>,
    terms: BTreeMap<Exponent, Rational>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl Polynomial {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Polynomial { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: Rational) -> Self {
        Self::monomial(ring, vec![0; ring.nvars()], c)
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn var(ring: &Arc<Ring>, i: usize) -> Self {
        let mut e = vec![0; ring.nvars()];
        e[i] = 1;
        Self::monomial(ring, e, Rational::one())
    }

    pub fn monomial(ring: &Arc<Ring>, exps: Exponent, c: Rational) -> Self {
        assert_eq!(exps.len(), ring.nvars(), "exponent arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { ring: ring.clone(), terms }
    }

    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Self {
        let mut p = Self::zero(ring);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        assert_eq!(e.len(), self.ring.nvars(), "exponent arity");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&vec![0; self.ring.nvars()]).cloned(),
            _ => None,
        }
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one(&self.ring);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    pub fn weighted_degree(&self, weights: &[i64]) -> Result<Degree> {
        if weights.len() != self.ring.nvars() {
            return invalid("weights length differs from ring arity");
        }
        let mut degs = self.terms.keys().map(|e| dot(e, weights));
        let first = degs.next().ok_or(Error::ZeroPolynomial)?;
        if degs.all(|d| d == first) {
            Ok(Degree::Homogeneous(first))
        } else {
            Ok(Degree::Nonhomogeneous)
        }
    }

    /// Degree for each row of a multi-grading, or `None` when not multi-homogeneous.
    pub fn multidegree(&self, rows: &[Vec<i64>]) -> Result<Option<Vec<i64>>> {
        let mut out = Vec::new();
        for r in rows {
            match self.weighted_degree(r)? {
                Degree::Homogeneous(d) => out.push(d),
                Degree::Nonhomogeneous => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// Maximum total degree for the given weights.
    pub fn max_degree(&self, weights: &[i64]) -> Option<i64> {
        self.terms.keys().map(|e| dot(e, weights)).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn uses(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    pub fn variables(&self) -> Vec<usize> {
        (0..self.ring.nvars()).filter(|&i| self.uses(i)).collect()
    }

    /// Replaces variable `var` by `value`.
    pub fn substitute(&self, var: usize, value: &Polynomial) -> Self {
        let mut powers: Vec<Polynomial> = vec![Self::one(&self.ring)];
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let k = e[var] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            let mut rest = e.clone();
            rest[var] = 0;
            let m = Self::monomial(&self.ring, rest, c.clone());
            out = &out + &(&m * &powers[k]);
        }
        out
    }

    pub fn substitute_value(&self, var: usize, value: &Rational) -> Self {
        self.substitute(var, &Self::constant(&self.ring, value.clone()))
    }

    /// Substitutes by name; unknown names are an error.
    pub fn substitute_values(&self, values: &[(&str, Rational)]) -> Result<Self> {
        let mut p = self.clone();
        for (name, v) in values {
            let i = self
                .ring
                .index_of(name)
                .ok_or_else(|| Error::Invalid(format!("unknown variable {name}")))?;
            p = p.substitute_value(i, v);
        }
        Ok(p)
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &point[i];
                }
            }
            s += t;
        }
        s
    }

    /// Moves the polynomial into another ring; `map[i]` is the new index of variable i.
    pub fn map_ring(&self, ring: &Arc<Ring>, map: &[Option<usize>]) -> Result<Self> {
        let mut p = Self::zero(ring);
        for (e, c) in &self.terms {
            let mut ne = vec![0; ring.nvars()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => ne[j] += k,
                    None => {
                        return invalid(format!(
                            "variable {} has no image in target ring",
                            self.ring.names[i]
                        ))
                    }
                }
            }
            p.add_term(ne, c.clone());
        }
        Ok(p)
    }

    /// Moves the polynomial into a ring matching variables by name.
    pub fn to_ring(&self, ring: &Arc<Ring>) -> Result<Self> {
        let map: Vec<Option<usize>> = self.ring.names.iter().map(|n| ring.index_of(n)).collect();
        self.map_ring(ring, &map)
    }

    /// The largest monomial dividing every term.
    pub fn monomial_content(&self) -> Exponent {
        let n = self.ring.nvars();
        let mut g: Option<Exponent> = None;
        for e in self.terms.keys() {
            g = Some(match g {
                None => e.clone(),
                Some(g) => (0..n).map(|i| g[i].min(e[i])).collect(),
            });
        }
        g.unwrap_or_else(|| vec![0; n])
    }

    pub fn divide_monomial(&self, m: &[u32]) -> Option<Self> {
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            for i in 0..ne.len() {
                ne[i] = ne[i].checked_sub(m[i])?;
            }
            out.add_term(ne, c.clone());
        }
        Some(out)
    }

    /// Leading term for the order, if nonzero.
    pub fn leading(&self, order: &MonomialOrder) -> Option<(&Exponent, &Rational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self, order: &MonomialOrder) -> Self {
        match self.leading(order) {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    fn check_ring(&self, o: &Polynomial) {
        assert!(
            Arc::ptr_eq(&self.ring, &o.ring) || self.ring == o.ring,
            "polynomials live in different rings"
        );
    }
}

pub(crate) fn dot(e: &[u32], w: &[i64]) -> i64 {
    e.iter().zip(w).map(|(&k, &wi)| k as i64 * wi).sum()
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        self.check_ring(o);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self.check_ring(o);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), -c.clone());
        }
        r
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&int(-1))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        self.check_ring(o);
        let mut r = Polynomial::zero(&self.ring);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial { (&self).$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // descending total degree, then descending lex
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (k, (e, c)) in ts.into_iter().enumerate() {
            let mut mono = Vec::new();
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => mono.push(self.ring.names[i].clone()),
                    _ => mono.push(format!("{}^{}", self.ring.names[i], p)),
                }
            }
            let neg = *c < Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            let body = if mono.is_empty() {
                abs.to_string()
            } else if abs.is_one() {
                mono.join("*")
            } else {
                format!("{}*{}", abs, mono.join("*"))
            };
            match (k, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        let r = Ring::new(&["xi", "x1", "y1"]);
        let w = [2, 4, 3];
        assert_eq!(r.parse("x1^2").unwrap().weighted_degree(&w), Ok(Degree::Homogeneous(8)));
        assert_eq!(r.parse("xi^3*y1").unwrap().weighted_degree(&w), Ok(Degree::Homogeneous(9)));
        assert_eq!(r.parse("xi + x1").unwrap().weighted_degree(&w), Ok(Degree::Nonhomogeneous));
        assert_eq!(Polynomial::zero(&r).weighted_degree(&w), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn arithmetic_and_substitution() {
        let r = Ring::new(&["x", "y"]);
        let p = r.parse("x^2 - 2*x*y + y^2").unwrap();
        let q = r.parse("x - y").unwrap();
        assert_eq!(&q * &q, p);
        let s = p.substitute(0, &r.parse("y + 1").unwrap());
        assert_eq!(s, r.parse("1").unwrap());
        assert_eq!(p.to_string(), "x^2 - 2*x*y + y^2");
    }
}
