//! Sparse multivariate polynomials and rational functions over ℚ.
//!
//! Variables are positional (`x0, x1, ...`); charts attach display names.
//! Terms are kept in a `BTreeMap` under graded-lexicographic order, so the
//! leading term is the last entry and serialization is deterministic.

mod factor;
mod gcd;
mod json;
mod ratfunc;
mod univariate;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use factor::factor_lite;
pub use gcd::{content_in, gcd, primitive_part_in};
pub use json::{parse_rational, point_serde, points_serde, q_serde, PolyJson, QJson, RatFuncJson};
pub use ratfunc::RatFunc;
pub use univariate::UniPoly;

/// Exact rational scalar.
pub type Q = BigRational;

/// Shorthand for building an integer-valued [`Q`].
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `num/den`.
pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division by the zero function")]
    DivisionByZeroFunction,
    #[error("polynomial is not divisible by the given divisor")]
    NotDivisible,
    #[error("substitution collapses the denominator to zero")]
    DenominatorCollapse,
    #[error("pole at point {0:?}")]
    PoleAtPoint(Vec<String>),
    #[error("indeterminate form 0/0 at point {0:?}")]
    IndeterminateAtPoint(Vec<String>),
    #[error("variable count mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("malformed polynomial data: {0}")]
    Malformed(String),
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when every exponent allows it.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Monomial)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree().cmp(&other.total_degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `nvars` variables with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

/// Compares leading terms first; used only to make outputs deterministic.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nvars.cmp(&other.nvars).then_with(|| self.terms.iter().rev().cmp(other.terms.iter().rev()))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Monomial(e), Q::one())
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let nvars = m.0.len();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated monomials and dropping zero coefficients.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Q, Vec<u32>)>,
    {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(PolyError::ArityMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    /// Integer-coefficient convenience constructor used heavily in tests.
    pub fn from_int_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        Self::from_terms(nvars, terms.iter().map(|(c, e)| (q(*c), e.to_vec()))).expect("exponent vectors must match nvars")
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    /// The value of a constant polynomial (zero included).
    pub fn constant_value(&self) -> Option<Q> {
        if self.is_zero() {
            Some(Q::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::one(self.nvars)).cloned().unwrap_or_else(Q::zero)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    /// Smallest total degree of a term (the order of vanishing at the origin).
    pub fn min_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).min().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    pub fn involves(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.0[v] > 0)
    }

    /// Highest-index variable that occurs, if any.
    pub fn main_var(&self) -> Option<usize> {
        (0..self.nvars).rev().find(|&v| self.involves(v))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one(self.nvars);
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

    /// Scales so the leading coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.nvars, "point arity");
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[v] -= 1;
                out.add_term(m2, c * Q::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Coefficients with respect to `v`: entry `k` multiplies `x_v^k`.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(self.nvars); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let k = m.0[v] as usize;
            let mut m2 = m.clone();
            m2.0[v] = 0;
            out[k].add_term(m2, c.clone());
        }
        out
    }

    /// Leading coefficient with respect to `v` (a polynomial free of `v`).
    pub fn lc_in(&self, v: usize) -> Poly {
        let d = self.degree_in(v);
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.0[v] == d {
                let mut m2 = m.clone();
                m2.0[v] = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    /// Multiplies by `x_v^k`.
    pub fn shift(&self, v: usize, k: u32) -> Poly {
        let mut m = Monomial::one(self.nvars);
        m.0[v] = k;
        self.mul_monomial(&m, &Q::one())
    }

    /// Multivariate division by a single divisor under graded-lex order.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly), PolyError> {
        let (lm, lc) = d.leading().ok_or(PolyError::DivisionByZeroFunction)?;
        let (lm, lc_inv) = (lm.clone(), lc.recip());
        let mut quot = Poly::zero(self.nvars);
        let mut rem = Poly::zero(self.nvars);
        let mut p = self.clone();
        while let Some((m, c)) = p.leading().map(|(m, c)| (m.clone(), c.clone())) {
            match m.div(&lm) {
                Some(t) => {
                    let k = &c * &lc_inv;
                    p = &p - &d.mul_monomial(&t, &k);
                    quot.add_term(t, k);
                }
                None => {
                    p.terms.remove(&m);
                    rem.add_term(m, c);
                }
            }
        }
        Ok((quot, rem))
    }

    /// `self / d` when the division is exact.
    pub fn divide_exact(&self, d: &Poly) -> Result<Poly, PolyError> {
        if d.is_zero() {
            return Err(PolyError::DivisionByZeroFunction);
        }
        if let Some(c) = d.constant_value() {
            return Ok(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading().expect("nonzero");
        let (lm, lc_inv) = (lm.clone(), lc.recip());
        let mut quot = Poly::zero(self.nvars);
        let mut p = self.clone();
        while let Some((m, c)) = p.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let t = m.div(&lm).ok_or(PolyError::NotDivisible)?;
            let k = &c * &lc_inv;
            p = &p - &d.mul_monomial(&t, &k);
            quot.add_term(t, k);
        }
        Ok(quot)
    }

    /// Largest `k` with `f^k | self`, together with the cofactor.
    pub fn strip_factor(&self, f: &Poly) -> (u32, Poly) {
        let mut k = 0;
        let mut cur = self.clone();
        if f.is_constant() || self.is_zero() {
            return (0, cur);
        }
        while let Ok(next) = cur.divide_exact(f) {
            cur = next;
            k += 1;
        }
        (k, cur)
    }

    /// Polynomial composition `self(maps[0], ..., maps[n-1])`.
    pub fn compose(&self, maps: &[Poly]) -> Result<Poly, PolyError> {
        if maps.len() != self.nvars {
            return Err(PolyError::ArityMismatch { expected: self.nvars, got: maps.len() });
        }
        let target = maps.first().map(Poly::nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Poly>> = maps.iter().map(|m| vec![Poly::one(m.nvars)]).collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("seeded") * &maps[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Translates so that `center` becomes the origin: `p(x + center)`.
    pub fn translate(&self, center: &[Q]) -> Poly {
        let maps: Vec<Poly> = (0..self.nvars).map(|i| &Poly::var(self.nvars, i) + &Poly::constant(self.nvars, center[i].clone())).collect();
        self.compose(&maps).expect("arity matches")
    }

    /// Order of vanishing at `point` (0 when the polynomial is nonzero there).
    pub fn multiplicity_at(&self, point: &[Q]) -> u32 {
        if self.is_zero() {
            return u32::MAX;
        }
        self.translate(point).min_degree()
    }

    /// Restricts a polynomial involving only `v` to a univariate one.
    pub fn to_univariate(&self, v: usize) -> Option<UniPoly> {
        let mut coeffs = vec![Q::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            if m.0.iter().enumerate().any(|(i, &e)| i != v && e > 0) {
                return None;
            }
            coeffs[m.0[v] as usize] = c.clone();
        }
        Some(UniPoly::new(coeffs))
    }

    pub fn from_univariate(u: &UniPoly, nvars: usize, v: usize) -> Poly {
        let mut p = Poly::zero(nvars);
        for (k, c) in u.coeffs().iter().enumerate() {
            let mut m = Monomial::one(nvars);
            m.0[v] = k as u32;
            p.add_term(m, c.clone());
        }
        p
    }

    /// Substitutes a value for one variable, keeping the arity.
    pub fn specialize(&self, v: usize, value: &Q) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let e = m2.0[v];
            m2.0[v] = 0;
            out.add_term(m2, c * num_traits::pow(value.clone(), e as usize));
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> Q {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Q::zero)
    }

    /// Renders with the given variable names, leading term first.
    pub fn display_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| {
                        let name = names.get(v).map(|s| s.to_string()).unwrap_or(format!("x{v}"));
                        if e == 1 {
                            name
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect();
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else {
                if !a.is_one() {
                    out.push_str(&a.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: &[&str] = if self.nvars == 2 { &["x", "y"] } else { &[] };
        f.write_str(&self.display_with(names))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "arity mismatch in add");
        let (mut big, small) = if self.len() >= rhs.len() { (self.clone(), rhs) } else { (rhs.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "arity mismatch in sub");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "arity mismatch in mul");
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// The polynomial family `x^{2k}(x-1)^{2l} + y^2` on the plane.
pub fn p_kl(k: u32, l: u32) -> Poly {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    let xm1 = &x - &Poly::one(2);
    &(&x.pow(2 * k) * &xm1.pow(2 * l)) + &y.pow(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn grlex_leading_term() {
        let p = &(&x().pow(2) + &y().pow(3)) + &x();
        let (m, _) = p.leading().unwrap();
        assert_eq!(m.0, vec![0, 3]);
        let p = &x().pow(2) + &(&x() * &y());
        assert_eq!(p.leading().unwrap().0 .0, vec![2, 0]);
    }

    #[test]
    fn p11_expansion() {
        // x^4 - 2x^3 + x^2 + y^2
        let expected = Poly::from_int_terms(2, &[(1, &[4, 0]), (-2, &[3, 0]), (1, &[2, 0]), (1, &[0, 2])]);
        assert_eq!(p_kl(1, 1), expected);
    }

    #[test]
    fn exact_division_examples() {
        let p = &(&x().pow(2) * &y()) + &(&x() * &y().pow(2));
        let q = p.divide_exact(&(&x() * &y())).unwrap();
        assert_eq!(q, &x() + &y());
        let p = &x().pow(2) + &y().pow(2);
        assert_eq!(p.divide_exact(&x()), Err(PolyError::NotDivisible));
    }

    #[test]
    fn chart_one_strip_of_p21() {
        // r^4 (r-1)^2 + r^2 s^2 divided by r^2 is P_{1,1}(r, s).
        let pulled = p_kl(2, 1).compose(&[x(), &x() * &y()]).unwrap();
        let q = pulled.divide_exact(&x().pow(2)).unwrap();
        assert_eq!(q, p_kl(1, 1));
    }

    #[test]
    fn evaluation() {
        let p = p_kl(1, 1);
        assert_eq!(p.eval(&[q(0), q(0)]), q(0));
        assert_eq!(p.eval(&[q(1), q(0)]), q(0));
        assert_eq!(p.eval(&[q(2), q(0)]), q(4));
    }

    #[test]
    fn multiplicity() {
        let cusp = &y().pow(2) - &x().pow(3);
        assert_eq!(cusp.multiplicity_at(&[q(0), q(0)]), 2);
        assert_eq!(cusp.multiplicity_at(&[q(1), q(1)]), 1);
        assert_eq!(cusp.multiplicity_at(&[q(1), q(0)]), 0);
    }

    #[test]
    fn strip_factor_counts_powers() {
        let p = &x().pow(3) * &(&y() + &Poly::one(2));
        let (k, rest) = p.strip_factor(&x());
        assert_eq!(k, 3);
        assert_eq!(rest, &y() + &Poly::one(2));
    }
}
