//! Regularity of a rational function on `U = chart ∖ V(Q)`.
//!
//! The reduced denominator is split into pieces; each piece carries one
//! kind of evidence that its real zeros avoid `U`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{is_unit, rational_zeros_on_lines, zero_points, CertError, FactorEntry, UnitResult, ZeroCert, ZeroCertKind, ZeroError};
use crate::poly::{factor_lite, gcd, Poly, RatFunc, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// The piece has no real zeros.
    Unit { cert: ZeroCert },
    /// `Q = piece · cofactor`, so `V(piece) ⊆ V(Q)`.
    DividesQ { cofactor: Poly },
    /// The piece has finitely many real zeros, all on `V(Q)`.
    Points { cert: ZeroCert },
    /// `piece · cofactor = cert.subject`, whose finitely many real zeros
    /// all lie on `V(Q)`.
    DividesCertified { cofactor: Poly, cert: ZeroCert },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEvidence {
    pub factor: Poly,
    pub multiplicity: u32,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityCert {
    pub function: RatFunc,
    /// The open set is the complement of `V(open_set_q)`.
    pub open_set_q: Poly,
    /// Factorization of the reduced denominator.
    pub denominator_cert: ZeroCert,
    pub containment: Vec<FactorEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegularityError {
    #[error("pole inside the open set at {0:?}")]
    NotRegular(Vec<Q>),
    #[error("cannot decide regularity: {0}")]
    Undecidable(String),
}

impl From<ZeroError> for RegularityError {
    fn from(e: ZeroError) -> Self {
        RegularityError::Undecidable(e.to_string())
    }
}

/// Certifies that `f` is regular on the complement of `V(q)`.
pub fn certify_regular(f: &RatFunc, q: &Poly) -> Result<RegularityCert, RegularityError> {
    certify_regular_with(f, q, &[])
}

/// As [`certify_regular`], with known zero sets: polynomials certified to
/// have no real zeros are divided out first, and a piece dividing the
/// subject of a finite-point certificate inherits its zeros.
pub fn certify_regular_with(f: &RatFunc, q: &Poly, units: &[ZeroCert]) -> Result<RegularityCert, RegularityError> {
    let mut den = f.den().clone();
    let mut containment = vec![];
    for cert in units.iter().filter(|c| c.certifies_empty() && !c.subject.is_constant()) {
        let (k, rest) = den.strip_factor(&cert.subject);
        if k > 0 {
            den = rest;
            let evidence = Evidence::Unit { cert: cert.clone() };
            containment.push(FactorEvidence { factor: cert.subject.clone(), multiplicity: k, evidence });
        }
    }
    let (unit, pieces) = if den.is_constant() { (den.leading_coeff(), vec![]) } else { factor_lite(&den) };
    let den = f.den();
    for (h, m) in pieces {
        let (a, b) = split_by(&h, q);
        if !a.is_constant() {
            let cofactor = q.divide_exact(&a).expect("gcd divides");
            containment.push(FactorEvidence { factor: a, multiplicity: m, evidence: Evidence::DividesQ { cofactor } });
        }
        if b.is_constant() {
            continue;
        }
        let evidence = match inherited(&b, q, units) {
            Some(e) => e,
            None => piece_evidence(&b, q)?,
        };
        containment.push(FactorEvidence { factor: b, multiplicity: m, evidence });
    }
    let factors = containment.iter().map(|e| FactorEntry { f: e.factor.clone(), m: e.multiplicity }).collect();
    let denominator_cert = ZeroCert { subject: den.clone(), kind: ZeroCertKind::SmoothFactors { unit, factors } };
    Ok(RegularityCert { function: f.clone(), open_set_q: q.clone(), denominator_cert, containment })
}

/// Certifies that `g` is regular and nowhere zero on the complement of
/// `V(q)`, as regularity of `1/g`.
pub fn certify_nonvanishing(g: &RatFunc, q: &Poly) -> Result<RegularityCert, RegularityError> {
    let inv = g.recip().map_err(|e| RegularityError::Undecidable(e.to_string()))?;
    certify_regular(g, q)?;
    certify_regular(&inv, q)
}

/// `h = a · b` with `a | q` and `gcd(b, q) = 1`; `h` square-free.
fn split_by(h: &Poly, q: &Poly) -> (Poly, Poly) {
    let g = gcd(h, q);
    if g.is_constant() {
        return (Poly::one(h.nvars()), h.clone());
    }
    let b = h.divide_exact(&g).expect("gcd divides").monic();
    (g.monic(), b)
}

fn inherited(b: &Poly, q: &Poly, hints: &[ZeroCert]) -> Option<Evidence> {
    hints.iter().find_map(|cert| {
        let pts = cert.finite_points()?;
        cert.replay().ok()?;
        if pts.iter().any(|p| !q.eval(p).is_zero()) {
            return None;
        }
        let cofactor = cert.subject.divide_exact(b).ok()?;
        Some(Evidence::DividesCertified { cofactor, cert: cert.clone() })
    })
}

fn piece_evidence(b: &Poly, q: &Poly) -> Result<Evidence, RegularityError> {
    match is_unit(b) {
        UnitResult::Yes(cert) => return Ok(Evidence::Unit { cert }),
        UnitResult::No(p) if !q.eval(&p).is_zero() => return Err(RegularityError::NotRegular(p)),
        _ => {}
    }
    match zero_points(b, None) {
        Ok(cert) => {
            let pts = cert.finite_points().expect("finite point certificate");
            if let Some(p) = pts.iter().find(|p| !q.eval(p).is_zero()) {
                return Err(RegularityError::NotRegular(p.clone()));
            }
            Ok(Evidence::Points { cert })
        }
        Err(e) => {
            // a rational point of V(b) outside V(q) refutes regularity
            if let Some(p) = rational_zeros_on_lines(b, 64).into_iter().find(|p| !q.eval(p).is_zero()) {
                return Err(RegularityError::NotRegular(p));
            }
            Err(e.into())
        }
    }
}

impl RegularityCert {
    /// Replays the certificate using only exact polynomial identities and
    /// zero-set certificates.
    pub fn replay(&self) -> Result<(), CertError> {
        let den = self.function.den();
        if self.denominator_cert.subject != *den {
            return Err(CertError::IdentityMismatch("denominator certificate subject".into()));
        }
        self.denominator_cert.replay()?;
        let ZeroCertKind::SmoothFactors { factors, .. } = &self.denominator_cert.kind else {
            return Err(CertError::BadEvidence("denominator must be given in factored form".into()));
        };
        if factors.len() != self.containment.len()
            || factors.iter().zip(&self.containment).any(|(a, b)| a.f != b.factor || a.m != b.multiplicity)
        {
            return Err(CertError::BadEvidence("factor list does not match evidence".into()));
        }
        let q = &self.open_set_q;
        for e in &self.containment {
            match &e.evidence {
                Evidence::Unit { cert } => {
                    if cert.subject != e.factor && cert.subject != -&e.factor {
                        return Err(CertError::BadEvidence("unit certificate subject".into()));
                    }
                    cert.replay()?;
                    if !cert.certifies_empty() {
                        return Err(CertError::BadEvidence("unit certificate leaves zeros".into()));
                    }
                }
                Evidence::DividesQ { cofactor } => {
                    if &e.factor * cofactor != *q {
                        return Err(CertError::IdentityMismatch("factor · cofactor ≠ Q".into()));
                    }
                }
                Evidence::Points { cert } => {
                    if cert.subject != e.factor {
                        return Err(CertError::BadEvidence("point certificate subject".into()));
                    }
                    cert.replay()?;
                    let pts = cert.finite_points().ok_or_else(|| CertError::BadEvidence("not a point list".into()))?;
                    if let Some(p) = pts.iter().find(|p| !q.eval(p).is_zero()) {
                        return Err(CertError::BadEvidence(format!("zero {p:?} lies in the open set")));
                    }
                }
                Evidence::DividesCertified { cofactor, cert } => {
                    if &e.factor * cofactor != cert.subject {
                        return Err(CertError::IdentityMismatch("factor · cofactor ≠ certified polynomial".into()));
                    }
                    cert.replay()?;
                    let pts = cert.finite_points().ok_or_else(|| CertError::BadEvidence("not a point list".into()))?;
                    if let Some(p) = pts.iter().find(|p| !q.eval(p).is_zero()) {
                        return Err(CertError::BadEvidence(format!("zero {p:?} lies in the open set")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A square grid `[lo, hi]^2` with `steps` points per side.
#[derive(Debug, Clone)]
pub struct Grid {
    pub lo: Q,
    pub hi: Q,
    pub steps: usize,
}

impl Grid {
    pub fn new(lo: Q, hi: Q, steps: usize) -> Self {
        assert!(steps >= 2, "grid needs at least two points per side");
        Grid { lo, hi, steps }
    }

    pub fn coords(&self) -> Vec<Q> {
        let span = &self.hi - &self.lo;
        let d = Q::from_integer(((self.steps - 1) as i64).into());
        (0..self.steps).map(|i| &self.lo + &span * Q::from_integer((i as i64).into()) / &d).collect()
    }
}

/// Returns a grid point in `U = ∖V(q)` where `f` has a pole, if any.
pub fn sample_refute(f: &RatFunc, q: &Poly, grid: &Grid) -> Option<Vec<Q>> {
    let cs = grid.coords();
    for a in &cs {
        // one univariate slice per grid column, evaluated by Horner
        let den = f.den().specialize(0, a).to_univariate(1).expect("bivariate");
        if den.degree() == 0 && !den.is_zero() {
            continue;
        }
        let q_line = q.specialize(0, a).to_univariate(1).expect("bivariate");
        let ints = integer_coeffs(den.coeffs());
        if let Some(b) = cs.iter().find(|b| vanishes_at(&ints, b) && !q_line.eval(b).is_zero()) {
            return Some(vec![a.clone(), b.clone()]);
        }
    }
    None
}

/// The coefficients times the lcm of their denominators.
fn integer_coeffs(cs: &[Q]) -> Vec<BigInt> {
    let l = cs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    cs.iter().map(|c| c.numer() * (&l / c.denom())).collect()
}

/// `Σ c_j x^j = 0` at `x = n/m`, by homogenized Horner in integers.
fn vanishes_at(cs: &[BigInt], x: &Q) -> bool {
    let (n, m) = (x.numer(), x.denom());
    let mut acc = BigInt::zero();
    let mut mpow = BigInt::one();
    for c in cs.iter().rev() {
        acc = acc * n + c * &mpow;
        mpow *= m;
    }
    acc.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{p_kl, q};

    #[test]
    fn integer_zero_test_matches_rational_evaluation() {
        let u = crate::poly::UniPoly::new(vec![Q::new((-1).into(), 3.into()), q(0), Q::new(3.into(), 4.into())]);
        let ints = integer_coeffs(u.coeffs());
        for n in -12..=12i64 {
            let x = Q::new(n.into(), 6.into());
            assert_eq!(vanishes_at(&ints, &x), u.eval(&x).is_zero(), "{x}");
        }
        assert!(vanishes_at(&ints, &Q::new(2.into(), 3.into())));
    }

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }
    fn q1() -> Poly {
        &x().pow(2) + &y().pow(2)
    }
    fn q2() -> Poly {
        &(&x() - &Poly::one(2)).pow(2) + &y().pow(2)
    }
    fn inv(p: Poly) -> RatFunc {
        RatFunc::new(Poly::one(2), p).unwrap()
    }
    fn grid() -> Grid {
        Grid::new(q(-2), q(2), 101)
    }

    #[test]
    fn regular_examples() {
        let c = certify_regular(&inv(q1()), &q1()).unwrap();
        c.replay().unwrap();
        assert_eq!(certify_regular(&inv(q1()), &q2()), Err(RegularityError::NotRegular(vec![q(0), q(0)])));
        let c = certify_regular(&inv(p_kl(1, 1)), &(&q1() * &q2())).unwrap();
        c.replay().unwrap();
        assert!(matches!(c.containment[0].evidence, Evidence::Points { .. }));
        assert!(sample_refute(&c.function, &c.open_set_q, &grid()).is_none());
    }

    #[test]
    fn line_denominator_on_line_complement() {
        // 1/(x y) on the complement of V(x y (x^2 + 1))
        let qq = &(&x() * &y()) * &(&x().pow(2) + &Poly::one(2));
        let c = certify_regular(&inv(&x() * &y()), &qq).unwrap();
        c.replay().unwrap();
    }

    #[test]
    fn refutation_examples() {
        assert_eq!(sample_refute(&inv(x()), &y(), &Grid::new(q(-1), q(1), 3)), Some(vec![q(0), q(-1)]));
        assert_eq!(sample_refute(&inv(p_kl(1, 1)), &q1(), &grid()), Some(vec![q(1), q(0)]));
        assert!(matches!(certify_regular(&inv(x()), &y()), Err(RegularityError::NotRegular(_))));
    }

    #[test]
    fn nonvanishing_of_unit() {
        let g = RatFunc::from_poly(&Poly::one(2) + &y().pow(2));
        let c = certify_nonvanishing(&g, &Poly::one(2)).unwrap();
        c.replay().unwrap();
    }

    #[test]
    fn tampered_cofactor_rejected() {
        let mut c = certify_regular(&inv(q1()), &(&q1() * &q2())).unwrap();
        for e in &mut c.containment {
            if let Evidence::DividesQ { cofactor } = &mut e.evidence {
                *cofactor = q2().scale(&q(2));
            }
        }
        assert!(c.replay().is_err());
    }
}
