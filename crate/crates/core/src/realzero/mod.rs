//! Certified statements about real zero sets: emptiness, finiteness and
//! containment, plus regularity of rational functions on open sets.

mod common;
mod regular;
mod sos;

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{gcd, points_serde, q_serde, Poly, Q};

pub use common::{common_zeros, resultant};
pub use regular::{
    certify_nonvanishing, certify_regular, certify_regular_with, sample_refute, Evidence, FactorEvidence, Grid, RegularityCert,
    RegularityError,
};
pub use sos::find_sos;

/// One weighted square `w · f²` with `w > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SosTerm {
    #[serde(with = "q_serde")]
    pub w: Q,
    pub f: Poly,
}

impl SosTerm {
    pub fn new(w: Q, f: Poly) -> Self {
        SosTerm { w, f }
    }

    pub fn value(&self) -> Poly {
        (&self.f * &self.f).scale(&self.w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub f: Poly,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ZeroCertKind {
    /// `subject = Σ w_i f_i² + constant` with `constant > 0`.
    EmptyByPositivity {
        sos_terms: Vec<SosTerm>,
        #[serde(with = "q_serde")]
        constant: Q,
    },
    /// `subject = Σ w_i f_i²` and the common real zeros of the `f_i` are
    /// exactly `points`.
    FinitePoints {
        #[serde(with = "points_serde")]
        points: Vec<Vec<Q>>,
        decomposition: Vec<SosTerm>,
    },
    /// `subject = unit · Π f_i^{m_i}`.
    SmoothFactors {
        #[serde(with = "q_serde")]
        unit: Q,
        factors: Vec<FactorEntry>,
    },
    /// Supplied by an instance file and not yet checked.
    Declared {
        #[serde(with = "points_serde")]
        points: Vec<Vec<Q>>,
        #[serde(default)]
        sos_terms: Vec<SosTerm>,
        #[serde(default)]
        description: String,
        verified: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCert {
    pub subject: Poly,
    #[serde(flatten)]
    pub kind: ZeroCertKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZeroError {
    #[error("no certificate found within the search effort")]
    Unknown,
    #[error("real zeros may have irrational coordinates (eliminant {eliminant})")]
    NonRationalZeros { eliminant: String },
    #[error("zero set is infinite")]
    InfiniteZeroSet,
    #[error("only one- and two-variable systems are supported")]
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("symbolic identity fails: {0}")]
    IdentityMismatch(String),
    #[error("weight or constant is not positive")]
    NonPositive,
    #[error("listed point {0:?} is not a zero")]
    PointNotZero(Vec<String>),
    #[error("point list is not the complete zero set")]
    IncompletePoints,
    #[error("declared certificate has not been verified")]
    Unverified,
    #[error("zero-set recomputation failed: {0}")]
    Recompute(#[from] ZeroError),
    #[error("evidence does not support the claim: {0}")]
    BadEvidence(String),
}

fn fmt_point(p: &[Q]) -> Vec<String> {
    p.iter().map(|c| c.to_string()).collect()
}

fn sos_sum(nvars: usize, terms: &[SosTerm]) -> Result<Poly, CertError> {
    let mut acc = Poly::zero(nvars);
    for t in terms {
        if !t.w.is_positive() {
            return Err(CertError::NonPositive);
        }
        if t.f.nvars() != nvars {
            return Err(CertError::IdentityMismatch("arity".into()));
        }
        acc = &acc + &t.value();
    }
    Ok(acc)
}

fn point_set(points: &[Vec<Q>]) -> BTreeSet<Vec<Q>> {
    points.iter().cloned().collect()
}

impl ZeroCert {
    /// Replays the certificate by exact symbolic identity (and, for point
    /// lists, by recomputing the common zeros of the decomposition).
    pub fn replay(&self) -> Result<(), CertError> {
        let n = self.subject.nvars();
        match &self.kind {
            ZeroCertKind::EmptyByPositivity { sos_terms, constant } => {
                if !constant.is_positive() {
                    return Err(CertError::NonPositive);
                }
                let sum = &sos_sum(n, sos_terms)? + &Poly::constant(n, constant.clone());
                if sum != self.subject {
                    return Err(CertError::IdentityMismatch("subject ≠ Σ w f² + c".into()));
                }
                Ok(())
            }
            ZeroCertKind::FinitePoints { points, decomposition } => {
                if sos_sum(n, decomposition)? != self.subject {
                    return Err(CertError::IdentityMismatch("subject ≠ Σ w f²".into()));
                }
                for p in points {
                    if p.len() != n || decomposition.iter().any(|t| !t.f.eval(p).is_zero()) {
                        return Err(CertError::PointNotZero(fmt_point(p)));
                    }
                }
                let fs: Vec<Poly> = decomposition.iter().map(|t| t.f.clone()).collect();
                let actual = common_zeros(&fs)?;
                if point_set(&actual) != point_set(points) {
                    return Err(CertError::IncompletePoints);
                }
                Ok(())
            }
            ZeroCertKind::SmoothFactors { unit, factors } => {
                if unit.is_zero() {
                    return Err(CertError::NonPositive);
                }
                let prod = factors.iter().fold(Poly::constant(n, unit.clone()), |acc, e| &acc * &e.f.pow(e.m));
                if prod != self.subject {
                    return Err(CertError::IdentityMismatch("subject ≠ unit · Π f^m".into()));
                }
                Ok(())
            }
            ZeroCertKind::Declared { .. } => Err(CertError::Unverified),
        }
    }

    /// Upgrades a declared certificate to a checked one when its SOS terms
    /// and points replay; other kinds are returned unchanged after replay.
    pub fn verify_declared(&self) -> Result<ZeroCert, CertError> {
        match &self.kind {
            ZeroCertKind::Declared { points, sos_terms, .. } => {
                let cert = ZeroCert {
                    subject: self.subject.clone(),
                    kind: ZeroCertKind::FinitePoints { points: points.clone(), decomposition: sos_terms.clone() },
                };
                cert.replay()?;
                Ok(cert)
            }
            _ => {
                self.replay()?;
                Ok(self.clone())
            }
        }
    }

    /// True when the certificate shows the real zero set is empty.
    pub fn certifies_empty(&self) -> bool {
        match &self.kind {
            ZeroCertKind::EmptyByPositivity { .. } => true,
            ZeroCertKind::FinitePoints { points, .. } => points.is_empty(),
            _ => false,
        }
    }

    /// The certified finite zero set, if this certificate pins one down.
    pub fn finite_points(&self) -> Option<&[Vec<Q>]> {
        match &self.kind {
            ZeroCertKind::EmptyByPositivity { .. } => Some(&[]),
            ZeroCertKind::FinitePoints { points, .. } => Some(points),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitResult {
    Yes(ZeroCert),
    No(Vec<Q>),
    Unknown,
}

/// Decides whether `q` has no real zeros.
pub fn is_unit(q: &Poly) -> UnitResult {
    if q.is_zero() {
        return UnitResult::No(vec![Q::zero(); q.nvars()]);
    }
    // a negative-definite q is as good as a positive one; the certificate's
    // subject is then -q
    for p in [q.clone(), -q] {
        if let Some((terms, c)) = find_sos(&p) {
            if c.is_positive() {
                return UnitResult::Yes(ZeroCert { subject: p, kind: ZeroCertKind::EmptyByPositivity { sos_terms: terms, constant: c } });
            }
            let mut fs: Vec<Poly> = terms.iter().map(|t| t.f.clone()).collect();
            if !c.is_zero() {
                fs.push(Poly::constant(q.nvars(), c.clone()));
            }
            match common_zeros(&fs) {
                Ok(pts) if pts.is_empty() => {
                    let mut decomposition = terms;
                    if !c.is_zero() {
                        decomposition.push(SosTerm::new(c, Poly::one(q.nvars())));
                    }
                    return UnitResult::Yes(ZeroCert {
                        subject: p.clone(),
                        kind: ZeroCertKind::FinitePoints { points: vec![], decomposition },
                    });
                }
                Ok(pts) => return UnitResult::No(pts[0].clone()),
                Err(_) => {}
            }
        }
    }
    if let Some(w) = rational_zero_on_lines(q) {
        return UnitResult::No(w);
    }
    UnitResult::Unknown
}

/// Searches small rational vertical and horizontal lines for a rational
/// zero.
pub(crate) fn rational_zero_on_lines(q: &Poly) -> Option<Vec<Q>> {
    rational_zeros_on_lines(q, 1).into_iter().next()
}

/// Up to `limit` rational zeros found on lines `x = c` and `y = c` for small
/// rationals `c`.
pub(crate) fn rational_zeros_on_lines(q: &Poly, limit: usize) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = vec![];
    if q.nvars() != 2 {
        return out;
    }
    let values: Vec<Q> = (-8i64..=8).flat_map(|k| [Q::new(k.into(), 1.into()), Q::new((2 * k + 1).into(), 2.into())]).collect();
    for fixed in [0usize, 1] {
        let free = 1 - fixed;
        for c in &values {
            let spec = q.specialize(fixed, c);
            let frees: Vec<Q> = if spec.is_zero() {
                values.iter().take(4).cloned().collect()
            } else {
                spec.to_univariate(free).map(|u| u.rational_roots()).unwrap_or_default()
            };
            for t in frees {
                let mut p = vec![Q::zero(), Q::zero()];
                p[fixed] = c.clone();
                p[free] = t;
                if !out.contains(&p) {
                    out.push(p);
                }
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}

/// A finite-point certificate for the real zero set of `q`.
pub fn zero_points(q: &Poly, hint: Option<&ZeroCert>) -> Result<ZeroCert, ZeroError> {
    if let Some(h) = hint {
        if h.subject == *q {
            if let Ok(c) = h.verify_declared() {
                if let ZeroCertKind::FinitePoints { .. } = c.kind {
                    return Ok(c);
                }
            }
        }
    }
    let (terms, c) = find_sos(q).ok_or(ZeroError::Unknown)?;
    let mut decomposition = terms;
    if !c.is_zero() {
        decomposition.push(SosTerm::new(c, Poly::one(q.nvars())));
    }
    let fs: Vec<Poly> = decomposition.iter().map(|t| t.f.clone()).collect();
    let points = common_zeros(&fs)?;
    Ok(ZeroCert { subject: q.clone(), kind: ZeroCertKind::FinitePoints { points, decomposition } })
}

/// A certificate for `q ∘ maps`, from the decomposition of `q` composed
/// with a polynomial map. When the composed square roots share a factor
/// `c` (an exceptional divisor through a zero of `q`), the certificate is
/// for `q ∘ maps / c²` instead. Only sum-of-squares kinds transfer.
pub fn compose_zero_cert(cert: &ZeroCert, maps: &[Poly]) -> Result<ZeroCert, ZeroError> {
    let (terms, constant) = match &cert.kind {
        ZeroCertKind::EmptyByPositivity { sos_terms, constant } => (sos_terms, Some(constant)),
        ZeroCertKind::FinitePoints { decomposition, .. } => (decomposition, None),
        _ => return Err(ZeroError::Unknown),
    };
    let mut fs = terms.iter().map(|t| t.f.compose(maps).map_err(|_| ZeroError::Unknown)).collect::<Result<Vec<_>, _>>()?;
    if constant.is_none() {
        let c = fs.iter().fold(Poly::zero(maps.len()), |g, f| gcd(&g, f));
        if !c.is_constant() {
            fs = fs.iter().map(|f| f.divide_exact(&c).expect("gcd divides")).collect();
        }
    }
    let decomposition: Vec<SosTerm> = terms.iter().zip(fs).map(|(t, f)| SosTerm::new(t.w.clone(), f)).collect();
    let mut subject = decomposition.iter().fold(Poly::zero(maps.len()), |acc, t| &acc + &t.value());
    let kind = match constant {
        Some(c) => {
            subject = &subject + &Poly::constant(maps.len(), c.clone());
            ZeroCertKind::EmptyByPositivity { sos_terms: decomposition, constant: c.clone() }
        }
        None => {
            let fs: Vec<Poly> = decomposition.iter().map(|t| t.f.clone()).collect();
            ZeroCertKind::FinitePoints { points: common_zeros(&fs)?, decomposition }
        }
    };
    Ok(ZeroCert { subject, kind })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    Yes,
    No(Vec<Q>),
    Unknown,
}

/// Decides `V(inner.subject) ⊆ V(outer.subject)`.
pub fn contains(inner: &ZeroCert, outer: &ZeroCert) -> Containment {
    let Some(pts) = inner.finite_points() else { return Containment::Unknown };
    if pts.is_empty() {
        return Containment::Yes;
    }
    match outer.finite_points() {
        Some(out) => {
            let set = point_set(out);
            match pts.iter().find(|p| !set.contains(*p)) {
                Some(p) => Containment::No(p.clone()),
                None => Containment::Yes,
            }
        }
        None => match pts.iter().find(|p| !outer.subject.eval(p).is_zero()) {
            Some(p) => Containment::No(p.clone()),
            None => Containment::Yes,
        },
    }
}
