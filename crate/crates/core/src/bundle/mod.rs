//! Rank-one bundles given by a transition function on a two-set covering,
//! and the `ξ_{k,l}` family.
//!
//! A section is a pair `(s₁, s₂)` of rational functions, `s_i` regular on
//! `U_i`, with `g₂₁ s₁ = s₂`.

mod pullback;
mod search;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Covering, GeometryError};
use crate::linsolve::{PolyAnsatz, Rref};
use crate::poly::{p_kl, Monomial, Poly, PolyError, RatFunc, Q};
use crate::realzero::{certify_regular_with, CertError, Evidence, RegularityCert, RegularityError, ZeroCert};

pub use pullback::{pullback_bundle, pullback_section, LeafBundle, StrippedFactor};
pub use search::{
    remark_tower, search_trivializing_tower, xi_dictionary, BadPoint, SearchOutcome, SpaceOutcome, SpaceReport, TowerBundle, TowerReport,
    TowerSection,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("a line bundle needs exactly two open sets, got {0}")]
    Shape(usize),
    #[error("transition is not a unit on the overlap: {0}")]
    BadTransition(String),
    #[error("g₂₁·s₁ ≠ s₂")]
    Identity,
    #[error("component s{0} is not regular on U{0}: {1}")]
    NotRegular(usize, String),
    #[error("certificate does not replay: {0}")]
    Cert(#[from] CertError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("undecidable: {0}")]
    Undecidable(String),
}

/// A rank-one bundle on `U₁ ∪ U₂` with transition `g₂₁` on `U₁ ∩ U₂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundle {
    pub covering: Covering,
    pub transition: RatFunc,
    /// `g₂₁` is regular on the overlap.
    pub transition_cert: RegularityCert,
    /// `1/g₂₁` is regular on the overlap.
    pub nonvanishing_cert: RegularityCert,
    /// Zero-set certificates available to every regularity check on this
    /// bundle; a pulled-back bundle inherits those of its base.
    #[serde(default)]
    pub hints: Vec<ZeroCert>,
}

impl LineBundle {
    pub fn new(covering: Covering, transition: RatFunc) -> Result<Self, BundleError> {
        LineBundle::with_hints(covering, transition, vec![])
    }

    pub fn with_hints(covering: Covering, transition: RatFunc, hints: Vec<ZeroCert>) -> Result<Self, BundleError> {
        if covering.len() != 2 {
            return Err(BundleError::Shape(covering.len()));
        }
        let q12 = covering.intersection_q(&[0, 1]);
        let bad = |e: RegularityError| BundleError::BadTransition(e.to_string());
        let transition_cert = certify_regular_with(&transition, &q12, &hints).map_err(bad)?;
        let inv = transition.recip().map_err(|_| BundleError::BadTransition("transition is zero".into()))?;
        let nonvanishing_cert = certify_regular_with(&inv, &q12, &hints).map_err(bad)?;
        Ok(LineBundle { covering, transition, transition_cert, nonvanishing_cert, hints })
    }

    /// Regularity of `f` on the complement of `V(q)`, using the hints.
    pub fn certify(&self, f: &RatFunc, q: &Poly) -> Result<RegularityCert, RegularityError> {
        certify_regular_with(f, q, &self.hints)
    }

    /// The hints together with every zero-set certificate inside the
    /// transition certificates.
    pub fn known_zero_sets(&self) -> Vec<ZeroCert> {
        let mut out = self.hints.clone();
        for c in [&self.transition_cert, &self.nonvanishing_cert] {
            for e in &c.containment {
                let z = match &e.evidence {
                    Evidence::Unit { cert } | Evidence::Points { cert } | Evidence::DividesCertified { cert, .. } => cert,
                    Evidence::DividesQ { .. } => continue,
                };
                if !out.contains(z) {
                    out.push(z.clone());
                }
            }
        }
        out
    }

    pub fn chart(&self) -> &str {
        &self.covering.chart
    }

    /// The equation of `U_i`, `i ∈ {1, 2}`.
    pub fn q(&self, i: usize) -> &Poly {
        self.covering.q(i - 1)
    }

    pub fn replay(&self) -> Result<(), BundleError> {
        self.covering.replay()?;
        let q12 = self.covering.intersection_q(&[0, 1]);
        let inv = self.transition.recip()?;
        for (c, f) in [(&self.transition_cert, &self.transition), (&self.nonvanishing_cert, &inv)] {
            if c.function != *f || c.open_set_q != q12 {
                return Err(CertError::BadEvidence("transition certificate is about another function".into()).into());
            }
            c.replay()?;
        }
        Ok(())
    }
}

/// `ξ_{k,l}`: `U₁ = ∖V(x²+y²)`, `U₂ = ∖V((x−1)²+y²)`, `g₂₁ = P_{k,l}`.
pub fn make_xi(k: u32, l: u32) -> LineBundle {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    let q1 = &x.pow(2) + &y.pow(2);
    let q2 = &(&x - &Poly::one(2)).pow(2) + &y.pow(2);
    let cov = Covering::new("base", vec![q1, q2]).expect("the two sets cover the plane");
    LineBundle::new(cov, RatFunc::from_poly(p_kl(k, l))).expect("P_{k,l} vanishes only at (0,0) and (1,0)")
}

/// A verified section of a [`LineBundle`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSection {
    pub s1: RatFunc,
    pub s2: RatFunc,
    pub cert1: RegularityCert,
    pub cert2: RegularityCert,
}

impl BundleSection {
    pub fn new(b: &LineBundle, s1: RatFunc, s2: RatFunc) -> Result<Self, BundleError> {
        if &b.transition * &s1 != s2 {
            return Err(BundleError::Identity);
        }
        let cert = |i: usize, s: &RatFunc| b.certify(s, b.q(i)).map_err(|e| BundleError::NotRegular(i, e.to_string()));
        let cert1 = cert(1, &s1)?;
        let cert2 = cert(2, &s2)?;
        Ok(BundleSection { s1, s2, cert1, cert2 })
    }

    /// The section determined by its first component.
    pub fn from_first(b: &LineBundle, s1: RatFunc) -> Result<Self, BundleError> {
        let s2 = &b.transition * &s1;
        BundleSection::new(b, s1, s2)
    }

    pub fn component(&self, i: usize) -> &RatFunc {
        if i == 1 {
            &self.s1
        } else {
            &self.s2
        }
    }

    pub fn verify(&self, b: &LineBundle) -> Result<(), BundleError> {
        if &b.transition * &self.s1 != self.s2 {
            return Err(BundleError::Identity);
        }
        for (i, c) in [(1, &self.cert1), (2, &self.cert2)] {
            if c.function != *self.component(i) || c.open_set_q != *b.q(i) {
                return Err(CertError::BadEvidence(format!("certificate of s{i} is about another function")).into());
            }
            c.replay()?;
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.s1.is_zero()
    }

    /// The value at `p` in the first open set containing it.
    pub fn value_at(&self, b: &LineBundle, p: &[Q]) -> Option<Q> {
        (1..=2).find(|&i| !b.q(i).eval(p).is_zero()).and_then(|i| self.component(i).eval(p).ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Vanishing {
    /// `1/s_i` is regular on `U_i` for both components.
    Yes { certs: Vec<RegularityCert> },
    /// `s_component` vanishes at `point ∈ U_component`.
    No {
        component: usize,
        #[serde(with = "crate::poly::point_serde")]
        point: Vec<Q>,
    },
}

impl Vanishing {
    pub fn is_yes(&self) -> bool {
        matches!(self, Vanishing::Yes { .. })
    }
}

/// Decides whether a verified section vanishes nowhere.
pub fn nowhere_vanishing(b: &LineBundle, s: &BundleSection) -> Result<Vanishing, BundleError> {
    let mut certs = vec![];
    for i in 1..=2 {
        let q = b.q(i);
        let si = s.component(i);
        if si.is_zero() {
            let point = point_off(q);
            return Ok(Vanishing::No { component: i, point });
        }
        match b.certify(&si.recip()?, q) {
            Ok(c) => certs.push(c),
            Err(RegularityError::NotRegular(point)) => return Ok(Vanishing::No { component: i, point }),
            Err(RegularityError::Undecidable(e)) => return Err(BundleError::Undecidable(e)),
        }
    }
    Ok(Vanishing::Yes { certs })
}

/// A small integer point where `q` does not vanish.
pub(crate) fn point_off(q: &Poly) -> Vec<Q> {
    (0i64..)
        .flat_map(|n| (-n..=n).flat_map(move |a| (-n..=n).map(move |b| vec![Q::from_integer(a.into()), Q::from_integer(b.into())])))
        .find(|p| !q.eval(p).is_zero())
        .expect("a nonzero polynomial does not vanish on all of ℤ²")
}

/// A basis of the sections `s_i = a_i / Q_i^m` with `deg a_i ≤ deg` and
/// `m ≤ power`. Regularity holds by construction. The basis is in reduced
/// echelon form over the numerators of `s_i · Q_i^power`.
pub fn global_sections_bounded(b: &LineBundle, deg: u32, power: u32) -> Result<Vec<BundleSection>, BundleError> {
    let (q1, q2) = (b.q(1), b.q(2));
    let (gn, gd) = (b.transition.num(), b.transition.den());
    let ansatz = PolyAnsatz::new(2, deg, 2);
    let mut vectors: Vec<[Poly; 2]> = vec![];
    for m in 0..=power {
        let mut sys = Rref::new(ansatz.ncols());
        let coefs = [(0, gn * &q2.pow(m)), (1, -&(gd * &q1.pow(m)))];
        ansatz.add_identity(&mut sys, &coefs, &Poly::zero(2));
        for v in sys.nullspace() {
            let lift = power - m;
            vectors.push([&ansatz.poly(&v, 0) * &q1.pow(lift), &ansatz.poly(&v, 1) * &q2.pow(lift)]);
        }
    }
    let mut keys: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    for v in &vectors {
        for (i, p) in v.iter().enumerate() {
            for (m, _) in p.terms() {
                keys.insert((i, m.clone()), 0);
            }
        }
    }
    for (n, slot) in keys.values_mut().enumerate() {
        *slot = n;
    }
    let mut span = Rref::new(keys.len());
    for v in &vectors {
        let row = v.iter().enumerate().flat_map(|(i, p)| p.terms().map(move |(m, c)| ((i, m.clone()), c.clone())));
        span.add_row(row.map(|(k, c)| (keys[&k], c)).collect::<Vec<_>>(), Q::zero());
    }
    let by_index: Vec<&(usize, Monomial)> = keys.keys().collect();
    let (d1, d2) = (q1.pow(power), q2.pow(power));
    let mut out = vec![];
    for (_, row) in span.pivot_rows() {
        let mut nums = [Poly::zero(2), Poly::zero(2)];
        for (j, c) in row {
            let (i, m) = by_index[j];
            nums[*i] = &nums[*i] + &Poly::monomial(m.clone(), c);
        }
        let [n1, n2] = nums;
        out.push(BundleSection::new(b, RatFunc::new(n1, d1.clone())?, RatFunc::new(n2, d2.clone())?)?);
    }
    Ok(out)
}

/// True when some bounded section is nonzero at `p`.
pub fn generated_at(b: &LineBundle, p: &[Q], deg: u32, power: u32) -> Result<bool, BundleError> {
    if b.q(1).eval(p).is_zero() && b.q(2).eval(p).is_zero() {
        return Err(BundleError::Geometry(GeometryError::Malformed(format!("{p:?} lies in neither open set"))));
    }
    let basis = global_sections_bounded(b, deg, power)?;
    Ok(basis.iter().any(|s| s.value_at(b, p).is_some_and(|v| !v.is_zero())))
}

/// `(1, g)` when `g` is a unit everywhere; used for bundles that are
/// visibly trivial.
pub fn unit_section(b: &LineBundle) -> Result<BundleSection, BundleError> {
    BundleSection::from_first(b, RatFunc::one(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn xi_transitions_and_zeros() {
        let b = make_xi(1, 1);
        assert_eq!(b.transition, RatFunc::from_poly(&(&x().pow(2) * &(&x() - &Poly::one(2)).pow(2)) + &y().pow(2)));
        b.replay().unwrap();
        let b0 = make_xi(0, 0);
        assert_eq!(b0.transition, RatFunc::from_poly(&Poly::one(2) + &y().pow(2)));
        assert!(nowhere_vanishing(&b0, &unit_section(&b0).unwrap()).unwrap().is_yes());
        let b05 = make_xi(0, 2);
        assert!(b05.transition.num().eval(&[q(1), q(0)]).is_zero());
        assert!(!b05.transition.num().eval(&[q(0), q(0)]).is_zero());
    }

    #[test]
    fn bad_transition_rejected() {
        let cov = make_xi(1, 1).covering;
        // x vanishes on the whole line x = 0, inside the overlap
        assert!(matches!(LineBundle::new(cov, RatFunc::from_poly(x())), Err(BundleError::BadTransition(_))));
    }

    #[test]
    fn xi11_sections_vanish_at_origin() {
        let b = make_xi(1, 1);
        let basis = global_sections_bounded(&b, 6, 2).unwrap();
        assert!(!basis.is_empty());
        for s in &basis {
            s.verify(&b).unwrap();
            assert!(s.s2.eval(&[q(0), q(0)]).unwrap().is_zero());
        }
        assert!(!generated_at(&b, &[q(0), q(0)], 6, 2).unwrap());
        assert!(generated_at(&b, &[q(2), q(0)], 6, 2).unwrap());
        assert!(matches!(nowhere_vanishing(&b, &basis[0]).unwrap(), Vanishing::No { .. }));
    }

    #[test]
    fn xi_k0_is_trivial() {
        for k in 1..=2 {
            let b = make_xi(k, 0);
            let w = &x().pow(2 * k) + &y().pow(2);
            let s = BundleSection::new(&b, RatFunc::new(Poly::one(2), w).unwrap(), RatFunc::one(2)).unwrap();
            assert!(nowhere_vanishing(&b, &s).unwrap().is_yes());
        }
        // with U₁ = ∖V(x²+y²) the section 1/(x²+y²) is in the bounded space
        let b = make_xi(1, 0);
        let basis = global_sections_bounded(&b, 2, 1).unwrap();
        assert!(basis.iter().any(|s| s.s2.eval(&[q(0), q(0)]).is_ok_and(|v| !v.is_zero())));
    }

    #[test]
    fn monotone_in_bounds() {
        let b = make_xi(1, 1);
        let small = global_sections_bounded(&b, 4, 1).unwrap();
        let big = global_sections_bounded(&b, 5, 2).unwrap();
        assert!(small.len() <= big.len());
    }
}
