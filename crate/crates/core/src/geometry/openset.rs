use serde::{Deserialize, Serialize};

use super::{GeometryError, Tower};
use crate::poly::{factor_lite, Poly, Q};
use crate::realzero::{common_zeros, zero_points, CertError, FactorEntry, SosTerm, ZeroCert, ZeroCertKind};

/// The Zariski open set `chart ∖ V(q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSet {
    pub chart: String,
    pub q: Poly,
    pub q_cert: ZeroCert,
}

impl OpenSet {
    pub fn new(chart: &str, q: Poly) -> Result<Self, GeometryError> {
        if q.is_zero() {
            return Err(GeometryError::EmptyOpenSet);
        }
        let q_cert = describe_zero_set(&q);
        Ok(OpenSet { chart: chart.into(), q, q_cert })
    }

    pub fn full(chart: &str) -> Self {
        OpenSet::new(chart, Poly::one(2)).expect("nonzero")
    }

    pub fn contains(&self, p: &[Q]) -> bool {
        !num_traits::Zero::is_zero(&self.q.eval(p))
    }
}

/// A point list when one can be certified, otherwise the factored form.
pub fn describe_zero_set(q: &Poly) -> ZeroCert {
    if let Ok(c) = zero_points(q, None) {
        return c;
    }
    let (unit, factors) = factor_lite(q);
    let factors = factors.into_iter().map(|(f, m)| FactorEntry { f, m }).collect();
    ZeroCert { subject: q.clone(), kind: ZeroCertKind::SmoothFactors { unit, factors } }
}

/// Finitely many open sets of one chart whose union is the whole chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covering {
    pub chart: String,
    pub sets: Vec<OpenSet>,
    /// `Σ Q_i²` has no real zeros: the `Q_i` have no common real zero.
    pub coverage_cert: ZeroCert,
}

impl Covering {
    pub fn new(chart: &str, qs: Vec<Poly>) -> Result<Self, GeometryError> {
        if qs.is_empty() {
            return Err(GeometryError::Malformed("a covering needs at least one set".into()));
        }
        let sets = qs.into_iter().map(|q| OpenSet::new(chart, q)).collect::<Result<Vec<_>, _>>()?;
        let coverage_cert = coverage_cert(&sets)?;
        Ok(Covering { chart: chart.into(), sets, coverage_cert })
    }

    /// The single-set covering by the whole chart.
    pub fn trivial(chart: &str) -> Self {
        Covering::new(chart, vec![Poly::one(2)]).expect("the full chart covers")
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn q(&self, i: usize) -> &Poly {
        &self.sets[i].q
    }

    /// `Π Q_i` over the distinct indices, defining `U_{i₀…i_q}`.
    pub fn intersection_q(&self, idx: &[usize]) -> Poly {
        let mut seen: Vec<usize> = idx.to_vec();
        seen.sort_unstable();
        seen.dedup();
        seen.iter().fold(Poly::one(2), |acc, &i| &acc * &self.sets[i].q)
    }

    pub fn replay(&self) -> Result<(), CertError> {
        let sum = self.sets.iter().fold(Poly::zero(2), |acc, s| &acc + &(&s.q * &s.q));
        if self.coverage_cert.subject != sum {
            return Err(CertError::IdentityMismatch("coverage subject ≠ Σ Q_i²".into()));
        }
        self.coverage_cert.replay()?;
        if !self.coverage_cert.certifies_empty() {
            return Err(CertError::BadEvidence("sets leave a common zero".into()));
        }
        Ok(())
    }
}

fn coverage_cert(sets: &[OpenSet]) -> Result<ZeroCert, GeometryError> {
    let qs: Vec<Poly> = sets.iter().map(|s| s.q.clone()).collect();
    match common_zeros(&qs) {
        Ok(pts) if pts.is_empty() => {}
        Ok(pts) => return Err(GeometryError::NotACover(pts[0].clone())),
        Err(e) => return Err(GeometryError::Undecidable(e.to_string())),
    }
    let subject = qs.iter().fold(Poly::zero(2), |acc, q| &acc + &(q * q));
    let decomposition = qs.into_iter().map(|q| SosTerm::new(Q::from_integer(1.into()), q)).collect();
    Ok(ZeroCert { subject, kind: ZeroCertKind::FinitePoints { points: vec![], decomposition } })
}

/// `σ⁻¹(U)` on every leaf.
pub fn pullback_openset(t: &Tower, u: &OpenSet) -> Result<Vec<OpenSet>, GeometryError> {
    check_base(t, &u.chart)?;
    t.pullback_poly(&u.q)?.into_iter().map(|(leaf, q)| OpenSet::new(&leaf, q)).collect()
}

/// The pulled-back covering on every leaf, with its coverage recertified.
pub fn pullback_covering(t: &Tower, c: &Covering) -> Result<Vec<Covering>, GeometryError> {
    check_base(t, &c.chart)?;
    let mut out = vec![];
    for leaf in t.leaves() {
        let maps = t.to_base(leaf)?;
        let qs = c.sets.iter().map(|s| s.q.compose(maps)).collect::<Result<Vec<_>, _>>()?;
        out.push(Covering::new(leaf, qs)?);
    }
    Ok(out)
}

fn check_base(t: &Tower, chart: &str) -> Result<(), GeometryError> {
    if chart != t.base_id() {
        return Err(GeometryError::UnknownChart(chart.into()));
    }
    Ok(())
}
