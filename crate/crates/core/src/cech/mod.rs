//! Čech cochains on a finite covering of a chart.
//!
//! Index tuples are non-decreasing and 0-based in memory; JSON uses the
//! 1-based convention `1 ≤ i₀ ≤ … ≤ i_q ≤ n`.

mod blowup;
mod coboundary;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{pullback_covering, Covering, GeometryError, Tower};
use crate::poly::{PolyError, RatFunc};
use crate::realzero::{certify_regular_with, CertError, RegularityCert, RegularityError, ZeroCert};

pub use blowup::{extend_with_power, solve_cocycle_blownup, CocycleOutcome, Extension, LeafSolution, Obstruction};
pub use coboundary::is_coboundary_bounded;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CechError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("value at {tuple:?} is not regular: {reason}")]
    NotRegular { tuple: Vec<usize>, reason: String },
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("malformed cochain: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheafMode {
    /// Values are regular on their intersection and carry certificates.
    Regular,
    /// Arbitrary rational functions.
    Rational,
}

/// All non-decreasing `len`-tuples over `0..n`, in lexicographic order.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = vec![];
        for t in &out {
            let start = t.last().copied().unwrap_or(0);
            for i in start..n {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CochainJson", into = "CochainJson")]
pub struct Cochain {
    pub covering: Covering,
    pub degree: usize,
    pub mode: SheafMode,
    values: BTreeMap<Vec<usize>, RatFunc>,
    certs: BTreeMap<Vec<usize>, RegularityCert>,
}

impl Cochain {
    /// Builds a cochain from a value for every index tuple; in regular
    /// mode each value is certified on its intersection.
    pub fn from_fn<F>(covering: &Covering, degree: usize, mode: SheafMode, mut f: F) -> Result<Self, CechError>
    where
        F: FnMut(&[usize]) -> RatFunc,
    {
        let values = tuples(covering.len(), degree + 1).into_iter().map(|t| {
            let v = f(&t);
            (t, v)
        });
        Self::new(covering.clone(), degree, mode, values.collect())
    }

    pub fn new(covering: Covering, degree: usize, mode: SheafMode, values: BTreeMap<Vec<usize>, RatFunc>) -> Result<Self, CechError> {
        Self::with_units(covering, degree, mode, values, &[])
    }

    /// As [`Cochain::new`], with certificates of polynomials known to have
    /// no real zeros, used when certifying values.
    pub fn with_units(
        covering: Covering,
        degree: usize,
        mode: SheafMode,
        values: BTreeMap<Vec<usize>, RatFunc>,
        units: &[ZeroCert],
    ) -> Result<Self, CechError> {
        let expected = tuples(covering.len(), degree + 1);
        if values.len() != expected.len() || expected.iter().any(|t| !values.contains_key(t)) {
            return Err(CechError::Malformed(format!(
                "degree {degree} on {} sets needs exactly {} values",
                covering.len(),
                expected.len()
            )));
        }
        let mut certs = BTreeMap::new();
        if mode == SheafMode::Regular {
            for (t, v) in &values {
                let q = covering.intersection_q(t);
                let c =
                    certify_regular_with(v, &q, units).map_err(|e| CechError::NotRegular { tuple: t.clone(), reason: e.to_string() })?;
                certs.insert(t.clone(), c);
            }
        }
        Ok(Cochain { covering, degree, mode, values, certs })
    }

    pub fn zero(covering: &Covering, degree: usize, mode: SheafMode) -> Self {
        Self::from_fn(covering, degree, SheafMode::Rational, |_| RatFunc::zero(2))
            .map(|mut c| {
                if mode == SheafMode::Regular {
                    c = Self::new(c.covering, degree, mode, c.values).expect("zero is regular");
                }
                c
            })
            .expect("shape is right")
    }

    pub fn get(&self, t: &[usize]) -> &RatFunc {
        &self.values[t]
    }

    pub fn values(&self) -> impl Iterator<Item = (&Vec<usize>, &RatFunc)> {
        self.values.iter()
    }

    pub fn certs(&self) -> impl Iterator<Item = (&Vec<usize>, &RegularityCert)> {
        self.certs.iter()
    }

    /// Degree-1 value extended antisymmetrically: `f_{ji} = −f_{ij}`.
    pub fn alt(&self, i: usize, j: usize) -> RatFunc {
        if i <= j {
            self.values[&vec![i, j]].clone()
        } else {
            -&self.values[&vec![j, i]]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(RatFunc::is_zero)
    }

    /// `(df)_{i₀…i_{q+1}} = Σ_j (−1)^j f_{i₀…î_j…i_{q+1}}`.
    pub fn differential(&self) -> Result<Cochain, CechError> {
        let values = self.differential_values();
        Self::new(self.covering.clone(), self.degree + 1, self.mode, values)
    }

    fn differential_values(&self) -> BTreeMap<Vec<usize>, RatFunc> {
        let mut out = BTreeMap::new();
        for t in tuples(self.covering.len(), self.degree + 2) {
            let mut acc = RatFunc::zero(2);
            for j in 0..t.len() {
                let mut face = t.clone();
                face.remove(j);
                let v = &self.values[&face];
                acc = if j % 2 == 0 { &acc + v } else { &acc - v };
            }
            out.insert(t, acc);
        }
        out
    }

    pub fn is_cocycle(&self) -> bool {
        self.differential_values().values().all(RatFunc::is_zero)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain, CechError> {
        if self.degree != other.degree || self.covering != other.covering {
            return Err(CechError::Malformed("cochains live on different complexes".into()));
        }
        let values = self.values.iter().map(|(t, v)| (t.clone(), v - &other.values[t])).collect();
        Self::new(self.covering.clone(), self.degree, SheafMode::Rational, values)
    }

    /// Replays every regularity certificate against the stored values.
    pub fn replay(&self) -> Result<(), CertError> {
        if self.mode == SheafMode::Rational {
            return Ok(());
        }
        for (t, v) in &self.values {
            let c = self.certs.get(t).ok_or_else(|| CertError::BadEvidence(format!("no certificate for {t:?}")))?;
            if c.function != *v || c.open_set_q != self.covering.intersection_q(t) {
                return Err(CertError::BadEvidence(format!("certificate for {t:?} is about something else")));
            }
            c.replay()?;
        }
        Ok(())
    }
}

/// Value-wise pullback to every leaf of a tower.
pub fn pullback_cochain(t: &Tower, f: &Cochain) -> Result<Vec<Cochain>, CechError> {
    let covs = pullback_covering(t, &f.covering)?;
    let mut out = vec![];
    for (leaf, cov) in t.leaves().iter().zip(covs) {
        let mut values = BTreeMap::new();
        for (tp, v) in &f.values {
            values.insert(tp.clone(), t.pullback_to(leaf, v)?);
        }
        out.push(Cochain::new(cov, f.degree, f.mode, values)?);
    }
    Ok(out)
}

impl From<RegularityError> for CechError {
    fn from(e: RegularityError) -> Self {
        CechError::Undecidable(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CochainJson {
    covering: Covering,
    degree: usize,
    mode: SheafMode,
    values: Vec<EntryJson>,
    #[serde(default)]
    certs: Vec<CertEntryJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    idx: Vec<usize>,
    f: RatFunc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertEntryJson {
    idx: Vec<usize>,
    cert: RegularityCert,
}

fn to_zero_based(idx: &[usize]) -> Result<Vec<usize>, String> {
    idx.iter().map(|&i| i.checked_sub(1).ok_or_else(|| "indices start at 1".to_string())).collect()
}

impl TryFrom<CochainJson> for Cochain {
    type Error = String;

    fn try_from(j: CochainJson) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for e in j.values {
            values.insert(to_zero_based(&e.idx)?, e.f);
        }
        // certificates are recomputed rather than trusted
        Cochain::new(j.covering, j.degree, j.mode, values).map_err(|e| e.to_string())
    }
}

impl From<Cochain> for CochainJson {
    fn from(c: Cochain) -> Self {
        let one_based = |t: &Vec<usize>| t.iter().map(|i| i + 1).collect();
        CochainJson {
            values: c.values.iter().map(|(t, f)| EntryJson { idx: one_based(t), f: f.clone() }).collect(),
            certs: c.certs.iter().map(|(t, cert)| CertEntryJson { idx: one_based(t), cert: cert.clone() }).collect(),
            covering: c.covering,
            degree: c.degree,
            mode: c.mode,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{p_kl, q, Poly};

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }
    pub(crate) fn c1c2() -> Covering {
        Covering::new("base", vec![&x().pow(2) + &y().pow(2), &(&x() - &Poly::one(2)).pow(2) + &y().pow(2)]).unwrap()
    }
    fn rf(p: Poly) -> RatFunc {
        RatFunc::from_poly(p)
    }

    #[test]
    fn tuple_counts() {
        assert_eq!(tuples(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(tuples(3, 3).len(), 10);
    }

    #[test]
    fn differential_at_degree_zero() {
        let cov = c1c2();
        let h = Cochain::from_fn(&cov, 0, SheafMode::Regular, |t| rf(if t[0] == 0 { x() } else { y() })).unwrap();
        let dh = h.differential().unwrap();
        assert_eq!(dh.get(&[0, 1]), &rf(&y() - &x()));
        assert!(dh.get(&[0, 0]).is_zero());
        assert!(dh.differential().unwrap().is_zero());
        let c = Cochain::from_fn(&cov, 0, SheafMode::Regular, |_| rf(Poly::constant(2, q(3)))).unwrap();
        assert!(c.differential().unwrap().is_zero());
    }

    #[test]
    fn regular_mode_rejects_poles() {
        let cov = c1c2();
        let bad = RatFunc::new(Poly::one(2), p_kl(1, 1)).unwrap();
        let r = Cochain::from_fn(&cov, 0, SheafMode::Regular, |_| bad.clone());
        assert!(matches!(r, Err(CechError::NotRegular { .. })));
        let ok = Cochain::from_fn(&cov, 1, SheafMode::Regular, |t| if t == [0, 1] { bad.clone() } else { RatFunc::zero(2) });
        let ok = ok.unwrap();
        ok.replay().unwrap();
        assert!(ok.is_cocycle());
    }

    #[test]
    fn json_is_one_based() {
        let cov = c1c2();
        let h = Cochain::from_fn(&cov, 0, SheafMode::Rational, |t| rf(Poly::constant(2, q(t[0] as i64)))).unwrap();
        let js = serde_json::to_value(&h).unwrap();
        assert_eq!(js["values"][1]["idx"], serde_json::json!([2]));
        let back: Cochain = serde_json::from_value(js).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn pullback_of_family_cocycle() {
        let cov = c1c2();
        let g = RatFunc::new(Poly::one(2), p_kl(1, 1)).unwrap();
        let f = Cochain::from_fn(&cov, 1, SheafMode::Rational, |t| if t == [0, 1] { g.clone() } else { RatFunc::zero(2) }).unwrap();
        let t = Tower::new().blowup_at("base", &[q(0), q(0)]).unwrap();
        let pb = pullback_cochain(&t, &f).unwrap();
        let r = x();
        let s = y();
        let expect = RatFunc::new(Poly::one(2), &r.pow(2) * &(&(&r - &Poly::one(2)).pow(2) + &s.pow(2))).unwrap();
        assert_eq!(pb[0].get(&[0, 1]), &expect);
    }
}
