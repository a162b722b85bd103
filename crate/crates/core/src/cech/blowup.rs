//! Killing poles by powers of `Q` and blowups, and the resulting
//! constructive solution of 1-cocycles.

use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{pullback_cochain, CechError, Cochain, SheafMode};
use crate::geometry::Tower;
use crate::poly::{Poly, RatFunc, Q};
use crate::realzero::{is_unit, zero_points, SosTerm, UnitResult, ZeroCert, ZeroCertKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Extension {
    /// `Q^n f = g` and the denominator of `g` has no real zeros.
    Extended { n: u32, g: RatFunc, unit_cert: ZeroCert },
    /// Zeros of the denominator that no power of `Q` up to the limit removes.
    Obstructed {
        #[serde(with = "crate::poly::points_serde")]
        points: Vec<Vec<Q>>,
    },
}

fn positive_constant_cert(p: &Poly) -> ZeroCert {
    ZeroCert {
        subject: p.clone(),
        kind: ZeroCertKind::EmptyByPositivity { sos_terms: vec![], constant: p.constant_value().expect("constant") },
    }
}

/// The smallest `n ≤ nmax` for which `Q^n f` extends to a global regular
/// function.
pub fn extend_with_power(f: &RatFunc, q: &Poly, nmax: u32) -> Result<Extension, CechError> {
    let mut g = f.clone();
    let mut undecided = false;
    for n in 0..=nmax {
        if n > 0 {
            g = g.mul_poly(q);
        }
        let den = g.den();
        if den.is_constant() {
            return Ok(Extension::Extended { n, g: g.clone(), unit_cert: positive_constant_cert(den) });
        }
        match is_unit(den) {
            UnitResult::Yes(unit_cert) => return Ok(Extension::Extended { n, g: g.clone(), unit_cert }),
            UnitResult::No(_) => {}
            UnitResult::Unknown => undecided = true,
        }
    }
    match zero_points(g.den(), None) {
        Ok(cert) => Ok(Extension::Obstructed { points: cert.finite_points().expect("point list").to_vec() }),
        Err(e) if undecided => Err(CechError::Undecidable(format!("denominator {}: {e}", g.den()))),
        Err(e) => Err(CechError::Undecidable(format!("obstruction points of {}: {e}", g.den()))),
    }
}

/// The solution data on one leaf chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafSolution {
    pub chart: String,
    /// The pulled-back cocycle.
    pub cocycle: Cochain,
    /// `R = 1 / Σ Q_i^N`.
    pub r: RatFunc,
    /// `Σ Q_i^N` has no real zeros.
    pub r_cert: ZeroCert,
    /// Regular 0-cochain with `dk` equal to the cocycle.
    pub k: Cochain,
    /// `dk` minus the cocycle; identically zero.
    pub residual: Cochain,
}

/// Blowup-center candidates on one leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstruction {
    pub chart: String,
    #[serde(with = "crate::poly::points_serde")]
    pub points: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CocycleOutcome {
    Solved { tower: Tower, n: u32, leaves: Vec<LeafSolution> },
    Failed { tower: Tower, depth: usize, obstructions: Vec<Obstruction> },
}

/// Blows up until every `(Q_i Q_j)^N f_{ij}` is globally regular, then
/// assembles `k_{i₀} = R Σ_i Q_i^N f_{i i₀}` on every leaf.
pub fn solve_cocycle_blownup(f: &Cochain, nmax: u32, max_depth: usize) -> Result<CocycleOutcome, CechError> {
    if f.degree != 1 {
        return Err(CechError::Malformed(format!("expected a 1-cocycle, got degree {}", f.degree)));
    }
    if !f.is_cocycle() {
        return Err(CechError::Malformed("not a cocycle".into()));
    }
    let values = f.values().map(|(t, v)| (t.clone(), v.clone())).collect();
    let f = Cochain::new(f.covering.clone(), 1, SheafMode::Rational, values)?;
    let n_sets = f.covering.len();
    let mut tower = Tower::new();
    loop {
        let pulled = pullback_cochain(&tower, &f)?;
        let mut needed = 0;
        let mut obstructions: Vec<Obstruction> = vec![];
        let mut unit_certs: Vec<Vec<ZeroCert>> = vec![];
        for (leaf, c) in tower.leaves().iter().zip(&pulled) {
            let mut pts = vec![];
            let mut certs = vec![];
            for i in 0..n_sets {
                for j in i + 1..n_sets {
                    let qij = &c.covering.sets[i].q * &c.covering.sets[j].q;
                    match extend_with_power(c.get(&[i, j]), &qij, nmax)? {
                        Extension::Extended { n, unit_cert, .. } => {
                            needed = needed.max(n);
                            certs.push(unit_cert);
                        }
                        Extension::Obstructed { points } => pts.extend(points),
                    }
                }
            }
            unit_certs.push(certs);
            if !pts.is_empty() {
                pts.sort();
                pts.dedup();
                obstructions.push(Obstruction { chart: leaf.clone(), points: pts });
            }
        }
        if obstructions.is_empty() {
            // positivity of Σ Q_i^N needs N even
            let n = needed + needed % 2;
            let leaves = tower
                .leaves()
                .iter()
                .zip(pulled)
                .zip(&unit_certs)
                .map(|((leaf, c), u)| assemble(leaf, c, n, u))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(CocycleOutcome::Solved { tower, n, leaves });
        }
        if tower.depth() >= max_depth {
            let depth = tower.depth();
            return Ok(CocycleOutcome::Failed { tower, depth, obstructions });
        }
        let first = &obstructions[0];
        tower = tower.blowup_at(&first.chart, &first.points[0])?;
    }
}

fn assemble(leaf: &str, cocycle: Cochain, n: u32, unit_certs: &[ZeroCert]) -> Result<LeafSolution, CechError> {
    let cov = &cocycle.covering;
    let m = cov.len();
    let powers: Vec<Poly> = cov.sets.iter().map(|s| s.q.pow(n)).collect();
    let sum = powers.iter().fold(Poly::zero(2), |acc, p| &acc + p);
    let r_cert = if n == 0 {
        ZeroCert {
            subject: sum.clone(),
            kind: ZeroCertKind::EmptyByPositivity { sos_terms: vec![], constant: Q::from_integer((m as i64).into()) },
        }
    } else {
        let decomposition = cov.sets.iter().map(|s| SosTerm::new(Q::one(), s.q.pow(n / 2))).collect();
        ZeroCert { subject: sum.clone(), kind: ZeroCertKind::FinitePoints { points: vec![], decomposition } }
    };
    r_cert.replay().map_err(|e| CechError::Undecidable(format!("Σ Q_i^N on {leaf}: {e}")))?;
    let r = RatFunc::new(Poly::one(2), sum)?;
    let mut units = vec![r_cert.clone()];
    units.extend_from_slice(unit_certs);
    let mut values = BTreeMap::new();
    for i0 in 0..m {
        let mut acc = RatFunc::zero(2);
        for (i, p) in powers.iter().enumerate() {
            if i != i0 {
                acc = &acc + &cocycle.alt(i, i0).mul_poly(p);
            }
        }
        values.insert(vec![i0], &r * &acc);
    }
    let k = Cochain::with_units(cov.clone(), 0, SheafMode::Regular, values, &units)?;
    let residual = k.differential_values();
    let residual = Cochain::new(cov.clone(), 1, SheafMode::Rational, residual)?.sub(&cocycle)?;
    if !residual.is_zero() {
        return Err(CechError::Undecidable(format!("assembled cochain fails dk = f on {leaf}")));
    }
    Ok(LeafSolution { chart: leaf.into(), cocycle, r, r_cert, k, residual })
}
