//! The first Cousin problem: rational parts `f_i` on the sets of a
//! covering whose differences are regular on overlaps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cech::{is_coboundary_bounded, solve_cocycle_blownup, CechError, Cochain, CocycleOutcome, Obstruction, SheafMode};
use crate::geometry::{Covering, GeometryError, OpenSet, Tower};
use crate::poly::{q, Poly, RatFunc, Q};
use crate::realzero::{certify_regular, sample_refute, CertError, Grid, RegularityCert, RegularityError};
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CousinError {
    #[error("parts {} and {} differ by a function with a pole on the overlap{}", .pair.0 + 1, .pair.1 + 1, fmt_witness(.witness))]
    InvalidData { pair: (usize, usize), witness: Option<Vec<Q>> },
    #[error("expected {expected} parts, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn fmt_witness(w: &Option<Vec<Q>>) -> String {
    match w {
        Some(p) => format!(" at ({}, {})", p[0], p[1]),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCert {
    pub i: usize,
    pub j: usize,
    pub cert: RegularityCert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CousinData {
    pub covering: Covering,
    pub parts: Vec<RatFunc>,
    /// `f_i − f_j` is regular on `U_i ∩ U_j`, for `i < j`.
    pub validity: Vec<PairCert>,
}

impl CousinData {
    pub fn new(covering: Covering, parts: Vec<RatFunc>) -> Result<Self, CousinError> {
        if parts.len() != covering.len() {
            return Err(CousinError::Shape { expected: covering.len(), got: parts.len() });
        }
        let n = parts.len();
        let mut validity = vec![];
        for i in 0..n {
            for j in i + 1..n {
                let g = &parts[i] - &parts[j];
                let qij = covering.intersection_q(&[i, j]);
                match certify_regular(&g, &qij) {
                    Ok(cert) => validity.push(PairCert { i, j, cert }),
                    Err(RegularityError::NotRegular(p)) => return Err(CousinError::InvalidData { pair: (i, j), witness: Some(p) }),
                    Err(RegularityError::Undecidable(why)) => {
                        let grid = Grid::new(q(-2), q(2), 101);
                        return Err(match sample_refute(&g, &qij, &grid) {
                            Some(p) => CousinError::InvalidData { pair: (i, j), witness: Some(p) },
                            None => CousinError::Undecidable(why),
                        });
                    }
                }
            }
        }
        Ok(CousinData { covering, parts, validity })
    }

    pub fn replay(&self) -> Result<(), CertError> {
        for pc in &self.validity {
            let g = &self.parts[pc.i] - &self.parts[pc.j];
            if pc.cert.function != g || pc.cert.open_set_q != self.covering.intersection_q(&[pc.i, pc.j]) {
                return Err(CertError::BadEvidence(format!("validity certificate for ({}, {})", pc.i + 1, pc.j + 1)));
            }
            pc.cert.replay()?;
        }
        Ok(())
    }
}

/// The obstruction cocycle `g_{ij} = f_i − f_j`.
pub fn validate(d: &CousinData) -> Result<Cochain, CousinError> {
    let g = Cochain::from_fn(&d.covering, 1, SheafMode::Regular, |t| &d.parts[t[0]] - &d.parts[t[1]])?;
    if !g.is_cocycle() {
        return Err(CousinError::Undecidable("difference cochain is not a cocycle".into()));
    }
    Ok(g)
}

/// The solution on one leaf chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafCousin {
    pub chart: String,
    pub f: RatFunc,
    /// `f − f_i` is regular on `U_i`, one certificate per set.
    pub certs: Vec<RegularityCert>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CousinSolution {
    pub tower: Tower,
    pub leaves: Vec<LeafCousin>,
}

impl CousinSolution {
    /// Checks the solution against the data, pulling the data to the
    /// tower's leaves.
    pub fn replay(&self, d: &CousinData) -> Result<(), CertError> {
        if self.leaves.len() != self.tower.leaves().len() {
            return Err(CertError::BadEvidence("one solution per leaf expected".into()));
        }
        for (leaf, sol) in self.tower.leaves().iter().zip(&self.leaves) {
            if &sol.chart != leaf || sol.certs.len() != d.parts.len() {
                return Err(CertError::BadEvidence(format!("solution shape on {leaf}")));
            }
            let maps = self.tower.to_base(leaf).map_err(|e| CertError::BadEvidence(e.to_string()))?;
            for (i, cert) in sol.certs.iter().enumerate() {
                let fi = self.tower.pullback_to(leaf, &d.parts[i]).map_err(|e| CertError::BadEvidence(e.to_string()))?;
                let qi = d.covering.q(i).compose(maps).map_err(|e| CertError::BadEvidence(e.to_string()))?;
                if cert.function != &sol.f - &fi || cert.open_set_q != qi {
                    return Err(CertError::BadEvidence(format!("certificate {} on {leaf}", i + 1)));
                }
                cert.replay()?;
            }
        }
        Ok(())
    }

    /// Pulls a solution on the base through a tower.
    pub fn pull_through(&self, d: &CousinData, t: &Tower) -> Result<CousinSolution, CousinError> {
        if self.tower.depth() != 0 {
            return Err(CousinError::Undecidable("only base solutions can be pulled".into()));
        }
        let f = &self.leaves[0].f;
        let mut leaves = vec![];
        for leaf in t.leaves() {
            let ft = t.pullback_to(leaf, f)?;
            let maps = t.to_base(leaf)?;
            let mut certs = vec![];
            for (i, fi) in d.parts.iter().enumerate() {
                let diff = &ft - &t.pullback_to(leaf, fi)?;
                let qi = d.covering.q(i).compose(maps).map_err(GeometryError::from)?;
                certs.push(certify_regular(&diff, &qi).map_err(|e| CousinError::Undecidable(e.to_string()))?);
            }
            leaves.push(LeafCousin { chart: leaf.clone(), f: ft, certs });
        }
        Ok(CousinSolution { tower: t.clone(), leaves })
    }
}

/// Solves the problem on the base when `ζ(s)` is a bounded coboundary.
pub fn solve_direct(d: &CousinData, deg: u32, power: u32) -> Result<Option<CousinSolution>, CousinError> {
    let zeta = validate(d)?;
    let Some(h) = is_coboundary_bounded(&zeta, deg, power)? else { return Ok(None) };
    // dh = ζ gives h_j − h_i = f_i − f_j, so f_i + h_i does not depend on i
    let f = &d.parts[0] + h.get(&[0]);
    for i in 1..d.parts.len() {
        if &d.parts[i] + h.get(&[i]) != f {
            return Err(CousinError::Undecidable("glued parts disagree".into()));
        }
    }
    let certs = (0..d.parts.len()).map(|i| h.certs().find(|(t, _)| **t == [i]).expect("regular").1.clone()).collect();
    let tower = Tower::new();
    let leaves = vec![LeafCousin { chart: tower.base_id().into(), f, certs }];
    Ok(Some(CousinSolution { tower, leaves }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CousinOutcome {
    Solved { zeta: Cochain, n: u32, solution: CousinSolution },
    Failed { zeta: Cochain, depth: usize, obstructions: Vec<Obstruction> },
}

/// Pulls `ζ(s)` back along a tower until it splits, then glues
/// `f = f_i + k_i` on every leaf.
pub fn solve_blownup(d: &CousinData, limits: &Limits) -> Result<CousinOutcome, CousinError> {
    let zeta = validate(d)?;
    match solve_cocycle_blownup(&zeta, limits.power, limits.depth)? {
        CocycleOutcome::Failed { depth, obstructions, .. } => Ok(CousinOutcome::Failed { zeta, depth, obstructions }),
        CocycleOutcome::Solved { tower, n, leaves } => {
            let mut out = vec![];
            for sol in leaves {
                let fs: Vec<RatFunc> = d.parts.iter().map(|p| tower.pullback_to(&sol.chart, p)).collect::<Result<_, _>>()?;
                let f = &fs[0] + sol.k.get(&[0]);
                let mut certs = vec![];
                for (i, fi) in fs.iter().enumerate() {
                    if fi + sol.k.get(&[i]) != f {
                        return Err(CousinError::Undecidable(format!("glued parts disagree on {}", sol.chart)));
                    }
                    certs.push(sol.k.certs().find(|(t, _)| **t == [i]).expect("regular").1.clone());
                }
                out.push(LeafCousin { chart: sol.chart, f, certs });
            }
            let solution = CousinSolution { tower, leaves: out };
            solution.replay(d).map_err(|e| CousinError::Undecidable(e.to_string()))?;
            Ok(CousinOutcome::Solved { zeta, n, solution })
        }
    }
}

/// `f − g` is regular on `U`.
pub fn same_principal_part(f: &RatFunc, g: &RatFunc, u: &OpenSet) -> Result<bool, CousinError> {
    match certify_regular(&(f - g), &u.q) {
        Ok(_) => Ok(true),
        Err(RegularityError::NotRegular(_)) => Ok(false),
        Err(RegularityError::Undecidable(why)) => Err(CousinError::Undecidable(why)),
    }
}

/// Instance file for the Cousin solvers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CousinInstance {
    pub covering: Vec<Poly>,
    pub parts: Vec<RatFunc>,
    #[serde(default)]
    pub limits: Limits,
}

impl CousinInstance {
    pub fn data(&self) -> Result<CousinData, CousinError> {
        let cov = Covering::new("base", self.covering.clone())?;
        CousinData::new(cov, self.parts.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::p_kl;

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
    fn cov() -> Covering {
        Covering::new("base", vec![q1(), q2()]).unwrap()
    }

    #[test]
    fn two_pole_instance_solves_directly() {
        let d = CousinData::new(cov(), vec![inv(q2()), inv(q1())]).unwrap();
        d.replay().unwrap();
        let sol = solve_direct(&d, 2, 2).unwrap().unwrap();
        assert_eq!(sol.leaves[0].f, &inv(q1()) + &inv(q2()));
        sol.replay(&d).unwrap();
    }

    #[test]
    fn invalid_data_has_witness() {
        let c = Covering::new("base", vec![y(), Poly::one(2)]).unwrap();
        let err = CousinData::new(c, vec![inv(x()), RatFunc::zero(2)]).unwrap_err();
        let CousinError::InvalidData { pair, witness: Some(w) } = err else { panic!("{err:?}") };
        assert_eq!(pair, (0, 1));
        assert!(w[0] == q(0) && w[1] != q(0));
    }

    #[test]
    fn equal_parts_give_zero_cocycle() {
        let d = CousinData::new(cov(), vec![inv(q1()), inv(q1())]);
        // 1/Q1 is not regular near c1 but the difference is zero
        let g = validate(&d.unwrap()).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn family_instance_needs_blowups() {
        let d = CousinData::new(cov(), vec![inv(p_kl(1, 1)), RatFunc::zero(2)]).unwrap();
        assert_eq!(solve_direct(&d, 3, 2).unwrap(), None);
        let limits = Limits { deg: 6, power: 4, depth: 3 };
        let CousinOutcome::Solved { solution, .. } = solve_blownup(&d, &limits).unwrap() else { panic!() };
        assert_eq!(solution.tower.depth(), 2);
        solution.replay(&d).unwrap();
    }

    #[test]
    fn principal_parts() {
        let u1 = OpenSet::new("base", q1()).unwrap();
        let u2 = OpenSet::new("base", q2()).unwrap();
        assert!(same_principal_part(&inv(q1()), &inv(q1()), &u2).unwrap());
        assert!(same_principal_part(&inv(q1()), &RatFunc::zero(2), &u1).unwrap());
        assert!(!same_principal_part(&inv(q1()), &RatFunc::zero(2), &u2).unwrap());
    }
}
