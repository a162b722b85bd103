//! Common refinements of towers and sections over the limit of towers.

use serde::{Deserialize, Serialize};

use super::tower::eval_pair;
use super::{GeometryError, Tower};
use crate::poly::{gcd, Poly, RatFunc, Q};
use crate::realzero::{certify_regular, common_zeros, RegularityCert};

/// A map from one leaf of a refinement to leaves of a coarser tower, as
/// rational chart transitions whose regular loci cover the leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafMap {
    pub leaf: String,
    pub pieces: Vec<(String, [RatFunc; 2])>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub tower: Tower,
    pub to_a: Vec<LeafMap>,
    pub to_b: Vec<LeafMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RefineResult {
    Refinement(Refinement),
    Incomparable { reason: String },
}

/// Replays the centers of `b` on top of `a`.
pub fn common_refinement(a: &Tower, b: &Tower) -> Result<RefineResult, GeometryError> {
    let mut c = a.clone();
    let mut seen_group = None;
    for step in b.steps() {
        // one geometric blowup may be recorded in several charts
        if step.group.is_some() && step.group == seen_group {
            continue;
        }
        seen_group = step.group;
        match lift(&c, b, &step.chart, &step.center)? {
            Lift::Point(leaf, p) => c = c.blowup_at(&leaf, &p)?,
            Lift::AlreadyBlownUp => {}
            Lift::Fails(reason) => return Ok(RefineResult::Incomparable { reason }),
        }
    }
    let to_a = leaf_maps(&c, a)?;
    let to_b = leaf_maps(&c, b)?;
    Ok(RefineResult::Refinement(Refinement { tower: c, to_a, to_b }))
}

enum Lift {
    Point(String, Vec<Q>),
    AlreadyBlownUp,
    Fails(String),
}

/// Finds the point `p` of chart `chart` of `b` among the leaves of `c`.
fn lift(c: &Tower, b: &Tower, chart: &str, p: &[Q]) -> Result<Lift, GeometryError> {
    let b_down: Vec<RatFunc> = b.to_base(chart)?.iter().cloned().map(RatFunc::from_poly).collect();
    let b_up = b.from_base(chart)?;
    for leaf in c.leaves() {
        let fwd = [c.from_base(leaf)?[0].substitute(&b_down)?, c.from_base(leaf)?[1].substitute(&b_down)?];
        let Some(img) = eval_pair(&fwd, p) else { continue };
        let c_down: Vec<RatFunc> = c.to_base(leaf)?.iter().cloned().map(RatFunc::from_poly).collect();
        let back = [b_up[0].substitute(&c_down)?, b_up[1].substitute(&c_down)?];
        if eval_pair(&back, &img).as_deref() == Some(p) {
            return Ok(Lift::Point(leaf.clone(), img));
        }
    }
    // the point may already be replaced by a curve in c
    for leaf in c.leaves() {
        let c_down: Vec<RatFunc> = c.to_base(leaf)?.iter().cloned().map(RatFunc::from_poly).collect();
        let back = [b_up[0].substitute(&c_down)?, b_up[1].substitute(&c_down)?];
        let eqs: Vec<Poly> = back.iter().zip(p).map(|(g, pi)| g.num() - &g.den().scale(pi)).collect();
        let h = gcd(&eqs[0], &eqs[1]);
        if !h.is_constant() && !eqs[0].is_zero() {
            return Ok(Lift::AlreadyBlownUp);
        }
    }
    Ok(Lift::Fails(format!("center {p:?} of chart {chart} does not lift to a single rational point")))
}

fn leaf_maps(c: &Tower, target: &Tower) -> Result<Vec<LeafMap>, GeometryError> {
    let mut out = vec![];
    for leaf in c.leaves() {
        let down: Vec<RatFunc> = c.to_base(leaf)?.iter().cloned().map(RatFunc::from_poly).collect();
        let mut pieces = vec![];
        for t in target.leaves() {
            let up = target.from_base(t)?;
            let (Ok(m0), Ok(m1)) = (up[0].substitute(&down), up[1].substitute(&down)) else { continue };
            let polynomial = m0.is_polynomial() && m1.is_polynomial();
            pieces.push((t.clone(), [m0, m1]));
            if polynomial {
                pieces = vec![pieces.pop().expect("just pushed")];
                break;
            }
        }
        verify_leaf_map(c, target, leaf, &pieces)?;
        out.push(LeafMap { leaf: leaf.clone(), pieces });
    }
    Ok(out)
}

/// Each piece composes to the base map of the leaf, and the pieces'
/// denominators have no common real zero.
fn verify_leaf_map(c: &Tower, target: &Tower, leaf: &str, pieces: &[(String, [RatFunc; 2])]) -> Result<(), GeometryError> {
    let base = c.to_base(leaf)?;
    let mut dens = vec![];
    for (t, m) in pieces {
        let via = target.to_base(t)?;
        for (i, v) in via.iter().enumerate() {
            let composed = RatFunc::from_poly(v.clone()).substitute(m)?;
            if composed != RatFunc::from_poly(base[i].clone()) {
                return Err(GeometryError::Inconsistent(format!("map {leaf} → {t} does not commute with the base maps")));
            }
        }
        dens.push(m[0].den() * m[1].den());
    }
    match common_zeros(&dens) {
        Ok(pts) if pts.is_empty() => Ok(()),
        Ok(pts) => Err(GeometryError::Inconsistent(format!("leaf {leaf} not covered near {:?}", pts[0]))),
        Err(e) => Err(GeometryError::Undecidable(e.to_string())),
    }
}

impl Refinement {
    /// Pulls per-leaf values on the coarser tower to the refinement.
    pub fn pull(&self, maps: &[LeafMap], values: &[(String, RatFunc)]) -> Result<Vec<(String, RatFunc)>, GeometryError> {
        let mut out = vec![];
        for lm in maps {
            let (t, m) = lm.pieces.first().ok_or_else(|| GeometryError::Inconsistent(format!("{} has no map", lm.leaf)))?;
            let v = values.iter().find(|(l, _)| l == t).map(|(_, v)| v).ok_or_else(|| GeometryError::UnknownChart(t.clone()))?;
            out.push((lm.leaf.clone(), v.substitute(m)?));
        }
        Ok(out)
    }
}

/// A section over the pulled-back open set of a tower, one value per leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSection {
    pub tower: Tower,
    /// The base open set is the complement of `V(open_q)`.
    pub open_q: Poly,
    pub values: Vec<(String, RatFunc)>,
    pub certs: Vec<RegularityCert>,
}

impl LimitSection {
    pub fn new(tower: Tower, open_q: Poly, values: Vec<(String, RatFunc)>) -> Result<Self, GeometryError> {
        if values.iter().map(|(l, _)| l).ne(tower.leaves().iter()) {
            return Err(GeometryError::Malformed("one value per leaf, in leaf order".into()));
        }
        let mut certs = vec![];
        for (leaf, v) in &values {
            let q = open_q.compose(tower.to_base(leaf)?)?;
            certs.push(certify_regular(v, &q).map_err(|e| GeometryError::Undecidable(e.to_string()))?);
        }
        let s = LimitSection { tower, open_q, values, certs };
        s.check_overlaps()?;
        Ok(s)
    }

    /// The section `f` on the base, pulled to every leaf of `tower`.
    pub fn pulled(f: &RatFunc, open_q: &Poly, tower: &Tower) -> Result<Self, GeometryError> {
        let values = tower.pullback_function(f)?;
        LimitSection::new(tower.clone(), open_q.clone(), values)
    }

    /// Values agree under every chart transition.
    pub fn check_overlaps(&self) -> Result<(), GeometryError> {
        for (i, (a, va)) in self.values.iter().enumerate() {
            for (b, vb) in &self.values[i + 1..] {
                let tr = self.tower.transition(a, b)?;
                if vb.substitute(&tr)? != *va {
                    return Err(GeometryError::Inconsistent(format!("values on {a} and {b} disagree")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum LimitEq {
    Equal,
    NotEqual { leaf: String },
    Incomparable { reason: String },
}

/// Compares two sections on a common refinement of their towers.
pub fn limit_eq(s: &LimitSection, t: &LimitSection) -> Result<LimitEq, GeometryError> {
    if s.open_q != t.open_q {
        return Err(GeometryError::Malformed("sections live on different open sets".into()));
    }
    let r = match common_refinement(&s.tower, &t.tower)? {
        RefineResult::Refinement(r) => r,
        RefineResult::Incomparable { reason } => return Ok(LimitEq::Incomparable { reason }),
    };
    let sv = r.pull(&r.to_a, &s.values)?;
    let tv = r.pull(&r.to_b, &t.values)?;
    for ((leaf, a), (_, b)) in sv.iter().zip(&tv) {
        if a != b {
            return Ok(LimitEq::NotEqual { leaf: leaf.clone() });
        }
    }
    Ok(LimitEq::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn origin() -> Vec<Q> {
        vec![q(0), q(0)]
    }
    fn c2() -> Vec<Q> {
        vec![q(1), q(0)]
    }
    fn refine(a: &Tower, b: &Tower) -> Refinement {
        match common_refinement(a, b).unwrap() {
            RefineResult::Refinement(r) => r,
            RefineResult::Incomparable { reason } => panic!("{reason}"),
        }
    }

    #[test]
    fn disjoint_centers_refine_to_both() {
        let a = Tower::new().blowup_at("base", &origin()).unwrap();
        let b = Tower::new().blowup_at("base", &c2()).unwrap();
        let r = refine(&a, &b);
        assert_eq!(r.tower.depth(), 2);
        assert!(r.to_a.iter().all(|m| m.pieces.len() == 1));
    }

    #[test]
    fn same_tower_is_its_own_refinement() {
        let a = Tower::new().blowup_at("base", &origin()).unwrap();
        let r = refine(&a, &a);
        assert_eq!(r.tower, a);
        for m in &r.to_a {
            assert_eq!(m.pieces[0].0, m.leaf);
        }
    }

    #[test]
    fn deeper_tower_absorbs_shallower() {
        let a = Tower::new().blowup_at("base", &origin()).unwrap();
        let b = a.blowup_at("base.1", &c2()).unwrap();
        let r = refine(&a, &b);
        assert_eq!(r.tower, b);
    }

    #[test]
    fn limit_equality() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let q1 = &x.pow(2) + &y.pow(2);
        let f = RatFunc::new(Poly::one(2), q1.clone()).unwrap();
        let t0 = Tower::new();
        let t1 = t0.blowup_at("base", &origin()).unwrap();
        let s = LimitSection::pulled(&f, &q1, &t0).unwrap();
        let s_deep = LimitSection::pulled(&f, &q1, &t1).unwrap();
        assert_eq!(limit_eq(&s, &s_deep).unwrap(), LimitEq::Equal);
        let g = &f + &RatFunc::one(2);
        let t = LimitSection::pulled(&g, &q1, &t1).unwrap();
        assert!(matches!(limit_eq(&s, &t).unwrap(), LimitEq::NotEqual { .. }));
        let z = LimitSection::pulled(&(&f + &RatFunc::zero(2)), &q1, &t1).unwrap();
        assert_eq!(limit_eq(&s_deep, &z).unwrap(), LimitEq::Equal);
    }
}
