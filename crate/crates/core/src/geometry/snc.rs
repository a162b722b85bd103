//! Simple normal crossings: pointwise test, greedy resolution by point
//! blowups, and the division order of pulled-back functions.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::chart::{exceptional_form, step_map, Provenance};
use super::{GeometryError, Tower};
use crate::poly::{factor_lite, gcd, point_serde, q_serde, Poly, Q};
use crate::realzero::{common_zeros, FactorEntry, ZeroCert, ZeroCertKind, ZeroError};

/// `unit · Π f_i^{m_i}` with monic, square-free, pairwise coprime `f_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredPoly {
    #[serde(with = "q_serde")]
    pub unit: Q,
    pub factors: Vec<FactorEntry>,
}

impl FactoredPoly {
    pub fn from_poly(p: &Poly) -> Self {
        let (unit, fs) = if p.is_constant() { (p.leading_coeff(), vec![]) } else { factor_lite(p) };
        let mut out = FactoredPoly { unit, factors: vec![] };
        for (f, m) in fs {
            out.push(f, m);
        }
        out.make_coprime();
        out
    }

    /// Reads a factored-form certificate.
    pub fn from_cert(cert: &ZeroCert) -> Result<Self, GeometryError> {
        let ZeroCertKind::SmoothFactors { unit, factors } = &cert.kind else {
            return Err(GeometryError::NotFactored);
        };
        cert.replay().map_err(|e| GeometryError::Inconsistent(e.to_string()))?;
        let mut out = FactoredPoly { unit: unit.clone(), factors: vec![] };
        for e in factors {
            let lc = e.f.leading_coeff();
            out.unit *= pow_q(&lc, e.m);
            out.push(e.f.monic(), e.m);
        }
        out.make_coprime();
        Ok(out)
    }

    /// Product of several factored polynomials.
    pub fn product(parts: &[FactoredPoly]) -> Self {
        let mut out = FactoredPoly { unit: Q::one(), factors: vec![] };
        for p in parts {
            out.unit *= &p.unit;
            for e in &p.factors {
                out.push(e.f.clone(), e.m);
            }
        }
        out.make_coprime();
        out
    }

    pub fn expand(&self) -> Poly {
        self.factors.iter().fold(Poly::constant(2, self.unit.clone()), |acc, e| &acc * &e.f.pow(e.m))
    }

    fn push(&mut self, f: Poly, m: u32) {
        if f.is_constant() {
            self.unit *= pow_q(&f.leading_coeff(), m);
            return;
        }
        let lc = f.leading_coeff();
        if !lc.is_one() {
            self.unit *= pow_q(&lc, m);
        }
        let f = f.monic();
        match self.factors.iter_mut().find(|e| e.f == f) {
            Some(e) => e.m += m,
            None => self.factors.push(FactorEntry { f, m }),
        }
    }

    /// Splits factors sharing a common divisor until they are coprime.
    fn make_coprime(&mut self) {
        'outer: loop {
            for i in 0..self.factors.len() {
                for j in i + 1..self.factors.len() {
                    let g = gcd(&self.factors[i].f, &self.factors[j].f);
                    if g.is_constant() {
                        continue;
                    }
                    let b = self.factors.remove(j);
                    let a = self.factors.remove(i);
                    let qa = a.f.divide_exact(&g).expect("gcd divides");
                    let qb = b.f.divide_exact(&g).expect("gcd divides");
                    self.push(g, a.m + b.m);
                    self.push(qa, a.m);
                    self.push(qb, b.m);
                    continue 'outer;
                }
            }
            break;
        }
        self.factors.sort_by(|a, b| (a.f.total_degree(), &a.f).cmp(&(b.f.total_degree(), &b.f)));
    }

    /// Pullback through one blowup step, splitting off the exceptional
    /// curve as a factor of its own.
    pub fn pullback_step(&self, map: &[Poly; 2], exceptional: &Poly) -> Self {
        let mut out = FactoredPoly { unit: self.unit.clone(), factors: vec![] };
        for e in &self.factors {
            let g = e.f.compose(map).expect("arity 2");
            let (k, rest) = g.strip_factor(exceptional);
            if k > 0 {
                out.push(exceptional.clone(), k * e.m);
            }
            let (u, fs) = if rest.is_constant() { (rest.leading_coeff(), vec![]) } else { factor_lite(&rest) };
            out.unit *= pow_q(&u, e.m);
            for (h, m) in fs {
                out.push(h, m * e.m);
            }
        }
        out.make_coprime();
        out
    }

    pub fn as_cert(&self) -> ZeroCert {
        ZeroCert { subject: self.expand(), kind: ZeroCertKind::SmoothFactors { unit: self.unit.clone(), factors: self.factors.clone() } }
    }
}

fn pow_q(c: &Q, m: u32) -> Q {
    (0..m).fold(Q::one(), |acc, _| acc * c)
}

/// `p = Π coords_i^{alpha_i} · unit` near `point`, with `unit(point) ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SncDecomposition {
    #[serde(with = "point_serde")]
    pub point: Vec<Q>,
    pub coords: Vec<Poly>,
    pub alpha: Vec<u32>,
    pub unit: Poly,
}

impl SncDecomposition {
    /// Exact replay against the expanded polynomial.
    pub fn replay(&self, p: &Poly) -> bool {
        let prod = self.coords.iter().zip(&self.alpha).fold(self.unit.clone(), |acc, (c, a)| &acc * &c.pow(*a));
        let transverse = match self.coords.len() {
            0 => true,
            1 => !gradient(&self.coords[0], &self.point).iter().all(Q::is_zero),
            2 => {
                let g1 = gradient(&self.coords[0], &self.point);
                let g2 = gradient(&self.coords[1], &self.point);
                !(&g1[0] * &g2[1] - &g1[1] * &g2[0]).is_zero()
            }
            _ => false,
        };
        prod == *p && transverse && !self.unit.eval(&self.point).is_zero() && self.coords.iter().all(|c| c.eval(&self.point).is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SncOutcome {
    Unit,
    Snc(SncDecomposition),
    NotSnc { reason: String },
}

fn gradient(f: &Poly, a: &[Q]) -> [Q; 2] {
    [f.derivative(0).eval(a), f.derivative(1).eval(a)]
}

/// Tests the normal-crossing condition of a factored polynomial at `a`.
pub fn snc_at_point(p: &FactoredPoly, a: &[Q]) -> SncOutcome {
    let vanishing: Vec<&FactorEntry> = p.factors.iter().filter(|e| e.f.eval(a).is_zero()).collect();
    if vanishing.is_empty() {
        return SncOutcome::Unit;
    }
    if vanishing.len() > 2 {
        return SncOutcome::NotSnc { reason: format!("{} factors vanish", vanishing.len()) };
    }
    let grads: Vec<[Q; 2]> = vanishing.iter().map(|e| gradient(&e.f, a)).collect();
    if let Some(e) = vanishing.iter().zip(&grads).find(|(_, g)| g.iter().all(Q::is_zero)).map(|(e, _)| e) {
        return SncOutcome::NotSnc { reason: format!("factor {} is singular", e.f) };
    }
    if grads.len() == 2 && (&grads[0][0] * &grads[1][1] - &grads[0][1] * &grads[1][0]).is_zero() {
        return SncOutcome::NotSnc { reason: "gradients are dependent".into() };
    }
    let unit = p.factors.iter().filter(|e| !e.f.eval(a).is_zero()).fold(Poly::constant(2, p.unit.clone()), |acc, e| &acc * &e.f.pow(e.m));
    SncOutcome::Snc(SncDecomposition {
        point: a.to_vec(),
        coords: vanishing.iter().map(|e| e.f.clone()).collect(),
        alpha: vanishing.iter().map(|e| e.m).collect(),
        unit,
    })
}

/// Pairwise intersections of factors and singular points of each factor.
pub fn critical_points(p: &FactoredPoly) -> Result<Vec<Vec<Q>>, GeometryError> {
    let mut pts = vec![];
    let fs: Vec<&Poly> = p.factors.iter().map(|e| &e.f).collect();
    for (i, f) in fs.iter().enumerate() {
        pts.extend(zeros(&[(*f).clone(), f.derivative(0), f.derivative(1)])?);
        for g in &fs[i + 1..] {
            pts.extend(zeros(&[(*f).clone(), (*g).clone()])?);
        }
    }
    pts.sort();
    pts.dedup();
    Ok(pts)
}

fn zeros(fs: &[Poly]) -> Result<Vec<Vec<Q>>, GeometryError> {
    common_zeros(fs).map_err(|e| match e {
        ZeroError::NonRationalZeros { eliminant } => GeometryError::NonRationalCritical(eliminant),
        e => GeometryError::Undecidable(e.to_string()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointReport {
    #[serde(with = "point_serde")]
    pub point: Vec<Q>,
    pub outcome: SncOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafReport {
    pub chart: String,
    pub factored: FactoredPoly,
    pub points: Vec<PointReport>,
}

impl LeafReport {
    fn build(chart: &str, fp: &FactoredPoly) -> Result<Self, GeometryError> {
        let points = critical_points(fp)?.into_iter().map(|a| PointReport { outcome: snc_at_point(fp, &a), point: a }).collect();
        Ok(LeafReport { chart: chart.into(), factored: fp.clone(), points })
    }

    fn bad_points(&self) -> impl Iterator<Item = &Vec<Q>> {
        self.points.iter().filter(|r| matches!(r.outcome, SncOutcome::NotSnc { .. })).map(|r| &r.point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SncResult {
    Resolved { tower: Tower, leaves: Vec<LeafReport> },
    DepthExceeded { tower: Tower, leaves: Vec<LeafReport> },
}

impl SncResult {
    pub fn tower(&self) -> &Tower {
        match self {
            SncResult::Resolved { tower, .. } | SncResult::DepthExceeded { tower, .. } => tower,
        }
    }

    pub fn leaves(&self) -> &[LeafReport] {
        match self {
            SncResult::Resolved { leaves, .. } | SncResult::DepthExceeded { leaves, .. } => leaves,
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, SncResult::Resolved { .. })
    }
}

/// Blows up non-SNC critical points until every leaf is SNC.
pub fn transform_to_snc(p: &Poly, max_depth: usize) -> Result<SncResult, GeometryError> {
    if p.is_zero() || p.nvars() != 2 {
        return Err(GeometryError::Malformed("need a nonzero bivariate polynomial".into()));
    }
    resolve_factored(FactoredPoly::from_poly(p), max_depth)
}

/// As [`transform_to_snc`], starting from a factored base polynomial.
pub fn resolve_factored(base: FactoredPoly, max_depth: usize) -> Result<SncResult, GeometryError> {
    let mut tower = Tower::new();
    let mut factored = BTreeMap::from([(tower.base_id().to_string(), base)]);
    let mut reports: BTreeMap<String, LeafReport> = BTreeMap::new();
    loop {
        for leaf in tower.leaves() {
            if !reports.contains_key(leaf) {
                reports.insert(leaf.clone(), LeafReport::build(leaf, &factored[leaf])?);
            }
        }
        let leaves: Vec<LeafReport> = tower.leaves().iter().map(|l| reports[l].clone()).collect();
        // lowest multiplicity first, then coordinates, then leaf order
        let mut best: Option<(u32, Vec<Q>, usize)> = None;
        for (i, rep) in leaves.iter().enumerate() {
            for a in rep.bad_points() {
                let mult: u32 = rep.factored.factors.iter().map(|e| e.m * e.f.multiplicity_at(a)).sum();
                let key = (mult, a.clone(), i);
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, center, i)) = best else {
            return Ok(SncResult::Resolved { tower, leaves });
        };
        if tower.depth() >= max_depth {
            return Ok(SncResult::DepthExceeded { tower, leaves });
        }
        let leaf = tower.leaves()[i].clone();
        tower = tower.blowup_at(&leaf, &center)?;
        for l in tower.leaves() {
            if factored.contains_key(l) {
                continue;
            }
            let Provenance::Blowup { parent, center, which, .. } = &tower.chart(l)?.provenance else {
                unreachable!("new leaves come from blowups")
            };
            let fp = factored[parent].pullback_step(&step_map(center, *which), &exceptional_form(center, *which));
            factored.insert(l.clone(), fp);
        }
    }
}

/// Exponents of each pulled-back function along the local coordinates at
/// one critical point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chart: String,
    #[serde(with = "point_serde")]
    pub point: Vec<Q>,
    pub coords: Vec<Poly>,
    pub exponents: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OrderResult {
    Ordered { tower: Tower, chains: Vec<ChainReport> },
    DepthExceeded { tower: Tower },
}

/// Makes `fs` linearly ordered by division after blowing up, by resolving
/// `Π f_i · Π_{i<j} (f_i − f_j)`.
pub fn order_by_division(fs: &[Poly], max_depth: usize) -> Result<OrderResult, GeometryError> {
    let mut parts = vec![];
    for (i, f) in fs.iter().enumerate() {
        if f.is_zero() || f.nvars() != 2 {
            return Err(GeometryError::Malformed(format!("function {i} must be a nonzero bivariate polynomial")));
        }
        parts.push(FactoredPoly::from_poly(f));
        for (j, g) in fs.iter().enumerate().skip(i + 1) {
            let d = f - g;
            if d.is_zero() {
                return Err(GeometryError::Malformed(format!("functions {i} and {j} coincide")));
            }
            parts.push(FactoredPoly::from_poly(&d));
        }
    }
    let res = resolve_factored(FactoredPoly::product(&parts), max_depth)?;
    let SncResult::Resolved { tower, leaves } = res else {
        return Ok(OrderResult::DepthExceeded { tower: res.tower().clone() });
    };
    let mut chains = vec![];
    for rep in &leaves {
        let pulled: Vec<Poly> =
            fs.iter().map(|f| f.compose(tower.to_base(&rep.chart)?).map_err(Into::into)).collect::<Result<_, GeometryError>>()?;
        for pr in &rep.points {
            let SncOutcome::Snc(dec) = &pr.outcome else { continue };
            let exponents = pulled.iter().map(|g| local_exponents(g, &dec.coords, &pr.point)).collect::<Result<Vec<_>, _>>()?;
            if !is_chain(&exponents) {
                return Err(GeometryError::ChainViolation(format!("{} at {:?}: {exponents:?}", rep.chart, pr.point)));
            }
            chains.push(ChainReport { chart: rep.chart.clone(), point: pr.point.clone(), coords: dec.coords.clone(), exponents });
        }
    }
    Ok(OrderResult::Ordered { tower, chains })
}

fn local_exponents(g: &Poly, coords: &[Poly], a: &[Q]) -> Result<Vec<u32>, GeometryError> {
    let mut rest = g.clone();
    let mut out = vec![];
    for c in coords {
        let (k, r) = rest.strip_factor(c);
        out.push(k);
        rest = r;
    }
    if rest.eval(a).is_zero() {
        return Err(GeometryError::Inconsistent(format!("{g} is not a monomial in the local coordinates")));
    }
    Ok(out)
}

/// Componentwise order is total on the given vectors.
pub fn is_chain(vs: &[Vec<u32>]) -> bool {
    let le = |a: &Vec<u32>, b: &Vec<u32>| a.iter().zip(b).all(|(x, y)| x <= y);
    vs.iter().all(|a| vs.iter().all(|b| le(a, b) || le(b, a)))
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
    fn origin() -> Vec<Q> {
        vec![q(0), q(0)]
    }

    fn depth_of(p: &Poly) -> usize {
        let res = transform_to_snc(p, 6).unwrap();
        assert!(res.is_resolved());
        for rep in res.leaves() {
            let expanded = rep.factored.expand();
            for pr in &rep.points {
                let SncOutcome::Snc(d) = &pr.outcome else { panic!("{:?}", pr.outcome) };
                assert!(d.replay(&expanded));
            }
        }
        res.tower().depth()
    }

    #[test]
    fn pointwise_examples() {
        let r2 = x().pow(2);
        let one_s2 = &Poly::one(2) + &y().pow(2);
        let fp = FactoredPoly::from_poly(&(&r2 * &one_s2));
        let SncOutcome::Snc(d) = snc_at_point(&fp, &origin()) else { panic!() };
        assert_eq!(d.alpha, vec![2]);
        assert_eq!(d.coords, vec![x()]);
        let cusp = FactoredPoly::from_poly(&(&r2 * &(&y().pow(2) - &x())));
        assert!(matches!(snc_at_point(&cusp, &origin()), SncOutcome::NotSnc { .. }));
        let circle = FactoredPoly::from_poly(&(&x().pow(2) + &y().pow(2)));
        assert!(matches!(snc_at_point(&circle, &origin()), SncOutcome::NotSnc { .. }));
        assert_eq!(snc_at_point(&circle, &[q(1), q(0)]), SncOutcome::Unit);
    }

    #[test]
    fn resolution_depths() {
        assert_eq!(depth_of(&(&x().pow(2) + &y().pow(2))), 1);
        assert_eq!(depth_of(&(&y().pow(2) - &x().pow(3))), 3);
        assert_eq!(depth_of(&x()), 0);
        assert_eq!(depth_of(&(&y() - &x().pow(2))), 0);
    }

    #[test]
    fn depth_limit_reported() {
        let res = transform_to_snc(&(&y().pow(2) - &x().pow(3)), 1).unwrap();
        assert!(!res.is_resolved());
        assert_eq!(res.tower().depth(), 1);
    }

    #[test]
    fn pullback_tracks_exceptional_factor() {
        let fp = FactoredPoly::from_poly(&(&y().pow(2) - &x().pow(3)));
        let c = origin();
        let pb = fp.pullback_step(&step_map(&c, super::super::Which::One), &exceptional_form(&c, super::super::Which::One));
        // r^2 (s^2 - r)
        assert_eq!(pb.expand(), &x().pow(2) * &(&y().pow(2) - &x()));
        assert!(pb.factors.iter().any(|e| e.f == x() && e.m == 2));
    }

    #[test]
    fn division_order_of_axes() {
        let OrderResult::Ordered { tower, chains } = order_by_division(&[x(), y()], 3).unwrap() else { panic!() };
        assert_eq!(tower.depth(), 1);
        assert!(!chains.is_empty());
        assert!(chains.iter().all(|c| is_chain(&c.exponents)));
        let OrderResult::Ordered { tower, .. } = order_by_division(&[x(), x().pow(2)], 3).unwrap() else { panic!() };
        assert_eq!(tower.depth(), 0);
        assert!(order_by_division(&[x(), x()], 3).is_err());
    }

    #[test]
    fn axes_and_a_tangent_parabola() {
        // x − y² is tangent to the y-axis, so three blowups are needed
        let fs = [x(), y(), &x() - &y().pow(2)];
        let OrderResult::Ordered { tower, chains } = order_by_division(&fs, 3).unwrap() else { panic!() };
        assert_eq!(tower.depth(), 3);
        assert!(chains.iter().all(|c| is_chain(&c.exponents)));
        assert!(matches!(order_by_division(&fs, 2).unwrap(), OrderResult::DepthExceeded { .. }));
    }

    #[test]
    fn chain_test() {
        assert!(is_chain(&[vec![1, 0], vec![1, 1], vec![2, 1]]));
        assert!(!is_chain(&[vec![1, 0], vec![0, 1]]));
    }
}
