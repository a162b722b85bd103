//! Sections on blowup towers and the search for a tower on which `ξ_{k,l}`
//! becomes trivial.
//!
//! A section of `σ*b` is stored by its components in base coordinates:
//! the function fields agree, and pulling back one pair to every leaf gives
//! sections that agree on chart overlaps automatically. The bounded search
//! space is `s₁ = a/w`, `s₂ = g a/w` for a fixed denominator `w`. Regularity
//! on each leaf is the linear condition that `a∘σ` is divisible by the
//! pieces of the pulled-back denominators that have zeros inside the open
//! set.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{nowhere_vanishing, pullback_bundle, BundleError, BundleSection, LeafBundle, LineBundle, Vanishing};
use crate::geometry::Tower;
use crate::linsolve::{monomials_up_to, Rref};
use crate::poly::{factor_lite, gcd, p_kl, Monomial, Poly, RatFunc, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BadPoint {
    C1,
    C2,
}

impl BadPoint {
    pub fn coords(self) -> Vec<Q> {
        match self {
            BadPoint::C1 => vec![Q::zero(), Q::zero()],
            BadPoint::C2 => vec![Q::one(), Q::zero()],
        }
    }
}

/// `n` successive blowups at `c`, each at the lift of `c` on chart One of
/// the previous one: the towers of the closing remark of the example.
pub fn remark_tower(c: BadPoint, n: usize) -> Tower {
    let p = c.coords();
    let mut t = Tower::new();
    let mut leaf = t.base_id().to_string();
    for _ in 0..n {
        t = t.blowup_at(&leaf, &p).expect("the lift is a leaf point");
        leaf = format!("{leaf}.1");
    }
    t
}

/// A bundle pulled back to every leaf of a tower.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerBundle {
    pub tower: Tower,
    pub base: LineBundle,
    pub leaves: Vec<LeafBundle>,
}

/// A global section of `σ*b`: a base-coordinate pair together with its
/// certified pullback on every leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSection {
    pub s1: RatFunc,
    pub s2: RatFunc,
    pub leaves: Vec<BundleSection>,
}

impl TowerBundle {
    pub fn new(tower: Tower, base: LineBundle) -> Result<Self, BundleError> {
        let leaves = pullback_bundle(&tower, &base)?;
        Ok(TowerBundle { tower, base, leaves })
    }

    pub fn section(&self, s1: RatFunc) -> Result<TowerSection, BundleError> {
        let s2 = &self.base.transition * &s1;
        self.section_pair(s1, s2)
    }

    pub fn section_pair(&self, s1: RatFunc, s2: RatFunc) -> Result<TowerSection, BundleError> {
        if &self.base.transition * &s1 != s2 {
            return Err(BundleError::Identity);
        }
        let mut leaves = vec![];
        for lb in &self.leaves {
            let a = self.tower.pullback_to(&lb.chart, &s1)?;
            let b = self.tower.pullback_to(&lb.chart, &s2)?;
            leaves.push(BundleSection::new(&lb.raw, a, b)?);
        }
        Ok(TowerSection { s1, s2, leaves })
    }

    pub fn verify(&self, s: &TowerSection) -> Result<(), BundleError> {
        if &self.base.transition * &s.s1 != s.s2 || s.leaves.len() != self.leaves.len() {
            return Err(BundleError::Identity);
        }
        for (lb, ls) in self.leaves.iter().zip(&s.leaves) {
            if ls.s1 != self.tower.pullback_to(&lb.chart, &s.s1)? || ls.s2 != self.tower.pullback_to(&lb.chart, &s.s2)? {
                return Err(BundleError::Identity);
            }
            ls.verify(&lb.raw)?;
        }
        Ok(())
    }

    /// Per-leaf verdicts, in leaf order.
    pub fn nowhere_vanishing(&self, s: &TowerSection) -> Result<Vec<Vanishing>, BundleError> {
        self.leaves.iter().zip(&s.leaves).map(|(lb, ls)| nowhere_vanishing(&lb.raw, ls)).collect()
    }
}

/// Denominators for the bounded tower search: the alternative equations
/// `x^{2i}+y²`, `(x−1)^{2j}+y²` of the two open sets and `P_{k,l}`.
pub fn xi_dictionary(k: u32, l: u32) -> Vec<Poly> {
    let mut out: Vec<Poly> = vec![];
    for i in 1..=k {
        out.push(p_kl(i, 0));
    }
    for j in 1..=l {
        out.push(p_kl(0, j));
    }
    out.push(p_kl(k, l));
    let mut seen = vec![];
    out.retain(|p| {
        let fresh = !p.is_constant() && !seen.contains(p);
        seen.push(p.clone());
        fresh
    });
    out
}

/// A squarefree piece of the pulled-back denominators on one leaf.
#[derive(Debug, Clone)]
struct Piece {
    h: Poly,
    /// exponent in `s₁ = a/w` and in `s₂ = g a/w`, pulled back
    e: [i64; 2],
    /// `h^need` must divide `a∘σ`
    need: u32,
}

#[derive(Debug, Clone)]
struct LeafAnsatz {
    chart: String,
    maps: [Poly; 2],
    pieces: Vec<Piece>,
    /// constant factors of `s₁` and `s₂` not carried by the pieces
    scale: [Q; 2],
    /// candidate points with the component to evaluate there
    probes: Vec<(Vec<Q>, usize)>,
}

/// `w`-denominator section space on a tower; cached zero-set tests are
/// shared between denominators.
struct SpaceBuilder<'a> {
    tb: &'a TowerBundle,
    deg: u32,
    inside: HashMap<(String, Poly, usize), bool>,
}

impl<'a> SpaceBuilder<'a> {
    fn new(tb: &'a TowerBundle, deg: u32) -> Self {
        SpaceBuilder { tb, deg, inside: HashMap::new() }
    }

    /// `V(h) ⊆ V(Q_i)` on the leaf. Undecided counts as no: the piece is
    /// then required to cancel, which only shrinks the space.
    fn inside(&mut self, lb: &LeafBundle, h: &Poly, i: usize) -> bool {
        let key = (lb.chart.clone(), h.clone(), i);
        if let Some(v) = self.inside.get(&key) {
            return *v;
        }
        let inv = RatFunc::new(Poly::one(2), h.clone()).expect("nonzero piece");
        let v = lb.raw.certify(&inv, lb.raw.q(i)).is_ok();
        self.inside.insert(key, v);
        v
    }

    fn leaf_ansatz(&mut self, w: &Poly) -> Result<Vec<LeafAnsatz>, BundleError> {
        let g = &self.tb.base.transition;
        let mut base: Vec<(Poly, [i64; 2])> = vec![];
        let mut scale = [Q::one(), Q::one()];
        for (p, e) in [(g.num(), [0, 1]), (g.den(), [0, -1]), (w, [-1, -1])] {
            let (c, fs) = if p.is_constant() { (p.leading_coeff(), vec![]) } else { factor_lite(p) };
            for (i, s) in scale.iter_mut().enumerate() {
                *s *= pow_i(&c, e[i]);
            }
            for (f, m) in fs {
                base.push((f, [e[0] * m as i64, e[1] * m as i64]));
            }
        }
        let mut out = vec![];
        for lb in &self.tb.leaves {
            let maps = self.tb.tower.to_base(&lb.chart)?.clone();
            let mut items: Vec<(Poly, [i64; 2])> = vec![];
            let mut sc = scale.clone();
            for (f, e) in &base {
                let pulled = f.compose(&maps)?;
                let (c, fs) = if pulled.is_constant() { (pulled.leading_coeff(), vec![]) } else { factor_lite(&pulled) };
                for (i, s) in sc.iter_mut().enumerate() {
                    *s *= pow_i(&c, e[i]);
                }
                for (h, m) in fs {
                    items.push((h, [e[0] * m as i64, e[1] * m as i64]));
                }
            }
            let mut pieces = vec![];
            for (h, e) in coprime(items) {
                let mut need = 0;
                for (i, ei) in e.iter().enumerate() {
                    if *ei < 0 && !self.inside(lb, &h, i + 1) {
                        need = need.max((-ei) as u32);
                    }
                }
                pieces.push(Piece { h, e, need });
            }
            let probes = probes(&self.tb.tower, lb);
            out.push(LeafAnsatz { chart: lb.chart.clone(), maps, pieces, scale: sc, probes });
        }
        Ok(out)
    }

    /// Basis of the numerators `a`, `deg a ≤ deg`.
    fn basis(&self, leaves: &[LeafAnsatz]) -> Result<Vec<Poly>, BundleError> {
        let monos = monomials_up_to(2, self.deg);
        let mut sys = Rref::new(monos.len());
        for la in leaves {
            let pulled: Vec<Poly> =
                monos.iter().map(|m| Poly::monomial(m.clone(), Q::one()).compose(&la.maps)).collect::<Result<_, _>>()?;
            for p in la.pieces.iter().filter(|p| p.need > 0) {
                let d = p.h.pow(p.need);
                let mut rows: BTreeMap<Monomial, Vec<(usize, Q)>> = BTreeMap::new();
                for (j, a) in pulled.iter().enumerate() {
                    let (_, r) = a.div_rem(&d)?;
                    for (m, c) in r.terms() {
                        rows.entry(m.clone()).or_default().push((j, c.clone()));
                    }
                }
                for row in rows.into_values() {
                    sys.add_row(row, Q::zero());
                }
            }
        }
        Ok(sys
            .nullspace()
            .into_iter()
            .map(|v| {
                let terms = monos.iter().zip(v).map(|(m, c)| (c, m.0.clone()));
                Poly::from_terms(2, terms).expect("arity 2")
            })
            .collect())
    }
}

fn pow_i(c: &Q, e: i64) -> Q {
    let p = (0..e.unsigned_abs()).fold(Q::one(), |acc, _| acc * c);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// Refines squarefree pieces with additive exponent vectors until they are
/// pairwise coprime.
fn coprime(mut items: Vec<(Poly, [i64; 2])>) -> Vec<(Poly, [i64; 2])> {
    'outer: loop {
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i].0 == items[j].0 {
                    let (_, e) = items.remove(j);
                    items[i].1 = [items[i].1[0] + e[0], items[i].1[1] + e[1]];
                    continue 'outer;
                }
                let g = gcd(&items[i].0, &items[j].0);
                if g.is_constant() {
                    continue;
                }
                let g = g.monic();
                let (a, ea) = items[i].clone();
                let (b, eb) = items[j].clone();
                let mut next: Vec<(Poly, [i64; 2])> =
                    items.iter().enumerate().filter(|(n, _)| *n != i && *n != j).map(|(_, x)| x.clone()).collect();
                for (p, e) in [(a.divide_exact(&g).expect("gcd divides"), ea), (b.divide_exact(&g).expect("gcd divides"), eb)] {
                    if !p.is_constant() {
                        next.push((p.monic(), e));
                    }
                }
                next.push((g, [ea[0] + eb[0], ea[1] + eb[1]]));
                items = next;
                continue 'outer;
            }
        }
        break;
    }
    items.retain(|(_, e)| *e != [0, 0]);
    items.sort_by(|a, b| a.0.cmp(&b.0));
    items
}

/// The points `(0,0)` and `(1,0)` of the base and of chart-One leaves that
/// lie over a bad point, each with the component whose open set holds it.
fn probes(t: &Tower, lb: &LeafBundle) -> Vec<(Vec<Q>, usize)> {
    if lb.chart != t.base_id() && !lb.chart.ends_with(".1") {
        return vec![];
    }
    let maps = t.to_base(&lb.chart).expect("leaf");
    let bad = [BadPoint::C1.coords(), BadPoint::C2.coords()];
    let mut out = vec![];
    for p in bad.iter() {
        let image = vec![maps[0].eval(p), maps[1].eval(p)];
        if bad.contains(&image) {
            let i = if lb.raw.q(2).eval(p).is_zero() { 1 } else { 2 };
            out.push((p.clone(), i));
        }
    }
    out
}

impl LeafAnsatz {
    /// `s_i∘σ` at the probe `p` for the numerator `a`, assuming `a`
    /// satisfies the divisibility constraints.
    fn value(&self, a: &Poly, p: &[Q], i: usize) -> Result<Q, BundleError> {
        let mut b = a.compose(&self.maps)?;
        for piece in self.pieces.iter().filter(|x| x.need > 0) {
            b = b.divide_exact(&piece.h.pow(piece.need))?;
        }
        let mut v = &b.eval(p) * &self.scale[i - 1];
        for piece in &self.pieces {
            let e = piece.e[i - 1] + piece.need as i64;
            v *= pow_i(&piece.h.eval(p), e);
        }
        Ok(v)
    }

    fn admits(&self, a: &Poly) -> Result<bool, BundleError> {
        let b = a.compose(&self.maps)?;
        for piece in self.pieces.iter().filter(|x| x.need > 0) {
            if !b.div_rem(&piece.h.pow(piece.need))?.1.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceOutcome {
    /// Only the zero section.
    Empty,
    /// Every basis element vanishes at `point` of `chart`, inside
    /// `U_component`; no element vanishes nowhere.
    CommonZero {
        chart: String,
        #[serde(with = "crate::poly::point_serde")]
        point: Vec<Q>,
        component: usize,
    },
    /// A nowhere-vanishing element was found.
    Section,
    /// Neither a common zero nor a nowhere-vanishing element was found.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub denominator: Poly,
    pub dim: usize,
    pub outcome: SpaceOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerReport {
    pub tower: Tower,
    pub spaces: Vec<SpaceReport>,
}

impl TowerReport {
    /// Every space was shown to contain no nowhere-vanishing section.
    pub fn exhausted(&self) -> bool {
        self.spaces.iter().all(|s| matches!(s.outcome, SpaceOutcome::Empty | SpaceOutcome::CommonZero { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
#[allow(clippy::large_enum_variant)]
pub enum SearchOutcome {
    Found {
        k: u32,
        l: u32,
        depth: usize,
        tower: Tower,
        denominator: Poly,
        section: TowerSection,
        certs: Vec<Vanishing>,
        examined: Vec<TowerReport>,
    },
    NotFoundWithin {
        k: u32,
        l: u32,
        max_depth: usize,
        /// Every examined space carries an emptiness or common-zero proof.
        certified: bool,
        examined: Vec<TowerReport>,
    },
}

impl SearchOutcome {
    pub fn depth(&self) -> Option<usize> {
        match self {
            SearchOutcome::Found { depth, .. } => Some(*depth),
            SearchOutcome::NotFoundWithin { .. } => None,
        }
    }

    pub fn examined(&self) -> &[TowerReport] {
        match self {
            SearchOutcome::Found { examined, .. } | SearchOutcome::NotFoundWithin { examined, .. } => examined,
        }
    }
}

struct Found {
    denominator: Poly,
    section: TowerSection,
    certs: Vec<Vanishing>,
}

/// Tests `a/w` for nowhere vanishing, cheaply at the probes first.
fn try_numerator(tb: &TowerBundle, leaves: &[LeafAnsatz], a: &Poly, w: &Poly) -> Result<Option<Found>, BundleError> {
    for la in leaves {
        for (p, i) in &la.probes {
            if la.value(a, p, *i)?.is_zero() {
                return Ok(None);
            }
        }
    }
    let section = tb.section(RatFunc::new(a.clone(), w.clone())?)?;
    let certs = tb.nowhere_vanishing(&section)?;
    if certs.iter().all(Vanishing::is_yes) {
        return Ok(Some(Found { denominator: w.clone(), section, certs }));
    }
    Ok(None)
}

fn examine(tb: &TowerBundle, dict: &[Poly], deg: u32, power: u32) -> Result<(TowerReport, Option<Found>), BundleError> {
    let mut builder = SpaceBuilder::new(tb, deg);
    let mut dens = vec![Poly::one(2)];
    for w in dict {
        for m in 1..=power {
            dens.push(w.pow(m));
        }
    }
    let mut guesses = vec![Poly::one(2)];
    for w in dict {
        let mut p = w.clone();
        while p.total_degree() <= deg {
            guesses.push(p.clone());
            p = &p * w;
        }
    }
    let mut spaces = vec![];
    for w in dens {
        let leaves = builder.leaf_ansatz(&w)?;
        for a in &guesses {
            if leaves.iter().all(|la| la.admits(a).unwrap_or(false)) {
                if let Some(f) = try_numerator(tb, &leaves, a, &w)? {
                    let dim = builder.basis(&leaves)?.len();
                    spaces.push(SpaceReport { denominator: w, dim, outcome: SpaceOutcome::Section });
                    return Ok((TowerReport { tower: tb.tower.clone(), spaces }, Some(f)));
                }
            }
        }
        let basis = builder.basis(&leaves)?;
        let dim = basis.len();
        if basis.is_empty() {
            spaces.push(SpaceReport { denominator: w, dim, outcome: SpaceOutcome::Empty });
            continue;
        }
        let mut zero = None;
        'probe: for la in &leaves {
            for (p, i) in &la.probes {
                let mut all = true;
                for a in &basis {
                    if !la.value(a, p, *i)?.is_zero() {
                        all = false;
                        break;
                    }
                }
                if all {
                    zero = Some(SpaceOutcome::CommonZero { chart: la.chart.clone(), point: p.clone(), component: *i });
                    break 'probe;
                }
            }
        }
        if let Some(outcome) = zero {
            spaces.push(SpaceReport { denominator: w, dim, outcome });
            continue;
        }
        for a in &basis {
            if let Some(f) = try_numerator(tb, &leaves, a, &w)? {
                spaces.push(SpaceReport { denominator: w, dim, outcome: SpaceOutcome::Section });
                return Ok((TowerReport { tower: tb.tower.clone(), spaces }, Some(f)));
            }
        }
        spaces.push(SpaceReport { denominator: w, dim, outcome: SpaceOutcome::Undecided });
    }
    Ok((TowerReport { tower: tb.tower.clone(), spaces }, None))
}

/// Blowups at `c₁`, `c₂` and their lifts `(0,0)`, `(1,0)` on the base and
/// chart-One leaves.
fn children(t: &Tower) -> Result<Vec<Tower>, BundleError> {
    let bad = [BadPoint::C1.coords(), BadPoint::C2.coords()];
    let mut out = vec![];
    for leaf in t.leaves() {
        if leaf != t.base_id() && !leaf.ends_with(".1") {
            continue;
        }
        let maps = t.to_base(leaf)?;
        for p in &bad {
            let image = vec![maps[0].eval(p), maps[1].eval(p)];
            if bad.contains(&image) {
                out.push(t.blowup_at(leaf, p)?);
            }
        }
    }
    Ok(out)
}

/// Identifies towers that differ only in the order of independent
/// blowups: the multiset of (base image, infinitely-near level) of the
/// centers.
fn tower_key(t: &Tower) -> Result<Vec<(Vec<Q>, usize)>, BundleError> {
    let mut seen_groups = vec![];
    let mut images: Vec<Vec<Q>> = vec![];
    let mut key = vec![];
    for s in t.steps() {
        if s.group.is_some() && seen_groups.contains(&s.group) {
            continue;
        }
        seen_groups.push(s.group);
        let maps = t.to_base(&s.chart)?;
        let image = vec![maps[0].eval(&s.center), maps[1].eval(&s.center)];
        let level = images.iter().filter(|i| **i == image).count();
        images.push(image.clone());
        key.push((image, level));
    }
    key.sort();
    Ok(key)
}

/// Breadth-first search for the shallowest tower, with centers over
/// `c₁, c₂`, on which `ξ_{k,l}` has a nowhere-vanishing bounded section.
pub fn search_trivializing_tower(k: u32, l: u32, max_depth: usize, deg: u32, power: u32) -> Result<SearchOutcome, BundleError> {
    let b = super::make_xi(k, l);
    let dict = xi_dictionary(k, l);
    let mut level = vec![Tower::new()];
    let mut examined = vec![];
    for depth in 0..=max_depth {
        for t in &level {
            let tb = TowerBundle::new(t.clone(), b.clone())?;
            let (report, found) = examine(&tb, &dict, deg, power)?;
            examined.push(report);
            if let Some(f) = found {
                return Ok(SearchOutcome::Found {
                    k,
                    l,
                    depth,
                    tower: t.clone(),
                    denominator: f.denominator,
                    section: f.section,
                    certs: f.certs,
                    examined,
                });
            }
        }
        if depth == max_depth {
            break;
        }
        let mut next: Vec<Tower> = vec![];
        let mut keys = vec![];
        for t in &level {
            for c in children(t)? {
                let key = tower_key(&c)?;
                if !keys.contains(&key) {
                    keys.push(key);
                    next.push(c);
                }
            }
        }
        level = next;
    }
    let certified = examined.iter().all(TowerReport::exhausted);
    Ok(SearchOutcome::NotFoundWithin { k, l, max_depth, certified, examined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::make_xi;
    use crate::poly::q;

    #[test]
    fn remark_sections_vanish_nowhere() {
        for k in 1..=2u32 {
            let b = make_xi(k, k);
            let tb = TowerBundle::new(remark_tower(BadPoint::C1, k as usize), b.clone()).unwrap();
            let s = tb.section(RatFunc::new(Poly::one(2), p_kl(k, 0)).unwrap()).unwrap();
            tb.verify(&s).unwrap();
            assert!(tb.nowhere_vanishing(&s).unwrap().iter().all(Vanishing::is_yes));
            let tb = TowerBundle::new(remark_tower(BadPoint::C2, k as usize), b).unwrap();
            let s = tb.section(RatFunc::new(p_kl(0, k), p_kl(k, k)).unwrap()).unwrap();
            assert_eq!(s.s2, RatFunc::from_poly(p_kl(0, k)));
            assert!(tb.nowhere_vanishing(&s).unwrap().iter().all(Vanishing::is_yes));
        }
    }

    #[test]
    fn remark_section_not_enough_one_level_short() {
        let b = make_xi(2, 2);
        let tb = TowerBundle::new(remark_tower(BadPoint::C1, 1), b).unwrap();
        let s = tb.section(RatFunc::new(Poly::one(2), p_kl(2, 0)).unwrap());
        // 1/(x⁴+y²) is regular, but P/(x⁴+y²) has a pole at the lift of c₁
        assert!(s.is_err());
    }

    #[test]
    fn coprime_refinement() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let xy = &x * &y;
        let out = coprime(vec![(xy.clone(), [1, 0]), (x.clone(), [0, 1])]);
        assert_eq!(out, vec![(y.clone(), [1, 0]), (x, [1, 1])]);
    }

    #[test]
    fn search_small_cases() {
        let SearchOutcome::Found { depth, .. } = search_trivializing_tower(0, 2, 1, 6, 2).unwrap() else { panic!() };
        assert_eq!(depth, 0);
        let out = search_trivializing_tower(1, 1, 1, 6, 2).unwrap();
        assert_eq!(out.depth(), Some(1));
        assert!(out.examined()[0].exhausted());
        let _ = q(0);
    }

    #[test]
    fn tower_key_ignores_order() {
        let a = Tower::new().blowup_at("base", &[q(0), q(0)]).unwrap().blowup_at("base.1", &[q(1), q(0)]).unwrap();
        let b = Tower::new().blowup_at("base", &[q(1), q(0)]).unwrap().blowup_at("base.1", &[q(0), q(0)]).unwrap();
        assert_eq!(tower_key(&a).unwrap(), tower_key(&b).unwrap());
        let c = remark_tower(BadPoint::C1, 2);
        assert_ne!(tower_key(&a).unwrap(), tower_key(&c).unwrap());
    }
}
