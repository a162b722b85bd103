use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::chart::{step_inverse, step_map, Chart, Provenance, Which};
use super::GeometryError;
use crate::poly::{point_serde, Poly, RatFunc, Q};

/// One chart-level blowup. Blowups of the same geometric point in several
/// overlapping leaves share a `group`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub chart: String,
    #[serde(with = "point_serde")]
    pub center: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
}

/// A finite sequence of point blowups over the base plane, kept as an
/// atlas of leaf charts with their composed maps to the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    charts: BTreeMap<String, Chart>,
    leaves: Vec<String>,
    steps: Vec<Step>,
    depth: usize,
    to_base: BTreeMap<String, [Poly; 2]>,
    from_base: BTreeMap<String, [RatFunc; 2]>,
}

impl Default for Tower {
    fn default() -> Self {
        Self::new()
    }
}

impl Tower {
    /// The trivial tower: the base plane as its only leaf.
    pub fn new() -> Self {
        let base = Chart::base();
        let id = base.id.clone();
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        Tower {
            charts: BTreeMap::from([(id.clone(), base)]),
            leaves: vec![id.clone()],
            steps: vec![],
            depth: 0,
            to_base: BTreeMap::from([(id.clone(), [x.clone(), y.clone()])]),
            from_base: BTreeMap::from([(id, [RatFunc::from_poly(x), RatFunc::from_poly(y)])]),
        }
    }

    pub fn base_id(&self) -> &str {
        "base"
    }

    /// Number of geometric blowups.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn chart(&self, id: &str) -> Result<&Chart, GeometryError> {
        self.charts.get(id).ok_or_else(|| GeometryError::UnknownChart(id.into()))
    }

    pub fn charts(&self) -> impl Iterator<Item = &Chart> {
        self.charts.values()
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        self.leaves.iter().any(|l| l == id)
    }

    /// Base coordinates as polynomials in the chart's coordinates.
    pub fn to_base(&self, id: &str) -> Result<&[Poly; 2], GeometryError> {
        self.to_base.get(id).ok_or_else(|| GeometryError::UnknownChart(id.into()))
    }

    /// Chart coordinates as rational functions of the base coordinates.
    pub fn from_base(&self, id: &str) -> Result<&[RatFunc; 2], GeometryError> {
        self.from_base.get(id).ok_or_else(|| GeometryError::UnknownChart(id.into()))
    }

    /// Coordinates of chart `to` as rational functions of chart `from`.
    pub fn transition(&self, from: &str, to: &str) -> Result<[RatFunc; 2], GeometryError> {
        let maps: Vec<RatFunc> = self.to_base(from)?.iter().cloned().map(RatFunc::from_poly).collect();
        let inv = self.from_base(to)?;
        let a = inv[0].substitute(&maps)?;
        let b = inv[1].substitute(&maps)?;
        Ok([a, b])
    }

    /// All leaves containing the geometric point given by `p` in chart
    /// `chart`, with its coordinates there.
    pub fn locate(&self, chart: &str, p: &[Q]) -> Result<Vec<(String, Vec<Q>)>, GeometryError> {
        self.chart(chart)?;
        let mut out = vec![];
        for leaf in &self.leaves {
            if leaf == chart {
                out.push((leaf.clone(), p.to_vec()));
                continue;
            }
            if let Some(img) = self.carry(chart, leaf, p)? {
                out.push((leaf.clone(), img));
            }
        }
        Ok(out)
    }

    /// Image of `p` in chart `to`, if both transitions are defined and
    /// compose to the identity at `p`.
    fn carry(&self, from: &str, to: &str, p: &[Q]) -> Result<Option<Vec<Q>>, GeometryError> {
        let fwd = self.transition(from, to)?;
        let Some(img) = eval_pair(&fwd, p) else { return Ok(None) };
        let back = self.transition(to, from)?;
        Ok((eval_pair(&back, &img).as_deref() == Some(p)).then_some(img))
    }

    /// Leaves containing a preimage point of the base point `p`, where
    /// that preimage is a single point.
    pub fn preimages(&self, p: &[Q]) -> Vec<(String, Vec<Q>)> {
        let mut out = vec![];
        for leaf in &self.leaves {
            if let Some(img) = eval_pair(&self.from_base[leaf], p) {
                let back: Vec<Q> = self.to_base[leaf].iter().map(|m| m.eval(&img)).collect();
                if back == p {
                    out.push((leaf.clone(), img));
                }
            }
        }
        out
    }

    /// Blows up the geometric point `center` of leaf `leaf`, in every leaf
    /// chart that contains it.
    pub fn blowup_at(&self, leaf: &str, center: &[Q]) -> Result<Tower, GeometryError> {
        if !self.is_leaf(leaf) {
            return Err(if self.charts.contains_key(leaf) {
                GeometryError::NotALeaf(leaf.into())
            } else {
                GeometryError::UnknownChart(leaf.into())
            });
        }
        if center.len() != 2 {
            return Err(GeometryError::Malformed(format!("center must have 2 coordinates, got {}", center.len())));
        }
        let targets = self.locate(leaf, center)?;
        let mut t = self.clone();
        let group = t.depth;
        for (id, c) in targets {
            t.split(&id, c, group);
        }
        t.depth += 1;
        Ok(t)
    }

    /// Blows up the base point `p` in every leaf where its preimage is a
    /// single point. Errors when no leaf contains such a preimage.
    pub fn blowup_base_point(&self, p: &[Q]) -> Result<Tower, GeometryError> {
        let pre = self.preimages(p);
        let Some((leaf, c)) = pre.first() else {
            return Err(GeometryError::Malformed(format!("no leaf contains a single preimage of {p:?}")));
        };
        self.blowup_at(leaf, c)
    }

    fn split(&mut self, id: &str, center: Vec<Q>, group: usize) {
        let pos = self.leaves.iter().position(|l| l == id).expect("leaf");
        let mut kids = vec![];
        for which in [Which::One, Which::Two] {
            let kid = format!("{id}.{}", which.suffix());
            let m = step_map(&center, which);
            let parent_maps = &self.to_base[id];
            let to_base = [parent_maps[0].compose(&m).expect("arity 2"), parent_maps[1].compose(&m).expect("arity 2")];
            let pf = self.from_base[id].to_vec();
            let inv = step_inverse(&center, which);
            let from_base = [
                inv[0].substitute(&pf).expect("birational maps do not collapse"),
                inv[1].substitute(&pf).expect("birational maps do not collapse"),
            ];
            let chart = Chart {
                id: kid.clone(),
                names: ["r".into(), "s".into()],
                provenance: Provenance::Blowup { parent: id.into(), center: center.clone(), which, map_to_parent: m.to_vec() },
            };
            self.charts.insert(kid.clone(), chart);
            self.to_base.insert(kid.clone(), to_base);
            self.from_base.insert(kid.clone(), from_base);
            kids.push(kid);
        }
        self.leaves.splice(pos..=pos, kids);
        self.steps.push(Step { chart: id.into(), center, group: Some(group) });
    }

    /// Rebuilds a tower from its recorded steps. Steps without a group
    /// each count as one geometric blowup.
    pub fn from_steps(steps: &[Step]) -> Result<Tower, GeometryError> {
        let mut t = Tower::new();
        let mut last_group = None;
        for (i, s) in steps.iter().enumerate() {
            if !t.is_leaf(&s.chart) {
                return Err(GeometryError::NotALeaf(s.chart.clone()));
            }
            if s.center.len() != 2 {
                return Err(GeometryError::Malformed(format!("step {i}: center must have 2 coordinates")));
            }
            let g = s.group.unwrap_or(usize::MAX - i);
            if last_group != Some(g) {
                t.depth += 1;
                last_group = Some(g);
            }
            t.split(&s.chart, s.center.clone(), t.depth - 1);
        }
        Ok(t)
    }

    /// Rechecks the stored composed maps against step-by-step composition.
    pub fn verify_maps(&self) -> Result<(), GeometryError> {
        for leaf in &self.leaves {
            let direct = self.compose_to_base(leaf)?;
            if direct != self.to_base[leaf] {
                return Err(GeometryError::Inconsistent(format!("composed map of {leaf}")));
            }
            let back: Vec<RatFunc> = self.to_base[leaf].iter().cloned().map(RatFunc::from_poly).collect();
            for (i, g) in self.from_base[leaf].iter().enumerate() {
                if g.substitute(&back)? != RatFunc::from_poly(Poly::var(2, i)) {
                    return Err(GeometryError::Inconsistent(format!("inverse map of {leaf}")));
                }
            }
        }
        Ok(())
    }

    fn compose_to_base(&self, id: &str) -> Result<[Poly; 2], GeometryError> {
        match &self.chart(id)?.provenance {
            Provenance::Base => Ok([Poly::var(2, 0), Poly::var(2, 1)]),
            Provenance::Blowup { parent, map_to_parent, .. } => {
                let up = self.compose_to_base(parent)?;
                Ok([up[0].compose(map_to_parent)?, up[1].compose(map_to_parent)?])
            }
        }
    }

    /// `p ∘ σ` on every leaf, in leaf order.
    pub fn pullback_poly(&self, p: &Poly) -> Result<Vec<(String, Poly)>, GeometryError> {
        self.leaves.iter().map(|l| Ok((l.clone(), p.compose(&self.to_base[l])?))).collect()
    }

    /// `f ∘ σ` on every leaf, in leaf order.
    pub fn pullback_function(&self, f: &RatFunc) -> Result<Vec<(String, RatFunc)>, GeometryError> {
        self.leaves.iter().map(|l| Ok((l.clone(), self.pullback_to(l, f)?))).collect()
    }

    /// `f ∘ σ` on the given chart.
    pub fn pullback_to(&self, chart: &str, f: &RatFunc) -> Result<RatFunc, GeometryError> {
        let maps: Vec<RatFunc> = self.to_base(chart)?.iter().cloned().map(RatFunc::from_poly).collect();
        Ok(f.substitute(&maps)?)
    }
}

pub(crate) fn eval_pair(f: &[RatFunc; 2], p: &[Q]) -> Option<Vec<Q>> {
    Some(vec![f[0].eval(p).ok()?, f[1].eval(p).ok()?])
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TowerJson {
    base: String,
    steps: Vec<Step>,
}

impl Serialize for Tower {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TowerJson { base: self.base_id().into(), steps: self.steps.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tower {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = TowerJson::deserialize(d)?;
        if j.base != "base" {
            return Err(serde::de::Error::custom(format!("unknown base chart {:?}", j.base)));
        }
        Tower::from_steps(&j.steps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{p_kl, q};

    fn r() -> Poly {
        Poly::var(2, 0)
    }
    fn s() -> Poly {
        Poly::var(2, 1)
    }
    fn origin() -> Vec<Q> {
        vec![q(0), q(0)]
    }

    #[test]
    fn single_blowup_maps() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        assert_eq!(t.leaves(), ["base.1", "base.2"]);
        assert_eq!(t.to_base("base.1").unwrap(), &[r(), &r() * &s()]);
        assert_eq!(t.to_base("base.2").unwrap(), &[&r() * &s(), s()]);
        t.verify_maps().unwrap();
        let t = Tower::new().blowup_at("base", &[q(1), q(0)]).unwrap();
        assert_eq!(t.to_base("base.1").unwrap()[1], &(&r() - &Poly::one(2)) * &s());
    }

    #[test]
    fn iterated_blowup_composes() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        let t = t.blowup_at("base.1", &origin()).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.to_base("base.1.1").unwrap(), &[r(), &r().pow(2) * &s()]);
        t.verify_maps().unwrap();
    }

    #[test]
    fn blowup_propagates_to_overlapping_leaves() {
        // (1,1) in chart One is (1,1) in chart Two as well: r = 1/s', s = s' r'
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        let t2 = t.blowup_at("base.1", &[q(1), q(1)]).unwrap();
        assert_eq!(t2.depth(), 2);
        assert_eq!(t2.steps().len(), 3);
        assert_eq!(t2.leaves().len(), 4);
        // the exceptional point of slope 0 is only in chart One
        let t3 = t.blowup_at("base.1", &origin()).unwrap();
        assert_eq!(t3.steps().len(), 2);
    }

    #[test]
    fn second_center_of_family() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        let pre = t.preimages(&[q(1), q(0)]);
        assert_eq!(pre, vec![("base.1".to_string(), vec![q(1), q(0)])]);
        assert!(t.preimages(&origin()).is_empty());
        let t = t.blowup_base_point(&[q(1), q(0)]).unwrap();
        assert_eq!(t.depth(), 2);
        t.verify_maps().unwrap();
    }

    #[test]
    fn family_pullback_strips_r_squared() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        let pb = t.pullback_poly(&p_kl(2, 1)).unwrap();
        assert_eq!(pb[0].1, &r().pow(2) * &p_kl(1, 1));
    }

    #[test]
    fn transition_between_sibling_charts() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap();
        let tr = t.transition("base.1", "base.2").unwrap();
        // (r, s) in One maps to (1/s, r s) in Two
        assert_eq!(tr[0], RatFunc::new(Poly::one(2), s()).unwrap());
        assert_eq!(tr[1], RatFunc::from_poly(&r() * &s()));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let t = Tower::new().blowup_at("base", &origin()).unwrap().blowup_at("base.1", &[q(1), q(0)]).unwrap();
        let js = serde_json::to_string(&t).unwrap();
        let back: Tower = serde_json::from_str(&js).unwrap();
        assert_eq!(back, t);
        assert!(matches!(Tower::new().blowup_at("nope", &origin()), Err(GeometryError::UnknownChart(_))));
        let t1 = Tower::new().blowup_at("base", &origin()).unwrap();
        assert!(matches!(t1.blowup_at("base", &origin()), Err(GeometryError::NotALeaf(_))));
        let bare = r#"{"base":"base","steps":[{"chart":"base","center":["0","0"]}]}"#;
        let t: Tower = serde_json::from_str(bare).unwrap();
        assert_eq!(t.depth(), 1);
    }
}
