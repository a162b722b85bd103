use serde::{Deserialize, Serialize};

use super::{BundleError, BundleSection, LineBundle};
use crate::geometry::{pullback_covering, GeometryError, Tower};
use crate::poly::{factor_lite, Poly, RatFunc};
use crate::realzero::{compose_zero_cert, CertError, RegularityCert};

/// A factor `u^power` removed from the transition. `1/u^power` is regular
/// on `U_side`, so the bundle with transition `u^power` has the
/// nowhere-vanishing section `(1/u^power, 1)` or `(1, u^power)` and
/// twisting by it is an isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrippedFactor {
    pub factor: Poly,
    pub power: u32,
    pub in_denominator: bool,
    pub side: usize,
    pub cert: RegularityCert,
}

/// The pulled-back bundle on one leaf, and an isomorphic bundle with a
/// simpler transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafBundle {
    pub chart: String,
    pub raw: LineBundle,
    pub simplified: LineBundle,
    pub log: Vec<StrippedFactor>,
}

impl LeafBundle {
    /// Raw transition = simplified transition · Π stripped factors, and
    /// every stripping certificate replays.
    pub fn check_log(&self) -> Result<(), BundleError> {
        if self.raw.covering != self.simplified.covering || self.raw.hints != self.simplified.hints {
            return Err(CertError::BadEvidence("simplification changed the covering".into()).into());
        }
        let mut acc = self.simplified.transition.clone();
        for e in &self.log {
            let u = RatFunc::from_poly(e.factor.pow(e.power));
            acc = if e.in_denominator { acc.div(&u)? } else { &acc * &u };
            let inv = RatFunc::new(Poly::one(2), e.factor.pow(e.power))?;
            if e.cert.function != inv || e.cert.open_set_q != *self.raw.q(e.side) {
                return Err(CertError::BadEvidence("stripping certificate is about another function".into()).into());
            }
            e.cert.replay()?;
        }
        if acc != self.raw.transition {
            return Err(CertError::IdentityMismatch("stripped factors do not recover the transition".into()).into());
        }
        Ok(())
    }
}

/// `σ*b` on every leaf of `t`, with even powers of factors whose zeros lie
/// on `V(Q₁)` or `V(Q₂)` stripped from the transition.
pub fn pullback_bundle(t: &Tower, b: &LineBundle) -> Result<Vec<LeafBundle>, BundleError> {
    if b.chart() != t.base_id() {
        return Err(GeometryError::UnknownChart(b.chart().into()).into());
    }
    let coverings = pullback_covering(t, &b.covering)?;
    let known = b.known_zero_sets();
    let mut out = vec![];
    for ((leaf, g), cov) in t.pullback_function(&b.transition)?.into_iter().zip(coverings) {
        let maps = t.to_base(&leaf)?;
        let hints = known.iter().filter_map(|z| compose_zero_cert(z, maps).ok()).collect();
        let raw = LineBundle::with_hints(cov, g, hints)?;
        let (simplified, log) = strip(&raw)?;
        out.push(LeafBundle { chart: leaf, raw, simplified, log });
    }
    Ok(out)
}

fn strip(raw: &LineBundle) -> Result<(LineBundle, Vec<StrippedFactor>), BundleError> {
    let mut g = raw.transition.clone();
    let mut log = vec![];
    for in_denominator in [false, true] {
        let part = if in_denominator { raw.transition.den() } else { raw.transition.num() };
        if part.is_constant() {
            continue;
        }
        for (u, m) in factor_lite(part).1 {
            let power = m - m % 2;
            if power == 0 {
                continue;
            }
            let inv = RatFunc::new(Poly::one(2), u.pow(power))?;
            let Some((side, cert)) = (1..=2).find_map(|i| raw.certify(&inv, raw.q(i)).ok().map(|c| (i, c))) else {
                continue;
            };
            let up = RatFunc::from_poly(u.pow(power));
            g = if in_denominator { &g * &up } else { g.div(&up)? };
            log.push(StrippedFactor { factor: u, power, in_denominator, side, cert });
        }
    }
    let simplified = if log.is_empty() { raw.clone() } else { LineBundle::with_hints(raw.covering.clone(), g, raw.hints.clone())? };
    Ok((simplified, log))
}

/// `σ*s` on every leaf, certified against the raw pulled-back bundles.
pub fn pullback_section(t: &Tower, leaves: &[LeafBundle], s: &BundleSection) -> Result<Vec<BundleSection>, BundleError> {
    leaves
        .iter()
        .map(|lb| {
            let s1 = t.pullback_to(&lb.chart, &s.s1)?;
            let s2 = t.pullback_to(&lb.chart, &s.s2)?;
            BundleSection::new(&lb.raw, s1, s2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::make_xi;
    use crate::poly::{p_kl, q};

    fn x() -> Poly {
        Poly::var(2, 0)
    }

    #[test]
    fn blowup_at_origin_lowers_k() {
        for (k, l) in [(1, 1), (2, 1), (2, 3)] {
            let b = make_xi(k, l);
            let t = Tower::new().blowup_at("base", &[q(0), q(0)]).unwrap();
            let leaves = pullback_bundle(&t, &b).unwrap();
            let one = leaves.iter().find(|lb| lb.chart == "base.1").unwrap();
            assert_eq!(one.raw.transition.num(), &(&x().pow(2) * &p_kl(k - 1, l)));
            assert_eq!(one.simplified.transition, RatFunc::from_poly(p_kl(k - 1, l)));
            assert_eq!(one.log.len(), 1);
            assert_eq!((one.log[0].factor.clone(), one.log[0].power, one.log[0].side), (x(), 2, 1));
            for lb in &leaves {
                lb.check_log().unwrap();
            }
        }
    }

    #[test]
    fn blowup_at_one_lowers_l() {
        let b = make_xi(1, 2);
        let t = Tower::new().blowup_at("base", &[q(1), q(0)]).unwrap();
        let leaves = pullback_bundle(&t, &b).unwrap();
        let one = leaves.iter().find(|lb| lb.chart == "base.1").unwrap();
        assert_eq!(one.simplified.transition, RatFunc::from_poly(p_kl(1, 1)));
        assert_eq!(one.log[0].factor, &x() - &Poly::one(2));
        assert_eq!(one.log[0].side, 2);
    }

    #[test]
    fn unit_transition_stays_unit() {
        let b = make_xi(0, 0);
        let t = Tower::new().blowup_at("base", &[q(0), q(0)]).unwrap().blowup_at("base.1", &[q(1), q(0)]).unwrap();
        for lb in pullback_bundle(&t, &b).unwrap() {
            lb.check_log().unwrap();
            let n = lb.simplified.transition.num();
            assert!(matches!(crate::realzero::is_unit(n), crate::realzero::UnitResult::Yes(_)));
        }
    }

    #[test]
    fn sections_pull_back() {
        let b = make_xi(1, 1);
        let s = BundleSection::from_first(&b, RatFunc::from_poly(x())).unwrap();
        let t = Tower::new().blowup_at("base", &[q(0), q(0)]).unwrap();
        let leaves = pullback_bundle(&t, &b).unwrap();
        for (lb, ls) in leaves.iter().zip(pullback_section(&t, &leaves, &s).unwrap()) {
            ls.verify(&lb.raw).unwrap();
        }
    }
}
