#![allow(dead_code)]

use cechblow::geometry::{Provenance, Tower};
use cechblow::poly::{RatFunc, Q};
use rand::seq::SliceRandom;
use rand::Rng;

/// `top_value` on `leaf` obtained by substituting the step maps one blowup
/// at a time, instead of through the composed base maps.
pub fn pull_down(t: &Tower, top: &str, top_value: &RatFunc, leaf: &str) -> RatFunc {
    let mut chain = vec![];
    let mut cur = leaf.to_string();
    while cur != top {
        let c = t.chart(&cur).unwrap();
        let Provenance::Blowup { parent, map_to_parent, .. } = &c.provenance else { panic!("{top} is not an ancestor of {leaf}") };
        chain.push(map_to_parent.clone());
        cur = parent.clone();
    }
    let mut v = top_value.clone();
    for maps in chain.iter().rev() {
        let m: Vec<RatFunc> = maps.iter().cloned().map(RatFunc::from_poly).collect();
        v = v.substitute(&m).unwrap();
    }
    v
}

/// The leaf of `alpha` that `leaf` lies over.
pub fn ancestor<'a>(alpha: &'a Tower, leaf: &str) -> &'a str {
    alpha.leaves().iter().find(|p| leaf == p.as_str() || leaf.starts_with(&format!("{p}."))).unwrap()
}

/// `alpha` followed by `extra` random blowups.
pub fn extend<R: Rng>(rng: &mut R, alpha: &Tower, extra: usize) -> Tower {
    let mut t = alpha.clone();
    for _ in 0..extra {
        let leaf = t.leaves().choose(rng).unwrap().clone();
        let p = [Q::from_integer(rng.gen_range(-1..=1i64).into()), Q::from_integer(rng.gen_range(-1..=1i64).into())];
        t = t.blowup_at(&leaf, &p).unwrap();
    }
    t
}
