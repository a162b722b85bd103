//! Seeded generators for property suites and the CLI self-test.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cech::{tuples, Cochain, SheafMode};
use crate::geometry::{Covering, Tower};
use crate::poly::{Poly, RatFunc, Q};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_q<R: Rng>(rng: &mut R, bound: i64) -> Q {
    let num = rng.gen_range(-bound..=bound);
    let den = if rng.gen_bool(0.2) { rng.gen_range(2..=3) } else { 1 };
    Q::new(num.into(), den.into())
}

/// A polynomial in two variables with at most `terms` terms of total
/// degree at most `deg`; may be zero.
pub fn poly<R: Rng>(rng: &mut R, deg: u32, terms: usize) -> Poly {
    let n = rng.gen_range(0..=terms);
    let ts = (0..n).map(|_| {
        let a = rng.gen_range(0..=deg);
        let b = rng.gen_range(0..=deg - a);
        (small_q(rng, 5), vec![a, b])
    });
    Poly::from_terms(2, ts.collect::<Vec<_>>()).expect("arity 2")
}

pub fn nonzero_poly<R: Rng>(rng: &mut R, deg: u32, terms: usize) -> Poly {
    loop {
        let p = poly(rng, deg, terms.max(1));
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn ratfunc<R: Rng>(rng: &mut R, deg: u32, terms: usize) -> RatFunc {
    RatFunc::new(poly(rng, deg, terms), nonzero_poly(rng, deg, terms)).expect("nonzero denominator")
}

/// `n` sets `∖V((x−a_i)² + (y−b_i)²)` around distinct small integer points.
pub fn covering<R: Rng>(rng: &mut R, n: usize) -> Covering {
    assert!(n >= 2, "one point complement does not cover the plane");
    let mut pts: Vec<(i64, i64)> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| (a, b))).collect();
    pts.shuffle(rng);
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    let qs = pts
        .iter()
        .take(n)
        .map(|&(a, b)| {
            let dx = &x - &Poly::constant(2, Q::from_integer(a.into()));
            let dy = &y - &Poly::constant(2, Q::from_integer(b.into()));
            &dx.pow(2) + &dy.pow(2)
        })
        .collect();
    Covering::new("base", qs).expect("distinct point complements cover")
}

/// A cochain with values `a_σ / Q_σ^m`; regular on every intersection.
pub fn cochain<R: Rng>(rng: &mut R, cov: &Covering, degree: usize, deg: u32, power: u32) -> Cochain {
    let mut values = BTreeMap::new();
    for t in tuples(cov.len(), degree + 1) {
        let m = rng.gen_range(0..=power);
        let v = RatFunc::new(poly(rng, deg, 3), cov.intersection_q(&t).pow(m)).expect("nonzero denominator");
        values.insert(t, v);
    }
    Cochain::new(cov.clone(), degree, SheafMode::Regular, values).expect("values are regular by construction")
}

/// Blowups at small rational points of randomly chosen leaves.
pub fn tower<R: Rng>(rng: &mut R, depth: usize) -> Tower {
    let mut t = Tower::new();
    for _ in 0..depth {
        let leaf = t.leaves().choose(rng).expect("a tower has leaves").clone();
        let p = [Q::from_integer(rng.gen_range(-1..=1i64).into()), Q::from_integer(rng.gen_range(-1..=1i64).into())];
        t = t.blowup_at(&leaf, &p).expect("leaf and point are valid");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = poly(&mut seeded(7), 4, 5);
        let b = poly(&mut seeded(7), 4, 5);
        assert_eq!(a, b);
        let t1 = tower(&mut seeded(3), 2);
        let t2 = tower(&mut seeded(3), 2);
        assert_eq!(t1, t2);
        assert_eq!(t1.depth(), 2);
    }

    #[test]
    fn cochains_are_regular() {
        let mut rng = seeded(11);
        let cov = covering(&mut rng, 3);
        let c = cochain(&mut rng, &cov, 1, 3, 2);
        c.replay().unwrap();
    }
}
