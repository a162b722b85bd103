//! Seeded randomized checks of the core identities.

use cechblow::cech::{is_coboundary_bounded, pullback_cochain};
use cechblow::geometry::Tower;
use cechblow::poly::{Poly, RatFunc};
use cechblow::random::{cochain, covering, ratfunc, seeded, tower};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

type Trial = fn(u64) -> Result<(), String>;

fn ring_axioms(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let (a, b, c) = (ratfunc(&mut r, 3, 3), ratfunc(&mut r, 3, 3), ratfunc(&mut r, 3, 3));
    let ok = &(&a + &b) + &c == &a + &(&b + &c) && &a * &(&b + &c) == &(&a * &b) + &(&a * &c) && &(&a - &b) + &b == a;
    ok.then_some(()).ok_or_else(|| format!("a = {a}, b = {b}, c = {c}"))
}

fn json_round_trip(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let f = ratfunc(&mut r, 3, 4);
    let t = tower(&mut r, 2);
    let f2: RatFunc = serde_json::from_str(&serde_json::to_string(&f).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let t2: Tower = serde_json::from_str(&serde_json::to_string(&t).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    (f2 == f && t2 == t).then_some(()).ok_or_else(|| format!("{f} or its tower did not survive JSON"))
}

fn differential_squares(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let cov = covering(&mut r, 3);
    let c = cochain(&mut r, &cov, 0, 2, 1);
    let dd = c.differential().and_then(|d| d.differential()).map_err(|e| e.to_string())?;
    dd.is_zero().then_some(()).ok_or_else(|| "d∘d ≠ 0".into())
}

fn pullback_commutes(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let cov = covering(&mut r, 2);
    let t = tower(&mut r, 1);
    let h = cochain(&mut r, &cov, 0, 2, 1);
    let dh = h.differential().map_err(|e| e.to_string())?;
    let left = pullback_cochain(&t, &dh).map_err(|e| e.to_string())?;
    let right = pullback_cochain(&t, &h).map_err(|e| e.to_string())?;
    for (a, b) in left.iter().zip(&right) {
        let b = b.differential().map_err(|e| e.to_string())?;
        if a.values().ne(b.values()) {
            return Err(format!("pullback and d disagree on {}", a.covering.chart));
        }
    }
    Ok(())
}

fn coboundary_round_trip(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let cov = covering(&mut r, 2);
    let h = cochain(&mut r, &cov, 0, 2, 1);
    let f = h.differential().map_err(|e| e.to_string())?;
    let pre = is_coboundary_bounded(&f, 4, 2).map_err(|e| e.to_string())?.ok_or("no preimage within the bounds")?;
    let back = pre.differential().map_err(|e| e.to_string())?;
    if back.values().ne(f.values()) {
        return Err("d of the preimage differs".into());
    }
    pre.replay().map_err(|e| e.to_string())
}

fn pullback_composes(seed: u64) -> Result<(), String> {
    let mut r = seeded(seed);
    let t = tower(&mut r, 2);
    let f = ratfunc(&mut r, 2, 3);
    for leaf in t.leaves() {
        let Ok(direct) = t.pullback_to(leaf, &f) else { continue };
        let maps = t.to_base(leaf).map_err(|e| e.to_string())?;
        let maps: Vec<RatFunc> = maps.iter().map(|m: &Poly| RatFunc::from_poly(m.clone())).collect();
        let Ok(sub) = f.substitute(&maps) else { continue };
        if sub != direct {
            return Err(format!("pullback to {leaf} is not substitution"));
        }
    }
    Ok(())
}

const TRIALS: [(&str, Trial); 6] = [
    ("ratfunc_ring_axioms", ring_axioms),
    ("json_round_trip", json_round_trip),
    ("differential_squares_to_zero", differential_squares),
    ("pullback_commutes_with_differential", pullback_commutes),
    ("coboundary_round_trip", coboundary_round_trip),
    ("pullback_is_substitution", pullback_composes),
];

/// Runs every check `rounds` times with seeds derived from `seed`.
pub fn run(seed: u64, rounds: usize) -> Vec<Check> {
    TRIALS
        .iter()
        .enumerate()
        .map(|(i, (name, trial))| {
            let mut c = Check { name, passed: 0, failed: 0, first_failure: None };
            for round in 0..rounds as u64 {
                let s = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((i as u64) << 32 | round);
                match trial(s) {
                    Ok(()) => c.passed += 1,
                    Err(e) => {
                        c.failed += 1;
                        c.first_failure.get_or_insert(format!("seed {s}: {e}"));
                    }
                }
            }
            c
        })
        .collect()
}
