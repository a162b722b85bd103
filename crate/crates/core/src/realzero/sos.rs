//! Syntactic sum-of-squares search.
//!
//! Strategies, tried in order: a greedy graded-lex square root whose
//! remainder is decomposed recursively, the same with cross terms limited
//! to strictly lower degree, and grouping by even powers of a single
//! variable.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::SosTerm;
use crate::poly::{Monomial, Poly, Q};

/// Finds `p = Σ w_i f_i² + c` with `w_i > 0` and `c ≥ 0`.
pub fn find_sos(p: &Poly) -> Option<(Vec<SosTerm>, Q)> {
    find(p, 0)
}

const MAX_DEPTH: usize = 24;

fn find(p: &Poly, depth: usize) -> Option<(Vec<SosTerm>, Q)> {
    if depth > MAX_DEPTH {
        return None;
    }
    if let Some(c) = p.constant_value() {
        return (!c.is_negative()).then(|| (vec![], c));
    }
    for lower_only in [false, true] {
        if let Some(r) = greedy(p, depth, lower_only) {
            return Some(r);
        }
    }
    let n = p.nvars();
    for v in (0..n).rev() {
        if let Some(r) = group_even(p, v, depth) {
            return Some(r);
        }
    }
    None
}

fn two() -> Q {
    Q::from_integer(BigInt::from(2))
}

/// With `lower_only`, the square is completed only with terms of strictly
/// lower degree than the root, taken from anywhere in the remainder rather
/// than from its leading term; same-degree terms are left to later squares.
/// `x²(x−1)² + (xy−y−1)²` needs this.
fn greedy(p: &Poly, depth: usize, lower_only: bool) -> Option<(Vec<SosTerm>, Q)> {
    let (lm, lc) = p.leading()?;
    if !lc.is_positive() || lm.0.iter().any(|e| e % 2 == 1) {
        return None;
    }
    let w = lc.clone();
    let half = Monomial(lm.0.iter().map(|e| e / 2).collect());
    let mut s = Poly::monomial(half.clone(), Q::from_integer(1.into()));
    let mut r = p - &(&s * &s).scale(&w);
    let mut last = half.clone();
    loop {
        let next = if lower_only {
            r.terms().rev().find_map(|(m, c)| {
                m.div(&half).filter(|tm| *tm < last && tm.total_degree() < half.total_degree()).map(|tm| (tm, c.clone()))
            })
        } else {
            r.leading().and_then(|(m, c)| m.div(&half).filter(|tm| *tm < half).map(|tm| (tm, c.clone())))
        };
        let Some((tm, c)) = next else { break };
        last = tm.clone();
        let t = Poly::monomial(tm, &c / (two() * &w));
        // (s + t)² = s² + 2 s t + t²
        r = &r - &(&(&s * &t).scale(&(two() * &w)) + &(&t * &t).scale(&w));
        s = &s + &t;
    }
    let (mut terms, c) = find(&r, depth + 1)?;
    terms.insert(0, SosTerm::new(w, s));
    Some((terms, c))
}

fn group_even(p: &Poly, v: usize, depth: usize) -> Option<(Vec<SosTerm>, Q)> {
    if !p.involves(v) || p.terms().any(|(m, _)| m.0[v] % 2 == 1) {
        return None;
    }
    let n = p.nvars();
    let mut terms = vec![];
    let mut constant = Q::zero();
    for (k, ck) in p.coeffs_in(v).into_iter().enumerate() {
        if ck.is_zero() {
            continue;
        }
        let (sub, c) = find(&ck, depth + 1)?;
        let half = (k / 2) as u32;
        let vk = Poly::var(n, v).pow(half);
        for t in sub {
            terms.push(SosTerm::new(t.w, &t.f * &vk));
        }
        if !c.is_zero() {
            if half == 0 {
                constant = c;
            } else {
                terms.push(SosTerm::new(c, vk));
            }
        }
    }
    Some((terms, constant))
}
