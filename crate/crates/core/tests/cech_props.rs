use cechblow::cech::{is_coboundary_bounded, pullback_cochain, Cochain, SheafMode};
use cechblow::geometry::pullback_openset;
use cechblow::poly::RatFunc;
use cechblow::random::{cochain, covering, poly, ratfunc, seeded, tower};
use proptest::prelude::*;

mod common;
use common::{ancestor, extend, pull_down};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn differential_squares_to_zero(seed in any::<u64>(), n in 2usize..=3, q in 0usize..=1) {
        let mut rng = seeded(seed);
        let cov = covering(&mut rng, n);
        let c = cochain(&mut rng, &cov, q, 2, 1);
        prop_assert!(c.differential().unwrap().differential().unwrap().is_zero());
    }

    #[test]
    fn pullback_commutes_with_differential(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let cov = covering(&mut rng, 2);
        let t = tower(&mut rng, 1);
        let h = cochain(&mut rng, &cov, 0, 2, 1);
        let left: Vec<Cochain> = pullback_cochain(&t, &h.differential().unwrap()).unwrap();
        let right: Vec<Cochain> = pullback_cochain(&t, &h).unwrap().iter().map(|c| c.differential().unwrap()).collect();
        for (a, b) in left.iter().zip(&right) {
            prop_assert_eq!(a.values().collect::<Vec<_>>(), b.values().collect::<Vec<_>>());
        }
    }

    #[test]
    fn composite_pullback_is_iterated_pullback(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let alpha = tower(&mut rng, 1);
        let t = extend(&mut rng, &alpha, 1);
        let f = ratfunc(&mut rng, 2, 3);
        for leaf in t.leaves() {
            let top = ancestor(&alpha, leaf);
            let Ok(up) = alpha.pullback_to(top, &f) else { continue };
            let Ok(direct) = t.pullback_to(leaf, &f) else { continue };
            prop_assert_eq!(direct, pull_down(&t, top, &up, leaf));
        }
    }

    #[test]
    fn coboundary_round_trip(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let cov = covering(&mut rng, 2);
        let h = cochain(&mut rng, &cov, 0, 2, 1);
        let f = h.differential().unwrap();
        let pre = is_coboundary_bounded(&f, 4, 2).unwrap().expect("a preimage exists within the bounds");
        let back = pre.differential().unwrap();
        prop_assert_eq!(back.values().collect::<Vec<_>>(), f.values().collect::<Vec<_>>());
        pre.replay().unwrap();
    }
}

#[test]
fn open_set_pullback_is_functorial() {
    let mut rng = seeded(5);
    for _ in 0..10 {
        let alpha = tower(&mut rng, 1);
        let t = extend(&mut rng, &alpha, 1);
        let q = poly(&mut rng, 2, 3);
        if q.is_zero() {
            continue;
        }
        let u = cechblow::geometry::OpenSet::new("base", q.clone()).unwrap();
        let on_alpha = pullback_openset(&alpha, &u).unwrap();
        for s in pullback_openset(&t, &u).unwrap() {
            let top = ancestor(&alpha, &s.chart);
            let qa = &on_alpha.iter().find(|o| o.chart == top).unwrap().q;
            let down = pull_down(&t, top, &RatFunc::from_poly(qa.clone()), &s.chart);
            assert_eq!(RatFunc::from_poly(s.q.clone()), down);
        }
    }
}

#[test]
fn rational_mode_skips_certificates() {
    let mut rng = seeded(9);
    let cov = covering(&mut rng, 2);
    let c = Cochain::from_fn(&cov, 1, SheafMode::Rational, |_| ratfunc(&mut seeded(1), 2, 2)).unwrap();
    assert_eq!(c.certs().count(), 0);
}
