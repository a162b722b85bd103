use cechblow::bundle::{global_sections_bounded, make_xi, search_trivializing_tower, TowerBundle};
use cechblow::poly::{RatFunc, Q};
use cechblow::random::{seeded, tower};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

mod common;
use common::{ancestor, extend, pull_down};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn sample_points() -> Vec<[Q; 2]> {
    let h = |n: i64, d: i64| Q::new(n.into(), d.into());
    vec![[h(1, 3), h(2, 1)], [h(-3, 2), h(1, 5)], [h(5, 7), h(-4, 3)], [h(2, 1), h(7, 2)]]
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn stripped_factors_multiply_back(seed in any::<u64>(), k in 0u32..=2, l in 0u32..=2, depth in 1usize..=2) {
        // oracle: pointwise evaluation instead of the symbolic product
        let mut rng = seeded(seed);
        let t = tower(&mut rng, depth);
        let tb = TowerBundle::new(t, make_xi(k, l)).unwrap();
        for lb in &tb.leaves {
            lb.check_log().unwrap();
            for p in sample_points() {
                let (Ok(raw), Ok(simple)) = (lb.raw.transition.eval(&p), lb.simplified.transition.eval(&p)) else { continue };
                let mut acc = simple;
                for e in &lb.log {
                    let u = e.factor.eval(&p);
                    let mut up = Q::one();
                    for _ in 0..e.power {
                        up *= &u;
                    }
                    if e.in_denominator {
                        prop_assume!(!up.is_zero());
                        acc /= up;
                    } else {
                        acc *= up;
                    }
                }
                prop_assert_eq!(acc, raw);
            }
        }
    }

    #[test]
    fn section_pullback_is_functorial(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let b = make_xi(1, 1);
        let basis = global_sections_bounded(&b, 4, 1).unwrap();
        prop_assume!(!basis.is_empty());
        let mut s1 = RatFunc::zero(2);
        for s in &basis {
            let c = Q::from_integer(rng.gen_range(-3..=3i64).into());
            s1 = &s1 + &s.s1.scale(&c);
        }
        let alpha = tower(&mut rng, 1);
        let t = extend(&mut rng, &alpha, 1);
        let small = TowerBundle::new(alpha.clone(), b.clone()).unwrap();
        let big = TowerBundle::new(t.clone(), b).unwrap();
        let on_small = small.section(s1.clone()).unwrap();
        let on_big = big.section(s1).unwrap();
        big.verify(&on_big).unwrap();
        for (lb, ls) in big.leaves.iter().zip(&on_big.leaves) {
            let top = ancestor(&alpha, &lb.chart);
            let i = small.leaves.iter().position(|x| x.chart == top).unwrap();
            prop_assert_eq!(&ls.s1, &pull_down(&t, top, &on_small.leaves[i].s1, &lb.chart));
            prop_assert_eq!(&ls.s2, &pull_down(&t, top, &on_small.leaves[i].s2, &lb.chart));
        }
    }
}

#[test]
fn bounded_spaces_grow_with_the_bounds() {
    for (k, l) in [(0, 0), (1, 0), (1, 1)] {
        let b = make_xi(k, l);
        let mut prev_row: Vec<usize> = vec![];
        for deg in 0..=4u32 {
            let row: Vec<usize> = (0..=2u32).map(|n| global_sections_bounded(&b, deg, n).unwrap().len()).collect();
            assert!(row.windows(2).all(|w| w[0] <= w[1]), "({k},{l}) deg {deg}: {row:?}");
            if !prev_row.is_empty() {
                assert!(prev_row.iter().zip(&row).all(|(a, b)| a <= b), "({k},{l}) deg {deg}");
            }
            prev_row = row;
        }
    }
}

#[test]
fn no_trivializing_tower_below_min_of_k_and_l() {
    for k in 1..=3u32 {
        for l in 1..=3u32 {
            let below = k.min(l) as usize - 1;
            let out = search_trivializing_tower(k, l, below, 6, 2).unwrap();
            assert_eq!(out.depth(), None, "({k},{l}) trivialized at depth {below} or less");
        }
    }
}
