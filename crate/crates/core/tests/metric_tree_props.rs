mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dendro::metric_tree::{Dendrite, Region};
use dendro::rational::q;

use common::random_tree;

fn tree(seed: u64) -> (Dendrite, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=9);
    (random_tree(&mut rng, n), rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn geodesics_are_convex_and_measured(seed in any::<u64>()) {
        let (d, mut rng) = tree(seed);
        let (x, y) = (d.random_point(&mut rng, 12), d.random_point(&mut rng, 12));
        let dxy = d.dist(&x, &y).unwrap();
        let g = d.geodesic(&x, &y).unwrap();
        prop_assert_eq!(g.h1(), dxy.clone());
        prop_assert!(g.is_connected(&d));
        let z = d.point_along(&x, &y, &(&dxy * q(rng.gen_range(0..=12), 12))).unwrap();
        prop_assert_eq!(d.dist(&x, &z).unwrap() + d.dist(&z, &y).unwrap(), dxy);
        prop_assert_eq!(d.dist(&x, &y).unwrap(), d.dist(&y, &x).unwrap());
    }

    #[test]
    fn projection_is_the_unique_nearest_point(seed in any::<u64>()) {
        let (d, mut rng) = tree(seed);
        let e = d.random_subtree(&mut rng, 3, 8);
        let x = d.random_point(&mut rng, 12);
        let p = d.project(&e, &x).unwrap();
        prop_assert!(e.contains(&d, &p));
        let dp = d.dist(&x, &p).unwrap();
        for _ in 0..20 {
            let w = d.random_point(&mut rng, 24);
            if e.contains(&d, &w) {
                let dw = d.dist(&x, &w).unwrap();
                prop_assert!(dp < dw || (dp == dw && w == p));
            }
        }
    }

    #[test]
    fn helly_for_up_to_five_subtrees(seed in any::<u64>(), k in 2usize..=5) {
        let (d, mut rng) = tree(seed);
        let s: Vec<Region> = (0..k).map(|_| d.random_subtree(&mut rng, 2, 6)).collect();
        let pairwise = (0..k).all(|i| (i + 1..k).all(|j| s[i].intersects(&d, &s[j])));
        prop_assume!(pairwise);
        let mut all = s[0].clone();
        for r in &s[1..] {
            all = all.intersect(&d, r);
        }
        let p = all.any_point();
        prop_assert!(p.is_some());
        let p = p.unwrap();
        prop_assert!(s.iter().all(|r| r.contains(&d, &p)));
    }

    #[test]
    fn upper_sets_and_enclosed_part_the_tree(seed in any::<u64>()) {
        let (d, mut rng) = tree(seed);
        let (a, b) = (d.random_point(&mut rng, 6), d.random_point(&mut rng, 6));
        prop_assume!(a != b);
        let parts = [d.upper_set(&b, &a).unwrap(), d.upper_set(&a, &b).unwrap(), d.enclosed(&a, &b).unwrap()];
        for _ in 0..30 {
            let x = d.random_point(&mut rng, 24);
            let hits = parts.iter().filter(|r| r.contains(&d, &x)).count();
            prop_assert!(hits >= 1);
            if x != a && x != b {
                prop_assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn escape_boundary_lies_on_the_boundary(seed in any::<u64>()) {
        let (d, mut rng) = tree(seed);
        let e = d.random_subtree(&mut rng, 2, 6);
        let dec = d.components_minus(&e).unwrap();
        for c in &dec.components {
            prop_assert!(e.contains(&d, &c.boundary));
            prop_assert!(c.closure.contains(&d, &c.boundary));
            prop_assert_eq!(c.closure.intersect(&d, &e), d.point_region(&c.boundary).unwrap());
        }
        for p in &dec.escape_boundary {
            prop_assert!(dec.components.iter().any(|c| &c.boundary == p));
        }
        let mut union = e.clone();
        for c in &dec.components {
            union = union.union(&d, &c.closure);
        }
        prop_assert!(union.is_whole(&d));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let (d, _) = tree(seed);
        let back = Dendrite::from_json(&d.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), d.to_json());
    }
}
