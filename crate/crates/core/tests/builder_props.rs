use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dendro::exact_builder::{build_exact, build_gch_not_eps, default_q, default_rho, ExactMap, GchBase};
use dendro::gallery::{comb, omega_star, star3};
use dendro::length_expanding::build_pair;
use dendro::metric_tree::{Dendrite, PointRef, Region};
use dendro::rational::{q, Q};

fn comb_map() -> &'static ExactMap {
    static MAP: OnceLock<ExactMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let d = comb(4).unwrap();
        let base = d.geodesic(d.marked("base_left").unwrap(), d.marked("base_right").unwrap()).unwrap();
        build_exact(&d, &base, &default_q(), &default_rho()).unwrap()
    })
}

/// A random subarc of bush `k`, spanned by two grid points inside it.
fn arc_in_bush(ex: &ExactMap, k: usize, rng: &mut ChaCha8Rng) -> Region {
    let space = ex.space();
    let edges: Vec<usize> = ex.decomposition.bushes[k - 1].edges.iter().copied().collect();
    loop {
        let pts: Vec<PointRef> = (0..2)
            .map(|_| {
                let e = edges[rng.gen_range(0..edges.len())];
                space.point_on_edge(e, space.len(e) * q(rng.gen_range(0..=64), 64)).unwrap()
            })
            .collect();
        let r = space.geodesic(&pts[0], &pts[1]).unwrap();
        if r.h1() > Q::from_integer(0.into()) {
            return r;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_on_the_arc(seed in any::<u64>()) {
        let ex = comb_map();
        let space = ex.space();
        let a = ex.fixed_region();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = space.random_point(&mut rng, 1009);
        if a.contains(space, &p) {
            prop_assert_eq!(ex.map.apply(&p).unwrap(), p);
        }
    }

    #[test]
    fn bush_arcs_grow_or_swallow_a_bush(seed in any::<u64>()) {
        let ex = comb_map();
        let space = ex.space();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=ex.bush_count());
        let c = arc_in_bush(ex, k, &mut rng);
        let img = ex.map.image(&c);
        let swallows = (1..=ex.bush_count()).any(|h| ex.bush_region(h).is_subset(space, &img));
        let rho2 = &ex.rho * &ex.rho;
        let inside = img.is_subset(space, &ex.fixed_region())
            || (1..=ex.bush_count()).any(|h| img.is_subset(space, &ex.bush_region(h)));
        let grows = img.h1() >= &rho2 * c.h1() && inside;
        prop_assert!(swallows || grows, "bush {k}: {:?} -> {:?}", c, img);
    }
}

#[test]
fn roots_are_fixed_and_chains_descend() {
    let ex = comb_map();
    for b in &ex.decomposition.bushes {
        let r = PointRef::Vertex(b.root);
        assert_eq!(ex.map.apply(&r).unwrap(), r);
    }
    let kk = ex.bush_count();
    for k in 1..=kk {
        let c = ex.chain(k);
        assert_eq!(*c.last().unwrap(), 1);
        assert!(c.len() <= kk);
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn weights_follow_the_geometric_law() {
    let ex = comb_map();
    let m = ex.metric.as_ref().unwrap();
    let ratio = default_q();
    for (i, w) in m.weights.iter().enumerate() {
        assert_eq!(*w, (Q::from_integer(1.into()) - &ratio) * ratio.pow(i as i32));
    }
    assert_eq!(ex.space().total_length(), m.total);
    assert_eq!(&m.total + &m.deficit, Q::from_integer(1.into()));
}

#[test]
fn built_phi_is_onto_and_normalized() {
    let rho = default_rho();
    for (t, a) in [
        (star3(), PointRef::Vertex(0)),
        (Dendrite::unit_interval(), PointRef::Vertex(0)),
        (comb(2).unwrap(), PointRef::Vertex(0)),
    ] {
        let pair = build_pair(&t, &a, &rho).unwrap();
        assert_eq!(pair.space.total_length(), Q::from_integer(1.into()));
        let i = pair.phi.domain().clone();
        assert!(pair.phi.image(&i.whole()).is_whole(&pair.space));
        let mut union = Region::empty();
        for e in 0..i.edge_count() {
            let ed = i.edge(e);
            union = union.union(
                &pair.space,
                &pair.phi.image(&i.geodesic(&PointRef::Vertex(ed.u), &PointRef::Vertex(ed.v)).unwrap()),
            );
        }
        assert!(union.is_whole(&pair.space));
        assert!(pair.psi.image(&pair.space.whole()).is_whole(&i));
    }
}

#[test]
fn counterexample_pieces_are_invariant() {
    let ratio = default_q();
    let rho = default_rho();
    let w = omega_star(7, &q(1, 2)).unwrap();
    let c = w.marked("center").unwrap().clone();
    let d = comb(5).unwrap();
    let arc = d.geodesic(d.marked("base_left").unwrap(), d.marked("base_right").unwrap()).unwrap();
    let a = d.marked("origin").unwrap().clone();
    for sys in [
        build_gch_not_eps(&w, &GchBase::Point(c), &ratio, &rho).unwrap(),
        build_gch_not_eps(&d, &GchBase::Arc { arc, a }, &ratio, &rho).unwrap(),
    ] {
        for p in &sys.pieces {
            assert!(sys.map.image(&p.region).is_subset(&sys.space, &p.region));
            assert!(p.invariant);
        }
        assert!(sys.pairwise_meet_in_cores());
    }
}
