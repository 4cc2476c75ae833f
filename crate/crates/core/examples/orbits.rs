//! Eventual cyclic structure of orbits of subarcs under a few interval maps.

use dendro::length_expanding::zigzag;
use dendro::metric_tree::{Dendrite, PointRef};
use dendro::rational::q;
use dendro::tree_map::TreeMap;

fn main() -> dendro::Result<()> {
    let i = Dendrite::unit_interval();
    let flip = TreeMap::from_vertex_images(i.clone(), i.clone(), vec![PointRef::Vertex(1), PointRef::Vertex(0)])?;
    let maps = [("identity", TreeMap::identity(&i)), ("flip", flip), ("tent", zigzag(2)?)];
    let e = i.geodesic(&PointRef::Edge(0, q(1, 10)), &PointRef::Edge(0, q(1, 5)))?;
    for (name, f) in &maps {
        match f.orbit_decomposition(&e, 64)?.found() {
            Some(o) => println!("{name}: n0 = {}, k = {}, r = {}, laws hold = {}", o.n0, o.k, o.r, o.laws_hold),
            None => println!("{name}: inconclusive within 64 steps"),
        }
        let x = PointRef::Edge(0, q(1, 3));
        println!("  f(1/3) relative to 0: {:?}", f.classify_relation(&PointRef::Vertex(0), &x)?);
    }
    Ok(())
}
