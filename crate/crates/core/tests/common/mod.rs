#![allow(dead_code)]

use dendro::metric_tree::{Dendrite, PointRef, Region};
use dendro::rational::{q, Q};
use dendro::tree_map::TreeMap;
use rand::Rng;

/// A random tree with `edges` edges and lengths in `{1/4, ..., 1}`.
pub fn random_tree<R: Rng>(rng: &mut R, edges: usize) -> Dendrite {
    let list: Vec<(usize, usize, Q)> =
        (1..=edges).map(|v| (rng.gen_range(0..v), v, q(rng.gen_range(1..=4), 4))).collect();
    Dendrite::from_edges(edges + 1, &list).expect("random tree")
}

/// A selfmap sending every vertex to a random grid point.
pub fn random_selfmap<R: Rng>(rng: &mut R, d: &Dendrite, den: u32) -> TreeMap {
    let images = (0..d.vertex_count()).map(|_| d.random_point(rng, den)).collect();
    TreeMap::from_vertex_images(d.clone(), d.clone(), images).expect("vertex images")
}

/// `f(E)` as the span of the images of the key points of `E` and the knots inside it.
pub fn image_by_span(f: &TreeMap, e: &Region) -> Region {
    let d = f.domain();
    let mut pts: Vec<PointRef> = e.key_points(d).iter().map(|p| f.apply(p).unwrap()).collect();
    for (x, y) in f.knots() {
        if e.contains(d, &x) {
            pts.push(y);
        }
    }
    d.span(&pts).unwrap()
}
