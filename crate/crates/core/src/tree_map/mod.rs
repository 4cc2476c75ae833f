//! Continuous maps between finite metric trees.
//!
//! A [`TreeMap`] is given by images of the vertices of a subdivision of its
//! domain; every subdivision edge is carried at constant speed onto the
//! geodesic joining the images of its ends. The class is closed under
//! composition, and images of regions are computed exactly.

mod orbit;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_tree::{Dendrite, EdgeId, Path, PointRef, Refinement, Region};
use crate::rational::{serde_q, Q};

pub use orbit::{Finding, OrbitDecomposition, Relation};

#[derive(Clone, Debug)]
pub struct TreeMap {
    domain: Dendrite,
    target: Dendrite,
    space: Dendrite,
    refinement: Refinement,
    images: Vec<PointRef>,
    paths: Vec<Path>,
}

impl TreeMap {
    /// Builds a map from vertex images plus interior knots `(offset, image)` per domain edge.
    pub fn from_knots(
        domain: Dendrite,
        target: Dendrite,
        vertex_images: Vec<PointRef>,
        knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>>,
    ) -> Result<Self> {
        if vertex_images.len() != domain.vertex_count() {
            return Err(Error::InvalidMap(format!(
                "{} vertex images for {} vertices",
                vertex_images.len(),
                domain.vertex_count()
            )));
        }
        let mut cuts: BTreeMap<EdgeId, BTreeSet<Q>> = BTreeMap::new();
        let mut at: BTreeMap<(EdgeId, Q), PointRef> = BTreeMap::new();
        for (e, ks) in knots {
            if e >= domain.edge_count() {
                return Err(Error::InvalidMap(format!("knot on unknown edge {e}")));
            }
            for (t, img) in ks {
                if !t.is_positive() || t >= *domain.len(e) {
                    return Err(Error::InvalidMap(format!("knot offset outside edge {e}")));
                }
                let img = target.canon(&img)?;
                if let Some(prev) = at.get(&(e, t.clone())) {
                    if *prev != img {
                        return Err(Error::InvalidMap("conflicting images at one knot".into()));
                    }
                }
                cuts.entry(e).or_default().insert(t.clone());
                at.insert((e, t), img);
            }
        }
        let (space, refinement) = domain.subdivide(&cuts)?;
        let mut images = Vec::with_capacity(space.vertex_count());
        for img in vertex_images {
            images.push(target.canon(&img)?);
        }
        for v in domain.vertex_count()..space.vertex_count() {
            let (e, t) = refinement.vertex_origin(v).expect("new vertex has an origin").clone();
            images.push(at[&(e, t)].clone());
        }
        let paths = space.edges().iter().map(|ed| target.path_unchecked(&images[ed.u], &images[ed.v])).collect();
        Ok(TreeMap { domain, target, space, refinement, images, paths })
    }

    pub fn from_vertex_images(domain: Dendrite, target: Dendrite, images: Vec<PointRef>) -> Result<Self> {
        TreeMap::from_knots(domain, target, images, BTreeMap::new())
    }

    /// Selfmap from vertex images and knots.
    pub fn selfmap(
        domain: Dendrite,
        vertex_images: Vec<PointRef>,
        knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>>,
    ) -> Result<Self> {
        let target = domain.clone();
        TreeMap::from_knots(domain, target, vertex_images, knots)
    }

    pub fn identity(d: &Dendrite) -> Self {
        let images = (0..d.vertex_count()).map(PointRef::Vertex).collect();
        TreeMap::selfmap(d.clone(), images, BTreeMap::new()).expect("identity map")
    }

    pub fn domain(&self) -> &Dendrite {
        &self.domain
    }

    pub fn target(&self) -> &Dendrite {
        &self.target
    }

    /// The subdivision on whose edges the map is geodesic.
    pub fn space(&self) -> &Dendrite {
        &self.space
    }

    pub fn refinement(&self) -> &Refinement {
        &self.refinement
    }

    /// Every subdivision vertex in domain coordinates with its image.
    pub fn knots(&self) -> Vec<(PointRef, PointRef)> {
        (0..self.space.vertex_count())
            .map(|v| (self.refinement.lower_point(&self.domain, &PointRef::Vertex(v)), self.images[v].clone()))
            .collect()
    }

    pub fn piece_count(&self) -> usize {
        self.space.edge_count()
    }

    pub fn is_selfmap(&self) -> bool {
        same_shape(&self.domain, &self.target)
    }

    pub fn apply(&self, x: &PointRef) -> Result<PointRef> {
        let x = self.domain.canon(x)?;
        Ok(self.apply_unchecked(&x))
    }

    pub(crate) fn apply_unchecked(&self, x: &PointRef) -> PointRef {
        let p = self.refinement.lift_point(&self.space, x);
        self.apply_space(&p)
    }

    fn apply_space(&self, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => self.images[*v].clone(),
            PointRef::Edge(e, t) => {
                let path = &self.paths[*e];
                let s = t * &path.length / self.space.len(*e);
                self.target.path_point(path, &s)
            }
        }
    }

    /// Exact image of a region given in domain coordinates.
    pub fn image(&self, r: &Region) -> Region {
        let fine = self.refinement.lift_region(&self.space, r);
        let mut out = Region::empty();
        for v in fine.vertices() {
            out.add_point(&self.target, &self.images[*v]);
        }
        for (e, ivs) in fine.spans() {
            let path = &self.paths[*e];
            let len = self.space.len(*e);
            for (lo, hi) in ivs {
                let s0 = lo * &path.length / len;
                let s1 = hi * &path.length / len;
                out.extend_raw(&self.target.subpath_region(path, &s0, &s1));
            }
        }
        out.normalize(&self.target);
        out
    }

    /// `f^n(E)` for `n = 0..=steps`; stops repeating work once the set is invariant.
    pub fn orbit_of(&self, e: &Region, steps: usize) -> Vec<Region> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(e.clone());
        for n in 0..steps {
            let next = self.image(&out[n]);
            let done = next == out[n];
            out.push(next);
            if done {
                let last = out[n + 1].clone();
                out.resize(steps + 1, last);
                break;
            }
        }
        out
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &TreeMap) -> Result<TreeMap> {
        if !same_shape(f.target(), &self.domain) {
            return Err(Error::InvalidMap("target of the inner map is not the domain of the outer one".into()));
        }
        let dom = &f.domain;
        let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
        let push = |pt: PointRef, knots: &mut BTreeMap<EdgeId, Vec<(Q, PointRef)>>| {
            if let PointRef::Edge(e, t) = &pt {
                let img = self.apply_unchecked(&f.apply_unchecked(&pt));
                knots.entry(*e).or_default().push((t.clone(), img));
            }
        };
        for v in dom.vertex_count()..f.space.vertex_count() {
            let pt = f.refinement.lower_point(dom, &PointRef::Vertex(v));
            push(pt, &mut knots);
        }
        for (fe, path) in f.paths.iter().enumerate() {
            if path.length.is_zero() {
                continue;
            }
            let flen = f.space.len(fe);
            let piece = f.refinement.piece(fe);
            let mut acc = Q::zero();
            let nseg = path.segs.len();
            for (i, seg) in path.segs.iter().enumerate() {
                let (lo, hi) = if seg.from <= seg.to { (&seg.from, &seg.to) } else { (&seg.to, &seg.from) };
                let mut hits: Vec<Q> = Vec::new();
                for &sub in self.refinement.pieces_of(seg.edge).iter().skip(1) {
                    let c = &self.refinement.piece(sub).start;
                    if c > lo && c < hi {
                        hits.push(&acc + (c - &seg.from).abs());
                    }
                }
                let seg_end = &acc + seg.len();
                if i + 1 < nseg {
                    hits.push(seg_end.clone());
                }
                for s in hits {
                    let t = &piece.start + s * flen / &path.length;
                    push(PointRef::Edge(piece.parent, t), &mut knots);
                }
                acc = seg_end;
            }
        }
        for ks in knots.values_mut() {
            ks.sort_by(|a, b| a.0.cmp(&b.0));
            ks.dedup_by(|a, b| a.0 == b.0);
        }
        let vimg =
            (0..dom.vertex_count()).map(|v| self.apply_unchecked(&f.apply_unchecked(&PointRef::Vertex(v)))).collect();
        TreeMap::from_knots(dom.clone(), self.target.clone(), vimg, knots)
    }

    /// `f^n` as a single map.
    pub fn power(&self, n: usize) -> Result<TreeMap> {
        let mut acc = TreeMap::identity(&self.domain);
        for _ in 0..n {
            acc = self.after(&acc)?;
        }
        Ok(acc)
    }

    /// The same map expressed on a dendrite with identical combinatorics but
    /// different edge lengths, conjugating by the edgewise-linear homeomorphism.
    pub fn transport(&self, new_domain: &Dendrite, new_target: &Dendrite) -> Result<TreeMap> {
        if !same_combinatorics(&self.domain, new_domain) || !same_combinatorics(&self.target, new_target) {
            return Err(Error::InvalidMap("transport needs identical combinatorics".into()));
        }
        let ids = |d: &Dendrite| (0..d.vertex_count()).map(PointRef::Vertex).collect::<Vec<_>>();
        let h = TreeMap::from_vertex_images(new_domain.clone(), self.domain.clone(), ids(new_domain))?;
        let back = TreeMap::from_vertex_images(self.target.clone(), new_target.clone(), ids(new_target))?;
        back.after(&self.after(&h)?)
    }

    /// A selfmap of a subdivision rewritten as a selfmap of the coarse tree.
    pub fn coarsen(&self, coarse: &Dendrite, refi: &Refinement) -> Result<TreeMap> {
        if refi.fine_vertex_count() != self.domain.vertex_count() || !self.is_selfmap() {
            return Err(Error::InvalidMap("map does not live on this subdivision".into()));
        }
        let mut vimg = vec![PointRef::Vertex(0); coarse.vertex_count()];
        let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
        for (x, y) in self.knots() {
            let y = refi.lower_point(coarse, &y);
            match refi.lower_point(coarse, &x) {
                PointRef::Vertex(v) => vimg[v] = y,
                PointRef::Edge(e, t) => knots.entry(e).or_default().push((t, y)),
            }
        }
        TreeMap::selfmap(coarse.clone(), vimg, knots)
    }

    /// Is `f(src) ⊆ dst`?
    pub fn maps_into(&self, src: &Region, dst: &Region) -> bool {
        self.image(src).is_subset(&self.target, dst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub(crate) fn same_combinatorics(a: &Dendrite, b: &Dendrite) -> bool {
    a.vertex_count() == b.vertex_count() && a.edges().iter().zip(b.edges()).all(|(x, y)| x.u == y.u && x.v == y.v)
}

pub(crate) fn same_shape(a: &Dendrite, b: &Dendrite) -> bool {
    same_combinatorics(a, b) && a.edges().iter().zip(b.edges()).all(|(x, y)| x.len == y.len)
}

#[derive(Serialize, Deserialize)]
struct KnotJson {
    edge: EdgeId,
    #[serde(with = "serde_q")]
    offset: Q,
    image: PointRef,
}

#[derive(Serialize, Deserialize)]
struct TreeMapJson {
    domain: Dendrite,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Dendrite>,
    vertex_images: Vec<PointRef>,
    #[serde(default)]
    knots: Vec<KnotJson>,
}

impl Serialize for TreeMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let knots = self
            .knots()
            .into_iter()
            .filter_map(|(at, image)| match at {
                PointRef::Edge(edge, offset) => Some(KnotJson { edge, offset, image }),
                PointRef::Vertex(_) => None,
            })
            .collect();
        TreeMapJson {
            domain: self.domain.clone(),
            target: (!self.is_selfmap()).then(|| self.target.clone()),
            vertex_images: self.images[..self.domain.vertex_count()].to_vec(),
            knots,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TreeMapJson::deserialize(d)?;
        let target = j.target.unwrap_or_else(|| j.domain.clone());
        let mut knots: BTreeMap<EdgeId, Vec<(Q, PointRef)>> = BTreeMap::new();
        for k in j.knots {
            knots.entry(k.edge).or_default().push((k.offset, k.image));
        }
        TreeMap::from_knots(j.domain, target, j.vertex_images, knots).map_err(serde::de::Error::custom)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::{at, tent};
    use super::*;
    use crate::gallery::star3;
    use crate::rational::{q, qi};

    #[test]
    fn tent_values() {
        let t = tent();
        assert_eq!(t.apply(&at(q(1, 2))).unwrap(), PointRef::Vertex(1));
        assert_eq!(t.apply(&PointRef::Vertex(0)).unwrap(), PointRef::Vertex(0));
        assert_eq!(t.apply(&at(q(3, 8))).unwrap(), at(q(3, 4)));
        let tt = t.after(&t).unwrap();
        assert_eq!(tt.apply(&at(q(3, 8))).unwrap(), at(q(1, 2)));
        assert_eq!(tt.piece_count(), 4);
    }

    #[test]
    fn tent_images() {
        let t = tent();
        let d = t.domain().clone();
        let e = d.geodesic(&at(qi(0)), &at(q(1, 4))).unwrap();
        assert_eq!(t.image(&e), d.geodesic(&at(qi(0)), &at(q(1, 2))).unwrap());
        assert!(t.image(&d.whole()).is_whole(&d));
        let c = d.geodesic(&at(q(1, 4)), &at(q(3, 4))).unwrap();
        assert_eq!(t.image(&c), d.geodesic(&at(q(1, 2)), &at(qi(1))).unwrap());
    }

    #[test]
    fn star_arm_over_the_others() {
        let d = star3();
        // arm 1 folds over arms 2 and 3, the rest collapses to the center
        let knots = BTreeMap::from([(0, vec![(q(1, 4), PointRef::Vertex(2))])]);
        let f = TreeMap::selfmap(
            d.clone(),
            vec![PointRef::Vertex(0), PointRef::Vertex(3), PointRef::Vertex(0), PointRef::Vertex(0)],
            knots,
        )
        .unwrap();
        let arm1 = d.geodesic(&PointRef::Vertex(0), &PointRef::Vertex(1)).unwrap();
        let img = f.image(&arm1);
        let expect = d.geodesic(&PointRef::Vertex(2), &PointRef::Vertex(3)).unwrap();
        assert_eq!(img, expect);
        assert_eq!(img.h1(), q(1, 2));
    }

    #[test]
    fn json_round_trip() {
        let t = tent().after(&tent()).unwrap();
        let back = TreeMap::from_json(&t.to_json()).unwrap();
        assert_eq!(back.knots(), t.knots());
        assert_eq!(back.to_json(), t.to_json());
    }

    #[test]
    fn transport_keeps_combinatorics() {
        let t = tent();
        let longer = t.domain().scaled(&qi(3)).unwrap();
        let s = t.transport(&longer, &longer).unwrap();
        assert_eq!(s.apply(&PointRef::Edge(0, q(3, 2))).unwrap(), PointRef::Vertex(1));
        assert_eq!(s.apply(&PointRef::Edge(0, q(3, 4))).unwrap(), PointRef::Edge(0, q(3, 2)));
    }
}
