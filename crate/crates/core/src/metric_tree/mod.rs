//! Finite metric trees with exact rational edge lengths.
//!
//! A [`Dendrite`] is a finite tree whose edges carry positive rational
//! lengths; the metric is the path metric, which is convex, so arcs are
//! geodesics. Infinite dendrites from the gallery appear here only as finite
//! truncations carrying a [`FamilyDescriptor`](crate::gallery::FamilyDescriptor).
//!
//! Points are [`PointRef`]s in canonical form: a vertex, or an edge with an
//! offset strictly between `0` and the edge length. Closed subsets that are
//! finite unions of arcs and points are [`Region`]s.

mod json;
mod ops;
mod region;
mod restrict;
mod subdivide;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gallery::FamilyDescriptor;
use crate::rational::{self, Q};

pub use json::{DendriteJson, EdgeJson, PointRefJson};
pub use ops::{ComplementComponent, ComplementDecomposition, Order};
pub use region::Region;
pub use restrict::Embedding;
pub use subdivide::Refinement;

pub type VertexId = usize;
pub type EdgeId = usize;

/// A position on a dendrite.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointRef {
    Vertex(VertexId),
    /// Edge id and offset from the edge's first endpoint `u`.
    Edge(EdgeId, Q),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub len: Q,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Offset of endpoint `w` along this edge (`0` for `u`, `len` for `v`).
    pub fn offset_of(&self, w: VertexId) -> Q {
        if w == self.u {
            Q::zero()
        } else {
            self.len.clone()
        }
    }
}

/// One leg of a [`Path`]: traverse `edge` from offset `from` to offset `to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seg {
    pub edge: EdgeId,
    pub from: Q,
    pub to: Q,
}

impl Seg {
    pub fn len(&self) -> Q {
        (&self.to - &self.from).abs()
    }
}

/// A geodesic, stored as the legs it traverses in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: PointRef,
    pub end: PointRef,
    pub segs: Vec<Seg>,
    pub length: Q,
}

#[derive(Clone, Debug)]
struct Index {
    adj: Vec<Vec<(EdgeId, VertexId)>>,
    parent: Vec<Option<(VertexId, EdgeId)>>,
    hops: Vec<usize>,
    root_dist: Vec<Q>,
    up: Vec<Vec<VertexId>>,
}

/// A finite metric tree.
#[derive(Clone, Debug)]
pub struct Dendrite {
    n_vertices: usize,
    edges: Vec<Edge>,
    marked: BTreeMap<String, PointRef>,
    descriptor: Option<FamilyDescriptor>,
    index: Index,
}

impl PartialEq for Dendrite {
    fn eq(&self, other: &Self) -> bool {
        self.n_vertices == other.n_vertices
            && self.edges == other.edges
            && self.marked == other.marked
            && self.descriptor == other.descriptor
    }
}

impl Dendrite {
    /// Builds and validates a tree on vertices `0..n_vertices`.
    pub fn new(
        n_vertices: usize,
        edges: Vec<Edge>,
        marked: BTreeMap<String, PointRef>,
        descriptor: Option<FamilyDescriptor>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::InvalidDendrite("no vertices".into()));
        }
        if edges.len() + 1 != n_vertices {
            return Err(Error::InvalidDendrite(format!(
                "{} vertices need {} edges, got {}",
                n_vertices,
                n_vertices - 1,
                edges.len()
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n_vertices || e.v >= n_vertices {
                return Err(Error::InvalidDendrite(format!("edge {i} has an unknown endpoint")));
            }
            if e.u == e.v {
                return Err(Error::InvalidDendrite(format!("edge {i} is a loop")));
            }
            if !e.len.is_positive() {
                return Err(Error::InvalidDendrite(format!(
                    "edge {i} has non-positive length {}",
                    rational::fmt(&e.len)
                )));
            }
        }
        let index = Index::build(n_vertices, &edges)?;
        let mut d = Dendrite { n_vertices, edges, marked: BTreeMap::new(), descriptor, index };
        for (name, p) in marked {
            let p = d.canon(&p)?;
            d.marked.insert(name, p);
        }
        Ok(d)
    }

    /// Convenience constructor from `(u, v, len)` triples.
    pub fn from_edges(n_vertices: usize, edges: &[(VertexId, VertexId, Q)]) -> Result<Self> {
        let edges = edges.iter().map(|(u, v, len)| Edge { u: *u, v: *v, len: len.clone() }).collect();
        Dendrite::new(n_vertices, edges, BTreeMap::new(), None)
    }

    /// An arc with breakpoints at the given increasing positions; vertex `i`
    /// sits at `breaks[i]`. Marks `left` and `right`.
    pub fn arc(breaks: &[Q]) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidDendrite("an arc needs two breakpoints".into()));
        }
        let edges: Vec<Edge> =
            breaks.windows(2).enumerate().map(|(i, w)| Edge { u: i, v: i + 1, len: &w[1] - &w[0] }).collect();
        let mut marked = BTreeMap::new();
        marked.insert("left".to_string(), PointRef::Vertex(0));
        marked.insert("right".to_string(), PointRef::Vertex(breaks.len() - 1));
        Dendrite::new(breaks.len(), edges, marked, None)
    }

    /// The unit interval as a single edge.
    pub fn unit_interval() -> Self {
        Dendrite::arc(&[rational::zero(), rational::one()]).expect("unit interval")
    }

    pub fn with_marked(mut self, name: &str, p: PointRef) -> Result<Self> {
        let p = self.canon(&p)?;
        self.marked.insert(name.to_string(), p);
        Ok(self)
    }

    pub fn with_descriptor(mut self, desc: FamilyDescriptor) -> Self {
        self.descriptor = Some(desc);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn len(&self, e: EdgeId) -> &Q {
        &self.edges[e].len
    }

    pub fn marked(&self, name: &str) -> Result<&PointRef> {
        self.marked.get(name).ok_or_else(|| Error::InvalidPoint(format!("no marked point named {name:?}")))
    }

    pub fn marked_points(&self) -> &BTreeMap<String, PointRef> {
        &self.marked
    }

    pub fn descriptor(&self) -> Option<&FamilyDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn incident(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.index.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.index.adj[v].len()
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().map(|e| e.len.clone()).sum()
    }

    /// Same combinatorics, new edge lengths.
    pub fn with_lengths(&self, lens: &[Q]) -> Result<Self> {
        if lens.len() != self.edges.len() {
            return Err(Error::InvalidDendrite("length vector has the wrong size".into()));
        }
        let edges = self.edges.iter().zip(lens).map(|(e, l)| Edge { u: e.u, v: e.v, len: l.clone() }).collect();
        Dendrite::new(self.n_vertices, edges, self.marked.clone(), self.descriptor.clone())
    }

    /// Uniformly rescaled copy.
    pub fn scaled(&self, factor: &Q) -> Result<Self> {
        let lens: Vec<Q> = self.edges.iter().map(|e| &e.len * factor).collect();
        self.with_lengths(&lens)
    }

    /// Validates a point and returns its canonical form.
    pub fn canon(&self, p: &PointRef) -> Result<PointRef> {
        match p {
            PointRef::Vertex(v) => {
                if *v < self.n_vertices {
                    Ok(p.clone())
                } else {
                    Err(Error::InvalidPoint(format!("vertex {v} out of range")))
                }
            }
            PointRef::Edge(e, t) => {
                let edge = self.edges.get(*e).ok_or_else(|| Error::InvalidPoint(format!("edge {e} out of range")))?;
                if t.is_negative() || *t > edge.len {
                    return Err(Error::InvalidPoint(format!(
                        "offset {} outside edge {e} of length {}",
                        rational::fmt(t),
                        rational::fmt(&edge.len)
                    )));
                }
                Ok(self.canon_unchecked(*e, t.clone()))
            }
        }
    }

    pub(crate) fn canon_unchecked(&self, e: EdgeId, t: Q) -> PointRef {
        let edge = &self.edges[e];
        if t.is_zero() {
            PointRef::Vertex(edge.u)
        } else if t == edge.len {
            PointRef::Vertex(edge.v)
        } else {
            PointRef::Edge(e, t)
        }
    }

    pub fn point_on_edge(&self, e: EdgeId, t: Q) -> Result<PointRef> {
        self.canon(&PointRef::Edge(e, t))
    }

    pub fn edge_midpoint(&self, e: EdgeId) -> PointRef {
        PointRef::Edge(e, &self.edges[e].len / rational::qi(2))
    }

    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        let ix = &self.index;
        if ix.hops[a] < ix.hops[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = ix.hops[a] - ix.hops[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = ix.up[k][a];
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..ix.up.len()).rev() {
            if ix.up[k][a] != ix.up[k][b] {
                a = ix.up[k][a];
                b = ix.up[k][b];
            }
        }
        ix.up[0][a]
    }

    pub fn vertex_dist(&self, a: VertexId, b: VertexId) -> Q {
        let c = self.lca(a, b);
        let rd = &self.index.root_dist;
        &rd[a] + &rd[b] - &rd[c] - &rd[c]
    }

    /// Edges from `a` to `b` in travel order, each with the vertex it is entered from.
    pub fn vertex_path(&self, a: VertexId, b: VertexId) -> Vec<(EdgeId, VertexId)> {
        let c = self.lca(a, b);
        let mut head = Vec::new();
        let mut x = a;
        while x != c {
            let (p, e) = self.index.parent[x].expect("non-root has parent");
            head.push((e, x));
            x = p;
        }
        let mut tail = Vec::new();
        let mut y = b;
        while y != c {
            let (p, e) = self.index.parent[y].expect("non-root has parent");
            tail.push((e, p));
            y = p;
        }
        tail.reverse();
        head.extend(tail);
        head
    }

    /// Ways to leave a point: `(vertex, cost to reach it, leg used)`.
    fn exits(&self, p: &PointRef) -> Vec<(VertexId, Q, Option<Seg>)> {
        match p {
            PointRef::Vertex(v) => vec![(*v, Q::zero(), None)],
            PointRef::Edge(e, t) => {
                let ed = &self.edges[*e];
                vec![
                    (ed.u, t.clone(), Some(Seg { edge: *e, from: t.clone(), to: Q::zero() })),
                    (ed.v, &ed.len - t, Some(Seg { edge: *e, from: t.clone(), to: ed.len.clone() })),
                ]
            }
        }
    }

    fn check(&self, p: &PointRef) -> Result<()> {
        self.canon(p).map(|_| ())
    }

    /// Path-metric distance.
    pub fn dist(&self, x: &PointRef, y: &PointRef) -> Result<Q> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.dist_unchecked(x, y))
    }

    pub(crate) fn dist_unchecked(&self, x: &PointRef, y: &PointRef) -> Q {
        if let (PointRef::Edge(e1, t1), PointRef::Edge(e2, t2)) = (x, y) {
            if e1 == e2 {
                return (t1 - t2).abs();
            }
        }
        let mut best: Option<Q> = None;
        for (vx, cx, _) in self.exits(x) {
            for (vy, cy, _) in self.exits(y) {
                let c = &cx + &cy + self.vertex_dist(vx, vy);
                if best.as_ref().is_none_or(|b| c < *b) {
                    best = Some(c);
                }
            }
        }
        best.expect("at least one route")
    }

    /// The unique arc from `x` to `y` as a sequence of legs.
    pub fn geodesic_path(&self, x: &PointRef, y: &PointRef) -> Result<Path> {
        let x = self.canon(x)?;
        let y = self.canon(y)?;
        Ok(self.path_unchecked(&x, &y))
    }

    pub(crate) fn path_unchecked(&self, x: &PointRef, y: &PointRef) -> Path {
        if x == y {
            return Path { start: x.clone(), end: y.clone(), segs: vec![], length: Q::zero() };
        }
        if let (PointRef::Edge(e1, t1), PointRef::Edge(e2, t2)) = (x, y) {
            if e1 == e2 {
                return Path {
                    start: x.clone(),
                    end: y.clone(),
                    segs: vec![Seg { edge: *e1, from: t1.clone(), to: t2.clone() }],
                    length: (t1 - t2).abs(),
                };
            }
        }
        let mut best: Option<(Q, VertexId, Option<Seg>, VertexId, Option<Seg>)> = None;
        for (vx, cx, sx) in self.exits(x) {
            for (vy, cy, sy) in self.exits(y) {
                let c = &cx + &cy + self.vertex_dist(vx, vy);
                if best.as_ref().is_none_or(|b| c < b.0) {
                    best = Some((c, vx, sx.clone(), vy, sy));
                }
            }
        }
        let (length, vx, sx, vy, sy) = best.expect("at least one route");
        let mut segs = Vec::new();
        if let Some(s) = sx {
            segs.push(s);
        }
        for (e, from) in self.vertex_path(vx, vy) {
            let ed = &self.edges[e];
            let (a, b) = if from == ed.u { (Q::zero(), ed.len.clone()) } else { (ed.len.clone(), Q::zero()) };
            segs.push(Seg { edge: e, from: a, to: b });
        }
        if let Some(s) = sy {
            // entry leg is stored pointing away from y; reverse it
            segs.push(Seg { edge: s.edge, from: s.to, to: s.from });
        }
        Path { start: x.clone(), end: y.clone(), segs, length }
    }

    /// The arc `[x, y]`.
    pub fn geodesic(&self, x: &PointRef, y: &PointRef) -> Result<Region> {
        let p = self.geodesic_path(x, y)?;
        Ok(self.path_region(&p))
    }

    /// Point at distance `s` from `x` along `[x, y]` (clamped to the arc).
    pub fn point_along(&self, x: &PointRef, y: &PointRef, s: &Q) -> Result<PointRef> {
        let p = self.geodesic_path(x, y)?;
        Ok(self.path_point(&p, s))
    }

    pub(crate) fn path_point(&self, path: &Path, s: &Q) -> PointRef {
        if !s.is_positive() {
            return path.start.clone();
        }
        let mut acc = Q::zero();
        for seg in &path.segs {
            let l = seg.len();
            let next = &acc + &l;
            if *s <= next {
                let r = s - &acc;
                let t = if seg.to >= seg.from { &seg.from + &r } else { &seg.from - &r };
                return self.canon_unchecked(seg.edge, t);
            }
            acc = next;
        }
        path.end.clone()
    }

    /// Region covered by the portion `[s0, s1]` (arclength) of a path.
    pub(crate) fn subpath_region(&self, path: &Path, s0: &Q, s1: &Q) -> Region {
        let (s0, s1) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        let mut r = Region::empty();
        if path.segs.is_empty() {
            r.add_point(self, &path.start);
            return r;
        }
        let mut acc = Q::zero();
        for seg in &path.segs {
            let l = seg.len();
            let next = &acc + &l;
            let lo = rational::max(&acc, s0);
            let hi = rational::min(&next, s1);
            if lo <= hi {
                let map = |s: &Q| {
                    let r = s - &acc;
                    if seg.to >= seg.from {
                        &seg.from + r
                    } else {
                        &seg.from - r
                    }
                };
                let a = map(&lo);
                let b = map(&hi);
                r.add_interval(seg.edge, rational::min(&a, &b), rational::max(&a, &b));
            }
            acc = next;
        }
        r.normalize(self);
        r
    }

    pub(crate) fn path_region(&self, path: &Path) -> Region {
        let len = path.length.clone();
        self.subpath_region(path, &Q::zero(), &len)
    }

    /// Closed ball of radius `r` around `x`.
    pub fn ball(&self, x: &PointRef, r: &Q) -> Result<Region> {
        let x = self.canon(x)?;
        if r.is_negative() {
            return Err(Error::InvalidArgument("negative radius".into()));
        }
        let mut reg = Region::empty();
        reg.add_point(self, &x);
        let dv: Vec<Q> = (0..self.n_vertices).map(|v| self.dist_unchecked(&x, &PointRef::Vertex(v))).collect();
        for (e, ed) in self.edges.iter().enumerate() {
            if let PointRef::Edge(xe, t) = &x {
                if *xe == e {
                    let lo = rational::max(&Q::zero(), &(t - r));
                    let hi = rational::min(&ed.len, &(t + r));
                    reg.add_interval(e, lo, hi);
                    continue;
                }
            }
            let (near_u, slack) = if dv[ed.u] <= dv[ed.v] { (true, r - &dv[ed.u]) } else { (false, r - &dv[ed.v]) };
            if slack.is_negative() {
                continue;
            }
            let reach = rational::min(&slack, &ed.len);
            if near_u {
                reg.add_interval(e, Q::zero(), reach);
            } else {
                reg.add_interval(e, &ed.len - &reach, ed.len.clone());
            }
        }
        reg.normalize(self);
        Ok(reg)
    }

    /// The whole space as a region.
    pub fn whole(&self) -> Region {
        let mut r = Region::empty();
        for (e, ed) in self.edges.iter().enumerate() {
            r.add_interval(e, Q::zero(), ed.len.clone());
        }
        for v in 0..self.n_vertices {
            r.add_vertex(v);
        }
        r.normalize(self);
        r
    }

    pub fn point_region(&self, p: &PointRef) -> Result<Region> {
        let p = self.canon(p)?;
        let mut r = Region::empty();
        r.add_point(self, &p);
        r.normalize(self);
        Ok(r)
    }

    /// The subtree spanned by a finite set of points.
    pub fn span(&self, pts: &[PointRef]) -> Result<Region> {
        let first = pts.first().ok_or(Error::EmptySet)?;
        let mut r = self.point_region(first)?;
        for p in &pts[1..] {
            r = r.union(self, &self.geodesic(first, p)?);
        }
        Ok(r)
    }

    /// Vertices of degree one.
    pub fn endpoints(&self) -> Vec<VertexId> {
        (0..self.n_vertices).filter(|&v| self.degree(v) == 1).collect()
    }

    /// Vertices of degree at least three.
    pub fn branch_points(&self) -> Vec<VertexId> {
        (0..self.n_vertices).filter(|&v| self.degree(v) >= 3).collect()
    }

    /// A random point: uniform edge, offset on a grid of `den` steps.
    pub fn random_point<R: rand::Rng + ?Sized>(&self, rng: &mut R, den: u32) -> PointRef {
        let e = rng.gen_range(0..self.edges.len().max(1));
        if self.edges.is_empty() {
            return PointRef::Vertex(0);
        }
        let k = rng.gen_range(0..=den);
        let t = &self.edges[e].len * Q::new(k.into(), den.into());
        self.canon_unchecked(e, t)
    }

    /// A random nondegenerate arc built from two random points.
    pub fn random_arc<R: rand::Rng + ?Sized>(&self, rng: &mut R, den: u32) -> Region {
        loop {
            let x = self.random_point(rng, den);
            let y = self.random_point(rng, den);
            if x != y {
                let p = self.path_unchecked(&x, &y);
                return self.path_region(&p);
            }
        }
    }

    /// The subtree spanned by `k` random points (nondegenerate).
    pub fn random_subtree<R: rand::Rng + ?Sized>(&self, rng: &mut R, k: usize, den: u32) -> Region {
        loop {
            let pts: Vec<PointRef> = (0..k.max(2)).map(|_| self.random_point(rng, den)).collect();
            let r = self.span(&pts).expect("points are valid");
            if r.h1().is_positive() {
                return r;
            }
        }
    }
}

impl Index {
    fn build(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((i, e.v));
            adj[e.v].push((i, e.u));
        }
        let mut parent = vec![None; n];
        let mut hops = vec![0usize; n];
        let mut root_dist = vec![Q::zero(); n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(e, y) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    hops[y] = hops[x] + 1;
                    root_dist[y] = &root_dist[x] + &edges[e].len;
                    queue.push_back(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidDendrite("edge graph is not connected".into()));
        }
        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = vec![(0..n).map(|v| parent[v].map_or(v, |(p, _)| p)).collect::<Vec<_>>()];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(Index { adj, parent, hops, root_dist, up })
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::star3;
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn star_distances() {
        let d = star3();
        assert_eq!(d.dist(&PointRef::Vertex(1), &PointRef::Vertex(2)).unwrap(), q(5, 6));
        assert_eq!(d.dist(&PointRef::Vertex(0), &PointRef::Vertex(0)).unwrap(), qi(0));
        let mid1 = PointRef::Edge(0, q(1, 4));
        assert_eq!(d.dist(&mid1, &PointRef::Vertex(3)).unwrap(), q(1, 4) + q(1, 6));
    }

    #[test]
    fn invalid_points_rejected() {
        let d = star3();
        assert!(d.dist(&PointRef::Vertex(9), &PointRef::Vertex(0)).is_err());
        assert!(d.canon(&PointRef::Edge(0, q(3, 4))).is_err());
        assert!(d.canon(&PointRef::Edge(5, q(0, 1))).is_err());
    }

    #[test]
    fn canonical_endpoints() {
        let d = star3();
        assert_eq!(d.canon(&PointRef::Edge(0, q(1, 2))).unwrap(), PointRef::Vertex(1));
        assert_eq!(d.canon(&PointRef::Edge(1, qi(0))).unwrap(), PointRef::Vertex(0));
    }

    #[test]
    fn geodesic_runs_through_center() {
        let d = star3();
        let g = d.geodesic(&PointRef::Vertex(1), &PointRef::Vertex(2)).unwrap();
        assert!(g.contains(&d, &PointRef::Vertex(0)));
        assert!(!g.contains(&d, &PointRef::Edge(2, q(1, 12))));
        assert_eq!(g.h1(), q(5, 6));
        let single = d.geodesic(&PointRef::Vertex(1), &PointRef::Vertex(1)).unwrap();
        assert_eq!(single.h1(), qi(0));
        assert!(single.contains(&d, &PointRef::Vertex(1)));
    }

    #[test]
    fn point_along_walks_the_arc() {
        let d = star3();
        let p = d.point_along(&PointRef::Vertex(1), &PointRef::Vertex(2), &q(2, 3)).unwrap();
        assert_eq!(p, PointRef::Edge(1, q(1, 6)));
        let p = d.point_along(&PointRef::Vertex(1), &PointRef::Vertex(2), &q(1, 2)).unwrap();
        assert_eq!(p, PointRef::Vertex(0));
    }

    #[test]
    fn structure_checks() {
        assert!(Dendrite::from_edges(3, &[(0, 1, qi(1))]).is_err());
        assert!(Dendrite::from_edges(2, &[(0, 1, qi(0))]).is_err());
        assert!(Dendrite::from_edges(3, &[(0, 1, qi(1)), (0, 1, qi(1))]).is_err());
    }

    #[test]
    fn balls_clip_edges() {
        let d = star3();
        let b = d.ball(&PointRef::Vertex(0), &q(1, 4)).unwrap();
        // 1/4 + 1/4 + 1/6 (arm 3 fully inside)
        assert_eq!(b.h1(), q(2, 3));
        let b = d.ball(&PointRef::Edge(0, q(1, 4)), &q(1, 8)).unwrap();
        assert_eq!(b.h1(), q(1, 4));
    }
}
