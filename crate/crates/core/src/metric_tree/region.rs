use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{Dendrite, EdgeId, PointRef, VertexId};
use crate::rational::{self, Q};

/// A closed subset that is a finite union of points and edge intervals.
///
/// Stored in a canonical form so that structural equality is set equality:
/// intervals on each edge are sorted and merged, an interval touching an end
/// of its edge implies that end vertex is present, and a degenerate interval
/// sitting on an edge end is represented by the vertex alone.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Region {
    vertices: BTreeSet<VertexId>,
    spans: BTreeMap<EdgeId, Vec<(Q, Q)>>,
}

impl Region {
    pub fn empty() -> Self {
        Region::default()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.spans.is_empty()
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn spans(&self) -> &BTreeMap<EdgeId, Vec<(Q, Q)>> {
        &self.spans
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    /// Adds `[lo, hi]` on edge `e` without normalizing.
    pub fn add_interval(&mut self, e: EdgeId, lo: Q, hi: Q) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        self.spans.entry(e).or_default().push((lo, hi));
    }

    pub fn add_point(&mut self, _d: &Dendrite, p: &PointRef) {
        match p {
            PointRef::Vertex(v) => self.add_vertex(*v),
            PointRef::Edge(e, t) => self.add_interval(*e, t.clone(), t.clone()),
        }
    }

    /// Adds all of `other` without normalizing.
    pub fn extend_raw(&mut self, other: &Region) {
        self.vertices.extend(other.vertices.iter().copied());
        for (e, ivs) in &other.spans {
            self.spans.entry(*e).or_default().extend(ivs.iter().cloned());
        }
    }

    /// Restores the canonical form.
    pub fn normalize(&mut self, d: &Dendrite) {
        let mut spans = BTreeMap::new();
        for (e, mut ivs) in std::mem::take(&mut self.spans) {
            let edge = d.edge(e);
            ivs.sort();
            let mut merged: Vec<(Q, Q)> = Vec::with_capacity(ivs.len());
            for (lo, hi) in ivs {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => {
                        if hi > last.1 {
                            last.1 = hi;
                        }
                    }
                    _ => merged.push((lo, hi)),
                }
            }
            let mut kept = Vec::with_capacity(merged.len());
            for (lo, hi) in merged {
                if lo.is_zero() {
                    self.vertices.insert(edge.u);
                }
                if hi == edge.len {
                    self.vertices.insert(edge.v);
                }
                let degenerate_end = lo == hi && (lo.is_zero() || hi == edge.len);
                if !degenerate_end {
                    kept.push((lo, hi));
                }
            }
            if !kept.is_empty() {
                spans.insert(e, kept);
            }
        }
        self.spans = spans;
    }

    pub fn union(&self, d: &Dendrite, other: &Region) -> Region {
        let mut r = self.clone();
        r.extend_raw(other);
        r.normalize(d);
        r
    }

    pub fn intersect(&self, d: &Dendrite, other: &Region) -> Region {
        let mut r = Region::empty();
        r.vertices = self.vertices.intersection(&other.vertices).copied().collect();
        for (e, a) in &self.spans {
            if let Some(b) = other.spans.get(e) {
                for (alo, ahi) in a {
                    for (blo, bhi) in b {
                        let lo = rational::max(alo, blo);
                        let hi = rational::min(ahi, bhi);
                        if lo <= hi {
                            r.add_interval(*e, lo, hi);
                        }
                    }
                }
            }
        }
        r.normalize(d);
        r
    }

    pub fn intersects(&self, d: &Dendrite, other: &Region) -> bool {
        if self.vertices.intersection(&other.vertices).next().is_some() {
            return true;
        }
        !self.intersect(d, other).is_empty()
    }

    pub fn is_subset(&self, d: &Dendrite, other: &Region) -> bool {
        self.intersect(d, other) == *self
    }

    pub fn contains(&self, _d: &Dendrite, p: &PointRef) -> bool {
        match p {
            PointRef::Vertex(v) => self.vertices.contains(v),
            PointRef::Edge(e, t) => self.spans.get(e).is_some_and(|ivs| ivs.iter().any(|(lo, hi)| lo <= t && t <= hi)),
        }
    }

    /// One-dimensional Hausdorff measure.
    pub fn h1(&self) -> Q {
        self.spans.values().flatten().map(|(lo, hi)| hi - lo).sum()
    }

    /// Is the whole of edge `e` inside?
    pub fn covers_edge(&self, d: &Dendrite, e: EdgeId) -> bool {
        self.spans.get(&e).is_some_and(|ivs| ivs.len() == 1 && ivs[0].0.is_zero() && ivs[0].1 == *d.len(e))
    }

    /// Vertices and interval endpoints; every extreme and boundary point is among them.
    pub fn key_points(&self, d: &Dendrite) -> Vec<PointRef> {
        let mut pts: BTreeSet<PointRef> = self.vertices.iter().map(|v| PointRef::Vertex(*v)).collect();
        for (e, ivs) in &self.spans {
            for (lo, hi) in ivs {
                pts.insert(d.canon_unchecked(*e, lo.clone()));
                pts.insert(d.canon_unchecked(*e, hi.clone()));
            }
        }
        pts.into_iter().collect()
    }

    /// Some point of the region.
    pub fn any_point(&self) -> Option<PointRef> {
        if let Some(v) = self.vertices.iter().next() {
            return Some(PointRef::Vertex(*v));
        }
        self.spans.iter().next().map(|(e, ivs)| PointRef::Edge(*e, ivs[0].0.clone()))
    }

    pub fn diam(&self, d: &Dendrite) -> Q {
        let pts = self.key_points(d);
        let Some(first) = pts.first() else {
            return Q::zero();
        };
        let far = |from: &PointRef| {
            let mut best = (Q::zero(), from.clone());
            for p in &pts {
                let dd = d.dist_unchecked(from, p);
                if dd > best.0 {
                    best = (dd, p.clone());
                }
            }
            best
        };
        let (_, a) = far(first);
        far(&a).0
    }

    /// Distance between two regions (zero when they meet).
    pub fn distance(&self, d: &Dendrite, other: &Region) -> Q {
        if self.intersects(d, other) {
            return Q::zero();
        }
        let a = self.key_points(d);
        let b = other.key_points(d);
        let mut best: Option<Q> = None;
        for x in &a {
            for y in &b {
                let dd = d.dist_unchecked(x, y);
                if best.as_ref().is_none_or(|m| dd < *m) {
                    best = Some(dd);
                }
            }
        }
        best.unwrap_or_else(Q::zero)
    }

    /// Connected components.
    pub fn components(&self, d: &Dendrite) -> Vec<Region> {
        let verts: Vec<VertexId> = self.vertices.iter().copied().collect();
        let vix: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut atoms: Vec<Region> = verts
            .iter()
            .map(|v| {
                let mut r = Region::empty();
                r.add_vertex(*v);
                r
            })
            .collect();
        let mut links: Vec<(usize, usize)> = Vec::new();
        for (e, ivs) in &self.spans {
            let edge = d.edge(*e);
            for (lo, hi) in ivs {
                let id = atoms.len();
                let mut r = Region::empty();
                r.add_interval(*e, lo.clone(), hi.clone());
                atoms.push(r);
                if lo.is_zero() {
                    links.push((id, vix[&edge.u]));
                }
                if *hi == edge.len {
                    links.push((id, vix[&edge.v]));
                }
            }
        }
        let groups = union_find(atoms.len(), &links);
        let mut out: BTreeMap<usize, Region> = BTreeMap::new();
        for (i, atom) in atoms.into_iter().enumerate() {
            out.entry(groups[i]).or_default().extend_raw(&atom);
        }
        out.into_values()
            .map(|mut r| {
                r.normalize(d);
                r
            })
            .collect()
    }

    pub fn is_connected(&self, d: &Dendrite) -> bool {
        self.components(d).len() <= 1
    }

    /// Nearest point of the region to `x`; for a connected region this is the
    /// first point met when walking from `x` toward it.
    pub fn project(&self, d: &Dendrite, x: &PointRef) -> Option<PointRef> {
        if self.contains(d, x) {
            return Some(x.clone());
        }
        let mut best: Option<(Q, PointRef)> = None;
        for p in self.key_points(d) {
            let dd = d.dist_unchecked(x, &p);
            if best.as_ref().is_none_or(|b| dd < b.0) {
                best = Some((dd, p));
            }
        }
        best.map(|b| b.1)
    }

    /// Does the region contain every point of `d`?
    pub fn is_whole(&self, d: &Dendrite) -> bool {
        self.vertices.len() == d.vertex_count() && (0..d.edge_count()).all(|e| self.covers_edge(d, e))
    }
}

pub(crate) fn union_find(n: usize, links: &[(usize, usize)]) -> Vec<usize> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in links {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}
