use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use super::{Dendrite, Edge, EdgeId, PointRef, Region, VertexId};
use crate::error::Result;
use crate::rational::Q;

/// A fine edge as a piece `[start, end]` of a coarse edge, same orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub parent: EdgeId,
    pub start: Q,
    pub end: Q,
}

/// How a subdivided tree sits inside the tree it refines.
///
/// Coarse vertex ids are kept; new vertices are appended after them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pieces: Vec<Piece>,
    by_edge: Vec<Vec<EdgeId>>,
    origin: Vec<Option<(EdgeId, Q)>>,
}

impl Refinement {
    pub fn identity(d: &Dendrite) -> Self {
        Refinement {
            pieces: d
                .edges()
                .iter()
                .enumerate()
                .map(|(i, e)| Piece { parent: i, start: Q::zero(), end: e.len.clone() })
                .collect(),
            by_edge: (0..d.edge_count()).map(|i| vec![i]).collect(),
            origin: vec![None; d.vertex_count()],
        }
    }

    pub fn piece(&self, fine: EdgeId) -> &Piece {
        &self.pieces[fine]
    }

    pub fn pieces_of(&self, coarse: EdgeId) -> &[EdgeId] {
        &self.by_edge[coarse]
    }

    /// Where a fine vertex sits in coarse coordinates.
    pub fn vertex_origin(&self, fine: VertexId) -> Option<&(EdgeId, Q)> {
        self.origin[fine].as_ref()
    }

    pub fn fine_vertex_count(&self) -> usize {
        self.origin.len()
    }

    /// Coarse point to fine point.
    pub fn lift_point(&self, fine: &Dendrite, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => PointRef::Vertex(*v),
            PointRef::Edge(e, t) => {
                let ids = &self.by_edge[*e];
                let k = ids.partition_point(|&f| self.pieces[f].end <= *t);
                let f = ids[k.min(ids.len() - 1)];
                fine.canon_unchecked(f, t - &self.pieces[f].start)
            }
        }
    }

    /// Fine point to coarse point.
    pub fn lower_point(&self, coarse: &Dendrite, p: &PointRef) -> PointRef {
        match p {
            PointRef::Vertex(v) => match &self.origin[*v] {
                None => PointRef::Vertex(*v),
                Some((e, t)) => PointRef::Edge(*e, t.clone()),
            },
            PointRef::Edge(f, t) => {
                let pc = &self.pieces[*f];
                coarse.canon_unchecked(pc.parent, &pc.start + t)
            }
        }
    }

    pub fn lift_region(&self, fine: &Dendrite, r: &Region) -> Region {
        let mut out = Region::empty();
        for v in r.vertices() {
            out.add_vertex(*v);
        }
        for (e, ivs) in r.spans() {
            let ids = &self.by_edge[*e];
            for (lo, hi) in ivs {
                let first = ids.partition_point(|&f| self.pieces[f].end < *lo);
                for &f in &ids[first..] {
                    let pc = &self.pieces[f];
                    if pc.start > *hi {
                        break;
                    }
                    let a = if *lo > pc.start { lo.clone() } else { pc.start.clone() };
                    let b = if *hi < pc.end { hi.clone() } else { pc.end.clone() };
                    out.add_interval(f, &a - &pc.start, &b - &pc.start);
                }
            }
        }
        out.normalize(fine);
        out
    }

    pub fn lower_region(&self, coarse: &Dendrite, r: &Region) -> Region {
        let mut out = Region::empty();
        for v in r.vertices() {
            match &self.origin[*v] {
                None => out.add_vertex(*v),
                Some((e, t)) => out.add_interval(*e, t.clone(), t.clone()),
            }
        }
        for (f, ivs) in r.spans() {
            let pc = &self.pieces[*f];
            for (lo, hi) in ivs {
                out.add_interval(pc.parent, &pc.start + lo, &pc.start + hi);
            }
        }
        out.normalize(coarse);
        out
    }

    /// Composite of `self` (mid to coarse) after `inner` (fine to mid).
    pub fn chain(&self, inner: &Refinement) -> Refinement {
        let pieces: Vec<Piece> = inner
            .pieces
            .iter()
            .map(|p| {
                let outer = &self.pieces[p.parent];
                Piece { parent: outer.parent, start: &outer.start + &p.start, end: &outer.start + &p.end }
            })
            .collect();
        let mut by_edge = vec![Vec::new(); self.by_edge.len()];
        for (i, p) in pieces.iter().enumerate() {
            by_edge[p.parent].push(i);
        }
        for ids in &mut by_edge {
            ids.sort_by(|a, b| pieces[*a].start.cmp(&pieces[*b].start));
        }
        let origin = inner
            .origin
            .iter()
            .enumerate()
            .map(|(v, o)| match o {
                None => self.origin[v].clone(),
                Some((m, t)) => {
                    let outer = &self.pieces[*m];
                    Some((outer.parent, &outer.start + t))
                }
            })
            .collect();
        Refinement { pieces, by_edge, origin }
    }
}

impl Dendrite {
    /// Splits edges at the given interior offsets. Offsets at edge ends are ignored.
    pub fn subdivide(&self, cuts: &BTreeMap<EdgeId, BTreeSet<Q>>) -> Result<(Dendrite, Refinement)> {
        let mut n = self.vertex_count();
        let mut edges = Vec::new();
        let mut pieces = Vec::new();
        let mut by_edge = Vec::new();
        let mut origin: Vec<Option<(EdgeId, Q)>> = vec![None; n];
        for (ei, e) in self.edges().iter().enumerate() {
            let inner: Vec<Q> = cuts
                .get(&ei)
                .map(|s| s.iter().filter(|t| t.is_positive() && **t < e.len).cloned().collect())
                .unwrap_or_default();
            let mut ids = Vec::new();
            let mut prev_v = e.u;
            let mut prev_t = Q::zero();
            for t in inner {
                let w = n;
                n += 1;
                origin.push(Some((ei, t.clone())));
                ids.push(edges.len());
                edges.push(Edge { u: prev_v, v: w, len: &t - &prev_t });
                pieces.push(Piece { parent: ei, start: prev_t.clone(), end: t.clone() });
                prev_v = w;
                prev_t = t;
            }
            ids.push(edges.len());
            edges.push(Edge { u: prev_v, v: e.v, len: &e.len - &prev_t });
            pieces.push(Piece { parent: ei, start: prev_t, end: e.len.clone() });
            by_edge.push(ids);
        }
        let refinement = Refinement { pieces, by_edge, origin };
        let mut fine = Dendrite::new(n, edges, BTreeMap::new(), self.descriptor().cloned())?;
        for (name, p) in self.marked_points() {
            let lifted = refinement.lift_point(&fine, p);
            fine = fine.with_marked(name, lifted)?;
        }
        Ok((fine, refinement))
    }
}
