use std::collections::{BTreeMap, BTreeSet};

use super::{Dendrite, Edge, EdgeId, PointRef, VertexId};
use crate::error::{Error, Result};
use crate::rational::Q;

/// How a sub-dendrite spanned by some edges sits in its parent.
///
/// Sub edge `i` is parent edge `edges[i]` with the same orientation; sub
/// vertex `j` is parent vertex `vertices[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub edges: Vec<EdgeId>,
    pub vertices: Vec<VertexId>,
}

impl Embedding {
    /// Parent position of a point given on a copy of the sub-dendrite whose
    /// lengths are the parent lengths divided by `stretch`.
    pub fn to_parent(&self, p: &PointRef, stretch: &Q) -> PointRef {
        match p {
            PointRef::Vertex(v) => PointRef::Vertex(self.vertices[*v]),
            PointRef::Edge(e, t) => PointRef::Edge(self.edges[*e], t * stretch),
        }
    }

    pub fn sub_vertex(&self, parent: VertexId) -> Option<VertexId> {
        self.vertices.binary_search(&parent).ok()
    }
}

impl Dendrite {
    /// The sub-dendrite formed by a connected set of edges.
    pub fn restrict(&self, edges: &BTreeSet<EdgeId>) -> Result<(Dendrite, Embedding)> {
        if edges.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut vs = BTreeSet::new();
        for &e in edges {
            if e >= self.edge_count() {
                return Err(Error::InvalidArgument(format!("unknown edge {e}")));
            }
            vs.insert(self.edge(e).u);
            vs.insert(self.edge(e).v);
        }
        let vertices: Vec<VertexId> = vs.into_iter().collect();
        let local: BTreeMap<VertexId, VertexId> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let sub_edges = edges
            .iter()
            .map(|&e| {
                let ed = self.edge(e);
                Edge { u: local[&ed.u], v: local[&ed.v], len: ed.len.clone() }
            })
            .collect();
        let sub = Dendrite::new(vertices.len(), sub_edges, BTreeMap::new(), None)
            .map_err(|_| Error::InvalidArgument("edges do not span a subtree".into()))?;
        Ok((sub, Embedding { edges: edges.iter().copied().collect(), vertices }))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::star3;
    use super::*;
    use crate::rational::q;

    #[test]
    fn restrict_two_arms() {
        let d = star3();
        let (sub, emb) = d.restrict(&BTreeSet::from([0, 1])).unwrap();
        assert_eq!(sub.vertex_count(), 3);
        assert_eq!(sub.total_length(), d.len(0) + d.len(1));
        let p = emb.to_parent(&PointRef::Edge(1, q(1, 10)), &Q::from_integer(1.into()));
        assert_eq!(p, PointRef::Edge(1, q(1, 10)));
        assert!(d.restrict(&BTreeSet::from([1, 2, 7])).is_err());
    }
}
