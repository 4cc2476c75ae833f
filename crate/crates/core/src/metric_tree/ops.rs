use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::region::union_find;
use super::{Dendrite, PointRef, Region, VertexId};
use crate::error::{Error, Result};
use crate::rational::Q;

/// Closure of one component of `D \ E`, with the point where it hangs on `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplementComponent {
    pub closure: Region,
    pub boundary: PointRef,
}

/// Components of `D \ E`, their attachment points and the grouping by attachment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplementDecomposition {
    pub components: Vec<ComplementComponent>,
    /// The escape-boundary: every point at which some component attaches.
    pub escape_boundary: Vec<PointRef>,
    /// Component indices grouped by attachment point.
    pub groups: BTreeMap<PointRef, Vec<usize>>,
    /// Set when `E` is the whole space, so there is nothing to decompose.
    pub covers_space: bool,
}

/// Order of a point: finite count, or the ideal `ω` of a generated family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Order {
    Finite(usize),
    Omega,
}

impl Dendrite {
    /// Components of `D \ E` for a nonempty connected region `E`.
    pub fn components_minus(&self, e: &Region) -> Result<ComplementDecomposition> {
        if e.is_empty() {
            return Err(Error::EmptySet);
        }
        if !e.is_connected(self) {
            return Err(Error::InvalidArgument("region is not connected".into()));
        }
        // atoms of the open complement: free vertices, then open gaps on edges
        let free: Vec<VertexId> = (0..self.vertex_count()).filter(|v| !e.vertices().contains(v)).collect();
        let vix: BTreeMap<VertexId, usize> = free.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut closures: Vec<Region> = free
            .iter()
            .map(|v| {
                let mut r = Region::empty();
                r.add_vertex(*v);
                r
            })
            .collect();
        let mut bounds: Vec<Vec<PointRef>> = vec![Vec::new(); free.len()];
        let mut links = Vec::new();
        for (ei, edge) in self.edges().iter().enumerate() {
            let ivs = e.spans().get(&ei).cloned().unwrap_or_default();
            let mut cursor = Q::zero();
            let mut gaps = Vec::new();
            for (lo, hi) in &ivs {
                if *lo > cursor {
                    gaps.push((cursor.clone(), lo.clone()));
                }
                cursor = hi.clone();
            }
            if cursor < edge.len {
                gaps.push((cursor, edge.len.clone()));
            }
            for (g0, g1) in gaps {
                let id = closures.len();
                let mut r = Region::empty();
                r.add_interval(ei, g0.clone(), g1.clone());
                closures.push(r);
                let mut b = Vec::new();
                for (pos, end) in [(g0, edge.u), (g1, edge.v)] {
                    let at_end = pos.is_zero() || pos == edge.len;
                    if at_end && !e.vertices().contains(&end) {
                        links.push((id, vix[&end]));
                    } else {
                        b.push(self.canon_unchecked(ei, pos));
                    }
                }
                bounds.push(b);
            }
        }
        let groups_of = union_find(closures.len(), &links);
        let mut merged: BTreeMap<usize, (Region, Vec<PointRef>)> = BTreeMap::new();
        for (i, c) in closures.iter().enumerate() {
            let slot = merged.entry(groups_of[i]).or_default();
            slot.0.extend_raw(c);
            slot.1.extend(bounds[i].iter().cloned());
        }
        let mut components = Vec::new();
        for (_, (mut closure, mut b)) in merged {
            closure.normalize(self);
            b.sort();
            b.dedup();
            let boundary = match b.as_slice() {
                [one] => one.clone(),
                _ => {
                    return Err(Error::InvalidArgument("complement component without a single attachment point".into()))
                }
            };
            components.push(ComplementComponent { closure, boundary });
        }
        let mut groups: BTreeMap<PointRef, Vec<usize>> = BTreeMap::new();
        for (i, c) in components.iter().enumerate() {
            groups.entry(c.boundary.clone()).or_default().push(i);
        }
        let escape_boundary = groups.keys().cloned().collect();
        let covers_space = components.is_empty();
        Ok(ComplementDecomposition { components, escape_boundary, groups, covers_space })
    }

    /// `D^a(x)`: the points `y` with `x` on the arc `[a, y]`.
    pub fn upper_set(&self, a: &PointRef, x: &PointRef) -> Result<Region> {
        let a = self.canon(a)?;
        let x = self.canon(x)?;
        if a == x {
            return Ok(self.whole());
        }
        let dec = self.components_minus(&self.point_region(&x)?)?;
        let mut r = self.point_region(&x)?;
        for c in dec.components {
            if !c.closure.contains(self, &a) {
                r.extend_raw(&c.closure);
            }
        }
        r.normalize(self);
        Ok(r)
    }

    /// `D_[a,b]`: the arc `[a, b]` with everything hanging off its interior.
    pub fn enclosed(&self, a: &PointRef, b: &PointRef) -> Result<Region> {
        let a = self.canon(a)?;
        let b = self.canon(b)?;
        let arc = self.geodesic(&a, &b)?;
        if a == b {
            return Ok(arc);
        }
        let dec = self.components_minus(&arc)?;
        let mut r = arc;
        for c in dec.components {
            if c.boundary != a && c.boundary != b {
                r.extend_raw(&c.closure);
            }
        }
        r.normalize(self);
        Ok(r)
    }

    /// Number of components of `D \ {x}` in this finite tree.
    pub fn point_order(&self, x: &PointRef) -> Result<usize> {
        Ok(match self.canon(x)? {
            PointRef::Vertex(v) => self.degree(v),
            PointRef::Edge(..) => 2,
        })
    }

    /// Order in the ideal object the truncation stands for, when known.
    pub fn ideal_point_order(&self, x: &PointRef) -> Result<Order> {
        if let Some(desc) = self.descriptor() {
            if let Some(o) = desc.ideal_order_at(self, x) {
                return Ok(o);
            }
        }
        Ok(Order::Finite(self.point_order(x)?))
    }

    /// Nearest point of a nonempty region.
    pub fn project(&self, e: &Region, x: &PointRef) -> Result<PointRef> {
        let x = self.canon(x)?;
        e.project(self, &x).ok_or(Error::EmptySet)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::star3;
    use super::*;
    use crate::rational::{q, qi};

    fn v(i: usize) -> PointRef {
        PointRef::Vertex(i)
    }

    #[test]
    fn upper_sets_on_star() {
        let d = star3();
        let u = d.upper_set(&v(1), &v(0)).unwrap();
        assert_eq!(u.h1(), q(1, 2));
        assert!(u.contains(&d, &v(2)) && u.contains(&d, &v(3)) && !u.contains(&d, &v(1)));
        assert!(d.upper_set(&v(2), &v(2)).unwrap().is_whole(&d));
        assert_eq!(d.upper_set(&v(0), &v(1)).unwrap(), d.point_region(&v(1)).unwrap());
    }

    #[test]
    fn enclosed_on_star() {
        let d = star3();
        assert_eq!(d.enclosed(&v(0), &v(1)).unwrap(), d.geodesic(&v(0), &v(1)).unwrap());
        assert!(d.enclosed(&v(1), &v(2)).unwrap().is_whole(&d));
        assert_eq!(d.enclosed(&v(3), &v(3)).unwrap().h1(), qi(0));
    }

    #[test]
    fn complements_on_star() {
        let d = star3();
        let dec = d.components_minus(&d.point_region(&v(0)).unwrap()).unwrap();
        assert_eq!(dec.components.len(), 3);
        assert_eq!(dec.escape_boundary, vec![v(0)]);
        let dec = d.components_minus(&d.geodesic(&v(0), &v(1)).unwrap()).unwrap();
        assert_eq!(dec.components.len(), 2);
        let dec = d.components_minus(&d.whole()).unwrap();
        assert!(dec.covers_space && dec.components.is_empty());
    }

    #[test]
    fn interior_point_splits_edge() {
        let d = star3();
        let p = PointRef::Edge(0, q(1, 4));
        let dec = d.components_minus(&d.point_region(&p).unwrap()).unwrap();
        assert_eq!(dec.components.len(), 2);
        assert_eq!(d.point_order(&p).unwrap(), 2);
        assert_eq!(d.point_order(&v(0)).unwrap(), 3);
        assert_eq!(d.point_order(&v(1)).unwrap(), 1);
    }
}
