use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Dendrite, Edge, PointRef, Region};
use crate::error::{Error, Result};
use crate::gallery::FamilyDescriptor;
use crate::rational::{serde_q, Q};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRefJson {
    Edge {
        edge: usize,
        #[serde(with = "serde_q")]
        offset: Q,
    },
    Vertex {
        vertex: usize,
    },
}

impl From<PointRef> for PointRefJson {
    fn from(p: PointRef) -> Self {
        match p {
            PointRef::Vertex(vertex) => PointRefJson::Vertex { vertex },
            PointRef::Edge(edge, offset) => PointRefJson::Edge { edge, offset },
        }
    }
}

impl From<PointRefJson> for PointRef {
    fn from(p: PointRefJson) -> Self {
        match p {
            PointRefJson::Vertex { vertex } => PointRef::Vertex(vertex),
            PointRefJson::Edge { edge, offset } => PointRef::Edge(edge, offset),
        }
    }
}

impl Serialize for PointRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRefJson::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PointRefJson::deserialize(d).map(PointRef::from)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    #[serde(with = "serde_q")]
    pub len: Q,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DendriteJson {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub marked: BTreeMap<String, PointRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<FamilyDescriptor>,
}

impl From<&Dendrite> for DendriteJson {
    fn from(d: &Dendrite) -> Self {
        DendriteJson {
            vertices: (0..d.vertex_count()).collect(),
            edges: d.edges().iter().map(|e| EdgeJson { u: e.u, v: e.v, len: e.len.clone() }).collect(),
            marked: d.marked_points().clone(),
            descriptor: d.descriptor().cloned(),
        }
    }
}

impl TryFrom<DendriteJson> for Dendrite {
    type Error = Error;

    fn try_from(j: DendriteJson) -> Result<Self> {
        let mut ids = j.vertices.clone();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, v)| i != *v) {
            return Err(Error::InvalidDendrite("vertex ids must be exactly 0..n".into()));
        }
        let edges = j.edges.into_iter().map(|e| Edge { u: e.u, v: e.v, len: e.len }).collect();
        Dendrite::new(ids.len(), edges, j.marked, j.descriptor)
    }
}

impl Serialize for Dendrite {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DendriteJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dendrite {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = DendriteJson::deserialize(d)?;
        Dendrite::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl Dendrite {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrite serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SpanJson {
    edge: usize,
    #[serde(with = "serde_q")]
    from: Q,
    #[serde(with = "serde_q")]
    to: Q,
}

#[derive(Serialize, Deserialize)]
struct RegionJson {
    vertices: Vec<usize>,
    spans: Vec<SpanJson>,
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = RegionJson {
            vertices: self.vertices().iter().copied().collect(),
            spans: self
                .spans()
                .iter()
                .flat_map(|(e, ivs)| {
                    ivs.iter().map(move |(a, b)| SpanJson { edge: *e, from: a.clone(), to: b.clone() })
                })
                .collect(),
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Region {
    /// Deserialized regions are raw; call [`Region::normalize`] against their dendrite.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RegionJson::deserialize(d)?;
        let mut r = Region::empty();
        for v in j.vertices {
            r.add_vertex(v);
        }
        for s in j.spans {
            r.add_interval(s.edge, s.from, s.to);
        }
        Ok(r)
    }
}
