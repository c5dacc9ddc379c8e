//! Problem instances and their canonical JSON encoding.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::scalar::{Point, Scalar};
use crate::{Error, NodeId, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub alpha: f64,
    pub seed: u64,
}

/// A graph with one root per subgraph and a per-subgraph size cap.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T = f64> {
    graph: Graph<T>,
    roots: Vec<NodeId>,
    capacity: usize,
    known_optimum: Option<usize>,
    meta: Option<InstanceMeta>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(graph: Graph<T>, roots: Vec<NodeId>, capacity: usize) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidInstance("at least one root is required".into()));
        }
        if capacity == 0 {
            return Err(Error::InvalidInstance("capacity must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for &r in &roots {
            if r >= graph.node_count() {
                return Err(Error::NodeOutOfRange {
                    id: r,
                    node_count: graph.node_count(),
                });
            }
            if !seen.insert(r) {
                return Err(Error::InvalidInstance(format!("root {r} listed twice")));
            }
        }
        Ok(Self {
            graph,
            roots,
            capacity,
            known_optimum: None,
            meta: None,
        })
    }

    pub fn with_known_optimum(mut self, optimum: usize) -> Result<Self> {
        if optimum > self.graph.node_count() {
            return Err(Error::InvalidInstance(format!(
                "known optimum {optimum} exceeds node count {}",
                self.graph.node_count()
            )));
        }
        self.known_optimum = Some(optimum);
        Ok(self)
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&InstanceFile::from(self))?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

impl<T> Instance<T> {
    pub fn graph(&self) -> &Graph<T> {
        &self.graph
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn known_optimum(&self) -> Option<usize> {
        self.known_optimum
    }

    pub fn meta(&self) -> Option<InstanceMeta> {
        self.meta
    }

    /// `mask[v]` is true iff `v` is a root.
    pub fn root_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.node_count()];
        for &r in &self.roots {
            mask[r] = true;
        }
        mask
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    id: NodeId,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    y: Option<f64>,
}

/// On-disk layout; field order is the canonical key order.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    nodes: Vec<NodeRecord>,
    edges: Vec<[NodeId; 2]>,
    roots: Vec<NodeId>,
    capacity: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    optimum: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    meta: Option<InstanceMeta>,
}

impl<T: Scalar> From<&Instance<T>> for InstanceFile {
    fn from(inst: &Instance<T>) -> Self {
        let coords = inst.graph.coords();
        let nodes = (0..inst.node_count())
            .map(|id| {
                let p = coords.map(|c| c[id]);
                NodeRecord {
                    id,
                    x: p.map(|p| p.x.as_f64()),
                    y: p.map(|p| p.y.as_f64()),
                }
            })
            .collect();
        Self {
            nodes,
            edges: inst.graph.edges().map(|(u, v)| [u, v]).collect(),
            roots: inst.roots.clone(),
            capacity: inst.capacity,
            optimum: inst.known_optimum,
            meta: inst.meta,
        }
    }
}

impl<T: Scalar> TryFrom<InstanceFile> for Instance<T> {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let n = file.nodes.len();
        let mut slots: Vec<Option<Option<Point<T>>>> = vec![None; n];
        for rec in &file.nodes {
            if rec.id >= n {
                return Err(Error::NodeOutOfRange {
                    id: rec.id,
                    node_count: n,
                });
            }
            if slots[rec.id].is_some() {
                return Err(Error::InvalidInstance(format!("node id {} repeated", rec.id)));
            }
            let p = match (rec.x, rec.y) {
                (Some(x), Some(y)) => Some(Point::new(T::of(x), T::of(y))),
                (None, None) => None,
                _ => {
                    return Err(Error::InvalidInstance(format!(
                        "node {} has only one coordinate",
                        rec.id
                    )))
                }
            };
            slots[rec.id] = Some(p);
        }
        let points: Vec<Option<Point<T>>> = slots.into_iter().map(|s| s.flatten()).collect();
        let edges: Vec<(NodeId, NodeId)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut graph = Graph::from_edges(n, &edges)?;
        let with_coords = points.iter().filter(|p| p.is_some()).count();
        if with_coords == n && n > 0 {
            graph = graph.with_coords(points.into_iter().flatten().collect())?;
        } else if with_coords != 0 {
            return Err(Error::InvalidInstance(
                "coordinates must be given for all nodes or none".into(),
            ));
        }
        let mut inst = Instance::new(graph, file.roots, file.capacity)?;
        if let Some(opt) = file.optimum {
            inst = inst.with_known_optimum(opt)?;
        }
        if let Some(meta) = file.meta {
            inst = inst.with_meta(meta);
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Graph64, Instance64};

    #[test]
    fn json_round_trip_with_coords() {
        let pts = vec![
            Point::new(0.12, 0.93),
            Point::new(0.2, 0.9),
            Point::new(0.15, 0.85),
        ];
        let g = Graph64::unit_disc(&pts, 0.2).unwrap();
        let inst = Instance::new(g, vec![1], 3)
            .unwrap()
            .with_known_optimum(3)
            .unwrap()
            .with_meta(InstanceMeta {
                alpha: 2.0,
                seed: 42,
            });
        let text = inst.to_json_string().unwrap();
        assert!(text.starts_with(r#"{"nodes":[{"id":0,"x":0.12,"y":0.93}"#));
        assert!(text.contains(r#""roots":[1],"capacity":3,"optimum":3,"meta":{"alpha":2.0,"seed":42}"#));
        let back = Instance64::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn minimal_json_without_optionals() {
        let text = r#"{"nodes":[{"id":1},{"id":0},{"id":2}],"edges":[[0,1],[1,2],[0,2]],"roots":[0],"capacity":3}"#;
        let inst = Instance64::from_json_str(text).unwrap();
        assert_eq!(inst.node_count(), 3);
        assert!(inst.graph().coords().is_none());
        assert_eq!(inst.known_optimum(), None);
        let again = inst.to_json_string().unwrap();
        assert!(!again.contains("optimum"));
    }

    #[test]
    fn rejects_invalid_instances() {
        let g = || Graph64::from_edges(3, &[(0, 1)]).unwrap();
        assert!(Instance::new(g(), vec![], 3).is_err());
        assert!(Instance::new(g(), vec![0, 0], 3).is_err());
        assert!(Instance::new(g(), vec![5], 3).is_err());
        assert!(Instance::new(g(), vec![0], 0).is_err());
        assert!(Instance::new(g(), vec![0], 3)
            .unwrap()
            .with_known_optimum(4)
            .is_err());
        let bad = r#"{"nodes":[{"id":0},{"id":0}],"edges":[],"roots":[0],"capacity":1}"#;
        assert!(Instance64::from_json_str(bad).is_err());
        let partial = r#"{"nodes":[{"id":0,"x":0.1}],"edges":[],"roots":[0],"capacity":1}"#;
        assert!(Instance64::from_json_str(partial).is_err());
        let self_loop = r#"{"nodes":[{"id":0}],"edges":[[0,0]],"roots":[0],"capacity":1}"#;
        assert!(matches!(
            Instance64::from_json_str(self_loop),
            Err(Error::SelfLoop(0))
        ));
    }
}
