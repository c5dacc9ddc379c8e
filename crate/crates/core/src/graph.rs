//! Undirected simple graphs and bi-connectivity primitives.

use std::collections::{HashMap, HashSet};

use crate::scalar::{Point, Scalar};
use crate::{Error, NodeId, Result};

/// Undirected simple graph with optional planar coordinates.
///
/// Neighbor lists keep the order in which edges were first inserted. Every
/// traversal in the crate iterates neighbors in this order, so it doubles as
/// the tie-break that makes seeded runs reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph<T = f64> {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    coords: Option<Vec<Point<T>>>,
}

impl<T: Scalar> Graph<T> {
    /// Builds a graph from an edge list, rejecting self-loops and repeated edges.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            for id in [u, v] {
                if id >= node_count {
                    return Err(Error::NodeOutOfRange { id, node_count });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self {
            adjacency,
            edge_count: edges.len(),
            coords: None,
        })
    }

    /// Unit-disc graph: `(u, v)` is an edge iff `|p_u - p_v| <= radius`.
    ///
    /// Edges are inserted in lexicographic `(u, v)`, `u < v` order, so every
    /// neighbor list comes out sorted.
    pub fn unit_disc(points: &[Point<T>], radius: T) -> Result<Self> {
        if radius.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidConfig(format!(
                "disc radius must be positive, got {radius}"
            )));
        }
        let edges = disc_edges(points, radius);
        let mut g = Self::from_edges(points.len(), &edges)?;
        g.coords = Some(points.to_vec());
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<Point<T>>) -> Result<Self> {
        if coords.len() != self.node_count() {
            return Err(Error::InvalidInstance(format!(
                "{} coordinates for {} nodes",
                coords.len(),
                self.node_count()
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }
}

impl<T> Graph<T> {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn coords(&self) -> Option<&[Point<T>]> {
        self.coords.as_deref()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].contains(&b)
    }

    /// Each edge once, as `(u, v)` with `u < v`, ordered by `u` then by
    /// position in `u`'s neighbor list.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Cut vertices of the subgraph induced by `nodes`, in ascending order.
    ///
    /// Iterative DFS low-link, linear in the size of the induced subgraph.
    pub fn articulation_points(&self, nodes: &[NodeId]) -> Vec<NodeId> {
        let view = Induced::new(self, nodes);
        let mut cut = vec![false; view.len()];
        let mut dfs = LowLink::new(view.len());
        for start in 0..view.len() {
            if dfs.disc[start] == UNSEEN {
                dfs.run(&view, start, &mut cut);
            }
        }
        let mut out: Vec<NodeId> = (0..view.len())
            .filter(|&i| cut[i])
            .map(|i| view.nodes[i])
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether the subgraph induced by `nodes` is bi-connected.
    ///
    /// A single node counts as (degenerately) bi-connected, two nodes never
    /// do, and the empty set is rejected.
    pub fn is_biconnected(&self, nodes: &[NodeId]) -> bool {
        match nodes.len() {
            0 | 2 => false,
            1 => true,
            _ => {
                let view = Induced::new(self, nodes);
                let mut cut = vec![false; view.len()];
                let mut dfs = LowLink::new(view.len());
                let reached = dfs.run(&view, 0, &mut cut);
                reached == view.len() && !cut.iter().any(|&c| c)
            }
        }
    }

    /// Connected components of the subgraph induced by `nodes`, each sorted,
    /// ordered by smallest member.
    pub fn components(&self, nodes: &[NodeId]) -> Vec<Vec<NodeId>> {
        let view = Induced::new(self, nodes);
        let mut label = vec![usize::MAX; view.len()];
        let mut comps = Vec::new();
        let mut stack = Vec::new();
        for s in 0..view.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut comp = Vec::new();
            label[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                comp.push(view.nodes[u]);
                for w in view.neighbors(u) {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// Bi-connected components (as node sets) of the subgraph induced by
    /// `nodes`. Bridges show up as two-node components.
    pub fn biconnected_components(&self, nodes: &[NodeId]) -> Vec<Vec<NodeId>> {
        let view = Induced::new(self, nodes);
        let n = view.len();
        let mut disc = vec![UNSEEN; n];
        let mut low = vec![0u32; n];
        let mut time = 0u32;
        let mut out = Vec::new();
        let mut edge_stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if disc[start] != UNSEEN {
                continue;
            }
            disc[start] = time;
            low[start] = time;
            time += 1;
            // (node, parent, neighbor cursor)
            let mut stack: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
            while let Some(top) = stack.last_mut() {
                let (u, parent, cursor) = *top;
                let ns = &view.adj[u];
                if cursor < ns.len() {
                    top.2 += 1;
                    let w = ns[cursor];
                    if disc[w] == UNSEEN {
                        edge_stack.push((u, w));
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        stack.push((w, u, 0));
                    } else if w != parent && disc[w] < disc[u] {
                        edge_stack.push((u, w));
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[u]);
                        if low[u] >= disc[parent] {
                            let mut comp = HashSet::new();
                            while let Some((a, b)) = edge_stack.pop() {
                                comp.insert(view.nodes[a]);
                                comp.insert(view.nodes[b]);
                                if (a, b) == (parent, u) {
                                    break;
                                }
                            }
                            let mut comp: Vec<_> = comp.into_iter().collect();
                            comp.sort_unstable();
                            out.push(comp);
                        }
                    }
                }
            }
        }
        out
    }
}

const UNSEEN: u32 = u32::MAX;

/// Subgraph induced by a node subset, re-indexed to `0..nodes.len()`.
struct Induced {
    nodes: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
}

impl Induced {
    fn new<T>(g: &Graph<T>, nodes: &[NodeId]) -> Self {
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let adj = nodes
            .iter()
            .map(|&u| {
                g.neighbors(u)
                    .iter()
                    .filter_map(|v| index.get(v).copied())
                    .collect()
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            adj,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().copied()
    }
}

struct LowLink {
    disc: Vec<u32>,
    low: Vec<u32>,
    time: u32,
}

impl LowLink {
    fn new(n: usize) -> Self {
        Self {
            disc: vec![UNSEEN; n],
            low: vec![0; n],
            time: 0,
        }
    }

    /// DFS from `start`; marks cut vertices and returns the number of nodes reached.
    fn run(&mut self, view: &Induced, start: usize, cut: &mut [bool]) -> usize {
        let mut reached = 1;
        let mut root_children = 0;
        self.disc[start] = self.time;
        self.low[start] = self.time;
        self.time += 1;
        let mut stack: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
        while let Some(top) = stack.last_mut() {
            let (u, parent, cursor) = *top;
            if cursor < view.adj[u].len() {
                top.2 += 1;
                let w = view.adj[u][cursor];
                if self.disc[w] == UNSEEN {
                    self.disc[w] = self.time;
                    self.low[w] = self.time;
                    self.time += 1;
                    reached += 1;
                    if u == start {
                        root_children += 1;
                    }
                    stack.push((w, u, 0));
                } else if w != parent {
                    self.low[u] = self.low[u].min(self.disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    self.low[parent] = self.low[parent].min(self.low[u]);
                    if parent != start && self.low[u] >= self.disc[parent] {
                        cut[parent] = true;
                    }
                }
            }
        }
        if root_children >= 2 {
            cut[start] = true;
        }
        reached
    }
}

/// All pairs within `radius`, lexicographically ordered. Grid-bucketed.
pub(crate) fn disc_edges<T: Scalar>(points: &[Point<T>], radius: T) -> Vec<(NodeId, NodeId)> {
    let r2 = radius * radius;
    let grid = CellGrid::new(points, radius);
    let mut edges = Vec::new();
    let mut near = Vec::new();
    for (u, p) in points.iter().enumerate() {
        near.clear();
        grid.for_each_near(p, |v| {
            if v > u && p.within(&points[v], r2) {
                near.push(v);
            }
        });
        near.sort_unstable();
        edges.extend(near.iter().map(|&v| (u, v)));
    }
    edges
}

/// Uniform bucket grid with cell side equal to the disc radius.
pub(crate) struct CellGrid<T> {
    cell: T,
    buckets: HashMap<(i64, i64), Vec<NodeId>>,
}

impl<T: Scalar> CellGrid<T> {
    pub(crate) fn new(points: &[Point<T>], cell: T) -> Self {
        let mut grid = Self {
            cell,
            buckets: HashMap::new(),
        };
        for (i, p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        grid
    }

    pub(crate) fn key(&self, p: &Point<T>) -> (i64, i64) {
        let k = |c: T| (c / self.cell).floor().to_i64().unwrap_or(0);
        (k(p.x), k(p.y))
    }

    pub(crate) fn insert(&mut self, id: NodeId, p: &Point<T>) {
        let key = self.key(p);
        self.buckets.entry(key).or_default().push(id);
    }

    /// Visits every stored id whose cell touches the 3x3 block around `p`.
    pub(crate) fn for_each_near(&self, p: &Point<T>, mut f: impl FnMut(NodeId)) {
        let (cx, cy) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(cx + dx, cy + dy)) {
                    ids.iter().for_each(|&v| f(v));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Graph64;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Graph64 {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph64::from_edges(n, &edges).unwrap()
    }

    fn all(g: &Graph64) -> Vec<NodeId> {
        (0..g.node_count()).collect()
    }

    #[test]
    fn build_keeps_insertion_order() {
        let g = Graph64::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.neighbors(1), &[0, 2]);
        let g = Graph64::from_edges(3, &[(1, 2), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(1), &[2, 0]);
    }

    #[test]
    fn build_rejects_degenerate_edges() {
        assert!(matches!(
            Graph64::from_edges(2, &[(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            Graph64::from_edges(3, &[(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph64::from_edges(3, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            Graph64::from_edges(2, &[(0, 5)]),
            Err(Error::NodeOutOfRange { id: 5, .. })
        ));
    }

    #[test]
    fn unit_disc_examples() {
        let p = |x| Point::new(x, 0.0);
        let g = Graph64::unit_disc(&[p(0.0), p(0.5)], 0.6).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = Graph64::unit_disc(&[p(0.0), p(0.7)], 0.6).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = Graph64::unit_disc(&[p(0.0), p(0.5), p(1.0)], 0.5).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(Graph64::unit_disc(&[p(0.0)], 0.0).is_err());
    }

    #[test]
    fn articulation_point_examples() {
        let path = Graph64::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.articulation_points(&all(&path)), vec![1]);
        let c4 = cycle(4);
        assert!(c4.articulation_points(&all(&c4)).is_empty());
        let bowtie =
            Graph64::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        assert_eq!(bowtie.articulation_points(&all(&bowtie)), vec![2]);
        assert!(bowtie.articulation_points(&[]).is_empty());
        // induced: dropping node 0 turns the first triangle into a pendant edge
        assert_eq!(bowtie.articulation_points(&[1, 2, 3, 4]), vec![2]);
    }

    #[test]
    fn biconnectivity_examples() {
        let c5 = cycle(5);
        assert!(c5.is_biconnected(&all(&c5)));
        assert!(c5.is_biconnected(&[3]));
        assert!(!c5.is_biconnected(&[]));
        assert!(!c5.is_biconnected(&[0, 1]));
        assert!(!c5.is_biconnected(&[0, 1, 2]));
        let path = Graph64::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!path.is_biconnected(&all(&path)));
        // two disjoint triangles: no cut vertex but disconnected
        let two = Graph64::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
            .unwrap();
        assert!(two.articulation_points(&all(&two)).is_empty());
        assert!(!two.is_biconnected(&all(&two)));
    }

    #[test]
    fn biconnected_components_of_bowtie() {
        let bowtie =
            Graph64::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5)])
                .unwrap();
        let mut comps = bowtie.biconnected_components(&all(&bowtie));
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5]]);
    }

    /// Whether `a` and `b` are joined by two internally vertex-disjoint paths,
    /// by enumerating every simple path.
    fn two_disjoint_paths(g: &Graph64, a: NodeId, b: NodeId) -> bool {
        fn walk(g: &Graph64, u: NodeId, b: NodeId, path: &mut Vec<NodeId>, out: &mut Vec<u64>) {
            if u == b {
                let mask = path[1..path.len() - 1]
                    .iter()
                    .fold(0u64, |m, &v| m | (1 << v));
                out.push(mask);
                return;
            }
            for &w in g.neighbors(u) {
                if !path.contains(&w) {
                    path.push(w);
                    walk(g, w, b, path, out);
                    path.pop();
                }
            }
        }
        let mut paths = Vec::new();
        walk(g, a, b, &mut vec![a], &mut paths);
        paths
            .iter()
            .enumerate()
            .any(|(i, p)| paths[i + 1..].iter().any(|q| p & q == 0))
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph64> {
        (1..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let k = pairs.len();
            proptest::collection::vec(any::<bool>(), k).prop_map(move |keep| {
                let edges: Vec<_> = pairs
                    .iter()
                    .zip(&keep)
                    .filter(|(_, &k)| k)
                    .map(|(&e, _)| e)
                    .collect();
                Graph64::from_edges(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn biconnected_iff_two_disjoint_paths(g in arb_graph(8)) {
            let nodes = all(&g);
            let n = g.node_count();
            let oracle = (0..n).all(|a| (a + 1..n).all(|b| two_disjoint_paths(&g, a, b)));
            prop_assert_eq!(g.is_biconnected(&nodes), oracle);
        }

        #[test]
        fn articulation_points_match_removal(g in arb_graph(9)) {
            let nodes = all(&g);
            let base = g.components(&nodes).len();
            let expected: Vec<NodeId> = nodes
                .iter()
                .copied()
                .filter(|&v| {
                    let rest: Vec<_> = nodes.iter().copied().filter(|&u| u != v).collect();
                    g.components(&rest).len() > base - usize::from(g.degree(v) == 0)
                })
                .collect();
            prop_assert_eq!(g.articulation_points(&nodes), expected);
        }

        #[test]
        fn adjacency_is_symmetric(g in arb_graph(10)) {
            for u in 0..g.node_count() {
                for &v in g.neighbors(u) {
                    prop_assert!(g.neighbors(v).contains(&u));
                }
            }
        }

        #[test]
        fn unit_disc_round_trip(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..60),
                                radius in 0.01f64..0.5) {
            let pts: Vec<_> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            let g = Graph64::unit_disc(&pts, radius).unwrap();
            let coords = g.coords().unwrap();
            let mut brute = Vec::new();
            for u in 0..coords.len() {
                for v in u + 1..coords.len() {
                    if coords[u].dist_sq(&coords[v]) <= radius * radius {
                        brute.push((u, v));
                    }
                }
            }
            prop_assert_eq!(g.edges().collect::<Vec<_>>(), brute);
        }
    }
}
