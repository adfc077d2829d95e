//! Graph and distribution types shared by every stage of the pipeline.
//!
//! Graphs are simple and undirected: repeated interactions collapse to one
//! edge and a node's degree is its number of distinct neighbours. All types
//! are immutable once built and can be shared freely across threads.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single timestamped interaction between two named endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemporalEdge {
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub source: String,
    pub target: String,
}

impl TemporalEdge {
    pub fn new(timestamp: i64, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            timestamp,
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Dense node identifier. Ingestion maps opaque names onto these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Unordered node pair stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    /// Returns `None` for a self-loop.
    pub fn new(a: NodeId, b: NodeId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge(a, b)),
            std::cmp::Ordering::Greater => Some(Edge(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }
}

/// One snapshot of the evolving network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotGraph {
    pub index: usize,
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<Edge>,
}

impl SnapshotGraph {
    pub fn new(index: usize) -> Self {
        Self {
            index,
            ..Self::default()
        }
    }

    /// Graph with `n` nodes labelled `0..n` and no edges.
    pub fn with_nodes(index: usize, n: usize) -> Self {
        Self {
            index,
            nodes: (0..n as u32).map(NodeId).collect(),
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from raw parts, adding any edge endpoint missing from
    /// `nodes` and dropping self-loops.
    pub fn from_parts(
        index: usize,
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Self {
        let mut g = Self::new(index);
        g.nodes.extend(nodes);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_node(&mut self, node: NodeId) {
        self.nodes.insert(node);
    }

    /// Inserts an undirected edge. Returns `false` for self-loops and for
    /// edges already present.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        let Some(edge) = Edge::new(a, b) else {
            return false;
        };
        self.nodes.insert(a);
        self.nodes.insert(b);
        self.edges.insert(edge)
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when the snapshot holds no interactions at all.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Degree of every node, keyed by node id.
    pub fn degree_map(&self) -> BTreeMap<NodeId, u32> {
        let mut degrees: BTreeMap<NodeId, u32> = self.nodes.iter().map(|&n| (n, 0)).collect();
        for edge in &self.edges {
            let (a, b) = edge.endpoints();
            *degrees.entry(a).or_default() += 1;
            *degrees.entry(b).or_default() += 1;
        }
        degrees
    }

    /// One degree per node in node-id order; isolated nodes contribute 0.
    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(self.degree_map().into_values().collect())
    }
}

/// Free-function form of [`SnapshotGraph::degree_sequence`].
pub fn degree_sequence(graph: &SnapshotGraph) -> DegreeSequence {
    graph.degree_sequence()
}

/// Union of `length` consecutive snapshots starting at `start_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowGraph {
    pub start_index: usize,
    pub length: usize,
    pub graph: SnapshotGraph,
}

impl WindowGraph {
    pub fn union(snapshots: &[SnapshotGraph], start: usize, length: usize) -> Result<Self> {
        if length == 0
            || start
                .checked_add(length)
                .is_none_or(|end| end > snapshots.len())
        {
            return Err(Error::WindowOutOfRange {
                start,
                length,
                available: snapshots.len(),
            });
        }
        let members = &snapshots[start..start + length];
        let mut graph = SnapshotGraph::new(start);
        for snap in members {
            graph.nodes.extend(snap.nodes.iter().copied());
            graph.edges.extend(snap.edges.iter().copied());
        }
        Ok(Self {
            start_index: start,
            length,
            graph,
        })
    }
}

/// Degree multiset of a graph, one entry per node.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegreeSequence(pub Vec<u32>);

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self(degrees)
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&d| u64::from(d)).sum()
    }
}

impl From<Vec<u32>> for DegreeSequence {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// Empirical CDF of a degree multiset stored on its distinct values.
///
/// `cumulative[k]` is the fraction of degrees `<= support[k]`, computed as
/// `count / total` so the last entry is exactly `1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    support: Vec<u32>,
    cumulative: Vec<f64>,
    sample_size: usize,
}

impl EmpiricalCdf {
    pub fn from_degrees(degrees: &DegreeSequence) -> Result<Self> {
        Self::from_values(degrees.degrees())
    }

    pub fn from_values(values: &[u32]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDegreeSequence);
        }
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &v in values {
            *counts.entry(v).or_default() += 1;
        }
        let total = values.len();
        let mut support = Vec::with_capacity(counts.len());
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut running = 0usize;
        for (value, count) in counts {
            running += count;
            support.push(value);
            cumulative.push(fraction(running, total));
        }
        Ok(Self {
            support,
            cumulative,
            sample_size: total,
        })
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Number of degrees the CDF was built from.
    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Right-continuous step evaluation: fraction of degrees `<= x`.
    pub fn eval(&self, x: i64) -> f64 {
        let idx = self.support.partition_point(|&s| i64::from(s) <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }
}

/// Free-function form of [`EmpiricalCdf::from_degrees`].
pub fn empirical_cdf(degrees: &DegreeSequence) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_degrees(degrees)
}

/// The single rounding rule used for every CDF level in the crate, so that
/// CDFs built by different code paths compare bit-for-bit.
#[inline]
pub(crate) fn fraction(count: usize, total: usize) -> f64 {
    count as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(edges: &[(u32, u32)], isolated: &[u32]) -> SnapshotGraph {
        SnapshotGraph::from_parts(
            0,
            isolated.iter().map(|&n| NodeId(n)),
            edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b))),
        )
    }

    #[test]
    fn empty_graph_has_empty_sequence() {
        assert!(SnapshotGraph::new(0).degree_sequence().is_empty());
    }

    #[test]
    fn triangle_degrees() {
        let g = graph(&[(0, 1), (1, 2), (0, 2)], &[]);
        assert_eq!(g.degree_sequence().degrees(), &[2, 2, 2]);
    }

    #[test]
    fn path_with_isolated_node() {
        // a=0, b=1, c=2, d=3
        let g = graph(&[(0, 1), (1, 2)], &[3]);
        assert_eq!(g.degree_sequence().degrees(), &[1, 2, 1, 0]);
    }

    #[test]
    fn self_loops_and_duplicates_collapse() {
        let mut g = SnapshotGraph::new(0);
        assert!(g.add_edge(NodeId(0), NodeId(1)));
        assert!(!g.add_edge(NodeId(1), NodeId(0)));
        assert!(!g.add_edge(NodeId(2), NodeId(2)));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn cdf_examples() {
        let cdf = empirical_cdf(&vec![1, 2, 2, 5].into()).unwrap();
        assert_eq!(cdf.support(), &[1, 2, 5]);
        assert_eq!(cdf.cumulative(), &[0.25, 0.75, 1.0]);

        let cdf = empirical_cdf(&vec![3, 3, 3].into()).unwrap();
        assert_eq!(cdf.support(), &[3]);
        assert_eq!(cdf.cumulative(), &[1.0]);

        let cdf = empirical_cdf(&vec![0, 1].into()).unwrap();
        assert_eq!(cdf.support(), &[0, 1]);
        assert_eq!(cdf.cumulative(), &[0.5, 1.0]);
    }

    #[test]
    fn cdf_rejects_empty() {
        let err = empirical_cdf(&DegreeSequence::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty degree sequence");
    }

    #[test]
    fn cdf_eval_is_right_continuous() {
        let cdf = empirical_cdf(&vec![1, 2, 2, 5].into()).unwrap();
        assert_eq!(cdf.eval(0), 0.0);
        assert_eq!(cdf.eval(1), 0.25);
        assert_eq!(cdf.eval(4), 0.75);
        assert_eq!(cdf.eval(99), 1.0);
    }

    #[test]
    fn window_union_dedups_shared_edges() {
        let a = graph(&[(0, 1)], &[]);
        let mut b = graph(&[(0, 1), (1, 2)], &[]);
        b.index = 1;
        let w = WindowGraph::union(&[a.clone(), b], 0, 2).unwrap();
        assert_eq!(w.graph.edge_count(), 2);
        assert_eq!(w.graph.node_count(), 3);

        let single = WindowGraph::union(std::slice::from_ref(&a), 0, 1).unwrap();
        assert_eq!(single.graph.degree_sequence(), a.degree_sequence());

        assert!(WindowGraph::union(&[a], 0, 2).is_err());
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edge_count(
            edges in prop::collection::vec((0u32..40, 0u32..40), 0..200),
            isolated in prop::collection::vec(0u32..60, 0..10),
        ) {
            let g = graph(&edges, &isolated);
            let seq = g.degree_sequence();
            prop_assert_eq!(seq.len(), g.node_count());
            prop_assert_eq!(seq.total(), 2 * g.edge_count() as u64);
            prop_assert_eq!(seq.total() % 2, 0);
        }

        #[test]
        fn cdf_monotone_and_permutation_invariant(
            mut values in prop::collection::vec(0u32..30, 1..300),
        ) {
            let cdf = EmpiricalCdf::from_values(&values).unwrap();
            prop_assert!(cdf.support().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cdf.cumulative().windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(*cdf.cumulative().last().unwrap(), 1.0);
            values.reverse();
            let third = values.len() / 3;
            values.rotate_left(third);
            prop_assert_eq!(EmpiricalCdf::from_values(&values).unwrap(), cdf);
        }
    }
}
