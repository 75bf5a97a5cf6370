//! Immutable weighted directed graph with dense node indices.
//!
//! Adjacency is stored CSR-style (contiguous per-node slices, sorted by
//! neighbor index) in both directions, which is what every ranking pass
//! scans. External string IDs map bijectively onto dense indices assigned in
//! first-appearance order.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::weight::{Weight, WeightScale};

pub type NodeId = u32;

#[derive(Clone)]
pub struct Graph {
    scale: WeightScale,
    ids: Vec<String>,
    index_of: HashMap<String, NodeId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_weights: Vec<Weight>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_weights: Vec<Weight>,
    total_weight: Weight,
    dropped_self_loop_weight: Weight,
}

impl Graph {
    /// Build a graph from pre-interned IDs and raw edges. Self-loops are
    /// dropped (their weight is recorded separately) and parallel edges are
    /// aggregated by summing weights.
    pub fn from_edges(
        ids: Vec<String>,
        edges: Vec<(NodeId, NodeId, Weight)>,
        scale: WeightScale,
    ) -> Result<Graph> {
        let n = ids.len();
        let mut builder = GraphBuilder {
            scale,
            ids,
            index_of: HashMap::new(),
            edges: Vec::new(),
            dropped_self_loop_weight: Weight::ZERO,
        };
        for (i, id) in builder.ids.iter().enumerate() {
            if builder.index_of.insert(id.clone(), i as NodeId).is_some() {
                return Err(Error::invalid_input(format!("duplicate node id `{id}`")));
            }
        }
        for (u, v, w) in edges {
            if u as usize >= n {
                return Err(Error::NodeOutOfRange {
                    index: u,
                    count: n as u32,
                });
            }
            if v as usize >= n {
                return Err(Error::NodeOutOfRange {
                    index: v,
                    count: n as u32,
                });
            }
            if w.raw() < 0 {
                return Err(Error::invalid_input(format!(
                    "negative weight on edge ({u}, {v})"
                )));
            }
            builder.push_edge(u, v, w);
        }
        Ok(builder.finish())
    }

    pub fn scale(&self) -> WeightScale {
        self.scale
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn total_weight(&self) -> Weight {
        self.total_weight
    }

    pub fn dropped_self_loop_weight(&self) -> Weight {
        self.dropped_self_loop_weight
    }

    pub fn external_id(&self, node: NodeId) -> &str {
        &self.ids[node as usize]
    }

    pub fn external_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<NodeId> {
        self.index_of.get(id).copied()
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_offsets[u as usize + 1] - self.out_offsets[u as usize]
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_offsets[u as usize + 1] - self.in_offsets[u as usize]
    }

    /// Outgoing neighbor indices of `u` as a slice, sorted.
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        let lo = self.out_offsets[u as usize];
        let hi = self.out_offsets[u as usize + 1];
        &self.out_targets[lo..hi]
    }

    /// Outgoing `(target, weight)` pairs of `u`, sorted by target index.
    pub fn out_edges(&self, u: NodeId) -> impl Iterator<Item = (NodeId, Weight)> + '_ {
        let lo = self.out_offsets[u as usize];
        let hi = self.out_offsets[u as usize + 1];
        self.out_targets[lo..hi]
            .iter()
            .copied()
            .zip(self.out_weights[lo..hi].iter().copied())
    }

    /// Incoming `(source, weight)` pairs of `v`, sorted by source index.
    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, Weight)> + '_ {
        let lo = self.in_offsets[v as usize];
        let hi = self.in_offsets[v as usize + 1];
        self.in_sources[lo..hi]
            .iter()
            .copied()
            .zip(self.in_weights[lo..hi].iter().copied())
    }

    /// Stored weight of edge `(u, v)`, if present.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<Weight> {
        let lo = self.out_offsets[u as usize];
        let hi = self.out_offsets[u as usize + 1];
        let slice = &self.out_targets[lo..hi];
        slice
            .binary_search(&v)
            .ok()
            .map(|pos| self.out_weights[lo + pos])
    }

    /// All edges in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Weight)> + '_ {
        (0..self.node_count() as NodeId)
            .flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }

    /// Sum of out-weights of `u` over all stored edges.
    pub fn out_weight(&self, u: NodeId) -> Weight {
        self.out_edges(u).map(|(_, w)| w).sum()
    }

    pub fn in_weight(&self, u: NodeId) -> Weight {
        self.in_edges(u).map(|(_, w)| w).sum()
    }

    /// Subgraph induced by `nodes`: exactly the edges with both endpoints in
    /// the set. `nodes` may be unsorted; duplicates are rejected.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Result<InducedSubgraph> {
        let n = self.node_count() as u32;
        let mut to_parent: Vec<NodeId> = nodes.to_vec();
        to_parent.sort_unstable();
        for pair in to_parent.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::invalid_input(format!(
                    "duplicate node index {} in subgraph selection",
                    pair[0]
                )));
            }
        }
        if let Some(&max) = to_parent.last() {
            if max >= n {
                return Err(Error::NodeOutOfRange {
                    index: max,
                    count: n,
                });
            }
        }
        let local_of = |parent: NodeId| to_parent.binary_search(&parent).ok().map(|i| i as NodeId);
        let ids = to_parent
            .iter()
            .map(|&p| self.ids[p as usize].clone())
            .collect();
        let mut edges = Vec::new();
        for (local_u, &parent_u) in to_parent.iter().enumerate() {
            for (parent_v, w) in self.out_edges(parent_u) {
                if let Some(local_v) = local_of(parent_v) {
                    edges.push((local_u as NodeId, local_v, w));
                }
            }
        }
        let graph = Graph::from_edges(ids, edges, self.scale)?;
        Ok(InducedSubgraph { graph, to_parent })
    }

    /// SHA-256 over node IDs and the aggregated edge list; identifies graph
    /// content for checkpoint validation.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.scale.decimals().to_le_bytes());
        hasher.update((self.ids.len() as u64).to_le_bytes());
        for id in &self.ids {
            hasher.update((id.len() as u64).to_le_bytes());
            hasher.update(id.as_bytes());
        }
        for (u, v, w) in self.edges() {
            hasher.update(u.to_le_bytes());
            hasher.update(v.to_le_bytes());
            hasher.update(w.raw().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// An induced subgraph together with its local ↔ parent index mapping.
/// Local indices follow ascending parent index order.
pub struct InducedSubgraph {
    pub graph: Graph,
    to_parent: Vec<NodeId>,
}

impl InducedSubgraph {
    pub fn parent_of(&self, local: NodeId) -> NodeId {
        self.to_parent[local as usize]
    }

    pub fn local_of(&self, parent: NodeId) -> Option<NodeId> {
        self.to_parent
            .binary_search(&parent)
            .ok()
            .map(|i| i as NodeId)
    }

    pub fn parent_indices(&self) -> &[NodeId] {
        &self.to_parent
    }
}

/// Incremental construction used by the loader: interns IDs in
/// first-appearance order, buffers raw edges, aggregates on `finish`.
pub struct GraphBuilder {
    scale: WeightScale,
    ids: Vec<String>,
    index_of: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId, Weight)>,
    dropped_self_loop_weight: Weight,
}

impl GraphBuilder {
    pub fn new(scale: WeightScale) -> GraphBuilder {
        GraphBuilder {
            scale,
            ids: Vec::new(),
            index_of: HashMap::new(),
            edges: Vec::new(),
            dropped_self_loop_weight: Weight::ZERO,
        }
    }

    pub fn intern(&mut self, id: &str) -> NodeId {
        if let Some(&ix) = self.index_of.get(id) {
            return ix;
        }
        let ix = self.ids.len() as NodeId;
        self.ids.push(id.to_string());
        self.index_of.insert(id.to_string(), ix);
        ix
    }

    fn push_edge(&mut self, u: NodeId, v: NodeId, w: Weight) {
        if u == v {
            self.dropped_self_loop_weight += w;
        } else {
            self.edges.push((u, v, w));
        }
    }

    pub fn add_edge(&mut self, source: &str, target: &str, weight: Weight) {
        let u = self.intern(source);
        let v = self.intern(target);
        self.push_edge(u, v, weight);
    }

    pub fn edge_rows(&self) -> usize {
        self.edges.len()
    }

    pub fn finish(mut self) -> Graph {
        let n = self.ids.len();
        // Aggregate parallel edges.
        self.edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(NodeId, NodeId, Weight)> = Vec::with_capacity(self.edges.len());
        for (u, v, w) in self.edges {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }

        let m = merged.len();
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_counts = vec![0usize; n];
        for &(u, v, _) in &merged {
            out_offsets[u as usize + 1] += 1;
            in_counts[v as usize] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let mut out_targets = Vec::with_capacity(m);
        let mut out_weights = Vec::with_capacity(m);
        let mut total_weight = Weight::ZERO;
        for &(_, v, w) in &merged {
            out_targets.push(v);
            out_weights.push(w);
            total_weight += w;
        }

        let mut in_offsets = vec![0usize; n + 1];
        for i in 0..n {
            in_offsets[i + 1] = in_offsets[i] + in_counts[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0 as NodeId; m];
        let mut in_weights = vec![Weight::ZERO; m];
        // merged is sorted by (u, v): filling per target keeps each in-slice
        // sorted by source index.
        for &(u, v, w) in &merged {
            let slot = cursor[v as usize];
            in_sources[slot] = u;
            in_weights[slot] = w;
            cursor[v as usize] += 1;
        }

        Graph {
            scale: self.scale,
            ids: self.ids,
            index_of: self.index_of,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
            total_weight,
            dropped_self_loop_weight: self.dropped_self_loop_weight,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{g3, graph_from};

    #[test]
    fn builds_and_indexes_in_first_appearance_order() {
        let g = g3();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.total_weight().raw(), 18);
        assert_eq!(g.index_of("a"), Some(0));
        assert_eq!(g.index_of("b"), Some(1));
        assert_eq!(g.index_of("c"), Some(2));
        assert_eq!(g.external_id(2), "c");
        assert_eq!(g.edge_weight(2, 0), Some(Weight::from_raw(10)));
        assert_eq!(g.edge_weight(0, 2), None);
    }

    #[test]
    fn drops_self_loops_and_records_weight() {
        let g = graph_from(&[("a", "a", 7)]);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.dropped_self_loop_weight().raw(), 7);
        assert_eq!(g.total_weight().raw(), 0);
    }

    #[test]
    fn aggregates_parallel_edges() {
        let g = graph_from(&[("a", "b", 2), ("a", "b", 3)]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_weight(0, 1), Some(Weight::from_raw(5)));
    }

    #[test]
    fn out_and_in_weight_sums_match_total() {
        let g = g3();
        let out_sum: Weight = (0..3).map(|u| g.out_weight(u)).sum();
        let in_sum: Weight = (0..3).map(|u| g.in_weight(u)).sum();
        assert_eq!(out_sum, g.total_weight());
        assert_eq!(in_sum, g.total_weight());
    }

    #[test]
    fn induced_subgraph_of_pair() {
        let g = g3();
        let sub = g.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(sub.graph.node_count(), 2);
        assert_eq!(sub.graph.edge_count(), 1);
        assert_eq!(sub.graph.edge_weight(0, 1), Some(Weight::from_raw(5)));
        assert_eq!(sub.parent_of(0), 0);
        assert_eq!(sub.local_of(1), Some(1));
        assert_eq!(sub.local_of(2), None);
    }

    #[test]
    fn induced_subgraph_empty_and_full() {
        let g = g3();
        let empty = g.induced_subgraph(&[]).unwrap();
        assert_eq!(empty.graph.node_count(), 0);
        assert_eq!(empty.graph.edge_count(), 0);

        let full = g.induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(full.graph.edge_count(), 3);
        assert_eq!(full.graph.total_weight(), g.total_weight());
    }

    #[test]
    fn induced_subgraph_rejects_bad_indices() {
        let g = g3();
        assert!(matches!(
            g.induced_subgraph(&[0, 5]),
            Err(Error::NodeOutOfRange { index: 5, .. })
        ));
        assert!(g.induced_subgraph(&[0, 0]).is_err());
    }

    #[test]
    fn content_hash_tracks_content() {
        let g1 = g3();
        let g2 = g3();
        assert_eq!(g1.content_hash(), g2.content_hash());
        let g_different = graph_from(&[("a", "b", 5), ("b", "c", 3), ("c", "a", 11)]);
        assert_ne!(g1.content_hash(), g_different.content_hash());
    }

    #[test]
    fn from_edges_validates() {
        let scale = WeightScale::new(0).unwrap();
        assert!(Graph::from_edges(
            vec!["a".into(), "b".into()],
            vec![(0, 7, Weight::from_raw(1))],
            scale
        )
        .is_err());
        assert!(Graph::from_edges(
            vec!["a".into(), "a".into()],
            vec![],
            scale
        )
        .is_err());
        assert!(Graph::from_edges(
            vec!["a".into(), "b".into()],
            vec![(0, 1, Weight::from_raw(-1))],
            scale
        )
        .is_err());
    }
}
