//! Strongly connected components and the passes built on them: condensation
//! with a deterministic topological order, exhaustive ordering of small
//! components, block-wise refinement inside the largest component, and the
//! global SCC-topological ranking.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::forward_weight_unchecked;
use crate::ranking::Ranking;
use crate::weight::Weight;

/// Partition of the node set into strongly connected components.
#[derive(Debug, Clone)]
pub struct SccPartition {
    component_of: Vec<u32>,
    components: Vec<Vec<NodeId>>,
}

impl SccPartition {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn component_of(&self, node: NodeId) -> u32 {
        self.component_of[node as usize]
    }

    /// Members of a component, sorted by node index.
    pub fn members(&self, component: u32) -> &[NodeId] {
        &self.components[component as usize]
    }

    pub fn components(&self) -> &[Vec<NodeId>] {
        &self.components
    }

    pub fn singleton_count(&self) -> usize {
        self.components.iter().filter(|c| c.len() == 1).count()
    }

    pub fn largest_size(&self) -> usize {
        self.components.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Largest component; among equal sizes, the one with the smallest
    /// minimum member index.
    pub fn largest_component(&self) -> Option<u32> {
        (0..self.components.len() as u32).min_by_key(|&c| {
            let members = &self.components[c as usize];
            (Reverse(members.len()), members[0])
        })
    }
}

/// Iterative Tarjan; no recursion, so graphs with 10⁵+ nodes and long paths
/// are fine.
pub fn compute_sccs(graph: &Graph) -> SccPartition {
    let n = graph.node_count();
    const UNVISITED: u32 = u32::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut component_of = vec![0u32; n];
    let mut components: Vec<Vec<NodeId>> = Vec::new();
    let mut next_index = 0u32;

    // (node, next out-edge offset within the node's adjacency slice)
    let mut frames: Vec<(NodeId, usize)> = Vec::new();

    for root in 0..n as NodeId {
        if index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        frames.push((root, 0));

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            let neighbors = graph.out_neighbors(v);
            if *child < neighbors.len() {
                let w = neighbors[*child];
                *child += 1;
                if index[w as usize] == UNVISITED {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    frames.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                frames.pop();
                if low[v as usize] == index[v as usize] {
                    let id = components.len() as u32;
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        component_of[w as usize] = id;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.sort_unstable();
                    components.push(members);
                }
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent as usize] = low[parent as usize].min(low[v as usize]);
                }
            }
        }
    }

    SccPartition {
        component_of,
        components,
    }
}

/// Acyclic quotient graph over the SCCs plus its topological order.
#[derive(Debug, Clone)]
pub struct CondensationDag {
    component_count: usize,
    /// Deduplicated meta-edges, sorted.
    edges: Vec<(u32, u32)>,
    /// Topological order σ; ties broken by smallest minimum member index.
    topo: Vec<u32>,
}

impl CondensationDag {
    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn meta_edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn topological_order(&self) -> &[u32] {
        &self.topo
    }
}

pub fn condense(graph: &Graph, partition: &SccPartition) -> CondensationDag {
    let k = partition.count();
    let mut edges: Vec<(u32, u32)> = graph
        .edges()
        .filter_map(|(u, v, _)| {
            let cu = partition.component_of(u);
            let cv = partition.component_of(v);
            (cu != cv).then_some((cu, cv))
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut indegree = vec![0usize; k];
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); k];
    for &(cu, cv) in &edges {
        adjacency[cu as usize].push(cv);
        indegree[cv as usize] += 1;
    }

    let min_member = |c: u32| partition.members(c)[0];
    let mut ready: BinaryHeap<Reverse<(NodeId, u32)>> = (0..k as u32)
        .filter(|&c| indegree[c as usize] == 0)
        .map(|c| Reverse((min_member(c), c)))
        .collect();
    let mut topo = Vec::with_capacity(k);
    while let Some(Reverse((_, c))) = ready.pop() {
        topo.push(c);
        for &next in &adjacency[c as usize] {
            indegree[next as usize] -= 1;
            if indegree[next as usize] == 0 {
                ready.push(Reverse((min_member(next), next)));
            }
        }
    }
    debug_assert_eq!(topo.len(), k, "condensation must be acyclic");

    CondensationDag {
        component_count: k,
        edges,
        topo,
    }
}

/// Exhaustively order a small component's members for maximum forward
/// weight over the edges internal to the member set.
///
/// All |members|! permutations are enumerated with Heap's algorithm and the
/// objective is maintained incrementally (each step swaps two elements and
/// adjusts the forward weight in O(|members|)), so the default limit of 9
/// (362,880 permutations) stays affordable. Ties break toward the
/// lexicographically smallest order under dense node indices.
pub fn best_small_scc_order(
    graph: &Graph,
    members: &[NodeId],
    limit: usize,
) -> Result<Vec<NodeId>> {
    let k = members.len();
    if k > limit {
        return Err(Error::SccTooLarge { size: k, limit });
    }
    let mut nodes = members.to_vec();
    nodes.sort_unstable();
    if k <= 1 {
        return Ok(nodes);
    }

    // Dense internal weight matrix in member-local indices.
    let mut w = vec![0i64; k * k];
    for (i, &u) in nodes.iter().enumerate() {
        for (v, weight) in graph.out_edges(u) {
            if let Ok(j) = nodes.binary_search(&v) {
                if i != j {
                    w[i * k + j] = weight.raw();
                }
            }
        }
    }

    let fw_of = |perm: &[usize]| -> i64 {
        let mut fw = 0;
        for a in 0..k {
            for b in (a + 1)..k {
                fw += w[perm[a] * k + perm[b]];
            }
        }
        fw
    };

    let mut perm: Vec<usize> = (0..k).collect();
    let mut fw = fw_of(&perm);
    let mut best_fw = fw;
    let mut best: Vec<usize> = perm.clone();

    // Heap's algorithm, iterative form. `swap_delta` accounts for the pair
    // (x, y) itself plus every element strictly between the swapped slots.
    let mut counters = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if counters[i] < i {
            let (a, b) = if i % 2 == 0 { (0, i) } else { (counters[i], i) };
            let x = perm[a];
            let y = perm[b];
            let mut delta = w[y * k + x] - w[x * k + y];
            for &m in &perm[a + 1..b] {
                delta += w[m * k + x] - w[x * k + m];
                delta += w[y * k + m] - w[m * k + y];
            }
            perm.swap(a, b);
            fw += delta;
            if fw > best_fw || (fw == best_fw && perm < best) {
                best_fw = fw;
                best.copy_from_slice(&perm);
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    debug_assert_eq!(best_fw, fw_of(&best));

    Ok(best.into_iter().map(|p| nodes[p]).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct SccBlockOptions {
    /// Nodes per block taken from the largest SCC in rank order.
    pub block_size: usize,
    /// Shift of the first block boundary (taken modulo `block_size`), so
    /// repeated passes cover structures straddling block boundaries.
    pub offset: usize,
    /// Components up to this size are ordered exhaustively.
    pub perm_limit: usize,
}

impl Default for SccBlockOptions {
    fn default() -> Self {
        SccBlockOptions {
            block_size: 50,
            offset: 0,
            perm_limit: 9,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SccBlockReport {
    pub blocks: u64,
    pub adopted: u64,
    pub gain: Weight,
}

/// Block-wise refinement inside the largest SCC: list its nodes in rank
/// order, cut the list into consecutive blocks, and re-order each block by
/// condensing its induced subgraph and ordering the sub-SCCs
/// topologically (small ones exhaustively, large ones by current rank).
/// A block's new order is adopted only if it strictly increases total
/// forward weight; the block keeps occupying the same set of global ranks.
pub fn refine_scc_blocks(
    graph: &Graph,
    ranking: &Ranking,
    opts: &SccBlockOptions,
) -> Result<(Ranking, SccBlockReport)> {
    if ranking.len() != graph.node_count() {
        return Err(Error::RankingSizeMismatch {
            ranking: ranking.len(),
            graph: graph.node_count(),
        });
    }
    if opts.block_size < 2 {
        return Err(Error::invalid_input("block size must be at least 2"));
    }
    let mut result = ranking.clone();
    let mut report = SccBlockReport::default();
    let partition = compute_sccs(graph);
    let Some(largest) = partition.largest_component() else {
        return Ok((result, report));
    };
    let mut members: Vec<NodeId> = partition.members(largest).to_vec();
    if members.len() < 2 {
        return Ok((result, report));
    }
    members.sort_unstable_by_key(|&node| result.position(node));

    let offset = opts.offset % opts.block_size;
    let mut boundaries = Vec::new();
    let mut start = 0usize;
    if offset > 0 && offset < members.len() {
        boundaries.push((0, offset));
        start = offset;
    }
    while start < members.len() {
        let end = (start + opts.block_size).min(members.len());
        boundaries.push((start, end));
        start = end;
    }

    // Scratch: new global position per node while evaluating a block.
    let mut new_pos: Vec<u32> = result.positions().to_vec();
    for (lo, hi) in boundaries {
        let block = &members[lo..hi];
        if block.len() < 2 {
            continue;
        }
        report.blocks += 1;
        let ranks: Vec<u32> = block.iter().map(|&node| result.position(node)).collect();
        debug_assert!(ranks.windows(2).all(|p| p[0] < p[1]));

        let sub = graph.induced_subgraph(block)?;
        let sub_partition = compute_sccs(&sub.graph);
        let dag = condense(&sub.graph, &sub_partition);
        let mut new_order: Vec<NodeId> = Vec::with_capacity(block.len());
        for &component in dag.topological_order() {
            let locals = sub_partition.members(component);
            if locals.len() <= opts.perm_limit {
                let ordered = best_small_scc_order(&sub.graph, locals, opts.perm_limit)?;
                new_order.extend(ordered.iter().map(|&l| sub.parent_of(l)));
            } else {
                let mut by_rank: Vec<NodeId> =
                    locals.iter().map(|&l| sub.parent_of(l)).collect();
                by_rank.sort_unstable_by_key(|&node| result.position(node));
                new_order.extend(by_rank);
            }
        }
        debug_assert_eq!(new_order.len(), block.len());

        // Exact gain over every edge incident to the block. Edges between
        // two block nodes and edges to outside nodes whose rank falls inside
        // the block's rank span can both change direction.
        for (i, &node) in new_order.iter().enumerate() {
            new_pos[node as usize] = ranks[i];
        }
        let mut delta = 0i64;
        let old_pos = result.positions();
        for &x in block {
            for (y, w) in graph.out_edges(x) {
                let old = old_pos[x as usize] < old_pos[y as usize];
                let new = new_pos[x as usize] < new_pos[y as usize];
                delta += w.raw() * (new as i64 - old as i64);
            }
            for (y, w) in graph.in_edges(x) {
                // Block-internal edges were counted on the out side.
                if ranks.binary_search(&old_pos[y as usize]).is_ok() {
                    continue;
                }
                let old = old_pos[y as usize] < old_pos[x as usize];
                let new = new_pos[y as usize] < new_pos[x as usize];
                delta += w.raw() * (new as i64 - old as i64);
            }
        }

        if delta > 0 {
            result.assign_at_ranks(&ranks, &new_order);
            report.adopted += 1;
            report.gain += Weight::from_raw(delta);
        } else {
            // Revert the scratch positions.
            for &node in block {
                new_pos[node as usize] = result.position(node);
            }
        }
    }

    debug_assert!(
        forward_weight_unchecked(graph, &result).raw()
            == forward_weight_unchecked(graph, ranking).raw() + report.gain.raw()
    );
    Ok((result, report))
}

/// Emit nodes SCC by SCC in condensation-topological order; small SCCs are
/// ordered exhaustively, large SCCs keep their relative order under the
/// input ranking. All cross-SCC edges end up forward. The caller decides
/// whether to keep the result (the pipeline keeps it only on improvement).
pub fn scc_global_ranking(
    graph: &Graph,
    ranking: &Ranking,
    perm_limit: usize,
) -> Result<Ranking> {
    if ranking.len() != graph.node_count() {
        return Err(Error::RankingSizeMismatch {
            ranking: ranking.len(),
            graph: graph.node_count(),
        });
    }
    let partition = compute_sccs(graph);
    let dag = condense(graph, &partition);
    let mut order: Vec<NodeId> = Vec::with_capacity(graph.node_count());
    for &component in dag.topological_order() {
        let members = partition.members(component);
        if members.len() <= perm_limit {
            order.extend(best_small_scc_order(graph, members, perm_limit)?);
        } else {
            let mut by_rank = members.to_vec();
            by_rank.sort_unstable_by_key(|&node| ranking.position(node));
            order.extend(by_rank);
        }
    }
    Ranking::from_order(order)
}
