//! Gain-aware backward-edge correction.
//!
//! A max-heap holds the backward edges by weight. For the heaviest edge
//! (u, v) with π(u) > π(v), the block [v, n_1..n_t, u] of ranks between the
//! endpoints is rescanned for the best split r turning it into
//! [n_1..n_r, u, v, n_{r+1}..n_t]; the gain of split r is
//!
//!   Δ(r) = (w(u,v) − w(v,u))
//!        + Σ_{i≤r} (w(n_i→v) − w(v→n_i))
//!        + Σ_{i>r} (w(u→n_i) − w(n_i→u))
//!
//! computed with prefix sums. Only edges with both endpoints inside the
//! block can change direction, so Δ is exact. If no split gains, three
//! fallback moves are tried (swap the endpoints; move v to just after u;
//! move u to just before v), and failing those the edge is marked rejected
//! for the rest of the pass.

use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::forward_weight_unchecked;
use crate::ranking::Ranking;
use crate::weight::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefineOptions {
    /// Blocks longer than this skip the split scan and go straight to the
    /// fallback moves; the scan is O(block length) per edge.
    pub max_block: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { max_block: 2000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineReport {
    pub block_moves: u64,
    pub fallback_moves: u64,
    pub rejected_edges: u64,
    pub initial_forward_weight: Weight,
    pub final_forward_weight: Weight,
}

/// Best split of the block between a backward edge's endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGain {
    /// Number of block nodes moved in front of `u` (0 ≤ split ≤ t).
    pub split: usize,
    /// Exact forward-weight change of applying the reordering.
    pub gain: i64,
}

/// The three fallback transformations, in tie-break priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FallbackMove {
    /// Exchange the ranks of u and v only.
    Swap,
    /// Move v to the rank just after u; intermediate nodes shift down one.
    PushV,
    /// Move u to the rank just before v; intermediate nodes shift up one.
    PullU,
}

fn require_backward(ranking: &Ranking, u: NodeId, v: NodeId) -> Result<(u32, u32)> {
    let pu = ranking.position(u);
    let pv = ranking.position(v);
    if pu <= pv {
        return Err(Error::NotBackward { u, v });
    }
    Ok((pu, pv))
}

fn edge_raw(graph: &Graph, u: NodeId, v: NodeId) -> i64 {
    graph.edge_weight(u, v).map_or(0, Weight::raw)
}

/// Δ(r) for every split r = 0..=t of the block between v and u.
pub fn block_split_gains(graph: &Graph, ranking: &Ranking, u: NodeId, v: NodeId) -> Result<Vec<i64>> {
    let (pu, pv) = require_backward(ranking, u, v)?;
    let t = (pu - pv - 1) as usize;

    // a[i]: gain of moving block node n_{i+1} in front of v.
    // b[i]: gain of moving u in front of block node n_{i+1}.
    let mut a = vec![0i64; t];
    let mut b = vec![0i64; t];
    let in_block = |p: u32| p > pv && p < pu;
    for (x, w) in graph.in_edges(v) {
        let p = ranking.position(x);
        if in_block(p) {
            a[(p - pv - 1) as usize] += w.raw();
        }
    }
    for (x, w) in graph.out_edges(v) {
        let p = ranking.position(x);
        if in_block(p) {
            a[(p - pv - 1) as usize] -= w.raw();
        }
    }
    for (x, w) in graph.out_edges(u) {
        let p = ranking.position(x);
        if in_block(p) {
            b[(p - pv - 1) as usize] += w.raw();
        }
    }
    for (x, w) in graph.in_edges(u) {
        let p = ranking.position(x);
        if in_block(p) {
            b[(p - pv - 1) as usize] -= w.raw();
        }
    }

    let base = edge_raw(graph, u, v) - edge_raw(graph, v, u);
    let mut gains = Vec::with_capacity(t + 1);
    let mut delta = base + b.iter().sum::<i64>();
    gains.push(delta);
    for i in 0..t {
        delta += a[i] - b[i];
        gains.push(delta);
    }
    Ok(gains)
}

/// Maximizing split for the block between v and u; smallest r on ties.
pub fn block_gain_scan(graph: &Graph, ranking: &Ranking, u: NodeId, v: NodeId) -> Result<BlockGain> {
    let gains = block_split_gains(graph, ranking, u, v)?;
    let (split, &gain) = gains
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.cmp(b).then_with(|| j.cmp(i)))
        .expect("at least split 0 exists");
    Ok(BlockGain { split, gain })
}

/// Gains of the three fallback moves, computed from degree scans only (no
/// block materialization). Returns the best strictly positive move, ties
/// resolved Swap > PushV > PullU.
pub fn greedy_fallback(
    graph: &Graph,
    ranking: &Ranking,
    u: NodeId,
    v: NodeId,
) -> Result<Option<(FallbackMove, i64)>> {
    let [swap, push_v, pull_u] = fallback_gains(graph, ranking, u, v)?;
    let best = [
        (FallbackMove::Swap, swap),
        (FallbackMove::PushV, push_v),
        (FallbackMove::PullU, pull_u),
    ]
    .into_iter()
    .max_by_key(|&(mv, gain)| {
        (
            gain,
            std::cmp::Reverse(match mv {
                FallbackMove::Swap => 0,
                FallbackMove::PushV => 1,
                FallbackMove::PullU => 2,
            }),
        )
    })
    .expect("three candidates");
    Ok((best.1 > 0).then_some(best))
}

/// `[swap, push_v, pull_u]` gains.
pub fn fallback_gains(
    graph: &Graph,
    ranking: &Ranking,
    u: NodeId,
    v: NodeId,
) -> Result<[i64; 3]> {
    let (pu, pv) = require_backward(ranking, u, v)?;
    let in_block = |p: u32| p > pv && p < pu;

    // sum_a = Σ_i (w(n_i→v) − w(v→n_i)); sum_b = Σ_i (w(u→n_i) − w(n_i→u)).
    let mut sum_a = 0i64;
    for (x, w) in graph.in_edges(v) {
        if in_block(ranking.position(x)) {
            sum_a += w.raw();
        }
    }
    for (x, w) in graph.out_edges(v) {
        if in_block(ranking.position(x)) {
            sum_a -= w.raw();
        }
    }
    let mut sum_b = 0i64;
    for (x, w) in graph.out_edges(u) {
        if in_block(ranking.position(x)) {
            sum_b += w.raw();
        }
    }
    for (x, w) in graph.in_edges(u) {
        if in_block(ranking.position(x)) {
            sum_b -= w.raw();
        }
    }
    let base = edge_raw(graph, u, v) - edge_raw(graph, v, u);
    // Swap puts u before the block and v after it; PushV appends v after u
    // at the block's tail; PullU inserts u before v at the block's head.
    Ok([base + sum_a + sum_b, base + sum_a, base + sum_b])
}

/// Rewrite the block to [n_1..n_r, u, v, n_{r+1}..n_t].
pub fn apply_block_split(ranking: &mut Ranking, u: NodeId, v: NodeId, split: usize) {
    let pu = ranking.position(u) as usize;
    let pv = ranking.position(v) as usize;
    debug_assert!(pu > pv);
    let block: Vec<NodeId> = ranking.order()[pv + 1..pu].to_vec();
    debug_assert!(split <= block.len());
    let mut new_order = Vec::with_capacity(pu - pv + 1);
    new_order.extend_from_slice(&block[..split]);
    new_order.push(u);
    new_order.push(v);
    new_order.extend_from_slice(&block[split..]);
    ranking.assign_range(pv, &new_order);
}

pub fn apply_fallback(ranking: &mut Ranking, u: NodeId, v: NodeId, mv: FallbackMove) {
    let pu = ranking.position(u) as usize;
    let pv = ranking.position(v) as usize;
    debug_assert!(pu > pv);
    match mv {
        FallbackMove::Swap => {
            let mut seg: Vec<NodeId> = ranking.order()[pv..=pu].to_vec();
            seg.swap(0, pu - pv);
            ranking.assign_range(pv, &seg);
        }
        FallbackMove::PushV => {
            let mut seg: Vec<NodeId> = ranking.order()[pv..=pu].to_vec();
            seg.rotate_left(1); // [n_1..n_t, u, v]
            ranking.assign_range(pv, &seg);
        }
        FallbackMove::PullU => {
            let mut seg: Vec<NodeId> = ranking.order()[pv..=pu].to_vec();
            seg.rotate_right(1); // [u, v, n_1..n_t]
            ranking.assign_range(pv, &seg);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BackEdge {
    weight: i64,
    u: NodeId,
    v: NodeId,
}

impl Ord for BackEdge {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Heaviest first; ties by smaller (u, v) for determinism.
        self.weight
            .cmp(&other.weight)
            .then_with(|| other.u.cmp(&self.u))
            .then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for BackEdge {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One full correction pass. Every applied move strictly increases forward
/// weight; rejected edges stay rejected until the pass ends. Gains are
/// whole fixed-point units and forward weight is bounded by the total, so
/// the pass terminates.
pub fn refine_ranking(
    graph: &Graph,
    ranking: &Ranking,
    opts: &RefineOptions,
) -> Result<(Ranking, RefineReport)> {
    if ranking.len() != graph.node_count() {
        return Err(Error::RankingSizeMismatch {
            ranking: ranking.len(),
            graph: graph.node_count(),
        });
    }
    let mut result = ranking.clone();
    let mut report = RefineReport {
        initial_forward_weight: forward_weight_unchecked(graph, &result),
        ..Default::default()
    };
    let mut fw = report.initial_forward_weight.raw();

    let mut heap: BinaryHeap<BackEdge> = BinaryHeap::new();
    for (u, v, w) in graph.edges() {
        if result.position(u) > result.position(v) {
            heap.push(BackEdge {
                weight: w.raw(),
                u,
                v,
            });
        }
    }
    let mut rejected: HashSet<(NodeId, NodeId)> = HashSet::new();

    while let Some(BackEdge { u, v, .. }) = heap.pop() {
        if rejected.contains(&(u, v)) {
            continue;
        }
        let pu = result.position(u);
        let pv = result.position(v);
        if pu <= pv {
            continue; // stale: an earlier move already fixed this edge
        }
        let block_len = (pu - pv - 1) as usize;

        let mut applied = false;
        if block_len <= opts.max_block {
            let best = block_gain_scan(graph, &result, u, v)?;
            if best.gain > 0 {
                apply_block_split(&mut result, u, v, best.split);
                fw += best.gain;
                report.block_moves += 1;
                applied = true;
            }
        }
        if !applied {
            if let Some((mv, gain)) = greedy_fallback(graph, &result, u, v)? {
                apply_fallback(&mut result, u, v, mv);
                fw += gain;
                report.fallback_moves += 1;
                applied = true;
            }
        }

        if applied {
            // Only edges incident to u or v can have turned backward.
            for node in [u, v] {
                let p = result.position(node);
                for (y, w) in graph.out_edges(node) {
                    if result.position(y) < p && !rejected.contains(&(node, y)) {
                        heap.push(BackEdge {
                            weight: w.raw(),
                            u: node,
                            v: y,
                        });
                    }
                }
                for (x, w) in graph.in_edges(node) {
                    if result.position(x) > p && !rejected.contains(&(x, node)) {
                        heap.push(BackEdge {
                            weight: w.raw(),
                            u: x,
                            v: node,
                        });
                    }
                }
            }
        } else {
            rejected.insert((u, v));
            report.rejected_edges += 1;
        }
    }

    report.final_forward_weight = Weight::from_raw(fw);
    debug_assert_eq!(
        forward_weight_unchecked(graph, &result).raw(),
        fw,
        "accumulated gains must match the recomputed forward weight"
    );
    Ok((result, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::forward_weight;
    use crate::testutil::{g3, g4, graph_from, ranking_of};

    #[test]
    fn split_gains_on_g4() {
        // order [1,2,3], backward edge (3,1) of weight 10; block {2}.
        let g = g4();
        let r = ranking_of(&g, &["1", "2", "3"]);
        let u = g.index_of("3").unwrap();
        let v = g.index_of("1").unwrap();
        let gains = block_split_gains(&g, &r, u, v).unwrap();
        assert_eq!(gains, vec![8, 8]);
        let best = block_gain_scan(&g, &r, u, v).unwrap();
        assert_eq!(best, BlockGain { split: 0, gain: 8 });

        // both splits land at forward weight 12
        for split in 0..=1 {
            let mut moved = r.clone();
            apply_block_split(&mut moved, u, v, split);
            assert_eq!(forward_weight(&g, &moved).unwrap().raw(), 4 + gains[split]);
        }
    }

    #[test]
    fn split_gains_on_g3() {
        // order [a,b,c], backward edge (c,a); Δ(0)=7 → [c,a,b] at FW 15,
        // Δ(1)=5 → [b,c,a] at FW 13 (recomputing FW for each split).
        let g = g3();
        let r = ranking_of(&g, &["a", "b", "c"]);
        let u = g.index_of("c").unwrap();
        let v = g.index_of("a").unwrap();
        let gains = block_split_gains(&g, &r, u, v).unwrap();
        assert_eq!(gains, vec![7, 5]);
        for (split, gain) in gains.iter().enumerate() {
            let mut moved = r.clone();
            apply_block_split(&mut moved, u, v, split);
            assert_eq!(forward_weight(&g, &moved).unwrap().raw(), 8 + gain);
        }
    }

    #[test]
    fn adjacent_edge_collapses_to_base_gain() {
        let g = graph_from(&[("u", "v", 3), ("v", "u", 8)]);
        let r = ranking_of(&g, &["u", "v"]); // (v,u) is backward, weight 8
        let vu = (g.index_of("v").unwrap(), g.index_of("u").unwrap());
        let gains = block_split_gains(&g, &r, vu.0, vu.1).unwrap();
        assert_eq!(gains, vec![8 - 3]);
        // empty block: all three fallback moves coincide with the swap
        assert_eq!(fallback_gains(&g, &r, vu.0, vu.1).unwrap(), [5, 5, 5]);
    }

    #[test]
    fn ties_prefer_smallest_split() {
        // u,v with no block-internal edges besides u→v:7 → Δ = 7 at every r.
        let g = graph_from(&[("v", "m", 0), ("u", "v", 7)]);
        let r = ranking_of(&g, &["v", "m", "u"]);
        let u = g.index_of("u").unwrap();
        let v = g.index_of("v").unwrap();
        let gains = block_split_gains(&g, &r, u, v).unwrap();
        assert_eq!(gains, vec![7, 7]);
        assert_eq!(
            block_gain_scan(&g, &r, u, v).unwrap(),
            BlockGain { split: 0, gain: 7 }
        );
    }

    #[test]
    fn scan_requires_backward_edge() {
        let g = g3();
        let r = ranking_of(&g, &["a", "b", "c"]);
        assert!(matches!(
            block_split_gains(&g, &r, 0, 1),
            Err(Error::NotBackward { .. })
        ));
    }

    #[test]
    fn fallback_moves_on_g4() {
        let g = g4();
        let r = ranking_of(&g, &["1", "2", "3"]);
        let u = g.index_of("3").unwrap();
        let v = g.index_of("1").unwrap();
        let [swap, push_v, pull_u] = fallback_gains(&g, &r, u, v).unwrap();
        assert_eq!((swap, push_v, pull_u), (6, 8, 8));

        // pull_u yields [3,1,2] at forward weight 12
        let mut moved = r.clone();
        apply_fallback(&mut moved, u, v, FallbackMove::PullU);
        let names: Vec<&str> = moved.order().iter().map(|&n| g.external_id(n)).collect();
        assert_eq!(names, vec!["3", "1", "2"]);
        assert_eq!(forward_weight(&g, &moved).unwrap().raw(), 12);

        // each predicted gain matches recomputation
        for (mv, gain) in [
            (FallbackMove::Swap, swap),
            (FallbackMove::PushV, push_v),
            (FallbackMove::PullU, pull_u),
        ] {
            let mut m = r.clone();
            apply_fallback(&mut m, u, v, mv);
            assert_eq!(forward_weight(&g, &m).unwrap().raw(), 4 + gain);
        }

        // PushV and PullU tie at 8; the lower move number wins.
        let best = greedy_fallback(&g, &r, u, v).unwrap();
        assert_eq!(best, Some((FallbackMove::PushV, 8)));
    }

    #[test]
    fn fallback_returns_none_when_every_move_loses() {
        // v→n1:100 and n1→u:100 dominate u→v:1 in [v, n1, u].
        let g = graph_from(&[("v", "n1", 100), ("n1", "u", 100), ("u", "v", 1)]);
        let r = ranking_of(&g, &["v", "n1", "u"]);
        let u = g.index_of("u").unwrap();
        let v = g.index_of("v").unwrap();
        let gains = fallback_gains(&g, &r, u, v).unwrap();
        assert!(gains.iter().all(|&gain| gain <= 0), "{gains:?}");
        assert_eq!(greedy_fallback(&g, &r, u, v).unwrap(), None);
        // verify by recomputation
        for mv in [FallbackMove::Swap, FallbackMove::PushV, FallbackMove::PullU] {
            let mut m = r.clone();
            apply_fallback(&mut m, u, v, mv);
            assert!(forward_weight(&g, &m).unwrap() <= forward_weight(&g, &r).unwrap());
        }
    }

    #[test]
    fn refine_pass_on_g4() {
        let g = g4();
        let r = ranking_of(&g, &["1", "2", "3"]);
        let (after, report) = refine_ranking(&g, &r, &RefineOptions::default()).unwrap();
        assert_eq!(report.initial_forward_weight.raw(), 4);
        assert_eq!(report.final_forward_weight.raw(), 12);
        assert_eq!(forward_weight(&g, &after).unwrap().raw(), 12);
        assert_eq!(report.block_moves + report.fallback_moves, 1);
    }

    #[test]
    fn refine_pass_leaves_topological_order_alone() {
        let g = graph_from(&[("a", "b", 4), ("b", "c", 2), ("a", "c", 1)]);
        let r = ranking_of(&g, &["a", "b", "c"]);
        let (after, report) = refine_ranking(&g, &r, &RefineOptions::default()).unwrap();
        assert_eq!(after, r);
        assert_eq!(report.block_moves + report.fallback_moves, 0);
        assert_eq!(report.rejected_edges, 0);
    }

    #[test]
    fn refine_pass_on_g3_reaches_optimum() {
        let g = g3();
        let r = ranking_of(&g, &["a", "b", "c"]);
        let (after, report) = refine_ranking(&g, &r, &RefineOptions::default()).unwrap();
        assert_eq!(report.final_forward_weight.raw(), 15);
        let names: Vec<&str> = after.order().iter().map(|&n| g.external_id(n)).collect();
        assert_eq!(names, vec!["c", "a", "b"]);
    }

    #[test]
    fn oversized_blocks_fall_back() {
        let g = g4();
        let r = ranking_of(&g, &["1", "2", "3"]);
        let opts = RefineOptions { max_block: 0 };
        let (after, report) = refine_ranking(&g, &r, &opts).unwrap();
        assert_eq!(report.block_moves, 0);
        assert!(report.fallback_moves >= 1);
        assert_eq!(forward_weight(&g, &after).unwrap().raw(), 12);
    }
}
