//! Exact maximum-forward-weight orderings for small graphs: the ground
//! truth that every heuristic pass is tested against.
//!
//! Two independent routes are provided and must agree: lexicographic
//! enumeration of all n! permutations, and a subset dynamic program over
//! 2^n states (`best[S] = max over v ∈ S of best[S∖{v}] + weight from
//! S∖{v} into v`, i.e. v placed last). Both return the lexicographically
//! smallest maximizer and the number of optimal permutations.

use crate::error::{Error, Result};
use crate::flat::next_permutation;
use crate::graph::{Graph, NodeId};
use crate::ranking::Ranking;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Lexicographically smallest optimal ordering (by dense node index).
    pub ranking: Ranking,
    pub forward_weight: Weight,
    /// Number of permutations attaining the optimum.
    pub optimum_count: u64,
}

pub const DEFAULT_ENUMERATION_LIMIT: usize = 10;
pub const DEFAULT_DP_LIMIT: usize = 20;

fn weight_matrix(graph: &Graph) -> Vec<i64> {
    let n = graph.node_count();
    let mut w = vec![0i64; n * n];
    for (u, v, weight) in graph.edges() {
        w[u as usize * n + v as usize] = weight.raw();
    }
    w
}

/// Enumerate all n! permutations in lexicographic order.
pub fn exact_optimal_ranking(graph: &Graph, node_limit: usize) -> Result<OracleResult> {
    let n = graph.node_count();
    if n > node_limit {
        return Err(Error::TooLargeForExact {
            count: n,
            limit: node_limit,
        });
    }
    if n == 0 {
        return Ok(OracleResult {
            ranking: Ranking::identity(0),
            forward_weight: Weight::ZERO,
            optimum_count: 1,
        });
    }
    let w = weight_matrix(graph);
    let fw_of = |perm: &[usize]| -> i64 {
        let mut fw = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                fw += w[perm[a] * n + perm[b]];
            }
        }
        fw
    };

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_fw = fw_of(&perm);
    let mut count = 1u64;
    while next_permutation(&mut perm) {
        let fw = fw_of(&perm);
        if fw > best_fw {
            best_fw = fw;
            best.copy_from_slice(&perm);
            count = 1;
        } else if fw == best_fw {
            count += 1;
        }
    }

    Ok(OracleResult {
        ranking: Ranking::from_order(best.into_iter().map(|p| p as NodeId).collect())?,
        forward_weight: Weight::from_raw(best_fw),
        optimum_count: count,
    })
}

/// Subset dynamic program; same contract as [`exact_optimal_ranking`] but
/// usable up to ~20 nodes.
pub fn exact_optimal_ranking_dp(graph: &Graph, node_limit: usize) -> Result<OracleResult> {
    let n = graph.node_count();
    if n > node_limit || n > DEFAULT_DP_LIMIT {
        return Err(Error::TooLargeForExact {
            count: n,
            limit: node_limit.min(DEFAULT_DP_LIMIT),
        });
    }
    if n == 0 {
        return Ok(OracleResult {
            ranking: Ranking::identity(0),
            forward_weight: Weight::ZERO,
            optimum_count: 1,
        });
    }
    let w = weight_matrix(graph);
    let full: usize = (1usize << n) - 1;
    let mut best = vec![0i64; full + 1];
    let mut count = vec![0u64; full + 1];
    count[0] = 1;

    // into_weight(v, S): total weight of edges from S into v.
    let into_weight = |v: usize, set: usize| -> i64 {
        let mut total = 0;
        let mut rest = set;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += w[u * n + v];
        }
        total
    };

    for set in 1..=full {
        let mut best_fw = i64::MIN;
        let mut ways = 0u64;
        let mut members = set;
        while members != 0 {
            let v = members.trailing_zeros() as usize;
            members &= members - 1;
            let rest = set & !(1 << v);
            let candidate = best[rest] + into_weight(v, rest);
            if candidate > best_fw {
                best_fw = candidate;
                ways = count[rest];
            } else if candidate == best_fw {
                ways += count[rest];
            }
        }
        best[set] = best_fw;
        count[set] = ways;
    }

    // Reconstruct front-to-back, picking the smallest node that still
    // reaches the optimum; the forward formulation uses the same table
    // (out-weight of the first node plus the best of the rest).
    let out_weight = |v: usize, set: usize| -> i64 {
        let mut total = 0;
        let mut rest = set;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += w[v * n + u];
        }
        total
    };
    let mut order: Vec<NodeId> = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let mut members = set;
        let mut chosen = None;
        while members != 0 {
            let v = members.trailing_zeros() as usize;
            members &= members - 1;
            let rest = set & !(1 << v);
            if out_weight(v, rest) + best[rest] == best[set] {
                chosen = Some(v);
                break; // members iterate in ascending index order
            }
        }
        let v = chosen.expect("some first node attains the optimum");
        order.push(v as NodeId);
        set &= !(1 << v);
    }

    Ok(OracleResult {
        ranking: Ranking::from_order(order)?,
        forward_weight: Weight::from_raw(best[full]),
        optimum_count: count[full],
    })
}
