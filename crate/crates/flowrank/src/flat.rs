//! Flat partition-based block reordering.
//!
//! A rank interval is cut into x^ℓ contiguous groups of near-equal size;
//! each window of x consecutive groups is reordered by the best of the x!
//! group permutations of the window's group-to-group weight matrix. Groups
//! keep their internal order, so only inter-group edges inside a window can
//! change direction.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::forward_weight_unchecked;
use crate::ranking::Ranking;
use crate::weight::Weight;

pub const MAX_ARITY: u32 = 8;
const MAX_GROUPS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionConfig {
    /// Window width x (2..=8; x! permutations are evaluated per window).
    pub arity: u32,
    /// Number of groups is arity^level.
    pub level: u32,
    /// First rank of the interval (inclusive).
    pub start: u32,
    /// Last rank of the interval (inclusive).
    pub end: u32,
}

impl PartitionConfig {
    /// Interval covering every rank with `level` chosen so groups hold
    /// roughly `target_group_size` nodes.
    pub fn whole_graph(n: usize, arity: u32, level: Option<u32>) -> Result<PartitionConfig> {
        if n == 0 {
            return Err(Error::EmptyInterval);
        }
        let level = level.unwrap_or_else(|| auto_level(n, arity, 64));
        let cfg = PartitionConfig {
            arity,
            level,
            start: 0,
            end: n as u32 - 1,
        };
        cfg.validate(n)?;
        Ok(cfg)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.arity < 2 {
            return Err(Error::InvalidPartition("arity must be at least 2".into()));
        }
        if self.arity > MAX_ARITY {
            return Err(Error::InvalidPartition(format!(
                "arity {} exceeds the maximum of {MAX_ARITY} (x! permutations per window)",
                self.arity
            )));
        }
        if self.level < 1 {
            return Err(Error::InvalidPartition("level must be at least 1".into()));
        }
        if self.group_count().is_none() {
            return Err(Error::InvalidPartition(format!(
                "{}^{} groups is too many",
                self.arity, self.level
            )));
        }
        if self.start > self.end {
            return Err(Error::EmptyInterval);
        }
        if (self.end as usize) >= n {
            return Err(Error::InvalidPartition(format!(
                "interval end {} out of range for {} ranks",
                self.end, n
            )));
        }
        Ok(())
    }

    pub fn group_count(&self) -> Option<usize> {
        let gc = (self.arity as u64).checked_pow(self.level)?;
        (gc <= MAX_GROUPS).then_some(gc as usize)
    }
}

/// Smallest level ≥ 1 whose groups hold at most `target` nodes.
pub fn auto_level(count: usize, arity: u32, target: usize) -> u32 {
    let mut level = 1u32;
    let mut groups = arity as u64;
    while (count as u64).div_ceil(groups) > target as u64 && groups <= MAX_GROUPS {
        level += 1;
        groups *= arity as u64;
    }
    level
}

/// Nodes with rank in [start, end] in rank order, split into arity^level
/// contiguous groups; when the count is not divisible the first
/// `count mod groups` groups take one extra node.
pub fn partition_interval(ranking: &Ranking, cfg: &PartitionConfig) -> Result<Vec<Vec<NodeId>>> {
    cfg.validate(ranking.len())?;
    let slice = &ranking.order()[cfg.start as usize..=cfg.end as usize];
    let group_count = cfg.group_count().expect("validated");
    let base = slice.len() / group_count;
    let extra = slice.len() % group_count;
    let mut groups = Vec::with_capacity(group_count);
    let mut at = 0usize;
    for i in 0..group_count {
        let size = base + usize::from(i < extra);
        groups.push(slice[at..at + size].to_vec());
        at += size;
    }
    debug_assert_eq!(at, slice.len());
    Ok(groups)
}

/// Winning permutation of one window of groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowChoice {
    /// Positions into the window's group list; identity when no
    /// rearrangement gains.
    pub order: Vec<usize>,
    /// Exact forward-weight gain over the current order.
    pub gain: i64,
}

impl WindowChoice {
    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(i, &g)| i == g)
    }
}

/// Evaluate all |groups|! permutations of the window against the
/// group-to-group weight matrix; intra-group weights never contribute.
/// Identity is preferred on ties, then the lexicographically smallest
/// permutation (enumeration is lexicographic, so keeping strict
/// improvements only realizes both rules).
pub fn best_window_permutation(graph: &Graph, groups: &[Vec<NodeId>]) -> Result<WindowChoice> {
    let x = groups.len();
    if x > MAX_ARITY as usize {
        return Err(Error::InvalidPartition(format!(
            "window of {x} groups exceeds the maximum of {MAX_ARITY}"
        )));
    }
    if x == 0 {
        return Ok(WindowChoice {
            order: Vec::new(),
            gain: 0,
        });
    }

    // Group index per node, for nodes inside the window.
    let mut group_of: std::collections::HashMap<NodeId, usize> = std::collections::HashMap::new();
    for (gi, group) in groups.iter().enumerate() {
        for &node in group {
            group_of.insert(node, gi);
        }
    }
    let mut w = vec![0i64; x * x];
    for (&node, &gi) in &group_of {
        for (target, weight) in graph.out_edges(node) {
            if let Some(&gj) = group_of.get(&target) {
                if gi != gj {
                    w[gi * x + gj] += weight.raw();
                }
            }
        }
    }

    let fw_of = |perm: &[usize]| -> i64 {
        let mut fw = 0;
        for a in 0..x {
            for b in (a + 1)..x {
                fw += w[perm[a] * x + perm[b]];
            }
        }
        fw
    };

    let mut perm: Vec<usize> = (0..x).collect();
    let identity_fw = fw_of(&perm);
    let mut best = perm.clone();
    let mut best_fw = identity_fw;
    while next_permutation(&mut perm) {
        let fw = fw_of(&perm);
        if fw > best_fw {
            best_fw = fw;
            best.copy_from_slice(&perm);
        }
    }
    Ok(WindowChoice {
        order: best,
        gain: best_fw - identity_fw,
    })
}

/// Lexicographic successor in place; false once the sequence is the last.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlatReport {
    pub windows: u64,
    pub reordered: u64,
    pub gain: Weight,
}

/// Walk non-overlapping windows of `arity` consecutive groups and apply
/// each window's best permutation; group contents keep their internal rank
/// order and the window reoccupies its own contiguous rank range, so ranks
/// outside [start, end] are untouched.
pub fn flat_partition_reorder(
    graph: &Graph,
    ranking: &Ranking,
    cfg: &PartitionConfig,
) -> Result<(Ranking, FlatReport)> {
    if ranking.len() != graph.node_count() {
        return Err(Error::RankingSizeMismatch {
            ranking: ranking.len(),
            graph: graph.node_count(),
        });
    }
    let groups = partition_interval(ranking, cfg)?;
    let mut result = ranking.clone();
    let mut report = FlatReport::default();

    let x = cfg.arity as usize;
    for window in groups.chunks(x) {
        // Empty groups occur when the interval has fewer nodes than groups;
        // they are skipped and the window shrinks accordingly.
        let non_empty: Vec<&Vec<NodeId>> =
            window.iter().filter(|g| !g.is_empty()).collect();
        if non_empty.len() < 2 {
            continue;
        }
        report.windows += 1;
        let occupied: Vec<Vec<NodeId>> = non_empty.iter().map(|g| (*g).clone()).collect();
        let choice = best_window_permutation(graph, &occupied)?;
        if choice.is_identity() {
            continue;
        }
        debug_assert!(choice.gain > 0, "non-identity winners gain strictly");
        // Window ranks are contiguous: lowest rank of its first non-empty
        // group through the end of its last.
        let window_lo = result.position(occupied[0][0]) as usize;
        let mut new_seq: Vec<NodeId> = Vec::new();
        for &gi in &choice.order {
            new_seq.extend_from_slice(&occupied[gi]);
        }
        result.assign_range(window_lo, &new_seq);
        report.reordered += 1;
        report.gain += Weight::from_raw(choice.gain);
    }

    debug_assert!(
        forward_weight_unchecked(graph, &result).raw()
            == forward_weight_unchecked(graph, ranking).raw() + report.gain.raw()
    );
    Ok((result, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::forward_weight;
    use crate::testutil::{graph_from, ranking_of};

    #[test]
    fn partitions_evenly() {
        let r = Ranking::identity(4);
        let cfg = PartitionConfig {
            arity: 2,
            level: 1,
            start: 0,
            end: 3,
        };
        let groups = partition_interval(&r, &cfg).unwrap();
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn partitions_with_remainder_front_loaded() {
        let r = Ranking::identity(5);
        let cfg = PartitionConfig {
            arity: 2,
            level: 1,
            start: 0,
            end: 4,
        };
        let groups = partition_interval(&r, &cfg).unwrap();
        assert_eq!(groups[0].len(), 3);
        assert_eq!(groups[1].len(), 2);
    }

    #[test]
    fn partitions_level_two() {
        let r = Ranking::identity(8);
        let cfg = PartitionConfig {
            arity: 2,
            level: 2,
            start: 0,
            end: 7,
        };
        let groups = partition_interval(&r, &cfg).unwrap();
        assert_eq!(groups.len(), 4);
        assert!(groups.iter().all(|g| g.len() == 2));
    }

    #[test]
    fn rejects_bad_configs() {
        let r = Ranking::identity(4);
        let bad_interval = PartitionConfig {
            arity: 2,
            level: 1,
            start: 3,
            end: 2,
        };
        assert!(matches!(
            partition_interval(&r, &bad_interval),
            Err(Error::EmptyInterval)
        ));
        let bad_arity = PartitionConfig {
            arity: 9,
            level: 1,
            start: 0,
            end: 3,
        };
        assert!(partition_interval(&r, &bad_arity).is_err());
        let bad_end = PartitionConfig {
            arity: 2,
            level: 1,
            start: 0,
            end: 4,
        };
        assert!(partition_interval(&r, &bad_end).is_err());
    }

    #[test]
    fn window_permutation_prefers_reversal_when_it_gains() {
        // P1={a,b}, P2={c,d}; c→a:5, d→b:5 versus a→b:1, c→d:1 intra.
        let g = graph_from(&[("c", "a", 5), ("d", "b", 5), ("a", "b", 1), ("c", "d", 1)]);
        let r = ranking_of(&g, &["a", "b", "c", "d"]);
        let groups = partition_interval(
            &r,
            &PartitionConfig {
                arity: 2,
                level: 1,
                start: 0,
                end: 3,
            },
        )
        .unwrap();
        let choice = best_window_permutation(&g, &groups).unwrap();
        assert_eq!(choice.order, vec![1, 0]);
        assert_eq!(choice.gain, 10);
    }

    #[test]
    fn window_without_intergroup_edges_keeps_identity() {
        let g = graph_from(&[("a", "b", 3), ("c", "d", 2)]);
        let r = ranking_of(&g, &["a", "b", "c", "d"]);
        let groups = vec![vec![0, 1], vec![2, 3]];
        let choice = best_window_permutation(&g, &groups).unwrap();
        assert!(choice.is_identity());
        assert_eq!(choice.gain, 0);
    }

    #[test]
    fn three_group_tie_breaks_lexicographically() {
        // W[2][1]=4, W[3][1]=4, W[1][2]=1 (1-indexed): both [2,3,1] and
        // [3,2,1] reach 8; the lexicographically smaller wins.
        let g = graph_from(&[("b", "a", 4), ("c", "a", 4), ("a", "b", 1)]);
        let r = ranking_of(&g, &["a", "b", "c"]);
        let groups = vec![vec![0], vec![1], vec![2]];
        let _ = r;
        let choice = best_window_permutation(&g, &groups).unwrap();
        assert_eq!(choice.order, vec![1, 2, 0]);
        assert_eq!(choice.gain, 8 - 1);
    }

    #[test]
    fn reorder_applies_window_choice() {
        let g = graph_from(&[("c", "a", 5), ("d", "b", 5), ("a", "b", 1), ("c", "d", 1)]);
        let r = ranking_of(&g, &["a", "b", "c", "d"]);
        assert_eq!(forward_weight(&g, &r).unwrap().raw(), 2);
        let cfg = PartitionConfig {
            arity: 2,
            level: 1,
            start: 0,
            end: 3,
        };
        let (after, report) = flat_partition_reorder(&g, &r, &cfg).unwrap();
        let names: Vec<&str> = after.order().iter().map(|&n| g.external_id(n)).collect();
        assert_eq!(names, vec!["c", "d", "a", "b"]);
        assert_eq!(forward_weight(&g, &after).unwrap().raw(), 12);
        assert_eq!(report.reordered, 1);
        assert_eq!(report.gain.raw(), 10);
    }

    #[test]
    fn reorder_keeps_topological_dag_interval() {
        let g = graph_from(&[("a", "b", 2), ("b", "c", 2), ("c", "d", 2), ("a", "d", 1)]);
        let r = ranking_of(&g, &["a", "b", "c", "d"]);
        let cfg = PartitionConfig {
            arity: 2,
            level: 1,
            start: 0,
            end: 3,
        };
        let (after, report) = flat_partition_reorder(&g, &r, &cfg).unwrap();
        assert_eq!(after, r);
        assert_eq!(report.reordered, 0);
    }

    #[test]
    fn empty_groups_are_skipped() {
        // 3 nodes into 4 groups leaves one empty group.
        let g = graph_from(&[("b", "a", 4), ("c", "b", 4), ("a", "c", 1)]);
        let r = ranking_of(&g, &["a", "b", "c"]);
        let cfg = PartitionConfig {
            arity: 4,
            level: 1,
            start: 0,
            end: 2,
        };
        let (after, _) = flat_partition_reorder(&g, &r, &cfg).unwrap();
        assert!(forward_weight(&g, &after).unwrap() >= forward_weight(&g, &r).unwrap());
    }

    #[test]
    fn ranks_outside_interval_untouched() {
        let g = graph_from(&[
            ("z", "y", 1),
            ("c", "a", 5),
            ("d", "b", 5),
            ("a", "b", 1),
        ]);
        let r = ranking_of(&g, &["z", "a", "b", "c", "d", "y"]);
        let cfg = PartitionConfig {
            arity: 2,
            level: 1,
            start: 1,
            end: 4,
        };
        let (after, _) = flat_partition_reorder(&g, &r, &cfg).unwrap();
        assert_eq!(after.node_at(0), r.node_at(0));
        assert_eq!(after.node_at(5), r.node_at(5));
    }

    #[test]
    fn next_permutation_is_lexicographic() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(seen, sorted);
    }

    #[test]
    fn auto_level_targets_group_size() {
        assert_eq!(auto_level(100, 4, 64), 1);
        assert_eq!(auto_level(1000, 4, 64), 2);
        assert_eq!(auto_level(10, 2, 64), 1);
    }
}
