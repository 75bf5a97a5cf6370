//! Node orderings.
//!
//! A [`Ranking`] keeps both directions of the permutation in sync: `order`
//! (node at each rank) and `position` (rank of each node). Every pass reads
//! and rewrites this structure.

use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    order: Vec<NodeId>,
    position: Vec<u32>,
}

impl Ranking {
    /// Ranking where node `i` sits at rank `i`.
    pub fn identity(n: usize) -> Ranking {
        Ranking {
            order: (0..n as NodeId).collect(),
            position: (0..n as u32).collect(),
        }
    }

    /// Build from the rank-0-first node sequence; rejects non-permutations.
    pub fn from_order(order: Vec<NodeId>) -> Result<Ranking> {
        let n = order.len();
        let mut position = vec![u32::MAX; n];
        for (rank, &node) in order.iter().enumerate() {
            let slot = position.get_mut(node as usize).ok_or(Error::NodeOutOfRange {
                index: node,
                count: n as u32,
            })?;
            if *slot != u32::MAX {
                return Err(Error::invalid_input(format!(
                    "node {node} appears more than once in the ordering"
                )));
            }
            *slot = rank as u32;
        }
        Ok(Ranking { order, position })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Node at each rank, rank 0 first.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// Rank of `node`.
    pub fn position(&self, node: NodeId) -> u32 {
        self.position[node as usize]
    }

    pub fn positions(&self) -> &[u32] {
        &self.position
    }

    pub fn node_at(&self, rank: u32) -> NodeId {
        self.order[rank as usize]
    }

    pub fn reversed(&self) -> Ranking {
        let mut order = self.order.clone();
        order.reverse();
        let n = self.len() as u32;
        let position = self.position.iter().map(|&p| n - 1 - p).collect();
        Ranking { order, position }
    }

    /// Overwrite the contiguous rank range starting at `start_rank` with
    /// `nodes` (which must be a rearrangement of the ranks it replaces).
    pub fn assign_range(&mut self, start_rank: usize, nodes: &[NodeId]) {
        debug_assert!(start_rank + nodes.len() <= self.order.len());
        for (i, &node) in nodes.iter().enumerate() {
            let rank = start_rank + i;
            self.order[rank] = node;
            self.position[node as usize] = rank as u32;
        }
        debug_assert!(self.check_consistent());
    }

    /// Overwrite a scattered (sorted ascending) set of ranks with `nodes`,
    /// assigning `nodes[i]` to `ranks[i]`.
    pub fn assign_at_ranks(&mut self, ranks: &[u32], nodes: &[NodeId]) {
        debug_assert_eq!(ranks.len(), nodes.len());
        for (&rank, &node) in ranks.iter().zip(nodes) {
            self.order[rank as usize] = node;
            self.position[node as usize] = rank;
        }
        debug_assert!(self.check_consistent());
    }

    fn check_consistent(&self) -> bool {
        self.order
            .iter()
            .enumerate()
            .all(|(rank, &node)| self.position[node as usize] == rank as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_position_are_inverse() {
        let r = Ranking::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(r.position(2), 0);
        assert_eq!(r.position(0), 1);
        assert_eq!(r.position(1), 2);
        assert_eq!(r.node_at(0), 2);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Ranking::from_order(vec![0, 0]).is_err());
        assert!(Ranking::from_order(vec![0, 5]).is_err());
    }

    #[test]
    fn reversal() {
        let r = Ranking::from_order(vec![2, 0, 1]).unwrap();
        let rev = r.reversed();
        assert_eq!(rev.order(), &[1, 0, 2]);
        assert_eq!(rev.position(2), 2);
    }

    #[test]
    fn empty_ranking() {
        let r = Ranking::identity(0);
        assert!(r.is_empty());
        assert_eq!(Ranking::from_order(vec![]).unwrap(), r);
    }

    #[test]
    fn assign_range_updates_both_views() {
        let mut r = Ranking::identity(5);
        r.assign_range(1, &[3, 1, 2]);
        assert_eq!(r.order(), &[0, 3, 1, 2, 4]);
        assert_eq!(r.position(3), 1);
        assert_eq!(r.position(2), 3);
    }

    #[test]
    fn assign_at_scattered_ranks() {
        let mut r = Ranking::identity(5);
        r.assign_at_ranks(&[0, 2, 4], &[4, 0, 2]);
        assert_eq!(r.order(), &[4, 1, 0, 3, 2]);
        assert_eq!(r.position(4), 0);
        assert_eq!(r.position(0), 2);
        assert_eq!(r.position(2), 4);
    }
}
