//! Shared fixtures for unit tests.

use crate::graph::{Graph, GraphBuilder};
use crate::metrics::validate_ranking;
use crate::ranking::Ranking;
use crate::weight::{Weight, WeightScale};

/// Integer-weight graph (scale 0) from `(source, target, weight)` triples.
pub fn graph_from(edges: &[(&str, &str, i64)]) -> Graph {
    let mut b = GraphBuilder::new(WeightScale::new(0).unwrap());
    for &(s, t, w) in edges {
        b.add_edge(s, t, Weight::from_raw(w));
    }
    b.finish()
}

/// The 3-cycle used across the suite: a→b:5, b→c:3, c→a:10.
pub fn g3() -> Graph {
    graph_from(&[("a", "b", 5), ("b", "c", 3), ("c", "a", 10)])
}

/// Three nodes 1,2,3 with edges 3→1:10, 1→2:2, 2→3:2; identity order has
/// forward weight 4, the optimum is 12.
pub fn g4() -> Graph {
    graph_from(&[("1", "2", 2), ("2", "3", 2), ("3", "1", 10)])
}

pub fn ranking_of(graph: &Graph, ids: &[&str]) -> Ranking {
    validate_ranking(graph, ids).unwrap()
}
