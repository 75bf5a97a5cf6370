//! Descriptive statistics of a loaded graph: degrees, density, weakly and
//! strongly connected component counts, weight distribution.

use std::fmt;

use crate::graph::Graph;
use crate::scc::compute_sccs;
use crate::weight::{Weight, WeightScale};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    /// 2·|E| / |V| — in plus out connections per node.
    pub avg_degree: f64,
    /// Maximum in+out degree over all nodes.
    pub max_degree: usize,
    /// Median of in+out degrees (average of the two middles for even |V|).
    pub median_degree: f64,
    /// |E| / (|V|·(|V|−1)); 0 when undefined (|V| < 2).
    pub density: f64,
    pub wcc_count: usize,
    pub scc_count: usize,
    pub avg_scc_size: f64,
    pub largest_scc_size: usize,
    pub singleton_scc_count: usize,
    pub weight_min: Weight,
    pub weight_max: Weight,
    pub weight_mean: f64,
    /// Population standard deviation of edge weights.
    pub weight_std: f64,
    pub scale: WeightScale,
}

pub fn compute_stats(graph: &Graph) -> GraphStats {
    let n = graph.node_count();
    let m = graph.edge_count();
    let scale = graph.scale();
    if n == 0 {
        return GraphStats {
            node_count: 0,
            edge_count: 0,
            avg_degree: 0.0,
            max_degree: 0,
            median_degree: 0.0,
            density: 0.0,
            wcc_count: 0,
            scc_count: 0,
            avg_scc_size: 0.0,
            largest_scc_size: 0,
            singleton_scc_count: 0,
            weight_min: Weight::ZERO,
            weight_max: Weight::ZERO,
            weight_mean: 0.0,
            weight_std: 0.0,
            scale,
        };
    }

    let mut degrees: Vec<usize> = (0..n as u32)
        .map(|u| graph.out_degree(u) + graph.in_degree(u))
        .collect();
    degrees.sort_unstable();
    let max_degree = *degrees.last().unwrap();
    let median_degree = if n % 2 == 1 {
        degrees[n / 2] as f64
    } else {
        (degrees[n / 2 - 1] + degrees[n / 2]) as f64 / 2.0
    };

    let density = if n >= 2 {
        m as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };

    let partition = compute_sccs(graph);
    let scc_count = partition.count();

    // Weight distribution over stored edges.
    let (mut w_min, mut w_max) = (i64::MAX, i64::MIN);
    let mut w_sum = 0i128;
    let mut w_sq = 0i128;
    for (_, _, w) in graph.edges() {
        let raw = w.raw();
        w_min = w_min.min(raw);
        w_max = w_max.max(raw);
        w_sum += raw as i128;
        w_sq += (raw as i128) * (raw as i128);
    }
    let (weight_mean, weight_std) = if m == 0 {
        (0.0, 0.0)
    } else {
        let count = m as i128;
        let mean = w_sum as f64 / m as f64;
        let var = (count * w_sq - w_sum * w_sum) as f64 / (m as f64 * m as f64);
        let f = scale.factor() as f64;
        (mean / f, var.max(0.0).sqrt() / f)
    };

    GraphStats {
        node_count: n,
        edge_count: m,
        avg_degree: 2.0 * m as f64 / n as f64,
        max_degree,
        median_degree,
        density,
        wcc_count: wcc_count(graph),
        scc_count,
        avg_scc_size: n as f64 / scc_count as f64,
        largest_scc_size: partition.largest_size(),
        singleton_scc_count: partition.singleton_count(),
        weight_min: if m == 0 { Weight::ZERO } else { Weight::from_raw(w_min) },
        weight_max: if m == 0 { Weight::ZERO } else { Weight::from_raw(w_max) },
        weight_mean,
        weight_std,
        scale,
    }
}

/// Weakly connected components via union-find over undirected reachability.
fn wcc_count(graph: &Graph) -> usize {
    let n = graph.node_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], x: u32) -> u32 {
        let mut root = x;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = x;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    for (u, v, _) in graph.edges() {
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru != rv {
            parent[ru as usize] = rv;
        }
    }
    (0..n as u32).filter(|&x| find(&mut parent, x) == x).count()
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes              {}", self.node_count)?;
        writeln!(f, "edges              {}", self.edge_count)?;
        writeln!(f, "avg_degree         {:.2}", self.avg_degree)?;
        writeln!(f, "max_degree         {}", self.max_degree)?;
        writeln!(f, "median_degree      {}", self.median_degree)?;
        writeln!(f, "density            {:.6}", self.density)?;
        writeln!(f, "wcc_count          {}", self.wcc_count)?;
        writeln!(f, "scc_count          {}", self.scc_count)?;
        writeln!(f, "avg_scc_size       {:.2}", self.avg_scc_size)?;
        writeln!(f, "largest_scc        {}", self.largest_scc_size)?;
        writeln!(f, "singleton_sccs     {}", self.singleton_scc_count)?;
        writeln!(
            f,
            "weight_range       {} to {}",
            self.scale.format(self.weight_min),
            self.scale.format(self.weight_max)
        )?;
        write!(
            f,
            "weight_mean_std    {:.2} / {:.2}",
            self.weight_mean, self.weight_std
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{g3, graph_from};

    #[test]
    fn stats_of_g3() {
        let s = compute_stats(&g3());
        assert_eq!(s.node_count, 3);
        assert_eq!(s.edge_count, 3);
        assert_eq!(s.density, 0.5);
        assert_eq!(s.wcc_count, 1);
        assert_eq!(s.scc_count, 1);
        assert_eq!(s.largest_scc_size, 3);
        assert_eq!(s.weight_mean, 6.0);
        assert_eq!(s.avg_degree, 2.0);
        assert_eq!(s.max_degree, 2);
        assert_eq!(s.median_degree, 2.0);
        assert_eq!(s.weight_min.raw(), 3);
        assert_eq!(s.weight_max.raw(), 10);
        // population std of {5, 3, 10}
        assert!((s.weight_std - (26.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stats_of_two_isolated_edges() {
        let s = compute_stats(&graph_from(&[("a", "b", 1), ("c", "d", 1)]));
        assert_eq!(s.wcc_count, 2);
        assert_eq!(s.scc_count, 4);
        assert_eq!(s.singleton_scc_count, 4);
        assert_eq!(s.largest_scc_size, 1);
        assert_eq!(s.avg_scc_size, 1.0);
    }

    #[test]
    fn stats_of_empty_graph() {
        let s = compute_stats(&graph_from(&[]));
        assert_eq!(s.node_count, 0);
        assert_eq!(s.density, 0.0);
        assert_eq!(s.wcc_count, 0);
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let g = graph_from(&[("a", "b", 1), ("b", "c", 2), ("a", "c", 3), ("c", "a", 4)]);
        let total: usize = (0..g.node_count() as u32)
            .map(|u| g.out_degree(u) + g.in_degree(u))
            .sum();
        assert_eq!(total, 2 * g.edge_count());
        let s = compute_stats(&g);
        assert_eq!(s.avg_degree * s.node_count as f64, 2.0 * s.edge_count as f64);
    }
}
