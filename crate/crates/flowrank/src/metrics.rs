//! The objective and its reporting: forward weight, forward ratio,
//! backward-edge statistics and distribution data.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, RankingIssues, Result};
use crate::graph::Graph;
use crate::ranking::Ranking;
use crate::weight::{Weight, WeightScale};

fn check_size(graph: &Graph, ranking: &Ranking) -> Result<()> {
    if ranking.len() != graph.node_count() {
        return Err(Error::RankingSizeMismatch {
            ranking: ranking.len(),
            graph: graph.node_count(),
        });
    }
    Ok(())
}

/// Exact total weight of forward edges: Σ w(u,v) over edges with
/// π(u) < π(v).
pub fn forward_weight(graph: &Graph, ranking: &Ranking) -> Result<Weight> {
    check_size(graph, ranking)?;
    Ok(forward_weight_unchecked(graph, ranking))
}

pub(crate) fn forward_weight_unchecked(graph: &Graph, ranking: &Ranking) -> Weight {
    let pos = ranking.positions();
    let mut fw = 0i64;
    for (u, v, w) in graph.edges() {
        if pos[u as usize] < pos[v as usize] {
            fw += w.raw();
        }
    }
    Weight::from_raw(fw)
}

/// Forward weight over total weight; 1.0 for an edgeless graph (vacuously
/// all-forward).
pub fn forward_ratio(graph: &Graph, ranking: &Ranking) -> Result<f64> {
    let fw = forward_weight(graph, ranking)?;
    Ok(ratio(fw, graph.total_weight()))
}

pub(crate) fn ratio(forward: Weight, total: Weight) -> f64 {
    if total.is_zero() {
        1.0
    } else {
        forward.raw() as f64 / total.raw() as f64
    }
}

/// Backward-edge statistics bundle for one (graph, ranking) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub forward_weight: Weight,
    pub backward_weight: Weight,
    pub total_weight: Weight,
    pub forward_ratio: f64,
    pub backward_edge_count: u64,
    /// Absent when there are no backward edges.
    pub back_stats: Option<BackEdgeStats>,
    pub scale: WeightScale,
}

/// Back-edge length is the rank distance π(u) − π(v) of a backward edge
/// (u, v). Standard deviations are population (divide by N).
#[derive(Debug, Clone, PartialEq)]
pub struct BackEdgeStats {
    pub length_min: u64,
    pub length_max: u64,
    pub length_mean: f64,
    pub length_std: f64,
    pub weight_mean: f64,
    pub weight_std: f64,
}

/// Population mean/std from exact integer accumulators.
fn mean_std(sum: i128, sum_sq: i128, count: u64) -> (f64, f64) {
    let n = count as i128;
    let mean = sum as f64 / count as f64;
    // variance = (n·Σx² − (Σx)²) / n², computed exactly before conversion
    let num = n * sum_sq - sum * sum;
    let var = num as f64 / (n as f64 * n as f64);
    (mean, var.max(0.0).sqrt())
}

pub fn back_edge_report(graph: &Graph, ranking: &Ranking) -> Result<MetricsReport> {
    check_size(graph, ranking)?;
    let pos = ranking.positions();
    let mut fw = 0i64;
    let mut bw = 0i64;
    let mut count = 0u64;
    let mut len_min = u64::MAX;
    let mut len_max = 0u64;
    let mut len_sum = 0i128;
    let mut len_sq = 0i128;
    let mut w_sum = 0i128;
    let mut w_sq = 0i128;
    for (u, v, w) in graph.edges() {
        let pu = pos[u as usize] as u64;
        let pv = pos[v as usize] as u64;
        if pu < pv {
            fw += w.raw();
        } else {
            bw += w.raw();
            count += 1;
            let len = pu - pv;
            len_min = len_min.min(len);
            len_max = len_max.max(len);
            len_sum += len as i128;
            len_sq += (len as i128) * (len as i128);
            w_sum += w.raw() as i128;
            w_sq += (w.raw() as i128) * (w.raw() as i128);
        }
    }
    let scale = graph.scale();
    let back_stats = (count > 0).then(|| {
        let (length_mean, length_std) = mean_std(len_sum, len_sq, count);
        let (raw_w_mean, raw_w_std) = mean_std(w_sum, w_sq, count);
        let f = scale.factor() as f64;
        BackEdgeStats {
            length_min: len_min,
            length_max: len_max,
            length_mean,
            length_std,
            weight_mean: raw_w_mean / f,
            weight_std: raw_w_std / f,
        }
    });
    let forward = Weight::from_raw(fw);
    Ok(MetricsReport {
        forward_weight: forward,
        backward_weight: Weight::from_raw(bw),
        total_weight: graph.total_weight(),
        forward_ratio: ratio(forward, graph.total_weight()),
        backward_edge_count: count,
        back_stats,
        scale,
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> serde_json::Value {
        let s = self.scale;
        let mut obj = serde_json::json!({
            "forward_weight": s.to_f64(self.forward_weight),
            "backward_weight": s.to_f64(self.backward_weight),
            "total_weight": s.to_f64(self.total_weight),
            "forward_weight_raw": self.forward_weight.raw(),
            "backward_weight_raw": self.backward_weight.raw(),
            "total_weight_raw": self.total_weight.raw(),
            "scale_decimals": s.decimals(),
            "forward_ratio": self.forward_ratio,
            "backward_edge_count": self.backward_edge_count,
        });
        if let Some(b) = &self.back_stats {
            obj["back_length"] = serde_json::json!({
                "min": b.length_min,
                "max": b.length_max,
                "mean": b.length_mean,
                "std": b.length_std,
            });
            obj["back_weight"] = serde_json::json!({
                "mean": b.weight_mean,
                "std": b.weight_std,
            });
        }
        obj
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.scale;
        writeln!(f, "forward_weight   {}", s.format(self.forward_weight))?;
        writeln!(f, "backward_weight  {}", s.format(self.backward_weight))?;
        writeln!(f, "total_weight     {}", s.format(self.total_weight))?;
        writeln!(
            f,
            "forward_ratio    {:.4} ({:.6})",
            self.forward_ratio, self.forward_ratio
        )?;
        writeln!(f, "backward_edges   {}", self.backward_edge_count)?;
        match &self.back_stats {
            Some(b) => {
                writeln!(
                    f,
                    "back_length      min={} max={} mean={:.6} std={:.6}",
                    b.length_min, b.length_max, b.length_mean, b.length_std
                )?;
                write!(
                    f,
                    "back_weight      mean={:.6} std={:.6}",
                    b.weight_mean, b.weight_std
                )
            }
            None => write!(f, "back_length      none\nback_weight      none"),
        }
    }
}

/// Histogram and cumulative distribution of backward-edge lengths,
/// plot-ready.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackEdgeDistribution {
    /// `(bin lower bound, count)` for equal-width bins over `[1, max_len]`.
    pub bins: Vec<(u64, u64)>,
    /// `(length, cumulative count)` at each distinct backward-edge length.
    pub cumulative: Vec<(u64, u64)>,
}

impl BackEdgeDistribution {
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lower,count\n");
        for &(lo, c) in &self.bins {
            out.push_str(&format!("{lo},{c}\n"));
        }
        out
    }

    pub fn cumulative_csv(&self) -> String {
        let mut out = String::from("length,cumulative_count\n");
        for &(len, c) in &self.cumulative {
            out.push_str(&format!("{len},{c}\n"));
        }
        out
    }
}

pub fn back_edge_distribution(
    graph: &Graph,
    ranking: &Ranking,
    bin_count: usize,
) -> Result<BackEdgeDistribution> {
    back_edge_distribution_with_max(graph, ranking, bin_count, None)
}

/// Same as [`back_edge_distribution`], but with an externally imposed
/// maximum length so several rankings share identical bin boundaries.
pub fn back_edge_distribution_with_max(
    graph: &Graph,
    ranking: &Ranking,
    bin_count: usize,
    shared_max_len: Option<u64>,
) -> Result<BackEdgeDistribution> {
    if bin_count == 0 {
        return Err(Error::invalid_input("bin_count must be at least 1"));
    }
    check_size(graph, ranking)?;
    let lengths = back_edge_lengths(graph, ranking);
    let max_len = match shared_max_len {
        Some(m) => m,
        None => match lengths.iter().copied().max() {
            Some(m) => m,
            None => {
                return Ok(BackEdgeDistribution {
                    bins: Vec::new(),
                    cumulative: Vec::new(),
                })
            }
        },
    };
    if max_len == 0 || lengths.is_empty() {
        return Ok(BackEdgeDistribution {
            bins: Vec::new(),
            cumulative: Vec::new(),
        });
    }
    // Equal-width integer bins covering lengths 1..=max_len; the last bin
    // absorbs anything beyond a shared max.
    let width = max_len.div_ceil(bin_count as u64).max(1);
    let mut bins = vec![0u64; bin_count];
    for &len in &lengths {
        let ix = (((len - 1) / width) as usize).min(bin_count - 1);
        bins[ix] += 1;
    }
    let bins = bins
        .into_iter()
        .enumerate()
        .map(|(i, c)| (1 + i as u64 * width, c))
        .collect();

    let mut sorted = lengths;
    sorted.sort_unstable();
    let mut cumulative: Vec<(u64, u64)> = Vec::new();
    let mut running = 0u64;
    for len in sorted {
        running += 1;
        match cumulative.last_mut() {
            Some(last) if last.0 == len => last.1 = running,
            _ => cumulative.push((len, running)),
        }
    }
    Ok(BackEdgeDistribution { bins, cumulative })
}

pub(crate) fn back_edge_lengths(graph: &Graph, ranking: &Ranking) -> Vec<u64> {
    let pos = ranking.positions();
    graph
        .edges()
        .filter_map(|(u, v, _)| {
            let pu = pos[u as usize] as u64;
            let pv = pos[v as usize] as u64;
            (pu > pv).then(|| pu - pv)
        })
        .collect()
}

/// Check a full ordering of external IDs against the graph and convert it
/// to an internal [`Ranking`]. All offending IDs (duplicates, unknown,
/// missing) are reported together.
pub fn validate_ranking<S: AsRef<str>>(graph: &Graph, candidate: &[S]) -> Result<Ranking> {
    let mut issues = RankingIssues::default();
    let mut seen = vec![false; graph.node_count()];
    let mut order = Vec::with_capacity(candidate.len());
    let mut counts: HashMap<&str, u32> = HashMap::new();
    for id in candidate {
        let id = id.as_ref();
        match graph.index_of(id) {
            None => issues.unknown.push(id.to_string()),
            Some(ix) => {
                if seen[ix as usize] {
                    *counts.entry(id).or_insert(1) += 1;
                } else {
                    seen[ix as usize] = true;
                    order.push(ix);
                }
            }
        }
    }
    issues.duplicates = counts.keys().map(|s| s.to_string()).collect();
    for (ix, &present) in seen.iter().enumerate() {
        if !present {
            issues.missing.push(graph.external_id(ix as u32).to_string());
        }
    }
    issues.duplicates.sort();
    issues.duplicates.dedup();
    issues.unknown.sort();
    issues.unknown.dedup();
    issues.missing.sort();
    if !issues.is_empty() {
        return Err(Error::InvalidRanking(issues));
    }
    Ranking::from_order(order)
}
