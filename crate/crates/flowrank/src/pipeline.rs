//! Pass orchestration with save-if-improved checkpointing.
//!
//! A pipeline runs its init stages once (typically the greedy seed), then
//! sweeps the refinement stage list until a full sweep yields no improvement
//! or the budget expires. After every stage the exact forward weight is
//! recomputed; improvements are persisted atomically (temp file + rename),
//! anything else is discarded and the best-so-far ranking carries on.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flat::{flat_partition_reorder, PartitionConfig};
use crate::graph::Graph;
use crate::greedy::greedy_rank;
use crate::io::{read_ranking_ids, write_ranking};
use crate::metrics::{back_edge_report, forward_weight, validate_ranking, MetricsReport};
use crate::ranking::Ranking;
use crate::refine::{refine_ranking, RefineOptions};
use crate::scc::{refine_scc_blocks, scc_global_ranking, SccBlockOptions};
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum Stage {
    Greedy,
    Refine {
        max_block: usize,
    },
    SccBlocks {
        block_size: usize,
        offset: usize,
        perm_limit: usize,
    },
    Flat {
        arity: u32,
        level: Option<u32>,
    },
    SccGlobal {
        perm_limit: usize,
    },
}

/// Baseline parameters used by [`Stage::parse`] and the default schedule.
#[derive(Debug, Clone, Copy)]
pub struct StageDefaults {
    pub max_block: usize,
    pub block_size: usize,
    pub perm_limit: usize,
    pub arity: u32,
    pub level: Option<u32>,
}

impl Default for StageDefaults {
    fn default() -> Self {
        StageDefaults {
            max_block: RefineOptions::default().max_block,
            block_size: SccBlockOptions::default().block_size,
            perm_limit: SccBlockOptions::default().perm_limit,
            arity: 4,
            level: None,
        }
    }
}

impl Stage {
    /// Parse a stage token: `greedy`, `refine`, `scc-blocks`,
    /// `scc-blocks@<offset>`, `flat`, `scc-global`.
    pub fn parse(token: &str, defaults: &StageDefaults) -> Result<Stage> {
        let token = token.trim();
        let (name, arg) = match token.split_once('@') {
            Some((n, a)) => (n, Some(a)),
            None => (token, None),
        };
        let stage = match name {
            "greedy" => Stage::Greedy,
            "refine" => Stage::Refine {
                max_block: defaults.max_block,
            },
            "scc-blocks" => {
                let offset = match arg {
                    Some(text) => text
                        .parse::<usize>()
                        .map_err(|_| Error::UnknownStage(token.to_string()))?,
                    None => 0,
                };
                Stage::SccBlocks {
                    block_size: defaults.block_size,
                    offset,
                    perm_limit: defaults.perm_limit,
                }
            }
            "flat" => Stage::Flat {
                arity: defaults.arity,
                level: defaults.level,
            },
            "scc-global" => Stage::SccGlobal {
                perm_limit: defaults.perm_limit,
            },
            _ => return Err(Error::UnknownStage(token.to_string())),
        };
        if arg.is_some() && !matches!(stage, Stage::SccBlocks { .. }) {
            return Err(Error::UnknownStage(token.to_string()));
        }
        Ok(stage)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Greedy => write!(f, "greedy"),
            Stage::Refine { .. } => write!(f, "refine"),
            Stage::SccBlocks { offset, .. } => write!(f, "scc-blocks@{offset}"),
            Stage::Flat { arity, .. } => write!(f, "flat(x={arity})"),
            Stage::SccGlobal { .. } => write!(f, "scc-global"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Run once, in order, before sweeping (default: the greedy seed).
    pub init_stages: Vec<Stage>,
    /// Repeated until a full sweep yields no improvement.
    pub sweep_stages: Vec<Stage>,
    /// Hard cap on sweeps; improvement-driven termination usually wins.
    pub max_sweeps: u64,
    pub time_budget: Option<Duration>,
    pub seed: u64,
    /// Best-so-far ranking file; `<path>.meta.json` and `<path>.history.csv`
    /// sit next to it.
    pub checkpoint_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let d = StageDefaults::default();
        PipelineConfig {
            init_stages: vec![Stage::Greedy],
            sweep_stages: vec![
                Stage::Refine {
                    max_block: d.max_block,
                },
                Stage::SccBlocks {
                    block_size: d.block_size,
                    offset: 0,
                    perm_limit: d.perm_limit,
                },
                Stage::SccBlocks {
                    block_size: d.block_size,
                    offset: d.block_size / 2,
                    perm_limit: d.perm_limit,
                },
                Stage::Flat {
                    arity: d.arity,
                    level: d.level,
                },
                Stage::SccGlobal {
                    perm_limit: d.perm_limit,
                },
            ],
            max_sweeps: u64::MAX,
            time_budget: None,
            seed: 0,
            checkpoint_path: None,
        }
    }
}

impl PipelineConfig {
    /// Hash of everything that shapes the computation (stages + seed).
    pub fn config_hash(&self) -> String {
        let payload = serde_json::json!({
            "init": self.init_stages,
            "sweep": self.sweep_stages,
            "seed": self.seed,
        });
        let mut hasher = Sha256::new();
        hasher.update(payload.to_string().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointMeta {
    forward_weight_raw: i64,
    scale_decimals: u32,
    config_hash: String,
    graph_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub sweep: u64,
    pub stage: String,
    pub forward_weight: Weight,
    pub improved: bool,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineReport {
    pub sweeps: u64,
    pub outcomes: Vec<StageOutcome>,
}

/// Run one stage on `current` and return the candidate ranking (ungated).
pub fn run_stage(graph: &Graph, current: &Ranking, stage: &Stage, seed: u64) -> Result<Ranking> {
    match stage {
        Stage::Greedy => Ok(greedy_rank(graph, seed)),
        Stage::Refine { max_block } => {
            let opts = RefineOptions {
                max_block: *max_block,
            };
            Ok(refine_ranking(graph, current, &opts)?.0)
        }
        Stage::SccBlocks {
            block_size,
            offset,
            perm_limit,
        } => {
            let opts = SccBlockOptions {
                block_size: *block_size,
                offset: *offset,
                perm_limit: *perm_limit,
            };
            Ok(refine_scc_blocks(graph, current, &opts)?.0)
        }
        Stage::Flat { arity, level } => {
            if graph.node_count() == 0 {
                return Ok(current.clone());
            }
            let cfg = PartitionConfig::whole_graph(graph.node_count(), *arity, *level)?;
            Ok(flat_partition_reorder(graph, current, &cfg)?.0)
        }
        Stage::SccGlobal { perm_limit } => scc_global_ranking(graph, current, *perm_limit),
    }
}

/// Run one stage and keep the candidate only when it strictly improves the
/// exact forward weight; otherwise the input ranking is returned unchanged.
pub fn apply_stage(graph: &Graph, current: &Ranking, stage: &Stage, seed: u64) -> Result<Ranking> {
    let candidate = run_stage(graph, current, stage, seed)?;
    let before = forward_weight(graph, current)?;
    let after = forward_weight(graph, &candidate)?;
    Ok(if after > before { candidate } else { current.clone() })
}

/// Execute the configured pipeline. Returns the best ranking, its metrics
/// report, and the per-stage log.
pub fn run_pipeline(
    graph: &Graph,
    config: &PipelineConfig,
) -> Result<(Ranking, MetricsReport, PipelineReport)> {
    let start = Instant::now();
    let checkpoint = config
        .checkpoint_path
        .as_deref()
        .map(|path| Checkpoint::open(path, graph, config))
        .transpose()?;

    let mut best = match &checkpoint {
        Some(cp) => cp
            .resumed
            .clone()
            .unwrap_or_else(|| Ranking::identity(graph.node_count())),
        None => Ranking::identity(graph.node_count()),
    };
    let mut best_fw = forward_weight(graph, &best)?;
    let mut report = PipelineReport::default();

    let out_of_budget = |elapsed: Duration| match config.time_budget {
        Some(budget) => elapsed >= budget,
        None => false,
    };

    let mut persist = |ranking: &Ranking, fw: Weight| -> Result<()> {
        if let Some(cp) = &checkpoint {
            cp.save(graph, config, ranking, fw)?;
        }
        Ok(())
    };

    // Seed checkpoint so a crash during the first stage leaves a valid file.
    persist(&best, best_fw)?;

    let mut run_list = |stages: &[Stage],
                        sweep: u64,
                        best: &mut Ranking,
                        best_fw: &mut Weight,
                        report: &mut PipelineReport|
     -> Result<bool> {
        let mut improved_any = false;
        for stage in stages {
            if out_of_budget(start.elapsed()) {
                break;
            }
            let candidate = run_stage(graph, best, stage, config.seed)?;
            let fw = forward_weight(graph, &candidate)?;
            let improved = fw > *best_fw;
            if improved {
                *best = candidate;
                *best_fw = fw;
                persist(best, fw)?;
                improved_any = true;
            }
            let outcome = StageOutcome {
                sweep,
                stage: stage.to_string(),
                forward_weight: *best_fw,
                improved,
            };
            if let Some(cp) = &checkpoint {
                cp.log(&outcome, graph)?;
            }
            report.outcomes.push(outcome);
        }
        Ok(improved_any)
    };

    run_list(&config.init_stages, 0, &mut best, &mut best_fw, &mut report)?;

    let mut sweep = 0;
    while sweep < config.max_sweeps && !out_of_budget(start.elapsed()) {
        sweep += 1;
        let improved = run_list(
            &config.sweep_stages,
            sweep,
            &mut best,
            &mut best_fw,
            &mut report,
        )?;
        report.sweeps = sweep;
        if !improved {
            break;
        }
    }

    let metrics = back_edge_report(graph, &best)?;
    Ok((best, metrics, report))
}

/// Best-so-far ranking on disk plus its sidecar metadata and history log.
struct Checkpoint {
    path: PathBuf,
    resumed: Option<Ranking>,
}

impl Checkpoint {
    fn meta_path(path: &Path) -> PathBuf {
        let mut os = path.as_os_str().to_owned();
        os.push(".meta.json");
        PathBuf::from(os)
    }

    fn history_path(path: &Path) -> PathBuf {
        let mut os = path.as_os_str().to_owned();
        os.push(".history.csv");
        PathBuf::from(os)
    }

    /// Load an existing checkpoint (validating it against the graph) or set
    /// up a fresh one.
    fn open(path: &Path, graph: &Graph, config: &PipelineConfig) -> Result<Checkpoint> {
        let meta_path = Self::meta_path(path);
        if !path.exists() {
            return Ok(Checkpoint {
                path: path.to_path_buf(),
                resumed: None,
            });
        }
        let meta_text = fs::read_to_string(&meta_path)
            .map_err(|e| Error::io(meta_path.clone(), e))?;
        let meta: CheckpointMeta = serde_json::from_str(&meta_text)
            .map_err(|e| Error::CheckpointMismatch(format!("unreadable sidecar: {e}")))?;
        if meta.graph_hash != graph.content_hash() {
            return Err(Error::CheckpointMismatch(
                "graph content hash differs from the one recorded in the sidecar".into(),
            ));
        }
        let _ = config;
        let file = fs::File::open(path).map_err(|e| Error::io(path.to_path_buf(), e))?;
        let ids = read_ranking_ids(file)?;
        let ranking = validate_ranking(graph, &ids)?;
        let fw = forward_weight(graph, &ranking)?;
        if fw.raw() != meta.forward_weight_raw {
            return Err(Error::CheckpointMismatch(format!(
                "sidecar records forward weight {} but the ranking scores {}",
                meta.forward_weight_raw,
                fw.raw()
            )));
        }
        Ok(Checkpoint {
            path: path.to_path_buf(),
            resumed: Some(ranking),
        })
    }

    /// Atomic write: temp file in the same directory, then rename.
    fn save(
        &self,
        graph: &Graph,
        config: &PipelineConfig,
        ranking: &Ranking,
        fw: Weight,
    ) -> Result<()> {
        let dir = self.path.parent().unwrap_or_else(|| Path::new("."));
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir.to_path_buf(), e))?;
        }
        let tmp = self.path.with_extension("tmp");
        {
            let mut file =
                fs::File::create(&tmp).map_err(|e| Error::io(tmp.clone(), e))?;
            write_ranking(graph, ranking, &mut file)?;
            file.flush().map_err(|e| Error::io(tmp.clone(), e))?;
        }
        fs::rename(&tmp, &self.path).map_err(|e| Error::io(self.path.clone(), e))?;

        let meta = CheckpointMeta {
            forward_weight_raw: fw.raw(),
            scale_decimals: graph.scale().decimals(),
            config_hash: config.config_hash(),
            graph_hash: graph.content_hash(),
        };
        let meta_path = Self::meta_path(&self.path);
        let tmp_meta = meta_path.with_extension("tmp");
        fs::write(
            &tmp_meta,
            serde_json::to_string_pretty(&meta).expect("meta serializes"),
        )
        .map_err(|e| Error::io(tmp_meta.clone(), e))?;
        fs::rename(&tmp_meta, &meta_path).map_err(|e| Error::io(meta_path, e))?;
        Ok(())
    }

    fn log(&self, outcome: &StageOutcome, graph: &Graph) -> Result<()> {
        let history = Self::history_path(&self.path);
        let fresh = !history.exists();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&history)
            .map_err(|e| Error::io(history.clone(), e))?;
        if fresh {
            writeln!(file, "sweep,stage,forward_weight_raw,forward_ratio,improved")
                .map_err(|e| Error::io(history.clone(), e))?;
        }
        let ratio = crate::metrics::ratio(outcome.forward_weight, graph.total_weight());
        writeln!(
            file,
            "{},{},{},{:.6},{}",
            outcome.sweep,
            outcome.stage,
            outcome.forward_weight.raw(),
            ratio,
            outcome.improved
        )
        .map_err(|e| Error::io(history, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{g3, g4, graph_from};

    #[test]
    fn stage_tokens_parse() {
        let d = StageDefaults::default();
        assert_eq!(Stage::parse("greedy", &d).unwrap(), Stage::Greedy);
        assert!(matches!(
            Stage::parse("refine", &d).unwrap(),
            Stage::Refine { max_block: 2000 }
        ));
        assert!(matches!(
            Stage::parse("scc-blocks@25", &d).unwrap(),
            Stage::SccBlocks { offset: 25, .. }
        ));
        assert!(matches!(
            Stage::parse("scc-global", &d).unwrap(),
            Stage::SccGlobal { perm_limit: 9 }
        ));
        assert!(Stage::parse("warp", &d).is_err());
        assert!(Stage::parse("flat@3", &d).is_err());
    }

    #[test]
    fn greedy_only_pipeline_on_g3() {
        let g = g3();
        let config = PipelineConfig {
            init_stages: vec![Stage::Greedy],
            sweep_stages: vec![],
            ..Default::default()
        };
        let (ranking, metrics, _) = run_pipeline(&g, &config).unwrap();
        assert_eq!(metrics.forward_weight.raw(), 15);
        assert!((metrics.forward_ratio - 15.0 / 18.0).abs() < 1e-9);
        let names: Vec<&str> = ranking.order().iter().map(|&n| g.external_id(n)).collect();
        assert_eq!(names, vec!["c", "a", "b"]);
    }

    #[test]
    fn scc_global_alone_solves_dags() {
        let g = graph_from(&[("b", "c", 1), ("a", "b", 2), ("d", "a", 3)]);
        let config = PipelineConfig {
            init_stages: vec![],
            sweep_stages: vec![Stage::SccGlobal { perm_limit: 9 }],
            ..Default::default()
        };
        let (_, metrics, _) = run_pipeline(&g, &config).unwrap();
        assert_eq!(metrics.forward_ratio, 1.0);
    }

    #[test]
    fn default_pipeline_is_monotone_over_greedy_alone() {
        let g = g4();
        let greedy_only = PipelineConfig {
            init_stages: vec![Stage::Greedy],
            sweep_stages: vec![],
            ..Default::default()
        };
        let (_, greedy_metrics, _) = run_pipeline(&g, &greedy_only).unwrap();
        let (_, full_metrics, _) = run_pipeline(&g, &PipelineConfig::default()).unwrap();
        assert!(full_metrics.forward_weight >= greedy_metrics.forward_weight);
        assert_eq!(full_metrics.forward_weight.raw(), 12);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let g = graph_from(&[
            ("a", "b", 3),
            ("b", "c", 1),
            ("c", "a", 2),
            ("c", "d", 5),
            ("d", "b", 4),
            ("d", "e", 1),
            ("e", "a", 6),
        ]);
        let config = PipelineConfig {
            seed: 11,
            ..Default::default()
        };
        let (r1, m1, _) = run_pipeline(&g, &config).unwrap();
        let (r2, m2, _) = run_pipeline(&g, &config).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1.forward_weight, m2.forward_weight);
    }

    #[test]
    fn checkpoint_round_trip_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("best.txt");
        let g = g3();
        let config = PipelineConfig {
            checkpoint_path: Some(path.clone()),
            ..Default::default()
        };
        let (_, metrics, _) = run_pipeline(&g, &config).unwrap();
        assert_eq!(metrics.forward_weight.raw(), 15);
        assert!(path.exists());
        assert!(Checkpoint::meta_path(&path).exists());
        assert!(Checkpoint::history_path(&path).exists());

        // Resume against the same graph succeeds and keeps the optimum.
        let (_, metrics2, _) = run_pipeline(&g, &config).unwrap();
        assert_eq!(metrics2.forward_weight.raw(), 15);

        // A different graph must be rejected.
        let other = g4();
        let err = run_pipeline(&other, &config).unwrap_err();
        assert!(matches!(err, Error::CheckpointMismatch(_)), "{err}");
    }

    #[test]
    fn checkpoint_best_fw_never_decreases_in_history() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.txt");
        let g = g4();
        let config = PipelineConfig {
            checkpoint_path: Some(path.clone()),
            ..Default::default()
        };
        run_pipeline(&g, &config).unwrap();
        let history = fs::read_to_string(Checkpoint::history_path(&path)).unwrap();
        let mut last = i64::MIN;
        for line in history.lines().skip(1) {
            let fw: i64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert!(fw >= last, "history must be non-decreasing: {history}");
            last = fw;
        }
    }

    #[test]
    fn apply_stage_gates_non_improving_candidates() {
        // Start from the optimum; a greedy stage cannot beat it and the
        // gate must keep the input.
        let g = g3();
        let best = crate::testutil::ranking_of(&g, &["c", "a", "b"]);
        let out = apply_stage(&g, &best, &Stage::Greedy, 0).unwrap();
        assert_eq!(out, best);
    }

    #[test]
    fn empty_graph_pipeline() {
        let g = graph_from(&[]);
        let (ranking, metrics, _) = run_pipeline(&g, &PipelineConfig::default()).unwrap();
        assert!(ranking.is_empty());
        assert_eq!(metrics.forward_ratio, 1.0);
    }
}
