//! Persistent, resumable stage runs.

use std::fs;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::store::{read_sealed, write_sealed, Layout};
use super::PipelineError;
use crate::witness::{ChunkResult, ConditionId, SearchPlan, StageResult, StageStats};

pub const DEFAULT_CHUNK_TARGET: usize = 64;

#[derive(Clone, Debug)]
pub struct StageOptions {
    /// Stop starting new chunks once this many search nodes were spent in
    /// the current invocation.
    pub node_budget: Option<u64>,
    pub chunk_target: usize,
    pub workers: usize,
    pub verbose: bool,
}

impl Default for StageOptions {
    fn default() -> Self {
        StageOptions {
            node_budget: None,
            chunk_target: DEFAULT_CHUNK_TARGET,
            workers: super::worker_count(),
            verbose: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageOutcome {
    Complete(StageResult),
    Suspended { completed: usize, total: usize },
}

#[derive(Serialize, Deserialize)]
struct ChunkFile {
    chunks: usize,
    result: ChunkResult,
}

/// Loads a finished stage file, if present.
pub fn load_stage(layout: &Layout, c: &ConditionId) -> Result<Option<StageResult>, PipelineError> {
    let path = layout.stage(&c.tag());
    match read_sealed(&path)? {
        None => Ok(None),
        Some(bytes) => {
            let text = String::from_utf8(bytes).map_err(|e| PipelineError::Json(e.to_string()))?;
            let r = StageResult::from_json(&text)?;
            if r.condition != *c {
                return Err(PipelineError::Integrity {
                    path: path.display().to_string(),
                    message: format!("holds stage {} instead", r.condition.tag()),
                });
            }
            Ok(Some(r))
        }
    }
}

fn chunk_path(layout: &Layout, c: &ConditionId, index: usize) -> std::path::PathBuf {
    layout.checkpoints(&c.tag()).join(format!("chunk-{index:05}.json"))
}

fn load_chunk(
    layout: &Layout,
    c: &ConditionId,
    index: usize,
    total: usize,
) -> Result<Option<ChunkResult>, PipelineError> {
    let path = chunk_path(layout, c, index);
    let Some(bytes) = read_sealed(&path)? else {
        return Ok(None);
    };
    let file: ChunkFile =
        serde_json::from_slice(&bytes).map_err(|e| PipelineError::Json(format!("{}: {e}", path.display())))?;
    if file.chunks != total || file.result.index != index {
        return Err(PipelineError::Integrity {
            path: path.display().to_string(),
            message: format!(
                "checkpoint for chunk {}/{} does not fit plan chunk {index}/{total}",
                file.result.index, file.chunks
            ),
        });
    }
    Ok(Some(file.result))
}

/// Runs (or resumes) the search for one class, checkpointing every chunk.
/// A completed stage is read back instead of being recomputed.
pub fn run_stage(layout: &Layout, c: &ConditionId, options: &StageOptions) -> Result<StageOutcome, PipelineError> {
    if let Some(done) = load_stage(layout, c)? {
        return Ok(StageOutcome::Complete(done));
    }
    let start = Instant::now();
    let mut plan = SearchPlan::for_condition(c)?;
    plan.set_chunk_target(options.chunk_target);
    let total = plan.chunk_count();
    let mut results: Vec<Option<ChunkResult>> = (0..total)
        .map(|i| load_chunk(layout, c, i, total))
        .collect::<Result<_, _>>()?;
    let pending: Vec<usize> = (0..total).filter(|&i| results[i].is_none()).collect();
    if options.verbose && pending.len() < total {
        eprintln!(
            "{}: resuming with {} of {total} chunks done",
            c.tag(),
            total - pending.len()
        );
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| PipelineError::Inconsistent(e.to_string()))?;
    let spent = AtomicU64::new(0);
    let batch = match options.node_budget {
        Some(_) => options.workers.max(1),
        None => pending.len().max(1),
    };
    for group in pending.chunks(batch) {
        if let Some(budget) = options.node_budget {
            if spent.load(Ordering::Relaxed) >= budget {
                break;
            }
        }
        let done: Vec<Result<ChunkResult, PipelineError>> = pool.install(|| {
            group
                .par_iter()
                .map(|&i| {
                    let r = plan.run_chunk(i);
                    let file = ChunkFile {
                        chunks: total,
                        result: r,
                    };
                    write_sealed(
                        &chunk_path(layout, c, i),
                        &serde_json::to_vec(&file).expect("serialisable"),
                    )?;
                    spent.fetch_add(file.result.stats.nodes, Ordering::Relaxed);
                    Ok(file.result)
                })
                .collect()
        });
        for r in done {
            let r = r?;
            let index = r.index;
            results[index] = Some(r);
        }
        if options.verbose && options.node_budget.is_some() {
            let n = results.iter().filter(|r| r.is_some()).count();
            eprintln!("{}: {n}/{total} chunks", c.tag());
        }
    }
    let completed = results.iter().filter(|r| r.is_some()).count();
    if completed < total {
        return Ok(StageOutcome::Suspended { completed, total });
    }
    let chunks: Vec<ChunkResult> = results.into_iter().flatten().collect();
    let (monoids, search) = plan.finish(&chunks)?;
    let result = StageResult {
        condition: *c,
        monoids,
        stats: StageStats {
            search,
            wall_ms: start.elapsed().as_millis() as u64,
        },
    };
    write_sealed(&layout.stage(&c.tag()), result.to_json().as_bytes())?;
    let dir = layout.checkpoints(&c.tag());
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    if options.verbose {
        eprintln!(
            "{}: {} monoids from {} candidates in {} ms",
            c.tag(),
            result.monoids.len(),
            search.candidates,
            result.stats.wall_ms
        );
    }
    Ok(StageOutcome::Complete(result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn options() -> StageOptions {
        StageOptions {
            workers: 1,
            ..StageOptions::default()
        }
    }

    #[test]
    fn completed_stage_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let layout = Layout::new(dir.path());
        let c = ConditionId::C(1);
        let StageOutcome::Complete(first) = run_stage(&layout, &c, &options()).unwrap() else {
            panic!("unbudgeted run suspended");
        };
        assert_eq!(first.stats.search.candidates, 4096);
        let bytes = fs::read(layout.stage("C1")).unwrap();
        let StageOutcome::Complete(again) = run_stage(&layout, &c, &options()).unwrap() else {
            panic!("stored stage not reused");
        };
        assert_eq!(again, first);
        assert_eq!(fs::read(layout.stage("C1")).unwrap(), bytes);
    }

    #[test]
    fn interrupted_run_resumes_to_same_result() {
        let dir = tempfile::tempdir().unwrap();
        let layout = Layout::new(dir.path());
        let c = ConditionId::D(2);
        let budgeted = StageOptions {
            node_budget: Some(1),
            ..options()
        };
        let mut rounds = 0;
        let resumed = loop {
            rounds += 1;
            match run_stage(&layout, &c, &budgeted).unwrap() {
                StageOutcome::Complete(r) => break r,
                StageOutcome::Suspended { completed, total } => assert!(completed < total),
            }
        };
        assert!(rounds > 2);
        let fresh = crate::witness::distinct_monoids(&c).unwrap();
        assert_eq!(resumed.monoids, fresh.monoids);
        assert_eq!(resumed.stats.search, fresh.stats.search);
    }

    #[test]
    fn tampered_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let layout = Layout::new(dir.path());
        let c = ConditionId::E(1);
        let budgeted = StageOptions {
            node_budget: Some(1),
            ..options()
        };
        assert!(matches!(
            run_stage(&layout, &c, &budgeted).unwrap(),
            StageOutcome::Suspended { .. }
        ));
        let path = chunk_path(&layout, &c, 0);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"leaves\":", "\"leaves\": ");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            run_stage(&layout, &c, &options()),
            Err(PipelineError::Integrity { .. })
        ));
    }
}
