//! Pair-parallel, cached scoring of a manifest.

use std::path::Path;

use advfid_core::{decode_image, Image, MetricId, MetricScore, Scorer};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{CachedScore, ScoreCache};
use crate::config::RunConfig;
use crate::manifest::{Manifest, StimulusPair};

/// A failure tied to one pair, and to one metric when `metric` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunError {
    pub stimulus_id: String,
    pub metric: Option<MetricId>,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ScoreRun {
    /// Sorted by stimulus id, then metric.
    pub scores: Vec<MetricScore>,
    pub errors: Vec<RunError>,
    pub cache_hits: usize,
    pub computed: usize,
}

struct Context<'a> {
    scorer: Scorer,
    metrics: &'a [MetricId],
    cache: Option<ScoreCache>,
    constants_hash: String,
}

/// Scores every enabled metric on every pair. Decode and metric failures are
/// collected, not propagated; only an unusable worker pool is an error.
pub fn score_manifest(manifest: &Manifest, config: &RunConfig) -> anyhow::Result<ScoreRun> {
    let ctx = Context {
        scorer: config.scorer(),
        metrics: &config.metrics,
        cache: config.cache.then(|| {
            ScoreCache::new(ScoreCache::resolve_root(
                config.cache_dir.as_deref(),
                &config.out_dir,
            ))
        }),
        constants_hash: config.constants_hash(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()?;
    let outcomes: Vec<ScoreRun> = pool.install(|| {
        manifest
            .pairs
            .par_iter()
            .map(|p| score_pair(p, &ctx))
            .collect()
    });

    let mut run = ScoreRun::default();
    for o in outcomes {
        run.scores.extend(o.scores);
        run.errors.extend(o.errors);
        run.cache_hits += o.cache_hits;
        run.computed += o.computed;
    }
    run.scores
        .sort_by(|a, b| (a.pair_id.as_str(), a.metric).cmp(&(b.pair_id.as_str(), b.metric)));
    run.errors.sort_by(|a, b| {
        (a.stimulus_id.as_str(), a.metric).cmp(&(b.stimulus_id.as_str(), b.metric))
    });
    Ok(run)
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn decode_pair(reference: &[u8], test: &[u8]) -> Result<(Image, Image), String> {
    let a = decode_image(reference).map_err(|e| format!("reference: {e}"))?;
    let b = decode_image(test).map_err(|e| format!("test: {e}"))?;
    if !a.same_shape(&b) {
        return Err(format!(
            "shape mismatch: reference {}x{}x{} vs test {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        ));
    }
    Ok((a, b))
}

fn score_pair(pair: &StimulusPair, ctx: &Context) -> ScoreRun {
    let mut out = ScoreRun::default();
    let pair_error = |message: String| RunError {
        stimulus_id: pair.stimulus_id.clone(),
        metric: None,
        message,
    };
    let bytes = read(&pair.ref_path).and_then(|r| read(&pair.test_path).map(|t| (r, t)));
    let (rb, tb) = match bytes {
        Ok(b) => b,
        Err(e) => {
            out.errors.push(pair_error(e));
            return out;
        }
    };
    let digest = ScoreCache::pair_digest(&rb, &tb);
    let mut images: Option<Result<(Image, Image), String>> = None;
    for &metric in ctx.metrics {
        let key = ScoreCache::key(&digest, metric, &ctx.constants_hash);
        if let Some(hit) = ctx.cache.as_ref().and_then(|c| c.get(&key)) {
            out.cache_hits += 1;
            out.scores.push(MetricScore {
                metric,
                value: hit.value,
                pair_id: pair.stimulus_id.clone(),
                note: hit.note,
            });
            continue;
        }
        let (a, b) = match images.get_or_insert_with(|| decode_pair(&rb, &tb)) {
            Ok(pair) => (&pair.0, &pair.1),
            Err(e) => {
                out.errors.push(pair_error(e.clone()));
                return out;
            }
        };
        match ctx.scorer.score(&pair.stimulus_id, metric, a, b) {
            Ok(score) => {
                out.computed += 1;
                if let Some(cache) = &ctx.cache {
                    let entry = CachedScore {
                        value: score.value,
                        note: score.note.clone(),
                    };
                    if let Err(e) = cache.put(&key, &entry) {
                        eprintln!(
                            "warning: cache write under {} failed: {e}",
                            cache.root().display()
                        );
                    }
                }
                out.scores.push(score);
            }
            Err(e) => out.errors.push(RunError {
                stimulus_id: pair.stimulus_id.clone(),
                metric: Some(metric),
                message: e.to_string(),
            }),
        }
    }
    out
}
