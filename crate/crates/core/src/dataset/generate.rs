//! Batch generation with a JSON-lines manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grids::Split;
use super::ranges::SceneRanges;
use super::sample::{build_sample, write_sample, SceneManifestRecord, TargetConfig};
use super::scene::{derive_seed, sample_scene};
use super::speech::SpeechSource;
use crate::acoustics::SimSettings;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone)]
pub struct DatasetOptions {
    pub n: usize,
    pub split: Split,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ranges: SceneRanges,
    pub target: TargetConfig,
    pub sim: SimSettings,
    pub speech: SpeechSource,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

/// Last manifest line when a run stops early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFooter {
    pub partial: bool,
    pub completed: usize,
    pub requested: usize,
    pub error: String,
}

fn one(opts: &DatasetOptions, index: usize) -> Result<SceneManifestRecord> {
    let seed = derive_seed(opts.seed, opts.split.name(), index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = sample_scene(&mut rng, opts.split, &opts.ranges, seed)?;
    let sample = build_sample(&scene, index, &opts.speech, &opts.target, &opts.sim, opts.ranges.duration_s)?;
    write_sample(&opts.out_dir, &sample)?;
    Ok(sample.record)
}

/// Renders `n` samples in parallel and writes the manifest in index order.
///
/// On failure the manifest keeps every record before the first failed index, followed by a
/// [`PartialFooter`] line, and the error is returned.
pub fn gen_dataset(opts: &DatasetOptions) -> Result<Vec<SceneManifestRecord>> {
    opts.ranges.validate()?;
    fs::create_dir_all(&opts.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let results: Vec<Result<SceneManifestRecord>> =
        pool.install(|| (0..opts.n).into_par_iter().map(|i| one(opts, i)).collect());

    let mut manifest = fs::File::create(opts.out_dir.join(MANIFEST_FILE))?;
    let mut records = Vec::with_capacity(opts.n);
    for r in results {
        match r {
            Ok(rec) => {
                writeln!(manifest, "{}", serde_json::to_string(&rec)?)?;
                records.push(rec);
            }
            Err(e) => {
                let footer = PartialFooter {
                    partial: true,
                    completed: records.len(),
                    requested: opts.n,
                    error: e.to_string(),
                };
                // best effort: the original error matters more than a failed footer write
                let _ = writeln!(manifest, "{}", serde_json::to_string(&footer)?);
                return Err(e);
            }
        }
    }
    Ok(records)
}

/// Reads a manifest, refusing one that ends in a partial-run footer.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<SceneManifestRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(f) = serde_json::from_str::<PartialFooter>(line) {
            return Err(Error::Dataset(format!(
                "{} is from an interrupted run ({} of {} samples): {}",
                path.display(),
                f.completed,
                f.requested,
                f.error
            )));
        }
        out.push(
            serde_json::from_str(line)
                .map_err(|e| Error::Dataset(format!("{} line {}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}
