//! Simulated fault libraries ("data groups"): generation, shard storage and
//! selection of the subset matching an estimate.

mod grid;
mod group;
mod select;
mod shard;

use std::fs;
use std::io::BufReader;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use grid::{GridAxes, GridCell};
pub use group::{
    generate_group, simulate_window, DataGroupManifest, GroupConfig, QuarantineEntry, ShardInfo,
    SimulationSettings, MANIFEST_FILE, MANIFEST_VERSION, MAX_QUARANTINE_FRACTION, SPEC_INDEX_ORDER,
};
pub use select::{
    bracket, bracket_circular, cover_interval, select_axes, select_target, Selection,
    SelectionEcho, SelectionQuery,
};
pub use shard::{read_shard, write_shard, ShardRecord, SHARD_MAGIC, SHARD_SIZE, SHARD_VERSION};

use crate::emt::EventSpec;
use crate::error::{Error, Result};
use crate::records::{SampleMatrix, WINDOW_LEN};

/// Normalized feature rows with labels, ready for training.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    /// Row-major `len x 486` normalized features.
    pub features: Vec<f32>,
    pub labels_km: Vec<f32>,
    pub spec_index: Vec<u32>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.labels_km.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels_km.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f32] {
        &self.features[k * WINDOW_LEN..(k + 1) * WINDOW_LEN]
    }

    pub fn push(&mut self, features: &[f32], label_km: f32, spec_index: u32) {
        self.features.extend_from_slice(features);
        self.labels_km.push(label_km);
        self.spec_index.push(spec_index);
    }

    /// Rows at the given positions, in that order.
    pub fn subset(&self, idx: &[usize]) -> SampleSet {
        let mut out = SampleSet::default();
        for &k in idx {
            out.push(self.row(k), self.labels_km[k], self.spec_index[k]);
        }
        out
    }
}

/// A stored window with its label and the spec that generated it.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub sample: SampleMatrix,
    pub label_km: f64,
    pub spec: EventSpec,
}

/// Divides current columns by `current_base` and voltage columns by
/// `voltage_base`, in place.
pub fn normalize_features(x: &mut [f32], voltage_base: f64, current_base: f64) {
    let (vb, ib) = (voltage_base as f32, current_base as f32);
    for row in x.chunks_exact_mut(6) {
        for v in &mut row[..3] {
            *v /= ib;
        }
        for v in &mut row[3..] {
            *v /= vb;
        }
    }
}

/// Reads every stored record of the selection, normalized with the
/// manifest bases.
pub fn load_selection(
    dir: impl AsRef<Path>,
    manifest: &DataGroupManifest,
    selection: &Selection,
) -> Result<SampleSet> {
    let dir = dir.as_ref();
    let mut out = SampleSet::default();
    for shard in manifest
        .shards
        .iter()
        .filter(|s| s.fault_type == selection.fault_type)
    {
        let recs = read_shard(BufReader::new(fs::File::open(dir.join(&shard.file))?))?;
        for r in recs {
            let (_, cell) = manifest.decode_spec_index(r.spec_index)?;
            if selection.contains(&cell) {
                let mut x = r.features;
                normalize_features(&mut x, manifest.voltage_base, manifest.current_base);
                out.push(&x, r.label_km, r.spec_index);
            }
        }
    }
    Ok(out)
}

/// Raw (unnormalized) stored samples with their generating specs.
pub fn labeled_samples(
    dir: impl AsRef<Path>,
    manifest: &DataGroupManifest,
    shard: &ShardInfo,
) -> Result<Vec<LabeledSample>> {
    let recs = read_shard(BufReader::new(fs::File::open(
        dir.as_ref().join(&shard.file),
    )?))?;
    recs.into_iter()
        .map(|r| {
            let data = r.features.iter().map(|&x| x as f64).collect();
            Ok(LabeledSample {
                sample: SampleMatrix::from_rows(data, Some(r.label_km as f64))?,
                label_km: r.label_km as f64,
                spec: manifest.event_spec(r.spec_index)?,
            })
        })
        .collect()
}

/// Seeded shuffle of `0..n` split into `fraction` train and the rest
/// validation.
pub fn split_train_val(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 10 {
        return Err(Error::DatasetTooSmall(format!(
            "{n} samples, need at least 10"
        )));
    }
    let n_train = (fraction * n as f64).round() as usize;
    if !(fraction > 0.0 && fraction < 1.0) || n_train == 0 || n_train >= n {
        return Err(Error::InvalidParameter(format!(
            "split fraction {fraction} leaves an empty side for {n} samples"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let val = idx.split_off(n_train);
    Ok((idx, val))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_and_complete() {
        let (a, b) = split_train_val(100, 0.8, 7).unwrap();
        assert_eq!((a.len(), b.len()), (80, 20));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_train_val(100, 0.8, 7).unwrap(), (a, b));
        assert!(split_train_val(100, 1.0, 7).is_err());
        assert!(split_train_val(5, 0.8, 7).is_err());
    }
}
