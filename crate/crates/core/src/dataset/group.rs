//! Offline generation of a data group and its JSON manifest.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::{GridAxes, GridCell};
use super::shard::{read_shard, write_shard, ShardRecord, SHARD_SIZE};
use crate::circuit::{LineParameters, SourceImpedance};
use crate::emt::{simulate_event, EventSpec, RecorderFilter};
use crate::error::{Error, Result};
use crate::fault::CanonicalFault;
use crate::records::{extract_window, WINDOW_LEN};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
/// Largest tolerated fraction of failed simulations.
pub const MAX_QUARANTINE_FRACTION: f64 = 0.01;
/// Ordering of the flat spec index.
pub const SPEC_INDEX_ORDER: &str = "fault_type, source, loading, rf, lf, fia (fia fastest)";

/// Simulator settings shared by every event of a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub dt_sim: f64,
    pub pre_cycles: f64,
    pub post_cycles: f64,
    pub n_pi_sections: Option<usize>,
    pub recorder: RecorderFilter,
    #[serde(default = "default_damping")]
    pub damping: f64,
}

fn default_damping() -> f64 {
    EventSpec::DEFAULT_DAMPING
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            dt_sim: 20e-6,
            pre_cycles: 1.0,
            post_cycles: 0.5,
            n_pi_sections: None,
            recorder: RecorderFilter::default(),
            damping: default_damping(),
        }
    }
}

/// Everything that defines a data group before it is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub line: LineParameters,
    pub axes: GridAxes,
    pub fault_types: Vec<CanonicalFault>,
    #[serde(default)]
    pub simulation: SimulationSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardInfo {
    pub file: String,
    pub fault_type: CanonicalFault,
    /// First flat cell index covered by the shard.
    pub first_cell: usize,
    pub cells: usize,
    /// Records actually stored (cells minus quarantined).
    pub records: usize,
    pub sha256: String,
    pub quarantine: Vec<QuarantineEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarantineEntry {
    pub spec_index: u32,
    pub reason: String,
}

/// Description of a generated data group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataGroupManifest {
    pub format_version: u32,
    pub line: LineParameters,
    pub axes: GridAxes,
    pub fault_types: Vec<CanonicalFault>,
    pub simulation: SimulationSettings,
    pub spec_index_order: String,
    pub shards: Vec<ShardInfo>,
    pub record_count: u64,
    pub quarantined: u64,
    /// Divides voltage channels at load time (rated peak phase voltage).
    pub voltage_base: f64,
    /// Divides current channels at load time (99.5th percentile of |i|).
    pub current_base: f64,
}

impl DataGroupManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let m: DataGroupManifest = serde_json::from_str(&text)?;
        if m.format_version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "manifest version {} (expected {MANIFEST_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Events per fault type.
    pub fn cardinality(&self) -> u64 {
        self.axes.cardinality()
    }

    pub fn spec_index(&self, fault: CanonicalFault, cell: &GridCell) -> Option<u32> {
        let ord = self.fault_types.iter().position(|f| *f == fault)?;
        let flat = ord as u64 * self.cardinality() + self.axes.flat_index(cell) as u64;
        u32::try_from(flat).ok()
    }

    pub fn decode_spec_index(&self, index: u32) -> Result<(CanonicalFault, GridCell)> {
        decode(&self.axes, &self.fault_types, index)
    }

    /// Simulation spec that generated a stored record.
    pub fn event_spec(&self, index: u32) -> Result<EventSpec> {
        let (fault, cell) = self.decode_spec_index(index)?;
        Ok(event_spec(
            &self.line,
            &self.axes,
            &self.simulation,
            fault,
            &cell,
        ))
    }
}

fn decode(
    axes: &GridAxes,
    faults: &[CanonicalFault],
    index: u32,
) -> Result<(CanonicalFault, GridCell)> {
    let card = axes.cardinality();
    let ord = (index as u64).checked_div(card).unwrap_or(u64::MAX) as usize;
    let fault = *faults
        .get(ord)
        .ok_or_else(|| Error::OutOfBounds(format!("spec index {index}")))?;
    Ok((fault, axes.cell((index as u64 % card) as usize)))
}

fn event_spec(
    line: &LineParameters,
    axes: &GridAxes,
    sim: &SimulationSettings,
    fault: CanonicalFault,
    c: &GridCell,
) -> EventSpec {
    let (aerial, zero) = axes.sources[c.source as usize];
    let zs = SourceImpedance::from_complex(aerial, zero, line.omega());
    let mut spec = EventSpec::new(
        fault.fault_type(),
        axes.lf_km[c.lf as usize],
        axes.rf_ohm[c.rf as usize],
        axes.fia_deg[c.fia as usize],
        axes.loading_deg[c.loading as usize],
        zs,
        zs,
        line.clone(),
    );
    spec.dt_sim = sim.dt_sim;
    spec.pre_cycles = sim.pre_cycles;
    spec.post_cycles = sim.post_cycles;
    spec.n_pi_sections = sim.n_pi_sections;
    spec.recorder = sim.recorder;
    spec.damping = sim.damping;
    spec
}

/// Simulates one event and cuts its training window at the fault sample.
pub fn simulate_window(spec: &EventSpec) -> Result<ShardRecord> {
    let rec = simulate_event(spec)?;
    let k_f = rec.trigger_index.unwrap_or_else(|| spec.fault_sample());
    let w = extract_window(&rec, k_f)?;
    Ok(ShardRecord {
        features: w.data().iter().map(|&x| x as f32).collect(),
        label_km: spec.l_f as f32,
        spec_index: 0,
    })
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn shard_name(fault: CanonicalFault, k: usize) -> String {
    format!("{}-{k:05}.fldg", fault.fault_type().as_str().to_lowercase())
}

/// Reuses a finished shard when its sidecar checksum still matches.
fn existing_shard(dir: &Path, file: &str) -> Option<ShardInfo> {
    let sidecar = dir.join(format!("{file}.json"));
    let info: ShardInfo = serde_json::from_str(&fs::read_to_string(sidecar).ok()?).ok()?;
    let hash = sha256_file(&dir.join(file)).ok()?;
    (hash == info.sha256).then_some(info)
}

/// Log-binned histogram of |x| used for the current normalization base.
struct AbsHistogram {
    counts: Vec<u64>,
    zeros: u64,
}

const HIST_MIN_LOG: f64 = -3.0;
const HIST_DECADES: usize = 11;
const HIST_PER_DECADE: usize = 2000;

impl AbsHistogram {
    fn new() -> Self {
        AbsHistogram {
            counts: vec![0; HIST_DECADES * HIST_PER_DECADE],
            zeros: 0,
        }
    }

    fn add(&mut self, x: f64) {
        let a = x.abs();
        if !(a > 0.0) {
            self.zeros += 1;
            return;
        }
        let pos = ((a.log10() - HIST_MIN_LOG) * HIST_PER_DECADE as f64).floor();
        let k = pos.clamp(0.0, (self.counts.len() - 1) as f64) as usize;
        self.counts[k] += 1;
    }

    /// Upper edge of the bin holding the `q` quantile.
    fn quantile(&self, q: f64) -> Option<f64> {
        let total = self.zeros + self.counts.iter().sum::<u64>();
        if total == 0 {
            return None;
        }
        let target = (q * total as f64).ceil().max(1.0) as u64;
        let mut seen = self.zeros;
        if seen >= target {
            return Some(0.0);
        }
        for (k, c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= target {
                return Some(10f64.powf(HIST_MIN_LOG + (k + 1) as f64 / HIST_PER_DECADE as f64));
            }
        }
        None
    }
}

fn current_base(dir: &Path, shards: &[ShardInfo]) -> Result<f64> {
    let mut h = AbsHistogram::new();
    for s in shards {
        let recs = read_shard(BufReader::new(fs::File::open(dir.join(&s.file))?))?;
        for r in &recs {
            for row in r.features.chunks_exact(6) {
                for &x in &row[..3] {
                    h.add(x as f64);
                }
            }
        }
    }
    Ok(h.quantile(0.995).filter(|&b| b > 0.0).unwrap_or(1.0))
}

fn check_disk_space(dir: &Path, bytes: u64) -> Result<()> {
    if let Ok(free) = fs2::available_space(dir) {
        if free < bytes {
            return Err(Error::GroupGeneration(format!(
                "need about {bytes} bytes in {}, only {free} available",
                dir.display()
            )));
        }
    }
    Ok(())
}

/// Simulates every grid cell for every fault type into `out_dir`, skipping
/// shards already present with a matching checksum, and writes the manifest.
/// Failed simulations are quarantined; more than 1% of failures is an error
/// (the manifest is still written for inspection).
pub fn generate_group(cfg: &GroupConfig, out_dir: impl AsRef<Path>) -> Result<DataGroupManifest> {
    let dir: PathBuf = out_dir.as_ref().to_path_buf();
    cfg.line.validate()?;
    fs::create_dir_all(&dir)?;
    let card = cfg.axes.cardinality() as usize;
    let total = card as u64 * cfg.fault_types.len() as u64;
    if total > u32::MAX as u64 {
        return Err(Error::GroupGeneration(format!(
            "{total} events exceed the u32 spec index"
        )));
    }
    check_disk_space(&dir, total * (4 * WINDOW_LEN as u64 + 8))?;

    let mut shards = Vec::new();
    for (ord, &fault) in cfg.fault_types.iter().enumerate() {
        for (k, first) in (0..card).step_by(SHARD_SIZE).enumerate() {
            let cells = SHARD_SIZE.min(card - first);
            let file = shard_name(fault, k);
            if let Some(info) = existing_shard(&dir, &file) {
                if info.first_cell == first && info.cells == cells && info.fault_type == fault {
                    log::info!("reusing {file}");
                    shards.push(info);
                    continue;
                }
            }
            log::info!("generating {file} ({cells} events)");
            let results: Vec<std::result::Result<ShardRecord, QuarantineEntry>> = (first
                ..first + cells)
                .into_par_iter()
                .map(|flat| {
                    let cell = cfg.axes.cell(flat);
                    let spec_index = (ord * card + flat) as u32;
                    let spec = event_spec(&cfg.line, &cfg.axes, &cfg.simulation, fault, &cell);
                    simulate_window(&spec)
                        .map(|mut r| {
                            r.spec_index = spec_index;
                            r
                        })
                        .map_err(|e| QuarantineEntry {
                            spec_index,
                            reason: e.to_string(),
                        })
                })
                .collect();
            let mut records = Vec::with_capacity(cells);
            let mut quarantine = Vec::new();
            for r in results {
                match r {
                    Ok(rec) => records.push(rec),
                    Err(q) => {
                        log::warn!("quarantined spec {}: {}", q.spec_index, q.reason);
                        quarantine.push(q);
                    }
                }
            }
            let path = dir.join(&file);
            let tmp = dir.join(format!("{file}.tmp"));
            {
                let mut w = BufWriter::new(fs::File::create(&tmp)?);
                write_shard(&mut w, &records)?;
                std::io::Write::flush(&mut w)?;
            }
            fs::rename(&tmp, &path)?;
            let info = ShardInfo {
                file: file.clone(),
                fault_type: fault,
                first_cell: first,
                cells,
                records: records.len(),
                sha256: sha256_file(&path)?,
                quarantine,
            };
            fs::write(
                dir.join(format!("{file}.json")),
                serde_json::to_string(&info)?,
            )?;
            shards.push(info);
        }
    }

    let record_count: u64 = shards.iter().map(|s| s.records as u64).sum();
    let quarantined: u64 = shards.iter().map(|s| s.quarantine.len() as u64).sum();
    let manifest = DataGroupManifest {
        format_version: MANIFEST_VERSION,
        line: cfg.line.clone(),
        axes: cfg.axes.clone(),
        fault_types: cfg.fault_types.clone(),
        simulation: cfg.simulation.clone(),
        spec_index_order: SPEC_INDEX_ORDER.into(),
        record_count,
        quarantined,
        voltage_base: cfg.line.peak_phase_voltage(),
        current_base: current_base(&dir, &shards)?,
        shards,
    };
    manifest.save(dir.join(MANIFEST_FILE))?;
    if total > 0 && quarantined as f64 > MAX_QUARANTINE_FRACTION * total as f64 {
        return Err(Error::GroupGeneration(format!(
            "{quarantined} of {total} simulations failed"
        )));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_quantile() {
        let mut h = AbsHistogram::new();
        for k in 1..=1000 {
            h.add(k as f64);
        }
        let q = h.quantile(0.995).unwrap();
        assert!((q / 995.0 - 1.0).abs() < 2e-3, "{q}");
        assert!(AbsHistogram::new().quantile(0.5).is_none());
    }
}
