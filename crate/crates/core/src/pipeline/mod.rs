//! End-to-end location: estimate, select, train, predict, plus the
//! full-group and Takagi baselines.

mod report;
mod takagi;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use report::{freedman_diaconis, Histogram};
pub use takagi::{takagi_locate, TakagiEstimate, TakagiInput, TakagiLoop};

use crate::circuit::LineParameters;
use crate::dataset::{
    load_selection, normalize_features, select_target, DataGroupManifest, Selection, SelectionEcho,
    MANIFEST_FILE,
};
use crate::error::{Error, Result, ResultExt, Stage};
use crate::estimation::{estimate_all, EstimationConfig, ParameterEstimate};
use crate::fault::{CanonicalFault, FaultType};
use crate::mlp::{train_ensemble, Ensemble, MlpConfig, RepeatedLocation, Scaling};
use crate::records::{extract_window, resample, WaveformRecord, SAMPLES_PER_CYCLE};
use crate::signals::rotate_phases;

/// Settings of one location run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocateConfig {
    pub estimation: EstimationConfig,
    pub mlp: MlpConfig,
    pub reps: usize,
    pub compare_traditional: bool,
    /// Relative error applied to every line parameter before use.
    pub perturb: Option<f64>,
    /// Compute a Takagi estimate at every recorded post-fault sample.
    pub takagi_timeline: bool,
}

impl Default for LocateConfig {
    fn default() -> Self {
        LocateConfig {
            estimation: EstimationConfig::default(),
            mlp: MlpConfig::default(),
            reps: 10,
            compare_traditional: false,
            perturb: None,
            takagi_timeline: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TakagiPoint {
    pub time_ms: f64,
    pub distance_km: Option<f64>,
    pub error: Option<String>,
}

/// Everything one location run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultLocationReport {
    pub estimate: ParameterEstimate,
    pub selection: SelectionEcho,
    pub target_samples: usize,
    pub proposed: RepeatedLocation,
    pub traditional: Option<RepeatedLocation>,
    /// Why the traditional path produced nothing, when it failed.
    pub traditional_error: Option<String>,
    pub takagi_loop: Option<TakagiLoop>,
    pub takagi_timeline: Vec<TakagiPoint>,
    pub timings: Vec<StageTiming>,
    pub config: LocateConfig,
    pub line: LineParameters,
}

impl FaultLocationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Scales every per-km line parameter by `1 + fraction`.
pub fn perturb_line_parameters(line: &LineParameters, fraction: f64) -> Result<LineParameters> {
    line.perturbed(fraction)
}

/// Record at 80 samples per cycle, rotated to the canonical fault, and the
/// training-format window (normalized) centred on the detected fault.
pub fn prepare_query(
    record: &WaveformRecord,
    estimate: &ParameterEstimate,
    voltage_base: f64,
    current_base: f64,
) -> Result<Vec<f32>> {
    let rec = resample(record, SAMPLES_PER_CYCLE).stage(Stage::Input)?;
    let (rot, _, _) = rotate_phases(&rec, estimate.input_fault_type);
    let w = extract_window(&rot, estimate.t_f_index).stage(Stage::Input)?;
    let mut x: Vec<f32> = w.data().iter().map(|&v| v as f32).collect();
    normalize_features(&mut x, voltage_base, current_base);
    Ok(x)
}

/// Estimates parameters on a record resampled to 80 samples per cycle.
pub fn estimate_record(
    record: &WaveformRecord,
    fault_type: FaultType,
    line: &LineParameters,
    cfg: &EstimationConfig,
) -> Result<ParameterEstimate> {
    record.validate().stage(Stage::Input)?;
    let rec = resample(record, SAMPLES_PER_CYCLE).stage(Stage::Input)?;
    estimate_all(&rec, fault_type, line, cfg)
}

/// A data group opened for location, caching trained ensembles so events
/// that select the same target dataset share their models.
pub struct Locator {
    dir: PathBuf,
    manifest: DataGroupManifest,
    cfg: LocateConfig,
    targets: Mutex<HashMap<Selection, Arc<(Ensemble, usize)>>>,
    full: Mutex<HashMap<CanonicalFault, Arc<(Ensemble, usize)>>>,
}

impl Locator {
    /// Opens the group whose manifest is at `manifest_path` (or the
    /// directory containing `manifest.json`).
    pub fn open(manifest_path: impl AsRef<Path>, cfg: LocateConfig) -> Result<Self> {
        let p = manifest_path.as_ref();
        let (dir, file) = if p.is_dir() {
            (p.to_path_buf(), p.join(MANIFEST_FILE))
        } else {
            (
                p.parent()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from(".")),
                p.to_path_buf(),
            )
        };
        let manifest = DataGroupManifest::load(file).stage(Stage::Input)?;
        Ok(Locator {
            dir,
            manifest,
            cfg,
            targets: Mutex::new(HashMap::new()),
            full: Mutex::new(HashMap::new()),
        })
    }

    pub fn manifest(&self) -> &DataGroupManifest {
        &self.manifest
    }

    pub fn config(&self) -> &LocateConfig {
        &self.cfg
    }

    fn scaling(&self) -> Scaling {
        Scaling {
            line_length_km: self.manifest.line.length_km,
            voltage_base: self.manifest.voltage_base,
            current_base: self.manifest.current_base,
        }
    }

    fn ensemble_for(&self, selection: &Selection) -> Result<Arc<(Ensemble, usize)>> {
        if let Some(e) = self.targets.lock().expect("cache lock").get(selection) {
            return Ok(e.clone());
        }
        let data = load_selection(&self.dir, &self.manifest, selection).stage(Stage::Selection)?;
        if data.len() < 10 {
            return Err(Error::DatasetTooSmall(format!(
                "target dataset has {} samples",
                data.len()
            ))
            .at(Stage::Training));
        }
        let ens = train_ensemble(&data, &self.cfg.mlp, self.scaling(), self.cfg.reps)
            .stage(Stage::Training)?;
        let e = Arc::new((ens, data.len()));
        self.targets
            .lock()
            .expect("cache lock")
            .insert(selection.clone(), e.clone());
        Ok(e)
    }

    /// Ensemble trained on every event of one fault type.
    pub fn full_group_ensemble(&self, fault: CanonicalFault) -> Result<Arc<(Ensemble, usize)>> {
        if let Some(e) = self.full.lock().expect("cache lock").get(&fault) {
            return Ok(e.clone());
        }
        let sel = Selection::everything(&self.manifest.axes, fault);
        let data = load_selection(&self.dir, &self.manifest, &sel).stage(Stage::Baseline)?;
        if data.len() < 10 {
            return Err(
                Error::DatasetTooSmall(format!("full group has {} samples", data.len()))
                    .at(Stage::Baseline),
            );
        }
        let ens = train_ensemble(&data, &self.cfg.mlp, self.scaling(), self.cfg.reps)
            .stage(Stage::Baseline)?;
        let e = Arc::new((ens, data.len()));
        self.full
            .lock()
            .expect("cache lock")
            .insert(fault, e.clone());
        Ok(e)
    }

    /// Runs the whole method on one record.
    pub fn locate(
        &self,
        record: &WaveformRecord,
        fault_type: FaultType,
        line: &LineParameters,
    ) -> Result<FaultLocationReport> {
        let mut timings = Vec::new();
        let mut clock = Instant::now();
        let mut lap = |name: &str, timings: &mut Vec<StageTiming>| {
            timings.push(StageTiming {
                stage: name.into(),
                seconds: clock.elapsed().as_secs_f64(),
            });
            clock = Instant::now();
        };
        let line = match self.cfg.perturb {
            Some(f) => perturb_line_parameters(line, f).stage(Stage::Input)?,
            None => line.clone(),
        };
        let estimate = estimate_record(record, fault_type, &line, &self.cfg.estimation)?;
        lap("estimation", &mut timings);

        let selection = select_target(&self.manifest, &estimate).stage(Stage::Selection)?;
        let query = prepare_query(
            record,
            &estimate,
            self.manifest.voltage_base,
            self.manifest.current_base,
        )?;
        lap("selection", &mut timings);

        let target = self.ensemble_for(&selection)?;
        let proposed = target.0.locate(&query).stage(Stage::Training)?;
        lap("training", &mut timings);

        let (traditional, traditional_error) = if self.cfg.compare_traditional {
            match self
                .full_group_ensemble(estimate.fault_type)
                .and_then(|e| e.0.locate(&query).stage(Stage::Baseline))
            {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        lap("traditional", &mut timings);

        let mut takagi_loop = None;
        let mut takagi_timeline = Vec::new();
        if self.cfg.takagi_timeline {
            if let Ok(input) = TakagiInput::prepare(record, fault_type, self.cfg.estimation.k_ff) {
                takagi_loop = Some(TakagiLoop::for_fault(estimate.fault_type));
                let step = 1e3 / (record.base_frequency * SAMPLES_PER_CYCLE as f64);
                let n = (input.max_time_ms() / step + 1e-9).floor() as usize;
                for k in 0..=n {
                    let t = k as f64 * step;
                    let (distance_km, error) = match input.evaluate(&line, t) {
                        Ok(e) => (Some(e.distance_km), None),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    takagi_timeline.push(TakagiPoint {
                        time_ms: t,
                        distance_km,
                        error,
                    });
                }
            }
        }
        lap("takagi", &mut timings);

        Ok(FaultLocationReport {
            selection: selection.echo(&self.manifest.axes),
            target_samples: target.1,
            estimate,
            proposed,
            traditional,
            traditional_error,
            takagi_loop,
            takagi_timeline,
            timings,
            config: self.cfg.clone(),
            line,
        })
    }
}

/// One-shot location against the group at `manifest_path`.
pub fn locate(
    record: &WaveformRecord,
    fault_type: FaultType,
    line: &LineParameters,
    manifest_path: impl AsRef<Path>,
    cfg: LocateConfig,
) -> Result<FaultLocationReport> {
    Locator::open(manifest_path, cfg)?.locate(record, fault_type, line)
}
