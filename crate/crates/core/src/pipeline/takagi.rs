//! Single-ended reactance-type location with superimposed current.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::LineParameters;
use crate::error::{Error, Result, ResultExt, Stage};
use crate::fault::{CanonicalFault, FaultType, Mode};
use crate::records::{resample, WaveformRecord, SAMPLES_PER_CYCLE};
use crate::signals::{detect_fault_initiation, extract_phasor, record_modes, rotate_phases};

/// Denominators smaller than this fraction of `|z1 I dI|` are rejected.
const MIN_DENOMINATOR: f64 = 1e-9;

/// Loop used for a fault type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TakagiLoop {
    /// Faulted phase to ground with zero-sequence compensated current.
    PhaseGround,
    /// Between the two faulted phases (also used for three-phase faults).
    PhasePhase,
}

impl TakagiLoop {
    pub fn for_fault(f: CanonicalFault) -> Self {
        match f {
            CanonicalFault::Slg => TakagiLoop::PhaseGround,
            _ => TakagiLoop::PhasePhase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakagiEstimate {
    pub time_ms: f64,
    pub distance_km: f64,
    pub loop_kind: TakagiLoop,
}

/// Phasors of the three phases over the cycle ending at `end`.
fn phase_phasors(x: &[Vec<f64>; 3], end: f64) -> Result<[Complex64; 3]> {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (o, ch) in out.iter_mut().zip(x) {
        *o = extract_phasor(ch, end, SAMPLES_PER_CYCLE)?.to_complex();
    }
    Ok(out)
}

/// A record rotated, resampled and with its fault instant located, ready
/// for evaluation at any number of instants.
pub struct TakagiInput {
    rec: WaveformRecord,
    fault: CanonicalFault,
    t_f: usize,
}

impl TakagiInput {
    pub fn prepare(record: &WaveformRecord, fault_type: FaultType, k_ff: f64) -> Result<Self> {
        record.validate().stage(Stage::Input)?;
        let rec = resample(record, SAMPLES_PER_CYCLE).stage(Stage::Input)?;
        let (rec, fault, _) = rotate_phases(&rec, fault_type);
        let (_, im) = record_modes(&rec).stage(Stage::Transform)?;
        let spc = SAMPLES_PER_CYCLE;
        let t_f =
            detect_fault_initiation(&im.as_array(), spc + 3, spc, k_ff).stage(Stage::Detection)?;
        Ok(TakagiInput { rec, fault, t_f })
    }

    /// Latest evaluation time the record supports, in ms after the fault.
    pub fn max_time_ms(&self) -> f64 {
        (self.rec.len() - 1 - self.t_f) as f64 * self.rec.dt() * 1e3
    }

    pub fn fault_index(&self) -> usize {
        self.t_f
    }

    /// Distance from the phasors of the cycle ending `time_ms` after the
    /// fault instant.
    pub fn evaluate(&self, line: &LineParameters, time_ms: f64) -> Result<TakagiEstimate> {
        if !(time_ms >= 0.0) {
            return Err(
                Error::InvalidParameter(format!("evaluation time {time_ms} ms"))
                    .at(Stage::Baseline),
            );
        }
        let rot = &self.rec;
        let t_f = self.t_f;
        let dt = rot.dt();
        let end = t_f as f64 + time_ms * 1e-3 / dt;
        if end > (rot.len() - 1) as f64 + 1e-9 {
            return Err(Error::Window {
                side: "after",
                needed: (time_ms * 1e-3 / dt).ceil() as usize + 1,
                available: rot.len().saturating_sub(t_f),
            }
            .at(Stage::Baseline));
        }
        let end = end.min((rot.len() - 1) as f64);
        let pre_end = t_f as f64 - 1.0;
        let v = phase_phasors(&rot.v, end).stage(Stage::Baseline)?;
        let i = phase_phasors(&rot.i, end).stage(Stage::Baseline)?;
        // Pre-fault currents carried forward to the evaluation instant.
        let advance =
            Complex64::from_polar(1.0, 2.0 * PI * rot.base_frequency * (end - pre_end) * dt);
        let i_pre = phase_phasors(&rot.i, pre_end)
            .stage(Stage::Baseline)?
            .map(|p| p * advance);

        let w = line.omega();
        let z1 = Complex64::new(line.r_km(Mode::Alpha), w * line.l_km(Mode::Alpha));
        let z0 = Complex64::new(line.r_km(Mode::Zero), w * line.l_km(Mode::Zero));
        let kind = TakagiLoop::for_fault(self.fault);
        let (vl, il, dil) = match kind {
            TakagiLoop::PhaseGround => {
                let k0 = (z0 - z1) / (3.0 * z1);
                let i0 = (i[0] + i[1] + i[2]) / 3.0;
                (v[0], i[0] + k0 * 3.0 * i0, i[0] - i_pre[0])
            }
            TakagiLoop::PhasePhase => (
                v[1] - v[2],
                i[1] - i[2],
                (i[1] - i[2]) - (i_pre[1] - i_pre[2]),
            ),
        };
        let num = (vl * dil.conj()).im;
        let den_c = z1 * il * dil.conj();
        let den = den_c.im;
        if !(den.abs() > MIN_DENOMINATOR * den_c.norm().max(f64::MIN_POSITIVE)) {
            return Err(
                Error::Indeterminate(format!("Takagi denominator {den:.3e}")).at(Stage::Baseline),
            );
        }
        Ok(TakagiEstimate {
            time_ms,
            distance_km: num / den,
            loop_kind: kind,
        })
    }
}

/// Distance from the phasors of one cycle ending `time_ms` after the fault.
pub fn takagi_locate(
    record: &WaveformRecord,
    line: &LineParameters,
    fault_type: FaultType,
    time_ms: f64,
    k_ff: f64,
) -> Result<TakagiEstimate> {
    TakagiInput::prepare(record, fault_type, k_ff)?.evaluate(line, time_ms)
}
