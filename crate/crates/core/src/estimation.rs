//! System-parameter estimation from a single-ended fault record: source
//! impedance, loading angle, inception angle and a fault-resistance interval.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_mode_network_with, solve_network, LineParameters, LlgBranch, ModeSources, SourceImpedance,
};
use crate::error::{Error, Result, ResultExt, Stage};
use crate::fault::{CanonicalFault, FaultType, Mode};
use crate::records::WaveformRecord;
use crate::signals::{
    central_difference, detect_fault_initiation, extract_phasor, last_rising_zero_crossing,
    record_modes, rotate_phases, wrap_deg_180, Phasor,
};

/// Largest column-equilibrated condition number accepted by the
/// least-squares fit.
pub const MAX_CONDITION: f64 = 1e8;

/// Result of the two-parameter R-L fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceFit {
    pub r: f64,
    pub l: f64,
    /// Euclidean norm of the fit residual, in volts.
    pub residual_norm: f64,
    /// Residual norm divided by the norm of the voltage fault component.
    pub relative_residual: f64,
    /// Condition number of the column-equilibrated normal matrix.
    pub condition: f64,
    pub rows: usize,
}

impl ImpedanceFit {
    pub fn impedance(&self, omega: f64) -> Complex64 {
        Complex64::new(self.r, omega * self.l)
    }
}

/// Least-squares diagnostics for the source-impedance fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub aerial: ImpedanceFit,
    pub zero: Option<ImpedanceFit>,
}

/// Source phasors reconstructed from the pre-fault cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingEstimate {
    /// Remote minus local source angle, degrees in (-180, 180].
    pub loading_deg: f64,
    pub u1: Phasor,
    pub i1: Phasor,
    pub u_s1: Phasor,
    pub u_s2: Phasor,
}

/// Fault-resistance interval together with the evidence it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfRange {
    pub lower: f64,
    pub upper: f64,
    pub meas_peak: f64,
    pub bound_low: f64,
    pub bound_high: f64,
    /// Number of (l_f, R_f) cells inside the bounds.
    pub feasible_cells: usize,
}

/// Every estimated parameter of one fault record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub input_fault_type: FaultType,
    pub fault_type: CanonicalFault,
    /// Cyclic phase shift applied to reach the canonical fault.
    pub rotation_shift: usize,
    pub zs_aerial: Complex64,
    pub zs_zero: Option<Complex64>,
    /// Remote minus local source angle, degrees.
    pub loading_deg: f64,
    pub fia_deg: f64,
    pub rf_range: [f64; 2],
    pub t_f_index: usize,
    pub t_0_index: f64,
    pub meas_peak: f64,
    pub loading: LoadingEstimate,
    pub rf: RfRange,
    pub condition_report: ConditionReport,
}

impl ParameterEstimate {
    /// Estimated source impedance, reusing the aerial value for the zero
    /// mode when no zero-mode fit exists.
    pub fn source_impedance(&self, omega: f64) -> SourceImpedance {
        let zero = self.zs_zero.unwrap_or(self.zs_aerial);
        SourceImpedance::from_complex(self.zs_aerial, zero, omega)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Candidate grids for the fault-resistance search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfSearchGrid {
    pub rf_min: f64,
    pub rf_max: f64,
    pub rf_points: usize,
    pub lf_step_km: f64,
}

impl Default for RfSearchGrid {
    fn default() -> Self {
        RfSearchGrid {
            rf_min: 0.01,
            rf_max: 500.0,
            rf_points: 200,
            lf_step_km: 1.0,
        }
    }
}

impl RfSearchGrid {
    /// Log-spaced resistance values.
    pub fn rf_values(&self) -> Vec<f64> {
        let n = self.rf_points.max(2);
        let (a, b) = (self.rf_min.ln(), self.rf_max.ln());
        (0..n)
            .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// Locations strictly inside the line.
    pub fn lf_values(&self, length_km: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut x = self.lf_step_km;
        while x < length_km - 1e-9 {
            out.push(x);
            x += self.lf_step_km;
        }
        if out.is_empty() {
            out.push(length_km / 2.0);
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if !(self.rf_min > 0.0 && self.rf_max > self.rf_min && self.lf_step_km > 0.0) {
            return Err(Error::InvalidParameter(format!("bad search grid {self:?}")));
        }
        Ok(())
    }
}

/// Tunables of [`estimate_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    pub k_ff: f64,
    pub margin_c: f64,
    pub grid: RfSearchGrid,
    pub llg_branch: LlgBranch,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            k_ff: 1.5,
            margin_c: 0.05,
            grid: RfSearchGrid::default(),
            llg_branch: LlgBranch::Derived,
        }
    }
}

/// Fits `-du = R di + L di/dt` to the fault components of the mode voltage
/// and current over the half cycle starting at `t_f`. The fault component of
/// a signal is its difference with the sample one cycle earlier.
pub fn estimate_source_impedance(
    mode_v: &[f64],
    mode_i: &[f64],
    t_f: usize,
    samples_per_cycle: usize,
    dt: f64,
) -> Result<ImpedanceFit> {
    let n = samples_per_cycle;
    if mode_v.len() != mode_i.len() {
        return Err(Error::LengthMismatch("mode voltage and current".into()));
    }
    let before = n + n / 2;
    if t_f < before {
        return Err(Error::Window {
            side: "before",
            needed: before,
            available: t_f,
        });
    }
    let last = t_f + n / 2;
    if last + 2 > mode_v.len() {
        return Err(Error::Window {
            side: "after",
            needed: n / 2 + 2,
            available: mode_v.len().saturating_sub(t_f),
        });
    }
    // Fault components over [t_f - 1, last + 1] so the derivative is central
    // at every fitted sample.
    let lo = t_f - 1;
    let di: Vec<f64> = (lo..=last + 1).map(|k| mode_i[k] - mode_i[k - n]).collect();
    let ddi = central_difference(&di, dt)?;
    let rows: Vec<(f64, f64, f64)> = (t_f..=last)
        .map(|k| {
            let j = k - lo;
            (di[j], ddi[j], -(mode_v[k] - mode_v[k - n]))
        })
        .collect();
    solve_two_column(&rows)
}

fn solve_two_column(rows: &[(f64, f64, f64)]) -> Result<ImpedanceFit> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2, mut yy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in rows {
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
        yy += y * y;
    }
    if !(a11 > 0.0 && a22 > 0.0) {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    // Equilibrate the columns so the diagnostic reflects collinearity, not
    // the very different scales of i and di/dt.
    let (s1, s2) = (a11.sqrt(), a22.sqrt());
    let rho = a12 / (s1 * s2);
    let condition = if rho.abs() >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + rho.abs()) / (1.0 - rho.abs())
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let det = a11 * a22 - a12 * a12;
    let r = (a22 * b1 - a12 * b2) / det;
    let l = (a11 * b2 - a12 * b1) / det;
    if !(l > 0.0) || !r.is_finite() {
        return Err(Error::EstimationFailed(format!(
            "non-physical source impedance R={r:.4e} ohm, L={l:.4e} H"
        )));
    }
    let residual: f64 = rows
        .iter()
        .map(|&(x1, x2, y)| (y - r * x1 - l * x2).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ImpedanceFit {
        r,
        l,
        residual_norm: residual,
        relative_residual: if yy > 0.0 { residual / yy.sqrt() } else { 0.0 },
        condition,
        rows: rows.len(),
    })
}

/// Source phasors from the pre-fault cycle ending at `t_0`:
/// `Us1 = U1 + I1 Zs` and `Us2 = U1 - I1 (Zs + Zl)`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_loading(
    mode_v: &[f64],
    mode_i: &[f64],
    t_0: f64,
    samples_per_cycle: usize,
    zs: Complex64,
    z_line: Complex64,
    nominal_rms: f64,
) -> Result<LoadingEstimate> {
    let u1 = extract_phasor(mode_v, t_0, samples_per_cycle)?;
    let i1 = extract_phasor(mode_i, t_0, samples_per_cycle)?;
    if u1.magnitude < 0.01 * nominal_rms {
        return Err(Error::NoVoltage {
            magnitude: u1.magnitude,
            nominal: nominal_rms,
        });
    }
    let (u, i) = (u1.to_complex(), i1.to_complex());
    let us1 = u + i * zs;
    let us2 = u - i * (zs + z_line);
    let loading_deg = wrap_deg_180((us2.arg() - us1.arg()).to_degrees());
    Ok(LoadingEstimate {
        loading_deg,
        u1,
        i1,
        u_s1: Phasor::from_complex(us1),
        u_s2: Phasor::from_complex(us2),
    })
}

/// Inception angle from the detection index and the preceding rising zero
/// crossing, degrees in [0, 360).
pub fn estimate_fia(t_f: f64, t_0: f64, samples_per_cycle: f64) -> Result<f64> {
    let gap = t_f - t_0;
    if !(gap > 0.0 && gap <= samples_per_cycle) {
        return Err(Error::Ordering { t_f, t_0 });
    }
    Ok((360.0 * gap / samples_per_cycle).rem_euclid(360.0))
}

/// Largest `|x|` over the half cycle that starts at `t_f`.
pub fn measured_peak(mode_i: &[f64], t_f: usize, samples_per_cycle: usize) -> Result<f64> {
    let end = t_f + samples_per_cycle / 2;
    if end >= mode_i.len() {
        return Err(Error::Window {
            side: "after",
            needed: samples_per_cycle / 2 + 1,
            available: mode_i.len().saturating_sub(t_f),
        });
    }
    Ok(mode_i[t_f..=end].iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Inputs of the fault-resistance search that come from the record.
#[derive(Debug, Clone, Copy)]
pub struct RfSearchInput<'a> {
    pub meas_peak: f64,
    pub fault: CanonicalFault,
    pub line: &'a LineParameters,
    pub src: &'a SourceImpedance,
    /// RMS source phasors referenced to the fault instant.
    pub sources: ModeSources,
    /// Terminal current at the fault instant.
    pub i1_0: f64,
}

/// Resistances for which some location gives an analytic half-cycle peak
/// within `(1 -+ c)` of the measured one. The lower end is clamped to zero
/// when the smallest grid value qualifies.
pub fn estimate_rf_range(
    input: &RfSearchInput<'_>,
    margin_c: f64,
    grid: &RfSearchGrid,
    llg: LlgBranch,
) -> Result<RfRange> {
    grid.validate()?;
    if !(0.0..1.0).contains(&margin_c) {
        return Err(Error::InvalidParameter(format!("margin c={margin_c}")));
    }
    let rfs = grid.rf_values();
    let lfs = grid.lf_values(input.line.length_km);
    let lo = (1.0 - margin_c) * input.meas_peak;
    let hi = (1.0 + margin_c) * input.meas_peak;
    let cells: Vec<(usize, f64, f64)> = rfs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, &rf)| lfs.iter().map(move |&lf| (k, lf, rf)))
        .map(|(k, lf, rf)| -> Result<(usize, f64, f64)> {
            let net = build_mode_network_with(
                input.fault,
                lf,
                rf,
                input.line,
                input.src,
                input.src,
                llg,
            )?;
            let (_, i1) = solve_network(&net, &input.sources, input.i1_0)?;
            Ok((k, lf, i1.peak_half_cycle()))
        })
        .collect::<Result<_>>()?;
    let feasible: Vec<usize> = cells
        .iter()
        .filter(|(_, _, p)| *p >= lo && *p <= hi)
        .map(|(k, _, _)| *k)
        .collect();
    if feasible.is_empty() {
        let (k, lf, p) = cells
            .iter()
            .min_by(|a, b| {
                let da = (a.2 - input.meas_peak).abs();
                let db = (b.2 - input.meas_peak).abs();
                da.total_cmp(&db)
            })
            .copied()
            .unwrap_or((0, 0.0, f64::NAN));
        return Err(Error::RangeNotFound {
            lower: lo,
            upper: hi,
            nearest: p,
            nearest_rf: rfs[k],
            nearest_lf: lf,
        });
    }
    let kmin = *feasible.iter().min().unwrap_or(&0);
    let kmax = *feasible.iter().max().unwrap_or(&0);
    Ok(RfRange {
        lower: if kmin == 0 { 0.0 } else { rfs[kmin] },
        upper: rfs[kmax],
        meas_peak: input.meas_peak,
        bound_low: lo,
        bound_high: hi,
        feasible_cells: feasible.len(),
    })
}

/// Runs the whole estimation chain on a record.
pub fn estimate_all(
    record: &WaveformRecord,
    fault_type: FaultType,
    line: &LineParameters,
    cfg: &EstimationConfig,
) -> Result<ParameterEstimate> {
    record.validate().stage(Stage::Input)?;
    let spc_f = record.samples_per_cycle();
    let spc = spc_f.round() as usize;
    if (spc_f - spc as f64).abs() > 1e-6 || spc < 8 {
        return Err(Error::InvalidRecord(format!(
            "estimation needs an integer number of samples per cycle, got {spc_f}"
        ))
        .at(Stage::Input));
    }
    let dt = record.dt();
    let (rotated, fault, shift) = rotate_phases(record, fault_type);
    let (vm, im) = record_modes(&rotated).stage(Stage::Transform)?;
    let mode = fault.aerial_mode();

    let t_f =
        detect_fault_initiation(&im.as_array(), spc + 3, spc, cfg.k_ff).stage(Stage::Detection)?;
    let t_0 = last_rising_zero_crossing(vm.get(mode), t_f).stage(Stage::ZeroCrossing)?;

    let aerial = estimate_source_impedance(vm.get(mode), im.get(mode), t_f, spc, dt)
        .stage(Stage::SourceImpedance)?;
    let zero = if fault.involves_ground() {
        Some(
            estimate_source_impedance(vm.get(Mode::Zero), im.get(Mode::Zero), t_f, spc, dt)
                .stage(Stage::SourceImpedance)?,
        )
    } else {
        None
    };
    let omega = 2.0 * PI * record.base_frequency;
    let zs_aerial = aerial.impedance(omega);
    let zs_zero = zero.map(|z| z.impedance(omega));

    let nominal_rms = line.peak_phase_voltage() / 2f64.sqrt();
    let loading = estimate_loading(
        vm.get(mode),
        im.get(mode),
        t_0,
        spc,
        zs_aerial,
        line.z_total(mode),
        nominal_rms,
    )
    .stage(Stage::Loading)?;
    let fia_deg = estimate_fia(t_f as f64, t_0, spc_f).stage(Stage::InceptionAngle)?;

    let meas_peak = measured_peak(im.get(mode), t_f, spc).stage(Stage::FaultResistance)?;
    let advance = Complex64::from_polar(1.0, omega * (t_f as f64 - t_0) * dt);
    let sources = ModeSources {
        local: loading.u_s1.to_complex() * advance,
        remote: loading.u_s2.to_complex() * advance,
    };
    let i1_0 = (loading.i1.to_complex() * advance * 2f64.sqrt()).re;
    let src = SourceImpedance::from_complex(zs_aerial, zs_zero.unwrap_or(zs_aerial), omega);
    let rf = estimate_rf_range(
        &RfSearchInput {
            meas_peak,
            fault,
            line,
            src: &src,
            sources,
            i1_0,
        },
        cfg.margin_c,
        &cfg.grid,
        cfg.llg_branch,
    )
    .stage(Stage::FaultResistance)?;

    Ok(ParameterEstimate {
        input_fault_type: fault_type,
        fault_type: fault,
        rotation_shift: shift,
        zs_aerial,
        zs_zero,
        loading_deg: loading.loading_deg,
        fia_deg,
        rf_range: [rf.lower, rf.upper],
        t_f_index: t_f,
        t_0_index: t_0,
        meas_peak,
        loading,
        rf,
        condition_report: ConditionReport { aerial, zero },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fia_quarter_cycle() {
        assert!((estimate_fia(100.0, 80.0, 80.0).unwrap() - 90.0).abs() < 1e-12);
        assert!(estimate_fia(80.0, 100.0, 80.0).is_err());
    }

    #[test]
    fn pure_sinusoid_is_ill_conditioned() {
        // A single tone makes i and di/dt orthogonal, not collinear; a
        // constant makes the derivative column vanish.
        let rows: Vec<_> = (0..40).map(|_| (1.0, 0.0, 2.0)).collect();
        assert!(matches!(
            solve_two_column(&rows),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn rf_grid_is_log_spaced() {
        let g = RfSearchGrid::default();
        let v = g.rf_values();
        assert_eq!(v.len(), 200);
        assert!((v[0] - 0.01).abs() < 1e-12 && (v[199] - 500.0).abs() < 1e-9);
        assert_eq!(g.lf_values(200.0).len(), 199);
    }
}
