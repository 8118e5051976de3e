//! Time-domain simulation of a two-source line with a shunt fault.
//!
//! The line is a cascade of coupled pi-sections on each side of the fault
//! node; sources are R-L branches behind ideal three-phase voltages. The
//! network is integrated with the trapezoidal rule in nodal form, starting
//! from its exact discrete periodic steady state, and the local terminal is
//! recorded at 80 samples per cycle.

mod network;
mod phasor;

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use phasor::{steady_state_phasor_solve, NodePhasors};

use crate::circuit::{LineParameters, SourceImpedance};
use crate::error::{Error, Result};
use crate::fault::{CanonicalFault, FaultType};
use crate::records::{WaveformRecord, SAMPLES_PER_CYCLE};
use crate::signals::T_INV;
use network::{Ladder, M3, V3};

fn default_dt() -> f64 {
    20e-6
}

fn default_pre() -> f64 {
    3.0
}

fn default_post() -> f64 {
    1.0
}

fn default_damping() -> f64 {
    EventSpec::DEFAULT_DAMPING
}

/// Everything needed to simulate one fault event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub fault_type: FaultType,
    /// Distance from the local terminal, km.
    pub l_f: f64,
    /// Fault resistance, ohm.
    pub r_f: f64,
    /// Inception angle of the faulted-mode local voltage, degrees.
    pub fia_deg: f64,
    /// Remote minus local source angle, degrees.
    pub loading_deg: f64,
    pub zs_local: SourceImpedance,
    pub zs_remote: SourceImpedance,
    pub line: LineParameters,
    /// Line-to-line RMS source voltage.
    pub voltage_kv: f64,
    /// Pi-sections on each side of the fault node.
    #[serde(default)]
    pub n_pi_sections: Option<usize>,
    /// Requested step; snapped down so a whole number of steps spans one
    /// output sample.
    #[serde(default = "default_dt")]
    pub dt_sim: f64,
    /// Cycles recorded before the fault instant.
    #[serde(default = "default_pre")]
    pub pre_cycles: f64,
    /// Cycles recorded after the fault instant.
    #[serde(default = "default_post")]
    pub post_cycles: f64,
    /// How the integration steps are reduced to recorder samples.
    #[serde(default)]
    pub recorder: RecorderFilter,
    /// Parallel damping resistance across every pi-section series element,
    /// as a multiple of the aerial surge impedance; zero disables it. The
    /// series values are adjusted so each section keeps its nominal
    /// impedance at rated frequency.
    #[serde(default = "default_damping")]
    pub damping: f64,
}

/// Reduction of the fine integration grid to the 80 samples/cycle record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecorderFilter {
    /// Instantaneous value at each sample instant.
    Point,
    /// Mean over the preceding sample interval (integrate and dump), which
    /// suppresses line-section ringing above the recorder Nyquist rate.
    #[default]
    Average,
}

impl EventSpec {
    /// Parallel damping multiple used unless a spec overrides it.
    pub const DEFAULT_DAMPING: f64 = 2.0;

    /// Spec with default numerics and the line's rated voltage.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fault_type: FaultType,
        l_f: f64,
        r_f: f64,
        fia_deg: f64,
        loading_deg: f64,
        zs_local: SourceImpedance,
        zs_remote: SourceImpedance,
        line: LineParameters,
    ) -> Self {
        let voltage_kv = line.voltage_kv;
        EventSpec {
            fault_type,
            l_f,
            r_f,
            fia_deg,
            loading_deg,
            zs_local,
            zs_remote,
            line,
            voltage_kv,
            n_pi_sections: None,
            dt_sim: default_dt(),
            pre_cycles: default_pre(),
            post_cycles: default_post(),
            recorder: RecorderFilter::default(),
            damping: default_damping(),
        }
    }

    pub fn sections_per_side(&self) -> usize {
        self.n_pi_sections
            .unwrap_or_else(|| 4.max((self.line.length_km / 25.0).ceil() as usize))
    }

    pub fn peak_phase_voltage(&self) -> f64 {
        self.voltage_kv * 1e3 * (2.0f64 / 3.0).sqrt()
    }

    /// Simulation steps per output sample.
    pub fn steps_per_sample(&self) -> usize {
        let ts = 1.0 / (self.line.frequency * SAMPLES_PER_CYCLE as f64);
        ((ts / self.dt_sim) - 1e-9).ceil().max(1.0) as usize
    }

    /// Actual integration step.
    pub fn effective_dt(&self) -> f64 {
        1.0 / (self.line.frequency * SAMPLES_PER_CYCLE as f64 * self.steps_per_sample() as f64)
    }

    /// Output sample index of the fault instant.
    pub fn fault_sample(&self) -> usize {
        (self.pre_cycles * SAMPLES_PER_CYCLE as f64).round() as usize
    }

    pub fn post_samples(&self) -> usize {
        (self.post_cycles * SAMPLES_PER_CYCLE as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.line.validate()?;
        self.zs_local.validate()?;
        self.zs_remote.validate()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.l_f > 0.0 && self.l_f < self.line.length_km) {
            return bad(format!(
                "fault location {} outside (0, {})",
                self.l_f, self.line.length_km
            ));
        }
        if !(self.r_f > 0.0) {
            return bad(format!(
                "fault resistance must be positive, got {}",
                self.r_f
            ));
        }
        if self.sections_per_side() < 2 {
            return bad("at least two pi-sections per side are required".into());
        }
        if !(self.dt_sim > 0.0 && self.dt_sim <= 50e-6) {
            return bad(format!(
                "simulation step must lie in (0, 50 us], got {}",
                self.dt_sim
            ));
        }
        if self.fault_sample() < 1 || !(self.post_cycles >= 0.0) {
            return bad("record must start before the fault and not end before it".into());
        }
        if !(self.voltage_kv > 0.0) {
            return bad(format!(
                "source voltage must be positive, got {}",
                self.voltage_kv
            ));
        }
        Ok(())
    }

    fn summary(&self) -> String {
        format!(
            "{} l_f={} km R_f={} ohm FIA={} deg loading={} deg",
            self.fault_type, self.l_f, self.r_f, self.fia_deg, self.loading_deg
        )
    }
}

/// Phase-domain conductance of the fault branch.
pub(crate) fn fault_conductance(fault_type: FaultType, r_f: f64) -> M3 {
    let g = 1.0 / r_f;
    let mut c = [[0.0; 3]; 3];
    let ground = |p: usize, c: &mut [[f64; 3]; 3]| c[p][p] += g;
    let between = |p: usize, q: usize, c: &mut [[f64; 3]; 3]| {
        c[p][p] += g;
        c[q][q] += g;
        c[p][q] -= g;
        c[q][p] -= g;
    };
    match fault_type.canonical() {
        CanonicalFault::Slg => ground(0, &mut c),
        CanonicalFault::Ll => between(1, 2, &mut c),
        CanonicalFault::Llg => {
            ground(1, &mut c);
            ground(2, &mut c);
        }
        CanonicalFault::ThreePhase => {
            between(0, 1, &mut c);
            between(1, 2, &mut c);
            between(2, 0, &mut c);
        }
    }
    let k = fault_type.rotation_shift();
    let mut out = M3::zeros();
    for p in 0..3 {
        for q in 0..3 {
            out[((p + k) % 3, (q + k) % 3)] = c[p][q];
        }
    }
    out
}

/// Companion-model coefficients and factorized nodal matrix for one step
/// rule (trapezoidal or backward Euler) and one switch state.
struct Companion {
    trapezoidal: bool,
    g_series: Vec<M3>,
    k_series: Vec<M3>,
    g_src: [M3; 2],
    k_src: [M3; 2],
    g_cap: Vec<M3>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn invert(m: M3, what: &str) -> Result<M3> {
    m.try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} companion matrix")))
}

impl Companion {
    fn new(ladder: &Ladder, h: f64, trapezoidal: bool, fault: Option<&M3>) -> Result<Self> {
        let rl = |r: &M3, l: &M3| -> Result<(M3, M3)> {
            if trapezoidal {
                let a_inv = invert(r * 0.5 + l / h, "series")?;
                Ok((a_inv * 0.5, a_inv * (l / h - r * 0.5)))
            } else {
                let g = invert(r + l / h, "series")?;
                Ok((g, g * (l / h)))
            }
        };
        let mut g_series = Vec::with_capacity(ladder.series.len());
        let mut k_series = Vec::with_capacity(ladder.series.len());
        for s in &ladder.series {
            let (g, k) = rl(&s.r, &s.l)?;
            g_series.push(g);
            k_series.push(k);
        }
        let (g0, k0) = rl(&ladder.sources[0].r, &ladder.sources[0].l)?;
        let (g1, k1) = rl(&ladder.sources[1].r, &ladder.sources[1].l)?;
        let cap_scale = if trapezoidal { 2.0 / h } else { 1.0 / h };
        let g_cap: Vec<M3> = ladder.shunt.iter().map(|c| c * cap_scale).collect();

        let n = 3 * ladder.nodes;
        let mut y = DMatrix::<f64>::zeros(n, n);
        let mut add = |a: usize, b: usize, m: &M3, sign: f64| {
            for i in 0..3 {
                for j in 0..3 {
                    y[(3 * a + i, 3 * b + j)] += sign * m[(i, j)];
                }
            }
        };
        for (s, g) in ladder.series.iter().zip(&g_series) {
            let g = g + M3::identity() * s.g_par;
            add(s.a, s.a, &g, 1.0);
            add(s.b, s.b, &g, 1.0);
            add(s.a, s.b, &g, -1.0);
            add(s.b, s.a, &g, -1.0);
        }
        for (k, g) in g_cap.iter().enumerate() {
            add(k, k, g, 1.0);
        }
        add(ladder.sources[0].node, ladder.sources[0].node, &g0, 1.0);
        add(ladder.sources[1].node, ladder.sources[1].node, &g1, 1.0);
        if let Some(gf) = fault {
            add(ladder.fault_node, ladder.fault_node, gf, 1.0);
        }
        Ok(Companion {
            trapezoidal,
            g_series,
            k_series,
            g_src: [g0, g1],
            k_src: [k0, k1],
            g_cap,
            lu: y.lu(),
        })
    }
}

/// Dynamic state: node voltages and every inductive/capacitive current.
struct State {
    t: f64,
    v: Vec<V3>,
    i_series: Vec<V3>,
    i_src: [V3; 2],
    i_cap: Vec<V3>,
    emf: [V3; 2],
}

fn re3(p: &[Complex64; 3], rot: Complex64) -> V3 {
    V3::new((p[0] * rot).re, (p[1] * rot).re, (p[2] * rot).re)
}

impl State {
    fn advance(
        &mut self,
        ladder: &Ladder,
        comp: &Companion,
        h: f64,
        rhs: &mut DVector<f64>,
    ) -> Result<()> {
        let t_next = self.t + h;
        rhs.fill(0.0);
        let mut hist_series = Vec::with_capacity(ladder.series.len());
        for (k, s) in ladder.series.iter().enumerate() {
            let mut hist = comp.k_series[k] * self.i_series[k];
            if comp.trapezoidal {
                hist += comp.g_series[k] * (self.v[s.a] - self.v[s.b]);
            }
            for i in 0..3 {
                rhs[3 * s.a + i] -= hist[i];
                rhs[3 * s.b + i] += hist[i];
            }
            hist_series.push(hist);
        }
        let mut hist_src = [V3::zeros(); 2];
        let mut emf_next = [V3::zeros(); 2];
        for (k, src) in ladder.sources.iter().enumerate() {
            let e = src.emf(ladder.omega, t_next);
            let mut hist = comp.k_src[k] * self.i_src[k];
            if comp.trapezoidal {
                hist += comp.g_src[k] * (self.emf[k] - self.v[src.node]);
            }
            let inj = comp.g_src[k] * e + hist;
            for i in 0..3 {
                rhs[3 * src.node + i] += inj[i];
            }
            hist_src[k] = hist;
            emf_next[k] = e;
        }
        for (k, g) in comp.g_cap.iter().enumerate() {
            let mut inj = g * self.v[k];
            if comp.trapezoidal {
                inj += self.i_cap[k];
            }
            for i in 0..3 {
                rhs[3 * k + i] += inj[i];
            }
        }
        if !comp.lu.solve_mut(rhs) {
            return Err(Error::Singular("nodal matrix".into()));
        }
        let v_next: Vec<V3> = (0..ladder.nodes)
            .map(|k| V3::new(rhs[3 * k], rhs[3 * k + 1], rhs[3 * k + 2]))
            .collect();
        for (k, s) in ladder.series.iter().enumerate() {
            self.i_series[k] = comp.g_series[k] * (v_next[s.a] - v_next[s.b]) + hist_series[k];
        }
        for (k, src) in ladder.sources.iter().enumerate() {
            self.i_src[k] = comp.g_src[k] * (emf_next[k] - v_next[src.node]) + hist_src[k];
        }
        for (k, g) in comp.g_cap.iter().enumerate() {
            let dv = g * (v_next[k] - self.v[k]);
            self.i_cap[k] = if comp.trapezoidal {
                dv - self.i_cap[k]
            } else {
                dv
            };
        }
        self.v = v_next;
        self.emf = emf_next;
        self.t = t_next;
        Ok(())
    }
}

/// Simulates one event and returns the local-terminal record. The fault
/// strikes exactly at output sample `spec.fault_sample()`, which is stored
/// as the record's trigger index.
pub fn simulate_event(spec: &EventSpec) -> Result<WaveformRecord> {
    spec.validate()?;
    let fail = |reason: String| Error::SimulationFailed {
        reason,
        spec: spec.summary(),
    };
    let sps = spec.steps_per_sample();
    let dt = spec.effective_dt();
    let omega = spec.line.omega();
    let k_f = spec.fault_sample();
    let n_out = k_f + spec.post_samples() + 1;
    // Averaged samples need one extra interval of history before sample 0.
    let lead = match spec.recorder {
        RecorderFilter::Point => 0,
        RecorderFilter::Average => sps,
    };
    let s_f = k_f * sps + lead;
    let t_fault = s_f as f64 * dt;

    let half = spec.loading_deg.to_radians() / 2.0;
    let base = Ladder::build(spec, -half, half);
    // Trapezoidal integration of a sinusoid at w behaves as an exact phasor
    // solution at this warped frequency.
    let warped = 2.0 / dt * (omega * dt / 2.0).tan();
    let ss = phasor::solve_ladder(&base, warped)?;

    // Rotate every source so the faulted-mode local voltage sits at
    // -90 deg + FIA (a rising zero crossing FIA degrees earlier) at t_fault.
    let k = spec.fault_type.rotation_shift();
    let mode = spec.fault_type.canonical().aerial_mode().index();
    let bus = ss.voltages[0];
    let vj: Complex64 = (0..3).map(|p| bus[(p + k) % 3] * T_INV[mode][p]).sum();
    let delta = -FRAC_PI_2 + spec.fia_deg.to_radians() - vj.arg() - omega * t_fault;
    let rot = Complex64::from_polar(1.0, delta);

    let mut ladder = base;
    ladder.sources[0].angle += delta;
    ladder.sources[1].angle += delta;

    let mut state = State {
        t: 0.0,
        v: ss.voltages.iter().map(|p| re3(p, rot)).collect(),
        i_series: ss.series_currents.iter().map(|p| re3(p, rot)).collect(),
        i_src: [
            re3(&ss.source_currents[0], rot),
            re3(&ss.source_currents[1], rot),
        ],
        i_cap: ladder
            .shunt
            .iter()
            .zip(&ss.voltages)
            .map(|(c, v)| {
                let jwcv = [
                    Complex64::new(0.0, warped) * v[0],
                    Complex64::new(0.0, warped) * v[1],
                    Complex64::new(0.0, warped) * v[2],
                ];
                let cv = c.map(|x| Complex64::new(x, 0.0));
                let mut out = [Complex64::new(0.0, 0.0); 3];
                for (i, o) in out.iter_mut().enumerate() {
                    for (j, val) in jwcv.iter().enumerate() {
                        *o += cv[(i, j)] * val;
                    }
                }
                re3(&out, rot)
            })
            .collect(),
        emf: [V3::zeros(); 2],
    };
    state.emf = [
        ladder.sources[0].emf(omega, 0.0),
        ladder.sources[1].emf(omega, 0.0),
    ];

    let gf = fault_conductance(spec.fault_type, spec.r_f);
    let pre = Companion::new(&ladder, dt, true, None)?;
    let damp = Companion::new(&ladder, dt / 2.0, false, Some(&gf))?;
    let post = Companion::new(&ladder, dt, true, Some(&gf))?;

    let mut v_out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n_out));
    let mut i_out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n_out));
    let terminal = |s: &State| -> [f64; 6] {
        let (v, i) = (s.v[0], s.i_src[0]);
        [v[0], v[1], v[2], i[0], i[1], i[2]]
    };
    let push = |x: [f64; 6], v_out: &mut [Vec<f64>; 3], i_out: &mut [Vec<f64>; 3]| {
        for p in 0..3 {
            v_out[p].push(x[p]);
            i_out[p].push(x[p + 3]);
        }
    };
    if lead == 0 {
        push(terminal(&state), &mut v_out, &mut i_out);
    }
    let mut prev = terminal(&state);
    let mut acc = [0.0; 6];

    let limit = 100.0 * spec.peak_phase_voltage();
    let mut rhs = DVector::<f64>::zeros(3 * ladder.nodes);
    let total = (n_out - 1) * sps + lead;
    for s in 0..total {
        let step_start = s as f64 * dt;
        if s < s_f {
            state.advance(&ladder, &pre, dt, &mut rhs)?;
        } else if s == s_f {
            // Two backward-Euler half steps damp the numerical oscillation
            // the trapezoidal rule would sustain after the switch closes.
            state.advance(&ladder, &damp, dt / 2.0, &mut rhs)?;
            state.advance(&ladder, &damp, dt / 2.0, &mut rhs)?;
        } else {
            state.advance(&ladder, &post, dt, &mut rhs)?;
        }
        state.t = step_start + dt;
        let now = terminal(&state);
        for c in 0..6 {
            acc[c] += 0.5 * (prev[c] + now[c]);
        }
        prev = now;
        if (s + 1) % sps == 0 {
            if state
                .v
                .iter()
                .any(|v| v.iter().any(|x| !x.is_finite() || x.abs() > limit))
            {
                return Err(fail(format!(
                    "node voltage diverged at t = {:.6} s",
                    state.t
                )));
            }
            let sample = match spec.recorder {
                RecorderFilter::Point => now,
                RecorderFilter::Average => acc.map(|a| a / sps as f64),
            };
            push(sample, &mut v_out, &mut i_out);
            acc = [0.0; 6];
        }
    }

    Ok(WaveformRecord {
        station_id: "simulated".into(),
        base_frequency: spec.line.frequency,
        sample_rate: spec.line.frequency * SAMPLES_PER_CYCLE as f64,
        v: v_out,
        i: i_out,
        trigger_index: Some(k_f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::clarke_matrix_transform;

    #[test]
    fn fault_stamps_match_mode_matrices() {
        let rf = 2.0;
        let y = 1.0 / rf;
        let to_arr = |m: M3| -> [[f64; 3]; 3] {
            std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
        };
        let ag = clarke_matrix_transform(&to_arr(fault_conductance(FaultType::AG, rf)));
        let want = [
            [2.0 / 3.0 * y, 0.0, 2.0 / 3.0 * y],
            [0.0, 0.0, 0.0],
            [y / 3.0, 0.0, y / 3.0],
        ];
        let bc = clarke_matrix_transform(&to_arr(fault_conductance(FaultType::BC, rf)));
        let bcg = clarke_matrix_transform(&to_arr(fault_conductance(FaultType::BCG, rf)));
        let abc = clarke_matrix_transform(&to_arr(fault_conductance(FaultType::ABC, rf)));
        for i in 0..3 {
            for j in 0..3 {
                assert!((ag[i][j] - want[i][j]).abs() < 1e-12);
            }
        }
        assert!((bc[1][1] - 2.0 * y).abs() < 1e-12);
        assert!((bcg[1][1] - y).abs() < 1e-12);
        assert!((bcg[0][2] + 2.0 / 3.0 * y).abs() < 1e-12);
        assert!((abc[0][0] - 3.0 * y).abs() < 1e-12 && abc[2][2].abs() < 1e-12);
    }

    #[test]
    fn rotated_stamp_targets_faulted_phase() {
        let g = fault_conductance(FaultType::CG, 1.0);
        assert_eq!(g[(2, 2)], 1.0);
        assert_eq!(g[(0, 0)], 0.0);
    }
}
