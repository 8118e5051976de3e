//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use faultloc::circuit::{LineParameters, ModeNetwork, ModeSources, SourceImpedance};
use faultloc::emt::EventSpec;
use faultloc::presets;
use faultloc::records::WaveformRecord;
use faultloc::FaultType;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `sqrt(2) Re(U e^{jwt})` for an RMS phasor.
pub fn instantaneous(u: Complex64, omega: f64, t: f64) -> f64 {
    SQRT_2 * (u * Complex64::from_polar(1.0, omega * t)).re
}

/// Trapezoidal integration of `L i' + R i = u(t)` from `i(0) = i0` on a
/// uniform grid of `n + 1` points.
pub fn trapezoid_rl(
    r: f64,
    l: f64,
    u: impl Fn(f64) -> f64,
    i0: f64,
    dt: f64,
    n: usize,
) -> Vec<f64> {
    let a = l / dt + 0.5 * r;
    let b = l / dt - 0.5 * r;
    let mut out = Vec::with_capacity(n + 1);
    let mut i = i0;
    out.push(i);
    for k in 0..n {
        let t0 = k as f64 * dt;
        i = (b * i + 0.5 * (u(t0) + u(t0 + dt))) / a;
        out.push(i);
    }
    out
}

/// Fault and terminal currents of a mode network integrated numerically:
/// `L1 i_f' + R1 i_f = u_seq(t)` with `i_f(0) = 0`, then
/// `L2 i1' + R2 i1 = u_s1(t) - R4 i_f - L4 i_f'` with `i1(0) = i1_0`.
pub fn reduced_network_oracle(
    net: &ModeNetwork,
    sources: &ModeSources,
    i1_0: f64,
    dt: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let w = net.omega;
    let u_seq = net.u_seq(sources.local, sources.remote);
    let useq = |t: f64| instantaneous(u_seq, w, t);
    let i_f = trapezoid_rl(net.r1, net.l1, useq, 0.0, dt, n);
    let drive: Vec<f64> = (0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            let dif = (useq(t) - net.r1 * i_f[k]) / net.l1;
            instantaneous(sources.local, w, t) - net.r4 * i_f[k] - net.l4 * dif
        })
        .collect();
    let a = net.l2 / dt + 0.5 * net.r2;
    let b = net.l2 / dt - 0.5 * net.r2;
    let mut i1 = Vec::with_capacity(n + 1);
    let mut x = i1_0;
    i1.push(x);
    for k in 0..n {
        x = (b * x + 0.5 * (drive[k] + drive[k + 1])) / a;
        i1.push(x);
    }
    (i_f, i1)
}

/// Two-state mode network: local branch (R2, L2) and remote branch
/// (R3, L3) meeting at the fault node, which connects to ground through
/// (R4, L4). States are the two branch currents; trapezoidal rule.
/// Returns the local branch current and the fault current.
pub fn two_branch_network_oracle(
    net: &ModeNetwork,
    sources: &ModeSources,
    i1_0: f64,
    i2_0: f64,
    dt: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let w = net.omega;
    // L x' + R x = u, x = [i1, i2], fault current i1 + i2.
    let l = [[net.l2 + net.l4, net.l4], [net.l4, net.l3 + net.l4]];
    let r = [[net.r2 + net.r4, net.r4], [net.r4, net.r3 + net.r4]];
    let u = |t: f64| {
        [
            instantaneous(sources.local, w, t),
            instantaneous(sources.remote, w, t),
        ]
    };
    let mut a = [[0.0; 2]; 2];
    let mut b = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] = l[i][j] / dt + 0.5 * r[i][j];
            b[i][j] = l[i][j] / dt - 0.5 * r[i][j];
        }
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let mut x = [i1_0, i2_0];
    let mut i1 = vec![x[0]];
    let mut i_f = vec![x[0] + x[1]];
    for k in 0..n {
        let t0 = k as f64 * dt;
        let (u0, u1) = (u(t0), u(t0 + dt));
        let rhs = [
            b[0][0] * x[0] + b[0][1] * x[1] + 0.5 * (u0[0] + u1[0]),
            b[1][0] * x[0] + b[1][1] * x[1] + 0.5 * (u0[1] + u1[1]),
        ];
        x = [
            (a[1][1] * rhs[0] - a[0][1] * rhs[1]) / det,
            (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
        ];
        i1.push(x[0]);
        i_f.push(x[0] + x[1]);
    }
    (i1, i_f)
}

/// Mode network assembled directly from two side branches and a fault
/// branch, bypassing the line model.
pub fn network_from_branches(
    local: (f64, f64),
    remote: (f64, f64),
    fault_branch: (f64, f64),
    omega: f64,
) -> ModeNetwork {
    let (r2, l2) = local;
    let (r3, l3) = remote;
    let (r4, l4) = fault_branch;
    let r_eq = r2 * r3 / (r2 + r3);
    let l_eq = l2 * l3 / (l2 + l3);
    ModeNetwork {
        fault: faultloc::CanonicalFault::Slg,
        mode: faultloc::Mode::Alpha,
        r1: r_eq + r4,
        l1: l_eq + l4,
        r2,
        l2,
        r3,
        l3,
        r4,
        l4,
        r_eq,
        l_eq,
        weight_local: r3 / (r2 + r3),
        weight_remote: r2 / (r2 + r3),
        omega,
    }
}

/// Source phasors with the local source at `angle_deg` and the remote one
/// leading it by `loading_deg`, both at the rated phase RMS voltage.
pub fn mode_sources(line: &LineParameters, angle_deg: f64, loading_deg: f64) -> ModeSources {
    let v = line.voltage_kv * 1e3 / 3f64.sqrt();
    ModeSources {
        local: Complex64::from_polar(v, angle_deg.to_radians()),
        remote: Complex64::from_polar(v, (angle_deg + loading_deg).to_radians()),
    }
}

/// Pre-fault load current at `t = 0` flowing from the local source into the
/// line, ignoring line charging.
pub fn prefault_current(
    line: &LineParameters,
    mode: faultloc::Mode,
    local: &SourceImpedance,
    remote: &SourceImpedance,
    sources: &ModeSources,
) -> f64 {
    let w = line.omega();
    let z = local.z(mode, w) + line.z_total(mode) + remote.z(mode, w);
    instantaneous((sources.local - sources.remote) / z, w, 0.0)
}

/// The testing event of the simulation study at a given type, location and
/// resistance.
pub fn testing_spec(fault_type: FaultType, l_f: f64, r_f: f64) -> EventSpec {
    let (zl, zr) = presets::testing_sources();
    EventSpec::new(
        fault_type,
        l_f,
        r_f,
        presets::TESTING_FIA_DEG,
        presets::TESTING_LOADING_DEG,
        zl,
        zr,
        presets::simulation_line(),
    )
}

/// Three-phase record from closures of time, sampled at `rate`.
pub fn synthetic_record(
    rate: f64,
    n: usize,
    v: impl Fn(usize, f64) -> f64,
    i: impl Fn(usize, f64) -> f64,
) -> WaveformRecord {
    let t = |k: usize| k as f64 / rate;
    WaveformRecord {
        station_id: "synthetic".into(),
        base_frequency: 50.0,
        sample_rate: rate,
        v: [0, 1, 2].map(|p| (0..n).map(|k| v(p, t(k))).collect()),
        i: [0, 1, 2].map(|p| (0..n).map(|k| i(p, t(k))).collect()),
        trigger_index: None,
    }
}

/// Balanced positive-sequence set: phase p lags phase A by 120p degrees.
pub fn balanced(amplitude: f64, phase: f64, omega: f64) -> impl Fn(usize, f64) -> f64 {
    move |p, t| amplitude * (omega * t + phase - 2.0 * PI * p as f64 / 3.0).cos()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest channel deviation relative to that channel's peak.
pub fn record_deviation(a: &WaveformRecord, b: &WaveformRecord) -> f64 {
    a.channels()
        .iter()
        .zip(b.channels())
        .map(|(x, y)| max_abs_diff(x, y) / max_abs(x).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Deviation of the closed-form currents from the numerically integrated
/// network for one testing cell, with ODE residuals of the closed forms.
#[derive(Debug, Clone, Copy)]
pub struct CellComparison {
    /// `max |i_f - oracle| / max |oracle|`.
    pub fault_dev: f64,
    /// `max |i1 - oracle| / max |oracle|`.
    pub terminal_dev: f64,
    /// Largest relative residual of `i' + B i = forcing` for both currents.
    pub residual: f64,
}

pub const ORACLE_DT: f64 = 1e-6;

pub fn compare_cell(
    fault: faultloc::CanonicalFault,
    l_f: f64,
    r_f: f64,
) -> faultloc::Result<CellComparison> {
    use faultloc::circuit::{build_mode_network_with, solve_network, LlgBranch};
    let line = presets::simulation_line();
    let (zl, zr) = presets::testing_sources();
    let net = build_mode_network_with(fault, l_f, r_f, &line, &zl, &zr, LlgBranch::default())?;
    let sources = mode_sources(
        &line,
        presets::TESTING_FIA_DEG,
        presets::TESTING_LOADING_DEG,
    );
    let i1_0 = prefault_current(&line, net.mode, &zl, &zr, &sources);
    let (i_f, i1) = solve_network(&net, &sources, i1_0)?;
    let n = (1.0 / (line.frequency * ORACLE_DT)).round() as usize;
    let (of, o1) = reduced_network_oracle(&net, &sources, i1_0, ORACLE_DT, n);
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * ORACLE_DT).collect();
    let af = i_f.samples(&t);
    let a1 = i1.samples(&t);
    let mut residual = 0.0f64;
    let (mut sf, mut s1) = (0.0f64, 0.0f64);
    let (mut rf_max, mut r1_max) = (0.0f64, 0.0f64);
    for &tk in &t {
        let rf = i_f.derivative(tk) + i_f.b1 * i_f.eval(tk) - i_f.forcing(tk);
        let r1 = i1.derivative(tk) + i1.b3 * i1.eval(tk) - i1.forcing(tk);
        rf_max = rf_max.max(rf.abs());
        r1_max = r1_max.max(r1.abs());
        sf = sf.max(i_f.derivative(tk).abs()).max(i_f.forcing(tk).abs());
        s1 = s1.max(i1.derivative(tk).abs()).max(i1.forcing(tk).abs());
    }
    residual = residual.max(rf_max / sf).max(r1_max / s1);
    Ok(CellComparison {
        fault_dev: max_abs_diff(&af, &of) / max_abs(&of),
        terminal_dev: max_abs_diff(&a1, &o1) / max_abs(&o1),
        residual,
    })
}
