//! Clarke transform, numeric differentiation, fault-instant detection,
//! zero crossings, full-cycle phasors and phase rotation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fault::{CanonicalFault, FaultType, Mode};
use crate::records::WaveformRecord;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Phase-to-mode matrix: `[alpha, beta, zero] = T_INV * [a, b, c]`.
pub const T_INV: [[f64; 3]; 3] = [
    [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0],
    [0.0, 1.0 / SQRT3, -1.0 / SQRT3],
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
];

/// Mode-to-phase matrix, the inverse of [`T_INV`].
pub const T: [[f64; 3]; 3] = [
    [1.0, 0.0, 1.0],
    [-0.5, SQRT3 / 2.0, 1.0],
    [-0.5, -SQRT3 / 2.0, 1.0],
];

/// Mode components of one three-phase quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWaveforms {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub zero: Vec<f64>,
    pub sample_rate: f64,
    pub base_frequency: f64,
}

impl ModeWaveforms {
    pub fn get(&self, mode: Mode) -> &[f64] {
        match mode {
            Mode::Alpha => &self.alpha,
            Mode::Beta => &self.beta,
            Mode::Zero => &self.zero,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn as_array(&self) -> [&[f64]; 3] {
        [&self.alpha, &self.beta, &self.zero]
    }
}

fn apply3(m: &[[f64; 3]; 3], x: [&[f64]; 3]) -> Result<[Vec<f64>; 3]> {
    let n = x[0].len();
    if x[1].len() != n || x[2].len() != n {
        return Err(Error::LengthMismatch(format!(
            "three-phase arrays have lengths {}, {}, {}",
            x[0].len(),
            x[1].len(),
            x[2].len()
        )));
    }
    let row = |r: usize| -> Vec<f64> {
        (0..n)
            .map(|k| m[r][0] * x[0][k] + m[r][1] * x[1][k] + m[r][2] * x[2][k])
            .collect()
    };
    Ok([row(0), row(1), row(2)])
}

/// Phase samples to `[alpha, beta, zero]`.
pub fn clarke_forward(a: &[f64], b: &[f64], c: &[f64]) -> Result<[Vec<f64>; 3]> {
    apply3(&T_INV, [a, b, c])
}

/// `[alpha, beta, zero]` back to phase samples.
pub fn clarke_inverse(alpha: &[f64], beta: &[f64], zero: &[f64]) -> Result<[Vec<f64>; 3]> {
    apply3(&T, [alpha, beta, zero])
}

/// Mode voltages and currents of a record.
pub fn record_modes(record: &WaveformRecord) -> Result<(ModeWaveforms, ModeWaveforms)> {
    let wrap = |[alpha, beta, zero]: [Vec<f64>; 3]| ModeWaveforms {
        alpha,
        beta,
        zero,
        sample_rate: record.sample_rate,
        base_frequency: record.base_frequency,
    };
    let v = clarke_forward(&record.v[0], &record.v[1], &record.v[2])?;
    let i = clarke_forward(&record.i[0], &record.i[1], &record.i[2])?;
    Ok((wrap(v), wrap(i)))
}

pub fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// `T_INV * m * T`: a phase-domain R or L matrix in mode coordinates.
pub fn clarke_matrix_transform(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    mat3_mul(&mat3_mul(&T_INV, m), &T)
}

/// `T * m * T_INV`: mode-domain matrix back to phase coordinates.
pub fn clarke_matrix_inverse(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    mat3_mul(&mat3_mul(&T, m), &T_INV)
}

/// Central difference in the interior, one-sided first differences at the ends.
pub fn central_difference(x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let mut y = Vec::with_capacity(n);
    y.push((x[1] - x[0]) / dt);
    for k in 1..n - 1 {
        y.push((x[k + 1] - x[k - 1]) / (2.0 * dt));
    }
    y.push((x[n - 1] - x[n - 2]) / dt);
    Ok(y)
}

/// Relative floor on the detection threshold, as a fraction of the largest
/// reference derivative over all modes. Keeps a mode that is quiet before
/// the fault (the zero mode of a balanced system) from firing on rounding noise.
const DETECTION_FLOOR: f64 = 1e-3;

/// First sample whose derivative magnitude exceeds `k_ff` times the largest
/// pre-fault derivative magnitude, scanning all supplied mode currents and
/// returning the earliest trigger.
///
/// The reference is the full cycle ending two samples before `prefault_end`;
/// the scan starts right after it. The first and last samples never trigger.
pub fn detect_fault_initiation(
    mode_currents: &[&[f64]],
    prefault_end: usize,
    samples_per_cycle: usize,
    k_ff: f64,
) -> Result<usize> {
    if mode_currents.is_empty() {
        return Err(Error::InvalidParameter("no mode currents supplied".into()));
    }
    if !(k_ff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_ff must be positive, got {k_ff}"
        )));
    }
    let n = mode_currents[0].len();
    if mode_currents.iter().any(|c| c.len() != n) {
        return Err(Error::LengthMismatch(
            "mode currents differ in length".into(),
        ));
    }
    let ref_end = prefault_end
        .checked_sub(2)
        .filter(|&e| e >= samples_per_cycle);
    let Some(ref_end) = ref_end else {
        return Err(Error::Window {
            side: "before",
            needed: samples_per_cycle + 2,
            available: prefault_end,
        });
    };
    let ref_start = ref_end - samples_per_cycle;
    let derivs: Vec<Vec<f64>> = mode_currents
        .iter()
        .map(|c| central_difference(c, 1.0))
        .collect::<Result<_>>()?;
    let refs: Vec<f64> = derivs
        .iter()
        .map(|d| {
            d[ref_start..ref_end]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .collect();
    let floor = DETECTION_FLOOR * refs.iter().cloned().fold(0.0, f64::max);
    let start = ref_end.max(1);
    let mut best: Option<usize> = None;
    for (d, &r) in derivs.iter().zip(&refs) {
        let thr = (k_ff * r).max(floor);
        if let Some(k) = (start..n.saturating_sub(1)).find(|&k| d[k].abs() > thr) {
            best = Some(best.map_or(k, |b: usize| b.min(k)));
        }
    }
    best.ok_or(Error::NoFaultDetected)
}

/// Largest fractional index below `before` where `u` crosses zero upwards,
/// linearly interpolated between the bracketing samples.
pub fn last_rising_zero_crossing(u: &[f64], before: usize) -> Result<f64> {
    let top = before.min(u.len());
    for k in (1..top).rev() {
        let (a, b) = (u[k - 1], u[k]);
        if a < 0.0 && b >= 0.0 {
            return Ok((k - 1) as f64 + (-a) / (b - a));
        }
    }
    Err(Error::NoZeroCrossing { before })
}

/// Fundamental phasor in RMS form.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Phasor {
    pub magnitude: f64,
    /// Radians in (-pi, pi].
    pub angle: f64,
}

impl Phasor {
    pub fn from_complex(z: Complex64) -> Self {
        let (magnitude, angle) = z.to_polar();
        Phasor {
            magnitude,
            angle: wrap_pi(angle),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.angle)
    }
}

/// Wraps an angle in radians to (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Wraps degrees to (-180, 180].
pub fn wrap_deg_180(a: f64) -> f64 {
    let mut w = a.rem_euclid(360.0);
    if w > 180.0 {
        w -= 360.0;
    }
    w
}

fn sample_at(x: &[f64], pos: f64) -> f64 {
    let lo = pos.floor();
    let frac = pos - lo;
    let lo = lo as usize;
    if frac == 0.0 || lo + 1 >= x.len() {
        x[lo]
    } else {
        x[lo] + (x[lo + 1] - x[lo]) * frac
    }
}

/// Full-cycle DFT phasor over the `samples_per_cycle` samples ending at
/// `end` (fractional positions are linearly interpolated). The angle is
/// referenced to the instant of the last sample, so `sqrt(2)*cos(w t)` with
/// `end` on a cycle boundary gives magnitude 1, angle 0.
pub fn extract_phasor(x: &[f64], end: f64, samples_per_cycle: usize) -> Result<Phasor> {
    let n = samples_per_cycle;
    let first = end - (n as f64 - 1.0);
    if !(first >= 0.0) || end > (x.len() as f64 - 1.0) || n < 2 {
        return Err(Error::OutOfBounds(format!(
            "phasor window [{first}, {end}] outside 0..{}",
            x.len()
        )));
    }
    let w = 2.0 * PI / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let pos = first + k as f64;
        let theta = w * (pos - end);
        acc += sample_at(x, pos) * Complex64::from_polar(1.0, -theta);
    }
    // sqrt(2)/N for a peak-to-RMS scaled single-sided DFT.
    Ok(Phasor::from_complex(acc * (2.0 * FRAC_1_SQRT_2 / n as f64)))
}

/// Cyclically relabels phases so the fault becomes one of AG, BC, BCG, ABC.
///
/// Canonical phase `p` takes the samples of original phase `(p + shift) % 3`;
/// the shift is returned alongside the rotated record.
pub fn rotate_phases(
    record: &WaveformRecord,
    fault_type: FaultType,
) -> (WaveformRecord, CanonicalFault, usize) {
    let k = fault_type.rotation_shift();
    let mut out = record.clone();
    for p in 0..3 {
        out.v[p] = record.v[(p + k) % 3].clone();
        out.i[p] = record.i[(p + k) % 3].clone();
    }
    (out, fault_type.canonical(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_identity() {
        let a = [1.0, 0.3, -2.0];
        let b = [0.5, -1.0, 7.0];
        let c = [-0.2, 4.0, 1e3];
        let m = clarke_forward(&a, &b, &c).unwrap();
        let back = clarke_inverse(&m[0], &m[1], &m[2]).unwrap();
        for k in 0..3 {
            assert!((back[0][k] - a[k]).abs() <= 1e-12 * a[k].abs().max(1.0));
            assert!((back[1][k] - b[k]).abs() <= 1e-12 * b[k].abs().max(1.0));
            assert!((back[2][k] - c[k]).abs() <= 1e-12 * c[k].abs().max(1.0));
        }
    }

    #[test]
    fn matrix_constants_are_inverse() {
        let p = mat3_mul(&T_INV, &T);
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((p[r][c] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_crossing_of_cosine() {
        let u: Vec<f64> = (0..200)
            .map(|k| (2.0 * PI * k as f64 / 80.0).cos())
            .collect();
        let t0 = last_rising_zero_crossing(&u, 150).unwrap();
        assert!((t0 - 140.0).abs() < 1e-3, "{t0}");
        assert!(last_rising_zero_crossing(&[1.0, 2.0, 3.0], 3).is_err());
    }

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_deg_180(190.0), -170.0);
        assert_eq!(wrap_deg_180(-180.0), 180.0);
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-12);
    }
}
