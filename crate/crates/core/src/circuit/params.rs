use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::Mode;

/// Per-km self/mutual parameters of a transposed three-phase line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParameters {
    pub r_self: f64,
    pub r_mutual: f64,
    pub l_self: f64,
    pub l_mutual: f64,
    pub c_self: f64,
    pub c_mutual: f64,
}

/// Per-km positive (aerial) and zero sequence parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceParameters {
    pub r1: f64,
    pub r0: f64,
    pub l1: f64,
    pub l0: f64,
    pub c1: f64,
    pub c0: f64,
}

impl PhaseParameters {
    pub fn to_sequence(&self) -> SequenceParameters {
        SequenceParameters {
            r1: self.r_self - self.r_mutual,
            r0: self.r_self + 2.0 * self.r_mutual,
            l1: self.l_self - self.l_mutual,
            l0: self.l_self + 2.0 * self.l_mutual,
            c1: self.c_self - self.c_mutual,
            c0: self.c_self + 2.0 * self.c_mutual,
        }
    }
}

impl SequenceParameters {
    pub fn to_phase(&self) -> PhaseParameters {
        PhaseParameters {
            r_self: (self.r0 + 2.0 * self.r1) / 3.0,
            r_mutual: (self.r0 - self.r1) / 3.0,
            l_self: (self.l0 + 2.0 * self.l1) / 3.0,
            l_mutual: (self.l0 - self.l1) / 3.0,
            c_self: (self.c0 + 2.0 * self.c1) / 3.0,
            c_mutual: (self.c0 - self.c1) / 3.0,
        }
    }
}

fn default_frequency() -> f64 {
    50.0
}

#[derive(Deserialize)]
struct LineFile {
    #[serde(default)]
    name: String,
    length_km: f64,
    voltage_kv: f64,
    #[serde(default = "default_frequency")]
    frequency: f64,
    phase: Option<PhaseParameters>,
    sequence: Option<SequenceParameters>,
}

/// Electrical description of one transmission line.
///
/// The phase-domain matrices are
/// `[[s, m, m], [m, s, m], [m, m, s]]` for each of R (ohm/km), L (H/km) and
/// the nodal capacitance C (F/km).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineParameters {
    pub name: String,
    pub length_km: f64,
    /// Rated line-to-line RMS voltage.
    pub voltage_kv: f64,
    pub frequency: f64,
    pub phase: PhaseParameters,
}

impl LineParameters {
    pub fn new(
        name: impl Into<String>,
        length_km: f64,
        voltage_kv: f64,
        frequency: f64,
        phase: PhaseParameters,
    ) -> Result<Self> {
        let line = LineParameters {
            name: name.into(),
            length_km,
            voltage_kv,
            frequency,
            phase,
        };
        line.validate()?;
        Ok(line)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.phase;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.length_km > 0.0) {
            return bad(format!(
                "line length must be positive, got {}",
                self.length_km
            ));
        }
        if !(self.voltage_kv > 0.0) {
            return bad(format!(
                "rated voltage must be positive, got {}",
                self.voltage_kv
            ));
        }
        if self.frequency != 50.0 && self.frequency != 60.0 {
            return bad(format!(
                "frequency must be 50 or 60 Hz, got {}",
                self.frequency
            ));
        }
        if !(p.r_self > p.r_mutual.abs()) {
            return bad("self resistance must exceed |mutual resistance|".into());
        }
        if !(p.l_self > p.l_mutual.abs() && p.l_mutual.abs() > 0.0) {
            return bad("self inductance must exceed |mutual inductance| > 0".into());
        }
        let s = p.to_sequence();
        if !(s.c1 > 0.0 && s.c0 > 0.0) {
            return bad("sequence capacitances must be positive".into());
        }
        Ok(())
    }

    /// Parses a line description. Either `[phase]` or `[sequence]` values
    /// may be given; when both are, they must agree within 1%.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: LineFile = toml::from_str(s)?;
        let phase = match (f.phase, f.sequence) {
            (Some(p), None) => p,
            (None, Some(q)) => q.to_phase(),
            (Some(p), Some(q)) => {
                let derived = p.to_sequence();
                let pairs = [
                    ("r1", derived.r1, q.r1),
                    ("r0", derived.r0, q.r0),
                    ("l1", derived.l1, q.l1),
                    ("l0", derived.l0, q.l0),
                    ("c1", derived.c1, q.c1),
                    ("c0", derived.c0, q.c0),
                ];
                for (name, d, given) in pairs {
                    if (d - given).abs() > 0.01 * given.abs() {
                        return Err(Error::InvalidParameter(format!(
                            "sequence value {name}={given} disagrees with the phase values ({d})"
                        )));
                    }
                }
                p
            }
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "line file needs [phase] or [sequence] parameters".into(),
                ))
            }
        };
        LineParameters::new(f.name, f.length_km, f.voltage_kv, f.frequency, phase)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn sequence(&self) -> SequenceParameters {
        self.phase.to_sequence()
    }

    /// Rated peak phase-to-ground voltage in volts.
    pub fn peak_phase_voltage(&self) -> f64 {
        self.voltage_kv * 1e3 * (2.0f64 / 3.0).sqrt()
    }

    /// Per-km mode resistance.
    pub fn r_km(&self, mode: Mode) -> f64 {
        let s = self.sequence();
        if mode == Mode::Zero {
            s.r0
        } else {
            s.r1
        }
    }

    pub fn l_km(&self, mode: Mode) -> f64 {
        let s = self.sequence();
        if mode == Mode::Zero {
            s.l0
        } else {
            s.l1
        }
    }

    pub fn c_km(&self, mode: Mode) -> f64 {
        let s = self.sequence();
        if mode == Mode::Zero {
            s.c0
        } else {
            s.c1
        }
    }

    /// Series impedance of the whole line in one mode.
    pub fn z_total(&self, mode: Mode) -> Complex64 {
        Complex64::new(self.r_km(mode), self.omega() * self.l_km(mode)) * self.length_km
    }

    fn matrix(s: f64, m: f64) -> [[f64; 3]; 3] {
        [[s, m, m], [m, s, m], [m, m, s]]
    }

    pub fn r_matrix_km(&self) -> [[f64; 3]; 3] {
        Self::matrix(self.phase.r_self, self.phase.r_mutual)
    }

    pub fn l_matrix_km(&self) -> [[f64; 3]; 3] {
        Self::matrix(self.phase.l_self, self.phase.l_mutual)
    }

    pub fn c_matrix_km(&self) -> [[f64; 3]; 3] {
        Self::matrix(self.phase.c_self, self.phase.c_mutual)
    }

    /// Every per-km parameter scaled by `1 + fraction`.
    pub fn perturbed(&self, fraction: f64) -> Result<Self> {
        if !(-0.5..=0.5).contains(&fraction) {
            return Err(Error::InvalidParameter(format!(
                "perturbation fraction must lie in [-0.5, 0.5], got {fraction}"
            )));
        }
        let k = 1.0 + fraction;
        let p = &self.phase;
        Ok(LineParameters {
            phase: PhaseParameters {
                r_self: p.r_self * k,
                r_mutual: p.r_mutual * k,
                l_self: p.l_self * k,
                l_mutual: p.l_mutual * k,
                c_self: p.c_self * k,
                c_mutual: p.c_mutual * k,
            },
            ..self.clone()
        })
    }
}

impl<'de> Deserialize<'de> for LineParameters {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = LineFile::deserialize(d)?;
        let phase = match (f.phase, f.sequence) {
            (Some(p), _) => p,
            (None, Some(q)) => q.to_phase(),
            (None, None) => return Err(serde::de::Error::custom("missing line parameters")),
        };
        Ok(LineParameters {
            name: f.name,
            length_km: f.length_km,
            voltage_kv: f.voltage_kv,
            frequency: f.frequency,
            phase,
        })
    }
}

/// Equivalent source impedance; alpha and beta share the aerial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceImpedance {
    pub r_aerial: f64,
    pub l_aerial: f64,
    pub r_zero: f64,
    pub l_zero: f64,
}

impl SourceImpedance {
    /// From complex impedances at angular frequency `omega`.
    pub fn from_complex(aerial: Complex64, zero: Complex64, omega: f64) -> Self {
        SourceImpedance {
            r_aerial: aerial.re,
            l_aerial: aerial.im / omega,
            r_zero: zero.re,
            l_zero: zero.im / omega,
        }
    }

    pub fn r(&self, mode: Mode) -> f64 {
        if mode == Mode::Zero {
            self.r_zero
        } else {
            self.r_aerial
        }
    }

    pub fn l(&self, mode: Mode) -> f64 {
        if mode == Mode::Zero {
            self.l_zero
        } else {
            self.l_aerial
        }
    }

    pub fn z(&self, mode: Mode, omega: f64) -> Complex64 {
        Complex64::new(self.r(mode), omega * self.l(mode))
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_aerial < 0.0
            || self.r_zero < 0.0
            || !(self.l_aerial > 0.0)
            || !(self.l_zero > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "source impedance needs R >= 0 and L > 0 in both modes: {self:?}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
name = "test"
length_km = 200.0
voltage_kv = 500.0
[phase]
r_self = 0.106
r_mutual = 0.091
l_self = 0.0016
l_mutual = 0.0008
c_self = 0.129e-7
c_mutual = -0.025e-7
"#;

    #[test]
    fn sequence_from_phase() {
        let line = LineParameters::from_toml_str(TOML).unwrap();
        let s = line.sequence();
        assert!((s.r1 - 0.015).abs() < 1e-12);
        assert!((s.r0 - 0.288).abs() < 1e-12);
        assert!((s.c1 - 0.154e-7).abs() < 1e-20);
        assert!((s.c0 - 0.079e-7).abs() < 1e-20);
        let back = s.to_phase();
        assert!((back.r_mutual - 0.091).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_sequence_rejected() {
        let t = format!("{TOML}\n[sequence]\nr1 = 0.015\nr0 = 0.35\nl1 = 0.0008\nl0 = 0.0032\nc1 = 0.154e-7\nc0 = 0.079e-7\n");
        assert!(LineParameters::from_toml_str(&t).is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let line = LineParameters::from_toml_str(TOML).unwrap();
        let back = LineParameters::from_toml_str(&line.to_toml_string().unwrap()).unwrap();
        assert_eq!(line, back);
    }

    #[test]
    fn perturb_zero_is_identity() {
        let line = LineParameters::from_toml_str(TOML).unwrap();
        assert_eq!(line.perturbed(0.0).unwrap(), line);
        assert!(line.perturbed(0.6).is_err());
    }
}
