use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::{LineParameters, SourceImpedance};
use super::thevenin::{thevenin_parallel, TheveninBranch};
use crate::error::{Error, Result};
use crate::fault::{CanonicalFault, Mode};

/// Fault-branch resistance used for the double-line-to-ground network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlgBranch {
    /// `R4 = R_f`: the beta-mode fault conductance of a B-C-G fault is `Y_f`.
    #[default]
    Derived,
    /// `R4 = R_f / 2`, the value printed in the solution-coefficient table.
    Tabulated,
}

/// Single-mode equivalent of the faulted line.
///
/// `r2/l2` is the local source plus line up to the fault, `r3/l3` the
/// remote side, `r4/l4` the series element of the fault branch, and
/// `r1/l1` the reduced loop driving the fault current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeNetwork {
    pub fault: CanonicalFault,
    pub mode: Mode,
    pub r1: f64,
    pub l1: f64,
    pub r2: f64,
    pub l2: f64,
    pub r3: f64,
    pub l3: f64,
    pub r4: f64,
    pub l4: f64,
    pub r_eq: f64,
    pub l_eq: f64,
    /// Weight of the local source in the reduced source.
    pub weight_local: f64,
    /// Weight of the remote source in the reduced source.
    pub weight_remote: f64,
    pub omega: f64,
}

impl ModeNetwork {
    /// Reduced source phasor from the two terminal source phasors.
    pub fn u_seq(&self, local: Complex64, remote: Complex64) -> Complex64 {
        local * self.weight_local + remote * self.weight_remote
    }
}

/// Mode-domain source phasors (RMS) at the two terminals, referenced to the
/// fault instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSources {
    pub local: Complex64,
    pub remote: Complex64,
}

fn side_branches(
    line: &LineParameters,
    local: &SourceImpedance,
    remote: &SourceImpedance,
    mode: Mode,
    frac: f64,
) -> (TheveninBranch, TheveninBranch) {
    let rl = line.r_km(mode) * line.length_km;
    let ll = line.l_km(mode) * line.length_km;
    let zero = Complex64::new(0.0, 0.0);
    (
        TheveninBranch {
            r: local.r(mode) + frac * rl,
            l: local.l(mode) + frac * ll,
            source: zero,
        },
        TheveninBranch {
            r: remote.r(mode) + (1.0 - frac) * rl,
            l: remote.l(mode) + (1.0 - frac) * ll,
            source: zero,
        },
    )
}

/// Network with one source impedance shared by both terminals.
pub fn build_mode_network(
    fault: CanonicalFault,
    l_f: f64,
    r_f: f64,
    line: &LineParameters,
    src: &SourceImpedance,
) -> Result<ModeNetwork> {
    build_mode_network_with(fault, l_f, r_f, line, src, src, LlgBranch::default())
}

pub fn build_mode_network_with(
    fault: CanonicalFault,
    l_f: f64,
    r_f: f64,
    line: &LineParameters,
    local: &SourceImpedance,
    remote: &SourceImpedance,
    llg: LlgBranch,
) -> Result<ModeNetwork> {
    if !(l_f > 0.0 && l_f < line.length_km) {
        return Err(Error::InvalidParameter(format!(
            "fault location {l_f} km outside (0, {})",
            line.length_km
        )));
    }
    if !(r_f > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fault resistance must be positive, got {r_f}"
        )));
    }
    let frac = l_f / line.length_km;
    let mode = fault.aerial_mode();
    let (b1, b2) = side_branches(line, local, remote, mode, frac);
    let red = thevenin_parallel(&b1, &b2)?;

    let (r4, l4) = match fault {
        CanonicalFault::Slg => {
            let (z1, z2) = side_branches(line, local, remote, Mode::Zero, frac);
            let zero = thevenin_parallel(&z1, &z2)?.branch;
            (0.5 * zero.r + 1.5 * r_f, 0.5 * zero.l)
        }
        CanonicalFault::Ll => (0.5 * r_f, 0.0),
        CanonicalFault::Llg => match llg {
            LlgBranch::Derived => (r_f, 0.0),
            LlgBranch::Tabulated => (0.5 * r_f, 0.0),
        },
        CanonicalFault::ThreePhase => (r_f / 3.0, 0.0),
    };
    Ok(ModeNetwork {
        fault,
        mode,
        r1: red.branch.r + r4,
        l1: red.branch.l + l4,
        r2: b1.r,
        l2: b1.l,
        r3: b2.r,
        l3: b2.l,
        r4,
        l4,
        r_eq: red.branch.r,
        l_eq: red.branch.l,
        weight_local: red.weight_1,
        weight_remote: red.weight_2,
        omega: line.omega(),
    })
}
