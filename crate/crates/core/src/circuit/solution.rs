//! Closed-form fault and terminal currents of the single-mode network.
//!
//! Phasors are RMS; a phasor `U` stands for `sqrt(2)|U| cos(w t + arg U)`
//! with `t = 0` at fault initiation.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use num_complex::Complex64;

use super::network::{build_mode_network, ModeNetwork, ModeSources};
use super::params::{LineParameters, SourceImpedance};
use crate::error::{Error, Result};
use crate::fault::CanonicalFault;

/// Steady response `M_sol cos(w t + phi_sol)` of `y' + b y = M cos(w t + phi)`.
fn first_order_steady(b: f64, m_step: f64, phi_step: f64, omega: f64) -> (f64, f64) {
    let den = b * b + omega * omega;
    let a = b * m_step / den;
    let bb = omega * m_step / den;
    let (phi_a, phi_b) = (phi_step, phi_step - FRAC_PI_2);
    let m_sol = (a * a + bb * bb + 2.0 * a * bb * (phi_a - phi_b).cos()).sqrt();
    let phi_sol = (a * phi_a.sin() + bb * phi_b.sin()).atan2(a * phi_a.cos() + bb * phi_b.cos());
    (m_sol, phi_sol)
}

/// Fault current of the reduced loop, zero at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultCurrent {
    pub b1: f64,
    pub m_step: f64,
    pub phi_step: f64,
    pub m_sol: f64,
    pub phi_sol: f64,
    pub omega: f64,
}

impl FaultCurrent {
    pub fn eval(&self, t: f64) -> f64 {
        -self.m_sol * self.phi_sol.cos() * (-self.b1 * t).exp()
            + self.m_sol * (self.omega * t + self.phi_sol).cos()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.b1 * self.m_sol * self.phi_sol.cos() * (-self.b1 * t).exp()
            - self.omega * self.m_sol * (self.omega * t + self.phi_sol).sin()
    }

    /// Right-hand side of `i' + B1 i = B2(t)`.
    pub fn forcing(&self, t: f64) -> f64 {
        self.m_step * (self.omega * t + self.phi_step).cos()
    }

    /// Sinusoidal part as an RMS phasor.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.m_sol / SQRT_2, self.phi_sol)
    }

    pub fn samples(&self, t: &[f64]) -> Vec<f64> {
        t.iter().map(|&t| self.eval(t)).collect()
    }
}

pub fn solve_fault_current(net: &ModeNetwork, u_seq: Complex64) -> Result<FaultCurrent> {
    if !(net.l1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "L1 must be positive, got {}",
            net.l1
        )));
    }
    let b1 = net.r1 / net.l1;
    let m_step = SQRT_2 * u_seq.norm() / net.l1;
    let phi_step = u_seq.arg();
    let (m_sol, phi_sol) = first_order_steady(b1, m_step, phi_step, net.omega);
    Ok(FaultCurrent {
        b1,
        m_step,
        phi_step,
        m_sol,
        phi_sol,
        omega: net.omega,
    })
}

/// Relative gap below which the two decay rates are treated as equal.
const DEGENERATE_RATES: f64 = 1e-6;

/// Local terminal current after fault initiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalCurrent {
    pub b1: f64,
    pub b3: f64,
    pub m_step: f64,
    pub phi_step: f64,
    pub a_step: f64,
    pub m_sol: f64,
    pub phi_sol: f64,
    /// Coefficient of `e^(-B3 t)` fixed by the initial current.
    pub k_init: f64,
    /// Coefficient of the `e^(-B1 t)` term (or of `t e^(-B1 t)` when degenerate).
    pub k_cross: f64,
    pub degenerate: bool,
    pub omega: f64,
}

impl TerminalCurrent {
    pub fn eval(&self, t: f64) -> f64 {
        let cross = if self.degenerate {
            self.k_cross * t * (-self.b1 * t).exp()
        } else {
            self.k_cross * (-self.b1 * t).exp()
        };
        self.k_init * (-self.b3 * t).exp()
            + self.m_sol * (self.omega * t + self.phi_sol).cos()
            + cross
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let e1 = (-self.b1 * t).exp();
        let cross = if self.degenerate {
            self.k_cross * e1 * (1.0 - self.b1 * t)
        } else {
            -self.b1 * self.k_cross * e1
        };
        -self.b3 * self.k_init * (-self.b3 * t).exp()
            - self.omega * self.m_sol * (self.omega * t + self.phi_sol).sin()
            + cross
    }

    /// Right-hand side of `i1' + B3 i1 = B4(t)`.
    pub fn forcing(&self, t: f64) -> f64 {
        self.m_step * (self.omega * t + self.phi_step).cos() + self.a_step * (-self.b1 * t).exp()
    }

    pub fn samples(&self, t: &[f64]) -> Vec<f64> {
        t.iter().map(|&t| self.eval(t)).collect()
    }

    /// Largest `|i1|` over the first half cycle, sampled at ten times the
    /// 80-per-cycle rate (401 points including both ends).
    pub fn peak_half_cycle(&self) -> f64 {
        let half = std::f64::consts::PI / self.omega;
        let n = 400;
        (0..=n)
            .map(|k| self.eval(half * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

pub fn solve_terminal_current(
    net: &ModeNetwork,
    i_f: &FaultCurrent,
    u_s1: Complex64,
    i1_0: f64,
) -> Result<TerminalCurrent> {
    if !(net.l2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "L2 must be positive, got {}",
            net.l2
        )));
    }
    let b3 = net.r2 / net.l2;
    let b1 = i_f.b1;
    let drive = u_s1 - Complex64::new(net.r4, net.omega * net.l4) * i_f.phasor();
    let m_step = SQRT_2 * drive.norm() / net.l2;
    let phi_step = drive.arg();
    let (m_sol, phi_sol) = first_order_steady(b3, m_step, phi_step, net.omega);
    let decay = i_f.m_sol * i_f.phi_sol.cos();
    let a_step = (net.r4 * decay - b1 * net.l4 * decay) / net.l2;
    let degenerate = (b3 - b1).abs() < DEGENERATE_RATES * b1.abs().max(f64::MIN_POSITIVE);
    let (k_cross, k_init) = if degenerate {
        (a_step, i1_0 - m_sol * phi_sol.cos())
    } else {
        let k = a_step / (b3 - b1);
        (k, i1_0 - m_sol * phi_sol.cos() - k)
    };
    Ok(TerminalCurrent {
        b1,
        b3,
        m_step,
        phi_step,
        a_step,
        m_sol,
        phi_sol,
        k_init,
        k_cross,
        degenerate,
        omega: net.omega,
    })
}

/// Both solutions for one network and set of source phasors.
pub fn solve_network(
    net: &ModeNetwork,
    sources: &ModeSources,
    i1_0: f64,
) -> Result<(FaultCurrent, TerminalCurrent)> {
    let i_f = solve_fault_current(net, net.u_seq(sources.local, sources.remote))?;
    let i1 = solve_terminal_current(net, &i_f, sources.local, i1_0)?;
    Ok((i_f, i1))
}

/// Peak `|i1|` over the first half cycle for one candidate fault.
pub fn max_terminal_current(
    fault: CanonicalFault,
    l_f: f64,
    r_f: f64,
    line: &LineParameters,
    src: &SourceImpedance,
    sources: &ModeSources,
    i1_0: f64,
) -> Result<f64> {
    let net = build_mode_network(fault, l_f, r_f, line, src)?;
    let (_, i1) = solve_network(&net, sources, i1_0)?;
    Ok(i1.peak_half_cycle())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_response_matches_complex_division() {
        let (b, m, phi, w) = (37.0, 5.0, 0.7, 314.159);
        let (ms, ps) = first_order_steady(b, m, phi, w);
        let z = Complex64::from_polar(m, phi) / Complex64::new(b, w);
        assert!((ms - z.norm()).abs() < 1e-12 * ms);
        assert!((ps - z.arg()).abs() < 1e-12);
    }
}
