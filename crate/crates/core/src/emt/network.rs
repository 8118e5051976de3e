//! Three-phase ladder: two source branches, coupled pi-sections and the
//! fault node, in the form both solvers consume.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::EventSpec;
use crate::circuit::SourceImpedance;
use crate::signals::clarke_matrix_inverse;

pub(crate) type M3 = Matrix3<f64>;
pub(crate) type V3 = Vector3<f64>;

pub(crate) fn m3(a: [[f64; 3]; 3]) -> M3 {
    M3::new(
        a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
    )
}

/// Coupled series R-L element between two three-phase nodes, optionally
/// shunted phase by phase by a damping resistor.
#[derive(Debug, Clone)]
pub(crate) struct Series {
    pub a: usize,
    pub b: usize,
    pub r: M3,
    pub l: M3,
    /// Conductance of the parallel damping resistor, zero when undamped.
    pub g_par: f64,
}

/// R-L branch from an ideal three-phase source to a node.
#[derive(Debug, Clone)]
pub(crate) struct SourceBranch {
    pub node: usize,
    pub r: M3,
    pub l: M3,
    /// Peak phase voltage.
    pub amplitude: f64,
    /// Phase-A angle at t = 0, radians.
    pub angle: f64,
}

impl SourceBranch {
    pub fn emf(&self, omega: f64, t: f64) -> V3 {
        let th = omega * t + self.angle;
        let p = 2.0 * std::f64::consts::PI / 3.0;
        V3::new(
            self.amplitude * th.cos(),
            self.amplitude * (th - p).cos(),
            self.amplitude * (th + p).cos(),
        )
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Ladder {
    pub nodes: usize,
    pub series: Vec<Series>,
    /// Lumped shunt capacitance matrix at each node.
    pub shunt: Vec<M3>,
    pub sources: [SourceBranch; 2],
    pub fault_node: usize,
    pub omega: f64,
}

/// Phase-domain R and L matrices of a source from its mode values.
pub(crate) fn source_matrices(z: &SourceImpedance) -> (M3, M3) {
    let diag = |aerial: f64, zero: f64| [[aerial, 0.0, 0.0], [0.0, aerial, 0.0], [0.0, 0.0, zero]];
    (
        m3(clarke_matrix_inverse(&diag(z.r_aerial, z.r_zero))),
        m3(clarke_matrix_inverse(&diag(z.l_aerial, z.l_zero))),
    )
}

/// Series R and L that, in parallel with conductance `g` on each phase,
/// present the impedance `r + j w l` at frequency `w`.
fn compensate(r: &M3, l: &M3, g: f64, w: f64) -> Option<(M3, M3)> {
    if g == 0.0 {
        return Some((*r, *l));
    }
    let z = Matrix3::<Complex64>::from_fn(|i, j| Complex64::new(r[(i, j)], w * l[(i, j)]));
    let y = z.try_inverse()? - Matrix3::<Complex64>::identity() * Complex64::new(g, 0.0);
    let zc = y.try_inverse()?;
    Some((zc.map(|x| x.re), zc.map(|x| x.im / w)))
}

impl Ladder {
    /// Builds the ladder with the given local/remote source angles.
    pub fn build(spec: &EventSpec, angle_local: f64, angle_remote: f64) -> Ladder {
        let line = &spec.line;
        let seq = line.sequence();
        let g_par = if spec.damping > 0.0 {
            1.0 / (spec.damping * (seq.l1 / seq.c1).sqrt())
        } else {
            0.0
        };
        let w = line.omega();
        let n1 = spec.sections_per_side();
        let n2 = n1;
        let nodes = n1 + n2 + 1;
        let r_km = m3(line.r_matrix_km());
        let l_km = m3(line.l_matrix_km());
        let c_km = m3(line.c_matrix_km());
        let mut series = Vec::with_capacity(n1 + n2);
        let mut shunt = vec![M3::zeros(); nodes];
        let mut add_section = |a: usize, len: f64| {
            let (r, l) = compensate(&(r_km * len), &(l_km * len), g_par, w)
                .unwrap_or((r_km * len, l_km * len));
            series.push(Series {
                a,
                b: a + 1,
                r,
                l,
                g_par,
            });
            shunt[a] += c_km * (0.5 * len);
            shunt[a + 1] += c_km * (0.5 * len);
        };
        let len1 = spec.l_f / n1 as f64;
        let len2 = (line.length_km - spec.l_f) / n2 as f64;
        for k in 0..n1 {
            add_section(k, len1);
        }
        for k in 0..n2 {
            add_section(n1 + k, len2);
        }
        let amplitude = spec.peak_phase_voltage();
        let (rl, ll) = source_matrices(&spec.zs_local);
        let (rr, lr) = source_matrices(&spec.zs_remote);
        Ladder {
            nodes,
            series,
            shunt,
            sources: [
                SourceBranch {
                    node: 0,
                    r: rl,
                    l: ll,
                    amplitude,
                    angle: angle_local,
                },
                SourceBranch {
                    node: nodes - 1,
                    r: rr,
                    l: lr,
                    amplitude,
                    angle: angle_remote,
                },
            ],
            fault_node: n1,
            omega: line.omega(),
        }
    }
}
