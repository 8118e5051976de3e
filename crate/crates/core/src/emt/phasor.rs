//! Sinusoidal steady state of the pre-fault ladder by complex nodal analysis.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use super::network::{Ladder, M3};
use super::EventSpec;
use crate::error::{Error, Result};

type C3 = Matrix3<Complex64>;

/// Peak-value phasors of every node voltage and branch current.
#[derive(Debug, Clone)]
pub struct NodePhasors {
    /// Node voltages, node 0 is the local bus, the last node the remote bus.
    pub voltages: Vec<[Complex64; 3]>,
    /// Current of each series element, from its lower to its higher node.
    pub series_currents: Vec<[Complex64; 3]>,
    /// Source branch currents into the local and remote buses.
    pub source_currents: [[Complex64; 3]; 2],
    /// Index of the fault node.
    pub fault_node: usize,
}

fn cplx(r: &M3, l: &M3, omega: f64) -> C3 {
    C3::from_fn(|i, j| Complex64::new(r[(i, j)], omega * l[(i, j)]))
}

fn inv3(m: &C3, what: &str) -> Result<C3> {
    m.try_inverse()
        .ok_or_else(|| Error::Singular(format!("{what} impedance matrix")))
}

fn emf_phasor(amplitude: f64, angle: f64) -> [Complex64; 3] {
    let p = 2.0 * std::f64::consts::PI / 3.0;
    [
        Complex64::from_polar(amplitude, angle),
        Complex64::from_polar(amplitude, angle - p),
        Complex64::from_polar(amplitude, angle + p),
    ]
}

/// Solves the ladder at angular frequency `omega`. The time-domain solver
/// calls this with the trapezoidal-warped frequency, which makes the result
/// the exact discrete periodic state.
pub(crate) fn solve_ladder(ladder: &Ladder, omega: f64) -> Result<NodePhasors> {
    let n = 3 * ladder.nodes;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    let add_block = |y: &mut DMatrix<Complex64>, a: usize, b: usize, m: &C3, sign: f64| {
        for i in 0..3 {
            for j in 0..3 {
                y[(3 * a + i, 3 * b + j)] += m[(i, j)] * sign;
            }
        }
    };
    let mut series_y = Vec::with_capacity(ladder.series.len());
    for s in &ladder.series {
        let ys = inv3(&cplx(&s.r, &s.l, omega), "series")?;
        add_block(&mut y, s.a, s.a, &ys, 1.0);
        add_block(&mut y, s.b, s.b, &ys, 1.0);
        add_block(&mut y, s.a, s.b, &ys, -1.0);
        add_block(&mut y, s.b, s.a, &ys, -1.0);
        let gp = C3::identity() * Complex64::new(s.g_par, 0.0);
        add_block(&mut y, s.a, s.a, &gp, 1.0);
        add_block(&mut y, s.b, s.b, &gp, 1.0);
        add_block(&mut y, s.a, s.b, &gp, -1.0);
        add_block(&mut y, s.b, s.a, &gp, -1.0);
        series_y.push(ys);
    }
    for (k, c) in ladder.shunt.iter().enumerate() {
        let yc = C3::from_fn(|i, j| Complex64::new(0.0, omega * c[(i, j)]));
        add_block(&mut y, k, k, &yc, 1.0);
    }
    let mut source_y = Vec::with_capacity(2);
    for src in &ladder.sources {
        let ys = inv3(&cplx(&src.r, &src.l, omega), "source")?;
        add_block(&mut y, src.node, src.node, &ys, 1.0);
        let e = emf_phasor(src.amplitude, src.angle);
        for i in 0..3 {
            for j in 0..3 {
                rhs[3 * src.node + i] += ys[(i, j)] * e[j];
            }
        }
        source_y.push((ys, e));
    }
    let v = y
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("nodal admittance matrix".into()))?;
    let node = |k: usize| [v[3 * k], v[3 * k + 1], v[3 * k + 2]];
    let voltages: Vec<[Complex64; 3]> = (0..ladder.nodes).map(node).collect();
    let series_currents = ladder
        .series
        .iter()
        .zip(&series_y)
        .map(|(s, ys)| {
            let (va, vb) = (voltages[s.a], voltages[s.b]);
            let mut out = [Complex64::new(0.0, 0.0); 3];
            for (i, o) in out.iter_mut().enumerate() {
                for j in 0..3 {
                    *o += ys[(i, j)] * (va[j] - vb[j]);
                }
            }
            out
        })
        .collect();
    let mut source_currents = [[Complex64::new(0.0, 0.0); 3]; 2];
    for (k, (src, (ys, e))) in ladder.sources.iter().zip(&source_y).enumerate() {
        let vn = voltages[src.node];
        for i in 0..3 {
            for j in 0..3 {
                source_currents[k][i] += ys[(i, j)] * (e[j] - vn[j]);
            }
        }
    }
    Ok(NodePhasors {
        voltages,
        series_currents,
        source_currents,
        fault_node: ladder.fault_node,
    })
}

/// Pre-fault steady state of an event at rated frequency, with the source
/// angles the simulator would use for the given loading (before any
/// inception-angle alignment).
pub fn steady_state_phasor_solve(spec: &EventSpec) -> Result<NodePhasors> {
    spec.validate()?;
    let half = spec.loading_deg.to_radians() / 2.0;
    let ladder = Ladder::build(spec, -half, half);
    solve_ladder(&ladder, spec.line.omega())
}
