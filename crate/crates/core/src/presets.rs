//! Reference systems: the 500 kV, 200 km simulation line with its testing
//! sources, the two 220 kV field lines, and parameter grids for each.

use num_complex::Complex64;

use crate::circuit::{LineParameters, PhaseParameters, SourceImpedance};
use crate::dataset::GridAxes;
use crate::fault::CanonicalFault;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 500 kV, 200 km line used for the simulation studies.
pub fn simulation_line() -> LineParameters {
    LineParameters::new(
        "sim-500kv-200km",
        200.0,
        500.0,
        50.0,
        PhaseParameters {
            r_self: 0.106,
            r_mutual: 0.091,
            l_self: 0.0016,
            l_mutual: 0.0008,
            c_self: 0.129e-7,
            c_mutual: -0.025e-7,
        },
    )
    .expect("valid preset")
}

/// 220 kV, 22.60 km line of the first field event (phase values only).
pub fn field_line_1() -> LineParameters {
    LineParameters::new(
        "field-220kv-22.60km",
        22.60,
        220.0,
        50.0,
        PhaseParameters {
            r_self: 0.0849,
            r_mutual: 0.0449,
            l_self: 0.00141,
            l_mutual: 4.47e-4,
            c_self: 1.2166e-8,
            c_mutual: -9.134e-11,
        },
    )
    .expect("valid preset")
}

/// 220 kV, 23.55 km line of the second field event (phase values only).
pub fn field_line_2() -> LineParameters {
    LineParameters::new(
        "field-220kv-23.55km",
        23.55,
        220.0,
        50.0,
        PhaseParameters {
            r_self: 0.0734,
            r_mutual: 0.0367,
            l_self: 0.0015,
            l_mutual: 4.6667e-4,
            c_self: 1.1050e-8,
            c_mutual: -2.6673e-9,
        },
    )
    .expect("valid preset")
}

/// Local and remote source impedances of the simulation testing set.
pub fn testing_sources() -> (SourceImpedance, SourceImpedance) {
    let w = simulation_line().omega();
    (
        SourceImpedance::from_complex(c(2.4, 6.6), c(4.1, 12.3), w),
        SourceImpedance::from_complex(c(2.9, 7.0), c(5.2, 16.4), w),
    )
}

pub const TESTING_LOADING_DEG: f64 = 12.0;
pub const TESTING_FIA_DEG: f64 = 67.5;
pub const TESTING_LOCATIONS_KM: [f64; 7] = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0];
pub const TESTING_RF_LOW: [f64; 4] = [0.1, 1.0, 3.0, 7.0];
pub const TESTING_RF_HIGH: [f64; 4] = [40.0, 80.0, 160.0, 320.0];

fn fia_axis() -> Vec<f64> {
    (0..8).map(|k| 45.0 * k as f64).collect()
}

fn pairs(aerial: &[Complex64], zero: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    aerial
        .iter()
        .flat_map(|a| zero.iter().map(move |z| (*a, *z)))
        .collect()
}

/// Full simulation grid (only the arithmetic is ever used at this size).
pub fn paper_simulation_grid(fault: CanonicalFault) -> GridAxes {
    let mut rf = vec![0.5, 2.5, 4.5, 6.5, 8.5, 15.0, 35.0];
    if fault == CanonicalFault::Slg {
        rf.extend([50.0, 100.0, 200.0, 300.0]);
    }
    GridAxes {
        sources: pairs(
            &[c(1.0, 5.0), c(2.0, 8.0), c(5.0, 10.0)],
            &[c(3.0, 15.0), c(5.0, 10.0), c(7.0, 15.0)],
        ),
        loading_deg: vec![-12.0, -10.0, -6.0, -2.0, 2.0, 6.0, 10.0, 12.0],
        rf_ohm: rf,
        lf_km: (1..=199).map(|k| k as f64).collect(),
        fia_deg: fia_axis(),
    }
}

/// Reduced simulation grid generated on a desk machine: two source sets,
/// four loadings, the seven low-resistance values, 5 km location steps and
/// eight inception angles (17,920 events per fault type).
pub fn desk_simulation_grid() -> GridAxes {
    GridAxes {
        sources: vec![(c(1.0, 5.0), c(3.0, 15.0)), (c(2.0, 8.0), c(5.0, 10.0))],
        loading_deg: vec![2.0, 6.0, 10.0, 12.0],
        rf_ohm: vec![0.5, 2.5, 4.5, 6.5, 8.5, 15.0, 35.0],
        lf_km: (0..40).map(|k| 2.5 + 5.0 * k as f64).collect(),
        fia_deg: fia_axis(),
    }
}

/// Field-data grid with the given location axis.
pub fn field_grid(lf_km: Vec<f64>) -> GridAxes {
    GridAxes {
        sources: pairs(
            &[c(0.1, 1.0), c(0.4, 1.5), c(1.0, 5.0)],
            &[c(0.2, 1.5), c(0.8, 3.0), c(2.0, 6.0)],
        ),
        loading_deg: vec![-12.0, -10.0, -6.0, -2.0, 2.0, 6.0, 10.0, 12.0],
        rf_ohm: vec![
            0.01, 0.1, 0.2, 0.5, 1.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0,
        ],
        lf_km,
        fia_deg: fia_axis(),
    }
}

/// Reduced field grid for the first field line, generated on a desk machine.
pub fn desk_field_grid_1() -> GridAxes {
    GridAxes {
        sources: vec![
            (c(0.1, 1.0), c(0.2, 1.5)),
            (c(0.4, 1.5), c(0.8, 3.0)),
            (c(1.0, 5.0), c(2.0, 6.0)),
        ],
        loading_deg: vec![-6.0, -2.0, 2.0, 6.0],
        rf_ohm: vec![0.01, 0.1, 0.5, 1.0, 10.0, 50.0],
        lf_km: (1..=22).map(|k| k as f64).collect(),
        fia_deg: fia_axis(),
    }
}
