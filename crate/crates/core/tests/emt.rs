mod common;

use std::f64::consts::SQRT_2;

use common::*;
use faultloc::emt::{simulate_event, steady_state_phasor_solve, EventSpec};
use faultloc::records::WaveformRecord;
use faultloc::signals::{extract_phasor, wrap_pi};
use faultloc::FaultType;

#[test]
fn open_switch_continues_the_prefault_wave() {
    let spec = testing_spec(FaultType::AG, 25.0, 1e9);
    let rec = simulate_event(&spec).unwrap();
    let f = spec.fault_sample();
    for ch in rec.channels() {
        let peak = max_abs(&ch[..f]);
        let dev = (f..ch.len())
            .map(|k| (ch[k] - ch[k - 80]).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 1e-3 * peak, "{dev} vs {peak}");
    }
}

#[test]
fn record_layout() {
    let spec = testing_spec(FaultType::BC, 60.0, 2.0);
    let rec = simulate_event(&spec).unwrap();
    assert_eq!(rec.sample_rate, 4000.0);
    assert_eq!(spec.fault_sample(), 240);
    assert!(rec.len() >= spec.fault_sample() + spec.post_samples());
    rec.validate().unwrap();
}

#[test]
fn invalid_specs_are_refused() {
    assert!(simulate_event(&testing_spec(FaultType::AG, 0.0, 1.0)).is_err());
    assert!(simulate_event(&testing_spec(FaultType::AG, 250.0, 1.0)).is_err());
    assert!(simulate_event(&testing_spec(FaultType::AG, 25.0, -1.0)).is_err());
    let mut s = testing_spec(FaultType::AG, 25.0, 1.0);
    s.dt_sim = 1e-3;
    assert!(simulate_event(&s).is_err());
}

/// Peak phasors of the local-bus voltage and line current over the last
/// pre-fault cycle.
fn recorded_phasors(
    rec: &WaveformRecord,
    end: usize,
) -> ([num_complex::Complex64; 3], [num_complex::Complex64; 3]) {
    let p = |x: &[f64]| extract_phasor(x, end as f64, 80).unwrap().to_complex() * SQRT_2;
    (
        [p(&rec.v[0]), p(&rec.v[1]), p(&rec.v[2])],
        [p(&rec.i[0]), p(&rec.i[1]), p(&rec.i[2])],
    )
}

#[test]
fn prefault_state_matches_phasor_solution() {
    for (ft, lf, loading) in [(FaultType::AG, 25.0, 12.0), (FaultType::BCG, 150.0, -20.0)] {
        let mut spec = testing_spec(ft, lf, 1.0);
        spec.loading_deg = loading;
        let rec = simulate_event(&spec).unwrap();
        let ph = steady_state_phasor_solve(&spec).unwrap();
        let (v, i) = recorded_phasors(&rec, spec.fault_sample() - 1);
        let (pv, pi) = (ph.voltages[0], ph.source_currents[0]);
        // The phasor solution has its own time origin; compare magnitudes and
        // angles relative to phase A voltage.
        let rel = |z: num_complex::Complex64, r: num_complex::Complex64| wrap_pi(z.arg() - r.arg());
        for p in 0..3 {
            assert!(
                (v[p].norm() - pv[p].norm()).abs() <= 5e-3 * pv[p].norm(),
                "{p}: {} {}",
                v[p],
                pv[p]
            );
            assert!(
                (i[p].norm() - pi[p].norm()).abs() <= 5e-3 * pi[p].norm(),
                "{p}: {} {}",
                i[p],
                pi[p]
            );
            assert!((rel(v[p], v[0]) - rel(pv[p], pv[0])).abs() <= 5e-3);
            assert!((rel(i[p], v[0]) - rel(pi[p], pv[0])).abs() <= 5e-3);
        }
    }
}

#[test]
fn symmetric_system_has_mirror_steady_state() {
    let mut spec = testing_spec(FaultType::AG, 100.0, 1.0);
    spec.zs_remote = spec.zs_local;
    spec.loading_deg = 0.0;
    let ph = steady_state_phasor_solve(&spec).unwrap();
    let n = ph.voltages.len();
    let m = ph.fault_node;
    assert_eq!(m, n - 1 - m);
    let scale = ph.voltages[0][0].norm();
    for k in 0..n {
        for p in 0..3 {
            assert!((ph.voltages[k][p] - ph.voltages[n - 1 - k][p]).norm() <= 1e-9 * scale);
        }
    }
    // Equal and opposite series currents either side of the midpoint.
    let s = &ph.series_currents;
    let iscale = s
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, z| a.max(z.norm()));
    for p in 0..3 {
        assert!((s[m - 1][p] + s[m][p]).norm() <= 1e-9 * iscale);
    }
}

#[test]
fn balanced_run_has_no_zero_mode_current() {
    let spec = testing_spec(FaultType::ABC, 80.0, 1e9);
    let rec = simulate_event(&spec).unwrap();
    let rated = max_abs(&rec.i[0]);
    let zero = (0..rec.len())
        .map(|k| ((rec.i[0][k] + rec.i[1][k] + rec.i[2][k]) / 3.0).abs())
        .fold(0.0, f64::max);
    assert!(zero <= 1e-9 * rated, "{zero} vs {rated}");
}

fn channel_deviations(a: &EventSpec, b: &EventSpec) -> [f64; 6] {
    let ra = simulate_event(a).unwrap();
    let rb = simulate_event(b).unwrap();
    assert_eq!(ra.len(), rb.len());
    let (ca, cb) = (ra.channels(), rb.channels());
    std::array::from_fn(|k| max_abs_diff(ca[k], cb[k]) / max_abs(ca[k]))
}

const CASES: [(FaultType, f64, f64); 5] = [
    (FaultType::AG, 25.0, 1.0),
    (FaultType::BC, 120.0, 7.0),
    (FaultType::BCG, 175.0, 0.1),
    (FaultType::ABC, 50.0, 3.0),
    (FaultType::AG, 100.0, 160.0),
];

#[test]
fn halving_the_step_converges() {
    for (ft, lf, rf) in CASES {
        let a = testing_spec(ft, lf, rf);
        let mut b = a.clone();
        b.dt_sim = a.effective_dt() / 2.0;
        let d = channel_deviations(&a, &b);
        println!(
            "{ft} {lf} km {rf} ohm: dt halving changes va..ic by {:.3?} %",
            d.map(|x| 100.0 * x)
        );
        // Faulted-phase currents are the quantities the estimators consume.
        for p in ft.phases() {
            assert!(d[3 + p] < 2e-3, "{ft} phase {p}: {d:?}");
        }
        assert!(d.iter().all(|&x| x < 1e-2), "{ft}: {d:?}");
    }
}

#[test]
fn doubling_sections_is_characterized() {
    for (ft, lf, rf) in CASES {
        let a = testing_spec(ft, lf, rf);
        let mut b = a.clone();
        b.n_pi_sections = Some(2 * a.sections_per_side());
        let d = channel_deviations(&a, &b);
        println!(
            "{ft} {lf} km {rf} ohm: section doubling changes va..ic by {:.3?} %",
            d.map(|x| 100.0 * x)
        );
        assert!(d.iter().all(|&x| x < 0.1), "{ft}: {d:?}");
        if rf <= 10.0 {
            for p in ft.phases() {
                assert!(d[3 + p] < 5e-2, "{ft} phase {p}: {d:?}");
            }
        }
    }
}
