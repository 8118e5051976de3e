mod common;

use std::f64::consts::PI;

use common::*;
use faultloc::emt::simulate_event;
use faultloc::estimation::EstimationConfig;
use faultloc::pipeline::estimate_record;
use faultloc::presets;
use faultloc::records::comtrade::{export_comtrade, parse_comtrade};
use faultloc::records::{extract_window, resample, WaveformRecord, WINDOW_ROWS};
use faultloc::FaultType;
use proptest::prelude::*;

const W: f64 = 2.0 * PI * 50.0;

fn cfg_text(a: f64, b: f64) -> String {
    let mut s = String::from("STN,DEV,1999\n6,6A,0D\n");
    for (k, (name, ph, unit)) in [
        ("UA", "A", "V"),
        ("UB", "B", "V"),
        ("UC", "C", "V"),
        ("IA", "A", "A"),
        ("IB", "B", "A"),
        ("IC", "C", "A"),
    ]
    .iter()
    .enumerate()
    {
        let (ak, bk) = if k == 0 { (a, b) } else { (1.0, 0.0) };
        s.push_str(&format!(
            "{},{name},{ph},,{unit},{ak},{bk},0,-99999,99999,1,1,P\n",
            k + 1
        ));
    }
    s.push_str("50\n1\n4000,2\n01/01/2020,00:00:00.000000\n01/01/2020,00:00:00.000000\nASCII\n1\n");
    s
}

const DAT: &str = "1,0,10,20,30,-1,-2,-3\n2,250,11,21,31,-4,-5,-6\n";

#[test]
fn minimal_ascii_file() {
    let rec = parse_comtrade(cfg_text(1.0, 0.0).as_bytes(), DAT.as_bytes()).unwrap();
    assert_eq!(rec.len(), 2);
    assert_eq!(rec.sample_rate, 4000.0);
    assert_eq!(rec.v[0], vec![10.0, 11.0]);
    assert_eq!(rec.v[2], vec![30.0, 31.0]);
    assert_eq!(rec.i[1], vec![-2.0, -5.0]);
}

#[test]
fn channel_scaling() {
    let rec = parse_comtrade(cfg_text(0.5, 10.0).as_bytes(), DAT.as_bytes()).unwrap();
    assert_eq!(rec.v[0], vec![0.5 * 10.0 + 10.0, 0.5 * 11.0 + 10.0]);
    assert_eq!(rec.v[1], vec![20.0, 21.0]);
}

#[test]
fn export_metadata_and_empty_record() {
    let rec = synthetic_record(5000.0, 300, balanced(1.0, 0.0, W), balanced(2.0, 0.1, W));
    let (cfg, _) = export_comtrade(&rec).unwrap();
    assert!(cfg.lines().any(|l| l.trim() == "5000,300"), "{cfg}");
    let empty = synthetic_record(5000.0, 0, |_, _| 0.0, |_, _| 0.0);
    assert!(export_comtrade(&empty).is_err());
}

#[test]
fn simulated_record_round_trips_through_comtrade() {
    let rec = simulate_event(&testing_spec(FaultType::BCG, 130.0, 3.0)).unwrap();
    let (cfg, dat) = export_comtrade(&rec).unwrap();
    let back = parse_comtrade(cfg.as_bytes(), dat.as_bytes()).unwrap();
    assert_eq!(back.len(), rec.len());
    assert!(record_deviation(&rec, &back) <= 1e-6);
}

fn arbitrary_record() -> impl Strategy<Value = WaveformRecord> {
    (
        prop::sample::select(vec![4000.0, 5000.0, 4800.0]),
        prop::collection::vec(-1e6f64..1e6, 6 * 120),
        prop::collection::vec(1e-3f64..1e6, 6),
    )
        .prop_map(|(rate, raw, amp)| {
            let n = 120;
            let ch =
                |c: usize| -> Vec<f64> { (0..n).map(|k| raw[c * n + k] / 1e6 * amp[c]).collect() };
            WaveformRecord {
                station_id: "prop".into(),
                base_frequency: 50.0,
                sample_rate: rate,
                v: [ch(0), ch(1), ch(2)],
                i: [ch(3), ch(4), ch(5)],
                trigger_index: Some(40),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn comtrade_round_trip(rec in arbitrary_record()) {
        let (cfg, dat) = export_comtrade(&rec).unwrap();
        let back = parse_comtrade(cfg.as_bytes(), dat.as_bytes()).unwrap();
        prop_assert_eq!(back.sample_rate, rec.sample_rate);
        prop_assert!(record_deviation(&rec, &back) <= 1e-6);
    }
}

#[test]
fn native_format_round_trip_and_load_any() {
    let rec = synthetic_record(
        4000.0,
        240,
        balanced(3.0e5, 0.2, W),
        balanced(900.0, -0.5, W),
    );
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.rec");
    rec.save(&p).unwrap();
    assert_eq!(WaveformRecord::load(&p).unwrap(), rec);
    assert_eq!(WaveformRecord::load_any(&p).unwrap(), rec);

    let (cfg, dat) = export_comtrade(&rec).unwrap();
    std::fs::write(dir.path().join("c.cfg"), cfg).unwrap();
    std::fs::write(dir.path().join("c.dat"), dat).unwrap();
    let back = WaveformRecord::load_any(dir.path().join("c.cfg")).unwrap();
    assert!(record_deviation(&rec, &back) <= 1e-6);
    std::fs::write(dir.path().join("lonely.cfg"), "x").unwrap();
    assert!(WaveformRecord::load_any(dir.path().join("lonely.cfg")).is_err());
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

#[test]
fn resample_examples() {
    let rec = synthetic_record(4000.0, 400, balanced(1.0, 0.3, W), balanced(2.0, 0.0, W));
    assert_eq!(resample(&rec, 80).unwrap(), rec);

    // 10 whole cycles at 5 kHz.
    let rec = synthetic_record(5000.0, 1000, balanced(1.0, 0.3, W), balanced(2.0, 0.0, W));
    let out = resample(&rec, 80).unwrap();
    assert_eq!(out.sample_rate, 4000.0);
    let whole = 800.min(out.len()) / 80 * 80;
    for (a, b) in rec.channels().iter().zip(out.channels()) {
        assert!((rms(&b[..whole]) - rms(a)).abs() <= 1e-3 * rms(a));
    }
    let dur_in = (rec.len() - 1) as f64 / rec.sample_rate;
    let dur_out = (out.len() - 1) as f64 / out.sample_rate;
    assert!((dur_in - dur_out).abs() <= 1.0 / 4000.0);

    // Up to the 5th harmonic.
    let h = |p: usize, t: f64| {
        let ph = 2.0 * PI * p as f64 / 3.0;
        (W * t - ph).cos() + 0.3 * (3.0 * W * t).sin() + 0.2 * (5.0 * (W * t - ph)).cos()
    };
    let rec = synthetic_record(5000.0, 1000, h, h);
    let out = resample(&rec, 80).unwrap();
    for (a, b) in rec.channels().iter().zip(out.channels()) {
        assert!((rms(&b[..whole]) - rms(a)).abs() <= 5e-3 * rms(a));
    }

    let slow = synthetic_record(1000.0, 100, balanced(1.0, 0.0, W), balanced(1.0, 0.0, W));
    assert!(resample(&slow, 80).is_err());
}

#[test]
fn window_examples() {
    let rec = synthetic_record(
        4000.0,
        400,
        |p, t| p as f64 * 1e4 + t,
        |p, t| p as f64 * 1e2 + t,
    );
    let w = extract_window(&rec, 200).unwrap();
    assert_eq!(w.data().len(), WINDOW_ROWS * 6);
    assert_eq!(w.fault_index(), 40);
    assert_eq!(w.get(0, 0), rec.i[0][160]);
    assert_eq!(w.get(80, 5), rec.v[2][240]);
    assert!(extract_window(&rec, 30).is_err());
    assert!(extract_window(&rec, 370).is_err());
    assert!(extract_window(&rec, 359).is_ok());
}

#[test]
fn window_centre_is_detected_fault_sample() {
    let rec = simulate_event(&testing_spec(FaultType::AG, 25.0, 1.0)).unwrap();
    let est = estimate_record(
        &rec,
        FaultType::AG,
        &presets::simulation_line(),
        &EstimationConfig::default(),
    )
    .unwrap();
    let w = extract_window(&rec, est.t_f_index).unwrap();
    assert_eq!(w.get(40, 0), rec.i[0][est.t_f_index]);
    assert_eq!(w.get(40, 3), rec.v[0][est.t_f_index]);
}
