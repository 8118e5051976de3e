mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use faultloc::dataset::{GridAxes, GroupConfig, SimulationSettings};
use faultloc::presets;
use faultloc::CanonicalFault;

fn faultloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultloc"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn line_file(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("line.toml");
    std::fs::write(&p, presets::simulation_line().to_toml_string().unwrap()).unwrap();
    p
}

#[test]
fn simulate_estimate_and_takagi() {
    let dir = tempfile::tempdir().unwrap();
    let line = line_file(dir.path());
    let rec = dir.path().join("ag.rec");
    let stem = dir.path().join("ag");
    let out = faultloc(&[
        "simulate",
        "--distance",
        "25",
        "--rf",
        "1",
        "--post-cycles",
        "2",
        "--out",
        s(&rec),
        "--comtrade",
        s(&stem),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    for input in [rec.clone(), stem.with_extension("cfg")] {
        let out = faultloc(&[
            "estimate",
            "--record",
            s(&input),
            "--line",
            s(&line),
            "--fault-type",
            "AG",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let fia = est["fia_deg"].as_f64().unwrap();
        assert!((fia - 67.5).abs() <= 6.75, "{fia}");
    }

    let out = faultloc(&[
        "takagi",
        "--record",
        s(&rec),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
        "--time-ms",
        "20,30",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_for_bad_input_and_no_fault() {
    let dir = tempfile::tempdir().unwrap();
    let line = line_file(dir.path());
    let missing = dir.path().join("missing.rec");
    let out = faultloc(&[
        "estimate",
        "--record",
        s(&missing),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
    ]);
    assert_eq!(code(&out), 2);
    let out = faultloc(&[
        "estimate",
        "--record",
        s(&missing),
        "--line",
        s(&line),
        "--fault-type",
        "XY",
    ]);
    assert_eq!(code(&out), 2);

    let quiet = dir.path().join("quiet.rec");
    let out = faultloc(&[
        "simulate",
        "--distance",
        "25",
        "--rf",
        "1e9",
        "--out",
        s(&quiet),
    ]);
    assert_eq!(code(&out), 0);
    let out = faultloc(&[
        "estimate",
        "--record",
        s(&quiet),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

fn write_group_config(path: &Path, lf: Vec<f64>) {
    let cfg = GroupConfig {
        line: presets::simulation_line(),
        axes: GridAxes {
            sources: vec![(c(2.0, 8.0), c(5.0, 10.0))],
            loading_deg: vec![10.0, 12.0],
            rf_ohm: vec![0.5, 2.5],
            lf_km: lf,
            fia_deg: vec![45.0, 90.0],
        },
        fault_types: vec![CanonicalFault::Slg],
        simulation: SimulationSettings::default(),
    };
    std::fs::write(path, toml::to_string(&cfg).unwrap()).unwrap();
}

#[test]
fn group_locate_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let line = line_file(dir.path());
    let group_cfg = dir.path().join("group.toml");
    write_group_config(&group_cfg, vec![20.0, 60.0, 100.0, 140.0, 180.0]);
    let group = dir.path().join("group");
    let out = faultloc(&["gen-group", "--config", s(&group_cfg), "--out", s(&group)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let loc_cfg = dir.path().join("locate.toml");
    std::fs::write(&loc_cfg, "reps = 2\n[mlp]\nepochs = 3\n").unwrap();
    let rec = dir.path().join("ag.rec");
    assert_eq!(
        code(&faultloc(&[
            "simulate",
            "--distance",
            "60",
            "--out",
            s(&rec)
        ])),
        0
    );
    let report = dir.path().join("report.json");
    let out = faultloc(&[
        "locate",
        "--record",
        s(&rec),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
        "--group",
        s(&group),
        "--config",
        s(&loc_cfg),
        "--seed",
        "3",
        "--perturb",
        "-0.05",
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["proposed"]["predictions"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["perturb"].as_f64(), Some(-0.05));

    let csv = dir.path().join("hist.csv");
    let out = faultloc(&["report", "--input", s(&report), "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("bin_start,bin_end,count"));
    let out = faultloc(&["report", "--input", s(&report), "--which", "traditional"]);
    assert_eq!(code(&out), 2);

    let out = faultloc(&[
        "select",
        "--record",
        s(&rec),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
        "--group",
        s(&group),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["samples"].as_u64().unwrap() > 0);

    // A group too small to train on fails in the training stage.
    let small_cfg = dir.path().join("small.toml");
    write_group_config(&small_cfg, vec![100.0]);
    let small = dir.path().join("small");
    assert_eq!(
        code(&faultloc(&[
            "gen-group",
            "--config",
            s(&small_cfg),
            "--out",
            s(&small)
        ])),
        0
    );
    let out = faultloc(&[
        "locate",
        "--record",
        s(&rec),
        "--line",
        s(&line),
        "--fault-type",
        "AG",
        "--group",
        s(&small),
        "--config",
        s(&loc_cfg),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}
