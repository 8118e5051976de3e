use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use faultloc_ffi::*;

const LINE_TOML: &str = r#"
name = "sim-500kv-200km"
length_km = 200.0
voltage_kv = 500.0
frequency = 50.0

[phase]
r_self = 0.106
r_mutual = 0.091
l_self = 0.0016
l_mutual = 0.0008
c_self = 0.129e-7
c_mutual = -0.025e-7
"#;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        fl_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn line() -> *mut FlLine {
    let toml = CString::new(LINE_TOML).unwrap();
    let mut l = ptr::null_mut();
    assert_eq!(
        unsafe { fl_line_from_toml(toml.as_ptr(), &mut l) },
        FlStatus::Ok
    );
    l
}

fn simulate(l: *const FlLine, ft: &str, km: f64) -> *mut FlRecord {
    let ft = CString::new(ft).unwrap();
    let zl = [2.4, 6.6, 4.1, 12.3];
    let zr = [2.9, 7.0, 5.2, 16.4];
    let mut rec = ptr::null_mut();
    let st = unsafe { fl_simulate(l, ft.as_ptr(), km, 1.0, 67.5, 12.0, &zl, &zr, &mut rec) };
    assert_eq!(st, FlStatus::Ok, "{}", last_error());
    rec
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(fl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_and_bad_arguments_report_codes() {
    let mut l = ptr::null_mut();
    assert_eq!(
        unsafe { fl_line_from_toml(ptr::null(), &mut l) },
        FlStatus::InvalidArgument
    );
    assert!(last_error().contains("null"));
    let bad = CString::new("name = 3").unwrap();
    assert_eq!(
        unsafe { fl_line_from_toml(bad.as_ptr(), &mut l) },
        FlStatus::Parse
    );
    let missing = CString::new("/nonexistent/rec.flrc").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(
        unsafe { fl_record_load(missing.as_ptr(), &mut r) },
        FlStatus::Io
    );
    assert!(r.is_null());
    let line = line();
    let zl = [2.4, 6.6, 4.1, 12.3];
    let xx = CString::new("XG").unwrap();
    let st = unsafe { fl_simulate(line, xx.as_ptr(), 25.0, 1.0, 0.0, 0.0, &zl, &zl, &mut r) };
    assert_eq!(st, FlStatus::InvalidArgument);
    unsafe {
        fl_line_free(line);
        fl_record_free(ptr::null_mut());
    }
}

#[test]
fn simulate_estimate_takagi_and_channels() {
    let l = line();
    assert_eq!(unsafe { fl_line_length_km(l) }, 200.0);
    let rec = simulate(l, "AG", 25.0);
    let n = unsafe { fl_record_len(rec) };
    assert!(n > 160);
    assert_eq!(unsafe { fl_record_sample_rate(rec) }, 4000.0);

    let mut len = 0;
    let mut small = vec![0.0; 4];
    let st = unsafe { fl_record_channel(rec, 3, small.as_mut_ptr(), small.len(), &mut len) };
    assert_eq!((st, len), (FlStatus::BufferTooSmall, n));
    let mut ia = vec![0.0; n];
    assert_eq!(
        unsafe { fl_record_channel(rec, 3, ia.as_mut_ptr(), n, &mut len) },
        FlStatus::Ok
    );
    assert!(ia.iter().any(|x| x.abs() > 1000.0));

    let ft = CString::new("AG").unwrap();
    let mut est = FlEstimate::default();
    let st = unsafe { fl_estimate(rec, l, ft.as_ptr(), 0.0, 0.0, &mut est) };
    assert_eq!(st, FlStatus::Ok, "{}", last_error());
    assert_eq!(est.has_zs_zero, 1);
    assert!((est.zs_aerial_re - 2.4).abs() < 0.2 && (est.zs_aerial_im - 6.6).abs() < 0.4);
    assert!(est.rf_lower <= 1.0 && est.rf_upper >= 1.0);

    let mut window = vec![0.0; FL_WINDOW_LEN];
    let st = unsafe { fl_record_window(rec, ft.as_ptr(), est.t_f_index, window.as_mut_ptr()) };
    assert_eq!(st, FlStatus::Ok, "{}", last_error());
    // Window row 40 is the fault sample; column 0 is the faulted-phase current.
    assert_eq!(window[40 * 6], ia[est.t_f_index as usize]);

    let mut km = 0.0;
    let st = unsafe { fl_takagi(rec, l, ft.as_ptr(), 15.0, 0.0, &mut km) };
    assert_eq!(st, FlStatus::Ok, "{}", last_error());
    assert!(km > 0.0 && km < 200.0);
    unsafe {
        fl_record_free(rec);
        fl_line_free(l);
    }
}

#[test]
fn clarke_matches_library() {
    let a = [1.0, 0.5, -0.2];
    let b = [-0.5, 0.25, 0.7];
    let c = [0.1, -0.75, 0.3];
    let (mut al, mut be, mut ze) = ([0.0; 3], [0.0; 3], [0.0; 3]);
    let st = unsafe {
        fl_clarke_forward(
            a.as_ptr(),
            b.as_ptr(),
            c.as_ptr(),
            3,
            al.as_mut_ptr(),
            be.as_mut_ptr(),
            ze.as_mut_ptr(),
        )
    };
    assert_eq!(st, FlStatus::Ok);
    let m = faultloc::signals::clarke_forward(&a, &b, &c).unwrap();
    assert_eq!(
        (al.to_vec(), be.to_vec(), ze.to_vec()),
        (m[0].clone(), m[1].clone(), m[2].clone())
    );
}

#[test]
fn comtrade_from_memory_matches_native() {
    let l = line();
    let rec = simulate(l, "BC", 100.0);
    let native = faultloc::emt::simulate_event(&faultloc::emt::EventSpec::new(
        "BC".parse().unwrap(),
        100.0,
        1.0,
        67.5,
        12.0,
        faultloc::presets::testing_sources().0,
        faultloc::presets::testing_sources().1,
        faultloc::presets::simulation_line(),
    ))
    .unwrap();
    let (cfg, dat) = faultloc::records::comtrade::export_comtrade(&native).unwrap();
    let mut parsed = ptr::null_mut();
    let st = unsafe {
        fl_record_parse_comtrade(
            cfg.as_ptr(),
            cfg.len(),
            dat.as_ptr(),
            dat.len(),
            &mut parsed,
        )
    };
    assert_eq!(st, FlStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { fl_record_len(parsed) }, unsafe {
        fl_record_len(rec)
    });
    unsafe {
        fl_record_free(parsed);
        fl_record_free(rec);
        fl_line_free(l);
    }
}

/// Compiles a C program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("faultloc.h").exists());
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libfaultloc_ffi.a");
    if !lib.exists() {
        panic!("static library not found at {}", lib.display());
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = out.join("abi_smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "faultloc.h"
int main(void) {
    double a[2] = {1.0, -1.0}, b[2] = {0.0, 0.5}, c[2] = {-1.0, 0.5};
    double al[2], be[2], ze[2];
    if (fl_clarke_forward(a, b, c, 2, al, be, ze) != FL_STATUS_OK) return 1;
    struct FlLine *line = NULL;
    if (fl_line_from_toml("bad", &line) != FL_STATUS_PARSE) return 2;
    char msg[256];
    if (fl_last_error_message(msg, sizeof msg) == 0) return 3;
    if (strlen(fl_version()) == 0) return 4;
    printf("ok %d\n", FL_WINDOW_LEN);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = out.join("abi_smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compile failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok 486");
}
