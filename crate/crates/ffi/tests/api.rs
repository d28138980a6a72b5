use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use spreadbench_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn space(json: &str) -> *mut SbSpace {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sb_space_from_json(c(json).as_ptr(), &mut out) }, SbStatus::Ok);
    out
}

#[test]
fn norm_round_trip() {
    let sp = space(r#"{"kind":"lp","p":1}"#);
    let mut v = ptr::null_mut();
    let idx = [1usize, 4];
    let val = [2.0, -3.0];
    unsafe {
        assert_eq!(sb_vector_new(idx.as_ptr(), val.as_ptr(), 2, &mut v), SbStatus::Ok);
        let mut n = 0.0;
        assert_eq!(sb_norm(sp, v, &mut n), SbStatus::Ok);
        assert_eq!(n, 5.0);
        sb_vector_free(v);
        sb_space_free(sp);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(sb_space_from_json(c(r#"{"kind":"lp","p":0.5}"#).as_ptr(), &mut out), SbStatus::InvalidSpec);
        assert!(last_error().contains("invalid space"));
        assert_eq!(sb_space_from_json(c("not json").as_ptr(), &mut out), SbStatus::Parse);
        assert_eq!(sb_space_from_json(ptr::null(), &mut out), SbStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(sb_space_from_json(bad.as_ptr().cast(), &mut out), SbStatus::Utf8);
        let mut v = ptr::null_mut();
        let idx = [0usize];
        let val = [1.0];
        assert_eq!(sb_vector_new(idx.as_ptr(), val.as_ptr(), 1, &mut v), SbStatus::InvalidInput);
    }
}

#[test]
fn blockings() {
    let mut f = ptr::null_mut();
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(sb_blocking_parse(c("1,2|4,5").as_ptr(), &mut f), SbStatus::Ok);
        assert_eq!(sb_blocking_parse(c("1|2|3|4,5").as_ptr(), &mut e), SbStatus::Ok);
        let mut yes = false;
        assert_eq!(sb_is_coarser(f, e, &mut yes), SbStatus::Ok);
        assert!(yes);
        assert_eq!(sb_is_coarser(e, f, &mut yes), SbStatus::Ok);
        assert!(!yes);
        let mut len = 0;
        assert_eq!(sb_blocking_len(e, &mut len), SbStatus::Ok);
        assert_eq!(len, 4);
        let mut count = 0;
        assert_eq!(sb_coarsenings_count(e, 2, &mut count), SbStatus::Ok);
        // sum over j of 2^j (2^(3-j) - 1)
        assert_eq!(count, 17);
        assert_eq!(sb_blocking_parse(c("2|1").as_ptr(), &mut f), SbStatus::InvalidInput);
        sb_blocking_free(e);
    }
}

#[test]
fn example_space_and_krivine() {
    let ps = [1.0, 1.5];
    let mut sp = ptr::null_mut();
    unsafe {
        assert_eq!(sb_make_example_space(2.0, ps.as_ptr(), 2, &mut sp), SbStatus::Ok);
        let mut w = false;
        assert_eq!(sb_type_p_witness(sp, 2, 2.0, &mut w), SbStatus::Ok);
        assert!(w);
        sb_space_free(sp);
        let c0 = space(r#"{"kind":"c0"}"#);
        let mut p = 0.0;
        assert_eq!(sb_krivine_p(c0, 16, 1, &mut p), SbStatus::Ok);
        assert!(p.is_infinite());
        assert_eq!(sb_krivine_p(c0, 2, 1, &mut p), SbStatus::InvalidInput);
        sb_space_free(c0);
    }
}

#[test]
fn run_command_matches_library() {
    let config = r#"{"command":{"name":"norm","vector":"1:1,2:1"},"space":{"kind":"lp","p":2},
        "net_step":0.25,"max_n":4,"horizon":null,"epsilon":null,"seed":0,"format":"json"}"#;
    let mut report = ptr::null_mut();
    let mut passed = -1;
    unsafe {
        assert_eq!(sb_run_command_json(c(config).as_ptr(), &mut report, &mut passed), SbStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        sb_string_free(report);
        assert_eq!(passed, 1);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((doc["result"]["norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let bad = r#"{"command":{"name":"norm","vector":"1:1"},"space":null,"net_step":0.25,"max_n":4,"seed":0,"format":"json"}"#;
        assert_eq!(sb_run_command_json(c(bad).as_ptr(), &mut report, &mut passed), SbStatus::InvalidInput);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(sb_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/spreadbench.h")).unwrap();
    for name in [
        "sb_space_from_json",
        "sb_make_example_space",
        "sb_space_free",
        "sb_vector_new",
        "sb_vector_parse",
        "sb_vector_free",
        "sb_norm",
        "sb_blocking_parse",
        "sb_blocking_free",
        "sb_blocking_len",
        "sb_is_coarser",
        "sb_coarsenings_count",
        "sb_type_p_witness",
        "sb_krivine_p",
        "sb_run_command_json",
        "sb_string_free",
        "sb_last_error",
        "sb_version",
        "typedef struct SbSpace SbSpace",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Directory holding the library artifacts of this build.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let dir = artifact_dir();
    let lib = dir.join("libspreadbench_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join(format!("spreadbench_smoke_{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
