use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use operadforge_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(of_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn lie_handle_reports_homology() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { of_lie(4, OfField::Q, &mut h) }, OfStatus::Ok);
    let (mut arity, mut rank) = (0usize, 0usize);
    unsafe {
        assert_eq!(of_complex_arity(h, &mut arity), OfStatus::Ok);
        assert_eq!(of_complex_homology(h, 3, &mut rank), OfStatus::Ok);
    }
    assert_eq!((arity, rank), (4, 6));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { of_complex_homology_json(h, &mut s) }, OfStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(s) }.to_str().unwrap(), r#"{"3":6}"#);
    unsafe {
        of_string_free(s);
        of_complex_free(h);
    }
}

#[test]
fn smash_powers_over_f2() {
    let space = CString::new("s2").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { of_smash_power(space.as_ptr(), 3, OfSphereModel::Min, OfField::F2, &mut h) }, OfStatus::Ok);
    let mut d = 0;
    assert_eq!(unsafe { of_complex_homology(h, 6, &mut d) }, OfStatus::Ok);
    assert_eq!(d, 1);
    unsafe { of_complex_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { of_lie(3, OfField::Q, ptr::null_mut()) }, OfStatus::NullPointer);
    let bad = CString::new("torus").unwrap();
    assert_eq!(unsafe { of_smash_power(bad.as_ptr(), 2, OfSphereModel::Min, OfField::Q, &mut h) }, OfStatus::InvalidArgument);
    assert!(last_error().contains("torus"));
    assert!(h.is_null());
    let id = CString::new("no-such-check").unwrap();
    assert_eq!(unsafe { of_verify(id.as_ptr(), OfField::Q, 0, ptr::null_mut()) }, OfStatus::UnknownCheck);
    unsafe { of_complex_free(ptr::null_mut()) };
}

#[test]
fn verify_returns_a_report() {
    let id = CString::new("epi-mono").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { of_verify(id.as_ptr(), OfField::F3, 7, &mut s) }, OfStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["field"], "f3");
    assert_eq!(report["seed"], 7);
    unsafe { of_string_free(s) };
}

fn static_lib() -> Option<PathBuf> {
    // tests/ lives beside the crate; the library sits in the profile directory of the test binary
    let exe = std::env::current_exe().ok()?;
    let profile = exe.parent()?.parent()?;
    let lib = profile.join("liboperadforge_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/operadforge.h");
    assert!(std::fs::read_to_string(&header).unwrap().contains("of_verify"));
    let Some(lib) = static_lib() else {
        panic!("static library not built next to {:?}", std::env::current_exe());
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "operadforge.h"
int main(void) {
    OfComplex *h = NULL;
    size_t r = 0;
    if (of_lie(5, OF_FIELD_Q, &h) != OF_STATUS_OK) return 1;
    if (of_complex_homology(h, 4, &r) != OF_STATUS_OK) return 2;
    of_complex_free(h);
    printf("%zu\n", r);
    return r == 24 ? 0 : 3;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "24");
}
