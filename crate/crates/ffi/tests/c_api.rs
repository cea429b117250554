use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use oeq_ffi::*;

fn owned(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { oeq_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(oeq_last_error()) }.to_str().unwrap().to_string()
}

fn poly(s: &str) -> *mut OeqPolynomial {
    let c = CString::new(s).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { oeq_polynomial_parse(c.as_ptr(), &mut p) }, OeqStatus::Ok);
    p
}

fn fixture(name: &str) -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn polynomial_arithmetic() {
    let (a, b) = (poly("x1 + 1/2*a1"), poly("x1 - 1/2*a1"));
    let mut prod = ptr::null_mut();
    assert_eq!(unsafe { oeq_polynomial_mul(a, b, &mut prod) }, OeqStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { oeq_polynomial_to_string(prod, &mut s) }, OeqStatus::Ok);
    let text = owned(s);
    let back = poly(&text);
    let expect = poly("x1^2 - 1/4*a1^2");
    let mut eq = 0;
    assert_eq!(unsafe { oeq_polynomial_equal(back, expect, &mut eq) }, OeqStatus::Ok);
    assert_eq!(eq, 1);
    let mut sum = ptr::null_mut();
    assert_eq!(unsafe { oeq_polynomial_add(a, b, &mut sum) }, OeqStatus::Ok);
    let mut s = ptr::null_mut();
    unsafe { oeq_polynomial_to_string(sum, &mut s) };
    assert_eq!(owned(s), "2*x1");
    for p in [a, b, prod, back, expect, sum] {
        unsafe { oeq_polynomial_free(p) };
    }
}

#[test]
fn status_codes() {
    let mut p = ptr::null_mut();
    let bad = CString::new("x1 +* 2").unwrap();
    assert_eq!(unsafe { oeq_polynomial_parse(bad.as_ptr(), &mut p) }, OeqStatus::ParseError);
    assert!(!last_error().is_empty());
    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { oeq_polynomial_parse(invalid.as_ptr() as *const c_char, &mut p) }, OeqStatus::InvalidUtf8);
    assert_eq!(unsafe { oeq_polynomial_to_string(ptr::null(), ptr::null_mut()) }, OeqStatus::NullArgument);

    // x1^2*x2^2 is not an isolated singularity
    let q = poly("x1^2*x2^2");
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { oeq_potential_new(q, &mut v) }, OeqStatus::InvalidInput);
    assert!(v.is_null());
    unsafe { oeq_polynomial_free(q) };

    let good = CString::new("x1").unwrap();
    assert_eq!(unsafe { oeq_polynomial_parse(good.as_ptr(), &mut p) }, OeqStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe {
        oeq_polynomial_free(p);
        oeq_polynomial_free(ptr::null_mut());
        oeq_potential_free(ptr::null_mut());
        oeq_defect_free(ptr::null_mut());
        oeq_string_free(ptr::null_mut());
    }
}

#[test]
fn potentials() {
    let (name, prefix) = (CString::new("E13").unwrap(), CString::new("x").unwrap());
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { oeq_potential_resolve(name.as_ptr(), prefix.as_ptr(), &mut v) }, OeqStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { oeq_potential_central_charge(v, &mut s) }, OeqStatus::Ok);
    assert_eq!(owned(s), "16/15");
    let mut mu = 0usize;
    assert_eq!(unsafe { oeq_potential_milnor(v, &mut mu) }, OeqStatus::Ok);
    assert_eq!(mu, 13);
    unsafe { oeq_potential_free(v) };
}

#[test]
fn defect_round_trip() {
    let json = fixture("appendix4_s11_w13.json");
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { oeq_defect_from_json(json.as_ptr(), &mut d) }, OeqStatus::Ok);
    let (mut ql, mut qr) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { oeq_defect_qdim(d, 0.0, &mut ql, &mut qr) }, OeqStatus::Ok);
    assert_eq!((owned(ql), owned(qr)), ("-2".to_string(), "-1".to_string()));
    let (mut ok, mut report) = (0, ptr::null_mut());
    assert_eq!(unsafe { oeq_defect_verify(d, 60.0, &mut ok, &mut report) }, OeqStatus::Ok);
    assert_eq!(ok, 1);
    assert!(owned(report).contains("\"mf_ok\": true"));
    unsafe { oeq_defect_free(d) };

    let broken = CString::new("{\"name\": 1}").unwrap();
    assert_eq!(unsafe { oeq_defect_from_json(broken.as_ptr(), &mut d) }, OeqStatus::ParseError);
}

#[test]
fn search_and_obstruction() {
    let resolve = |s: &str, pre: &str| {
        let (s, pre) = (CString::new(s).unwrap(), CString::new(pre).unwrap());
        let mut v = ptr::null_mut();
        assert_eq!(unsafe { oeq_potential_resolve(s.as_ptr(), pre.as_ptr(), &mut v) }, OeqStatus::Ok);
        v
    };
    let (a5, a2a2, a3) = (resolve("A5", "x"), resolve("A2xA2", "y"), resolve("A3", "y"));
    let (mut verdict, mut report) = (-1, ptr::null_mut());
    assert_eq!(unsafe { oeq_search(a5, a2a2, 2, 120.0, &mut verdict, &mut report) }, OeqStatus::Ok);
    assert_eq!(verdict, 0);
    assert!(owned(report).contains("\"Solvable\""));

    let a2 = resolve("A2", "x");
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { oeq_search(a2, a3, 1, 10.0, &mut verdict, &mut report) }, OeqStatus::Obstructed);
    assert_eq!(verdict, 1);
    assert!(owned(report).contains("CentralCharge"));
    for v in [a5, a2a2, a3, a2] {
        unsafe { oeq_potential_free(v) };
    }
}

/// Compiles a small C program against the generated header and the static
/// library.
#[test]
fn c_program_links() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("liboeq_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("c_program_links: no C compiler or static library, not run");
        return;
    }
    let tmp = tempdir();
    let src = tmp.join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "oeq.h"

int main(void) {
    OeqPolynomial *p = NULL;
    OeqPotential *v = NULL;
    size_t mu = 0;
    char *c = NULL;
    if (oeq_polynomial_parse("x1^3 + x2^4", &p) != OEQ_STATUS_OK) return 1;
    if (oeq_potential_new(p, &v) != OEQ_STATUS_OK) return 2;
    if (oeq_potential_milnor(v, &mu) != OEQ_STATUS_OK || mu != 6) return 3;
    if (oeq_potential_central_charge(v, &c) != OEQ_STATUS_OK) return 4;
    printf("%s\n", c);
    oeq_string_free(c);
    oeq_polynomial_free(p);
    if (oeq_polynomial_parse("x1^", &p) != OEQ_STATUS_PARSE_ERROR) return 5;
    if (strlen(oeq_last_error()) == 0) return 6;
    oeq_potential_free(v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.join("smoke");
    let out = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "5/6");
    let _ = std::fs::remove_dir_all(&tmp);
}

fn tempdir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("oeq-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
