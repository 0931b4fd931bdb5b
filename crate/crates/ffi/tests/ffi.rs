use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use sti_ffi::*;

fn last_error() -> String {
    let p = sti_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { sti_string_free(p) };
    s
}

fn parse(text: &str) -> *mut StiTerm {
    let c = CString::new(text).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { sti_term_parse(c.as_ptr(), &mut t) }, StiStatus::Ok);
    t
}

#[test]
fn example_end_to_end() {
    let t = parse("(\\x. x x) ((\\y. y) z)");
    assert_eq!(unsafe { sti_term_size(t) }, 9);

    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sti_infer(t, ptr::null(), &mut d) }, StiStatus::Ok);
    assert_eq!(unsafe { sti_derivation_check(d) }, StiStatus::Ok);

    let mut m = StiMeasures::default();
    assert_eq!(unsafe { sti_derivation_measures(d, &mut m) }, StiStatus::Ok);
    assert_eq!(
        (m.proof_size, m.subject_size, m.rank, m.degree),
        (15, 9, 2, 1)
    );

    let mut w = 0;
    assert_eq!(
        unsafe { sti_derivation_weight(d, 2, &mut w) },
        StiStatus::Ok
    );
    assert_eq!(w, 13);

    let mut r = StiBoundReport::default();
    assert_eq!(unsafe { sti_verify_bounds(d, 0, &mut r) }, StiStatus::Ok);
    assert!(r.passed);
    assert_eq!(
        (r.theorem_bound, r.longest_reduction, r.weight_ceiling),
        (81, 3, 13)
    );

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sti_derivation_subject(d, &mut s) }, StiStatus::Ok);
    assert_eq!(
        take_string(unsafe { sti_term_to_string(s) }),
        take_string(unsafe { sti_term_to_string(t) })
    );
    assert!(take_string(unsafe { sti_derivation_pretty(d) }).contains("⊢"));

    unsafe {
        sti_term_free(s);
        sti_derivation_free(d);
        sti_term_free(t);
    }
}

#[test]
fn json_roundtrip_and_check_failure() {
    let t = parse("\\x. x x");
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { sti_infer(t, ptr::null(), &mut d) }, StiStatus::Ok);
    let json = take_string(unsafe { sti_derivation_to_json(d) });

    let c = CString::new(json.clone()).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { sti_derivation_from_json(c.as_ptr(), &mut back) },
        StiStatus::Ok
    );
    assert_eq!(take_string(unsafe { sti_derivation_to_json(back) }), json);

    // well-formed, but the axiom concludes the wrong type
    let bad = CString::new(
        r#"{"rule": "ax", "ctx": [{"var": "x", "type": {"var": "a"}}], "term": "x",
            "type": {"var": "b"}, "premises": [], "data": {}}"#,
    )
    .unwrap();
    let mut broken = ptr::null_mut();
    assert_eq!(
        unsafe { sti_derivation_from_json(bad.as_ptr(), &mut broken) },
        StiStatus::CheckFailed
    );
    assert!(broken.is_null());
    assert!(last_error().contains("type should be a"));
    let junk = CString::new("{\"rule\": 1}").unwrap();
    assert_eq!(
        unsafe { sti_derivation_from_json(junk.as_ptr(), &mut broken) },
        StiStatus::ParseError
    );

    unsafe {
        sti_derivation_free(back);
        sti_derivation_free(d);
        sti_term_free(t);
    }
}

#[test]
fn error_codes_and_last_error() {
    sti_clear_error();
    assert!(sti_last_error().is_null());

    let mut t = ptr::null_mut();
    let c = CString::new("\\x.").unwrap();
    assert_eq!(
        unsafe { sti_term_parse(c.as_ptr(), &mut t) },
        StiStatus::ParseError
    );
    assert!(t.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { sti_term_parse(ptr::null(), &mut t) },
        StiStatus::NullPointer
    );
    assert_eq!(
        unsafe { sti_term_parse(c.as_ptr(), ptr::null_mut()) },
        StiStatus::NullPointer
    );
    let bad_utf8 = [0xffu8, 0];
    assert_eq!(
        unsafe { sti_term_parse(bad_utf8.as_ptr().cast(), &mut t) },
        StiStatus::InvalidUtf8
    );

    let omega = parse("(\\x. x x) (\\x. x x)");
    let mut b = sti_bounds_default();
    b.time_fuel = 2_000;
    let mut d = ptr::null_mut();
    assert_eq!(
        unsafe { sti_infer(omega, &b, &mut d) },
        StiStatus::Exhausted
    );
    assert!(d.is_null());
    assert!(last_error().contains("exhausted"));

    b.max_type_elements = 0;
    assert_eq!(
        unsafe { sti_infer(omega, &b, &mut d) },
        StiStatus::InvalidArgument
    );

    let mut m = StiMeasures::default();
    assert_eq!(
        unsafe { sti_derivation_measures(ptr::null(), &mut m) },
        StiStatus::NullPointer
    );
    assert!(unsafe { sti_derivation_to_json(ptr::null()) }.is_null());
    assert_eq!(unsafe { sti_term_size(ptr::null()) }, 0);

    unsafe {
        sti_term_free(omega);
        sti_term_free(ptr::null_mut());
        sti_derivation_free(ptr::null_mut());
        sti_string_free(ptr::null_mut());
    }
}

#[test]
fn last_error_is_thread_local() {
    let c = CString::new("(").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(
        unsafe { sti_term_parse(c.as_ptr(), &mut t) },
        StiStatus::ParseError
    );
    std::thread::spawn(|| assert!(sti_last_error().is_null()))
        .join()
        .unwrap();
    assert!(!sti_last_error().is_null());
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sti_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sti.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "sti_term_parse",
        "sti_infer",
        "sti_derivation_check",
        "sti_last_error",
        "sti_verify_bounds",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
