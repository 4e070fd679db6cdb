use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sop_ffi::*;

fn last_error() -> String {
    let p = sop_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const SCHEDULE: &str = "\
sop-schedule 1
depot 0 0
travel derive-euclidean 1.5 20
windows 2
window 0 28800 32400
window 1 32400 36000
orders 1
order 1 1000 0 5 300 0
tours 1
tour 0 27000 66600 10 : 1
end
";

fn parse(text: &str) -> *mut SopSchedule {
    let c = CString::new(text).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sop_schedule_parse(c.as_ptr(), &mut h) }, SopStatus::Ok);
    assert!(!h.is_null());
    h
}

fn order(id: u32, weight: u32) -> SopOrder {
    SopOrder {
        id,
        x: 0,
        y: 1000,
        weight,
        service: 300,
    }
}

#[test]
fn parse_solve_commit_write() {
    let h = parse(SCHEDULE);
    unsafe {
        assert_eq!(sop_schedule_window_count(h), 2);
        assert_eq!(sop_schedule_tour_count(h), 1);
        let mut v = [SopVerdict::Undecided; 2];
        let mut n = 0;
        let o = order(2, 5);
        assert_eq!(sop_solve(h, &o, SopMethod::Simple, v.as_mut_ptr(), 2, &mut n), SopStatus::Ok);
        assert_eq!(v, [SopVerdict::Available; 2]);
        assert_eq!(n, 2);

        assert_eq!(sop_schedule_commit(h, &o, SopMethod::Tsptw, 1), SopStatus::Ok);
        assert_eq!(sop_schedule_order_count(h), 2);
        // Capacity 10 is now used up.
        let o3 = order(3, 1);
        assert_eq!(sop_solve(h, &o3, SopMethod::Ans, v.as_mut_ptr(), 2, &mut n), SopStatus::Ok);
        assert_eq!(n, 0);
        assert_eq!(sop_schedule_commit(h, &o3, SopMethod::Ans, 0), SopStatus::Unavailable);
        assert_eq!(sop_schedule_order_count(h), 2);

        let mut need = 0;
        assert_eq!(sop_schedule_write(h, ptr::null_mut(), 0, &mut need), SopStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; need];
        assert_eq!(sop_schedule_write(h, buf.as_mut_ptr(), need, &mut need), SopStatus::Ok);
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert!(text.contains("tour 0 27000 66600 10 : 1 2\n"), "{text}");
        sop_schedule_free(h);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let h = parse(SCHEDULE);
    unsafe {
        let mut v = [SopVerdict::Unavailable; 2];
        let dup = order(1, 1);
        assert_eq!(sop_solve(h, &dup, SopMethod::Simple, v.as_mut_ptr(), 2, ptr::null_mut()), SopStatus::InvalidOrder);
        assert!(last_error().contains("already scheduled"));
        assert_eq!(
            sop_solve(h, &order(9, 1), SopMethod::Simple, v.as_mut_ptr(), 1, ptr::null_mut()),
            SopStatus::BufferTooSmall
        );
        assert_eq!(
            sop_solve(ptr::null(), &order(9, 1), SopMethod::Simple, v.as_mut_ptr(), 2, ptr::null_mut()),
            SopStatus::NullArgument
        );
        assert_eq!(sop_schedule_commit(h, &order(9, 1), SopMethod::Simple, 7), SopStatus::InvalidOrder);
        assert!(last_error().contains("unknown window"));

        let bad = CString::new("sop-schedule 2\nend\n").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(sop_schedule_parse(bad.as_ptr(), &mut out), SopStatus::Parse);
        assert!(out.is_null());
        assert!(last_error().contains("version 2"));

        let params = SopGenParams {
            seed: 1,
            pool_size: 10,
            vehicles: 0,
            setup: SopSetup::II,
            optimized: false,
            fill: 0.5,
        };
        assert_eq!(sop_schedule_generate(&params, &mut out), SopStatus::InvalidArgument);
        sop_schedule_free(ptr::null_mut());
        sop_schedule_free(h);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/sop_ffi.h");
    for f in [
        "sop_last_error",
        "sop_version",
        "sop_schedule_parse",
        "sop_schedule_generate",
        "sop_schedule_free",
        "sop_schedule_window_count",
        "sop_schedule_order_count",
        "sop_schedule_tour_count",
        "sop_solve",
        "sop_schedule_commit",
        "sop_schedule_write",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct SopSchedule SopSchedule;"));
    assert!(header.contains("SOP_STATUS_OK = 0"));
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsop_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out = tempfile_path("sop_ffi_smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("windows=10 "), "{stdout}");
    let _ = std::fs::remove_file(&out);
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
