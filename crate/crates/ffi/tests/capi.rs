use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use tepkit::fixtures;
use tepkit::instance::serialize_instance;
use tepkit_ffi::*;

fn load(json: &str) -> *mut TepInstance {
    let text = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    let st = unsafe { tep_instance_load_json(text.as_ptr(), &mut inst) };
    assert_eq!(st, TepStatus::Ok);
    assert!(!inst.is_null());
    inst
}

fn last_error() -> String {
    let p = tep_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn t2_dispatch_through_the_c_abi() {
    let inst = load(&serialize_instance(&fixtures::t2()));
    let (mut buses, mut cands, mut scen) = (0, 0, 0);
    assert_eq!(unsafe { tep_instance_sizes(inst, &mut buses, &mut cands, &mut scen) }, TepStatus::Ok);
    assert_eq!((buses, cands, scen), (2, 1, 1));

    let mut ids = [0usize; 4];
    let mut len = 0;
    assert_eq!(unsafe { tep_instance_candidates(inst, ids.as_mut_ptr(), 4, &mut len) }, TepStatus::Ok);
    assert_eq!(&ids[..len], &[1]);

    let (mut obj, mut viol) = (0.0, 0.0);
    assert_eq!(unsafe { tep_solve_lp(inst, 0, ids.as_ptr(), 1, 100.0, &mut obj, &mut viol) }, TepStatus::Ok);
    assert!((obj - 50.0).abs() < 1e-6 && viol.abs() < 1e-9);
    assert_eq!(unsafe { tep_solve_lp(inst, 0, ptr::null(), 0, 100.0, &mut obj, &mut viol) }, TepStatus::Ok);
    assert!((obj - 2050.0).abs() < 1e-6 && (viol - 20.0).abs() < 1e-6);

    let (mut cost, mut repaired) = (0.0, 0);
    assert_eq!(unsafe { tep_evaluate_plan(inst, ptr::null(), 0, 100.0, &mut cost, &mut repaired) }, TepStatus::Ok);
    assert_eq!(repaired, 1);
    assert!((cost - 60.0).abs() < 1e-6);

    let (mut ub, mut lb, mut optimal) = (0.0, 0.0, 0);
    let st = unsafe { tep_solve_bnb(inst, 0.0, ids.as_mut_ptr(), 4, &mut len, &mut ub, &mut lb, &mut optimal) };
    assert_eq!(st, TepStatus::Ok);
    assert_eq!((len, ids[0], optimal), (1, 1, 1));
    assert!((ub - 60.0).abs() < 1e-6);
    unsafe { tep_instance_free(inst) };
}

#[test]
fn errors_set_status_and_message() {
    let mut inst = ptr::null_mut();
    let bad = CString::new("{ not json").unwrap();
    assert_eq!(unsafe { tep_instance_load_json(bad.as_ptr(), &mut inst) }, TepStatus::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("line 1"));

    assert_eq!(unsafe { tep_instance_load_json(ptr::null(), &mut inst) }, TepStatus::NullPointer);
    assert!(last_error().contains("NULL"));

    let inst = load(&serialize_instance(&fixtures::t2()));
    let unknown = [0usize];
    let (mut obj, mut viol) = (0.0, 0.0);
    let st = unsafe { tep_solve_lp(inst, 0, unknown.as_ptr(), 1, 1.0, &mut obj, &mut viol) };
    assert_eq!(st, TepStatus::InvalidArgument);
    assert_eq!(unsafe { tep_solve_lp(inst, 7, ptr::null(), 0, 1.0, &mut obj, &mut viol) }, TepStatus::InvalidArgument);

    let mut len = 0;
    let st = unsafe { tep_instance_candidates(inst, ptr::null_mut(), 0, &mut len) };
    assert_eq!((st, len), (TepStatus::BufferTooSmall, 1));
    unsafe { tep_instance_free(inst) };
    unsafe { tep_instance_free(ptr::null_mut()) };
}

#[test]
fn decomposition_runs() {
    let inst = load(&serialize_instance(&fixtures::g6()));
    let mut opts = std::mem::MaybeUninit::<TepPhOptions>::uninit();
    assert_eq!(unsafe { tep_ph_options_default(opts.as_mut_ptr()) }, TepStatus::Ok);
    let mut opts = unsafe { opts.assume_init() };
    assert_eq!(opts.beta, 0.25);
    opts.max_iterations = 2;

    let mut ph = ptr::null_mut();
    assert_eq!(unsafe { tep_run_ph(inst, &opts, &mut ph) }, TepStatus::Ok);
    let mut ba = ptr::null_mut();
    assert_eq!(unsafe { tep_run_baseline(inst, &opts, &mut ba) }, TepStatus::Ok);

    let (mut c_ph, mut c_ba, mut iters) = (0.0, 0.0, 0);
    assert_eq!(unsafe { tep_result_summary(ph, &mut c_ph, &mut iters) }, TepStatus::Ok);
    assert_eq!(iters, 2);
    assert_eq!(unsafe { tep_result_summary(ba, &mut c_ba, &mut iters) }, TepStatus::Ok);
    assert!(c_ph <= c_ba + 1e-9);

    let mut plan = [0usize; 32];
    let mut len = 0;
    assert_eq!(unsafe { tep_result_plan(ph, plan.as_mut_ptr(), plan.len(), &mut len) }, TepStatus::Ok);
    assert!(len <= 14);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { tep_result_json(ph, &mut json) }, TepStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"penalized_cost\""));
    unsafe {
        tep_string_free(json);
        tep_result_free(ph);
        tep_result_free(ba);
        tep_instance_free(inst);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(tep_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("tepkit.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in [
        "tep_last_error",
        "tep_instance_load_json",
        "tep_instance_free",
        "tep_solve_lp",
        "tep_solve_bnb",
        "tep_run_ph",
        "tep_result_json",
        "tep_string_free",
        "TEP_STATUS_BUFFER_TOO_SMALL",
        "typedef struct TepInstance TepInstance",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // Syntax-check with the system C compiler when one is installed.
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"tepkit.h\"\nint main(void) { TepPhOptions o; return tep_ph_options_default(&o) != TEP_STATUS_OK; }\n")
        .unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-I").arg(header.parent().unwrap()).arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipped the syntax check"),
    }
}
