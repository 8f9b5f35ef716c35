use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use goldmitch_ffi::*;

fn default_divider() -> *mut GmDivider {
    let cfg = gm_config_default();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { gm_divider_new(&cfg, &mut d) }, GmStatus::Ok);
    assert!(!d.is_null());
    d
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { gm_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn default_config_values() {
    let c = gm_config_default();
    assert_eq!(
        (
            c.width_dividend,
            c.width_divisor,
            c.extension,
            c.width_quo,
            c.width_fra,
            c.iterations
        ),
        (32, 32, 32, 32, 33, 4)
    );
    assert_eq!(c.strategy, GmStrategy::MitchellCorrected as u32);
}

#[test]
fn divide_matches_core() {
    let d = default_divider();
    let mut q = GmQuotient::default();
    assert_eq!(unsafe { gm_divide(d, 53, 11, &mut q) }, GmStatus::Ok);
    let cfg = goldmitch::DividerConfig::default();
    let core =
        goldmitch::divide(cfg.dividend(53).unwrap(), cfg.divisor(11).unwrap(), &cfg).unwrap();
    assert!(!q.negative);
    assert_eq!(q.int_part, 4);
    assert_eq!(q.frac_bits, 32);
    assert_eq!(u64::try_from(&core.frac_part).unwrap(), q.frac_part);
    assert!((gm_quotient_to_f64(q) - core.to_f64()).abs() < 1e-12);

    assert_eq!(unsafe { gm_divide(d, -17, 35, &mut q) }, GmStatus::Ok);
    assert!(q.negative);
    assert!((gm_quotient_to_f64(q) + 0.4868).abs() < 1e-4);
    unsafe { gm_divider_free(d) };
}

#[test]
fn cycles_and_simulator() {
    let d = default_divider();
    let mut q = GmQuotient::default();
    let mut n = 0u32;
    assert_eq!(
        unsafe { gm_run_cycles(d, 2741, 67, &mut q, &mut n) },
        GmStatus::Ok
    );
    assert_eq!(n, 11);
    let mut direct = GmQuotient::default();
    assert_eq!(unsafe { gm_divide(d, 2741, 67, &mut direct) }, GmStatus::Ok);
    assert_eq!(q, direct);

    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { gm_simulator_new(d, &mut sim) }, GmStatus::Ok);
    let mut out = GmQuotient::default();
    assert_eq!(
        unsafe { gm_simulator_output(sim, &mut out) },
        GmStatus::NotReady
    );
    let mut states = Vec::new();
    let mut cycle = GmCycle {
        cycle: 0,
        state: GmFsmState::Idle,
        iteration: 0,
        en: 0,
        start: false,
    };
    for _ in 0..11 {
        assert_eq!(
            unsafe { gm_simulator_clock(sim, 2741, 67, &mut cycle) },
            GmStatus::Ok
        );
        states.push((cycle.state, cycle.iteration, cycle.en));
    }
    assert_eq!(states[0], (GmFsmState::Idle, 0, 0));
    assert_eq!(states[1], (GmFsmState::Sign, 0, 0b0001));
    assert_eq!(states[8], (GmFsmState::Coeff, 4, 0b0010));
    assert_eq!(states[10], (GmFsmState::Out, 0, 0b1000));
    assert_eq!(unsafe { gm_simulator_output(sim, &mut out) }, GmStatus::Ok);
    assert_eq!(out, direct);
    unsafe {
        gm_simulator_free(sim);
        gm_divider_free(d);
    }
}

#[test]
fn error_codes() {
    let d = default_divider();
    let mut q = GmQuotient::default();
    assert_eq!(unsafe { gm_divide(d, 5, 0, &mut q) }, GmStatus::ZeroDivisor);
    assert!(last_error().contains("divisor is zero"));
    assert_eq!(
        unsafe { gm_divide(d, 1 << 40, 3, &mut q) },
        GmStatus::OutOfRange
    );
    assert_eq!(
        unsafe { gm_divide(ptr::null(), 1, 3, &mut q) },
        GmStatus::NullPointer
    );
    assert_eq!(
        unsafe { gm_divide(d, 1, 3, ptr::null_mut()) },
        GmStatus::NullPointer
    );
    assert_eq!(last_error(), "out is null");

    let mut narrow = gm_config_default();
    narrow.width_quo = 4;
    let mut n = ptr::null_mut();
    assert_eq!(unsafe { gm_divider_new(&narrow, &mut n) }, GmStatus::Ok);
    assert_eq!(unsafe { gm_divide(n, 1000, 3, &mut q) }, GmStatus::Overflow);

    let mut bad = gm_config_default();
    bad.strategy = 9;
    let mut b = ptr::null_mut();
    assert_eq!(
        unsafe { gm_divider_new(&bad, &mut b) },
        GmStatus::InvalidConfig
    );
    assert!(b.is_null());
    bad = gm_config_default();
    bad.iterations = 0;
    assert_eq!(
        unsafe { gm_divider_new(&bad, &mut b) },
        GmStatus::InvalidConfig
    );

    // 65 fraction bits of 2/3 do not fit a uint64_t
    let mut wide = gm_config_default();
    wide.width_fra = 66;
    wide.extension = 70;
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { gm_divider_new(&wide, &mut w) }, GmStatus::Ok);
    assert_eq!(unsafe { gm_divide(w, 2, 3, &mut q) }, GmStatus::OutOfRange);

    unsafe {
        gm_divider_free(d);
        gm_divider_free(n);
        gm_divider_free(w);
        gm_divider_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    let d = default_divider();
    let mut q = GmQuotient::default();
    assert_eq!(unsafe { gm_divide(d, 5, 0, &mut q) }, GmStatus::ZeroDivisor);
    let mut buf = [0x7f as std::ffi::c_char; 8];
    let full = unsafe { gm_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(full > 8);
    assert_eq!(buf[7], 0);
    assert_eq!(unsafe { gm_last_error(ptr::null_mut(), 0) }, full);
    unsafe { gm_divider_free(d) };
}

#[test]
fn status_names() {
    let name = |s| {
        unsafe { CStr::from_ptr(gm_status_name(s)) }
            .to_str()
            .unwrap()
    };
    assert_eq!(name(GmStatus::Ok), "OK");
    assert_eq!(name(GmStatus::ZeroDivisor), "ZERO_DIVISOR");
    assert_eq!(name(GmStatus::NotReady), "NOT_READY");
}

/// Builds tests/c/smoke.c against the generated header and the static
/// library, when a C compiler is around.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/goldmitch.h");
    assert!(header.exists(), "header not generated");
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap();
    let lib = target_dir.join("libgoldmitch_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("goldmitch-smoke-{}", std::process::id()));
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{:?}", run.status);
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("53/11 0 4 "), "{text}");
    assert!(text.contains("cycles 11"), "{text}");
    assert!(
        text.contains("ZERO_DIVISOR: invalid computation: divisor is zero"),
        "{text}"
    );
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
