#![allow(clippy::excessive_precision)]

use std::ffi::{CStr, CString};
use std::ptr;

use nbcss_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nbcss_last_error()) }.to_string_lossy().into_owned()
}

fn example_code(seed: u64) -> *mut NbcssCode {
    let mut code = ptr::null_mut();
    let st = unsafe { nbcss_code_construct(4, 0, 6, 7, 2, 3, seed, true, &mut code) };
    assert_eq!(st, NbcssStatus::Ok, "{}", last_error());
    assert!(!code.is_null());
    code
}

#[test]
fn construct_dims_verify() {
    let code = example_code(1);
    let mut dims = NbcssDims::default();
    unsafe {
        assert_eq!(nbcss_code_dims(code, &mut dims), NbcssStatus::Ok);
        assert_eq!((dims.p, dims.n_checks, dims.n_symbols, dims.n_qubits), (4, 14, 42, 168));
        assert!((dims.quantum_rate - 1.0 / 3.0).abs() < 1e-12);
        let mut ok = false;
        assert_eq!(nbcss_code_verify(code, &mut ok), NbcssStatus::Ok);
        assert!(ok);
        nbcss_code_free(code);
    }
}

#[test]
fn invalid_parameters_report_status_and_message() {
    let mut code = ptr::null_mut();
    let st = unsafe { nbcss_code_construct(4, 0, 6, 7, 2, 4, 1, false, &mut code) };
    assert_eq!(st, NbcssStatus::InvalidParams);
    assert!(code.is_null());
    assert!(!last_error().is_empty());
    let st = unsafe { nbcss_code_construct(1, 0, 6, 7, 2, 3, 1, false, &mut code) };
    assert_eq!(st, NbcssStatus::InvalidParams);
    let st = unsafe { nbcss_code_construct(4, 0, 6, 7, 2, 3, 1, false, ptr::null_mut()) };
    assert_eq!(st, NbcssStatus::InvalidArgument);
}

#[test]
fn syndrome_and_decode_roundtrip() {
    let code = example_code(2);
    let mut e = vec![0u16; 42];
    e[11] = 0b0100;
    let mut s = vec![0u16; 14];
    unsafe {
        assert_eq!(nbcss_code_syndrome(code, NbcssRole::D, e.as_ptr(), 42, s.as_mut_ptr(), 14), NbcssStatus::Ok);
        assert!(s.iter().any(|&x| x != 0));
        assert_eq!(
            nbcss_code_syndrome(code, NbcssRole::D, e.as_ptr(), 41, s.as_mut_ptr(), 14),
            NbcssStatus::DimensionMismatch
        );
        let mut dec = ptr::null_mut();
        assert_eq!(nbcss_decoder_new(code, NbcssRole::D, 32, &mut dec), NbcssStatus::Ok);
        nbcss_code_free(code);
        let mut est = vec![0u16; 42];
        let mut res = NbcssDecodeResult::default();
        assert_eq!(nbcss_decoder_decode(dec, s.as_ptr(), 14, 0.01, est.as_mut_ptr(), 42, &mut res), NbcssStatus::Ok);
        assert!(res.success);
        assert_eq!(est, e);
        assert_eq!(
            nbcss_decoder_decode(dec, s.as_ptr(), 14, 0.7, est.as_mut_ptr(), 42, &mut res),
            NbcssStatus::DomainError
        );
        nbcss_decoder_free(dec);
    }
}

#[test]
fn save_load_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = CString::new(dir.path().join("x").to_str().unwrap()).unwrap();
    let code = example_code(3);
    unsafe {
        assert_eq!(nbcss_code_save(code, prefix.as_ptr()), NbcssStatus::Ok);
        let g = CString::new(dir.path().join("x.gamma.nbqc").to_str().unwrap()).unwrap();
        let d = CString::new(dir.path().join("x.delta.nbqc").to_str().unwrap()).unwrap();
        let mut loaded = ptr::null_mut();
        assert_eq!(nbcss_code_load(g.as_ptr(), d.as_ptr(), &mut loaded), NbcssStatus::Ok);
        let missing = CString::new("/nonexistent/x.nbqc").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(nbcss_code_load(missing.as_ptr(), d.as_ptr(), &mut none), NbcssStatus::IoError);

        let mut a = [NbcssSimRecord::default(); 2];
        let mut b = [NbcssSimRecord::default(); 2];
        assert_eq!(nbcss_simulate(code, 0.04, 200, 32, 9, NbcssChannelMode::Joint, false, 1, a.as_mut_ptr()), NbcssStatus::Ok);
        assert_eq!(nbcss_simulate(loaded, 0.04, 200, 32, 9, NbcssChannelMode::Joint, false, 3, b.as_mut_ptr()), NbcssStatus::Ok);
        assert_eq!(a, b);
        assert_eq!((a[0].role, a[1].role), (0, 1));
        for r in a {
            assert_eq!(r.block_errors, r.fail_count + r.mismatch_count);
            assert_eq!(r.trials, 200);
        }
        nbcss_code_free(code);
        nbcss_code_free(loaded);
    }
}

#[test]
fn limits_and_version() {
    let mut l = NbcssLimits::default();
    unsafe {
        assert_eq!(nbcss_limits(0.05, &mut l), NbcssStatus::Ok);
        assert!((l.s2 - 0.427206085768087742).abs() < 1e-12);
        assert_eq!(nbcss_limits(0.5, &mut l), NbcssStatus::DomainError);
        assert!(last_error().contains("f_m"));
        let v = CStr::from_ptr(nbcss_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
