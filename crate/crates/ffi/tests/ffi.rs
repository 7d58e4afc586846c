use fwlab::conditions::{gamma_lower_bound, s_necessary};
use fwlab::measures::{build_cantor_product_centered, write_measure_json};
use fwlab_ffi::*;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

fn cantor(ratio: f64, depth: usize, n: usize) -> *mut FwMeasure {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fw_measure_cantor(ratio, depth, n, 1, &mut m) }, FwStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = fw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn cantor_handle_matches_core() {
    let m = cantor(0.25, 4, 2);
    let reference = build_cantor_product_centered(0.25, 4, 2).unwrap();
    let (mut len, mut dim, mut mass) = (0usize, 0usize, 0.0f64);
    unsafe {
        assert_eq!(fw_measure_len(m, &mut len), FwStatus::Ok);
        assert_eq!(fw_measure_dim(m, &mut dim), FwStatus::Ok);
        assert_eq!(fw_measure_total_mass(m, &mut mass), FwStatus::Ok);
    }
    assert_eq!((len, dim), (256, 2));
    assert!((mass - reference.total_mass()).abs() < 1e-15);

    let xi = [0.0, 0.0, 3.0, -1.5, 10.0, 7.0];
    let mut real = [0.0; 3];
    let mut complex = [0.0; 6];
    unsafe {
        assert_eq!(fw_measure_ft(m, xi.as_ptr(), 3, real.as_mut_ptr()), FwStatus::Ok);
        assert_eq!(fw_measure_ft_complex(m, xi.as_ptr(), 3, complex.as_mut_ptr()), FwStatus::Ok);
    }
    let expected = fwlab::fourier::measure_ft(&reference, &xi).unwrap();
    for i in 0..3 {
        assert!((real[i] - expected[i]).abs() < 1e-12);
        assert!((complex[2 * i] - expected[i]).abs() < 1e-12);
        assert!(complex[2 * i + 1].abs() < 1e-12);
    }
    assert!((real[0] - mass).abs() < 1e-12);
    unsafe { fw_measure_free(m) };
}

#[test]
fn scalar_queries_match_core() {
    let line = cantor(1.0 / 3.0, 6, 1);
    let plane = cantor(0.25, 4, 2);
    let alpha = 2f64.ln() / 3f64.ln();
    let (mut frostman, mut decay, mut distance) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(fw_frostman_constant(line, alpha, 1e-3, &mut frostman), FwStatus::Ok);
        assert_eq!(fw_distance_set_measure(plane, 1e-2, &mut distance), FwStatus::Ok);
        fw_measure_free(line);
        fw_measure_free(plane);
    }
    let line_ref = build_cantor_product_centered(1.0 / 3.0, 6, 1).unwrap();
    let expected = fwlab::measures::frostman_constant(&line_ref, alpha, 1e-3).unwrap().constant_estimate;
    assert_eq!(frostman, expected);
    let plane_ref = build_cantor_product_centered(0.25, 4, 2).unwrap();
    assert_eq!(distance, fwlab::distance::distance_set_measure(&plane_ref, 1e-2).unwrap());
    assert!(distance > 0.0);

    let circle = {
        let mut c = ptr::null_mut();
        assert_eq!(unsafe { fw_measure_sphere(1.0, 2, 2048, &mut c) }, FwStatus::Ok);
        c
    };
    unsafe {
        assert_eq!(fw_sphere_decay(circle, 16.0, 32, &mut decay), FwStatus::Ok);
        fw_measure_free(circle);
    }
    let reference = fwlab::measures::build_sphere_measure(1.0, 2, 2048).unwrap();
    let expected = fwlab::norms::sphere_decay_norm(&reference, 16.0, 32).unwrap();
    assert!((decay - expected).abs() <= 1e-12 * expected.abs().max(1.0));

    let (mut s, mut g) = (0.0, 0.0);
    unsafe {
        assert_eq!(fw_s_necessary(1.5, 2.0, 2, &mut s), FwStatus::Ok);
        assert_eq!(fw_gamma_lower_bound(0.5, 2, &mut g), FwStatus::Ok);
    }
    assert_eq!(s, s_necessary(1.5, 2.0, 2).unwrap());
    assert_eq!(g, gamma_lower_bound(0.5, 2).unwrap().value);
}

#[test]
fn json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.json");
    let reference = build_cantor_product_centered(0.25, 3, 2).unwrap();
    write_measure_json(&reference, &path).unwrap();
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    let mut len = 0usize;
    unsafe {
        assert_eq!(fw_measure_from_json(c_path.as_ptr(), &mut m), FwStatus::Ok);
        assert_eq!(fw_measure_len(m, &mut len), FwStatus::Ok);
        fw_measure_free(m);
    }
    assert_eq!(len, reference.len());

    let missing = CString::new(dir.path().join("absent.json").to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fw_measure_from_json(missing.as_ptr(), &mut m) }, FwStatus::Io);
    assert!(m.is_null());
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fw_measure_cantor(0.75, 3, 2, 1, &mut m) }, FwStatus::Parameter);
    assert!(m.is_null());
    assert!(!last_error().is_empty());

    let mut out = 0.0;
    assert_eq!(unsafe { fw_measure_total_mass(ptr::null(), &mut out) }, FwStatus::NullPointer);
    assert!(last_error().contains("null"));

    let h = cantor(0.25, 2, 2);
    assert_eq!(unsafe { fw_measure_total_mass(h, ptr::null_mut()) }, FwStatus::NullPointer);
    unsafe {
        fw_measure_free(h);
        fw_measure_free(ptr::null_mut());
        fw_string_free(ptr::null_mut());
    }

    let mut s = 0.0;
    assert_ne!(unsafe { fw_s_necessary(1.0, 0.5, 2, &mut s) }, FwStatus::Ok);
}

#[test]
fn runs_an_experiment_from_json() {
    let config = CString::new(r#"{"experiment": "falconer-lattice-sweep", "sweep": {"q": [8, 16]}}"#).unwrap();
    let mut json = ptr::null_mut();
    let mut passed = 0;
    assert_eq!(unsafe { fw_run_experiment(config.as_ptr(), &mut json, &mut passed) }, FwStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { fw_string_free(json) };
    let record: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(record["experiment"], "falconer-lattice-sweep");
    assert_eq!(passed, 1);

    let bad = CString::new(r#"{"experiment": "gamma-fit", "colour": 1}"#).unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { fw_run_experiment(bad.as_ptr(), &mut json, &mut passed) }, FwStatus::Config);
    assert!(json.is_null());
    assert!(last_error().contains("colour"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("fwlab.h")).unwrap();
    for symbol in [
        "typedef struct FwMeasure FwMeasure",
        "FW_STATUS_NULL_POINTER = 1",
        "fw_last_error_message",
        "fw_measure_cantor",
        "fw_measure_sphere",
        "fw_measure_from_json",
        "fw_measure_free",
        "fw_measure_ft_complex",
        "fw_frostman_constant",
        "fw_sphere_decay",
        "fw_distance_set_measure",
        "fw_s_necessary",
        "fw_gamma_lower_bound",
        "fw_run_experiment",
        "fw_string_free",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }

    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("use.c");
    std::fs::write(
        &source,
        "#include \"fwlab.h\"\nint main(void) { FwMeasure *m = 0; double v; \
         FwStatus s = fw_measure_cantor(0.25, 3, 2, 1, &m); \
         if (s == FW_STATUS_OK) { fw_measure_total_mass(m, &v); fw_measure_free(m); } return (int)s; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&source)
        .output()
    {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("no C compiler available, syntax check skipped: {e}"),
    }
}
