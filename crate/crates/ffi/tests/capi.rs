use std::ffi::{CStr, CString};
use std::ptr;

use inkrementa::model::{IncModel, ModelConfig};
use inkrementa::numkit::SeededRng;
use inkrementa_ffi::*;

fn last_error() -> String {
    let p = ink_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_model() -> IncModel {
    let config = ModelConfig {
        input_dim: 3,
        hidden_dims: vec![4],
        learning_rate: 0.1,
        batch_size: 2,
        epochs_per_stage: 1,
    };
    IncModel::init(config, 5, &mut SeededRng::new(9)).unwrap()
}

fn handle(m: &IncModel) -> *mut InkModel {
    let json = CString::new(m.to_json().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ink_model_from_json(json.as_ptr(), &mut out) }, InkStatus::Ok);
    assert!(!out.is_null());
    out
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ink_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn model_handle_predicts_like_rust() {
    let m = small_model();
    let h = handle(&m);
    unsafe {
        assert_eq!(ink_model_num_classes(h), 5);
        assert_eq!(ink_model_input_dim(h), 3);
        let x = [0.3, -1.2, 2.0];
        let mut class = usize::MAX;
        assert_eq!(ink_model_predict(h, x.as_ptr(), 3, &mut class), InkStatus::Ok);
        assert_eq!(class, m.predict(&x).unwrap());
        let mut logits = [0.0; 5];
        assert_eq!(ink_model_logits(h, x.as_ptr(), 3, logits.as_mut_ptr(), 5), InkStatus::Ok);
        assert_eq!(logits.to_vec(), m.forward(&x).unwrap().logits);

        assert_eq!(ink_model_predict(h, x.as_ptr(), 2, &mut class), InkStatus::Shape);
        assert!(last_error().contains('3'));
        assert_eq!(ink_model_logits(h, x.as_ptr(), 3, logits.as_mut_ptr(), 4), InkStatus::Shape);
        ink_model_free(h);
    }
}

#[test]
fn save_load_and_json_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
    let m = small_model();
    let h = handle(&m);
    unsafe {
        assert_eq!(ink_model_save(h, path.as_ptr()), InkStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(ink_model_load(path.as_ptr(), &mut loaded), InkStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(ink_model_to_json(loaded, &mut text), InkStatus::Ok);
        let back = IncModel::from_json(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(back, m);
        ink_string_free(text);
        ink_model_free(loaded);
        ink_model_free(h);
    }
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    unsafe {
        let missing = CString::new("/definitely/not/here.json").unwrap();
        assert_eq!(ink_model_load(missing.as_ptr(), &mut out), InkStatus::Data);
        assert!(last_error().contains("not/here"));

        let wrong = CString::new(r#"{"version": "other-v9"}"#).unwrap();
        assert_eq!(ink_model_from_json(wrong.as_ptr(), &mut out), InkStatus::Config);

        assert_eq!(ink_model_from_json(ptr::null(), &mut out), InkStatus::NullPointer);
        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            ink_model_from_json(bad_utf8.as_ptr().cast(), &mut out),
            InkStatus::InvalidUtf8
        );
        assert!(out.is_null());
        assert_eq!(ink_model_num_classes(ptr::null()), 0);
        let mut class = 0;
        assert_eq!(ink_model_predict(ptr::null(), [0.0].as_ptr(), 1, &mut class), InkStatus::NullPointer);
        ink_model_free(ptr::null_mut());
        ink_string_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_last_error() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ink_accn(0, 0.5, &mut v), InkStatus::Invalid);
        assert!(!ink_last_error().is_null());
        assert_eq!(ink_accn(25, 0.5856, &mut v), InkStatus::Ok);
    }
    assert!((v - 14.64).abs() < 1e-12);
    assert!(ink_last_error().is_null());
}

#[test]
fn weight_align_in_place() {
    let mut head = [2.0, 0.0, 0.0, 2.0, 4.0, 0.0, 0.0, -4.0];
    unsafe {
        assert_eq!(ink_weight_align(head.as_mut_ptr(), 2, 2, 2, INK_NORM_L2), InkStatus::Ok);
    }
    assert_eq!(head, [2.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0, -2.0]);

    let mut zero_new = [1.0, 0.0, 0.0, 0.0];
    unsafe {
        assert_eq!(ink_weight_align(zero_new.as_mut_ptr(), 1, 1, 2, INK_NORM_L2), InkStatus::Invalid);
        assert!(last_error().contains("zero"));
        assert_eq!(ink_weight_align(zero_new.as_mut_ptr(), 1, 1, 2, 7), InkStatus::Invalid);
    }
    assert_eq!(zero_new, [1.0, 0.0, 0.0, 0.0]);
}

const SCENARIO: &str = r#"{
    "seed": 5,
    "data": {"synthetic": {"num_classes": 4, "input_dim": 3, "train_per_class": 10,
                           "test_per_class": 3, "center_scale": 8.0, "stddev": 1.0}},
    "stages": [[0, 1], [2, 3]],
    "model": {"hidden_dims": [8], "epochs_per_stage": 3},
    "ccs": {"k": 2}
}"#;

#[test]
fn run_scenario_returns_report_json() {
    let config = CString::new(SCENARIO).unwrap();
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(ink_run_scenario(config.as_ptr(), &mut report), InkStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        ink_string_free(report);
        let parsed = inkrementa::harness::RunReport::from_json(&text).unwrap();
        assert_eq!(parsed.stages.len(), 2);
        assert_eq!(parsed.summary.n, 4);

        let typo = CString::new(SCENARIO.replace("\"k\"", "\"kk\"")).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(ink_run_scenario(typo.as_ptr(), &mut none), InkStatus::Config);
        assert!(none.is_null());
        assert!(last_error().contains("kk"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/inkrementa.h")).unwrap();
    for name in [
        "ink_last_error",
        "ink_version",
        "ink_string_free",
        "ink_model_load",
        "ink_model_from_json",
        "ink_model_to_json",
        "ink_model_save",
        "ink_model_free",
        "ink_model_num_classes",
        "ink_model_input_dim",
        "ink_model_predict",
        "ink_model_logits",
        "ink_run_scenario",
        "ink_accn",
        "ink_weight_align",
        "typedef struct InkModel InkModel",
        "INK_STATUS_OK = 0",
        "INK_NORM_L2 2",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
