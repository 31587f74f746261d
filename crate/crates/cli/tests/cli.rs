use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use optomech::basis::eigenvalue;
use optomech::SystemParams;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn cx(v: &Value) -> (f64, f64) {
    (f(&v["re"]), f(&v["im"]))
}

#[test]
fn spectrum_of_the_zero_box_is_the_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "zero.json", r#"{"labels": {"l_max": 0, "n_max": 0, "k_max": 0, "m_max": 0}}"#);
    let doc = json(&run(&["spectrum", "--config", cfg.to_str().unwrap()]));
    assert_eq!(doc["schema"], "optomech/spectrum/v1");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(cx(&rows[0]["lambda"]), (0.0, 0.0));
}

#[test]
fn spectrum_rows_match_the_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "box.json", r#"{"labels": {"l_max": 2, "n_max": 2, "k_max": 2, "m_max": 2}}"#);
    for (variant, params) in
        [("weak", SystemParams::desk()), ("dsme", SystemParams { variant: optomech::Variant::Dsme, ..SystemParams::desk() })]
    {
        let doc = json(&run(&["spectrum", "--config", cfg.to_str().unwrap(), "--variant", variant]));
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 225);
        for r in rows {
            let (l, n, k, m) = (r["l"].as_i64().unwrap(), r["n"].as_u64().unwrap(), r["k"].as_i64().unwrap(), r["m"].as_u64().unwrap());
            let want = eigenvalue(l, n as usize, k, m as usize, &params);
            let (re, im) = cx(&r["lambda"]);
            assert_eq!(re.to_bits(), want.re.to_bits(), "{variant} {r}");
            assert!(im == want.im, "{variant} {r}");
        }
    }
}

#[test]
fn spectrum_csv_matches_golden() {
    let o = run(&["spectrum", "--config", data("golden_spectrum.json").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let golden = std::fs::read_to_string(data("golden_spectrum.csv")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden);
}

#[test]
fn csv_headers_are_pinned() {
    let small = data("small.json");
    let cfg = small.to_str().unwrap();
    let header = |args: &[&str]| -> String {
        let mut a = args.to_vec();
        a.extend(["--config", cfg, "--format", "csv"]);
        let o = run(&a);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with(&format!("# optomech/{}/v1\n", a[0])));
        text.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
    };
    assert_eq!(header(&["spectrum"]), "l,n,k,m,lambda_re,lambda_im");
    assert_eq!(header(&["eigvec"]), "j,cavity_row,cavity_col,p,q,value_re,value_im");
    assert_eq!(
        header(&["evolve"]),
        "method,t,photon_number_re,photon_number_im,phonon_number_re,phonon_number_im,mech_quadrature_re,mech_quadrature_im,\
         purity_re,purity_im,trace_re,trace_im,trace_distance"
    );
    assert_eq!(header(&["bench"]), "nc,nm,method,setup_ms,per_time_point_ms,max_error");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let neg = write_config(
        &dir,
        "neg.json",
        r#"{"params": {"omega": 5.0, "nu": 1.0, "chi": 0.05, "kappa": -0.3, "gamma": 0.02, "mbar": 0.5, "variant": "weak"}}"#,
    );
    let unknown = write_config(&dir, "unknown.json", r#"{"nc": 3, "colour": "red"}"#);
    let edge = write_config(&dir, "edge.json", r#"{"nc": 3, "labels": {"l_max": 1, "n_max": 1, "k_max": 0, "m_max": 0}}"#);
    let bad_tol = write_config(&dir, "tol.json", r#"{"tolerances": {"gram": 0.0}}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--config", neg.to_str().unwrap()],
        vec!["spectrum", "--config", unknown.to_str().unwrap()],
        vec!["verify", "--config", edge.to_str().unwrap()],
        vec!["spectrum", "--config", bad_tol.to_str().unwrap()],
        vec!["spectrum", "--config", "/nonexistent/config.json"],
        vec!["spectrum", "--variant", "strong"],
        vec!["spectrum", "--format", "xml"],
        vec!["spectrum", "--jobs", "0"],
        vec!["spectrum", "--no-such-flag"],
        vec!["eigvec", "--label", "1,2,3"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_passes_on_a_small_weak_system_and_fails_on_impossible_tolerances() {
    let doc = json(&run(&["verify", "--config", data("small.json").to_str().unwrap()]));
    assert_eq!(doc["metadata"]["passed"], true);
    let checks: Vec<&str> = doc["rows"].as_array().unwrap().iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(checks, ["spectrum", "residual", "gram", "cross_trace", "cross_trace_numerator", "path_sum"]);

    let dir = tempfile::tempdir().unwrap();
    let strict = write_config(
        &dir,
        "strict.json",
        r#"{"nc": 3, "nm": 12, "labels": {"l_max": 1, "n_max": 0, "k_max": 1, "m_max": 1},
            "checks": ["spectrum"], "tolerances": {"spectrum": 1e-300}}"#,
    );
    let o = run(&["verify", "--config", strict.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("spectrum,false,"));
}

#[test]
fn steady_state_does_not_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "steady.json",
        r#"{"nc": 3, "nm": 30, "evolve": {"initial": {"kind": "steady"}, "times": [0.0, 10.0, 100.0], "m_cut": 10}}"#,
    );
    let doc = json(&run(&["evolve", "--config", cfg.to_str().unwrap()]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let first = cx(&rows[0]["phonon_number"]);
    for r in rows {
        for key in ["photon_number", "phonon_number", "purity"] {
            let (a, b) = (cx(&rows[0][key]), cx(&r[key]));
            assert!((a.0 - b.0).abs() <= 1e-9 && (a.1 - b.1).abs() <= 1e-9, "{key} at t={}", r["t"]);
        }
        assert!((cx(&r["trace"]).0 - 1.0).abs() <= 1e-10);
    }
    assert!(first.0 > 0.0);
}

#[test]
fn photon_number_decays_at_the_cavity_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "decay.json",
        r#"{"nc": 3, "nm": 26,
            "evolve": {"initial": {"kind": "fock_thermal", "n": 1, "mbar": 0.5}, "times": [0.0, 5.0, 50.0, 500.0], "m_cut": 12}}"#,
    );
    let doc = json(&run(&["evolve", "--config", cfg.to_str().unwrap()]));
    let kappa = SystemParams::desk().kappa;
    for r in doc["rows"].as_array().unwrap() {
        let t = f(&r["t"]);
        let (n, _) = cx(&r["photon_number"]);
        assert!((n - (-kappa * t).exp()).abs() <= 1e-6, "{} t={t}: {n}", r["method"]);
        assert!(f(&r["trace_distance"]) <= 1e-6, "t={t}");
    }
    assert!(f(&doc["metadata"]["max_trace_distance"]) <= 1e-6);
}

#[test]
fn bench_reports_sane_timings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bench.json", r#"{"bench": {"dims": [[3, 26]], "times": [5.0]}}"#);
    let doc = json(&run(&["bench", "--config", cfg.to_str().unwrap()]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        for key in ["setup_ms", "per_time_point_ms"] {
            let v = f(&r[key]);
            assert!(v.is_finite() && v > 0.0, "{key} = {v}");
        }
        if r["method"] == "spectral" {
            assert!(f(&r["max_error"]) <= 1e-6);
        }
    }
}

#[test]
fn adaptive_cost_grows_with_time() {
    let dir = tempfile::tempdir().unwrap();
    let adaptive_ms = |t: f64| -> f64 {
        let cfg = write_config(&dir, "t.json", &format!(r#"{{"bench": {{"dims": [[2, 8]], "times": [{t:?}]}}}}"#));
        let doc = json(&run(&["bench", "--config", cfg.to_str().unwrap()]));
        let rows = doc["rows"].as_array().unwrap();
        f(&rows.iter().find(|r| r["method"] == "adaptive").unwrap()["per_time_point_ms"])
    };
    let (short, long) = (adaptive_ms(1.0), adaptive_ms(2000.0));
    assert!(long > short, "adaptive: {short} ms at t=1, {long} ms at t=2000");
}

#[test]
fn out_flag_and_single_job_give_the_same_document() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("spectrum.json");
    let cfg = data("small.json");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&target).unwrap();
    let seq = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(code(&seq), 0);
    assert_eq!(written, seq.stdout);

    let par = json(&run(&["eigvec", "--config", cfg.to_str().unwrap(), "--label=-1,0,1,1"]));
    let one = json(&run(&["eigvec", "--config", cfg.to_str().unwrap(), "--label=-1,0,1,1", "--jobs", "1"]));
    assert_eq!(par, one);
    assert!(f(&par["metadata"]["residual"]) <= 1e-7);
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"format": "csv", "seed": 7, "labels": {"l_max": 0, "n_max": 0, "k_max": 0, "m_max": 0}}"#);
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("# optomech/spectrum/v1"));
    let doc = json(&run(&["spectrum", "--config", cfg.to_str().unwrap(), "--format", "json", "--variant", "dsme"]));
    assert_eq!(doc["metadata"]["variant"], "dsme");
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["desk.json", "desk_dsme.json"] {
        let p = root.join(name);
        let o = run(&["spectrum", "--config", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
