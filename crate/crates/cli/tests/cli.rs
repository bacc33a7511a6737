use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn eswap(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eswap"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ESWAP_OUT_ROOT")
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn eswap")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `root`, keyed by relative path.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"experiment": "kerr", "alpah": 1.0}"#);
    let o = eswap(tmp.path(), &["--config", cfg.to_str().unwrap(), "--out", "run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("alpah"), "{}", stderr(&o));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn incompatible_encoding_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"experiment": "fock-demo", "encoding": "binomial"}"#);
    let o = eswap(tmp.path(), &["--config", cfg.to_str().unwrap(), "--out", "run"]);
    assert!(!o.status.success());
}

#[test]
fn exact_and_sampled_conflict() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eswap(tmp.path(), &["--experiment", "kerr", "--exact", "--sampled"]);
    assert!(!o.status.success());
}

#[test]
fn noiseless_error_budget_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"experiment": "error-budget", "noiseless": true}"#);
    let o = eswap(tmp.path(), &["--config", cfg.to_str().unwrap(), "--out", "run"]);
    assert!(!o.status.success());
    // no manifest for a failed run
    assert!(!tmp.path().join("run/manifest.json").exists());
}

#[test]
fn runs_are_deterministic_under_a_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let args = ["--experiment", "fock-demo", "--seed", "7", "--out", out.to_str().unwrap()];
    assert!(eswap(tmp.path(), &args).status.success());
    let first = snapshot(&out);
    assert!(eswap(tmp.path(), &args).status.success());
    let second = snapshot(&out);
    assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
    for (name, bytes) in &first {
        if name == Path::new("manifest.json") {
            continue;
        }
        assert!(bytes == &second[name], "{} differs between runs", name.display());
    }
    let (m1, m2): (Value, Value) = (
        serde_json::from_slice(&first[Path::new("manifest.json")]).unwrap(),
        serde_json::from_slice(&second[Path::new("manifest.json")]).unwrap(),
    );
    assert_eq!(m1["config_hash"], m2["config_hash"]);
    assert_eq!(m1["seeds"], serde_json::json!([7]));
}

#[test]
fn sampled_runs_are_deterministic_too() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = eswap(
            tmp.path(),
            &["--experiment", "fredkin", "--sampled", "--seed", "5", "--out", out.to_str().unwrap()],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        snapshot(&out)
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["summary.json", "assembled_0.json", "assembled_2.json"] {
        assert_eq!(a[Path::new(name)], b[Path::new(name)], "{name}");
    }
}

#[test]
fn outputs_stay_inside_the_output_directory() {
    let work = tempfile::tempdir().unwrap();
    let dest = tempfile::tempdir().unwrap();
    let out = dest.path().join("nested/run");
    let o = eswap(work.path(), &["--experiment", "kerr", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(work.path()).unwrap().count(), 0, "wrote into the working directory");
    let top: Vec<_> = fs::read_dir(dest.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(top, vec!["nested"]);
    let files = snapshot(&out);
    let manifest = json(&out.join("manifest.json"));
    let listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for name in &listed {
        assert!(files.contains_key(Path::new(name)), "{name} listed but missing");
    }
    assert_eq!(files.len(), listed.len() + 1);
}

#[test]
fn out_root_environment_variable_sets_the_default_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_eswap"))
        .args(["--experiment", "kerr"])
        .current_dir(tmp.path())
        .env("ESWAP_OUT_ROOT", tmp.path().join("root"))
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("root/kerr/manifest.json").exists());
}

#[test]
fn fock_demo_lands_in_the_measured_parity_band() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eswap(tmp.path(), &["--experiment", "fock-demo", "--out", "run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&tmp.path().join("run/summary.json"));
    let p_ab = s["final_measured"]["p_ab"].as_f64().unwrap();
    assert!((-0.85..=-0.65).contains(&p_ab), "{p_ab}");
    assert!((s["final_ideal"]["p_ab"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((s["ideal_target_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(tmp.path().join("run/grids/noisy_final_rere.csv").exists());
}

#[test]
fn fredkin_assembled_states_overlap_band() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eswap(tmp.path(), &["--experiment", "fredkin", "--out", "run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&tmp.path().join("run/summary.json"));
    let mean = s["mean_overlap"].as_f64().unwrap();
    assert!((0.60..=0.76).contains(&mean), "{mean}");
    let sep = s["spectroscopy"]["separation_mhz"].as_f64().unwrap();
    assert!((sep - 1.26).abs() <= 0.05 * 1.26, "{sep}");
    // readout contrast scales the trace-free reconstruction
    let m = &s["spam"]["model"];
    let c: f64 = (0..2)
        .map(|k| (1.0 - 2.0 * m["readout_error"][k].as_f64().unwrap()) * m["parity_contrast"][k].as_f64().unwrap())
        .product();
    for st in s["states"].as_array().unwrap() {
        assert!((st["trace"].as_f64().unwrap() - c).abs() < 1e-6, "{st}");
    }
}

#[test]
fn kerr_distorts_the_entangled_cat() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eswap(tmp.path(), &["--experiment", "kerr", "--out", "run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = json(&tmp.path().join("run/summary.json"));
    assert!(s["fidelity"].as_f64().unwrap() < 0.95);
    assert!(s["max_plane_change"].as_f64().unwrap() > 0.05);
}
