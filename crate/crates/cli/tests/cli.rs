//! The binary end to end: exit codes, error JSON, file sets and reruns.

use std::path::Path;
use std::process::{Command, Output};

use miv_cellkit::fixtures::DATA_DIR_ENV;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_miv-cellkit"))
        .args(args)
        .current_dir(dir)
        .env_remove(DATA_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = bin(dir, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn version_lists_formats() {
    let d = tempfile::tempdir().unwrap();
    let v = ok(d.path(), &["--version"]);
    assert!(v.starts_with(&format!("miv-cellkit {}", env!("CARGO_PKG_VERSION"))));
    assert!(v.contains("rustc"));
    assert!(v.contains("curves v1"));
}

#[test]
fn missing_input_is_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let o = bin(d.path(), &["extract", "--curves", "absent.csv", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["code"], "E_INPUT");
    assert!(!d.path().join("r.json").exists());

    let o = bin(d.path(), &["simulate", "--netlist", "absent.cir", "--out", "w.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors() {
    let d = tempfile::tempdir().unwrap();
    let o = bin(d.path(), &["ppa", "--out", "p.json", "--variants", "ch3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(d.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["code"], "E_USAGE");
    let o = bin(d.path(), &["plot", "--out", "plots"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("plots").exists());
}

#[test]
fn data_dir_must_exist() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_miv-cellkit"))
        .args(["area", "--out", "a.json"])
        .current_dir(d.path())
        .env(DATA_DIR_ENV, d.path().join("nowhere"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_synthetic_writes_eight_files_and_repeats() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--seed", "3", "gen-synthetic", "--out", "a"]);
    ok(d.path(), &["--seed", "3", "gen-synthetic", "--out", "b"]);
    ok(d.path(), &["--seed", "4", "gen-synthetic", "--out", "c"]);
    let names: Vec<_> = std::fs::read_dir(d.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 8);
    for n in &names {
        let a = std::fs::read(d.path().join("a").join(n)).unwrap();
        assert_eq!(a, std::fs::read(d.path().join("b").join(n)).unwrap(), "{n}");
        assert_ne!(a, std::fs::read(d.path().join("c").join(n)).unwrap(), "{n}");
    }
}

#[test]
fn single_pair_ppa() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(
        d.path(),
        &["ppa", "--cells", "INV1X1", "--variants", "ch2", "--out", "p.json", "--csv", "p.csv"],
    );
    assert!(text.contains("ch2"));
    let csv = std::fs::read_to_string(d.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("INV1X1,ch2,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("p.json")).unwrap()).unwrap();
    assert!(json["variants"][0]["delay_delta_pct"].is_null());

    ok(d.path(), &["plot", "--ppa", "p.json", "--out", "plots"]);
    for f in ["ppa_delay.svg", "ppa_power.svg", "ppa_area.svg"] {
        assert!(d.path().join("plots").join(f).is_file(), "{f}");
    }
}

#[test]
fn models_dir_with_missing_card() {
    let d = tempfile::tempdir().unwrap();
    std::fs::create_dir(d.path().join("models")).unwrap();
    let o = bin(d.path(), &["ppa", "--models", "models", "--cells", "INV1X1", "--out", "p.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(error_json(&o)["error"]["message"].as_str().unwrap().contains("missing parameter set"));
}

#[test]
fn simulate_dc_and_transient() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("rc.cir"),
        "* rc step\nV1 in 0 PWL(0 0 1p 1)\nR1 in out 1k\nC1 out 0 1p\n.tran 10p 2n\n.end\n",
    )
    .unwrap();
    ok(d.path(), &["simulate", "--netlist", "rc.cir", "--out", "w.csv", "--nodes", "out"]);
    let csv = std::fs::read_to_string(d.path().join("w.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "time_s,out");
    assert_eq!(csv.lines().count(), 202);
    let last: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let exact = 1.0 - (-2.0f64).exp();
    assert!((last - exact).abs() < 0.005 * exact, "{last}");

    std::fs::write(d.path().join("div.cir"), "V1 a 0 DC 2\nR1 a b 1k\nR2 b 0 3k\n").unwrap();
    ok(d.path(), &["simulate", "--netlist", "div.cir", "--out", "dc.json"]);
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("dc.json")).unwrap()).unwrap();
    let b = j["node_names"].as_array().unwrap().iter().position(|n| n == "b").unwrap();
    assert!((j["voltages"][b].as_f64().unwrap() - 1.5).abs() < 1e-6);

    let o = bin(d.path(), &["simulate", "--netlist", "div.cir", "--out", "x.csv", "--dt", "1p"]);
    assert_eq!(o.status.code(), Some(2));
}
