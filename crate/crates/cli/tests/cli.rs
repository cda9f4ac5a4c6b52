// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdock::mlqaa::{generate_dataset, label_register, write_dataset};
use qdock::optimize::{RunSettings, ScoreConfig};
use qdock::register::DeviceParams;
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn qdock(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdock"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn has_digest(v: &Value) -> bool {
    v.get("config_digest").and_then(Value::as_str).is_some_and(|d| d.len() == 64)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn oracle_on_a_path() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(&qdock(tmp.path(), &["oracle", fixture("path3.json").to_str().unwrap()]));
    assert!(stdout.starts_with("101"), "{stdout}");
    let v = read_json(&tmp.path().join("oracle.json"));
    assert_eq!(v["mwis"], serde_json::json!(["101"]));
    assert_eq!(v["complement_check"], true);
    assert!(has_digest(&v));
}

#[test]
fn input_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let o = qdock(tmp.path(), &["oracle", "/nonexistent/graph.json"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(tmp.path(), "cfg.json", r#"{"seeed": 1}"#);
    let o = qdock(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "oracle", fixture("path3.json").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeed"));

    let nodes: Vec<String> = (0..25).map(|i| format!(r#"{{"id":"v{i}"}}"#)).collect();
    let big = write(tmp.path(), "big.json", &format!(r#"{{"nodes":[{}],"edges":[]}}"#, nodes.join(",")));
    let o = qdock(tmp.path(), &["oracle", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unroutable_graph_exits_3() {
    let tmp = TempDir::new().unwrap();
    let leaves: Vec<String> = (0..9).map(|i| format!(r#"{{"id":"l{i}"}}"#)).collect();
    let edges: Vec<String> = (0..9).map(|i| format!(r#"["c","l{i}"]"#)).collect();
    let star = write(
        tmp.path(),
        "star.json",
        &format!(r#"{{"nodes":[{{"id":"c"}},{}],"edges":[{}]}}"#, leaves.join(","), edges.join(",")),
    );
    let o = qdock(tmp.path(), &["embed", star.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn dock_writes_binding_and_complement_graphs() {
    let tmp = TempDir::new().unwrap();
    let lig = fixture("acetic_acid.json");
    let rec = fixture("ethylene_glycol.json");
    ok(&qdock(
        tmp.path(),
        &["dock", "--ligand", lig.to_str().unwrap(), "--receptor", rec.to_str().unwrap()],
    ));
    let b = read_json(&tmp.path().join("binding_graph.json"));
    let c = read_json(&tmp.path().join("complement_graph.json"));
    assert_eq!(b["nodes"].as_array().unwrap().len(), 6);
    assert_eq!(b["edges"].as_array().unwrap().len(), 4);
    assert_eq!(c["edges"].as_array().unwrap().len(), 15 - 4);
    assert!(has_digest(&b["meta"]) && has_digest(&c["meta"]));

    let lib = qdock::docking::build_binding_graph(
        &qdock::docking::load_molecule(&lig).unwrap(),
        &qdock::docking::load_molecule(&rec).unwrap(),
        &qdock::docking::InteractionTable::default(),
        &qdock::docking::BindingConfig::default(),
    )
    .unwrap();
    let file = qdock::graph::read_graph(&tmp.path().join("binding_graph.json")).unwrap();
    assert_eq!(file.ids(), lib.graph.ids());
    assert_eq!(file.edges().collect::<Vec<_>>(), lib.graph.edges().collect::<Vec<_>>());
}

#[test]
fn dock_without_attraction_warns_and_succeeds() {
    let tmp = TempDir::new().unwrap();
    let o = qdock(
        tmp.path(),
        &[
            "dock",
            "--ligand",
            fixture("acetic_acid.json").to_str().unwrap(),
            "--receptor",
            fixture("ethylene_glycol.json").to_str().unwrap(),
            "--table",
            fixture("no_attraction.json").to_str().unwrap(),
        ],
    );
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
    let b = read_json(&tmp.path().join("binding_graph.json"));
    assert!(b["nodes"].as_array().unwrap().is_empty());
}

#[test]
fn embed_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let g = fixture("path4.json");
    let stdout = ok(&qdock(a.path(), &["--seed", "3", "embed", g.to_str().unwrap()]));
    assert!(stdout.starts_with("4 atoms (0 ancillas"), "{stdout}");
    ok(&qdock(b.path(), &["--seed", "3", "embed", g.to_str().unwrap()]));
    let ra = std::fs::read(a.path().join("register.json")).unwrap();
    let rb = std::fs::read(b.path().join("register.json")).unwrap();
    assert_eq!(ra, rb);
    assert!(has_digest(&read_json(&a.path().join("register.json"))["meta"]));
}

fn trial_params(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .collect()
}

#[test]
fn vqaa_logs_resumes_and_reproduces() {
    let tmp = TempDir::new().unwrap();
    ok(&qdock(tmp.path(), &["embed", fixture("path3.json").to_str().unwrap()]));
    let reg = tmp.path().join("register.json");
    let reg = reg.to_str().unwrap();

    let one = TempDir::new().unwrap();
    ok(&qdock(one.path(), &["--shots", "200", "--rounds", "1", "vqaa", reg]));
    let log = trial_params(&one.path().join("trials.jsonl"));
    assert_eq!(log.len(), 1);
    assert!(has_digest(&log[0]));
    let best = read_json(&one.path().join("best.json"));
    assert!(has_digest(&best));
    assert!(has_digest(&read_json(&one.path().join("histogram.json"))));

    let two = TempDir::new().unwrap();
    ok(&qdock(two.path(), &["--shots", "200", "--rounds", "1", "vqaa", reg]));
    for f in ["trials.jsonl", "best.json", "histogram.json"] {
        assert_eq!(
            std::fs::read(one.path().join(f)).unwrap(),
            std::fs::read(two.path().join(f)).unwrap(),
            "{f}"
        );
    }

    ok(&qdock(two.path(), &["--shots", "200", "--rounds", "3", "vqaa", "--resume", reg]));
    let resumed = trial_params(&two.path().join("trials.jsonl"));
    assert!(resumed.len() >= 3);
    assert_eq!(resumed[0]["params"], log[0]["params"]);
    assert_eq!(resumed[0]["score"], log[0]["score"]);
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let tmp = TempDir::new().unwrap();
    ok(&qdock(tmp.path(), &["embed", fixture("path3.json").to_str().unwrap()]));
    let reg = tmp.path().join("register.json");
    ok(&qdock(
        tmp.path(),
        &[
            "--shots",
            "100",
            "sweep",
            reg.to_str().unwrap(),
            "--omega",
            "4,6",
            "--delta",
            "10",
            "--time",
            "1000",
        ],
    ));
    let text = std::fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config_digest="));
    assert_eq!(lines.len(), 2 + 2);
}

#[test]
fn train_predict_and_evaluate_on_a_small_corpus() {
    let tmp = TempDir::new().unwrap();
    let dev = DeviceParams::default();
    let mut regs = generate_dataset(&dev).unwrap();
    regs.sort_by_key(|r| r.register.len());
    let settings = RunSettings {
        shots: 100,
        dt: 4.0,
        seed: 1,
        score: ScoreConfig::default(),
    };
    let records: Vec<_> = regs
        .iter()
        .take(6)
        .filter_map(|r| label_register(r, &dev, 3, &settings).unwrap())
        .collect();
    assert!(records.len() >= 5);
    let data = tmp.path().join("dataset.jsonl");
    write_dataset(&data, &records, &serde_json::json!({})).unwrap();
    let cfg = write(
        tmp.path(),
        "cfg.json",
        r#"{"shots": 100, "baseline_rounds": 2, "train": {"epochs": 3}}"#,
    );
    let cfg = cfg.to_str().unwrap();
    let models = tmp.path().join("models");

    ok(&qdock(tmp.path(), &["--config", cfg, "train", "--dataset", data.to_str().unwrap()]));
    for t in ["omega", "delta0", "deltaf", "t_rise", "t_fall"] {
        let m = read_json(&models.join(format!("model_{t}.json")));
        assert!(has_digest(&m["meta"]), "{t}");
    }
    assert!(has_digest(&read_json(&tmp.path().join("mape.json"))));

    let reg = tmp.path().join("register.json");
    std::fs::write(&reg, serde_json::to_string(&records[0].register).unwrap()).unwrap();
    ok(&qdock(
        tmp.path(),
        &["--config", cfg, "predict", "--models", models.to_str().unwrap(), reg.to_str().unwrap()],
    ));
    let p = read_json(&tmp.path().join("prediction.json"));
    assert!(has_digest(&p));
    assert!(p["params"]["omega"].as_f64().unwrap() > 0.0);

    ok(&qdock(
        tmp.path(),
        &[
            "--config",
            cfg,
            "mlqaa-eval",
            "--models",
            models.to_str().unwrap(),
            "--dataset",
            data.to_str().unwrap(),
        ],
    ));
    let e = read_json(&tmp.path().join("mlqaa_eval.json"));
    assert!(has_digest(&e));
    assert_eq!(e["vqaa_rounds"], 2);
}
