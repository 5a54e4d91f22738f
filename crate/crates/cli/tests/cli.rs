use std::path::PathBuf;
use std::process::{Command, Output};

fn qoracle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qoracle")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qoracle-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn synth_benchmark_verifies() {
    let out = qoracle(&["synth", "--family", "addassoc", "-w", "2", "--verify", "--emit", "stats"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["name"], "addassoc2");
    assert_eq!(stats["verification"]["passed"], true);
    assert_eq!(stats["verification"]["cases"], 128);
    assert!(stats["circuit"]["qubits"].as_u64().unwrap() > 7);
}

#[test]
fn qasm_and_stats_are_reproducible() {
    let args = ["synth", "--family", "multdistr", "-w", "2", "--pebbles", "bennett-1"];
    let a = qoracle(&args);
    let b = qoracle(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    assert!(text.contains("\"strategy\": \"pebble\""));
}

#[test]
fn bench_files_feed_back_into_synth() {
    let dir = scratch("bench");
    let d = dir.to_str().unwrap();
    for format in ["xag", "aag"] {
        let out = qoracle(&["bench", "--family", "multassoc", "-w", "2", "--format", format, "-o", d]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("multassoc2.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"], 6);
    assert_eq!(manifest["outputs"], 1);

    let mut stats = Vec::new();
    for ext in ["xag", "aag"] {
        let input = dir.join(format!("multassoc2.{ext}"));
        let out = qoracle(&["synth", "-i", input.to_str().unwrap(), "--verify", "--emit", "stats"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["name"] = serde_json::Value::Null;
        stats.push(v);
    }
    assert_eq!(stats[0], stats[1]);
}

#[test]
fn writes_artifacts_to_directory() {
    let dir = scratch("artifacts");
    let out = qoracle(&[
        "synth", "--family", "addassoc", "-w", "2", "--strategy", "pebble", "--artifacts", "-o", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for ext in ["qasm", "stats.json", "luts", "strategy", "schedule"] {
        assert!(dir.join(format!("addassoc2.{ext}")).is_file(), "missing .{ext}");
    }
}

#[test]
fn errors_exit_with_code_two() {
    assert_eq!(qoracle(&["synth"]).status.code(), Some(2));
    assert_eq!(qoracle(&["synth", "--family", "nosuch"]).status.code(), Some(2));
    assert_eq!(qoracle(&["synth", "-i", "/nonexistent/file.aag"]).status.code(), Some(2));
    assert_eq!(qoracle(&["synth", "--family", "addassoc", "--pebbles", "0", "--max-relaxations", "0"]).status.code(), Some(2));
}

#[test]
fn matrix_formats() {
    let csv = qoracle(&["matrix", "--widths", "2", "--families", "addassoc", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("benchmark,mode,qubits,gates"));
    assert_eq!(text.lines().filter(|l| l.starts_with("addassoc2,")).count(), 5);
    let json = qoracle(&["matrix", "--widths", "2", "--families", "addassoc", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"][0]["cells"].as_array().unwrap().len(), 5);
}
