use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ergoset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergoset"))
        .args(args)
        .env_remove("ERGOSET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const BOWTIE: &str = "\
# two sources, a cycle in the middle, two sinks
s1 a
s2 a
a b
b a
b t1
b t2 2.0
t2 t3
t3 t2
";

#[test]
fn detect_prints_partition() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.edges", BOWTIE);
    let o = ergoset(&["detect", &input]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["forward_sets"], serde_json::json!([["t1"], ["t2", "t3"]]));
    assert_eq!(v["backward_sets"], serde_json::json!([["s1"], ["s2"]]));
    assert_eq!(v["transient_core"], serde_json::json!(["a", "b"]));
}

#[test]
fn compress_writes_every_artifact_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.edges", BOWTIE);
    let runs: Vec<_> = ["one", "two"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = ergoset(&["compress", &input, "--out", out.to_str().unwrap(), "--jobs", "2"]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    for f in [
        "partition.json",
        "compressed.edges",
        "meta_map.json",
        "report.json",
        "B.csv",
        "M_bw.csv",
        "C.csv",
        "M_fw.csv",
    ] {
        let a = fs::read(runs[0].join(f)).unwrap();
        let b = fs::read(runs[1].join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
    let report: Value = serde_json::from_slice(&fs::read(runs[0].join("report.json")).unwrap()).unwrap();
    assert_eq!(report["N"], 7);
    assert_eq!(report["N1"], 6);
    let b = fs::read_to_string(runs[0].join("B.csv")).unwrap();
    assert!(b.starts_with("source,FW:t1,FW:t2\n"), "{b}");
}

#[test]
fn step_one_only_writes_step_one_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.edges", BOWTIE);
    let out = dir.path().join("o");
    let o = ergoset(&["compress", &input, "--step", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["N"], 7);
    assert_eq!(report["N1"], 6);
    assert!((report["C1"].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-15);
    assert!(report.get("N2").is_none());
    assert!(!out.join("B.csv").exists());
}

#[test]
fn compressed_output_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.edges", BOWTIE);
    let out = dir.path().join("o");
    assert!(ergoset(&["compress", &input, "--step", "1", "--out", out.to_str().unwrap()]).status.success());
    let o = ergoset(&[
        "verify",
        &input,
        "--compressed",
        out.join("compressed.edges").to_str().unwrap(),
        "--meta-map",
        out.join("meta_map.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn tampered_compression_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.edges", BOWTIE);
    let out = dir.path().join("o");
    assert!(ergoset(&["compress", &input, "--step", "1", "--out", out.to_str().unwrap()]).status.success());
    let edges = fs::read_to_string(out.join("compressed.edges")).unwrap();
    let tampered = edges.replace("b FW:t1 1\n", "b FW:t1 5\n");
    assert_ne!(tampered, edges);
    fs::write(out.join("compressed.edges"), tampered).unwrap();
    let o = ergoset(&[
        "verify",
        &input,
        "--compressed",
        out.join("compressed.edges").to_str().unwrap(),
        "--meta-map",
        out.join("meta_map.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b -> FW:t1"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.edges", "a b\nc d 1 2\n");
    let o = ergoset(&["detect", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let negative = write(dir.path(), "neg.edges", "a b -1\n");
    assert_eq!(ergoset(&["detect", &negative]).status.code(), Some(2));

    assert_eq!(ergoset(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ergoset(&["detect", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(ergoset(&["experiment", "er", "--p", "1.5", "--reps", "1"]).status.code(), Some(1));
    assert_eq!(ergoset(&["--help"]).status.code(), Some(0));
}

#[test]
fn comma_delimited_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", "a,b\nb,c,2.5\n");
    let o = ergoset(&["detect", &input, "--delimiter", "comma"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["transient_core"], serde_json::json!(["b"]));
}

#[test]
fn er_sweep_without_edges_is_all_ergodic() {
    let o = ergoset(&["experiment", "er", "--n", "100", "--p", "0", "--reps", "10", "--seed", "3"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..4], ["100", "0", "1", "0"]);
}

#[test]
fn er_sweep_is_reproducible_across_thread_counts() {
    let args = ["experiment", "er", "--n", "30", "--p-max", "0.1", "--p-steps", "4", "--reps", "20", "--seed", "9"];
    let one = ergoset(&[&args[..], &["--jobs", "1"]].concat());
    let four = ergoset(&[&args[..], &["--jobs", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["experiment", "er", "--n", "30", "--p", "0.05", "--reps", "20"];
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_ergoset"))
            .args(args)
            .env("ERGOSET_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    let flag = ergoset(&[&args[..], &["--seed", "17"]].concat()).stdout;
    assert_eq!(run("17"), flag);
}

#[test]
fn rewire_reports_unchanged_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let single = write(dir.path(), "chain.edges", "s a\na b\nb t\n");
    let o = ergoset(&["experiment", "rewire", &single, &single]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unchanged"));
    assert!(stdout(&o).lines().count() >= 3);
}
