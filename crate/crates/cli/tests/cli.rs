use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hz(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperzeros"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn disjoint_edges_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(
        &[
            "gen",
            "disjoint-edges",
            "--k",
            "3",
            "--m",
            "4",
            "--q",
            "3",
            "--out",
            "e.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let inst: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(inst["type"], "hypergraph");
    assert_eq!(inst["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_strip_single_edge_passes() {
    let dir = tempfile::tempdir().unwrap();
    hz(
        &[
            "gen",
            "disjoint-edges",
            "--k",
            "3",
            "--m",
            "1",
            "--q",
            "3",
            "--out",
            "e.json",
        ],
        dir.path(),
    );
    let r = report(&hz(&["verify-strip", "--instance", "e.json"], dir.path()));
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["gamma"], "1/3888");
    assert_eq!(r["precision_bits"], 256);
}

#[test]
fn failing_verdict_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&hz(
        &[
            "check-conditions",
            "--cond",
            "coloring",
            "--k",
            "3",
            "--delta",
            "1",
            "--q",
            "3",
        ],
        dir.path(),
    ));
    assert_eq!(r["pass"], false);
}

#[test]
fn missing_file_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(&["partition", "--instance", "absent.json"], dir.path());
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("absent.json"));
}

#[test]
fn infeasible_degree_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(
        &[
            "gen",
            "hypergraph",
            "--n",
            "8",
            "--k",
            "3",
            "--delta",
            "0",
            "--edges",
            "2",
            "--q",
            "3",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
}

#[test]
fn random_hypergraph_respects_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(
        &[
            "gen",
            "hypergraph",
            "--n",
            "8",
            "--k",
            "3",
            "--delta",
            "2",
            "--edges",
            "5",
            "--q",
            "3",
        ],
        dir.path(),
    );
    let inst: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut deg = [0; 8];
    for e in inst["edges"].as_array().unwrap() {
        for v in e.as_array().unwrap() {
            deg[v.as_u64().unwrap() as usize] += 1;
        }
    }
    assert!(deg.iter().all(|&d| d <= 2));
}

#[test]
fn corpus_manifest_hashes_match() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(&["gen", "corpus", "c"], dir.path());
    assert!(out.status.success());
    let m: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/manifest.json")).unwrap())
            .unwrap();
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 8);
    for f in files {
        let body = std::fs::read(dir.path().join("c").join(f["file"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(
            hex::encode(sha2::Sha256::digest(&body)),
            f["sha256"].as_str().unwrap()
        );
    }
}

#[test]
fn same_seed_same_report() {
    let dir = tempfile::tempdir().unwrap();
    hz(&["gen", "corpus", "c"], dir.path());
    let strip = |o: Output| {
        let mut v = report(&o);
        v.as_object_mut().unwrap().remove("wall_time_secs");
        v
    };
    let args = [
        "witness",
        "--instance",
        "c/triangle.json",
        "--traces",
        "20",
        "--seed",
        "7",
    ];
    assert_eq!(strip(hz(&args, dir.path())), strip(hz(&args, dir.path())));
}

#[test]
fn subcommands_run_on_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    hz(&["gen", "corpus", "c"], dir.path());
    for args in [
        vec!["partition", "--instance", "c/triangle.json", "--brute"],
        vec![
            "glauber",
            "--instance",
            "c/sunflower.json",
            "--lambda",
            "1,0.0001",
        ],
        vec!["lifting", "--instance", "c/three-cycle.json"],
        vec![
            "fisher",
            "--instance",
            "c/disjoint-pair.json",
            "--beta",
            "0.2,0.3",
            "--order",
            "6",
        ],
        vec!["two-trees", "--n", "10"],
    ] {
        let r = report(&hz(&args, dir.path()));
        assert_eq!(r["pass"], true, "{args:?}");
    }
}

#[test]
fn params_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"k": 300, "delta": 2, "alpha": 0.171562}"#,
    )
    .unwrap();
    let r = report(&hz(
        &["check-conditions", "--cond", "cnf", "--params", "p.json"],
        dir.path(),
    ));
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["params"]["k_mk"], 52);
    let r = report(&hz(
        &[
            "check-conditions",
            "--cond",
            "cnf",
            "--params",
            "p.json",
            "--k",
            "20",
        ],
        dir.path(),
    ));
    assert_eq!(r["pass"], false);
}

#[test]
fn csv_rows_for_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = hz(&["clt", "--m", "16,64", "--csv"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,statistic,envelope");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("48,"));
    let out = hz(&["two-trees", "--csv"], dir.path());
    assert!(!out.status.success());
}
