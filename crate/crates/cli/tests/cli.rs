//! Subcommand smoke tests driving the built binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_manifold-ann"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mann-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn count_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn ingest_synthetic_to_csv() {
    let dir = tmp_dir("ingest");
    let out = dir.join("points.csv");
    run_ok(&[
        "ingest",
        "synthetic:gaussian:n=25,p=3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(count_lines(&out), 26); // header + 25 rows
}

#[test]
fn knn_graph_file_parses() {
    let dir = tmp_dir("knn");
    let out = dir.join("graph.txt");
    run_ok(&[
        "knn",
        "synthetic:gaussian:n=60,p=4",
        "--backend",
        "kdtree",
        "-k",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let graph = manifold_ann::NeighborGraph::from_text(&text).unwrap();
    assert_eq!(graph.len(), 60);
    assert_eq!(graph.k(), 5);
}

#[test]
fn embed_and_quality_and_anomaly() {
    let dir = tmp_dir("embed");
    let emb = dir.join("embedding.csv");
    run_ok(&[
        "embed",
        "synthetic:rectangle:n=150,p=4",
        "--algorithms",
        "isomap",
        "-k",
        "10",
        "--dim",
        "2",
        "--seed",
        "3",
        "--out",
        emb.to_str().unwrap(),
    ]);
    assert_eq!(count_lines(&emb), 151);

    let report = dir.join("quality.json");
    run_ok(&[
        "quality",
        "synthetic:rectangle:n=150,p=4",
        "--seed",
        "3",
        "-k",
        "10",
        "--embedding",
        emb.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json.as_object().unwrap().len(), 8);
    assert!(json["trustworthiness"].as_f64().unwrap() > 0.9);

    let density = dir.join("density.json");
    run_ok(&[
        "anomaly",
        emb.to_str().unwrap(),
        "--count",
        "5",
        "--out",
        density.to_str().unwrap(),
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&density).unwrap()).unwrap();
    assert_eq!(json["anomaly_indices"].as_array().unwrap().len(), 5);
}

#[test]
fn sweep_writes_rows_incrementally() {
    let dir = tmp_dir("sweep");
    let out = dir.join("records.csv");
    run_ok(&[
        "sweep",
        "synthetic:gaussian:n=80,p=4",
        "--backend",
        "kdtree",
        "-k",
        "5",
        "--dim",
        "2",
        "--algorithms",
        "isomap",
        "--grid-limit",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("backend,epsilon,"));
    assert!(header.contains("isomap_trustworthiness"));
    assert_eq!(lines.count(), 3);
    // The exact point leads the grid, so row one holds recall 1.
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "kdtree");
    assert_eq!(row[7], "1");
}

#[test]
fn pipeline_writes_all_artifacts() {
    let dir = tmp_dir("pipeline");
    let out = dir.join("run1");
    run_ok(&[
        "pipeline",
        "synthetic:household:periods=48,weeks=30",
        "--mode",
        "hellinger",
        "--bins",
        "60",
        "-k",
        "10",
        "--dim",
        "2",
        "--algorithms",
        "isomap",
        "--backend",
        "kdtree",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    for file in ["graph.txt", "embedding.csv", "quality.json", "density.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }

    // d != 2 skips the density stage with a notice.
    let out5 = dir.join("run5");
    let output = run_ok(&[
        "pipeline",
        "synthetic:household:periods=48,weeks=30",
        "--mode",
        "hellinger",
        "--bins",
        "60",
        "-k",
        "10",
        "--dim",
        "3",
        "--algorithms",
        "isomap",
        "--backend",
        "kdtree",
        "--seed",
        "11",
        "--out",
        out5.to_str().unwrap(),
    ]);
    assert!(!out5.join("density.json").exists());
    assert!(String::from_utf8_lossy(&output.stdout).contains("density report skipped"));
}

#[test]
fn pipeline_defaults_to_planar_embedding() {
    let dir = tmp_dir("pipedim");
    let out = dir.join("run");
    run_ok(&[
        "pipeline",
        "synthetic:rectangle:n=120,p=4",
        "-k",
        "10",
        "--algorithms",
        "isomap",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out.join("embedding.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "id,y1,y2");
    assert!(out.join("density.json").exists());
}

#[test]
fn config_file_fills_defaults_and_flags_win() {
    let dir = tmp_dir("config");
    let conf = dir.join("run.conf");
    std::fs::write(
        &conf,
        "input=synthetic:gaussian:n=40,p=3\nk=4\nbackend=kdtree\nseed=5\n",
    )
    .unwrap();
    let graph_a = dir.join("a.txt");
    run_ok(&["knn", "--config", conf.to_str().unwrap(), "--out", graph_a.to_str().unwrap()]);
    let parsed = manifold_ann::NeighborGraph::from_text(
        &std::fs::read_to_string(&graph_a).unwrap(),
    )
    .unwrap();
    assert_eq!(parsed.k(), 4);

    // A flag overrides the file.
    let graph_b = dir.join("b.txt");
    run_ok(&[
        "knn",
        "--config",
        conf.to_str().unwrap(),
        "-k",
        "6",
        "--out",
        graph_b.to_str().unwrap(),
    ]);
    let parsed = manifold_ann::NeighborGraph::from_text(
        &std::fs::read_to_string(&graph_b).unwrap(),
    )
    .unwrap();
    assert_eq!(parsed.k(), 6);
}

#[test]
fn exit_codes_follow_error_classes() {
    // Invalid configuration -> 2.
    let out = bin()
        .args(["knn", "synthetic:gaussian:n=10,p=2", "-k", "50"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "K > N should be invalid-parameter");

    // Missing input file -> 3.
    let out = bin().args(["knn", "/nonexistent/data.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Malformed CSV -> 3.
    let dir = tmp_dir("exitcodes");
    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "1.0,2.0\n3.0,not-a-number\n").unwrap();
    let out = bin().args(["knn", bad.to_str().unwrap(), "-k", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    // IDX with label magic -> 3.
    let idx = dir.join("labels.idx");
    let mut bytes = vec![0u8, 0, 8, 1];
    bytes.extend(10u32.to_be_bytes());
    bytes.extend(vec![0u8; 10]);
    std::fs::write(&idx, bytes).unwrap();
    let out = bin().args(["knn", idx.to_str().unwrap(), "-k", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn idx_input_accepted() {
    let dir = tmp_dir("idx");
    let idx = dir.join("images.idx");
    // 30 tiny 2x2 "images".
    let mut bytes = vec![0u8, 0, 8, 3];
    bytes.extend(30u32.to_be_bytes());
    bytes.extend(2u32.to_be_bytes());
    bytes.extend(2u32.to_be_bytes());
    for i in 0..30u8 {
        bytes.extend([i, i.wrapping_mul(3), 255 - i, i / 2]);
    }
    std::fs::write(&idx, bytes).unwrap();
    let out_csv = dir.join("points.csv");
    run_ok(&["ingest", idx.to_str().unwrap(), "--out", out_csv.to_str().unwrap()]);
    assert_eq!(count_lines(&out_csv), 31);
    // --limit keeps a prefix.
    let out_csv2 = dir.join("points2.csv");
    run_ok(&[
        "ingest",
        idx.to_str().unwrap(),
        "--limit",
        "5",
        "--out",
        out_csv2.to_str().unwrap(),
    ]);
    assert_eq!(count_lines(&out_csv2), 6);
}
