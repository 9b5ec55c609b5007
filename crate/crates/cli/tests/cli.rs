//! End-to-end checks of the binary: file round trips, determinism, and exit
//! codes. Uses fast configurations throughout.

use std::path::Path;
use std::process::{Command, Output};

fn signgraph(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signgraph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.as_ref().display()))
}

#[test]
fn generate_star_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(&["generate", "star", "--leaves", "3", "-o", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let edges = read(dir.path().join("out/star3.edges"));
    assert_eq!(edges, "N 4\n0 1\n0 2\n0 3\n");
    let dot = read(dir.path().join("out/star3.dot"));
    assert!(dot.contains("0 -- 1;"));
    assert_eq!(dot.matches("--").count(), 3);
}

#[test]
fn generate_grid_and_analyze_rank() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(&["generate", "grid", "--dims", "3,3,3,3", "-o", "."], dir.path());
    assert!(out.status.success());
    let out = signgraph(&["analyze", "rank", "grid3x3x3x3.edges"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rank"], 62);
    assert_eq!(report["nodes"], 81);
}

#[test]
fn generate_chain_run_length_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(&["generate", "chain", "--cycles", "6x3,4", "-o", "."], dir.path());
    assert!(out.status.success());
    let edges = read(dir.path().join("chain6x3_4.edges"));
    // 3 six-cycles + 1 four-cycle + 3 bridges
    assert!(edges.starts_with("N 22\n"));
    assert_eq!(edges.lines().count() - 1, 22 + 3);
}

#[test]
fn generate_lowrank_index_matches_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(
        &["generate", "lowrank", "--n", "8", "--a", "0", "--b", "30", "--m", "200", "--rank", "2", "-o", "lr"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let index = read(dir.path().join("lr/index.csv"));
    let rows: Vec<&str> = index.lines().skip(1).collect();
    assert!(!rows.is_empty());
    let files: Vec<_> = std::fs::read_dir(dir.path().join("lr"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".edges"))
        .collect();
    assert_eq!(files.len(), rows.len());
    // every listed file parses back to a graph with the listed edge count
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let text = read(dir.path().join("lr").join(fields[3]));
        let g = signgraph::io::read_edge_list(&text).unwrap();
        assert_eq!(g.edge_count().to_string(), fields[1]);
    }
}

#[test]
fn cli_outputs_are_byte_identical_across_runs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = signgraph(
            &[
                "train", "--graph", "star:3", "--arch", "dgae", "--h2", "2", "--epochs", "200",
                "--seed", "7", "--record-every", "50", "-o", "run",
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["checkpoint.json", "metrics.csv", "summary.json", "recon_sign.edges", "recon_prob.edges"] {
        let a = read(dir_a.path().join("run").join(file));
        let b = read(dir_b.path().join("run").join(file));
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn train_writes_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(
        &[
            "train", "--graph", "star:3", "--arch", "gae", "--h2", "2", "--epochs", "0",
            "-o", "run",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("run/summary.json"))).unwrap();
    assert_eq!(summary["epochs_run"], 0);
    assert_eq!(summary["diverged"], false);
    let metrics = read(dir.path().join("run/metrics.csv"));
    assert_eq!(metrics.lines().next().unwrap(), "epoch,loss,log_norm_distance");
    assert_eq!(metrics.lines().count(), 2);
    let ckpt: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("run/checkpoint.json"))).unwrap();
    assert_eq!(ckpt["format"], 1);
    // reconstructions parse back
    for f in ["recon_sign.edges", "recon_prob.edges"] {
        signgraph::io::read_edge_list(&read(dir.path().join("run").join(f))).unwrap();
    }
}

#[test]
fn train_accepts_config_document_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.json"),
        r#"{
            "graph": {"kind": "chain", "cycles": [4, 4]},
            "arch": "2gae",
            "h2": 4,
            "train": {
                "learning_rate": 1e-3, "lambda": 0.0, "epochs": 50, "seed": 1,
                "optimizer": {"kind": "adam", "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
                "loss_mask": "all_entries", "record_every": 10
            }
        }"#,
    )
    .unwrap();
    let out = signgraph(
        &["train", "--config", "exp.json", "--epochs", "20", "-o", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("run/summary.json"))).unwrap();
    assert_eq!(summary["epochs"], 20, "flag must override the config epochs");
    assert_eq!(summary["architecture"], "2gae");
    assert_eq!(summary["graph_nodes"], 8);
}

#[test]
fn sweep_produces_full_deterministic_grid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.json"),
        r#"{
            "graph": {"kind": "star", "leaves": 3},
            "architectures": ["gae", "dgae"],
            "h2": [2, 4],
            "base_seed": 0,
            "repetitions": 2,
            "train": {
                "learning_rate": 1e-3, "lambda": 1e-7, "epochs": 60, "seed": 0,
                "optimizer": {"kind": "adam", "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
                "loss_mask": "all_entries", "record_every": 20
            }
        }"#,
    )
    .unwrap();
    let first = signgraph(&["sweep", "--config", "sweep.json", "-o", "a.csv"], dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = signgraph(&["sweep", "--config", "sweep.json", "-o", "b.csv"], dir.path());
    assert!(second.status.success());

    let a = read(dir.path().join("a.csv"));
    assert_eq!(a, read(dir.path().join("b.csv")), "sweep CSV must be byte-stable");
    // 2 architectures x 2 widths x 2 seeds
    assert_eq!(a.lines().count(), 1 + 8);
    assert_eq!(
        a.lines().next().unwrap(),
        "architecture,h2,seed,log_norm_distance,sign_errors,computed_rank,status"
    );
    let mut data: Vec<&str> = a.lines().skip(1).collect();
    let sorted = {
        let mut s = data.clone();
        s.sort();
        s
    };
    data.sort();
    assert_eq!(data, sorted);
    for line in &data {
        assert!(line.ends_with(",ok"), "{line}");
        // decoder score matrices stay within the latent rank budget
        let fields: Vec<&str> = line.split(',').collect();
        let h2: usize = fields[1].parse().unwrap();
        let rank: usize = fields[5].parse().unwrap();
        assert!(rank <= h2, "{line}");
    }
}

#[test]
fn analyze_star_embed_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = signgraph(&["analyze", "star-embed", "--leaves", "50"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verified"], true);
    assert_eq!(report["complex_rank"], 1);
    assert_eq!(report["real_rank_lower_bound"], "26");

    signgraph(&["generate", "grid", "--dims", "3,3", "-o", "."], dir.path());
    let out = signgraph(&["analyze", "bound", "grid3x3.edges"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["dimension_lower_bound"], 3);
}

#[test]
fn analyze_rank2_on_edge_is_witness() {
    let dir = tempfile::tempdir().unwrap();
    signgraph(&["generate", "star", "--leaves", "1", "-o", "."], dir.path());
    let out = signgraph(&["analyze", "rank2", "star1.edges", "--resolution", "16"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["kind"], "witness");
    assert_eq!(report["verified"], true);
}

#[test]
fn exit_codes_distinguish_usage_and_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    // unknown flag: usage error
    let out = signgraph(&["generate", "star", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // missing file: runtime error
    let out = signgraph(&["analyze", "bound", "missing.edges"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // malformed graph file: runtime error with line info
    std::fs::write(dir.path().join("bad.edges"), "N 3\n0 9\n").unwrap();
    let out = signgraph(&["analyze", "bound", "bad.edges"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // divergence: runtime exit code, but the run directory is still written
    let out = signgraph(
        &[
            "train", "--graph", "star:3", "--arch", "gae", "--h2", "2", "--epochs", "4000",
            "--lr", "1e18", "--optimizer", "gd", "-o", "run",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("run/summary.json"))).unwrap();
    assert_eq!(summary["diverged"], true);
    // help prints and exits cleanly
    let out = signgraph(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_records_failures_as_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.json"),
        r#"{
            "graph": {"kind": "star", "leaves": 2},
            "architectures": ["gae", "cgae"],
            "h2": [3],
            "seeds": [0],
            "train": {
                "learning_rate": 1e-3, "lambda": 0.0, "epochs": 10, "seed": 0,
                "optimizer": {"kind": "plain_gd"},
                "loss_mask": "all_entries", "record_every": 5
            }
        }"#,
    )
    .unwrap();
    // cgae with odd h2 is invalid: that row must fail while gae succeeds
    let out = signgraph(&["sweep", "--config", "sweep.json", "-o", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let csv = read(dir.path().join("s.csv"));
    assert_eq!(csv.lines().count(), 1 + 2);
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert!(lines.iter().any(|l| l.starts_with("cgae,") && l.contains("error:")));
    assert!(lines.iter().any(|l| l.starts_with("gae,") && l.ends_with(",ok")));
}
