use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn modvit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modvit"))
        .current_dir(dir)
        .env_remove("MODVIT_JOBS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = modvit(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const BARBELL: &str = "0 1\n0 2\n1 2\n2 3\n3 4\n3 5\n4 5\n";
const BARBELL_PARTITION: &str = "node_id,community_id\n0,0\n1,0\n2,0\n3,1\n4,1\n5,1\n";

fn barbell(dir: &Path) {
    fs::write(dir.join("g.tsv"), BARBELL).unwrap();
    fs::write(dir.join("p.csv"), BARBELL_PARTITION).unwrap();
}

#[test]
fn score_writes_sorted_scores_with_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    barbell(dir.path());
    let summary = ok(dir.path(), &["score", "--graph", "g.tsv", "--partition", "p.csv", "--method", "mv", "-o", "mv.csv"]);
    assert!(summary.contains("mv,6,0.357142857142857"), "{summary}");
    let text = fs::read_to_string(dir.path().join("mv.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# method=mv"));
    assert_eq!(lines.next(), Some("node_id,score"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
    assert!((rows[2].1 + 1.0 / 56.0).abs() < 1e-12);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("mv.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["outputs"][0], "mv.csv");
}

#[test]
fn generate_then_attack_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for run in ["a", "b"] {
        ok(d, &["--seed", "5", "generate", "--family", "cellular", "--n", "200", "-o", &format!("{run}.tsv")]);
        ok(
            d,
            &[
                "--seed", "5", "attack", "--graph", &format!("{run}.tsv"), "--strategy", "recomputed", "--method", "amv",
                "--budget", "0.3", "-o", &format!("{run}.trace.csv"),
            ],
        );
    }
    assert_eq!(fs::read(d.join("a.tsv")).unwrap(), fs::read(d.join("b.tsv")).unwrap());
    assert_eq!(fs::read(d.join("a.trace.csv")).unwrap(), fs::read(d.join("b.trace.csv")).unwrap());
    let trace = fs::read_to_string(d.join("a.trace.csv")).unwrap();
    assert!(trace.starts_with("step,node_id,rho,eta,sigma,q\n0,,0,0,"));
    assert_eq!(trace.lines().count(), 1 + 1 + 60);
}

#[test]
fn generated_partition_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--n", "150", "-o", "g.tsv", "--partition-out", "truth.csv"]);
    let summary = ok(d, &["score", "--graph", "g.tsv", "--partition", "truth.csv", "--method", "deg", "-o", "s.csv"]);
    assert!(summary.starts_with("method,nodes,modularity,top_node\ndeg,150,"));
    let out = modvit(d, &["generate", "--family", "er", "--n", "50", "-o", "e.tsv", "--partition-out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cost_and_report_read_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    barbell(d);
    for m in ["mv", "deg"] {
        ok(d, &["attack", "--graph", "g.tsv", "--partition", "p.csv", "--method", m, "-o", &format!("{m}.csv")]);
    }
    let costs = ok(d, &["cost", "mv.csv", "deg.csv"]);
    assert!(costs.starts_with("trace,c_rho,c_eta\nmv.csv,"));
    assert_eq!(costs.lines().count(), 3);

    ok(d, &["report", "mv.csv", "deg.csv", "-o", "long.csv"]);
    let long = fs::read_to_string(d.join("long.csv")).unwrap();
    assert!(long.starts_with("method,x,x_value,sigma,q\n"));
    // two methods, two axes, seven records each
    assert_eq!(long.lines().count(), 1 + 2 * 2 * 7);
    assert!(long.lines().any(|l| l.starts_with("deg,eta,")));

    let empty = modvit(d, &["report", "-o", "none.csv"]);
    assert_eq!(empty.status.code(), Some(2));

    fs::write(d.join("big.tsv"), "0 1\n1 2\n2 3\n3 4\n4 5\n5 6\n").unwrap();
    ok(d, &["attack", "--graph", "big.tsv", "--method", "deg", "-o", "big.csv"]);
    let mismatch = modvit(d, &["report", "mv.csv", "big.csv", "-o", "bad.csv"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("traces must share a graph"));
}

#[test]
fn correlate_emits_a_symmetric_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    barbell(d);
    for m in ["mv", "amv", "deg"] {
        ok(d, &["score", "--graph", "g.tsv", "--partition", "p.csv", "--method", m, "-o", &format!("{m}.csv")]);
    }
    let text = ok(d, &["--format", "json", "correlate", "mv.csv", "amv.csv", "deg.csv"]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (i, a) in ["mv", "amv", "deg"].iter().enumerate() {
        assert_eq!(rows[i]["method"], *a);
        assert_eq!(rows[i][*a], 1.0);
        for b in ["mv", "amv", "deg"] {
            assert_eq!(rows[i][b], rows.as_array().unwrap().iter().find(|r| r["method"] == b).unwrap()[*a]);
        }
    }
}

#[test]
fn deception_plans() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    barbell(d);
    let s = ok(d, &["deceive", "--graph", "g.tsv", "--partition", "p.csv", "--strategy", "initial", "--budget", "0.2", "-o", "i.csv"]);
    assert!(s.contains("initial,1,"), "{s}");
    let plan = fs::read_to_string(d.join("i.csv")).unwrap();
    assert_eq!(plan.lines().next(), Some("step,node_id,rho,eta,q"));
    assert!(plan.lines().nth(2).unwrap().starts_with("1,0,"));

    ok(d, &["deceive", "--graph", "g.tsv", "--partition", "p.csv", "--target-q", "0.3", "-o", "g.csv"]);
    let needs_budget = modvit(d, &["deceive", "--graph", "g.tsv", "--strategy", "initial", "-o", "x.csv"]);
    assert_eq!(needs_budget.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("loop.tsv"), "0 1\n1 1\n").unwrap();
    let out = modvit(d, &["score", "--graph", "loop.tsv", "-o", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(modvit(d, &["attack", "--graph", "missing.tsv", "-o", "x.csv"]).status.code(), Some(2));
    assert_eq!(modvit(d, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(modvit(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn benchmark_writes_tables_and_flags_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bench.toml"),
        "families = [\"cellular\"]\nreplications = 2\nseed = 4\nmethods = [\"mv\", \"deg\"]\nstrategies = [\"initial\", \"mba\"]\n[generator]\nn = 150\n",
    )
    .unwrap();
    ok(d, &["benchmark", "--config", "bench.toml", "--out-dir", "a"]);
    ok(d, &["--jobs", "2", "benchmark", "--config", "bench.toml", "--out-dir", "b"]);
    let agg = fs::read_to_string(d.join("a/aggregate.csv")).unwrap();
    assert_eq!(agg, fs::read_to_string(d.join("b/aggregate.csv")).unwrap());
    assert_eq!(agg.lines().count(), 1 + 4);
    let table = fs::read_to_string(d.join("a/table.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("family,method,initial_c_rho,initial_c_eta,mba_c_rho,mba_c_eta"));
    assert_eq!(fs::read_to_string(d.join("a/runs.csv")).unwrap().lines().count(), 1 + 8);

    // commn-centrality is undefined on cellular partitions with isolated cells
    let out = modvit(
        d,
        &["--seed", "1", "benchmark", "--replications", "2", "--n", "200", "--methods", "cc", "--strategies", "recomputed", "--out-dir", "c"],
    );
    assert_eq!(out.status.code(), Some(4));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("c/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 2);
}
