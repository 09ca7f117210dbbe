use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semifactual::bench::ReportFile;

fn sfbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfbench")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn write_config(dir: &Path, doc: serde_json::Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, doc.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(sfbench(&["run", "--config", p.to_str().unwrap()]).status.code(), Some(2));

    let cfg = write_config(
        dir.path(),
        serde_json::json!({
            "datasets": [{"name": "g", "csv": fixtures().join("two_gaussians.csv"), "schema": fixtures().join("two_gaussians.schema.json")}],
            "methods": ["no_such_method"],
        }),
    );
    assert_eq!(sfbench(&["run", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn unreadable_dataset_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({
            "datasets": [{"name": "missing", "csv": dir.path().join("nope.csv"), "schema": fixtures().join("two_gaussians.schema.json")}],
            "methods": ["mdn", "kleor"],
        }),
    );
    let out = dir.path().join("out");
    let res = sfbench(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn run_report_and_charts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let quick = configs().join("quick.json");
    let res = sfbench(&["run", "--config", quick.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["artifact.json", "report.json", "scores.csv", "ranks.csv", "mean_ranks.svg"] {
        assert!(out.join(f).exists(), "{f} missing");
    }

    let report: ReportFile = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.seed, 3);
    let mut csv = csv::Reader::from_path(out.join("scores.csv")).unwrap();
    let headers = csv.headers().unwrap().clone();
    let mut rows = 0;
    for row in csv.records() {
        let row = row.unwrap();
        let metric = &row[0];
        let method = &row[2];
        for (h, cell) in headers.iter().zip(row.iter()).skip(3) {
            if h.ends_with("_best") || cell.is_empty() {
                continue;
            }
            let entry = report
                .report
                .entries
                .iter()
                .find(|e| e.dataset == h && e.metric.key() == metric && e.method.label() == method)
                .unwrap();
            let v: f64 = cell.parse().unwrap();
            assert!((v - entry.normalized.unwrap()).abs() < 1e-9);
            rows += 1;
        }
    }
    assert!(rows > 0);

    let again = dir.path().join("again");
    let artifact = out.join("artifact.json");
    let a = artifact.to_str().unwrap();
    assert_eq!(sfbench(&["report", "--artifact", a, "--out", again.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), std::fs::read(again.join("report.json")).unwrap());
    assert_eq!(std::fs::read(out.join("scores.csv")).unwrap(), std::fs::read(again.join("scores.csv")).unwrap());
    assert_eq!(sfbench(&["charts", "--artifact", a, "--out", again.to_str().unwrap()]).status.code(), Some(0));
    let svg = std::fs::read_to_string(again.join("mean_ranks.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}
