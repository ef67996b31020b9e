use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use gpgof::report::{DiagnoseReport, TestReport};
use gpgof::sim::SimResult;

fn gpgof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpgof"))
        .args(args)
        .env_remove("GPGOF_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const DATA: &str = "0 1 1 2 0 3 5 1 0 2 4 1 0 0 2 7 1 3 0 1 2 2 0 6 1\n";

fn freq_of(raw: &str) -> String {
    let mut counts = std::collections::BTreeMap::new();
    for v in raw.split_whitespace() {
        *counts.entry(v.parse::<u64>().unwrap()).or_insert(0) += 1;
    }
    counts.iter().map(|(v, c)| format!("{v},{c}\n")).collect()
}

#[test]
fn freq_and_raw_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write(dir.path(), "x.txt", DATA);
    let freq = write(dir.path(), "x.csv", &freq_of(DATA));
    for out in ["json", "csv", "text"] {
        let a = gpgof(&[
            "test",
            "--family",
            "katz",
            "--data",
            &raw,
            "--bootstrap",
            "99",
            "--out",
            out,
        ]);
        let b = gpgof(&[
            "test",
            "--family",
            "katz",
            "--data",
            &freq,
            "--format",
            "freq",
            "--bootstrap",
            "99",
            "--out",
            out,
        ]);
        assert!(a.status.success(), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{out}");
    }
    let tiny_raw = write(dir.path(), "t.txt", "0 0 1 1");
    let tiny_freq = write(dir.path(), "t.csv", "0,2\n1,2");
    let a = gpgof(&[
        "test",
        "--family",
        "katz",
        "--data",
        &tiny_raw,
        "--bootstrap",
        "49",
        "--out",
        "json",
    ]);
    let b = gpgof(&[
        "test",
        "--family",
        "katz",
        "--data",
        &tiny_freq,
        "--format",
        "freq",
        "--bootstrap",
        "49",
        "--out",
        "json",
    ]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn test_reports_every_statistic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write(dir.path(), "x.txt", DATA);
    let o = gpgof(&[
        "test",
        "--family",
        "pp",
        "--data",
        &raw,
        "--bootstrap",
        "199",
        "--seed",
        "5",
        "--out",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: TestReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.results.len(), 9);
    assert_eq!(report.bootstrap, 199);
    assert_eq!(report.alpha, 0.05);
    assert!(report
        .results
        .iter()
        .all(|r| r.p_value > 0.0 && r.p_value <= 1.0));
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, stdout(&o));

    let o = gpgof(&[
        "test",
        "--family",
        "katz",
        "--data",
        &raw,
        "--stat",
        "s4,ad",
        "--bootstrap",
        "19",
    ]);
    let text = stdout(&o);
    assert!(text.contains("fitted lambda"));
    assert!(text.contains("s4") && text.contains("ad") && !text.contains("cvm"));
}

#[test]
fn seeds_make_runs_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write(dir.path(), "x.txt", DATA);
    let args = [
        "test",
        "--family",
        "katz",
        "--data",
        &raw,
        "--bootstrap",
        "299",
        "--seed",
        "11",
        "--out",
        "json",
    ];
    let one = gpgof(&[&["--threads", "1"], &args[..]].concat());
    let four = gpgof(&[&["--threads", "4"], &args[..]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_gpgof"))
        .args(args)
        .env("GPGOF_THREADS", "3")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, env.stdout);
    let other = gpgof(&[&args[..8], &["--seed", "12", "--out", "json"]].concat());
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn user_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.txt", "");
    let o = gpgof(&["test", "--family", "katz", "--data", &empty]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty sample"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);

    let negative = write(dir.path(), "neg.txt", "1\n2\n-4\n");
    let o = gpgof(&["test", "--family", "katz", "--data", &negative]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("negative value `-4`"));

    let constant = write(dir.path(), "const.txt", "3 3 3 3");
    let o = gpgof(&["test", "--family", "katz", "--data", &constant]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero variance"));

    let o = gpgof(&["test", "--family", "katz", "--data", "/nonexistent/file"]);
    assert_eq!(o.status.code(), Some(2));

    let o = gpgof(&["test", "--family", "zeta", "--data", &constant]);
    assert_eq!(o.status.code(), Some(2));

    let o = gpgof(&[
        "diagnose", "--family", "katz", "--alt", "du:2", "--reps", "0",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = gpgof(&["diagnose", "--family", "katz", "--alt", "zipf:2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("mkdu:lambda,theta,nu,eps"),
        "{}",
        stderr(&o)
    );
}

const CONFIG: &str = r#"
null_family = "katz"
alternatives = ["katz:2,0.5"]
n_values = [50]
statistics = ["s4", "cvm"]
mc_replicates = 10
bootstrap_cycles = 19
master_seed = 42
"#;

#[test]
fn simulate_writes_identical_files_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "sim.toml", CONFIG);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let start = Instant::now();
    let o = gpgof(&["simulate", "--config", &config, "--out-dir", out]);
    let elapsed = start.elapsed();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    let csv = fs::read(Path::new(out).join("results.csv")).unwrap();
    let json = fs::read(Path::new(out).join("results.json")).unwrap();

    let o = gpgof(&[
        "--threads",
        "1",
        "simulate",
        "--config",
        &config,
        "--out-dir",
        out,
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read(Path::new(out).join("results.csv")).unwrap(), csv);
    assert_eq!(fs::read(Path::new(out).join("results.json")).unwrap(), json);

    let parsed: SimResult = serde_json::from_slice(&json).unwrap();
    assert_eq!(parsed.cells.len(), 2);
    let header = String::from_utf8(csv).unwrap();
    assert!(header.starts_with("alternative,n,statistic,rejection_pct,failures\n"));
}

#[test]
fn simulate_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for (bad, key) in [
        (
            CONFIG.replace("mc_replicates = 10", "mc_replicates = 0"),
            "mc_replicates",
        ),
        (
            CONFIG.replace("bootstrap_cycles = 19", "bootstrap_cycles = -1"),
            "bootstrap_cycles",
        ),
        (format!("{CONFIG}speed = 3\n"), "speed"),
        (CONFIG.replace("\"katz\"", "\"nope\""), "nope"),
    ] {
        let config = write(dir.path(), "bad.toml", &bad);
        let o = gpgof(&["simulate", "--config", &config, "--out-dir", out]);
        assert_eq!(o.status.code(), Some(2), "{key}");
        assert!(stderr(&o).contains(key), "{key}: {}", stderr(&o));
    }
}

#[test]
fn diagnose_recommends_weights() {
    let o = gpgof(&[
        "diagnose", "--family", "katz", "--alt", "pp:1,2", "--n", "1000", "--reps", "300", "--out",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: DiagnoseReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.diagnostics.recommendation.to_string(), "S4");
    assert_eq!(r.diagnostics.argmax_k, 0);

    let o = gpgof(&[
        "diagnose", "--family", "katz", "--alt", "bb:6,2", "--n", "1000", "--reps", "300",
    ]);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("recommended weights: S5"),
        "{}",
        stdout(&o)
    );
}
