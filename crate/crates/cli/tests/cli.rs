use std::process::{Command, Output};

fn mprecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mprecon"))
        .args(args)
        .env("MPRECON_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn composite_modulus_fails() {
    let o = mprecon(&["gossip", "--p", "1000000006", "--n", "10", "--trials", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("1000000006"));
}

#[test]
fn unsupported_k_fails() {
    let o = mprecon(&["relay", "--k", "9", "--trials", "1"]);
    assert!(!o.status.success());
}

#[test]
fn csv_report_shape() {
    let out = stdout(&mprecon(&[
        "gossip",
        "--n",
        "10,20",
        "--trials",
        "5",
        "--cells",
        "8n",
        "--seed",
        "3",
        "--calibration-trials",
        "50",
    ]));
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        lines[0],
        "n,pct_all,pct_miss1,pct_missmore,cnt_all,cnt_miss1,cnt_missmore"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,"));
    assert!(lines[2].starts_with("20,"));
    assert!(out.contains("# seed=3"));
    assert!(out.contains("# rounds.n=10="));
}

#[test]
fn same_seed_same_bytes_any_thread_count() {
    let args = [
        "two",
        "--trials",
        "20",
        "--seed",
        "9",
        "--set-size",
        "300",
        "--diff",
        "30",
    ];
    let a = stdout(&mprecon(&args));
    let b = Command::new(env!("CARGO_BIN_EXE_mprecon"))
        .args(args)
        .env("MPRECON_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a, stdout(&b));
}

#[test]
fn json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = mprecon(&[
        "relay",
        "--n",
        "3,5",
        "--trials",
        "4",
        "--cells",
        "8n",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let report = mprecon::experiment::Report::from_json(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[1].parties(), 20);
    assert_eq!(report.metadata["command"], "relay");
}

#[test]
fn generated_topology_feeds_gossip() {
    let dir = tempfile::tempdir().unwrap();
    let graph = stdout(&mprecon(&["gen-graph", "--n", "12", "--seed", "4"]));
    assert!(graph.starts_with("n 12\n"));
    let path = dir.path().join("g.txt");
    std::fs::write(&path, graph).unwrap();
    let out = stdout(&mprecon(&[
        "gossip",
        "--topology",
        path.to_str().unwrap(),
        "--trials",
        "5",
        "--cells",
        "8n",
        "--calibration-trials",
        "50",
    ]));
    assert!(out.contains("\n12,"));
    assert!(out.contains("# graphs=fixed topology"));
}

#[test]
fn bad_thread_count_fails() {
    let o = Command::new(env!("CARGO_BIN_EXE_mprecon"))
        .args(["relay", "--trials", "1"])
        .env("MPRECON_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
}
