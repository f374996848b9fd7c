use std::process::{Command, Output};

fn kremoval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kremoval")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let edges = dir.path().join("edges.txt");
    let o = kremoval(&[
        "run",
        "--n",
        "6",
        "--k",
        "4",
        "--seed",
        "5",
        "--out",
        trace.to_str().unwrap(),
        "--edges",
        edges.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["M"], 1);
    assert_eq!(summary["final_edges"], 9);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("i,p,edges,q_k,r_mean_m2,r_min_m2,r_max_m2,r_mean_m3,"));
    let lines: Vec<(u32, u32)> = std::fs::read_to_string(&edges)
        .unwrap()
        .lines()
        .map(|l| {
            let mut it = l.split(' ').map(|x| x.parse().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 40, "k": 4, "seed": 1, "stop": {"rule": "at_p_floor", "p_floor": 0.5}}"#).unwrap();
    let o = kremoval(&["run", "--config", cfg.to_str().unwrap(), "--n", "20", "--p-floor", "0.9", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(trace["n"], 20);
    assert_eq!(trace["seed"], 1);
    assert_eq!(trace["stop"]["p_floor"], 0.9);
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--n", "12,16,20", "--k", "4", "--trials", "3", "--seed", "7"];
    let a = kremoval(&args);
    let b = kremoval(&args);
    let c = kremoval(&[&args[..], &["--sequential"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["groups"].as_array().unwrap().len(), 3);
    assert!(report["fitted_exponent"]["slope"].is_f64());
}

#[test]
fn verify_exits_zero_and_reports() {
    let o = kremoval(&["verify", "--max-n", "6", "--k", "3,4", "--destroying-max-n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn curves_and_report_tables() {
    let o = kremoval(&["curves", "--n", "500", "--k", "4", "--points", "5", "--lambda", "1.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("p,q_traj,q_upper,q_lower,r_traj_m2,band_m2,r_traj_m3,band_m3\n"));
    assert_eq!(text.lines().count(), 6);

    let o = kremoval(&["report", "--n", "10000,1000000", "--k", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn bad_input_fails_cleanly() {
    let o = kremoval(&["curves", "--n", "500", "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k = 3"));
    let o = kremoval(&["run", "--n", "3", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
}
