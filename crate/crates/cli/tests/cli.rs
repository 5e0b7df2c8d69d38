use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clique-probe"))
        .args(args)
        .env_remove("CLIQUE_PROBE_SEED")
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_keys(line: &str) -> Vec<String> {
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn classify_prints_region() {
    let o = run(&["classify", "--gamma", "0.75", "--delta", "0.6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "DetectOnlyRecoverImpossible\n");
    let err = stderr(&o);
    assert!(err.contains("command = classify"));
    assert!(err.contains("gamma = 0.75"));
    assert!(err.contains("seed = 0"));
}

#[test]
fn exact_recovery_fraction() {
    let o = run(&[
        "variant",
        "exact-recovery",
        "--n",
        "6",
        "--k",
        "2",
        "--q",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "4/15\n");
}

#[test]
fn exact_all_false_json_fields() {
    let o = run(&[
        "variant",
        "exact-all-false",
        "--n",
        "5",
        "--k",
        "2",
        "--pairs",
        "1-2,3-4",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["value"], "4/5");
    assert_eq!(
        json_keys(line.trim()),
        [
            "decimal",
            "distinct",
            "duplicates",
            "k",
            "lower_bound",
            "lower_bound_hypothesis",
            "n",
            "q",
            "value"
        ]
    );
}

#[test]
fn detection_below_hypothesis_is_parameter_error() {
    let o = run(&["detect", "--n", "16", "--k", "4", "--eps0", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("clique below detectability hypothesis"));
}

#[test]
fn budget_exhaustion_exit_code() {
    let o = run(&["detect", "--n", "4096", "--k", "512", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["classify", "--gamma", "0.5", "--delta", "1.5", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn detect_json_fields() {
    let o = run(&["detect", "--n", "4096", "--k", "512", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert_eq!(
        json_keys(line.trim()),
        [
            "clamped",
            "decision",
            "eps_prime",
            "m",
            "queries",
            "threshold",
            "witness_exact",
            "witness_size"
        ]
    );
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["decision"], "Planted");
    assert_eq!(v["queries"], 333 * 332 / 2);
}

#[test]
fn recover_json_fields() {
    let o = run(&["recover", "--n", "4096", "--k", "512", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let keys = json_keys(stdout(&o).trim());
    for k in [
        "estimate",
        "d_set",
        "d_prime",
        "t_set",
        "queries_step1",
        "queries_step2",
        "success",
    ] {
        assert!(keys.iter().any(|x| x == k), "{k}");
    }
}

#[test]
fn sweep_csv_golden_header_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let rec = dir.path().join("records.jsonl");
    let o = run(&[
        "sweep",
        "--n",
        "4096",
        "--gammas",
        "0.75",
        "--deltas",
        "0.4,1.6",
        "--trials",
        "2",
        "--output",
        out.to_str().unwrap(),
        "--records",
        rec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "gamma,delta,n,k,budget,mode,trials,metric,ci,classification"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.75,0.4,4096,512,28,detection,2,1,"));
    assert!(lines[1].ends_with(",DetectionImpossible"));
    assert!(lines[2].ends_with(",RecoveryPossible"));
    let records = std::fs::read_to_string(&rec).unwrap();
    assert_eq!(records.lines().count(), 8);
    assert_eq!(
        json_keys(records.lines().next().unwrap()),
        [
            "budget",
            "budget_exhausted",
            "cell",
            "decision",
            "eps0",
            "estimate_size",
            "hypothesis",
            "k",
            "mode",
            "n",
            "queries_charged",
            "seed",
            "success",
            "trial_id",
            "wall_time_ms",
            "witness_size"
        ]
    );
}

#[test]
fn sweep_is_reproducible_and_worker_independent() {
    let args = [
        "sweep", "--n", "4096", "--gammas", "0.75", "--deltas", "1.6", "--trials", "3", "--seed",
        "9",
    ];
    let a = run(&args);
    let mut more = args.to_vec();
    more.extend(["--workers", "3"]);
    let b = run(&more);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# classify settings\ngamma = 0.3\ndelta = 0.5\nseed = 4\n",
    )
    .unwrap();
    let o = run(&["classify", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "DetectionImpossible\n");
    assert!(stderr(&o).contains("seed = 4"));
    let o = run(&[
        "classify",
        "--config",
        conf.to_str().unwrap(),
        "--delta",
        "1.5",
    ]);
    assert_eq!(stdout(&o), "RecoveryPossible\n");
    let o = run(&[
        "classify",
        "--config",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn env_seed_fallback() {
    let o = Command::new(env!("CARGO_BIN_EXE_clique-probe"))
        .args(["classify", "--gamma", "0.5", "--delta", "1.5"])
        .env("CLIQUE_PROBE_SEED", "77")
        .output()
        .unwrap();
    assert!(String::from_utf8(o.stderr).unwrap().contains("seed = 77"));
}

#[test]
fn clique_number_rows() {
    let o = run(&["clique-number", "--n", "64", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2);
    assert_eq!(
        json_keys(out.lines().next().unwrap()),
        [
            "first_moment_cap",
            "k",
            "n",
            "omega",
            "omega_n",
            "sample",
            "seed",
            "within_cap"
        ]
    );
}
