use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammaq"))
        .args(args)
        .env_remove("GAMMAQ_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gamma_rs_rank_two_binary_field_value() {
    let o = run(&["gamma", "--mode", "rs", "--p", "2", "--k", "1", "--n", "2"]);
    assert!(o.status.success());
    let body = stdout(&o);
    let record = body.lines().nth(1).expect("record line");
    assert!(record.contains("\"re\":-0.5"), "{record}");
    assert!(record.contains("\"kind\":\"rs\""));
}

#[test]
fn chars_lists_two_classes_for_rank_three_binary() {
    let o = run(&["chars", "--p", "2", "--k", "1", "--n", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3, "metadata + 2 classes");
}

#[test]
fn verify_all_modes_rank_two_ternary_passes_and_is_deterministic() {
    let a = run(&["verify", "--p", "3", "--k", "1", "--n", "2", "--mode", "all"]);
    assert!(a.status.success(), "verify must exit 0");
    let b = run(&["verify", "--p", "3", "--k", "1", "--n", "2", "--mode", "all"]);
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
    assert!(stdout(&a).lines().count() > 10);
}

#[test]
fn warm_cache_reproduces_cold_results_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "table", "--p", "3", "--k", "1", "--n", "2", "--mode", "all",
        "--cache-dir", dir.path().to_str().unwrap(),
    ];
    let cold = run(&args);
    assert!(cold.status.success());
    assert!(dir.path().read_dir().unwrap().next().is_some(), "cache populated");
    let warm = run(&args);
    assert_eq!(cold.stdout, warm.stdout);
    let plain = run(&args[..args.len() - 2]);
    assert_eq!(cold.stdout, plain.stdout, "cache must not change results");
}

#[test]
fn cache_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gammaq"))
        .args(["gamma", "--mode", "rs", "--p", "2", "--k", "1", "--n", "2"])
        .env("GAMMAQ_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().read_dir().unwrap().next().is_some());
}

#[test]
fn config_errors_exit_two() {
    let o = run(&["gamma", "--mode", "rs", "--p", "4", "--k", "1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["gamma", "--mode", "rs", "--p", "2", "--n", "2", "--tol", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_overrun_exits_three() {
    let o = run(&[
        "table", "--p", "3", "--k", "1", "--n", "3", "--mode", "rs", "--budget-order", "5",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn csv_output_has_header_and_rows() {
    let o = run(&[
        "table", "--p", "2", "--k", "1", "--n", "2", "--mode", "ext", "--format", "csv",
    ]);
    assert!(o.status.success());
    let body = stdout(&o);
    let mut lines = body.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert!(lines.next().unwrap().starts_with("abs,"));
    assert_eq!(lines.count(), 1, "one ext class at q=2");
}
