use std::path::Path;
use std::process::{Command, Output};

fn wtlife(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wtlife"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn short_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("short.cfg");
    std::fs::write(
        &path,
        format!("# quick run\nduration = 20\nlife.desired_lifetime = 20\nsvr.c_grid = 1\nsvr.eps_grid = 0.01\n{extra}"),
    )
    .unwrap();
    path
}

fn files_with(dir: &Path, prefix: &str) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(prefix))
        .collect();
    names.sort();
    names
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = wtlife(&["gen-wind"], Some(&dir.path().join("nope.cfg")), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn invalid_config_exits_2_listing_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "duration = 0\nlife.band = 2\n").unwrap();
    let out = wtlife(&["synth-gains"], Some(&cfg), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("duration") && err.contains("band"), "{err}");
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(wtlife(&["gen-wind"], Some(&cfg), dir.path()).status.code(), Some(2));
}

#[test]
fn life2_without_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let out = wtlife(&["simulate", "--scheme", "life2"], Some(&cfg), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model"));
}

#[test]
fn report_without_metrics_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = wtlife(&["report"], None, dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = short_config(dir.path(), "");
    let out = wtlife(&["synth-gains"], Some(&cfg), &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_wind_writes_nine_profiles_and_honours_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(wtlife(&["gen-wind"], Some(&cfg), &a).status.success());
    assert!(wtlife(&["gen-wind", "--seed", "7"], Some(&cfg), &b).status.success());
    let names = files_with(&a, "wind_");
    assert_eq!(names.len(), 9);
    assert_eq!(files_with(&a, "wind_train_").len(), 6);
    assert!(names.contains(&"wind_test_w17_ti10.csv".to_string()));
    let f = "wind_test_w19_ti10.csv";
    assert_ne!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
}

#[test]
fn synth_gains_writes_the_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let out = wtlife(&["synth-gains"], None, dir.path());
    assert!(out.status.success());
    assert_eq!(files_with(dir.path(), "gains_").len(), 3);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("damping").count(), 3);
}

#[test]
fn simulate_writes_one_trace_per_wind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let out = wtlife(&["simulate", "--scheme", "life1"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        files_with(dir.path(), "trace_"),
        ["trace_life1_w15.csv", "trace_life1_w17.csv", "trace_life1_w19.csv"]
    );
}

#[test]
fn train_then_benchmark_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "");
    let out = wtlife(&["train-svr"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(files_with(dir.path(), "dataset_").len(), 9);
    assert!(dir.path().join("svr.model").is_file());
    assert!(dir.path().join("svr_report.txt").is_file());

    // the model from train-svr is picked up from the output directory
    let out = wtlife(&["benchmark"], Some(&cfg), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("training one first"));
    assert_eq!(files_with(dir.path(), "trace_").len(), 9);
    assert_eq!(files_with(dir.path(), "plot_").len(), 6);
    assert!(dir.path().join("report.md").is_file());

    let out = wtlife(&["report"], Some(&cfg), dir.path());
    assert!(out.status.success());
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("life1") && table.contains("life2"));
}
