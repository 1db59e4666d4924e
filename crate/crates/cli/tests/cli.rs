use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn homperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homperc"))
        .args(args)
        .env_remove("HOMPERC_OUT")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = homperc(args);
    assert!(
        out.status.success(),
        "homperc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_of_rate_zero_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sample", "--d", "3", "--n", "0", "--out", p(dir.path())]);
    assert_eq!(fs::read_to_string(dir.path().join("cloud.csv")).unwrap(), "x0,x1,x2\n");
    let echo = fs::read_to_string(dir.path().join("effective_config.toml")).unwrap();
    assert!(echo.contains("command = \"sample\""));
}

#[test]
fn sample_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        ok(&["sample", "--n", "200", "--seed", seed, "--format", "json", "--out", p(out)]);
    }
    let read = |d: &Path| fs::read(d.join("cloud.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_homperc"))
        .args(["sample", "--n", "5"])
        .env("HOMPERC_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("cloud.csv").exists());
}

#[test]
fn unwritable_output_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = homperc(&["sample", "--n", "5", "--out", p(&blocker.join("sub"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sub"));
}

#[test]
fn percolate_empty_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("empty.csv");
    fs::write(&cloud, "x0,x1\n").unwrap();
    ok(&["percolate", "--cloud", p(&cloud), "--n", "100", "--lambda", "0.3", "--grid", "32", "--out", p(dir.path())]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("outcome.json")).unwrap()).unwrap();
    let all = |key: &str, want: bool| v[key].as_array().unwrap().iter().all(|x| x.as_bool() == Some(want));
    assert!(all("e_occ", false));
    assert!(all("a_vac", true));
    assert_eq!(v["duality"]["pass"], serde_json::json!([true, true, true]));
}

#[test]
fn percolate_coverage_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["percolate", "--n", "4000", "--seed", "5", "--lambda", "0.36", "--grid", "256", "--out", p(out)]);
    }
    for name in ["outcome.json", "outcome.csv", "effective_config.toml"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }

    let c = dir.path().join("c");
    ok(&["percolate", "--n", "500", "--lambda", "8", "--grid", "128", "--out", p(&c)]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(c.join("outcome.json")).unwrap()).unwrap();
    assert!(v["a_occ"].as_array().unwrap().iter().all(|x| x == true));
}

#[test]
fn percolate_refuses_oversized_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = homperc(&[
        "percolate", "--d", "3", "--n", "100", "--lambda", "0.1", "--grid", "2048", "--memory-budget-mb", "64",
        "--out", p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("outcome.json").exists());
}

#[test]
fn onearm_parameter_errors_and_empty_process() {
    let dir = tempfile::tempdir().unwrap();
    let out = homperc(&["onearm", "--n", "1000", "--lambda", "0.2", "--radii", "0.5", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = homperc(&["onearm", "--n", "1000", "--lambda", "0.2", "--mode", "ball", "--phase", "vacancy", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));

    ok(&["onearm", "--n", "1000", "--lambda", "0", "--trials", "20", "--radii", "0.1,0.2", "--out", p(dir.path())]);
    let csv = fs::read_to_string(dir.path().join("onearm.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(3), Some("0"), "{line}");
    }
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("onearm_fit.json")).unwrap()).unwrap();
    assert!(fit["fit"].is_null());
}

#[test]
fn crossing_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["crossing", "--n", "2000", "--lambda", "2", "--trials", "10", "--out", p(dir.path())]);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("crossing_summary.json")).unwrap()).unwrap();
    assert_eq!(v["crossing_freq"], 1.0);
    assert_eq!(fs::read_to_string(dir.path().join("crossing.csv")).unwrap().lines().count(), 11);
}

#[test]
fn sweep_single_trial_has_no_interval() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep", "--d", "2", "--n", "500", "--trials", "1", "--grid", "128", "--out", p(dir.path())]);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().skip(1).all(|l| l.ends_with("insufficient for CI")));
    assert_eq!(fs::read_to_string(dir.path().join("records.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn sweep_without_manifest_needs_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = homperc(&["sweep", "--d", "2", "--trials", "1", "--grid", "64", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n"));
}

fn sorted_lines(path: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_to_string(path).unwrap().lines().map(String::from).collect();
    v.sort();
    v
}

#[test]
fn sweep_resume_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.toml");
    fs::write(
        &manifest,
        "d = 2\nn = [300.0, 600.0]\ntrials = 4\nseed = 11\n\n[grid]\nrule = \"fixed\"\nm = 96\n",
    )
    .unwrap();
    let (full, part) = (dir.path().join("full"), dir.path().join("part"));
    ok(&["sweep", "--manifest", p(&manifest), "--out", p(&full)]);

    let lines: Vec<String> = fs::read_to_string(full.join("records.jsonl")).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 8);
    fs::create_dir_all(&part).unwrap();
    fs::write(part.join("records.jsonl"), format!("{}\n{}\n{}\n", lines[5], lines[0], lines[2])).unwrap();
    ok(&["sweep", "--manifest", p(&manifest), "--out", p(&part)]);

    assert_eq!(sorted_lines(&full.join("records.jsonl")), sorted_lines(&part.join("records.jsonl")));
    assert_eq!(
        fs::read(full.join("summary.csv")).unwrap(),
        fs::read(part.join("summary.csv")).unwrap()
    );

    // the echoed config is itself a manifest that reproduces the campaign
    let again = dir.path().join("again");
    let echo = full.join("effective_config.toml");
    ok(&["sweep", "--manifest", p(&echo), "--out", p(&again)]);
    assert_eq!(sorted_lines(&full.join("records.jsonl")), sorted_lines(&again.join("records.jsonl")));
}

#[test]
fn sweep_refuses_corrupt_results_file() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep", "--d", "2", "--n", "300", "--trials", "2", "--grid", "64", "--out", p(dir.path())]);
    let path = dir.path().join("records.jsonl");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("{\"d\": 2, \"n\": 300.0, \"ind\n");
    fs::write(&path, &text).unwrap();
    let out = homperc(&["sweep", "--d", "2", "--n", "300", "--trials", "3", "--grid", "64", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn flags_override_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.toml");
    fs::write(&manifest, "d = 2\nn = [300.0]\ntrials = 3\nseed = 1\n\n[grid]\nrule = \"fixed\"\nm = 64\n").unwrap();
    ok(&["sweep", "--manifest", p(&manifest), "--trials", "2", "--seed", "4", "--out", p(dir.path())]);
    assert_eq!(fs::read_to_string(dir.path().join("records.jsonl")).unwrap().lines().count(), 2);
    let echo = fs::read_to_string(dir.path().join("effective_config.toml")).unwrap();
    assert!(echo.contains("trials = 2") && echo.contains("seed = 4"), "{echo}");
}

#[test]
fn report_rebuilds_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep", "--d", "2", "--n", "200,400,800", "--trials", "3", "--grid", "auto", "--out", p(dir.path())]);
    let rep = dir.path().join("rep");
    ok(&["report", "--records", p(&dir.path().join("records.jsonl")), "--out", p(&rep)]);
    for name in ["summary.csv", "curves.csv", "separation.csv", "scaling.json"] {
        assert!(rep.join(name).exists(), "{name}");
    }
    let out = homperc(&["report", "--records", p(&dir.path().join("missing.jsonl")), "--out", p(&rep)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_manifest_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.toml");
    fs::write(&manifest, "d = 2\nn = [300.0]\ntrials = \"many\"\nseed = 1\n").unwrap();
    let out = homperc(&["sweep", "--manifest", p(&manifest), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
