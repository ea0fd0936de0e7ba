use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qstruct(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qstruct"));
    cmd.args(args).env_remove("QSTRUCT_OUTPUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("QSTRUCT_OUTPUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cfg: &Path, extra: &[&str], out: &Path) -> Output {
    let mut args = vec!["run", "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    qstruct(&args, Some(out))
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn list_is_sorted_and_stable() {
    let a = qstruct(&["list"], None);
    let b = qstruct(&["list"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names.len(), 10);
    assert!(names.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn missing_seed_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = nz-lemmas\ncount = 3\n");
    let o = run(&cfg, &[], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (i, body) in [
        "experiment = nz-lemmas\nseed = 1\nbogus = 3\n",
        "experiment = no-such-thing\nseed = 1\n",
        "experiment = nz-lemmas\nseed = 1\ncount = \"many\"\n",
        "experiment = nz-lemmas\nseed = 1\nseed = 2\n",
        "experiment = supplement-algebra\nseed = 1\nsites = 0\n",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_cfg(dir.path(), &format!("c{i}.cfg"), body);
        assert_eq!(run(&cfg, &[], &out).status.code(), Some(2), "{body}");
    }
    assert!(!out.exists());
    let missing = dir.path().join("absent.cfg");
    assert_eq!(run(&missing, &[], &out).status.code(), Some(2));
}

#[test]
fn truncation_failure_exits_3_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = amplitude-damping\nseed = 1\ndim = 4\n");
    let o = run(&cfg, &[], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncation"));
    assert!(!out.exists());
}

#[test]
fn failed_check_exits_1_but_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // no re-factorization, so no discord appears afterwards
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = discord-relativity\nseed = 1\ntheta = 0\ngrid = 10\nrestarts = 4\n");
    let o = run(&cfg, &[], &out);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&out.join("discord-relativity.json"));
    assert_eq!(v["pass"]["after_positive"], false);
    assert_eq!(v["pass"]["before_zero"], true);
}

#[test]
fn csv_has_one_row_per_metric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = supplement-algebra\nseed = 1\n");
    assert!(run(&cfg, &[], &out).status.success());
    assert!(run(&cfg, &["--format", "csv"], &out).status.success());
    let v = json(&out.join("supplement-algebra.json"));
    let csv = std::fs::read_to_string(out.join("supplement-algebra.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "metric,value");
    assert_eq!(lines.len(), v["metrics"].as_object().unwrap().len() + 1);
    for row in &lines[1..] {
        let (k, x) = row.split_once(',').unwrap();
        assert_eq!(x.parse::<f64>().unwrap(), v["metrics"][k].as_f64().unwrap(), "{k}");
    }
}

#[test]
fn output_directory_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let from_cfg = dir.path().join("from-config");
    let from_env = dir.path().join("from-env");
    let cfg = write_cfg(
        dir.path(),
        "a.cfg",
        &format!("experiment = nz-lemmas\nseed = 5\ncount = 4\noutput_dir = \"{}\"\n", from_cfg.display()),
    );
    let o = Command::new(env!("CARGO_BIN_EXE_qstruct"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env_remove("QSTRUCT_OUTPUT_DIR")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&from_cfg.join("nz-lemmas.json"))["seed"], 5);

    assert!(run(&cfg, &["--seed", "77"], &from_env).status.success());
    let v = json(&from_env.join("nz-lemmas.json"));
    assert_eq!(v["seed"], 77);
    assert_eq!(v["artifacts"][0], "nz-lemmas.json");
    assert_eq!(v["schema"], "qstruct-report/1");
}

#[test]
fn batch_runs_land_in_per_config_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let a = write_cfg(dir.path(), "first.cfg", "experiment = nz-lemmas\nseed = 1\ncount = 4\n");
    let b = write_cfg(dir.path(), "second.cfg", "experiment = nz-lemmas\nseed = 2\ncount = 4\n");
    let o = qstruct(&["run", "--config", a.to_str().unwrap(), "--config", b.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("first/nz-lemmas.json"))["seed"], 1);
    assert_eq!(json(&out.join("second/nz-lemmas.json"))["seed"], 2);

    let clash = dir.path().join("sub");
    std::fs::create_dir(&clash).unwrap();
    let c = write_cfg(&clash, "first.cfg", "experiment = nz-lemmas\nseed = 3\n");
    let o = qstruct(&["run", "--config", a.to_str().unwrap(), "--config", c.to_str().unwrap()], Some(&out));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = zero-discord-classifier\nseed = 9\ncount = 10\n");
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert!(run(&cfg, &[], &x).status.success());
    assert!(run(&cfg, &[], &y).status.success());
    let name = "zero-discord-classifier.json";
    assert_eq!(std::fs::read(x.join(name)).unwrap(), std::fs::read(y.join(name)).unwrap());
}

#[test]
fn resonant_pair_attains_the_floor_in_center_of_mass_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(
        dir.path(),
        "a.cfg",
        "experiment = two-mode-asymptotics\nseed = 1\ncoefficients = cm-relative\nmasses = [1, 1]\nomegas = [1, 1]\n",
    );
    assert!(run(&cfg, &[], &out).status.success());
    let v = json(&out.join("two-mode-asymptotics.json"));
    assert_eq!(v["pass"]["uncertainty_floor"], true);
    assert!(v["metrics"]["C_infinity"].as_f64().unwrap().abs() <= 1e-9);
    for k in ["product_a", "product_b"] {
        assert!((v["metrics"][k].as_f64().unwrap() - 0.5).abs() <= 1e-9, "{k}");
    }
}

#[test]
fn default_discord_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_cfg(dir.path(), "a.cfg", "experiment = discord-relativity\nseed = 3\n");
    let o = run(&cfg, &[], &out);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("discord-relativity: PASS"));
    let v = json(&out.join("discord-relativity.json"));
    assert!(v["metrics"]["discord_after"].as_f64().unwrap() > 1e-3);
    assert!(v["metrics"]["discord_before"].as_f64().unwrap() <= 1e-6);
}
