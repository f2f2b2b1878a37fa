use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn ima_lab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ima-lab"));
    cmd.args(args).env_remove("IMA_LAB_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn sha(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

fn small_sweep() -> Value {
    json!({"command": "sweep", "params": {"m_list": [4, 16, 64], "trials": 200}})
}

fn run_into(cmd: &str, dir: &Path, cfg: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.to_string_lossy().into_owned();
    let mut args = vec![cmd, "--config", cfg, "--output-dir", &out];
    args.extend(extra);
    let o = ima_lab(&args, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(format!("{cmd}.csv"))
}

#[test]
fn help_lists_defaults() {
    let o = ima_lab(&["sweep", "--help"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"m_list\""), "{text}");
    assert!(text.contains("2048"));
    assert!(text.contains("--threads"));
}

#[test]
fn single_column_sweep_always_succeeds() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        &json!({"command": "sweep", "params": {"d": 1, "m_list": [2, 9], "trials": 100}}),
    );
    let out = tmp.path().join("out");
    let o = ima_lab(
        &[
            "sweep",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers
        .iter()
        .position(|h| h == "empirical_success")
        .unwrap();
    let values: Vec<String> = reader
        .records()
        .map(|r| r.unwrap()[col].to_string())
        .collect();
    assert_eq!(values, ["1.0", "1.0"]);
}

#[test]
fn unknown_key_exits_2_without_writing() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        &json!({"command": "sweep", "params": {"trails": 100}}),
    );
    let out = tmp.path().join("out");
    let o = ima_lab(
        &[
            "sweep",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
    assert_eq!(err["error"], "Config");
    assert!(!out.exists());
}

#[test]
fn rank_deficient_matrix_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "contrast.json",
        &json!({"command": "contrast",
                "params": {"matrix": [[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]}}),
    );
    let out = tmp.path().join("out");
    let o = ima_lab(
        &[
            "contrast",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 3);
    assert!(!out.exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", &small_sweep());
    let a = run_into("sweep", &tmp.path().join("a"), &cfg, &["--seed", "5"]);
    let b = run_into("sweep", &tmp.path().join("b"), &cfg, &["--seed", "5"]);
    assert_eq!(sha(&a), sha(&b));
    let c = run_into("sweep", &tmp.path().join("c"), &cfg, &["--seed", "6"]);
    assert_ne!(sha(&a), sha(&c));
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "genericity.json",
        &json!({"command": "genericity",
                "params": {"m_list": [8, 32], "trials": 12, "n_mc": 300}}),
    );
    let one = run_into(
        "genericity",
        &tmp.path().join("one"),
        &cfg,
        &["--threads", "1"],
    );
    let four = run_into(
        "genericity",
        &tmp.path().join("four"),
        &cfg,
        &["--threads", "4"],
    );
    assert_eq!(std::fs::read(one).unwrap(), std::fs::read(four).unwrap());
}

#[test]
fn manifest_replays_the_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", &small_sweep());
    let first = run_into("sweep", &tmp.path().join("first"), &cfg, &["--seed", "17"]);
    let manifest_path = tmp.path().join("first/manifest.json");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 17);
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["params"]["trials"], 200);
    assert_eq!(manifest["params"]["delta"], 0.1);

    let replay = run_into(
        "sweep",
        &tmp.path().join("replay"),
        manifest_path.to_str().unwrap(),
        &[],
    );
    assert_eq!(sha(&first), sha(&replay));
}

#[test]
fn seed_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", &small_sweep());
    let flag = run_into("sweep", &tmp.path().join("flag"), &cfg, &["--seed", "99"]);
    let env_dir = tmp.path().join("env");
    let o = ima_lab(
        &[
            "sweep",
            "--config",
            &cfg,
            "--output-dir",
            env_dir.to_str().unwrap(),
        ],
        &[("IMA_LAB_SEED", "99")],
    );
    assert!(o.status.success());
    assert_eq!(sha(&flag), sha(&env_dir.join("sweep.csv")));
    let manifest = std::fs::read_to_string(env_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 99"));

    let o = ima_lab(
        &[
            "sweep",
            "--config",
            &cfg,
            "--output-dir",
            env_dir.to_str().unwrap(),
        ],
        &[("IMA_LAB_SEED", "not-a-seed")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_for_another_command_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", &small_sweep());
    let o = ima_lab(&["spurious", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
}
