use std::path::Path;
use std::process::{Command, Output};

fn apf_ddpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apf-ddpg"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"{
    "episodes": 4,
    "runs": 2,
    "max_steps": 15,
    "actor_hidden": [16],
    "critic_hidden": [16],
    "apf_hidden": [8],
    "batch_size": 8,
    "trajectory_capacity": 20
}"#;

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    std::fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn train_compare_eval_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path());
    let out = tmp.path().join("results");
    let out_s = out.to_str().unwrap();

    for agent in ["ddpg", "apf-ddpg"] {
        let o = apf_ddpg(&["train", "--config", &config, "--agent", agent, "--out", out_s, "--quiet"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stderr.is_empty(), "quiet run wrote to stderr");
    }
    let csv = std::fs::read_to_string(out.join("apf-ddpg_episodes.csv")).unwrap();
    assert!(csv.starts_with("run_id,episode,reward,steps,terminal\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    assert!(out.join("apf-ddpg_run01_apf.net").exists());

    let o = apf_ddpg(&[
        "compare",
        out.join("apf-ddpg_episodes.csv").to_str().unwrap(),
        out.join("ddpg_episodes.csv").to_str().unwrap(),
        "--threshold",
        "-10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("apf-ddpg") && text.contains("student") && text.contains("welch"), "{text}");
    let report = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(report.starts_with("metric,agent,run_id,value\n"));

    let o = apf_ddpg(&[
        "eval",
        "--model",
        out.join("ddpg_run00_actor.net").to_str().unwrap(),
        "--config",
        &config,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = String::from_utf8_lossy(&o.stdout);
    let steps = trace.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count();
    assert!((1..=15).contains(&steps), "{trace}");
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path());
    let run = |sub: &str| {
        let dir = tmp.path().join(sub);
        let o = apf_ddpg(&["train", "--config", &config, "--seed", "13", "--out", dir.to_str().unwrap(), "--quiet"]);
        assert!(o.status.success());
        (
            std::fs::read(dir.join("apf-ddpg_episodes.csv")).unwrap(),
            std::fs::read(dir.join("apf-ddpg_run00_actor.net")).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"episodez": 3}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["train", "--config", bad.to_str().unwrap()],
        vec!["train", "--config", "/definitely/missing.json"],
        vec!["train", "--agent", "td3"],
        vec!["train", "--episodes", "0", "--quiet"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = apf_ddpg(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_errors_exit_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    let junk = tmp.path().join("junk.csv");
    std::fs::write(&junk, "not,a,episode,file\n").unwrap();
    let o = apf_ddpg(&["compare", junk.to_str().unwrap(), junk.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = apf_ddpg(&["eval", "--model", tmp.path().join("none.net").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
