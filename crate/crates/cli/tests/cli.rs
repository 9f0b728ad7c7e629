use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn seqshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqshare"))
        .args(args)
        .env_remove("SEQSHARE_THREADS")
        .output()
        .expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--out", "json"]);
    let o = seqshare(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("json record")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bounds_certifies_all_builtins() {
    let o = seqshare(&["bounds", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        text.lines()
            .filter(|l| l.trim_end().ends_with("OK"))
            .count(),
        10
    );
}

#[test]
fn bounds_with_custom_functional() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "a1b1.toml",
        "name = \"a1b1\"\ncorr = [[1]]\nbound = 1\n",
    );
    let o = seqshare(&[
        "bounds",
        "--seed",
        "1",
        "--functional-file",
        &good,
        "--out",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("a1b1,1,1,OK"));

    let wrong = write(
        dir.path(),
        "wrong.toml",
        "name = \"wrong\"\ncorr = [[1, 1], [1, -1]]\nbound = 1\n",
    );
    let o = seqshare(&["bounds", "--seed", "1", "--functional-file", &wrong]);
    assert_eq!(o.status.code(), Some(3));

    let broken = write(
        dir.path(),
        "broken.toml",
        "corr = [[1, \"x/0\"]]\nbound = 2\n",
    );
    let o = seqshare(&["bounds", "--seed", "1", "--functional-file", &broken]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_presets() {
    for (name, expected) in [
        ("paper-chain3-2bob", vec![4.20, 4.13]),
        ("paper-chain3-3bob", vec![4.00, 4.00, 2.86]),
        ("paper-chain4-2bob", vec![6.00, 5.85]),
    ] {
        let rec = json(&["replay", name, "--seed", "1"]);
        let values = rec["payload"]["replay"]["values"]["values"]
            .as_array()
            .unwrap();
        assert_eq!(values.len(), expected.len());
        for (v, e) in values.iter().zip(&expected) {
            assert!((v.as_f64().unwrap() - e).abs() <= 0.05, "{name}");
        }
    }
    assert_eq!(seqshare(&["replay", "paper-chain9"]).status.code(), Some(2));
}

#[test]
fn eval_matches_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scenario.toml",
        r#"
inequality = "chain3"
state = "singlet"

[scenario]
alice = [[1.19, 1.13], [1.21, 6.28], [1.59, 5.28]]
bobs = [
  [[2.00, 3.70], [1.76, 2.62], [1.34, 1.66]],
  [[2.00, 3.70], [1.76, 2.62], [1.34, 1.66]],
]
lambdas = [0.81, 1.0]
"#,
    );
    let eval = json(&["eval", "--config", &cfg, "--seed", "1"]);
    let replay = json(&["replay", "paper-chain3-2bob", "--seed", "1"]);
    assert_eq!(
        eval["payload"]["eval"],
        replay["payload"]["replay"]["values"]
    );
}

#[test]
fn share_verdicts() {
    let rec = json(&[
        "share",
        "--inequality",
        "chain3",
        "--state",
        "singlet",
        "--bobs",
        "2",
        "--seed",
        "5",
        "--restarts",
        "40",
    ]);
    let share = &rec["payload"]["share"];
    assert_eq!(share["feasible"], Value::Bool(true));
    assert_eq!(
        share["best_scenario"]["lambdas"].as_array().unwrap().len(),
        2
    );

    let rec = json(&[
        "share",
        "--inequality",
        "chsh",
        "--state",
        "werner:0.5",
        "--bobs",
        "1",
        "--seed",
        "5",
        "--restarts",
        "20",
    ]);
    let share = &rec["payload"]["share"];
    assert_eq!(share["feasible"], Value::Bool(false));
    // single-Bob CHSH on Werner(w) peaks at 2 sqrt2 w
    assert!((share["values"]["values"][0].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-4);
}

#[test]
fn robustness_commands() {
    let o = seqshare(&[
        "robustness",
        "--inequality",
        "chain4",
        "--kind",
        "werner",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let rec = json(&[
        "robustness",
        "--inequality",
        "chsh",
        "--kind",
        "werner",
        "--seed",
        "2",
        "--restarts",
        "40",
    ]);
    let w = rec["payload"]["robustness"]["threshold"].as_f64().unwrap();
    assert!((w - 0.89).abs() <= 0.02, "{w}");

    let rec = json(&[
        "robustness",
        "--inequality",
        "chsh",
        "--kind",
        "concurrence",
        "--settings",
        "singlet",
        "--seed",
        "2",
        "--restarts",
        "40",
    ]);
    let c = rec["payload"]["robustness"]["threshold"].as_f64().unwrap();
    assert!((c - 0.76).abs() <= 0.02, "{c}");
}

#[test]
fn csv_column_order() {
    let o = seqshare(&[
        "maxbobs",
        "--inequality",
        "chsh",
        "--seed",
        "3",
        "--restarts",
        "10",
        "--out",
        "csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "table,functional,quantity,policy,value,bracket_lo,bracket_hi,margin,restarts,seed"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[1..5], &["chsh", "max_bobs", "", "2"]);
    assert_eq!(row[9], "3");

    let o = seqshare(&[
        "share",
        "--inequality",
        "chsh",
        "--seed",
        "3",
        "--restarts",
        "5",
        "--out",
        "csv",
    ]);
    assert_eq!(
        stdout(&o).lines().next().unwrap(),
        "functional,state,bobs,margin,feasible,restarts,feasible_restarts,lambdas,values"
    );
}

#[test]
fn records_rerun_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let out = out.to_str().unwrap();
    let o = seqshare(&[
        "share",
        "--inequality",
        "gisin4",
        "--state",
        "werner:0.97",
        "--restarts",
        "8",
        "--out",
        "json",
        "-o",
        out,
    ]);
    assert!(o.status.success());
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("seed:"),
        "entropy seed is announced"
    );
    let o = seqshare(&["rerun", out, "--out", "json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let before: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let after: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(before["payload"], after["payload"]);
    assert_eq!(before["config"], after["config"]);

    let mut tampered = before.clone();
    tampered["payload"]["share"]["margin"] = Value::from(1.0);
    std::fs::write(out, tampered.to_string()).unwrap();
    assert_eq!(seqshare(&["rerun", out]).status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "inequality = \"chain3\"\nrestarts = 5\nseed = 9\nbobs = 1\n",
    );
    let rec = json(&["share", "--config", &cfg, "--restarts", "7"]);
    assert_eq!(rec["config"]["restarts"], Value::from(7));
    assert_eq!(rec["config"]["seed"], Value::from(9));
    assert_eq!(rec["config"]["inequality"], Value::from("chain3"));
    assert_eq!(rec["payload"]["share"]["restarts"], Value::from(7));

    let bad = write(
        dir.path(),
        "bad.toml",
        "inequality = \"chain3\"\nrestart = 5\n",
    );
    assert_eq!(
        seqshare(&["share", "--config", &bad]).status.code(),
        Some(2)
    );
}

#[test]
fn same_seed_same_payload() {
    let args = [
        "share",
        "--inequality",
        "bg",
        "--bobs",
        "2",
        "--seed",
        "77",
        "--restarts",
        "10",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a["payload"], b["payload"]);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(json(&seq)["payload"], a["payload"]);
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_seqshare"))
        .args(["bounds", "--seed", "1"])
        .env("SEQSHARE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_flags_exit_two() {
    assert_eq!(
        seqshare(&["share", "--inequality", "chsh", "--state", "werner:1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        seqshare(&[
            "share",
            "--inequality",
            "chsh",
            "--restarts",
            "0",
            "--seed",
            "1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(seqshare(&["frobnicate"]).status.code(), Some(2));
}
