use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_density-forge"))
        .args(args)
        .env_remove("DENSITY_FORGE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn density_profile_of_evens_has_half_at_ten() {
    let o = forge(&["density-profile", "--set", "evens", "--schedule", "upto:20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("n,count,numerator,denominator,unresolved,decimal_lossy\n"));
    assert!(text.lines().any(|l| l == "10,5,1,2,0,0.500000"), "{text}");
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn oscillator_bounds_check_exits_zero() {
    let o = forge(&["oscillator", "--base", "omega", "--schedule", "factorials:6", "--check-bounds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{text}");
}

#[test]
fn simulate_jump_first_picks_are_one_and_six() {
    let dir = tempfile::tempdir().unwrap();
    let family = write(dir.path(), "id.json", r#"[{"kind": "perm", "combinator": "identity"}]"#);
    let rulers: Vec<String> = (0..8).map(|e| format!(r#"{{"kind": "set", "combinator": "ruler", "args": [{e}]}}"#)).collect();
    let targets = write(dir.path(), "rulers.json", &format!("[{}]", rulers.join(",")));
    let set_out = dir.path().join("a.json");
    let o = forge(&[
        "simulate-jump",
        "--family",
        &family,
        "--targets",
        &targets,
        "--stages",
        "5",
        "--set-out",
        set_out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let log: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let picks: Vec<u64> = log["picks"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(&picks[..2], &[1, 6]);
    assert_eq!(log["partial"], Value::Bool(false));
    assert_eq!(log["stages"].as_array().unwrap().len(), 5);

    // The written set loads back and contains exactly the picks.
    let o = forge(&["density-profile", "--set", set_out.to_str().unwrap(), "--schedule", "145"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\n145,5,1,29,0,"));
}

#[test]
fn malformed_spec_reports_path_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kind": "set", "combinator": "union", "args": ["evens", {"combinator": "ruler", "args": [-1]}]}"#);
    let o = forge(&["density-profile", "--set", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("$.args[1].args[0]"), "{}", stderr(&o));

    let broken = write(dir.path(), "broken.json", "{\n  \"combinator\": \n");
    let o = forge(&["density-profile", "--set", &broken]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = forge(&["density-profile", "--set", "no-such-set"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown set combinator"));
}

#[test]
fn budget_exhaustion_exits_two_with_partial_flag() {
    let o = forge(&[
        "density-profile",
        "--set",
        r#"{"combinator": "omega", "delays": {"3": "never"}}"#,
        "--schedule",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["partial"], Value::Bool(true));
    assert_eq!(doc["rows"][0]["unresolved"], 1);
    assert_eq!(doc["rows"][0]["count"], 4);
}

#[test]
fn env_budget_is_the_default_and_the_flag_wins() {
    let spec = r#"{"combinator": "omega", "delays": {"0": 500}}"#;
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_density-forge"));
        cmd.args(["density-profile", "--set", spec, "--schedule", "1"]);
        if let Some(f) = flag {
            cmd.args(["--budget", f]);
        }
        match env {
            Some(v) => cmd.env("DENSITY_FORGE_BUDGET", v),
            None => cmd.env_remove("DENSITY_FORGE_BUDGET"),
        };
        cmd.output().unwrap().status.code()
    };
    assert_eq!(run(None, None), Some(0));
    assert_eq!(run(Some("10"), None), Some(2));
    assert_eq!(run(Some("10"), Some("10000")), Some(0));
    assert_eq!(run(Some("lots"), None), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 4] = [
        &["density-profile", "--set", "random:7:1:3", "--schedule", "alternating:3", "--format", "json"],
        &["gaps", "--set", "omega", "--stages", "3", "--format", "json"],
        &["simulate-jump", "--family", r#"["identity", "xor:1"]"#, "--targets", "rulers:6", "--stages", "4"],
        &["smallness", "--set", "factorials", "--perm", "identity", "--perm", "block_reverse:6", "--window", "720"],
    ];
    for args in cases {
        let (a, b) = (forge(args), forge(args));
        assert_eq!(a.status.code(), b.status.code());
        assert!(!a.stdout.is_empty(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn build_perm_writes_a_loadable_table_spec() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("perm.csv");
    let spec = dir.path().join("perm.json");
    let o = forge(&[
        "build-perm",
        "--construction",
        "permutation",
        "--func",
        "affine:2:0",
        "--h",
        r#"{"combinator": "periodic", "args": [4, [0]]}"#,
        "--window",
        "16",
        "--out",
        csv.to_str().unwrap(),
        "--spec-out",
        spec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = std::fs::read_to_string(&csv).unwrap();
    let values: Vec<u64> = table.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 16);
    let mut sorted = values.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 16, "table is injective");

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&spec).unwrap()).unwrap();
    assert_eq!(doc["combinator"], "table_file");
    assert_eq!(doc["kind"], "perm");
    let o = forge(&["smallness", "--set", "evens", "--perm", spec.to_str().unwrap(), "--window", "16", "--tail-start", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn gaps_emit_e_u_m_and_stall_honestly() {
    let o = forge(&["gaps", "--set", "omega", "--stages", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "e,u,m\n0,1,2\n1,5,11\n2,40,121\n3,537,2149\n");

    let o = forge(&["gaps", "--set", "evens", "--stages", "3", "--stage-budget", "20000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["partial"], Value::Bool(true));
    assert!(doc["diagnostic"].is_object());
}

#[test]
fn diagonal_patch_round_trips_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = forge(&[
        "diagonal",
        "--set",
        "evens",
        "--machines",
        r#"["constant:0", "constant:1"]"#,
        "--designated",
        "0:2,1:4",
        "--set-out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true")));
    let o = forge(&["density-profile", "--set", out.to_str().unwrap(), "--schedule", "6"]);
    // Evens below 6 are {0, 2, 4}; 2 stays in, 4 is flipped out.
    assert!(stdout(&o).contains("\n6,2,1,3,0,"), "{}", stdout(&o));

    let o = forge(&["diagonal", "--set", "evens", "--machines", "constant:0", "--designated", "0:3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn remaining_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let array = write(dir.path(), "array.json", "[[0, 1], [2, 5], [3], [9, 10]]");
    let cases: [(&[&str], i32); 7] = [
        (&["thin-ce", "--set", r#"{"combinator": "enumerable", "args": ["evens"]}"#, "--count", "4"], 0),
        (&["factorial-code", "--set", "evens", "--window", "30"], 0),
        (&["ruler", "--window", "100"], 0),
        (&["ruler", "--e", "2", "--schedule", "upto:16"], 0),
        (&["trace", "--perm", "identity", "--set", "factorials", "--window", "720"], 0),
        (&["array-collapse", "--array", &array, "--window", "12", "--normalize", "3"], 0),
        (&["oracle-collapse", "--machine", "echo", "--set", "evens", "--n", "4"], 0),
    ];
    for (args, code) in cases {
        let o = forge(args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        assert!(!o.stdout.is_empty(), "{args:?}");
    }
    let o = forge(&["describe-eval", "--desc", r#"{"combinator": "characteristic", "args": ["evens"]}"#, "--set", "evens", "--window", "10", "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["valid"], Value::Bool(true));
    assert_eq!(doc["errors"].as_array().unwrap().len(), 0);
}
