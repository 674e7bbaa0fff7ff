use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dqnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqnn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn estimate_prints_the_closed_form_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(dir.path(), &["estimate", "--n", "1", "--N", "10", "--D", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.225\n");
    let table = fs::read_to_string(dir.path().join("dqnn-out/estimate.csv")).unwrap();
    assert_eq!(table, "n,N,D,orthogonal,estimate\n1,10,8,false,0.225\n");
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("generalize"));
}

#[test]
fn usage_errors_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (&["train"], "seed"),
        (&["train", "--seed", "1", "--rounds", "many"], "rounds"),
        (&["train", "--seed", "1", "--colour", "red"], "--colour"),
        (&["estimate", "--n", "1", "--N", "10"], "`D`"),
    ];
    for (args, field) in cases {
        let o = dqnn(dir.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn config_document_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"seed": 5, "rounds": 3, "widths": [1, 1], "N": 2}"#).unwrap();
    let o = dqnn(dir.path(), &["train", "--config", "c.json", "--rounds", "2", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let history = fs::read_to_string(dir.path().join("o/history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 3);
    let resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/resolved-config.json")).unwrap()).unwrap();
    assert_eq!(resolved["rounds"], 2);
    assert_eq!(resolved["seed"], 5);
    assert_eq!(resolved["epsilon"], 0.1);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"seed": 5, "roundz": 3}"#).unwrap();
    let o = dqnn(dir.path(), &["train", "--config", "c.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("roundz"), "{}", stderr(&o));
}

#[test]
fn zero_rounds_write_one_history_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(dir.path(), &["train", "--seed", "9", "--rounds", "0", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let history = fs::read_to_string(dir.path().join("o/history.csv")).unwrap();
    let rows: Vec<&str> = history.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "round,cost");
    assert!(rows[1].starts_with("0,"));
    let net = fs::read_to_string(dir.path().join("o/network.json")).unwrap();
    let back = dqnn::Network64::from_json(&net).unwrap();
    assert_eq!(back.topology().widths(), &[2, 3, 2]);
}

#[test]
fn generalize_table_has_one_row_per_n_with_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "generalize", "--seed", "2", "--widths", "1,1", "--N", "4", "--n", "1-4", "--rounds", "5", "--replicates", "2",
    ];
    let o = dqnn(dir.path(), &[&args[..], &["--out", "o"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("generalize:"));
    let table = fs::read_to_string(dir.path().join("o/generalization.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "n,mean_cost,std_cost,estimate,replicates,master_seed");
    assert_eq!(rows.len(), 5);
    assert!(rows[4].starts_with("4,") && rows[4].contains(",1.0,2,2"), "{}", rows[4]);

    let o = dqnn(dir.path(), &[&args[..], &["--format", "json", "--out", "j"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("j/generalization.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["records"].as_array().unwrap().len(), 4);
}

#[test]
fn noise_and_resources_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(
        dir.path(),
        &["noise", "--seed", "3", "--widths", "1,1", "--N", "4", "--noisy", "0,2,4", "--rounds", "3", "--replicates", "1", "--out", "o"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("o/noise.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("n_noisy,mean_good_cost,std,replicates,master_seed\n"));

    let o = dqnn(dir.path(), &["resources", "--widths", "2,2", "--N", "10", "--shots", "100", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("r/resources.txt")).unwrap();
    assert!(text.contains("gates_and_perceptrons = 5000\n"), "{text}");
}

#[test]
fn numeric_and_io_failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(dir.path(), &["train", "--seed", "1", "--widths", "2,3", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = dqnn(dir.path(), &["train", "--seed", "1", "--epsilon", "-1", "--out", "o"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = dqnn(dir.path(), &["train", "--seed", "1", "--network", "missing.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = dqnn(dir.path(), &["estimate", "--n", "1", "--N", "2", "--D", "2", "--out", "blocker/x"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn trained_network_can_be_reloaded() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqnn(dir.path(), &["train", "--seed", "4", "--widths", "1,2,1", "--rounds", "20", "--out", "a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dqnn(dir.path(), &["swaptest", "--seed", "4", "--network", "a/network.json", "--shots", "50", "--out", "b"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("b/swaptest.csv")).unwrap();
    assert_eq!(table.lines().count(), 11);
}

#[test]
fn reruns_are_byte_identical() {
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &runs {
        let o = dqnn(dir.path(), &["train", "--seed", "11", "--rounds", "4", "--record-norms", "--out", "o"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["history.csv", "network.json", "resolved-config.json"] {
        let a = fs::read(runs[0].path().join("o").join(name)).unwrap();
        let b = fs::read(runs[1].path().join("o").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
