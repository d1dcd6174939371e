use std::process::{Command, Output};

fn boostlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boostlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bounds_table_to_stdout() {
    let o = boostlab(&["bounds-table", "--no-header-meta"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("cell,seed,d,m,delta,gamma,constant,status"));
    assert!(lines.next().unwrap().contains(",18.599"));
}

#[test]
fn grid_flags_and_seed_ranges() {
    let o = boostlab(&["adversary-sim", "--seeds", "1..4", "--p", "1,2", "--m", "64", "--d", "8", "--no-header-meta"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 8);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Pr[E]"));
}

#[test]
fn exit_codes() {
    assert_eq!(boostlab(&["sampled-boost", "--gamma", "0.7"]).status.code(), Some(2));
    assert_eq!(boostlab(&["sampled-boost", "--dataset", "negated", "--m", "10"]).status.code(), Some(3));
    assert_eq!(boostlab(&["bounds-table", "--param", "nonsense=1"]).status.code(), Some(2));
    assert_eq!(boostlab(&["tail-check", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn config_file_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind": "sampled-boost", "parameters": {"m": 30, "gamma": [0.2, 0.15], "include_concept": false},
            "seeds": [1, 2], "output": {"format": "csv"}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = boostlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-header-meta"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 5);
}

#[test]
fn header_meta_by_default() {
    let o = boostlab(&["bounds-table"]);
    assert!(stdout(&o).starts_with("# boostlab bounds-table generated_at_unix="));
}
