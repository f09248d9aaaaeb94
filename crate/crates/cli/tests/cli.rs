use std::process::{Command, Output};

use cqs_cli::report::{from_json, to_json};

fn cqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqs")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(cqs(&["expand", "11", "4"]).status.code(), Some(0));
    let bad = cqs(&["expand", "4", "2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("coprime"));
    assert_eq!(cqs(&["expand", "x", "2"]).status.code(), Some(2));
    assert_eq!(cqs(&["components"]).status.code(), Some(2));
    assert_eq!(cqs(&["sweep", "99"]).status.code(), Some(2));
    assert_eq!(cqs(&["poly", "11", "4", "--k", "1,1"]).status.code(), Some(2));
}

#[test]
fn json_report_round_trips() {
    let o = cqs(&["components", "19", "7", "--json", "--verify", "--emit-poly"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let report = from_json(&text).unwrap();
    assert_eq!(to_json(&report) + "\n", text);
    assert_eq!(report.input.p.to_string(), "19");
    for c in &report.components {
        assert_eq!(c.d.rows, c.k.len());
        assert_eq!(c.d.data.len(), c.d.rows * c.d.cols);
        assert_eq!(c.factorization_ok, Some(true));
    }
}

#[test]
fn json_keys_are_sorted() {
    // `Value` keeps object keys in sorted order, so re-rendering is the identity.
    let text = stdout(&cqs(&["components", "11", "4", "--json"]));
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", text);
    assert!(text.find("\"D\"").unwrap() < text.find("\"cumD\"").unwrap());
}

#[test]
fn tsv_matrices() {
    let text = stdout(&cqs(&["components", "11", "4", "--tsv"]));
    assert!(text.contains("# k=(1,2,2,1) D 4x6\n1\t0\t0\t1\t0\t0\n"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 4);
}

#[test]
fn golden_file_mismatch_is_a_verification_failure() {
    let dir = std::env::temp_dir().join(format!("cqs-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wrong.json");
    let doc = r#"{"p": 11, "q": 4, "components": [
        {"k": [1,2,2,1], "D": [[1,0,0,1,0,0],[-1,1,0,0,1,0],[0,-1,1,0,0,0],[0,0,-1,0,0,1]],
         "cumD": [[1,0,0,1,0,0],[0,1,0,1,1,0],[0,0,1,1,1,0],[0,0,0,1,1,1]]},
        {"k": [1,3,1,2], "n": 6, "D": [[1,0,0,1,0],[-1,1,1,0,0],[0,0,-1,0,1],[0,-1,1,0,0]],
         "cumD": [[1,0,0,1,0],[0,1,1,1,0],[0,1,0,1,1],[0,0,1,1,1]]}]}"#;
    std::fs::write(&path, doc).unwrap();
    let o = cqs(&["components", "11", "4", "--perm-eq", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("golden: mismatch"));
    std::fs::write(&path, doc.replace("\"n\": 6,", "")).unwrap();
    let o = cqs(&["components", "11", "4", "--perm-eq", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, "{}").unwrap();
    let o = cqs(&["components", "11", "4", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweeps_from_the_command_line() {
    let o = cqs(&["sweep", "12", "--checks", "gram,fingerprint"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cqs(&["sweep", "10", "--checks", "factorization", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"]["factorization"]["failed"], 0);
    let o = cqs(&["sweep", "6", "--checks", "catalan", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"]["catalan"]["passed"], 6);
}
