use std::path::Path;
use std::process::{Command, Output};

use rotn_core::harness::read_config;

fn rotn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotn"))
        .args(args)
        .output()
        .expect("spawn rotn")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn tower_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tower.json");
    let o = rotn(&[
        "tower",
        "--alpha",
        "[0;5,(6)]",
        "--depth",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["table"]["rows"].as_array().unwrap().len(), 12);
    read_config(&text).unwrap();
}

#[test]
fn density_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gaps.csv");
    let o = rotn(&[
        "density",
        "--m",
        "-1",
        "--k",
        "1",
        "--N",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = read(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {\"tool\":\"rotn\""));
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "N,count,max_gap");
    assert_eq!(lines.count(), 5);
}

#[test]
fn exact_only_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rotn(&[
            "--precision",
            "exact-only",
            "density",
            "--m",
            "2",
            "--N",
            "3000",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(read(&a), read(&b));
}

#[test]
fn failing_check_exits_nonzero() {
    let o = rotn(&["heavy", "--alpha", "[0;5,(6)]", "--N", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("FAIL"));
    let o = rotn(&["density", "--m", "0", "--N", "100", "--max-gap", "0.0001"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_with_usage_error() {
    assert_eq!(
        rotn(&["tower", "--alpha", "[0;4,(6)]"]).status.code(),
        Some(2)
    );
    assert_eq!(
        rotn(&["leaf", "--through", "2", "--level", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rotn(&["leaf"]).status.code(), Some(2));
}

#[test]
fn leaf_example_and_oracle_pass() {
    for args in [
        &["leaf", "--ray", "0", "--N", "2000"][..],
        &[
            "leaf",
            "--through",
            "(1+a)/2",
            "--level",
            "0",
            "--backward",
            "--N",
            "500",
        ],
        &["example", "--m", "2", "--kmax", "3", "--N", "5000"],
        &["oracle", "--depth", "3", "--samples", "10"],
        &["heavy", "--N", "10000"],
    ] {
        let o = rotn(args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let stdout = String::from_utf8(o.stdout).unwrap();
        read_config(&stdout).unwrap();
    }
}
