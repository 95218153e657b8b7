use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn mdcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdcf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn digits(step: &Value) -> Vec<i64> {
    step["digits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_i64().unwrap())
        .collect()
}

#[test]
fn expand_trinomial_json() {
    let o = mdcf(&[
        "expand", "--family", "trinomial", "--m", "3", "--strategy", "max-normalized",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["status"]["kind"], "periodic");
    assert_eq!(doc["preperiod_len"], 3);
    assert_eq!(doc["period_len"], 4);
    let steps = doc["steps"].as_array().unwrap();
    assert_eq!(digits(&steps[0]), vec![2, 0]);
    assert_eq!(digits(&steps[3]), vec![0, 1]);
    assert_eq!(steps[0]["pivot"], 1);
}

#[test]
fn expand_pure_quartic_csv() {
    let o = mdcf(&[
        "expand", "--family", "pure-power", "--l", "4", "--m", "2", "--strategy", "unit-pivot",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "n,a_n,b_n,c_n");
    assert_eq!(lines[1], "1,32,4,12");
    assert_eq!(*lines.last().unwrap(), "period,3,3");
}

#[test]
fn expand_with_oracle_reports_no_discrepancy() {
    let o = mdcf(&[
        "expand", "--family", "trinomial", "--m", "5", "--oracle", "--oracle-steps", "60",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["discrepancies"].as_array().unwrap().is_empty());
}

#[test]
fn raw_minpoly_matches_family() {
    let o = mdcf(&[
        "expand", "--minpoly", "1,0,-3,1", "--window", "0,1", "--state", "0,1,0;0,0,1",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let fam = mdcf(&["expand", "--family", "trinomial", "--m", "3", "--format", "csv"]);
    assert_eq!(stdout(&o), stdout(&fam));
}

#[test]
fn raw_dependent_state_is_rejected() {
    let o = mdcf(&[
        "expand", "--minpoly", "1,0,-3,1", "--window", "0,1", "--state", "0,1,0;0,2,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn raw_window_without_root_is_rejected() {
    let o = mdcf(&[
        "expand", "--minpoly", "1,0,-3,1", "--window", "3,4", "--state", "0,1,0;0,0,1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exit_code() {
    let o = mdcf(&[
        "expand", "--family", "trinomial", "--m", "3", "--max-steps", "5", "--format", "table",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("no period within 5 steps"));
}

#[test]
fn invalid_parameters_exit_one() {
    assert_eq!(mdcf(&["expand", "--family", "trinomial", "--m", "2"]).status.code(), Some(1));
    assert_eq!(mdcf(&["expand", "--family", "trinomial"]).status.code(), Some(1));
    assert_eq!(mdcf(&["expand", "--bogus"]).status.code(), Some(1));
}

#[test]
fn verify_trinomial_range() {
    let o = mdcf(&["verify", "--family", "trinomial", "--m", "3..12", "--oracle-steps", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.ends_with("PASS")).count(), 10);
}

#[test]
fn verify_shifted_auto() {
    let o = mdcf(&[
        "verify", "--family", "shifted-cubic", "--a=-2..2", "--b", "auto", "--oracle-steps", "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.ends_with("PASS")).count(), 15);
    assert!(s.contains("a=1 b=0") && s.contains("reduced m=3"));
    assert!(s.contains("oracle agrees with the engine"));
}

#[test]
fn verify_pure_cubic_notes_adjudication() {
    let o = mdcf(&["verify", "--family", "pure-power", "--l", "3", "--m", "2..8", "--oracle-steps", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("table has [8, 4], engine has [12, 4]"));
}

#[test]
fn verify_json_lines() {
    let o = mdcf(&[
        "verify", "--family", "trinomial", "--m", "3..4", "--format", "json", "--sequential",
        "--oracle-steps", "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let reports: Vec<Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["passed"] == true));
}

#[test]
fn fixture_override_is_used() {
    let dir = std::env::temp_dir().join(format!("mdcf-fixtures-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    fs::write(
        dir.join("trinomial_m3.csv"),
        "# mode: max-normalized\n# source: altered\nn,a_n,b_n,policy\n\
         1,9,0,strict\n2,1,0,strict\n3,0,2,strict\n4,0,1,strict\n5,1,1,strict\n\
         6,1,0,strict\n7,1,1,strict\nperiod,4,4\n",
    )
    .unwrap();
    let d = dir.to_str().unwrap();
    let o = mdcf(&["verify", "--family", "trinomial", "--m", "3", "--fixtures", d, "--oracle-steps", "20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let ok = mdcf(&["verify", "--family", "trinomial", "--m", "4", "--fixtures", d, "--oracle-steps", "20"]);
    assert_eq!(ok.status.code(), Some(0));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn jp_constant_digits() {
    let o = mdcf(&["jp", "--k", "2", "--l", "1", "--steps", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(*r, format!("{},1,2", i + 1));
    }
    let o = mdcf(&["jp", "--k", "3", "--l", "3", "--steps", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().skip(1).all(|r| r.ends_with(",3,3")));
}

#[test]
fn jp_rejects_bad_parameters() {
    assert_eq!(mdcf(&["jp", "--k", "1", "--l", "0"]).status.code(), Some(1));
    assert_eq!(mdcf(&["jp", "--k", "1", "--l", "2"]).status.code(), Some(1));
}
