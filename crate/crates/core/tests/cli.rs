use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobenius"))
        .args(args)
        .env_remove("FROBENIUS_MAX_FIBER_DIM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_filtration_reports_every_point() {
    let o = run(&["verify-filtration", "--p", "2,3", "--n", "1,2", "--r", "1,2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["command"], "verify-filtration");
    assert_eq!(doc["summary"]["grid_points"], 8);
    assert_eq!(doc["summary"]["status"], "pass");
    for entry in doc["reports"].as_array().unwrap() {
        assert!(entry["clause"].is_string() && entry["paper_ref"].is_string());
        assert!(["pass", "not_applicable"].contains(&entry["status"].as_str().unwrap()));
    }
}

#[test]
fn exit_codes() {
    let o = run(&["verify-filtration", "--p", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4 is not prime"));
    assert_eq!(run(&["verify-filtration", "--p", "7", "--n", "3"]).status.code(), Some(3));
    assert_eq!(run(&["verify-filtration", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["slope-certify", "--p", "3", "--rank-e", "4"]).status.code(), Some(2));
    assert_eq!(run(&["verify-filtration", "--max-fiber-dim", "0"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn raised_caps_lift_the_refusal() {
    let o = run(&["verify-filtration", "--p", "5", "--n", "3", "--max-fiber-dim", "64"]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_frobenius"))
        .args(["verify-filtration", "--p", "2", "--n", "3"])
        .env("FROBENIUS_MAX_FIBER_DIM", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn rep_dims_csv() {
    let o = run(&["rep-dims", "--p", "3", "--n", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,n,l,dim,sym_dim,equal_flag"));
    let dims: Vec<&str> = lines.map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(dims, ["1", "2", "3", "2", "1"]);
}

#[test]
fn slope_certify_summary() {
    let o = run(&["slope-certify", "--g", "2", "--p", "3", "--rank-w", "1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let bounds: Vec<String> = reader.records().map(|r| r.unwrap()[9].to_string()).collect();
    assert_eq!(bounds, ["2/3", "1/3", "0/1"]);

    let o = run(&["slope-certify", "--g", "1", "--p", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc["summary"]["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r[13] == "not applicable (g<2)"));
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("frobenius-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let args = ["rep-dims", "--p", "2", "--n", "2", "--seed", "3", "--format", "json"];
    let direct = run(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let o = run(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_changes_nothing_but_the_config() {
    let a = stdout(&run(&["rep-dims", "--p", "3", "--n", "2", "--seed", "1", "--format", "json"]));
    let b = stdout(&run(&["rep-dims", "--p", "3", "--n", "2", "--seed", "2", "--format", "json"]));
    let strip = |s: &str| {
        let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
        v["config"]["seed"] = serde_json::Value::Null;
        for e in v["reports"].as_array_mut().unwrap() {
            e["detail"] = serde_json::Value::Null;
        }
        v
    };
    assert_ne!(a, b);
    assert_eq!(strip(&a), strip(&b));
}
