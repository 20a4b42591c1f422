use std::process::{Command, Output};

fn xk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("xk-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn average_vector_norm() {
    let o = xk(&["mtnorm", "--avg", "j0=1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1/4");
    let o = xk(&["mtnorm", "--avg", "j0=1", "--exclude", "1"]);
    assert_eq!(stdout(&o).trim(), "1/16");
}

#[test]
fn verify_writes_identical_ledgers() {
    let d = scratch("ledger");
    let a = d.join("a.jsonl");
    let b = d.join("b.jsonl");
    for p in [&a, &b] {
        let o = xk(&["verify", "treelike", "--seed", "3", "--ledger", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, std::fs::read(&b).unwrap());
    for line in String::from_utf8(ta).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["verdict"], "verified");
        assert_eq!(v["seed"], 3);
    }
    let o = xk(&["replay", a.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 not reproduced"));
}

#[test]
fn mt_oracle_suite_csv() {
    let o = xk(&["verify", "mt-oracle", "--seed", "7", "--cases", "200", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("mt-oracle,verified,0,agree=200 cases=200 trees_ok=200"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let o = xk(&["verify", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
    let o = xk(&["--mode", "admissible", "schedule", "--schedule", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exports_and_forging() {
    let d = scratch("export");
    let o = xk(&["export", "--what", "stage", "--stage", "3", "--format", "csv", "--out", d.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.join("stage.csv")).unwrap();
    assert!(csv.starts_with("id,rank,kind,weight_index"));
    let desc = d.join("forge.json");
    std::fs::write(
        &desc,
        r#"{"manifest":{"schedule":{"m":[4,16,64,256],"n":[4,1,4,2]},"stage":3},
            "even":[{"j":1,"cuts":[4],"payloads":[[[0,"-1/2"]]]}]}"#,
    )
    .unwrap();
    let o = xk(&["forge", desc.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"][0]["weight_index"], 2);
    assert_eq!(v["records"][0]["rank"], 4);
}

#[test]
fn norm_of_point_file() {
    let d = scratch("norm");
    let p = d.join("x.json");
    std::fs::write(&p, r#"{"d": [[0, "1/1"]]}"#).unwrap();
    let o = xk(&["norm", p.to_str().unwrap(), "--stage", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lower"], "1/1");
}
