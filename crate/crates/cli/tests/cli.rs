use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn kforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kforge")).args(args).env_remove("KF_DEFAULT_BITS").output().unwrap()
}

fn config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const MODULAR: &str = "suite = modular-fns\nbits = 64\nfield = -1\nindex_bound = 3\n";

#[test]
fn modular_suite_is_accepted_and_deterministic() {
    let cfg = config("modular.cfg", MODULAR);
    let cfg = cfg.to_str().unwrap();
    let a = kforge(&["verify", "--config", cfg]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = kforge(&["verify", "--config", cfg, "--workers", "2"]);
    let (mut a, mut b) = (json(&a), json(&b));
    let keys: Vec<&String> = a.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["timestamp", "version", "conventions", "config", "records", "summary"]);
    assert_eq!(a["summary"]["rejected"], 0);
    assert_eq!(a["summary"]["accepted"], a["summary"]["records"]);
    assert_eq!(a["records"], b["records"]);
    for v in [&mut a, &mut b] {
        let o = v.as_object_mut().unwrap();
        o.remove("timestamp");
        o["config"].as_object_mut().unwrap().remove("workers");
    }
    assert_eq!(a, b);
}

#[test]
fn reals_are_decimal_strings() {
    let out = kforge(&["lvalue", "--field", "-1", "--conductor", "3", "--char", "1", "--bits", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v.as_object().unwrap().keys().next().unwrap() == "timestamp");
    let rel = v["relative_difference"].as_str().unwrap();
    assert!(rel.parse::<f64>().unwrap() < 1e-10);
    assert_eq!(v["accepted"], true);
}

#[test]
fn seed_changes_sampled_points_only() {
    let cfg = config("seed.cfg", MODULAR);
    let cfg = cfg.to_str().unwrap();
    let a = json(&kforge(&["verify", "--config", cfg, "--seed", "1"]));
    let b = json(&kforge(&["verify", "--config", cfg, "--seed", "2"]));
    assert_eq!(a["summary"], b["summary"]);
    assert_ne!(a["records"], b["records"]);
}

#[test]
fn exit_codes() {
    // trivial character is rejected
    assert_eq!(kforge(&["lvalue", "--field", "-1", "--conductor", "3", "--char", "0", "--bits", "64"]).status.code(), Some(1));
    // m = 1 has no covolume identity
    assert_eq!(kforge(&["zeta-star", "--field", "-1", "--m", "1", "--bits", "64"]).status.code(), Some(1));
    // class number > 1 is outside the supported regime
    assert_eq!(kforge(&["lvalue", "--field", "-5", "--conductor", "3", "--char", "1"]).status.code(), Some(2));
    assert_eq!(kforge(&["frobnicate"]).status.code(), Some(2));
    let empty = config("empty.cfg", "suite =\n");
    let out = kforge(&["verify", "--config", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("suite"));
    let bad = config("bad.cfg", "frobnicate = 3\n");
    assert_eq!(kforge(&["verify", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_kforge"))
        .args(["lvalue", "--field", "-1", "--conductor", "3", "--char", "1"])
        .env("KF_DEFAULT_BITS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn default_bits_come_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_kforge"))
        .args(["zeta-star", "--field", "-1", "--conductor", "3", "--m", "2"])
        .env("KF_DEFAULT_BITS", "80")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["bits"], 80);
}

#[test]
fn out_flag_writes_the_report() {
    let path = std::env::temp_dir().join(format!("kforge-out-{}.json", std::process::id()));
    let out = kforge(&["eunit", "--field", "-1", "--conductor", "3", "--bits", "128", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("timestamp").is_some());
    std::fs::remove_file(path).ok();
}

#[test]
fn iwasawa_subcommand() {
    let cfg = config("iw.cfg", "instances = 12\nprime = 3\nprime = 5\n");
    let out = kforge(&["iwasawa", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["suites"], serde_json::json!(["iwasawa"]));
    assert_eq!(v["summary"]["rejected"], 0);
}
