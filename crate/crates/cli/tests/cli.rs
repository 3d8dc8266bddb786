use std::path::PathBuf;
use std::process::{Command, Output};

use las_mud::bounds::q_function;
use las_mud_cli::output::{parse_csv, Table};

fn las_mud(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_las-mud")).args(args).output().unwrap()
}

fn table(out: &Output) -> Table {
    parse_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("las-mud-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn num(t: &Table, row: usize, col: &str) -> f64 {
    t.rows[row][t.column(col).unwrap()].parse().unwrap()
}

#[test]
fn ame_sweep_default_grid() {
    let out = las_mud(&["ame-sweep"]);
    assert_eq!(out.status.code(), Some(0));
    let t = table(&out);
    assert_eq!(
        t.header,
        ["rho", "gml", "lml_bound", "gplas_M1", "gplas_M2", "gplas_M4", "mf_K40", "decmmse_K40"]
    );
    assert_eq!(t.rows.len(), 51);
    assert!(t.rows[0].iter().skip(1).all(|v| v == "1e0"));
    let last = t.rows.len() - 1;
    assert_eq!(num(&t, last, "mf_K40"), 0.0);
    assert_eq!(num(&t, last, "gml"), 1.0);
    assert!((num(&t, last, "decmmse_K40") - 0.5125).abs() < 1e-15);
}

#[test]
fn ame_sweep_flags_override_config() {
    let cfg = scratch("sweep.json", r#"{"command":"ame-sweep","params":{"K":10,"M":[3]}}"#);
    let out = las_mud(&["ame-sweep", "--config", cfg.to_str().unwrap(), "--groups", "1,5", "--rho", "0,0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let t = table(&out);
    assert_eq!(t.header, ["rho", "gml", "lml_bound", "gplas_M1", "gplas_M5", "mf_K10", "decmmse_K10"]);
    assert_eq!(t.rows.len(), 2);
}

#[test]
fn orthogonal_bounds_are_single_user_q() {
    let ch = scratch("orth.json", r#"{"generator":"orthogonal","A":[1.0,0.5,1.5]}"#);
    let out = las_mud(&[
        "bounds",
        "--channel",
        ch.to_str().unwrap(),
        "--sigma",
        "0.3,0.7",
        "--detectors",
        "gml,lml,slas,plas,gplas:2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = table(&out);
    assert_eq!(t.rows.len(), 2 * 5 * 3);
    let amps = [1.0, 0.5, 1.5];
    for i in 0..t.rows.len() {
        let user = num(&t, i, "user") as usize;
        let q = q_function(amps[user - 1] / num(&t, i, "sigma"));
        assert!((num(&t, i, "bound") - q).abs() <= 1e-12);
        assert_eq!(num(&t, i, "terms"), 2.0);
    }
}

#[test]
fn two_user_lml_bound_dominates_gml() {
    let ch = scratch("two.json", r#"{"generator":"two_user"}"#);
    let out = las_mud(&["bounds", "--channel", ch.to_str().unwrap(), "--snr-db", "0:12:2", "--detectors", "gml,lml"]);
    let t = table(&out);
    assert_eq!(t.rows.len(), 7 * 2 * 2);
    let det = t.column("detector").unwrap();
    for chunk in t.rows.chunks(4) {
        assert_eq!(chunk[0][det], "gml");
        assert_eq!(chunk[2][det], "lml");
        for u in 0..2 {
            let g: f64 = chunk[u][t.column("bound").unwrap()].parse().unwrap();
            let l: f64 = chunk[2 + u][t.column("bound").unwrap()].parse().unwrap();
            assert!(l >= g);
        }
    }
    assert!(t.column("negative_arg_terms").is_some());
}

#[test]
fn enumerate_errors_json() {
    let ch = scratch("two-enum.json", r#"{"generator":"two_user"}"#);
    let out = las_mud(&["enumerate-errors", "--channel", ch.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["size"], 4 + 2);
    assert_eq!(v["result"]["size_limit"], "6");
    assert_eq!(v["result"]["complete"], true);
    assert_eq!(v["provenance"]["command"], "enumerate-errors");
}

#[test]
fn provenance_header_records_seed_and_hash() {
    let ch = scratch("prov.json", r#"{"generator":"two_user"}"#);
    let run = |seed: &str| {
        let out = las_mud(&["audit", "--channel", ch.to_str().unwrap(), "--suite", "regions", "--seed", seed]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("5");
    let b = run("6");
    assert!(a.lines().any(|l| l == "# seed: 5"));
    let hash = |s: &str| s.lines().find(|l| l.starts_with("# config-sha256")).unwrap().to_string();
    assert_ne!(hash(&a), hash(&b));
    assert_eq!(a, run("5"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("las-mud-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let out = las_mud(&["ame-sweep", "--rho", "0.2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(parse_csv(&text).unwrap().rows.len(), 1);
}

#[test]
fn usage_errors_exit_one() {
    let ch = scratch("usage.json", r#"{"generator":"two_user"}"#);
    let c = ch.to_str().unwrap();
    assert_eq!(las_mud(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(las_mud(&["bounds", "--sigma", "0.5"]).status.code(), Some(1));
    assert_eq!(las_mud(&["bounds", "--channel", c, "--sigma", "0.5", "--detectors", "xyz"]).status.code(), Some(1));
    assert_eq!(las_mud(&["ame-sweep", "--threads", "0"]).status.code(), Some(1));
    let wrong = scratch("wrong.json", r#"{"command":"simulate"}"#);
    assert_eq!(las_mud(&["ame-sweep", "--config", wrong.to_str().unwrap()]).status.code(), Some(1));
    let unknown = scratch("unknown.json", r#"{"params":{"K":4,"colour":"red"}}"#);
    assert_eq!(las_mud(&["ame-sweep", "--config", unknown.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(las_mud(&["audit", "--channel", c, "--suite", "bogus"]).status.code(), Some(1));
    assert_eq!(las_mud(&["--help"]).status.code(), Some(0));
}

#[test]
fn too_large_channel_is_refused() {
    let ch = scratch("big.json", r#"{"generator":"equicorrelated","K":24,"rho":0.1}"#);
    let out = las_mud(&["enumerate-errors", "--channel", ch.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("24"));
}

#[test]
fn convergence_failures_exit_three() {
    let cfg = scratch(
        "stall.json",
        r#"{
  "channel": {"generator": "equicorrelated", "K": 8, "rho": 0.6},
  "params": {
    "trials": 500,
    "snr_db": [10],
    "detectors": [{"type": "las", "schedule": {"kind": "slas-circular"}, "initial": "random", "max_periods": 1}]
  }
}"#,
    );
    let out = las_mud(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("without converging"));
    assert_eq!(table(&out).rows.len(), 8);
}

#[test]
fn simulate_overlay_and_json() {
    let cfg = scratch(
        "overlay.json",
        r#"{
  "channel": {"generator": "two_user"},
  "seed": 9,
  "params": {
    "trials": 5000,
    "snr_db": [6],
    "detectors": [{"type": "las", "schedule": {"kind": "plas"}, "initial": "mf"}, {"type": "mf"}],
    "overlay_bound": true
  }
}"#,
    );
    let out = las_mud(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let t = table(&out);
    assert_eq!(
        t.header,
        ["detector", "snr_db", "user", "ber", "se", "ver", "ver_se", "bfr", "mean_steps", "trials", "bound"]
    );
    let bound = t.column("bound").unwrap();
    assert!(!t.rows[0][bound].is_empty());
    assert!(t.rows[2][bound].is_empty());

    let out = las_mud(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "json", "--trials", "100"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["config"]["trials"], 100);
    assert_eq!(v["provenance"]["seed"], 9);
}
