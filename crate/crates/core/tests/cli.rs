//! The binary end to end: files written by `construct`, reports from the
//! other subcommands, exit codes, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bicarleson::constructions::{rec_example, simple_example};
use bicarleson::functionals::{box_constant, carleson_constant, rec_constant_with};
use bicarleson::rational::format_rational;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicarleson")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn constant<'a>(report: &'a Value, kind: &str) -> &'a Value {
    report["constants"].as_array().unwrap().iter().find(|c| c["kind"] == kind).unwrap()
}

fn all_hold(report: &Value) -> bool {
    report["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true)
}

#[test]
fn construct_simple_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["construct", "--example", "simple", "--N", "16", "--out", path(dir.path())]);
    assert!(out.status.success());
    let summary = json(&out);
    assert_eq!(summary["atoms"], 17);
    assert_eq!(summary["weight_entries"], 17);
    let measure: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("measure.json")).unwrap()).unwrap();
    assert_eq!(measure.as_array().unwrap().len(), 17);
    assert!(dir.path().join("set_omega.json").exists());
}

#[test]
fn construct_rec_has_five_test_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["construct", "--example", "rec", "--N", "16", "--delta", "1/4", "--out", path(dir.path())]);
    assert!(out.status.success());
    let summary = json(&out);
    assert_eq!(summary["atoms"], 4);
    assert_eq!(summary["test_measure_atoms"], 5);
    let nu: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("test_measure.json")).unwrap()).unwrap();
    assert_eq!(nu.as_array().unwrap().len(), 5);
}

#[test]
fn construct_family_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("f.json");
    fs::write(&fam, r#"["x:0/0,y:0/0"]"#).unwrap();
    let out_dir = dir.path().join("inst");
    let out = run(&["construct", "--example", "family", "--family-file", path(&fam), "--out", path(&out_dir)]);
    assert!(out.status.success());
    let weight: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("weight.json")).unwrap()).unwrap();
    assert_eq!(weight, serde_json::json!([{ "rect": "x:0/0,y:0/0", "value": "1/1" }]));
}

#[test]
fn verify_simple_holds() {
    let out = run(&["verify", "--example", "simple", "--N", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(all_hold(&report));
    assert_eq!(constant(&report, "carleson")["lower"], "65/68");
    assert_eq!(constant(&report, "rec")["lower"], "17/4");
}

#[test]
fn verify_rec_and_dor_hold() {
    let out = run(&["verify", "--example", "rec", "--N", "16", "--delta", "1/4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["values"]["rec ratio on F"], "65/64");
    let out = run(&["verify", "--example", "dor", "--N", "3", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(all_hold(&json(&out)));
}

#[test]
fn failing_check_is_named_with_exit_one() {
    let out = run(&["verify", "--example", "rec", "--N", "16", "--delta", "1/4", "--c-fit", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed: carleson <= C_fit*delta"));
}

#[test]
fn bad_parameters_exit_two() {
    assert_eq!(run(&["verify", "--example", "simple", "--N", "32"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--example", "rec", "--N", "16", "--delta", "3/2"]).status.code(), Some(2));
    assert_eq!(run(&["constants", "--measure", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn constants_of_root_weight_and_empty_weight() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let w = dir.path().join("w.json");
    let e = dir.path().join("e.json");
    fs::write(&m, r#"[{"rect":"x:0/0,y:0/0","mass":"1"}]"#).unwrap();
    fs::write(&w, r#"[{"rect":"x:0/0,y:0/0","value":"1"}]"#).unwrap();
    fs::write(&e, "[]").unwrap();
    let report = json(&run(&["constants", "--measure", path(&m), "--weight", path(&w), "--depth", "1"]));
    for kind in ["box", "carleson", "rec", "embedding"] {
        assert_eq!(constant(&report, kind)["lower"], "1/1", "{kind}");
    }
    let report = json(&run(&["constants", "--measure", path(&m), "--weight", path(&e), "--depth", "1"]));
    for kind in ["box", "carleson", "rec", "embedding"] {
        assert_eq!(constant(&report, kind)["lower"], "0/1", "{kind}");
    }
}

#[test]
fn round_trip_matches_in_memory_constants() {
    let dir = tempfile::tempdir().unwrap();
    for (args, inst) in [
        (vec!["--example", "simple", "--N", "16"], simple_example(16).unwrap()),
        (vec!["--example", "rec", "--N", "16", "--delta", "1/4"], rec_example(16, &bicarleson::rational::rat(1, 4)).unwrap()),
    ] {
        let out_dir = dir.path().join(args[1]);
        let mut construct = vec!["construct"];
        construct.extend(&args);
        construct.extend(["--out", path(&out_dir)]);
        assert!(run(&construct).status.success());
        let manifest = out_dir.join("instance.json");
        let report = json(&run(&["constants", "--instance", path(&manifest)]));
        let mu = inst.test_measure();
        assert_eq!(constant(&report, "box")["lower"], format_rational(&box_constant(&inst.alpha, mu).lower));
        assert_eq!(
            constant(&report, "carleson")["lower"],
            format_rational(&carleson_constant(&inst.alpha, mu).unwrap().lower)
        );
        assert_eq!(constant(&report, "rec")["lower"], format_rational(&rec_constant_with(&inst.alpha, mu, &[]).unwrap().lower));
        assert!(all_hold(&report));
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["verify", "--example", "potential", "--N", "64", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path(&file)]);
    let c = run(&with_out);
    assert!(c.stdout.is_empty());
    assert_eq!(fs::read(&file).unwrap(), a.stdout);
    assert!(String::from_utf8_lossy(&a.stderr).contains("time "));
    assert!(!String::from_utf8_lossy(&a.stdout).contains("time"));
}

#[test]
fn maximal_sparse_and_oracle_on_the_quarter_instance() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let f = dir.path().join("psi.json");
    fs::write(&m, r#"[{"rect":"x:0/0,y:0/0","mass":"1"}]"#).unwrap();
    fs::write(&f, r#"[{"rect":"x:1/0,y:1/0","value":"1"}]"#).unwrap();
    let report = json(&run(&["maximal", "--measure", path(&m), "--depth", "1", "--function", path(&f), "--rounds", "3"]));
    assert!(all_hold(&report));
    assert_eq!(report["values"]["maximal square integral"], "25/64");
    assert_eq!(report["detail"]["ascent"][0], "25/16");
    let weight = dir.path().join("w.json");
    fs::write(&weight, serde_json::to_string(&report["detail"]["weight"]).unwrap()).unwrap();
    let sparse = json(&run(&["sparse", "--measure", path(&m), "--weight", path(&weight), "--depth", "1"]));
    assert_eq!(sparse["detail"]["feasible"], true);
    let doubled = dir.path().join("w2.json");
    fs::write(&doubled, r#"[{"rect":"x:0/0,y:0/0","value":"2"}]"#).unwrap();
    let sparse = json(&run(&["sparse", "--measure", path(&m), "--weight", path(&doubled), "--depth", "1"]));
    assert_eq!(sparse["detail"]["feasible"], false);
    assert_eq!(sparse["detail"]["violating"], serde_json::json!(["x:0/0,y:0/0"]));
    let oracle = json(&run(&["oracle", "--measure", path(&m), "--weight", path(&weight), "--depth", "1"]));
    assert_eq!(oracle["checks"].as_array().unwrap().len(), 4);
    assert!(all_hold(&oracle));
}

#[test]
fn potential_at_a_rectangle() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["construct", "--example", "potential", "--N", "16", "--delta", "1/4", "--out", path(dir.path())]).status.success());
    let manifest = dir.path().join("instance.json");
    let report = json(&run(&["potential", "--instance", path(&manifest), "--at", "x:16/0,y:16/0"]));
    let v = report["values"]["V(x:16/0,y:16/0)"].as_str().unwrap();
    let inst = bicarleson::constructions::potential_example(16, &bicarleson::rational::rat(1, 4)).unwrap();
    let direct = bicarleson::functionals::potential(&inst.alpha, &inst.mu, &bicarleson::bigrid::DyadicRect::hooked(16, 16));
    assert_eq!(v, format_rational(&direct));
}
