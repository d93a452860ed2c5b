use std::path::PathBuf;
use std::process::{Command, Output};

fn ks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ks-forge"))
        .args(args)
        .current_dir(repo_root())
        .env_remove("KS_FORGE_DATA")
        .output()
        .expect("binary runs")
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn sweep_writes_ten_thousand_rows() {
    let o = ks(&["sweep", "--lo", "0.802", "--hi", "0.9999", "--n", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p1,f,df,gap"));
    assert_eq!(lines.count(), 10_000);
}

#[test]
fn sweep_output_does_not_depend_on_jobs() {
    let a = ks(&["sweep", "--lo", "0.81", "--hi", "0.99", "--n", "500"]);
    let b = ks(&["sweep", "--lo", "0.81", "--hi", "0.99", "--n", "500", "--jobs", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn anchor_forcing_is_unsatisfiable() {
    let o = ks(&[
        "solve", "--diagram", "data/fig2_anchor.json", "--premise", "a=1", "--premise", "b=1", "--premise", "c=0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "unsatisfiable");
    let o = ks(&["solve", "--diagram", "fig2_anchor", "--premise", "a=1", "--premise", "b=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["witness"]["c"], 1);
}

#[test]
fn taylor_reports_the_slope() {
    let o = ks(&["taylor"]);
    assert_eq!(o.status.code(), Some(0));
    let m = json(&o)["m"].as_f64().unwrap();
    assert!((m - 1.2658).abs() < 1e-3);
}

#[test]
fn peres_set_has_no_frame_function() {
    let o = ks(&["solve", "--diagram", "peres_completed", "--frame"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn indefinite_exit_code() {
    let o = ks(&["indefinite", "--diagram", "strong_ks_constructed", "--a", "a", "--b", "b"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["indefinite"], true);
    let o = ks(&["indefinite", "--diagram", "fig2_anchor", "--a", "a", "--b", "b"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn witness_round_trips_through_the_parsers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let o = ks(&["witness", "--overlap", "0.9", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let ws = ks_forge_core::reductions::WitnessSet::from_json(&text).unwrap();
    assert_eq!(ws.chain.len(), 3);
    assert_eq!(ws.certification, ks_forge_core::reductions::Certification::Verified);
    let o = ks(&["indefinite", "--diagram", path.to_str().unwrap(), "--a", "a", "--b", "b"]);
    assert_eq!(o.status.code(), Some(2), "witness files carry extra keys; the plain diagram parser rejects them");
}

#[test]
fn witness_from_vectors() {
    let o = ks(&["witness", "--a", "0,0,1", "--b", "0.6,0,0.8", "--strong", "constructed"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn export_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let o = ks(&["export", "--diagram", "fig2_anchor", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = ks(&["validate", "--diagram", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn export_dot_colours_the_closure() {
    let o = ks(&["export", "--diagram", "fig1_reduction", "--premise", "a=1", "--premise", "b=1"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("graph diagram {"));
    assert!(dot.contains("\"c\" [label=\"c\", shape=square]"), "{dot}");
    assert!(dot.contains("\"u\" [label=\"u\", shape=circle]"), "{dot}");
}

#[test]
fn classify_and_sample() {
    let o = ks(&["classify", "--a", "1,0,0", "--b", "0.5,0.8660254037844386,0"]);
    assert_eq!(json(&o)["kind"], "indefinite");
    let o = ks(&["sample", "--samples", "20000", "--eps", "0.01", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["samples"], 20000);
    let again = ks(&["sample", "--samples", "20000", "--eps", "0.01", "--seed", "5", "--jobs", "2"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn sample_requires_a_seed() {
    let o = ks(&["sample", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_fatal() {
    let o = ks(&["taylor", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn vector_norm_checks() {
    let o = ks(&["classify", "--a", "1,0,0", "--b", "0.6,0.8001,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = ks(&["classify", "--a", "1,0,0", "--b", "0.6,0.9,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ks(&["classify", "--a", "1,0", "--b", "0,1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_and_iterate() {
    let o = ks(&["reduce", "--a", "1,0,0", "--b", "0.5,0.8660254037844386,0", "--x", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let c = &json(&o)["c_local"];
    assert!((c[0].as_f64().unwrap() - 0.8).abs() < 1e-15);
    assert!(c[2].as_f64().unwrap() < 0.0);
    let o = ks(&["reduce", "--a", "1,0,0", "--b", "0.5,0.8660254037844386,0", "--x", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ks(&["iterate", "--p1", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o).as_array().unwrap().len(), 3);
    let o = ks(&["iterate", "--p1", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "validate", "solve", "indefinite", "reduce", "iterate", "witness", "sweep", "taylor", "classify", "sample", "export",
    ] {
        let o = ks(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn data_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo_root().join("data/fig1_reduction.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["description"] = serde_json::Value::String("overridden".into());
    std::fs::write(dir.path().join("fig1_reduction.json"), v.to_string()).unwrap();
    let run = |env: Option<&std::path::Path>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ks-forge"));
        cmd.args(["export", "--diagram", "fig1_reduction", "--format", "json"]);
        cmd.current_dir(dir.path());
        match env {
            Some(p) => cmd.env("KS_FORGE_DATA", p),
            None => cmd.env_remove("KS_FORGE_DATA"),
        };
        json(&cmd.output().unwrap())
    };
    assert_eq!(run(Some(dir.path()))["description"], "overridden");
    assert_ne!(run(None)["description"], "overridden");
}
