use std::fs;
use std::path::Path;
use std::process::Command;

use memsquench::cli::{
    reproduce, run, sha256_hex, ConstantsRow, RunManifest, SimulationSummary, SweepRow, Target,
    EXIT_FAILURE, EXIT_OK, EXIT_USAGE, MANIFEST_NAME,
};
use memsquench::mmpde::Outcome;

fn invoke(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["memsquench".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out-dir".into());
    full.push(dir.display().to_string());
    run(full)
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_NAME)).unwrap()).unwrap()
}

fn hashes(dir: &Path) -> Vec<(String, String)> {
    manifest(dir)
        .outputs
        .into_iter()
        .map(|o| (o.path, o.sha256))
        .collect()
}

#[test]
fn constants_json_round_trips_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(invoke(tmp.path(), &["constants"]), EXIT_OK);
    let text = fs::read_to_string(tmp.path().join("constants.json")).unwrap();
    let rows: Vec<ConstantsRow> = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&rows).unwrap() + "\n";
    assert_eq!(again, text);
    assert!(rows.iter().any(|r| (r.mu0 - 31.2852).abs() < 1e-4));
    assert!(rows.iter().any(|r| (r.epsilon_bar - 0.4492).abs() < 1e-4));
}

#[test]
fn manifest_hashes_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(invoke(tmp.path(), &["constants"]), EXIT_OK);
    let m = manifest(tmp.path());
    assert_eq!(m.command, "constants");
    assert!(m.error.is_none());
    let mut on_disk: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != MANIFEST_NAME)
        .collect();
    on_disk.sort();
    let listed: Vec<String> = m.outputs.iter().map(|o| o.path.clone()).collect();
    assert_eq!(listed, on_disk);
    for o in &m.outputs {
        assert_eq!(
            o.sha256,
            sha256_hex(&fs::read(tmp.path().join(&o.path)).unwrap())
        );
    }
}

#[test]
fn identical_flags_give_identical_hashes() {
    let args = [
        "simulate",
        "--eps",
        "0.2",
        "--n",
        "8",
        "--threshold",
        "1e-2",
        "--snapshot-times",
        "0.1,0.2",
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(invoke(a.path(), &args), EXIT_OK);
    assert_eq!(invoke(b.path(), &args), EXIT_OK);
    assert_eq!(hashes(a.path()), hashes(b.path()));
    assert_eq!(hashes(a.path()).len(), 8);
}

#[test]
fn simulate_steady_state() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        invoke(tmp.path(), &["simulate", "--eps", "0.5", "--n", "16"]),
        EXIT_OK
    );
    let s: SimulationSummary =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(s.outcome, Outcome::SteadyState);
    assert!(s.t_c.is_none());
}

#[test]
fn single_sweep_matches_simulate() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let common = ["--eps", "0.1", "--n", "12", "--threshold", "1e-2"];
    assert_eq!(
        invoke(a.path(), &[&["simulate"][..], &common].concat()),
        EXIT_OK
    );
    assert_eq!(
        invoke(b.path(), &[&["sweep"][..], &common].concat()),
        EXIT_OK
    );
    let s: SimulationSummary =
        serde_json::from_str(&fs::read_to_string(a.path().join("result.json")).unwrap()).unwrap();
    let rows: Vec<SweepRow> =
        serde_json::from_str(&fs::read_to_string(b.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t_c, s.t_c);
    assert_eq!(rows[0].touchdown_points, s.touchdown_points);
    let csv = fs::read_to_string(b.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("epsilon,outcome,t_c,n_points,x_c_1,x_c_2"));
}

#[test]
fn numerical_failure_exits_one_with_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        invoke(tmp.path(), &["simulate", "--eps=-0.1"]),
        EXIT_FAILURE
    );
    let m = manifest(tmp.path());
    assert!(m.error.unwrap().contains("epsilon"));
    assert!(m.outputs.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let bin = env!("CARGO_BIN_EXE_memsquench");
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--n", "8"][..],
        &["simulate", "--eps", "0.2", "--geometry", "torus"],
        &["bogus"],
    ] {
        let st = Command::new(bin)
            .args(args)
            .arg("--out-dir")
            .arg(tmp.path())
            .output()
            .unwrap();
        assert_eq!(st.status.code(), Some(EXIT_USAGE), "{args:?}");
    }
    let st = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
}

#[test]
fn reproduce_c0_passes() {
    let rep = reproduce(Target::C0).unwrap();
    assert!(rep.all_pass(), "{rep:#?}");
    assert_eq!(rep.total, 6);
}

#[test]
fn reproduce_writes_report_even_when_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let code = invoke(tmp.path(), &["reproduce", "--target", "constants_eta"]);
    let m = manifest(tmp.path());
    let names: Vec<&str> = m.outputs.iter().map(|o| o.path.as_str()).collect();
    assert_eq!(names, ["report.csv", "report.json"]);
    assert!(code == EXIT_OK || code == EXIT_FAILURE);
}
