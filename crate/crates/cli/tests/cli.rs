//! Behavior tests for the `spinclass` binary: output formats, determinism,
//! and error paths. These run the compiled binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use spinclass::{dicke_state, maximally_mixed, projector, SpinJ};
use spinclass_cli::{DecompositionAtom, RunRecord};

fn spinclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinclass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn bound_table_prints_header_and_rows() {
    let out = spinclass(&["bound-table", "--twice-j-max", "4"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "twice_j,r_hat_max,p_tilde_max,gurvits");
    assert_eq!(lines.len(), 5);
    // 2j = 1 row carries 1/sqrt(18) and 1/sqrt(2)
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "1");
    let r: f64 = first[1].parse().unwrap();
    assert!((r - 1.0 / 18f64.sqrt()).abs() < 1e-15);
    let g: f64 = first[3].parse().unwrap();
    assert!((g - 1.0 / 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn bound_table_writes_file_identically_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.csv");
    let to_file = spinclass(&[
        "bound-table",
        "--twice-j-max",
        "21",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let on_stdout = spinclass(&["bound-table", "--twice-j-max", "21"]);
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        stdout_of(&on_stdout)
    );
}

#[test]
fn radius_output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> (String, RunRecord) {
        let path = dir.path().join(name);
        let out = spinclass(&[
            "radius",
            "--twice-j",
            "1",
            "--samples",
            "8",
            "--dict-size",
            "300",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let csv = std::fs::read_to_string(&path).unwrap();
        let record: RunRecord = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(name.replace(".csv", ".run.json"))).unwrap(),
        )
        .unwrap();
        (csv, record)
    };
    let (csv_a, rec_a) = run("a.csv");
    let (csv_b, rec_b) = run("b.csv");
    assert_eq!(csv_a, csv_b);
    // replay record matches sample for sample, wall time aside
    assert_eq!(rec_a.estimates.len(), 1);
    let (ea, eb) = (&rec_a.estimates[0], &rec_b.estimates[0]);
    assert_eq!(ea.r_tilde_max, eb.r_tilde_max);
    assert_eq!(ea.per_sample.len(), eb.per_sample.len());
    for (sa, sb) in ea.per_sample.iter().zip(&eb.per_sample) {
        assert_eq!(sa.stream_index, sb.stream_index);
        assert_eq!(sa.r_l, sb.r_l);
        assert_eq!(sa.k_max, sb.k_max);
    }
}

#[test]
fn radius_csv_has_figure_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = spinclass(&[
        "radius",
        "--twice-j",
        "1",
        "--samples",
        "4",
        "--dict-size",
        "200",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "twice_j,r_hat_max,r_tilde_max,gurvits");
    assert!(lines.next().unwrap().starts_with("1,"));
}

fn write_state(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn classify_mixed_state_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let j = SpinJ::from_twice(2).unwrap();
    let state = write_state(dir.path(), "mixed.json", &maximally_mixed(j).to_json());
    let decomp = dir.path().join("decomp.json");
    let out = spinclass(&[
        "classify",
        "--state",
        &state,
        "--dict-size",
        "500",
        "--decomposition-out",
        decomp.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("status       : CappedAtOne"), "{text}");
    let atoms: Vec<DecompositionAtom> =
        serde_json::from_str(&std::fs::read_to_string(&decomp).unwrap()).unwrap();
    assert!(!atoms.is_empty());
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    assert!((total - 1.0).abs() < 1e-6, "weights sum to {total}");
}

#[test]
fn classify_dicke_state_reports_reference_reach() {
    // |j=1, m=0>: k_max = 1/4 and r_l = 1/(2 sqrt(6))
    let dir = tempfile::tempdir().unwrap();
    let j = SpinJ::from_twice(2).unwrap();
    let rho = projector(&dicke_state(j, 0).unwrap()).unwrap();
    let state = write_state(dir.path(), "dicke.json", &rho.to_json());
    let out = spinclass(&["classify", "--state", &state, "--dict-size", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("status       : Optimal"), "{text}");
    let r_l: f64 = text
        .lines()
        .find(|l| l.starts_with("r_l"))
        .and_then(|l| l.split(':').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(
        (r_l - 1.0 / (2.0 * 6f64.sqrt())).abs() < 2e-4,
        "r_l = {r_l}"
    );
}

#[test]
fn classify_writes_mps_dump() {
    let dir = tempfile::tempdir().unwrap();
    let j = SpinJ::from_twice(1).unwrap();
    let state = write_state(dir.path(), "mixed.json", &maximally_mixed(j).to_json());
    let mps = dir.path().join("lp.mps");
    let out = spinclass(&[
        "classify",
        "--state",
        &state,
        "--dict-size",
        "50",
        "--mps-out",
        mps.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&mps).unwrap();
    assert!(text.starts_with("NAME"));
    assert!(text.contains("ROWS") && text.contains("COLUMNS") && text.ends_with("ENDATA\n"));
}

#[test]
fn malformed_state_file_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(dir.path(), "bad.json", "{\"twice_j\": 2, \"re\": [[1.0]]}");
    let out = spinclass(&["classify", "--state", &state]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid state"), "{err}");
}

#[test]
fn missing_state_file_fails_cleanly() {
    let out = spinclass(&["classify", "--state", "/nonexistent/state.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn non_density_matrix_is_rejected() {
    // negative eigenvalue: valid JSON, invalid state
    let dir = tempfile::tempdir().unwrap();
    let state = write_state(
        dir.path(),
        "neg.json",
        "{\"twice_j\": 1, \"re\": [[2.0, 0.0], [0.0, -1.0]], \"im\": [[0.0, 0.0], [0.0, 0.0]]}",
    );
    let out = spinclass(&["classify", "--state", &state]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid state"));
}

#[test]
fn figure_rejects_empty_spin_range() {
    let out = spinclass(&[
        "figure",
        "--twice-j-min",
        "5",
        "--twice-j-max",
        "2",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid spin range"));
}
