//! End-to-end tests of the `chordwalk` binary: determinism at the byte
//! level, output formats, the reader round-trip, and the exit-code
//! contract.

use chordwalk_cli::reader::{read_csv, read_jsonl};
use std::path::PathBuf;
use std::process::{Command, Output};

fn chordwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chordwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("chordwalk-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn sample_reruns_are_byte_identical() {
    for (desc, algorithm) in [
        ("ball:d=3", "random_direction"),
        ("simplex:n=4", "fixed_basis"),
        ("birkhoff:n=3", "fixed_basis"),
        ("density:n=2", "random_direction"),
    ] {
        let args = ["sample", desc, "--algorithm", algorithm, "--steps", "200", "--seed", "7"];
        let a = chordwalk(&args);
        let b = chordwalk(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{desc} via {algorithm}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn csv_output_carries_the_documented_header_and_round_trips() {
    let out = chordwalk(&["sample", "ball:d=3", "--steps", "5", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        format!(
            "# chordwalk v{} body=ball:d=3 algorithm=random_direction seed=7",
            env!("CARGO_PKG_VERSION")
        )
    );
    assert_eq!(lines.next().unwrap(), "chain,step,c0,c1,c2");
    assert_eq!(lines.count(), 5);

    let (header, rows) = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(header.body, "ball:d=3");
    assert_eq!(header.seed, 7);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].chain, 0);
    assert_eq!(rows[0].step, 1);
    // Full precision: rewriting each parsed value at 17 significant digits
    // reproduces the file text exactly.
    let reformatted: Vec<String> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let coords: Vec<String> = r.coords.iter().map(|v| format!("{v:.16e}")).collect();
            format!("{},{},{}", r.chain, i + 1, coords.join(","))
        })
        .collect();
    let original: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(reformatted, original);
}

#[test]
fn jsonl_round_trips_and_matches_csv_values() {
    let csv = chordwalk(&["sample", "box:d=2", "--steps", "7", "--seed", "3"]);
    let jsonl = chordwalk(&["sample", "box:d=2", "--steps", "7", "--seed", "3", "--format", "jsonl"]);
    assert!(csv.status.success() && jsonl.status.success());
    let (_, csv_rows) = read_csv(csv.stdout.as_slice()).unwrap();
    let json_rows = read_jsonl(jsonl.stdout.as_slice()).unwrap();
    assert_eq!(csv_rows.len(), json_rows.len());
    for (a, b) in csv_rows.iter().zip(&json_rows) {
        assert_eq!(a.chain, b.chain);
        assert_eq!(a.step, b.step);
        for (x, y) in a.coords.iter().zip(&b.coords) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn thinning_controls_emitted_steps() {
    let out = chordwalk(&["sample", "ball:d=2", "--steps", "10", "--thin", "3", "--seed", "1"]);
    let (_, rows) = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), vec![3, 6, 9]);
}

#[test]
fn multiple_chains_are_grouped_and_deterministic() {
    let args = ["sample", "simplex:n=3", "--steps", "50", "--chains", "3", "--seed", "11"];
    let a = chordwalk(&args);
    let b = chordwalk(&args);
    assert_eq!(a.stdout, b.stdout);
    let (_, rows) = read_csv(a.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 150);
    // Grouped by chain id, in order.
    let ids: Vec<u64> = rows.iter().map(|r| r.chain).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    // Chains are genuinely different streams.
    assert_ne!(rows[0].coords, rows[50].coords);
}

#[test]
fn ambient_birkhoff_rows_are_bistochastic() {
    let out = chordwalk(&[
        "sample",
        "birkhoff:n=3",
        "--steps",
        "500",
        "--seed",
        "5",
        "--ambient",
    ]);
    let (_, rows) = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 500);
    for row in rows {
        assert_eq!(row.coords.len(), 9);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| row.coords[i * 3 + j]).sum();
            let c: f64 = (0..3).map(|j| row.coords[j * 3 + i]).sum();
            assert!((r - 1.0).abs() < 1e-12, "row sum {r}");
            assert!((c - 1.0).abs() < 1e-12, "col sum {c}");
            for j in 0..3 {
                assert!(row.coords[i * 3 + j] >= -1e-12);
            }
        }
    }
}

#[test]
fn out_file_gets_a_manifest_with_matching_digest() {
    use sha2::{Digest, Sha256};
    let path = tmp("manifest.csv");
    let out = chordwalk(&[
        "sample",
        "ball:d=2",
        "--steps",
        "20",
        "--seed",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let data = std::fs::read(&path).unwrap();
    let manifest_path = format!("{}.manifest.json", path.display());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    let mut hasher = Sha256::new();
    hasher.update(&data);
    let digest: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest["sha256"].as_str().unwrap(), digest);
    assert_eq!(manifest["body"], "ball:d=2");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["steps"], 20);
    std::fs::remove_file(&path).ok();
    std::fs::remove_file(&manifest_path).ok();
}

#[test]
fn bound_outputs_the_catalogue_values() {
    let out = chordwalk(&[
        "bound",
        "ball:d=2",
        "--algorithm",
        "random_direction",
        "--variant",
        "as_stated",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("theta       = 5.00000000000000000e-1"), "{text}");
    assert!(text.contains("alpha       = 0.5"), "{text}");
    assert!(text.contains("C           = 4"), "{text}");

    let out = chordwalk(&["bound", "simplex:n=3", "--algorithm", "fixed_basis"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("M           = 4"), "{text}");
    // theta = pi/256.
    assert!(text.contains("theta       = 1.22718463030851"), "{text}");
}

#[test]
fn exit_codes_follow_the_contract() {
    // 2: bad arguments (descriptor grammar, missing accessibility, lifted
    // without the quasi-concavity assertion).
    assert_eq!(chordwalk(&["sample", "torus:r=1"]).status.code(), Some(2));
    assert_eq!(
        chordwalk(&["sample", "ppt:k=2", "--algorithm", "fixed_basis"]).status.code(),
        Some(2)
    );
    assert_eq!(
        chordwalk(&["bound", "ppt:k=2", "--algorithm", "fixed_basis"]).status.code(),
        Some(2)
    );
    assert_eq!(chordwalk(&["sample", "lifted:f=cone,d=2"]).status.code(), Some(2));
    // 3: construction failure on a grammatical but invalid descriptor.
    assert_eq!(chordwalk(&["sample", "ball:d=0"]).status.code(), Some(3));
    assert_eq!(chordwalk(&["sample", "simplex:n=1"]).status.code(), Some(3));
    // 5: oracle unavailable.
    assert_eq!(
        chordwalk(&["compare", "birkhoff:n=5", "--steps", "10"]).status.code(),
        Some(5)
    );
    // Lifted sampling works once asserted.
    let out = chordwalk(&[
        "sample",
        "lifted:f=cone,d=2",
        "--steps",
        "10",
        "--assert-quasiconcave",
    ]);
    assert!(out.status.success());
}

#[test]
fn compare_passes_on_a_well_mixed_body() {
    let out = chordwalk(&[
        "compare",
        "box:d=2",
        "--steps",
        "30000",
        "--seed",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["overall"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 5);
}

#[test]
fn compare_exercises_the_spectral_bodies() {
    let out = chordwalk(&[
        "compare",
        "density:n=2",
        "--steps",
        "30000",
        "--seed",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["overall"], true);
    // The Bloch-ball proposal accepts everything at N = 2.
    assert_eq!(report["oracle_acceptance"]["rate"], 1.0);
}
