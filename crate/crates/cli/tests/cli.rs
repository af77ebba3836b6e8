use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dw")).args(args).env_remove("DW_SEED").output().expect("dw runs")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_example(dir: &Path, kind: &str) -> String {
    let p = dir.join(format!("{kind}.json"));
    let o = dw(&["example", kind, "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    p.to_str().unwrap().to_string()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// CSV body with the manifest comment dropped.
fn body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn witness_on_reference_behaviors() {
    let dir = tempfile::tempdir().unwrap();
    let pr = json_out(&dw(&["witness", &write_example(dir.path(), "pr-box")]));
    assert_eq!(f(&pr["chsh"]), 4.0);
    assert_eq!(pr["post_quantum_under_full_agreement"], true);
    assert_eq!(pr["no_signalling"], true);

    let max = json_out(&dw(&["witness", &write_example(dir.path(), "max-behavior")]));
    assert!((f(&max["chsh"]) - 2.5).abs() < 1e-12);
    assert!(f(&max["epsilon"]).abs() < 1e-12);
    assert_eq!(max["full_agreement_verdict"], "not-applicable");

    let u = json_out(&dw(&["witness", &write_example(dir.path(), "uniform")]));
    assert_eq!(f(&u["chsh"]), 0.0);
    assert_eq!(f(&u["delta_ns_lower"]), 0.25);
}

#[test]
fn witness_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"settings\":2,\"outcomes\":2,\"p\":[1,2]}").unwrap();
    assert_eq!(dw(&["witness", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(dw(&["witness", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));

    // b1 copies x2: normalized but signalling
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for x1 in 0..2 {
        for x2 in 0..2 {
            p[x2][0][x1][x2] = 1.0;
        }
    }
    let sig = dir.path().join("sig.json");
    std::fs::write(&sig, serde_json::json!({ "settings": 2, "outcomes": 2, "p": p }).to_string()).unwrap();
    let o = dw(&["witness", sig.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json_out(&o)["no_signalling"], false);
}

#[test]
fn selftest_reports() {
    let dir = tempfile::tempdir().unwrap();
    let r = json_out(&dw(&["selftest", &write_example(dir.path(), "max-realization")]));
    assert!((f(&r["swap_fidelity"]) - 1.0).abs() < 1e-9);
    assert!(f(&r["sos_residual"]).abs() < 1e-9);
    assert_eq!(r["uniform_marginals"], true);

    let noisy = json_out(&dw(&["selftest", "--builtin", "max", "--noise", "0.1"]));
    assert!((f(&noisy["swap_fidelity"]) - 0.925).abs() < 1e-9);
    assert!(noisy["sos_residual"].is_null());

    let o = dw(&["selftest", &write_example(dir.path(), "max-behavior")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("is a behavior"));
}

#[test]
fn ns_curve_matches_closed_form_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ns.csv");
    let o = dw(&["curve", "ns", "--chsh", "2:4:9", "--eps", "0,0.05,0.2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "# manifest=ns.csv.manifest.json");

    let chsh = csv_column(&text, "chsh");
    let eps = csv_column(&text, "epsilon");
    let delta = csv_column(&text, "delta_ns");
    let verdict = csv_column(&text, "verdict");
    assert_eq!(chsh.len(), 27);
    for i in 0..chsh.len() {
        let (s, e): (f64, f64) = (chsh[i].parse().unwrap(), eps[i].parse().unwrap());
        // E00 = 1 − 2ε caps the other three correlators' contribution at 3
        if s > 4.0 - 2.0 * e + 1e-12 {
            assert_eq!(verdict[i], "INFEASIBLE");
            continue;
        }
        let expect = (e / 2.0).max((s - 2.0 + 2.0 * e) / 4.0);
        assert!((delta[i].parse::<f64>().unwrap() - expect).abs() < 1e-9, "{s} {e}");
    }

    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ns.csv.manifest.json")).unwrap())
        .unwrap();
    assert_eq!(m["tool"], "dw");
    assert_eq!(m["config"]["subcommand"], "curve");
    let digest = m["outputs"][0]["sha256"].as_str().unwrap();
    use sha2_hex::hex_sha256;
    assert_eq!(digest, hex_sha256(text.as_bytes()));
}

mod sha2_hex {
    /// Independent digest via the system `sha256sum`, falling back to
    /// `openssl` when absent.
    pub fn hex_sha256(bytes: &[u8]) -> String {
        use std::io::Write;
        use std::process::{Command, Stdio};
        for (cmd, args) in [("sha256sum", &[][..]), ("openssl", &["dgst", "-sha256", "-r"][..])] {
            let Ok(mut child) = Command::new(cmd).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()
            else {
                continue;
            };
            child.stdin.take().unwrap().write_all(bytes).unwrap();
            let out = child.wait_with_output().unwrap();
            return String::from_utf8(out.stdout).unwrap().split_whitespace().next().unwrap().to_string();
        }
        panic!("no sha256 tool available");
    }
}

#[test]
fn quantum_curve_tracks_analytic_and_is_order_stable() {
    let run = |jobs: &str| {
        let o = dw(&["curve", "quantum-opt", "--eps", "0,0.05,0.146,0.3,0.5", "--jobs", jobs, "--seed", "5"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let a = run("1");
    assert_eq!(body(&a), body(&run("4")));
    let eps = csv_column(&a, "epsilon");
    let chsh = csv_column(&a, "chsh");
    for (e, s) in eps.iter().zip(&chsh) {
        let c = 1.0 - 2.0 * e.parse::<f64>().unwrap();
        let curve = c + 3.0 * (std::f64::consts::FRAC_PI_3 - c.asin() / 3.0).sin();
        assert!((s.parse::<f64>().unwrap() - curve).abs() < 1e-3, "{e}: {s} vs {curve}");
    }
}

#[test]
fn npa_curve_point() {
    let o = dw(&["curve", "npa", "--chsh", "2", "--eps", "0.1", "--level", "2", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = &json_out(&o)["rows"][0];
    assert_eq!(row["verdict"], "OK");
    assert!(f(&row["delta_quantum"]) >= f(&row["delta_ns"]));
    assert!((f(&row["delta_quantum"]) - 0.05).abs() < 2e-3);
}

#[test]
fn bad_arguments_are_input_errors() {
    for args in [
        &["curve", "ns", "--chsh", "2:4"][..],
        &["curve", "quantum-opt", "--chsh", "2.5"],
        &["curve", "npa", "--level", "7"],
        &["curve", "ns", "--jobs", "0"],
        &["experiment", "--mode", "abinitio"],
        &["experiment", "--mode", "tomography-opt", "--delta", "1.5"],
        &["bogus"],
    ] {
        assert_eq!(dw(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn experiment_runs_are_reproducible_and_keep_failures() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let trace = dir.path().join(format!("{name}.trace"));
        let o = dw(&[
            "experiment", "--mode", "abinitio", "--delta", "1", "--eps", "0.022", "--runs", "4", "--counts", "10000",
            "--seed", "11", "--jobs", jobs, "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read_to_string(out).unwrap(), std::fs::read_to_string(trace).unwrap())
    };
    let (a, ta) = run("a.csv", "1");
    let (b, tb) = run("b.csv", "3");
    assert_eq!(body(&a), body(&b));
    assert_eq!(body(&ta), body(&tb));
    assert_eq!(csv_column(&a, "status").len(), 4);
    assert!(csv_column(&a, "status").iter().all(|s| s == "OK" || s == "STAGE1_FAILED"));
    let m: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seeds"]["runs"].as_array().unwrap().len(), 4);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn no_violation_without_overlap() {
    let o = dw(&[
        "experiment", "--mode", "abinitio", "--delta", "0", "--eps", "0.022", "--runs", "8", "--format", "json",
    ]);
    assert!(o.status.success());
    let v = json_out(&o);
    for row in v["rows"].as_array().unwrap() {
        if row["status"] == "OK" {
            assert!(f(&row["chsh"]) <= 2.0 + 3.0 * f(&row["chsh_sigma"]), "{row}");
        }
    }
    let t = dw(&["experiment", "--mode", "tomography-opt", "--delta", "0", "--eps", "0,0.1,0.3", "--format", "json"]);
    for row in json_out(&t)["rows"].as_array().unwrap() {
        assert!(f(&row["chsh"]) <= 2.0 + 1e-9, "{row}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_dw"))
        .args(["curve", "quantum-opt", "--eps", "0", "--format", "json"])
        .env("DW_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json_out(&o)["rows"][0]["seed"], 42);
}
