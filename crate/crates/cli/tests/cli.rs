// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qsopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsopt")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn bench(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_stats_verify_and_prune() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("nam_2_2.eccs");
    let o = qsopt(&["generate", "--gateset", "nam", "--n", "2", "--q", "2", "--backend", "algebraic", "--out", s(&raw)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("nam_2_2.eccs.manifest.json").exists());

    let o = qsopt(&["stats", s(&raw), "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["representatives"], 145);
    // H, X, CNOT on two wires each plus Rz over five expressions.
    assert_eq!(v["characteristic"], 2 + 2 + 2 + 5 * 2);

    let o = qsopt(&["verify", "--eccs", s(&raw), "--backend", "algebraic"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let pruned = dir.path().join("pruned.eccs");
    let o = qsopt(&["prune", "--in", s(&raw), "--out", s(&pruned), "--passes", "simplify,common"]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pruned.eccs.manifest.json")).unwrap()).unwrap();
    assert!(m["results"]["after"]["circuits"].as_u64() < m["results"]["before"]["circuits"].as_u64());
}

#[test]
fn generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.eccs");
    let b = dir.path().join("b.eccs");
    for p in [&a, &b] {
        let o = qsopt(&["generate", "--n", "2", "--q", "2", "--m", "1", "--seed", "99", "--backend", "algebraic", "--out", s(p)]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn optimize_with_no_transformations_returns_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.eccs");
    let o = qsopt(&["generate", "--gateset", "nam[H,CNOT]", "--n", "1", "--q", "2", "--m", "0", "--backend", "algebraic", "--out", s(&empty)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let input = dir.path().join("in.qasm");
    std::fs::write(&input, "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\nh q[0];\ncx q[0],q[1];\n").unwrap();
    let out = dir.path().join("out.qasm");
    let o = qsopt(&["optimize", "--eccs", s(&empty), "--in", s(&input), "--out", s(&out), "--timeout", "5s"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("h ") || l.starts_with("cx ")).count(), 3);
}

#[test]
fn preprocess_and_optimize_tof_3() {
    let dir = tempfile::tempdir().unwrap();
    let pre = dir.path().join("tof_3.nam.qasm");
    let o = qsopt(&["preprocess", "--gateset", "nam", "--in", s(&bench("tof_3.qasm")), "--out", s(&pre), "--passes", "transpile,toffoli,merge"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "9 gates -> 39 gates");

    let eccs = dir.path().join("nam_2_2.eccs");
    let o = qsopt(&["generate", "--n", "2", "--q", "2", "--prune", "--backend", "algebraic", "--out", s(&eccs)]);
    assert_eq!(code(&o), 0);
    let out = dir.path().join("tof_3.opt.qasm");
    let o = qsopt(&["optimize", "--eccs", s(&eccs), "--in", s(&pre), "--out", s(&out), "--timeout", "60s", "--stop-at-cost", "35"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tof_3.opt.qasm.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["results"]["final_cost"], 35);
    assert_eq!(m["seeds"][0], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qsopt(&["frobnicate"])), 1);
    assert_eq!(code(&qsopt(&["generate", "--n", "2"])), 1);
    assert_eq!(code(&qsopt(&["--help"])), 0);
    assert_eq!(code(&qsopt(&["stats", "/nonexistent/x.eccs"])), 2);

    let eccs = dir.path().join("one.eccs");
    let o = qsopt(&["generate", "--gateset", "nam[H,X]", "--n", "2", "--q", "1", "--m", "0", "--backend", "algebraic", "--out", s(&eccs)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&eccs).unwrap();
    assert!(text.contains("\"X 0; X 0\""), "{text}");
    let bad = dir.path().join("bad.eccs");
    std::fs::write(&bad, text.replace("\"X 0; X 0\"", "\"H 0; X 0\"")).unwrap();
    assert_eq!(code(&qsopt(&["verify", "--eccs", s(&bad), "--backend", "algebraic"])), 3);

    let o = Command::new(env!("CARGO_BIN_EXE_qsopt"))
        .args(["verify", "--eccs", s(&eccs)])
        .env("QSOPT_SMT_SOLVER", "/nonexistent/solver")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}
