use std::path::PathBuf;
use std::process::Command;

use abacus_rnn::cli::main_with;

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs")
}

fn prog(name: &str) -> String {
    programs().join(name).display().to_string()
}

fn abm(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("abm").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = abm(args);
    assert_eq!(code, 0, "stderr: {err}");
    out
}

#[test]
fn run_reports() {
    assert_eq!(ok(&["run", &prog("double.abm"), "--input", "[(1/2)]"]), "[(1)]\n");
    assert_eq!(ok(&["run", &prog("add2.abm"), "--reg", "0=2", "--reg", "1=3"]), "R0=5\n");
    assert_eq!(
        ok(&["run", &prog("loop.abm"), "--budget", "1000"]),
        "budget exceeded after 1000 steps\n"
    );
    assert_eq!(ok(&["run", &prog("relu1.abm"), "--input", "[(-3, 5/10)]"]), "[(0, 1/2)]\n");
}

#[test]
fn trace_streams_every_step() {
    let out = ok(&["run", &prog("succ.abm"), "--reg", "0=4", "--trace"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("inc 0 2") && lines[0].ends_with("R0=5"));
    assert!(lines[1].contains("halt"));
    assert_eq!(lines[2], "R0=5");
    assert_eq!(ok(&["trace", &prog("succ.abm"), "--reg", "0=4"]), out);
}

#[test]
fn codec_commands() {
    assert_eq!(ok(&["encode", "--seq", "[( 1/2 )]"]), "46\n");
    assert_eq!(ok(&["decode", "--nat", "4"]), "[(1)]\n");
    assert_eq!(ok(&["decode", "--nat", "0"]), "[]\n");
    for n in [0u32, 1, 2, 3, 46, 509, 123_456] {
        let lit = ok(&["decode", "--nat", &n.to_string()]);
        assert_eq!(ok(&["encode", "--seq", lit.trim()]), format!("{n}\n"));
    }
    let code = ok(&["encode", "--program", &prog("add2.abm")]);
    let text = ok(&["decode", "--program", "--nat", code.trim()]);
    assert!(text.starts_with("#kind: rnn\n"));
    assert!(text.contains("dec 1 3"));
}

#[test]
fn metric_command() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.seq");
    let b = dir.path().join("b.seq");
    std::fs::write(&a, "[(1),(2),(3)]\n").unwrap();
    std::fs::write(&b, "[(1),(3)]").unwrap();
    let (a, b) = (a.display().to_string(), b.display().to_string());
    assert_eq!(ok(&["metric", "--kind", "lcs", &a, &b]), "1/3\n");
    assert_eq!(ok(&["metric", "--kind", "align", &a, &b]), "1\n");
    assert_eq!(ok(&["metric", "--kind", "align", "--indel", "1/4", &a, &b]), "1/4\n");
    assert_eq!(ok(&["metric", "[(1/2, -3)]", "[(0, -1)]"]), "2\n");
    assert_eq!(ok(&["metric", "--norm", "l1", "[(1/2, -3)]", "[(0, -1)]"]), "5/2\n");
    let (code, _, err) = abm(&["metric", "[(1)]", "[(1),(2)]"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn cluster_command() {
    let inputs = programs().join("relu_inputs").display().to_string();
    let out = ok(&["cluster", "--machine", &prog("relu1.abm"), "--inputs", &inputs]);
    assert_eq!(
        out,
        "cluster 1 -> [(0)]: [(-2)] [(-1)]\ncluster 2 -> [(1)]: [(1)]\ncluster 3 -> [(2)]: [(2)]\n"
    );
    let (code, _, err) = abm(&["cluster", "--machine", &prog("relu1.abm"), "--inputs", &inputs, "--silhouette"]);
    assert_eq!(code, 1);
    assert!(err.contains("single point"));

    let out = ok(&[
        "cluster", "--machine", &prog("sign.abm"), "--inputs", &inputs, "--dunn", "--threshold", "1/2",
    ]);
    assert!(out.ends_with("dunn = 2\nsilhouette = 7/12\nthreshold 1/2: pass\n"), "{out}");
}

#[test]
fn falsify_command_is_deterministic() {
    let args = [
        "falsify", "--machine", &prog("step.abm"), "--eps", "1", "--delta", "1/100", "--seed", "5",
        "--count", "3000", "--max-len", "1", "--max-arity", "1",
    ];
    let first = ok(&args);
    assert!(first.starts_with("witness at sample"));
    assert!(first.contains("dout = 1\n"));
    assert_eq!(ok(&args), first);

    let out = ok(&[
        "falsify", "--machine", &prog("double.abm"), "--eps", "1", "--delta", "1/4", "--count", "300",
    ]);
    assert!(out.starts_with("exhausted: 300 samples"));
}

#[test]
fn translate_command_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let lowered = dir.path().join("double_abacus.abm");
    ok(&["translate", "--to", "abacus", "--max-len", "1", "--max-arity", "1", &prog("double.abm"), "-o", &lowered.display().to_string()]);
    let text = std::fs::read_to_string(&lowered).unwrap();
    assert!(text.starts_with("#kind: abacus\n# generated by abm translate from double.abm"));
    assert_eq!(ok(&["run", &lowered.display().to_string(), "--reg", "0=46"]), "R0=4\n");

    let lifted = ok(&["translate", &prog("succ.abm")]);
    let path = dir.path().join("succ_rnn.abm");
    std::fs::write(&path, lifted).unwrap();
    assert_eq!(ok(&["run", &path.display().to_string(), "--input", "[(0), (0)]"]), "[(1)]\n");
}

#[test]
fn selftest_passes() {
    let out = ok(&["selftest", "--corpus", &programs().display().to_string()]);
    assert!(!out.contains("FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(abm(&["run", &prog("add2.abm"), "--input", "[]"]).0, 2);
    assert_eq!(abm(&["run", &prog("double.abm"), "--input", "[(1"]).0, 2);
    assert_eq!(abm(&["bogus"]).0, 2);
    assert_eq!(abm(&["run", "/nonexistent.abm"]).0, 2);
    assert_eq!(abm(&["translate", &prog("double.abm"), "--max-arity", "0"]).0, 2);
    assert_eq!(abm(&["translate", &prog("double.abm"), "--to", "rnn"]).0, 2);
    // Halting without a well-formed sequence is a domain error.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.abm");
    std::fs::write(&bad, "#kind: rnn\nzero 1\nhalt\n").unwrap();
    let (code, _, err) = abm(&["run", &bad.display().to_string(), "--input", "[(1)]"]);
    assert_eq!(code, 1);
    assert!(err.contains("well-formed"));
    let (code, out, _) = abm(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("falsify"));
}

#[test]
fn binary_exit_codes_and_env_budget() {
    let bin = env!("CARGO_BIN_EXE_abm");
    let out = Command::new(bin)
        .args(["run", &prog("loop.abm")])
        .env("ABM_BUDGET", "77")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "budget exceeded after 77 steps\n");
    let out = Command::new(bin).args(["decode"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
