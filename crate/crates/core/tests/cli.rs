use nlswap::boxes::make_pr_box;
use nlswap::cli::run;
use nlswap::json::{parse_classification, parse_swap_outcome, parse_teleport_result};
use nlswap::polytope::Tier;
use nlswap::rational::ratio;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn nlswap(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nlswap").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let pr = write(&dir, "pr.json", r#"{"pr": true}"#);
    let anti = write(&dir, "antipr.json", r#"{"anti_pr": true}"#);
    (dir, pr, anti)
}

#[test]
fn ch_of_pr_box() {
    let (_d, pr, _) = fixtures();
    let r = nlswap(&["ch", s(&pr)]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "3/2\n"));
}

#[test]
fn swap_pr_pair() {
    let (_d, pr, _) = fixtures();
    let r = nlswap(&["swap", s(&pr), s(&pr)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = parse_swap_outcome(&serde_json::from_str(&r.stdout).unwrap()).unwrap();
    assert_eq!(out.q, ratio(1, 3));
    assert_eq!(out.success_box, make_pr_box());
}

#[test]
fn swap_rejects_anti_pr_unless_unchecked() {
    let (_d, pr, anti) = fixtures();
    let r = nlswap(&["swap", s(&anti), s(&pr)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("not genuine"), "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let r = nlswap(&["swap", "--unchecked", s(&anti), s(&pr)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn malformed_inputs_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"p":[[[["1/2","0"],["0","1/2"]],[["1/2","0"],["0","1/2"]]],[[["1/2","0"],["0","1/2"]],[["0","1/2"],["1/2","1/0"]]]]}"#,
    );
    let r = nlswap(&["ch", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("p[1][1][1][1]"), "{}", r.stderr);

    let short = write(&dir, "short.json", r#"{"p":[[[["1"]]]]}"#);
    let r = nlswap(&["classify", s(&short)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("at p: expected 2 elements"), "{}", r.stderr);

    let syntax = write(&dir, "syntax.json", "{");
    assert_eq!(nlswap(&["ch", s(&syntax)]).code, 2);
    assert_eq!(nlswap(&["ch", "/nonexistent/box.json"]).code, 2);
    assert_eq!(nlswap(&["ch", s(&syntax), "--bogus"]).code, 2);
    assert_eq!(nlswap(&["sweep", "--step", "1/3"]).code, 2);
    assert_eq!(nlswap(&["sweep", "--step", "one"]).code, 2);
    assert_eq!(nlswap(&["frobnicate"]).code, 2);
}

#[test]
fn invalid_box_is_a_check_failure() {
    let dir = TempDir::new().unwrap();
    let signalling = write(
        &dir,
        "sig.json",
        r#"{"p":[[[["1","0"],["0","0"]],[["0","0"],["0","1"]]],[[["1","0"],["0","0"]],[["1","0"],["0","0"]]]]}"#,
    );
    let r = nlswap(&["classify", s(&signalling)]);
    assert_eq!(r.code, 1);
    let c = parse_classification(&serde_json::from_str(&r.stdout).unwrap()).unwrap();
    assert_eq!(c.tier, Tier::Invalid);
    assert_eq!(nlswap(&["ch", s(&signalling)]).code, 1);
}

#[test]
fn classify_outputs_schema() {
    let (_d, pr, _) = fixtures();
    let r = nlswap(&["classify", s(&pr), "--tol", "1e-9"]);
    assert_eq!(r.code, 0);
    let c = parse_classification(&serde_json::from_str(&r.stdout).unwrap()).unwrap();
    assert_eq!(c.tier, Tier::GenuineNonlocal);
    assert_eq!(c.ch, ratio(3, 2));
}

#[test]
fn synthesized_coupler_file_reproduces_default_swap() {
    let (dir, pr, _) = fixtures();
    let coupler = dir.path().join("coupler.json");
    assert_eq!(nlswap(&["synthesize", "-o", s(&coupler)]).code, 0);
    let with_file = nlswap(&["swap", s(&pr), s(&pr), "--coupler", s(&coupler)]);
    let default = nlswap(&["swap", s(&pr), s(&pr)]);
    assert_eq!(with_file.code, 0, "{}", with_file.stderr);
    assert_eq!(with_file.stdout, default.stdout);

    let bad = write(&dir, "old.json", r#"{"schema_version": 0, "coefficients": []}"#);
    let r = nlswap(&["swap", s(&pr), s(&pr), "--coupler", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("schema_version"), "{}", r.stderr);
}

#[test]
fn single_box_distribution() {
    let (_d, pr, anti) = fixtures();
    let r = nlswap(&["single", s(&pr)]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["p"], serde_json::json!(["1/1", "0/1"]));
    let r = nlswap(&["single", s(&anti)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("-1/3"), "{}", r.stderr);
}

#[test]
fn teleport_deterministic_box() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "l11.json", r#"{"vertex": {"alpha": 1, "beta": 1}}"#);
    let r = nlswap(&["teleport", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let t = parse_teleport_result(&serde_json::from_str(&r.stdout).unwrap()).unwrap();
    assert_eq!(t.alice_box, nlswap::boxes::SingleBox::local(1, 1));
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.csv");
    let four = dir.path().join("four.csv");
    assert_eq!(nlswap(&["sweep", "--step", "1/10", "-o", s(&one)]).code, 0);
    assert_eq!(nlswap(&["sweep", "--step", "1/10", "--jobs", "4", "-o", s(&four)]).code, 0);
    let a = std::fs::read(&one).unwrap();
    assert_eq!(a, std::fs::read(&four).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("xi,gamma,ch_in,q,ch_out_success,swappable,tlm\n"));
    assert!(text.contains("\n1/1,0/1,3/2,1/3,3/2,true,Violated\n"));

    let stdout = nlswap(&["sweep", "--step", "1/10"]);
    assert_eq!(stdout.stdout, text);
}

#[test]
fn mixed_sweep_file() {
    let dir = TempDir::new().unwrap();
    let mixed = dir.path().join("mixed.csv");
    let r = nlswap(&["sweep", "--step", "1/4", "--mixed", s(&mixed)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&mixed).unwrap();
    let rows = text.lines().count() - 1;
    assert_eq!(rows, 12 * 12);
}

#[test]
fn verify_passes() {
    let r = nlswap(&["verify"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(!r.stdout.contains("[FAIL]"));
    assert!(r.stdout.contains("[PASS] closure"));
}

#[test]
fn binary_output_is_byte_identical() {
    let (_d, pr, anti) = fixtures();
    let exe = env!("CARGO_BIN_EXE_nlswap");
    let go = |args: &[&str]| Command::new(exe).args(args).output().unwrap();
    let a = go(&["swap", s(&pr), s(&pr)]);
    let b = go(&["swap", s(&pr), s(&pr)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(go(&["synthesize"]).stdout, go(&["synthesize"]).stdout);
    assert_eq!(go(&["swap", s(&anti), s(&pr)]).status.code(), Some(1));
    assert_eq!(go(&["ch", "missing.json"]).status.code(), Some(2));
}
