use std::path::Path;
use std::process::{Command, Output};

use hkp_core::golden::{Expected, GoldenTable};
use hkp_core::symbol::format::{parse_symbol, Bundle};
use hkp_core::symbol::TruncationPolicy;
use tempfile::TempDir;

const DEFAULT: TruncationPolicy = TruncationPolicy::new(-16, 6, 0);

fn hkp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn assert_matches_golden(bundle: &Bundle, names: &[&str]) {
    let table = GoldenTable::kontsevich();
    for name in names {
        let got = &bundle.get(name).unwrap_or_else(|| panic!("{name} missing")).body;
        let Expected::Symbol(want) = &table.get(name).unwrap().expected else { panic!("{name} is not a symbol") };
        for (e, p) in want.terms() {
            assert_eq!(&got.coeff(e.h, e.xi), p, "{name} at h^{} xi^{}", e.h, e.xi);
        }
    }
}

#[test]
fn solve_reproduces_the_table() {
    let out = hkp(&["solve", "--problem", "kontsevich", "--depth", "3", "--xi-floor", "-16", "--hbar-cap", "6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let bundle = Bundle::parse(&stdout(&out), DEFAULT).unwrap();
    assert_eq!(bundle.entries.len(), 4);
    assert_matches_golden(&bundle, &["X_0", "X_1", "X_2", "X_3"]);
    assert!(bundle.entries.iter().all(|(_, s)| s.log_coef.is_zero()));
    assert!(stderr(&out).contains("level 3: alpha = 0"));
}

#[test]
fn solve_writes_per_level_files_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = hkp(&["solve", "--depth", "1", "--out-dir", d, "--format", "json"]);
    assert!(a.status.success());
    let b = hkp(&["solve", "--depth", "1", "--format", "json"]);
    let again = hkp(&["solve", "--depth", "1", "--format", "json"]);
    assert_eq!(b.stdout, again.stdout);
    let x1 = std::fs::read_to_string(dir.path().join("X_1.json")).unwrap();
    let one = Bundle::from_json(&x1, DEFAULT).unwrap();
    assert_matches_golden(&one, &["X_1"]);
    assert!(!Path::new(&dir.path().join("X_2.json")).exists());
}

#[test]
fn depth_zero_is_the_seed() {
    let out = hkp(&["solve", "--depth", "0"]);
    assert!(out.status.success());
    let bundle = Bundle::parse(&stdout(&out), DEFAULT).unwrap();
    assert_eq!(bundle.entries.len(), 1);
    assert_matches_golden(&bundle, &["X_0"]);
}

#[test]
fn solve_from_a_problem_file() {
    let dir = TempDir::new().unwrap();
    let problem = write(
        &dir,
        "p.txt",
        "[f]\nh^0 xi^2 : 1\n\n[g]\nh^0 xi^1 : -1\nh^0 xi^-1 : 1/2*x\nh^1 xi^-2 : -1/4\n\n\
         [X_0]\nh^0 xi^-1 : -1/4*x^2\nh^0 xi^-3 : 1/48*x^3\nh^0 xi^-5 : -1/384*x^4\n",
    );
    // a seed that only holds near the top of the window
    let out = hkp(&["solve", "--problem", &problem, "--depth", "1", "--xi-floor", "-5", "--hbar-cap", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let bundle = Bundle::parse(&stdout(&out), DEFAULT).unwrap();
    assert_eq!(bundle.get("X_1").unwrap().body.coeff(0, -2).to_string(), "1/4*x");
    assert_eq!(bundle.get("X_1").unwrap().body.coeff(0, -4).to_string(), "-3/32*x^2");
}

#[test]
fn bad_inputs_exit_2_without_output() {
    let dir = TempDir::new().unwrap();
    let junk = write(&dir, "junk.txt", "[f]\nh^0 xi^2 1\n");
    let target = dir.path().join("out.txt");
    let out = hkp(&["solve", "--problem", &junk, "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error"));
    assert!(!target.exists());

    let missing = write(&dir, "missing.txt", "[f]\nh^0 xi^2 : 1\n");
    assert_eq!(hkp(&["solve", "--problem", &missing]).status.code(), Some(2));
    assert_eq!(hkp(&["solve", "--problem", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(hkp(&["solve", "--depth", "4", "--hbar-cap", "3"]).status.code(), Some(2));
    assert_eq!(hkp(&["verify", "--problem", "other"]).status.code(), Some(2));
}

#[test]
fn non_canonical_pair_is_a_computation_failure() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.txt", "[f]\nh^0 xi^2 : 1\n[g]\nh^0 xi^1 : 1\n[X_0]\n");
    let out = hkp(&["solve", "--problem", &p, "--depth", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not hbar"));
}

#[test]
fn wkb_phase_of_x_over_xi() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.txt", "h^0 xi^-1 : x\n");
    let out = hkp(&["wkb", "to-s", "--input", &x, "--xi-floor", "-7", "--hbar-cap", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "h^0 xi^-1 : x\nh^0 xi^-3 : -1/2*x\nh^0 xi^-5 : 1/2*x\nh^0 xi^-7 : -5/8*x\n");

    let s = write(&dir, "s.txt", &stdout(&out));
    let back = hkp(&["wkb", "to-x", "--input", &s, "--xi-floor", "-7", "--hbar-cap", "3"]);
    assert!(back.status.success());
    assert_eq!(stdout(&back), "h^0 xi^-1 : x\n");

    let rt = hkp(&["wkb", "to-s", "--input", &x, "--roundtrip", "--guard-margin", "3"]);
    assert!(rt.status.success(), "{}", stderr(&rt));
}

#[test]
fn wkb_edge_cases() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "e.txt", "");
    let out = hkp(&["wkb", "to-s", "--input", &empty]);
    assert!(out.status.success());
    assert!(parse_symbol(&stdout(&out), DEFAULT).unwrap().is_zero());

    let positive = write(&dir, "p.txt", "h^0 xi^0 : x\n");
    let out = hkp(&["wkb", "to-s", "--input", &positive]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-negative"));

    let json = write(&dir, "j.json", r#"{"terms": [{"h": 0, "xi": -1, "coef": "x"}]}"#);
    let out = hkp(&["wkb", "to-s", "--input", &json, "--xi-floor", "-3", "--format", "json"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"coef\": \"-1/2*x\""));
}

#[test]
fn tau_reports() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "zero.txt", "");
    let out = hkp(&["tau", "--input", &zero, "--hbar-cap", "2", "--t-cap", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "[v]\n\n[gradients]\n\n[F]\nF_0 : 0\nF_1 : 0\nF_2 : 0\n\n[parity]\nodd levels vanish\n");

    let closed = write(&dir, "c.txt", "v[0][1] : t1 + t2\nv[0][2] : t1 + 2*t2\n");
    let out = hkp(&["tau", "--input", &closed, "--t-cap", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("F_0 : t2^2 + t1*t2 + 1/2*t1^2\n"), "{}", stdout(&out));

    let odd = write(&dir, "o.txt", "v[1][1] : 3\n");
    let out = hkp(&["tau", "--input", &odd, "--t-cap", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with("[parity]\ndF_1/dt1 : 3\n"));

    let open = write(&dir, "n.txt", "v[0][1] : t2\nv[0][2] : 0\n");
    let target = dir.path().join("out.txt");
    let out = hkp(&["tau", "--input", &open, "--t-cap", "2", "--output", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not closed in (t1, t2)"));
    assert!(!target.exists());
}

#[test]
fn verify_default_policy() {
    let out = hkp(&["verify", "--problem", "kontsevich", "--guard-margin", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), GoldenTable::kontsevich().entries.len());
    assert!(text.contains("gap X_0 h^0 xi^-7 = 0"));
    assert!(text.contains("identical"));
}

#[test]
fn verify_shallow_floor_fails_cleanly() {
    let out = hkp(&["verify", "--xi-floor", "-8"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("warning: --xi-floor -8 is shallower"));
    assert!(err.contains("error: FAIL"));
}
