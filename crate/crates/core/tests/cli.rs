use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qss_core::AccessStructure;

fn qss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_structure(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

struct Fixture {
    _dir: tempfile::TempDir,
    triangle: String,
    vee: String,
    disjoint: String,
    broken: String,
    dir: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().to_path_buf();
    let s = |name: &str, json: &str| {
        write_structure(&p, name, json)
            .to_string_lossy()
            .into_owned()
    };
    Fixture {
        triangle: s(
            "tri.json",
            r#"{"n": 3, "minimal_sets": [[1,2],[2,3],[3,1]]}"#,
        ),
        vee: s("vee.json", r#"{"n": 3, "minimal_sets": [[1,2],[1,3]]}"#),
        disjoint: s(
            "disjoint.json",
            r#"{"n": 4, "minimal_sets": [[1,2],[3,4]]}"#,
        ),
        broken: s("broken.json", r#"{"n": 3, "minimal_sets": [[1,2]"#),
        dir: p,
        _dir: dir,
    }
}

#[test]
fn entropy_of_a_pair() {
    let f = fixture();
    let out = qss(&["entropy", "--structure", &f.triangle, "--set", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3.000000 bits (a=4,b=2,m=4, authorized)\n");
}

#[test]
fn verify_oracle_on_the_triangle() {
    let f = fixture();
    let out = qss(&["verify-oracle", "--structure", &f.triangle]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "OK: 8/8 subsets match; secrecy OK; recoverability OK\n"
    );

    let out = qss(&[
        "verify-oracle",
        "--structure",
        &f.vee,
        "--q",
        "3",
        "--secret",
        "0.5,0.25,0.25",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn dual_of_the_triangle() {
    let f = fixture();
    let out = qss(&["dual", "--structure", &f.triangle, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let dual = AccessStructure::from_json(&stdout(&out)).unwrap();
    assert_eq!(
        dual.minimal_sets(),
        vec![vec![1, 2], vec![1, 3], vec![2, 3]]
    );

    let text = stdout(&qss(&["dual", "--structure", &f.triangle]));
    assert_eq!(text, "minimal sets: [[1,2],[1,3],[2,3]] (n=3)\n");
}

#[test]
fn purify_round_trips_through_json() {
    let f = fixture();
    let out = qss(&["purify", "--structure", &f.vee, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let purified = AccessStructure::from_json(&stdout(&out)).unwrap();
    assert_eq!(purified.n(), 4);
    assert!(purified.is_self_dual());
    assert_eq!(
        purified.minimal_sets(),
        vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3, 4]]
    );
}

#[test]
fn classify_reports_unrealizable_structures() {
    let f = fixture();
    let out = qss(&["classify", "--structure", &f.disjoint, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["quantum_realizable"], false);
    assert_eq!(v["self_dual"], false);
    assert_eq!(v["connected"], true);
}

#[test]
fn msp_and_css_dumps() {
    let f = fixture();
    let out = qss(&["msp", "--structure", &f.triangle]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("6 4 2\n0 1 0 0\n1 1 0 0\n"), "{text}");
    assert!(text.contains("psi: 1 2 2 3 3 1\n"));

    let out = qss(&["css", "--structure", &f.triangle, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["x_bar"], serde_json::json!([0, 1, 0, 1, 0, 1]));
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
}

#[test]
fn tent_defaults_to_csv_on_the_greedy_chain() {
    let f = fixture();
    let out = qss(&["tent", "--structure", &f.triangle]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "chain,step,subset,size,authorized,entropy_bits\n\
         0,0,,0,false,0.000000\n\
         0,1,1,1,false,2.000000\n\
         0,2,1-2,2,true,3.000000\n\
         0,3,1-2-3,3,true,1.000000\n"
    );
    let explicit = qss(&["tent", "--structure", &f.triangle, "--chain", "3|2,3|1,2,3"]);
    assert!(stdout(&explicit).contains("0,1,3,1,false,2.000000"));
    let all = qss(&["tent", "--structure", &f.triangle, "--all-chains"]);
    assert_eq!(stdout(&all).lines().count(), 1 + 6 * 4);
}

#[test]
fn profile_text_marks_tents() {
    let f = fixture();
    let out = qss(&["profile", "--structure", &f.vee, "--all-chains"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.ends_with("tent)")), "{text}");
}

#[test]
fn verify_theorem_passes() {
    let f = fixture();
    for structure in [&f.triangle, &f.vee] {
        let out = qss(&[
            "verify-theorem",
            "--structure",
            structure,
            "--secret",
            "0.7,0.3",
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).starts_with("OK:"));
    }
    let out = qss(&[
        "verify-theorem",
        "--structure",
        &f.triangle,
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["violations"], serde_json::json!([]));
}

#[test]
fn input_errors_exit_one_with_a_diagnostic() {
    let f = fixture();
    let cases: &[(&[&str], &str)] = &[
        (
            &["entropy", "--structure", &f.disjoint],
            "not quantum realizable",
        ),
        (&["entropy", "--structure", &f.broken], "malformed JSON"),
        (
            &["verify-oracle", "--structure", &f.triangle, "--cap", "10"],
            "cap is 10",
        ),
        (
            &["entropy", "--structure", &f.triangle, "--q", "4"],
            "not prime",
        ),
        (
            &["entropy", "--structure", &f.triangle, "--set", "1,7"],
            "player 7",
        ),
        (
            &["entropy", "--structure", &f.triangle, "--secret", "0.5,0.6"],
            "secret",
        ),
        (
            &["tent", "--structure", &f.triangle, "--chain", "1|2"],
            "chain",
        ),
        (
            &[
                "verify-oracle",
                "--structure",
                &f.triangle,
                "--secret",
                "1,0",
            ],
            "full support",
        ),
        (
            &["classify", "--structure", &f.triangle, "--format", "csv"],
            "csv output",
        ),
        (&["entropy"], "--structure"),
        (&["frobnicate"], "frobnicate"),
    ];
    for (args, needle) in cases {
        let out = qss(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stdout(&out).is_empty(), "{args:?}");
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let f = fixture();
    let args = [
        "entropy",
        "--structure",
        &f.vee,
        "--format",
        "json",
        "--q",
        "3",
    ];
    let first = qss(&args);
    let second = qss(&args);
    assert_eq!(first.stdout, second.stdout);

    let path = f.dir.join("report.json");
    let out = qss(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), first.stdout);
}

#[test]
fn help_exits_zero() {
    let out = qss(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verify-oracle"));
}
