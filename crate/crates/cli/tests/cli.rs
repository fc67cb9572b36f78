use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsgrowth"))
        .args(args)
        .output()
        .unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(golden(name)).unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rpq_document_is_stable() {
    assert_eq!(
        stdout(&run(&["rpq", "--p", "2", "--q", "3"])),
        read("rpq-2-3.rule")
    );
}

#[test]
fn series_from_generated_rule() {
    let rule = golden("rpq-2-3.rule");
    let out = run(&["series", rule.to_str().unwrap(), "--n", "8"]);
    assert_eq!(stdout(&out), read("series-rpq-2-3-n8.csv"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("through degree 8: pass"));
}

#[test]
fn exact_moduli_of_r1() {
    let out = run(&["modulus", "builtin:R1", "--annuli", "5", "--solver", "off"]);
    assert_eq!(stdout(&out), read("modulus-r1-5.csv"));
}

#[test]
fn solver_column_matches_closed_form() {
    let text = stdout(&run(&["modulus", "builtin:R1", "--annuli", "3"]));
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (num, den) = cols[3].split_once('/').unwrap();
        let exact = num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap();
        assert!(
            (cols[4].parse::<f64>().unwrap() - exact).abs() < 1e-6,
            "{line}"
        );
    }
}

#[test]
fn radius_zero_ball_is_the_seed() {
    for norm in ["fat", "skinny"] {
        let text = stdout(&run(&[
            "grow",
            "builtin:R2",
            "--radius",
            "0",
            "--norm",
            norm,
        ]));
        assert_eq!(text, "n,s_n,b_n,ln_ratio\n0,1,1,\n");
    }
}

#[test]
fn runtime_errors_exit_one_with_json() {
    let out = run(&["grow", "builtin:nope", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    let last = err.lines().last().unwrap();
    assert!(
        last.starts_with(r#"{"error":"invalid_argument","message":"#),
        "{last}"
    );
    assert!(last.contains("unknown builtin rule `nope`"));
}

#[test]
fn budget_overflow_is_reported() {
    let out = run(&[
        "--max-tiles",
        "100",
        "subdivide",
        "builtin:R2",
        "--tile",
        "t1",
        "--levels",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(r#"{"error":"#));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["grow"]).status.code(), Some(2));
    assert_eq!(
        run(&["modulus", "builtin:R1", "--solver", "maybe"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn malformed_rule_reports_position() {
    let path = std::env::temp_dir().join(format!("fsgrowth-bad-{}.rule", std::process::id()));
    std::fs::write(&path, "rule bad\ntype t1 4 sub 2 2 2 2\ntemplate t4\nend\n").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("3:10") || err.contains("line 3"), "{err}");
}
