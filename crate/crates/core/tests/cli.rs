//! End-to-end runs of the compiled binary: output shapes, exit codes, and
//! byte determinism of reports.

use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name);
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_britton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn shipped_configs_validate() {
    for name in ["bs12.json", "bs23.json", "amalg22.json"] {
        let out = run(&["validate", &config(name)]);
        assert!(out.status.success(), "{name} failed validation");
        assert_eq!(stdout(&out), "ok\n");
    }
}

#[test]
fn nf_prints_head_and_tail() {
    let out = run(&["nf", &config("bs12.json"), "t' a t"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "head [0]\nt' [1]\nt [0]\n");
}

#[test]
fn wp_answers_both_ways() {
    let out = run(&["wp", &config("bs23.json"), "t a a t' a' a' a'"]);
    assert_eq!(stdout(&out), "trivial\n");
    let out = run(&["wp", &config("bs23.json"), "a"]);
    assert_eq!(stdout(&out), "nontrivial\n");
    assert!(out.status.success(), "nontrivial is still a successful run");
}

#[test]
fn classify_word_reports_core() {
    let out = run(&["classify-word", &config("bs23.json"), "t a t'"]);
    assert!(stdout(&out).starts_with("elliptic\n"));
    let out = run(&["classify-word", &config("bs23.json"), "t a"]);
    assert!(stdout(&out).starts_with("hyperbolic\n"));
}

#[test]
fn conj_prints_witness_in_letters() {
    let out = run(&["conj", &config("bs12.json"), "a", "a a"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "YES\nwitness: t\n");
}

#[test]
fn conj_no_is_exit_zero_and_refused_is_one() {
    let out = run(&["conj", &config("bs12.json"), "a", "a a a"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("NO ("));

    let out = run(&[
        "conj",
        &config("bs23.json"),
        "a a",
        "a a a a a a",
        "--orbit-bound",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("REFUSED ("));
}

#[test]
fn predict_names_the_regimes() {
    let out = run(&["predict", &config("bs23.json"), "--subgroup", "H"]);
    assert!(stdout(&out).starts_with("NonAmenable"));
    let out = run(&["predict", &config("bs12.json"), "--subgroup", "H"]);
    assert!(stdout(&out).starts_with("Amenable"));
    let out = run(&["predict", &config("amalg22.json"), "--subgroup", "K"]);
    assert!(stdout(&out).starts_with("Amenable"));
}

#[test]
fn walk_exact_emits_expected_csv() {
    let out = run(&[
        "walk",
        &config("amalg22.json"),
        "--subgroup",
        "H",
        "--mode",
        "exact",
        "--nmax",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        "n,p,ci_lo,ci_hi,trials,mode\n0,1,1,1,0,exact\n1,0.5,0.5,0.5,0,exact\n2,0.5,0.5,0.5,0,exact\n"
    );
}

#[test]
fn walk_rational_lines_are_commented() {
    let out = run(&[
        "walk",
        &config("amalg22.json"),
        "--subgroup",
        "H",
        "--mode",
        "exact",
        "--nmax",
        "2",
        "--rational",
    ]);
    let text = stdout(&out);
    assert!(text.contains("# rational,2,1/2"));
}

#[test]
fn walk_mc_is_byte_deterministic() {
    let args = [
        "walk",
        &config("bs23.json"),
        "--subgroup",
        "H",
        "--mode",
        "mc",
        "--nmax",
        "6",
        "--trials",
        "5000",
        "--seed",
        "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b), "identical runs must match byte for byte");
    assert!(stdout(&a).contains(",5000,plain\n"));
}

#[test]
fn generic_csv_is_deterministic_and_tagged() {
    let args = [
        "generic",
        &config("bs23.json"),
        "--lengths",
        "4,8",
        "--samples",
        "2000",
        "--domain",
        "cyc-reduced",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert!(text.starts_with("n,samples,elliptic,fraction,domain\n"));
    assert!(text.contains(",cyc-reduced\n"));
}

#[test]
fn fit_reads_walk_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("walk.csv");
    let out = run(&[
        "walk",
        &config("amalg22.json"),
        "--subgroup",
        "H",
        "--mode",
        "exact",
        "--nmax",
        "40",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&["fit", report.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("points "));
    assert!(text.contains("poly_exponent "));
}

#[test]
fn fit_rejects_short_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("short.csv");
    std::fs::write(&report, "n,p\n1,0.5\n2,0.25\n").unwrap();
    let out = run(&["fit", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"type": "hnn", "base_rank": 1}"#,
        r#"{"type": "spiral", "base_rank": 1, "edges": [], "generators": []}"#,
        r#"{"type": "hnn", "base_rank": 1, "edges": [{"name": "t", "m_plus": [[1], [1, 2]], "m_minus": [[2]]}], "generators": []}"#,
        "not json at all",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, text).unwrap();
        let out = run(&["validate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "case {i} should be rejected");
    }
}

#[test]
fn resource_cap_exits_three() {
    let out = run(&[
        "walk",
        &config("bs23.json"),
        "--subgroup",
        "H",
        "--mode",
        "exact",
        "--nmax",
        "40",
        "--memory-cap",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_words_and_flags_exit_two() {
    let out = run(&["nf", &config("bs23.json"), "a x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "walk",
        &config("bs23.json"),
        "--subgroup",
        "K",
        "--mode",
        "exact",
        "--nmax",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "hnn splittings have no vertex K");
    let out = run(&[
        "walk",
        &config("bs23.json"),
        "--subgroup",
        "H",
        "--mode",
        "mc",
        "--nmax",
        "2",
        "--rational",
    ]);
    assert_eq!(out.status.code(), Some(2), "rationals need exact mode");
}

#[test]
fn expansion_images_round_trip() {
    // A generator standing for t a^2 exercises multi-atom images end to end.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("expanded.json");
    std::fs::write(
        &path,
        r#"{
            "type": "hnn",
            "base_rank": 1,
            "edges": [{ "name": "t", "m_plus": [[2]], "m_minus": [[3]] }],
            "generators": [
                { "name": "a", "inverse": "a'", "image": { "vertex": "H", "vector": [1] } },
                { "name": "t", "inverse": "t'", "image": { "stable": "t", "exp": 1 } },
                { "name": "s", "inverse": "s'", "image": { "expansion": [
                    { "stable": "t", "exp": 1 },
                    { "vertex": "H", "vector": [2] }
                ] } }
            ]
        }"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert!(out.status.success());
    let a = run(&["nf", path.to_str().unwrap(), "s"]);
    let b = run(&["nf", path.to_str().unwrap(), "t a a"]);
    assert_eq!(stdout(&a), stdout(&b));
    let out = run(&["wp", path.to_str().unwrap(), "s a' a' t'"]);
    assert_eq!(stdout(&out), "trivial\n");
}
