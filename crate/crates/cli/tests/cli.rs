use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cito(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cito"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sample() -> String {
    fixtures().join("sample").display().to_string()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn order_graph_direct_and_transitive() {
    let s = sample();
    let direct = json(&cito(&[
        "order",
        "--input",
        &s,
        "--strategy",
        "graph",
        "--no-transitive",
        "--json",
        "--no-timestamp",
    ]));
    let run = &direct["strategies"][0]["runs"][0];
    assert_eq!(run["order"], serde_json::json!(["A", "C", "B"]));
    assert_eq!(run["cost"]["Stubs"], 1);

    let full = json(&cito(&[
        "order",
        "--input",
        &s,
        "--strategy",
        "graph",
        "--json",
        "--no-timestamp",
    ]));
    assert_eq!(
        full["strategies"][0]["runs"][0]["order"],
        serde_json::json!(["C", "B", "A"])
    );
}

#[test]
fn feedback_on_acyclic_variant_needs_no_stubs() {
    let p = fixtures()
        .join("sample-acyclic.pmif.json")
        .display()
        .to_string();
    let r = json(&cito(&[
        "order",
        "--input",
        &p,
        "--strategy",
        "feedback",
        "--json",
        "--no-timestamp",
    ]));
    assert_eq!(r["strategies"][0]["runs"][0]["cost"]["OCplx"], 0.0);
}

#[test]
fn pmif_and_source_inputs_agree() {
    let p = fixtures().join("sample.pmif.json").display().to_string();
    let args = |input: &str| {
        cito(&[
            "order",
            "--input",
            input,
            "--strategy",
            "ria",
            "--json",
            "--no-timestamp",
        ])
        .stdout
    };
    assert_eq!(args(&p), args(&sample()));
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let s = sample();
    for cmd in [
        vec![
            "order",
            "--input",
            &s,
            "--strategy",
            "graph",
            "--json",
            "--no-timestamp",
        ],
        vec![
            "compare",
            "--input",
            &s,
            "--repeats",
            "3",
            "--json",
            "--no-timestamp",
        ],
        vec!["analyze", "--input", &s, "--json", "--explain"],
    ] {
        let a = cito(&cmd);
        let b = cito(&cmd);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd:?}");
    }
}

#[test]
fn analyze_sample_reports_two_chains() {
    let r = json(&cito(&["analyze", "--input", &sample(), "--json"]));
    assert_eq!(r["stats"]["chains"], 2);
    assert_eq!(r["histogram"]["1"], 0);
    let mut ts: Vec<f64> = r["chains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["probability"].as_f64().unwrap())
        .collect();
    ts.sort_by(f64::total_cmp);
    assert_eq!(ts, [0.3125, 0.75]);
}

#[test]
fn compare_reports_rt_against_feedback() {
    let r = json(&cito(&[
        "compare",
        "--input",
        &sample(),
        "--repeats",
        "4",
        "--strategy",
        "graph",
        "--strategy",
        "feedback",
        "--json",
        "--serial",
    ]));
    let feedback = r["strategies"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["strategy"] == "feedback")
        .unwrap();
    assert_eq!(feedback["RT"], 1.0);
    assert!(r["timestamp"].is_u64());
}

#[test]
fn table_output_has_cost_columns() {
    let out = cito(&["compare", "--input", &sample(), "--repeats", "2", "--table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().nth(1).unwrap();
    for col in ["OCplx", "ACplx", "MCplx", "TCplx", "Stubs", "RT"] {
        assert!(header.contains(col), "{header}");
    }
}

#[test]
fn gen_writes_parseable_source() {
    let dir = std::env::temp_dir().join(format!("cito-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("gen.minij").display().to_string();
    let out = cito(&[
        "gen",
        "--classes",
        "6",
        "--density",
        "0.2",
        "--seed",
        "4",
        "--out",
        &file,
    ]);
    assert!(out.status.success());
    let r = json(&cito(&[
        "order",
        "--input",
        &file,
        "--strategy",
        "feedback",
        "--json",
        "--no-timestamp",
    ]));
    assert_eq!(r["classes"], 6);
    let pmif = cito(&[
        "gen",
        "--classes",
        "6",
        "--density",
        "0.2",
        "--seed",
        "4",
        "--format",
        "pmif",
    ]);
    assert!(pmif.status.success());
    let v: Value = serde_json::from_slice(&pmif.stdout).unwrap();
    assert_eq!(v["pmif_version"], 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let s = sample();
    assert_eq!(
        cito(&["order", "--input", "/nonexistent/x.minij"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cito(&["order", "--input", &s, "--max-chain-len", "9"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cito(&["order", "--input", &s, "--weights", "0.5,0.5,0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cito(&["order", "--input", &s, "--strategy", "nope"])
            .status
            .code(),
        Some(1)
    );
    let capped = cito(&[
        "order",
        "--input",
        &s,
        "--strategy",
        "graph",
        "--cycle-cap",
        "1",
    ]);
    assert_eq!(capped.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("cycle cap"));
    assert_eq!(cito(&["--help"]).status.code(), Some(0));
}

#[test]
fn syntax_errors_name_the_file_and_line() {
    let dir = std::env::temp_dir().join(format!("cito-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.minij");
    std::fs::write(&file, "class A {\n  void m() {\n    x = ;\n  }\n}\n").unwrap();
    let out = cito(&["analyze", "--input", &file.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.minij:3:"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}
