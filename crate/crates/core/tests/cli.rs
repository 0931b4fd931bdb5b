use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn sti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sti"))
        .args(args)
        .output()
        .expect("sti runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("sti-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn infer_then_check_and_measure() {
    let o = sti(&["infer", "-e", "(\\x. x x) ((\\y. y) z)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let file = scratch("example.json", &v["derivation"].to_string());
    let path = file.to_str().unwrap();

    let c = sti(&["check", "-f", path]);
    assert_eq!(
        c.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&c.stderr)
    );

    let m = json(&sti(&["measure", "-f", path, "--format", "json"]));
    assert_eq!(m["proof_size"], 15);
    assert_eq!(m["subject_size"], 9);
    assert_eq!(m["rank"], 2);
    assert_eq!(m["degree"], 1);
    std::fs::remove_file(file).unwrap();

    // infer's own JSON output feeds straight back in
    let whole = scratch("inferred.json", &stdout(&o));
    let v = sti(&["verify", "-f", whole.to_str().unwrap()]);
    assert_eq!(
        v.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&v.stderr)
    );
    std::fs::remove_file(whole).unwrap();
}

#[test]
fn reduce_reports_decreasing_weights() {
    for (strategy, steps) in [("lo", 3), ("ri", 2)] {
        let o = sti(&[
            "reduce",
            "-e",
            "(\\x. x x) ((\\y. y) z)",
            "--strategy",
            strategy,
            "--format",
            "json",
        ]);
        assert_eq!(o.status.code(), Some(0));
        let v = json(&o);
        let entries = v.as_array().unwrap();
        assert_eq!(entries.len(), steps + 1, "{strategy}");
        assert_eq!(entries.last().unwrap()["term"], "z z");
        let ws: Vec<u64> = entries
            .iter()
            .map(|e| e["measures"]["weights"]["2"].as_u64().unwrap())
            .collect();
        assert!(ws.windows(2).all(|w| w[0] > w[1]), "{ws:?}");
    }
}

#[test]
fn verify_passes_on_the_example() {
    let o = sti(&["verify", "-e", "(\\x. x x) ((\\y. y) z)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("81"));
}

#[test]
fn exit_codes() {
    assert_eq!(sti(&["parse", "-e", "\\x."]).status.code(), Some(2));
    assert_eq!(sti(&["parse"]).status.code(), Some(2));
    assert_eq!(sti(&["parse", "-e", "x", "-f", "y"]).status.code(), Some(2));
    assert_eq!(
        sti(&[
            "infer",
            "-e",
            "(\\x. x x) (\\x. x x)",
            "--time-fuel",
            "2000"
        ])
        .status
        .code(),
        Some(3)
    );
    assert_eq!(sti(&["--help"]).status.code(), Some(0));
}

#[test]
fn remark_table() {
    let o = sti(&["remark", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.lines()
            .filter(|l| l.trim_end().ends_with("pass"))
            .count()
            == 2,
        "{out}"
    );
}

#[test]
fn small_fuzz_run() {
    let o = sti(&["fuzz", "--count", "30", "--subst-pairs", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
