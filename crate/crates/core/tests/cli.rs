//! End-to-end runs of the `netiv` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_netiv");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn netiv")
}

fn run_on(cmd: &str, path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout));
    })
}

static SCRATCH: AtomicUsize = AtomicUsize::new(0);

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("netiv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let n = SCRATCH.fetch_add(1, Ordering::Relaxed);
    dir.join(format!("{n}-{name}"))
}

fn write_config(text: &[u8]) -> PathBuf {
    let p = scratch("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn analyze_cantor() {
    let o = run_on("analyze", &fixture("cantor.toml"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["vertices"], 1);
    assert_eq!(v["edges"], 2);
    assert_eq!(v["status"], "CLOSED");
    assert_eq!(v["essential_class"], serde_json::json!([0]));
    assert_eq!(v["formalism"]["guaranteed"], true);
}

#[test]
fn check_exit_codes() {
    for (name, code) in [
        ("exifs.toml", 0),
        ("cantor.toml", 0),
        ("golden.toml", 1),
        ("cantor_convolution.toml", 1),
    ] {
        let o = run_on("check", &fixture(name), &[]);
        assert_eq!(o.status.code(), Some(code), "{name}");
        let v = stdout_json(&o);
        assert_eq!(v["guaranteed"], code == 0, "{name}");
        assert_eq!(v["witness"].is_null(), code == 0, "{name}");
    }
}

#[test]
fn truncated_graph_checks_as_two() {
    let o = run_on("check", &fixture("golden.toml"), &["--max-vertices", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["status"], "TRUNCATED");
}

#[test]
fn contracted_graph() {
    let o = run_on("graph", &fixture("exifs.toml"), &["--contract"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 11);

    let o = run_on("graph", &fixture("exifs.toml"), &["--json", "-"]);
    let v = stdout_json(&o);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 5);
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);
}

#[test]
fn dims_and_lq_report() {
    let o = run_on("dims", &fixture("cantor.toml"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v["cycles"].as_array().is_some_and(|c| !c.is_empty()));

    // scales 2^-j coincide with powers of the generic ratio at its witness
    let o = run_on("lq", &fixture("exifs.toml"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["tau"].as_array().map(Vec::len), Some(5));

    let csv = scratch("lq.csv");
    let o = run_on(
        "lq",
        &fixture("cantor.toml"),
        &["--t-min", "1/729", "--q", "-1,0,1", "--csv", csv.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,x,y"));
    assert_eq!(text.lines().filter(|l| l.starts_with("tau,")).count(), 3);
}

#[test]
fn outputs_are_deterministic() {
    let cases: [(&str, &str, &[&str]); 6] = [
        ("analyze", "exifs.toml", &[]),
        ("graph", "exifs.toml", &[]),
        ("graph", "golden.toml", &["--json", "-"]),
        ("dims", "exifs.toml", &[]),
        ("lq", "cantor_convolution.toml", &["--t-min", "1/1024"]),
        ("lq", "cantor_convolution.toml", &["--t-min", "1/1024", "--sequential"]),
    ];
    let mut lq_outputs = Vec::new();
    for (cmd, file, extra) in cases {
        let a = run_on(cmd, &fixture(file), extra);
        let b = run_on(cmd, &fixture(file), extra);
        assert_eq!(a.status.code(), Some(0), "{cmd} {file}");
        assert_eq!(a.stdout, b.stdout, "{cmd} {file}");
        if cmd == "lq" {
            lq_outputs.push(a.stdout);
        }
    }
    assert_eq!(lq_outputs[0], lq_outputs[1]);
}

#[test]
fn probability_sum_error_is_located() {
    let text = "format_version = 1\nprobabilities = [\"1/2\", \"2/5\"]\n\n\
                [[maps]]\nratio = \"1/3\"\noffset = \"0\"\n\n\
                [[maps]]\nratio = \"1/3\"\noffset = \"2/3\"\n";
    let o = run_on("check", &write_config(text.as_bytes()), &[]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "ValidationError");
    let first = &v["error"]["errors"][0];
    assert_eq!(first["line"], 2);
    assert_eq!(first["column"], 17);
    assert!(first["message"].as_str().unwrap().contains("9/10"));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = run(&["analyze", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "IoError");
}

const MAPS: &str = "[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n\n[[maps]]\nratio = \"1/3\"\noffset = \"2/3\"\n";

fn with_header(header: &str) -> String {
    format!("format_version = 1\n{header}\n{MAPS}")
}

/// Hand-written invalid configurations.
fn malformed_corpus() -> Vec<String> {
    let probs = "probabilities = [\"1/2\", \"1/2\"]";
    let mut out = vec![
        String::new(),
        "format_version = 1\n".into(),
        "format_version = 2\nprobabilities = [\"1/2\", \"1/2\"]\n".into(),
        "probabilities = [\"1/2\", \"1/2\"]\n".into(),
        with_header("probabilities = [\"1/2\", \"2/5\"]"),
        with_header("probabilities = [\"1/2\"]"),
        with_header("probabilities = [\"3/2\", \"-1/2\"]"),
        with_header("probabilities = [\"0\", \"1\"]"),
        with_header("probabilities = [0.5, 0.5]"),
        with_header("probabilities = [\"1/0\", \"1/2\"]"),
        with_header(&format!("{probs}\ncolour = \"blue\"")),
        with_header(&format!("{probs}\n[analysis]\nt_min = \"2\"")),
        with_header(&format!("{probs}\n[analysis]\nt_min = \"zero\"")),
        with_header(&format!("{probs}\n[analysis]\nq = [\"a\"]")),
        with_header(&format!("{probs}\n[analysis]\nschedule_len = 0")),
        with_header(&format!("{probs}\n[budget]\nmax_vertices = -4")),
        with_header(&format!("{probs}\n[[parameters]]\nname = \"rho\"\nkind = \"generic\"")),
        with_header(&format!(
            "{probs}\n[[parameters]]\nname = \"rho\"\nkind = \"generic\"\nwitness = \"3/2\"\n\
             [[parameters]]\nname = \"rho\"\nkind = \"generic\"\nwitness = \"1/3\""
        )),
        with_header(&format!(
            "{probs}\n[[parameters]]\nname = \"s\"\nkind = \"algebraic\"\nminpoly = \"x^2 - 1/4\"\ninterval = [\"0\", \"1\"]"
        )),
        with_header(&format!(
            "{probs}\n[[parameters]]\nname = \"s\"\nkind = \"algebraic\"\nminpoly = \"x^2 - 2\"\ninterval = [\"0\", \"1\"]"
        )),
        with_header(&format!("{probs}\n[[parameters]]\nname = \"x\"\nkind = \"quantum\"\nvalue = \"1\"")),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"1\"\noffset = \"0\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"0\"\noffset = \"0\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"rho +\"\noffset = \"0\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"k/3\"\noffset = \"0\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"1/3\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        format!("format_version = 1\n{probs}\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n[[maps]]\nratio = \"1/3\"\noffset = \"0\"\n"),
        "format_version = 1\nprobabilities = [\n".into(),
        "[[maps]\nratio = \"1/3\"\n".into(),
        "\u{feff}format_version = \"one\"\n".into(),
    ];
    out.push(with_header(&format!("{probs}\n[output]\njson = 3")));
    out
}

fn assert_handled(text: &[u8]) {
    let p = write_config(text);
    let o = run_on("check", &p, &["--max-vertices", "50"]);
    let code = o.status.code();
    assert!(
        matches!(code, Some(0..=3)),
        "exit {code:?} for {:?}\nstderr: {}",
        String::from_utf8_lossy(text),
        String::from_utf8_lossy(&o.stderr)
    );
    if code == Some(3) {
        let v: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|e| {
            panic!("{e}: {}", String::from_utf8_lossy(&o.stderr));
        });
        assert!(v["error"]["kind"].is_string());
        assert!(v["error"]["message"].is_string());
    } else {
        stdout_json(&o);
    }
}

#[test]
fn malformed_configs_fail_cleanly() {
    let corpus = malformed_corpus();
    for text in &corpus {
        let p = write_config(text.as_bytes());
        let o = run_on("check", &p, &[]);
        assert_eq!(o.status.code(), Some(3), "accepted {text:?}");
        let v: Value = serde_json::from_slice(&o.stderr).unwrap();
        let kind = v["error"]["kind"].as_str().unwrap();
        assert_ne!(kind, "IoError", "{text:?}");
    }
    assert!(corpus.len() >= 30);
}

#[derive(Clone, Debug)]
enum Mutation {
    Truncate(usize),
    Delete(usize),
    Insert(usize, u8),
    Swap(usize, usize),
}

fn apply(base: &[u8], m: &Mutation) -> Vec<u8> {
    let mut v = base.to_vec();
    let n = v.len();
    match *m {
        Mutation::Truncate(i) => v.truncate(i % n),
        Mutation::Delete(i) => {
            v.remove(i % n);
        }
        Mutation::Insert(i, b) => v.insert(i % n, b),
        Mutation::Swap(i, j) => v.swap(i % n, j % n),
    }
    v
}

#[test]
fn mutated_configs_never_crash() {
    let base = std::fs::read(fixture("exifs.toml")).unwrap();
    let noise = prop::sample::select(b"[]=\"/x^*-+(){}0123\n#,. r".to_vec());
    let mutation = prop_oneof![
        any::<usize>().prop_map(Mutation::Truncate),
        any::<usize>().prop_map(Mutation::Delete),
        (any::<usize>(), noise).prop_map(|(i, b)| Mutation::Insert(i, b)),
        (any::<usize>(), any::<usize>()).prop_map(|(i, j)| Mutation::Swap(i, j)),
    ];
    let strategy = prop::collection::vec(mutation, 1..4);
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 20, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner
        .run(&strategy, |ms| {
            let text = ms.iter().fold(base.clone(), |t, m| apply(&t, m));
            assert_handled(&text);
            Ok(())
        })
        .unwrap();
}
