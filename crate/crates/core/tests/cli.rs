//! End-to-end checks of the command-line interface and its JSON output.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use somos::certificate::build_certificate;
use somos::cli::{run, run_with_gcd};
use somos::coprimality::verify_coprime_window;
use somos::engine::{generate, SequenceSpec};
use somos::io::{emit_bfile, emit_report_json};
use somos::scanner::{scan_integrality, somos_k_spec};
use somos::Integer;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn somos(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("somos").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let run = somos(args);
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("somos-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn fixture_text() -> String {
    fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/a006721.txt")).unwrap()
}

#[test]
fn generate_defaults() {
    let r = somos(&["generate"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "1,1,1,1,1,2,3,5,11,37,83,274\n");
}

#[test]
fn generate_count_equal_to_order() {
    let r = somos(&["generate", "--k", "5", "--count", "5"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "1,1,1,1,1\n"));
}

#[test]
fn generate_below_order_is_usage_error() {
    assert_eq!(somos(&["generate", "--count", "3"]).code, 2);
}

#[test]
fn generate_rational_mode_matches_integer() {
    let a = somos(&["generate", "--count", "60"]);
    let b = somos(&["generate", "--count", "60", "--mode", "rational"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn generate_bfile_format() {
    let r = somos(&["generate", "--count", "14", "--format", "bfile"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.ends_with("12 1217\n13 6161\n"));
}

#[test]
fn somos8_integer_mode_halts() {
    let r = somos(&["generate", "--k", "8", "--count", "100", "--mode", "integer"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("a_17"), "{}", r.stderr);
}

#[test]
fn generate_json_lists_terms_as_strings() {
    let v = json(&["generate", "--count", "12", "--format", "json"]);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["kind"], "sequence");
    assert_eq!(v["terms"][11], "274");
    assert_eq!(v["halted"], Value::Null);
}

#[test]
fn verify_small_depth_one() {
    let r = somos(&["verify", "--count", "10", "--depth", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.starts_with("coprimality depth 1: PASS"));
}

#[test]
fn verify_default_range() {
    let v = json(&["verify", "--count", "300", "--format", "json"]);
    assert_eq!(v["kind"], "verification_report");
    assert_eq!(v["pass"], true);
    assert_eq!(v["checked"], 296);
    assert_eq!(v["first_failure"], Value::Null);
}

#[test]
fn verify_zero_depth_is_usage_error() {
    assert_eq!(somos(&["verify", "--depth", "0"]).code, 2);
}

#[test]
fn verify_reports_corrupted_input() {
    let mut buffer = generate(&SequenceSpec::somos5(), 60).unwrap().buffer;
    buffer.replace(31, Integer::from(buffer.get(31).unwrap() + 1));
    let path = scratch("corrupt.txt", &emit_bfile(&buffer));
    let r = somos(&["verify", "--count", "60", "--input", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("witness: recurrence identity fails at a_31"), "{}", r.stderr);
}

#[test]
fn verify_missing_input_is_usage_error() {
    assert_eq!(somos(&["verify", "--input", "/nonexistent/bfile.txt"]).code, 2);
}

#[test]
fn certify_counts() {
    let r = somos(&["certify", "--count", "500"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("490 valid certificates"), "{}", r.stdout);

    let r = somos(&["certify", "--count", "11"]);
    assert!(r.stdout.contains("1 valid certificates"));

    let r = somos(&["certify", "--count", "9"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("range below certificate start"));
    assert!(r.stdout.contains("0 valid certificates"));
}

#[test]
fn certify_json_first_certificate() {
    let v = json(&["certify", "--count", "11", "--format", "json"]);
    assert_eq!(v["kind"], "certification_run");
    let cert = &v["certificates"][0];
    assert_eq!(cert["index"], 10);
    assert_eq!(cert["valid"], true);
    assert_eq!(cert["numerator_residue"], "0");
    assert_eq!(cert["chain"].as_array().unwrap().len(), 8);
}

#[test]
fn certify_rejects_corrupted_input() {
    let mut buffer = generate(&SequenceSpec::somos5(), 40).unwrap().buffer;
    buffer.replace(9, Integer::from(36));
    let path = scratch("cert.txt", &emit_bfile(&buffer));
    let r = somos(&["certify", "--count", "40", "--input", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("certificate at n = "), "{}", r.stderr);
}

#[test]
fn lemmas_default_and_empty() {
    let r = somos(&["lemmas", "--samples", "2000"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("cancellation"));
    assert_eq!(somos(&["lemmas", "--samples", "0"]).code, 0);
}

#[test]
fn lemmas_are_seed_deterministic() {
    let a = somos(&["lemmas", "--seed", "42", "--samples", "500", "--format", "json"]);
    let b = somos(&["lemmas", "--seed", "42", "--samples", "500", "--format", "json"]);
    assert_eq!(a.stdout.as_bytes(), b.stdout.as_bytes());
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 42);
}

#[test]
fn lemmas_catch_faulty_gcd() {
    fn min_gcd(a: &Integer, b: &Integer) -> Integer {
        Integer::from(a.abs_ref()).min(Integer::from(b.abs_ref()))
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_gcd(["somos", "lemmas", "--samples", "1000"], &mut out, &mut err, min_gcd);
    assert_eq!(code, 1);
    assert!(String::from_utf8(err).unwrap().contains("counterexample"));
}

#[test]
fn scan_family_reports_breakdown() {
    let v = json(&["scan", "--k", "4", "--k-max", "8", "--count", "100", "--format", "json"]);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 5);
    for r in &reports[..4] {
        assert_eq!(r["first_nonintegral"], Value::Null);
    }
    assert_eq!(reports[4]["first_nonintegral"]["index"], 17);
    assert_eq!(reports[4]["first_nonintegral"]["denominator"], "7");
}

#[test]
fn scan_exits_zero_on_breakdown() {
    let r = somos(&["scan", "--k", "8", "--count", "100"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("a_17 = 420514/7"), "{}", r.stdout);
}

#[test]
fn scan_k_max_below_k_is_usage_error() {
    assert_eq!(somos(&["scan", "--k", "6", "--k-max", "5"]).code, 2);
}

#[test]
fn crosscheck_against_fixture() {
    assert_eq!(somos(&["crosscheck"]).code, 0);

    let truncated: String = fixture_text().lines().take(52).map(|l| format!("{l}\n")).collect();
    let path = scratch("truncated.txt", &truncated);
    assert_eq!(somos(&["crosscheck", "--input", path.to_str().unwrap()]).code, 0);
}

#[test]
fn crosscheck_finds_altered_digit() {
    let altered = fixture_text().replacen("\n13 6161\n", "\n13 6162\n", 1);
    let path = scratch("altered.txt", &altered);
    let r = somos(&["crosscheck", "--input", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("a_13 differs"), "{}", r.stderr);
}

#[test]
fn usage_errors() {
    assert_eq!(somos(&["generate", "--count", "abc"]).code, 2);
    assert_eq!(somos(&["frobnicate"]).code, 2);
    assert_eq!(somos(&[]).code, 2);
    assert_eq!(somos(&["generate", "--k", "3"]).code, 2);
    assert_eq!(somos(&["generate", "--initials", "1,2"]).code, 2);
    assert_eq!(somos(&["--help"]).code, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_somos");
    let ok = Command::new(bin).args(["generate", "--count", "6"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "1,1,1,1,1,2\n");
    let bad = Command::new(bin).args(["generate", "--count", "x"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn report_json_shapes() {
    let buffer = generate(&SequenceSpec::somos5(), 20).unwrap().buffer;

    let cert: Value = serde_json::from_str(&emit_report_json(&build_certificate(&buffer, 10).unwrap())).unwrap();
    assert_eq!(cert["schema_version"], "1");
    assert_eq!(cert["kind"], "divisibility_certificate");
    assert_eq!((cert["index"].clone(), cert["valid"].clone()), (10.into(), true.into()));
    assert_eq!(cert["numerator_residue"], "0");

    let window: Value = serde_json::from_str(&emit_report_json(&verify_coprime_window(&buffer, 12, 4).unwrap())).unwrap();
    assert_eq!(window["kind"], "coprime_window_report");
    assert_eq!(window["gcds"], serde_json::json!(["1", "1", "1", "1"]));
    assert_eq!(window["pass"], true);

    let scan = scan_integrality(&somos_k_spec(6).unwrap(), 50).unwrap();
    let scan: Value = serde_json::from_str(&emit_report_json(&scan)).unwrap();
    assert_eq!(scan["kind"], "breakdown_report");
    assert_eq!(scan["first_nonintegral"], Value::Null);
    assert_eq!(scan["first_noncoprime"], Value::Null);
}
