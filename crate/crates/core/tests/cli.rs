use std::path::Path;
use std::process::Command;

use clap::Parser;
use itm::cli::{main_with_args, Cli, EXIT_FAILURE, EXIT_NOT_CONVERGED, EXIT_OK};
use itm::continuation::{BetaMinEstimate, ContinuationPath};
use itm::existence::ScanReport;
use itm::itm::ItmSolution;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(
        std::iter::once("itm").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.header"));
    std::fs::read_to_string(path)
        .unwrap()
        .trim_end()
        .to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

const SAKIADIS: [&str; 10] = [
    "solve",
    "--problem",
    "sakiadis",
    "--sign",
    "-1",
    "--h0",
    "2.5",
    "--h1",
    "3.5",
    "--tol-gamma",
];

fn sakiadis(extra: &[&str]) -> Run {
    let mut args: Vec<&str> = SAKIADIS.to_vec();
    args.push("1e-9");
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn sakiadis_final_row() {
    let r = sakiadis(&["--format", "csv"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.stdout.lines().next().unwrap(), golden("solve"));
    let last = rows(&r.stdout).pop().unwrap();
    assert_eq!(last[0], "9");
    let num = |i: usize| last[i].parse::<f64>().unwrap();
    assert!((num(1) - 2.954391).abs() <= 1e-4);
    assert!((num(2) - 1.311043).abs() <= 1e-4);
    assert!(num(3).abs() <= 1e-4);
    assert!((num(4) + 0.443761).abs() <= 1e-4);
}

#[test]
fn solve_json_round_trips() {
    let r = sakiadis(&["--format", "json"]);
    let parsed: ItmSolution = serde_json::from_str(&r.stdout).unwrap();
    let args = std::iter::once("itm").chain(SAKIADIS).chain(["1e-9"]);
    let cli = Cli::try_parse_from(args).unwrap();
    let direct = match itm::cli::execute(&cli).unwrap() {
        itm::cli::RunReport::Solve(s) => s,
        other => panic!("{other:?}"),
    };
    assert_eq!(parsed, direct);
}

#[test]
fn scan_fixture() {
    let r = run(&[
        "scan",
        "--problem",
        "falkner-skan",
        "--beta",
        "-0.01",
        "--sign",
        "+1",
        "--grid",
        "1:10:40",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.stdout.lines().next().unwrap(), golden("scan"));
    let samples = rows(&r.stdout);
    assert_eq!(samples.len(), 40);
    let signs: Vec<bool> = samples
        .iter()
        .map(|s| s[1].parse::<f64>().unwrap() < 0.0)
        .collect();
    assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), 1);

    let j = run(&[
        "scan",
        "--problem",
        "falkner-skan",
        "--beta",
        "-0.01",
        "--grid",
        "1:10:40",
        "--format",
        "json",
    ]);
    let report: ScanReport = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(report.brackets.len(), 1);
    assert_eq!(report.samples.len(), 40);
}

#[test]
fn sweep_csv_and_json() {
    let args = [
        "sweep",
        "--problem",
        "falkner-skan",
        "--sign",
        "-1",
        "--betas",
        "-0.025:-0.05:-0.025",
        "--h0",
        "15",
        "--h1",
        "25",
    ];
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.stdout.lines().next().unwrap(), golden("sweep"));
    let entries = rows(&r.stdout);
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0][1], "-1");
    assert_eq!(entries[0][5], "true");

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let j = run(&json_args);
    let path: ContinuationPath = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(path.entries.len(), 2);
    assert!((path.entries[1].missing_ic.unwrap() + 0.074366).abs() <= 1e-4);
}

#[test]
fn sweep_reports_unconverged_entries() {
    let r = run(&[
        "sweep",
        "--sign",
        "-1",
        "--betas",
        "-0.18,-0.25",
        "--h0",
        "15",
        "--h1",
        "25",
    ]);
    assert_eq!(r.code, EXIT_NOT_CONVERGED);
    let entries = rows(&r.stdout);
    assert_eq!(entries[0][0], "-0.250000");
    assert_eq!(entries[0][5], "false");
    assert_eq!(entries[0][2], "");
    assert!(r.stderr.lines().count() == 1 && r.stderr.starts_with("itm: "));
}

#[test]
fn beta_min_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bm.csv");
    let r = run(&[
        "beta-min",
        "--bracket",
        "-0.2:-0.198",
        "--width-tol",
        "1e-3",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), golden("beta_min"));
    assert_eq!(text.lines().count(), 2);

    let j = run(&[
        "beta-min",
        "--bracket",
        "-0.2:-0.198",
        "--width-tol",
        "1e-3",
        "--format",
        "json",
    ]);
    let est: BetaMinEstimate = serde_json::from_str(&j.stdout).unwrap();
    assert!(est.beta_lo < est.beta_hi && est.bracket_width <= 1e-3);
}

#[test]
fn profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let r = sakiadis(&["--profile", path.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), golden("profile"));
    assert_eq!(text.lines().count(), 202);
    assert!(!text.contains('\r'));
}

#[test]
fn malformed_range_names_the_token() {
    let r = run(&[
        "sweep",
        "--problem",
        "falkner-skan",
        "--sign",
        "-1",
        "--betas",
        "-0.025:-0.18:oops",
    ]);
    assert_eq!(r.code, EXIT_FAILURE);
    assert!(r.stderr.contains("'-0.025:-0.18:oops'"), "{}", r.stderr);
    assert!(r.stderr.starts_with("itm: invalid-config:"));
}

#[test]
fn malformed_grid_and_bad_values() {
    for args in [
        vec!["scan", "--problem", "sakiadis", "--grid", "1:10"],
        vec!["solve", "--problem", "sakiadis", "--rtol", "-1"],
        vec!["solve", "--problem", "sakiadis", "--h0", "3", "--h1", "3"],
        vec!["solve", "--problem", "sakiadis", "--beta", "0.5"],
        vec!["solve", "--problem", "sakiadis", "--eta-inf", "0"],
        vec!["solve", "--problem", "nope"],
        vec!["solve", "--problem", "sakiadis", "--sign", "2"],
    ] {
        let r = run(&args);
        assert_eq!(r.code, EXIT_FAILURE, "{args:?}");
        assert!(
            r.stderr.lines().any(|l| l.starts_with("itm: ")),
            "{args:?}: {}",
            r.stderr
        );
    }
}

#[test]
fn unwritable_output_is_an_error() {
    let r = sakiadis(&["--output", "/nonexistent-dir/out.csv"]);
    assert_eq!(r.code, EXIT_FAILURE);
    assert!(r.stderr.starts_with("itm: io-error:"));
}

#[test]
fn binary_reports_reverse_flow_failure() {
    let out = Command::new(env!("CARGO_BIN_EXE_itm"))
        .args([
            "solve",
            "--problem",
            "falkner-skan",
            "--beta",
            "-0.25",
            "--sign",
            "-1",
            "--h0",
            "15",
            "--h1",
            "25",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NOT_CONVERGED));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(!stdout.contains("NaN") && !stdout.contains("inf"));
    assert!(rows(&stdout).len() >= 2);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("itm: "));
}

#[test]
fn binary_help_and_usage_errors() {
    let help = Command::new(env!("CARGO_BIN_EXE_itm"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
    let bad = Command::new(env!("CARGO_BIN_EXE_itm"))
        .args(["frobnicate"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_FAILURE));
    assert!(String::from_utf8(bad.stderr)
        .unwrap()
        .lines()
        .any(|l| l.starts_with("itm: usage:")));
}

#[test]
fn all_sentinel_start_is_a_convergence_failure() {
    let r = run(&[
        "solve",
        "--problem",
        "sakiadis",
        "--sign",
        "-1",
        "--h0",
        "1",
        "--h1",
        "2",
    ]);
    assert_eq!(r.code, EXIT_NOT_CONVERGED);
    assert!(
        r.stderr.starts_with("itm: degenerate-secant:"),
        "{}",
        r.stderr
    );
}
