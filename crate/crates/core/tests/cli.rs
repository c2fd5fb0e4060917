use std::path::Path;
use std::process::{Command, Output};

fn blab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blab")).args(args).output().unwrap()
}

/// Writes `body` plus an output directory line to `<dir>/run.conf` and runs it.
fn run_config(dir: &Path, body: &str) -> Output {
    let path = dir.join("run.conf");
    std::fs::write(&path, format!("{body}\noutput_dir = out\n")).unwrap();
    blab(&["run", path.to_str().unwrap()])
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

#[test]
fn mobius_verdict_is_injective() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = verdict\nmap = mobius:a=0.3\nexpected = injective");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "verdict.report.txt");
    assert!(report.lines().any(|l| l == "verdict: injective"), "{report}");
    assert!(report.ends_with("result: PASS\n"));
}

#[test]
fn annulus_square_verdict_is_non_injective() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "experiment = verdict\nmap = powerann:r=0.5,m=2\nscores = analytic\nexpected = non-injective",
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "verdict.report.txt").lines().any(|l| l == "verdict: non-injective"));
}

#[test]
fn verdict_mismatch_fails_and_absent_expectation_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = verdict\nmap = mobius:a=0.3\nexpected = non-injective");
    assert_eq!(out.status.code(), Some(1));
    let out = run_config(dir.path(), "experiment = verdict\nmap = mobius:a=0.3");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn invalid_annulus_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = kernel-table\ndomain1 = annulus:r=1.5");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0 < r < 1") && err.contains("line 2") && err.contains("domain1"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn parse_errors_name_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = metric-table\n\nresolution = many");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("resolution"), "{err}");
    let out = run_config(dir.path(), "experiment = metric-table\ncolour = blue");
    assert_eq!(out.status.code(), Some(2));
    let out = blab(&["run", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_map_domain_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = score-sweep\nmap = powerdisk:m=2\ndomain1 = polydisk");
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_checks_exit_one_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    // the degree-12 ortho kernel is a truncated series, far from 1e-6 at |z| = 0.7
    let out = run_config(
        dir.path(),
        "experiment = kernel-table\nkernel1 = ortho:deg=12,res=64\nkernel2 = closed\nsample = 0.7; -0.7i",
    );
    assert_eq!(out.status.code(), Some(1));
    let report = read(dir.path(), "kernel-table.report.txt");
    assert!(report.contains("check sup_abs_error:") && report.contains("FAIL"), "{report}");
}

#[test]
fn csv_layout_and_report_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "experiment = fisher-vs-bergman\nsample = 0; 0.3+0.2i");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "fisher-vs-bergman.csv");
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["z_re", "z_im"]);
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    // z = 0 row: Fisher diag(4, 4)
    assert!((rows[0][2] - 4.0).abs() < 1e-3);
    for cell in csv.lines().nth(1).unwrap().split(',') {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
    }
    // the reported statistic is the maximum of its CSV column
    let col = header.iter().position(|h| *h == "max_abs_diff").unwrap();
    let max = rows.iter().map(|r| r[col]).fold(0.0, f64::max);
    let report = read(dir.path(), "fisher-vs-bergman.report.txt");
    assert!(report.contains(&format!("check max_abs_diff: {}", blab::cli::fmt_float(max))), "{report}");
    assert!(report.contains("convention"));
}

#[test]
fn listings_and_calibration() {
    let out = blab(&["list-domains"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["disk", "annulus", "polydisk", "ball2", "ellipse"] {
        assert!(text.contains(name));
    }
    let out = blab(&["list-maps"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("powerann:r=0.5,m=2"));
    let out = blab(&["calibrate"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("convention constant: 2"));
}

#[test]
fn thread_count_does_not_change_output() {
    let body = "experiment = deficiency-sweep\nmap = powerdisk:m=2\nresolution = 32";
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, format!("{body}\noutput_dir = out\n")).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_blab"))
            .env("BLAB_THREADS", threads)
            .args(["run", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.code().is_some());
        read(dir.path(), "deficiency-sweep.csv")
    };
    assert_eq!(run("1"), run("4"));
}
