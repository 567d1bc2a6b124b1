use std::fs;
use std::process::{Command, Output};

fn gicfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gicfb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rate_reports_units_and_kramer() {
    let o = gicfb(&["rate", "--a", "0.5", "--power", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("1.512049158326 bits/channel use"), "{s}");
    assert!(s.contains("bits/s/Hz"));
    assert!(s.contains("kramer rate: 1.508345131983"));
}

#[test]
fn rate_accepts_negative_gain_and_snr_db() {
    let pos = gicfb(&["rate", "--a", "0.5", "--snr-db", "10"]);
    let neg = gicfb(&["rate", "--a", "-0.5", "--snr-db", "10"]);
    assert_eq!(neg.status.code(), Some(0));
    let line = |o: &Output| {
        stdout(o)
            .lines()
            .find(|l| l.starts_with("symmetric rate"))
            .unwrap()
            .to_owned()
    };
    assert_eq!(line(&pos), line(&neg));
}

#[test]
fn degraded_channel_has_no_kramer_point() {
    let o = gicfb(&["rate", "--a", "0", "--power", "15"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("symmetric rate: 2.000000000000 bits/channel use"), "{s}");
    assert!(s.contains("n/a"));
}

#[test]
fn domain_errors_exit_3() {
    for args in [
        &["rate", "--a", "1", "--power", "-1"][..],
        &["rate", "--a", "1", "--power", "10", "--grid-step=-1e-4"],
        &["gdof", "--alpha", "0.5"],
        &["simulate", "--a", "0.5", "--power", "10", "--rho", "0.9", "--trials", "10"],
        &["sweep", "--snr-db", "20", "--alpha-min", "2", "--alpha-max", "1"],
    ] {
        let o = gicfb(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gicfb(&["rate", "--power", "10"]).status.code(), Some(2));
    assert_eq!(gicfb(&["rate", "--a", "1"]).status.code(), Some(2));
    assert_eq!(gicfb(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_file_is_reproducible_and_sign_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let base = ["sweep", "--snr-db", "15", "--alpha-step", "0.25", "--grid-step", "1e-4"];
    for (name, extra) in [("a.csv", None), ("b.csv", None), ("n.csv", Some("--negative-a"))] {
        let mut args: Vec<&str> = base.to_vec();
        let out = path(name);
        args.extend(["--out", out.as_str()]);
        args.extend(extra);
        assert_eq!(gicfb(&args).status.code(), Some(0));
    }
    let a = fs::read(path("a.csv")).unwrap();
    let b = fs::read(path("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains(&b'\r'));

    let text = String::from_utf8(a).unwrap();
    let neg = fs::read_to_string(path("n.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "rate_proposed_bpu").unwrap();
    let rates = |t: &str| -> Vec<String> {
        t.lines().skip(2).map(|l| l.split(',').nth(col).unwrap().to_owned()).collect()
    };
    assert_eq!(rates(&text), rates(&neg));
    assert_eq!(rates(&text).len(), 9);
}

#[test]
fn sweep_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = ["sweep", "--snr-db", "10", "--alpha-min", "1", "--alpha-max", "1.2", "--grid-step", "1e-4"];
    let o = gicfb(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--out", out.to_str().unwrap()]);
    gicfb(&with_file);
    assert_eq!(o.stdout, fs::read(&out).unwrap());
}

#[test]
fn simulate_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = gicfb(&[
        "simulate", "--a", "0.5", "--power", "10", "--trials", "2000", "--steps", "30",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("invariants: ok"));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 32);
    assert!(text.starts_with("# gicfb-trajectory v1\nn,"));
}

#[test]
fn simulate_zero_noise_decodes_everything() {
    let o = gicfb(&[
        "simulate", "--a", "2", "--power", "100", "--trials", "200", "--steps", "40", "--zero-noise",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("user 1: error rate 0.000000"), "{s}");
    assert!(s.contains("user 2: error rate 0.000000"), "{s}");
}

#[test]
fn gdof_prints_requested_powers() {
    let o = gicfb(&["gdof", "--alpha", "2", "--powers", "100,10000", "--grid-step", "1e-4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 4, "{s}");
    assert!(s.contains("0.9653"));
}
