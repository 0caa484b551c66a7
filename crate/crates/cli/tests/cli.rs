//! Command-line behavior: exit codes, determinism, file handling.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ampsyn")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn design_writes_netlist_and_report_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["design", "single-stage", "--gain", "20", "--out", "a.net"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("a.net").exists());
    assert!(dir.path().join("a.report.txt").exists());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("verdict: PASS"), "{report}");
}

#[test]
fn missing_gain_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["design", "single-stage"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn infeasible_design_exits_one_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["design", "single-stage", "--gain", "20k"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("gain exceeds device capability"), "{err}");
}

#[test]
fn verify_all_five_emitted_netlists() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str], &str)] = &[
        ("single-stage", &["--gain", "20"], "20"),
        ("two-stage", &["--gain", "100"], "100"),
        ("opamp", &["--gain", "10"], "10"),
        ("diff", &["--gain", "5"], "5.1"),
    ];
    for (topology, flags, gain) in cases {
        let net = format!("{topology}.net");
        let mut args = vec!["design", topology];
        args.extend_from_slice(flags);
        args.extend_from_slice(&["--out", &net]);
        let out = run_in(dir.path(), &args);
        assert_eq!(code(&out), 0, "{topology}: {}", String::from_utf8_lossy(&out.stderr));

        let out = run_in(dir.path(), &["verify", &net, "--gain", gain]);
        assert_eq!(code(&out), 0, "{topology}: {}", String::from_utf8_lossy(&out.stdout));
    }
    // the power stage has no single gain figure; its netlist still parses
    // and sweeps cleanly
    let out = run_in(
        dir.path(),
        &["design", "power", "--power", "0.5", "--vcc", "12", "--rl", "8", "--out", "p.net"],
    );
    assert_eq!(code(&out), 0);
    let out = run_in(dir.path(), &["sweep", "p.net", "--points", "10", "--csv", "p.csv"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn tampered_netlist_fails_verification_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["design", "single-stage", "--gain", "20", "--out", "a.net"]);
    let path = dir.path().join("a.net");
    let text = std::fs::read_to_string(&path).unwrap();
    // collector resistor times ten shifts the gain far outside tolerance
    let tampered = text.replace("RC vcc c 220", "RC vcc c 2.2k");
    assert_ne!(text, tampered);
    std::fs::write(&path, tampered).unwrap();

    let out = run_in(dir.path(), &["verify", "a.net", "--gain", "20"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn empty_and_malformed_netlists_exit_one_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.net"), "").unwrap();
    let out = run_in(dir.path(), &["verify", "empty.net", "--gain", "5"]);
    assert_eq!(code(&out), 1);

    std::fs::write(dir.path().join("bad.net"), "* t\nR1 a 0\n.end\n").unwrap();
    let out = run_in(dir.path(), &["verify", "bad.net", "--gain", "5"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn identical_flags_produce_identical_bytes() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args =
        ["design", "two-stage", "--gain", "100", "--rl", "10k", "--out", "t.net", "--report", "t.txt"];
    assert_eq!(code(&run_in(dir_a.path(), &args)), 0);
    assert_eq!(code(&run_in(dir_b.path(), &args)), 0);
    for name in ["t.net", "t.txt"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }

    // and the sweep CSV as well
    for dir in [&dir_a, &dir_b] {
        let out = run_in(dir.path(), &["sweep", "t.net", "--points", "50", "--csv", "t.csv"]);
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(dir_a.path().join("t.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("t.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_row_count_matches_points_and_midband_matches_verify() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["design", "single-stage", "--gain", "20", "--out", "a.net"]);

    let started = Instant::now();
    let out = run_in(
        dir.path(),
        &["sweep", "a.net", "--from", "10", "--to", "100k", "--points", "200", "--csv", "a.csv"],
    );
    assert_eq!(code(&out), 0);
    assert!(started.elapsed().as_secs_f64() < 1.0, "sweep took {:?}", started.elapsed());

    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 201); // header + points
    assert_eq!(rows[0], "frequency_hz,magnitude,phase_deg");

    // a grid that contains 1 kHz exactly: its magnitude column equals the
    // verifier's midband figure, both being the same solver
    let out = run_in(
        dir.path(),
        &["sweep", "a.net", "--from", "10", "--to", "100k", "--points", "5", "--csv", "b.csv"],
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let sweep_1k: f64 = csv
        .lines()
        .skip(1)
        .map(|r| {
            let cols: Vec<&str> = r.split(',').collect();
            (cols[0].parse::<f64>().unwrap(), cols[1].parse::<f64>().unwrap())
        })
        .find(|(f, _)| (f - 1000.0).abs() < 1e-6)
        .expect("1 kHz is on the 5-point decade grid")
        .1;

    let netlist = std::fs::read_to_string(dir.path().join("a.net")).unwrap();
    let circuit = ampsyn_core::netlist::parse(&netlist).unwrap();
    let direct = ampsyn_core::verify::small_signal_of(&circuit, ampsyn_core::devices::BjtParams::default_2n2222())
        .unwrap()
        .solve_ac(1000.0)
        .unwrap();
    assert!(
        (sweep_1k - direct.magnitude).abs() <= 1e-9 * direct.magnitude,
        "sweep {sweep_1k} vs direct {}",
        direct.magnitude
    );

    let verify_out = run_in(dir.path(), &["verify", "a.net", "--gain", "20"]);
    let text = String::from_utf8(verify_out.stdout).unwrap();
    let midband: f64 = text
        .lines()
        .find(|l| l.starts_with("midband"))
        .and_then(|l| l.split("|A| = ").nth(1))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    // the report rounds to 4 decimals
    assert!(
        (sweep_1k - midband).abs() <= 1e-4,
        "sweep {sweep_1k} vs verify {midband}"
    );
}

#[test]
fn plain_pair_fallback_is_noted_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["design", "opamp", "--gain=-1.5", "--out", "o.net"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("plain feedback pair"), "{report}");
}

#[test]
fn negative_gain_after_space_also_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["design", "opamp", "--gain", "-10", "--out", "o.net"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn params_file_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("dev.params");
    std::fs::write(&good, "h_fe_typ = 200\nh_ie = 2k\nh_re = 0\nh_oe = 10u\n").unwrap();
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain", "20", "--params", "dev.params", "--out", "a.net"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let netlist = std::fs::read_to_string(dir.path().join("a.net")).unwrap();
    assert!(netlist.contains("NPN(BF=200)"), "{netlist}");

    let bad = dir.path().join("bad.params");
    std::fs::write(&bad, "h_fe_typ = 100\nh_re = 0\nh_oe = 10u\n").unwrap();
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain", "20", "--params", "bad.params"],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("h_ie"));
}

#[test]
fn series_flag_changes_resistor_snapping() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain", "20", "--series", "e6", "--out", "e6.net"],
    );
    assert_eq!(code(&out), 0);
    let netlist = std::fs::read_to_string(dir.path().join("e6.net")).unwrap();
    // 220.33 ohm snaps to 220 on E24 but to the E6 member 220 as well;
    // the emitter leg tells them apart: 1101.7 -> 1.1k (E24) vs 1k (E6)
    assert!(netlist.contains("RE e 0 1k"), "{netlist}");
}

#[test]
fn tolerance_override_tightens_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    // the realized gain sits roughly 2 % under the target, so a 0.1 %
    // tolerance must fail the design verdict
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain", "20", "--tolerance", "0.001", "--out", "a.net"],
    );
    assert_eq!(code(&out), 2);
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("verdict: FAIL"), "{report}");
    // the netlist is still written for inspection
    assert!(dir.path().join("a.net").exists());

    let out = run_in(dir.path(), &["verify", "a.net", "--gain", "20", "--tolerance", "0.001"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_without_csv_flag_prints_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["design", "opamp", "--gain", "10", "--out", "o.net"]);
    let out = run_in(dir.path(), &["sweep", "o.net", "--points", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("frequency_hz,magnitude,phase_deg\n"), "{text}");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn verify_honors_a_custom_params_file() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["design", "single-stage", "--gain", "20", "--out", "a.net"]);
    // a device with double the current gain shifts the verified midband
    std::fs::write(
        dir.path().join("dev.params"),
        "h_fe_typ = 200\nh_ie = 1100\nh_re = 2e-4\nh_oe = 25e-6\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &["verify", "a.net", "--gain", "20", "--params", "dev.params"],
    );
    // gm doubles, so the measured gain roughly doubles and the check fails
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn gain_floor_and_ceiling_bracket_the_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain-min", "20", "--out", "hi.net"],
    );
    assert_eq!(code(&out), 0);
    let out = run_in(
        dir.path(),
        &["design", "single-stage", "--gain-max", "20", "--out", "lo.net"],
    );
    assert_eq!(code(&out), 0);
    // the floor run snaps the collector resistor upward, the ceiling run
    // downward; 220.33 ohm sits between the E24 members 220 and 240
    let hi = std::fs::read_to_string(dir.path().join("hi.net")).unwrap();
    let lo = std::fs::read_to_string(dir.path().join("lo.net")).unwrap();
    assert!(hi.contains("RC vcc c 240"), "{hi}");
    assert!(lo.contains("RC vcc c 220"), "{lo}");
}

#[test]
fn output_paths_must_differ() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["design", "opamp", "--gain", "10", "--out", "x.txt", "--report", "x.txt"],
    );
    assert_eq!(code(&out), 1);
}
