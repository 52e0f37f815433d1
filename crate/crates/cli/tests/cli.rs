use std::process::Command as Process;

use clap::Parser;
use hqc_gmd::gmd::UpdateVariant;
use hqc_gmd::pipeline::{Channel, DecoderKind};
use hqc_gmd_cli::{
    run, Args, CliError, Command, RunConfig, StatsMode, CHANNEL_NOTE, EXIT_CONFIG, EXIT_OK,
    EXIT_VERIFICATION,
};

fn parse(args: &[&str]) -> RunConfig {
    let mut full = vec!["hqc-gmd"];
    full.extend_from_slice(args);
    Args::try_parse_from(full).unwrap().into()
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_hqc-gmd"))
}

#[test]
fn flags_map_onto_the_run_config() {
    let c = parse(&[
        "dfr",
        "--n-rs",
        "40",
        "--channel",
        "bernoulli:0.1",
        "--channel",
        "fixed:300",
        "--decoders",
        "hard,chase:3,gmd-scaled",
        "--trials",
        "77",
        "--seed",
        "9",
        "--workers",
        "2",
        "--n-rs-sweep",
        "18:30",
        "--stats-mode",
        "fixed",
    ]);
    assert_eq!(c.command, Command::Dfr);
    assert_eq!(c.n_rs, Some(40));
    assert_eq!(
        c.channels,
        vec![Channel::Bernoulli(0.1), Channel::FixedWeight(300)]
    );
    assert_eq!(
        c.decoders,
        vec![
            DecoderKind::Hard,
            DecoderKind::Chase(3),
            DecoderKind::Gmd(UpdateVariant::Scaled)
        ]
    );
    assert_eq!((c.trials, c.seed, c.workers), (77, 9, 2));
    assert_eq!(c.n_rs_sweep, Some((18, 30)));
    assert_eq!(c.stats_mode, StatsMode::Fixed);
}

#[test]
fn malformed_flags_are_rejected() {
    for bad in [
        vec!["hqc-gmd", "dfr", "--channel", "gauss:0.1"],
        vec!["hqc-gmd", "dfr", "--channel", "bernoulli:1.5"],
        vec!["hqc-gmd", "dfr", "--decoders", "chase:9"],
        vec!["hqc-gmd", "bound", "--n-rs-sweep", "30:18"],
        vec!["hqc-gmd", "launch"],
    ] {
        assert!(Args::try_parse_from(&bad).is_err(), "{bad:?}");
    }
}

#[test]
fn run_config_survives_json() {
    let c = parse(&[
        "bound",
        "--preset",
        "hqc-128",
        "--channel",
        "bernoulli:0.3",
        "--n-rs-sweep",
        "20:24",
    ]);
    let text = serde_json::to_string(&c).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
}

#[test]
fn params_reports_every_preset() {
    let out = run(&RunConfig::new(Command::Params)).unwrap();
    assert!(out.verified);
    let mut lines = out.csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "preset,security,n_rs,k_rs,t,m,payload_bits,n,smallest_prime_above,two_is_primitive_root,ratio_to_hqc128"
    );
    let ns: Vec<&str> = lines.map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(ns, vec!["17669", "35851", "57637", "13829"]);
}

#[test]
fn params_for_a_custom_length() {
    let mut c = RunConfig::new(Command::Params);
    c.n_rs = Some(40);
    let out = run(&c).unwrap();
    let row = out.csv.lines().nth(1).unwrap();
    assert!(
        row.starts_with("custom,,40,16,12,3,15360,15373,15361,true,"),
        "{row}"
    );
}

#[test]
fn roundtrip_noiseless_and_deterministic() {
    let mut c = RunConfig::new(Command::Roundtrip);
    c.trials = 300;
    let a = run(&c).unwrap();
    assert!(a.verified);
    assert_eq!(a.exit_code(), EXIT_OK);
    for line in a.csv.lines().skip(1) {
        assert!(line.ends_with(",300,300,0,0"), "{line}");
    }
    let b = run(&c).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.csv, b.csv);
}

#[test]
fn roundtrip_flags_miscorrections() {
    let mut c = RunConfig::new(Command::Roundtrip);
    c.channels = vec![Channel::Bernoulli(0.42)];
    c.decoders = vec![DecoderKind::ErasureOnly];
    c.trials = 256;
    let out = run(&c).unwrap();
    assert!(!out.verified);
    assert_eq!(out.exit_code(), EXIT_VERIFICATION);
}

#[test]
fn configuration_errors() {
    let mut c = RunConfig::new(Command::Dfr);
    assert!(matches!(run(&c), Err(CliError::Config(_))));
    c.channels = vec![Channel::Bernoulli(0.1)];
    c.preset = Some("gmd-128".into());
    c.n_rs = Some(36);
    assert!(matches!(run(&c), Err(CliError::Config(_))));
    c.n_rs = None;
    c.preset = Some("hqc-512".into());
    let err = run(&c).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    let mut b = RunConfig::new(Command::Bound);
    b.channels = vec![Channel::Bernoulli(0.3)];
    b.n_rs_sweep = Some((10, 16));
    assert!(matches!(run(&b), Err(CliError::Config(_))));
    b.n_rs_sweep = None;
    b.samples = 10;
    assert!(matches!(run(&b), Err(CliError::Analysis(_))));
}

#[test]
fn dfr_schema_and_summary() {
    let mut c = RunConfig::new(Command::Dfr);
    c.channels = vec![Channel::Bernoulli(0.0), Channel::Bernoulli(0.4)];
    c.trials = 512;
    let out = run(&c).unwrap();
    let mut lines = out.csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "channel_param,decoder,n_rs,failures,trials,dfr,ci_low,ci_high,log2_dfr"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    for r in &rows[..4] {
        assert_eq!(r[3], "0");
        assert_eq!(r[8], "-inf");
    }
    let s = &out.summary;
    assert_eq!(s["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(s["config"]["trials"], 512);
    assert_eq!(s["channel_note"], CHANNEL_NOTE);
    let escapes = &s["results"][1]["escapes"];
    // Hard decoding is trial 0 of GMD, so GMD never loses a word hard decoding recovers.
    assert_eq!(escapes[0][3], 0);
    assert!(out.report.contains(CHANNEL_NOTE));
}

#[test]
fn stats_flags_unobserved_error_rates() {
    let mut c = RunConfig::new(Command::Stats);
    c.channels = vec![Channel::Bernoulli(0.0)];
    c.samples = 20_000;
    let out = run(&c).unwrap();
    assert!(out.report.contains("warning:"));
    let first = out.csv.lines().nth(1).unwrap();
    assert!(first.contains(",true,"), "{first}");
}

#[test]
fn bound_sweep_rows() {
    let mut c = RunConfig::new(Command::Bound);
    c.channels = vec![Channel::Bernoulli(0.38)];
    c.samples = 100_000;
    c.n_rs_sweep = Some((18, 26));
    c.stats_mode = StatsMode::Fixed;
    let out = run(&c).unwrap();
    let mins: Vec<f64> = out
        .csv
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(3) == Some("min"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(mins.len(), 5);
    assert!(mins.windows(2).all(|w| w[1] <= w[0]), "{mins:?}");
    // One row per trial plus the minimum for each n_rs: t = 1..=5.
    assert_eq!(out.csv.lines().count() - 1, (2 + 3 + 4 + 5 + 6) + 5);
}

#[test]
fn output_files_are_written() {
    let dir = std::env::temp_dir().join(format!("hqc-gmd-cli-test-{}", std::process::id()));
    let mut c = RunConfig::new(Command::Params);
    c.preset = Some("gmd-128".into());
    let paths = run(&c).unwrap().write(&dir).unwrap();
    assert!(paths[0].ends_with("params.csv") && paths[1].ends_with("params.json"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
    assert_eq!(json["config"]["preset"], "gmd-128");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let ok = bin().args(["params"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("13829"));
    let bad = bin().args(["params", "--preset", "nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
    let unparsable = bin().args(["dfr", "--channel", "x"]).output().unwrap();
    assert_eq!(unparsable.status.code(), Some(EXIT_CONFIG));
    let mis = bin()
        .args([
            "roundtrip",
            "--channel",
            "bernoulli:0.42",
            "--decoders",
            "erasure",
            "--trials",
            "256",
        ])
        .output()
        .unwrap();
    assert_eq!(mis.status.code(), Some(EXIT_VERIFICATION));
}
