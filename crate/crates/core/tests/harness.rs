use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use unidisc::discrimination::{OutcomeRule, Truth};
use unidisc::harness::{
    aggregate, run_experiment, run_round, truth_for_round, DeviceLayout, ExperimentConfig,
    GateSpec, Report, SchemeKind,
};
use unidisc::sim::{NoiseModel, ShotCounts};

fn reference_config() -> ExperimentConfig {
    ExperimentConfig::new(GateSpec::R(2.0943951023931953), GateSpec::Id)
}

fn repo_file(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn coin_is_fair() {
    let n = 10_000u64;
    let first = (0..n).filter(|&r| truth_for_round(2018, r) == Truth::FirstGate).count() as f64;
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((first - n as f64 / 2.0).abs() <= 3.0 * sigma, "{first}");
}

#[test]
fn truth_sequence_ignores_noise() {
    let mut a = reference_config();
    a.seed = 5;
    let mut b = a.clone();
    b.noise = NoiseModel::new(0.01, 0.02, 0.05).unwrap();
    let ra = run_experiment(&a).unwrap();
    let rb = run_experiment(&b).unwrap();
    for (sa, sb) in ra.schemes.iter().zip(&rb.schemes) {
        let ta: Vec<Truth> = sa.rounds.iter().map(|r| r.truth).collect();
        let tb: Vec<Truth> = sb.rounds.iter().map(|r| r.truth).collect();
        assert_eq!(ta, tb);
    }
}

#[test]
fn noiseless_rounds_succeed() {
    let cfg = reference_config();
    for kind in SchemeKind::ALL {
        for round in 0..6 {
            let r = run_round(&cfg, kind, round).unwrap();
            assert_eq!(r.success_rate, 1.0);
            assert_eq!(r.success_count, 1024);
            assert!(r.counts.counts.keys().all(|k| k.len() == 5));
        }
    }
}

#[test]
fn report_is_byte_deterministic() {
    let mut cfg = reference_config();
    cfg.seed = 77;
    cfg.noise = NoiseModel::new(0.004, 0.01, 0.03).unwrap();
    let a = run_experiment(&cfg).unwrap().to_json();
    let b = run_experiment(&cfg).unwrap().to_json();
    assert_eq!(a, b);
    let back = Report::from_json(&a).unwrap();
    assert_eq!(back.to_json(), a);
}

#[test]
fn report_fields_are_consistent() {
    let mut cfg = reference_config();
    cfg.noise = NoiseModel::new(0.01, 0.0, 0.07).unwrap();
    let report = run_experiment(&cfg).unwrap();
    for s in &report.schemes {
        assert_eq!(s.rounds.len(), 10);
        for (i, r) in s.rounds.iter().enumerate() {
            assert_eq!(r.round, i as u64);
            assert!(r.success_count <= cfg.shots);
            assert_eq!(r.success_rate, r.success_count as f64 / cfg.shots as f64);
            assert_eq!(r.counts.counts.values().sum::<u64>(), cfg.shots);
        }
        let st = s.stats;
        assert!(st.min <= st.q25 && st.q25 <= st.median && st.median <= st.q75 && st.q75 <= st.max);
        assert!(st.stddev >= 0.0);
    }
}

#[test]
fn hardware_like_rates_aggregate() {
    let rates = [0.8583, 0.9863, 0.9141, 0.8826, 0.9512, 0.9034, 0.8711, 0.9688, 0.9307, 0.8945];
    let s = aggregate(&rates).unwrap();
    assert_eq!(s.min, 0.8583);
    assert_eq!(s.max, 0.9863);
    // Sorted: .8583 .8711 .8826 .8945 .9034 .9141 .9307 .9512 .9688 .9863
    assert!((s.median - (0.9034 + 0.9141) / 2.0).abs() < 1e-15);
    assert_eq!(s.q25, 0.8826);
    assert_eq!(s.q75, 0.9512);
}

fn counts_of(pairs: &[(String, u64)]) -> ShotCounts {
    let mut counts = BTreeMap::new();
    for (k, n) in pairs {
        *counts.entry(k.clone()).or_insert(0) += n;
    }
    ShotCounts { total: pairs.iter().map(|p| p.1).sum(), counts }
}

proptest! {
    #[test]
    fn projection_ignores_unused_bits(
        shots in prop::collection::vec((0usize..32, 1u64..50), 1..40),
        perm_seed in 0usize..6,
    ) {
        let layout = DeviceLayout::new(5, vec![3, 1]).unwrap();
        let rule = OutcomeRule::parity(2);
        let unused = [0usize, 2, 4];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let perm = perms[perm_seed];
        let render = |x: usize| format!("{x:05b}");
        let original: Vec<(String, u64)> = shots.iter().map(|&(x, n)| (render(x), n)).collect();
        let shuffled: Vec<(String, u64)> = original
            .iter()
            .map(|(s, n)| {
                let b = s.as_bytes();
                let mut out = b.to_vec();
                for (k, &u) in unused.iter().enumerate() {
                    out[u] = b[unused[perm[k]]];
                }
                (String::from_utf8(out).unwrap(), *n)
            })
            .collect();
        for truth in [Truth::FirstGate, Truth::SecondGate] {
            let a = layout.project(&counts_of(&original)).correct(&rule, truth);
            let b = layout.project(&counts_of(&shuffled)).correct(&rule, truth);
            prop_assert_eq!(a, b);
        }
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_unidisc")).args(args).output().unwrap()
}

#[test]
fn cli_analyze() {
    let out = cli(&["analyze", "--u", "id", "--v", "r(2.0943951)"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("spread: 2.09439"), "{text}");
    assert!(text.contains("min_parallel_copies: 2"));
}

#[test]
fn cli_exit_codes() {
    let out = cli(&["simulate", "--scheme", "parallel", "--u", "nope", "--v", "id", "--truth", "first"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(cli(&["simulate", "--scheme", "parallel"]).status.code(), Some(1));
    let out = cli(&["synthesize", "--scheme", "parallel", "--u", "id", "--v", "r(pi/4)", "--emit-qasm", "/tmp"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(cli(&["experiment", "--config", "/no/such/file.toml", "--out", "/tmp/x.json"]).status.code(), Some(3));
}

#[test]
fn cli_synthesize_simulate_experiment_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = cli(&[
        "synthesize", "--scheme", "sequential", "--u", "r(2*pi/3)", "--v", "id",
        "--emit-qasm", d.to_str().unwrap(), "--qubit-map", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(d.join("sequential_first.qasm")).unwrap();
    assert_eq!(first.matches("u3(").count(), 5);
    assert!(first.contains("measure q[2] -> c[2];"));
    let second = std::fs::read_to_string(d.join("sequential_second.qasm")).unwrap();
    assert_eq!(second.matches("u3(").count(), 3);

    let noise = d.join("noise.toml");
    std::fs::write(&noise, "p1 = 0.01\np2 = 0.0\nreadout_eps = 0.07\n").unwrap();
    let out = cli(&[
        "simulate", "--scheme", "parallel", "--u", "r(2*pi/3)", "--v", "id", "--truth", "first",
        "--shots", "2000", "--noise", noise.to_str().unwrap(), "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let round: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rate = round["success_rate"].as_f64().unwrap();
    assert!(rate > 0.7 && rate < 0.95, "{rate}");

    let cfg = d.join("cfg.toml");
    std::fs::write(
        &cfg,
        "gate_u = \"r(2.0943951023931953)\"\ngate_v = \"id\"\nseed = 9\nrounds = 4\n[noise]\np1 = 0.01\nreadout_eps = 0.07\n",
    )
    .unwrap();
    let (r1, r2) = (d.join("r1.json"), d.join("r2.json"));
    for r in [&r1, &r2] {
        let out = cli(&["experiment", "--config", cfg.to_str().unwrap(), "--out", r.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    let out = cli(&["report", "--in", r1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("parallel") && text.contains("sequential") && text.contains("median"));
    assert!(text.contains('#'));
    let out = cli(&["report", "--in", r1.to_str().unwrap(), "--csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
}

#[test]
fn shipped_configs_parse() {
    let cfg = ExperimentConfig::from_toml(&std::fs::read_to_string(repo_file("configs/reference.toml")).unwrap())
        .unwrap();
    assert_eq!(cfg.shots, 1024);
    assert_eq!(cfg.rounds, 10);
    let targets = unidisc::harness::FitTargets::from_toml(
        &std::fs::read_to_string(repo_file("configs/reference_targets.toml")).unwrap(),
    )
    .unwrap();
    assert_eq!(targets.rates(), [834.0 / 1024.0, 875.0 / 1024.0, 857.0 / 1024.0, 1007.0 / 1024.0]);
    unidisc::harness::load_noise(&std::fs::read_to_string(repo_file("configs/fitted_noise.toml")).unwrap())
        .unwrap();
}
