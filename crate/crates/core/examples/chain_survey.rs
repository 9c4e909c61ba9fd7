//! Prints the headline numbers of the default chain: isolated-pulse response,
//! deviation curves at 1 GHz and 500 MHz, and the spacing table of a
//! selection run.
//!
//! `cargo run --release -p pathsel-core --example chain_survey [traces]`

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use pathsel_core::ingest::{PatternKind, RunConfig, RunMode};
use pathsel_core::pipeline::{analyze_intensity, analyze_phase, simulate};
use pathsel_core::waveform::{make_pulse_train, PulseTrainSpec};
use pathsel_core::{NominalPattern, Symbol};

fn main() {
    let traces: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(150);

    let cfg = RunConfig::new(RunMode::PhaseCharacterization, 1e9, 1);
    let chain = cfg.chain.resolve(Path::new(".")).unwrap();
    let mut symbols = vec![Symbol::S0; 20];
    symbols[2] = Symbol::SPi;
    let spec = PulseTrainSpec::phase_drive(1e9, 200e-12, 20, chain.drive_sample_rate);
    let drive = make_pulse_train(&spec, &NominalPattern { symbols, seed: 0 }).unwrap();
    let plan = chain
        .linear
        .periodic_plan(drive.len(), drive.sample_rate())
        .unwrap();
    let out = plan.run(&drive).unwrap();
    let s = out.samples();
    let (ipk, pk) = s
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let settle = s
        .iter()
        .enumerate()
        .rev()
        .find(|(i, v)| *i > ipk && v.abs() > 0.01 * pk)
        .map_or(0.0, |(i, _)| (i - ipk) as f64 / out.sample_rate());
    println!(
        "isolated pulse: peak {pk:.4}, last >1% sample {:.3} ns after peak",
        settle * 1e9
    );
    for k in 1..=8 {
        let i = ipk + 40 * k;
        println!("  tail at {k} ns: {:+.5}", s[i % s.len()] / pk);
    }

    for rate in [1e9, 0.5e9] {
        let mut cfg = RunConfig::new(RunMode::PhaseCharacterization, rate, traces);
        cfg.seeds = vec![7];
        cfg.analysis.n_max = 15;
        let t = Instant::now();
        let b = simulate(&cfg, Path::new(".")).unwrap();
        let sim = t.elapsed();
        let r = analyze_phase(
            &b.traces,
            &b.patterns,
            b.signal,
            rate,
            cfg.pulse_width,
            &cfg.analysis,
        )
        .unwrap();
        println!(
            "rate {:.1} GHz ({traces} traces; sim {:.2?}, total {:.2?})",
            rate / 1e9,
            sim,
            t.elapsed()
        );
        for (n, d) in &r.max_deviation_per_n {
            println!("  n={n:2} max dev {:.5} pi", d / PI);
        }
    }

    let order: u32 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(9);
    let mut curves = Vec::new();
    for rate in [1e9, 0.5e9] {
        let mut cfg = RunConfig::new(RunMode::PhaseCharacterization, rate, 1);
        cfg.pattern_kind = PatternKind::DeBruijn;
        cfg.pattern_length = 3usize.pow(order);
        cfg.analysis.n_max = 6;
        cfg.analysis.alignment_offset_s = Some(0.0);
        let t = Instant::now();
        let b = simulate(&cfg, Path::new(".")).unwrap();
        let r = analyze_phase(
            &b.traces,
            &b.patterns,
            b.signal,
            rate,
            cfg.pulse_width,
            &cfg.analysis,
        )
        .unwrap();
        println!(
            "de Bruijn order {order} at {:.1} GHz: {:.2?}",
            rate / 1e9,
            t.elapsed()
        );
        curves.push(r.max_deviation_per_n);
    }
    for n in 1..=3usize {
        let a = curves[0][&(2 * n)];
        let b = curves[1][&n];
        println!(
            "  lag {} @1GHz {:.6} pi vs lag {n} @0.5GHz {:.6} pi, rel {:.3}",
            2 * n,
            a / PI,
            b / PI,
            (a - b).abs() / b
        );
    }

    let mut cfg = RunConfig::new(RunMode::SelectionCharacterization, 1e9, 100);
    cfg.seeds = vec![11];
    let b = simulate(&cfg, Path::new(".")).unwrap();
    let r = analyze_intensity(&b.traces, &b.patterns, 1e9, &cfg.analysis).unwrap();
    println!("selection run, 100 traces");
    for row in &r.intensity_by_spacing {
        println!(
            "  l={} mean {:.6} std {:.6} normalized {:.6} count {}",
            row.spacing_ns,
            row.mean.unwrap_or(f64::NAN),
            row.std.unwrap_or(f64::NAN),
            row.normalized_mean.unwrap_or(f64::NAN),
            row.count
        );
    }
    let max_eps = r.epsilon_pairs.values().copied().fold(0.0, f64::max);
    println!("  max epsilon between spacing groups {max_eps:.3e}");
}
