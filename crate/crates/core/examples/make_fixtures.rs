//! Regenerates the shipped fixtures under `crates/core/fixtures/`.
//!
//! Response tables:
//! - `rf_amp_12ghz.csv`: `[(1 - a) + a / (1 + j f/fc)] / (1 + j f/fp)`, a
//!   broadband amplifier with a slow gain shelf below `fc`; `fp` puts the
//!   -3 dB point at 12 GHz.
//! - `im_15ghz.csv`: single-pole magnitude with -3 dB at 15 GHz, no phase.
//!
//! Distinguishability groups: three sets of five pulse traces whose averages
//! have prescribed pairwise ε, written with `expected.csv`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use pathsel_core::ingest::{fmt_num, write_response_table, write_trace_csv, TraceSchema};
use pathsel_core::linsys::TablePoint;
use pathsel_core::Waveform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SHELF: f64 = 0.15;
const SHELF_CORNER_HZ: f64 = 200e6;

fn rf_amp(f: f64, fp: f64) -> Complex64 {
    let j = Complex64::i();
    ((1.0 - SHELF) + SHELF / (1.0 + j * f / SHELF_CORNER_HZ)) / (1.0 + j * f / fp)
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

fn frequency_grid(extra: f64) -> Vec<f64> {
    let mut f: Vec<f64> = (0..=100)
        .map(|i| 1e6 * 10f64.powf(i as f64 / 20.0))
        .collect();
    f.push(extra);
    f.sort_by(f64::total_cmp);
    f.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-9);
    f
}

fn response_tables(dir: &Path) {
    let target = 1.0 / 2f64.sqrt();
    let (mut lo, mut hi) = (1e9, 1e12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rf_amp(12e9, mid).norm() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fp = 0.5 * (lo + hi);
    let rf: Vec<TablePoint> = frequency_grid(12e9)
        .into_iter()
        .map(|f| {
            let h = rf_amp(f, fp);
            TablePoint {
                f_hz: f,
                mag_db: db(h.norm()),
                phase_deg: Some(h.arg().to_degrees()),
            }
        })
        .collect();
    write_response_table(&dir.join("rf_amp_12ghz.csv"), &rf).unwrap();
    let im: Vec<TablePoint> = frequency_grid(15e9)
        .into_iter()
        .map(|f| TablePoint {
            f_hz: f,
            mag_db: db(1.0 / (1.0 + (f / 15e9).powi(2)).sqrt()),
            phase_deg: None,
        })
        .collect();
    write_response_table(&dir.join("im_15ghz.csv"), &im).unwrap();
    println!("rf amplifier pole at {fp:.6e} Hz");
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt on `v` against the orthonormal `basis`, then normalize.
fn orthonormal(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    for e in basis {
        let c = dot(&v, e);
        v.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
    }
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn epsilon_groups(dir: &Path) {
    const N: usize = 80;
    const FS: f64 = 40e9;
    let eps: [(&str, &str, f64); 3] = [
        ("path1", "path2", 5.330e-6),
        ("path1", "path3", 2.396e-7),
        ("path2", "path3", 5.834e-6),
    ];
    let peaks_mv = [231.6, 233.6, 230.3];

    // Pulse-like shapes: a Gaussian, its derivative and a wider Gaussian.
    let t: Vec<f64> = (0..N).map(|i| (i as f64 - 40.0) / FS).collect();
    let g = |w: f64, k: f64| -> Vec<f64> {
        t.iter()
            .map(|x| (-(x / w).powi(2) / 2.0).exp() * (x / w).powf(k))
            .collect()
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in [g(17e-12, 0.0), g(17e-12, 1.0), g(40e-12, 0.0)] {
        let e = orthonormal(v, &basis);
        basis.push(e);
    }

    // Unit vectors with Gram matrix G_ij = 1 - eps_ij (Cholesky rows).
    let c12 = 1.0 - eps[0].2;
    let c13 = 1.0 - eps[1].2;
    let c23 = 1.0 - eps[2].2;
    let l21 = c12;
    let l22 = (1.0 - l21 * l21).sqrt();
    let l31 = c13;
    let l32 = (c23 - l31 * l21) / l22;
    let l33 = (1.0 - l31 * l31 - l32 * l32).sqrt();
    let coeffs = [[1.0, 0.0, 0.0], [l21, l22, 0.0], [l31, l32, l33]];

    let schema = TraceSchema {
        time_col: "time_s".into(),
        value_col: "value".into(),
        units: "mV".into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (gi, name) in ["path1", "path2", "path3"].iter().enumerate() {
        let u: Vec<f64> = (0..N)
            .map(|i| (0..3).map(|j| coeffs[gi][j] * basis[j][i]).sum())
            .collect();
        let peak = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let avg: Vec<f64> = u.iter().map(|x| x * peaks_mv[gi] / peak).collect();
        // Five noisy traces whose mean is the target shape.
        let mut noise: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..N).map(|_| 30.0 * (rng.random::<f64>() - 0.5)).collect())
            .collect();
        let last: Vec<f64> = (0..N)
            .map(|i| -noise.iter().map(|n| n[i]).sum::<f64>())
            .collect();
        noise.push(last);
        let gdir = dir.join(name);
        std::fs::create_dir_all(&gdir).unwrap();
        for (k, n) in noise.iter().enumerate() {
            let samples: Vec<f64> = avg.iter().zip(n).map(|(a, b)| a + b).collect();
            let wf = Waveform::new(samples, FS, 0.0).unwrap();
            write_trace_csv(&gdir.join(format!("trace_{k}.csv")), &wf, &schema).unwrap();
        }
    }
    let mut text = String::from("group_a,group_b,epsilon\n");
    for (a, b, e) in eps {
        text.push_str(&format!("{a},{b},{}\n", fmt_num(e)));
    }
    std::fs::write(dir.join("expected.csv"), text).unwrap();
}

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let responses = root.join("responses");
    let epsilon = root.join("epsilon");
    std::fs::create_dir_all(&responses).unwrap();
    std::fs::create_dir_all(&epsilon).unwrap();
    response_tables(&responses);
    epsilon_groups(&epsilon);
    println!("fixtures written to {}", root.display());
}
