use pathsel_core::corrstats::distinguishability;
use pathsel_core::ingest::{read_trace_csv, write_trace_csv, TraceSchema};
use pathsel_core::linsys::{apply_response, design_bessel, FilterPlan};
use pathsel_core::phasemap::{intensity_to_phase, phase_to_intensity};
use pathsel_core::sourcesim::{
    fringe_grid, fringe_scan, mzi_interfere, phases_with_survival, PulseIntensities,
};
use pathsel_core::waveform::resample;
use pathsel_core::Waveform;
use proptest::prelude::*;

const FS: f64 = 80e9;

fn signal(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filtering_is_linear(
        x in signal(256),
        y in signal(256),
        a in -3.0f64..3.0,
        order in 2usize..=6,
        cutoff in 5e9f64..30e9,
    ) {
        let resp = design_bessel(order, cutoff).unwrap();
        let wx = Waveform::new(x.clone(), FS, 0.0).unwrap();
        let wy = Waveform::new(y.clone(), FS, 0.0).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let lhs = apply_response(&Waveform::new(mix, FS, 0.0).unwrap(), &resp).unwrap();
        let fx = apply_response(&wx, &resp).unwrap();
        let fy = apply_response(&wy, &resp).unwrap();
        let rhs: Vec<f64> = fx.samples().iter().zip(fy.samples()).map(|(p, q)| a * p + q).collect();
        prop_assert!(max_abs_diff(lhs.samples(), &rhs) < 1e-12);
    }

    #[test]
    fn periodic_filter_commutes_with_rotation(x in signal(200), shift in 0usize..200) {
        let resp = design_bessel(4, 15e9).unwrap();
        let plan = FilterPlan::periodic(&resp, x.len(), FS).unwrap();
        let mut rotated = x.clone();
        rotated.rotate_right(shift);
        let mut expect = plan.apply(&Waveform::new(x, FS, 0.0).unwrap()).unwrap().into_samples();
        expect.rotate_right(shift);
        let got = plan.apply(&Waveform::new(rotated, FS, 0.0).unwrap()).unwrap();
        prop_assert!(max_abs_diff(got.samples(), &expect) < 1e-12);
    }

    #[test]
    fn resampling_to_own_rate_is_identity(x in signal(64), k in 1u32..8) {
        let wf = Waveform::new(x, FS, 1e-9).unwrap();
        prop_assert_eq!(resample(&wf, FS).unwrap(), wf.clone());
        let once = resample(&wf, FS / k as f64).unwrap();
        prop_assert_eq!(resample(&once, once.sample_rate()).unwrap(), once);
    }

    #[test]
    fn phase_map_is_monotonic(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(intensity_to_phase(lo).unwrap() <= intensity_to_phase(hi).unwrap());
        let (plo, phi) = (lo * std::f64::consts::PI, hi * std::f64::consts::PI);
        prop_assert!(phase_to_intensity(plo).unwrap() <= phase_to_intensity(phi).unwrap());
    }

    #[test]
    fn epsilon_is_symmetric_and_scale_free(
        x in signal(32),
        y in signal(32),
        s in 0.01f64..100.0,
    ) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3) && y.iter().any(|v| v.abs() > 1e-3));
        let a = Waveform::new(x, FS, 0.0).unwrap();
        let b = Waveform::new(y, FS, 0.0).unwrap();
        let e = distinguishability(&a, &b).unwrap();
        prop_assert!((0.0..=2.0).contains(&e));
        prop_assert!((e - distinguishability(&b, &a).unwrap()).abs() < 1e-12);
        let scaled = a.map(|v| s * v).unwrap();
        prop_assert!((e - distinguishability(&scaled, &b).unwrap()).abs() < 1e-9);
        prop_assert!(distinguishability(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn visibility_ignores_overall_power(
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        power in 1e-3f64..1e3,
    ) {
        let phases = phases_with_survival(p, 0.1, seed, 500).unwrap();
        let grid = fringe_grid(65);
        let unit = fringe_scan(&phases, PulseIntensities::Uniform(1.0), &grid, 1, None).unwrap();
        let scaled = fringe_scan(&phases, PulseIntensities::Uniform(power), &grid, 1, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&unit.visibility));
        prop_assert!((unit.visibility - scaled.visibility).abs() < 1e-9);
    }

    #[test]
    fn interferometer_reading_is_bounded(
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
        delta in 0.0f64..std::f64::consts::TAU,
        weights in prop::collection::vec(0.0f64..2.0, 100),
    ) {
        let phases = phases_with_survival(p, 0.3, seed, weights.len()).unwrap();
        let r = mzi_interfere(&phases, PulseIntensities::PerPulse(&weights), delta, 1).unwrap();
        let bound = weights.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / 99.0;
        prop_assert!(r >= -1e-12 && r <= bound + 1e-12);
    }

    #[test]
    fn trace_csv_rewrite_is_a_fixed_point(x in signal(50), rate in 1e9f64..100e9) {
        let dir = tempfile::tempdir().unwrap();
        let schema = TraceSchema::default();
        let paths: Vec<_> = (0..3).map(|i| dir.path().join(format!("{i}.csv"))).collect();
        let mut wf = Waveform::new(x, rate, 0.0).unwrap();
        let mut read_back = Vec::new();
        for p in &paths {
            write_trace_csv(p, &wf, &schema).unwrap();
            wf = read_trace_csv(p, &schema).unwrap().waveform;
            read_back.push(wf.clone());
        }
        // Values survive the first pass; the sample rate settles once it has
        // been rounded.
        prop_assert_eq!(read_back[0].samples(), read_back[1].samples());
        prop_assert_eq!(&read_back[1], &read_back[2]);
        prop_assert_eq!(std::fs::read(&paths[1]).unwrap(), std::fs::read(&paths[2]).unwrap());
    }
}
