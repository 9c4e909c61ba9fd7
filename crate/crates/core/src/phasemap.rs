//! Intensity/phase conversion for a modulator biased at minimum, trace
//! normalization, and per-slot feature extraction.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::waveform::{NominalPattern, Symbol, Waveform};

/// Slack allowed outside `[0, 1]` before an intensity is rejected.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// Default minimum Pearson score for automatic slot alignment.
pub const DEFAULT_ALIGNMENT_CONFIDENCE: f64 = 0.5;

/// `phi = 2 acos(sqrt(1 - I))` for normalized intensity `I`.
pub fn intensity_to_phase(intensity: f64) -> Result<f64> {
    if !(intensity >= -CLAMP_TOLERANCE && intensity <= 1.0 + CLAMP_TOLERANCE) {
        return Err(Error::IntensityOutOfRange(intensity));
    }
    let i = intensity.clamp(0.0, 1.0);
    Ok(2.0 * (1.0 - i).sqrt().acos())
}

/// `I = sin^2(phi / 2)`, the inverse of [`intensity_to_phase`] on `[0, pi]`.
pub fn phase_to_intensity(phi: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&phi) {
        return Err(Error::PhaseOutOfRange(phi));
    }
    Ok(modulator_transfer(phi))
}

/// Optical transmission of a modulator biased at minimum for modulator phase `phi`.
pub fn modulator_transfer(phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    s * s
}

/// Offset and full-scale used to map raw traces onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationContext {
    pub dc_offset: f64,
    pub global_max: f64,
}

impl NormalizationContext {
    /// Global maximum over every sample of the batch.
    pub fn from_batch(traces: &[Waveform], dc_offset: f64) -> Result<Self> {
        let global_max = traces
            .iter()
            .map(Waveform::peak)
            .fold(f64::NEG_INFINITY, f64::max);
        if traces.is_empty() {
            return Err(Error::EmptyWaveform);
        }
        let ctx = Self {
            dc_offset,
            global_max,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    fn validate(&self) -> Result<()> {
        if !(self.global_max > self.dc_offset) {
            return Err(Error::DegenerateNormalization {
                max: self.global_max,
                offset: self.dc_offset,
            });
        }
        Ok(())
    }
}

/// Mean level over the central half-pulse window of every slot whose nominal
/// symbol is `baseline` (for example `OFF` or `S0`).
pub fn estimate_dc_offset(
    traces: &[Waveform],
    patterns: &[NominalPattern],
    grid: &SlotGrid,
    baseline: Symbol,
) -> Result<f64> {
    if traces.len() != patterns.len() {
        return Err(Error::LengthMismatch(traces.len(), patterns.len()));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (trace, pattern) in traces.iter().zip(patterns) {
        let offset = grid.alignment_offset.unwrap_or(0.0);
        for (k, sym) in pattern.symbols.iter().enumerate() {
            if *sym == baseline {
                for i in grid.center_window(trace, offset, k) {
                    sum += trace.samples()[i];
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid(format!(
            "no {baseline} slots to estimate the offset from"
        )));
    }
    Ok(sum / count as f64)
}

/// `(v - dc_offset) / (global_max - dc_offset)`; values within
/// [`CLAMP_TOLERANCE`] of the unit interval are clamped onto it.
pub fn normalize_traces(traces: &[Waveform], ctx: &NormalizationContext) -> Result<Vec<Waveform>> {
    ctx.validate()?;
    let span = ctx.global_max - ctx.dc_offset;
    traces
        .iter()
        .map(|t| {
            t.map(|v| {
                let x = (v - ctx.dc_offset) / span;
                if (-CLAMP_TOLERANCE..0.0).contains(&x) {
                    0.0
                } else if x > 1.0 && x <= 1.0 + CLAMP_TOLERANCE {
                    1.0
                } else {
                    x
                }
            })
        })
        .collect()
}

/// Converts a normalized intensity trace to phase with [`intensity_to_phase`].
pub fn intensity_trace_to_phase(trace: &Waveform) -> Result<Waveform> {
    let phases = trace
        .samples()
        .iter()
        .map(|&i| intensity_to_phase(i))
        .collect::<Result<Vec<_>>>()?;
    trace.with_samples(phases)
}

/// Converts a normalized drive-proportional trace to phase (1.0 = pi).
pub fn amplitude_trace_to_phase(trace: &Waveform) -> Result<Waveform> {
    trace.map(|x| PI * x)
}

/// Ideal clock grid of the pulse slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGrid {
    pub rep_rate: f64,
    pub pulse_width: f64,
    /// Time from the trace start to slot 0, in seconds. `None` requests
    /// automatic alignment where supported.
    pub alignment_offset: Option<f64>,
}

impl SlotGrid {
    pub fn new(rep_rate: f64, pulse_width: f64) -> Self {
        Self {
            rep_rate,
            pulse_width,
            alignment_offset: None,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.alignment_offset = Some(offset);
        self
    }

    pub fn period(&self) -> f64 {
        1.0 / self.rep_rate
    }

    /// Number of slots covered by `trace`, if it is an integer within one sample.
    pub fn slot_count(&self, trace: &Waveform) -> Result<usize> {
        let slots = trace.duration() * self.rep_rate;
        let n = slots.round();
        if n < 1.0 || (slots - n).abs() * self.period() > trace.dt() * (1.0 + 1e-9) {
            return Err(Error::invalid(format!(
                "trace spans {slots:.4} slots, not an integer number"
            )));
        }
        Ok(n as usize)
    }

    fn slot_center(&self, offset: f64, k: usize) -> f64 {
        offset + (k as f64 + 0.5) * self.period()
    }

    /// Circular sample indices within a quarter pulse width of the centre of slot `k`.
    fn center_window(
        &self,
        trace: &Waveform,
        offset: f64,
        k: usize,
    ) -> impl Iterator<Item = usize> {
        let fs = trace.sample_rate();
        let n = trace.len() as i64;
        let c = self.slot_center(offset, k) * fs;
        let half = 0.25 * self.pulse_width * fs;
        let eps = 1e-9;
        let lo = (c - half - eps).ceil() as i64;
        let hi = (c + half + eps).floor() as i64;
        let (lo, hi) = if hi < lo {
            let r = c.round() as i64;
            (r, r)
        } else {
            (lo, hi)
        };
        (lo..=hi).map(move |i| i.rem_euclid(n) as usize)
    }

    fn center_sample(&self, trace: &Waveform, offset: f64, k: usize) -> usize {
        let c = (self.slot_center(offset, k) * trace.sample_rate()).round() as i64;
        c.rem_euclid(trace.len() as i64) as usize
    }

    /// Sample indices (circular) whose times fall in `[k T, (k + 1) T)` past the offset.
    fn slot_window(&self, trace: &Waveform, offset: f64, k: usize) -> (i64, i64) {
        let fs = trace.sample_rate();
        let eps = 1e-9;
        let start = ((offset + k as f64 * self.period()) * fs - eps).ceil() as i64;
        let end = ((offset + (k + 1) as f64 * self.period()) * fs - eps).ceil() as i64;
        (start, end)
    }
}

/// Scalar phase readout rule for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseWindow {
    /// Sample nearest the slot centre.
    CenterSample,
    /// Mean over the central 50% of the nominal pulse width.
    #[default]
    CenterMean50,
}

/// Sub-sample peak of one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFeature {
    pub intensity: f64,
    /// Peak time relative to the slot start on the ideal clock grid, seconds.
    pub time_offset: f64,
}

/// Features extracted from one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseRecord {
    pub slot_index: usize,
    pub nominal: Symbol,
    pub phi: Option<f64>,
    pub peak: Option<PeakFeature>,
    /// Distance in ns to the previous transmitted pulse of the same trace.
    pub spacing_prev_ns: Option<u32>,
}

impl PulseRecord {
    pub fn peak_intensity(&self) -> Option<f64> {
        self.peak.map(|p| p.intensity)
    }
}

/// Reference level of a symbol for alignment.
fn reference_level(sym: Symbol) -> f64 {
    match sym {
        Symbol::S0 | Symbol::Off => 0.0,
        Symbol::SHalf => 0.5,
        _ => 1.0,
    }
}

/// Finds the slot-grid offset by circular cross-correlation of `trace`
/// against the ideal square train of `pattern`, searching lags within half a
/// slot. Returns the offset in seconds and the Pearson score at that lag.
pub fn align_to_pattern(
    trace: &Waveform,
    pattern: &NominalPattern,
    grid: &SlotGrid,
) -> Result<(f64, f64)> {
    let fs = trace.sample_rate();
    let n = trace.len();
    let period = grid.period();
    let reference: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let k = (t / period).floor() as usize;
            let within = t - k as f64 * period;
            let lo = 0.5 * (period - grid.pulse_width);
            match pattern.symbols.get(k) {
                Some(&s) if within >= lo - 1e-15 && within < lo + grid.pulse_width - 1e-15 => {
                    reference_level(s)
                }
                _ => 0.0,
            }
        })
        .collect();
    let centered = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let c: Vec<f64> = v.iter().map(|x| x - m).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        (c, norm)
    };
    let (r, rn) = centered(&reference);
    let (x, xn) = centered(trace.samples());
    if rn == 0.0 || xn == 0.0 {
        return Err(Error::AlignmentFailed {
            score: 0.0,
            required: DEFAULT_ALIGNMENT_CONFIDENCE,
        });
    }
    let max_lag = (0.5 * period * fs).floor() as i64;
    let mut best = (0i64, f64::NEG_INFINITY);
    for lag in -max_lag..=max_lag {
        let s: f64 = (0..n)
            .map(|i| x[(i as i64 + lag).rem_euclid(n as i64) as usize] * r[i])
            .sum();
        let score = s / (rn * xn);
        if score > best.1 + 1e-12 || (score > best.1 - 1e-12 && lag.abs() < best.0.abs()) {
            best = (lag, score);
        }
    }
    Ok((best.0 as f64 / fs, best.1))
}

fn resolve_offset(
    trace: &Waveform,
    pattern: &NominalPattern,
    grid: &SlotGrid,
    confidence: f64,
) -> Result<f64> {
    match grid.alignment_offset {
        Some(o) => Ok(o),
        None => {
            let (offset, score) = align_to_pattern(trace, pattern, grid)?;
            if score < confidence {
                return Err(Error::AlignmentFailed {
                    score,
                    required: confidence,
                });
            }
            Ok(offset)
        }
    }
}

/// One record per slot with the phase read out by `window`. The grid offset
/// is found by [`align_to_pattern`] when not supplied.
pub fn extract_pulse_phases(
    trace: &Waveform,
    pattern: &NominalPattern,
    grid: &SlotGrid,
    window: PhaseWindow,
    confidence: f64,
) -> Result<Vec<PulseRecord>> {
    let slots = grid.slot_count(trace)?;
    if pattern.len() != slots {
        return Err(Error::LengthMismatch(pattern.len(), slots));
    }
    let offset = resolve_offset(trace, pattern, grid, confidence)?;
    let s = trace.samples();
    Ok((0..slots)
        .map(|k| {
            let phi = match window {
                PhaseWindow::CenterSample => s[grid.center_sample(trace, offset, k)],
                PhaseWindow::CenterMean50 => {
                    let mut idx = grid.center_window(trace, offset, k);
                    let v0 = idx.next().map_or(0.0, |i| s[i]);
                    // shifted sum: a flat window reads back its level exactly
                    let (sum, count) =
                        idx.fold((0.0, 1usize), |(a, c), i| (a + (s[i] - v0), c + 1));
                    v0 + sum / count as f64
                }
            };
            PulseRecord {
                slot_index: k,
                nominal: pattern.symbols[k],
                phi: Some(phi),
                peak: None,
                spacing_prev_ns: None,
            }
        })
        .collect())
}

/// Vertex offset of the parabola through three equally spaced samples,
/// in samples relative to the middle one.
pub fn quadratic_peak_offset(y0: f64, y1: f64, y2: f64) -> f64 {
    let a = 0.5 * (y0 + y2) - y1;
    let b = 0.5 * (y2 - y0);
    if a.abs() < 1e-15 {
        0.0
    } else {
        (-b / (2.0 * a)).clamp(-1.0, 1.0)
    }
}

/// Peak extraction result; slots with no positive signal are listed in
/// `flagged_slots` instead of producing a record.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakExtraction {
    pub records: Vec<PulseRecord>,
    pub flagged_slots: Vec<usize>,
}

/// Peak intensity and sub-sample peak time of every transmitted slot (all
/// slots except `OFF`). The grid offset defaults to 0 so timings stay
/// relative to the ideal clock.
pub fn extract_pulse_peaks(
    trace: &Waveform,
    pattern: &NominalPattern,
    grid: &SlotGrid,
) -> Result<PeakExtraction> {
    let slots = grid.slot_count(trace)?;
    if pattern.len() != slots {
        return Err(Error::LengthMismatch(pattern.len(), slots));
    }
    let offset = grid.alignment_offset.unwrap_or(0.0);
    let s = trace.samples();
    let n = s.len() as i64;
    let at = |i: i64| s[i.rem_euclid(n) as usize];
    let fs = trace.sample_rate();
    let period_ns = grid.period() * 1e9;
    let mut records = Vec::new();
    let mut flagged = Vec::new();
    let mut prev_on: Option<usize> = None;
    for (k, &sym) in pattern.symbols.iter().enumerate() {
        if sym == Symbol::Off {
            continue;
        }
        let spacing = prev_on.map(|p| ((k - p) as f64 * period_ns).round() as u32);
        prev_on = Some(k);
        let (start, end) = grid.slot_window(trace, offset, k);
        let mut best = None::<(i64, f64)>;
        for i in start..end {
            let v = at(i);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) if v > 0.0 => {
                let delta = quadratic_peak_offset(at(i - 1), v, at(i + 1));
                let t_peak = (i as f64 + delta) / fs;
                records.push(PulseRecord {
                    slot_index: k,
                    nominal: sym,
                    phi: None,
                    peak: Some(PeakFeature {
                        intensity: v,
                        time_offset: t_peak - (offset + k as f64 * grid.period()),
                    }),
                    spacing_prev_ns: spacing,
                });
            }
            _ => flagged.push(k),
        }
    }
    Ok(PeakExtraction {
        records,
        flagged_slots: flagged,
    })
}

/// One slot-period window of `trace` starting at slot `k` of the grid.
pub fn slot_segment(trace: &Waveform, grid: &SlotGrid, k: usize) -> Result<Waveform> {
    let offset = grid.alignment_offset.unwrap_or(0.0);
    let (start, end) = grid.slot_window(trace, offset, k);
    let n = trace.len() as i64;
    let samples = (start..end)
        .map(|i| trace.samples()[i.rem_euclid(n) as usize])
        .collect();
    Waveform::new(
        samples,
        trace.sample_rate(),
        trace.t0() + start as f64 / trace.sample_rate(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{make_pulse_train, random_pattern, PulseTrainSpec};

    #[test]
    fn eq1_endpoints_and_midpoint() {
        assert_eq!(intensity_to_phase(0.0).unwrap(), 0.0);
        assert_eq!(intensity_to_phase(1.0).unwrap(), PI);
        assert!((intensity_to_phase(0.5).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(phase_to_intensity(0.0).unwrap(), 0.0);
        assert_eq!(phase_to_intensity(PI).unwrap(), 1.0);
    }

    #[test]
    fn eq1_clamp_tolerance() {
        assert_eq!(intensity_to_phase(1.0 + 5e-7).unwrap(), PI);
        assert_eq!(intensity_to_phase(-5e-7).unwrap(), 0.0);
        assert!(matches!(
            intensity_to_phase(1.0 + 2e-6),
            Err(Error::IntensityOutOfRange(_))
        ));
        assert!(intensity_to_phase(-2e-6).is_err());
        assert!(intensity_to_phase(f64::NAN).is_err());
        assert!(matches!(
            phase_to_intensity(-0.1),
            Err(Error::PhaseOutOfRange(_))
        ));
        assert!(phase_to_intensity(PI + 1e-9).is_err());
    }

    #[test]
    fn normalization() {
        let a = Waveform::new(vec![0.0, 1.0e-3, 2.66e-3], 40e9, 0.0).unwrap();
        let b = Waveform::new(vec![0.5e-3, 2.0e-3, 0.1e-3], 40e9, 0.0).unwrap();
        let ctx = NormalizationContext::from_batch(&[a.clone(), b.clone()], 0.0).unwrap();
        let out = normalize_traces(&[a.clone(), b.clone()], &ctx).unwrap();
        assert_eq!(out[0].samples()[2], 1.0);
        assert!(out
            .iter()
            .flat_map(|w| w.samples())
            .all(|&x| (0.0..=1.0).contains(&x)));

        let c = 3.7;
        let scaled: Vec<Waveform> = [a, b].iter().map(|w| w.map(|x| x * c).unwrap()).collect();
        let ctx2 = NormalizationContext::from_batch(&scaled, 0.0).unwrap();
        let out2 = normalize_traces(&scaled, &ctx2).unwrap();
        for (x, y) in out.iter().zip(&out2) {
            for (p, q) in x.samples().iter().zip(y.samples()) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn offset_removal_and_degenerate_context() {
        let t = Waveform::new(vec![0.2; 8], 1.0, 0.0).unwrap();
        let ctx = NormalizationContext {
            dc_offset: 0.2,
            global_max: 1.2,
        };
        let out = normalize_traces(&[t.clone()], &ctx).unwrap();
        assert!(out[0].samples().iter().all(|&x| x == 0.0));
        assert!(matches!(
            NormalizationContext::from_batch(&[t], 0.2),
            Err(Error::DegenerateNormalization { .. })
        ));
    }

    fn ideal_phase_trace(seed: u64, slots: usize) -> (Waveform, NominalPattern) {
        let spec = PulseTrainSpec::phase_drive(1e9, 200e-12, slots, 40e9);
        let pattern = random_pattern(seed, &Symbol::PHASES, slots, None).unwrap();
        let drive = make_pulse_train(&spec, &pattern).unwrap();
        (amplitude_trace_to_phase(&drive).unwrap(), pattern)
    }

    #[test]
    fn ideal_train_reads_back_nominal_phases() {
        let (trace, pattern) = ideal_phase_trace(11, 100);
        for window in [PhaseWindow::CenterSample, PhaseWindow::CenterMean50] {
            let recs =
                extract_pulse_phases(&trace, &pattern, &SlotGrid::new(1e9, 200e-12), window, 0.5)
                    .unwrap();
            assert_eq!(recs.len(), 100);
            for r in &recs {
                assert_eq!(r.phi.unwrap(), PI * reference_level(r.nominal));
            }
        }
    }

    #[test]
    fn perturbed_slot_shifts_its_phase() {
        let (trace, pattern) = ideal_phase_trace(5, 20);
        let mut s = trace.samples().to_vec();
        // slot 7 centre window at 40 GSa/s: samples 7*40 + 18..=22
        for v in &mut s[7 * 40 + 18..=7 * 40 + 22] {
            *v += 0.03;
        }
        let perturbed = trace.with_samples(s).unwrap();
        let grid = SlotGrid::new(1e9, 200e-12).with_offset(0.0);
        let base =
            extract_pulse_phases(&trace, &pattern, &grid, PhaseWindow::CenterMean50, 0.5).unwrap();
        let out = extract_pulse_phases(&perturbed, &pattern, &grid, PhaseWindow::CenterMean50, 0.5)
            .unwrap();
        for k in 0..20 {
            let d = out[k].phi.unwrap() - base[k].phi.unwrap();
            let expected = if k == 7 { 0.03 } else { 0.0 };
            assert!((d - expected).abs() < 1e-12, "slot {k}: {d}");
        }
    }

    #[test]
    fn alignment_recovers_delay() {
        let (trace, pattern) = ideal_phase_trace(3, 50);
        let shifted = {
            let mut s = trace.samples().to_vec();
            s.rotate_right(3);
            trace.with_samples(s).unwrap()
        };
        let (offset, score) =
            align_to_pattern(&shifted, &pattern, &SlotGrid::new(1e9, 200e-12)).unwrap();
        assert!((offset - 3.0 / 40e9).abs() < 1e-18);
        assert!(score > 0.999);
    }

    #[test]
    fn alignment_rejects_noise() {
        let pattern = random_pattern(3, &Symbol::PHASES, 20, None).unwrap();
        let noise: Vec<f64> = (0..800).map(|i| ((i * 7919) % 101) as f64).collect();
        let trace = Waveform::new(noise, 40e9, 0.0).unwrap();
        let err = extract_pulse_phases(
            &trace,
            &pattern,
            &SlotGrid::new(1e9, 200e-12),
            PhaseWindow::CenterMean50,
            0.5,
        );
        assert!(matches!(err, Err(Error::AlignmentFailed { .. })));
    }

    #[test]
    fn quadratic_peak_on_symmetric_triangle() {
        // triangle with apex midway between samples 10 and 11
        let apex = 10.5;
        let s: Vec<f64> = (0..25)
            .map(|i| (5.0 - (i as f64 - apex).abs()).max(0.0))
            .collect();
        let trace = Waveform::new(s, 40e9, 0.0).unwrap();
        let pattern = NominalPattern {
            symbols: vec![Symbol::On],
            seed: 0,
        };
        let grid = SlotGrid::new(1.6e9, 200e-12).with_offset(0.0);
        let out = extract_pulse_peaks(&trace, &pattern, &grid).unwrap();
        let peak = out.records[0].peak.unwrap();
        let dt = 1.0 / 40e9;
        assert!((peak.time_offset - 10.5 * dt).abs() < 1e-3 * dt);
        assert_eq!(peak.intensity, 4.5);
    }

    #[test]
    fn square_pulse_peak_is_plateau() {
        let spec = PulseTrainSpec::selection_drive(1e9, 200e-12, 4, 40e9);
        let pattern = NominalPattern {
            symbols: vec![Symbol::On, Symbol::Off, Symbol::On, Symbol::On],
            seed: 0,
        };
        let wf = make_pulse_train(&spec, &pattern)
            .unwrap()
            .map(|x| 0.8 * x)
            .unwrap();
        let out = extract_pulse_peaks(&wf, &pattern, &SlotGrid::new(1e9, 200e-12)).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.records.iter().all(|r| r.peak_intensity() == Some(0.8)));
    }

    #[test]
    fn spacing_from_on_slots() {
        let spec = PulseTrainSpec::selection_drive(1e9, 200e-12, 6, 40e9);
        let mut symbols = vec![Symbol::Off; 6];
        for k in [0, 3, 4] {
            symbols[k] = Symbol::On;
        }
        let pattern = NominalPattern { symbols, seed: 0 };
        let wf = make_pulse_train(&spec, &pattern).unwrap();
        let out = extract_pulse_peaks(&wf, &pattern, &SlotGrid::new(1e9, 200e-12)).unwrap();
        let spacing: Vec<_> = out.records.iter().map(|r| r.spacing_prev_ns).collect();
        assert_eq!(spacing, vec![None, Some(3), Some(1)]);
    }

    #[test]
    fn empty_on_slot_is_flagged() {
        let wf = Waveform::zeros(80, 40e9).unwrap();
        let pattern = NominalPattern {
            symbols: vec![Symbol::On, Symbol::Off],
            seed: 0,
        };
        let out = extract_pulse_peaks(&wf, &pattern, &SlotGrid::new(1e9, 200e-12)).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.flagged_slots, vec![0]);
    }

    #[test]
    fn dc_offset_from_off_slots() {
        let spec = PulseTrainSpec::selection_drive(1e9, 200e-12, 10, 40e9);
        let pattern = random_pattern(2, &Symbol::SELECTION, 10, None).unwrap();
        let wf = make_pulse_train(&spec, &pattern)
            .unwrap()
            .map(|x| x + 0.013)
            .unwrap();
        let est = estimate_dc_offset(
            &[wf],
            &[pattern],
            &SlotGrid::new(1e9, 200e-12).with_offset(0.0),
            Symbol::Off,
        )
        .unwrap();
        assert!((est - 0.013).abs() < 1e-15);
    }
}
