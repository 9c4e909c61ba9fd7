//! End-to-end runs shared by the command line and the tests: pattern
//! generation, chain simulation of looping drive patterns, and the phase and
//! intensity analysis chains.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corrstats::{average_traces, epsilon_pairs, intensity_by_spacing, CorrelationReport};
use crate::error::{Error, Result};
use crate::ingest::{
    AnalysisConfig, PatternKind, Report, ResolvedChain, RunConfig, RunMode, TraceSchema,
};
use crate::phasemap::{
    amplitude_trace_to_phase, extract_pulse_peaks, extract_pulse_phases, intensity_trace_to_phase,
    normalize_traces, slot_segment, NormalizationContext, PulseRecord, SlotGrid,
};
use crate::sourcesim::{
    fringe_grid, fringe_scan, gain_switched_phases, PulseIntensities, ReadoutNoise,
    VisibilityResult,
};
use crate::waveform::{
    de_bruijn_pattern, make_pulse_train, random_pattern, random_spacing_pattern, NominalPattern,
    PulseTrainSpec, Symbol, Waveform,
};

/// Longest ON-to-ON gap of selection patterns unless configured.
pub const DEFAULT_MAX_SPACING: usize = 7;

/// What a trace's samples represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    /// Drive-proportional amplitude; 1.0 is a phase of pi.
    PhaseAmplitude,
    /// Optical intensity behind a modulator biased at minimum.
    Intensity,
}

impl Signal {
    pub fn schema(self) -> TraceSchema {
        match self {
            Signal::PhaseAmplitude => TraceSchema {
                time_col: "time_s".into(),
                value_col: "amplitude".into(),
                units: "normalized".into(),
            },
            Signal::Intensity => TraceSchema {
                time_col: "time_s".into(),
                value_col: "intensity".into(),
                units: "normalized".into(),
            },
        }
    }
}

/// One nominal pattern per trace seed.
pub fn generate_patterns(cfg: &RunConfig) -> Result<Vec<NominalPattern>> {
    if cfg.pattern_kind == PatternKind::DeBruijn {
        let order = cfg.de_bruijn_order().ok_or_else(|| {
            Error::Config("pattern_length does not fit a de Bruijn pattern".into())
        })?;
        return cfg
            .trace_seeds()
            .into_iter()
            .map(|seed| de_bruijn_pattern(cfg.alphabet(), order, seed))
            .collect();
    }
    cfg.trace_seeds()
        .into_iter()
        .map(|seed| match cfg.mode {
            RunMode::PhaseCharacterization => {
                random_pattern(seed, &Symbol::PHASES, cfg.pattern_length, None)
            }
            RunMode::SelectionCharacterization => random_spacing_pattern(
                seed,
                cfg.pattern_length,
                cfg.max_spacing.unwrap_or(DEFAULT_MAX_SPACING),
            ),
            RunMode::SourceModel => Err(Error::Config(
                "source-model runs have no drive patterns".into(),
            )),
        })
        .collect()
}

fn check_uniform(patterns: &[NominalPattern]) -> Result<usize> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::invalid("no patterns to simulate"))?;
    if let Some(p) = patterns.iter().find(|p| p.len() != first.len()) {
        return Err(Error::LengthMismatch(first.len(), p.len()));
    }
    Ok(first.len())
}

/// Steady-state chain output for looping phase-drive patterns.
pub fn simulate_phase_traces(
    chain: &ResolvedChain,
    rep_rate: f64,
    pulse_width: f64,
    patterns: &[NominalPattern],
) -> Result<Vec<Waveform>> {
    let len = check_uniform(patterns)?;
    let spec = PulseTrainSpec::phase_drive(rep_rate, pulse_width, len, chain.drive_sample_rate);
    let plan = chain
        .linear
        .periodic_plan(spec.total_samples(), chain.drive_sample_rate)?;
    patterns
        .iter()
        .map(|p| plan.run(&make_pulse_train(&spec, p)?))
        .collect()
}

/// Steady-state detector output for looping ON/OFF patterns, with the drive
/// scaled so an isolated pulse reaches one V_pi.
pub fn simulate_selection_traces(
    chain: &ResolvedChain,
    rep_rate: f64,
    pulse_width: f64,
    patterns: &[NominalPattern],
) -> Result<Vec<Waveform>> {
    let len = check_uniform(patterns)?;
    let mut optical = chain.optical.clone();
    optical.calibrate_vpi(rep_rate, pulse_width, chain.drive_sample_rate)?;
    let spec = PulseTrainSpec::selection_drive(rep_rate, pulse_width, len, chain.drive_sample_rate);
    let plan = optical.periodic_plan(spec.total_samples(), chain.drive_sample_rate)?;
    patterns
        .iter()
        .map(|p| plan.run(&make_pulse_train(&spec, p)?))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedBatch {
    pub patterns: Vec<NominalPattern>,
    pub traces: Vec<Waveform>,
    pub signal: Signal,
}

/// Simulates every trace of a phase or selection run. Relative table paths in
/// the chain resolve against `base_dir`.
pub fn simulate(cfg: &RunConfig, base_dir: &Path) -> Result<SimulatedBatch> {
    cfg.validate()?;
    let chain = cfg.chain.resolve(base_dir)?;
    let patterns = generate_patterns(cfg)?;
    let (traces, signal) = match cfg.mode {
        RunMode::PhaseCharacterization => (
            simulate_phase_traces(&chain, cfg.rep_rate, cfg.pulse_width, &patterns)?,
            Signal::PhaseAmplitude,
        ),
        RunMode::SelectionCharacterization => (
            simulate_selection_traces(&chain, cfg.rep_rate, cfg.pulse_width, &patterns)?,
            Signal::Intensity,
        ),
        RunMode::SourceModel => unreachable!("rejected by generate_patterns"),
    };
    Ok(SimulatedBatch {
        patterns,
        traces,
        signal,
    })
}

fn grid(rep_rate: f64, pulse_width: f64, analysis: &AnalysisConfig) -> SlotGrid {
    let g = SlotGrid::new(rep_rate, pulse_width);
    match analysis.alignment_offset_s {
        Some(o) => g.with_offset(o),
        None => g,
    }
}

/// Phase records of a batch: normalize by the batch maximum, convert to
/// phase and read out each slot.
pub fn extract_phase_records(
    traces: &[Waveform],
    patterns: &[NominalPattern],
    signal: Signal,
    rep_rate: f64,
    pulse_width: f64,
    analysis: &AnalysisConfig,
) -> Result<Vec<Vec<PulseRecord>>> {
    if traces.len() != patterns.len() {
        return Err(Error::LengthMismatch(traces.len(), patterns.len()));
    }
    let ctx = NormalizationContext::from_batch(traces, analysis.dc_offset)?;
    let normalized = normalize_traces(traces, &ctx)?;
    let g = grid(rep_rate, pulse_width, analysis);
    normalized
        .iter()
        .zip(patterns)
        .map(|(t, p)| {
            let phase = match signal {
                Signal::PhaseAmplitude => amplitude_trace_to_phase(t)?,
                Signal::Intensity => intensity_trace_to_phase(t)?,
            };
            extract_pulse_phases(
                &phase,
                p,
                &g,
                analysis.window.into(),
                analysis.alignment_confidence,
            )
        })
        .collect()
}

/// Per-case statistics and deviation curve of one repetition rate.
pub fn analyze_phase(
    traces: &[Waveform],
    patterns: &[NominalPattern],
    signal: Signal,
    rep_rate: f64,
    pulse_width: f64,
    analysis: &AnalysisConfig,
) -> Result<CorrelationReport> {
    let batch = extract_phase_records(traces, patterns, signal, rep_rate, pulse_width, analysis)?;
    CorrelationReport::from_phase_records(rep_rate, &batch, analysis.n_max)
}

/// Name of the pulse group with spacing `l`.
pub fn spacing_group(l: u32) -> String {
    format!("l{l}")
}

/// Peak intensity by spacing to the previous pulse, and ε between the
/// averaged pulse shapes of each spacing.
pub fn analyze_intensity(
    traces: &[Waveform],
    patterns: &[NominalPattern],
    rep_rate: f64,
    analysis: &AnalysisConfig,
) -> Result<CorrelationReport> {
    if traces.len() != patterns.len() {
        return Err(Error::LengthMismatch(traces.len(), patterns.len()));
    }
    let g = SlotGrid::new(rep_rate, 0.5 / rep_rate)
        .with_offset(analysis.alignment_offset_s.unwrap_or(0.0));
    let mut batch = Vec::with_capacity(traces.len());
    let mut segments: BTreeMap<u32, Vec<Waveform>> = BTreeMap::new();
    for (t, p) in traces.iter().zip(patterns) {
        let t = t.map(|v| v - analysis.dc_offset)?;
        let ex = extract_pulse_peaks(&t, p, &g)?;
        for r in &ex.records {
            if let Some(l) = r
                .spacing_prev_ns
                .filter(|&l| (1..=analysis.l_max).contains(&l))
            {
                segments
                    .entry(l)
                    .or_default()
                    .push(slot_segment(&t, &g, r.slot_index)?);
            }
        }
        batch.push(ex.records);
    }
    let groups = segments
        .iter()
        .map(|(&l, segs)| Ok((spacing_group(l), average_traces(segs)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationReport {
        rep_rate,
        intensity_by_spacing: intensity_by_spacing(&batch, analysis.l_max)?,
        epsilon_pairs: epsilon_pairs(&groups)?,
        ..Default::default()
    })
}

/// ε between the averaged pulse of each named group of traces.
pub fn analyze_groups(
    groups: &[(String, Vec<Waveform>)],
    rep_rate: f64,
) -> Result<CorrelationReport> {
    let averaged = groups
        .iter()
        .map(|(name, traces)| Ok((name.clone(), average_traces(traces)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationReport {
        rep_rate,
        epsilon_pairs: epsilon_pairs(&averaged)?,
        ..Default::default()
    })
}

/// Fringe scan of the gain-switched source at `source.i_min`, plus one
/// noiseless visibility per entry of `source.i_min_sweep`. The base seed is
/// `seeds[0]`.
pub fn run_visibility(cfg: &RunConfig) -> Result<Report> {
    let s = &cfg.source;
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let grid = fringe_grid(s.grid_points);
    let scan_at = |i_min: f64, noise: Option<ReadoutNoise>| -> Result<(f64, VisibilityResult)> {
        let gs = s.gain_switch(i_min, seed);
        let phases = gain_switched_phases(&gs, s.n_pulses)?;
        let r = fringe_scan(
            &phases,
            PulseIntensities::Uniform(1.0),
            &grid,
            s.imbalance_slots,
            noise,
        )?;
        Ok((gs.survival_probability(), r))
    };
    let noise = (s.readout_sigma > 0.0).then_some(ReadoutNoise {
        sigma: s.readout_sigma,
        readings: s.readings_per_point,
        seed: seed.wrapping_add(1),
    });
    let (_, scan) = scan_at(s.i_min, noise)?;
    let sweep = s
        .i_min_sweep
        .iter()
        .map(|&i| scan_at(i, None).map(|(p, r)| (i, p, r.visibility)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::Visibility { scan, sweep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ChainSpec, StageSpec};

    fn identity_chain() -> ChainSpec {
        ChainSpec {
            drive_sample_rate: 80e9,
            output_sample_rate: 40e9,
            stages: vec![StageSpec::Identity {
                domain: Default::default(),
            }],
        }
    }

    #[test]
    fn ideal_chain_has_no_deviation() {
        for rate in [0.5e9, 1e9, 2e9] {
            let mut cfg = RunConfig::new(RunMode::PhaseCharacterization, rate, 20);
            cfg.pulse_width = 0.2 / rate;
            cfg.chain = identity_chain();
            cfg.analysis.n_max = 6;
            let b = simulate(&cfg, Path::new(".")).unwrap();
            assert_eq!(b.traces.len(), 20);
            assert_eq!(b.traces[0].len(), (100.0 / rate * 40e9).round() as usize);
            let r = analyze_phase(
                &b.traces,
                &b.patterns,
                b.signal,
                rate,
                cfg.pulse_width,
                &cfg.analysis,
            )
            .unwrap();
            assert_eq!(r.max_deviation_per_n.len(), 6);
            assert!(
                r.max_deviation_per_n.values().all(|&d| d == 0.0),
                "{rate}: {:?}",
                r.max_deviation_per_n
            );
        }
    }

    #[test]
    fn selection_patterns_and_flat_intensity() {
        let mut cfg = RunConfig::new(RunMode::SelectionCharacterization, 1e9, 10);
        cfg.chain = identity_chain();
        cfg.pattern_length = 200;
        let b = simulate(&cfg, Path::new(".")).unwrap();
        assert_eq!(b.signal, Signal::Intensity);
        let r = analyze_intensity(&b.traces, &b.patterns, 1e9, &cfg.analysis).unwrap();
        assert_eq!(r.intensity_by_spacing.len(), 7);
        for row in &r.intensity_by_spacing {
            assert!(row.count > 0);
            assert!((row.normalized_mean.unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(r.epsilon_pairs.values().all(|&e| e < 1e-12));
    }

    #[test]
    fn visibility_falls_with_survival() {
        let mut cfg = RunConfig::new(RunMode::SourceModel, 1e9, 1);
        cfg.source.n_pulses = 200_000;
        cfg.source.i_min_sweep = vec![10.0, 5.0, 3.5, 2.0];
        let Report::Visibility { scan, sweep } = run_visibility(&cfg).unwrap() else {
            panic!("wrong report kind")
        };
        assert_eq!(scan.intensity.len(), 65);
        assert!(sweep.windows(2).all(|w| w[1].2 < w[0].2), "{sweep:?}");
        assert!(sweep.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn source_mode_has_no_patterns() {
        let cfg = RunConfig::new(RunMode::SourceModel, 1e9, 1);
        assert!(generate_patterns(&cfg).is_err());
    }
}
