//! Browser bindings: each operation returns an SVG chart and a one-line summary.

use std::f64::consts::PI;
use std::path::Path;

use pathsel_core::ingest::{report_tables, Report, RunConfig, RunMode, StageSpec};
use pathsel_core::phasemap::{align_to_pattern, slot_segment, SlotGrid};
use pathsel_core::pipeline::{analyze_phase, run_visibility, simulate};
use pathsel_core::plot::{plot_overlay, plot_table, PlotStyle};
use pathsel_core::{Symbol, Waveform};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct DemoOutput {
    svg: String,
    summary: String,
}

#[wasm_bindgen]
impl DemoOutput {
    #[wasm_bindgen(getter)]
    pub fn svg(&self) -> String {
        self.svg.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

fn js_err(e: pathsel_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn phase_config(rate_ghz: f64, awg_ghz: f64, n_traces: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(RunMode::PhaseCharacterization, rate_ghz * 1e9, n_traces);
    cfg.pulse_width = 0.2 / cfg.rep_rate;
    cfg.seeds = vec![seed];
    if let Some(StageSpec::Bessel { cutoff_hz, .. }) = cfg.chain.stages.first_mut() {
        *cutoff_hz = awg_ghz * 1e9;
    }
    cfg
}

/// Maximum phase deviation versus pulse separation for one repetition rate.
#[wasm_bindgen]
pub fn deviation_curve(
    rate_ghz: f64,
    awg_ghz: f64,
    n_traces: usize,
    seed: u64,
) -> Result<DemoOutput, JsError> {
    let cfg = phase_config(rate_ghz, awg_ghz, n_traces, seed);
    let batch = simulate(&cfg, Path::new(".")).map_err(js_err)?;
    let report = analyze_phase(
        &batch.traces,
        &batch.patterns,
        batch.signal,
        cfg.rep_rate,
        cfg.pulse_width,
        &cfg.analysis,
    )
    .map_err(js_err)?;
    let first = report.max_deviation_per_n.get(&1).copied().unwrap_or(0.0);
    let tables = report_tables(&Report::Correlation(vec![report]));
    let table = tables
        .iter()
        .find(|t| t.name == "max_deviation")
        .ok_or_else(|| JsError::new("no deviation table"))?;
    Ok(DemoOutput {
        svg: plot_table(table, PlotStyle::Deviation).map_err(js_err)?,
        summary: format!(
            "{n_traces} traces at {rate_ghz} GHz: deviation of the nearest neighbour {:.4} pi",
            first / PI
        ),
    })
}

/// Every received pulse of one simulated trace, overlaid and grouped by its
/// nominal phase.
#[wasm_bindgen]
pub fn pulse_overlay(rate_ghz: f64, awg_ghz: f64, seed: u64) -> Result<DemoOutput, JsError> {
    let mut cfg = phase_config(rate_ghz, awg_ghz, 1, seed);
    cfg.pattern_length = 60;
    let batch = simulate(&cfg, Path::new(".")).map_err(js_err)?;
    let (trace, pattern) = (&batch.traces[0], &batch.patterns[0]);
    let grid = SlotGrid::new(cfg.rep_rate, cfg.pulse_width);
    let (offset, _) = align_to_pattern(trace, pattern, &grid).map_err(js_err)?;
    let grid = grid.with_offset(offset);
    let mut groups: Vec<(String, Vec<Waveform>)> = Symbol::PHASES
        .iter()
        .map(|s| (s.as_str().to_string(), Vec::new()))
        .collect();
    for (k, sym) in pattern.symbols.iter().enumerate() {
        let i = Symbol::PHASES.iter().position(|s| s == sym).unwrap_or(0);
        groups[i]
            .1
            .push(slot_segment(trace, &grid, k).map_err(js_err)?);
    }
    Ok(DemoOutput {
        svg: plot_overlay(&groups).map_err(js_err)?,
        summary: format!(
            "{} pulses at {rate_ghz} GHz through a {awg_ghz} GHz AWG",
            pattern.len()
        ),
    })
}

/// Fringe scan of the gain-switched source at a minimum drive current.
#[wasm_bindgen]
pub fn fringe(i_min_ma: f64, n_pulses: usize, seed: u64) -> Result<DemoOutput, JsError> {
    let mut cfg = RunConfig::new(RunMode::SourceModel, 1e9, 1);
    cfg.seeds = vec![seed];
    cfg.source.i_min = i_min_ma;
    cfg.source.n_pulses = n_pulses;
    cfg.validate().map_err(js_err)?;
    let report = run_visibility(&cfg).map_err(js_err)?;
    let visibility = match &report {
        Report::Visibility { scan, .. } => scan.visibility,
        _ => unreachable!(),
    };
    let tables = report_tables(&report);
    let table = tables
        .iter()
        .find(|t| t.name == "fringe")
        .ok_or_else(|| JsError::new("no fringe table"))?;
    Ok(DemoOutput {
        svg: plot_table(table, PlotStyle::Fringe).map_err(js_err)?,
        summary: format!(
            "i_min {i_min_ma} mA, survival {:.4}: V = {visibility:.3e}",
            cfg.source
                .gain_switch(i_min_ma, seed)
                .survival_probability()
        ),
    })
}
