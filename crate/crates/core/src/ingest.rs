//! Text formats: oscilloscope traces, response tables, polarimeter logs,
//! nominal patterns, run configuration and report tables.
//!
//! Every number is written with 9 significant digits (`{:.8e}`), so reading a
//! written file and writing it again reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corrstats::CorrelationReport;
use crate::error::{Error, Result};
use crate::linsys::{
    design_bessel, tabulated_response, ChainConfig, Extrapolation, FrequencyResponse, OpticalChain,
    PhaseMode, TablePoint,
};
use crate::phasemap::PhaseWindow;
use crate::sourcesim::{GainSwitchConfig, StokesVector, VisibilityResult};
use crate::waveform::{NominalPattern, Symbol, Waveform};

/// Relative tolerance on each time step against the median step.
pub const SAMPLING_JITTER_TOLERANCE: f64 = 1e-3;
/// Stokes rows within this norm deviation are rescaled, others rejected.
pub const STOKES_RENORMALIZE_TOLERANCE: f64 = 1e-3;

/// Formats with 9 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds to the value that [`fmt_num`] would write.
pub fn round_sig9(x: f64) -> f64 {
    fmt_num(x).parse().unwrap_or(x)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

/// Header plus typed rows, each tagged with its 1-based file line.
struct CsvRows {
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_csv(source: impl Read, path: &Path) -> Result<CsvRows> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let header = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect::<Vec<_>>();
    if header.iter().all(|h| h.is_empty()) {
        return Err(parse_err(path, 1, "missing header row"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(CsvRows { header, rows })
}

impl CsvRows {
    fn column(&self, name: &str, path: &Path) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            parse_err(
                path,
                1,
                format!(
                    "missing column `{name}` (header: {})",
                    self.header.join(",")
                ),
            )
        })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

fn field_f64(rec: &csv::StringRecord, idx: usize, line: u64, path: &Path) -> Result<f64> {
    let raw = rec.get(idx).unwrap_or("");
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse `{raw}` as a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{raw}`")));
    }
    Ok(v)
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- traces

/// Column names and value units of a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSchema {
    pub time_col: String,
    pub value_col: String,
    pub units: String,
}

impl Default for TraceSchema {
    fn default() -> Self {
        Self {
            time_col: "time_s".into(),
            value_col: "value".into(),
            units: "V".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedTrace {
    pub waveform: Waveform,
    pub units: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Reads a uniformly sampled trace. The sample rate is the mean rate over the
/// whole record rounded to 9 significant digits; every step must lie within
/// 0.1% of the median step.
pub fn read_trace_csv(path: &Path, schema: &TraceSchema) -> Result<RecordedTrace> {
    let table = read_csv(open(path)?, path)?;
    let tc = table.column(&schema.time_col, path)?;
    let vc = table.column(&schema.value_col, path)?;
    if table.rows.len() < 2 {
        return Err(parse_err(
            path,
            2,
            format!("need at least 2 data rows, found {}", table.rows.len()),
        ));
    }
    let mut times = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        times.push(field_f64(rec, tc, *line, path)?);
        values.push(field_f64(rec, vc, *line, path)?);
    }
    let steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(steps.clone());
    if !(med > 0.0) {
        return Err(parse_err(path, 2, "time column is not increasing"));
    }
    for (i, dt) in steps.iter().enumerate() {
        if ((dt - med) / med).abs() > SAMPLING_JITTER_TOLERANCE {
            let line = table.rows[i + 1].0;
            return Err(parse_err(
                path,
                line,
                format!("non-uniform sampling: step {dt:e} s vs median {med:e} s"),
            ));
        }
    }
    let span = times[times.len() - 1] - times[0];
    let rate = round_sig9((times.len() - 1) as f64 / span);
    Ok(RecordedTrace {
        waveform: Waveform::new(values, rate, times[0])?,
        units: schema.units.clone(),
    })
}

pub fn write_trace_csv(path: &Path, wf: &Waveform, schema: &TraceSchema) -> Result<()> {
    let fs = wf.sample_rate();
    let t0 = wf.t0();
    write_csv(
        path,
        &[&schema.time_col, &schema.value_col],
        wf.samples()
            .iter()
            .enumerate()
            .map(|(i, &x)| vec![fmt_num(t0 + i as f64 / fs), fmt_num(x)]),
    )
}

// ---------------------------------------------------------------- response tables

/// Parses `f_hz,mag_db[,phase_deg]` rows. Frequencies must be strictly
/// ascending; the phase column is all-or-nothing.
pub fn parse_response_table(source: impl Read, path: &Path) -> Result<Vec<TablePoint>> {
    let table = read_csv(source, path)?;
    let fc = table.column("f_hz", path)?;
    let mc = table.column("mag_db", path)?;
    let pc = table.optional_column("phase_deg");
    let mut points: Vec<TablePoint> = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let f_hz = field_f64(rec, fc, *line, path)?;
        let mag_db = field_f64(rec, mc, *line, path)?;
        let phase_deg = pc.map(|c| field_f64(rec, c, *line, path)).transpose()?;
        if let Some(prev) = points.last() {
            if f_hz == prev.f_hz {
                return Err(parse_err(
                    path,
                    *line,
                    format!("duplicate frequency {f_hz:e} Hz"),
                ));
            }
            if f_hz < prev.f_hz {
                return Err(parse_err(
                    path,
                    *line,
                    format!("frequency {f_hz:e} Hz out of ascending order"),
                ));
            }
        }
        points.push(TablePoint {
            f_hz,
            mag_db,
            phase_deg,
        });
    }
    if points.len() < 2 {
        return Err(parse_err(
            path,
            2,
            format!("need at least 2 table rows, found {}", points.len()),
        ));
    }
    Ok(points)
}

pub fn read_response_table(path: &Path) -> Result<Vec<TablePoint>> {
    parse_response_table(open(path)?, path)
}

pub fn write_response_table(path: &Path, points: &[TablePoint]) -> Result<()> {
    let with_phase = points.iter().all(|p| p.phase_deg.is_some());
    let header: &[&str] = if with_phase {
        &["f_hz", "mag_db", "phase_deg"]
    } else {
        &["f_hz", "mag_db"]
    };
    write_csv(
        path,
        header,
        points.iter().map(|p| {
            let mut row = vec![fmt_num(p.f_hz), fmt_num(p.mag_db)];
            if with_phase {
                row.push(fmt_num(p.phase_deg.unwrap_or_default()));
            }
            row
        }),
    )
}

// ---------------------------------------------------------------- polarimeter logs

#[derive(Debug, Clone, PartialEq)]
pub struct PolarimeterLog {
    pub entries: Vec<(f64, StokesVector)>,
    /// File lines whose vector was rescaled onto the unit sphere.
    pub renormalized_lines: Vec<u64>,
}

/// Reads `timestamp_s,s1,s2,s3` rows with strictly increasing timestamps.
pub fn read_polarimeter_log(path: &Path) -> Result<PolarimeterLog> {
    let table = read_csv(open(path)?, path)?;
    let cols = ["timestamp_s", "s1", "s2", "s3"]
        .map(|c| table.column(c, path))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 2, "polarimeter log has no rows"));
    }
    let mut log = PolarimeterLog {
        entries: Vec::with_capacity(table.rows.len()),
        renormalized_lines: Vec::new(),
    };
    for (line, rec) in &table.rows {
        let v = cols
            .iter()
            .map(|&c| field_f64(rec, c, *line, path))
            .collect::<Result<Vec<_>>>()?;
        if let Some((t_prev, _)) = log.entries.last() {
            if v[0] <= *t_prev {
                return Err(parse_err(
                    path,
                    *line,
                    format!("timestamp {} not after {}", v[0], t_prev),
                ));
            }
        }
        let norm = (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        let s = StokesVector::renormalized(v[1], v[2], v[3], STOKES_RENORMALIZE_TOLERANCE)
            .map_err(|_| {
                parse_err(
                    path,
                    *line,
                    format!("Stokes norm {norm} deviates from 1 by more than 1e-3"),
                )
            })?;
        if (norm - 1.0).abs() > crate::sourcesim::STOKES_NORM_TOLERANCE {
            log.renormalized_lines.push(*line);
        }
        log.entries.push((v[0], s));
    }
    Ok(log)
}

pub fn write_polarimeter_log(path: &Path, entries: &[(f64, StokesVector)]) -> Result<()> {
    write_csv(
        path,
        &["timestamp_s", "s1", "s2", "s3"],
        entries.iter().map(|(t, s)| {
            let [a, b, c] = s.components();
            vec![fmt_num(*t), fmt_num(a), fmt_num(b), fmt_num(c)]
        }),
    )
}

// ---------------------------------------------------------------- patterns

pub fn write_pattern_csv(path: &Path, pattern: &NominalPattern) -> Result<()> {
    write_csv(
        path,
        &["slot", "symbol"],
        pattern
            .symbols
            .iter()
            .enumerate()
            .map(|(k, s)| vec![k.to_string(), s.to_string()]),
    )
}

/// Reads `slot,symbol` rows; slots must run 0, 1, 2, ...
pub fn read_pattern_csv(path: &Path, seed: u64) -> Result<NominalPattern> {
    let table = read_csv(open(path)?, path)?;
    let sc = table.column("slot", path)?;
    let yc = table.column("symbol", path)?;
    let mut symbols = Vec::with_capacity(table.rows.len());
    for (k, (line, rec)) in table.rows.iter().enumerate() {
        let slot = rec.get(sc).unwrap_or("");
        if slot.parse::<usize>().ok() != Some(k) {
            return Err(parse_err(
                path,
                *line,
                format!("expected slot {k}, found `{slot}`"),
            ));
        }
        let sym = rec.get(yc).unwrap_or("");
        symbols.push(
            sym.parse::<Symbol>()
                .map_err(|_| parse_err(path, *line, format!("unknown symbol `{sym}`")))?,
        );
    }
    if symbols.is_empty() {
        return Err(parse_err(path, 2, "pattern has no slots"));
    }
    Ok(NominalPattern { symbols, seed })
}

// ---------------------------------------------------------------- run configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    PhaseCharacterization,
    SelectionCharacterization,
    SourceModel,
}

/// Where a stage sits relative to the modulator's optical transfer. Only
/// selection runs distinguish the two; phase runs treat the chain as linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageDomain {
    #[default]
    Electrical,
    Optical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModeSpec {
    #[default]
    Measured,
    IdealLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationSpec {
    Hold,
    #[default]
    Rolloff,
}

fn default_rolloff() -> f64 {
    6.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageSpec {
    Identity {
        #[serde(default)]
        domain: StageDomain,
    },
    IdealDelay {
        delay_s: f64,
        #[serde(default)]
        domain: StageDomain,
    },
    Bessel {
        order: usize,
        cutoff_hz: f64,
        #[serde(default)]
        domain: StageDomain,
    },
    Tabulated {
        /// Table file, relative to the config file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<PathBuf>,
        /// Name of a built-in table.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<String>,
        #[serde(default)]
        phase_mode: PhaseModeSpec,
        #[serde(default)]
        group_delay_s: f64,
        #[serde(default)]
        extrapolation: ExtrapolationSpec,
        #[serde(default = "default_rolloff")]
        rolloff_db_per_octave: f64,
        #[serde(default)]
        domain: StageDomain,
    },
}

impl fmt::Display for StageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let domain = match self.domain() {
            StageDomain::Electrical => "electrical",
            StageDomain::Optical => "optical",
        };
        match self {
            StageSpec::Identity { .. } => write!(f, "identity ({domain})"),
            StageSpec::IdealDelay { delay_s, .. } => {
                write!(f, "ideal delay {} s ({domain})", fmt_num(*delay_s))
            }
            StageSpec::Bessel {
                order, cutoff_hz, ..
            } => write!(
                f,
                "bessel order {order}, -3 dB at {} Hz ({domain})",
                fmt_num(*cutoff_hz)
            ),
            StageSpec::Tabulated {
                table,
                preset,
                phase_mode,
                group_delay_s,
                extrapolation,
                rolloff_db_per_octave,
                ..
            } => {
                match (table, preset) {
                    (Some(t), _) => write!(f, "table {}", t.display())?,
                    (None, Some(p)) => write!(f, "preset {p}")?,
                    (None, None) => write!(f, "table ?")?,
                }
                match phase_mode {
                    PhaseModeSpec::Measured => write!(f, ", measured phase")?,
                    PhaseModeSpec::IdealLinear => {
                        write!(f, ", linear phase with {} s delay", fmt_num(*group_delay_s))?
                    }
                }
                match extrapolation {
                    ExtrapolationSpec::Hold => write!(f, ", hold beyond table")?,
                    ExtrapolationSpec::Rolloff => write!(
                        f,
                        ", {} dB/octave beyond table",
                        fmt_num(*rolloff_db_per_octave)
                    )?,
                }
                write!(f, " ({domain})")
            }
        }
    }
}

impl StageSpec {
    pub fn domain(&self) -> StageDomain {
        match self {
            StageSpec::Identity { domain }
            | StageSpec::IdealDelay { domain, .. }
            | StageSpec::Bessel { domain, .. }
            | StageSpec::Tabulated { domain, .. } => *domain,
        }
    }

    /// Builds the response; relative table paths resolve against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<FrequencyResponse> {
        match self {
            StageSpec::Identity { .. } => Ok(FrequencyResponse::Identity),
            StageSpec::IdealDelay { delay_s, .. } => {
                if !delay_s.is_finite() {
                    return Err(Error::Config("delay_s must be finite".into()));
                }
                Ok(FrequencyResponse::IdealDelay { delay_s: *delay_s })
            }
            StageSpec::Bessel {
                order, cutoff_hz, ..
            } => design_bessel(*order, *cutoff_hz),
            StageSpec::Tabulated {
                table,
                preset,
                phase_mode,
                group_delay_s,
                extrapolation,
                rolloff_db_per_octave,
                ..
            } => {
                let points = match (table, preset) {
                    (Some(t), None) => read_response_table(&base_dir.join(t))?,
                    (None, Some(name)) => crate::presets::response_table(name)?,
                    _ => {
                        return Err(Error::Config(
                            "a tabulated stage needs exactly one of `table` or `preset`".into(),
                        ))
                    }
                };
                let mode = match phase_mode {
                    PhaseModeSpec::Measured => PhaseMode::Measured,
                    PhaseModeSpec::IdealLinear => PhaseMode::IdealLinear {
                        group_delay_s: *group_delay_s,
                    },
                };
                let extrap = match extrapolation {
                    ExtrapolationSpec::Hold => Extrapolation::Hold,
                    ExtrapolationSpec::Rolloff => {
                        Extrapolation::RolloffDbPerOctave(*rolloff_db_per_octave)
                    }
                };
                tabulated_response(points, mode, extrap)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSpec {
    /// Rate at which drive waveforms are synthesized and filtered.
    pub drive_sample_rate: f64,
    /// Digitizer rate; must divide `drive_sample_rate`.
    pub output_sample_rate: f64,
    pub stages: Vec<StageSpec>,
}

impl Default for ChainSpec {
    fn default() -> Self {
        crate::presets::default_chain()
    }
}

/// Resolved chain in both forms used by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedChain {
    /// All stages as one linear system (phase runs).
    pub linear: ChainConfig,
    /// Electrical stages, modulator, optical stages (selection runs); the drive
    /// gain is uncalibrated.
    pub optical: OpticalChain,
    pub drive_sample_rate: f64,
}

impl ChainSpec {
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedChain> {
        if self.stages.is_empty() {
            return Err(Error::Config("chain.stages must not be empty".into()));
        }
        if !(self.drive_sample_rate > 0.0 && self.output_sample_rate > 0.0) {
            return Err(Error::Config("chain sample rates must be positive".into()));
        }
        let mut all = Vec::new();
        let mut electrical = Vec::new();
        let mut optical = Vec::new();
        for s in &self.stages {
            let r = s.resolve(base_dir)?;
            match s.domain() {
                StageDomain::Electrical => electrical.push(r.clone()),
                StageDomain::Optical => optical.push(r.clone()),
            }
            all.push(r);
        }
        if electrical.is_empty() {
            electrical.push(FrequencyResponse::Identity);
        }
        if optical.is_empty() {
            optical.push(FrequencyResponse::Identity);
        }
        Ok(ResolvedChain {
            linear: ChainConfig {
                stages: all,
                output_sample_rate: self.output_sample_rate,
            },
            optical: OpticalChain {
                electrical,
                detector: optical,
                drive_gain: 1.0,
                output_sample_rate: self.output_sample_rate,
            },
            drive_sample_rate: self.drive_sample_rate,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSpec {
    CenterSample,
    #[default]
    CenterMean50,
}

impl From<WindowSpec> for PhaseWindow {
    fn from(w: WindowSpec) -> Self {
        match w {
            WindowSpec::CenterSample => PhaseWindow::CenterSample,
            WindowSpec::CenterMean50 => PhaseWindow::CenterMean50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub n_max: usize,
    pub l_max: u32,
    /// Detector dark level subtracted before normalization.
    pub dc_offset: f64,
    pub window: WindowSpec,
    /// Fixed slot alignment in seconds; estimated per trace when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment_offset_s: Option<f64>,
    pub alignment_confidence: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            n_max: 15,
            l_max: 7,
            dc_offset: 0.0,
            window: WindowSpec::default(),
            alignment_offset_s: None,
            alignment_confidence: crate::phasemap::DEFAULT_ALIGNMENT_CONFIDENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub i_min: f64,
    pub i_max: f64,
    pub i_threshold: f64,
    pub i_scale: f64,
    pub jitter_sigma: f64,
    /// Pulses per simulated phase sequence.
    pub n_pulses: usize,
    pub imbalance_slots: usize,
    /// Odd counts put a grid point exactly at pi.
    pub grid_points: usize,
    /// Gaussian noise per power reading; 0 disables it.
    pub readout_sigma: f64,
    pub readings_per_point: usize,
    /// Extra minimum currents to scan for a visibility-vs-current table.
    #[serde(default)]
    pub i_min_sweep: Vec<f64>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        let g = GainSwitchConfig::default();
        Self {
            i_min: g.i_min,
            i_max: g.i_max,
            i_threshold: g.i_threshold,
            i_scale: g.i_scale,
            jitter_sigma: g.jitter_sigma,
            n_pulses: 1_000_000,
            imbalance_slots: 1,
            grid_points: 65,
            readout_sigma: 0.0,
            readings_per_point: 1,
            i_min_sweep: Vec::new(),
        }
    }
}

impl SourceConfig {
    pub fn gain_switch(&self, i_min: f64, seed: u64) -> GainSwitchConfig {
        GainSwitchConfig {
            i_min,
            i_max: self.i_max,
            i_threshold: self.i_threshold,
            i_scale: self.i_scale,
            jitter_sigma: self.jitter_sigma,
            seed,
        }
    }
}

/// How drive patterns are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Independent uniform symbols (phase runs) or uniform gaps (selection runs).
    #[default]
    Random,
    /// Cyclic de Bruijn sequence; `pattern_length` must be a power of the
    /// alphabet size. Every symbol context up to that order is balanced.
    DeBruijn,
}

impl PatternKind {
    fn is_random(&self) -> bool {
        *self == PatternKind::Random
    }
}

fn default_rep_rate() -> f64 {
    1e9
}

fn default_n_traces() -> usize {
    150
}

fn default_pulse_width() -> f64 {
    200e-12
}

fn default_pattern_length() -> usize {
    100
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

/// Run configuration (TOML). Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default = "default_rep_rate")]
    pub rep_rate: f64,
    #[serde(default = "default_pulse_width")]
    pub pulse_width: f64,
    #[serde(default = "default_n_traces")]
    pub n_traces: usize,
    #[serde(default = "default_pattern_length")]
    pub pattern_length: usize,
    #[serde(default, skip_serializing_if = "PatternKind::is_random")]
    pub pattern_kind: PatternKind,
    /// One seed per trace, or a single base seed from which per-trace seeds
    /// are derived.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Longest gap (slots) between ON pulses in selection runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spacing: Option<usize>,
    /// Scope averaging count of ingested data; metadata only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaging: Option<u32>,
    #[serde(default)]
    pub chain: ChainSpec,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub source: SourceConfig,
}

impl RunConfig {
    pub fn new(mode: RunMode, rep_rate: f64, n_traces: usize) -> Self {
        Self {
            mode,
            rep_rate,
            pulse_width: default_pulse_width(),
            n_traces,
            pattern_length: default_pattern_length(),
            pattern_kind: PatternKind::Random,
            seeds: default_seeds(),
            max_spacing: None,
            averaging: None,
            chain: ChainSpec::default(),
            analysis: AnalysisConfig::default(),
            source: SourceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.rep_rate > 0.0 && self.rep_rate.is_finite()) {
            return bad(format!("rep_rate must be positive, got {}", self.rep_rate));
        }
        if !(self.pulse_width > 0.0 && self.pulse_width < 1.0 / self.rep_rate) {
            return bad(format!(
                "pulse_width {} s must be positive and shorter than the {} s slot",
                self.pulse_width,
                1.0 / self.rep_rate
            ));
        }
        if self.n_traces < 1 {
            return bad("n_traces must be at least 1".into());
        }
        if self.pattern_length < 2 {
            return bad(format!(
                "pattern_length must be at least 2, got {}",
                self.pattern_length
            ));
        }
        if !(self.seeds.len() == 1 || self.seeds.len() == self.n_traces) {
            return bad(format!(
                "seeds must hold 1 base seed or one per trace ({}), got {}",
                self.n_traces,
                self.seeds.len()
            ));
        }
        if self.pattern_kind == PatternKind::DeBruijn && self.de_bruijn_order().is_none() {
            return bad(format!(
                "pattern_length {} is not a power of the alphabet size for a de Bruijn pattern",
                self.pattern_length
            ));
        }
        if self.max_spacing == Some(0) {
            return bad("max_spacing must be at least 1".into());
        }
        if self.analysis.n_max < 1 || self.analysis.l_max < 1 {
            return bad("analysis.n_max and analysis.l_max must be at least 1".into());
        }
        let ratio = self.chain.drive_sample_rate / self.chain.output_sample_rate;
        if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
            return bad(format!(
                "chain.output_sample_rate {} must divide chain.drive_sample_rate {}",
                self.chain.output_sample_rate, self.chain.drive_sample_rate
            ));
        }
        if self.mode == RunMode::SourceModel {
            let s = &self.source;
            self.source.gain_switch(s.i_min, 0).validate()?;
            for &i in &s.i_min_sweep {
                self.source.gain_switch(i, 0).validate()?;
            }
            if s.imbalance_slots < 1 || s.n_pulses <= s.imbalance_slots {
                return bad("source.n_pulses must exceed source.imbalance_slots >= 1".into());
            }
            if s.grid_points < 16 {
                return bad("source.grid_points must be at least 16".into());
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &'static [Symbol] {
        match self.mode {
            RunMode::SelectionCharacterization => &Symbol::SELECTION,
            _ => &Symbol::PHASES,
        }
    }

    /// Order of the de Bruijn pattern with `pattern_length` symbols.
    pub fn de_bruijn_order(&self) -> Option<usize> {
        let k = self.alphabet().len();
        let mut len = 1;
        for order in 1..=24 {
            len *= k;
            if len == self.pattern_length {
                return Some(order);
            }
            if len > self.pattern_length {
                break;
            }
        }
        None
    }

    /// Seed for each trace, in trace order.
    pub fn trace_seeds(&self) -> Vec<u64> {
        use rand::{RngCore, SeedableRng};
        if self.seeds.len() == self.n_traces {
            return self.seeds.clone();
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seeds[0]);
        (0..self.n_traces).map(|_| rng.next_u64()).collect()
    }

    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for (k, v) in overrides {
            apply_override(&mut table, k, v)?;
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Sets a dotted `key` to `raw`, parsed as a TOML value when possible and as a
/// bare string otherwise.
pub fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

// ---------------------------------------------------------------- reports

/// A named table of text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column; empty cells become `None`.
    pub fn f64_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self
            .column(name)
            .ok_or_else(|| Error::Table(format!("table `{}` has no column `{name}`", self.name)))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r.get(c).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse().map(Some).map_err(|_| {
                        Error::Table(format!("table `{}`: bad number `{cell}`", self.name))
                    })
                }
            })
            .collect()
    }
}

/// Anything the analysis verbs write.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    /// One or more repetition rates of the same analysis.
    Correlation(Vec<CorrelationReport>),
    Visibility {
        scan: VisibilityResult,
        /// `(i_min mA, survival probability, visibility)`.
        sweep: Vec<(f64, f64, f64)>,
    },
    Drift {
        series: Vec<(f64, f64)>,
        threshold: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    /// One CSV file per table.
    #[default]
    TabularText,
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Tables of a report in a fixed order; empty tables are omitted.
pub fn report_tables(report: &Report) -> Vec<Table> {
    let mut out = Vec::new();
    match report {
        Report::Correlation(reports) => {
            let mut per_case = Table::new(
                "per_case",
                &[
                    "rep_rate_hz",
                    "lag",
                    "cur",
                    "prev",
                    "count",
                    "mean_phi_rad",
                    "std_phi_rad",
                ],
            );
            let mut deviation = Table::new(
                "deviation",
                &["rep_rate_hz", "lag", "cur", "prev", "deviation_rad"],
            );
            let mut max_dev = Table::new(
                "max_deviation",
                &[
                    "rep_rate_hz",
                    "n",
                    "max_deviation_rad",
                    "max_deviation_over_pi",
                    "stderr_rad",
                ],
            );
            let mut spacing = Table::new(
                "intensity_by_spacing",
                &[
                    "rep_rate_hz",
                    "spacing_ns",
                    "mean",
                    "std",
                    "normalized",
                    "count",
                ],
            );
            let mut eps = Table::new("epsilon", &["rep_rate_hz", "group_a", "group_b", "epsilon"]);
            let mut eps_max = Table::new("epsilon_max", &["rep_rate_hz", "group", "max_epsilon"]);
            let mut sorted: Vec<&CorrelationReport> = reports.iter().collect();
            sorted.sort_by(|a, b| a.rep_rate.total_cmp(&b.rep_rate));
            for r in sorted {
                let rate = fmt_num(r.rep_rate);
                for s in &r.per_case {
                    per_case.rows.push(vec![
                        rate.clone(),
                        s.key.lag.to_string(),
                        s.key.cur.to_string(),
                        s.key.prev.to_string(),
                        s.count.to_string(),
                        opt(s.mean_phi),
                        opt(s.std_phi),
                    ]);
                }
                for (k, d) in &r.deviation {
                    deviation.rows.push(vec![
                        rate.clone(),
                        k.lag.to_string(),
                        k.cur.to_string(),
                        k.prev.to_string(),
                        fmt_num(*d),
                    ]);
                }
                let stderr = r.max_deviation_stderr();
                for (n, d) in &r.max_deviation_per_n {
                    max_dev.rows.push(vec![
                        rate.clone(),
                        n.to_string(),
                        fmt_num(*d),
                        fmt_num(d / std::f64::consts::PI),
                        opt(stderr.get(n).copied()),
                    ]);
                }
                for row in &r.intensity_by_spacing {
                    spacing.rows.push(vec![
                        rate.clone(),
                        row.spacing_ns.to_string(),
                        opt(row.mean),
                        opt(row.std),
                        opt(row.normalized_mean),
                        row.count.to_string(),
                    ]);
                }
                for ((a, b), e) in &r.epsilon_pairs {
                    eps.rows
                        .push(vec![rate.clone(), a.clone(), b.clone(), fmt_num(*e)]);
                }
                for (g, e) in crate::corrstats::max_epsilon_per_group(&r.epsilon_pairs) {
                    eps_max.rows.push(vec![rate.clone(), g, fmt_num(e)]);
                }
            }
            out.extend([per_case, deviation, max_dev, spacing, eps, eps_max]);
        }
        Report::Visibility { scan, sweep } => {
            let mut fringe = Table::new("fringe", &["delta_phi_rad", "intensity", "intensity_std"]);
            let std = scan.intensity_std.as_ref();
            for (i, (d, v)) in scan.delta_phi_grid.iter().zip(&scan.intensity).enumerate() {
                fringe
                    .rows
                    .push(vec![fmt_num(*d), fmt_num(*v), opt(std.map(|s| s[i]))]);
            }
            let mut summary = Table::new("visibility", &["i_max_obs", "i_min_obs", "visibility"]);
            summary.rows.push(vec![
                fmt_num(scan.i_max_obs),
                fmt_num(scan.i_min_obs),
                fmt_num(scan.visibility),
            ]);
            let mut sw = Table::new(
                "visibility_sweep",
                &["i_min_ma", "survival_probability", "visibility"],
            );
            let mut sweep = sweep.clone();
            sweep.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (i, p, v) in sweep {
                sw.rows.push(vec![fmt_num(i), fmt_num(p), fmt_num(v)]);
            }
            out.extend([fringe, summary, sw]);
        }
        Report::Drift { series, threshold } => {
            let mut t = Table::new("drift", &["timestamp_s", "angle_rad", "angle_over_pi"]);
            for (ts, a) in series {
                t.rows.push(vec![
                    fmt_num(*ts),
                    fmt_num(*a),
                    fmt_num(a / std::f64::consts::PI),
                ]);
            }
            let v = crate::sourcesim::drift_verdict(series, *threshold);
            let mut s = Table::new(
                "drift_summary",
                &["max_angle_rad", "threshold_rad", "within_threshold"],
            );
            s.rows.push(vec![
                fmt_num(v.max_angle),
                fmt_num(v.threshold),
                v.within.to_string(),
            ]);
            out.extend([t, s]);
        }
    }
    out.retain(|t| !t.rows.is_empty());
    out
}

/// Writes each table to `<dir>/<stem>.<table>.csv` and returns the paths.
pub fn write_report(
    report: &Report,
    dir: &Path,
    stem: &str,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    let ReportFormat::TabularText = format;
    let tables = report_tables(report);
    if tables.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut paths = Vec::new();
    for t in &tables {
        let path = dir.join(format!("{stem}.{}.csv", t.name));
        write_table(&path, t)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    write_csv(path, &header, table.rows.iter().cloned())
}

/// Reads a report table; the table name is taken from `<stem>.<name>.csv`.
pub fn read_table(path: &Path) -> Result<Table> {
    let csv = read_csv(open(path)?, path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.rsplit('.').next())
        .unwrap_or("")
        .to_string();
    Ok(Table {
        name,
        header: csv.header,
        rows: csv
            .rows
            .into_iter()
            .map(|(_, r)| r.iter().map(str::to_owned).collect())
            .collect(),
    })
}

/// Max-deviation curves per repetition rate from a `max_deviation` table.
pub fn max_deviation_curves(table: &Table) -> Result<BTreeMap<u64, BTreeMap<usize, f64>>> {
    let rates = table.f64_column("rep_rate_hz")?;
    let ns = table.f64_column("n")?;
    let devs = table.f64_column("max_deviation_rad")?;
    let mut out: BTreeMap<u64, BTreeMap<usize, f64>> = BTreeMap::new();
    for ((r, n), d) in rates.into_iter().zip(ns).zip(devs) {
        let (Some(r), Some(n), Some(d)) = (r, n, d) else {
            return Err(Error::Table("max_deviation row with an empty cell".into()));
        };
        out.entry(r.round() as u64)
            .or_default()
            .insert(n as usize, d);
    }
    Ok(out)
}
