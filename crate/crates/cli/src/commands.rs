use std::fs;
use std::path::{Path, PathBuf};

use pathsel_core::ingest::{
    parse_override, read_pattern_csv, read_polarimeter_log, read_table, read_trace_csv,
    write_pattern_csv, write_report, write_trace_csv, Report, ReportFormat, RunConfig, RunMode,
    TraceSchema,
};
use pathsel_core::pipeline::{
    analyze_groups, analyze_intensity, analyze_phase, run_visibility, simulate, Signal,
};
use pathsel_core::plot::{plot_overlay, plot_table, PlotStyle};
use pathsel_core::sourcesim::{drift_series, DRIFT_THRESHOLD};
use pathsel_core::{NominalPattern, Waveform};

use crate::error::{CliError, Result};
use crate::manifest::{Manifest, OutputLock, TraceEntry, MANIFEST_FILE};
use crate::{Cli, SignalArg, Verb};

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.verb {
        Verb::Simulate => cmd_simulate(cli),
        Verb::AnalyzePhase { trace_dirs, signal } => {
            cmd_analyze(cli, trace_dirs, *signal, Analysis::Phase)
        }
        Verb::AnalyzeIntensity { trace_dirs } => {
            cmd_analyze(cli, trace_dirs, None, Analysis::Intensity)
        }
        Verb::Distinguishability { groups_dir } => cmd_distinguishability(cli, groups_dir),
        Verb::Visibility => cmd_visibility(cli),
        Verb::Drift { log, threshold } => cmd_drift(cli, log, *threshold),
        Verb::Plot { input, style } => cmd_plot(cli, input, style.as_deref()),
    }
}

fn toml_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Config file (or `base` when no file is given), then `pre`, then the
/// user's overrides and flags.
fn load_config(
    cli: &Cli,
    base: Option<&RunConfig>,
    pre: Vec<(String, String)>,
) -> Result<(RunConfig, PathBuf)> {
    let (text, base_dir) = match (&cli.config, base) {
        (Some(path), _) => (
            fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        (None, Some(cfg)) => (cfg.to_toml_string()?, PathBuf::from(".")),
        (None, None) => (String::new(), PathBuf::from(".")),
    };
    let mut overrides = pre;
    for o in &cli.overrides {
        overrides.push(parse_override(o)?);
    }
    if let Some(r) = cli.rep_rate {
        overrides.push(("rep_rate".into(), toml_f64(r)));
    }
    if let Some(n) = cli.n_traces {
        overrides.push(("n_traces".into(), n.to_string()));
    }
    if !cli.seed.is_empty() {
        let list: Vec<String> = cli.seed.iter().map(u64::to_string).collect();
        overrides.push(("seeds".into(), format!("[{}]", list.join(", "))));
    }
    let cfg = RunConfig::from_toml_str(&text, &overrides).map_err(|e| match (&cli.config, e) {
        (Some(p), pathsel_core::Error::Config(m)) => {
            pathsel_core::Error::Config(format!("{}: {m}", p.display()))
        }
        (_, e) => e,
    })?;
    let base_dir = if base_dir.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        base_dir
    };
    Ok((cfg, base_dir))
}

fn cmd_simulate(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (cfg, base_dir) = load_config(cli, None, Vec::new())?;
    if cfg.mode == RunMode::SourceModel {
        return Err(CliError::Input(
            "source_model runs have no traces to simulate; use `pathsel visibility`".into(),
        ));
    }
    let batch = simulate(&cfg, &base_dir)?;
    let _lock = OutputLock::acquire(&cli.out)?;
    let schema = batch.signal.schema();
    let mut manifest = Manifest::new("simulate", &cfg);
    manifest.signal = Some(batch.signal);
    manifest.schema = Some(schema.clone());
    if let Some(c) = &cli.config {
        manifest.inputs.push(c.display().to_string());
    }
    let mut written = Vec::new();
    for (i, (trace, pattern)) in batch.traces.iter().zip(&batch.patterns).enumerate() {
        let file = format!("trace_{i:04}.csv");
        let pfile = format!("trace_{i:04}.pattern.csv");
        write_trace_csv(&cli.out.join(&file), trace, &schema)?;
        write_pattern_csv(&cli.out.join(&pfile), pattern)?;
        manifest.traces.push(TraceEntry {
            file: file.clone(),
            pattern: pfile.clone(),
            seed: pattern.seed,
        });
        manifest.outputs.extend([file, pfile]);
    }
    let mpath = cli.out.join(MANIFEST_FILE);
    manifest.write(&mpath)?;
    written.push(mpath);
    Ok(written)
}

/// Traces of one directory with their patterns.
struct TraceSet {
    traces: Vec<Waveform>,
    patterns: Vec<NominalPattern>,
    signal: Option<Signal>,
    manifest: Option<Manifest>,
}

fn list_csv(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension().is_some_and(|x| x == "csv")
                && !p.to_string_lossy().ends_with(".pattern.csv")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn load_trace_dir(dir: &Path, need_patterns: bool) -> Result<TraceSet> {
    let mpath = dir.join(MANIFEST_FILE);
    if mpath.is_file() {
        let m = Manifest::read(&mpath)?;
        if m.traces.is_empty() {
            return Err(CliError::Input(format!(
                "{}: manifest lists no traces",
                mpath.display()
            )));
        }
        let schema = m.schema.clone().unwrap_or_default();
        let mut traces = Vec::new();
        let mut patterns = Vec::new();
        for t in &m.traces {
            traces.push(read_trace_csv(&dir.join(&t.file), &schema)?.waveform);
            let p = dir.join(&t.pattern);
            if !p.is_file() {
                return Err(CliError::Input(format!(
                    "missing pattern metadata {}",
                    p.display()
                )));
            }
            patterns.push(read_pattern_csv(&p, t.seed)?);
        }
        return Ok(TraceSet {
            traces,
            patterns,
            signal: m.signal,
            manifest: Some(m),
        });
    }
    let files = list_csv(dir)?;
    if files.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no trace files",
            dir.display()
        )));
    }
    let schema = TraceSchema::default();
    let mut traces = Vec::new();
    let mut patterns = Vec::new();
    for f in files {
        if need_patterns {
            let p = f.with_extension("pattern.csv");
            if !p.is_file() {
                return Err(CliError::Input(format!(
                    "missing pattern metadata for {}: expected {}",
                    f.display(),
                    p.display()
                )));
            }
            patterns.push(read_pattern_csv(&p, 0)?);
        }
        traces.push(read_trace_csv(&f, &schema)?.waveform);
    }
    Ok(TraceSet {
        traces,
        patterns,
        signal: None,
        manifest: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Analysis {
    Phase,
    Intensity,
}

fn cmd_analyze(
    cli: &Cli,
    dirs: &[PathBuf],
    signal: Option<SignalArg>,
    kind: Analysis,
) -> Result<Vec<PathBuf>> {
    let mut reports = Vec::new();
    let mut first_cfg = None;
    for dir in dirs {
        let set = load_trace_dir(dir, true)?;
        let pre = match &set.manifest {
            Some(m) if cli.config.is_some() => vec![
                ("rep_rate".to_string(), toml_f64(m.config.rep_rate)),
                ("pulse_width".to_string(), toml_f64(m.config.pulse_width)),
            ],
            _ => Vec::new(),
        };
        let (cfg, _) = load_config(cli, set.manifest.as_ref().map(|m| &m.config), pre)?;
        let report = match kind {
            Analysis::Phase => {
                let signal = match (signal, set.signal) {
                    (Some(SignalArg::Amplitude), _) => Signal::PhaseAmplitude,
                    (Some(SignalArg::Intensity), _) => Signal::Intensity,
                    (None, Some(s)) => s,
                    (None, None) => Signal::Intensity,
                };
                analyze_phase(
                    &set.traces,
                    &set.patterns,
                    signal,
                    cfg.rep_rate,
                    cfg.pulse_width,
                    &cfg.analysis,
                )?
            }
            Analysis::Intensity => {
                analyze_intensity(&set.traces, &set.patterns, cfg.rep_rate, &cfg.analysis)?
            }
        };
        if reports
            .iter()
            .any(|r: &pathsel_core::corrstats::CorrelationReport| r.rep_rate == report.rep_rate)
        {
            return Err(CliError::Input(format!(
                "{}: repetition rate {} Hz already analyzed in this run",
                dir.display(),
                report.rep_rate
            )));
        }
        reports.push(report);
        first_cfg.get_or_insert(cfg);
    }
    let (stem, verb) = match kind {
        Analysis::Phase => ("phase", "analyze-phase"),
        Analysis::Intensity => ("intensity", "analyze-intensity"),
    };
    let inputs = dirs.iter().map(|d| d.display().to_string()).collect();
    finish_report(
        cli,
        &Report::Correlation(reports),
        stem,
        verb,
        inputs,
        &first_cfg.unwrap(),
    )
}

/// Writes the report tables and `<stem>.manifest.toml`.
fn finish_report(
    cli: &Cli,
    report: &Report,
    stem: &str,
    verb: &str,
    mut inputs: Vec<String>,
    cfg: &RunConfig,
) -> Result<Vec<PathBuf>> {
    let _lock = OutputLock::acquire(&cli.out)?;
    let mut written = write_report(report, &cli.out, stem, ReportFormat::TabularText)?;
    let mut manifest = Manifest::new(verb, cfg);
    if let Some(c) = &cli.config {
        inputs.insert(0, c.display().to_string());
    }
    manifest.inputs = inputs;
    manifest.outputs = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let mpath = cli.out.join(format!("{stem}.manifest.toml"));
    manifest.write(&mpath)?;
    written.push(mpath);
    Ok(written)
}

fn read_groups(dir: &Path) -> Result<Vec<(String, Vec<Waveform>)>> {
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut groups = Vec::new();
    for d in subdirs {
        let name = d.file_name().unwrap().to_string_lossy().into_owned();
        let set = load_trace_dir(&d, false)?;
        groups.push((name, set.traces));
    }
    if groups.len() < 2 {
        return Err(CliError::Input(format!(
            "{}: need at least two group subdirectories of traces",
            dir.display()
        )));
    }
    Ok(groups)
}

fn cmd_distinguishability(cli: &Cli, dir: &Path) -> Result<Vec<PathBuf>> {
    let (cfg, _) = load_config(cli, None, Vec::new())?;
    let groups = read_groups(dir)?;
    let report = analyze_groups(&groups, cfg.rep_rate)?;
    finish_report(
        cli,
        &Report::Correlation(vec![report]),
        "distinguishability",
        "distinguishability",
        vec![dir.display().to_string()],
        &cfg,
    )
}

fn cmd_visibility(cli: &Cli) -> Result<Vec<PathBuf>> {
    let pre = vec![("mode".to_string(), "\"source_model\"".to_string())];
    let (cfg, _) = load_config(cli, None, pre)?;
    let report = run_visibility(&cfg)?;
    finish_report(cli, &report, "visibility", "visibility", Vec::new(), &cfg)
}

fn cmd_drift(cli: &Cli, log: &Path, threshold: Option<f64>) -> Result<Vec<PathBuf>> {
    let (cfg, _) = load_config(cli, None, Vec::new())?;
    let parsed = read_polarimeter_log(log)?;
    if !parsed.renormalized_lines.is_empty() {
        eprintln!(
            "warning: {} Stokes vectors renormalized (lines {:?})",
            parsed.renormalized_lines.len(),
            parsed.renormalized_lines
        );
    }
    let threshold = threshold.unwrap_or(DRIFT_THRESHOLD);
    if !(threshold > 0.0) {
        return Err(CliError::Input(format!(
            "drift threshold must be positive, got {threshold}"
        )));
    }
    let series = drift_series(&parsed.entries)?;
    finish_report(
        cli,
        &Report::Drift { series, threshold },
        "drift",
        "drift",
        vec![log.display().to_string()],
        &cfg,
    )
}

fn cmd_plot(cli: &Cli, input: &Path, style: Option<&str>) -> Result<Vec<PathBuf>> {
    let style = style.map(PlotStyle::parse).transpose()?;
    let (svg, stem) = if input.is_dir() {
        if !matches!(style, None | Some(PlotStyle::Overlay)) {
            return Err(CliError::Input(
                "a directory input can only be drawn as an overlay".into(),
            ));
        }
        let groups = read_groups(input)?;
        let stem = input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "overlay".into());
        (plot_overlay(&groups)?, format!("{stem}.overlay"))
    } else {
        let table = read_table(input)?;
        let style = match style {
            Some(s) => s,
            None => PlotStyle::for_table(&table.name).ok_or_else(|| {
                CliError::Input(format!(
                    "{}: unrecognized report table `{}`; pass --style",
                    input.display(),
                    table.name
                ))
            })?,
        };
        let stem = input.file_stem().unwrap().to_string_lossy().into_owned();
        (plot_table(&table, style)?, stem)
    };
    let _lock = OutputLock::acquire(&cli.out)?;
    let path = cli.out.join(format!("{stem}.svg"));
    fs::write(&path, svg).map_err(|e| CliError::io(&path, e))?;
    Ok(vec![path])
}
