//! Behavioral model of the path-selection source: gain-switched pulse
//! phases, slow-detector interference in an unbalanced interferometer, fringe
//! visibility, polarization drift and per-path ON/OFF selection.
//!
//! The gain-switching law is phenomenological. A pulse inherits the phase of
//! its predecessor (plus Gaussian jitter) with survival probability
//! `p = exp(-(i_threshold - i_min) / i_scale)`, otherwise its phase is drawn
//! uniformly. `i_scale` is a per-device calibration constant.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::waveform::{NominalPattern, Symbol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSwitchConfig {
    /// Minimum drive current, mA.
    pub i_min: f64,
    /// Maximum drive current, mA.
    pub i_max: f64,
    /// Lasing threshold, mA.
    pub i_threshold: f64,
    /// Survival decay constant, mA.
    pub i_scale: f64,
    /// Phase jitter of an inherited seed, rad.
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl Default for GainSwitchConfig {
    fn default() -> Self {
        Self {
            i_min: 2.0,
            i_max: 25.0,
            i_threshold: 12.0,
            i_scale: 2.0,
            jitter_sigma: 0.1,
            seed: 0,
        }
    }
}

impl GainSwitchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.i_min < self.i_threshold && self.i_threshold < self.i_max) {
            return Err(Error::invalid(format!(
                "currents must satisfy i_min < i_threshold < i_max (got {}, {}, {})",
                self.i_min, self.i_threshold, self.i_max
            )));
        }
        if !(self.i_scale > 0.0) {
            return Err(Error::invalid("i_scale must be positive"));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::invalid("jitter sigma must be >= 0"));
        }
        Ok(())
    }

    pub fn survival_probability(&self) -> f64 {
        (-(self.i_threshold - self.i_min) / self.i_scale).exp()
    }
}

/// Pulse phases in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulsePhaseSequence {
    pub phases: Vec<f64>,
    pub seed: u64,
}

impl PulsePhaseSequence {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Phase sequence for an explicit survival probability.
pub fn phases_with_survival(
    p: f64,
    jitter_sigma: f64,
    seed: u64,
    n: usize,
) -> Result<PulsePhaseSequence> {
    if n == 0 {
        return Err(Error::invalid("need at least one pulse"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "survival probability {p} outside [0, 1]"
        )));
    }
    let jitter = Normal::new(0.0, jitter_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases = Vec::with_capacity(n);
    let mut prev = TAU * rng.random::<f64>();
    phases.push(wrap_phase(prev));
    for _ in 1..n {
        let u: f64 = rng.random();
        prev = if u < p {
            wrap_phase(prev + jitter.sample(&mut rng))
        } else {
            wrap_phase(TAU * rng.random::<f64>())
        };
        phases.push(prev);
    }
    Ok(PulsePhaseSequence { phases, seed })
}

pub fn gain_switched_phases(cfg: &GainSwitchConfig, n: usize) -> Result<PulsePhaseSequence> {
    cfg.validate()?;
    phases_with_survival(cfg.survival_probability(), cfg.jitter_sigma, cfg.seed, n)
}

/// Per-pulse intensities entering the interferometer.
#[derive(Debug, Clone, Copy)]
pub enum PulseIntensities<'a> {
    Uniform(f64),
    PerPulse(&'a [f64]),
}

impl PulseIntensities<'_> {
    fn check(&self, n: usize) -> Result<()> {
        match *self {
            PulseIntensities::Uniform(i) if i < 0.0 || !i.is_finite() => {
                Err(Error::NegativeIntensity(i))
            }
            PulseIntensities::PerPulse(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch(v.len(), n));
                }
                match v.iter().find(|&&i| !(i >= 0.0)) {
                    Some(&i) => Err(Error::NegativeIntensity(i)),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    fn get(&self, k: usize) -> f64 {
        match *self {
            PulseIntensities::Uniform(i) => i,
            PulseIntensities::PerPulse(v) => v[k],
        }
    }
}

fn check_interferometer(
    phases: &PulsePhaseSequence,
    intensities: &PulseIntensities,
    imbalance: usize,
) -> Result<()> {
    if imbalance == 0 {
        return Err(Error::invalid("imbalance must be at least one slot"));
    }
    if phases.len() <= imbalance {
        return Err(Error::invalid(format!(
            "{} pulses cannot be interfered at an imbalance of {imbalance}",
            phases.len()
        )));
    }
    intensities.check(phases.len())
}

/// Slow-detector reading behind an unbalanced interferometer whose arms
/// differ by `imbalance` slots, averaged over all pulse pairs.
pub fn mzi_interfere(
    phases: &PulsePhaseSequence,
    intensities: PulseIntensities,
    delta_phi: f64,
    imbalance: usize,
) -> Result<f64> {
    check_interferometer(phases, &intensities, imbalance)?;
    let p = &phases.phases;
    let m = imbalance;
    let sum: f64 = (m..p.len())
        .map(|k| {
            let (a, b) = (intensities.get(k), intensities.get(k - m));
            0.25 * (a + b) + 0.5 * (a * b).sqrt() * (p[k] - p[k - m] + delta_phi).cos()
        })
        .sum();
    Ok(sum / (p.len() - m) as f64)
}

/// Pair averages that make the detector reading a closed form in `delta_phi`:
/// `reading = mean + c cos(delta_phi) - s sin(delta_phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSums {
    pub mean: f64,
    pub c: f64,
    pub s: f64,
}

impl InterferenceSums {
    pub fn new(
        phases: &PulsePhaseSequence,
        intensities: PulseIntensities,
        imbalance: usize,
    ) -> Result<Self> {
        check_interferometer(phases, &intensities, imbalance)?;
        let p = &phases.phases;
        let m = imbalance;
        let (mut mean, mut c, mut s) = (0.0, 0.0, 0.0);
        for k in m..p.len() {
            let (a, b) = (intensities.get(k), intensities.get(k - m));
            let amp = 0.5 * (a * b).sqrt();
            let d = p[k] - p[k - m];
            mean += 0.25 * (a + b);
            c += amp * d.cos();
            s += amp * d.sin();
        }
        let n = (p.len() - m) as f64;
        Ok(Self {
            mean: mean / n,
            c: c / n,
            s: s / n,
        })
    }

    pub fn reading(&self, delta_phi: f64) -> f64 {
        self.mean + self.c * delta_phi.cos() - self.s * delta_phi.sin()
    }
}

/// Gaussian noise on each power-meter reading; `readings` per grid point are
/// averaged and their spread reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutNoise {
    pub sigma: f64,
    pub readings: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityResult {
    pub delta_phi_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    /// Spread of the individual readings per point, when noise is modeled.
    pub intensity_std: Option<Vec<f64>>,
    pub i_max_obs: f64,
    pub i_min_obs: f64,
    pub visibility: f64,
}

/// `n` equally spaced phase offsets covering `[0, 2 pi]` inclusive.
pub fn fringe_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| TAU * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// `(i_max - i_min) / (i_max + i_min)`.
pub fn visibility(i_max: f64, i_min: f64) -> Result<f64> {
    if i_max + i_min == 0.0 {
        return Err(Error::invalid(
            "visibility undefined for zero total intensity",
        ));
    }
    Ok((i_max - i_min) / (i_max + i_min))
}

/// Scans `delta_phi` over `grid` and reports the fringe visibility.
pub fn fringe_scan(
    phases: &PulsePhaseSequence,
    intensities: PulseIntensities,
    grid: &[f64],
    imbalance: usize,
    noise: Option<ReadoutNoise>,
) -> Result<VisibilityResult> {
    if grid.len() < 16 {
        return Err(Error::invalid(format!(
            "fringe grid needs >= 16 points, got {}",
            grid.len()
        )));
    }
    let span = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - grid.iter().copied().fold(f64::INFINITY, f64::min);
    if span < TAU * (1.0 - 1e-12) {
        return Err(Error::invalid(format!(
            "fringe grid spans {span} rad, less than 2 pi"
        )));
    }
    let sums = InterferenceSums::new(phases, intensities, imbalance)?;
    let clean: Vec<f64> = grid.iter().map(|&d| sums.reading(d)).collect();
    let (intensity, intensity_std) = match noise {
        None => (clean, None),
        Some(nz) => {
            if nz.readings == 0 {
                return Err(Error::invalid("need at least one reading per point"));
            }
            let dist = Normal::new(0.0, nz.sigma).map_err(|e| Error::invalid(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(nz.seed);
            let (means, stds): (Vec<f64>, Vec<f64>) = clean
                .iter()
                .map(|&v| {
                    let r: Vec<f64> = (0..nz.readings)
                        .map(|_| v + dist.sample(&mut rng))
                        .collect();
                    crate::corrstats::mean_std(&r).unwrap_or((v, 0.0))
                })
                .unzip();
            (means, Some(stds))
        }
    };
    let i_max_obs = intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i_min_obs = intensity.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(VisibilityResult {
        delta_phi_grid: grid.to_vec(),
        visibility: visibility(i_max_obs, i_min_obs)?,
        intensity,
        intensity_std,
        i_max_obs,
        i_min_obs,
    })
}

/// Normalized Stokes vector (point on the Poincaré sphere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    s1: f64,
    s2: f64,
    s3: f64,
}

/// Norm tolerance for a Stokes vector to count as normalized.
pub const STOKES_NORM_TOLERANCE: f64 = 1e-6;

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        let norm = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        if !((norm - 1.0).abs() <= STOKES_NORM_TOLERANCE) {
            return Err(Error::StokesNorm {
                norm,
                tolerance: STOKES_NORM_TOLERANCE,
            });
        }
        Ok(Self { s1, s2, s3 })
    }

    /// Rescales onto the unit sphere when the norm is within `tolerance` of 1.
    pub fn renormalized(s1: f64, s2: f64, s3: f64, tolerance: f64) -> Result<Self> {
        let norm = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        if !((norm - 1.0).abs() <= tolerance) {
            return Err(Error::StokesNorm { norm, tolerance });
        }
        Ok(Self {
            s1: s1 / norm,
            s2: s2 / norm,
            s3: s3 / norm,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    fn dot(&self, o: &Self) -> f64 {
        self.s1 * o.s1 + self.s2 * o.s2 + self.s3 * o.s3
    }

    fn cross_norm(&self, o: &Self) -> f64 {
        let x = self.s2 * o.s3 - self.s3 * o.s2;
        let y = self.s3 * o.s1 - self.s1 * o.s3;
        let z = self.s1 * o.s2 - self.s2 * o.s1;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Great-circle angle between two Stokes vectors, in `[0, pi]`.
pub fn angular_distance(a: &StokesVector, b: &StokesVector) -> f64 {
    // atan2 form of acos(a.b); stays accurate for nearly parallel vectors
    a.cross_norm(b).atan2(a.dot(b))
}

/// Angle of every entry from the first one.
pub fn drift_series(log: &[(f64, StokesVector)]) -> Result<Vec<(f64, f64)>> {
    let (_, reference) = log
        .first()
        .ok_or_else(|| Error::invalid("empty polarization log"))?;
    Ok(log
        .iter()
        .map(|(t, s)| (*t, angular_distance(s, reference)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftVerdict {
    pub max_angle: f64,
    pub threshold: f64,
    pub within: bool,
}

/// Drift limit quoted for a lab environment over two hours, rad.
pub const DRIFT_THRESHOLD: f64 = 0.007 * std::f64::consts::PI;

pub fn drift_verdict(series: &[(f64, f64)], threshold: f64) -> DriftVerdict {
    let max_angle = series.iter().map(|p| p.1).fold(0.0, f64::max);
    DriftVerdict {
        max_angle,
        threshold,
        within: max_angle < threshold,
    }
}

/// Per-path ON/OFF patterns derived from a path-symbol pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSelection {
    pub per_path: BTreeMap<Symbol, NominalPattern>,
    pub delay_fs: BTreeMap<Symbol, f64>,
    pub gain: BTreeMap<Symbol, f64>,
}

impl PathSelection {
    pub fn on_count(&self, path: Symbol) -> usize {
        self.per_path.get(&path).map_or(0, |p| {
            p.symbols.iter().filter(|&&s| s == Symbol::On).count()
        })
    }
}

/// Path `p` is ON exactly in the slots where `pattern` selects `p`. Missing
/// delays default to 0 fs and missing gains to 1.
pub fn select_paths(
    pattern: &NominalPattern,
    per_path_delay_fs: &BTreeMap<Symbol, f64>,
    per_path_gain: &BTreeMap<Symbol, f64>,
) -> Result<PathSelection> {
    if let Some(bad) = pattern.symbols.iter().find(|s| !Symbol::PATHS.contains(s)) {
        return Err(Error::UnknownSymbol(bad.to_string()));
    }
    let per_path = Symbol::PATHS
        .into_iter()
        .map(|path| {
            let symbols = pattern
                .symbols
                .iter()
                .map(|&s| if s == path { Symbol::On } else { Symbol::Off })
                .collect();
            (
                path,
                NominalPattern {
                    symbols,
                    seed: pattern.seed,
                },
            )
        })
        .collect();
    let fill = |m: &BTreeMap<Symbol, f64>, default: f64| {
        Symbol::PATHS
            .into_iter()
            .map(|p| (p, m.get(&p).copied().unwrap_or(default)))
            .collect::<BTreeMap<_, _>>()
    };
    Ok(PathSelection {
        per_path,
        delay_fs: fill(per_path_delay_fs, 0.0),
        gain: fill(per_path_gain, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::random_pattern;
    use std::f64::consts::PI;

    #[test]
    fn config_validation() {
        assert!(GainSwitchConfig::default().validate().is_ok());
        let bad = GainSwitchConfig {
            i_min: 13.0,
            ..Default::default()
        };
        assert!(gain_switched_phases(&bad, 10).is_err());
        let bad = GainSwitchConfig {
            i_scale: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn full_inheritance_without_jitter() {
        let cfg = GainSwitchConfig {
            i_scale: 1e300,
            jitter_sigma: 0.0,
            ..Default::default()
        };
        assert_eq!(cfg.survival_probability(), 1.0);
        let seq = gain_switched_phases(&cfg, 1000).unwrap();
        assert!(seq.phases.iter().all(|&p| p == seq.phases[0]));
    }

    #[test]
    fn no_inheritance_is_uncorrelated() {
        let cfg = GainSwitchConfig {
            i_min: 0.0,
            i_scale: 0.01,
            ..Default::default()
        };
        assert_eq!(cfg.survival_probability(), 0.0);
        let n = 100_000;
        let seq = gain_switched_phases(&cfg, n).unwrap();
        assert!(seq.phases.iter().all(|&p| (0.0..TAU).contains(&p)));
        // circular correlation of neighbours: mean of exp(i (phi_k - phi_{k-1}))
        let (c, s) = seq.phases.windows(2).fold((0.0, 0.0), |(c, s), w| {
            let d = w[1] - w[0];
            (c + d.cos(), s + d.sin())
        });
        let m = (n - 1) as f64;
        let sigma = (0.5 / m).sqrt();
        assert!((c / m).abs() < 3.0 * sigma);
        assert!((s / m).abs() < 3.0 * sigma);
    }

    #[test]
    fn phases_reproducible() {
        let cfg = GainSwitchConfig {
            seed: 42,
            ..Default::default()
        };
        assert_eq!(
            gain_switched_phases(&cfg, 500).unwrap(),
            gain_switched_phases(&cfg, 500).unwrap()
        );
    }

    #[test]
    fn interference_limits() {
        let seq = PulsePhaseSequence {
            phases: vec![1.0; 100],
            seed: 0,
        };
        let one = PulseIntensities::Uniform(1.0);
        assert!((mzi_interfere(&seq, one, 0.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(mzi_interfere(&seq, one, PI, 1).unwrap().abs() < 1e-15);
        assert!(mzi_interfere(&seq, one, 0.0, 0).is_err());
        assert!(mzi_interfere(&seq, one, 0.0, 100).is_err());
        assert!(matches!(
            mzi_interfere(&seq, PulseIntensities::Uniform(-1.0), 0.0, 1),
            Err(Error::NegativeIntensity(_))
        ));
        let mut v = vec![1.0; 100];
        v[3] = -0.5;
        assert!(mzi_interfere(&seq, PulseIntensities::PerPulse(&v), 0.0, 1).is_err());
    }

    #[test]
    fn random_phases_average_to_half() {
        let n = 100_000;
        let seq = phases_with_survival(0.0, 0.0, 9, n + 1).unwrap();
        let v = mzi_interfere(&seq, PulseIntensities::Uniform(1.0), 0.3, 1).unwrap();
        assert!((v - 0.5).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        let seq = phases_with_survival(0.6, 0.4, 3, 2000).unwrap();
        let inten: Vec<f64> = (0..2000)
            .map(|k| 1.0 + 0.1 * ((k * 13 % 7) as f64))
            .collect();
        let sums = InterferenceSums::new(&seq, PulseIntensities::PerPulse(&inten), 2).unwrap();
        for d in fringe_grid(17) {
            let direct = mzi_interfere(&seq, PulseIntensities::PerPulse(&inten), d, 2).unwrap();
            assert!((sums.reading(d) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_input_full_visibility() {
        let seq = PulsePhaseSequence {
            phases: vec![0.25; 64],
            seed: 0,
        };
        let r = fringe_scan(
            &seq,
            PulseIntensities::Uniform(2.0),
            &fringe_grid(33),
            1,
            None,
        )
        .unwrap();
        assert!((r.visibility - 1.0).abs() < 1e-9);
        assert!(r.i_min_obs >= -1e-15 && r.i_max_obs <= 2.0 + 1e-12);
    }

    #[test]
    fn visibility_edge_cases() {
        assert_eq!(visibility(0.5, 0.5).unwrap(), 0.0);
        assert!(visibility(0.0, 0.0).is_err());
        let seq = PulsePhaseSequence {
            phases: vec![0.0; 8],
            seed: 0,
        };
        assert!(fringe_scan(
            &seq,
            PulseIntensities::Uniform(1.0),
            &fringe_grid(8),
            1,
            None
        )
        .is_err());
        let short: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        assert!(fringe_scan(&seq, PulseIntensities::Uniform(1.0), &short, 1, None).is_err());
    }

    #[test]
    fn readout_noise_reports_spread() {
        let seq = phases_with_survival(0.9, 0.1, 5, 1000).unwrap();
        let noise = ReadoutNoise {
            sigma: 0.01,
            readings: 60,
            seed: 1,
        };
        let r = fringe_scan(
            &seq,
            PulseIntensities::Uniform(1.0),
            &fringe_grid(24),
            1,
            Some(noise),
        )
        .unwrap();
        let stds = r.intensity_std.unwrap();
        assert_eq!(stds.len(), 24);
        assert!(stds.iter().all(|&s| s > 0.005 && s < 0.02));
    }

    #[test]
    fn stokes_angles() {
        let x = StokesVector::new(1.0, 0.0, 0.0).unwrap();
        let y = StokesVector::new(0.0, 1.0, 0.0).unwrap();
        let mx = StokesVector::new(-1.0, 0.0, 0.0).unwrap();
        assert_eq!(angular_distance(&x, &x), 0.0);
        assert!((angular_distance(&x, &mx) - PI).abs() < 1e-15);
        assert!((angular_distance(&x, &y) - PI / 2.0).abs() < 1e-15);
        assert!(StokesVector::new(0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn drift_of_known_rotation() {
        let a = StokesVector::new(0.0, 0.6, 0.8).unwrap();
        let th: f64 = 0.01;
        // rotate about s1 by th
        let b = StokesVector::new(
            0.0,
            0.6 * th.cos() - 0.8 * th.sin(),
            0.6 * th.sin() + 0.8 * th.cos(),
        )
        .unwrap();
        let series = drift_series(&[(0.0, a), (60.0, b)]).unwrap();
        assert_eq!(series[0], (0.0, 0.0));
        assert!((series[1].1 - th).abs() < 1e-14);
        assert!(drift_series(&[]).is_err());
        let constant = drift_series(&[(0.0, a), (1.0, a), (2.0, a)]).unwrap();
        assert!(constant.iter().all(|p| p.1 == 0.0));
        assert!(drift_verdict(&series, DRIFT_THRESHOLD).within);
    }

    #[test]
    fn path_selection_partitions_slots() {
        let pattern = random_pattern(1, &Symbol::PATHS, 100, None).unwrap();
        let sel = select_paths(&pattern, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        let total: usize = Symbol::PATHS.iter().map(|&p| sel.on_count(p)).sum();
        assert_eq!(total, 100);
        for k in 0..100 {
            let on = Symbol::PATHS
                .iter()
                .filter(|p| sel.per_path[p].symbols[k] == Symbol::On)
                .count();
            assert_eq!(on, 1);
        }
        assert_eq!(sel.gain[&Symbol::P2], 1.0);

        let all_p1 = NominalPattern {
            symbols: vec![Symbol::P1; 10],
            seed: 0,
        };
        let sel = select_paths(
            &all_p1,
            &BTreeMap::from([(Symbol::P2, 3.0)]),
            &BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(sel.on_count(Symbol::P1), 10);
        assert_eq!(sel.on_count(Symbol::P2), 0);
        assert_eq!(sel.on_count(Symbol::P3), 0);
        assert_eq!(sel.delay_fs[&Symbol::P2], 3.0);

        let bad = NominalPattern {
            symbols: vec![Symbol::On],
            seed: 0,
        };
        assert!(matches!(
            select_paths(&bad, &BTreeMap::new(), &BTreeMap::new()),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn path_fractions_uniform() {
        let n = 100_000;
        let pattern = random_pattern(77, &Symbol::PATHS, n, None).unwrap();
        let sel = select_paths(&pattern, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for p in Symbol::PATHS {
            assert!((sel.on_count(p) as f64 - n as f64 / 3.0).abs() < 5.0 * sigma);
        }
    }
}
