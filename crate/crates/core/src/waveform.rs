//! Uniformly sampled waveforms, nominal symbol patterns and square drive trains.
//!
//! Sample `i` of a [`Waveform`] sits at `t0 + i / sample_rate`. Pulse slot `k`
//! of a train spans `[k / rep_rate, (k + 1) / rep_rate)` and carries a square
//! pulse centred in the slot.
//!
//! Patterns are drawn from a ChaCha8 stream (`rand_chacha::ChaCha8Rng`, seeded
//! with `seed_from_u64`), so a seed reproduces the same symbols on every
//! platform. Each symbol consumes one `f64` draw in `[0, 1)` that is mapped
//! through the cumulative weights.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance when deciding that a rate ratio is an integer.
pub const RATE_RATIO_TOLERANCE: f64 = 1e-9;

/// Uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate} must be positive"
            )));
        }
        if samples.is_empty() {
            return Err(Error::EmptyWaveform);
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        if !t0.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate, 0.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Span covered by the samples, `len / sample_rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }

    pub fn peak(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` to every sample. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|&s| f(s)).collect(),
            self.sample_rate,
            self.t0,
        )
    }

    /// Same timing, new samples (checked).
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate, self.t0)
    }
}

/// Nominal per-slot symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    /// Phase 0.
    S0,
    /// Phase pi/2.
    SHalf,
    /// Phase pi.
    SPi,
    Off,
    On,
    P1,
    P2,
    P3,
}

impl Symbol {
    pub const PHASES: [Symbol; 3] = [Symbol::S0, Symbol::SHalf, Symbol::SPi];
    pub const SELECTION: [Symbol; 2] = [Symbol::On, Symbol::Off];
    pub const PATHS: [Symbol; 3] = [Symbol::P1, Symbol::P2, Symbol::P3];

    /// Nominal phase in radians for the three phase symbols.
    pub fn nominal_phase(self) -> Option<f64> {
        match self {
            Symbol::S0 => Some(0.0),
            Symbol::SHalf => Some(std::f64::consts::FRAC_PI_2),
            Symbol::SPi => Some(std::f64::consts::PI),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Symbol::S0 => "S0",
            Symbol::SHalf => "S_half",
            Symbol::SPi => "S_pi",
            Symbol::Off => "OFF",
            Symbol::On => "ON",
            Symbol::P1 => "P1",
            Symbol::P2 => "P2",
            Symbol::P3 => "P3",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S0" => Symbol::S0,
            "S_half" => Symbol::SHalf,
            "S_pi" => Symbol::SPi,
            "OFF" => Symbol::Off,
            "ON" => Symbol::On,
            "P1" => Symbol::P1,
            "P2" => Symbol::P2,
            "P3" => Symbol::P3,
            other => return Err(Error::UnknownSymbol(other.to_string())),
        })
    }
}

/// Per-slot nominal symbols plus the seed that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalPattern {
    pub symbols: Vec<Symbol>,
    pub seed: u64,
}

impl NominalPattern {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Circular shift by `slots` to the right.
    pub fn rotated(&self, slots: usize) -> Self {
        let mut symbols = self.symbols.clone();
        if !symbols.is_empty() {
            let k = slots % symbols.len();
            symbols.rotate_right(k);
        }
        Self {
            symbols,
            seed: self.seed,
        }
    }
}

/// Draws `length` symbols from `alphabet` with optional probabilities.
pub fn random_pattern(
    seed: u64,
    alphabet: &[Symbol],
    length: usize,
    weights: Option<&[f64]>,
) -> Result<NominalPattern> {
    if alphabet.is_empty() {
        return Err(Error::invalid("empty alphabet"));
    }
    if length == 0 {
        return Err(Error::invalid("pattern length must be at least 1"));
    }
    let cumulative = match weights {
        None => (1..=alphabet.len())
            .map(|i| i as f64 / alphabet.len() as f64)
            .collect::<Vec<_>>(),
        Some(w) => {
            if w.len() != alphabet.len() {
                return Err(Error::invalid(format!(
                    "{} weights for {} symbols",
                    w.len(),
                    alphabet.len()
                )));
            }
            if let Some(neg) = w.iter().find(|&&x| !(x >= 0.0)) {
                return Err(Error::invalid(format!("negative weight {neg}")));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "weights sum to {total}, expected 1"
                )));
            }
            w.iter()
                .scan(0.0, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = (0..length)
        .map(|_| {
            let u: f64 = rng.random();
            let idx = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(alphabet.len() - 1);
            alphabet[idx]
        })
        .collect();
    Ok(NominalPattern { symbols, seed })
}

/// ON/OFF pattern whose gaps between consecutive ON slots are uniform in
/// `1..=max_spacing` slots. The first ON slot lands uniformly in
/// `0..max_spacing`, as if the train continued from an earlier one.
pub fn random_spacing_pattern(
    seed: u64,
    length: usize,
    max_spacing: usize,
) -> Result<NominalPattern> {
    if length == 0 || max_spacing == 0 {
        return Err(Error::invalid("length and max spacing must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = vec![Symbol::Off; length];
    let mut slot = rng.random_range(0..max_spacing);
    while slot < length {
        symbols[slot] = Symbol::On;
        slot += rng.random_range(1..=max_spacing);
    }
    Ok(NominalPattern { symbols, seed })
}

/// Cyclic de Bruijn sequence over `alphabet`: every word of `order` symbols
/// occurs exactly once as a cyclic window. The sequence is rotated by
/// `seed mod len` so different seeds start at different points.
pub fn de_bruijn_pattern(alphabet: &[Symbol], order: usize, seed: u64) -> Result<NominalPattern> {
    let k = alphabet.len();
    if k < 2 || order == 0 {
        return Err(Error::invalid(
            "de Bruijn patterns need >= 2 symbols and order >= 1",
        ));
    }
    let len = k
        .checked_pow(order as u32)
        .filter(|&l| l <= 1 << 24)
        .ok_or_else(|| Error::invalid(format!("de Bruijn pattern of order {order} is too long")))?;
    // Lyndon-word construction (Fredricksen, Kessler, Maiorana).
    fn build(t: usize, p: usize, k: usize, n: usize, a: &mut [usize], out: &mut Vec<usize>) {
        if t > n {
            if n % p == 0 {
                out.extend_from_slice(&a[1..=p]);
            }
        } else {
            a[t] = a[t - p];
            build(t + 1, p, k, n, a, out);
            for j in a[t - p] + 1..k {
                a[t] = j;
                build(t + 1, t, k, n, a, out);
            }
        }
    }
    let mut a = vec![0; order + 1];
    let mut idx = Vec::with_capacity(len);
    build(1, 1, k, order, &mut a, &mut idx);
    let pattern = NominalPattern {
        symbols: idx.into_iter().map(|i| alphabet[i]).collect(),
        seed,
    };
    Ok(pattern.rotated((seed % len as u64) as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiseModel {
    #[default]
    IdealSquare,
}

/// Drive description for a square pulse train.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrainSpec {
    pub rep_rate: f64,
    pub pulse_width: f64,
    pub amplitude_levels: BTreeMap<Symbol, f64>,
    pub pattern_length: usize,
    pub sample_rate: f64,
    pub rise_model: RiseModel,
}

impl PulseTrainSpec {
    /// Three-state phase drive: 0, pi/2, pi mapped to 0, 0.5, 1.
    pub fn phase_drive(
        rep_rate: f64,
        pulse_width: f64,
        pattern_length: usize,
        sample_rate: f64,
    ) -> Self {
        Self {
            rep_rate,
            pulse_width,
            amplitude_levels: phase_levels(),
            pattern_length,
            sample_rate,
            rise_model: RiseModel::IdealSquare,
        }
    }

    /// ON/OFF selection drive: OFF = 0, ON = 1 (one V_pi).
    pub fn selection_drive(
        rep_rate: f64,
        pulse_width: f64,
        pattern_length: usize,
        sample_rate: f64,
    ) -> Self {
        Self {
            amplitude_levels: selection_levels(),
            ..Self::phase_drive(rep_rate, pulse_width, pattern_length, sample_rate)
        }
    }

    pub fn slot_period(&self) -> f64 {
        1.0 / self.rep_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rep_rate > 0.0 && self.rep_rate.is_finite()) {
            return Err(Error::invalid("repetition rate must be positive"));
        }
        if !(self.pulse_width > 0.0) {
            return Err(Error::invalid("pulse width must be positive"));
        }
        if self.pulse_width >= 1.0 / self.rep_rate {
            return Err(Error::invalid(format!(
                "pulse width {} s does not fit in slot period {} s",
                self.pulse_width,
                1.0 / self.rep_rate
            )));
        }
        if self.sample_rate < 10.0 * self.rep_rate {
            return Err(Error::invalid(format!(
                "sample rate {} Sa/s is below 10x the repetition rate",
                self.sample_rate
            )));
        }
        if self.pattern_length == 0 {
            return Err(Error::invalid("pattern length must be at least 1"));
        }
        Ok(())
    }

    /// First sample index and sample count of the pulse in slot `k`.
    pub fn pulse_samples(&self, k: usize) -> (usize, usize) {
        let slot = 1.0 / self.rep_rate;
        let start = (k as f64 * slot + 0.5 * (slot - self.pulse_width)) * self.sample_rate;
        let count = (self.pulse_width * self.sample_rate).round() as usize;
        (start.round() as usize, count)
    }

    pub fn total_samples(&self) -> usize {
        (self.pattern_length as f64 * self.sample_rate / self.rep_rate).round() as usize
    }
}

pub fn phase_levels() -> BTreeMap<Symbol, f64> {
    BTreeMap::from([(Symbol::S0, 0.0), (Symbol::SHalf, 0.5), (Symbol::SPi, 1.0)])
}

pub fn selection_levels() -> BTreeMap<Symbol, f64> {
    BTreeMap::from([(Symbol::Off, 0.0), (Symbol::On, 1.0)])
}

/// Renders `pattern` as a train of ideal square pulses.
pub fn make_pulse_train(spec: &PulseTrainSpec, pattern: &NominalPattern) -> Result<Waveform> {
    spec.validate()?;
    if pattern.len() != spec.pattern_length {
        return Err(Error::invalid(format!(
            "pattern has {} symbols, spec expects {}",
            pattern.len(),
            spec.pattern_length
        )));
    }
    let n = spec.total_samples();
    let mut samples = vec![0.0; n];
    for (k, sym) in pattern.symbols.iter().enumerate() {
        let level = *spec
            .amplitude_levels
            .get(sym)
            .ok_or_else(|| Error::MissingLevel(sym.to_string()))?;
        if level == 0.0 {
            continue;
        }
        let (start, count) = spec.pulse_samples(k);
        let end = (start + count).min(n);
        samples[start.min(n)..end].fill(level);
    }
    Waveform::new(samples, spec.sample_rate, 0.0)
}

/// Integer decimation to `new_rate`; keeps every k-th sample starting at the first.
pub fn resample(wf: &Waveform, new_rate: f64) -> Result<Waveform> {
    if !(new_rate > 0.0 && new_rate.is_finite()) {
        return Err(Error::invalid(format!(
            "target rate {new_rate} must be positive"
        )));
    }
    let ratio = wf.sample_rate / new_rate;
    let factor = ratio.round();
    if factor < 1.0 || (ratio - factor).abs() > RATE_RATIO_TOLERANCE * ratio {
        return Err(Error::UnsupportedRateRatio {
            from: wf.sample_rate,
            to: new_rate,
        });
    }
    let factor = factor as usize;
    let samples = wf.samples.iter().step_by(factor).copied().collect();
    Waveform::new(samples, new_rate, wf.t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_pulse_spec() -> PulseTrainSpec {
        PulseTrainSpec::phase_drive(1e9, 200e-12, 3, 100e9)
    }

    #[test]
    fn waveform_rejects_nan_and_empty() {
        assert!(matches!(
            Waveform::new(vec![0.0, f64::NAN], 1.0, 0.0),
            Err(Error::NonFiniteSample { index: 1 })
        ));
        assert!(matches!(
            Waveform::new(vec![], 1.0, 0.0),
            Err(Error::EmptyWaveform)
        ));
        assert!(Waveform::new(vec![1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn random_pattern_is_deterministic() {
        let a = random_pattern(7, &Symbol::PHASES, 100, None).unwrap();
        let b = random_pattern(7, &Symbol::PHASES, 100, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.symbols.iter().all(|s| Symbol::PHASES.contains(s)));
        let c = random_pattern(8, &Symbol::PHASES, 100, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn on_fraction_matches_weight() {
        let n = 100_000;
        let p = random_pattern(
            7,
            &[Symbol::On, Symbol::Off],
            n,
            Some(&[1.0 / 3.0, 2.0 / 3.0]),
        )
        .unwrap();
        let on = p.symbols.iter().filter(|&&s| s == Symbol::On).count() as f64;
        let expected = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        assert!((on - expected).abs() < 5.0 * sigma, "on = {on}");
    }

    #[test]
    fn degenerate_alphabet() {
        let p = random_pattern(99, &[Symbol::SPi], 10, None).unwrap();
        assert!(p.symbols.iter().all(|&s| s == Symbol::SPi));
    }

    #[test]
    fn pattern_errors() {
        assert!(random_pattern(1, &[], 10, None).is_err());
        assert!(random_pattern(1, &Symbol::SELECTION, 10, Some(&[1.5, -0.5])).is_err());
        assert!(random_pattern(1, &Symbol::SELECTION, 10, Some(&[0.5, 0.4])).is_err());
        assert!(random_pattern(1, &Symbol::SELECTION, 0, None).is_err());
    }

    #[test]
    fn zero_level_gives_zero_train() {
        let spec = single_pulse_spec();
        let p = NominalPattern {
            symbols: vec![Symbol::S0; 3],
            seed: 0,
        };
        let wf = make_pulse_train(&spec, &p).unwrap();
        assert!(wf.samples().iter().all(|&s| s == 0.0));
        assert_eq!(wf.len(), 300);
    }

    #[test]
    fn pulse_has_width_times_rate_samples() {
        let spec = single_pulse_spec();
        let p = NominalPattern {
            symbols: vec![Symbol::SPi, Symbol::S0, Symbol::SPi],
            seed: 0,
        };
        let wf = make_pulse_train(&spec, &p).unwrap();
        for slot in [0usize, 2] {
            let s = &wf.samples()[slot * 100..(slot + 1) * 100];
            assert_eq!(s.iter().filter(|&&x| x == 1.0).count(), 20);
            let first = s.iter().position(|&x| x == 1.0).unwrap();
            assert_eq!(first, 40, "pulse centred in slot");
            assert!(s[first..first + 20].iter().all(|&x| x == 1.0));
        }
        assert!(wf.samples()[100..200].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn selection_pulses_sit_on_integer_ns_grid() {
        let spec = PulseTrainSpec::selection_drive(1e9, 200e-12, 50, 100e9);
        let p = random_spacing_pattern(3, 50, 7).unwrap();
        let wf = make_pulse_train(&spec, &p).unwrap();
        let starts: Vec<usize> = (1..wf.len())
            .filter(|&i| wf.samples()[i] == 1.0 && wf.samples()[i - 1] == 0.0)
            .collect();
        assert!(starts.len() > 2);
        for w in starts.windows(2) {
            assert_eq!((w[1] - w[0]) % 100, 0);
            let gap = (w[1] - w[0]) / 100;
            assert!((1..=7).contains(&gap));
        }
    }

    #[test]
    fn pulse_train_validation() {
        let mut spec = single_pulse_spec();
        spec.pulse_width = 1e-9;
        let p = NominalPattern {
            symbols: vec![Symbol::S0; 3],
            seed: 0,
        };
        assert!(make_pulse_train(&spec, &p).is_err());
        let spec = single_pulse_spec();
        let bad = NominalPattern {
            symbols: vec![Symbol::On; 3],
            seed: 0,
        };
        assert!(matches!(
            make_pulse_train(&spec, &bad),
            Err(Error::MissingLevel(_))
        ));
        let short = NominalPattern {
            symbols: vec![Symbol::S0; 2],
            seed: 0,
        };
        assert!(make_pulse_train(&spec, &short).is_err());
    }

    #[test]
    fn decimation() {
        let wf = Waveform::new(vec![1.0, 2.0, 3.0, 4.0], 80e9, 0.0).unwrap();
        let out = resample(&wf, 40e9).unwrap();
        assert_eq!(out.samples(), &[1.0, 3.0]);
        assert_eq!(out.sample_rate(), 40e9);
        assert_eq!(resample(&wf, 80e9).unwrap(), wf);
        assert!(matches!(
            resample(&wf, 30e9),
            Err(Error::UnsupportedRateRatio { .. })
        ));
        assert!(resample(&wf, 160e9).is_err());
    }

    #[test]
    fn chain_rate_to_scope_rate() {
        let wf = Waveform::zeros(12_000, 120e9).unwrap();
        let out = resample(&wf, 40e9).unwrap();
        assert_eq!(out.len(), 4_000);
        assert!((out.duration() - wf.duration()).abs() <= 1.0 / 40e9);
    }

    #[test]
    fn rotated_pattern() {
        let p = NominalPattern {
            symbols: vec![Symbol::S0, Symbol::SHalf, Symbol::SPi],
            seed: 1,
        };
        assert_eq!(
            p.rotated(1).symbols,
            vec![Symbol::SPi, Symbol::S0, Symbol::SHalf]
        );
    }

    #[test]
    fn de_bruijn_windows_unique() {
        for order in 1..=5 {
            let p = de_bruijn_pattern(&Symbol::PHASES, order, 17).unwrap();
            assert_eq!(p.len(), 3usize.pow(order as u32));
            let mut seen = std::collections::BTreeSet::new();
            for start in 0..p.len() {
                let word: Vec<Symbol> = (0..order)
                    .map(|j| p.symbols[(start + j) % p.len()])
                    .collect();
                assert!(seen.insert(word));
            }
        }
        let a = de_bruijn_pattern(&Symbol::PHASES, 3, 0).unwrap();
        let b = de_bruijn_pattern(&Symbol::PHASES, 3, 1).unwrap();
        assert_eq!(a.rotated(1).symbols, b.symbols);
        assert!(de_bruijn_pattern(&[Symbol::S0], 3, 0).is_err());
        assert!(de_bruijn_pattern(&Symbol::PHASES, 40, 0).is_err());
    }
}
