//! Linear time-invariant models of the modulation chain, applied in the
//! frequency domain.
//!
//! Every response is evaluated as an analog transfer function `H(f)` at the
//! FFT bin frequencies of a zero-padded record. Negative-frequency bins take
//! `conj(H(|f|))`, so real inputs stay real.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::phasemap::modulator_transfer;
use crate::waveform::{resample, Waveform};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Analog Bessel-Thomson low-pass, normalized to -3 dB at `cutoff_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselFilter {
    order: usize,
    cutoff_hz: f64,
    /// Reverse Bessel polynomial coefficients, ascending powers of s.
    coeffs: Vec<f64>,
    /// -3 dB angular frequency of the unit-delay prototype.
    w3db: f64,
}

impl BesselFilter {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    /// Group delay at DC in seconds.
    pub fn dc_group_delay(&self) -> f64 {
        self.w3db / (TWO_PI * self.cutoff_hz)
    }

    fn eval(&self, f: f64) -> Complex64 {
        let s = Complex64::new(0.0, f / self.cutoff_hz * self.w3db);
        self.coeffs[0] / horner(&self.coeffs, s)
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Coefficients of the reverse Bessel polynomial of degree `n`:
/// `a_k = (2n - k)! / (2^(n - k) k! (n - k)!)`.
fn reverse_bessel_coefficients(n: usize) -> Vec<f64> {
    fn fact(m: usize) -> u128 {
        (1..=m as u128).product()
    }
    (0..=n)
        .map(|k| (fact(2 * n - k) / ((1u128 << (n - k)) * fact(k) * fact(n - k))) as f64)
        .collect()
}

/// Designs an analog Bessel low-pass of `order` with its -3 dB point at `cutoff_hz`.
pub fn design_bessel(order: usize, cutoff_hz: f64) -> Result<FrequencyResponse> {
    if !(1..=10).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz.is_finite()) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz must be positive"
        )));
    }
    let coeffs = reverse_bessel_coefficients(order);
    let gain2 = |w: f64| {
        let h = coeffs[0] / horner(&coeffs, Complex64::new(0.0, w));
        h.norm_sqr()
    };
    // |H|^2 decreases monotonically; bracket the half-power point and bisect.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while gain2(hi) > 0.5 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gain2(mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(FrequencyResponse::Bessel(BesselFilter {
        order,
        cutoff_hz,
        coeffs,
        w3db: 0.5 * (lo + hi),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TablePoint {
    pub f_hz: f64,
    pub mag_db: f64,
    pub phase_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseMode {
    /// Phase interpolated from the table.
    Measured,
    /// `-2 pi f tau` with the given group delay.
    IdealLinear { group_delay_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extrapolation {
    Hold,
    RolloffDbPerOctave(f64),
}

/// Response tabulated at discrete frequencies.
///
/// Magnitude is linear in dB versus log-frequency between knots and held
/// below the first knot. Measured phase is linear in frequency between
/// knots, ramps linearly to 0 at DC, and is held above the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedResponse {
    points: Vec<TablePoint>,
    phase_mode: PhaseMode,
    extrapolation: Extrapolation,
}

impl TabulatedResponse {
    pub fn points(&self) -> &[TablePoint] {
        &self.points
    }

    pub fn phase_mode(&self) -> PhaseMode {
        self.phase_mode
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        let f = f.abs();
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if f <= first.f_hz {
            return first.mag_db;
        }
        if f >= last.f_hz {
            return match self.extrapolation {
                Extrapolation::Hold => last.mag_db,
                Extrapolation::RolloffDbPerOctave(slope) => {
                    last.mag_db - slope * (f / last.f_hz).log2()
                }
            };
        }
        match pts.binary_search_by(|p| p.f_hz.total_cmp(&f)) {
            Ok(i) => pts[i].mag_db,
            Err(i) => {
                let (a, b) = (pts[i - 1], pts[i]);
                let t = (f.ln() - a.f_hz.ln()) / (b.f_hz.ln() - a.f_hz.ln());
                a.mag_db + t * (b.mag_db - a.mag_db)
            }
        }
    }

    pub fn phase_deg(&self, f: f64) -> f64 {
        let sign = if f < 0.0 { -1.0 } else { 1.0 };
        let f = f.abs();
        let phase = match self.phase_mode {
            PhaseMode::IdealLinear { group_delay_s } => -360.0 * f * group_delay_s,
            PhaseMode::Measured => {
                let pts = &self.points;
                let phase_at = |p: &TablePoint| p.phase_deg.unwrap_or(0.0);
                let first = &pts[0];
                let last = &pts[pts.len() - 1];
                if f <= first.f_hz {
                    phase_at(first) * f / first.f_hz
                } else if f >= last.f_hz {
                    phase_at(last)
                } else {
                    match pts.binary_search_by(|p| p.f_hz.total_cmp(&f)) {
                        Ok(i) => phase_at(&pts[i]),
                        Err(i) => {
                            let (a, b) = (&pts[i - 1], &pts[i]);
                            let t = (f - a.f_hz) / (b.f_hz - a.f_hz);
                            phase_at(a) + t * (phase_at(b) - phase_at(a))
                        }
                    }
                }
            }
        };
        sign * phase
    }

    fn eval(&self, f: f64) -> Complex64 {
        let mag = 10f64.powf(self.magnitude_db(f) / 20.0);
        Complex64::from_polar(mag, self.phase_deg(f).to_radians())
    }

    /// First frequency at which the magnitude falls 3 dB below its DC value.
    pub fn bandwidth_3db(&self) -> Option<f64> {
        let dc = self.points[0].mag_db;
        self.points
            .windows(2)
            .find(|w| w[1].mag_db <= dc - 3.0)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let t = (dc - 3.0 - a.mag_db) / (b.mag_db - a.mag_db);
                (a.f_hz.ln() + t * (b.f_hz.ln() - a.f_hz.ln())).exp()
            })
    }
}

/// Builds a tabulated response after validating the table.
pub fn tabulated_response(
    table: Vec<TablePoint>,
    phase_mode: PhaseMode,
    extrapolation: Extrapolation,
) -> Result<FrequencyResponse> {
    if table.len() < 2 {
        return Err(Error::Table(format!(
            "need at least 2 points, got {}",
            table.len()
        )));
    }
    for (i, p) in table.iter().enumerate() {
        if !(p.f_hz > 0.0 && p.f_hz.is_finite()) {
            return Err(Error::Table(format!(
                "row {}: frequency {} must be positive",
                i + 1,
                p.f_hz
            )));
        }
        if !p.mag_db.is_finite() {
            return Err(Error::Table(format!("row {}: magnitude not finite", i + 1)));
        }
        if phase_mode == PhaseMode::Measured && !p.phase_deg.is_some_and(f64::is_finite) {
            return Err(Error::Table(format!(
                "row {}: measured phase mode requires a finite phase column",
                i + 1
            )));
        }
        if i > 0 && p.f_hz <= table[i - 1].f_hz {
            return Err(Error::Table(format!(
                "row {}: frequency {} not strictly above previous {}",
                i + 1,
                p.f_hz,
                table[i - 1].f_hz
            )));
        }
    }
    if let PhaseMode::IdealLinear { group_delay_s } = phase_mode {
        if !group_delay_s.is_finite() {
            return Err(Error::Table("group delay must be finite".into()));
        }
    }
    if let Extrapolation::RolloffDbPerOctave(s) = extrapolation {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Table(format!(
                "rolloff slope {s} dB/octave must be >= 0"
            )));
        }
    }
    Ok(FrequencyResponse::Tabulated(TabulatedResponse {
        points: table,
        phase_mode,
        extrapolation,
    }))
}

/// Complex transfer function of one block or a cascade.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyResponse {
    Identity,
    IdealDelay { delay_s: f64 },
    Bessel(BesselFilter),
    Tabulated(TabulatedResponse),
    Chain(Vec<FrequencyResponse>),
}

impl FrequencyResponse {
    /// `H(f)` for any real `f`; `H(-f) = conj(H(f))`.
    pub fn eval(&self, f: f64) -> Complex64 {
        if f < 0.0 {
            return self.eval(-f).conj();
        }
        match self {
            FrequencyResponse::Identity => Complex64::new(1.0, 0.0),
            FrequencyResponse::IdealDelay { delay_s } => {
                Complex64::from_polar(1.0, -TWO_PI * f * delay_s)
            }
            FrequencyResponse::Bessel(b) => b.eval(f),
            FrequencyResponse::Tabulated(t) => t.eval(f),
            FrequencyResponse::Chain(stages) => stages.iter().map(|s| s.eval(f)).product(),
        }
    }

    pub fn magnitude(&self, f: f64) -> f64 {
        self.eval(f).norm()
    }

    /// Total pure delay contributed by delay stages and linear-phase tables.
    pub fn pure_delay(&self) -> f64 {
        match self {
            FrequencyResponse::IdealDelay { delay_s } => delay_s.abs(),
            FrequencyResponse::Tabulated(t) => match t.phase_mode {
                PhaseMode::IdealLinear { group_delay_s } => group_delay_s.abs(),
                PhaseMode::Measured => 0.0,
            },
            FrequencyResponse::Chain(stages) => stages.iter().map(Self::pure_delay).sum(),
            _ => 0.0,
        }
    }

    /// True when every stage is the identity, so filtering can be skipped.
    pub fn is_identity(&self) -> bool {
        match self {
            FrequencyResponse::Identity => true,
            FrequencyResponse::Chain(stages) => stages.iter().all(Self::is_identity),
            _ => false,
        }
    }

    /// Highest band edge among filtering stages.
    pub fn max_modeled_frequency(&self) -> Option<f64> {
        match self {
            FrequencyResponse::Bessel(b) => Some(b.cutoff_hz),
            FrequencyResponse::Tabulated(t) => t.bandwidth_3db(),
            FrequencyResponse::Chain(stages) => stages
                .iter()
                .filter_map(Self::max_modeled_frequency)
                .reduce(f64::max),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FrequencyResponse::Identity => "identity".into(),
            FrequencyResponse::IdealDelay { delay_s } => format!("delay({delay_s:e} s)"),
            FrequencyResponse::Bessel(b) => {
                format!("bessel(order={}, cutoff={:e} Hz)", b.order, b.cutoff_hz)
            }
            FrequencyResponse::Tabulated(t) => format!(
                "table({} points, {}, {})",
                t.points.len(),
                match t.phase_mode {
                    PhaseMode::Measured => "measured phase".to_string(),
                    PhaseMode::IdealLinear { group_delay_s } =>
                        format!("linear phase {group_delay_s:e} s"),
                },
                match t.extrapolation {
                    Extrapolation::Hold => "hold".to_string(),
                    Extrapolation::RolloffDbPerOctave(s) => format!("rolloff {s} dB/oct"),
                }
            ),
            FrequencyResponse::Chain(stages) => stages
                .iter()
                .map(Self::describe)
                .collect::<Vec<_>>()
                .join(" -> "),
        }
    }
}

/// Cascade of stages; the response is the pointwise product.
pub fn chain(stages: &[FrequencyResponse]) -> Result<FrequencyResponse> {
    if stages.is_empty() {
        return Err(Error::invalid("chain needs at least one stage"));
    }
    Ok(FrequencyResponse::Chain(stages.to_vec()))
}

/// FFT length used for a record of `n` samples: next power of two at least
/// twice the record, plus room for any pure delay.
pub fn padded_len(n: usize, delay_samples: usize) -> usize {
    (2 * n).max(n + delay_samples + 1).next_power_of_two()
}

/// `H(f)` sampled on the bins of one FFT size, reusable across records of
/// equal length.
pub struct FilterPlan {
    n: usize,
    identity: bool,
    sample_rate: f64,
    gains: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FilterPlan {
    /// Linear (zero-padded) filtering of records of `n` samples.
    pub fn new(resp: &FrequencyResponse, n: usize, sample_rate: f64) -> Result<Self> {
        let delay_samples = (resp.pure_delay() * sample_rate).ceil() as usize;
        Self::with_len(resp, n, padded_len(n, delay_samples), sample_rate)
    }

    /// Circular filtering without padding: the steady-state response to a
    /// record that repeats indefinitely, as an AWG looping a pattern.
    pub fn periodic(resp: &FrequencyResponse, n: usize, sample_rate: f64) -> Result<Self> {
        Self::with_len(resp, n, n, sample_rate)
    }

    fn with_len(resp: &FrequencyResponse, n: usize, len: usize, sample_rate: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyWaveform);
        }
        let nyquist = (len % 2 == 0).then_some(len / 2);
        let mut gains = vec![Complex64::new(0.0, 0.0); len];
        let half = len / 2;
        for k in 0..=half {
            let f = k as f64 * sample_rate / len as f64;
            let mut h = resp.eval(f);
            if !(h.re.is_finite() && h.im.is_finite()) {
                return Err(Error::NotEvaluable { freq_hz: f });
            }
            if k == 0 || Some(k) == nyquist {
                h = Complex64::new(h.re, 0.0);
            }
            gains[k] = h;
            if k != 0 && Some(k) != nyquist {
                gains[len - k] = h.conj();
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            identity: resp.is_identity(),
            sample_rate,
            gains,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn padded_len(&self) -> usize {
        self.gains.len()
    }

    fn check(&self, wf: &Waveform) -> Result<()> {
        if wf.len() != self.n || wf.sample_rate() != self.sample_rate {
            return Err(Error::invalid(format!(
                "plan built for {} samples at {} Sa/s, got {} at {}",
                self.n,
                self.sample_rate,
                wf.len(),
                wf.sample_rate()
            )));
        }
        Ok(())
    }

    /// Filters `wf`, returning the output and the largest imaginary residue
    /// relative to the output RMS.
    pub fn apply_with_residue(&self, wf: &Waveform) -> Result<(Waveform, f64)> {
        self.check(wf)?;
        let len = self.gains.len();
        let mut buf: Vec<Complex64> = wf
            .samples()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(len)
            .collect();
        self.forward.process(&mut buf);
        for (b, g) in buf.iter_mut().zip(&self.gains) {
            *b *= g;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / len as f64;
        let out: Vec<f64> = buf[..self.n].iter().map(|c| c.re * scale).collect();
        let max_im = buf[..self.n]
            .iter()
            .map(|c| (c.im * scale).abs())
            .fold(0.0, f64::max);
        let rms = (out.iter().map(|x| x * x).sum::<f64>() / out.len() as f64).sqrt();
        let residue = if rms > 0.0 { max_im / rms } else { max_im };
        Ok((wf.with_samples(out)?, residue))
    }

    pub fn apply(&self, wf: &Waveform) -> Result<Waveform> {
        if self.identity {
            self.check(wf)?;
            return Ok(wf.clone());
        }
        self.apply_with_residue(wf).map(|(w, _)| w)
    }
}

/// Filters a real waveform through `resp`.
pub fn apply_response(wf: &Waveform, resp: &FrequencyResponse) -> Result<Waveform> {
    FilterPlan::new(resp, wf.len(), wf.sample_rate())?.apply(wf)
}

fn check_drive_rate(resp: &FrequencyResponse, drive_rate: f64) -> Result<()> {
    if let Some(fmax) = resp.max_modeled_frequency() {
        if drive_rate < 2.0 * fmax {
            return Err(Error::invalid(format!(
                "drive rate {drive_rate} Sa/s below twice the highest modeled band edge {fmax} Hz"
            )));
        }
    }
    Ok(())
}

/// Ordered equipment stages plus the rate of the final digitizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub stages: Vec<FrequencyResponse>,
    pub output_sample_rate: f64,
}

impl ChainConfig {
    pub fn response(&self) -> Result<FrequencyResponse> {
        chain(&self.stages)
    }

    /// Prepares a reusable simulator for drives of `n` samples at `drive_rate`.
    pub fn plan(&self, n: usize, drive_rate: f64) -> Result<ChainPlan> {
        self.build(n, drive_rate, FilterPlan::new)
    }

    /// As [`ChainConfig::plan`], for drives that loop indefinitely.
    pub fn periodic_plan(&self, n: usize, drive_rate: f64) -> Result<ChainPlan> {
        self.build(n, drive_rate, FilterPlan::periodic)
    }

    fn build(
        &self,
        n: usize,
        drive_rate: f64,
        make: fn(&FrequencyResponse, usize, f64) -> Result<FilterPlan>,
    ) -> Result<ChainPlan> {
        let resp = self.response()?;
        check_drive_rate(&resp, drive_rate)?;
        Ok(ChainPlan {
            filter: make(&resp, n, drive_rate)?,
            output_sample_rate: self.output_sample_rate,
        })
    }
}

pub struct ChainPlan {
    filter: FilterPlan,
    output_sample_rate: f64,
}

impl ChainPlan {
    pub fn run(&self, drive: &Waveform) -> Result<Waveform> {
        resample(&self.filter.apply(drive)?, self.output_sample_rate)
    }
}

/// Passes `drive` through every stage and digitizes at the output rate. The
/// output amplitude stays proportional to the applied phase (1.0 = pi).
pub fn simulate_chain(drive: &Waveform, cfg: &ChainConfig) -> Result<Waveform> {
    cfg.plan(drive.len(), drive.sample_rate())?.run(drive)
}

/// Intensity-modulator path: electrical stages set the modulator phase
/// (`pi * drive_gain * v`), the optical transfer of a modulator biased at
/// minimum gives the intensity, and the detector stages then filter it.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalChain {
    pub electrical: Vec<FrequencyResponse>,
    pub detector: Vec<FrequencyResponse>,
    /// Drive scaling so that a unit drive level reaches one V_pi at the modulator.
    pub drive_gain: f64,
    pub output_sample_rate: f64,
}

impl OpticalChain {
    pub fn plan(&self, n: usize, drive_rate: f64) -> Result<OpticalPlan> {
        self.build(n, drive_rate, FilterPlan::new)
    }

    pub fn periodic_plan(&self, n: usize, drive_rate: f64) -> Result<OpticalPlan> {
        self.build(n, drive_rate, FilterPlan::periodic)
    }

    fn build(
        &self,
        n: usize,
        drive_rate: f64,
        make: fn(&FrequencyResponse, usize, f64) -> Result<FilterPlan>,
    ) -> Result<OpticalPlan> {
        let electrical = chain(&self.electrical)?;
        let detector = chain(&self.detector)?;
        check_drive_rate(&chain(&[electrical.clone(), detector.clone()])?, drive_rate)?;
        Ok(OpticalPlan {
            electrical: make(&electrical, n, drive_rate)?,
            detector: make(&detector, n, drive_rate)?,
            drive_gain: self.drive_gain,
            output_sample_rate: self.output_sample_rate,
        })
    }

    /// Sets `drive_gain` so an isolated unit pulse peaks at exactly one V_pi
    /// after the electrical stages.
    pub fn calibrate_vpi(
        &mut self,
        rep_rate: f64,
        pulse_width: f64,
        drive_rate: f64,
    ) -> Result<()> {
        let spec =
            crate::waveform::PulseTrainSpec::selection_drive(rep_rate, pulse_width, 16, drive_rate);
        let mut symbols = vec![crate::waveform::Symbol::Off; 16];
        symbols[4] = crate::waveform::Symbol::On;
        let drive = crate::waveform::make_pulse_train(
            &spec,
            &crate::waveform::NominalPattern { symbols, seed: 0 },
        )?;
        let shaped = apply_response(&drive, &chain(&self.electrical)?)?;
        let peak = shaped.peak();
        if !(peak > 0.0) {
            return Err(Error::invalid("electrical chain blocks an isolated pulse"));
        }
        self.drive_gain = 1.0 / peak;
        Ok(())
    }
}

pub struct OpticalPlan {
    electrical: FilterPlan,
    detector: FilterPlan,
    drive_gain: f64,
    output_sample_rate: f64,
}

impl OpticalPlan {
    pub fn run(&self, drive: &Waveform) -> Result<Waveform> {
        let v = self.electrical.apply(drive)?;
        let gain = self.drive_gain;
        let intensity = v.map(|x| modulator_transfer(std::f64::consts::PI * gain * x))?;
        resample(&self.detector.apply(&intensity)?, self.output_sample_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_table() -> Vec<TablePoint> {
        vec![
            TablePoint {
                f_hz: 1e6,
                mag_db: 0.0,
                phase_deg: Some(0.0),
            },
            TablePoint {
                f_hz: 1e11,
                mag_db: 0.0,
                phase_deg: Some(0.0),
            },
        ]
    }

    #[test]
    fn bessel_polynomial_coefficients() {
        assert_eq!(reverse_bessel_coefficients(1), vec![1.0, 1.0]);
        assert_eq!(reverse_bessel_coefficients(3), vec![15.0, 15.0, 6.0, 1.0]);
        assert_eq!(
            reverse_bessel_coefficients(4),
            vec![105.0, 105.0, 45.0, 10.0, 1.0]
        );
    }

    #[test]
    fn bessel_dc_and_cutoff() {
        for order in 1..=10 {
            let h = design_bessel(order, 25e9).unwrap();
            assert!((h.magnitude(0.0) - 1.0).abs() < 1e-15);
            assert!(
                (h.magnitude(25e9) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
                "order {order}"
            );
        }
        assert!(matches!(
            design_bessel(0, 1e9),
            Err(Error::UnsupportedOrder(0))
        ));
        assert!(matches!(
            design_bessel(11, 1e9),
            Err(Error::UnsupportedOrder(11))
        ));
        assert!(design_bessel(4, -1.0).is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        let h = design_bessel(5, 12e9).unwrap();
        for f in [1e8, 3e9, 2e10, 7e10] {
            assert_eq!(h.eval(-f), h.eval(f).conj());
        }
    }

    #[test]
    fn table_knots_are_exact() {
        let pts = vec![
            TablePoint {
                f_hz: 1e9,
                mag_db: -0.1,
                phase_deg: Some(-5.0),
            },
            TablePoint {
                f_hz: 5e9,
                mag_db: -1.3,
                phase_deg: Some(-20.0),
            },
            TablePoint {
                f_hz: 2e10,
                mag_db: -6.5,
                phase_deg: Some(-80.0),
            },
        ];
        let FrequencyResponse::Tabulated(t) =
            tabulated_response(pts.clone(), PhaseMode::Measured, Extrapolation::Hold).unwrap()
        else {
            unreachable!()
        };
        for p in &pts {
            assert_eq!(t.magnitude_db(p.f_hz), p.mag_db);
            assert_eq!(t.phase_deg(p.f_hz), p.phase_deg.unwrap());
        }
        // log-frequency midpoint between 1 and 5 GHz
        let mid = (1e9f64 * 5e9).sqrt();
        assert!((t.magnitude_db(mid) - (-0.7)).abs() < 1e-12);
        assert_eq!(t.magnitude_db(1e12), -6.5);
    }

    #[test]
    fn table_rolloff_extrapolation() {
        let resp = tabulated_response(
            flat_table(),
            PhaseMode::Measured,
            Extrapolation::RolloffDbPerOctave(6.0),
        )
        .unwrap();
        let FrequencyResponse::Tabulated(t) = resp else {
            unreachable!()
        };
        assert!((t.magnitude_db(4e11) + 12.0).abs() < 1e-12);
        assert_eq!(t.magnitude_db(1.0), 0.0);
    }

    #[test]
    fn table_validation() {
        let one = vec![flat_table()[0]];
        assert!(tabulated_response(one, PhaseMode::Measured, Extrapolation::Hold).is_err());
        let mut unsorted = flat_table();
        unsorted.reverse();
        assert!(tabulated_response(unsorted, PhaseMode::Measured, Extrapolation::Hold).is_err());
        let no_phase = vec![
            TablePoint {
                f_hz: 1e6,
                mag_db: 0.0,
                phase_deg: None,
            },
            TablePoint {
                f_hz: 1e7,
                mag_db: 0.0,
                phase_deg: None,
            },
        ];
        assert!(
            tabulated_response(no_phase.clone(), PhaseMode::Measured, Extrapolation::Hold).is_err()
        );
        assert!(tabulated_response(
            no_phase,
            PhaseMode::IdealLinear { group_delay_s: 0.0 },
            Extrapolation::Hold
        )
        .is_ok());
    }

    #[test]
    fn flat_table_is_identity_magnitude() {
        let resp =
            tabulated_response(flat_table(), PhaseMode::Measured, Extrapolation::Hold).unwrap();
        for f in [0.0, 1e3, 1e9, 5e10, 1e11] {
            assert!((resp.magnitude(f) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_and_delay() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let wf = Waveform::new(x.clone(), 1.0, 0.0).unwrap();
        let out = apply_response(&wf, &FrequencyResponse::Identity).unwrap();
        for (a, b) in out.samples().iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
        let out = apply_response(&wf, &FrequencyResponse::IdealDelay { delay_s: 5.0 }).unwrap();
        for i in 0..64 {
            let expected = if i >= 5 { x[i - 5] } else { 0.0 };
            assert!((out.samples()[i] - expected).abs() < 1e-9, "sample {i}");
        }
    }

    #[test]
    fn chain_identity_and_commutation() {
        let a = design_bessel(4, 25e9).unwrap();
        let b = design_bessel(2, 12e9).unwrap();
        let ia = chain(&[FrequencyResponse::Identity, a.clone()]).unwrap();
        let ab = chain(&[a.clone(), b.clone()]).unwrap();
        let ba = chain(&[b, a.clone()]).unwrap();
        for f in [0.0, 1e9, 1.3e10, 4e10] {
            assert_eq!(ia.eval(f), a.eval(f));
            assert!((ab.eval(f) - ba.eval(f)).norm() < 1e-15);
        }
        assert!(chain(&[]).is_err());
    }

    #[test]
    fn residue_is_negligible() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let wf = Waveform::new(x, 120e9, 0.0).unwrap();
        let resp = design_bessel(4, 12e9).unwrap();
        let plan = FilterPlan::new(&resp, wf.len(), wf.sample_rate()).unwrap();
        assert_eq!(plan.padded_len(), 2048);
        let (_, residue) = plan.apply_with_residue(&wf).unwrap();
        assert!(residue < 1e-9, "residue {residue}");
    }

    #[test]
    fn zero_drive_zero_output() {
        let wf = Waveform::zeros(1200, 120e9).unwrap();
        let cfg = ChainConfig {
            stages: vec![
                design_bessel(4, 25e9).unwrap(),
                design_bessel(4, 12e9).unwrap(),
            ],
            output_sample_rate: 40e9,
        };
        let out = simulate_chain(&wf, &cfg).unwrap();
        assert_eq!(out.len(), 400);
        assert!(out.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn drive_rate_check() {
        let wf = Waveform::zeros(100, 40e9).unwrap();
        let cfg = ChainConfig {
            stages: vec![design_bessel(4, 25e9).unwrap()],
            output_sample_rate: 40e9,
        };
        assert!(simulate_chain(&wf, &cfg).is_err());
    }

    #[test]
    fn periodic_plan_is_steady_state() {
        let period: Vec<f64> = (0..300)
            .map(|i| if i % 37 < 8 { 1.0 } else { 0.0 })
            .collect();
        let resp = design_bessel(4, 5e9).unwrap();
        let fs = 80e9;
        let looped: Vec<f64> = period
            .iter()
            .cycle()
            .take(period.len() * 6)
            .copied()
            .collect();
        let linear = apply_response(&Waveform::new(looped, fs, 0.0).unwrap(), &resp).unwrap();
        let steady = &linear.samples()[4 * 300..5 * 300];
        for n in [300, 301] {
            let mut p = period.clone();
            p.truncate(n.min(300));
            p.resize(n, 0.0);
            let plan = FilterPlan::periodic(&resp, n, fs).unwrap();
            assert_eq!(plan.padded_len(), n);
            let (out, residue) = plan
                .apply_with_residue(&Waveform::new(p, fs, 0.0).unwrap())
                .unwrap();
            assert!(residue < 1e-9);
            if n == 300 {
                let diff = out
                    .samples()
                    .iter()
                    .zip(steady)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-7, "max diff {diff}");
            }
        }
    }
}
