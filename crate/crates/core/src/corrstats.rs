//! Correlation and distinguishability statistics over extracted pulse records.
//!
//! All reductions visit traces in batch order and records in slot order, and
//! standard deviations use the two-pass sample formula (N - 1 denominator),
//! so results are bit-stable for a given input.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::phasemap::PulseRecord;
use crate::waveform::{Symbol, Waveform};

/// Transition case: the pulse `lag` slots earlier had nominal `prev`, the
/// current pulse has nominal `cur`. Ordered by lag, then `cur`, then `prev`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseKey {
    pub lag: usize,
    pub cur: Symbol,
    pub prev: Symbol,
}

impl CaseKey {
    pub const CURRENT: [Symbol; 2] = [Symbol::SHalf, Symbol::SPi];

    /// The six cases at `lag`.
    pub fn cases(lag: usize) -> impl Iterator<Item = CaseKey> {
        Self::CURRENT.into_iter().flat_map(move |cur| {
            Symbol::PHASES
                .into_iter()
                .map(move |prev| CaseKey { lag, cur, prev })
        })
    }

    pub fn is_baseline(&self) -> bool {
        self.prev == Symbol::S0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseStats {
    pub key: CaseKey,
    pub count: usize,
    /// `None` when the case never occurred.
    pub mean_phi: Option<f64>,
    pub std_phi: Option<f64>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    // shifted by the first value so that identical inputs give that value exactly
    let v0 = values[0];
    let mean = v0 + values.iter().map(|v| v - v0).sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

fn by_slot(trace: &[PulseRecord]) -> BTreeMap<usize, &PulseRecord> {
    trace.iter().map(|r| (r.slot_index, r)).collect()
}

/// Per-lag, per-case phase statistics. Pairs never cross trace boundaries.
pub fn phase_case_stats(batch: &[Vec<PulseRecord>], n_max: usize) -> Result<Vec<CaseStats>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut values: BTreeMap<CaseKey, Vec<f64>> = (1..=n_max)
        .flat_map(CaseKey::cases)
        .map(|k| (k, Vec::new()))
        .collect();
    for trace in batch {
        for r in trace {
            if r.nominal.nominal_phase().is_none() {
                return Err(Error::UnknownSymbol(r.nominal.to_string()));
            }
            if r.phi.is_none() {
                return Err(Error::invalid(format!(
                    "record for slot {} has no phase",
                    r.slot_index
                )));
            }
        }
        let slots = by_slot(trace);
        for (&k, cur) in &slots {
            for lag in 1..=n_max.min(k) {
                let Some(prev) = slots.get(&(k - lag)) else {
                    continue;
                };
                let key = CaseKey {
                    lag,
                    cur: cur.nominal,
                    prev: prev.nominal,
                };
                if let Some(v) = values.get_mut(&key) {
                    v.push(cur.phi.unwrap_or_default());
                }
            }
        }
    }
    Ok(values
        .into_iter()
        .map(|(key, v)| {
            let ms = mean_std(&v);
            CaseStats {
                key,
                count: v.len(),
                mean_phi: ms.map(|m| m.0),
                std_phi: ms.map(|m| m.1),
            }
        })
        .collect())
}

/// Signed deviation per case and the largest absolute deviation per lag.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviationSummary {
    pub deviation: BTreeMap<CaseKey, f64>,
    pub max_deviation_per_n: BTreeMap<usize, f64>,
}

/// `mean(n, prev, cur) - mean(n, 0, cur)`. Cases that never occurred are left
/// out; a missing baseline is an error.
pub fn phase_deviation(stats: &[CaseStats]) -> Result<DeviationSummary> {
    let means: BTreeMap<CaseKey, Option<f64>> = stats.iter().map(|s| (s.key, s.mean_phi)).collect();
    let mut out = DeviationSummary::default();
    for s in stats {
        let Some(mean) = s.mean_phi else { continue };
        let base_key = CaseKey {
            prev: Symbol::S0,
            ..s.key
        };
        let base = means
            .get(&base_key)
            .copied()
            .flatten()
            .ok_or(Error::MissingBaseline {
                lag: s.key.lag,
                cur: s.key.cur.to_string(),
            })?;
        let d = mean - base;
        out.deviation.insert(s.key, d);
        let m = out.max_deviation_per_n.entry(s.key.lag).or_insert(0.0);
        *m = m.max(d.abs());
    }
    Ok(out)
}

/// Mean and standard deviation across trials of per-lag curves.
pub fn aggregate_trials(curves: &[BTreeMap<usize, f64>]) -> BTreeMap<usize, (f64, f64)> {
    let mut lags: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for c in curves {
        for (&n, &v) in c {
            lags.entry(n).or_default().push(v);
        }
    }
    lags.into_iter()
        .filter_map(|(n, v)| mean_std(&v).map(|ms| (n, ms)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingRow {
    pub spacing_ns: u32,
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// `mean / max over spacings of mean`.
    pub normalized_mean: Option<f64>,
}

/// Peak intensity grouped by distance to the previous pulse, `l = 1..=l_max`.
pub fn intensity_by_spacing(batch: &[Vec<PulseRecord>], l_max: u32) -> Result<Vec<SpacingRow>> {
    if l_max == 0 {
        return Err(Error::invalid("l_max must be at least 1"));
    }
    let mut buckets: BTreeMap<u32, Vec<f64>> = (1..=l_max).map(|l| (l, Vec::new())).collect();
    for trace in batch {
        for r in trace {
            let (Some(l), Some(i)) = (r.spacing_prev_ns, r.peak_intensity()) else {
                continue;
            };
            if let Some(b) = buckets.get_mut(&l) {
                b.push(i);
            }
        }
    }
    let stats: Vec<(u32, usize, Option<(f64, f64)>)> = buckets
        .iter()
        .map(|(&l, v)| (l, v.len(), mean_std(v)))
        .collect();
    let max_mean = stats
        .iter()
        .filter_map(|s| s.2.map(|m| m.0))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(stats
        .into_iter()
        .map(|(l, count, ms)| SpacingRow {
            spacing_ns: l,
            count,
            mean: ms.map(|m| m.0),
            std: ms.map(|m| m.1),
            normalized_mean: ms.map(|m| m.0 / max_mean),
        })
        .collect())
}

/// Pointwise mean of equally sampled traces.
pub fn average_traces(group: &[Waveform]) -> Result<Waveform> {
    let first = group.first().ok_or(Error::EmptyWaveform)?;
    let mut acc = vec![0.0; first.len()];
    for w in group {
        if w.len() != first.len() {
            return Err(Error::LengthMismatch(first.len(), w.len()));
        }
        if w.sample_rate() != first.sample_rate() {
            return Err(Error::invalid("sample rates differ within group"));
        }
        for (a, x) in acc.iter_mut().zip(w.samples()) {
            *a += x;
        }
    }
    let n = group.len() as f64;
    first.with_samples(acc.into_iter().map(|a| a / n).collect())
}

/// `1 - <a, b> / (|a| |b|)`, in `[0, 2]`.
pub fn distinguishability(a: &Waveform, b: &Waveform) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.samples().iter().zip(b.samples()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((1.0 - dot / (na * nb).sqrt()).clamp(0.0, 2.0))
}

/// ε for every unordered pair of named groups, in input order.
pub fn epsilon_pairs(groups: &[(String, Waveform)]) -> Result<BTreeMap<(String, String), f64>> {
    let mut out = BTreeMap::new();
    for (i, (na, a)) in groups.iter().enumerate() {
        for (nb, b) in &groups[i + 1..] {
            out.insert((na.clone(), nb.clone()), distinguishability(a, b)?);
        }
    }
    Ok(out)
}

/// For each group, the largest ε against any other group.
pub fn max_epsilon_per_group(pairs: &BTreeMap<(String, String), f64>) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for ((a, b), &e) in pairs {
        for name in [a, b] {
            let m = out.entry(name.clone()).or_insert(0.0);
            *m = m.max(e);
        }
    }
    out
}

/// Everything the phase and intensity analyses produce for one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub rep_rate: f64,
    pub per_case: Vec<CaseStats>,
    pub deviation: BTreeMap<CaseKey, f64>,
    pub max_deviation_per_n: BTreeMap<usize, f64>,
    pub intensity_by_spacing: Vec<SpacingRow>,
    pub epsilon_pairs: BTreeMap<(String, String), f64>,
}

impl CorrelationReport {
    /// Phase statistics for one repetition rate.
    pub fn from_phase_records(
        rep_rate: f64,
        batch: &[Vec<PulseRecord>],
        n_max: usize,
    ) -> Result<Self> {
        let per_case = phase_case_stats(batch, n_max)?;
        let dev = phase_deviation(&per_case)?;
        Ok(Self {
            rep_rate,
            per_case,
            deviation: dev.deviation,
            max_deviation_per_n: dev.max_deviation_per_n,
            ..Default::default()
        })
    }

    /// Standard error of the deviation that attains the maximum at each lag,
    /// from the spreads of that case and its baseline.
    pub fn max_deviation_stderr(&self) -> BTreeMap<usize, f64> {
        let stats: BTreeMap<CaseKey, &CaseStats> =
            self.per_case.iter().map(|s| (s.key, s)).collect();
        let se2 = |k: &CaseKey| -> f64 {
            stats
                .get(k)
                .and_then(|s| s.std_phi.map(|sd| sd * sd / s.count.max(1) as f64))
                .unwrap_or(0.0)
        };
        let mut out = BTreeMap::new();
        for (&n, &max) in &self.max_deviation_per_n {
            let Some((k, _)) = self
                .deviation
                .iter()
                .filter(|(k, d)| k.lag == n && d.abs() == max)
                .next()
            else {
                continue;
            };
            let base = CaseKey {
                prev: Symbol::S0,
                ..*k
            };
            out.insert(n, (se2(k) + se2(&base)).sqrt());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rec(slot: usize, nominal: Symbol, phi: f64) -> PulseRecord {
        PulseRecord {
            slot_index: slot,
            nominal,
            phi: Some(phi),
            peak: None,
            spacing_prev_ns: None,
        }
    }

    fn ideal(symbols: &[Symbol]) -> Vec<PulseRecord> {
        symbols
            .iter()
            .enumerate()
            .map(|(k, &s)| rec(k, s, s.nominal_phase().unwrap()))
            .collect()
    }

    #[test]
    fn ideal_records_have_nominal_means() {
        use Symbol::*;
        let t = ideal(&[
            S0, SPi, SHalf, SPi, SPi, S0, SHalf, SHalf, SPi, S0, SHalf, S0, SHalf, SPi,
        ]);
        let stats = phase_case_stats(&[t], 2).unwrap();
        assert_eq!(stats.len(), 12);
        for s in stats.iter().filter(|s| s.count > 0) {
            assert_eq!(s.mean_phi.unwrap(), s.key.cur.nominal_phase().unwrap());
            assert_eq!(s.std_phi.unwrap(), 0.0);
        }
        let dev = phase_deviation(&stats).unwrap();
        assert!(dev.max_deviation_per_n.values().all(|&d| d == 0.0));
    }

    #[test]
    fn hand_built_fixture() {
        use Symbol::*;
        // slots: 0:S0 1:SPi 2:SPi 3:SHalf 4:S0 5:SPi
        let t = vec![
            rec(0, S0, 0.01),
            rec(1, SPi, 3.10),
            rec(2, SPi, 3.20),
            rec(3, SHalf, 1.60),
            rec(4, S0, 0.02),
            rec(5, SPi, 3.16),
        ];
        let stats = phase_case_stats(&[t], 1).unwrap();
        let get = |prev, cur| {
            stats
                .iter()
                .find(|s| s.key == CaseKey { lag: 1, cur, prev })
                .unwrap()
        };
        assert_eq!(get(S0, SPi).count, 2);
        assert_eq!(get(S0, SPi).mean_phi.unwrap(), (3.10 + 3.16) / 2.0);
        assert_eq!(get(SPi, SPi).mean_phi.unwrap(), 3.20);
        assert_eq!(get(SPi, SHalf).mean_phi.unwrap(), 1.60);
        assert_eq!(get(S0, SHalf).count, 0);
        // SHalf baseline missing at lag 1 while pi->pi/2 occurred
        assert!(matches!(
            phase_deviation(&stats),
            Err(Error::MissingBaseline { lag: 1, .. })
        ));
    }

    #[test]
    fn deviation_example() {
        let eps = 0.0123;
        let key = |prev| CaseKey {
            lag: 1,
            cur: Symbol::SPi,
            prev,
        };
        let stats = vec![
            CaseStats {
                key: key(Symbol::S0),
                count: 3,
                mean_phi: Some(PI),
                std_phi: Some(0.0),
            },
            CaseStats {
                key: key(Symbol::SPi),
                count: 4,
                mean_phi: Some(PI + eps),
                std_phi: Some(0.0),
            },
        ];
        let dev = phase_deviation(&stats).unwrap();
        assert!((dev.deviation[&key(Symbol::SPi)] - eps).abs() < 1e-15);
        assert_eq!(dev.deviation[&key(Symbol::S0)], 0.0);
        assert!((dev.max_deviation_per_n[&1] - eps).abs() < 1e-15);
    }

    #[test]
    fn boundary_pairs_excluded() {
        use Symbol::*;
        let a = ideal(&[SPi, SPi]);
        let b = ideal(&[S0, SPi]);
        let stats = phase_case_stats(&[a, b], 1).unwrap();
        let total: usize = stats.iter().map(|s| s.count).sum();
        assert_eq!(total, 2);
    }

    fn spaced(spacing: u32, intensity: f64) -> PulseRecord {
        PulseRecord {
            slot_index: 0,
            nominal: Symbol::On,
            phi: None,
            peak: Some(crate::phasemap::PeakFeature {
                intensity,
                time_offset: 0.0,
            }),
            spacing_prev_ns: Some(spacing),
        }
    }

    #[test]
    fn spacing_identical_pulses() {
        let t: Vec<_> = (1..=7)
            .flat_map(|l| [spaced(l, 2.66), spaced(l, 2.66)])
            .collect();
        let rows = intensity_by_spacing(&[t], 7).unwrap();
        assert_eq!(rows.len(), 7);
        for r in rows {
            assert_eq!(r.normalized_mean, Some(1.0));
            assert_eq!(r.std, Some(0.0));
        }
    }

    #[test]
    fn spacing_dim_first_bucket() {
        let t: Vec<_> = (1..=7)
            .map(|l| spaced(l, if l == 1 { 0.996 } else { 1.0 }))
            .collect();
        let rows = intensity_by_spacing(&[t], 7).unwrap();
        assert!((rows[0].normalized_mean.unwrap() - 0.996).abs() < 1e-15);
        assert_eq!(rows[1].normalized_mean, Some(1.0));
    }

    #[test]
    fn spacing_empty_bucket_flagged() {
        let rows = intensity_by_spacing(&[vec![spaced(2, 1.0)]], 3).unwrap();
        assert_eq!(rows[0].count, 0);
        assert!(rows[0].mean.is_none());
        assert_eq!(rows[1].normalized_mean, Some(1.0));
    }

    #[test]
    fn averaging() {
        let x = Waveform::new(vec![1.0, -2.0, 3.0], 1.0, 0.0).unwrap();
        let neg = x.map(|v| -v).unwrap();
        assert_eq!(average_traces(&[x.clone(), x.clone()]).unwrap(), x);
        assert!(average_traces(&[x.clone(), neg])
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.0));
        let short = Waveform::new(vec![1.0], 1.0, 0.0).unwrap();
        assert!(matches!(
            average_traces(&[x, short]),
            Err(Error::LengthMismatch(3, 1))
        ));
    }

    #[test]
    fn epsilon_basics() {
        let a = Waveform::new(vec![0.1, 0.7, 1.3, 0.4], 1.0, 0.0).unwrap();
        let b = a.map(|v| 2.0 * v).unwrap();
        assert_eq!(distinguishability(&a, &a).unwrap(), 0.0);
        assert_eq!(distinguishability(&a, &b).unwrap(), 0.0);
        let u = Waveform::new(vec![1.0, 0.0], 1.0, 0.0).unwrap();
        let v = Waveform::new(vec![0.0, 3.0], 1.0, 0.0).unwrap();
        assert_eq!(distinguishability(&u, &v).unwrap(), 1.0);
        let z = Waveform::zeros(2, 1.0).unwrap();
        assert!(matches!(distinguishability(&u, &z), Err(Error::ZeroNorm)));
    }

    #[test]
    fn trial_aggregation() {
        let c1 = BTreeMap::from([(1, 0.1), (2, 0.05)]);
        let c2 = BTreeMap::from([(1, 0.3), (2, 0.05)]);
        let agg = aggregate_trials(&[c1, c2]);
        assert!((agg[&1].0 - 0.2).abs() < 1e-15);
        assert!((agg[&1].1 - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(agg[&2].1, 0.0);
    }
}
