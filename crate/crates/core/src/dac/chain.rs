//! Signal-chain impairments between the sequence memory and the acquired
//! spectrum.
//!
//! Traces are single periods of periodic signals sampled on a uniform grid.
//! Operations that need neighbouring samples (filtering, interpolation) wrap
//! around the period.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_named_seed, derive_seed, rng_from_seed};
use crate::seq::TernarySequence;
use crate::spectrum::{dft, metrics, MetricsReport, Spectrum};

use super::{apply_dac, DacModel};

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogTrace {
    pub samples: Vec<f64>,
    /// Samples per second.
    pub sample_rate: f64,
}

impl AnalogTrace {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Self {
        AnalogTrace {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }
}

/// DDS memory fill by floor mapping: sample `m` (1-based) of the memory
/// holds `seq[floor((m-1) N / depth) + 1]`.
pub fn dds_stretch(levels: &[f64], memory_depth: usize) -> Result<Vec<f64>> {
    let n = levels.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if memory_depth < n {
        return Err(Error::InvalidArgument(format!(
            "memory depth {memory_depth} is shorter than the sequence ({n})"
        )));
    }
    Ok((0..memory_depth)
        .map(|m| levels[((m as u128 * n as u128) / memory_depth as u128) as usize])
        .collect())
}

/// Number of memory samples each chip occupies after [`dds_stretch`].
pub fn dds_chip_durations(n: usize, memory_depth: usize) -> Vec<usize> {
    let start = |c: usize| (c as u128 * memory_depth as u128).div_ceil(n as u128) as usize;
    (0..n).map(|c| start(c + 1) - start(c)).collect()
}

/// Zero-order hold: every level is repeated `oversampling` times.
pub fn zoh_upsample(levels: &[f64], oversampling: usize, chip_rate: f64) -> Result<AnalogTrace> {
    if oversampling == 0 {
        return Err(Error::InvalidArgument(
            "oversampling must be at least 1".into(),
        ));
    }
    if !(chip_rate > 0.0) {
        return Err(Error::InvalidArgument("chip rate must be positive".into()));
    }
    let samples = levels
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, oversampling))
        .collect();
    Ok(AnalogTrace::new(samples, chip_rate * oversampling as f64))
}

/// 3 dB cutoff `1 / (2 pi R C)` in Hz.
pub fn rc_cutoff_hz(r_ohms: f64, c_farads: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * r_ohms * c_farads)
}

/// First-order RC low-pass `H(s) = 1/(1 + sRC)`, periodic steady state.
///
/// The trace is one period of a periodic input; each DFT bin is multiplied
/// by `H(j 2 pi f_k)`, which is the response once every start-up transient
/// has decayed.
pub fn rc_filter(trace: &AnalogTrace, r_ohms: f64, c_farads: f64) -> Result<AnalogTrace> {
    if !(r_ohms > 0.0 && c_farads > 0.0) {
        return Err(Error::InvalidArgument("R and C must be positive".into()));
    }
    let n = trace.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let tau = r_ohms * c_farads;
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = trace
        .samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let h = if 2 * k == n {
            // Nyquist bin: average of H(f) and H(-f) keeps the output real.
            let w = std::f64::consts::PI * trace.sample_rate * tau;
            Complex64::new(1.0 / (1.0 + w * w), 0.0)
        } else {
            let signed = if 2 * k < n {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let w = 2.0 * std::f64::consts::PI * signed * trace.sample_rate / n as f64 * tau;
            Complex64::new(1.0, 0.0) / Complex64::new(1.0, w)
        };
        *b *= h;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(AnalogTrace::new(
        buf.iter().map(|b| b.re * scale).collect(),
        trace.sample_rate,
    ))
}

/// Half-width of the interpolation kernel is `JITTER_TAPS / 2` samples.
pub const JITTER_TAPS: usize = 64;
pub const KAISER_BETA: f64 = 8.0;

fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Periodic band-limited reconstruction at fractional sample position `t`
/// (in samples), using a 64-tap Kaiser-windowed sinc kernel.
pub fn kaiser_sinc_interpolate(samples: &[f64], t: f64) -> f64 {
    let n = samples.len() as i64;
    let base = t.floor();
    if base == t {
        return samples[(base as i64).rem_euclid(n) as usize];
    }
    let half = (JITTER_TAPS / 2) as i64;
    let i0b = bessel_i0(KAISER_BETA);
    let mut acc = 0.0;
    for j in (1 - half)..=half {
        let m = base as i64 + j;
        let d = t - m as f64;
        let x = d / half as f64;
        let w = if x.abs() >= 1.0 {
            0.0
        } else {
            bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / i0b
        };
        acc += samples[m.rem_euclid(n) as usize] * sinc(d) * w;
    }
    acc
}

/// Resamples the trace at `t_m + eps_m`, `eps_m ~ N(0, sigma^2)` i.i.d.
pub fn add_jitter(trace: &AnalogTrace, sigma: f64, rng_seed: u64) -> Result<AnalogTrace> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(
            "jitter sigma must be nonnegative".into(),
        ));
    }
    let dt = 1.0 / trace.sample_rate;
    if sigma > 0.5 * dt {
        return Err(Error::InvalidArgument(format!(
            "jitter sigma {sigma} s exceeds half a sample interval ({} s)",
            0.5 * dt
        )));
    }
    if sigma == 0.0 {
        return Ok(trace.clone());
    }
    let mut rng = rng_from_seed(rng_seed);
    let normal = Normal::new(0.0, sigma / dt).expect("finite sigma");
    let samples = (0..trace.len())
        .map(|m| kaiser_sinc_interpolate(&trace.samples, m as f64 + normal.sample(&mut rng)))
        .collect();
    Ok(AnalogTrace::new(samples, trace.sample_rate))
}

/// Adds white Gaussian noise of standard deviation `sigma`.
pub fn add_noise(trace: &AnalogTrace, sigma: f64, rng_seed: u64) -> Result<AnalogTrace> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(
            "noise sigma must be nonnegative".into(),
        ));
    }
    if sigma == 0.0 {
        return Ok(trace.clone());
    }
    let mut rng = rng_from_seed(rng_seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let samples = trace
        .samples
        .iter()
        .map(|&v| v + normal.sample(&mut rng))
        .collect();
    Ok(AnalogTrace::new(samples, trace.sample_rate))
}

/// Mid-tread uniform quantizer with step `2 FS / 2^bits`. Codes run from
/// `-2^(bits-1)` to `2^(bits-1) - 1`, so outputs are clipped to
/// `[-FS, FS - step]`.
pub fn quantize(trace: &AnalogTrace, bits: u32, full_scale: f64) -> Result<AnalogTrace> {
    if !(1..=32).contains(&bits) {
        return Err(Error::InvalidArgument(format!(
            "quantizer bits {bits} outside 1..=32"
        )));
    }
    if !(full_scale > 0.0) {
        return Err(Error::InvalidArgument("full scale must be positive".into()));
    }
    let levels = 2f64.powi(bits as i32);
    let step = 2.0 * full_scale / levels;
    let (lo, hi) = (-levels / 2.0, levels / 2.0 - 1.0);
    let samples = trace
        .samples
        .iter()
        .map(|&v| (v / step).round().clamp(lo, hi) * step)
        .collect();
    Ok(AnalogTrace::new(samples, trace.sample_rate))
}

/// Running pointwise sum of equal-length periods.
#[derive(Debug, Clone)]
pub struct CoherentAverager {
    sum: Vec<f64>,
    count: usize,
}

impl CoherentAverager {
    pub fn new(period_len: usize) -> Self {
        CoherentAverager {
            sum: vec![0.0; period_len],
            count: 0,
        }
    }

    pub fn add(&mut self, period: &[f64]) -> Result<()> {
        if period.len() != self.sum.len() {
            return Err(Error::LengthMismatch {
                expected: self.sum.len(),
                got: period.len(),
            });
        }
        for (s, v) in self.sum.iter_mut().zip(period) {
            *s += v;
        }
        self.count += 1;
        Ok(())
    }

    fn merge(&mut self, other: &CoherentAverager) {
        for (s, v) in self.sum.iter_mut().zip(&other.sum) {
            *s += v;
        }
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptyInput);
        }
        let c = self.count as f64;
        Ok(self.sum.iter().map(|s| s / c).collect())
    }
}

/// Pointwise mean over periods.
pub fn coherent_average<P: AsRef<[f64]>>(periods: &[P]) -> Result<Vec<f64>> {
    let first = periods.first().ok_or(Error::EmptyInput)?;
    let mut avg = CoherentAverager::new(first.as_ref().len());
    for p in periods {
        avg.add(p.as_ref())?;
    }
    avg.mean()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcParams {
    pub r_ohms: f64,
    pub c_farads: f64,
}

fn default_one() -> usize {
    1
}

fn default_full_scale() -> f64 {
    1.0
}

/// Measurement-chain parameters.
///
/// `chip_rate` is the rate at which sequence (or DDS memory) samples are
/// played; the acquisition runs at `chip_rate * oversampling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub chip_rate: f64,
    #[serde(default = "default_one")]
    pub oversampling: usize,
    #[serde(default)]
    pub dac_levels: Option<DacModel>,
    #[serde(default)]
    pub rc: Option<RcParams>,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub quant_bits: Option<u32>,
    #[serde(default = "default_full_scale")]
    pub full_scale: f64,
    #[serde(default = "default_one")]
    pub periods: usize,
    #[serde(default)]
    pub dds_memory_depth: Option<usize>,
    #[serde(default = "default_true")]
    pub exclude_dc: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            chip_rate: 4200.0,
            oversampling: 1,
            dac_levels: None,
            rc: None,
            jitter_sigma: 0.0,
            noise_sigma: 0.0,
            quant_bits: None,
            full_scale: 1.0,
            periods: 1,
            dds_memory_depth: None,
            exclude_dc: true,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.chip_rate > 0.0) {
            return bad("chip_rate must be positive");
        }
        if self.oversampling == 0 {
            return bad("oversampling must be at least 1");
        }
        if self.periods == 0 {
            return bad("periods must be at least 1");
        }
        if !(self.jitter_sigma >= 0.0) || !(self.noise_sigma >= 0.0) {
            return bad("jitter_sigma and noise_sigma must be nonnegative");
        }
        if let Some(b) = self.quant_bits {
            if !(1..=32).contains(&b) {
                return bad("quant_bits must be in 1..=32");
            }
        }
        if !(self.full_scale > 0.0) {
            return bad("full_scale must be positive");
        }
        if let Some(rc) = self.rc {
            if !(rc.r_ohms > 0.0 && rc.c_farads > 0.0) {
                return bad("R and C must be positive");
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ChainConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: ChainConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// Result of [`simulate`].
#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// Coherently averaged period.
    pub period: AnalogTrace,
    /// DFT of the averaged period; bin `k` is harmonic `k` of the sequence
    /// repetition frequency.
    pub spectrum: Spectrum,
    /// Present when the period length is a multiple of 6.
    pub metrics: Option<MetricsReport>,
}

const PERIOD_CHUNK: usize = 64;

/// Runs a sequence through DAC, optional DDS stretching, zero-order hold,
/// RC filter, then per acquired period jitter, noise and quantization, and
/// finally coherent averaging. Period `p` draws its randomness from
/// `derive_seed(seed, p)`.
pub fn simulate(seq: &TernarySequence, cfg: &ChainConfig, seed: u64) -> Result<ChainOutput> {
    cfg.validate()?;
    let dac = cfg.dac_levels.unwrap_or_default();
    let mut levels = apply_dac(seq, &dac);
    if let Some(depth) = cfg.dds_memory_depth {
        levels = dds_stretch(&levels, depth)?;
    }
    let mut analog = zoh_upsample(&levels, cfg.oversampling, cfg.chip_rate)?;
    if let Some(rc) = cfg.rc {
        analog = rc_filter(&analog, rc.r_ohms, rc.c_farads)?;
    }

    let acquire = |p: usize| -> Result<Vec<f64>> {
        let s = derive_seed(seed, p as u64);
        let mut t = add_jitter(&analog, cfg.jitter_sigma, derive_named_seed(s, "jitter"))?;
        t = add_noise(&t, cfg.noise_sigma, derive_named_seed(s, "noise"))?;
        if let Some(bits) = cfg.quant_bits {
            t = quantize(&t, bits, cfg.full_scale)?;
        }
        Ok(t.samples)
    };

    let len = analog.len();
    let chunks: Vec<CoherentAverager> = (0..cfg.periods.div_ceil(PERIOD_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = CoherentAverager::new(len);
            for p in c * PERIOD_CHUNK..((c + 1) * PERIOD_CHUNK).min(cfg.periods) {
                acc.add(&acquire(p)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = CoherentAverager::new(len);
    for c in &chunks {
        total.merge(c);
    }
    let period = AnalogTrace::new(total.mean()?, analog.sample_rate);
    let spectrum = dft(&period.samples)?;
    let metrics = if len % 6 == 0 {
        Some(metrics(&spectrum, cfg.exclude_dc)?)
    } else {
        None
    };
    Ok(ChainOutput {
        period,
        spectrum,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{make_ds, make_mls};

    #[test]
    fn dds_integer_ratio_repeats_chips() {
        let x = [1.0, 1.0, 0.0, -1.0, -1.0, 0.0];
        let y = dds_stretch(&x, 12).unwrap();
        assert_eq!(
            y,
            vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, -1.0, -1.0, -1.0, -1.0, 0.0, 0.0]
        );
        assert!(dds_stretch(&x, 5).is_err());
    }

    #[test]
    fn dds_chip_durations_n42() {
        let d = dds_chip_durations(42, 65536);
        assert!(d.iter().all(|&c| c == 1560 || c == 1561));
        assert_eq!(d.iter().sum::<usize>(), 65536);
        // durations agree with the stretched memory content
        let levels: Vec<f64> = (0..42).map(|i| i as f64).collect();
        let y = dds_stretch(&levels, 65536).unwrap();
        for (c, &dur) in d.iter().enumerate() {
            assert_eq!(y.iter().filter(|&&v| v == c as f64).count(), dur);
        }
    }

    #[test]
    fn dds_decimation_inverts_integer_stretch() {
        let s = make_ds(&make_mls(3, 1).unwrap()).unwrap().to_f64();
        for c in [1usize, 2, 5] {
            let y = dds_stretch(&s, c * s.len()).unwrap();
            let back: Vec<f64> = y.iter().step_by(c).copied().collect();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn zoh_basic() {
        let t = zoh_upsample(&[1.0, 0.0, -1.0], 1, 10.0).unwrap();
        assert_eq!(t.samples, vec![1.0, 0.0, -1.0]);
        let t = zoh_upsample(&[0.0, 1.0, 0.0], 8, 10.0).unwrap();
        assert_eq!(t.samples[8..16], [1.0; 8]);
        assert_eq!(t.samples.iter().sum::<f64>(), 8.0);
        assert_eq!(t.sample_rate, 80.0);
        assert!(zoh_upsample(&[1.0], 0, 1.0).is_err());
    }

    #[test]
    fn rc_dc_gain_is_unity() {
        let t = AnalogTrace::new(vec![0.7; 64], 1000.0);
        let y = rc_filter(&t, 1000.0, 80e-9).unwrap();
        assert!(y.samples.iter().all(|v| (v - 0.7).abs() < 1e-12));
        assert!(rc_filter(&t, 0.0, 1e-9).is_err());
    }

    #[test]
    fn rc_cutoff_value() {
        assert!((rc_cutoff_hz(1000.0, 80e-9) - 1989.4368).abs() < 1e-3);
    }

    #[test]
    fn jitter_zero_is_identity_and_bounds() {
        let t = AnalogTrace::new(vec![1.0, 0.0, -1.0, 0.5], 100.0);
        assert_eq!(add_jitter(&t, 0.0, 1).unwrap(), t);
        assert!(add_jitter(&t, 0.006, 1).is_err());
        assert!(add_jitter(&t, -1.0, 1).is_err());
    }

    #[test]
    fn kaiser_interpolation_reproduces_band_limited_signal() {
        let n = 256;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 5.0 * i as f64 / n as f64).sin())
            .collect();
        for &t in &[3.25, 100.5, 255.9] {
            let want = (2.0 * std::f64::consts::PI * 5.0 * t / n as f64).sin();
            assert!((kaiser_sinc_interpolate(&x, t) - want).abs() < 1e-4);
        }
        assert_eq!(kaiser_sinc_interpolate(&x, 7.0), x[7]);
    }

    #[test]
    fn quantizer_rules() {
        let t = AnalogTrace::new(vec![-1.0, 0.0, 1.0], 1.0);
        let q = quantize(&t, 16, 1.0001).unwrap();
        let step = 2.0 * 1.0001 / 65536.0;
        for (a, b) in q.samples.iter().zip(&t.samples) {
            assert!((a - b).abs() <= step / 2.0);
        }
        let q1 = quantize(&t, 1, 1.0).unwrap();
        assert_eq!(q1.samples, vec![-1.0, 0.0, 0.0]);
        assert!(quantize(&t, 0, 1.0).is_err());
        assert!(quantize(&t, 33, 1.0).is_err());
        let clip = quantize(&AnalogTrace::new(vec![5.0, -5.0], 1.0), 8, 1.0).unwrap();
        assert_eq!(clip.samples, vec![1.0 - 2.0 / 256.0, -1.0]);
    }

    #[test]
    fn averaging_identity_and_mismatch() {
        let p = vec![1.0, 2.0, 3.0];
        assert_eq!(coherent_average(std::slice::from_ref(&p)).unwrap(), p);
        assert_eq!(
            coherent_average(&[p.clone(), p.clone(), p.clone()]).unwrap(),
            p
        );
        assert!(matches!(
            coherent_average(&[vec![1.0, 2.0], vec![1.0]]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(coherent_average::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn config_parsing() {
        let c = ChainConfig::from_toml("chip_rate = 4200.0\nperiods = 10\ndac_levels = [-1.0, 0.001, 1.0]\n[rc]\nr_ohms = 1000.0\nc_farads = 8e-8\n").unwrap();
        assert_eq!(c.periods, 10);
        assert_eq!(c.oversampling, 1);
        assert_eq!(c.rc.unwrap().r_ohms, 1000.0);
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(ChainConfig::from_json(&j).unwrap(), c);
        assert!(ChainConfig::from_json(r#"{"chip_rate": 1.0, "quant_bits": 40}"#).is_err());
        assert!(ChainConfig::from_json(r#"{"chip_rate": 1.0, "bogus": 1}"#).is_err());
    }

    #[test]
    fn impairment_free_uniform_chain_is_identity() {
        let s = make_ds(&make_mls(3, 1).unwrap()).unwrap();
        let out = simulate(&s, &ChainConfig::default(), 0).unwrap();
        assert_eq!(out.period.samples, s.to_f64());
        let m = out.metrics.unwrap();
        assert!(m.sfdr_db > 250.0);
    }
}
