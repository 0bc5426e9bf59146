//! Spectral analysis of periodic sequences.
//!
//! The DFT uses the 1-based time index of the sequence module:
//! `U[k] = sum_{n=1..N} u[n] exp(-j 2 pi n k / N)`. Magnitudes are the same
//! as with the 0-based convention; phases differ by `exp(-j 2 pi k / N)`.

mod psd;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dac::DacModel;
use crate::error::{Error, Result};

pub use psd::{
    autocorr_rcs_ideal, error_autocorr_re, error_psd_re, max_undesired_power_ds,
    max_undesired_power_rcs, psd_from_lags, psd_rcs_error, psd_rcs_ideal, psd_rcs_nonuniform,
    PsdModel,
};

/// Lengths up to this use direct summation; longer inputs use an FFT.
pub const DIRECT_DFT_MAX_LEN: usize = 4096;

/// Complex DFT bins `U[0..N-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_bins(bins: Vec<Complex64>) -> Self {
        Spectrum { bins }
    }

    /// Spectrum with real bin values, mostly for tests and synthetic inputs.
    pub fn from_magnitudes(mags: &[f64]) -> Self {
        Spectrum {
            bins: mags.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.bins[k].norm()
    }

    pub fn power(&self, k: usize) -> f64 {
        self.bins[k].norm_sqr()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }

    pub fn powers(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm_sqr()).collect()
    }

    /// Squared magnitude in dB, `10 log10(|U[k]|^2)`.
    pub fn mag_db(&self, k: usize) -> f64 {
        power_db(self.power(k))
    }
}

pub fn amplitude_db(a: f64) -> f64 {
    20.0 * a.log10()
}

pub fn power_db(p: f64) -> f64 {
    10.0 * p.log10()
}

/// DFT of a real sequence, exact definition with 1-based time index.
///
/// Direct summation over an exact twiddle table (index `n k mod N`) with
/// compensated accumulation for `N <= 4096`; an FFT plus phase correction
/// above that.
pub fn dft(x: &[f64]) -> Result<Spectrum> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.len() <= DIRECT_DFT_MAX_LEN {
        Ok(Spectrum {
            bins: direct_dft(x),
        })
    } else {
        Ok(Spectrum { bins: fft_dft(x) })
    }
}

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| {
            let theta = -2.0 * std::f64::consts::PI * (m as f64) / (n as f64);
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

fn direct_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let w = twiddles(n);
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (Kahan::default(), Kahan::default());
            for (i, &v) in x.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let t = w[((i + 1) * k) % n];
                re.add(v * t.re);
                im.add(v * t.im);
            }
            Complex64::new(re.sum, im.sum)
        })
        .collect()
}

fn fft_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let w = twiddles(n);
    buf.iter_mut().enumerate().for_each(|(k, b)| *b *= w[k]);
    buf
}

/// Reusable forward FFT for repeated power-spectrum evaluation at a fixed
/// length. Returns `|U[k]|^2`, which does not depend on the time-origin
/// convention.
pub struct PowerSpectrumPlan {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PowerSpectrumPlan {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        PowerSpectrumPlan {
            fft,
            buf: vec![Complex64::new(0.0, 0.0); n],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn power_into(&mut self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.buf.len());
        for (b, &v) in self.buf.iter_mut().zip(x) {
            *b = Complex64::new(v, 0.0);
        }
        self.fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.norm_sqr();
        }
    }
}

/// Classification of a DFT bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicClass {
    Dc,
    Desired,
    SuppressedEven,
    SuppressedMult3,
    SuppressedBoth,
}

impl HarmonicClass {
    /// Class of bin `k` of a length-`n` spectrum (`n` a multiple of 6).
    pub fn of(k: usize, n: usize) -> HarmonicClass {
        let k = k % n;
        if k == 0 {
            return HarmonicClass::Dc;
        }
        match (k % 2 == 0, k % 3 == 0) {
            (true, true) => HarmonicClass::SuppressedBoth,
            (true, false) => HarmonicClass::SuppressedEven,
            (false, true) => HarmonicClass::SuppressedMult3,
            (false, false) => HarmonicClass::Desired,
        }
    }

    pub fn is_desired(self) -> bool {
        self == HarmonicClass::Desired
    }

    pub fn is_suppressed(self) -> bool {
        matches!(
            self,
            HarmonicClass::SuppressedEven
                | HarmonicClass::SuppressedMult3
                | HarmonicClass::SuppressedBoth
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HarmonicClass::Dc => "dc",
            HarmonicClass::Desired => "desired",
            HarmonicClass::SuppressedEven => "suppressed_even",
            HarmonicClass::SuppressedMult3 => "suppressed_mult3",
            HarmonicClass::SuppressedBoth => "suppressed_both",
        }
    }
}

impl fmt::Display for HarmonicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn require_multiple_of_six(n: usize) -> Result<()> {
    if n == 0 || n % 6 != 0 {
        return Err(Error::LengthNotMultipleOfSix(n));
    }
    Ok(())
}

/// Labels for bins `0..N`.
pub fn classify_harmonics(n: usize) -> Result<Vec<HarmonicClass>> {
    require_multiple_of_six(n)?;
    Ok((0..n).map(|k| HarmonicClass::of(k, n)).collect())
}

/// Bins counted as undesired: every suppressed bin in `1..N`, plus DC when
/// it is not excluded.
fn is_undesired(class: HarmonicClass, exclude_dc: bool) -> bool {
    class.is_suppressed() || (class == HarmonicClass::Dc && !exclude_dc)
}

/// Summary metrics of one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(with = "crate::io::nonfinite")]
    pub sfdr_db: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub thd_db: f64,
    /// `(k, |U[k]|)` of the largest desired bin.
    pub max_desired: (usize, f64),
    /// `(k, |U[k]|)` of the largest undesired bin.
    pub max_undesired: (usize, f64),
    pub dc_excluded: bool,
}

struct Extremes {
    max_desired: (usize, f64),
    max_undesired: (usize, f64),
    p_desired: f64,
    p_undesired: f64,
}

fn extremes(spec: &Spectrum, exclude_dc: bool) -> Result<Extremes> {
    let n = spec.len();
    require_multiple_of_six(n)?;
    let mut e = Extremes {
        max_desired: (0, 0.0),
        max_undesired: (0, 0.0),
        p_desired: 0.0,
        p_undesired: 0.0,
    };
    let mut first_undesired = true;
    let mut first_desired = true;
    for (k, b) in spec.bins.iter().enumerate() {
        let class = HarmonicClass::of(k, n);
        let mag = b.norm();
        if class.is_desired() {
            e.p_desired += b.norm_sqr();
            if first_desired || mag > e.max_desired.1 {
                e.max_desired = (k, mag);
                first_desired = false;
            }
        } else if is_undesired(class, exclude_dc) {
            e.p_undesired += b.norm_sqr();
            if first_undesired || mag > e.max_undesired.1 {
                e.max_undesired = (k, mag);
                first_undesired = false;
            }
        }
    }
    Ok(e)
}

/// Spurious-free dynamic range in dB: highest desired over highest undesired
/// magnitude. Returns `+inf` when every undesired bin is exactly zero.
pub fn sfdr(spec: &Spectrum, exclude_dc: bool) -> Result<f64> {
    let e = extremes(spec, exclude_dc)?;
    sfdr_from(&e)
}

fn sfdr_from(e: &Extremes) -> Result<f64> {
    if e.max_desired.1 == 0.0 {
        return Err(Error::ZeroDesiredPower);
    }
    if e.max_undesired.1 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(amplitude_db(e.max_desired.1 / e.max_undesired.1))
}

/// Total harmonic distortion in dB: undesired power over desired power.
pub fn thd(spec: &Spectrum, exclude_dc: bool) -> Result<f64> {
    let e = extremes(spec, exclude_dc)?;
    thd_from(&e)
}

fn thd_from(e: &Extremes) -> Result<f64> {
    if e.p_desired == 0.0 {
        return Err(Error::ZeroDesiredPower);
    }
    Ok(power_db(e.p_undesired / e.p_desired))
}

pub fn metrics(spec: &Spectrum, exclude_dc: bool) -> Result<MetricsReport> {
    let e = extremes(spec, exclude_dc)?;
    Ok(MetricsReport {
        sfdr_db: sfdr_from(&e)?,
        thd_db: thd_from(&e)?,
        max_desired: e.max_desired,
        max_undesired: e.max_undesired,
        dc_excluded: exclude_dc,
    })
}

/// Sparse spectrum of a real sequence of length `len`. Entries cover the
/// one-sided range `0..=len/2`; bins above it are the conjugate mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    pub len: usize,
    pub entries: Vec<(usize, Complex64)>,
}

impl SparseSpectrum {
    pub fn get(&self, k: usize) -> Complex64 {
        let k = k % self.len.max(1);
        let (idx, mirrored) = if 2 * k > self.len {
            (self.len - k, true)
        } else {
            (k, false)
        };
        let v = self
            .entries
            .iter()
            .find(|(i, _)| *i == idx)
            .map(|(_, v)| *v)
            .unwrap_or_default();
        if mirrored {
            v.conj()
        } else {
            v
        }
    }

    pub fn to_dense(&self) -> Spectrum {
        Spectrum {
            bins: (0..self.len).map(|k| self.get(k)).collect(),
        }
    }
}

/// Spectrum of the DAC error sequence of a DS, whose zeros sit at
/// `n = 3m`: `(a0 - beta) N / 3` at `k = 0` and `k = N/3` (plus the mirror
/// `2N/3` in the dense form), zero elsewhere.
pub fn edac_spectrum_ds(dac: &DacModel, n: usize) -> Result<SparseSpectrum> {
    require_multiple_of_six(n)?;
    let err = dac.zero_error();
    let entries = if err == 0.0 {
        Vec::new()
    } else {
        let v = Complex64::new(err * (n / 3) as f64, 0.0);
        vec![(0, v), (n / 3, v)]
    };
    Ok(SparseSpectrum { len: n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{assemble, make_ds, make_mls, make_rcs};

    /// Straightforward O(N^2) evaluation with per-term `cos`/`sin`.
    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len() as f64;
        (0..x.len())
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let th = -2.0 * std::f64::consts::PI * ((i + 1) as f64) * (k as f64) / n;
                        Complex64::new(v * th.cos(), v * th.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn zeros_give_zero_spectrum() {
        let s = dft(&[0.0; 6]).unwrap();
        assert!(s.bins().iter().all(|b| b.norm() == 0.0));
        assert!(matches!(dft(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn special_sequence_spectrum() {
        let s = dft(&[1.0, 1.0, 0.0, -1.0, -1.0, 0.0]).unwrap();
        for k in [0, 2, 3, 4] {
            assert!(s.magnitude(k) < 1e-12, "k = {k}");
        }
        let m = 2.0 * 3f64.sqrt();
        assert!((s.magnitude(1) - m).abs() < 1e-12);
        assert!((s.magnitude(5) - m).abs() < 1e-12);
    }

    #[test]
    fn matches_naive_and_fft_paths() {
        let x: Vec<f64> = (0..90)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3)
            .collect();
        let d = dft(&x).unwrap();
        let f = fft_dft(&x);
        let nv = naive_dft(&x);
        for k in 0..x.len() {
            assert!((d.bins()[k] - nv[k]).norm() < 1e-11);
            assert!((d.bins()[k] - f[k]).norm() < 1e-11);
        }
    }

    #[test]
    fn long_inputs_use_fft_and_keep_convention() {
        let x: Vec<f64> = (0..4104).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let s = dft(&x).unwrap();
        let d = direct_dft(&x);
        for k in (0..x.len()).step_by(97) {
            assert!((s.bins()[k] - d[k]).norm() < 1e-8 * x.len() as f64);
        }
    }

    #[test]
    fn rcs_suppression_n42() {
        for seed in 0..20 {
            let x = assemble(&make_rcs(7, seed).unwrap()).to_f64();
            let s = dft(&x).unwrap();
            for k in 0..42 {
                if k % 2 == 0 || k % 3 == 0 {
                    assert!(s.magnitude(k) <= 1e-10 * 42.0, "seed {seed} k {k}");
                }
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let x = assemble(&make_rcs(5, 11).unwrap()).to_f64();
        let s = dft(&x).unwrap();
        for k in 1..30 {
            assert!((s.bins()[30 - k] - s.bins()[k].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn classification() {
        let c = classify_harmonics(6).unwrap();
        let desired: Vec<usize> = (0..6).filter(|&k| c[k].is_desired()).collect();
        assert_eq!(desired, vec![1, 5]);
        let c = classify_harmonics(42).unwrap();
        let desired: Vec<usize> = (0..42).filter(|&k| c[k].is_desired()).collect();
        assert_eq!(desired.len(), 14);
        assert_eq!(&desired[..4], &[1, 5, 7, 11]);
        assert_eq!(*desired.last().unwrap(), 41);
        assert_eq!(c[14], HarmonicClass::SuppressedEven);
        assert_eq!(c[21], HarmonicClass::SuppressedMult3);
        assert_eq!(c[6], HarmonicClass::SuppressedBoth);
        assert_eq!(c[0], HarmonicClass::Dc);
        assert!(classify_harmonics(40).is_err());
    }

    #[test]
    fn sfdr_forty_db() {
        let mut m = vec![0.0; 6];
        m[1] = 1.0;
        m[5] = 1.0;
        m[2] = 0.01;
        let s = Spectrum::from_magnitudes(&m);
        assert!((sfdr(&s, true).unwrap() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn sfdr_infinite_when_undesired_zero() {
        let mut m = vec![0.0; 6];
        m[1] = 1.0;
        assert_eq!(
            sfdr(&Spectrum::from_magnitudes(&m), true).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn sfdr_dc_flag() {
        let mut m = vec![0.0; 6];
        m[0] = 10.0;
        m[1] = 1.0;
        m[3] = 0.1;
        let s = Spectrum::from_magnitudes(&m);
        assert!((sfdr(&s, true).unwrap() - 20.0).abs() < 1e-12);
        assert!((sfdr(&s, false).unwrap() + 20.0).abs() < 1e-12);
    }

    #[test]
    fn thd_minus_hundred_db() {
        let mut m = vec![0.0; 6];
        m[1] = 1.0;
        m[2] = 1e-5;
        let s = Spectrum::from_magnitudes(&m);
        assert!((thd(&s, true).unwrap() + 100.0).abs() < 1e-9);
        assert!(matches!(
            thd(&Spectrum::from_magnitudes(&[0.0; 6]), true),
            Err(Error::ZeroDesiredPower)
        ));
    }

    #[test]
    fn ideal_ds_and_rcs_floors() {
        let ds = make_ds(&make_mls(3, 0b111).unwrap()).unwrap();
        let s = dft(&ds.to_f64()).unwrap();
        assert!(sfdr(&s, true).unwrap() >= 250.0);
        let rcs = assemble(&make_rcs(7, 5).unwrap());
        let s = dft(&rcs.to_f64()).unwrap();
        assert!(thd(&s, true).unwrap() < -200.0);
    }

    #[test]
    fn edac_uniform_is_zero() {
        let e = edac_spectrum_ds(&DacModel::uniform(), 42).unwrap();
        assert!(e.entries.is_empty());
        assert!(e.to_dense().bins().iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn edac_fig1_levels() {
        let dac = DacModel::new(-1.3, 0.15, 1.0).unwrap();
        assert!((dac.beta() + 0.15).abs() < 1e-15);
        let e = edac_spectrum_ds(&dac, 42).unwrap();
        assert_eq!(e.entries.len(), 2);
        assert!((e.get(0).re - 4.2).abs() < 1e-12);
        assert!((e.get(14).re - 4.2).abs() < 1e-12);
        assert_eq!(e.get(7).norm(), 0.0);
        let ds = make_ds(&make_mls(3, 1).unwrap()).unwrap();
        let direct = dft(&crate::dac::error_sequence(&ds, &dac)).unwrap();
        let dense = e.to_dense();
        for k in 0..42 {
            assert!(
                (direct.bins()[k] - dense.bins()[k]).norm() < 1e-12,
                "k = {k}"
            );
        }
    }

    #[test]
    fn parseval() {
        let x = assemble(&make_rcs(24, 1).unwrap()).to_f64();
        let s = dft(&x).unwrap();
        let lhs: f64 = s.powers().iter().sum();
        let rhs = x.len() as f64 * x.iter().map(|v| v * v).sum::<f64>();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn power_plan_matches_dft() {
        let x = assemble(&make_rcs(24, 2).unwrap()).to_f64();
        let mut plan = PowerSpectrumPlan::new(x.len());
        let mut out = vec![0.0; x.len()];
        plan.power_into(&x, &mut out);
        let s = dft(&x).unwrap();
        for k in 0..x.len() {
            assert!((out[k] - s.power(k)).abs() < 1e-9);
        }
    }
}
