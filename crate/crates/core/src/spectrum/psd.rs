//! Closed-form spectral densities of randomized constrained sequences.
//!
//! All densities are normalized so that `E|U[k]|^2 = N * R[k]`.

use crate::dac::DacModel;
use crate::error::{Error, Result};

fn delta(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else {
        0.0
    }
}

/// Ideal-DAC density `(2/3)(1 - (-1)^k + cos(pi k/3) - cos(2 pi k/3))`.
///
/// The trigonometric terms are taken from exact tables indexed by `k mod 6`
/// and `k mod 3`, so the result is exactly 2 on odd non-multiples of 3 and
/// exactly 0 elsewhere.
pub fn psd_rcs_ideal(k: i64) -> f64 {
    const COS_PI_K_3: [f64; 6] = [1.0, 0.5, -0.5, -1.0, -0.5, 0.5];
    const COS_2PI_K_3: [f64; 3] = [1.0, -0.5, -0.5];
    let parity = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let s =
        1.0 - parity + COS_PI_K_3[k.rem_euclid(6) as usize] - COS_2PI_K_3[k.rem_euclid(3) as usize];
    2.0 * s / 3.0
}

/// `R_E[k] = (2/3)(delta[k mod 2] - delta[k mod 6])`, the density of the
/// zero-indicator fluctuation.
pub fn error_psd_re(k: i64) -> f64 {
    2.0 * (delta(k.rem_euclid(2)) - delta(k.rem_euclid(6))) / 3.0
}

/// Error density `R_V[k] = (a0 - beta)^2 R_E[k]`.
pub fn psd_rcs_error(k: i64, dac: &DacModel) -> f64 {
    let e = dac.zero_error();
    e * e * error_psd_re(k)
}

/// Non-uniform DAC density
/// `N (a0/3 + 2 beta/3)^2 delta[k] + alpha^2 R_U[k] + R_V[k]`.
pub fn psd_rcs_nonuniform(k: i64, dac: &DacModel, n: usize) -> Result<f64> {
    require_multiple_of_six(n)?;
    let mean = dac.a_0() / 3.0 + 2.0 * dac.beta() / 3.0;
    let dc = n as f64 * mean * mean * delta(k.rem_euclid(n as i64));
    Ok(dc + dac.alpha() * dac.alpha() * psd_rcs_ideal(k) + psd_rcs_error(k, dac))
}

fn require_multiple_of_six(n: usize) -> Result<()> {
    if n == 0 || n % 6 != 0 {
        return Err(Error::LengthNotMultipleOfSix(n));
    }
    Ok(())
}

/// Ensemble autocorrelation `E(u_m u_{m+n})` of an RCS; the lag wraps
/// modulo N.
pub fn autocorr_rcs_ideal(lag: i64, n: usize) -> Result<f64> {
    require_multiple_of_six(n)?;
    let n6 = (n / 6) as i64;
    let lag = lag.rem_euclid(n as i64);
    Ok(match lag / n6 {
        _ if lag % n6 != 0 => 0.0,
        0 => 2.0 / 3.0,
        3 => -2.0 / 3.0,
        1 | 5 => 1.0 / 3.0,
        2 | 4 => -1.0 / 3.0,
        _ => unreachable!(),
    })
}

/// Centered zero-indicator autocorrelation `r_E[n]`: 2/9 at lags 0 and
/// N/2, -1/9 at the other multiples of N/6, zero elsewhere.
pub fn error_autocorr_re(lag: i64, n: usize) -> Result<f64> {
    require_multiple_of_six(n)?;
    let n6 = (n / 6) as i64;
    let lag = lag.rem_euclid(n as i64);
    Ok(match lag / n6 {
        _ if lag % n6 != 0 => 0.0,
        0 | 3 => 2.0 / 9.0,
        _ => -1.0 / 9.0,
    })
}

/// Real part of `sum_{n=0..N-1} r[n] exp(-j 2 pi k n / N)` for every `k`,
/// i.e. the density of a real, even autocorrelation sequence.
pub fn psd_from_lags(lags: &[f64]) -> Vec<f64> {
    let n = lags.len();
    (0..n)
        .map(|k| {
            lags.iter()
                .enumerate()
                .filter(|(_, &r)| r != 0.0)
                .map(|(m, &r)| {
                    let th = 2.0 * std::f64::consts::PI * ((m * k) % n) as f64 / n as f64;
                    r * th.cos()
                })
                .sum()
        })
        .collect()
}

/// Largest undesired-harmonic power of a DS, `|E_DAC[N/3]|^2 / N =
/// (N/9)(a0 - beta)^2`. Depends only on the zeros sitting at `n = 3m`.
pub fn max_undesired_power_ds(dac: &DacModel, n: usize) -> Result<f64> {
    require_multiple_of_six(n)?;
    let e = dac.zero_error();
    Ok(n as f64 * e * e / 9.0)
}

/// Largest undesired-harmonic power density of an RCS, `(2/3)(a0 - beta)^2`.
pub fn max_undesired_power_rcs(dac: &DacModel) -> f64 {
    let e = dac.zero_error();
    2.0 * e * e / 3.0
}

/// Which closed-form density to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsdModel {
    /// Ideal-DAC RCS density.
    RcsIdeal,
    /// RCS through a non-uniform DAC.
    RcsNonuniform { dac: DacModel, n: usize },
    /// DAC error component of a DS, `|E_DAC[k]|^2 / N`.
    DsEdac { dac: DacModel, n: usize },
}

impl PsdModel {
    pub fn eval(&self, k: i64) -> Result<f64> {
        match *self {
            PsdModel::RcsIdeal => Ok(psd_rcs_ideal(k)),
            PsdModel::RcsNonuniform { dac, n } => psd_rcs_nonuniform(k, &dac, n),
            PsdModel::DsEdac { dac, n } => {
                let e = super::edac_spectrum_ds(&dac, n)?;
                let kk = k.rem_euclid(n as i64) as usize;
                Ok(e.get(kk).norm_sqr() / n as f64)
            }
        }
    }

    /// `N * R[k]` for `k = 0..N-1`, i.e. the expected squared DFT magnitude.
    pub fn expected_power(&self, n: usize) -> Result<Vec<f64>> {
        (0..n as i64)
            .map(|k| Ok(n as f64 * self.eval(k)?))
            .collect()
    }
}
