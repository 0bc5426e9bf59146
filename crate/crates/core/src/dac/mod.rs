//! DAC levels and the generation/acquisition chain.

mod chain;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{TernarySequence, Trit};

pub use chain::{
    add_jitter, add_noise, coherent_average, dds_chip_durations, dds_stretch,
    kaiser_sinc_interpolate, quantize, rc_cutoff_hz, rc_filter, simulate, zoh_upsample,
    AnalogTrace, ChainConfig, ChainOutput, CoherentAverager, RcParams, JITTER_TAPS, KAISER_BETA,
};

/// Output voltages of a three-level DAC for codes (-1, 0, +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct DacModel {
    a_minus1: f64,
    a_0: f64,
    a_1: f64,
}

impl DacModel {
    pub fn new(a_minus1: f64, a_0: f64, a_1: f64) -> Result<Self> {
        let finite = a_minus1.is_finite() && a_0.is_finite() && a_1.is_finite();
        if !finite || !(a_minus1 < a_0 && a_0 < a_1) {
            return Err(Error::InvalidDacLevels(a_minus1, a_0, a_1));
        }
        Ok(DacModel { a_minus1, a_0, a_1 })
    }

    /// Levels (-1, 0, 1).
    pub fn uniform() -> Self {
        DacModel {
            a_minus1: -1.0,
            a_0: 0.0,
            a_1: 1.0,
        }
    }

    pub fn a_minus1(&self) -> f64 {
        self.a_minus1
    }

    pub fn a_0(&self) -> f64 {
        self.a_0
    }

    pub fn a_1(&self) -> f64 {
        self.a_1
    }

    pub fn levels(&self) -> [f64; 3] {
        [self.a_minus1, self.a_0, self.a_1]
    }

    /// Offset `beta = (a-1 + a1) / 2`.
    pub fn beta(&self) -> f64 {
        (self.a_minus1 + self.a_1) / 2.0
    }

    /// Gain `alpha = a1 - beta`.
    pub fn alpha(&self) -> f64 {
        self.a_1 - self.beta()
    }

    /// Error on zero symbols, `a0 - beta`.
    pub fn zero_error(&self) -> f64 {
        self.a_0 - self.beta()
    }

    pub fn is_uniform(&self) -> bool {
        self.a_minus1 == -self.a_1 && self.a_0 == 0.0
    }

    pub fn level(&self, t: Trit) -> f64 {
        match t {
            Trit::Minus => self.a_minus1,
            Trit::Zero => self.a_0,
            Trit::Plus => self.a_1,
        }
    }
}

impl Default for DacModel {
    fn default() -> Self {
        DacModel::uniform()
    }
}

impl TryFrom<[f64; 3]> for DacModel {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        DacModel::new(v[0], v[1], v[2])
    }
}

impl From<DacModel> for [f64; 3] {
    fn from(d: DacModel) -> [f64; 3] {
        d.levels()
    }
}

/// Maps every symbol to its DAC output voltage.
pub fn apply_dac(seq: &TernarySequence, dac: &DacModel) -> Vec<f64> {
    seq.symbols().iter().map(|&t| dac.level(t)).collect()
}

/// Error sequence `e[n] = (a0 - beta) [u[n] = 0]`, so that
/// `apply_dac(u) = alpha u + beta + e`.
pub fn error_sequence(seq: &TernarySequence, dac: &DacModel) -> Vec<f64> {
    let e = dac.zero_error();
    seq.symbols()
        .iter()
        .map(|t| if t.is_zero() { e } else { 0.0 })
        .collect()
}

/// Replaces zeros by `eps`, keeping ±1: the DAC `(-1, eps, 1)`.
pub fn emulate_zero_offset(seq: &TernarySequence, eps: f64) -> Result<Vec<f64>> {
    if !(eps.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "zero offset {eps} must satisfy |eps| < 1"
        )));
    }
    let dac = DacModel::new(-1.0, eps, 1.0)?;
    Ok(apply_dac(seq, &dac))
}
