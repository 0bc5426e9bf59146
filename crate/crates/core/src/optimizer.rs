//! Random restarts followed by swap-based hill climbing over RCS tables.
//!
//! Phase 1 draws `k_max` independent tables and keeps the best. Phase 2
//! applies `j_max` random constraint-preserving moves, each to the current
//! best table, and keeps a move only when it strictly lowers the criterion.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_named_seed, derive_seed, rng_from_seed};
use crate::seq::{
    assemble, make_rcs, swap_columns, swap_within_column, TernarySequence, TripletTable,
};
use crate::spectrum::{dft, HarmonicClass};

/// Scalar figure of merit to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Standard deviation of |U[k]| over desired bins.
    DesiredAmplitudeSpread,
    /// max |U[k]| / min |U[k]| over desired bins.
    MaxOverMinDesired,
    /// RMS of |U[k]| over suppressed bins.
    RmsUndesired,
    /// Peak over RMS of the time samples.
    CrestFactor,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::DesiredAmplitudeSpread,
        Criterion::MaxOverMinDesired,
        Criterion::RmsUndesired,
        Criterion::CrestFactor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::DesiredAmplitudeSpread => "desired_amplitude_spread",
            Criterion::MaxOverMinDesired => "max_over_min_desired",
            Criterion::RmsUndesired => "rms_undesired",
            Criterion::CrestFactor => "crest_factor",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desired_amplitude_spread" | "spread" => Ok(Criterion::DesiredAmplitudeSpread),
            "max_over_min_desired" | "max_over_min" => Ok(Criterion::MaxOverMinDesired),
            "rms_undesired" => Ok(Criterion::RmsUndesired),
            "crest_factor" => Ok(Criterion::CrestFactor),
            other => Err(Error::InvalidArgument(format!(
                "unknown criterion {other:?}"
            ))),
        }
    }
}

/// Evaluates `c` on a sequence. `MaxOverMinDesired` returns `+inf` when
/// some desired bin vanishes.
pub fn evaluate_criterion(seq: &TernarySequence, c: Criterion) -> f64 {
    let x = seq.to_f64();
    if c == Criterion::CrestFactor {
        let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        return peak / rms;
    }
    let n = x.len();
    let spec = dft(&x).expect("sequence is nonempty");
    let classes = (0..n).map(|k| HarmonicClass::of(k, n));
    let (desired, suppressed): (Vec<_>, Vec<_>) = spec
        .magnitudes()
        .into_iter()
        .zip(classes)
        .filter(|(_, cl)| *cl != HarmonicClass::Dc)
        .partition(|(_, cl)| cl.is_desired());
    let desired: Vec<f64> = desired.into_iter().map(|(m, _)| m).collect();
    match c {
        Criterion::DesiredAmplitudeSpread => {
            let mean = desired.iter().sum::<f64>() / desired.len() as f64;
            (desired.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / desired.len() as f64).sqrt()
        }
        Criterion::MaxOverMinDesired => {
            let max = desired.iter().fold(0.0f64, |a, &b| a.max(b));
            let min = desired.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            // a rounding-level residue counts as a vanished bin
            if min <= max * 1e-12 {
                f64::INFINITY
            } else {
                max / min
            }
        }
        Criterion::RmsUndesired => {
            let p: f64 = suppressed.iter().map(|(m, _)| m * m).sum();
            (p / suppressed.len() as f64).sqrt()
        }
        Criterion::CrestFactor => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Number of random restarts.
    pub k_max: usize,
    /// Number of swap trials.
    pub j_max: usize,
    pub rng_seed: u64,
    /// Columns of the table; the sequence length is `6 * n_triplets`.
    pub n_triplets: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub v_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_sequence: TernarySequence,
    pub best_table: TripletTable,
    pub best_v: f64,
    /// Best value after every restart (iterations `1..=k_max`) and every
    /// swap trial (`k_max+1..=k_max+j_max`). With `k_max = 0` a single
    /// initial table is recorded as iteration 0.
    pub trace: Vec<TracePoint>,
}

/// Seed of restart `k` (0-based) under master seed `seed`.
pub fn restart_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, k as u64)
}

fn random_move<R: Rng>(table: &TripletTable, rng: &mut R) -> TripletTable {
    let cols = table.n_columns();
    if cols >= 2 && rng.random_bool(0.5) {
        let i = rng.random_range(1..=cols);
        let mut j = rng.random_range(1..cols);
        if j >= i {
            j += 1;
        }
        swap_columns(table, i, j).expect("indices in range")
    } else {
        const PAIRS: [(usize, usize); 3] = [(1, 2), (1, 3), (2, 3)];
        let i = rng.random_range(1..=cols);
        let (a, b) = PAIRS[rng.random_range(0..3)];
        swap_within_column(table, i, a, b).expect("indices in range")
    }
}

pub fn optimize_rcs(config: &OptimizerConfig, c: Criterion) -> Result<OptResult> {
    if config.n_triplets == 0 {
        return Err(Error::InvalidArgument(
            "n_triplets must be at least 1".into(),
        ));
    }
    let restarts = config.k_max.max(1);
    let candidates: Vec<(TripletTable, f64)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let t = make_rcs(config.n_triplets, restart_seed(config.rng_seed, k))?;
            let v = evaluate_criterion(&assemble(&t), c);
            Ok((t, v))
        })
        .collect::<Result<_>>()?;

    let mut trace = Vec::with_capacity(restarts + config.j_max);
    let mut best: Option<(TripletTable, f64)> = None;
    for (k, (t, v)) in candidates.into_iter().enumerate() {
        // strict improvement over +inf start; ties keep the earlier restart
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((t, v));
        }
        let iteration = if config.k_max == 0 { 0 } else { k + 1 };
        trace.push(TracePoint {
            iteration,
            v_min: best.as_ref().map_or(f64::INFINITY, |b| b.1),
        });
    }
    let (mut best_table, mut best_v) = best.expect("at least one restart");

    let mut rng = rng_from_seed(derive_named_seed(config.rng_seed, "swap"));
    for j in 0..config.j_max {
        let cand = random_move(&best_table, &mut rng);
        let v = evaluate_criterion(&assemble(&cand), c);
        if v < best_v {
            best_table = cand;
            best_v = v;
        }
        trace.push(TracePoint {
            iteration: config.k_max + j + 1,
            v_min: best_v,
        });
    }

    Ok(OptResult {
        best_sequence: assemble(&best_table),
        best_table,
        best_v,
        trace,
    })
}
