//! File formats: sequence CSV/JSON, spectrum CSV, PCM WAV and run manifests.
//!
//! Floating-point values are written with 17 significant digits so every
//! `f64` survives a write/read cycle unchanged.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seq::{SequenceKind, TernarySequence, Trit};
use crate::spectrum::{HarmonicClass, Spectrum};
use crate::TOOL_VERSION;

/// 17 significant digits; `inf`, `-inf` and `NaN` for non-finite values.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// Serde adapter storing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"NaN"`, which plain JSON numbers cannot represent.
pub mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumOrStr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Num(v) => Ok(v),
            NumOrStr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub fn sequence_to_csv(seq: &TernarySequence) -> String {
    let mut s = String::from("n,value\n");
    for (i, t) in seq.symbols().iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, t.value()));
    }
    s
}

/// Parses `n,value` rows. Rows must be numbered 1..=N in order; lines
/// starting with `#` are ignored.
pub fn sequence_from_csv(text: &str) -> Result<TernarySequence> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some("n,value") => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header \"n,value\", got {other:?}"
            )))
        }
    }
    let mut symbols = Vec::new();
    for (i, line) in lines.enumerate() {
        let (n, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("malformed row {line:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad index in {line:?}")))?;
        if n != i + 1 {
            return Err(Error::Parse(format!("row {} has index {n}", i + 1)));
        }
        let v: i64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value in {line:?}")))?;
        symbols.push(Trit::try_from(v)?);
    }
    TernarySequence::new(symbols, SequenceKind::Custom)
}

/// JSON form of a sequence with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub kind: SequenceKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub symbols: Vec<i8>,
    pub seed: Option<u64>,
    pub generator_version: String,
}

impl SequenceDoc {
    pub fn new(seq: &TernarySequence, seed: Option<u64>) -> Self {
        SequenceDoc {
            kind: seq.kind(),
            n: seq.len(),
            symbols: seq.values(),
            seed,
            generator_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_sequence(&self) -> Result<TernarySequence> {
        if self.symbols.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: self.symbols.len(),
            });
        }
        Ok(TernarySequence::from_values(self.symbols.iter().copied())?.with_kind(self.kind))
    }
}

/// Reads a sequence from `.json` (a [`SequenceDoc`]) or CSV.
pub fn read_sequence(path: &Path) -> Result<TernarySequence> {
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        serde_json::from_str::<SequenceDoc>(&text)?.to_sequence()
    } else {
        sequence_from_csv(&text)
    }
}

/// `k,real,imag,mag_db,class` rows. Classes are only meaningful when the
/// length is a multiple of 6; other lengths get an empty class column.
pub fn spectrum_to_csv(spec: &Spectrum) -> String {
    let n = spec.len();
    let mut s = String::from("k,real,imag,mag_db,class\n");
    for (k, b) in spec.bins().iter().enumerate() {
        let class = if n % 6 == 0 {
            HarmonicClass::of(k, n).as_str()
        } else {
            ""
        };
        s.push_str(&format!(
            "{k},{},{},{},{class}\n",
            fmt_num(b.re),
            fmt_num(b.im),
            fmt_num(spec.mag_db(k))
        ));
    }
    s
}

pub fn spectrum_from_csv(text: &str) -> Result<Spectrum> {
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    if lines.next().map(str::trim) != Some("k,real,imag,mag_db,class") {
        return Err(Error::Parse("expected spectrum header".into()));
    }
    let bins = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("malformed row {l:?}")));
            }
            Ok(num_complex::Complex64::new(
                parse_num(f[1])?,
                parse_num(f[2])?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::from_bins(bins))
}

/// Fraction of full scale used by the loudest sample of an audio export.
pub const AUDIO_PEAK: f64 = 0.9;

/// 16-bit signed little-endian mono PCM in a RIFF/WAVE container, scaled so
/// the largest magnitude maps to 90% of full scale.
pub fn wav_bytes(samples: &[f64], sample_rate: u32) -> Result<Vec<u8>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sample_rate == 0 {
        return Err(Error::InvalidArgument(
            "sample rate must be positive".into(),
        ));
    }
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if peak > 0.0 {
        AUDIO_PEAK * f64::from(i16::MAX) / peak
    } else {
        0.0
    };
    let data_len = u32::try_from(samples.len() * 2)
        .map_err(|_| Error::InvalidArgument("audio too long for a RIFF container".into()))?;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &v in samples {
        let q = (v * scale)
            .round()
            .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File name relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// Record of one CLI run, sufficient to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector with the resolved seed made explicit, excluding
    /// the program name and the output directory.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
