//! Ternary sequences and their constructions.
//!
//! Indices follow the 1-based convention `n = 1..N` used by the spectral
//! definitions; [`TernarySequence::at`] wraps any integer index into that
//! range. Storage is an ordinary 0-based `Vec`.

mod mls;
mod rcs;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mls::{make_mls, MLS_TAPS};
pub use rcs::{
    assemble, disassemble, make_rcs, swap_columns, swap_within_column, TripletTable, PERMUTATIONS,
};

/// One code level of a ternary sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
#[repr(i8)]
pub enum Trit {
    Minus = -1,
    Zero = 0,
    Plus = 1,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Minus, Trit::Zero, Trit::Plus];

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn is_zero(self) -> bool {
        self == Trit::Zero
    }
}

impl std::ops::Neg for Trit {
    type Output = Trit;

    fn neg(self) -> Trit {
        match self {
            Trit::Minus => Trit::Plus,
            Trit::Zero => Trit::Zero,
            Trit::Plus => Trit::Minus,
        }
    }
}

impl std::ops::Mul for Trit {
    type Output = Trit;

    fn mul(self, rhs: Trit) -> Trit {
        match (self, rhs) {
            (Trit::Zero, _) | (_, Trit::Zero) => Trit::Zero,
            (a, b) if a == b => Trit::Plus,
            _ => Trit::Minus,
        }
    }
}

impl TryFrom<i8> for Trit {
    type Error = Error;

    fn try_from(v: i8) -> Result<Trit> {
        Trit::try_from(i64::from(v))
    }
}

impl TryFrom<i64> for Trit {
    type Error = Error;

    fn try_from(v: i64) -> Result<Trit> {
        match v {
            -1 => Ok(Trit::Minus),
            0 => Ok(Trit::Zero),
            1 => Ok(Trit::Plus),
            other => Err(Error::InvalidSymbol(other)),
        }
    }
}

impl From<Trit> for i8 {
    fn from(t: Trit) -> i8 {
        t.value()
    }
}

impl fmt::Display for Trit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// How a sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Ds,
    Rcs,
    Custom,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Ds => "ds",
            SequenceKind::Rcs => "rcs",
            SequenceKind::Custom => "custom",
        })
    }
}

/// A length-N ternary sequence, N a positive multiple of 6.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernarySequence {
    symbols: Vec<Trit>,
    kind: SequenceKind,
}

impl TernarySequence {
    pub fn new(symbols: Vec<Trit>, kind: SequenceKind) -> Result<Self> {
        if symbols.is_empty() || symbols.len() % 6 != 0 {
            return Err(Error::LengthNotMultipleOfSix(symbols.len()));
        }
        Ok(TernarySequence { symbols, kind })
    }

    /// Builds a custom sequence from integer values.
    pub fn from_values<I>(values: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i64>,
    {
        let symbols = values
            .into_iter()
            .map(|v| Trit::try_from(v.into()))
            .collect::<Result<Vec<_>>>()?;
        TernarySequence::new(symbols, SequenceKind::Custom)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SequenceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn symbols(&self) -> &[Trit] {
        &self.symbols
    }

    /// Symbol `u[n]` with 1-based `n`, wrapped modulo N.
    pub fn at(&self, n: i64) -> Trit {
        let len = self.symbols.len() as i64;
        self.symbols[(n - 1).rem_euclid(len) as usize]
    }

    pub fn values(&self) -> Vec<i8> {
        self.symbols.iter().map(|t| t.value()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.symbols.iter().map(|t| t.as_f64()).collect()
    }

    /// Counts of (-1, 0, +1).
    pub fn symbol_counts(&self) -> [usize; 3] {
        let mut c = [0usize; 3];
        for t in &self.symbols {
            c[(t.value() + 1) as usize] += 1;
        }
        c
    }

    pub fn check_constraints(&self) -> ConstraintReport {
        constraint_report(&self.symbols)
    }
}

/// A binary sequence over {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySequence {
    symbols: Vec<i8>,
}

impl BinarySequence {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidBinarySymbol(i64::from(bad)));
        }
        Ok(BinarySequence { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }
}

/// The period-6 sequence whose product with a binary sequence gives a DS.
pub const SPECIAL_SEQUENCE: [Trit; 6] = [
    Trit::Plus,
    Trit::Plus,
    Trit::Zero,
    Trit::Minus,
    Trit::Minus,
    Trit::Zero,
];

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Direct synthesis: `u[n] = basic[((n-1) mod L)+1] * s[((n-1) mod 6)+1]`
/// over one common period N = 6L.
///
/// With gcd(L, 6) = 1 the shift by N/2 = 3L leaves the binary factor
/// unchanged and moves `s` by 3L ≡ 3 (mod 6), which negates it; the shift by
/// N/3 = 2L moves `s` by 2L ≡ 2 or 4 (mod 6), and the three cyclic shifts of
/// `s` by 0, 2, 4 sum to zero at every position. Both suppression relations
/// follow. For L sharing a factor with 6 the product no longer has period 6L
/// in the required way and the relations fail.
pub fn make_ds(basic: &BinarySequence) -> Result<TernarySequence> {
    let l = basic.len();
    if gcd(l, 6) != 1 {
        return Err(Error::LengthNotCoprimeToSix(l));
    }
    let n = 6 * l;
    let symbols = (0..n)
        .map(|i| {
            let b = if basic.symbols[i % l] > 0 {
                Trit::Plus
            } else {
                Trit::Minus
            };
            b * SPECIAL_SEQUENCE[i % 6]
        })
        .collect();
    TernarySequence::new(symbols, SequenceKind::Ds)
}

/// Violations of the two suppression relations.
///
/// `antipodal` lists every `n` in `1..=N/2` with `u[n] + u[n+N/2] != 0`;
/// `triplet` lists every `n` in `1..=N/3` with
/// `u[n] + u[n+N/3] + u[n+2N/3] != 0`. Each relation involves the same
/// group of indices for `n` and its shifts, so one representative is
/// reported per group.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub antipodal: Vec<usize>,
    pub triplet: Vec<usize>,
}

impl ConstraintReport {
    pub fn passes(&self) -> bool {
        self.antipodal.is_empty() && self.triplet.is_empty()
    }
}

/// Checks the suppression relations on raw symbols.
pub fn check_constraints(symbols: &[Trit]) -> Result<ConstraintReport> {
    if symbols.is_empty() || symbols.len() % 6 != 0 {
        return Err(Error::LengthNotMultipleOfSix(symbols.len()));
    }
    Ok(constraint_report(symbols))
}

fn constraint_report(symbols: &[Trit]) -> ConstraintReport {
    let n = symbols.len();
    let v = |i: usize| i32::from(symbols[i % n].value());
    let half = n / 2;
    let third = n / 3;
    let antipodal = (0..half)
        .filter(|&i| v(i) + v(i + half) != 0)
        .map(|i| i + 1)
        .collect();
    let triplet = (0..third)
        .filter(|&i| v(i) + v(i + third) + v(i + 2 * third) != 0)
        .map(|i| i + 1)
        .collect();
    ConstraintReport { antipodal, triplet }
}
