use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

use super::{SequenceKind, TernarySequence, Trit};

/// The six permutations of (-1, 0, +1) in lexicographic order. Sampling a
/// column means drawing a uniform index into this table.
pub const PERMUTATIONS: [[Trit; 3]; 6] = [
    [Trit::Minus, Trit::Zero, Trit::Plus],
    [Trit::Minus, Trit::Plus, Trit::Zero],
    [Trit::Zero, Trit::Minus, Trit::Plus],
    [Trit::Zero, Trit::Plus, Trit::Minus],
    [Trit::Plus, Trit::Minus, Trit::Zero],
    [Trit::Plus, Trit::Zero, Trit::Minus],
];

/// The N/6 triplets behind a randomized constrained sequence.
///
/// Column `i` holds `(r1[i], r2[i], r3[i])`, always a permutation of
/// (-1, 0, +1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripletTable {
    columns: Vec<[Trit; 3]>,
}

impl TripletTable {
    pub fn new(columns: Vec<[Trit; 3]>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, col) in columns.iter().enumerate() {
            if !is_permutation(col) {
                return Err(Error::NotAPermutation { column: i + 1 });
            }
        }
        Ok(TripletTable { columns })
    }

    /// Builds a table from the three subsequences `r1`, `r2`, `r3`.
    pub fn from_subsequences(r1: &[Trit], r2: &[Trit], r3: &[Trit]) -> Result<Self> {
        if r2.len() != r1.len() {
            return Err(Error::LengthMismatch {
                expected: r1.len(),
                got: r2.len(),
            });
        }
        if r3.len() != r1.len() {
            return Err(Error::LengthMismatch {
                expected: r1.len(),
                got: r3.len(),
            });
        }
        let columns = r1
            .iter()
            .zip(r2)
            .zip(r3)
            .map(|((&a, &b), &c)| [a, b, c])
            .collect();
        TripletTable::new(columns)
    }

    pub fn columns(&self) -> &[[Trit; 3]] {
        &self.columns
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Length of the assembled sequence.
    pub fn sequence_len(&self) -> usize {
        6 * self.columns.len()
    }

    /// Subsequence `r_which`, `which` in 1..=3.
    pub fn subsequence(&self, which: usize) -> Result<Vec<Trit>> {
        if !(1..=3).contains(&which) {
            return Err(Error::IndexOutOfRange {
                index: which,
                len: 3,
            });
        }
        Ok(self.columns.iter().map(|c| c[which - 1]).collect())
    }
}

fn is_permutation(col: &[Trit; 3]) -> bool {
    let mut seen = [false; 3];
    for t in col {
        seen[(t.value() + 1) as usize] = true;
    }
    seen.iter().all(|&s| s)
}

/// Draws `n_triplets` columns independently and uniformly from
/// [`PERMUTATIONS`], using a ChaCha8 stream seeded with `rng_seed`.
pub fn make_rcs(n_triplets: usize, rng_seed: u64) -> Result<TripletTable> {
    if n_triplets == 0 {
        return Err(Error::InvalidArgument(
            "n_triplets must be at least 1".into(),
        ));
    }
    let mut rng = rng_from_seed(rng_seed);
    Ok(random_table(n_triplets, &mut rng))
}

pub(crate) fn random_table<R: Rng + ?Sized>(n_triplets: usize, rng: &mut R) -> TripletTable {
    let columns = (0..n_triplets)
        .map(|_| PERMUTATIONS[rng.random_range(0..6)])
        .collect();
    TripletTable { columns }
}

/// Juxtaposes `[r1, -r2, r3, -r1, r2, -r3]`.
pub fn assemble(table: &TripletTable) -> TernarySequence {
    let m = table.columns.len();
    let mut symbols = Vec::with_capacity(6 * m);
    for (sub, negate) in [
        (0, false),
        (1, true),
        (2, false),
        (0, true),
        (1, false),
        (2, true),
    ] {
        symbols.extend(
            table
                .columns
                .iter()
                .map(|c| if negate { -c[sub] } else { c[sub] }),
        );
    }
    TernarySequence::new(symbols, SequenceKind::Rcs).expect("assembled length is a multiple of 6")
}

/// Inverse of [`assemble`]. Fails if the sequence lacks the six-segment
/// structure or some column is not a permutation.
pub fn disassemble(seq: &TernarySequence) -> Result<TripletTable> {
    let m = seq.len() / 6;
    let s = seq.symbols();
    let seg = |k: usize| &s[k * m..(k + 1) * m];
    let negated = |a: &[Trit], b: &[Trit]| a.iter().zip(b).all(|(&x, &y)| x == -y);
    if !negated(seg(0), seg(3)) || !negated(seg(1), seg(4)) || !negated(seg(2), seg(5)) {
        return Err(Error::NotAssembled);
    }
    let r2: Vec<Trit> = seg(4).to_vec();
    TripletTable::from_subsequences(seg(0), &r2, seg(2))
}

fn check_column(table: &TripletTable, i: usize) -> Result<()> {
    if i == 0 || i > table.columns.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: table.columns.len(),
        });
    }
    Ok(())
}

/// Exchanges `r_a[i]` and `r_b[i]` (all indices 1-based).
///
/// Only same-column exchanges are offered: a column stays a permutation of
/// (-1, 0, +1) and therefore keeps its zero sum, which is what the
/// suppression relations need.
pub fn swap_within_column(
    table: &TripletTable,
    i: usize,
    a: usize,
    b: usize,
) -> Result<TripletTable> {
    check_column(table, i)?;
    for sub in [a, b] {
        if !(1..=3).contains(&sub) {
            return Err(Error::IndexOutOfRange { index: sub, len: 3 });
        }
    }
    if a == b {
        return Err(Error::InvalidArgument(
            "swap needs two different subsequences".into(),
        ));
    }
    let mut out = table.clone();
    out.columns[i - 1].swap(a - 1, b - 1);
    Ok(out)
}

/// Exchanges whole columns `i` and `j` (1-based).
pub fn swap_columns(table: &TripletTable, i: usize, j: usize) -> Result<TripletTable> {
    check_column(table, i)?;
    check_column(table, j)?;
    if i == j {
        return Err(Error::InvalidArgument(
            "column swap needs two different columns".into(),
        ));
    }
    let mut out = table.clone();
    out.columns.swap(i - 1, j - 1);
    Ok(out)
}
