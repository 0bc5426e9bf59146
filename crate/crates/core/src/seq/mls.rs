use crate::error::{Error, Result};

use super::BinarySequence;

/// Feedback taps of primitive polynomials, indexed by `degree - 2`.
pub const MLS_TAPS: [&[u32]; 15] = [
    &[2, 1],
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 11, 10, 4],
    &[13, 12, 11, 8],
    &[14, 13, 12, 2],
    &[15, 14],
    &[16, 15, 13, 4],
];

/// Maximum-length binary sequence of length `2^degree - 1`.
///
/// Runs a Galois LFSR with the tabulated primitive polynomial starting from
/// `seed_state`; output bits map 0 → +1 and 1 → -1.
pub fn make_mls(degree: u32, seed_state: u32) -> Result<BinarySequence> {
    if !(2..=16).contains(&degree) {
        return Err(Error::UnsupportedDegree(degree));
    }
    let width_mask = (1u32 << degree) - 1;
    if seed_state == 0 || seed_state & !width_mask != 0 {
        return Err(Error::InvalidSeedState {
            degree,
            seed: seed_state,
        });
    }
    let feedback = MLS_TAPS[(degree - 2) as usize]
        .iter()
        .fold(0u32, |m, &t| m | (1 << (t - 1)));
    let len = width_mask as usize;
    let mut state = seed_state;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let bit = state & 1;
        out.push(if bit == 0 { 1 } else { -1 });
        state >>= 1;
        if bit == 1 {
            state ^= feedback;
        }
    }
    BinarySequence::new(out)
}
