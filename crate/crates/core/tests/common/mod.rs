#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use weyl_cdma::sequences::{unit_phasor, SpreadingSequence};

/// A member of S from raw phases in turns.
pub fn from_phases(phases: &[f64]) -> SpreadingSequence {
    SpreadingSequence::new(phases.iter().map(|&t| unit_phasor(t)).collect()).unwrap()
}

pub fn sequence_pair(
    max_n: usize,
) -> impl Strategy<Value = (SpreadingSequence, SpreadingSequence)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..1.0f64, n),
            prop::collection::vec(0.0..1.0f64, n),
        )
            .prop_map(|(a, b)| (from_phases(&a), from_phases(&b)))
    })
}

/// Unnormalized periodic cross-correlation of two ±1 sequences at every lag,
/// computed by direct summation.
pub fn periodic_xcorr_pm1(a: &[i32], b: &[i32]) -> Vec<i32> {
    let n = a.len();
    (0..n)
        .map(|l| (0..n).map(|i| a[(i + l) % n] * b[i]).sum())
        .collect()
}

pub fn to_pm1(bits: &[u8]) -> Vec<i32> {
    bits.iter().map(|&b| 1 - 2 * i32::from(b)).collect()
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}
