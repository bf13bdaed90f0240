mod common;

use common::{close, from_phases, sequence_pair};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use weyl_cdma::correlation::{
    despread_correlation_direct, despread_correlation_quadratic, BitPair, DespreadContext,
    ShiftOperator,
};
use weyl_cdma::decomposition::{
    basis_change, convert, decompose, despread_for_bits, despread_via_coefficients, CoefficientKind,
};
use weyl_cdma::sequences::{weyl_sequence, WeylParams};
use weyl_cdma::spectral::EigenKind;

/// `⟨w_p(0), w_q(1/(2N))⟩` by summing the N products.
fn brute_inner(n: usize, p: usize, q: usize, hat: bool) -> Complex64 {
    let (sp, sq) = if hat {
        (0.5 / n as f64, 0.0)
    } else {
        (0.0, 0.5 / n as f64)
    };
    (0..n)
        .map(|i| {
            let i = i as f64;
            let a = std::f64::consts::TAU * i * (p as f64 / n as f64 + sp);
            let b = std::f64::consts::TAU * i * (q as f64 / n as f64 + sq);
            Complex64::from_polar(1.0, b - a)
        })
        .sum()
}

#[test]
fn closed_form_phi_matches_inner_products() {
    let n = 8;
    let bc = basis_change(n).unwrap();
    for p in 1..=n {
        for q in 1..=n {
            let phi = brute_inner(n, p, q, false) / n as f64;
            let phi_hat = brute_inner(n, p, q, true) / n as f64;
            assert!(close(bc.phi[(p - 1, q - 1)], phi, 1e-10));
            assert!(close(bc.phi_hat[(p - 1, q - 1)], phi_hat, 1e-10));
        }
    }
}

#[test]
fn phi_and_phi_hat_are_inverse() {
    for n in 1..=64 {
        let bc = basis_change(n).unwrap();
        let err = (&bc.phi * &bc.phi_hat - DMatrix::<Complex64>::identity(n, n)).camax();
        assert!(err <= 1e-9, "n={n} err={err}");
    }
}

#[test]
fn weyl_orthogonality_shows_up_as_zero_interference() {
    let n = 20;
    for (kind, sigma) in [
        (EigenKind::SameBits, 0.0),
        (EigenKind::DifferentBits, 0.5 / n as f64),
    ] {
        let coeff = CoefficientKind::for_eigen_kind(kind);
        let cs: Vec<_> = (1..=n)
            .map(|k| {
                decompose(&weyl_sequence(WeylParams::new(k, n, sigma).unwrap()), coeff).unwrap()
            })
            .collect();
        for i in 0..n {
            for k in 0..n {
                for l in 0..=n {
                    let w = despread_via_coefficients(&cs[i], &cs[k], l, kind).unwrap();
                    if i == k {
                        assert!((w.norm() - n as f64).abs() <= 1e-9 * n as f64);
                    } else {
                        assert!(w.norm() <= 1e-9 * n as f64);
                    }
                }
            }
        }
    }
}

#[test]
fn round_trip_at_sixteen() {
    let n = 16;
    let bc = basis_change(n).unwrap();
    let phases: Vec<f64> = (0..n)
        .map(|i| ((i * i * 7 + 3) % 29) as f64 / 29.0)
        .collect();
    let s = from_phases(&phases);
    let alpha = decompose(&s, CoefficientKind::Alpha).unwrap();
    let beta = convert(&alpha, &bc).unwrap();
    assert_eq!(beta.kind(), CoefficientKind::Beta);
    let direct_beta = decompose(&s, CoefficientKind::Beta).unwrap();
    let back = convert(&beta, &bc).unwrap();
    for m in 0..n {
        assert!(close(beta.values()[m], direct_beta.values()[m], 1e-9));
        assert!(close(back.values()[m], alpha.values()[m], 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn three_routes_agree(
        (si, sk) in sequence_pair(32),
        l_frac in 0.0..=1.0f64,
        bits_idx in 0usize..4,
    ) {
        let n = si.len();
        let l = ((l_frac * n as f64) as usize).min(n);
        let bits = BitPair::ALL[bits_idx];
        let ctx = DespreadContext::default();
        let direct = despread_correlation_direct(&si, &sk, l, bits, ctx).unwrap();
        let op = ShiftOperator::new(l, bits, n).unwrap();
        let quad = despread_correlation_quadratic(&si, &sk, &op, ctx).unwrap();
        let weighted = despread_for_bits(&si, &sk, l, bits).unwrap();
        let tol = 1e-9 * n as f64;
        prop_assert!(close(direct, quad, tol));
        prop_assert!(close(direct, weighted, tol));
        prop_assert!(close(quad, weighted, tol));
    }

    #[test]
    fn negated_bits_negate_weighted_sum(
        (si, sk) in sequence_pair(24),
        l_frac in 0.0..=1.0f64,
    ) {
        let n = si.len();
        let l = ((l_frac * n as f64) as usize).min(n);
        let pos_same = despread_for_bits(&si, &sk, l, BitPair::SAME).unwrap();
        let neg_same = despread_for_bits(&si, &sk, l, BitPair::new(-1, -1).unwrap()).unwrap();
        let pos_diff = despread_for_bits(&si, &sk, l, BitPair::DIFFERENT).unwrap();
        let neg_diff = despread_for_bits(&si, &sk, l, BitPair::new(1, -1).unwrap()).unwrap();
        prop_assert_eq!(pos_same, -neg_same);
        prop_assert_eq!(pos_diff, -neg_diff);
    }

    #[test]
    fn parseval_in_both_bases((s, _) in sequence_pair(64)) {
        let n = s.len() as f64;
        for kind in [CoefficientKind::Alpha, CoefficientKind::Beta] {
            let c = decompose(&s, kind).unwrap();
            prop_assert!((c.energy() - n).abs() <= 1e-9 * n);
            let back = c.reconstruct().unwrap();
            for (a, b) in back.iter().zip(s.chips()) {
                prop_assert!(close(*a, *b, 1e-10));
            }
        }
    }

    #[test]
    fn basis_change_round_trip((s, _) in sequence_pair(40)) {
        let bc = basis_change(s.len()).unwrap();
        let alpha = decompose(&s, CoefficientKind::Alpha).unwrap();
        let back = convert(&convert(&alpha, &bc).unwrap(), &bc).unwrap();
        for (a, b) in back.values().iter().zip(alpha.values()) {
            prop_assert!(close(*a, *b, 1e-9));
        }
    }
}
