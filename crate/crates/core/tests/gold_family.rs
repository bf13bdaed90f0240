mod common;

use std::collections::BTreeSet;

use common::{periodic_xcorr_pm1, to_pm1};
use weyl_cdma::correlation::cross_correlation;
use weyl_cdma::sequences::{gold_bits, gold_sequence, m_sequence, validate_membership, GoldParams};

/// Every member of the family: both m-sequences plus `a ⊕ T^s b` for all `s`.
fn family(degree: u32) -> Vec<Vec<i32>> {
    let p = GoldParams::preferred(degree, 0).unwrap();
    let n = p.len();
    let mut out = vec![
        to_pm1(&m_sequence(&p.poly_a, p.seed_a).unwrap()),
        to_pm1(&m_sequence(&p.poly_b, p.seed_b).unwrap()),
    ];
    for shift in 0..n {
        out.push(to_pm1(
            &gold_bits(&GoldParams { shift, ..p.clone() }).unwrap(),
        ));
    }
    out
}

fn family_values(degree: u32) -> BTreeSet<i32> {
    let fam = family(degree);
    let mut values = BTreeSet::new();
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            values.extend(periodic_xcorr_pm1(&fam[i], &fam[j]));
        }
    }
    values
}

#[test]
fn degree_six_family_is_three_valued() {
    // t(6) = 2^4 + 1 = 17
    assert_eq!(family_values(6), BTreeSet::from([-17, -1, 15]));
}

#[test]
fn odd_degree_families_are_three_valued() {
    // t(n) = 2^((n+1)/2) + 1 for odd n
    assert_eq!(family_values(3), BTreeSet::from([-5, -1, 3]));
    assert_eq!(family_values(5), BTreeSet::from([-9, -1, 7]));
    assert_eq!(family_values(7), BTreeSet::from([-17, -1, 15]));
}

#[test]
fn large_degree_pairs_are_preferred() {
    for (degree, t) in [(9u32, 33), (10, 65)] {
        let p = GoldParams::preferred(degree, 0).unwrap();
        let a = to_pm1(&m_sequence(&p.poly_a, p.seed_a).unwrap());
        let b = to_pm1(&m_sequence(&p.poly_b, p.seed_b).unwrap());
        let values: BTreeSet<i32> = periodic_xcorr_pm1(&a, &b).into_iter().collect();
        assert_eq!(values, BTreeSet::from([-t, -1, t - 2]), "degree {degree}");
    }
}

#[test]
fn gold_chips_are_real_signs() {
    let s = gold_sequence(&GoldParams::preferred(6, 11).unwrap()).unwrap();
    assert_eq!(s.len(), 63);
    assert!(validate_membership(s.chips()));
    assert!(s.chips().iter().all(|c| c.im == 0.0 && c.re.abs() == 1.0));
}

#[test]
fn complex_path_agrees_with_integer_oracle() {
    let p = GoldParams::preferred(5, 0).unwrap();
    let a = gold_sequence(&GoldParams {
        shift: 3,
        ..p.clone()
    })
    .unwrap();
    let b = gold_sequence(&GoldParams {
        shift: 17,
        ..p.clone()
    })
    .unwrap();
    let ai = to_pm1(
        &gold_bits(&GoldParams {
            shift: 3,
            ..p.clone()
        })
        .unwrap(),
    );
    let bi = to_pm1(&gold_bits(&GoldParams { shift: 17, ..p }).unwrap());
    let oracle = periodic_xcorr_pm1(&ai, &bi);
    for (l, want) in oracle.iter().enumerate() {
        let c = cross_correlation(&a, &b, l, 1).unwrap();
        assert!((c.re * 31.0 - f64::from(*want)).abs() < 1e-12);
        assert_eq!(c.im, 0.0);
    }
}
