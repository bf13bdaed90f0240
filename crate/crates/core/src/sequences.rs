//! Spreading sequences: Weyl sequences, m-sequences and Gold codes.
//!
//! Chips and user indices are 1-based in documentation (`w_{k,n}` with
//! `n = 1..=N`) and 0-based in storage.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on `|s_n| - 1` for membership in the constant-power set.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// `exp(2πj·turns)`, exact at quarter turns.
///
/// The argument is reduced modulo one turn before the trigonometric call and
/// the quadrant is applied by swapping/negating, so `turns = 0.25` yields
/// exactly `j` rather than `6e-17 + j`.
pub fn unit_phasor(turns: f64) -> Complex64 {
    let t = turns.rem_euclid(1.0);
    let quadrant = ((t * 4.0) as u8).min(3);
    let r = t - f64::from(quadrant) * 0.25;
    let (s, c) = (std::f64::consts::TAU * r).sin_cos();
    let (re, im) = match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    // `+ 0.0` turns −0.0 into +0.0.
    Complex64::new(re + 0.0, im + 0.0)
}

/// `exp(2πj·num/den)` with the numerator reduced exactly in integers.
pub fn unit_phasor_ratio(num: i128, den: u64) -> Complex64 {
    let den_i = i128::from(den);
    let r = num.rem_euclid(den_i);
    unit_phasor(r as f64 / den as f64)
}

/// `Σ conj(a_n)·b_n`.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// True iff every chip has unit modulus within [`MEMBERSHIP_TOL`].
pub fn validate_membership(chips: &[Complex64]) -> bool {
    first_off_circle(chips).is_none()
}

fn first_off_circle(chips: &[Complex64]) -> Option<(usize, f64)> {
    chips
        .iter()
        .map(|c| c.norm())
        .enumerate()
        .find(|(_, m)| m.is_nan() || (m - 1.0).abs() > MEMBERSHIP_TOL)
}

/// A length-N vector of unit-modulus complex chips.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingSequence {
    chips: Vec<Complex64>,
}

impl SpreadingSequence {
    /// Wraps `chips`, rejecting empty input and chips off the unit circle.
    pub fn new(chips: Vec<Complex64>) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::param("N", "sequence must have at least one chip"));
        }
        if let Some((index, modulus)) = first_off_circle(&chips) {
            return Err(Error::NotUnitModulus { index, modulus });
        }
        Ok(Self { chips })
    }

    /// BPSK mapping of a bit vector: 0 → +1, 1 → −1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(
            bits.iter()
                .map(|&b| Complex64::new(if b & 1 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chips(&self) -> &[Complex64] {
        &self.chips
    }

    pub fn into_chips(self) -> Vec<Complex64> {
        self.chips
    }

    /// `⟨self, other⟩ = Σ conj(self_n)·other_n`.
    pub fn inner(&self, other: &SpreadingSequence) -> Result<Complex64> {
        ensure_same_len(self.len(), other.len())?;
        Ok(inner_product(&self.chips, &other.chips))
    }
}

pub(crate) fn ensure_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// Parameters of a Weyl spreading sequence `w_k(σ)` of length `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylParams {
    k: usize,
    n: usize,
    sigma: f64,
}

impl WeylParams {
    pub fn new(k: usize, n: usize, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N", "length must be at least 1"));
        }
        if k < 1 || k > n {
            return Err(Error::param("k", format!("{k} is outside 1..={n}")));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::param("sigma", format!("{sigma} is outside [0, 1)")));
        }
        Ok(Self { k, n, sigma })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `w_{k,n} = exp(2πj(n−1)(k/N + σ))` for `n = 1..=N`.
///
/// The phase is accumulated modulo one turn: the `k/N` part is reduced in
/// integer arithmetic and the `σ` part by its fractional part, so precision
/// does not degrade with `N`.
pub fn weyl_sequence(params: WeylParams) -> SpreadingSequence {
    let WeylParams { k, n, sigma } = params;
    let chips = (0..n)
        .map(|i| {
            let integer_part = ((i as u128 * k as u128) % n as u128) as f64 / n as f64;
            let sigma_part = (i as f64 * sigma).fract();
            unit_phasor(integer_part + sigma_part)
        })
        .collect();
    SpreadingSequence { chips }
}

/// Feedback polynomial `x^d + Σ c_e x^e` of a binary LFSR.
///
/// The sequence obeys `a_{t+d} = Σ_{e ∈ taps} a_{t+e} (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackPolynomial {
    degree: u32,
    /// Bit `e` set iff the `x^e` term (e < degree) is present.
    tap_mask: u32,
}

pub const MIN_GOLD_DEGREE: u32 = 3;
pub const MAX_GOLD_DEGREE: u32 = 10;

impl FeedbackPolynomial {
    /// Builds a polynomial from the exponents of its nonzero terms, e.g.
    /// `[6, 1, 0]` for `x^6 + x + 1`. The largest exponent is the degree.
    pub fn from_exponents(exponents: &[u32]) -> Result<Self> {
        let degree = *exponents
            .iter()
            .max()
            .ok_or_else(|| Error::param("taps", "empty polynomial"))?;
        if !(MIN_GOLD_DEGREE..=MAX_GOLD_DEGREE).contains(&degree) {
            return Err(Error::param(
                "degree",
                format!("{degree} is outside {MIN_GOLD_DEGREE}..={MAX_GOLD_DEGREE}"),
            ));
        }
        let tap_mask = exponents
            .iter()
            .filter(|&&e| e < degree)
            .fold(0u32, |m, &e| m | (1 << e));
        if tap_mask & 1 == 0 {
            return Err(Error::param("taps", "constant term is required"));
        }
        Ok(Self { degree, tap_mask })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Maximal period `2^d − 1`.
    pub fn max_period(&self) -> usize {
        (1usize << self.degree) - 1
    }

    fn full_mask(&self) -> u32 {
        (1u32 << self.degree) - 1
    }

    fn step(&self, state: u32) -> u32 {
        let feedback = (state & self.tap_mask).count_ones() & 1;
        (state >> 1) | (feedback << (self.degree - 1))
    }

    /// Cycle length of the register starting from `seed`.
    ///
    /// Returns `None` if the state does not come back within `2^d` steps.
    pub fn period_from(&self, seed: u32) -> Option<usize> {
        let mut state = self.step(seed);
        for p in 1..=(1usize << self.degree) {
            if state == seed {
                return Some(p);
            }
            state = self.step(state);
        }
        None
    }
}

impl fmt::Display for FeedbackPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{}", self.degree)?;
        for e in (0..self.degree).rev() {
            if self.tap_mask & (1 << e) != 0 {
                match e {
                    0 => write!(f, "+1")?,
                    1 => write!(f, "+x")?,
                    _ => write!(f, "+x^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// One period of the LFSR output starting from register contents `seed`
/// (bit `i` of `seed` is `a_i`).
///
/// Fails if the seed is zero or the period is not `2^d − 1`.
pub fn m_sequence(poly: &FeedbackPolynomial, seed: u32) -> Result<Vec<u8>> {
    if seed & poly.full_mask() == 0 {
        return Err(Error::param("seed", "register state must be nonzero"));
    }
    if seed & !poly.full_mask() != 0 {
        return Err(Error::param(
            "seed",
            format!("{seed:#x} does not fit a degree-{} register", poly.degree),
        ));
    }
    let expected = poly.max_period();
    match poly.period_from(seed) {
        Some(p) if p == expected => {}
        other => {
            return Err(Error::NonMaximalPeriod {
                period: other.unwrap_or(0),
                expected,
            })
        }
    }
    let mut state = seed;
    Ok((0..expected)
        .map(|_| {
            let out = (state & 1) as u8;
            state = poly.step(state);
            out
        })
        .collect())
}

/// Parameters of one Gold-family member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldParams {
    pub poly_a: FeedbackPolynomial,
    pub poly_b: FeedbackPolynomial,
    pub seed_a: u32,
    pub seed_b: u32,
    /// Relative cyclic offset of m-sequence B, in `0..N`.
    pub shift: usize,
}

/// Pairs of feedback polynomials used for each supported degree.
///
/// Degrees 3, 5, 6, 7, 9, 10 are preferred pairs (three-valued
/// cross-correlation). Preferred pairs do not exist for degrees divisible by
/// 4; for 4 and 8 the listed pair minimizes the family's peak
/// cross-correlation over all primitive pairs (7 and 31 respectively).
const PAIRS: [(u32, &[u32], &[u32]); 8] = [
    (3, &[3, 1, 0], &[3, 2, 0]),
    (4, &[4, 3, 0], &[4, 1, 0]),
    (5, &[5, 3, 0], &[5, 4, 3, 2, 0]),
    (6, &[6, 1, 0], &[6, 5, 2, 1, 0]),
    (7, &[7, 6, 0], &[7, 4, 0]),
    (8, &[8, 6, 5, 4, 0], &[8, 6, 5, 3, 0]),
    (9, &[9, 4, 0], &[9, 6, 4, 3, 0]),
    (10, &[10, 3, 0], &[10, 8, 3, 2, 0]),
];

impl GoldParams {
    /// Built-in polynomial pair for `degree` with all-ones seeds.
    pub fn preferred(degree: u32, shift: usize) -> Result<Self> {
        let (_, a, b) = PAIRS.iter().find(|(d, _, _)| *d == degree).ok_or_else(|| {
            Error::param(
                "degree",
                format!("{degree} is outside {MIN_GOLD_DEGREE}..={MAX_GOLD_DEGREE}"),
            )
        })?;
        let poly_a = FeedbackPolynomial::from_exponents(a)?;
        let poly_b = FeedbackPolynomial::from_exponents(b)?;
        let ones = poly_a.full_mask();
        Ok(Self {
            poly_a,
            poly_b,
            seed_a: ones,
            seed_b: ones,
            shift,
        })
    }

    pub fn degree(&self) -> u32 {
        self.poly_a.degree
    }

    pub fn len(&self) -> usize {
        self.poly_a.max_period()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Bits of `a ⊕ T^shift b` where `(T^s b)_n = b_{(n+s) mod N}`.
pub fn gold_bits(params: &GoldParams) -> Result<Vec<u8>> {
    if params.poly_a.degree != params.poly_b.degree {
        return Err(Error::param(
            "taps",
            format!(
                "polynomial degrees differ ({} vs {})",
                params.poly_a.degree, params.poly_b.degree
            ),
        ));
    }
    let a = m_sequence(&params.poly_a, params.seed_a)?;
    let b = m_sequence(&params.poly_b, params.seed_b)?;
    let n = a.len();
    if params.shift >= n {
        return Err(Error::param(
            "shift",
            format!("{} is outside 0..{n}", params.shift),
        ));
    }
    Ok((0..n).map(|i| a[i] ^ b[(i + params.shift) % n]).collect())
}

/// BPSK-mapped Gold code chips (0 → +1, 1 → −1).
pub fn gold_sequence(params: &GoldParams) -> Result<SpreadingSequence> {
    SpreadingSequence::from_bits(&gold_bits(params)?)
}

/// Spreading family used for multi-user runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Users `k = 1..=K` get `w_k(σ)`.
    Weyl { sigma: f64 },
    /// Users get the Gold members with shifts `0..K` of the built-in pair.
    Gold,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Weyl { .. } => "weyl",
            Family::Gold => "gold",
        }
    }

    /// Sequences for users `1..=users` at length `n`.
    pub fn user_sequences(&self, n: usize, users: usize) -> Result<Vec<SpreadingSequence>> {
        if users == 0 || users > n {
            return Err(Error::param(
                "K",
                format!("{users} users do not fit length {n} (need 1 <= K <= N)"),
            ));
        }
        match *self {
            Family::Weyl { sigma } => (1..=users)
                .map(|k| WeylParams::new(k, n, sigma).map(weyl_sequence))
                .collect(),
            Family::Gold => {
                let degree = gold_degree_for_len(n)?;
                (0..users)
                    .map(|shift| gold_sequence(&GoldParams::preferred(degree, shift)?))
                    .collect()
            }
        }
    }
}

/// Degree `d` with `2^d − 1 = n`, if supported.
pub fn gold_degree_for_len(n: usize) -> Result<u32> {
    (MIN_GOLD_DEGREE..=MAX_GOLD_DEGREE)
        .find(|&d| (1usize << d) - 1 == n)
        .ok_or_else(|| {
            Error::param(
                "N",
                format!("Gold codes need N = 2^d - 1 with d in {MIN_GOLD_DEGREE}..={MAX_GOLD_DEGREE}, got {n}"),
            )
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn weyl_quarter_turns_are_exact() {
        let w = weyl_sequence(WeylParams::new(1, 4, 0.0).unwrap());
        let expected = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        assert_eq!(w.chips(), &expected);
    }

    #[test]
    fn weyl_k_equals_n_is_all_ones() {
        for n in [1, 5, 63] {
            let w = weyl_sequence(WeylParams::new(n, n, 0.0).unwrap());
            assert!(w.chips().iter().all(|&c| c == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn weyl_with_half_chip_offset() {
        // k=1, N=2, σ=1/4: second chip is exp(2πj·3/4) = −j
        let w = weyl_sequence(WeylParams::new(1, 2, 0.25).unwrap());
        assert_eq!(w.chips()[0], Complex64::new(1.0, 0.0));
        assert!(close(w.chips()[1], Complex64::new(0.0, -1.0), 1e-15));
    }

    #[test]
    fn weyl_parameter_errors() {
        assert!(WeylParams::new(0, 4, 0.0).is_err());
        assert!(WeylParams::new(5, 4, 0.0).is_err());
        assert!(WeylParams::new(1, 4, 1.0).is_err());
        assert!(WeylParams::new(1, 4, -0.1).is_err());
        assert!(WeylParams::new(1, 4, f64::NAN).is_err());
        assert!(WeylParams::new(1, 0, 0.0).is_err());
    }

    #[test]
    fn weyl_matches_naive_formula() {
        let (k, n, sigma) = (7, 63, 0.013);
        let w = weyl_sequence(WeylParams::new(k, n, sigma).unwrap());
        for (i, c) in w.chips().iter().enumerate() {
            let theta = std::f64::consts::TAU * i as f64 * (k as f64 / n as f64 + sigma);
            assert!(close(*c, Complex64::from_polar(1.0, theta), 1e-12));
        }
    }

    #[test]
    fn membership_predicate() {
        let good = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        assert!(validate_membership(&good));
        let bad = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(!validate_membership(&bad));
        assert!(!validate_membership(&[Complex64::new(f64::NAN, 0.0)]));
        match SpreadingSequence::new(bad.to_vec()) {
            Err(Error::NotUnitModulus { index: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(SpreadingSequence::new(vec![]).is_err());
    }

    #[test]
    fn degree_three_register_has_period_seven() {
        // Brute-force cycle enumeration: walk states until the seed repeats.
        let poly = FeedbackPolynomial::from_exponents(&[3, 1, 0]).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut state = 0b111u32;
        while seen.insert(state) {
            state = poly.step(state);
        }
        assert_eq!(seen.len(), 7);
        assert_eq!(poly.period_from(0b111), Some(7));
        assert_eq!(m_sequence(&poly, 0b111).unwrap().len(), 7);
    }

    #[test]
    fn non_primitive_polynomial_is_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 has period 6.
        let poly = FeedbackPolynomial::from_exponents(&[4, 2, 0]).unwrap();
        assert!(matches!(
            m_sequence(&poly, 0b1111),
            Err(Error::NonMaximalPeriod { expected: 15, .. })
        ));
    }

    #[test]
    fn zero_seed_is_rejected() {
        let poly = FeedbackPolynomial::from_exponents(&[6, 1, 0]).unwrap();
        assert!(matches!(m_sequence(&poly, 0), Err(Error::Parameter { .. })));
        let mut p = GoldParams::preferred(6, 0).unwrap();
        p.seed_b = 0;
        assert!(gold_sequence(&p).is_err());
    }

    #[test]
    fn m_sequences_are_balanced() {
        for degree in MIN_GOLD_DEGREE..=MAX_GOLD_DEGREE {
            let p = GoldParams::preferred(degree, 0).unwrap();
            for poly in [&p.poly_a, &p.poly_b] {
                let chips = SpreadingSequence::from_bits(&m_sequence(poly, 1).unwrap()).unwrap();
                let sum: f64 = chips.chips().iter().map(|c| c.re).sum();
                assert_eq!(sum, -1.0, "{poly}");
            }
        }
    }

    #[test]
    fn gold_shift_out_of_range() {
        assert!(gold_sequence(&GoldParams::preferred(6, 63).unwrap()).is_err());
        assert_eq!(
            gold_sequence(&GoldParams::preferred(6, 62).unwrap())
                .unwrap()
                .len(),
            63
        );
    }

    #[test]
    fn polynomial_display() {
        let p = FeedbackPolynomial::from_exponents(&[6, 5, 2, 1, 0]).unwrap();
        assert_eq!(p.to_string(), "x^6+x^5+x^2+x+1");
    }

    #[test]
    fn family_rejects_too_many_users() {
        assert!(Family::Weyl { sigma: 0.0 }.user_sequences(4, 5).is_err());
        assert!(Family::Gold.user_sequences(64, 2).is_err());
        assert_eq!(Family::Gold.user_sequences(63, 3).unwrap().len(), 3);
    }
}
