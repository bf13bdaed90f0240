//! Monte Carlo BER of a chip-synchronous CDMA link over AWGN.
//!
//! User 1 is observed at offset 0. Every other user `k` contributes the
//! despreading correlation `W_{1,k}(l_k)` for a random gap `l_k` and a random
//! pair of straddled bits, and complex Gaussian noise is added directly to the
//! correlator output. With `T_c = 1` and `E = N` the real part of the noise
//! has variance `N·N0/2`, so a single user sees `BER = Q(√(2·Eb/N0))`.
//!
//! Randomness is counter-based: symbol `i` of a sweep point draws from a
//! ChaCha8 stream keyed by the point and selected by `i`, which makes results
//! independent of how symbols are split across worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{despread_correlation_quadratic, BitPair, DespreadContext, ShiftOperator};
use crate::error::{Error, Result};
use crate::sequences::{Family, SpreadingSequence};

/// Symbols per parallel work item.
const CHUNK: u64 = 1 << 14;

/// Standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Single-user BPSK bit error rate `Q(√(2·Eb/N0))` for linear `Eb/N0`.
pub fn bpsk_ber(ebn0: f64) -> f64 {
    q_function((2.0 * ebn0).sqrt())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `((K−1)/(6N) + N0/(2E))^(−1/2)` with `e_over_n0 = E/N0`.
///
/// `e_over_n0 = ∞` is the noiseless limit; with `K = 1` the bound is then
/// infinite.
pub fn snr_lower_bound(users: usize, n: usize, e_over_n0: f64) -> Result<f64> {
    if users == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    if e_over_n0.is_nan() || e_over_n0 <= 0.0 {
        return Err(Error::param(
            "E/N0",
            format!("{e_over_n0} must be positive"),
        ));
    }
    let interference = (users - 1) as f64 / (6.0 * n as f64);
    let noise = 0.5 / e_over_n0;
    Ok((interference + noise).sqrt().recip())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// `φ_k = 0` for every interferer.
    #[default]
    Zero,
    /// `φ_k` uniform on `[0, 2π)` per symbol per interferer.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OffsetsMode {
    /// `l_k` uniform on `0..N` per symbol per interferer.
    #[default]
    Uniform,
    /// `l_k` fixed; entry `j` is the gap of user `j + 2`.
    Fixed(Vec<usize>),
}

/// One Monte Carlo configuration: fixed `N`, `K` and family, a list of
/// `Eb/N0` points.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub users: usize,
    pub family: Family,
    /// Eb/N0 points in dB; `+∞` means noiseless.
    pub ebn0_db: Vec<f64>,
    pub symbols_per_user: u64,
    pub rng_seed: u64,
    pub phase_mode: PhaseMode,
    pub offsets_mode: OffsetsMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("N", "must be at least 1"));
        }
        if self.users == 0 || self.users > self.n {
            return Err(Error::param(
                "K",
                format!("{} is outside 1..={}", self.users, self.n),
            ));
        }
        if self.symbols_per_user == 0 {
            return Err(Error::param("symbols_per_user", "must be at least 1"));
        }
        if let Some(bad) = self
            .ebn0_db
            .iter()
            .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
        {
            return Err(Error::param(
                "ebn0_db",
                format!("{bad} is not a valid Eb/N0"),
            ));
        }
        if let Family::Weyl { sigma } = self.family {
            if !(0.0..1.0).contains(&sigma) {
                return Err(Error::param("sigma", format!("{sigma} is outside [0, 1)")));
            }
        }
        if let OffsetsMode::Fixed(offsets) = &self.offsets_mode {
            if offsets.len() < self.users - 1 {
                return Err(Error::param(
                    "offsets",
                    format!(
                        "{} fixed offsets for {} interferers",
                        offsets.len(),
                        self.users - 1
                    ),
                ));
            }
            if let Some(l) = offsets.iter().find(|&&l| l > self.n) {
                return Err(Error::param(
                    "offsets",
                    format!("{l} is outside 0..={}", self.n),
                ));
            }
        }
        Ok(())
    }
}

/// Error count and derived statistics for one `(K, Eb/N0)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub family: String,
    pub n: usize,
    pub users: usize,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci95: f64,
}

impl BerPoint {
    fn from_counts(config: &SimConfig, ebn0_db: f64, bits: u64, errors: u64) -> Self {
        let (ber, ci95) = ber_with_ci(errors, bits);
        Self {
            family: config.family.name().to_owned(),
            n: config.n,
            users: config.users,
            ebn0_db,
            bits,
            errors,
            ber,
            ci95,
        }
    }
}

/// `p̂` and the half-width `1.96·√(p̂(1−p̂)/n)`; zero errors report the
/// rule-of-three bound `3/n` instead.
pub fn ber_with_ci(errors: u64, bits: u64) -> (f64, f64) {
    let n = bits as f64;
    if errors == 0 {
        return (0.0, 3.0 / n);
    }
    let p = errors as f64 / n;
    (p, 1.96 * (p * (1.0 - p) / n).sqrt())
}

/// All points of a run or sweep, in request order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerResult {
    pub points: Vec<BerPoint>,
}

/// Precomputed `W_{1,k}(l)` for the canonical bit pairs of every interferer.
///
/// Negated bit patterns reuse the canonical entries with a sign flip.
#[derive(Debug, Clone)]
pub struct Link {
    n: usize,
    /// `[interferer][l]` for bits (+1, +1).
    same: Vec<Vec<Complex64>>,
    /// `[interferer][l]` for bits (−1, +1).
    different: Vec<Vec<Complex64>>,
}

impl Link {
    pub fn new(family: &Family, n: usize, users: usize) -> Result<Self> {
        let seqs = family.user_sequences(n, users)?;
        Self::from_sequences(&seqs)
    }

    /// `seqs[0]` is the observed user.
    pub fn from_sequences(seqs: &[SpreadingSequence]) -> Result<Self> {
        let observed = seqs
            .first()
            .ok_or_else(|| Error::param("K", "at least one user is required"))?;
        let n = observed.len();
        let ctx = DespreadContext::default();
        let table = |bits: BitPair| -> Result<Vec<Vec<Complex64>>> {
            seqs[1..]
                .iter()
                .map(|s| {
                    (0..=n)
                        .map(|l| {
                            let op = ShiftOperator::new(l, bits, n)?;
                            despread_correlation_quadratic(observed, s, &op, ctx)
                        })
                        .collect()
                })
                .collect()
        };
        Ok(Self {
            n,
            same: table(BitPair::SAME)?,
            different: table(BitPair::DIFFERENT)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn interferers(&self) -> usize {
        self.same.len()
    }

    /// Contribution of interferer `j` (user `j + 2`) at gap `l`.
    pub fn interference(&self, j: usize, l: usize, bits: BitPair, phase: f64) -> Complex64 {
        let base = if bits.is_same() {
            self.same[j][l]
        } else {
            self.different[j][l]
        };
        let w = base * f64::from(bits.cur());
        if phase == 0.0 {
            w
        } else {
            w * Complex64::from_polar(1.0, phase)
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key identifying a sweep point by content, so reordering a sweep does not
/// change any point's random stream.
fn point_seed(config: &SimConfig, ebn0_db: f64) -> [u8; 32] {
    let (tag, sigma) = match config.family {
        Family::Weyl { sigma } => (1u64, sigma.to_bits()),
        Family::Gold => (2u64, 0),
    };
    let fields = [
        tag,
        sigma,
        config.n as u64,
        config.users as u64,
        ebn0_db.to_bits(),
    ];
    let mut h = splitmix(config.rng_seed);
    for f in fields {
        h = splitmix(h ^ f);
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        h = splitmix(h ^ i as u64);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    seed
}

struct PointRunner<'a> {
    config: &'a SimConfig,
    link: &'a Link,
    seed: [u8; 32],
    signal: f64,
    noise_std: f64,
}

impl PointRunner<'_> {
    /// Returns true if symbol `index` is decoded in error.
    fn symbol_error(&self, index: u64) -> bool {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(index);
        let bit: bool = rng.random();
        let tx = if bit { -1.0 } else { 1.0 };
        let mut z = Complex64::new(self.signal * tx, 0.0);
        for j in 0..self.link.interferers() {
            let word: u32 = rng.random();
            let bits = BitPair::from_signs(word & 1 != 0, word & 2 != 0);
            let l = match &self.config.offsets_mode {
                OffsetsMode::Uniform => rng.random_range(0..self.link.n),
                OffsetsMode::Fixed(offsets) => offsets[j],
            };
            let phase = match self.config.phase_mode {
                PhaseMode::Zero => 0.0,
                PhaseMode::Uniform => rng.random_range(0.0..std::f64::consts::TAU),
            };
            z += self.link.interference(j, l, bits, phase);
        }
        if self.noise_std > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            z += Complex64::new(re, im) * self.noise_std;
        }
        let decided_negative = z.re < 0.0;
        decided_negative != bit
    }

    fn count_errors(&self) -> u64 {
        let total = self.config.symbols_per_user;
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(total);
                (start..end).filter(|&i| self.symbol_error(i)).count() as u64
            })
            .sum()
    }
}

fn run_point(config: &SimConfig, link: &Link, ebn0_db: f64) -> BerPoint {
    let n = config.n as f64;
    let noise_std = if ebn0_db == f64::INFINITY {
        0.0
    } else {
        // Re-part variance N·N0/2 with N0 = E/(Eb/N0), E = N.
        let ebn0 = db_to_linear(ebn0_db);
        (n * n / (2.0 * ebn0)).sqrt()
    };
    let runner = PointRunner {
        config,
        link,
        seed: point_seed(config, ebn0_db),
        signal: n,
        noise_std,
    };
    let errors = runner.count_errors();
    BerPoint::from_counts(config, ebn0_db, config.symbols_per_user, errors)
}

/// BER at every Eb/N0 point of `config`.
pub fn run_ber(config: &SimConfig) -> Result<BerResult> {
    config.validate()?;
    let link = Link::new(&config.family, config.n, config.users)?;
    Ok(BerResult {
        points: config
            .ebn0_db
            .iter()
            .map(|&e| run_point(config, &link, e))
            .collect(),
    })
}

/// Runs `template` for every `K` in `users` and every Eb/N0 in `ebn0_db`,
/// calling `progress` after each point. Rows are ordered `K`-major.
pub fn sweep_with_progress(
    template: &SimConfig,
    users: &[usize],
    ebn0_db: &[f64],
    mut progress: impl FnMut(&BerPoint),
) -> Result<BerResult> {
    if users.is_empty() || ebn0_db.is_empty() {
        return Err(Error::param("sweep", "K and Eb/N0 lists must be nonempty"));
    }
    let mut points = Vec::with_capacity(users.len() * ebn0_db.len());
    for &k in users {
        let config = SimConfig {
            users: k,
            ebn0_db: ebn0_db.to_vec(),
            ..template.clone()
        };
        config.validate()?;
        let link = Link::new(&config.family, config.n, k)?;
        for &e in ebn0_db {
            let point = run_point(&config, &link, e);
            progress(&point);
            points.push(point);
        }
    }
    Ok(BerResult { points })
}

pub fn sweep(template: &SimConfig, users: &[usize], ebn0_db: &[f64]) -> Result<BerResult> {
    sweep_with_progress(template, users, ebn0_db, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(users: usize, ebn0_db: Vec<f64>, symbols: u64) -> SimConfig {
        SimConfig {
            n: 16,
            users,
            family: Family::Weyl { sigma: 0.0 },
            ebn0_db,
            symbols_per_user: symbols,
            rng_seed: 7,
            phase_mode: PhaseMode::Zero,
            offsets_mode: OffsetsMode::Uniform,
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(
            snr_lower_bound(1, 63, f64::INFINITY).unwrap(),
            f64::INFINITY
        );
        let v = snr_lower_bound(7, 63, f64::INFINITY).unwrap();
        assert!((v - 63f64.sqrt()).abs() < 1e-12);
        for x in [0.5, 2.0, 10.0] {
            assert!((snr_lower_bound(1, 8, x).unwrap() - (2.0 * x).sqrt()).abs() < 1e-12);
        }
        assert!(snr_lower_bound(0, 8, 1.0).is_err());
        assert!(snr_lower_bound(1, 0, 1.0).is_err());
        assert!(snr_lower_bound(1, 8, 0.0).is_err());
        assert!(snr_lower_bound(1, 8, f64::NAN).is_err());
    }

    #[test]
    fn q_function_reference_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        // Q(√8) from the tabulated normal tail.
        assert!((bpsk_ber(4.0) - 2.338_867_490_5e-3).abs() < 1e-12);
    }

    #[test]
    fn confidence_interval_rules() {
        assert_eq!(ber_with_ci(0, 1000), (0.0, 0.003));
        let (p, h) = ber_with_ci(100, 10_000);
        assert_eq!(p, 0.01);
        assert!((h - 1.96 * (0.01f64 * 0.99 / 10_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_single_user_is_error_free() {
        let r = run_ber(&config(1, vec![f64::INFINITY], 5000)).unwrap();
        assert_eq!(r.points[0].errors, 0);
        assert_eq!(r.points[0].ber, 0.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(run_ber(&config(17, vec![0.0], 10)).is_err());
        assert!(run_ber(&config(1, vec![0.0], 0)).is_err());
        assert!(run_ber(&config(1, vec![f64::NAN], 10)).is_err());
        let mut c = config(3, vec![0.0], 10);
        c.offsets_mode = OffsetsMode::Fixed(vec![1]);
        assert!(run_ber(&c).is_err());
        c.offsets_mode = OffsetsMode::Fixed(vec![1, 17]);
        assert!(run_ber(&c).is_err());
        assert!(sweep(&c, &[], &[0.0]).is_err());
    }

    #[test]
    fn cyclic_weyl_interference_vanishes_for_same_bits() {
        let link = Link::new(&Family::Weyl { sigma: 0.0 }, 16, 2).unwrap();
        for l in 0..16 {
            for bits in [BitPair::SAME, BitPair::new(-1, -1).unwrap()] {
                assert!(link.interference(0, l, bits, 0.0).norm() <= 1e-9 * 16.0);
            }
        }
    }

    #[test]
    fn negated_bits_negate_interference() {
        let link = Link::new(&Family::Gold, 31, 3).unwrap();
        for l in 0..31 {
            let a = link.interference(1, l, BitPair::SAME, 0.0);
            let b = link.interference(1, l, BitPair::new(-1, -1).unwrap(), 0.0);
            assert_eq!(a, -b);
            let a = link.interference(1, l, BitPair::DIFFERENT, 0.3);
            let b = link.interference(1, l, BitPair::new(1, -1).unwrap(), 0.3);
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let mut c = config(6, vec![2.0, 5.0], 40_000);
        c.phase_mode = PhaseMode::Uniform;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ber(&c).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sweep_point_equals_run() {
        let c = config(4, vec![3.0], 20_000);
        let single = run_ber(&c).unwrap();
        let swept = sweep(&c, &[4], &[3.0]).unwrap();
        assert_eq!(single, swept);
    }

    #[test]
    fn permuting_users_permutes_rows() {
        let c = config(1, vec![1.0], 10_000);
        let a = sweep(&c, &[2, 5, 9], &[1.0]).unwrap();
        let b = sweep(&c, &[9, 2, 5], &[1.0]).unwrap();
        assert_eq!(a.points[0], b.points[1]);
        assert_eq!(a.points[1], b.points[2]);
        assert_eq!(a.points[2], b.points[0]);
    }
}
