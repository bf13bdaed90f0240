//! Cross-correlation, despreading correlation and the signed shift operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sequences::{ensure_same_len, SpreadingSequence};

/// Largest dimension [`materialize`] will allocate.
pub const MATERIALIZE_LIMIT: usize = 4096;

/// The two bits straddling the observation window: `b_{k,−1}` then `b_{k,0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitPair {
    prev: i8,
    cur: i8,
}

impl BitPair {
    pub const SAME: BitPair = BitPair { prev: 1, cur: 1 };
    pub const DIFFERENT: BitPair = BitPair { prev: -1, cur: 1 };
    pub const ALL: [BitPair; 4] = [
        BitPair { prev: 1, cur: 1 },
        BitPair { prev: -1, cur: 1 },
        BitPair { prev: 1, cur: -1 },
        BitPair { prev: -1, cur: -1 },
    ];

    pub fn new(prev: i8, cur: i8) -> Result<Self> {
        for (name, v) in [("b_prev", prev), ("b_cur", cur)] {
            if v != 1 && v != -1 {
                return Err(Error::param(name, format!("{v} is not ±1")));
            }
        }
        Ok(Self { prev, cur })
    }

    pub(crate) fn from_signs(prev_negative: bool, cur_negative: bool) -> Self {
        let sign = |neg| if neg { -1 } else { 1 };
        Self {
            prev: sign(prev_negative),
            cur: sign(cur_negative),
        }
    }

    pub fn prev(self) -> i8 {
        self.prev
    }

    pub fn cur(self) -> i8 {
        self.cur
    }

    /// True when both bits agree (cyclic operator, up to sign).
    pub fn is_same(self) -> bool {
        self.prev == self.cur
    }
}

/// Carrier phase `φ_k` (radians) and chip width `T_c` applied to `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DespreadContext {
    phase: f64,
    chip_width: f64,
}

impl Default for DespreadContext {
    fn default() -> Self {
        Self {
            phase: 0.0,
            chip_width: 1.0,
        }
    }
}

impl DespreadContext {
    pub fn new(phase: f64, chip_width: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::TAU).contains(&phase) {
            return Err(Error::param("phase", format!("{phase} is outside [0, 2π)")));
        }
        if !(chip_width > 0.0 && chip_width.is_finite()) {
            return Err(Error::param(
                "chip_width",
                format!("{chip_width} must be > 0"),
            ));
        }
        Ok(Self { phase, chip_width })
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn chip_width(&self) -> f64 {
        self.chip_width
    }

    /// `T_c·exp(jφ_k)`.
    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(self.chip_width, self.phase)
    }
}

/// The signed cyclic permutation `B^(l)_{b_prev,b_cur}` of dimension `N`.
///
/// `(Bz)_r = b_prev·z_{N−l+r}` for `r ≤ l` and `b_cur·z_{r−l}` for `r > l`
/// (1-based). `l = 0` gives `b_cur·I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftOperator {
    l: usize,
    bits: BitPair,
    n: usize,
}

impl ShiftOperator {
    pub fn new(l: usize, bits: BitPair, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N", "dimension must be at least 1"));
        }
        check_gap(l, n)?;
        Ok(Self { l, bits, n })
    }

    pub fn gap(&self) -> usize {
        self.l
    }

    pub fn bits(&self) -> BitPair {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Writes `B·z` into `out`.
    pub fn apply_into(&self, z: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        ensure_same_len(self.n, z.len())?;
        ensure_same_len(self.n, out.len())?;
        let (head, tail) = out.split_at_mut(self.l);
        let prev = f64::from(self.bits.prev);
        let cur = f64::from(self.bits.cur);
        for (o, v) in head.iter_mut().zip(&z[self.n - self.l..]) {
            *o = v * prev;
        }
        for (o, v) in tail.iter_mut().zip(z) {
            *o = v * cur;
        }
        Ok(())
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::default(); self.n];
        self.apply_into(z, &mut out)?;
        Ok(out)
    }

    /// `x*·B·y` without forming `B·y`.
    pub fn quadratic_form(&self, x: &[Complex64], y: &[Complex64]) -> Result<Complex64> {
        ensure_same_len(self.n, x.len())?;
        ensure_same_len(self.n, y.len())?;
        let split = self.n - self.l;
        let wrapped: Complex64 = x[..self.l]
            .iter()
            .zip(&y[split..])
            .map(|(a, b)| a.conj() * b)
            .sum();
        let direct: Complex64 = x[self.l..]
            .iter()
            .zip(&y[..split])
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(wrapped * f64::from(self.bits.prev) + direct * f64::from(self.bits.cur))
    }
}

fn check_gap(l: usize, n: usize) -> Result<()> {
    if l > n {
        return Err(Error::param("l", format!("{l} is outside 0..={n}")));
    }
    Ok(())
}

/// `C_{k1,k2}(l)` with the `1/N` normalization; `b = 1` is periodic and
/// `b = −1` the odd (aperiodic-sum) variant.
pub fn cross_correlation(
    seq1: &SpreadingSequence,
    seq2: &SpreadingSequence,
    l: usize,
    b: i8,
) -> Result<Complex64> {
    ensure_same_len(seq1.len(), seq2.len())?;
    let n = seq1.len();
    check_gap(l, n)?;
    if b != 1 && b != -1 {
        return Err(Error::param("b", format!("{b} is not ±1")));
    }
    let (w1, w2) = (seq1.chips(), seq2.chips());
    let mut acc = Complex64::default();
    for i in 0..n - l {
        acc += w1[i + l].conj() * w2[i];
    }
    let mut wrap = Complex64::default();
    for i in 0..l {
        wrap += w1[i].conj() * w2[n - l + i];
    }
    Ok((acc + wrap * f64::from(b)) / n as f64)
}

/// `W_{i,k}(l)` evaluated term by term from its defining double sum.
pub fn despread_correlation_direct(
    seq_i: &SpreadingSequence,
    seq_k: &SpreadingSequence,
    l: usize,
    bits: BitPair,
    ctx: DespreadContext,
) -> Result<Complex64> {
    ensure_same_len(seq_i.len(), seq_k.len())?;
    let n = seq_i.len();
    check_gap(l, n)?;
    let (si, sk) = (seq_i.chips(), seq_k.chips());
    let mut straddle = Complex64::default();
    for i in 0..l {
        straddle += si[i].conj() * sk[n - l + i];
    }
    let mut current = Complex64::default();
    for i in 0..n - l {
        current += si[l + i].conj() * sk[i];
    }
    Ok(ctx.factor() * (straddle * f64::from(bits.prev) + current * f64::from(bits.cur)))
}

/// `W_{i,k}(l) = T_c·exp(jφ)·s_i*·B·s_k`, applying `B` as a signed permutation.
pub fn despread_correlation_quadratic(
    seq_i: &SpreadingSequence,
    seq_k: &SpreadingSequence,
    op: &ShiftOperator,
    ctx: DespreadContext,
) -> Result<Complex64> {
    ensure_same_len(seq_i.len(), seq_k.len())?;
    let shifted = op.apply(seq_k.chips())?;
    Ok(ctx.factor() * crate::sequences::inner_product(seq_i.chips(), &shifted))
}

/// Dense `N×N` form `[[O, b_prev·E_l], [b_cur·E_{N−l}, O]]`.
pub fn materialize(op: &ShiftOperator) -> Result<DMatrix<Complex64>> {
    let n = op.n;
    if n > MATERIALIZE_LIMIT {
        return Err(Error::param(
            "N",
            format!("{n} exceeds the dense limit {MATERIALIZE_LIMIT}"),
        ));
    }
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        let (col, sign) = if r < op.l {
            (n - op.l + r, op.bits.prev)
        } else {
            (r - op.l, op.bits.cur)
        };
        m[(r, col)] = Complex64::new(f64::from(sign), 0.0);
    }
    Ok(m)
}

/// Whether `B^(l)` equals the `l`-fold product of `B^(1)` for the same bits.
///
/// Holds for `(+1,+1)` and `(−1,+1)`; for the negated patterns the product
/// picks up `(−1)^l` and the check fails at even `l`.
pub fn compose_check(l: usize, bits: BitPair, n: usize) -> bool {
    if l == 0 || l > n || n > MATERIALIZE_LIMIT {
        return false;
    }
    let (Ok(target), Ok(step)) = (
        ShiftOperator::new(l, bits, n).and_then(|op| materialize(&op)),
        ShiftOperator::new(1, bits, n).and_then(|op| materialize(&op)),
    ) else {
        return false;
    };
    let mut power = step.clone();
    for _ in 1..l {
        power = &step * &power;
    }
    power == target
}
