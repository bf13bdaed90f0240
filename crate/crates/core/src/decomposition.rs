//! Expansion of spreading sequences in the two Weyl bases.
//!
//! `α_m = ⟨w_m(0), s⟩/√N` and `β_m = ⟨w_m(1/(2N)), s⟩/√N`. The despreading
//! correlation then becomes an eigenvalue-weighted sum of coefficient
//! products, `W = Σ_m λ^(l)_m·conj(α^(i)_m)·α^(k)_m` (β and `λ̂` when the
//! straddled bits differ).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::correlation::BitPair;
use crate::error::{Error, Result};
use crate::sequences::{ensure_same_len, inner_product, unit_phasor_ratio, SpreadingSequence};
use crate::spectral::{eigensystem, EigenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientKind {
    /// Coordinates in the `w_m(0)` basis.
    Alpha,
    /// Coordinates in the `w_m(1/(2N))` basis.
    Beta,
}

impl CoefficientKind {
    pub fn eigen_kind(self) -> EigenKind {
        match self {
            CoefficientKind::Alpha => EigenKind::SameBits,
            CoefficientKind::Beta => EigenKind::DifferentBits,
        }
    }

    pub fn for_eigen_kind(kind: EigenKind) -> Self {
        match kind {
            EigenKind::SameBits => CoefficientKind::Alpha,
            EigenKind::DifferentBits => CoefficientKind::Beta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoefficientKind::Alpha => "alpha",
            CoefficientKind::Beta => "beta",
        }
    }
}

/// Expansion coefficients tagged with the basis they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    kind: CoefficientKind,
    values: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(kind: CoefficientKind, values: Vec<Complex64>) -> Self {
        Self { kind, values }
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_m |c_m|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_m c_m·v_m`, i.e. `(1/√N)·Σ_m c_m·w_m(σ)`.
    pub fn reconstruct(&self) -> Result<Vec<Complex64>> {
        let n = self.values.len();
        let sys = eigensystem(self.kind.eigen_kind(), n)?;
        let mut out = vec![Complex64::default(); n];
        for (m, c) in (1..=n).zip(&self.values) {
            for (o, v) in out.iter_mut().zip(sys.basis_column(m)) {
                *o += c * v;
            }
        }
        Ok(out)
    }
}

/// Coordinates of `seq` in the requested Weyl basis.
pub fn decompose(seq: &SpreadingSequence, kind: CoefficientKind) -> Result<CoefficientVector> {
    let n = seq.len();
    let sys = eigensystem(kind.eigen_kind(), n)?;
    let values = (1..=n)
        .map(|m| inner_product(&sys.basis_column(m), seq.chips()))
        .collect();
    Ok(CoefficientVector { kind, values })
}

/// The basis-change matrices `Φ` (β → α) and `Φ̂` (α → β), including the
/// `1/N` prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    pub phi: DMatrix<Complex64>,
    pub phi_hat: DMatrix<Complex64>,
}

impl BasisChange {
    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }
}

/// `2/(1 − exp(2πj·num/den))`. `num/den` is never an integer here.
fn closed_form_entry(num: i128, den: u64) -> Complex64 {
    Complex64::new(2.0, 0.0) / (Complex64::new(1.0, 0.0) - unit_phasor_ratio(num, den))
}

/// `Φ_{p,q} = (1/N)·2/(1 − exp(2πj((q−p)/N + 1/(2N))))` and
/// `Φ̂_{p,q} = (1/N)·2/(1 − exp(2πj((q−p)/N − 1/(2N))))`.
pub fn basis_change(n: usize) -> Result<BasisChange> {
    if n == 0 {
        return Err(Error::param("N", "dimension must be at least 1"));
    }
    let den = 2 * n as u64;
    let scale = 1.0 / n as f64;
    let entry = |offset: i128| {
        move |p: usize, q: usize| {
            let diff = q as i128 - p as i128;
            closed_form_entry(2 * diff + offset, den) * scale
        }
    };
    Ok(BasisChange {
        phi: DMatrix::from_fn(n, n, entry(1)),
        phi_hat: DMatrix::from_fn(n, n, entry(-1)),
    })
}

/// β → α through `Φ`, α → β through `Φ̂`.
pub fn convert(coeffs: &CoefficientVector, bc: &BasisChange) -> Result<CoefficientVector> {
    ensure_same_len(bc.dim(), coeffs.len())?;
    let (matrix, kind) = match coeffs.kind {
        CoefficientKind::Beta => (&bc.phi, CoefficientKind::Alpha),
        CoefficientKind::Alpha => (&bc.phi_hat, CoefficientKind::Beta),
    };
    let v = matrix * DVector::from_column_slice(&coeffs.values);
    Ok(CoefficientVector {
        kind,
        values: v.iter().copied().collect(),
    })
}

/// `Σ_m λ^(l)_m·conj(ci_m)·ck_m` for the eigensystem of `kind`.
///
/// Both vectors must carry the coefficient kind matching `kind`
/// (α for same bits, β for differing bits).
pub fn despread_via_coefficients(
    ci: &CoefficientVector,
    ck: &CoefficientVector,
    l: usize,
    kind: EigenKind,
) -> Result<Complex64> {
    let expected = CoefficientKind::for_eigen_kind(kind);
    for found in [ci.kind, ck.kind] {
        if found != expected {
            return Err(Error::KindMismatch { expected, found });
        }
    }
    ensure_same_len(ci.len(), ck.len())?;
    let n = ci.len();
    if l > n {
        return Err(Error::param("l", format!("{l} is outside 0..={n}")));
    }
    let sys = eigensystem(kind, n)?;
    Ok((1..=n)
        .zip(ci.values.iter().zip(&ck.values))
        .map(|(m, (a, b))| sys.eigenvalue(m, l) * a.conj() * b)
        .sum())
}

/// `W_{i,k}(l)` for any bit pair, computed through the coefficient route
/// (`φ_k = 0`, `T_c = 1`).
pub fn despread_for_bits(
    seq_i: &SpreadingSequence,
    seq_k: &SpreadingSequence,
    l: usize,
    bits: BitPair,
) -> Result<Complex64> {
    let (kind, sign) = EigenKind::for_bits(bits);
    let coeff = CoefficientKind::for_eigen_kind(kind);
    let ci = decompose(seq_i, coeff)?;
    let ck = decompose(seq_k, coeff)?;
    Ok(despread_via_coefficients(&ci, &ck, l, kind)? * sign)
}
