//! Closed-form eigensystems of the shift operators.
//!
//! Every cyclic operator `B^(l)_{1,1}` is diagonalized by the normalized
//! Weyl sequences `w_m(0)/√N` with eigenvalues `exp(−2πj·ml/N)`; every
//! negacyclic operator `B^(l)_{−1,1}` by `w_m(1/(2N))/√N` with eigenvalues
//! `exp(−2πj·l(m/N + 1/(2N)))`. Indices `m` run over `1..=N`, so column `m`
//! is the sequence of user `k = m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlation::{materialize, BitPair, ShiftOperator};
use crate::error::{Error, Result};
use crate::sequences::unit_phasor_ratio;

/// Largest dimension accepted by the dense verification routines.
pub const VERIFY_LIMIT: usize = 512;

/// Residual budget per unit dimension for `‖B − VΛV*‖_F`.
pub const RESIDUAL_PER_N: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenKind {
    /// Consecutive bits agree: cyclic shift.
    SameBits,
    /// Consecutive bits differ: negacyclic shift.
    DifferentBits,
}

impl EigenKind {
    /// The bit pattern whose operator this eigensystem diagonalizes with
    /// positive sign.
    pub fn canonical_bits(self) -> BitPair {
        match self {
            EigenKind::SameBits => BitPair::SAME,
            EigenKind::DifferentBits => BitPair::DIFFERENT,
        }
    }

    /// Kind and overall sign for an arbitrary bit pair:
    /// `B_{−1,−1} = −B_{1,1}` and `B_{1,−1} = −B_{−1,1}`.
    pub fn for_bits(bits: BitPair) -> (EigenKind, f64) {
        let kind = if bits.is_same() {
            EigenKind::SameBits
        } else {
            EigenKind::DifferentBits
        };
        (kind, f64::from(bits.cur()))
    }

    /// The `σ` of the Weyl sequences forming the basis.
    pub fn sigma(self, n: usize) -> f64 {
        match self {
            EigenKind::SameBits => 0.0,
            EigenKind::DifferentBits => 0.5 / n as f64,
        }
    }

    /// Phase of `v_m`'s `(i+1)`-th entry as an exact fraction `num/den` of a
    /// turn.
    fn phase_ratio(self, n: usize, m: usize, i: usize) -> (i128, u64) {
        let (i, m, n) = (i as i128, m as i128, n as u64);
        match self {
            EigenKind::SameBits => (i * m, n),
            EigenKind::DifferentBits => (i * (2 * m + 1), 2 * n),
        }
    }
}

/// Eigenvalues and orthonormal eigenbasis for one operator kind at one `N`.
#[derive(Debug)]
pub struct EigenSystem {
    kind: EigenKind,
    n: usize,
    basis: OnceLock<DMatrix<Complex64>>,
}

impl EigenSystem {
    pub fn new(kind: EigenKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N", "dimension must be at least 1"));
        }
        Ok(Self {
            kind,
            n,
            basis: OnceLock::new(),
        })
    }

    pub fn kind(&self) -> EigenKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `λ^(l)_m` (or `λ̂^(l)_m`) for `m` in `1..=N`.
    pub fn eigenvalue(&self, m: usize, l: usize) -> Complex64 {
        let (num, den) = self.kind.phase_ratio(self.n, m, l);
        unit_phasor_ratio(-num, den)
    }

    pub fn eigenvalues(&self, l: usize) -> Vec<Complex64> {
        (1..=self.n).map(|m| self.eigenvalue(m, l)).collect()
    }

    /// Column `m` (1-based) of the basis: `w_m(σ)/√N`.
    pub fn basis_column(&self, m: usize) -> Vec<Complex64> {
        let scale = 1.0 / (self.n as f64).sqrt();
        (0..self.n)
            .map(|i| {
                let (num, den) = self.kind.phase_ratio(self.n, m, i);
                unit_phasor_ratio(num, den) * scale
            })
            .collect()
    }

    /// Dense `N×N` basis, built on first use.
    pub fn basis(&self) -> &DMatrix<Complex64> {
        self.basis.get_or_init(|| {
            let cols: Vec<Complex64> = (1..=self.n).flat_map(|m| self.basis_column(m)).collect();
            DMatrix::from_column_slice(self.n, self.n, &cols)
        })
    }

    /// `V·Λ^(l)·V*`.
    pub fn reconstruct(&self, l: usize) -> DMatrix<Complex64> {
        let mut scaled = self.basis().clone();
        for (mut col, lambda) in scaled.column_iter_mut().zip(self.eigenvalues(l)) {
            col *= lambda;
        }
        scaled * self.basis().adjoint()
    }
}

type Cache = Mutex<HashMap<(EigenKind, usize), Arc<EigenSystem>>>;

/// Shared eigensystem for `(kind, N)`; repeated calls return the same value.
pub fn eigensystem(kind: EigenKind, n: usize) -> Result<Arc<EigenSystem>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(sys) = guard.get(&(kind, n)) {
        return Ok(Arc::clone(sys));
    }
    let sys = Arc::new(EigenSystem::new(kind, n)?);
    guard.insert((kind, n), Arc::clone(&sys));
    Ok(sys)
}

/// Frobenius norm of `B^(l) − V·Λ^(l)·V*` for the canonical bits of `kind`.
pub fn verify_diagonalization(kind: EigenKind, n: usize, l: usize) -> Result<f64> {
    if n > VERIFY_LIMIT {
        return Err(Error::param(
            "N",
            format!("{n} exceeds the dense verification limit {VERIFY_LIMIT}"),
        ));
    }
    if l == 0 || l > n {
        return Err(Error::param("l", format!("{l} is outside 1..={n}")));
    }
    let sys = eigensystem(kind, n)?;
    let op = ShiftOperator::new(l, kind.canonical_bits(), n)?;
    Ok((materialize(&op)? - sys.reconstruct(l)).norm())
}

/// Applies `B^(l)` to basis column `m` via the signed permutation and checks
/// it equals `λ^(l)_m` times the column, and that `λ^(l)_m = (λ^(1)_m)^l`.
pub fn eigen_relation_check(kind: EigenKind, n: usize, m: usize, l: usize) -> bool {
    const TOL: f64 = 1e-10;
    if n == 0 || m == 0 || m > n || l == 0 || l > n {
        return false;
    }
    let Ok(op) = ShiftOperator::new(l, kind.canonical_bits(), n) else {
        return false;
    };
    let sys = match eigensystem(kind, n) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let v = sys.basis_column(m);
    let Ok(bv) = op.apply(&v) else {
        return false;
    };
    let lambda = sys.eigenvalue(m, l);
    let vector_ok = bv
        .iter()
        .zip(&v)
        .all(|(a, b)| (a - lambda * b).norm() <= TOL);
    let power_ok = (sys.eigenvalue(m, 1).powu(l as u32) - lambda).norm() <= TOL;
    vector_ok && power_ok
}
