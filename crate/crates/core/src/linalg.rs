//! Dense complex matrices and the spectral primitives the rest of the crate
//! builds on.
//!
//! [`ComplexMatrix`] is a thin square-matrix wrapper over
//! [`nalgebra::DMatrix`]. Hermitian eigenvalues and singular values are
//! delegated to nalgebra's solvers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default tolerance for entrywise equality.
pub const EQ_TOL: f64 = 1e-12;
/// Default tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub type StateVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square complex matrix of dimension at least 2.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianCheckResult {
    pub is_hermitian: bool,
    pub max_deviation: f64,
}

impl ComplexMatrix {
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() < 2 {
            return Err(Error::InvalidDimension(m.nrows()));
        }
        Ok(Self(m))
    }

    /// Builds a `d x d` matrix from row-major entries.
    pub fn from_row_slice(d: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                found: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(d, d, entries))
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(d >= 2, "matrix dimension must be at least 2");
        Self(DMatrix::from_fn(d, d, f))
    }

    pub fn zeros(d: usize) -> Self {
        Self::from_fn(d, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(d: usize) -> Self {
        assert!(d >= 2, "matrix dimension must be at least 2");
        Self(DMatrix::identity(d, d))
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `|psi><phi|`
    pub fn outer(psi: &StateVector, phi: &StateVector) -> Self {
        assert_eq!(psi.len(), phi.len());
        Self(psi * phi.adjoint())
    }

    /// `|psi><psi|`
    pub fn projector(psi: &StateVector) -> Self {
        Self::outer(psi, psi)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, factor: f64, other: &ComplexMatrix) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b * factor;
        }
    }

    /// `self += factor * other`
    pub fn add_scaled_c(&mut self, factor: Complex64, other: &ComplexMatrix) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b * factor;
        }
    }

    pub fn try_mul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(rhs)?;
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn try_add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(rhs)?;
        Ok(Self(&self.0 + &rhs.0))
    }

    pub fn try_sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(rhs)?;
        Ok(Self(&self.0 - &rhs.0))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `A ρ B`, the building block of every superoperator in the crate.
    pub fn sandwich(&self, rho: &ComplexMatrix, right: &ComplexMatrix) -> Self {
        Self(&self.0 * &rho.0 * &right.0)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn hermitian_check(&self, tol: f64) -> HermitianCheckResult {
        let d = self.dim();
        let mut max_deviation: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let dev = (self.0[(i, j)] - self.0[(j, i)].conj()).norm();
                max_deviation = max_deviation.max(dev);
            }
        }
        HermitianCheckResult {
            is_hermitian: max_deviation <= tol,
            max_deviation,
        }
    }

    /// Sum of the singular values.
    pub fn trace_norm(&self) -> Result<f64> {
        self.require_finite()?;
        Ok(self.0.clone().singular_values().iter().sum())
    }

    /// `sqrt(Tr X†X)`
    pub fn frobenius_norm(&self) -> Result<f64> {
        self.require_finite()?;
        Ok(self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Ascending real eigenvalues of a Hermitian matrix.
    pub fn eigenvalues_hermitian(&self, tol: f64) -> Result<Vec<f64>> {
        self.require_finite()?;
        let check = self.hermitian_check(tol);
        if !check.is_hermitian {
            return Err(Error::NotHermitian {
                deviation: check.max_deviation,
                tolerance: tol,
            });
        }
        Ok(hermitian_eigenvalues(&self.0))
    }

    pub fn min_eigenvalue_hermitian(&self, tol: f64) -> Result<f64> {
        Ok(self.eigenvalues_hermitian(tol)?[0])
    }

    /// Trace norm of a Hermitian matrix via its eigenvalues.
    pub fn trace_norm_hermitian(&self, tol: f64) -> Result<f64> {
        Ok(self
            .eigenvalues_hermitian(tol)?
            .iter()
            .map(|x| x.abs())
            .sum())
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_same_dim(&self, rhs: &ComplexMatrix) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rhs.dim(),
            });
        }
        Ok(())
    }

    fn require_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput("matrix has non-finite entries".into()))
        }
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending. No Hermiticity check.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 2 {
        let (lo, hi) = eig2(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
        return vec![lo, hi];
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Closed-form eigenvalues of `[[a, b], [b*, c]]`.
#[inline]
pub(crate) fn eig2(a: f64, c: f64, b: Complex64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let half_gap = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    (mean - half_gap, mean + half_gap)
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Seeded random inputs for property tests and witness searches.
pub mod random {
    use super::*;

    fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-random pure state.
    pub fn state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> StateVector {
        let v = DVector::from_fn(d, |_, _| gaussian_c(rng));
        let n = v.norm();
        v / Complex64::new(n, 0.0)
    }

    /// Ginibre matrix with i.i.d. standard complex normal entries.
    pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, |_, _| gaussian_c(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
        let g = ginibre(rng, d);
        (&g + &g.adjoint()).scale_real(0.5)
    }

    /// Full-rank random density matrix `G G† / Tr(G G†)`.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
        let g = ginibre(rng, d);
        let rho = &g * &g.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr)
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
        let g = ginibre(rng, d).into_dmatrix();
        let qr = g.qr();
        let q = qr.q();
        let r = qr.r();
        let phases = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                let z = r[(i, i)];
                if z.norm() > 0.0 {
                    z / z.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        ComplexMatrix(q * phases)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigma1() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    fn sigma2() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
    }

    fn sigma3() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[c(1., 0.), c(-1., 0.)])
    }

    #[test]
    fn trace_norm_examples() {
        assert!((ComplexMatrix::identity(2).trace_norm().unwrap() - 2.0).abs() < 1e-14);
        assert!((sigma3().trace_norm().unwrap() - 2.0).abs() < 1e-14);
        let nilpotent =
            ComplexMatrix::from_row_slice(2, &[c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!((nilpotent.trace_norm().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_rejects_nan() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(f64::NAN, 0.0));
        assert!(matches!(m.trace_norm(), Err(Error::InvalidInput(_))));
        assert!(m.frobenius_norm().is_err());
    }

    #[test]
    fn frobenius_examples() {
        assert!((ComplexMatrix::identity(3).frobenius_norm().unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((sigma1().frobenius_norm().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ComplexMatrix::zeros(4).frobenius_norm().unwrap(), 0.0);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((sigma3().min_eigenvalue_hermitian(HERMITIAN_TOL).unwrap() + 1.0).abs() < 1e-14);
        let p0 = ComplexMatrix::diagonal(&[c(1., 0.), c(0., 0.)]);
        assert!(p0.min_eigenvalue_hermitian(HERMITIAN_TOL).unwrap().abs() < 1e-14);
        let rho = (&ComplexMatrix::identity(2) + &sigma1().scale_real(0.6)).scale_real(0.5);
        assert!((rho.min_eigenvalue_hermitian(HERMITIAN_TOL).unwrap() - 0.2).abs() < 1e-14);
        // 3x3 goes through the general solver.
        let d3 = ComplexMatrix::diagonal(&[c(0.5, 0.), c(-0.25, 0.), c(2., 0.)]);
        assert!((d3.min_eigenvalue_hermitian(HERMITIAN_TOL).unwrap() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            m.min_eigenvalue_hermitian(HERMITIAN_TOL),
            Err(Error::NotHermitian { .. })
        ));
        let check = m.hermitian_check(HERMITIAN_TOL);
        assert!(!check.is_hermitian);
        assert!((check.max_deviation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ring_operations() {
        assert!((&sigma1() * &sigma1()).approx_eq(&ComplexMatrix::identity(2), EQ_TOL));
        let i_sigma2 = sigma2().scale(c(0., 1.));
        assert!(i_sigma2.adjoint().approx_eq(&(-&i_sigma2), EQ_TOL));
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn rejects_small_or_ragged() {
        assert!(matches!(
            ComplexMatrix::from_dmatrix(DMatrix::identity(1, 1)),
            Err(Error::InvalidDimension(1))
        ));
        assert!(ComplexMatrix::from_dmatrix(DMatrix::zeros(2, 3)).is_err());
        assert!(ComplexMatrix::from_row_slice(2, &[c(0., 0.); 3]).is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..6 {
            let u = random::unitary(&mut rng, d);
            assert!((&u.adjoint() * &u).approx_eq(&ComplexMatrix::identity(d), 1e-12));
        }
    }
}
