//! Linear maps on `d x d` matrices.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// A linear map `M_d(C) -> M_d(C)`.
pub trait LinearMap {
    fn dim(&self) -> usize;

    /// Action on a single operator. Implementors may assume `rho.dim() == self.dim()`.
    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix;

    fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(self.apply_unchecked(rho))
    }
}

/// `ρ ↦ Σ_i w_i K_i ρ K_i†` with real (possibly negative) weights.
#[derive(Clone, Debug)]
pub struct WeightedKraus {
    dim: usize,
    terms: Vec<(f64, ComplexMatrix)>,
}

impl WeightedKraus {
    pub fn new(dim: usize, terms: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        if let Some((_, k)) = terms.iter().find(|(_, k)| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
        Ok(Self { dim, terms })
    }

    pub fn terms(&self) -> &[(f64, ComplexMatrix)] {
        &self.terms
    }

    /// Whether every weight is nonnegative, i.e. the Kraus form certifies CP.
    pub fn has_nonnegative_weights(&self) -> bool {
        self.terms.iter().all(|(w, _)| *w >= 0.0)
    }
}

impl LinearMap for WeightedKraus {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (w, k) in &self.terms {
            out.add_scaled(*w, &k.sandwich(rho, &k.adjoint()));
        }
        out
    }
}

/// Sequential composition: `outer ∘ inner`.
pub struct Composed<'a, A: LinearMap + ?Sized, B: LinearMap + ?Sized> {
    pub outer: &'a A,
    pub inner: &'a B,
}

impl<A: LinearMap + ?Sized, B: LinearMap + ?Sized> LinearMap for Composed<'_, A, B> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.outer.apply_unchecked(&self.inner.apply_unchecked(rho))
    }
}

/// Identity map on `d x d` matrices.
#[derive(Clone, Copy, Debug)]
pub struct IdentityMap(pub usize);

impl LinearMap for IdentityMap {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        rho.clone()
    }
}
