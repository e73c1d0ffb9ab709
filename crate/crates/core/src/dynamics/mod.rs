//! Time-dependent generalized Pauli dynamics and divisibility diagnostics.
//!
//! The generator `L(t) = Σ_α γ_α(t)(Φ_α - id)` has commuting terms, so the
//! map is diagonal in the `U_α^k` basis with eigenvalues
//! `λ_α(t) = exp(Γ_α(t) - Γ(t))`, where `Γ_α = ∫₀ᵗ γ_α` and `Γ = Σ_β Γ_β`.
//! Intermediate maps `V(t, s)` are built from eigenvalue ratios and are never
//! obtained by inverting a superoperator.

mod conditions;
mod report;
mod verdict;
mod witness;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::channel::{apply_spectral, channel_from_eigenvalues, GenPauliChannel};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::mub::{mub_family, MubFamily};
use crate::ratefn::{RateSet, DEFAULT_QUAD_TOL};

pub use conditions::{
    check_cp_divisible, check_cptp_trajectory, check_frobenius_monotone, check_p_necessary,
    check_p_sufficient, check_weyl_sufficient, check_weyl_sufficient_rates, p_sufficient_margin,
    weyl_sufficient_margin, FrobeniusVerdict, NEGATIVE_RATE_TOL,
};
pub use report::{analyze, AnalysisConfig, DivisibilityReport, HierarchyCheck};
pub use verdict::{Status, Verdict, Violation};
pub use witness::{
    check_blp, find_p_divisibility_witness, witness_pairs, BlpVerdict, BlpWitness, PositivityWitness,
    WitnessConfig, WitnessSearch, POSITIVITY_TOL, TRACE_NORM_REL_TOL,
};

/// Default number of grid steps.
pub const DEFAULT_STEPS: usize = 400;

/// Sampled rates, integrals and eigenvalues on a uniform grid `[0, t_max]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    family: Arc<MubFamily>,
    rates: RateSet,
    grid: Vec<f64>,
    gammas: Vec<Vec<f64>>,
    integrals: Vec<Vec<f64>>,
    log_lambdas: Vec<Vec<f64>>,
    lambdas: Vec<Vec<f64>>,
}

pub fn build_trajectory(rates: &RateSet, t_max: f64, steps: usize) -> Result<Trajectory> {
    build_trajectory_with_tol(rates, t_max, steps, DEFAULT_QUAD_TOL)
}

pub fn build_trajectory_with_tol(rates: &RateSet, t_max: f64, steps: usize, tol: f64) -> Result<Trajectory> {
    let family = Arc::new(mub_family(rates.dim())?);
    build_trajectory_in(&family, rates, t_max, steps, tol)
}

/// Builds a trajectory reusing an existing MUB family of matching dimension.
///
/// `tol` is the absolute quadrature tolerance for the whole window; each of
/// the `steps` subintervals gets `tol / steps`.
pub fn build_trajectory_in(
    family: &Arc<MubFamily>,
    rates: &RateSet,
    t_max: f64,
    steps: usize,
    tol: f64,
) -> Result<Trajectory> {
    let d = rates.dim();
    if family.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: family.dim(),
        });
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidInput(format!("t_max must be positive and finite, got {t_max}")));
    }
    if steps < 2 {
        return Err(Error::InvalidInput(format!("steps must be at least 2, got {steps}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }

    let grid: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
    let sub_tol = tol / steps as f64;
    let mut gammas = Vec::with_capacity(steps + 1);
    let mut integrals = Vec::with_capacity(steps + 1);
    let mut running = vec![0.0; d + 1];
    for (i, &t) in grid.iter().enumerate() {
        if i > 0 {
            let t0 = grid[i - 1];
            for (alpha, rate) in rates.rates().iter().enumerate() {
                let q = rate.integrate(t0, t, sub_tol).map_err(|source| Error::Quadrature {
                    alpha: alpha + 1,
                    source,
                })?;
                running[alpha] += q.value;
            }
        }
        gammas.push(rates.evaluate(t)?);
        integrals.push(running.clone());
    }

    let log_lambdas: Vec<Vec<f64>> = integrals
        .iter()
        .map(|g| {
            let total: f64 = g.iter().sum();
            g.iter().map(|x| x - total).collect()
        })
        .collect();
    let lambdas = log_lambdas
        .iter()
        .map(|row| row.iter().map(|x| x.exp()).collect())
        .collect();

    Ok(Trajectory {
        family: family.clone(),
        rates: rates.clone(),
        grid,
        gammas,
        integrals,
        log_lambdas,
        lambdas,
    })
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.rates.dim()
    }

    pub fn family(&self) -> &Arc<MubFamily> {
        &self.family
    }

    pub fn rates(&self) -> &RateSet {
        &self.rates
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.grid.last().expect("grid has at least three points")
    }

    /// `γ_α(t_i)` for all `α`.
    pub fn gammas(&self, i: usize) -> &[f64] {
        &self.gammas[i]
    }

    /// `Γ_α(t_i)` for all `α`.
    pub fn integrals(&self, i: usize) -> &[f64] {
        &self.integrals[i]
    }

    /// `Γ(t_i) = Σ_α Γ_α(t_i)`.
    pub fn total_integral(&self, i: usize) -> f64 {
        self.integrals[i].iter().sum()
    }

    pub fn lambdas(&self, i: usize) -> &[f64] {
        &self.lambdas[i]
    }

    /// `ln λ_α(t_i) = Γ_α(t_i) - Γ(t_i)`.
    pub fn log_lambdas(&self, i: usize) -> &[f64] {
        &self.log_lambdas[i]
    }

    /// `μ_α(t_i) = γ_α(t_i) - γ(t_i)`.
    pub fn mu(&self, i: usize) -> Vec<f64> {
        let g = &self.gammas[i];
        let total: f64 = g.iter().sum();
        g.iter().map(|x| x - total).collect()
    }

    pub fn negative_rate_count(&self, i: usize) -> usize {
        self.gammas[i].iter().filter(|&&g| g < -NEGATIVE_RATE_TOL).count()
    }

    /// `Λ(t_i)` as a channel.
    pub fn map_at(&self, i: usize) -> Result<GenPauliChannel> {
        channel_from_eigenvalues(&self.family, &self.lambdas[i])
    }

    /// `Λ(t_i)[x]`.
    pub fn apply(&self, i: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(apply_spectral(&self.family, &self.lambdas[i], x))
    }

    /// `V(t_j, t_i)` with `Λ(t_j) = V(t_j, t_i) Λ(t_i)`; requires `i ≤ j`.
    pub fn intermediate(&self, j: usize, i: usize) -> Result<IntermediateMap> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                max: n - 1,
            });
        }
        if i > j {
            return Err(Error::InvalidInput(format!(
                "intermediate map needs s <= t, got grid indices {i} > {j}"
            )));
        }
        Ok(IntermediateMap {
            family: self.family.clone(),
            t: self.grid[j],
            s: self.grid[i],
            nu: nu_between(&self.log_lambdas[j], &self.log_lambdas[i]),
        })
    }

    /// CSV with columns `t, gamma_1.., Gamma_1.., lambda_1..`.
    pub fn to_csv(&self) -> String {
        let d1 = self.dim() + 1;
        let mut out = String::from("t");
        for prefix in ["gamma", "Gamma", "lambda"] {
            for a in 1..=d1 {
                let _ = write!(out, ",{prefix}_{a}");
            }
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e}", self.grid[i]);
            for row in [&self.gammas[i], &self.integrals[i], &self.lambdas[i]] {
                for x in row.iter() {
                    let _ = write!(out, ",{x:.16e}");
                }
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn nu_between(log_t: &[f64], log_s: &[f64]) -> Vec<f64> {
    log_t.iter().zip(log_s).map(|(a, b)| (a - b).exp()).collect()
}

/// The propagator `V(t, s)` between two grid times, with eigenvalues
/// `ν_α = λ_α(t) / λ_α(s)`.
#[derive(Clone, Debug)]
pub struct IntermediateMap {
    family: Arc<MubFamily>,
    t: f64,
    s: f64,
    nu: Vec<f64>,
}

impl IntermediateMap {
    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn times(&self) -> (f64, f64) {
        (self.t, self.s)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.nu
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(apply_spectral(&self.family, &self.nu, x))
    }

    pub fn as_channel(&self) -> Result<GenPauliChannel> {
        channel_from_eigenvalues(&self.family, &self.nu)
    }
}

/// `L(t)[ρ] = Σ_α γ_α(t)(Φ_α[ρ] - ρ)`.
pub fn generator_apply(rates: &RateSet, family: &MubFamily, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if family.dim() != rates.dim() {
        return Err(Error::DimensionMismatch {
            expected: rates.dim(),
            found: family.dim(),
        });
    }
    if rho.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: rho.dim(),
        });
    }
    let gammas = rates.evaluate(t)?;
    let mut out = ComplexMatrix::zeros(rho.dim());
    for (a, &g) in gammas.iter().enumerate() {
        out.add_scaled(g, &family.dephase_idx(a, rho));
        out.add_scaled(-g, rho);
    }
    Ok(out)
}
