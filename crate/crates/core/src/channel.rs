//! Generalized Pauli channels and Weyl channels.
//!
//! A generalized Pauli channel on `C^d` mixes the identity map with the
//! `d + 1` unitary-mixing maps of a complete MUB family:
//!
//! ```text
//! Λ = p₀ id + 1/(d-1) Σ_α p_α 𝕌_α
//! ```
//!
//! It acts diagonally on the operator basis `{I, U_α^k}` with real eigenvalue
//! `λ_α` on every `U_α^k`. Both coordinates are stored and kept in sync.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix};
use crate::mub::{commuting_classes, mub_family, weyl_basis, MubFamily, WeylBasis};
use crate::superop::{LinearMap, WeightedKraus};

/// Tolerance for the probability/eigenvalue consistency invariant.
pub const SYNC_TOL: f64 = 1e-12;
/// Slack on the CP inequalities before a channel is declared non-CP.
pub const CP_TOL: f64 = 1e-12;
/// Choi eigenvalues above `-CHOI_TOL` count as nonnegative.
pub const CHOI_TOL: f64 = 1e-10;

/// `λ_α = p₀ + p_α - 1/(d-1) Σ_{β≠α} p_β` for `α = 1..=d+1`.
pub fn eigenvalues_from_probabilities(d: usize, p: &[f64]) -> Vec<f64> {
    let total: f64 = p[1..].iter().sum();
    let inv = 1.0 / (d as f64 - 1.0);
    p[1..]
        .iter()
        .map(|&pa| p[0] + pa - inv * (total - pa))
        .collect()
}

/// Inverse of [`eigenvalues_from_probabilities`]; returns `(p₀, p₁, …, p_{d+1})`.
pub fn probabilities_from_eigenvalues(d: usize, lambdas: &[f64]) -> Vec<f64> {
    let df = d as f64;
    let total: f64 = lambdas.iter().sum();
    let mut p = Vec::with_capacity(lambdas.len() + 1);
    p.push((1.0 + (df - 1.0) * total) / (df * df));
    for &la in lambdas {
        p.push((df - 1.0) / (df * df) * (1.0 + (df - 1.0) * la - (total - la)));
    }
    p
}

/// Outcome of the eigenvalue CP test
/// `-1/(d-1) ≤ Σ_β λ_β ≤ 1 + d min_β λ_β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpVerdict {
    pub is_cp: bool,
    /// `min(lower_margin, upper_margin)`; negative when a bound is violated.
    pub margin: f64,
    /// `Σλ + 1/(d-1)`
    pub lower_margin: f64,
    /// `1 + d min λ - Σλ`
    pub upper_margin: f64,
}

pub fn fujiwara_verdict(d: usize, lambdas: &[f64]) -> CpVerdict {
    let df = d as f64;
    let total: f64 = lambdas.iter().sum();
    let min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let lower_margin = total + 1.0 / (df - 1.0);
    let upper_margin = 1.0 + df * min - total;
    let margin = lower_margin.min(upper_margin);
    CpVerdict {
        is_cp: margin >= -CP_TOL,
        margin,
        lower_margin,
        upper_margin,
    }
}

/// Qubit Fujiwara–Algoet inequalities `|1 ± λ₃| ≥ |λ₁ ± λ₂|`.
pub fn fujiwara_algoet_qubit(l1: f64, l2: f64, l3: f64) -> bool {
    (1.0 + l3).abs() >= (l1 + l2).abs() - CP_TOL && (1.0 - l3).abs() >= (l1 - l2).abs() - CP_TOL
}

/// `X ↦ (Tr X/d) I + Σ_α λ_α (Φ_α[X] - (Tr X/d) I)`: the map with eigenvalue
/// `λ_α` on every `U_α^k` and 1 on the identity.
pub fn apply_spectral(family: &MubFamily, lambdas: &[f64], x: &ComplexMatrix) -> ComplexMatrix {
    let d = family.dim();
    let mean = x.trace() / d as f64;
    let id = ComplexMatrix::identity(d);
    let mut out = id.scale(mean);
    for (a, &la) in lambdas.iter().enumerate() {
        let mut component = family.dephase_idx(a, x);
        component.add_scaled_c(-mean, &id);
        out.add_scaled(la, &component);
    }
    out
}

/// Generalized Pauli channel. Non-CP maps are representable; see [`Self::cp`].
#[derive(Clone, Debug)]
pub struct GenPauliChannel {
    family: Arc<MubFamily>,
    probabilities: Vec<f64>,
    eigenvalues: Vec<f64>,
    cp: CpVerdict,
}

impl GenPauliChannel {
    fn new(family: Arc<MubFamily>, probabilities: Vec<f64>, eigenvalues: Vec<f64>) -> Self {
        let cp = fujiwara_verdict(family.dim(), &eigenvalues);
        Self {
            family,
            probabilities,
            eigenvalues,
            cp,
        }
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn family(&self) -> &Arc<MubFamily> {
        &self.family
    }

    /// `(p₀, p₁, …, p_{d+1})`
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `(λ₁, …, λ_{d+1})`; `λ₀ = 1` is implicit.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn cp(&self) -> CpVerdict {
        self.cp
    }

    pub fn is_cp_fujiwara(&self) -> CpVerdict {
        self.cp
    }

    /// Weighted Kraus form `{(p₀, I)} ∪ {(p_α/(d-1), U_α^k)}`.
    pub fn kraus(&self) -> WeightedKraus {
        let d = self.dim();
        let mut terms = vec![(self.probabilities[0], ComplexMatrix::identity(d))];
        for (a, &pa) in self.probabilities[1..].iter().enumerate() {
            let u = self
                .family
                .unitary(a + 1)
                .expect("family holds d + 1 unitaries");
            for k in 1..d {
                terms.push((pa / (d as f64 - 1.0), u.pow(k)));
            }
        }
        WeightedKraus::new(d, terms).expect("Kraus operators share the channel dimension")
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi_matrix(self)
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            dim: self.dim(),
            probabilities: self.probabilities.clone(),
            eigenvalues: self.eigenvalues.clone(),
            cp_flag: self.cp.is_cp,
        }
    }

    /// Rebuilds a channel from JSON. Eigenvalues are authoritative; the stored
    /// probabilities must agree with them.
    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        let family = Arc::new(mub_family(json.dim)?);
        let ch = channel_from_eigenvalues(&family, &json.eigenvalues)?;
        if json.probabilities.len() != ch.probabilities.len() {
            return Err(Error::LengthMismatch {
                expected: ch.probabilities.len(),
                found: json.probabilities.len(),
            });
        }
        let drift = json
            .probabilities
            .iter()
            .zip(&ch.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if drift > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "probabilities disagree with eigenvalues by {drift:e}"
            )));
        }
        Ok(ch)
    }
}

impl LinearMap for GenPauliChannel {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    /// `Λ[ρ] = (p₀ - Σp_α/(d-1)) ρ + d/(d-1) Σ_α p_α Φ_α[ρ]`, using `𝕌_α = dΦ_α - id`.
    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let df = self.dim() as f64;
        let rest: f64 = self.probabilities[1..].iter().sum();
        let mut out = rho.scale_real(self.probabilities[0] - rest / (df - 1.0));
        for (a, &pa) in self.probabilities[1..].iter().enumerate() {
            out.add_scaled(pa * df / (df - 1.0), &self.family.dephase_idx(a, rho));
        }
        out
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite")))
    }
}

/// Builds a channel from `(p₀, …, p_{d+1})`, which must sum to 1.
pub fn channel_from_probabilities(family: &Arc<MubFamily>, p: &[f64]) -> Result<GenPauliChannel> {
    let d = family.dim();
    if p.len() != d + 2 {
        return Err(Error::LengthMismatch {
            expected: d + 2,
            found: p.len(),
        });
    }
    check_finite(p, "probabilities")?;
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let lambdas = eigenvalues_from_probabilities(d, p);
    Ok(GenPauliChannel::new(family.clone(), p.to_vec(), lambdas))
}

/// Builds a channel from `(λ₁, …, λ_{d+1})`.
pub fn channel_from_eigenvalues(
    family: &Arc<MubFamily>,
    lambdas: &[f64],
) -> Result<GenPauliChannel> {
    let d = family.dim();
    if lambdas.len() != d + 1 {
        return Err(Error::LengthMismatch {
            expected: d + 1,
            found: lambdas.len(),
        });
    }
    check_finite(lambdas, "eigenvalues")?;
    let p = probabilities_from_eigenvalues(d, lambdas);
    Ok(GenPauliChannel::new(family.clone(), p, lambdas.to_vec()))
}

/// Stable JSON form of a [`GenPauliChannel`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelJson {
    pub dim: usize,
    /// `[p₀, p₁, …, p_{d+1}]`
    pub probabilities: Vec<f64>,
    /// `[λ₁, …, λ_{d+1}]`
    pub eigenvalues: Vec<f64>,
    pub cp_flag: bool,
}

/// Weyl channel `ρ ↦ Σ_{kl} p_kl W_kl ρ W_kl†`.
#[derive(Clone, Debug)]
pub struct WeylChannel {
    weyl: Arc<WeylBasis>,
    /// `probabilities[k * d + l] = p_kl`
    probabilities: Vec<f64>,
}

impl WeylChannel {
    pub fn new(weyl: Arc<WeylBasis>, probabilities: Vec<f64>) -> Result<Self> {
        let d = weyl.dim();
        if probabilities.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                found: probabilities.len(),
            });
        }
        check_finite(&probabilities, "probabilities")?;
        Ok(Self {
            weyl,
            probabilities,
        })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        let weyl = Arc::new(weyl_basis(d)?);
        Self::new(weyl, vec![1.0 / (d * d) as f64; d * d])
    }

    pub fn probability(&self, k: usize, l: usize) -> f64 {
        self.probabilities[k * self.weyl.dim() + l]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Embeds a generalized Pauli channel: `p₀₀ = p₀` and `p_kl = p_α/(d-1)`
    /// on the commuting class of basis `α`.
    pub fn from_gen_pauli(ch: &GenPauliChannel) -> Result<Self> {
        let d = ch.dim();
        let weyl = Arc::new(weyl_basis(d)?);
        let classes = commuting_classes(&weyl)?;
        let mut p = vec![0.0; d * d];
        p[0] = ch.probabilities()[0];
        for (a, class) in classes.iter().enumerate() {
            for &(k, l) in class {
                p[k * d + l] = ch.probabilities()[a + 1] / (d as f64 - 1.0);
            }
        }
        Self::new(weyl, p)
    }
}

impl LinearMap for WeylChannel {
    fn dim(&self) -> usize {
        self.weyl.dim()
    }

    fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim());
        for ((k, l), w) in self.weyl.iter() {
            let p = self.probability(k, l);
            if p != 0.0 {
                out.add_scaled(p, &w.sandwich(rho, &w.adjoint()));
            }
        }
        out
    }
}

pub fn weyl_channel_apply(ch: &WeylChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    ch.apply(rho)
}

/// Choi matrix `(id ⊗ Λ)(|Ω><Ω|)` with `|Ω> = Σ_i |ii>/√d`, so a trace-
/// preserving map has unit trace and is CP iff the matrix is PSD.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -CHOI_TOL
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Trace over the output factor; `I/d` for trace-preserving maps.
    pub fn partial_trace_output(&self) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d, |i, j| (0..d).map(|m| self.matrix[(i * d + m, j * d + m)]).sum())
    }
}

pub fn choi_matrix<M: LinearMap + ?Sized>(map: &M) -> ChoiMatrix {
    let d = map.dim();
    let mut matrix = DMatrix::zeros(d * d, d * d);
    let scale = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let mut unit = ComplexMatrix::zeros(d);
            unit.set(i, j, Complex64::new(1.0, 0.0));
            let image = map.apply_unchecked(&unit);
            for r in 0..d {
                for s in 0..d {
                    matrix[(i * d + r, j * d + s)] = image.get(r, s) * scale;
                }
            }
        }
    }
    ChoiMatrix { dim: d, matrix }
}
