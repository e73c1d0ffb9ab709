//! Weyl operators and complete families of mutually unbiased bases in prime
//! dimension.
//!
//! Weyl operators follow `W_kl = X^l Z^k` with shift `X|m> = |m+1>` and clock
//! `Z|m> = ω^m |m>`, `ω = e^{2πi/d}`. For prime `d` the `d² - 1` nontrivial
//! operators split into `d + 1` classes of `d - 1` commuting operators; the
//! common eigenbases of the classes form `d + 1` mutually unbiased bases.
//!
//! Bases are indexed `α = 1..=d+1`. Basis `α ≤ d` is the eigenbasis of
//! `X Z^{α-1}` and basis `d + 1` is the eigenbasis of `Z`. For `d = 2` this
//! gives the `σ₁`, `σ₂`, `σ₃` eigenbases in that order.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::superop::{LinearMap, WeightedKraus};

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `e^{2πi k / d}`
pub fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, TAU * k / d as f64)
}

/// Weyl index pair `(k, l)` labelling `W_kl = X^l Z^k`.
pub type WeylIndex = (usize, usize);

/// All `d²` Weyl operators of dimension `d`.
#[derive(Clone, Debug)]
pub struct WeylBasis {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl WeylBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> Complex64 {
        root_of_unity(self.dim, 1)
    }

    /// `W_kl`, indices taken mod `d`.
    pub fn get(&self, k: i64, l: i64) -> &ComplexMatrix {
        let d = self.dim as i64;
        let k = k.rem_euclid(d) as usize;
        let l = l.rem_euclid(d) as usize;
        &self.operators[k * self.dim + l]
    }

    /// Iterates over `((k, l), W_kl)` in row-major index order.
    pub fn iter(&self) -> impl Iterator<Item = (WeylIndex, &ComplexMatrix)> {
        let d = self.dim;
        self.operators
            .iter()
            .enumerate()
            .map(move |(i, w)| ((i / d, i % d), w))
    }

    pub fn shift(&self) -> &ComplexMatrix {
        self.get(0, 1)
    }

    pub fn clock(&self) -> &ComplexMatrix {
        self.get(1, 0)
    }
}

/// Builds `W_kl = X^l Z^k` for all `k, l ∈ 0..d`.
pub fn weyl_basis(d: usize) -> Result<WeylBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let shift = ComplexMatrix::from_fn(d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let clock_diag: Vec<Complex64> = (0..d).map(|m| root_of_unity(d, m as i64)).collect();
    let clock = ComplexMatrix::diagonal(&clock_diag);

    let shift_powers: Vec<ComplexMatrix> = (0..d).map(|l| shift.pow(l)).collect();
    let clock_powers: Vec<ComplexMatrix> = (0..d).map(|k| clock.pow(k)).collect();
    let mut operators = Vec::with_capacity(d * d);
    for zk in &clock_powers {
        for xl in &shift_powers {
            operators.push(xl * zk);
        }
    }
    Ok(WeylBasis { dim: d, operators })
}

/// Generator of commuting class `a` (0-based): `W_{a,1} = X Z^a` for `a < d`,
/// `W_{1,0} = Z` for `a = d`.
fn class_generator(d: usize, a: usize) -> WeylIndex {
    if a < d {
        (a, 1)
    } else {
        (1, 0)
    }
}

/// Partitions the nontrivial Weyl operators into `d + 1` classes of `d - 1`
/// mutually commuting operators, `{W_{mk, ml} : m = 1..d-1}`.
///
/// Class order matches the basis order of [`mub_family`].
pub fn commuting_classes(basis: &WeylBasis) -> Result<Vec<Vec<WeylIndex>>> {
    let d = basis.dim();
    if !is_prime(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok((0..=d)
        .map(|a| {
            let (k, l) = class_generator(d, a);
            (1..d).map(|m| ((m * k) % d, (m * l) % d)).collect()
        })
        .collect())
}

/// A complete set of `d + 1` mutually unbiased bases with their rank-one
/// projectors `P_l^(α)` and unitaries `U_α = Σ_l ω^l P_l^(α)`.
#[derive(Clone, Debug)]
pub struct MubFamily {
    dim: usize,
    labels: Vec<String>,
    generators: Vec<WeylIndex>,
    bases: Vec<Vec<StateVector>>,
    projectors: Vec<Vec<ComplexMatrix>>,
    unitaries: Vec<ComplexMatrix>,
}

impl MubFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of bases, `d + 1`.
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    fn index(&self, alpha: usize) -> Result<usize> {
        if alpha == 0 || alpha > self.len() {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                max: self.len(),
            });
        }
        Ok(alpha - 1)
    }

    pub fn label(&self, alpha: usize) -> Result<&str> {
        Ok(&self.labels[self.index(alpha)?])
    }

    /// Weyl index of the operator whose eigenbasis is basis `alpha`.
    pub fn generator(&self, alpha: usize) -> Result<WeylIndex> {
        Ok(self.generators[self.index(alpha)?])
    }

    pub fn basis(&self, alpha: usize) -> Result<&[StateVector]> {
        Ok(&self.bases[self.index(alpha)?])
    }

    pub fn projectors(&self, alpha: usize) -> Result<&[ComplexMatrix]> {
        Ok(&self.projectors[self.index(alpha)?])
    }

    pub fn unitary(&self, alpha: usize) -> Result<&ComplexMatrix> {
        Ok(&self.unitaries[self.index(alpha)?])
    }

    pub fn bases(&self) -> impl Iterator<Item = &[StateVector]> {
        self.bases.iter().map(Vec::as_slice)
    }

    /// `Φ_α[ρ] = Σ_l P_l ρ P_l`, evaluated as `Σ_l <ψ_l|ρ|ψ_l> |ψ_l><ψ_l|`.
    pub fn dephase(&self, alpha: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let a = self.index(alpha)?;
        self.check_dim(rho)?;
        Ok(self.dephase_idx(a, rho))
    }

    pub(crate) fn dephase_idx(&self, a: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let m = rho.as_dmatrix();
        let mut out = ComplexMatrix::zeros(self.dim);
        for (psi, p) in self.bases[a].iter().zip(&self.projectors[a]) {
            let weight = (psi.adjoint() * m * psi)[(0, 0)];
            out.add_scaled_c(weight, p);
        }
        out
    }

    /// `|<ψ_l^(α)|ψ>|²` for every basis and index, row-major in `α`.
    pub(crate) fn overlaps_with(&self, psi: &StateVector) -> Vec<Vec<f64>> {
        self.bases
            .iter()
            .map(|basis| basis.iter().map(|b| b.dotc(psi).norm_sqr()).collect())
            .collect()
    }

    pub(crate) fn projectors_idx(&self, a: usize) -> &[ComplexMatrix] {
        &self.projectors[a]
    }

    /// `𝕌_α[ρ] = Σ_{k=1}^{d-1} U_α^k ρ U_α^{k†}`, evaluated from the Kraus form.
    pub fn unitary_mix(&self, alpha: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        unitary_mixing_map(self, alpha)?.apply(rho)
    }

    /// Largest `| |<ψ|φ>|² - target |` over all pairs, where the target is
    /// `δ_kl` within a basis and `1/d` across bases.
    pub fn max_overlap_deviation(&self) -> f64 {
        let d = self.dim as f64;
        let mut worst: f64 = 0.0;
        for (a, ba) in self.bases.iter().enumerate() {
            for (b, bb) in self.bases.iter().enumerate().skip(a) {
                for (k, u) in ba.iter().enumerate() {
                    for (l, v) in bb.iter().enumerate() {
                        let target = if a != b {
                            1.0 / d
                        } else if k == l {
                            1.0
                        } else {
                            0.0
                        };
                        worst = worst.max((u.dotc(v).norm_sqr() - target).abs());
                    }
                }
            }
        }
        worst
    }

    /// Cross-basis overlap table: `(α, k, β, l, |<ψ_k^(α)|ψ_l^(β)>|²)` for `α < β`.
    pub fn cross_overlaps(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut rows = Vec::new();
        for (a, ba) in self.bases.iter().enumerate() {
            for (b, bb) in self.bases.iter().enumerate().skip(a + 1) {
                for (k, u) in ba.iter().enumerate() {
                    for (l, v) in bb.iter().enumerate() {
                        rows.push((a + 1, k, b + 1, l, u.dotc(v).norm_sqr()));
                    }
                }
            }
        }
        rows
    }

    pub fn to_json(&self) -> MubFamilyJson {
        MubFamilyJson {
            dim: self.dim,
            bases: self
                .bases
                .iter()
                .zip(&self.labels)
                .zip(&self.generators)
                .map(|((vectors, label), gen)| BasisJson {
                    label: label.clone(),
                    generator: [gen.0, gen.1],
                    vectors: vectors
                        .iter()
                        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    fn check_dim(&self, rho: &ComplexMatrix) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

/// JSON form of a [`MubFamily`]: complex amplitudes as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MubFamilyJson {
    pub dim: usize,
    pub bases: Vec<BasisJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BasisJson {
    /// Operator whose eigenbasis this is, e.g. `"XZ^2"`.
    pub label: String,
    /// Weyl index `[k, l]` of that operator.
    pub generator: [usize; 2],
    /// `vectors[l][m]` is amplitude `m` of basis vector `l`.
    pub vectors: Vec<Vec<[f64; 2]>>,
}

fn class_label(d: usize, a: usize) -> String {
    match (a, a == d) {
        (_, true) => "Z".to_string(),
        (0, _) => "X".to_string(),
        (1, _) => "XZ".to_string(),
        (a, _) => format!("XZ^{a}"),
    }
}

/// Eigenvectors of a Weyl operator `W` with `W^d = c·I`, sorted by eigenvalue
/// phase in `[0, 2π)`. Built from the spectral projectors
/// `P_μ = (1/d) Σ_m μ^{-m} W^m`, so no iterative eigensolver is involved.
fn weyl_eigenbasis(w: &ComplexMatrix) -> Vec<StateVector> {
    let d = w.dim();
    let powers: Vec<ComplexMatrix> = (0..d).map(|m| w.pow(m)).collect();
    let c = (&powers[d - 1] * w).get(0, 0);
    let base_phase = c.arg() / d as f64;

    let mut eig: Vec<(f64, StateVector)> = (0..d)
        .map(|j| {
            let mut phase = (base_phase + TAU * j as f64 / d as f64).rem_euclid(TAU);
            if TAU - phase < 1e-9 {
                phase = 0.0;
            }
            let mu_inv = Complex64::from_polar(1.0, -phase);
            let mut proj = ComplexMatrix::zeros(d);
            let mut coeff = Complex64::new(1.0, 0.0);
            for p in &powers {
                proj = &proj + &p.scale(coeff);
                coeff *= mu_inv;
            }
            let proj = proj.scale_real(1.0 / d as f64);
            (phase, normalized_column(&proj))
        })
        .collect();
    eig.sort_by(|a, b| a.0.total_cmp(&b.0));
    eig.into_iter().map(|(_, v)| v).collect()
}

/// Largest column of a rank-one projector, normalized with its first
/// non-negligible amplitude made real and positive.
fn normalized_column(proj: &ComplexMatrix) -> StateVector {
    let m = proj.as_dmatrix();
    let best = (0..m.ncols())
        .max_by(|&a, &b| m.column(a).norm().total_cmp(&m.column(b).norm()))
        .unwrap_or(0);
    let col: StateVector = m.column(best).into_owned();
    let n = col.norm();
    let mut v = col / Complex64::new(n, 0.0);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-9).copied() {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    v
}

/// Constructs the `d + 1` mutually unbiased bases for prime `d`.
pub fn mub_family(d: usize) -> Result<MubFamily> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if !is_prime(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let weyl = weyl_basis(d)?;
    let omega = weyl.omega();

    let mut labels = Vec::with_capacity(d + 1);
    let mut generators = Vec::with_capacity(d + 1);
    let mut bases = Vec::with_capacity(d + 1);
    let mut projectors = Vec::with_capacity(d + 1);
    let mut unitaries = Vec::with_capacity(d + 1);
    for a in 0..=d {
        let gen = class_generator(d, a);
        let vectors = weyl_eigenbasis(weyl.get(gen.0 as i64, gen.1 as i64));
        let projs: Vec<ComplexMatrix> = vectors.iter().map(ComplexMatrix::projector).collect();
        let mut u = ComplexMatrix::zeros(d);
        let mut phase = Complex64::new(1.0, 0.0);
        for p in &projs {
            u = &u + &p.scale(phase);
            phase *= omega;
        }
        labels.push(class_label(d, a));
        generators.push(gen);
        bases.push(vectors);
        projectors.push(projs);
        unitaries.push(u);
    }
    Ok(MubFamily {
        dim: d,
        labels,
        generators,
        bases,
        projectors,
        unitaries,
    })
}

/// `Φ_α` as the Kraus list `{P_l^(α)}`.
pub fn decoherence_channel(family: &MubFamily, alpha: usize) -> Result<WeightedKraus> {
    let projs = family.projectors(alpha)?;
    WeightedKraus::new(
        family.dim(),
        projs.iter().map(|p| (1.0, p.clone())).collect(),
    )
}

/// `𝕌_α` as the Kraus list `{U_α^k : k = 1..d-1}`.
pub fn unitary_mixing_map(family: &MubFamily, alpha: usize) -> Result<WeightedKraus> {
    let u = family.unitary(alpha)?;
    WeightedKraus::new(
        family.dim(),
        (1..family.dim()).map(|k| (1.0, u.pow(k))).collect(),
    )
}

/// Computational basis vector `|m>`.
pub fn ket(d: usize, m: usize) -> StateVector {
    DVector::from_fn(d, |i, _| {
        if i == m {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
