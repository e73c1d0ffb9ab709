//! Sampled falsifiers: positivity of intermediate maps and trace-distance
//! back-flow.
//!
//! A trace-preserving map is positive iff it maps every pure state to a
//! positive operator, so the P-divisibility search samples pure states `ψ`
//! and grid pairs `s < t`, looking for `min eig V(t,s)[ψψ†] < -1e-9`.
//! For each state the overlaps `q_αl = |<ψ_l^(α)|ψ>|²` are computed once and
//!
//! ```text
//! V(t,s)[ψψ†] = I/d + Σ_α ν_α Σ_l (q_αl - 1/d) P_l^(α)
//! ```
//!
//! is then assembled for every pair. Pairs whose `ν` passes the simplex CP
//! test are skipped, since a CP map cannot fail positivity.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::fujiwara_verdict;
use crate::linalg::{eig2, hermitian_eigenvalues, random, ComplexMatrix, StateVector};
use crate::mub::MubFamily;

use super::verdict::Status;
use super::{nu_between, Trajectory};

/// A positivity witness needs `min eig < -POSITIVITY_TOL`.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// A norm counts as increased when it grows by more than this fraction.
pub const TRACE_NORM_REL_TOL: f64 = 1e-9;

const WITNESS_STREAM: u64 = 0;
const BLP_STREAM: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessConfig {
    pub attempts: usize,
    pub refine_iters: usize,
    /// How many of the best candidates get refined.
    pub refine_candidates: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            attempts: 2000,
            refine_iters: 50,
            refine_candidates: 4,
            seed: 42,
        }
    }
}

/// Grid pairs `(s, t)` examined by the search: spans `1, 2, 4, …` with start
/// points spaced by half the span.
pub fn witness_pairs(points: usize) -> Vec<(usize, usize)> {
    let last = points.saturating_sub(1);
    let mut pairs = Vec::new();
    let mut span = 1;
    while span <= last {
        let stride = (span / 2).max(1);
        let mut s = 0;
        while s + span <= last {
            pairs.push((s, s + span));
            s += stride;
        }
        span *= 2;
    }
    pairs
}

fn to_pairs(psi: &StateVector) -> Vec<[f64; 2]> {
    psi.iter().map(|z| [z.re, z.im]).collect()
}

/// A pure state `ψ` and grid pair with `V(t,s)[ψψ†]` not positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityWitness {
    pub s_index: usize,
    pub t_index: usize,
    pub s: f64,
    pub t: f64,
    /// Amplitudes of `ψ` as `[re, im]`.
    pub state: Vec<[f64; 2]>,
    /// Eigenvalues `ν_α` of `V(t, s)`.
    pub nu: Vec<f64>,
    pub min_eigenvalue: f64,
    /// `‖V(t,s)[ψψ†]‖₁`, which exceeds `‖ψψ†‖₁ = 1`.
    pub trace_norm: f64,
    /// `-min_eigenvalue`.
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessSearch {
    /// `violated` when a witness was found, `holds` when every examined
    /// intermediate map is CP, `inconclusive` otherwise.
    pub status: Status,
    pub witness: Option<PositivityWitness>,
    /// Smallest eigenvalue seen over all evaluations (1/d when none ran).
    pub best_min_eigenvalue: f64,
    pub states_tried: usize,
    pub pairs: usize,
    pub non_cp_pairs: usize,
    pub evaluations: usize,
}

impl WitnessSearch {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Precomputed `Σ_l (q_αl - 1/d) P_l^(α)` for one state.
struct StateImage {
    parts: Vec<DMatrix<Complex64>>,
}

impl StateImage {
    fn new(family: &MubFamily, psi: &StateVector) -> Self {
        let d = family.dim();
        let inv_d = 1.0 / d as f64;
        let q = family.overlaps_with(psi);
        let parts = q
            .iter()
            .enumerate()
            .map(|(a, row)| {
                let mut m = DMatrix::zeros(d, d);
                for (w, p) in row.iter().zip(family.projectors_idx(a)) {
                    m += p.as_dmatrix() * Complex64::new(w - inv_d, 0.0);
                }
                m
            })
            .collect();
        Self { parts }
    }

    fn image(&self, d: usize, nu: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        for (part, &n) in self.parts.iter().zip(nu) {
            m.zip_apply(part, |x, y| *x += y * n);
        }
        m
    }

    fn min_eigenvalue(&self, d: usize, nu: &[f64]) -> f64 {
        let m = self.image(d, nu);
        if d == 2 {
            eig2(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]).0
        } else {
            hermitian_eigenvalues(&m)[0]
        }
    }
}

struct Candidate {
    value: f64,
    psi: StateVector,
    pair: usize,
}

fn normalized(x: &[f64]) -> StateVector {
    let d = x.len() / 2;
    let v = StateVector::from_fn(d, |i, _| Complex64::new(x[2 * i], x[2 * i + 1]));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Gradient-free coordinate descent on the real and imaginary parts of `ψ`.
fn polish(family: &MubFamily, psi: &StateVector, nu: &[f64], iters: usize, evals: &mut usize) -> (f64, StateVector) {
    let d = family.dim();
    let objective = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        StateImage::new(family, &normalized(x)).min_eigenvalue(d, nu)
    };
    let mut x: Vec<f64> = psi.iter().flat_map(|z| [z.re, z.im]).collect();
    let mut best = objective(&x, evals);
    let mut step = 0.25;
    for _ in 0..iters {
        let mut improved = false;
        for k in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[k] += sign * step;
                let value = objective(&trial, evals);
                if value < best {
                    best = value;
                    x = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    (best, normalized(&x))
}

/// Searches for a pure state and grid pair on which the intermediate map
/// fails positivity. Runs the `d(d+1)` MUB vectors first, then
/// `config.attempts` Haar-random states, then refines the best candidates.
pub fn find_p_divisibility_witness(traj: &Trajectory, config: &WitnessConfig) -> WitnessSearch {
    let family: &Arc<MubFamily> = traj.family();
    let d = family.dim();
    let all_pairs = witness_pairs(traj.len());
    let pairs: Vec<((usize, usize), Vec<f64>)> = all_pairs
        .iter()
        .map(|&(s, t)| ((s, t), nu_between(traj.log_lambdas(t), traj.log_lambdas(s))))
        .filter(|(_, nu)| !fujiwara_verdict(d, nu).is_cp)
        .collect();

    let mut states: Vec<StateVector> = family.bases().flat_map(|b| b.iter().cloned()).collect();
    let mut result = WitnessSearch {
        status: Status::Holds,
        witness: None,
        best_min_eigenvalue: 1.0 / d as f64,
        states_tried: states.len() + config.attempts,
        pairs: all_pairs.len(),
        non_cp_pairs: pairs.len(),
        evaluations: 0,
    };
    if pairs.is_empty() {
        result.states_tried = 0;
        return result;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(WITNESS_STREAM);
    states.extend((0..config.attempts).map(|_| random::state(&mut rng, d)));

    let keep = config.refine_candidates.max(1);
    let mut top: Vec<Candidate> = Vec::with_capacity(keep + 1);
    for psi in states {
        let img = StateImage::new(family, &psi);
        let mut best = (f64::INFINITY, 0);
        for (p, (_, nu)) in pairs.iter().enumerate() {
            let v = img.min_eigenvalue(d, nu);
            if v < best.0 {
                best = (v, p);
            }
        }
        result.evaluations += pairs.len();
        if top.len() < keep || best.0 < top[top.len() - 1].value {
            top.push(Candidate {
                value: best.0,
                psi,
                pair: best.1,
            });
            top.sort_by(|a, b| a.value.total_cmp(&b.value));
            top.truncate(keep);
        }
    }

    let mut winner: Option<Candidate> = None;
    for cand in top {
        // Polishing starts from the candidate itself, so it never gets worse.
        let (mut value, psi) = polish(family, &cand.psi, &pairs[cand.pair].1, config.refine_iters, &mut result.evaluations);
        let mut pair = cand.pair;
        let img = StateImage::new(family, &psi);
        for (p, (_, nu)) in pairs.iter().enumerate() {
            let v = img.min_eigenvalue(d, nu);
            if v < value {
                value = v;
                pair = p;
            }
        }
        result.evaluations += pairs.len();
        if winner.as_ref().is_none_or(|w| value < w.value) {
            winner = Some(Candidate { value, psi, pair });
        }
    }

    let winner = winner.expect("at least one candidate");
    result.best_min_eigenvalue = winner.value;
    if winner.value < -POSITIVITY_TOL {
        let ((s, t), nu) = &pairs[winner.pair];
        let image = StateImage::new(family, &winner.psi).image(d, nu);
        let eigs = hermitian_eigenvalues(&image);
        result.status = Status::Violated;
        result.witness = Some(PositivityWitness {
            s_index: *s,
            t_index: *t,
            s: traj.grid()[*s],
            t: traj.grid()[*t],
            state: to_pairs(&winner.psi),
            nu: nu.clone(),
            min_eigenvalue: eigs[0],
            trace_norm: eigs.iter().map(|x| x.abs()).sum(),
            magnitude: -eigs[0],
        });
    } else {
        result.status = Status::Inconclusive;
    }
    result
}

/// Consecutive grid points where `‖Λ(t)[ρ₁ - ρ₂]‖₁` grew.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlpWitness {
    pub pair: usize,
    pub index: usize,
    pub t_prev: f64,
    pub t_next: f64,
    pub norm_prev: f64,
    pub norm_next: f64,
    pub relative_increase: f64,
    pub state1: Vec<[f64; 2]>,
    pub state2: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlpVerdict {
    /// `violated` on back-flow, `holds` when every step map is CP,
    /// `inconclusive` otherwise.
    pub status: Status,
    pub pairs: usize,
    /// Number of (pair, step) increases found.
    pub increases: usize,
    /// The largest relative increase.
    pub witness: Option<BlpWitness>,
}

fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Tracks the trace distance of pure-state pairs along the grid. The pairs
/// are two orthogonal vectors of each MUB followed by `random_pairs` Haar
/// random pairs.
pub fn check_blp(traj: &Trajectory, random_pairs: usize, seed: u64) -> BlpVerdict {
    let family = traj.family();
    let d = family.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BLP_STREAM);
    let mut state_pairs: Vec<(StateVector, StateVector)> =
        family.bases().map(|b| (b[0].clone(), b[1].clone())).collect();
    state_pairs.extend((0..random_pairs).map(|_| (random::state(&mut rng, d), random::state(&mut rng, d))));

    let all_cp = (1..traj.len()).all(|i| {
        fujiwara_verdict(d, &nu_between(traj.log_lambdas(i), traj.log_lambdas(i - 1))).is_cp
    });

    let mut increases = 0;
    let mut witness: Option<BlpWitness> = None;
    for (k, (psi1, psi2)) in state_pairs.iter().enumerate() {
        let diff = &ComplexMatrix::projector(psi1) - &ComplexMatrix::projector(psi2);
        let parts: Vec<DMatrix<Complex64>> = (0..=d).map(|a| family.dephase_idx(a, &diff).into_dmatrix()).collect();
        let evolved = |i: usize| {
            let mut m = DMatrix::zeros(d, d);
            for (part, &l) in parts.iter().zip(traj.lambdas(i)) {
                m.zip_apply(part, |x, y| *x += y * l);
            }
            trace_norm(&m)
        };
        let mut prev = evolved(0);
        for i in 1..traj.len() {
            let next = evolved(i);
            if next > prev * (1.0 + TRACE_NORM_REL_TOL) {
                increases += 1;
                let rel = (next - prev) / prev;
                if witness.as_ref().is_none_or(|w| rel > w.relative_increase) {
                    witness = Some(BlpWitness {
                        pair: k,
                        index: i,
                        t_prev: traj.grid()[i - 1],
                        t_next: traj.grid()[i],
                        norm_prev: prev,
                        norm_next: next,
                        relative_increase: rel,
                        state1: to_pairs(psi1),
                        state2: to_pairs(psi2),
                    });
                }
            }
            prev = next;
        }
    }
    let status = if witness.is_some() {
        Status::Violated
    } else if all_cp {
        Status::Holds
    } else {
        Status::Inconclusive
    };
    BlpVerdict {
        status,
        pairs: state_pairs.len(),
        increases,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_trajectory;
    use crate::ratefn::{Preset, RateSet};

    fn quick() -> WitnessConfig {
        WitnessConfig {
            attempts: 200,
            ..WitnessConfig::default()
        }
    }

    #[test]
    fn pair_layout() {
        assert_eq!(witness_pairs(3), vec![(0, 1), (1, 2), (0, 2)]);
        let p = witness_pairs(401);
        assert!(p.iter().all(|&(s, t)| s < t && t <= 400));
        assert!(p.len() < 3 * 401);
        assert!(p.contains(&(0, 256)));
    }

    #[test]
    fn semigroup_has_no_witness() {
        let t = build_trajectory(&RateSet::constants(&[1.0; 4]).unwrap(), 3.0, 60).unwrap();
        let w = find_p_divisibility_witness(&t, &quick());
        assert_eq!(w.status, Status::Holds);
        assert_eq!(w.non_cp_pairs, 0);
        assert_eq!(check_blp(&t, 20, 1).status, Status::Holds);
    }

    #[test]
    fn eternal_qubit_has_no_witness() {
        let t = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 100).unwrap();
        let w = find_p_divisibility_witness(&t, &quick());
        assert!(!w.found());
        assert_eq!(w.status, Status::Inconclusive);
        assert!(w.best_min_eigenvalue > -POSITIVITY_TOL);
        assert!(check_blp(&t, 50, 1).witness.is_none());
    }

    #[test]
    fn qubit_violation_is_found_and_checks_out() {
        let t = build_trajectory(&RateSet::parse(2, &["1", "0.2", "-0.5*tanh(t)"]).unwrap(), 3.0, 60).unwrap();
        let w = find_p_divisibility_witness(&t, &quick());
        let wit = w.witness.expect("witness");
        let v = t.intermediate(wit.t_index, wit.s_index).unwrap();
        let psi = StateVector::from_iterator(2, wit.state.iter().map(|z| Complex64::new(z[0], z[1])));
        let out = v.apply(&ComplexMatrix::projector(&psi)).unwrap();
        let min = out.min_eigenvalue_hermitian(1e-10).unwrap();
        assert!((min - wit.min_eigenvalue).abs() < 1e-12);
        assert!(min < -POSITIVITY_TOL);
        assert!((wit.trace_norm - (1.0 + 2.0 * wit.magnitude)).abs() < 1e-12);
        assert!(check_blp(&t, 20, 3).witness.is_some());
    }

    #[test]
    fn avg_decoherence_is_not_p_divisible() {
        let t = build_trajectory(&Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(), 5.0, 100).unwrap();
        let w = find_p_divisibility_witness(&t, &quick());
        let wit = w.witness.expect("witness");
        assert!(wit.magnitude > POSITIVITY_TOL);
    }

    #[test]
    fn search_is_deterministic() {
        let t = build_trajectory(&Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(), 2.0, 40).unwrap();
        let a = find_p_divisibility_witness(&t, &quick());
        let b = find_p_divisibility_witness(&t, &quick());
        assert_eq!(a, b);
        assert_eq!(check_blp(&t, 10, 7), check_blp(&t, 10, 7));
    }
}
