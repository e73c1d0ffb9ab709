//! Grid-wise checks of the rate conditions for complete positivity,
//! CP-divisibility and P-divisibility.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{apply_spectral, fujiwara_verdict, CP_TOL};
use crate::error::{Error, Result};
use crate::linalg::{random, ComplexMatrix};

use super::verdict::{Status, Verdict, Violation};
use super::Trajectory;

/// Slack for all rate inequalities; a rate below `-NEGATIVE_RATE_TOL` counts
/// as negative.
pub const NEGATIVE_RATE_TOL: f64 = 1e-12;

const FROBENIUS_STREAM: u64 = 2 << 32;

type Culprit = (Option<usize>, Option<usize>);

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Locates the first sign change of `margin(γ(t))` between the last
/// satisfied grid point and the first violating one.
fn refine_crossing(traj: &Trajectory, verdict: &Verdict, margin: impl Fn(&[f64]) -> Option<f64>) -> Option<f64> {
    let first = verdict.first_violation()?.index;
    if first == 0 {
        return None;
    }
    verdict.margins[first - 1].filter(|m| *m >= -NEGATIVE_RATE_TOL)?;
    let at = |t: f64| -> Option<f64> { margin(&traj.rates().evaluate(t).ok()?) };
    let (mut lo, mut hi) = (traj.grid()[first - 1], traj.grid()[first]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match at(mid) {
            Some(m) if m < 0.0 => hi = mid,
            Some(_) => lo = mid,
            None => return None,
        }
    }
    Some(0.5 * (lo + hi))
}

fn grid_check(
    traj: &Trajectory,
    per_point: impl Fn(usize) -> (Option<f64>, Culprit),
    tol: f64,
) -> Verdict {
    let (margins, culprits): (Vec<_>, Vec<_>) = (0..traj.len()).map(per_point).unzip();
    Verdict::from_margins(traj.grid(), margins, culprits, tol)
}

/// Complete positivity of every `Λ(t_i)`, via the simplex condition on
/// `λ(t_i)`.
pub fn check_cptp_trajectory(traj: &Trajectory) -> Verdict {
    let d = traj.dim();
    grid_check(
        traj,
        |i| {
            (Some(fujiwara_verdict(d, traj.lambdas(i)).margin), (None, None))
        },
        CP_TOL,
    )
}

fn cp_divisible_margin(g: &[f64]) -> (f64, usize) {
    let a = argmin(g);
    (g[a], a)
}

/// `γ_α(t) ≥ 0` for all `α`.
pub fn check_cp_divisible(traj: &Trajectory) -> Verdict {
    let mut v = grid_check(
        traj,
        |i| {
            let (m, a) = cp_divisible_margin(traj.gammas(i));
            (Some(m), (Some(a + 1), None))
        },
        NEGATIVE_RATE_TOL,
    );
    v.crossing_time = refine_crossing(traj, &v, |g| Some(cp_divisible_margin(g).0));
    v
}

fn p_necessary_margin(g: &[f64]) -> (f64, usize) {
    let total: f64 = g.iter().sum();
    let a = argmax(g);
    (total - g[a], a)
}

/// `Σ_{β≠α} γ_β(t) ≥ 0` for all `α`.
pub fn check_p_necessary(traj: &Trajectory) -> Verdict {
    let mut v = grid_check(
        traj,
        |i| {
            let (m, a) = p_necessary_margin(traj.gammas(i));
            (Some(m), (Some(a + 1), None))
        },
        NEGATIVE_RATE_TOL,
    );
    v.crossing_time = refine_crossing(traj, &v, |g| Some(p_necessary_margin(g).0));
    v
}

/// `min_{α≠β} γ_α + (d-1)γ_β` with its minimizing 1-based `(α, β)`, or
/// `None` when more than one rate is negative.
pub fn p_sufficient_margin(d: usize, g: &[f64]) -> Option<(f64, usize, usize)> {
    if g.iter().filter(|&&x| x < -NEGATIVE_RATE_TOL).count() > 1 {
        return None;
    }
    let k = (d - 1) as f64;
    let mut best: Option<(f64, usize, usize)> = None;
    for (b, &gb) in g.iter().enumerate() {
        for (a, &ga) in g.iter().enumerate() {
            if a == b {
                continue;
            }
            let m = ga + k * gb;
            if best.is_none_or(|(x, _, _)| m < x) {
                best = Some((m, a + 1, b + 1));
            }
        }
    }
    best
}

/// `γ_α + (d-1)γ_β ≥ 0` for all `α ≠ β`, applicable where at most one rate
/// is negative.
pub fn check_p_sufficient(traj: &Trajectory) -> Verdict {
    let d = traj.dim();
    let mut v = grid_check(
        traj,
        |i| match p_sufficient_margin(d, traj.gammas(i)) {
            Some((m, a, b)) => (Some(m), (Some(a), Some(b))),
            None => (None, (None, None)),
        },
        NEGATIVE_RATE_TOL,
    );
    v.crossing_time = refine_crossing(traj, &v, |g| p_sufficient_margin(d, g).map(|x| x.0));
    v
}

/// Smallest sum of `d` rates out of the `d² - 1` Weyl rates, or `None` when
/// more than `d - 1` of them are negative.
pub fn weyl_sufficient_margin(d: usize, weyl_rates: &[f64]) -> Option<f64> {
    if weyl_rates.iter().filter(|&&x| x < -NEGATIVE_RATE_TOL).count() > d - 1 {
        return None;
    }
    let mut sorted = weyl_rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted.iter().take(d).sum())
}

/// Each class-`α` Weyl operator carries the rate of its class.
fn class_constant_weyl_rates(d: usize, g: &[f64]) -> Vec<f64> {
    g.iter().flat_map(|&x| std::iter::repeat_n(x, d - 1)).collect()
}

/// The Weyl-operator sufficient condition for rates that are constant on
/// each commuting class.
pub fn check_weyl_sufficient(traj: &Trajectory) -> Verdict {
    let d = traj.dim();
    let margin = |g: &[f64]| weyl_sufficient_margin(d, &class_constant_weyl_rates(d, g));
    let mut v = grid_check(traj, |i| (margin(traj.gammas(i)), (None, None)), NEGATIVE_RATE_TOL);
    v.crossing_time = refine_crossing(traj, &v, margin);
    v
}

/// The same condition for arbitrary Weyl rates, one vector of `d² - 1`
/// entries per grid time.
pub fn check_weyl_sufficient_rates(d: usize, grid: &[f64], weyl_rates: &[Vec<f64>]) -> Result<Verdict> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if weyl_rates.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: weyl_rates.len(),
        });
    }
    let mut margins = Vec::with_capacity(grid.len());
    for row in weyl_rates {
        if row.len() != d * d - 1 {
            return Err(Error::LengthMismatch {
                expected: d * d - 1,
                found: row.len(),
            });
        }
        margins.push(weyl_sufficient_margin(d, row));
    }
    Ok(Verdict::from_margins(
        grid,
        margins,
        vec![(None, None); grid.len()],
        NEGATIVE_RATE_TOL,
    ))
}

/// Monotonicity of `‖Λ(t)[X]‖₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrobeniusVerdict {
    pub status: Status,
    /// Sign of `μ_α = γ_α - γ` on the grid.
    pub analytic: Verdict,
    /// Consecutive grid points where a sampled norm grew by more than the
    /// relative tolerance. `alpha` is set for the `U_α + U_α†` probes.
    pub sampled_increases: Vec<Violation>,
    pub samples: usize,
}

/// Checks `μ_α(t) ≤ 0` on the grid and evaluates `‖Λ(t_i)[X]‖₂` for
/// `X = U_α + U_α†` and `random_samples` random Hermitian matrices.
pub fn check_frobenius_monotone(traj: &Trajectory, random_samples: usize, seed: u64) -> FrobeniusVerdict {
    let d = traj.dim();
    let family = traj.family();
    let analytic = grid_check(
        traj,
        |i| {
            let mu = traj.mu(i);
            let a = argmax(&mu);
            (Some(-mu[a]), (Some(a + 1), None))
        },
        NEGATIVE_RATE_TOL,
    );

    let mut probes: Vec<(Option<usize>, ComplexMatrix)> = (1..=d + 1)
        .map(|alpha| {
            let u = family.unitary(alpha).expect("alpha in range");
            (Some(alpha), u + &u.adjoint())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(FROBENIUS_STREAM);
    probes.extend((0..random_samples).map(|_| (None, random::hermitian(&mut rng, d))));

    let mut sampled_increases = Vec::new();
    for (alpha, x) in &probes {
        let mut prev = x.as_dmatrix().norm();
        for i in 1..traj.len() {
            let norm = apply_spectral(family, traj.lambdas(i), x).as_dmatrix().norm();
            if norm > prev * (1.0 + super::TRACE_NORM_REL_TOL) {
                sampled_increases.push(Violation {
                    index: i,
                    time: traj.grid()[i],
                    alpha: *alpha,
                    beta: None,
                    margin: prev - norm,
                });
            }
            prev = norm;
        }
    }
    sampled_increases.sort_by_key(|v| v.index);

    let status = if analytic.is_violated() || !sampled_increases.is_empty() {
        Status::Violated
    } else {
        Status::Holds
    };
    FrobeniusVerdict {
        status,
        analytic,
        sampled_increases,
        samples: probes.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_trajectory;
    use crate::ratefn::{Preset, RateSet};

    fn subsets_min_sum(rates: &[f64], k: usize) -> f64 {
        let n = rates.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize == k {
                let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| rates[i]).sum();
                best = best.min(s);
            }
        }
        best
    }

    #[test]
    fn cp_divisibility_examples() {
        let semigroup = build_trajectory(&RateSet::constants(&[0.5, 1.0, 2.0]).unwrap(), 1.0, 10).unwrap();
        assert!(check_cp_divisible(&semigroup).holds());

        let eq = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 100).unwrap();
        let v = check_cp_divisible(&eq);
        assert!(v.is_violated());
        assert_eq!(v.violations.len(), 100);
        assert!(v.violations.iter().all(|x| x.alpha == Some(3) && x.index > 0));

        let eg = build_trajectory(&Preset::EternalGeneral { dim: 3 }.rate_set().unwrap(), 2.0, 20).unwrap();
        let v = check_cp_divisible(&eg);
        assert_eq!(v.violations.len(), 20);
        for i in 1..eg.len() {
            assert_eq!(eg.negative_rate_count(i), 2);
            let g = eg.gammas(i);
            assert!(g[2] < 0.0 && g[3] < 0.0);
        }
    }

    #[test]
    fn p_necessary_examples() {
        let t = build_trajectory(&RateSet::constants(&[1.0, 1.0, -3.0]).unwrap(), 1.0, 10).unwrap();
        let v = check_p_necessary(&t);
        assert!(v.is_violated());
        assert!((v.min_margin.unwrap() + 2.0).abs() < 1e-15);

        let eg = build_trajectory(&Preset::EternalGeneral { dim: 3 }.rate_set().unwrap(), 5.0, 400).unwrap();
        let v = check_p_necessary(&eg);
        assert!(v.holds());
        for (i, m) in v.margins.iter().enumerate() {
            let expected = 1.0 - eg.grid()[i].tanh();
            assert!((m.unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_necessary_equals_sufficient() {
        let t = build_trajectory(&RateSet::parse(2, &["1", "0.2", "-0.5*tanh(t)"]).unwrap(), 4.0, 80).unwrap();
        let n = check_p_necessary(&t);
        let s = check_p_sufficient(&t);
        assert_eq!(n.status, s.status);
        assert!(n.is_violated());
        for (a, b) in n.margins.iter().zip(&s.margins) {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-15);
        }
        let cross = s.crossing_time.unwrap();
        assert!((cross - 0.4f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn avg_decoherence_sufficient_condition_crossing() {
        let t = build_trajectory(&Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(), 5.0, 400).unwrap();
        let v = check_p_sufficient(&t);
        assert!(v.is_violated());
        let expected = 2f64.ln() / 3.0;
        assert!((v.crossing_time.unwrap() - expected).abs() < 1e-12);
        assert!(v.violations.iter().all(|x| x.time > expected));
        assert!((v.min_margin.unwrap() + 3.0).abs() < 1e-5);
    }

    #[test]
    fn eternal_general_sufficient_is_not_applicable() {
        let t = build_trajectory(&Preset::EternalGeneral { dim: 3 }.rate_set().unwrap(), 2.0, 20).unwrap();
        let v = check_p_sufficient(&t);
        assert_eq!(v.status, Status::NotApplicable);
        assert_eq!(v.not_applicable_times.len(), 20);
        assert_eq!(v.margins[0], Some(0.0));
    }

    #[test]
    fn weyl_margin_matches_subset_enumeration() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            for _ in 0..300 {
                let rates: Vec<f64> = (0..d * d - 1)
                    .map(|_| if rng.random_bool(0.2) { -rng.random::<f64>() } else { rng.random::<f64>() })
                    .collect();
                let neg = rates.iter().filter(|&&x| x < 0.0).count();
                match weyl_sufficient_margin(d, &rates) {
                    None => assert!(neg > d - 1),
                    Some(m) => {
                        assert!(neg < d);
                        assert!((m - subsets_min_sum(&rates, d)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn class_constant_weyl_reduces_to_sufficient_condition() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let rates: Vec<String> = (0..4)
                .map(|_| format!("{} + {}*tanh(t)", rng.random_range(-0.5..1.5), rng.random_range(-1.5..1.0)))
                .collect();
            let t = build_trajectory(&RateSet::parse(3, &rates).unwrap(), 2.0, 20).unwrap();
            let w = check_weyl_sufficient(&t);
            let s = check_p_sufficient(&t);
            assert_eq!(w.status, s.status, "{rates:?}");
            for (a, b) in w.margins.iter().zip(&s.margins) {
                match (a, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    other => panic!("mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn qubit_weyl_condition_is_pairwise() {
        let grid = [0.0, 1.0];
        let v = check_weyl_sufficient_rates(2, &grid, &[vec![1.0, 1.0, -0.5], vec![1.0, 0.3, -0.5]]).unwrap();
        assert_eq!(v.status, Status::Violated);
        assert_eq!(v.violations.len(), 1);
        assert!((v.violations[0].margin + 0.2).abs() < 1e-15);
        assert!(check_weyl_sufficient_rates(2, &grid, &[vec![1.0; 3]]).is_err());
        assert!(check_weyl_sufficient_rates(2, &grid, &[vec![1.0; 3], vec![1.0; 4]]).is_err());
        let positive = check_weyl_sufficient_rates(3, &grid, &[vec![0.1; 8], vec![2.0; 8]]).unwrap();
        assert!(positive.holds());
    }

    #[test]
    fn frobenius_examples() {
        let eq = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 400).unwrap();
        let v = check_frobenius_monotone(&eq, 20, 42);
        assert_eq!(v.status, Status::Holds);
        assert_eq!(v.samples, 23);

        let id = ComplexMatrix::identity(2);
        for i in 0..eq.len() {
            assert!((eq.apply(i, &id).unwrap().as_dmatrix().norm() - 2f64.sqrt()).abs() < 1e-14);
        }

        let bad = build_trajectory(&RateSet::constants(&[1.0, 1.0, -3.0]).unwrap(), 1.0, 10).unwrap();
        let v = check_frobenius_monotone(&bad, 0, 42);
        assert_eq!(v.status, Status::Violated);
        assert!(v.analytic.is_violated());
        assert!(v.sampled_increases.iter().any(|x| x.alpha == Some(1)));
    }

    #[test]
    fn cptp_examples() {
        let eq = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 100).unwrap();
        assert!(check_cptp_trajectory(&eq).holds());
        let avg = build_trajectory(&Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(), 5.0, 100).unwrap();
        assert!(check_cptp_trajectory(&avg).holds());
    }

    #[test]
    fn cptp_agrees_with_choi_for_negative_constant_rate() {
        let t = build_trajectory(&RateSet::constants(&[-1.0, 0.0, 0.0]).unwrap(), 2.0, 20).unwrap();
        let v = check_cptp_trajectory(&t);
        for i in 0..t.len() {
            let choi = crate::channel::choi_matrix(&t.map_at(i).unwrap());
            let by_margin = v.margins[i].unwrap() >= -NEGATIVE_RATE_TOL;
            assert_eq!(by_margin, choi.is_positive(), "t = {}", t.grid()[i]);
        }
        assert!(v.is_violated());
        let tt = t.grid()[5];
        assert!((t.lambdas(5)[1] - tt.exp()).abs() < 1e-12 * tt.exp());
    }
}
