use serde::Serialize;

use super::conditions::{
    check_cp_divisible, check_cptp_trajectory, check_frobenius_monotone, check_p_necessary, check_p_sufficient,
    check_weyl_sufficient, FrobeniusVerdict,
};
use super::verdict::{Status, Verdict};
use super::witness::{check_blp, find_p_divisibility_witness, BlpVerdict, WitnessConfig, WitnessSearch};
use super::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub witness: WitnessConfig,
    pub blp_pairs: usize,
    pub frobenius_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            witness: WitnessConfig::default(),
            blp_pairs: 200,
            frobenius_samples: 20,
        }
    }
}

/// Cross-checks between verdicts that must hold for any rate set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyCheck {
    pub consistent: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisibilityReport {
    pub dim: usize,
    pub t_max: f64,
    pub steps: usize,
    pub seed: u64,
    pub rates: Vec<String>,
    /// Number of negative rates at each grid point.
    pub negative_rates: Vec<usize>,
    pub cp_map_valid: Verdict,
    pub cp_divisible: Verdict,
    pub p_necessary: Verdict,
    pub p_sufficient: Verdict,
    pub weyl_sufficient: Verdict,
    pub frobenius_monotone: FrobeniusVerdict,
    pub trace_norm_witness: WitnessSearch,
    pub blp_witness: BlpVerdict,
    pub hierarchy: HierarchyCheck,
}

/// Runs every check on `traj`.
pub fn analyze(traj: &Trajectory, config: &AnalysisConfig) -> DivisibilityReport {
    let seed = config.witness.seed;
    let mut report = DivisibilityReport {
        dim: traj.dim(),
        t_max: traj.t_max(),
        steps: traj.len() - 1,
        seed,
        rates: traj.rates().rates().iter().map(|r| r.source().to_string()).collect(),
        negative_rates: (0..traj.len()).map(|i| traj.negative_rate_count(i)).collect(),
        cp_map_valid: check_cptp_trajectory(traj),
        cp_divisible: check_cp_divisible(traj),
        p_necessary: check_p_necessary(traj),
        p_sufficient: check_p_sufficient(traj),
        weyl_sufficient: check_weyl_sufficient(traj),
        frobenius_monotone: check_frobenius_monotone(traj, config.frobenius_samples, seed),
        trace_norm_witness: find_p_divisibility_witness(traj, &config.witness),
        blp_witness: check_blp(traj, config.blp_pairs, seed),
        hierarchy: HierarchyCheck {
            consistent: true,
            failures: Vec::new(),
        },
    };
    report.hierarchy = report.check_hierarchy();
    report
}

impl DivisibilityReport {
    /// Implications checked:
    ///
    /// * CP-divisible ⇒ every Λ(t) is CP, the sufficient conditions are not
    ///   violated, the necessary condition holds, no witness, no back-flow.
    /// * Sufficient condition holds ⇒ necessary condition holds, no witness,
    ///   no back-flow.
    /// * Necessary condition ⇔ `μ_α ≤ 0` on the grid.
    /// * `d = 2`: the necessary condition is also sufficient, so it excludes
    ///   witnesses and back-flow.
    pub fn check_hierarchy(&self) -> HierarchyCheck {
        let mut failures = Vec::new();
        let mut require = |cond: bool, msg: &str| {
            if !cond {
                failures.push(msg.to_string());
            }
        };
        let witness = self.trace_norm_witness.found();
        let backflow = self.blp_witness.witness.is_some();

        if self.cp_divisible.holds() {
            require(self.cp_map_valid.holds(), "cp_divisible holds but some map is not CP");
            require(!self.p_sufficient.is_violated(), "cp_divisible holds but p_sufficient is violated");
            require(!self.weyl_sufficient.is_violated(), "cp_divisible holds but weyl_sufficient is violated");
            require(self.p_necessary.holds(), "cp_divisible holds but p_necessary does not");
            require(!witness, "cp_divisible holds but a positivity witness was found");
            require(!backflow, "cp_divisible holds but trace distance increased");
        }
        for (name, v) in [("p_sufficient", &self.p_sufficient), ("weyl_sufficient", &self.weyl_sufficient)] {
            if v.holds() {
                require(self.p_necessary.holds(), &format!("{name} holds but p_necessary does not"));
                require(!witness, &format!("{name} holds but a positivity witness was found"));
                require(!backflow, &format!("{name} holds but trace distance increased"));
            }
        }
        require(
            self.p_necessary.status == self.frobenius_monotone.analytic.status,
            "p_necessary and the analytic Frobenius condition disagree",
        );
        if self.dim == 2 && self.p_necessary.holds() {
            require(self.p_sufficient.holds(), "d = 2, p_necessary holds but p_sufficient does not");
            require(!witness, "d = 2, p_necessary holds but a positivity witness was found");
            require(!backflow, "d = 2, p_necessary holds but trace distance increased");
        }
        HierarchyCheck {
            consistent: failures.is_empty(),
            failures,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `name: status` line per criterion.
    pub fn summary(&self) -> String {
        let lines: [(&str, Status); 8] = [
            ("cp_map_valid", self.cp_map_valid.status),
            ("cp_divisible", self.cp_divisible.status),
            ("p_necessary", self.p_necessary.status),
            ("p_sufficient", self.p_sufficient.status),
            ("weyl_sufficient", self.weyl_sufficient.status),
            ("frobenius_monotone", self.frobenius_monotone.status),
            ("trace_norm_witness", self.trace_norm_witness.status),
            ("blp_witness", self.blp_witness.status),
        ];
        let mut out: String = lines.iter().map(|(n, s)| format!("{n}: {s}\n")).collect();
        out.push_str(&format!(
            "hierarchy: {}\n",
            if self.hierarchy.consistent { "consistent" } else { "INCONSISTENT" }
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_trajectory;
    use crate::ratefn::{Preset, RateSet};

    fn small() -> AnalysisConfig {
        AnalysisConfig {
            witness: WitnessConfig {
                attempts: 200,
                ..WitnessConfig::default()
            },
            blp_pairs: 20,
            frobenius_samples: 5,
        }
    }

    #[test]
    fn semigroup_report_holds_everywhere() {
        let t = build_trajectory(&RateSet::constants(&[1.0, 1.0, 1.0]).unwrap(), 2.0, 40).unwrap();
        let r = analyze(&t, &small());
        assert!(r.hierarchy.consistent, "{:?}", r.hierarchy.failures);
        for s in [
            r.cp_map_valid.status,
            r.cp_divisible.status,
            r.p_necessary.status,
            r.p_sufficient.status,
            r.weyl_sufficient.status,
            r.frobenius_monotone.status,
            r.trace_norm_witness.status,
            r.blp_witness.status,
        ] {
            assert_eq!(s, Status::Holds);
        }
    }

    #[test]
    fn eternal_qubit_report() {
        let t = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 100).unwrap();
        let r = analyze(&t, &small());
        assert!(r.hierarchy.consistent, "{:?}", r.hierarchy.failures);
        assert!(r.cp_divisible.is_violated());
        assert!(r.p_necessary.holds());
        assert!(!r.trace_norm_witness.found());
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["cp_divisible"]["status"], "violated");
        assert_eq!(json["trace_norm_witness"]["witness"], serde_json::Value::Null);
        assert_eq!(json["negative_rates"][0], 0);
        assert_eq!(json["negative_rates"][1], 1);
    }

    #[test]
    fn summary_lists_every_criterion() {
        let t = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 1.0, 10).unwrap();
        let s = analyze(&t, &small()).summary();
        assert_eq!(s.lines().count(), 9);
        assert!(s.contains("cp_divisible: violated"));
    }
}
