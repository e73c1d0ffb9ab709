use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    /// The condition's precondition fails somewhere on the grid and it is
    /// nowhere violated.
    NotApplicable,
    /// A sampled search ran out of budget without finding a witness.
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::NotApplicable => "not_applicable",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A grid point where a condition fails. `alpha` and `beta` are 1-based rate
/// indices when the condition singles them out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub time: f64,
    pub alpha: Option<usize>,
    pub beta: Option<usize>,
    pub margin: f64,
}

/// Outcome of a grid-wise condition check. Margins are positive when the
/// condition is satisfied; `None` marks grid points where it does not apply.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub min_margin: Option<f64>,
    pub margins: Vec<Option<f64>>,
    pub violations: Vec<Violation>,
    pub not_applicable_times: Vec<f64>,
    /// Time at which the margin first crosses zero, refined between grid
    /// points by bisection on the rates.
    pub crossing_time: Option<f64>,
}

impl Verdict {
    pub(crate) fn from_margins(
        grid: &[f64],
        margins: Vec<Option<f64>>,
        culprits: Vec<(Option<usize>, Option<usize>)>,
        tol: f64,
    ) -> Self {
        let mut violations = Vec::new();
        let mut not_applicable_times = Vec::new();
        let mut min_margin: Option<f64> = None;
        for (i, m) in margins.iter().enumerate() {
            match m {
                Some(m) => {
                    min_margin = Some(min_margin.map_or(*m, |x| x.min(*m)));
                    if *m < -tol {
                        let (alpha, beta) = culprits[i];
                        violations.push(Violation {
                            index: i,
                            time: grid[i],
                            alpha,
                            beta,
                            margin: *m,
                        });
                    }
                }
                None => not_applicable_times.push(grid[i]),
            }
        }
        let status = if !violations.is_empty() {
            Status::Violated
        } else if !not_applicable_times.is_empty() {
            Status::NotApplicable
        } else {
            Status::Holds
        };
        Verdict {
            status,
            min_margin,
            margins,
            violations,
            not_applicable_times,
            crossing_time: None,
        }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}
