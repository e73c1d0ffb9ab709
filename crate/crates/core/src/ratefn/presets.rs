//! Named rate sets.
//!
//! * `eternal-qubit`: `γ₁ = γ₂ = 1`, `γ₃ = -tanh t` (d = 2).
//! * `eternal-general`: `γ₁ = γ₂ = 1 + ((d-2)/d) tanh t`,
//!   `γ₃ = … = γ_{d+1} = -(2/d) tanh t`.
//! * `avg-decoherence`: `γ₁ = … = γ_d = 1`,
//!   `γ_{d+1} = -(d-1)(e^{dt} - 1)/(e^{dt} + d - 1)`.
//! * `semigroup`: constant rates.
//!
//! The dimension is substituted as a literal when the expressions are built.
//! Closed-form integrals are kept for cross-checking the quadrature only.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::RateSet;

#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    EternalQubit,
    EternalGeneral { dim: usize },
    AvgDecoherence { dim: usize },
    Semigroup { rates: Vec<f64> },
}

/// Preset names accepted by [`Preset::from_name`].
pub const PRESET_NAMES: [&str; 4] = ["eternal-qubit", "eternal-general", "avg-decoherence", "semigroup"];

impl Preset {
    /// Resolves a preset by name. `dim` defaults to 3 for the `d`-dependent
    /// presets; `semigroup` takes its rates from `constants`.
    pub fn from_name(name: &str, dim: Option<usize>, constants: &[f64]) -> Result<Self> {
        let preset = match name {
            "eternal-qubit" => {
                if let Some(d) = dim.filter(|&d| d != 2) {
                    return Err(Error::InvalidInput(format!(
                        "eternal-qubit is two-dimensional, got d = {d}"
                    )));
                }
                Preset::EternalQubit
            }
            "eternal-general" => Preset::EternalGeneral { dim: dim.unwrap_or(3) },
            "avg-decoherence" => Preset::AvgDecoherence { dim: dim.unwrap_or(3) },
            "semigroup" => {
                if let Some(d) = dim {
                    if constants.len() != d + 1 {
                        return Err(Error::LengthMismatch {
                            expected: d + 1,
                            found: constants.len(),
                        });
                    }
                }
                Preset::Semigroup {
                    rates: constants.to_vec(),
                }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown preset {other:?}; expected one of {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        preset.validate()?;
        Ok(preset)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Preset::EternalGeneral { dim } | Preset::AvgDecoherence { dim } if *dim < 2 => {
                Err(Error::InvalidDimension(*dim))
            }
            Preset::Semigroup { rates } if rates.len() < 3 => Err(Error::InvalidInput(
                "semigroup needs at least 3 rates".into(),
            )),
            Preset::Semigroup { rates } if rates.iter().any(|r| !r.is_finite()) => {
                Err(Error::InvalidInput("semigroup rates must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::EternalQubit => "eternal-qubit",
            Preset::EternalGeneral { .. } => "eternal-general",
            Preset::AvgDecoherence { .. } => "avg-decoherence",
            Preset::Semigroup { .. } => "semigroup",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Preset::EternalQubit => 2,
            Preset::EternalGeneral { dim } | Preset::AvgDecoherence { dim } => *dim,
            Preset::Semigroup { rates } => rates.len() - 1,
        }
    }

    /// Source expressions for `γ₁, …, γ_{d+1}`.
    pub fn expressions(&self) -> Vec<String> {
        let d = self.dim();
        match self {
            Preset::EternalQubit => vec!["1".into(), "1".into(), "-tanh(t)".into()],
            Preset::EternalGeneral { .. } => (0..=d)
                .map(|a| {
                    if a < 2 {
                        format!("1 + (({d}-2)/{d})*tanh(t)")
                    } else {
                        format!("-(2/{d})*tanh(t)")
                    }
                })
                .collect(),
            // (e^{dt} - 1)/(e^{dt} + d - 1) rewritten in e^{-dt} so it never overflows.
            Preset::AvgDecoherence { .. } => (0..=d)
                .map(|a| {
                    if a < d {
                        "1".to_string()
                    } else {
                        format!("-({d}-1)*(1 - exp(-{d}*t))/(1 + ({d}-1)*exp(-{d}*t))")
                    }
                })
                .collect(),
            Preset::Semigroup { rates } => rates.iter().map(|r| format!("{r}")).collect(),
        }
    }

    pub fn rate_set(&self) -> Result<RateSet> {
        RateSet::parse(self.dim(), &self.expressions())
    }

    /// Closed-form `Γ_α(t) = ∫₀ᵗ γ_α`, `alpha` 1-based. Cross-check only.
    pub fn closed_form_integral(&self, alpha: usize, t: f64) -> f64 {
        let d = self.dim();
        let df = d as f64;
        match self {
            Preset::EternalQubit => {
                if alpha < 3 {
                    t
                } else {
                    -t.cosh().ln()
                }
            }
            Preset::EternalGeneral { .. } => {
                if alpha < 3 {
                    t + (df - 2.0) / df * t.cosh().ln()
                } else {
                    -2.0 / df * t.cosh().ln()
                }
            }
            Preset::AvgDecoherence { .. } => {
                if alpha <= d {
                    t
                } else {
                    // t - ln((e^{dt} + d - 1)/d), evaluated without overflow.
                    (1.0 - df) * t - ((1.0 + (df - 1.0) * (-df * t).exp()) / df).ln()
                }
            }
            Preset::Semigroup { rates } => rates[alpha - 1] * t,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::EternalQubit => f.write_str("eternal-qubit"),
            Preset::EternalGeneral { dim } => write!(f, "eternal-general(d={dim})"),
            Preset::AvgDecoherence { dim } => write!(f, "avg-decoherence(d={dim})"),
            Preset::Semigroup { rates } => {
                let r: Vec<String> = rates.iter().map(|x| x.to_string()).collect();
                write!(f, "semigroup({})", r.join(","))
            }
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::from_name(s, None, &[])
    }
}
