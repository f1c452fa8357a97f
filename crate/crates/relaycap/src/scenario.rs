//! Scenario construction: the two built-in benchmark scenarios and the TOML
//! config-file schema for user-defined ones.
//!
//! A scenario file carries `rho`, `sigma_sq`, and three `[linkN]` tables.
//! Each link is either white,
//!
//! ```toml
//! [link2]
//! kind = "white"
//! ```
//!
//! or piecewise-constant, giving `lambda` (out-of-band level), `theta`
//! (band edge) and exactly one of `target_eps_sq` (prediction error to solve
//! for) or `upsilon` (in-band level, cross-checked against unit variance and
//! snapped to the exact normalization):
//!
//! ```toml
//! [link1]
//! kind = "piecewise"
//! target_eps_sq = 1e-4
//! lambda = 1e-5
//! theta = 0.08679
//! ```

use crate::spectral::{make_piecewise, ChannelScenario, SpectralModel};
use serde::Deserialize;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    /// Dotted path of the offending field, e.g. `link1.theta`.
    pub field: String,
    pub message: String,
}

impl ScenarioError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    rho: f64,
    sigma_sq: f64,
    link1: LinkSpec,
    link2: LinkSpec,
    link3: LinkSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSpec {
    kind: String,
    target_eps_sq: Option<f64>,
    upsilon: Option<f64>,
    lambda: Option<f64>,
    theta: Option<f64>,
}

impl LinkSpec {
    fn build(&self, field: &str) -> Result<SpectralModel, ScenarioError> {
        match self.kind.as_str() {
            "white" => {
                for (name, v) in [
                    ("target_eps_sq", self.target_eps_sq),
                    ("upsilon", self.upsilon),
                    ("lambda", self.lambda),
                    ("theta", self.theta),
                ] {
                    if v.is_some() {
                        return Err(ScenarioError::new(
                            format!("{field}.{name}"),
                            "not allowed when kind = \"white\"",
                        ));
                    }
                }
                Ok(SpectralModel::White)
            }
            "piecewise" => {
                let lambda = self.lambda.ok_or_else(|| {
                    ScenarioError::new(format!("{field}.lambda"), "required for piecewise links")
                })?;
                let theta = self.theta.ok_or_else(|| {
                    ScenarioError::new(format!("{field}.theta"), "required for piecewise links")
                })?;
                if !(theta > 0.0 && theta < 0.5) {
                    return Err(ScenarioError::new(
                        format!("{field}.theta"),
                        format!("must lie in (0, 0.5), got {theta}"),
                    ));
                }
                if !(lambda > 0.0) {
                    return Err(ScenarioError::new(
                        format!("{field}.lambda"),
                        format!("must be > 0 for a regular process, got {lambda}"),
                    ));
                }
                match (self.target_eps_sq, self.upsilon) {
                    (Some(target), None) => make_piecewise(target, lambda, theta).map_err(|e| {
                        ScenarioError::new(format!("{field}.target_eps_sq"), e.to_string())
                    }),
                    (None, Some(upsilon)) => {
                        // unit variance pins Υ given (Λ, Θ); the given value is
                        // a cross-check and gets snapped to the exact level
                        let exact = (1.0 - (1.0 - 2.0 * theta) * lambda) / (2.0 * theta);
                        if ((upsilon - exact) / exact).abs() > 1e-3 {
                            return Err(ScenarioError::new(
                                format!("{field}.upsilon"),
                                format!(
                                    "inconsistent with unit variance: gave {upsilon}, \
                                     2ΥΘ + (1−2Θ)Λ = 1 needs {exact:.6}"
                                ),
                            ));
                        }
                        SpectralModel::piecewise(exact, lambda, theta)
                            .map_err(|e| ScenarioError::new(format!("{field}.upsilon"), e.to_string()))
                    }
                    (Some(_), Some(_)) => Err(ScenarioError::new(
                        format!("{field}.target_eps_sq"),
                        "give either target_eps_sq or upsilon, not both",
                    )),
                    (None, None) => Err(ScenarioError::new(
                        format!("{field}.target_eps_sq"),
                        "piecewise links need target_eps_sq or upsilon",
                    )),
                }
            }
            other => Err(ScenarioError::new(
                format!("{field}.kind"),
                format!("must be \"white\" or \"piecewise\", got \"{other}\""),
            )),
        }
    }
}

/// Parses a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<ChannelScenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::new("scenario", e.to_string()))?;
    if !(file.rho.is_finite() && file.rho > 0.0) {
        return Err(ScenarioError::new(
            "rho",
            format!("must be finite and > 0, got {}", file.rho),
        ));
    }
    if !(file.sigma_sq.is_finite() && file.sigma_sq > 0.0) {
        return Err(ScenarioError::new(
            "sigma_sq",
            format!("must be finite and > 0, got {}", file.sigma_sq),
        ));
    }
    let link1 = file.link1.build("link1")?;
    let link2 = file.link2.build("link2")?;
    let link3 = file.link3.build("link3")?;
    ChannelScenario::new(link1, link2, link3, file.rho, file.sigma_sq)
        .map_err(|e| ScenarioError::new("scenario", e.to_string()))
}

/// Loads a scenario by built-in name (`fig2-top`, `fig2-bottom`) or file path.
pub fn load_scenario(name_or_path: &str) -> Result<ChannelScenario, ScenarioError> {
    match name_or_path {
        "fig2-top" => Ok(fig2_top()),
        "fig2-bottom" => Ok(fig2_bottom()),
        path => {
            let text = std::fs::read_to_string(Path::new(path)).map_err(|e| {
                ScenarioError::new("scenario", format!("cannot read {path}: {e}"))
            })?;
            parse_scenario(&text)
        }
    }
}

/// Benchmark scenario with a long-memory transmitter→relay link
/// (ε₁² = 10⁻⁴, Λ₁ = 10⁻⁵), memoryless direct link, and ε₃² = 10⁻²
/// relay→receiver link; ρ = 1, σ² = 1.
pub fn fig2_top() -> ChannelScenario {
    ChannelScenario::new(
        make_piecewise(1e-4, 1e-5, 0.08679).expect("built-in parameters are feasible"),
        SpectralModel::White,
        make_piecewise(1e-2, 0.005, 0.04503).expect("built-in parameters are feasible"),
        1.0,
        1.0,
    )
    .expect("built-in scenario is valid")
}

/// Benchmark scenario where both relay-side links share the ε² = 10⁻²
/// spectrum; ρ = 1, σ² = 1.
pub fn fig2_bottom() -> ChannelScenario {
    let link = make_piecewise(1e-2, 0.005, 0.04503).expect("built-in parameters are feasible");
    ChannelScenario::new(link, SpectralModel::White, link, 1.0, 1.0)
        .expect("built-in scenario is valid")
}
