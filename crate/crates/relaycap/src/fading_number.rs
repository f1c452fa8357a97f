//! High-SNR (asymptotic) quantities: point-to-point fading numbers, the
//! max-flow min-cut upper bound and decode-and-forward lower bound on the
//! relay channel's fading number, the regime classification that falls out of
//! them, and the optimal decode-and-forward power split.
//!
//! Everything here is a closed-form function of the three per-link prediction
//! errors; none of it depends on ρ or the SNR. All values are in nats.

use crate::spectral::ChannelScenario;
use crate::specfun::EULER_GAMMA;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingNumberError {
    /// Prediction error outside (0, 1].
    InvalidPredictionError,
}

impl fmt::Display for FadingNumberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidPredictionError => write!(f, "prediction error must lie in (0, 1]"),
        }
    }
}

impl std::error::Error for FadingNumberError {}

/// Which high-SNR strategy the prediction errors single out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// ε₂² ≤ ε₃²: switching the relay off is optimal and χ is known exactly.
    DirectOptimal,
    /// ε₂² > ε₁² + ε₃²: cooperation strictly beats direct transmission.
    CooperationStrictlyBetter,
    /// ε₁² ≤ ε₃²: decode-and-forward reaches within log 2 of the MISO fading
    /// number.
    OneBitGap,
    /// ε₃² < ε₂² ≤ ε₁² + ε₃² with ε₁² > ε₃²: whether cooperation helps is
    /// open.
    Indeterminate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::DirectOptimal => "DirectOptimal",
            Self::CooperationStrictlyBetter => "CooperationStrictlyBetter",
            Self::OneBitGap => "OneBitGap",
            Self::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Fading numbers and fading-number bounds of one scenario, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingNumberReport {
    pub chi1: f64,
    pub chi2: f64,
    pub chi3: f64,
    /// Max-flow min-cut upper bound on the relay channel's fading number.
    pub upper: f64,
    /// Decode-and-forward lower bound.
    pub lower: f64,
    /// Highest-priority applicable regime.
    pub regime: Regime,
    /// All applicable regime flags (the conditions are not exclusive).
    pub direct_optimal: bool,
    pub cooperation_strictly_better: bool,
    pub one_bit_gap: bool,
    /// max{χ₂, χ₃} − lower: what full transmitter-relay cooperation could
    /// still add.
    pub gap_to_miso: f64,
}

/// Point-to-point fading number χ = −1 − γ + log(1/ε²) of a regular Gaussian
/// fading channel with prediction error ε².
pub fn p2p_fading_number(eps_sq: f64) -> Result<f64, FadingNumberError> {
    if !(eps_sq > 0.0 && eps_sq <= 1.0) {
        return Err(FadingNumberError::InvalidPredictionError);
    }
    Ok(-1.0 - EULER_GAMMA + (1.0 / eps_sq).ln())
}

/// Upper bound on the relay channel's fading number:
/// min{−2γ + log(1/ε₁²) + log(1/ε₂²), max{χ₂, χ₃}}.
pub fn relay_upper_bound(scenario: &ChannelScenario) -> f64 {
    let (e1, e2, e3) = scenario.prediction_errors();
    let chi2 = p2p_fading_number(e2).expect("valid model prediction error");
    let chi3 = p2p_fading_number(e3).expect("valid model prediction error");
    let cut1 = -2.0 * EULER_GAMMA + (1.0 / e1).ln() + (1.0 / e2).ln();
    cut1.min(chi2.max(chi3))
}

/// Decode-and-forward lower bound on the relay channel's fading number:
/// max{χ₂, χ₃ − log(1 + ε₁²/ε₃²)}.
pub fn relay_lower_bound_df(scenario: &ChannelScenario) -> f64 {
    let (e1, e2, e3) = scenario.prediction_errors();
    let chi2 = p2p_fading_number(e2).expect("valid model prediction error");
    let chi3 = p2p_fading_number(e3).expect("valid model prediction error");
    chi2.max(chi3 - (e1 / e3).ln_1p())
}

/// The decode-and-forward bound written in fading numbers:
/// χ₃ − log(1 + exp(χ₃ − χ₁)), which algebraically equals
/// χ₁ − log(1 + exp(χ₁ − χ₃)). Evaluated by log-sum-exp so that
/// |χ₁ − χ₃| > 700 cannot overflow.
pub fn df_one_bit_form(chi1: f64, chi3: f64) -> f64 {
    chi3 - softplus(chi3 - chi1)
}

#[inline]
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Optimal decode-and-forward power-split parameter α = ε₁²/(ε₁² + ε₃²),
/// the point where the two DF rate terms balance.
pub fn optimal_df_alpha(eps1_sq: f64, eps3_sq: f64) -> Result<f64, FadingNumberError> {
    if !(eps1_sq > 0.0 && eps1_sq <= 1.0 && eps3_sq > 0.0 && eps3_sq <= 1.0) {
        return Err(FadingNumberError::InvalidPredictionError);
    }
    Ok(eps1_sq / (eps1_sq + eps3_sq))
}

/// Evaluates both fading-number bounds and classifies the scenario's regime.
///
/// Priority when several conditions hold: DirectOptimal (exact
/// characterization) over CooperationStrictlyBetter over OneBitGap; all
/// applicable flags stay set in the report.
pub fn classify_regime(scenario: &ChannelScenario) -> FadingNumberReport {
    let (e1, e2, e3) = scenario.prediction_errors();
    let chi1 = p2p_fading_number(e1).expect("valid model prediction error");
    let chi2 = p2p_fading_number(e2).expect("valid model prediction error");
    let chi3 = p2p_fading_number(e3).expect("valid model prediction error");
    let upper = relay_upper_bound(scenario);
    let lower = relay_lower_bound_df(scenario);

    let direct_optimal = e2 <= e3;
    let cooperation_strictly_better = e2 > e1 + e3;
    let one_bit_gap = e1 <= e3;
    let regime = if direct_optimal {
        Regime::DirectOptimal
    } else if cooperation_strictly_better {
        Regime::CooperationStrictlyBetter
    } else if one_bit_gap {
        Regime::OneBitGap
    } else {
        Regime::Indeterminate
    };

    FadingNumberReport {
        chi1,
        chi2,
        chi3,
        upper,
        lower,
        regime,
        direct_optimal,
        cooperation_strictly_better,
        one_bit_gap,
        gap_to_miso: chi2.max(chi3) - lower,
    }
}
