//! Nonasymptotic capacity bounds as explicit objective functions plus their
//! optimized values: the direct-link (memoryless) upper bound, the
//! transmitter-relay-cooperation MISO upper bound, the decode-and-forward
//! lower bound, and the beam-selection MISO lower bound.
//!
//! SNR is linear (A²/σ²) throughout; dB conversion lives at the CLI boundary.
//! Spectral integrals ∫log(F′+c)dλ use the piecewise closed form, never
//! quadrature. The exp(·)Ei(−·) composites go through
//! [`crate::specfun::ei_correction_term`] so that no intermediate exp can
//! overflow even at SNR = 10⁴⁰.

use crate::search::{optimize_box, Direction, Scale, SearchConfig, SearchError};
use crate::specfun::{self, SpecfunError, EULER_GAMMA};
use crate::spectral::{ChannelScenario, SpectralModel};
use std::f64::consts::E;
use std::fmt;

/// Which bound a [`BoundPoint`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundId {
    DirectUpper,
    RelayMisoUpper,
    DfLower,
    MisoBeamSelectLower,
    MisoQpskLower,
    DfQpskLower,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [
        BoundId::DirectUpper,
        BoundId::RelayMisoUpper,
        BoundId::DfLower,
        BoundId::MisoBeamSelectLower,
        BoundId::MisoQpskLower,
        BoundId::DfQpskLower,
    ];

    /// Stable column/flag name.
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DirectUpper => "direct_upper",
            Self::RelayMisoUpper => "relay_miso_upper",
            Self::DfLower => "df_lower",
            Self::MisoBeamSelectLower => "miso_beamselect_lower",
            Self::MisoQpskLower => "miso_qpsk_lower",
            Self::DfQpskLower => "df_qpsk_lower",
        }
    }

    pub fn from_str_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|b| b.as_str() == name)
    }

    /// Lower bounds are clamped at zero for reporting.
    pub fn is_lower(&self) -> bool {
        matches!(
            self,
            Self::DfLower | Self::MisoBeamSelectLower | Self::MisoQpskLower | Self::DfQpskLower
        )
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One optimized bound evaluation at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    /// Linear SNR (A²/σ²).
    pub snr: f64,
    /// Bound value in nats; lower bounds are max(0, raw objective).
    pub value_nats: f64,
    /// Free-parameter values at the optimum plus diagnostics such as the
    /// unclamped raw objective.
    pub optimizer_args: Vec<(String, f64)>,
    pub bound_id: BoundId,
}

impl BoundPoint {
    pub fn arg(&self, name: &str) -> Option<f64> {
        self.optimizer_args
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundError {
    Domain(String),
    /// A standing assumption of the bound is violated (e.g. link 2 must be
    /// memoryless).
    Precondition(&'static str),
    Overflow(&'static str),
    Search(SearchError),
    Specfun(SpecfunError),
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Self::Overflow(msg) => write!(f, "overflow: {msg}"),
            Self::Search(e) => write!(f, "search failed: {e}"),
            Self::Specfun(e) => write!(f, "special function: {e}"),
        }
    }
}

impl std::error::Error for BoundError {}

impl From<SearchError> for BoundError {
    fn from(e: SearchError) -> Self {
        Self::Search(e)
    }
}

impl From<SpecfunError> for BoundError {
    fn from(e: SpecfunError) -> Self {
        Self::Specfun(e)
    }
}

fn check_snr(snr: f64) -> Result<(), BoundError> {
    if !(snr.is_finite() && snr > 0.0) {
        return Err(BoundError::Domain(format!("snr must be finite and > 0, got {snr}")));
    }
    Ok(())
}

fn require_memoryless_link2(s: &ChannelScenario) -> Result<(), BoundError> {
    match s.link2 {
        SpectralModel::White => Ok(()),
        _ => Err(BoundError::Precondition(
            "this bound assumes the transmitter-receiver fading (link 2) is memoryless",
        )),
    }
}

/// Lower edge for δ-type search parameters. The optimum drifts toward zero
/// roughly like a power of 1/SNR, so the box floor follows the SNR instead of
/// staying at a fixed 1e-6.
fn delta_floor(snr: f64) -> f64 {
    (1.0 / snr).min(1e-6).max(1e-300)
}

// ---------------------------------------------------------------------------
// Direct-link upper bound (memoryless fading)
// ---------------------------------------------------------------------------

/// The bracketed expression of the memoryless-fading capacity upper bound:
/// −1 + α log(β/δ) + log Γ(α, δ/β) + log δ − (1−α)e^δ Ei(−δ)
/// + (SNR+1)/β + δ/β.
///
/// Any strictly positive (α, β, δ) yields a legitimate upper bound on
/// C_IID(snr).
pub fn c_iid_upper_objective(snr: f64, alpha: f64, beta: f64, delta: f64) -> Result<f64, BoundError> {
    check_snr(snr)?;
    for (name, v) in [("alpha", alpha), ("beta", beta), ("delta", delta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(BoundError::Domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    if alpha > 50.0 {
        return Err(BoundError::Domain(format!("alpha too large for Γ(α,·): {alpha}")));
    }
    if delta > 700.0 {
        return Err(BoundError::Overflow("e^delta exceeds f64 range"));
    }
    let log_gamma_term = specfun::log_upper_incomplete_gamma(alpha, delta / beta)?;
    let ei_term = specfun::ei_correction_term(delta)?;
    Ok(-1.0 + alpha * (beta / delta).ln() + log_gamma_term + delta.ln() - (1.0 - alpha) * ei_term
        + (snr + 1.0) / beta
        + delta / beta)
}

/// Infimum of [`c_iid_upper_objective`] over α ∈ [1e-3, 5],
/// β ∈ [1e-2, 10⁴(snr+1)], δ ∈ [1e-4, 50], on log-scale grids.
pub fn c_iid_upper(snr: f64, search: &SearchConfig) -> Result<BoundPoint, BoundError> {
    check_snr(snr)?;
    let bounds = [(1e-3, 5.0), (1e-2, 1e4 * (snr + 1.0)), (1e-4, 50.0)];
    let mut cfg = search.clone();
    cfg.scales = vec![Scale::Log; 3];
    let res = optimize_box(
        |x| c_iid_upper_objective(snr, x[0], x[1], x[2]).unwrap_or(f64::INFINITY),
        &bounds,
        Direction::Minimize,
        &cfg,
    )?;
    Ok(BoundPoint {
        snr,
        value_nats: res.value,
        optimizer_args: vec![
            ("alpha".into(), res.arg[0]),
            ("beta".into(), res.arg[1]),
            ("delta".into(), res.arg[2]),
            ("evals".into(), res.evals as f64),
        ],
        bound_id: BoundId::DirectUpper,
    })
}

// ---------------------------------------------------------------------------
// TRC-MISO upper bound
// ---------------------------------------------------------------------------

/// Upper bound on the relay channel (and the TRC-MISO channel) obtained from
/// full transmitter-relay cooperation under the relaxed peak constraint:
/// C_IID(snr(1+ρ²)) + log(1 + ξ) − ∫ log(F₃′(λ) + ξ) dλ with
/// ξ = 1/((1+ρ²)snr).
///
/// Requires a memoryless link 2.
pub fn relay_miso_upper(
    s: &ChannelScenario,
    snr: f64,
    search: &SearchConfig,
) -> Result<BoundPoint, BoundError> {
    check_snr(snr)?;
    require_memoryless_link2(s)?;
    let pool = 1.0 + s.rho * s.rho;
    let inner = c_iid_upper(snr * pool, search)?;
    let xi = 1.0 / (pool * snr);
    let value = inner.value_nats + xi.ln_1p() - s.link3.log_density_integral(xi);
    let mut args = inner.optimizer_args;
    args.push(("xi".into(), xi));
    Ok(BoundPoint {
        snr,
        value_nats: value,
        optimizer_args: args,
        bound_id: BoundId::RelayMisoUpper,
    })
}

// ---------------------------------------------------------------------------
// Decode-and-forward lower bound
// ---------------------------------------------------------------------------

/// The two decode-and-forward rate terms (R_tr, R_rr) at fixed parameters
/// δ, α, δ_r ∈ (0, 1).
///
/// R_tr carries the δ^α / δ^{2α} asymmetry between its log term and its
/// spectral integral exactly as the bound states it.
pub fn df_lower_objective(
    s: &ChannelScenario,
    snr: f64,
    delta: f64,
    alpha: f64,
    delta_r: f64,
) -> Result<(f64, f64), BoundError> {
    check_snr(snr)?;
    for (name, v) in [("delta", delta), ("alpha", alpha), ("delta_r", delta_r)] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(BoundError::Domain(format!(
                "{name} must lie strictly inside (0, 1), got {v}"
            )));
        }
    }
    let ln_sig = s.sigma_sq.ln(); // ln σ²
    let ln_snr = snr.ln();
    let ln_rho2 = 2.0 * s.rho.ln();
    let ld = delta.ln();
    let ldr = delta_r.ln();
    let log_inv_d2 = -2.0 * ld; // ln(1/δ²)
    let log_inv_dr2 = -2.0 * ldr;

    // R_tr = ln(σ^{2(1−α)} / (δ^α SNR^α))
    //        − ∫ ln(F₁′ + σ^{2(1−α)} / (δ^{2α} SNR^α)) dλ
    //        − e^{u}Ei(−u),  u = σ^{2(1−α)} e / (α ln(1/δ²) δ^α SNR^α)
    let ln_c1 = (1.0 - alpha) * ln_sig - alpha * ld - alpha * ln_snr;
    let c1_integral = ((1.0 - alpha) * ln_sig - 2.0 * alpha * ld - alpha * ln_snr).exp();
    let u_tr = ln_c1.exp() * E / (alpha * log_inv_d2);
    let r_tr = ln_c1 - s.link1.log_density_integral(c1_integral) - specfun::ei_correction_term(u_tr)?;

    // R_rr = ln((e^{−(γ+1)} α ln(1/δ²) δ^α SNR^α σ^{2(α−1)} + 1) / (δ_r ρ² SNR))
    //        − ∫ ln(F₃′ + σ^{2(α−1)}/(δ_r² ρ² SNR^{1−α}) + 1/(δ_r² ρ² SNR)) dλ
    //        − e^{v}Ei(−v),
    //   v = (e^{−γ} α ln(1/δ²) δ^α SNR^α σ^{2(α−1)} + e) / (ln(1/δ_r²) δ_r ρ² SNR)
    let growth = alpha * log_inv_d2 * (alpha * ld + alpha * ln_snr + (alpha - 1.0) * ln_sig).exp();
    let numerator = (-(EULER_GAMMA + 1.0)).exp() * growth + 1.0;
    let ln_den = ldr + ln_rho2 + ln_snr;
    let c3_integral = ((alpha - 1.0) * ln_sig - 2.0 * ldr - ln_rho2 - (1.0 - alpha) * ln_snr).exp()
        + (-2.0 * ldr - ln_rho2 - ln_snr).exp();
    let v_rr = ((-EULER_GAMMA).exp() * growth + E) / (log_inv_dr2 * ln_den.exp());
    let r_rr = numerator.ln() - ln_den - s.link3.log_density_integral(c3_integral)
        - specfun::ei_correction_term(v_rr)?;

    if !(r_tr.is_finite() && r_rr.is_finite()) {
        return Err(BoundError::Overflow("decode-and-forward objective left f64 range"));
    }
    Ok((r_tr, r_rr))
}

/// sup over (δ, α, δ_r) ∈ (0,1)³ of min{R_tr, R_rr}, clamped at zero for
/// reporting (the raw value is kept in the diagnostics).
///
/// Requires a memoryless link 2.
pub fn df_lower(s: &ChannelScenario, snr: f64, search: &SearchConfig) -> Result<BoundPoint, BoundError> {
    check_snr(snr)?;
    require_memoryless_link2(s)?;
    let floor = delta_floor(snr);
    let bounds = [(floor, 1.0 - 1e-6), (1e-6, 1.0 - 1e-6), (floor, 1.0 - 1e-6)];
    let mut cfg = search.clone();
    cfg.scales = vec![Scale::Log; 3];
    let res = optimize_box(
        |x| match df_lower_objective(s, snr, x[0], x[1], x[2]) {
            Ok((r_tr, r_rr)) => r_tr.min(r_rr),
            Err(_) => f64::NEG_INFINITY,
        },
        &bounds,
        Direction::Maximize,
        &cfg,
    )?;
    Ok(BoundPoint {
        snr,
        value_nats: res.value.max(0.0),
        optimizer_args: vec![
            ("delta".into(), res.arg[0]),
            ("alpha".into(), res.arg[1]),
            ("delta_r".into(), res.arg[2]),
            ("raw_objective".into(), res.value),
            ("evals".into(), res.evals as f64),
        ],
        bound_id: BoundId::DfLower,
    })
}

// ---------------------------------------------------------------------------
// Beam-selection MISO lower bound
// ---------------------------------------------------------------------------

/// One beam-selection rate term under the pooled peak constraint
/// A²(1+ρ²): R_ℓ = log(1/(δS)) − ∫ log(F′_ℓ + 1/(δ²S)) dλ − e^{w}Ei(−w)
/// with S = snr(1+ρ²) and w = e/(ln(1/δ²) δ S).
fn beam_select_rate(link: &SpectralModel, pooled_snr: f64, delta: f64) -> Result<f64, BoundError> {
    let ld = delta.ln();
    let ln_s = pooled_snr.ln();
    let c = (-2.0 * ld - ln_s).exp();
    let w = E / ((-2.0 * ld) * (ld + ln_s).exp());
    Ok(-(ld + ln_s) - link.log_density_integral(c) - specfun::ei_correction_term(w)?)
}

/// sup over δ ∈ (0,1) of max{R₂, R₃}: the transmit-from-the-better-antenna
/// lower bound on the TRC-MISO capacity. Clamped at zero for reporting.
pub fn miso_beam_select_lower(
    s: &ChannelScenario,
    snr: f64,
    search: &SearchConfig,
) -> Result<BoundPoint, BoundError> {
    check_snr(snr)?;
    let pooled = snr * (1.0 + s.rho * s.rho);
    let bounds = [(delta_floor(snr), 1.0 - 1e-6)];
    let mut cfg = search.clone();
    cfg.scales = vec![Scale::Log];
    let res = optimize_box(
        |x| {
            let r2 = beam_select_rate(&s.link2, pooled, x[0]);
            let r3 = beam_select_rate(&s.link3, pooled, x[0]);
            match (r2, r3) {
                (Ok(a), Ok(b)) => a.max(b),
                _ => f64::NEG_INFINITY,
            }
        },
        &bounds,
        Direction::Maximize,
        &cfg,
    )?;
    Ok(BoundPoint {
        snr,
        value_nats: res.value.max(0.0),
        optimizer_args: vec![
            ("delta".into(), res.arg[0]),
            ("raw_objective".into(), res.value),
            ("evals".into(), res.evals as f64),
        ],
        bound_id: BoundId::MisoBeamSelectLower,
    })
}
