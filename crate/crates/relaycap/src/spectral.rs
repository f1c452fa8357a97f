//! Spectral distribution models of the fading processes and the quantities
//! derived from them: autocovariances, the infinite-past prediction error
//! ε² = exp(∫ log F′), the noisy prediction error ε²(ξ), and finite-memory
//! prediction errors from a Levinson recursion on the Toeplitz autocovariance
//! matrix.
//!
//! Two spectral families are supported: white (F′ ≡ 1) and piecewise-constant
//! densities with in-band level Υ on |λ| ≤ Θ and out-of-band level Λ on
//! Θ < |λ| ≤ 1/2, normalized to unit variance 2ΥΘ + (1−2Θ)Λ = 1. The strictly
//! positive floor Λ > 0 keeps every model regular (∫ log F′ > −∞).

use num_complex::Complex64;
use std::fmt;

const UNIT_VARIANCE_TOL: f64 = 1e-9;

/// Errors from spectral-model construction and derived computations.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    /// A constructor argument violates its domain.
    InvalidParameter { field: &'static str, message: String },
    /// No piecewise-constant model attains the requested prediction error.
    InfeasibleTarget(String),
    /// The Toeplitz solve lost too many digits; carries a condition estimate.
    IllConditioned { condition_estimate: f64 },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParameter { field, message } => write!(f, "{field}: {message}"),
            Self::InfeasibleTarget(msg) => write!(f, "infeasible target: {msg}"),
            Self::IllConditioned { condition_estimate } => {
                write!(f, "Toeplitz solve ill-conditioned (estimate {condition_estimate:.3e})")
            }
        }
    }
}

impl std::error::Error for SpectralError {}

/// A unit-variance spectral distribution function, the channel's memory
/// descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralModel {
    /// Flat density F′ ≡ 1: memoryless (i.i.d.) fading.
    White,
    /// Two-level density: `in_band_level` (Υ) on |λ| ≤ `band_edge` (Θ),
    /// `out_band_level` (Λ) elsewhere on [−1/2, 1/2].
    PiecewiseConstant {
        in_band_level: f64,
        out_band_level: f64,
        band_edge: f64,
    },
}

impl SpectralModel {
    /// Builds a piecewise-constant model, enforcing positivity, Θ ∈ (0, 1/2),
    /// Υ > Λ, and unit variance within 1e-9.
    pub fn piecewise(
        in_band_level: f64,
        out_band_level: f64,
        band_edge: f64,
    ) -> Result<Self, SpectralError> {
        if !(out_band_level.is_finite() && out_band_level > 0.0) {
            return Err(SpectralError::InvalidParameter {
                field: "out_band_level",
                message: format!("must be > 0 for a regular process, got {out_band_level}"),
            });
        }
        if !(in_band_level.is_finite() && in_band_level > out_band_level) {
            return Err(SpectralError::InvalidParameter {
                field: "in_band_level",
                message: format!("must exceed out_band_level, got {in_band_level}"),
            });
        }
        if !(band_edge.is_finite() && band_edge > 0.0 && band_edge < 0.5) {
            return Err(SpectralError::InvalidParameter {
                field: "band_edge",
                message: format!("must lie in (0, 0.5), got {band_edge}"),
            });
        }
        let variance = 2.0 * in_band_level * band_edge + (1.0 - 2.0 * band_edge) * out_band_level;
        if (variance - 1.0).abs() > UNIT_VARIANCE_TOL {
            return Err(SpectralError::InvalidParameter {
                field: "in_band_level",
                message: format!(
                    "levels do not integrate to unit variance: 2ΥΘ + (1−2Θ)Λ = {variance:.12}"
                ),
            });
        }
        Ok(Self::PiecewiseConstant {
            in_band_level,
            out_band_level,
            band_edge,
        })
    }

    /// The density F′(λ) at frequency λ ∈ [−1/2, 1/2].
    pub fn density(&self, lambda: f64) -> f64 {
        match *self {
            Self::White => 1.0,
            Self::PiecewiseConstant {
                in_band_level,
                out_band_level,
                band_edge,
            } => {
                if lambda.abs() <= band_edge {
                    in_band_level
                } else {
                    out_band_level
                }
            }
        }
    }

    /// ∫_{−1/2}^{1/2} log(F′(λ) + shift) dλ in closed form, for shift ≥ 0.
    /// This is the workhorse integral of every nonasymptotic bound.
    pub fn log_density_integral(&self, shift: f64) -> f64 {
        match *self {
            Self::White => shift.ln_1p(),
            Self::PiecewiseConstant {
                in_band_level,
                out_band_level,
                band_edge,
            } => {
                2.0 * band_edge * (in_band_level + shift).ln()
                    + (1.0 - 2.0 * band_edge) * (out_band_level + shift).ln()
            }
        }
    }
}

/// Solves for the piecewise-constant model with prediction error exactly
/// `target_eps_sq`, out-of-band level Λ = `out_band_level`, and unit variance.
///
/// The band edge Θ is the free parameter of the solve; `band_edge_hint`
/// selects the branch (and is validated as a band edge). The returned model's
/// Θ may differ from the hint in its trailing digits because both constraints
/// are enforced exactly.
pub fn make_piecewise(
    target_eps_sq: f64,
    out_band_level: f64,
    band_edge_hint: f64,
) -> Result<SpectralModel, SpectralError> {
    if !(band_edge_hint > 0.0 && band_edge_hint < 0.5) {
        return Err(SpectralError::InvalidParameter {
            field: "band_edge",
            message: format!("must lie in (0, 0.5), got {band_edge_hint}"),
        });
    }
    if !(out_band_level > 0.0 && out_band_level < 1.0) {
        return Err(SpectralError::InvalidParameter {
            field: "out_band_level",
            message: format!("must lie in (0, 1), got {out_band_level}"),
        });
    }
    if !(target_eps_sq > 0.0 && target_eps_sq < 1.0) {
        return Err(SpectralError::InfeasibleTarget(format!(
            "prediction error must lie in (0, 1), got {target_eps_sq}"
        )));
    }
    if target_eps_sq <= out_band_level {
        return Err(SpectralError::InfeasibleTarget(format!(
            "prediction error {target_eps_sq} not attainable with floor Λ = {out_band_level}; \
             the floor forces ε² > Λ"
        )));
    }

    // Unit variance pins Υ(Θ); the prediction error picks Θ.
    let upsilon_of = |theta: f64| (1.0 - (1.0 - 2.0 * theta) * out_band_level) / (2.0 * theta);
    let log_eps_of = |theta: f64| {
        2.0 * theta * upsilon_of(theta).ln() + (1.0 - 2.0 * theta) * out_band_level.ln()
    };
    let target_log = target_eps_sq.ln();

    // log ε²(Θ) runs from ln Λ at Θ→0⁺ to 0 at Θ→1/2 and is monotone for
    // Λ < 1; bracket by scanning, then bisect.
    let lo = 1e-12;
    let hi = 0.5 - 1e-12;
    let mut bracket = None;
    let scan = 4096;
    let mut prev_t = lo;
    let mut prev_v = log_eps_of(lo) - target_log;
    for i in 1..=scan {
        let t = lo + (hi - lo) * i as f64 / scan as f64;
        let v = log_eps_of(t) - target_log;
        if prev_v == 0.0 || prev_v.signum() != v.signum() {
            bracket = Some((prev_t, t));
            break;
        }
        prev_t = t;
        prev_v = v;
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        SpectralError::InfeasibleTarget(format!(
            "no band edge attains prediction error {target_eps_sq} with Λ = {out_band_level}"
        ))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (log_eps_of(mid) - target_log).signum() == (log_eps_of(a) - target_log).signum() {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) < 1e-17 {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    SpectralModel::piecewise(upsilon_of(theta), out_band_level, theta)
}

/// Mean-square error of one-step prediction from the infinite past:
/// ε² = exp(∫ log F′(λ) dλ) ∈ (0, 1].
pub fn prediction_error(model: &SpectralModel) -> f64 {
    match *model {
        SpectralModel::White => 1.0,
        SpectralModel::PiecewiseConstant { .. } => model.log_density_integral(0.0).exp(),
    }
}

/// Noisy prediction error ε²(ξ) = exp(∫ log(F′(λ)+ξ) dλ) − ξ, the prediction
/// MMSE when past observations carry additive noise of variance ξ.
pub fn noisy_prediction_error(model: &SpectralModel, xi: f64) -> Result<f64, SpectralError> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(SpectralError::InvalidParameter {
            field: "xi",
            message: format!("observation-noise variance must be >= 0, got {xi}"),
        });
    }
    match *model {
        SpectralModel::White => Ok(1.0),
        SpectralModel::PiecewiseConstant {
            in_band_level,
            out_band_level,
            band_edge,
        } => {
            if xi <= 1.0 {
                Ok(model.log_density_integral(xi).exp() - xi)
            } else {
                // ξ(exp(∫log(1+F′/ξ)) − 1) form avoids the large-ξ cancellation
                let l = 2.0 * band_edge * (in_band_level / xi).ln_1p()
                    + (1.0 - 2.0 * band_edge) * (out_band_level / xi).ln_1p();
                Ok(xi * l.exp_m1())
            }
        }
    }
}

/// Autocovariance r(m) = ∫ e^{i2πmλ} F′(λ) dλ. Real-valued for the symmetric
/// densities used here; returned as complex to match the spectral transform.
pub fn autocovariance(model: &SpectralModel, lag: i64) -> Complex64 {
    assert!(lag.unsigned_abs() <= 1_000_000, "lag out of supported range");
    let re = match *model {
        SpectralModel::White => {
            if lag == 0 {
                1.0
            } else {
                0.0
            }
        }
        SpectralModel::PiecewiseConstant {
            in_band_level,
            out_band_level,
            band_edge,
        } => {
            if lag == 0 {
                2.0 * in_band_level * band_edge + (1.0 - 2.0 * band_edge) * out_band_level
            } else {
                let m = lag as f64;
                (in_band_level - out_band_level) * (2.0 * std::f64::consts::PI * m * band_edge).sin()
                    / (std::f64::consts::PI * m)
            }
        }
    };
    Complex64::new(re, 0.0)
}

/// Finite-memory prediction error ε²_κ = 1 − rᴴ R⁻¹ r: the MMSE of predicting
/// H₀ from the κ previous samples. Nonincreasing in κ with limit ε².
pub fn finite_memory_prediction_error(
    model: &SpectralModel,
    memory: usize,
) -> Result<f64, SpectralError> {
    Ok(*finite_memory_prediction_errors(model, memory)?
        .last()
        .expect("memory >= 1"))
}

/// All intermediate prediction errors ε²_1, …, ε²_κ from one Levinson pass.
pub fn finite_memory_prediction_errors(
    model: &SpectralModel,
    memory: usize,
) -> Result<Vec<f64>, SpectralError> {
    if memory == 0 {
        return Err(SpectralError::InvalidParameter {
            field: "memory",
            message: "must be >= 1".into(),
        });
    }
    if matches!(model, SpectralModel::White) {
        return Ok(vec![1.0; memory]);
    }
    let r: Vec<f64> = (0..=memory as i64).map(|m| autocovariance(model, m).re).collect();
    match levinson(&r) {
        Some((_, errs)) => Ok(errs),
        None => {
            // reflection magnitude reached 1: fall back to a dense SPD solve
            let mut errs = Vec::with_capacity(memory);
            for k in 1..=memory {
                let c = dense_toeplitz_solve(&r[..=k])?;
                let mut e = r[0];
                for (j, &a) in c.iter().enumerate() {
                    e -= a * r[j + 1];
                }
                errs.push(e);
            }
            Ok(errs)
        }
    }
}

/// Coefficients of the length-κ linear MMSE predictor
/// Ĥ₀ = Σ_{j=1..κ} a_j H_{−j}, from the analytic autocovariances.
pub fn predictor_coefficients(
    model: &SpectralModel,
    memory: usize,
) -> Result<Vec<f64>, SpectralError> {
    if memory == 0 {
        return Err(SpectralError::InvalidParameter {
            field: "memory",
            message: "must be >= 1".into(),
        });
    }
    if matches!(model, SpectralModel::White) {
        return Ok(vec![0.0; memory]);
    }
    let r: Vec<f64> = (0..=memory as i64).map(|m| autocovariance(model, m).re).collect();
    let coeffs = match levinson(&r) {
        Some((a, _)) => a,
        None => dense_toeplitz_solve(&r)?,
    };
    check_solve_residual(&r, &coeffs)?;
    Ok(coeffs)
}

/// Smallest positive lag at which |r(m)| drops below r(0)/2; a crude
/// coherence-time indicator. `None` if no drop occurs within 10⁶ lags.
pub fn coherence_time(model: &SpectralModel) -> Option<u64> {
    let half = 0.5 * autocovariance(model, 0).re;
    (1..=1_000_000).find(|&m| autocovariance(model, m).re.abs() < half)
}

/// Levinson–Durbin recursion on the normal equations R a = r.
/// Returns `None` when a reflection coefficient reaches magnitude 1 − 1e-12,
/// signalling that the dense fallback should take over.
fn levinson(r: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let kappa = r.len() - 1;
    let mut a = vec![0.0f64; kappa];
    let mut errs = Vec::with_capacity(kappa);
    let mut e = r[0];
    for m in 1..=kappa {
        let mut acc = r[m];
        for j in 1..m {
            acc -= a[j - 1] * r[m - j];
        }
        let k = acc / e;
        if k.abs() > 1.0 - 1e-12 {
            return None;
        }
        a[m - 1] = k;
        for j in 0..(m - 1) / 2 + (m - 1) % 2 {
            let hi = m - 2 - j;
            let (lo_v, hi_v) = (a[j], a[hi]);
            a[j] = lo_v - k * hi_v;
            if hi != j {
                a[hi] = hi_v - k * lo_v;
            }
        }
        e *= 1.0 - k * k;
        errs.push(e);
    }
    Some((a, errs))
}

/// Dense symmetric-positive-definite Toeplitz solve (Cholesky), the fallback
/// path for near-singular systems.
fn dense_toeplitz_solve(r: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = r.len() - 1;
    let mut mat = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            mat[i * n + j] = r[(i as i64 - j as i64).unsigned_abs() as usize];
        }
    }
    let mut rhs: Vec<f64> = r[1..=n].to_vec();
    // Cholesky factorization in place
    for i in 0..n {
        for j in 0..=i {
            let mut s = mat[i * n + j];
            for k in 0..j {
                s -= mat[i * n + k] * mat[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(SpectralError::IllConditioned {
                        condition_estimate: f64::INFINITY,
                    });
                }
                mat[i * n + j] = s.sqrt();
            } else {
                mat[i * n + j] = s / mat[j * n + j];
            }
        }
    }
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= mat[i * n + k] * rhs[k];
        }
        rhs[i] = s / mat[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in i + 1..n {
            s -= mat[k * n + i] * rhs[k];
        }
        rhs[i] = s / mat[i * n + i];
    }
    check_solve_residual(r, &rhs)?;
    Ok(rhs)
}

/// Rejects solves that lost more than ~6 digits, reporting the residual-based
/// condition estimate.
fn check_solve_residual(r: &[f64], coeffs: &[f64]) -> Result<(), SpectralError> {
    let n = coeffs.len();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let mut s = 0.0;
        let mut row = 0.0;
        for (j, &a) in coeffs.iter().enumerate() {
            let rij = r[(i as i64 - j as i64).unsigned_abs() as usize];
            s += rij * a;
            row += rij.abs() * a.abs();
        }
        worst = worst.max((s - r[i + 1]).abs());
        scale = scale.max(row + r[i + 1].abs());
    }
    let rel = worst / scale.max(f64::MIN_POSITIVE);
    if rel > 1e-10 {
        return Err(SpectralError::IllConditioned {
            condition_estimate: rel / f64::EPSILON,
        });
    }
    Ok(())
}

/// One relay-channel instance: the three fading spectra and the two scalar
/// channel constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    /// Transmitter → relay fading spectrum (F₁).
    pub link1: SpectralModel,
    /// Transmitter → receiver fading spectrum (F₂).
    pub link2: SpectralModel,
    /// Relay → receiver fading spectrum (F₃).
    pub link3: SpectralModel,
    /// Peak-amplitude ratio ρ = A/A_r between transmitter and relay.
    pub rho: f64,
    /// Additive-noise variance σ².
    pub sigma_sq: f64,
}

impl ChannelScenario {
    pub fn new(
        link1: SpectralModel,
        link2: SpectralModel,
        link3: SpectralModel,
        rho: f64,
        sigma_sq: f64,
    ) -> Result<Self, SpectralError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(SpectralError::InvalidParameter {
                field: "rho",
                message: format!("must be finite and > 0, got {rho}"),
            });
        }
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(SpectralError::InvalidParameter {
                field: "sigma_sq",
                message: format!("must be finite and > 0, got {sigma_sq}"),
            });
        }
        Ok(Self {
            link1,
            link2,
            link3,
            rho,
            sigma_sq,
        })
    }

    /// Prediction errors (ε₁², ε₂², ε₃²) of the three links.
    pub fn prediction_errors(&self) -> (f64, f64, f64) {
        (
            prediction_error(&self.link1),
            prediction_error(&self.link2),
            prediction_error(&self.link3),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Oracle: adaptive Simpson quadrature split at the density discontinuities.
    fn quad_split(f: &dyn Fn(f64) -> f64, model: &SpectralModel) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                let x = a + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            s * h / 3.0
        }
        let edges: Vec<f64> = match *model {
            SpectralModel::White => vec![-0.5, 0.5],
            SpectralModel::PiecewiseConstant { band_edge, .. } => {
                vec![-0.5, -band_edge, band_edge, 0.5]
            }
        };
        edges
            .windows(2)
            .map(|w| simpson(f, w[0] + 1e-15, w[1] - 1e-15, 4096))
            .sum()
    }

    fn link3_model() -> SpectralModel {
        make_piecewise(1e-2, 0.005, 0.04503).unwrap()
    }

    #[test]
    fn make_piecewise_matches_reported_parameters() {
        let m1 = make_piecewise(1e-4, 1e-5, 0.08679).unwrap();
        let SpectralModel::PiecewiseConstant {
            in_band_level: u1,
            band_edge: t1,
            ..
        } = m1
        else {
            panic!("expected piecewise model");
        };
        assert_relative_eq!(u1, 5.76034, max_relative = 1e-3);
        assert_relative_eq!(t1, 0.08679, max_relative = 1e-3);

        // The published Υ₃ misses the unit-variance constraint by ~0.5%, so the
        // exact solve lands within 1% of it rather than on it.
        let m3 = link3_model();
        let SpectralModel::PiecewiseConstant {
            in_band_level: u3, ..
        } = m3
        else {
            panic!("expected piecewise model");
        };
        assert_relative_eq!(u3, 10.99684, max_relative = 1e-2);
        assert_relative_eq!(u3, 11.060666, max_relative = 1e-5);
    }

    #[test]
    fn make_piecewise_hits_target_and_unit_variance() {
        for &(target, lam, hint) in &[
            (1e-4, 1e-5, 0.08679),
            (1e-2, 0.005, 0.04503),
            (0.3, 0.05, 0.2),
            (0.9, 0.5, 0.4),
        ] {
            let m = make_piecewise(target, lam, hint).unwrap();
            assert_relative_eq!(prediction_error(&m), target, max_relative = 1e-6);
            let SpectralModel::PiecewiseConstant {
                in_band_level,
                out_band_level,
                band_edge,
            } = m
            else {
                panic!()
            };
            let var = 2.0 * in_band_level * band_edge + (1.0 - 2.0 * band_edge) * out_band_level;
            assert!((var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn make_piecewise_rejects_infeasible_targets() {
        assert!(matches!(
            make_piecewise(1.0, 0.1, 0.1),
            Err(SpectralError::InfeasibleTarget(_))
        ));
        assert!(make_piecewise(1.5, 0.1, 0.1).is_err());
        // target below the out-of-band floor
        assert!(make_piecewise(0.001, 0.01, 0.1).is_err());
        assert!(make_piecewise(0.5, 0.0, 0.1).is_err());
    }

    #[test]
    fn prediction_error_values() {
        assert_eq!(prediction_error(&SpectralModel::White), 1.0);
        let m1 = make_piecewise(1e-4, 1e-5, 0.08679).unwrap();
        assert_relative_eq!(prediction_error(&m1), 1e-4, max_relative = 5e-3);
        assert_relative_eq!(prediction_error(&link3_model()), 1e-2, max_relative = 5e-3);
    }

    #[test]
    fn noisy_prediction_error_reduces_and_saturates() {
        let m = link3_model();
        let base = prediction_error(&m);
        assert_relative_eq!(noisy_prediction_error(&m, 0.0).unwrap(), base, max_relative = 1e-12);
        assert_eq!(noisy_prediction_error(&SpectralModel::White, 3.7).unwrap(), 1.0);
        assert_eq!(noisy_prediction_error(&SpectralModel::White, 0.0).unwrap(), 1.0);

        // nondecreasing in ξ, bounded by 1, limit 1 at huge ξ
        let mut prev = base;
        for i in 0..40 {
            let xi = 1e-4 * 10f64.powf(i as f64 * 10.0 / 39.0);
            let v = noisy_prediction_error(&m, xi).unwrap();
            assert!(v >= prev - 1e-12, "ε²(ξ) must be nondecreasing");
            assert!(v <= 1.0 + 1e-12);
            prev = v;
        }
        assert!((noisy_prediction_error(&m, 1e6).unwrap() - 1.0).abs() < 1e-4);
        assert!(noisy_prediction_error(&m, -0.5).is_err());
    }

    #[test]
    fn noisy_prediction_error_matches_quadrature() {
        let m = link3_model();
        let xi = 0.01;
        let integral = quad_split(&|l: f64| (m.density(l) + xi).ln(), &m);
        assert_relative_eq!(
            noisy_prediction_error(&m, xi).unwrap(),
            integral.exp() - xi,
            max_relative = 1e-10
        );
    }

    #[test]
    fn autocovariance_values() {
        let m = link3_model();
        assert_relative_eq!(autocovariance(&m, 0).re, 1.0, epsilon = 1e-12);
        assert_eq!(autocovariance(&SpectralModel::White, 5).re, 0.0);
        assert_eq!(autocovariance(&SpectralModel::White, 0).re, 1.0);

        // lag-1 value against the quadrature oracle
        let oracle = quad_split(
            &|l: f64| m.density(l) * (2.0 * std::f64::consts::PI * l).cos(),
            &m,
        );
        assert_relative_eq!(autocovariance(&m, 1).re, oracle, max_relative = 1e-10);
        // symmetric density ⟹ real, even sequence
        assert_eq!(autocovariance(&m, 3).re, autocovariance(&m, -3).re);
        assert!(autocovariance(&m, 7).im.abs() < 1e-12);
    }

    #[test]
    fn finite_memory_one_tap_matches_hand_solution() {
        let m = link3_model();
        let r1 = autocovariance(&m, 1).re;
        assert_relative_eq!(
            finite_memory_prediction_error(&m, 1).unwrap(),
            1.0 - r1 * r1,
            max_relative = 1e-12
        );
    }

    #[test]
    fn finite_memory_two_tap_matches_dense_oracle() {
        let m = link3_model();
        let r0 = 1.0;
        let r1 = autocovariance(&m, 1).re;
        let r2 = autocovariance(&m, 2).re;
        // explicit 2x2 inverse
        let det = r0 * r0 - r1 * r1;
        let a1 = (r0 * r1 - r1 * r2) / det;
        let a2 = (r0 * r2 - r1 * r1) / det;
        let oracle = r0 - a1 * r1 - a2 * r2;
        assert_relative_eq!(
            finite_memory_prediction_error(&m, 2).unwrap(),
            oracle,
            max_relative = 1e-12
        );
    }

    #[test]
    fn finite_memory_white_is_unity() {
        for kappa in [1usize, 4, 17] {
            assert_eq!(
                finite_memory_prediction_error(&SpectralModel::White, kappa).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn finite_memory_monotone_and_bounded() {
        for m in [make_piecewise(1e-4, 1e-5, 0.08679).unwrap(), link3_model()] {
            let eps = prediction_error(&m);
            let errs = finite_memory_prediction_errors(&m, 512).unwrap();
            let mut prev = 1.0 + 1e-15;
            for &e in &errs {
                assert!(e <= prev + 1e-12, "ε²_κ must be nonincreasing");
                assert!(e >= eps - 1e-9, "ε²_κ must stay above ε²");
                prev = e;
            }
            let gap8 = errs[7] - eps;
            let gap512 = errs[511] - eps;
            assert!(gap512 < gap8, "memory must pay off between κ=8 and κ=512");
        }
    }

    #[test]
    fn toeplitz_minors_positive_semidefinite() {
        let m = link3_model();
        // leading principal minors via the Levinson error product det = Π ε²_k
        let errs = finite_memory_prediction_errors(&m, 64).unwrap();
        let mut det = 1.0;
        for e in errs {
            det *= e;
            assert!(det >= -1e-10);
        }
    }

    #[test]
    fn predictor_coefficients_solve_normal_equations() {
        let m = link3_model();
        let kappa = 24;
        let a = predictor_coefficients(&m, kappa).unwrap();
        for i in 0..kappa {
            let mut s = 0.0;
            for (j, &aj) in a.iter().enumerate() {
                s += autocovariance(&m, (i as i64 - j as i64).abs()).re * aj;
            }
            assert_relative_eq!(s, autocovariance(&m, i as i64 + 1).re, epsilon = 1e-10);
        }
        assert_eq!(predictor_coefficients(&SpectralModel::White, 4).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn coherence_time_white_is_immediate() {
        assert_eq!(coherence_time(&SpectralModel::White), Some(1));
        assert!(coherence_time(&link3_model()).unwrap() >= 1);
    }

    #[test]
    fn scenario_validation() {
        let w = SpectralModel::White;
        assert!(ChannelScenario::new(w, w, w, 1.0, 1.0).is_ok());
        assert!(ChannelScenario::new(w, w, w, 0.0, 1.0).is_err());
        assert!(ChannelScenario::new(w, w, w, 1.0, 0.0).is_err());
        assert!(ChannelScenario::new(w, w, w, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn piecewise_constructor_rejects_bad_parameters() {
        assert!(SpectralModel::piecewise(5.0, 0.0, 0.1).is_err());
        assert!(SpectralModel::piecewise(5.0, -0.1, 0.1).is_err());
        assert!(SpectralModel::piecewise(0.5, 0.9, 0.1).is_err());
        assert!(SpectralModel::piecewise(5.0, 0.01, 0.6).is_err());
        // violates unit variance
        assert!(SpectralModel::piecewise(5.0, 0.01, 0.1).is_err());
    }
}
