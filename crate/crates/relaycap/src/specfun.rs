//! Scalar special functions used by the capacity bounds: the upper incomplete
//! gamma function Γ(a, x), the exponential integral Ei(−x), and the composite
//! exp(u)·Ei(−u) that appears in every lower-bound objective.
//!
//! Series expansions are used for small arguments and continued fractions
//! (modified Lentz) for large ones; the switchover sits near x = a + 1 for the
//! gamma function and x = 1 for the exponential integral. All bound arithmetic
//! downstream is in nats, so everything here works in natural logarithms.

use std::fmt;

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const MAX_ITER: usize = 400;
const LENTZ_TINY: f64 = 1e-300;

/// Errors from special-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecfunError {
    /// Input outside the function's documented domain.
    Domain(&'static str),
    /// An intermediate quantity left the representable range.
    Overflow(&'static str),
    /// Series or continued fraction did not converge within the iteration limit.
    NoConvergence(&'static str),
}

impl fmt::Display for SpecfunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::Overflow(msg) => write!(f, "overflow: {msg}"),
            Self::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
        }
    }
}

impl std::error::Error for SpecfunError {}

/// A special-function evaluation together with an absolute-error estimate
/// carried out of the series/continued-fraction truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_err_estimate: f64,
}

// ---------------------------------------------------------------------------
// log-gamma (Lanczos, g = 7, n = 9, Godfrey coefficients)
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection keeps the Lanczos argument away from 0
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS[1..].iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

// ζ(k) − 1 for k = 2..=18, used by the small-argument expansion of ln Γ(1+a).
const ZETA_M1: [f64; 17] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_29,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_926,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_56,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_15,
    0.000_061_248_135_058_704_83,
    0.000_030_588_236_307_020_494,
    0.000_015_282_259_408_651_872,
    0.000_007_637_197_637_899_762,
    0.000_003_817_293_264_999_84,
];

/// ln Γ(1+a) for |a| ≤ 0.25, accurate near a = 0 where the Lanczos route
/// loses all relative accuracy (the value itself is O(a)).
fn ln_gamma_1p_small(a: f64) -> f64 {
    debug_assert!(a.abs() <= 0.25);
    // ln Γ(1+a) = −ln(1+a) + a(1−γ) + Σ_{k≥2} (−1)^k (ζ(k)−1) a^k / k
    let mut sum = 0.0;
    let mut ak = a;
    for (i, &zm1) in ZETA_M1.iter().enumerate() {
        let k = (i + 2) as f64;
        ak *= a;
        let term = zm1 * ak / k;
        sum = if i % 2 == 0 { sum + term } else { sum - term };
    }
    -a.ln_1p() + a * (1.0 - EULER_GAMMA) + sum
}

// ---------------------------------------------------------------------------
// Upper incomplete gamma
// ---------------------------------------------------------------------------

/// Upper incomplete gamma function Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt.
///
/// Domain: a ∈ (0, 50], x > 0. Accurate to about 1e-12 relative for
/// x ≤ 700. Satisfies Γ(a+1, x) = a·Γ(a, x) + x^a e^{−x}.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64, SpecfunError> {
    Ok(upper_incomplete_gamma_full(a, x)?.value)
}

/// Like [`upper_incomplete_gamma`] but reporting the truncation-error estimate.
pub fn upper_incomplete_gamma_full(a: f64, x: f64) -> Result<SpecialValue, SpecfunError> {
    check_gamma_domain(a, x)?;
    if x >= a + 1.0 {
        // Γ(a,x) = e^{−x} x^a · CF(a,x); no cancellation, no lgamma needed
        let (cf, cf_err) = gamma_cf(a, x)?;
        let log_pre = -x + a * x.ln();
        if log_pre > 700.0 {
            return Err(SpecfunError::Overflow("x^a e^{-x} exceeds f64 range"));
        }
        let pre = log_pre.exp();
        let value = pre * cf;
        Ok(SpecialValue {
            value,
            abs_err_estimate: pre * cf_err + value.abs() * 4.0 * f64::EPSILON * (1.0 + log_pre.abs()),
        })
    } else if a < 0.25 {
        // Small a with x < a+1: split off the 1/a poles analytically.
        // Γ(a,x) = (Γ(1+a) − x^a)/a − x^a Σ_{k≥1} (−x)^k / (k!(a+k))
        let lnx = x.ln();
        let head = ((ln_gamma_1p_small(a).exp_m1()) - (a * lnx).exp_m1()) / a;
        let (tail_sum, tail_err) = small_a_tail(a, x)?;
        let xa = (a * lnx).exp();
        let value = head - xa * tail_sum;
        Ok(SpecialValue {
            value,
            abs_err_estimate: xa * tail_err + value.abs() * 8.0 * f64::EPSILON,
        })
    } else {
        // Series for the regularized lower function P(a,x), then Γ(a,x) = Γ(a)(1−P).
        let (p, p_err) = regularized_lower_series(a, x)?;
        let gamma_a = ln_gamma(a).exp();
        let value = gamma_a * (1.0 - p);
        Ok(SpecialValue {
            value,
            abs_err_estimate: gamma_a * (p_err + 4.0 * f64::EPSILON),
        })
    }
}

/// ln Γ(a, x) for a ∈ (0, 50], x > 0, usable far beyond the natural-space
/// range (e.g. x of a few thousand, where Γ(a,x) itself underflows).
pub fn log_upper_incomplete_gamma(a: f64, x: f64) -> Result<f64, SpecfunError> {
    check_gamma_domain(a, x)?;
    if x >= a + 1.0 {
        let (cf, _) = gamma_cf(a, x)?;
        Ok(-x + a * x.ln() + cf.ln())
    } else {
        let v = upper_incomplete_gamma(a, x)?;
        if v <= 0.0 {
            return Err(SpecfunError::Domain("log of nonpositive gamma value"));
        }
        Ok(v.ln())
    }
}

fn check_gamma_domain(a: f64, x: f64) -> Result<(), SpecfunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecfunError::Domain("incomplete gamma requires x > 0"));
    }
    if !a.is_finite() || a <= 0.0 || a > 50.0 {
        return Err(SpecfunError::Domain("incomplete gamma requires 0 < a <= 50"));
    }
    Ok(())
}

/// Legendre continued fraction for Γ(a,x)·e^x·x^{−a}, evaluated by modified Lentz.
fn gamma_cf(a: f64, x: f64) -> Result<(f64, f64), SpecfunError> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / LENTZ_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + an / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok((h, h.abs() * (delta - 1.0).abs() * 2.0));
        }
    }
    Err(SpecfunError::NoConvergence("gamma continued fraction"))
}

/// Series for P(a,x) = γ(a,x)/Γ(a); valid for x < a + 1.
fn regularized_lower_series(a: f64, x: f64) -> Result<(f64, f64), SpecfunError> {
    let log_pre = -x + a * x.ln() - ln_gamma(a);
    let pre = log_pre.exp();
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            return Ok((pre * sum, pre * term.abs() * 2.0));
        }
    }
    Err(SpecfunError::NoConvergence("lower gamma series"))
}

/// Σ_{k≥1} (−x)^k / (k!(a+k)) for x < 1.25, alternating with fast decay.
fn small_a_tail(a: f64, x: f64) -> Result<(f64, f64), SpecfunError> {
    let mut pow = 1.0; // (−x)^k / k!
    let mut sum = 0.0;
    for k in 1..=MAX_ITER {
        pow *= -x / k as f64;
        let term = pow / (a + k as f64);
        sum += term;
        if term.abs() < 1e-18 {
            return Ok((sum, term.abs() * 2.0));
        }
    }
    Err(SpecfunError::NoConvergence("small-a gamma tail"))
}

// ---------------------------------------------------------------------------
// Exponential integral
// ---------------------------------------------------------------------------

/// Exponential integral Ei(−x) = −∫ₓ^∞ e^{−t}/t dt for x > 0; always negative.
///
/// Satisfies 1/(x+1) < −e^x·Ei(−x) < 1/x.
pub fn expint_ei_neg(x: f64) -> Result<f64, SpecfunError> {
    Ok(expint_ei_neg_full(x)?.value)
}

/// Like [`expint_ei_neg`] but with an error estimate.
pub fn expint_ei_neg_full(x: f64) -> Result<SpecialValue, SpecfunError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SpecfunError::Domain("Ei(-x) requires x > 0"));
    }
    if x < 1.0 {
        let (s, s_err) = ei_series(x)?;
        Ok(SpecialValue {
            value: s,
            abs_err_estimate: s_err + s.abs() * 4.0 * f64::EPSILON,
        })
    } else {
        // Ei(−x) = −e^{−x}·CF(x); e^{−x} underflows cleanly to 0 past x ≈ 745
        let (cf, cf_err) = e1_cf(x)?;
        let e = (-x).exp();
        Ok(SpecialValue {
            value: -e * cf,
            abs_err_estimate: e * cf_err + e * cf * 4.0 * f64::EPSILON * (1.0 + x),
        })
    }
}

/// Ei(−x) = γ + ln x + Σ_{k≥1} (−x)^k/(k·k!), for x < 1.
fn ei_series(x: f64) -> Result<(f64, f64), SpecfunError> {
    let mut pow = 1.0;
    let mut sum = EULER_GAMMA + x.ln();
    for k in 1..=MAX_ITER {
        pow *= -x / k as f64;
        let term = pow / k as f64;
        sum += term;
        if term.abs() < 1e-18 {
            return Ok((sum, term.abs() * 2.0));
        }
    }
    Err(SpecfunError::NoConvergence("Ei series"))
}

/// Continued fraction for e^x·E₁(x) = −e^x·Ei(−x), x ≥ 1 (modified Lentz).
fn e1_cf(x: f64) -> Result<(f64, f64), SpecfunError> {
    let mut b = x + 1.0;
    let mut c = 1.0 / LENTZ_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + an / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok((h, h.abs() * (delta - 1.0).abs() * 2.0));
        }
    }
    Err(SpecfunError::NoConvergence("E1 continued fraction"))
}

/// The composite exp(u)·Ei(−u) for u > 0, computed without forming exp(u)
/// when u is large. The result lies in (−1/u, −1/(1+u)).
pub fn ei_correction_term(u: f64) -> Result<f64, SpecfunError> {
    if !u.is_finite() || u <= 0.0 {
        return Err(SpecfunError::Domain("exp(u)Ei(-u) requires u > 0"));
    }
    if u < 1.0 {
        let (s, _) = ei_series(u)?;
        Ok(u.exp() * s)
    } else {
        let (cf, _) = e1_cf(u)?;
        Ok(-cf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Independent oracle: adaptive Simpson quadrature of a scalar integrand.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        let whole = simpson(f, a, b);
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            adaptive_simpson(f, a, m, tol / 2.0, depth - 1)
                + adaptive_simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    // Oracle for Γ(a,x): quadrature of the defining integral, tail truncated.
    fn gamma_upper_oracle(a: f64, x: f64) -> f64 {
        let hi = (x + 60.0 + 10.0 * a).max(80.0);
        adaptive_simpson(&|t: f64| t.powf(a - 1.0) * (-t).exp(), x, hi, 1e-14, 48)
    }

    // Oracle for Ei(−x): the defining series, summed independently.
    fn ei_series_oracle(x: f64) -> f64 {
        let mut sum = EULER_GAMMA + x.ln();
        let mut pow = 1.0;
        for k in 1..200 {
            pow *= -x / k as f64;
            sum += pow / k as f64;
        }
        sum
    }

    #[test]
    fn gamma_trivial_values() {
        // Γ(1,x) = e^{−x}
        assert_relative_eq!(
            upper_incomplete_gamma(1.0, 2.0).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-13
        );
        // Γ(1/2, x→0⁺) → √π
        let v = upper_incomplete_gamma(0.5, 1e-15).unwrap();
        assert!((v - 1.772_453_850_905_516).abs() < 1e-7);
    }

    #[test]
    fn gamma_oracle_agreement() {
        // frozen from the quadrature oracle (cross-checked at 1e-14)
        let frozen = 0.125_973_364_484_151_59;
        let q = gamma_upper_oracle(0.3, 1.5);
        assert_relative_eq!(q, frozen, max_relative = 1e-11);
        let v = upper_incomplete_gamma(0.3, 1.5).unwrap();
        assert_relative_eq!(v, q, max_relative = 1e-10);
        assert_relative_eq!(v, frozen, max_relative = 1e-12);
    }

    #[test]
    fn gamma_spot_values() {
        // frozen high-precision references
        assert_relative_eq!(
            upper_incomplete_gamma(10.0, 3.0).unwrap(),
            362_479.929_107_343_7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            upper_incomplete_gamma(50.0, 60.0).unwrap(),
            5.134_305_331_261_683_6e61,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            upper_incomplete_gamma(0.3, 700.0).unwrap(),
            1.004_293_333_045_739_1e-306,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            log_upper_incomplete_gamma(0.5, 5000.0).unwrap(),
            -5_004.258_696_570_72,
            max_relative = 1e-13
        );
    }

    #[test]
    fn gamma_recurrence_grid() {
        // |Γ(a+1,x) − a·Γ(a,x) − x^a e^{−x}| ≤ 1e-10·max(1, Γ(a+1,x))
        let a_grid: Vec<f64> = (0..8).map(|i| 0.1 * 10f64.powf(i as f64 * 2.0 / 7.0)).collect();
        let x_grid: Vec<f64> = (0..12).map(|i| 0.01 * 10f64.powf(i as f64 * 3.7 / 11.0)).collect();
        for &a in &a_grid {
            for &x in &x_grid {
                let g1 = upper_incomplete_gamma(a + 1.0, x).unwrap();
                let g0 = upper_incomplete_gamma(a, x).unwrap();
                let extra = (a * x.ln() - x).exp();
                assert!(
                    (g1 - a * g0 - extra).abs() <= 1e-10 * g1.max(1.0),
                    "recurrence failed at a={a} x={x}"
                );
            }
        }
    }

    #[test]
    fn gamma_small_a_matches_expint() {
        // Γ(a,x) → −Ei(−x) as a → 0
        for i in 0..20 {
            let x = 0.1 * (100f64).powf(i as f64 / 19.0); // 0.1 .. 10
            let g = upper_incomplete_gamma(1e-12, x).unwrap();
            let e = -expint_ei_neg(x).unwrap();
            assert_relative_eq!(g, e, max_relative = 1e-6);
        }
        // frozen spot check at the series/CF boundary region
        assert_relative_eq!(
            upper_incomplete_gamma(1e-12, 0.5).unwrap(),
            0.559_773_594_776_131_1,
            max_relative = 1e-9
        );
    }

    #[test]
    fn gamma_monotone_in_x() {
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let x = 0.05 + i as f64 * 0.5;
            let v = upper_incomplete_gamma(2.3, x).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn gamma_domain_errors() {
        assert!(upper_incomplete_gamma(1.0, 0.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
        assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(-0.5, 1.0).is_err());
        assert!(upper_incomplete_gamma(51.0, 1.0).is_err());
    }

    #[test]
    fn expint_oracle_agreement() {
        // frozen from the series oracle
        assert_relative_eq!(
            expint_ei_neg(1.0).unwrap(),
            -0.219_383_934_395_520_27,
            max_relative = 1e-12
        );
        assert_relative_eq!(expint_ei_neg(1.0).unwrap(), ei_series_oracle(1.0), max_relative = 1e-12);
        // x = 0.01 → γ + ln(0.01) − 0.01 + 0.01²/4 − …
        assert_relative_eq!(
            expint_ei_neg(0.01).unwrap(),
            -4.037_929_576_538_114,
            max_relative = 1e-12
        );
        let approx2 = EULER_GAMMA + 0.01f64.ln() - 0.01 + 0.000025;
        assert!((expint_ei_neg(0.01).unwrap() - approx2).abs() < 1e-8);
        assert_relative_eq!(
            expint_ei_neg(2.0).unwrap(),
            -0.048_900_510_708_061_12,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            expint_ei_neg(5.0).unwrap(),
            -0.001_148_295_591_275_325_8,
            max_relative = 1e-12
        );
    }

    #[test]
    fn expint_tiny_tail() {
        let v = expint_ei_neg(700.0).unwrap();
        assert!(v < 0.0 && v.abs() < 1e-300);
        // deep underflow region returns a clean 0 with no error
        let v = expint_ei_neg(800.0).unwrap();
        assert!(v.abs() == 0.0 || v.abs() < 1e-300);
    }

    #[test]
    fn expint_bracket_and_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..60 {
            let x = 0.02 * 10f64.powf(i as f64 * 4.0 / 59.0); // 0.02 .. 200
            let ei = expint_ei_neg(x).unwrap();
            assert!(ei > prev, "Ei(-x) must increase toward 0");
            prev = ei;
            let scaled = -x.exp() * ei;
            if x < 300.0 {
                assert!(
                    1.0 / (x + 1.0) < scaled && scaled < 1.0 / x,
                    "bracket failed at x={x}: {scaled}"
                );
            }
        }
    }

    #[test]
    fn ei_correction_values() {
        // frozen products of the two oracles
        assert_relative_eq!(
            ei_correction_term(1.0).unwrap(),
            -0.596_347_362_323_194_1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            ei_correction_term(0.3).unwrap(),
            -1.222_535_605_080_585_6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            ei_correction_term(50.0).unwrap(),
            -0.019_615_109_930_114_87,
            max_relative = 1e-12
        );
        // u = 1e-8: series oracle value, tolerance 1e-6
        assert_relative_eq!(
            ei_correction_term(1e-8).unwrap(),
            -17.843_465_267_485_484,
            max_relative = 1e-6
        );
    }

    #[test]
    fn ei_correction_asymptote() {
        // u → ∞: u·exp(u)·Ei(−u) → −1
        for &u in &[1e3, 1e6, 1e9, 1e12] {
            let v = ei_correction_term(u).unwrap();
            assert!((-1.0 / u..0.0).contains(&v));
            assert_relative_eq!(u * v, -1.0, max_relative = 2.0 / u);
        }
        // no overflow anywhere on the huge end
        assert!(ei_correction_term(1e300).unwrap().is_finite());
    }

    #[test]
    fn ei_correction_bracket() {
        for i in 0..80 {
            let u = 1e-6 * 10f64.powf(i as f64 * 12.0 / 79.0);
            let v = ei_correction_term(u).unwrap();
            assert!(-1.0 / u < v && v < -1.0 / (1.0 + u), "bracket failed at u={u}");
        }
    }

    #[test]
    fn error_estimates_within_target() {
        for &(a, x) in &[(0.3, 1.5), (1.0, 2.0), (5.0, 0.5), (0.01, 0.9), (20.0, 35.0)] {
            let sv = upper_incomplete_gamma_full(a, x).unwrap();
            assert!(sv.abs_err_estimate <= 1e-12 * sv.value.abs().max(1.0));
        }
        for &x in &[0.05, 0.5, 1.0, 5.0, 50.0] {
            let sv = expint_ei_neg_full(x).unwrap();
            assert!(sv.abs_err_estimate <= 1e-12 * sv.value.abs().max(1.0));
        }
    }
}
