//! Deterministic derivative-free optimization over low-dimensional boxes.
//!
//! The bounds expose sup/inf problems in one to three parameters whose
//! objectives mix Γ and Ei compositions with log-scale sensitivity, so the
//! optimizer is a nested grid refinement: evaluate a full grid, recenter a
//! shrunken box on the best point (clipped to the original box), repeat.
//! Ties break to the lowest multi-index, which together with the fixed
//! evaluation order makes every result bit-reproducible.

use std::fmt;

/// Per-dimension grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// Whether the best value is the largest or the smallest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Grid points per dimension in every round (≥ 8).
    pub coarse_points_per_dim: usize,
    /// Number of refinement rounds (≥ 1).
    pub refinement_rounds: usize,
    /// Box-width multiplier applied between rounds, in (0, 1).
    pub shrink_factor: f64,
    /// Per-dimension scale; missing entries default to Linear.
    pub scales: Vec<Scale>,
    /// Early-stop threshold on the per-round improvement, in objective units.
    pub abs_tol: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            coarse_points_per_dim: 24,
            refinement_rounds: 4,
            shrink_factor: 0.25,
            scales: Vec::new(),
            abs_tol: 1e-6,
            max_evals: 1_000_000,
        }
    }
}

impl SearchConfig {
    /// Convenience constructor with every dimension on a log grid.
    pub fn log_scaled(dims: usize) -> Self {
        Self {
            scales: vec![Scale::Log; dims],
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub arg: Vec<f64>,
    pub value: f64,
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    /// The planned evaluation count exceeds `max_evals`.
    BudgetExceeded { planned: u64, budget: u64 },
    /// No grid point produced a finite objective value.
    AllNonFinite,
    /// Malformed box or configuration.
    InvalidInput(String),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BudgetExceeded { planned, budget } => {
                write!(f, "search would need {planned} evaluations, budget is {budget}")
            }
            Self::AllNonFinite => write!(f, "objective was non-finite on the entire grid"),
            Self::InvalidInput(msg) => write!(f, "invalid search input: {msg}"),
        }
    }
}

impl std::error::Error for SearchError {}

/// Optimizes `objective` over the Cartesian box by nested grid refinement.
///
/// Non-finite objective values are treated as worst-possible and never win;
/// the returned argument always lies inside the original box.
pub fn optimize_box<F>(
    objective: F,
    bounds: &[(f64, f64)],
    direction: Direction,
    cfg: &SearchConfig,
) -> Result<SearchResult, SearchError>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.len();
    if dim == 0 || dim > 3 {
        return Err(SearchError::InvalidInput(format!(
            "box must have 1..=3 dimensions, got {dim}"
        )));
    }
    if cfg.coarse_points_per_dim < 8 {
        return Err(SearchError::InvalidInput(
            "coarse_points_per_dim must be >= 8".into(),
        ));
    }
    if cfg.refinement_rounds < 1 {
        return Err(SearchError::InvalidInput("refinement_rounds must be >= 1".into()));
    }
    if !(cfg.shrink_factor > 0.0 && cfg.shrink_factor < 1.0) {
        return Err(SearchError::InvalidInput("shrink_factor must lie in (0, 1)".into()));
    }
    let n = cfg.coarse_points_per_dim;
    let planned = (n as u64).pow(dim as u32) * cfg.refinement_rounds as u64;
    if planned > cfg.max_evals {
        return Err(SearchError::BudgetExceeded {
            planned,
            budget: cfg.max_evals,
        });
    }

    // Work in scaled coordinates: identity for Linear, ln for Log.
    let scale_of = |d: usize| cfg.scales.get(d).copied().unwrap_or(Scale::Linear);
    let mut full = Vec::with_capacity(dim);
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SearchError::InvalidInput(format!(
                "dimension {d}: bounds ({lo}, {hi}) must be finite with lo < hi"
            )));
        }
        match scale_of(d) {
            Scale::Linear => full.push((lo, hi)),
            Scale::Log => {
                if lo <= 0.0 {
                    return Err(SearchError::InvalidInput(format!(
                        "dimension {d}: log scale requires positive bounds"
                    )));
                }
                full.push((lo.ln(), hi.ln()));
            }
        }
    }
    let to_natural = |d: usize, t: f64| match scale_of(d) {
        Scale::Linear => t,
        Scale::Log => t.exp(),
    };

    let better = |candidate: f64, incumbent: f64| match direction {
        Direction::Minimize => candidate < incumbent,
        Direction::Maximize => candidate > incumbent,
    };

    let mut current = full.clone();
    let mut best_t: Option<Vec<f64>> = None;
    let mut best_v = match direction {
        Direction::Minimize => f64::INFINITY,
        Direction::Maximize => f64::NEG_INFINITY,
    };
    let mut evals = 0u64;
    let mut point_t = vec![0.0f64; dim];
    let mut point_x = vec![0.0f64; dim];

    for round in 0..cfg.refinement_rounds {
        let round_start_best = best_v;
        let mut index = vec![0usize; dim];
        'grid: loop {
            for d in 0..dim {
                let (lo, hi) = current[d];
                let t = if n == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * index[d] as f64 / (n - 1) as f64
                };
                point_t[d] = t;
                point_x[d] = to_natural(d, t);
            }
            let v = objective(&point_x);
            evals += 1;
            if v.is_finite() && better(v, best_v) {
                best_v = v;
                best_t = Some(point_t.clone());
            }
            // lexicographic advance, last dimension fastest
            let mut d = dim;
            loop {
                if d == 0 {
                    break 'grid;
                }
                d -= 1;
                index[d] += 1;
                if index[d] < n {
                    break;
                }
                index[d] = 0;
            }
        }

        let Some(center) = best_t.as_ref() else {
            return Err(SearchError::AllNonFinite);
        };
        if round + 1 == cfg.refinement_rounds {
            break;
        }
        // early stop once a full round no longer moves the objective
        if round > 0 && (best_v - round_start_best).abs() < cfg.abs_tol {
            break;
        }
        for d in 0..dim {
            let half = 0.5 * cfg.shrink_factor * (current[d].1 - current[d].0);
            let lo = (center[d] - half).max(full[d].0);
            let hi = (center[d] + half).min(full[d].1);
            current[d] = (lo, hi);
        }
    }

    let best_t = best_t.ok_or(SearchError::AllNonFinite)?;
    let arg: Vec<f64> = (0..dim)
        .map(|d| {
            let x = to_natural(d, best_t[d]);
            x.clamp(bounds[d].0, bounds[d].1)
        })
        .collect();
    Ok(SearchResult {
        arg,
        value: best_v,
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let cfg = SearchConfig::default();
        let r = optimize_box(|x| (x[0] - 0.3) * (x[0] - 0.3), &[(0.0, 1.0)], Direction::Minimize, &cfg)
            .unwrap();
        assert!((r.arg[0] - 0.3).abs() < 1e-4);
        assert!(r.value < 1e-7);
    }

    #[test]
    fn balance_structure() {
        // max over (0,1) of min(log x, log(1−x)) sits at 1/2
        let cfg = SearchConfig {
            refinement_rounds: 8,
            ..SearchConfig::default()
        };
        let r = optimize_box(
            |x| x[0].ln().min((1.0 - x[0]).ln()),
            &[(1e-9, 1.0 - 1e-9)],
            Direction::Maximize,
            &cfg,
        )
        .unwrap();
        assert!((r.arg[0] - 0.5).abs() < 1e-3);
        assert!((r.value - 0.5f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn three_dim_known_optimum() {
        let c = [0.2, 0.5, 0.8];
        let cfg = SearchConfig {
            refinement_rounds: 6,
            ..SearchConfig::default()
        };
        let r = optimize_box(
            |x| -(0..3).map(|i| (x[i] - c[i]) * (x[i] - c[i])).sum::<f64>(),
            &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            Direction::Maximize,
            &cfg,
        )
        .unwrap();
        for i in 0..3 {
            assert!((r.arg[i] - c[i]).abs() < 1e-3, "coordinate {i}: {}", r.arg[i]);
        }
    }

    #[test]
    fn deterministic_and_in_box() {
        let cfg = SearchConfig::log_scaled(2);
        let f = |x: &[f64]| (x[0].ln() + 2.0).powi(2) + (x[1].ln() - 1.0).powi(2);
        let bounds = [(1e-6, 1e3), (1e-6, 1e3)];
        let a = optimize_box(f, &bounds, Direction::Minimize, &cfg).unwrap();
        let b = optimize_box(f, &bounds, Direction::Minimize, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.arg, b.arg);
        assert_eq!(a.evals, b.evals);
        for (x, &(lo, hi)) in a.arg.iter().zip(&bounds) {
            assert!(*x >= lo && *x <= hi);
        }
    }

    #[test]
    fn monotone_improvement_across_rounds() {
        let f = |x: &[f64]| (x[0] - 0.77).abs();
        let mut prev = f64::INFINITY;
        for rounds in 1..=6 {
            let cfg = SearchConfig {
                refinement_rounds: rounds,
                abs_tol: 0.0,
                ..SearchConfig::default()
            };
            let r = optimize_box(f, &[(0.0, 1.0)], Direction::Minimize, &cfg).unwrap();
            assert!(r.value <= prev + 1e-15);
            prev = r.value;
        }
    }

    #[test]
    fn non_finite_handling() {
        // −∞ at the boundary is tolerated
        let r = optimize_box(
            |x| x[0].ln().min((1.0 - x[0]).ln()),
            &[(0.0, 1.0)],
            Direction::Maximize,
            &SearchConfig::default(),
        )
        .unwrap();
        assert!(r.value.is_finite());

        let err = optimize_box(
            |_| f64::NAN,
            &[(0.0, 1.0)],
            Direction::Minimize,
            &SearchConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, SearchError::AllNonFinite);
    }

    #[test]
    fn budget_and_input_validation() {
        let cfg = SearchConfig {
            max_evals: 10,
            ..SearchConfig::default()
        };
        assert!(matches!(
            optimize_box(|x| x[0], &[(0.0, 1.0)], Direction::Minimize, &cfg),
            Err(SearchError::BudgetExceeded { .. })
        ));
        assert!(optimize_box(
            |x| x[0],
            &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            Direction::Minimize,
            &SearchConfig::default()
        )
        .is_err());
        assert!(optimize_box(
            |x| x[0],
            &[(-1.0, 1.0)],
            Direction::Minimize,
            &SearchConfig::log_scaled(1)
        )
        .is_err());
        assert!(optimize_box(|x| x[0], &[(2.0, 1.0)], Direction::Minimize, &SearchConfig::default()).is_err());
    }
}
