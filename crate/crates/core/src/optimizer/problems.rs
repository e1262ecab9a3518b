//! The concrete minimizations: slope bound `α̃`, plateau bound `β`,
//! `χ^min(N)` and the fitted low-energy slope `α`.
//!
//! High-energy landscapes are rugged, so each restart of `β` and of
//! `χ^min(N)` climbs the configured energy ladder: it first minimizes `χ`
//! of the saturated uniform family at each rung below the target budget,
//! warm-starting every stage from the previous minimizer.

use rand::Rng;

use super::{
    lbfgs, multistart_with, nelder_mead, uniform_point, Backend, LocalResult, OptConfig, OptResult,
};
use crate::error::{Error, Result};
use crate::gaussian::{generator_len, EnergyBudget, SystemShape};
use crate::landscape::{CostKind, Landscape};

/// `{0.002, 0.004, …, 0.02}`.
pub const DEFAULT_ALPHA_GRID: [f64; 10] = [
    0.002, 0.004, 0.006, 0.008, 0.010, 0.012, 0.014, 0.016, 0.018, 0.020,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChiMode {
    /// Uniform squeezing `K = e^r I` with `cosh(2r) = 2N + 1`.
    Restricted,
    /// Free per-mode squeezing under a quadratic energy penalty.
    General,
}

impl std::str::FromStr for ChiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(ChiMode::Restricted),
            "general" => Ok(ChiMode::General),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for ChiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChiMode::Restricted => "restricted",
            ChiMode::General => "general",
        })
    }
}

fn local_search(land: &Landscape, x0: Vec<f64>, config: &OptConfig) -> Result<LocalResult> {
    match config.backend {
        Backend::Lbfgs => {
            lbfgs::minimize(|x, g| land.value_grad(x, g), x0, &config.lbfgs_options())
        }
        Backend::NelderMead => {
            nelder_mead::minimize(|x| land.value(x), x0, &config.nelder_mead_options())
        }
    }
}

/// Stages of one restart: `climb` is run in order (each warm-started from
/// the previous minimizer), the last climb stage is then hopped `hops`
/// times, and finally `polish` stages refine the winner.
struct Plan {
    climb: Vec<Landscape>,
    hops: usize,
    polish: Vec<Landscape>,
}

impl Plan {
    fn new(climb: Vec<Landscape>, hops: usize) -> Self {
        Self {
            climb,
            hops,
            polish: Vec::new(),
        }
    }

    fn n(&self) -> usize {
        self.climb[0].shape().n()
    }
}

fn staged<R: Rng>(
    plan: &Plan,
    x0: Vec<f64>,
    config: &OptConfig,
    rng: &mut R,
) -> Result<LocalResult> {
    let mut x = x0;
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut last: Option<LocalResult> = None;
    for land in &plan.climb {
        let r = local_search(land, x, config)?;
        iterations += r.iterations;
        evaluations += r.evaluations;
        x = r.x.clone();
        last = Some(r);
    }
    let mut last = last.expect("at least one stage");
    let land = plan.climb.last().expect("at least one stage");
    for _ in 0..plan.hops {
        let kick = uniform_point(rng, last.x.len(), config.hop_scale);
        let start = last.x.iter().zip(&kick).map(|(a, b)| a + b).collect();
        let r = local_search(land, start, config)?;
        iterations += r.iterations;
        evaluations += r.evaluations;
        if r.value < last.value {
            last = r;
        }
    }
    let mut x = last.x.clone();
    for land in &plan.polish {
        // Entering the penalized stage appends the saturating log-squeezing.
        if let CostKind::ChiPenalized { budget, .. } = land.kind() {
            let n = land.shape().n();
            if x.len() == generator_len(n) {
                x.extend(std::iter::repeat_n(budget.saturating_squeezing(), n));
            }
        }
        let r = local_search(land, x, config)?;
        iterations += r.iterations;
        evaluations += r.evaluations;
        x = r.x.clone();
        last = r;
    }
    Ok(LocalResult {
        iterations,
        evaluations,
        ..last
    })
}

fn rungs(shape: SystemShape, config: &OptConfig, below: f64) -> Result<Vec<Landscape>> {
    let mut ladder: Vec<f64> = config
        .energy_ladder
        .iter()
        .copied()
        .filter(|n| *n < below)
        .collect();
    ladder.sort_by(f64::total_cmp);
    ladder
        .into_iter()
        .map(|n| {
            Ok(Landscape::new(
                shape,
                CostKind::ChiSaturated {
                    budget: EnergyBudget::new(n)?,
                },
            ))
        })
        .collect()
}

fn run_plan(plan: &Plan, config: &OptConfig) -> Result<OptResult> {
    let dim = generator_len(plan.n());
    multistart_with(config, |restart| {
        let mut rng = config.restart_rng(restart);
        let x0 = uniform_point(&mut rng, dim, config.init_scale);
        staged(plan, x0, config, &mut rng)
    })
}

/// `α̃ = min_U E[tr(Z_A²)]`.
pub fn compute_alpha_tilde(shape: SystemShape, config: &OptConfig) -> Result<OptResult> {
    run_plan(
        &Plan::new(vec![Landscape::new(shape, CostKind::ZTrace)], 0),
        config,
    )
}

/// `β = 2^{−n_A} · min_U E[det(W_A)^{−1/2}]`.
pub fn compute_beta(shape: SystemShape, config: &OptConfig) -> Result<OptResult> {
    let mut stages = rungs(shape, config, f64::INFINITY)?;
    stages.push(Landscape::new(shape, CostKind::w_determinant()));
    Ok(run_plan(&Plan::new(stages, config.hops), config)?.scaled(0.5f64.powi(shape.n_a() as i32)))
}

/// `χ^min(N)`, over the saturated uniform family or with free per-mode
/// squeezing. General-mode restarts start from the restricted minimizer of
/// the same restart.
pub fn compute_chi_min(
    shape: SystemShape,
    budget: EnergyBudget,
    mode: ChiMode,
    config: &OptConfig,
) -> Result<OptResult> {
    let mut stages = rungs(shape, config, budget.value())?;
    // Below the whole ladder the landscape is benign and hops are skipped.
    let hops = if stages.is_empty() { 0 } else { config.hops };
    stages.push(Landscape::new(shape, CostKind::ChiSaturated { budget }));
    let mut plan = Plan::new(stages, hops);
    if mode == ChiMode::General {
        // Penalty continuation: the stiff final weight is approached from
        // softer ones so the quasi-Newton model is not swamped.
        plan.polish = PENALTY_CONTINUATION
            .iter()
            .map(|f| {
                Landscape::new(
                    shape,
                    CostKind::ChiPenalized {
                        budget,
                        weight: config.penalty_weight * f,
                    },
                )
            })
            .collect();
    }
    run_plan(&plan, config)
}

const PENALTY_CONTINUATION: [f64; 3] = [1e-4, 1e-2, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `(N, χ^min(N))` per grid point.
    pub points: Vec<(f64, f64)>,
    pub converged_fraction: Vec<f64>,
    /// `false` if `χ^min` decreased anywhere along the (sorted) grid.
    pub monotone: bool,
}

/// Least-squares slope of `y = a·N` through the origin, with the RMS
/// residual.
pub fn fit_origin_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let rss: f64 = points.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    (slope, (rss / points.len() as f64).sqrt())
}

/// `α ≈ ∂χ^min/∂N` at small `N`, from `χ^min − 1` on `grid`.
pub fn estimate_alpha(
    shape: SystemShape,
    grid: &[f64],
    mode: ChiMode,
    config: &OptConfig,
) -> Result<SlopeEstimate> {
    if grid.is_empty() || grid.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::InvalidArgument(
            "slope grid must be nonempty and positive".into(),
        ));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    let mut converged_fraction = Vec::with_capacity(grid.len());
    for &n in &grid {
        let r = compute_chi_min(shape, EnergyBudget::new(n)?, mode, config)?;
        points.push((n, r.value()));
        converged_fraction.push(r.converged_fraction());
    }
    let shifted: Vec<(f64, f64)> = points.iter().map(|(n, c)| (*n, c - 1.0)).collect();
    let (slope, residual) = fit_origin_slope(&shifted);
    let monotone = points.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(SlopeEstimate {
        slope,
        residual,
        points,
        converged_fraction,
        monotone,
    })
}
