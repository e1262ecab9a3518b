//! Seeded multi-start minimization over the `U(n)` chart.
//!
//! Each restart draws its starting point from its own ChaCha8 stream
//! (`seed`, stream = restart index), so results depend only on the
//! configuration and not on how restarts are scheduled across workers.

pub mod lbfgs;
pub mod nelder_mead;
mod problems;

pub use problems::{
    compute_alpha_tilde, compute_beta, compute_chi_min, estimate_alpha, fit_origin_slope, ChiMode,
    SlopeEstimate, DEFAULT_ALPHA_GRID,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::CostValue;

/// Local search used inside each restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Derivative-free simplex search.
    NelderMead,
    /// Quasi-Newton with exact chart gradients.
    Lbfgs,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" | "simplex" => Ok(Backend::NelderMead),
            "lbfgs" => Ok(Backend::Lbfgs),
            other => Err(Error::InvalidArgument(format!("unknown backend '{other}'"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::NelderMead => "nelder-mead",
            Backend::Lbfgs => "lbfgs",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptConfig {
    pub restarts: usize,
    /// Per local search (per stage for staged problems).
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    /// Starting coordinates are uniform in `[−init_scale, init_scale]`.
    pub init_scale: f64,
    pub penalty_weight: f64,
    pub backend: Backend,
    /// Worker threads; `0` lets rayon decide.
    pub jobs: usize,
    /// Intermediate budgets `N` visited before high-energy targets.
    pub energy_ladder: Vec<f64>,
    /// Perturb-and-reminimize steps after the last stage of `β` and of
    /// `χ^min` searches that climb at least one ladder rung; a hop is kept
    /// only if it lowers the cost.
    pub hops: usize,
    /// Half-width of the uniform perturbation applied per hop.
    pub hop_scale: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 20_000,
            convergence_tol: 1e-10,
            seed: 1,
            init_scale: 1.0,
            penalty_weight: 1e6,
            backend: Backend::Lbfgs,
            jobs: 1,
            energy_ladder: vec![0.3, 3.0],
            hops: 8,
            hop_scale: 0.1,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} must be positive")));
        if self.restarts == 0 {
            return bad("restarts");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations");
        }
        if self.jobs == 0 {
            return bad("jobs");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol");
        }
        if !(self.init_scale > 0.0) {
            return bad("init_scale");
        }
        if !(self.penalty_weight > 0.0) {
            return bad("penalty_weight");
        }
        if !(self.hop_scale > 0.0) {
            return bad("hop_scale");
        }
        if self
            .energy_ladder
            .iter()
            .any(|n| !(*n > 0.0) || !n.is_finite())
        {
            return bad("energy ladder entries");
        }
        Ok(())
    }

    /// Deterministic generator for one restart.
    pub fn restart_rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        rng
    }

    /// Starting point for one restart.
    pub fn initial_point(&self, restart: usize, dim: usize) -> Vec<f64> {
        uniform_point(&mut self.restart_rng(restart), dim, self.init_scale)
    }

    pub fn lbfgs_options(&self) -> lbfgs::LbfgsOptions {
        lbfgs::LbfgsOptions {
            max_iterations: self.max_iterations,
            tol: self.convergence_tol,
            grad_tol: 1e-9,
            stall_grad_tol: 1e-6,
            stall_steps: 10,
            memory: 12,
        }
    }

    pub fn nelder_mead_options(&self) -> nelder_mead::NelderMeadOptions {
        nelder_mead::NelderMeadOptions {
            max_iterations: self.max_iterations,
            tol: self.convergence_tol,
            step: 0.25 * self.init_scale,
            rebuilds: 3,
        }
    }
}

/// `dim` values uniform in `[−half_width, half_width]`.
pub fn uniform_point<R: Rng>(rng: &mut R, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_value: CostValue,
    pub best_params: Vec<f64>,
    pub restart_index: usize,
    /// Iterations of the winning restart.
    pub iterations_used: usize,
    /// Whether the winning restart met its convergence test.
    pub converged: bool,
    pub per_restart_values: Vec<f64>,
    pub converged_restarts: usize,
}

impl OptResult {
    pub fn value(&self) -> f64 {
        self.best_value.value()
    }

    pub fn converged_fraction(&self) -> f64 {
        self.converged_restarts as f64 / self.per_restart_values.len() as f64
    }

    /// Multiply every reported value by `factor > 0`.
    pub(crate) fn scaled(mut self, factor: f64) -> Self {
        self.best_value =
            CostValue::new(self.best_value.value() * factor).expect("positive scaling");
        self.per_restart_values
            .iter_mut()
            .for_each(|v| *v *= factor);
        self
    }
}

/// Run `local(restart)` for every restart and keep the best; ties go to
/// the lowest restart index.
pub fn multistart_with<L>(config: &OptConfig, local: L) -> Result<OptResult>
where
    L: Fn(usize) -> Result<LocalResult> + Sync,
{
    config.validate()?;
    let run = || -> Vec<Result<LocalResult>> {
        if config.jobs == 1 {
            (0..config.restarts).map(&local).collect()
        } else {
            (0..config.restarts).into_par_iter().map(&local).collect()
        }
    };
    let outcomes = if config.jobs == 1 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(run)
    };
    let outcomes: Vec<LocalResult> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut best = 0;
    for (i, r) in outcomes.iter().enumerate() {
        if r.value < outcomes[best].value {
            best = i;
        }
    }
    let winner = &outcomes[best];
    Ok(OptResult {
        best_value: CostValue::new(winner.value)?,
        best_params: winner.x.clone(),
        restart_index: best,
        iterations_used: winner.iterations,
        converged: winner.converged,
        per_restart_values: outcomes.iter().map(|r| r.value).collect(),
        converged_restarts: outcomes.iter().filter(|r| r.converged).count(),
    })
}

/// Derivative-free multi-start minimization of a nonnegative objective
/// (which may return `+∞`), using the simplex backend.
pub fn multistart_minimize<F>(objective: F, dim: usize, config: &OptConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let opts = config.nelder_mead_options();
    multistart_with(config, |restart| {
        nelder_mead::minimize(&objective, config.initial_point(restart, dim), &opts)
    })
}

/// Multi-start minimization of a smooth objective returning its value and
/// writing its gradient, using L-BFGS.
pub fn multistart_minimize_smooth<F>(
    objective: F,
    dim: usize,
    config: &OptConfig,
) -> Result<OptResult>
where
    F: Fn(&[f64], &mut [f64]) -> f64 + Sync,
{
    let opts = config.lbfgs_options();
    multistart_with(config, |restart| {
        lbfgs::minimize(&objective, config.initial_point(restart, dim), &opts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> OptConfig {
        OptConfig {
            restarts: 6,
            ..OptConfig::default()
        }
    }

    #[test]
    fn convex_quadratic() {
        let x0 = [0.3, -0.7, 1.1, 0.0, -0.2];
        let f = |x: &[f64]| x.iter().zip(&x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let r = multistart_minimize(f, 5, &small_config()).unwrap();
        assert!(r.value() < 1e-8);
        assert_eq!(r.per_restart_values.len(), 6);
        let min = r
            .per_restart_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.value(), min);
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let f = |x: &[f64]| (x[0] * 3.0).sin().powi(2) + (x[1] - 0.5).powi(2) + 0.1 * x[0].powi(2);
        let c = small_config();
        let a = multistart_minimize(f, 2, &c).unwrap();
        let b = multistart_minimize(f, 2, &c).unwrap();
        assert_eq!(a, b);
        let double = OptConfig {
            restarts: 12,
            ..c.clone()
        };
        let d = multistart_minimize(f, 2, &double).unwrap();
        assert_eq!(&d.per_restart_values[..6], &a.per_restart_values[..]);
        assert!(d.value() <= a.value());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0] + 3.0 * (3.0 * x[0]).cos();
            g[1] = 2.0 * (x[1] + 1.0);
            x[0].powi(2) + (3.0 * x[0]).sin() + (x[1] + 1.0).powi(2) + 1.0
        };
        let one = multistart_minimize_smooth(f, 2, &small_config()).unwrap();
        let four = multistart_minimize_smooth(
            f,
            2,
            &OptConfig {
                jobs: 4,
                ..small_config()
            },
        )
        .unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn invalid_config_rejected() {
        let f = |_: &[f64]| 0.0;
        let c = OptConfig {
            restarts: 0,
            ..OptConfig::default()
        };
        assert!(multistart_minimize(f, 1, &c).is_err());
    }

    #[test]
    fn nan_objective_propagates() {
        let f = |_: &[f64]| f64::NAN;
        assert!(matches!(
            multistart_minimize(f, 2, &small_config()),
            Err(Error::Evaluation(_))
        ));
    }
}
