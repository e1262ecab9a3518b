//! Randomized check of the algebraic identities behind the state model.

use anyhow::Result;
use gaussfrust::gaussian::{generator_len, satisfies_energy_budget, unitarity_residual};
use gaussfrust::linalg::max_abs_diff;
use gaussfrust::{
    build_auxiliary_matrices, build_pure_cm, build_uniform_squeezing_cm, check_purity_condition,
    det_second_order, enumerate_bipartitions, mode_energy, subsystem_purity,
    unitary_from_generator, z_objective, EnergyBudget, SqueezingSpectrum, SymplecticOrthogonal,
    SystemShape, Tolerances, UnitaryMatrix,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Failure;
use crate::output::Table;

/// Accumulated outcome of one identity over the samples of one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckStat {
    pub name: &'static str,
    pub n: usize,
    pub samples: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckStat {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<CheckStat>,
    /// `Some(rejected)` when the corrupted-state control was run.
    pub negative_control: Option<bool>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckStat::passed) && self.negative_control != Some(false)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "check",
            "n",
            "samples",
            "failures",
            "worst_residual",
            "tolerance",
            "verdict",
        ]);
        for c in &self.checks {
            t.push(vec![
                c.name.into(),
                c.n.into(),
                c.samples.into(),
                c.failures.into(),
                c.worst.into(),
                c.tolerance.into(),
                c.passed().into(),
            ]);
        }
        if let Some(rejected) = self.negative_control {
            t.push(vec![
                "negative_control".into(),
                4usize.into(),
                1usize.into(),
                usize::from(!rejected).into(),
                f64::NAN.into(),
                CORRUPTION.into(),
                rejected.into(),
            ]);
        }
        t
    }

    pub fn failure(&self) -> Option<Failure> {
        if self.passed() {
            return None;
        }
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| format!("{} (n = {}, {} of {})", c.name, c.n, c.failures, c.samples))
            .chain(
                (self.negative_control == Some(false))
                    .then(|| "negative control not rejected".to_string()),
            )
            .collect();
        Some(Failure::new(
            crate::error::ExitKind::InvariantFailure,
            format!("invariant checks failed: {}", failed.join(", ")),
        ))
    }
}

/// Size of the entry perturbation in the negative control.
pub const CORRUPTION: f64 = 1e-3;

struct Recorder {
    stats: Vec<CheckStat>,
    n: usize,
}

impl Recorder {
    fn record(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        let stat = match self.stats.iter_mut().find(|s| s.name == name) {
            Some(s) => s,
            None => {
                self.stats.push(CheckStat {
                    name,
                    n: self.n,
                    samples: 0,
                    failures: 0,
                    worst: 0.0,
                    tolerance,
                });
                self.stats.last_mut().unwrap()
            }
        };
        stat.samples += 1;
        if !(residual <= tolerance) {
            stat.failures += 1;
        }
        if !(residual <= stat.worst) {
            stat.worst = residual;
        }
    }
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<UnitaryMatrix> {
    let p: Vec<f64> = (0..generator_len(n))
        .map(|_| rng.random_range(-1.5..1.5))
        .collect();
    Ok(unitary_from_generator(n, &p)?)
}

/// `|ratio − 8|` for the remainder of the second-order determinant
/// expansion at `ε` and `ε/2`, on a random traceless symmetric 3×3 matrix
/// of unit spectral norm.
fn cubic_remainder_deviation(rng: &mut ChaCha8Rng) -> Result<f64> {
    let dim = 3;
    let mut m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    m = (&m + m.transpose()) * 0.5;
    let shift = m.trace() / dim as f64;
    for i in 0..dim {
        m[(i, i)] -= shift;
    }
    let norm = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |a, x| a.max(x.abs()));
    m /= norm;
    let remainder = |e: f64| -> Result<f64> {
        let exact = (DMatrix::identity(dim, dim) + &m * e).determinant();
        Ok((exact - det_second_order(&m, e)?).abs())
    };
    let eps = 1e-2;
    Ok((remainder(eps)? / remainder(eps / 2.0)? - 8.0).abs())
}

fn check_sample(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<()> {
    let n = rec.n;
    let u = random_unitary(rng, n)?;
    rec.record("unitarity", unitarity_residual(u.entries()), tol.algebraic);

    let r = SymplecticOrthogonal::from_unitary(&u);
    rec.record("orthogonality", r.orthogonality_residual(), tol.algebraic);
    rec.record("symplecticity", r.symplectic_residual(), tol.algebraic);

    let logk: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = SqueezingSpectrum::from_log_factors(&logk)?;
    let v = build_pure_cm(&r, &k)?;
    let raw = {
        let mut t2 = DMatrix::zeros(2 * n, 2 * n);
        for (j, kj) in k.factors().iter().enumerate() {
            t2[(j, j)] = kj * kj;
            t2[(n + j, n + j)] = 1.0 / (kj * kj);
        }
        (r.matrix() * t2 * r.matrix().transpose()) * 0.5
    };
    rec.record(
        "symmetry",
        max_abs_diff(&raw, &raw.transpose()),
        tol.symmetry,
    );
    rec.record(
        "purity_condition",
        check_purity_condition(v.matrix())?.residual,
        tol.purity,
    );
    let det = v.matrix().clone().determinant() * 4f64.powi(n as i32);
    rec.record("determinant", (det - 1.0).abs(), tol.determinant);

    let aux = build_auxiliary_matrices(&u);
    let id = DMatrix::identity(2 * n, 2 * n);
    rec.record(
        "z_involution",
        max_abs_diff(&(&aux.z * &aux.z), &id),
        tol.algebraic,
    );
    rec.record(
        "w_projector",
        max_abs_diff(&(&aux.w * &aux.w), &aux.w),
        tol.algebraic,
    );
    rec.record(
        "w_complement",
        max_abs_diff(&(&aux.w + &aux.w_prime), &id),
        tol.algebraic,
    );
    rec.record(
        "z_difference",
        max_abs_diff(&aux.z, &(&aux.w - &aux.w_prime)),
        tol.algebraic,
    );
    rec.record(
        "traces",
        aux.z.trace().abs().max((aux.w.trace() - n as f64).abs()),
        tol.algebraic,
    );

    let shape = SystemShape::balanced(n)?;
    let mut duality: f64 = 0.0;
    for a in enumerate_bipartitions(shape) {
        let pa = subsystem_purity(&v, &a)?.value();
        let pb = subsystem_purity(&v, &a.complement())?.value();
        duality = duality.max((pa - pb).abs() / pa);
    }
    rec.record("purity_duality", duality, tol.purity);

    // Uniform family: the closed form against the symplectic construction,
    // and equal energy in every mode.
    let sq: f64 = rng.random_range(0.0..1.5);
    let uniform = build_uniform_squeezing_cm(&u, sq);
    let via_r = build_pure_cm(&r, &SqueezingSpectrum::uniform(n, sq)?)?;
    rec.record(
        "uniform_family",
        max_abs_diff(uniform.matrix(), via_r.matrix()),
        tol.algebraic,
    );
    let target = 0.5 * (2.0 * sq).cosh();
    let mut spread: f64 = 0.0;
    for j in 0..n {
        spread = spread.max((mode_energy(&uniform, j)? - target).abs());
    }
    rec.record("uniform_energy", spread, 1e-12);
    let budget = EnergyBudget::new(((2.0 * sq).cosh() - 1.0) / 2.0)?;
    rec.record(
        "energy_budget",
        if satisfies_energy_budget(&uniform, budget, 1e-12) {
            0.0
        } else {
            1.0
        },
        0.0,
    );

    let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let z0 = z_objective(&u, shape)?.value();
    let z1 = z_objective(&u.with_global_phase(theta), shape)?.value();
    rec.record("phase_invariance", (z0 - z1).abs(), tol.algebraic);

    rec.record("expansion_cubic", cubic_remainder_deviation(rng)?, 2.0);
    Ok(())
}

/// Perturb one entry of a valid covariance matrix and report whether the
/// purity check notices.
pub fn negative_control(seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(&mut rng, 4)?;
    let mut v = build_uniform_squeezing_cm(&u, 0.5).into_matrix();
    v[(0, 1)] += CORRUPTION;
    Ok(!check_purity_condition(&v)?.pure)
}

/// Run every identity on `samples` random instances for each `n`.
pub fn run(ns: &[usize], samples: usize, seed: u64, self_test: bool) -> Result<InvariantReport> {
    if samples == 0 {
        return Err(Failure::invalid("samples must be at least 1").into());
    }
    if let Some(n) = ns.iter().find(|n| **n < 2) {
        return Err(Failure::invalid(format!("invariants need n >= 2, got {n}")).into());
    }
    let tol = Tolerances::default();
    let mut checks = Vec::new();
    for &n in ns {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        let mut rec = Recorder {
            stats: Vec::new(),
            n,
        };
        for _ in 0..samples {
            check_sample(&mut rec, &mut rng, &tol)?;
        }
        checks.extend(rec.stats);
    }
    let negative_control = if self_test {
        Some(negative_control(seed)?)
    } else {
        None
    };
    Ok(InvariantReport {
        checks,
        negative_control,
    })
}
