//! Cost functions over chart coordinates, with exact gradients.
//!
//! A point is `θ ∈ ℝ^{n²}` (the `U(n)` generator), followed in the general
//! mode by `n` log-squeezing factors `s_j` (`K = diag(e^{s_j})`). Values
//! agree with the matrix-level functions in [`crate::measures`]; this
//! module exists so the optimizer gets gradients and a tight inner loop.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bipartition::enumerate_bipartitions;
use crate::chart::ExpChart;
use crate::gaussian::{generator_len, EnergyBudget, SqueezingSpectrum, SystemShape, UnitaryMatrix};
use crate::linalg::{cholesky_inverse, cholesky_logdet};
use crate::measures::DEFAULT_DET_FLOOR;

/// Log-squeezing magnitude beyond which the penalized cost is `+∞`.
pub const MAX_LOG_SQUEEZING: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind {
    /// `E[tr(Z_A²)]`.
    ZTrace,
    /// `E[det(W_A)^{−1/2}]`, `+∞` once any `det(W_A) < floor`.
    WDeterminant { floor: f64 },
    /// `χ` of the uniform state with `cosh(2r) = 2N + 1`.
    ChiSaturated { budget: EnergyBudget },
    /// `χ` with free per-mode squeezing plus
    /// `weight · Σ_k max(0, E_k − N − ½)²`.
    ChiPenalized { budget: EnergyBudget, weight: f64 },
}

impl CostKind {
    pub fn w_determinant() -> Self {
        CostKind::WDeterminant {
            floor: DEFAULT_DET_FLOOR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Landscape {
    shape: SystemShape,
    kind: CostKind,
    subsets: Vec<Vec<usize>>,
}

struct Buffers {
    block: Vec<f64>,
    work: Vec<f64>,
    inv: Vec<f64>,
}

impl Landscape {
    pub fn new(shape: SystemShape, kind: CostKind) -> Self {
        let subsets = enumerate_bipartitions(shape)
            .iter()
            .map(|a| a.phase_space_indices())
            .collect();
        Self {
            shape,
            kind,
            subsets,
        }
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        let n = self.shape.n();
        match self.kind {
            CostKind::ChiPenalized { .. } => generator_len(n) + n,
            _ => generator_len(n),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.eval(x, None)
    }

    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.eval(x, Some(grad))
    }

    pub fn unitary(&self, x: &[f64]) -> UnitaryMatrix {
        let n = self.shape.n();
        ExpChart::new(n, &x[..generator_len(n)])
            .expect("chart coordinates sized by Landscape::dim")
            .unitary()
    }

    /// Squeezing of the state at `x`: free factors in the penalized mode,
    /// the saturating uniform `r` otherwise.
    pub fn squeezing(&self, x: &[f64]) -> Option<SqueezingSpectrum> {
        let n = self.shape.n();
        match self.kind {
            CostKind::ChiPenalized { .. } => {
                SqueezingSpectrum::from_log_factors(&x[generator_len(n)..]).ok()
            }
            CostKind::ChiSaturated { budget } => {
                SqueezingSpectrum::uniform(n, budget.saturating_squeezing()).ok()
            }
            _ => None,
        }
    }

    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let n = self.shape.n();
        let g_len = generator_len(n);
        assert_eq!(x.len(), self.dim(), "point has wrong dimension");
        let chart = ExpChart::new(n, &x[..g_len]).expect("generator length checked");
        let u = chart.entries();
        let dim = 2 * n;

        // M = [X; −Y], M′ = [Y; X]
        let m = DMatrix::from_fn(dim, n, |i, j| {
            if i < n {
                u[(i, j)].re
            } else {
                -u[(i - n, j)].im
            }
        });
        let mp = DMatrix::from_fn(dim, n, |i, j| {
            if i < n {
                u[(i, j)].im
            } else {
                u[(i - n, j)].re
            }
        });

        let log_k: Option<&[f64]> = match self.kind {
            CostKind::ChiPenalized { .. } => Some(&x[g_len..]),
            _ => None,
        };
        // e^{±2s} must stay representable with room for products.
        if log_k.is_some_and(|s| s.iter().any(|v| !(v.abs() <= MAX_LOG_SQUEEZING))) {
            if let Some(g) = grad {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            return f64::INFINITY;
        }

        let base = match self.kind {
            CostKind::ZTrace | CostKind::WDeterminant { .. } => &m * m.transpose(),
            CostKind::ChiSaturated { budget } => {
                let c = 2.0 * budget.value() + 1.0;
                let s = (c * c - 1.0).sqrt();
                let mut v = &m * m.transpose() * s;
                for i in 0..dim {
                    v[(i, i)] += 0.5 * (c - s);
                }
                v
            }
            CostKind::ChiPenalized { .. } => {
                let s = log_k.unwrap();
                let mk = DMatrix::from_fn(dim, n, |i, j| m[(i, j)] * (2.0 * s[j]).exp());
                let mpk = DMatrix::from_fn(dim, n, |i, j| mp[(i, j)] * (-2.0 * s[j]).exp());
                (mk * m.transpose() + mpk * mp.transpose()) * 0.5
            }
        };

        let want_grad = grad.is_some();
        let mut g_base = DMatrix::<f64>::zeros(dim, dim);
        let d = 2 * self.shape.n_a();
        let mut buf = Buffers {
            block: vec![0.0; d * d],
            work: vec![0.0; d * d],
            inv: vec![0.0; d * d],
        };
        let count = self.subsets.len() as f64;

        let (scale_log, log_floor) = match self.kind {
            CostKind::ChiSaturated { budget } | CostKind::ChiPenalized { budget, .. } => (
                self.shape.n_a() as f64 * budget.mode_energy_limit().ln(),
                f64::NEG_INFINITY,
            ),
            CostKind::WDeterminant { floor } => (0.0, floor.ln()),
            CostKind::ZTrace => (0.0, f64::NEG_INFINITY),
        };

        let mut sum = 0.0;
        for idx in &self.subsets {
            for (bi, &i) in idx.iter().enumerate() {
                for (bj, &j) in idx.iter().enumerate() {
                    buf.block[bi * d + bj] = base[(i, j)];
                }
            }
            match self.kind {
                CostKind::ZTrace => {
                    let mut t = 0.0;
                    for bi in 0..d {
                        for bj in 0..d {
                            let z = 2.0 * buf.block[bi * d + bj] - if bi == bj { 1.0 } else { 0.0 };
                            t += z * z;
                            if want_grad {
                                g_base[(idx[bi], idx[bj])] += 4.0 * z / count;
                            }
                        }
                    }
                    sum += t;
                }
                _ => {
                    let logdet = match cholesky_logdet(&mut buf.block, d) {
                        Some(ld) if ld >= log_floor => ld,
                        _ => {
                            if let Some(g) = grad {
                                g.iter_mut().for_each(|v| *v = 0.0);
                            }
                            return f64::INFINITY;
                        }
                    };
                    let term = (scale_log - 0.5 * logdet).exp();
                    sum += term;
                    if want_grad {
                        cholesky_inverse(&buf.block, d, &mut buf.work, &mut buf.inv);
                        let coeff = -0.5 * term / count;
                        for bi in 0..d {
                            for bj in 0..d {
                                g_base[(idx[bi], idx[bj])] += coeff * buf.inv[bi * d + bj];
                            }
                        }
                    }
                }
            }
        }
        let mut value = sum / count;

        if let CostKind::ChiPenalized { budget, weight } = self.kind {
            let limit = budget.mode_energy_limit();
            for k in 0..n {
                let excess = 0.5 * (base[(k, k)] + base[(n + k, n + k)]) - limit;
                if excess > 0.0 {
                    value += weight * excess * excess;
                    if want_grad {
                        g_base[(k, k)] += weight * excess;
                        g_base[(n + k, n + k)] += weight * excess;
                    }
                }
            }
        }

        let Some(grad) = grad else {
            return value;
        };

        // ∂F/∂M and ∂F/∂M′, then Γ = ∂F/∂X + i ∂F/∂Y.
        let (d_m, d_mp) = match self.kind {
            CostKind::ZTrace | CostKind::WDeterminant { .. } => (&g_base * &m * 2.0, None),
            CostKind::ChiSaturated { budget } => {
                let c = 2.0 * budget.value() + 1.0;
                let s = (c * c - 1.0).sqrt();
                (&g_base * &m * (2.0 * s), None)
            }
            CostKind::ChiPenalized { .. } => {
                let s = log_k.unwrap();
                let gm = &g_base * &m;
                let gmp = &g_base * &mp;
                for j in 0..n {
                    let k2 = (2.0 * s[j]).exp();
                    let a = m.column(j).dot(&gm.column(j));
                    let b = mp.column(j).dot(&gmp.column(j));
                    grad[g_len + j] = k2 * a - b / k2;
                }
                let gm = DMatrix::from_fn(dim, n, |i, j| gm[(i, j)] * (2.0 * s[j]).exp());
                let gmp = DMatrix::from_fn(dim, n, |i, j| gmp[(i, j)] * (-2.0 * s[j]).exp());
                (gm, Some(gmp))
            }
        };
        let gamma = DMatrix::from_fn(n, n, |i, j| {
            let mut gx = d_m[(i, j)];
            let mut gy = -d_m[(n + i, j)];
            if let Some(dp) = &d_mp {
                gx += dp[(n + i, j)];
                gy += dp[(i, j)];
            }
            Complex64::new(gx, gy)
        });
        chart.pullback(&gamma, &mut grad[..g_len]);
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{build_pure_cm, build_uniform_squeezing_cm, SymplecticOrthogonal};
    use crate::measures::{chi, w_objective, z_objective};

    fn point(dim: usize, salt: usize) -> Vec<f64> {
        (0..dim)
            .map(|k| (((k + salt) * 7919 % 113) as f64 / 113.0 - 0.5) * 1.6)
            .collect()
    }

    fn all_kinds() -> Vec<CostKind> {
        vec![
            CostKind::ZTrace,
            CostKind::w_determinant(),
            CostKind::ChiSaturated {
                budget: EnergyBudget::new(0.7).unwrap(),
            },
            CostKind::ChiPenalized {
                budget: EnergyBudget::new(0.4).unwrap(),
                weight: 50.0,
            },
        ]
    }

    #[test]
    fn values_match_matrix_level_functions() {
        let shape = SystemShape::new(5, 2).unwrap();
        let x = point(25, 3);
        let u = crate::gaussian::unitary_from_generator(5, &x).unwrap();
        let z = Landscape::new(shape, CostKind::ZTrace).value(&x);
        assert!((z - z_objective(&u, shape).unwrap().value()).abs() < 1e-12);
        let w = Landscape::new(shape, CostKind::w_determinant()).value(&x);
        assert!((w - w_objective(&u, shape).unwrap().value()).abs() < 1e-10 * w);

        let budget = EnergyBudget::new(2.0).unwrap();
        let c = Landscape::new(shape, CostKind::ChiSaturated { budget }).value(&x);
        let v = build_uniform_squeezing_cm(&u, budget.saturating_squeezing());
        assert!((c - chi(&v, shape, budget).unwrap().value()).abs() < 1e-10 * c);

        // Feasible general point: zero penalty, plain χ.
        let mut xg = x.clone();
        xg.extend([0.1, -0.2, 0.05, 0.0, 0.15]);
        let general = Landscape::new(
            shape,
            CostKind::ChiPenalized {
                budget,
                weight: 1e6,
            },
        );
        let k = general.squeezing(&xg).unwrap();
        let v = build_pure_cm(&SymplecticOrthogonal::from_unitary(&u), &k).unwrap();
        assert!((general.value(&xg) - chi(&v, shape, budget).unwrap().value()).abs() < 1e-10);
    }

    #[test]
    fn gradients_match_central_differences() {
        for (n, k) in [(3, 1), (4, 2), (5, 2)] {
            let shape = SystemShape::new(n, k).unwrap();
            for kind in all_kinds() {
                let land = Landscape::new(shape, kind);
                let mut x = point(land.dim(), n + 1);
                if let CostKind::ChiPenalized { .. } = kind {
                    // Large squeezing so the penalty is active.
                    for s in &mut x[n * n..] {
                        *s = 0.6 + 0.1 * *s;
                    }
                }
                let mut grad = vec![0.0; land.dim()];
                let f0 = land.value_grad(&x, &mut grad);
                assert!(f0.is_finite());
                let h = 1e-6;
                for i in 0..land.dim() {
                    let mut xp = x.clone();
                    xp[i] += h;
                    let mut xm = x.clone();
                    xm[i] -= h;
                    let fd = (land.value(&xp) - land.value(&xm)) / (2.0 * h);
                    let tol = 1e-6 * (1.0 + fd.abs());
                    assert!(
                        (fd - grad[i]).abs() < tol,
                        "{kind:?} {shape} coord {i}: fd {fd} analytic {}",
                        grad[i]
                    );
                }
            }
        }
    }

    #[test]
    fn singular_w_is_infinite() {
        let shape = SystemShape::new(4, 2).unwrap();
        let land = Landscape::new(shape, CostKind::w_determinant());
        let mut grad = vec![1.0; 16];
        assert_eq!(land.value_grad(&[0.0; 16], &mut grad), f64::INFINITY);
        assert!(grad.iter().all(|g| *g == 0.0));
    }
}
