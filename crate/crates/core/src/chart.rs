//! Exponential chart `θ ↦ exp(iH(θ))` on `U(n)` and its exact pullback of
//! gradients.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::Result;
use crate::gaussian::{hermitian_from_generator, UnitaryMatrix};

/// Spectral data of one chart point, `H = Q Λ Q†`, `U = Q e^{iΛ} Q†`.
#[derive(Debug, Clone)]
pub struct ExpChart {
    n: usize,
    q: DMatrix<Complex64>,
    lambda: Vec<f64>,
    u: DMatrix<Complex64>,
}

impl ExpChart {
    pub fn new(n: usize, params: &[f64]) -> Result<Self> {
        let h = hermitian_from_generator(n, params)?;
        let eig = SymmetricEigen::new(h);
        let q = eig.eigenvectors;
        let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let mut qe = q.clone();
        for (j, l) in lambda.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, *l);
            qe.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
        let u = qe * q.adjoint();
        Ok(Self { n, q, lambda, u })
    }

    pub fn unitary(&self) -> UnitaryMatrix {
        UnitaryMatrix::from_trusted(self.u.clone())
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    /// Given `Γ = ∂F/∂X + i ∂F/∂Y` at `U = X + iY`, write `∂F/∂θ` into `grad`
    /// (length `n²`, same layout as the generator).
    pub fn pullback(&self, gamma: &DMatrix<Complex64>, grad: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(grad.len(), n * n);
        // dU = Q (Φ ∘ Q†(i dH)Q) Q†, Φ_jk = divided difference of exp at iλ.
        let mut g = self.q.adjoint() * gamma * &self.q;
        for j in 0..n {
            for k in 0..n {
                let half = 0.5 * (self.lambda[j] - self.lambda[k]);
                let sinc = if half.abs() < 1e-8 {
                    1.0 - half * half / 6.0
                } else {
                    half.sin() / half
                };
                let phi = Complex64::from_polar(sinc, 0.5 * (self.lambda[j] + self.lambda[k]));
                // −i · conj(Φ) ∘ Γ̃
                g[(j, k)] *= Complex64::new(0.0, -1.0) * phi.conj();
            }
        }
        let g = &self.q * g * self.q.adjoint();

        let m = n * (n - 1) / 2;
        for j in 0..n {
            grad[j] = g[(j, j)].re;
        }
        let mut idx = 0;
        for j in 0..n {
            for l in (j + 1)..n {
                // Hermitian part of G at (j, l), doubled for the paired entry.
                let h = 0.5 * (g[(j, l)] + g[(l, j)].conj());
                grad[n + idx] = 2.0 * h.re;
                grad[n + m + idx] = 2.0 * h.im;
                idx += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // F(U) = Σ c_jk·Re U_jk + d_jk·Im U_jk, so Γ = c + i d.
    fn linear_functional(u: &DMatrix<Complex64>, gamma: &DMatrix<Complex64>) -> f64 {
        u.iter()
            .zip(gamma.iter())
            .map(|(z, g)| z.re * g.re + z.im * g.im)
            .sum()
    }

    #[test]
    fn pullback_matches_central_differences() {
        let n = 4;
        let params: Vec<f64> = (0..n * n)
            .map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.31)
            .collect();
        let gamma = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new((i + 2 * j) as f64 * 0.1 - 0.3, (i * j) as f64 * 0.07 - 0.1)
        });
        let chart = ExpChart::new(n, &params).unwrap();
        let mut grad = vec![0.0; n * n];
        chart.pullback(&gamma, &mut grad);

        let h = 1e-6;
        for k in 0..n * n {
            let mut p = params.clone();
            p[k] += h;
            let fp = linear_functional(ExpChart::new(n, &p).unwrap().entries(), &gamma);
            p[k] -= 2.0 * h;
            let fm = linear_functional(ExpChart::new(n, &p).unwrap().entries(), &gamma);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - grad[k]).abs() < 1e-7,
                "param {k}: fd {fd} vs analytic {}",
                grad[k]
            );
        }
    }

    #[test]
    fn pullback_with_degenerate_spectrum() {
        // H = 0 has a fully degenerate spectrum.
        let n = 3;
        let params = vec![0.0; n * n];
        let gamma = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(i as f64 - j as f64, 0.5 * (i + j) as f64)
        });
        let chart = ExpChart::new(n, &params).unwrap();
        let mut grad = vec![0.0; n * n];
        chart.pullback(&gamma, &mut grad);
        let h = 1e-6;
        for k in 0..n * n {
            let mut p = params.clone();
            p[k] = h;
            let fp = linear_functional(ExpChart::new(n, &p).unwrap().entries(), &gamma);
            p[k] = -h;
            let fm = linear_functional(ExpChart::new(n, &p).unwrap().entries(), &gamma);
            assert!(((fp - fm) / (2.0 * h) - grad[k]).abs() < 1e-7);
        }
    }
}
