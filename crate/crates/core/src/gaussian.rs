//! Pure zero-mean Gaussian states of `n` bosonic modes.
//!
//! Canonical variables are ordered `(q_1, …, q_n, p_1, …, p_n)` and the
//! symplectic form is `Ω = [[0, I], [−I, 0]]`. A pure covariance matrix is
//! written `V = ½ R T² Rᵀ` with `R = [[X, Y], [−Y, X]]` built from a
//! unitary `U = X + iY` and `T = diag(K, K⁻¹)` for a positive diagonal `K`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chart::ExpChart;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, max_abs_diff, spd_logdet};

/// Number of modes and subsystem size, with `1 <= n_A <= n / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemShape {
    n: usize,
    n_a: usize,
}

impl SystemShape {
    pub fn new(n: usize, n_a: usize) -> Result<Self> {
        if n_a == 0 || 2 * n_a > n {
            return Err(Error::Shape { n, n_a });
        }
        Ok(Self { n, n_a })
    }

    /// Balanced bipartitions, `n_A = floor(n / 2)`.
    pub fn balanced(n: usize) -> Result<Self> {
        Self::new(n, n / 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }
}

impl std::fmt::Display for SystemShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n, self.n_a)
    }
}

/// Mean number of excitations per mode.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EnergyBudget(f64);

impl EnergyBudget {
    pub fn new(mean_excitations: f64) -> Result<Self> {
        if !(mean_excitations >= 0.0) || !mean_excitations.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "energy budget must be finite and nonnegative, got {mean_excitations}"
            )));
        }
        Ok(Self(mean_excitations))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Largest admissible mode energy, `N + ½`.
    pub fn mode_energy_limit(&self) -> f64 {
        self.0 + 0.5
    }

    /// Squeezing parameter that saturates the budget in the uniform
    /// family, `cosh(2r) = 2N + 1`.
    pub fn saturating_squeezing(&self) -> f64 {
        0.5 * (2.0 * self.0 + 1.0).acosh()
    }
}

/// Numerical tolerances used by validating constructors and checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities (unitarity, orthogonality, projector relations).
    pub algebraic: f64,
    /// `‖(2VΩ)² + I‖_max`.
    pub purity: f64,
    /// Relative deviation of `det(V)·4ⁿ` from one.
    pub determinant: f64,
    /// Absolute asymmetry of a covariance matrix.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            purity: 1e-8,
            determinant: 1e-8,
            symmetry: 1e-12,
        }
    }
}

/// `Ω = [[0, I_n], [−I_n, 0]]`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// An `n x n` complex unitary `U = X + iY`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(entries, Tolerances::default().algebraic)
    }

    pub fn with_tolerance(entries: DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "unitary must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let residual = unitarity_residual(&entries);
        if residual > tol {
            return Err(Error::InvariantViolation {
                what: "U†U = UU† = I",
                residual,
                tolerance: tol,
            });
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_trusted(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Real part `X`.
    pub fn real(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    /// Imaginary part `Y`.
    pub fn imag(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }

    /// Multiply by a global phase `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self::from_trusted(self.entries.map(|z| z * phase))
    }
}

/// `max(‖U†U − I‖_max, ‖UU† − I‖_max)`.
pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let a = u.adjoint() * u - &eye;
    let b = u * u.adjoint() - &eye;
    a.iter()
        .chain(b.iter())
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Number of real generator parameters for `U(n)`.
pub fn generator_len(n: usize) -> usize {
    n * n
}

/// Hermitian generator from `n²` reals: `n` diagonal entries, then the real
/// parts and then the imaginary parts of the strict upper triangle in
/// row-major order.
pub fn hermitian_from_generator(n: usize, params: &[f64]) -> Result<DMatrix<Complex64>> {
    if params.len() != generator_len(n) {
        return Err(Error::Dimension(format!(
            "U({n}) generator needs {} parameters, got {}",
            generator_len(n),
            params.len()
        )));
    }
    let m = n * (n - 1) / 2;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = Complex64::new(params[j], 0.0);
    }
    let mut k = 0;
    for j in 0..n {
        for l in (j + 1)..n {
            let z = Complex64::new(params[n + k], params[n + m + k]);
            h[(j, l)] = z;
            h[(l, j)] = z.conj();
            k += 1;
        }
    }
    Ok(h)
}

/// `U = exp(iH)` for the Hermitian `H` encoded by `params`.
pub fn unitary_from_generator(n: usize, params: &[f64]) -> Result<UnitaryMatrix> {
    Ok(ExpChart::new(n, params)?.unitary())
}

/// `R = [[X, Y], [−Y, X]]`, orthogonal and symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOrthogonal {
    r: DMatrix<f64>,
}

impl SymplecticOrthogonal {
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let n = u.dim();
        let x = u.real();
        let y = u.imag();
        let mut r = DMatrix::zeros(2 * n, 2 * n);
        r.view_mut((0, 0), (n, n)).copy_from(&x);
        r.view_mut((0, n), (n, n)).copy_from(&y);
        r.view_mut((n, 0), (n, n)).copy_from(&(-&y));
        r.view_mut((n, n), (n, n)).copy_from(&x);
        Self { r }
    }

    pub fn modes(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `‖RᵀR − I‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let dim = self.r.nrows();
        max_abs_diff(
            &(self.r.transpose() * &self.r),
            &DMatrix::identity(dim, dim),
        )
    }

    /// `‖RΩRᵀ − Ω‖_max`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        max_abs_diff(&(&self.r * &omega * self.r.transpose()), &omega)
    }
}

/// Convenience wrapper for [`SymplecticOrthogonal::from_unitary`].
pub fn symplectic_orthogonal_from_unitary(u: &UnitaryMatrix) -> SymplecticOrthogonal {
    SymplecticOrthogonal::from_unitary(u)
}

/// Diagonal of `K`; strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum {
    k_diag: Vec<f64>,
    uniform_r: Option<f64>,
}

impl SqueezingSpectrum {
    pub fn new(k_diag: Vec<f64>) -> Result<Self> {
        if k_diag.is_empty() {
            return Err(Error::Dimension("empty squeezing spectrum".into()));
        }
        if let Some(&bad) = k_diag.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "squeezing factors must be finite and positive, got {bad}"
            )));
        }
        Ok(Self {
            k_diag,
            uniform_r: None,
        })
    }

    /// `K = diag(e^{s_1}, …, e^{s_n})`.
    pub fn from_log_factors(log_k: &[f64]) -> Result<Self> {
        Self::new(log_k.iter().map(|s| s.exp()).collect())
    }

    /// `K = e^r · I_n`.
    pub fn uniform(n: usize, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!("squeezing r = {r}")));
        }
        let mut s = Self::new(vec![r.exp(); n])?;
        s.uniform_r = Some(r);
        Ok(s)
    }

    pub fn factors(&self) -> &[f64] {
        &self.k_diag
    }

    pub fn uniform_r(&self) -> Option<f64> {
        self.uniform_r
    }

    pub fn modes(&self) -> usize {
        self.k_diag.len()
    }
}

/// Covariance matrix of a pure zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    v: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validate an externally supplied matrix: even dimension, symmetric,
    /// positive definite, pure, and `det V = 4⁻ⁿ`.
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(v, &Tolerances::default())
    }

    pub fn with_tolerances(v: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let purity = check_purity_condition_with(&v, tol.purity)?;
        let asym = max_abs_diff(&v, &v.transpose());
        if asym > tol.symmetry {
            return Err(Error::InvariantViolation {
                what: "V = Vᵀ",
                residual: asym,
                tolerance: tol.symmetry,
            });
        }
        let n = v.nrows() / 2;
        let logdet = spd_logdet(&v).ok_or_else(|| {
            Error::NumericalDomain("covariance matrix is not positive definite".into())
        })?;
        if !purity.pure {
            return Err(Error::InvariantViolation {
                what: "(2VΩ)² = −I",
                residual: purity.residual,
                tolerance: tol.purity,
            });
        }
        let det_dev = (logdet + (n as f64) * 4f64.ln()).exp_m1().abs();
        if det_dev > tol.determinant {
            return Err(Error::InvariantViolation {
                what: "det V = 4⁻ⁿ",
                residual: det_dev,
                tolerance: tol.determinant,
            });
        }
        Ok(Self { v })
    }

    pub(crate) fn from_trusted(mut v: DMatrix<f64>) -> Self {
        let vt = v.transpose();
        v += vt;
        v *= 0.5;
        Self { v }
    }

    /// The vacuum, `V = ½ I`.
    pub fn vacuum(n: usize) -> Self {
        Self {
            v: DMatrix::identity(2 * n, 2 * n) * 0.5,
        }
    }

    pub fn modes(&self) -> usize {
        self.v.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.v
    }
}

/// `V = ½ R T² Rᵀ` with `T = diag(K, K⁻¹)`.
pub fn build_pure_cm(r: &SymplecticOrthogonal, k: &SqueezingSpectrum) -> Result<CovarianceMatrix> {
    let n = r.modes();
    if k.modes() != n {
        return Err(Error::Dimension(format!(
            "R acts on {n} modes but K has {} entries",
            k.modes()
        )));
    }
    let mut t2 = DMatrix::zeros(2 * n, 2 * n);
    for (j, kj) in k.factors().iter().enumerate() {
        t2[(j, j)] = kj * kj;
        t2[(n + j, n + j)] = 1.0 / (kj * kj);
    }
    let rm = r.matrix();
    Ok(CovarianceMatrix::from_trusted(
        (rm * t2 * rm.transpose()) * 0.5,
    ))
}

/// Uniform-squeezing state `V = ½cosh(2r)·I + ½sinh(2r)·Z`.
pub fn build_uniform_squeezing_cm(u: &UnitaryMatrix, r: f64) -> CovarianceMatrix {
    let n = u.dim();
    let aux = build_auxiliary_matrices(u);
    let v = DMatrix::identity(2 * n, 2 * n) * (0.5 * (2.0 * r).cosh())
        + aux.z * (0.5 * (2.0 * r).sinh());
    CovarianceMatrix::from_trusted(v)
}

/// `Z`, `W` and `W′` for a unitary `U = X + iY`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryMatrices {
    pub z: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub w_prime: DMatrix<f64>,
}

/// `W = M Mᵀ` with `M = [X; −Y]`, `W′ = M′M′ᵀ` with `M′ = [Y; X]`, and
/// `Z = W − W′`.
pub fn build_auxiliary_matrices(u: &UnitaryMatrix) -> AuxiliaryMatrices {
    let n = u.dim();
    let x = u.real();
    let y = u.imag();
    let xxt = &x * x.transpose();
    let yyt = &y * y.transpose();
    let xyt = &x * y.transpose();
    let yxt = xyt.transpose();

    let blocks = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(b);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(d);
        m
    };
    let w = blocks(&xxt, &(-&xyt), &(-&yxt), &yyt);
    let w_prime = blocks(&yyt, &yxt, &xyt, &xxt);
    let z = blocks(
        &(&xxt - &yyt),
        &(-(&xyt + &yxt)),
        &(-(&yxt + &xyt)),
        &(&yyt - &xxt),
    );
    AuxiliaryMatrices { z, w, w_prime }
}

/// Mean energy of mode `k` (zero-based), `(V_kk + V_{n+k,n+k}) / 2`.
pub fn mode_energy(v: &CovarianceMatrix, k: usize) -> Result<f64> {
    let n = v.modes();
    if k >= n {
        return Err(Error::Dimension(format!(
            "mode index {k} out of range for {n} modes"
        )));
    }
    let m = v.matrix();
    Ok(0.5 * (m[(k, k)] + m[(n + k, n + k)]))
}

/// Whether every mode energy stays within `N + ½` (plus `slack`).
pub fn satisfies_energy_budget(v: &CovarianceMatrix, budget: EnergyBudget, slack: f64) -> bool {
    (0..v.modes())
        .all(|k| mode_energy(v, k).is_ok_and(|e| e <= budget.mode_energy_limit() + slack))
}

/// Outcome of the pure-state test `(2VΩ)² = −I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityCheck {
    pub pure: bool,
    pub residual: f64,
}

pub fn check_purity_condition(v: &DMatrix<f64>) -> Result<PurityCheck> {
    check_purity_condition_with(v, Tolerances::default().purity)
}

pub fn check_purity_condition_with(v: &DMatrix<f64>, tol: f64) -> Result<PurityCheck> {
    let dim = v.nrows();
    if dim != v.ncols() || !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::Dimension(format!(
            "covariance matrix must be square with even dimension, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    let a = v * symplectic_form(dim / 2) * 2.0;
    let residual = max_abs(&(&a * &a + DMatrix::identity(dim, dim)));
    Ok(PurityCheck {
        pure: residual < tol,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shape_validation() {
        assert!(SystemShape::new(4, 2).is_ok());
        assert!(SystemShape::new(5, 2).is_ok());
        assert!(SystemShape::new(4, 3).is_err());
        assert!(SystemShape::new(4, 0).is_err());
        assert_eq!(SystemShape::balanced(9).unwrap().n_a(), 4);
        assert!(EnergyBudget::new(-0.1).is_err());
        assert!(EnergyBudget::new(f64::NAN).is_err());
    }

    #[test]
    fn zero_generator_is_identity() {
        let u = unitary_from_generator(3, &[0.0; 9]).unwrap();
        assert!(max_abs_diff(&u.real(), &DMatrix::identity(3, 3)) < 1e-15);
        assert!(max_abs(&u.imag()) < 1e-15);
    }

    #[test]
    fn diagonal_generator_phase() {
        let mut p = vec![0.0; 4];
        p[0] = PI;
        let u = unitary_from_generator(2, &p).unwrap();
        let expected =
            DMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((u.entries() - expected).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn generator_length_checked() {
        assert!(matches!(
            unitary_from_generator(3, &[0.0; 8]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            UnitaryMatrix::new(m),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn r_from_identity_and_i() {
        let r = SymplecticOrthogonal::from_unitary(&UnitaryMatrix::identity(2));
        assert_eq!(r.matrix(), &DMatrix::identity(4, 4));
        let iu = UnitaryMatrix::new(DMatrix::identity(2, 2) * c(0.0, 1.0)).unwrap();
        let r = SymplecticOrthogonal::from_unitary(&iu);
        assert_eq!(r.matrix(), &symplectic_form(2));
    }

    #[test]
    fn vacuum_and_product_squeezed() {
        let r = SymplecticOrthogonal::from_unitary(&UnitaryMatrix::identity(3));
        let v = build_pure_cm(&r, &SqueezingSpectrum::new(vec![1.0; 3]).unwrap()).unwrap();
        assert!(max_abs_diff(v.matrix(), CovarianceMatrix::vacuum(3).matrix()) < 1e-15);

        let rr = 0.4;
        let v = build_pure_cm(&r, &SqueezingSpectrum::uniform(3, rr).unwrap()).unwrap();
        let expected = DMatrix::from_fn(6, 6, |i, j| match (i == j, i < 3) {
            (true, true) => 0.5 * (2.0 * rr).exp(),
            (true, false) => 0.5 * (-2.0 * rr).exp(),
            _ => 0.0,
        });
        assert!(max_abs_diff(v.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn squeezing_dimension_mismatch() {
        let r = SymplecticOrthogonal::from_unitary(&UnitaryMatrix::identity(3));
        let k = SqueezingSpectrum::new(vec![1.0; 2]).unwrap();
        assert!(matches!(build_pure_cm(&r, &k), Err(Error::Dimension(_))));
        assert!(SqueezingSpectrum::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_family_special_cases() {
        let u =
            unitary_from_generator(3, &[0.3, -0.2, 0.9, 0.1, 0.5, -0.7, 0.2, 0.4, 0.6]).unwrap();
        let v = build_uniform_squeezing_cm(&u, 0.0);
        assert!(max_abs_diff(v.matrix(), CovarianceMatrix::vacuum(3).matrix()) < 1e-15);

        let v = build_uniform_squeezing_cm(&UnitaryMatrix::identity(2), 1.0);
        let e2 = 1f64.exp().powi(2);
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            0.5 * e2,
            0.5 * e2,
            0.5 / e2,
            0.5 / e2,
        ]));
        assert!(max_abs_diff(v.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn auxiliary_for_identity_and_i() {
        let n = 3;
        let aux = build_auxiliary_matrices(&UnitaryMatrix::identity(n));
        let diag = |top: f64, bottom: f64| {
            DMatrix::from_fn(2 * n, 2 * n, |i, j| {
                if i != j {
                    0.0
                } else if i < n {
                    top
                } else {
                    bottom
                }
            })
        };
        assert_eq!(aux.z, diag(1.0, -1.0));
        assert_eq!(aux.w, diag(1.0, 0.0));
        assert_eq!(aux.w_prime, diag(0.0, 1.0));

        let iu = UnitaryMatrix::new(DMatrix::identity(n, n) * c(0.0, 1.0)).unwrap();
        assert_eq!(build_auxiliary_matrices(&iu).z, diag(-1.0, 1.0));
    }

    #[test]
    fn mode_energy_examples() {
        let vac = CovarianceMatrix::vacuum(4);
        for k in 0..4 {
            assert_eq!(mode_energy(&vac, k).unwrap(), 0.5);
        }
        assert!(matches!(mode_energy(&vac, 4), Err(Error::Dimension(_))));

        let single = CovarianceMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[0.5 * 2f64.exp(), 0.0, 0.0, 0.5 * (-2f64).exp()],
        ))
        .unwrap();
        // (e² + e⁻²)/4 = cosh(2)/2
        assert!((mode_energy(&single, 0).unwrap() - 1.881_097_845_541_816_3).abs() < 1e-15);
    }

    #[test]
    fn saturated_uniform_energy() {
        let budget = EnergyBudget::new(0.75).unwrap();
        let u = unitary_from_generator(2, &[0.2, 1.1, -0.3, 0.8]).unwrap();
        let v = build_uniform_squeezing_cm(&u, budget.saturating_squeezing());
        for k in 0..2 {
            assert!((mode_energy(&v, k).unwrap() - 1.25).abs() < 1e-14);
        }
        assert!(satisfies_energy_budget(&v, budget, 1e-12));
        assert!(!satisfies_energy_budget(
            &v,
            EnergyBudget::new(0.7).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn purity_condition_examples() {
        let vac = DMatrix::identity(4, 4) * 0.5;
        let check = check_purity_condition(&vac).unwrap();
        assert!(check.pure);
        assert_eq!(check.residual, 0.0);

        let thermal = DMatrix::<f64>::identity(4, 4);
        assert!(!check_purity_condition(&thermal).unwrap().pure);
        assert!(matches!(
            check_purity_condition(&DMatrix::identity(3, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            CovarianceMatrix::new(thermal),
            Err(Error::InvariantViolation { .. })
        ));
    }
}
