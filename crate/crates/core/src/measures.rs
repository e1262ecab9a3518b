//! Purity-based entanglement costs.
//!
//! Every bipartition average is the exact arithmetic mean over the
//! lexicographic list of all `C(n, n_A)` subsets, summed in that order.

use nalgebra::DMatrix;

use crate::bipartition::{enumerate_bipartitions, extract_submatrix, Bipartition};
use crate::error::{Error, Result};
use crate::gaussian::{
    build_auxiliary_matrices, CovarianceMatrix, EnergyBudget, SystemShape, UnitaryMatrix,
};
use crate::linalg::spd_logdet;

/// Default floor below which `det(W_A)` counts as singular.
pub const DEFAULT_DET_FLOOR: f64 = 1e-300;

/// A nonnegative cost, or `+∞` for singular configurations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CostValue(f64);

impl CostValue {
    pub const INFINITE: CostValue = CostValue(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NumericalDomain(format!(
                "cost must be nonnegative, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

impl From<CostValue> for f64 {
    fn from(c: CostValue) -> f64 {
        c.0
    }
}

fn check_modes(v: &CovarianceMatrix, shape: SystemShape) -> Result<()> {
    if v.modes() != shape.n() {
        return Err(Error::Dimension(format!(
            "state has {} modes, shape expects {}",
            v.modes(),
            shape.n()
        )));
    }
    Ok(())
}

fn logdet_block(m: &DMatrix<f64>, a: &Bipartition) -> Result<Option<f64>> {
    Ok(spd_logdet(&extract_submatrix(m, a)?))
}

/// `π_A = (½)^{n_A} / √det V_A`.
pub fn subsystem_purity(v: &CovarianceMatrix, a: &Bipartition) -> Result<CostValue> {
    let logdet = logdet_block(v.matrix(), a)?.ok_or_else(|| {
        Error::NumericalDomain(format!("V_A is not positive definite for A = {a}"))
    })?;
    let n_a = a.len() as f64;
    CostValue::new((-n_a * std::f64::consts::LN_2 - 0.5 * logdet).exp())
}

/// `π^min = (½)^{n_A} / (N + ½)^{n_A}`.
pub fn min_purity(n_a: usize, budget: EnergyBudget) -> CostValue {
    CostValue((0.5 / budget.mode_energy_limit()).powi(n_a as i32))
}

/// `χ = (N + ½)^{n_A} · E[det(V_A)^{−1/2}]`.
///
/// `N` enters only as the normalization; whether `V` respects the budget
/// is checked separately (see [`crate::gaussian::satisfies_energy_budget`]).
pub fn chi(v: &CovarianceMatrix, shape: SystemShape, budget: EnergyBudget) -> Result<CostValue> {
    check_modes(v, shape)?;
    let subsets = enumerate_bipartitions(shape);
    let scale_log = shape.n_a() as f64 * budget.mode_energy_limit().ln();
    let mut sum = 0.0;
    for a in &subsets {
        let logdet = logdet_block(v.matrix(), a)?.ok_or_else(|| {
            Error::NumericalDomain(format!("V_A is not positive definite for A = {a}"))
        })?;
        sum += (scale_log - 0.5 * logdet).exp();
    }
    CostValue::new(sum / subsets.len() as f64)
}

/// `E[tr(Z_A²)]`, the small-energy slope objective.
pub fn z_objective(u: &UnitaryMatrix, shape: SystemShape) -> Result<CostValue> {
    if u.dim() != shape.n() {
        return Err(Error::Dimension(format!(
            "U({}) for shape {shape}",
            u.dim()
        )));
    }
    let z = build_auxiliary_matrices(u).z;
    let subsets = enumerate_bipartitions(shape);
    let mut sum = 0.0;
    for a in &subsets {
        let za = extract_submatrix(&z, a)?;
        // tr(Z_A²) = ‖Z_A‖_F² for symmetric Z_A
        sum += za.iter().map(|x| x * x).sum::<f64>();
    }
    CostValue::new(sum / subsets.len() as f64)
}

/// `E[det(W_A)^{−1/2}]`, the large-energy plateau objective.
pub fn w_objective(u: &UnitaryMatrix, shape: SystemShape) -> Result<CostValue> {
    w_objective_with_floor(u, shape, DEFAULT_DET_FLOOR)
}

/// As [`w_objective`], returning [`CostValue::INFINITE`] when any
/// `det(W_A)` falls below `floor` or `W_A` is not positive definite.
pub fn w_objective_with_floor(
    u: &UnitaryMatrix,
    shape: SystemShape,
    floor: f64,
) -> Result<CostValue> {
    if u.dim() != shape.n() {
        return Err(Error::Dimension(format!(
            "U({}) for shape {shape}",
            u.dim()
        )));
    }
    let w = build_auxiliary_matrices(u).w;
    let subsets = enumerate_bipartitions(shape);
    let log_floor = floor.ln();
    let mut sum = 0.0;
    for a in &subsets {
        match logdet_block(&w, a)? {
            Some(ld) if ld >= log_floor => sum += (-0.5 * ld).exp(),
            _ => return Ok(CostValue::INFINITE),
        }
    }
    CostValue::new(sum / subsets.len() as f64)
}

/// `χ̃` for the uniform-squeezing state `(U, r)`, evaluated through `Z`:
/// `(2N+1)^{n_A} · E[det(cosh(2r) I + sinh(2r) Z_A)^{−1/2}]`.
pub fn chi_restricted(
    u: &UnitaryMatrix,
    r: f64,
    shape: SystemShape,
    budget: EnergyBudget,
) -> Result<CostValue> {
    if u.dim() != shape.n() {
        return Err(Error::Dimension(format!(
            "U({}) for shape {shape}",
            u.dim()
        )));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let limit = 2.0 * budget.value() + 1.0;
    if c > limit * (1.0 + 1e-12) {
        return Err(Error::ConstraintViolation { cosh_2r: c, limit });
    }
    let z = build_auxiliary_matrices(u).z;
    let dim = 2 * shape.n();
    let m = DMatrix::identity(dim, dim) * c + z * s;
    let subsets = enumerate_bipartitions(shape);
    let scale_log = shape.n_a() as f64 * limit.ln();
    let mut sum = 0.0;
    for a in &subsets {
        let ld = logdet_block(&m, a)?.ok_or_else(|| {
            Error::NumericalDomain(format!("cosh I + sinh Z_A singular for A = {a}"))
        })?;
        sum += (scale_log - 0.5 * ld).exp();
    }
    CostValue::new(sum / subsets.len() as f64)
}

/// Second-order expansion `1 + ε tr M + (ε²/2)(tr(M)² − tr(M²))`.
pub fn det_second_order(m: &DMatrix<f64>, eps: f64) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "square matrix required, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let tr = m.trace();
    let tr_sq = (m * m).trace();
    Ok(1.0 + eps * tr + 0.5 * eps * eps * (tr * tr - tr_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{
        build_pure_cm, build_uniform_squeezing_cm, unitary_from_generator, SqueezingSpectrum,
        SymplecticOrthogonal,
    };
    use num_complex::Complex64;

    fn shape(n: usize, k: usize) -> SystemShape {
        SystemShape::new(n, k).unwrap()
    }

    fn budget(n: f64) -> EnergyBudget {
        EnergyBudget::new(n).unwrap()
    }

    /// Two-mode squeezed vacuum: 50:50 beam splitter on opposite squeezers.
    fn two_mode_squeezed(mean: f64) -> CovarianceMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = UnitaryMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
            ],
        ))
        .unwrap();
        build_uniform_squeezing_cm(&u, budget(mean).saturating_squeezing())
    }

    #[test]
    fn vacuum_is_factorized() {
        let v = CovarianceMatrix::vacuum(4);
        for a in enumerate_bipartitions(shape(4, 2)) {
            assert!((subsystem_purity(&v, &a).unwrap().value() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_mode_squeezed_reaches_min_purity() {
        for mean in [0.1, 1.0, 10.0] {
            let v = two_mode_squeezed(mean);
            let a = Bipartition::new(vec![0], 2).unwrap();
            let block = extract_submatrix(v.matrix(), &a).unwrap();
            assert!((block - DMatrix::identity(2, 2) * (mean + 0.5)).abs().max() < 1e-12);
            let pi = subsystem_purity(&v, &a).unwrap().value();
            assert!((pi - min_purity(1, budget(mean)).value()).abs() < 1e-13);
        }
    }

    #[test]
    fn min_purity_values() {
        assert_eq!(min_purity(2, budget(0.0)).value(), 1.0);
        assert!((min_purity(2, budget(10.0)).value() - 1.0 / 441.0).abs() < 1e-18);
        assert!((min_purity(1, budget(0.5)).value() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn chi_of_vacuum() {
        // Factorized vacuum: χ = 1 / π^min = (2N + 1)^{n_A}.
        let v = CovarianceMatrix::vacuum(4);
        assert!((chi(&v, shape(4, 2), budget(0.0)).unwrap().value() - 1.0).abs() < 1e-14);
        assert!((chi(&v, shape(4, 2), budget(1.0)).unwrap().value() - 9.0).abs() < 1e-13);
        assert!(matches!(
            chi(&v, shape(6, 2), budget(1.0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn z_and_w_at_identity() {
        for (n, k) in [(4, 2), (5, 2), (7, 3)] {
            let u = UnitaryMatrix::identity(n);
            assert!((z_objective(&u, shape(n, k)).unwrap().value() - 2.0 * k as f64).abs() < 1e-14);
            assert!(!w_objective(&u, shape(n, k)).unwrap().is_finite());
        }
    }

    #[test]
    fn w_terms_at_least_one() {
        let u = unitary_from_generator(
            4,
            &(0..16).map(|k| (k as f64 * 0.77).sin()).collect::<Vec<_>>(),
        )
        .unwrap();
        let w = w_objective(&u, shape(4, 2)).unwrap().value();
        assert!(w.is_finite() && w >= 1.0);
    }

    #[test]
    fn restricted_vacuum_and_infeasible() {
        let u = unitary_from_generator(3, &[0.1; 9]).unwrap();
        assert!(
            (chi_restricted(&u, 0.0, shape(3, 1), budget(0.0))
                .unwrap()
                .value()
                - 1.0)
                .abs()
                < 1e-14
        );
        assert!(matches!(
            chi_restricted(&u, 1.0, shape(3, 1), budget(0.1)),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn restricted_matches_covariance_route() {
        let params: Vec<f64> = (0..25).map(|k| ((k * 13 % 7) as f64 - 3.0) * 0.4).collect();
        let u = unitary_from_generator(5, &params).unwrap();
        for mean in [0.01, 0.5, 10.0] {
            let b = budget(mean);
            let r = b.saturating_squeezing();
            let direct = chi(&build_uniform_squeezing_cm(&u, r), shape(5, 2), b)
                .unwrap()
                .value();
            let via_z = chi_restricted(&u, r, shape(5, 2), b).unwrap().value();
            assert!((direct - via_z).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn unsaturated_squeezing_costs_more() {
        let params: Vec<f64> = (0..16).map(|k| ((k * 5 % 9) as f64 - 4.0) * 0.35).collect();
        let u = unitary_from_generator(4, &params).unwrap();
        let b = budget(0.05);
        let r_sat = b.saturating_squeezing();
        let at_sat = chi_restricted(&u, r_sat, shape(4, 2), b).unwrap().value();
        for frac in [0.0, 0.25, 0.5, 0.9] {
            let below = chi_restricted(&u, frac * r_sat, shape(4, 2), b)
                .unwrap()
                .value();
            assert!(below > at_sat, "r = {}: {below} <= {at_sat}", frac * r_sat);
        }
    }

    #[test]
    fn purity_duality_random_state() {
        let params: Vec<f64> = (0..25).map(|k| (k as f64 * 1.3).cos()).collect();
        let r = SymplecticOrthogonal::from_unitary(&unitary_from_generator(5, &params).unwrap());
        let k = SqueezingSpectrum::from_log_factors(&[0.3, -0.5, 0.8, 0.1, -0.2]).unwrap();
        let v = build_pure_cm(&r, &k).unwrap();
        for a in enumerate_bipartitions(shape(5, 2)) {
            let pa = subsystem_purity(&v, &a).unwrap().value();
            let pb = subsystem_purity(&v, &a.complement()).unwrap().value();
            assert!((pa - pb).abs() < 1e-8 * pa);
            assert!(pa > 0.0 && pa <= 1.0);
        }
    }

    #[test]
    fn second_order_expansion_examples() {
        assert_eq!(det_second_order(&DMatrix::zeros(3, 3), 0.7).unwrap(), 1.0);
        // For 2x2 matrices the expansion is the exact determinant.
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!((det_second_order(&eye, 0.1).unwrap() - 1.21).abs() < 1e-15);
        assert!(det_second_order(&DMatrix::zeros(2, 3), 0.1).is_err());
    }

    #[test]
    fn cost_value_rejects_negative() {
        assert!(CostValue::new(-1.0).is_err());
        assert!(CostValue::new(f64::NAN).is_err());
        assert!(!CostValue::INFINITE.is_finite());
    }
}
