use gaussfrust::optimizer::*;
use gaussfrust::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(restarts: usize) -> OptConfig {
    OptConfig {
        restarts,
        ..OptConfig::default()
    }
}

#[test]
fn convex_quadratic_is_solved_by_both_backends() {
    let x0 = [0.3, -1.2, 0.7, 2.0, -0.4];
    let f = |x: &[f64]| {
        x.iter()
            .zip(x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    };
    let nm = multistart_minimize(f, 5, &config(4)).unwrap();
    assert!(nm.value() < 1e-8, "{}", nm.value());
    let smooth = multistart_minimize_smooth(
        |x: &[f64], g: &mut [f64]| {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = 2.0 * (x[i] - x0[i]);
            }
            f(x)
        },
        5,
        &config(4),
    )
    .unwrap();
    assert!(smooth.value() < 1e-8);
}

#[test]
fn two_mode_slope_bound_vanishes() {
    let shape = SystemShape::new(2, 1).unwrap();
    let res = compute_alpha_tilde(shape, &config(8)).unwrap();
    assert!(res.value() < 1e-6, "{}", res.value());

    // Dense random search over U(2) agrees that the infimum is zero.
    let land = Landscape::new(shape, CostKind::ZTrace);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let best = (0..20000)
        .map(|_| {
            land.value(
                &(0..4)
                    .map(|_| rng.random_range(-3.0..3.0))
                    .collect::<Vec<_>>(),
            )
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-2, "{best}");
}

#[test]
fn slope_bound_predicts_small_energy_potential() {
    let shape = SystemShape::new(4, 2).unwrap();
    let res = compute_alpha_tilde(shape, &config(16)).unwrap();
    assert!((res.value() - 4.0 / 3.0).abs() < 1e-3);
    let u = Landscape::new(shape, CostKind::ZTrace).unitary(&res.best_params);
    let budget = EnergyBudget::new(1e-3).unwrap();
    let chi = chi_restricted(&u, budget.saturating_squeezing(), shape, budget)
        .unwrap()
        .value();
    assert!((chi - 1.001333).abs() < 1e-5, "{chi}");
}

#[test]
fn more_restarts_never_hurt() {
    let shape = SystemShape::balanced(6).unwrap();
    let k = compute_alpha_tilde(shape, &config(4)).unwrap();
    let two_k = compute_alpha_tilde(shape, &config(8)).unwrap();
    assert!(two_k.value() <= k.value());
    assert_eq!(&two_k.per_restart_values[..4], &k.per_restart_values[..]);
}

#[test]
fn worker_count_does_not_change_results() {
    let shape = SystemShape::new(4, 2).unwrap();
    let budget = EnergyBudget::new(1.0).unwrap();
    let one = compute_chi_min(shape, budget, ChiMode::Restricted, &config(6)).unwrap();
    let three = compute_chi_min(
        shape,
        budget,
        ChiMode::Restricted,
        &OptConfig {
            jobs: 3,
            ..config(6)
        },
    )
    .unwrap();
    assert_eq!(one, three);
}

#[test]
fn plateau_bound_for_four_modes() {
    let res = compute_beta(SystemShape::new(4, 2).unwrap(), &config(16)).unwrap();
    assert!((res.value() - 1.666667).abs() < 2e-3, "{}", res.value());
}

#[test]
fn single_mode_cuts_are_not_frustrated() {
    let shape = SystemShape::new(2, 1).unwrap();
    for n in [0.1, 1.0, 10.0] {
        let res = compute_chi_min(
            shape,
            EnergyBudget::new(n).unwrap(),
            ChiMode::General,
            &config(8),
        )
        .unwrap();
        assert!((res.value() - 1.0).abs() < 1e-3, "N = {n}: {}", res.value());
    }
}

#[test]
fn potential_at_high_energy_for_small_systems() {
    let budget = EnergyBudget::new(10.0).unwrap();
    for (n, expected) in [(4, 1.663650), (5, 1.332326)] {
        let shape = SystemShape::balanced(n).unwrap();
        let res = compute_chi_min(shape, budget, ChiMode::Restricted, &config(16)).unwrap();
        assert!(
            (res.value() - expected).abs() < 1e-2,
            "n = {n}: {}",
            res.value()
        );
        assert!(res.value() <= 1.0 / min_purity(2, budget).value());
    }
}

#[test]
fn fitted_slope_for_five_modes() {
    let shape = SystemShape::new(5, 2).unwrap();
    let est = estimate_alpha(shape, &DEFAULT_ALPHA_GRID, ChiMode::Restricted, &config(16)).unwrap();
    assert!((est.slope - 1.0).abs() < 5e-2, "{}", est.slope);
    assert!(est.monotone);
    assert_eq!(est.points.len(), DEFAULT_ALPHA_GRID.len());
}

#[test]
fn origin_fit_recovers_exact_line() {
    let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 2.5 * i as f64)).collect();
    let (slope, rms) = fit_origin_slope(&pts);
    assert!((slope - 2.5).abs() < 1e-14);
    assert!(rms < 1e-14);
}

#[test]
fn invalid_configs_are_rejected() {
    let shape = SystemShape::new(4, 2).unwrap();
    assert!(compute_alpha_tilde(shape, &config(0)).is_err());
    let bad_ladder = OptConfig {
        energy_ladder: vec![0.3, -1.0],
        ..config(2)
    };
    assert!(compute_beta(shape, &bad_ladder).is_err());
    assert!(estimate_alpha(shape, &[], ChiMode::Restricted, &config(2)).is_err());
    assert!(estimate_alpha(shape, &[-0.1], ChiMode::Restricted, &config(2)).is_err());
}
