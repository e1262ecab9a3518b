//! The table, sweep and conjecture drivers.

use anyhow::Result;
use gaussfrust::optimizer::{
    compute_alpha_tilde, compute_beta, compute_chi_min, estimate_alpha, ChiMode, OptResult,
    DEFAULT_ALPHA_GRID,
};
use gaussfrust::{min_purity, EnergyBudget, SystemShape};

use crate::config::Settings;
use crate::error::{ExitKind, Failure};
use crate::output::Table;
use crate::record::{RecordKind, ResultRecord};

/// Budget standing in for the infinite-energy plateau.
pub const PLATEAU_ENERGY: f64 = 10.0;

/// Lower slack allowed on an emitted `χ^min`.
pub const CHI_LOWER_SLACK: f64 = 1e-6;

/// Tolerance on the conjectured slope relations.
pub const CONJECTURE_TOL: f64 = 5e-3;

/// Default energy grid of `sweep`, logarithmic from `1e-3` to `30`.
pub const DEFAULT_SWEEP_GRID: [f64; 15] = [
    0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0,
];

/// Output of one command: the tabular view, the records behind it and
/// anything that should turn into a nonzero exit after writing.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub records: Vec<ResultRecord>,
    pub problems: Vec<Failure>,
    /// Observations worth printing that do not affect the exit status.
    pub notes: Vec<String>,
}

impl Report {
    fn new(table: Table) -> Self {
        Self {
            table,
            records: Vec::new(),
            problems: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check_convergence(&mut self, what: &str, res: &OptResult, settings: &Settings) {
        let f = res.converged_fraction();
        if f < settings.min_converged {
            self.problems.push(Failure::new(
                ExitKind::NonConvergence,
                format!("{what}: only {:.1}% of restarts converged", 100.0 * f),
            ));
        }
    }

    fn check_chi(&mut self, what: &str, value: f64, n_a: usize, budget: EnergyBudget) {
        let upper = 1.0 / min_purity(n_a, budget).value();
        if !(value >= 1.0 - CHI_LOWER_SLACK && value <= upper) {
            self.problems.push(Failure::new(
                ExitKind::InvariantFailure,
                format!("{what}: chi_min = {value} outside [1 - {CHI_LOWER_SLACK:e}, {upper}]"),
            ));
        }
    }

    /// The most severe problem, if any.
    pub fn failure(&self) -> Option<&Failure> {
        self.problems
            .iter()
            .find(|p| p.kind == ExitKind::InvariantFailure)
            .or_else(|| self.problems.first())
    }
}

fn check_table_range(ns: &[usize]) -> Result<()> {
    if let Some(n) = ns.iter().find(|n| !(4..=9).contains(*n)) {
        return Err(Failure::invalid(format!("table rows cover n = 4..9, got {n}")).into());
    }
    Ok(())
}

/// One row per `n` of `(n, α, α̃, χ^min(N = 10), β)` for balanced cuts.
pub fn table1(ns: &[usize], settings: &Settings) -> Result<Report> {
    check_table_range(ns)?;
    settings.validate()?;
    let cfg = &settings.opt;
    let mode = settings.mode;
    let plateau = EnergyBudget::new(PLATEAU_ENERGY)?;
    let mut report = Report::new(Table::new(&[
        "n",
        "alpha",
        "alpha_tilde",
        "chi_min_N10",
        "beta",
    ]));
    for &n in ns {
        let shape = SystemShape::balanced(n)?;
        let k = shape.n_a();
        let tilde = compute_alpha_tilde(shape, cfg)?;
        report.check_convergence(&format!("alpha_tilde {shape}"), &tilde, settings);
        let beta = compute_beta(shape, cfg)?;
        report.check_convergence(&format!("beta {shape}"), &beta, settings);
        let chi = compute_chi_min(shape, plateau, mode, cfg)?;
        report.check_convergence(&format!("chi_min {shape}"), &chi, settings);
        report.check_chi(&format!("chi_min {shape}"), chi.value(), k, plateau);
        let alpha = estimate_alpha(shape, &DEFAULT_ALPHA_GRID, mode, cfg)?;
        if !alpha.monotone {
            report.notes.push(format!(
                "alpha {shape}: chi_min not monotone over the slope grid"
            ));
        }

        report.table.push(vec![
            n.into(),
            alpha.slope.into(),
            tilde.value().into(),
            chi.value().into(),
            beta.value().into(),
        ]);
        let rec = |kind, v| ResultRecord::new(kind, n, k, v, cfg);
        report.records.extend([
            rec(RecordKind::Alpha, alpha.slope)
                .with_mode(mode)
                .with_detail(format!("fit rms {:e}", alpha.residual)),
            rec(RecordKind::AlphaTilde, tilde.value())
                .with_converged_fraction(tilde.converged_fraction()),
            rec(RecordKind::ChiMin, chi.value())
                .with_energy(PLATEAU_ENERGY)
                .with_mode(mode)
                .with_converged_fraction(chi.converged_fraction()),
            rec(RecordKind::Beta, beta.value()).with_converged_fraction(beta.converged_fraction()),
        ]);
    }
    Ok(report)
}

/// `(N, χ^min(N), converged fraction)` over `grid`.
pub fn sweep(shape: SystemShape, grid: &[f64], settings: &Settings) -> Result<Report> {
    settings.validate()?;
    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(
            Failure::invalid("energy grid must be positive and strictly increasing").into(),
        );
    }
    let cfg = &settings.opt;
    let mut report = Report::new(Table::new(&["N", "chi_min", "converged_fraction"]));
    let mut prev: Option<f64> = None;
    for &e in grid {
        let budget = EnergyBudget::new(e)?;
        let res = compute_chi_min(shape, budget, settings.mode, cfg)?;
        let what = format!("chi_min {shape} at N = {e}");
        report.check_convergence(&what, &res, settings);
        report.check_chi(&what, res.value(), shape.n_a(), budget);
        if let Some(p) = prev {
            if res.value() < p - 1e-3 {
                report
                    .notes
                    .push(format!("{what}: decreased from {p} to {}", res.value()));
            }
        }
        prev = Some(res.value());
        report.table.push(vec![
            e.into(),
            res.value().into(),
            res.converged_fraction().into(),
        ]);
        report.records.push(
            ResultRecord::new(RecordKind::ChiMin, shape.n(), shape.n_a(), res.value(), cfg)
                .with_energy(e)
                .with_mode(settings.mode)
                .with_converged_fraction(res.converged_fraction()),
        );
    }
    Ok(report)
}

/// One conjecture line: slope bounds of the even and odd balanced systems
/// sharing `n_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRow {
    pub n_a: usize,
    pub even: f64,
    pub odd: f64,
    pub deviation: f64,
    pub ratio: f64,
    pub target_ratio: f64,
    pub ratio_deviation: f64,
}

impl ConjectureRow {
    pub fn holds(&self, tol: f64) -> bool {
        self.deviation <= tol && self.ratio_deviation <= tol
    }
}

pub fn conjecture_row(n_a: usize, settings: &Settings) -> Result<ConjectureRow> {
    let cfg = &settings.opt;
    let even = compute_alpha_tilde(SystemShape::new(2 * n_a, n_a)?, cfg)?.value();
    let odd = compute_alpha_tilde(SystemShape::new(2 * n_a + 1, n_a)?, cfg)?.value();
    let k = n_a as f64;
    let ratio = even / odd;
    let target_ratio = 2.0 * k / (2.0 * k - 1.0);
    Ok(ConjectureRow {
        n_a,
        even,
        odd,
        deviation: (odd - (k - 1.0)).abs(),
        ratio,
        target_ratio,
        ratio_deviation: (ratio - target_ratio).abs(),
    })
}

/// Check `α̃(2k+1, k) = k − 1` and `α̃(2k, k)/α̃(2k+1, k) = 2k/(2k − 1)`.
pub fn conjecture(n_as: &[usize], settings: &Settings) -> Result<Report> {
    if let Some(k) = n_as.iter().find(|k| !(2..=4).contains(*k)) {
        return Err(Failure::invalid(format!("conjecture covers n_A = 2..4, got {k}")).into());
    }
    settings.validate()?;
    let cfg = &settings.opt;
    let mut report = Report::new(Table::new(&[
        "n_a",
        "alpha_tilde_even",
        "alpha_tilde_odd",
        "deviation_odd",
        "ratio",
        "target_ratio",
        "deviation_ratio",
        "verdict",
    ]));
    for &k in n_as {
        let row = conjecture_row(k, settings)?;
        report.table.push(vec![
            k.into(),
            row.even.into(),
            row.odd.into(),
            row.deviation.into(),
            row.ratio.into(),
            row.target_ratio.into(),
            row.ratio_deviation.into(),
            row.holds(CONJECTURE_TOL).into(),
        ]);
        report.records.extend([
            ResultRecord::new(RecordKind::Conjecture, 2 * k + 1, k, row.odd, cfg)
                .with_tolerance(CONJECTURE_TOL)
                .with_detail(format!(
                    "alpha_tilde(2n_A+1, n_A) vs n_A - 1, deviation {:e}",
                    row.deviation
                )),
            ResultRecord::new(RecordKind::Conjecture, 2 * k, k, row.ratio, cfg)
                .with_tolerance(CONJECTURE_TOL)
                .with_detail(format!(
                    "alpha_tilde(2n_A, n_A) / alpha_tilde(2n_A+1, n_A) vs {}, deviation {:e}",
                    row.target_ratio, row.ratio_deviation
                )),
        ]);
    }
    Ok(report)
}

/// Mode of a `χ^min` computation from its command-line name.
pub fn parse_mode(s: &str) -> Result<ChiMode> {
    s.parse()
        .map_err(|e: gaussfrust::Error| Failure::invalid(e.to_string()).into())
}
