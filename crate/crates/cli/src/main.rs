use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use frustration_cli::commands::{self, Report, DEFAULT_SWEEP_GRID};
use frustration_cli::config::{self, Settings, JOBS_ENV};
use frustration_cli::output::{format_real, write_atomic, Table};
use frustration_cli::record::{records_to_json, ResultRecord};
use frustration_cli::{exit_code, invariants, Failure};
use gaussfrust::SystemShape;

#[derive(Parser)]
#[command(
    name = "frustration",
    version,
    about = "Entanglement frustration of multimode pure Gaussian states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Slopes, plateau potential and plateau bound for balanced cuts, n = 4..9.
    Table1 {
        /// Rows to compute, e.g. `4..9` or `4,6`.
        #[arg(long, default_value = "4..9")]
        n: String,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal potential over a grid of mean excitation numbers.
    Sweep {
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Modes in the smaller part of the cut; defaults to floor(n/2).
        #[arg(long)]
        na: Option<usize>,
        /// Comma list of energies or `log:START:STOP:COUNT`.
        #[arg(long = "N-grid", visible_alias = "N", value_name = "GRID")]
        grid: Option<String>,
        /// Also write a gnuplot script plotting the CSV output.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare slope bounds with the conjectured closed forms.
    Conjecture {
        #[arg(long, default_value = "2..4")]
        na: String,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized algebraic identity checks.
    Invariants {
        #[arg(long, default_value = "2..9")]
        n: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Also check that a corrupted covariance matrix is rejected.
        #[arg(long)]
        self_test: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["restricted", "general"])]
    mode: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for the restarts.
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        if let Some(m) = &self.mode {
            s.mode = commands::parse_mode(m)?;
        }
        if let Some(v) = self.restarts {
            s.opt.restarts = v;
        }
        if let Some(v) = self.seed {
            s.opt.seed = v;
        }
        if let Some(v) = self.tol {
            s.opt.convergence_tol = v;
        }
        if let Some(v) = self.jobs {
            s.opt.jobs = v;
        }
        s.validate()
            .map_err(|e| Failure::invalid(format!("{e:#}")))?;
        Ok(s)
    }
}

fn emit(table: &Table, records: &[ResultRecord], common: &Common) -> Result<()> {
    let text = match common.format {
        Format::Csv => table.to_csv()?,
        Format::Json => records_to_json(records)?,
    };
    match &common.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(report: Report, common: &Common) -> Result<()> {
    emit(&report.table, &report.records, common)?;
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    match report.failure() {
        Some(f) => Err(Failure::new(f.kind, f.message.clone()).into()),
        None => Ok(()),
    }
}

fn gnuplot_script(csv: &Path, shape: SystemShape) -> String {
    format!(
        "set datafile separator ','\nset logscale x\nset xlabel 'N'\nset ylabel 'chi_min'\nset key left top\n\
         plot '{}' using 1:2 skip 1 with linespoints title '{}'\n",
        csv.display(),
        shape
    )
}

fn run() -> Result<()> {
    let cli = Cli::try_parse().map_err(|e| {
        if e.kind() == clap::error::ErrorKind::DisplayHelp
            || e.kind() == clap::error::ErrorKind::DisplayVersion
        {
            e.exit();
        }
        Failure::invalid(e.to_string())
    })?;
    match cli.command {
        Command::Table1 { n, common } => {
            let report = commands::table1(&config::parse_range(&n)?, &common.settings()?)?;
            finish(report, &common)
        }
        Command::Sweep {
            n,
            na,
            grid,
            gnuplot,
            common,
        } => {
            let shape = SystemShape::new(n, na.unwrap_or(n / 2))
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let grid = match grid {
                Some(g) => config::parse_grid(&g)?,
                None => DEFAULT_SWEEP_GRID.to_vec(),
            };
            let report = commands::sweep(shape, &grid, &common.settings()?)?;
            if let Some(script) = gnuplot {
                let data = common
                    .out
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("sweep.csv"));
                write_atomic(&script, gnuplot_script(&data, shape).as_bytes())?;
            }
            finish(report, &common)
        }
        Command::Conjecture { na, common } => {
            let report = commands::conjecture(&config::parse_range(&na)?, &common.settings()?)?;
            finish(report, &common)
        }
        Command::Invariants {
            n,
            samples,
            self_test,
            common,
        } => {
            let settings = common.settings()?;
            let start = std::time::Instant::now();
            let report = invariants::run(
                &config::parse_range(&n)?,
                samples,
                settings.opt.seed,
                self_test,
            )?;
            let table = report.table();
            let records: Vec<ResultRecord> = report
                .checks
                .iter()
                .map(|c| {
                    ResultRecord::new(
                        frustration_cli::RecordKind::Invariant,
                        c.n,
                        c.n / 2,
                        c.worst,
                        &settings.opt,
                    )
                    .with_tolerance(c.tolerance)
                    .with_detail(format!(
                        "{}: {} of {} failed",
                        c.name, c.failures, c.samples
                    ))
                })
                .collect();
            emit(&table, &records, &common)?;
            eprintln!(
                "{} checks, {} failed, {} s",
                report.checks.len(),
                report.checks.iter().filter(|c| !c.passed()).count(),
                format_real(start.elapsed().as_secs_f64())
            );
            match report.failure() {
                Some(f) => Err(f.into()),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
