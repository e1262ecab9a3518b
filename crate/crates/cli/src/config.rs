//! Run settings: defaults, a `key = value` file, then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use gaussfrust::optimizer::{Backend, ChiMode, OptConfig};

use crate::error::Failure;

/// Environment variable holding the default worker count.
pub const JOBS_ENV: &str = "FRUSTRATION_JOBS";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub opt: OptConfig,
    pub mode: ChiMode,
    /// A result whose fraction of converged restarts falls below this is
    /// reported as non-converged.
    pub min_converged: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            opt: OptConfig::default(),
            mode: ChiMode::Restricted,
            min_converged: 0.02,
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Failure::invalid(format!("config line {}: expected key = value", i + 1))
        })?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Failure::invalid(format!("config key '{key}': cannot parse '{v}'")).into())
}

impl Settings {
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in map {
            let o = &mut self.opt;
            match k.as_str() {
                "restarts" => o.restarts = parse(k, v)?,
                "seed" => o.seed = parse(k, v)?,
                "tol" | "convergence_tol" => o.convergence_tol = parse(k, v)?,
                "max_iterations" => o.max_iterations = parse(k, v)?,
                "init_scale" => o.init_scale = parse(k, v)?,
                "penalty_weight" => o.penalty_weight = parse(k, v)?,
                "jobs" => o.jobs = parse(k, v)?,
                "hops" => o.hops = parse(k, v)?,
                "hop_scale" => o.hop_scale = parse(k, v)?,
                "backend" => o.backend = parse::<Backend>(k, v)?,
                "energy_ladder" => o.energy_ladder = parse_list(v)?,
                "mode" => self.mode = parse::<ChiMode>(k, v)?,
                "min_converged" => self.min_converged = parse(k, v)?,
                other => {
                    return Err(Failure::invalid(format!("unknown config key '{other}'")).into())
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut s = Self::default();
        s.apply(&parse_key_values(&text)?)?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.opt.validate()?;
        if !(0.0..=1.0).contains(&self.min_converged) {
            return Err(Failure::invalid("min_converged must lie in [0, 1]").into());
        }
        Ok(())
    }
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::invalid(format!("'{t}' is not a number")).into())
        })
        .collect()
}

/// Energy grid: a comma list, or `log:START:STOP:COUNT` for `COUNT`
/// log-spaced points.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let grid = if let Some(spec) = s.strip_prefix("log:") {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, k] = parts[..] else {
            return Err(Failure::invalid("log grid must be log:START:STOP:COUNT").into());
        };
        let (a, b): (f64, f64) = (parse("grid", a)?, parse("grid", b)?);
        let k: usize = parse("grid", k)?;
        if !(a > 0.0 && b > a && k >= 2) {
            return Err(Failure::invalid("log grid needs 0 < START < STOP and COUNT >= 2").into());
        }
        (0..k)
            .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (k - 1) as f64).exp())
            .collect()
    } else {
        parse_list(s)?
    };
    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Failure::invalid("energy grid must be nonempty, positive and finite").into());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::invalid("energy grid must be strictly increasing").into());
    }
    Ok(grid)
}

/// `4..9`, `4-9`, `4,6,8` or a single integer; ranges are inclusive.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Failure::invalid(format!("cannot parse range '{s}'"));
    let bounds = s.split_once("..").or_else(|| s.split_once('-'));
    let out: Vec<usize> = if let Some((a, b)) = bounds {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if b < a {
            return Err(bad().into());
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<std::result::Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(bad().into());
    }
    Ok(out)
}
