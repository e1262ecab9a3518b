//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! `+∞` objective values are allowed and treated as "step too long".

use std::collections::VecDeque;

use super::LocalResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub max_iterations: usize,
    /// Stop after several consecutive steps with relative decrease below
    /// this; the run counts as converged only if the gradient is also
    /// below `stall_grad_tol`.
    pub tol: f64,
    /// Converged outright once `‖g‖_∞ <= grad_tol · max(1, |f|)`.
    pub grad_tol: f64,
    pub stall_grad_tol: f64,
    pub stall_steps: usize,
    pub memory: usize,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_SEARCH: usize = 40;

struct Probe {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn minimize<F>(objective: F, x0: Vec<f64>, opts: &LbfgsOptions) -> Result<LocalResult>
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: Vec<f64>| -> Result<Probe> {
        let mut g = vec![0.0; dim];
        let f = objective(&x, &mut g);
        evaluations += 1;
        if f.is_nan() || g.iter().any(|v| v.is_nan()) {
            return Err(Error::Evaluation(
                "objective or gradient returned NaN".into(),
            ));
        }
        Ok(Probe { x, f, g })
    };

    let mut cur = eval(x0)?;
    if !cur.f.is_finite() {
        return Ok(LocalResult {
            x: cur.x,
            value: f64::INFINITY,
            iterations: 0,
            evaluations,
            converged: false,
        });
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut small_steps = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if inf_norm(&cur.g) <= opts.grad_tol * cur.f.abs().max(1.0) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut dir = two_loop(&cur.g, &history);
        let mut slope = dot(&dir, &cur.g);
        if !(slope < 0.0) {
            history.clear();
            dir = cur.g.iter().map(|v| -v).collect();
            slope = dot(&dir, &cur.g);
        }
        let first = if history.is_empty() {
            (1.0 / inf_norm(&cur.g)).min(1.0)
        } else {
            1.0
        };

        let next = match line_search(&mut eval, &cur, &dir, slope, first)? {
            Some(p) => p,
            None if !history.is_empty() => {
                history.clear();
                continue;
            }
            None => {
                // No descent along the steepest direction: numerically stationary.
                converged = true;
                break;
            }
        };

        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let decrease = cur.f - next.f;
        cur = next;
        if decrease <= opts.tol * cur.f.abs().max(1.0) {
            small_steps += 1;
            if small_steps >= opts.stall_steps {
                converged = inf_norm(&cur.g) <= opts.stall_grad_tol * cur.f.abs().max(1.0);
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    Ok(LocalResult {
        x: cur.x,
        value: cur.f,
        iterations,
        evaluations,
        converged,
    })
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

fn line_search<E>(
    eval: &mut E,
    start: &Probe,
    dir: &[f64],
    slope0: f64,
    first: f64,
) -> Result<Option<Probe>>
where
    E: FnMut(Vec<f64>) -> Result<Probe>,
{
    let f0 = start.f;
    let mut at = |a: f64, eval: &mut E| -> Result<(Probe, f64)> {
        let x = start
            .x
            .iter()
            .zip(dir)
            .map(|(xi, di)| xi + a * di)
            .collect();
        let p = eval(x)?;
        let d = dot(&p.g, dir);
        Ok((p, d))
    };

    // (step, value, directional derivative)
    let mut prev = (0.0, f0, slope0);
    let mut prev_probe: Option<Probe> = None;
    let mut a = first;
    for i in 0..MAX_LINE_SEARCH {
        let (p, d) = at(a, eval)?;
        if !p.f.is_finite() || p.f > f0 + C1 * a * slope0 || (i > 0 && p.f >= prev.1) {
            return zoom(eval, &mut at, f0, slope0, prev, prev_probe, (a, p.f, d));
        }
        if d.abs() <= -C2 * slope0 {
            return Ok(Some(p));
        }
        if d >= 0.0 {
            return zoom(eval, &mut at, f0, slope0, (a, p.f, d), Some(p), prev);
        }
        prev = (a, p.f, d);
        prev_probe = Some(p);
        a *= 2.0;
    }
    Ok(prev_probe)
}

#[allow(clippy::too_many_arguments)]
fn zoom<E, A>(
    eval: &mut E,
    at: &mut A,
    f0: f64,
    slope0: f64,
    mut lo: (f64, f64, f64),
    mut lo_probe: Option<Probe>,
    mut hi: (f64, f64, f64),
) -> Result<Option<Probe>>
where
    A: FnMut(f64, &mut E) -> Result<(Probe, f64)>,
{
    for _ in 0..MAX_LINE_SEARCH {
        let width = hi.0 - lo.0;
        if width.abs() < 1e-16 * lo.0.abs().max(1e-16) {
            break;
        }
        // Quadratic through (lo, f_lo, d_lo) and f_hi when finite.
        let mut a = lo.0 + 0.5 * width;
        if hi.1.is_finite() {
            let denom = 2.0 * (hi.1 - lo.1 - lo.2 * width);
            if denom.abs() > 0.0 {
                let cand = lo.0 - lo.2 * width * width / denom;
                if cand.is_finite() {
                    a = cand;
                }
            }
        }
        let (left, right) = if lo.0 < hi.0 {
            (lo.0, hi.0)
        } else {
            (hi.0, lo.0)
        };
        let margin = 0.1 * (right - left);
        a = a.clamp(left + margin, right - margin);

        let (p, d) = at(a, eval)?;
        if !p.f.is_finite() || p.f > f0 + C1 * a * slope0 || p.f >= lo.1 {
            hi = (a, p.f, d);
        } else {
            if d.abs() <= -C2 * slope0 {
                return Ok(Some(p));
            }
            if d * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, p.f, d);
            lo_probe = Some(p);
        }
    }
    // Fall back to the best sufficient-decrease point found.
    Ok(lo_probe.filter(|p| p.f < f0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> LbfgsOptions {
        LbfgsOptions {
            max_iterations: 2000,
            tol: 1e-14,
            grad_tol: 1e-10,
            stall_grad_tol: 1e-6,
            stall_steps: 5,
            memory: 8,
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let r = minimize(f, vec![-1.2, 1.0], &opts()).unwrap();
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn infinite_barrier_is_respected() {
        // Minimum of (x - 2)² restricted to x < 1 by a +∞ wall.
        let f = |x: &[f64], g: &mut [f64]| {
            if x[0] >= 1.0 {
                g[0] = 0.0;
                return f64::INFINITY;
            }
            g[0] = 2.0 * (x[0] - 2.0) + 1.0 / (1.0 - x[0]);
            (x[0] - 2.0).powi(2) - (1.0 - x[0]).ln()
        };
        let r = minimize(f, vec![0.0], &opts()).unwrap();
        assert!(r.value.is_finite() && r.x[0] < 1.0);
        let mut g = [0.0];
        f(&r.x, &mut g);
        assert!(g[0].abs() < 1e-6);
    }

    #[test]
    fn nan_is_an_error() {
        let f = |_: &[f64], _: &mut [f64]| f64::NAN;
        assert!(matches!(
            minimize(f, vec![0.0], &opts()),
            Err(Error::Evaluation(_))
        ));
    }
}
