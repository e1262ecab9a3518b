//! Nelder–Mead simplex search with dimension-adaptive coefficients
//! (reflection 1, expansion 1 + 2/d, contraction 3/4 − 1/(2d),
//! shrink 1 − 1/d).

use super::LocalResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Convergence when the spread of simplex values falls below this
    /// (relative to `max(1, |f_best|)`).
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Times the simplex is rebuilt around the best vertex after converging.
    pub rebuilds: usize,
}

pub fn minimize<F>(objective: F, x0: Vec<f64>, opts: &NelderMeadOptions) -> Result<LocalResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        let f = objective(x);
        if f.is_nan() {
            return Err(Error::Evaluation("objective returned NaN".into()));
        }
        Ok(f)
    };
    if dim == 0 {
        let value = eval(&x0)?;
        return Ok(LocalResult {
            x: x0,
            value,
            iterations: 0,
            evaluations,
            converged: true,
        });
    }

    let d = dim as f64;
    let (expand, contract, shrink) = (1.0 + 2.0 / d, 0.75 - 0.5 / d, 1.0 - 1.0 / d);

    let mut best_x = x0;
    let mut best_f = eval(&best_x)?;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut rebuilds_left = opts.rebuilds;

    'outer: loop {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..dim {
            let mut x = best_x.clone();
            x[i] += opts.step;
            let f = eval(&x)?;
            simplex.push((x, f));
        }
        let start_f = best_f;

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let f_best = simplex[0].1;
            let f_worst = simplex[dim].1;
            if f_worst - f_best <= opts.tol * f_best.abs().max(1.0) {
                best_x = simplex[0].0.clone();
                best_f = f_best;
                let gained = start_f - best_f;
                if rebuilds_left == 0 || gained <= opts.tol * best_f.abs().max(1.0) {
                    converged = true;
                    break 'outer;
                }
                rebuilds_left -= 1;
                continue 'outer;
            }
            if iterations >= opts.max_iterations {
                best_x = simplex[0].0.clone();
                best_f = f_best;
                break 'outer;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                centroid.iter_mut().zip(x).for_each(|(c, xi)| *c += xi / d);
            }
            let worst = simplex[dim].0.clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = eval(&xr)?;
            let f_second = simplex[dim - 1].1;
            if fr < f_best {
                let xe = along(expand);
                let fe = eval(&xe)?;
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < f_second {
                simplex[dim] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < f_worst {
                let xc = along(contract);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-contract);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(f_worst) {
                simplex[dim] = (xc, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&vertex.0)
                    .map(|(a, v)| a + shrink * (v - a))
                    .collect();
                let f = eval(&x)?;
                *vertex = (x, f);
            }
        }
    }

    Ok(LocalResult {
        x: best_x,
        value: best_f,
        iterations,
        evaluations,
        converged,
    })
}
