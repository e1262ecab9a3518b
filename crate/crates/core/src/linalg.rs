//! Small dense kernels on row-major slices.
//!
//! The cost functions factor thousands of tiny (at most 2n_A x 2n_A)
//! symmetric blocks per evaluation; these routines work in caller-owned
//! buffers so the hot loop does not allocate.

use nalgebra::DMatrix;

/// In-place lower Cholesky factorization of the symmetric `dim x dim`
/// matrix in `a` (row-major, lower triangle read). Returns `log det(a)`,
/// or `None` if the matrix is not numerically positive definite.
pub fn cholesky_logdet(a: &mut [f64], dim: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), dim * dim);
    let mut logdet = 0.0;
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            let l = a[j * dim + k];
            d -= l * l;
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        a[j * dim + j] = djj;
        logdet += 2.0 * djj.ln();
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = s / djj;
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            a[i * dim + j] = 0.0;
        }
    }
    Some(logdet)
}

/// Inverse of `L Lᵀ` given the lower factor produced by [`cholesky_logdet`].
/// `work` must hold `dim * dim` values; the full symmetric inverse is
/// written to `out`.
pub fn cholesky_inverse(l: &[f64], dim: usize, work: &mut [f64], out: &mut [f64]) {
    // work <- L^{-1} (lower triangular)
    work.iter_mut().for_each(|w| *w = 0.0);
    for j in 0..dim {
        work[j * dim + j] = 1.0 / l[j * dim + j];
        for i in (j + 1)..dim {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * dim + k] * work[k * dim + j];
            }
            work[i * dim + j] = s / l[i * dim + i];
        }
    }
    // out <- L^{-T} L^{-1}
    for i in 0..dim {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..dim {
                s += work[k * dim + i] * work[k * dim + j];
            }
            out[i * dim + j] = s;
            out[j * dim + i] = s;
        }
    }
}

/// Log-determinant of a symmetric positive-definite matrix.
pub fn spd_logdet(m: &DMatrix<f64>) -> Option<f64> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return None;
    }
    let mut buf: Vec<f64> = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
    cholesky_logdet(&mut buf, dim)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}
