//! Size-`n_A` subsets of modes and the matching `2n_A x 2n_A` blocks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::SystemShape;

/// A subset `A` of modes (zero-based, strictly increasing).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    modes: Vec<usize>,
    n: usize,
}

impl Bipartition {
    pub fn new(modes: Vec<usize>, n: usize) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument(
                "bipartition needs at least one mode".into(),
            ));
        }
        if modes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "bipartition modes must be strictly increasing: {modes:?}"
            )));
        }
        if let Some(&m) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::Dimension(format!(
                "mode {m} out of range for {n} modes"
            )));
        }
        Ok(Self { modes, n })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_modes(&self) -> usize {
        self.n
    }

    /// `Ā`, the remaining modes in increasing order.
    pub fn complement(&self) -> Bipartition {
        let modes = (0..self.n).filter(|m| !self.modes.contains(m)).collect();
        Bipartition { modes, n: self.n }
    }

    /// Selected rows/columns of a `2n x 2n` matrix: the `q` indices of `A`
    /// followed by its `p` indices.
    pub fn phase_space_indices(&self) -> Vec<usize> {
        self.modes
            .iter()
            .copied()
            .chain(self.modes.iter().map(|m| m + self.n))
            .collect()
    }
}

impl std::fmt::Display for Bipartition {
    /// One-based, e.g. `{1,3}`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let labels: Vec<String> = self.modes.iter().map(|m| (m + 1).to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// All `C(n, n_A)` subsets in lexicographic order.
pub fn enumerate_bipartitions(shape: SystemShape) -> Vec<Bipartition> {
    let (n, k) = (shape.n(), shape.n_a());
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(Bipartition {
            modes: current.clone(),
            n,
        });
        // Advance to the next combination.
        let mut i = k;
        while i > 0 && current[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn extract_submatrix(m: &DMatrix<f64>, a: &Bipartition) -> Result<DMatrix<f64>> {
    let dim = 2 * a.total_modes();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension(format!(
            "bipartition of {} modes needs a {dim}x{dim} matrix, got {}x{}",
            a.total_modes(),
            m.nrows(),
            m.ncols()
        )));
    }
    let idx = a.phase_space_indices();
    Ok(DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
        m[(idx[i], idx[j])]
    }))
}
