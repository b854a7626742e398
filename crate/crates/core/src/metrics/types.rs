use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `n x d` matrix of per-sample embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    n: usize,
    d: usize,
    data: Vec<f64>,
    labels: Option<Vec<u32>>,
}

impl EmbeddingSet {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid(format!(
                "embedding set must be non-empty, got {n}x{d}"
            )));
        }
        let expected = n
            .checked_mul(d)
            .ok_or_else(|| invalid("embedding set size overflows"))?;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{d} = {expected} values"),
                actual: format!("{} values", data.len()),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite embedding value at row {}, column {}",
                i / d,
                i % d
            )));
        }
        Ok(Self {
            n,
            d,
            data,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of length {d}"),
                actual: format!("row {bad} has length {}", rows[bad].len()),
            });
        }
        Self::new(rows.len(), d, rows.concat())
    }

    /// Attaches one integer label per row.
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", self.n),
                actual: format!("{} labels", labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }
}

/// `n x C` matrix of class probabilities; every row is a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    n: usize,
    classes: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    /// Row sums must be within this distance of 1.
    pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(n: usize, classes: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("probability matrix needs at least one row"));
        }
        if classes < 2 {
            return Err(invalid(format!("need at least 2 classes, got {classes}")));
        }
        if data.len() != n * classes {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{classes} = {} values", n * classes),
                actual: format!("{} values", data.len()),
            });
        }
        for (i, row) in data.chunks_exact(classes).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(invalid(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(invalid(format!("row {i} sums to {sum}, expected 1")));
            }
        }
        Ok(Self { n, classes, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of length {classes}"),
                actual: format!("row {bad} has length {}", rows[bad].len()),
            });
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.classes..(i + 1) * self.classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.classes)
    }
}

/// Mean and covariance of an embedding set.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussianStats {
    pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(invalid("gaussian stats need d >= 1"));
        }
        if sigma.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                expected: format!("{d}x{d} covariance"),
                actual: format!("{}x{}", sigma.nrows(), sigma.ncols()),
            });
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("gaussian stats contain non-finite values"));
        }
        let scale = sigma.amax().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > Self::SYMMETRY_TOLERANCE * scale {
                    return Err(invalid(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { mu, sigma })
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }
}

/// Parameters of the inverse multiquadric kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma_sq: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { gamma_sq: 8.0 }
    }
}

impl KernelParams {
    pub fn new(gamma_sq: f64) -> Result<Self> {
        let p = Self { gamma_sq };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_sq.is_finite() && self.gamma_sq > 0.0) {
            return Err(invalid(format!(
                "gamma_sq must be positive, got {}",
                self.gamma_sq
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_set_rejects_bad_shapes() {
        assert!(EmbeddingSet::new(0, 3, vec![]).is_err());
        assert!(EmbeddingSet::new(2, 2, vec![0.0; 3]).is_err());
        assert!(EmbeddingSet::new(1, 1, vec![f64::NAN]).is_err());
        assert!(EmbeddingSet::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let s = EmbeddingSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.row(1), &[3.0, 4.0]);
        assert!(s.clone().with_labels(vec![1]).is_err());
        assert_eq!(
            s.with_labels(vec![4, 5]).unwrap().labels(),
            Some(&[4, 5][..])
        );
    }

    #[test]
    fn prob_matrix_validation() {
        assert!(ProbMatrix::from_rows(&[vec![1.0]]).is_err());
        assert!(ProbMatrix::from_rows(&[vec![0.25, 0.25]]).is_err());
        assert!(ProbMatrix::from_rows(&[vec![1.5, -0.5]]).is_err());
        assert!(ProbMatrix::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn gaussian_stats_require_symmetry() {
        let mu = DVector::zeros(2);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GaussianStats::new(mu.clone(), bad).is_err());
        assert!(GaussianStats::new(mu, DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn kernel_params_must_be_positive() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(f64::INFINITY).is_err());
        assert_eq!(KernelParams::default().gamma_sq, 8.0);
    }
}
