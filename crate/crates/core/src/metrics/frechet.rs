use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{EmbeddingSet, GaussianStats};
use crate::error::{invalid, Error, Result};

/// Column means and the `n - 1` normalized covariance, symmetrized.
pub fn gaussian_stats(x: &EmbeddingSet) -> Result<GaussianStats> {
    let (n, d) = (x.n(), x.d());
    if n < 2 {
        return Err(invalid(format!(
            "covariance needs at least 2 samples, got {n}"
        )));
    }
    let mut mu = DVector::zeros(d);
    for row in x.rows() {
        for (m, v) in mu.iter_mut().zip(row) {
            *m += v;
        }
    }
    mu /= n as f64;
    let mut sigma = DMatrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in x.rows() {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(mu.iter()) {
            *c = v - m;
        }
        for i in 0..d {
            for j in 0..=i {
                sigma[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = sigma[(i, j)] / (n - 1) as f64;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    GaussianStats::new(mu, sigma)
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues below this (relative to the largest magnitude) mean the
/// covariance is not positive semi-definite.
const PSD_TOLERANCE: f64 = 1e-8;

fn check_psd(eig: &SymmetricEigen<f64, nalgebra::Dyn>, which: &str) -> Result<()> {
    let scale = eig.eigenvalues.amax().max(1.0);
    let min = eig.eigenvalues.min();
    if min < -PSD_TOLERANCE * scale {
        return Err(invalid(format!(
            "{which} covariance is not positive semi-definite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

/// Fréchet distance between two Gaussians:
/// `|mu_r - mu_g|^2 + tr(S_r) + tr(S_g) - 2 tr((S_r^1/2 S_g S_r^1/2)^1/2)`.
pub fn frechet_distance(r: &GaussianStats, g: &GaussianStats) -> Result<f64> {
    if r.d() != g.d() {
        return Err(Error::ShapeMismatch {
            expected: format!("dimension {}", r.d()),
            actual: format!("dimension {}", g.d()),
        });
    }
    if r == g {
        return Ok(0.0);
    }
    let eig_r = SymmetricEigen::new(symmetrize(r.sigma()));
    check_psd(&eig_r, "first")?;
    check_psd(&SymmetricEigen::new(symmetrize(g.sigma())), "second")?;

    let roots = eig_r.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig_r.eigenvectors;
    let sqrt_r = v * DMatrix::from_diagonal(&roots) * v.transpose();
    let inner = symmetrize(&(&sqrt_r * g.sigma() * &sqrt_r));
    let tr_covmean: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();

    let diff = r.mu() - g.mu();
    let mean_term: f64 = diff.iter().map(|v| v * v).sum();
    let value = mean_term + r.sigma().trace() + g.sigma().trace() - 2.0 * tr_covmean;
    Ok(value.max(0.0))
}

/// Fréchet distance between Gaussians fitted to two embedding sets.
pub fn fad(real_emb: &EmbeddingSet, gen_emb: &EmbeddingSet) -> Result<f64> {
    frechet_distance(&gaussian_stats(real_emb)?, &gaussian_stats(gen_emb)?)
}
