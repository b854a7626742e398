use std::cmp::Ordering;

use rayon::prelude::*;

use super::{EmbeddingSet, KernelParams};
use crate::error::{invalid, Error, Result};

/// `1 / (1 + |x - y|^2 / (2 gamma^2))`.
pub fn imq_kernel(x: &[f64], y: &[f64], params: KernelParams) -> Result<f64> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("length {}", x.len()),
            actual: format!("length {}", y.len()),
        });
    }
    Ok(imq(x, y, params.gamma_sq))
}

#[inline]
fn imq(x: &[f64], y: &[f64], gamma_sq: f64) -> f64 {
    let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 / (1.0 + dist / (2.0 * gamma_sq))
}

/// Sum of `k(x_i, x_j)` over `i != j`.
fn within_sum(x: &EmbeddingSet, gamma_sq: f64) -> f64 {
    let partial: Vec<f64> = (0..x.n())
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            ((i + 1)..x.n()).map(|j| imq(xi, x.row(j), gamma_sq)).sum()
        })
        .collect();
    2.0 * partial.iter().sum::<f64>()
}

fn cross_sum(x: &EmbeddingSet, y: &EmbeddingSet, gamma_sq: f64) -> f64 {
    let partial: Vec<f64> = (0..x.n())
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            y.rows().map(|yj| imq(xi, yj, gamma_sq)).sum()
        })
        .collect();
    partial.iter().sum()
}

/// Total order on sets used to pick a summation order for the cross term
/// that does not depend on argument order.
fn canonical_order(a: &EmbeddingSet, b: &EmbeddingSet) -> Ordering {
    a.n().cmp(&b.n()).then_with(|| {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(p, q)| p.to_bits().cmp(&q.to_bits()))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Unbiased estimate of the squared maximum mean discrepancy between the
/// distributions behind `x` and `y`. Can be negative.
pub fn mmd2_unbiased(x: &EmbeddingSet, y: &EmbeddingSet, params: KernelParams) -> Result<f64> {
    params.validate()?;
    if x.n() < 2 || y.n() < 2 {
        return Err(invalid(format!(
            "unbiased MMD needs at least 2 samples per side, got {} and {}",
            x.n(),
            y.n()
        )));
    }
    if x.d() != y.d() {
        return Err(Error::ShapeMismatch {
            expected: format!("dimension {}", x.d()),
            actual: format!("dimension {}", y.d()),
        });
    }
    let g = params.gamma_sq;
    let (m, n) = (x.n() as f64, y.n() as f64);
    let xx = within_sum(x, g) / (m * (m - 1.0));
    let yy = within_sum(y, g) / (n * (n - 1.0));
    let cross = match canonical_order(x, y) {
        Ordering::Greater => cross_sum(y, x, g),
        _ => cross_sum(x, y, g),
    };
    Ok((xx + yy) - 2.0 * cross / (m * n))
}

/// Kernel Inception Distance: raw unbiased MMD² with `gamma^2 = 8`.
pub fn kid(real: &EmbeddingSet, gen: &EmbeddingSet) -> Result<f64> {
    mmd2_unbiased(real, gen, KernelParams::default())
}
