use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Orthonormal DCT-II / DCT-III pair for a fixed length, computed by direct
/// summation over a cosine table so results are reproducible bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dct {
    len: usize,
    /// `table[k * len + n] = s_k cos(pi (n + 1/2) k / len)`
    table: Vec<f64>,
}

impl Dct {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("DCT length must be at least 1"));
        }
        let n_f = len as f64;
        let mut table = vec![0.0; len * len];
        for k in 0..len {
            let s = if k == 0 {
                (1.0 / n_f).sqrt()
            } else {
                (2.0 / n_f).sqrt()
            };
            for n in 0..len {
                table[k * len + n] = s * (PI * (n as f64 + 0.5) * k as f64 / n_f).cos();
            }
        }
        Ok(Self { len, table })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len {
            return Err(invalid(format!(
                "DCT of length {} applied to {} values",
                self.len,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok((0..self.len)
            .map(|k| {
                let row = &self.table[k * self.len..(k + 1) * self.len];
                row.iter().zip(x).map(|(c, v)| c * v).sum()
            })
            .collect())
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs)?;
        Ok((0..self.len)
            .map(|n| {
                (0..self.len)
                    .map(|k| self.table[k * self.len + n] * coeffs[k])
                    .sum()
            })
            .collect())
    }
}

/// Orthonormal type-II DCT.
pub fn dct_ii(x: &[f64]) -> Result<Vec<f64>> {
    Dct::new(x.len())?.forward(x)
}

/// Orthonormal type-III DCT, the inverse of [`dct_ii`].
pub fn dct_iii(x: &[f64]) -> Result<Vec<f64>> {
    Dct::new(x.len())?.inverse(x)
}
