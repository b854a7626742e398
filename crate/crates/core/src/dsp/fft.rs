use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

fn check(x: &[Complex64]) -> Result<()> {
    if x.is_empty() || !x.len().is_power_of_two() {
        return Err(invalid(format!(
            "fft length must be a power of two, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("fft input contains non-finite values"));
    }
    Ok(())
}

/// Unnormalized forward DFT, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
pub fn fft_forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check(x)?;
    let mut buf = x.to_vec();
    FftPlanner::new()
        .plan_fft_forward(x.len())
        .process(&mut buf);
    Ok(buf)
}

/// Inverse of [`fft_forward`], including the `1/N` factor.
pub fn fft_inverse(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check(x)?;
    let mut buf = x.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(x.len())
        .process(&mut buf);
    let scale = 1.0 / x.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        x[j] * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn impulse_and_constant() {
        let mut imp = vec![Complex64::new(0.0, 0.0); 8];
        imp[0] = Complex64::new(1.0, 0.0);
        for v in fft_forward(&imp).unwrap() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let spec = fft_forward(&ones).unwrap();
        assert!((spec[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        assert!(spec[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn matches_naive_dft_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let fast = fft_forward(&x).unwrap();
        let slow = naive_dft(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }
        let back = fft_inverse(&fast).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let x = vec![Complex64::new(0.0, 0.0); 12];
        assert!(fft_forward(&x).is_err());
        assert!(fft_inverse(&[]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn parseval(values in proptest::collection::vec(-10.0f64..10.0, 64)) {
            let x: Vec<Complex64> = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let spec = fft_forward(&x).unwrap();
            let time: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let freq: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
            proptest::prop_assert!((time - freq).abs() <= 1e-9 * time.max(1e-12));
        }
    }
}
