use super::ProbMatrix;

/// `exp(E_x[KL(p(y|x) || p(y))])` with natural logs and `0 log 0 = 0`.
///
/// The result lies in `[1, C]`.
pub fn inception_score(probs: &ProbMatrix) -> f64 {
    let (n, c) = (probs.n(), probs.classes());
    let mut marginal = vec![0.0; c];
    for row in probs.rows() {
        for (m, p) in marginal.iter_mut().zip(row) {
            *m += p;
        }
    }
    for m in &mut marginal {
        *m /= n as f64;
    }
    let mut total = 0.0;
    for row in probs.rows() {
        let kl: f64 = row
            .iter()
            .zip(&marginal)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, q)| p * (p / q).ln())
            .sum();
        total += kl;
    }
    let mean_kl = (total / n as f64).clamp(0.0, (c as f64).ln());
    mean_kl.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_rows_score_one() {
        let p = ProbMatrix::from_rows(&vec![vec![0.25; 4]; 7]).unwrap();
        assert_eq!(inception_score(&p), 1.0);
    }

    #[test]
    fn distinct_one_hot_rows_score_c() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let p = ProbMatrix::from_rows(&rows).unwrap();
        assert!((inception_score(&p) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identical_peaked_rows_score_one() {
        let p = ProbMatrix::from_rows(&vec![vec![0.9, 0.1, 0.0]; 3]).unwrap();
        assert!((inception_score(&p) - 1.0).abs() < 1e-12);
    }
}
