//! Generative-evaluation metrics over embeddings and class probabilities:
//! Inception Score, KID (unbiased MMD² with an inverse multiquadric kernel)
//! and the Fréchet distance between fitted Gaussians (FAD).
//!
//! All reductions run sequentially in `f64` in a fixed order, so results are
//! reproducible bit for bit regardless of the rayon pool size.

mod frechet;
mod inception;
mod kernel;
mod types;

pub use frechet::{fad, frechet_distance, gaussian_stats};
pub use inception::inception_score;
pub use kernel::{imq_kernel, kid, mmd2_unbiased};
pub use types::{EmbeddingSet, GaussianStats, KernelParams, ProbMatrix};
