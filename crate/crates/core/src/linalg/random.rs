use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Matrix;

/// Seeded deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows×cols` matrix of independent standard normal draws, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    gaussian_matrix_from(rows, cols, &mut rng)
}

pub fn gaussian_matrix_from<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("gaussian draws are finite")
}

/// Q factor of a seeded Gaussian `d×k` matrix: a uniformly random orthonormal frame.
pub fn random_orthonormal(d: usize, k: usize, seed: u64) -> Matrix {
    super::qr_decompose(&gaussian_matrix(d, k, seed))
        .expect("Gaussian matrices have full column rank almost surely")
        .q
}
