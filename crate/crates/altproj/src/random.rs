//! Seeded random instances. All randomness in the crate goes through
//! `ChaCha8Rng` seeded from a `u64`, so a seed pins every number.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{orthonormalize, Matrix, Subspace, Vector, DEFAULT_TOL};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector of independent standard normal entries.
pub fn gaussian_vector(rng: &mut Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Span of `d` Gaussian vectors in R^n (dimension `d` almost surely).
pub fn random_subspace(rng: &mut Rng, n: usize, d: usize) -> Subspace {
    let vs: Vec<Vector> = (0..d).map(|_| gaussian_vector(rng, n)).collect();
    orthonormalize(&vs, n, DEFAULT_TOL).expect("gaussian vectors are finite")
}

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut Rng, n: usize) -> Matrix {
    random_subspace(rng, n, n).basis().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_numbers() {
        let a = gaussian_vector(&mut rng(7), 5);
        let b = gaussian_vector(&mut rng(7), 5);
        assert_eq!(a, b);
        assert_ne!(a, gaussian_vector(&mut rng(8), 5));
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(&mut rng(1), 6);
        assert!((q.transpose() * &q - Matrix::identity(6, 6)).amax() < 1e-12);
    }
}
