//! Random matrix generators shared by unit, property, and acceptance tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;

/// Random complex matrix with standard-normal real and imaginary parts.
pub fn random_complex(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite by construction")
}

/// Random Hermitian matrix, (G + G†)/2 for Ginibre G.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_complex(n, n, rng).symmetrize()
}

/// Random full-rank density matrix, G G† normalized to unit trace.
pub fn random_density_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = random_complex(n, n, rng);
    let psd = g.matmul(&g.adjoint());
    let trace = psd.trace().re;
    psd.scale(Complex64::new(1.0 / trace, 0.0))
}

/// Random unitary via spectral exponential of a random Hermitian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let h = random_hermitian(n, rng);
    crate::linalg::hermitian_function(&h, |l| (Complex64::new(0.0, -1.0) * l).exp())
        .expect("hermitian by construction")
}
