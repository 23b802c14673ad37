//! Dense complex matrix kernel: tensor products, partial traces, Hermitian
//! eigendecomposition via cyclic Jacobi rotations, and functions of Hermitian
//! matrices. Everything downstream (states, propagators, fidelities) sits on
//! top of this module.
//!
//! Storage is row-major throughout, and in all tensor products the first
//! operand occupies the slow (leading) index. That single convention is load
//! bearing: subsystem A is always the leading factor.

pub use num_complex::Complex64;

use crate::Error;

/// Hermiticity tolerance: max-abs of H - H† must stay below this.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Which subsystem a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from row-major entries, rejecting NaN/Inf.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Convenience for tests and constructors: real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn check_finite(&self) -> Result<(), Error> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let lhs_row = i * other.cols;
                let rhs_row = k * other.cols;
                for j in 0..other.cols {
                    out.data[lhs_row + j] += a * other.data[rhs_row + j];
                }
            }
        }
        out
    }

    /// Largest |entry| of self - other.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-abs of H - H†.
    pub fn hermiticity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut defect = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// (H + H†)/2.
    pub fn symmetrize(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in i..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product with the FIRST operand on the slow (leading) index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    a.check_finite()?;
    b.check_finite()?;
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let f = a[(ia, ja)];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace of a dim_a*dim_b square matrix over one factor.
///
/// Subsystem A is the leading (slow) index: row a*dim_b + b.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<ComplexMatrix, Error> {
    if !rho.is_square() || rho.rows() != dim_a * dim_b {
        return Err(Error::Dimension(format!(
            "partial trace expects a {}x{} matrix, got {}x{}",
            dim_a * dim_b,
            dim_a * dim_b,
            rho.rows(),
            rho.cols()
        )));
    }
    match keep {
        Keep::A => {
            let mut out = ComplexMatrix::zeros(dim_a, dim_a);
            for a in 0..dim_a {
                for a2 in 0..dim_a {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..dim_b {
                        acc += rho[(a * dim_b + b, a2 * dim_b + b)];
                    }
                    out[(a, a2)] = acc;
                }
            }
            Ok(out)
        }
        Keep::B => {
            let mut out = ComplexMatrix::zeros(dim_b, dim_b);
            for b in 0..dim_b {
                for b2 in 0..dim_b {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..dim_a {
                        acc += rho[(a * dim_b + b, a * dim_b + b2)];
                    }
                    out[(b, b2)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// an orthonormal eigenvector matrix (eigenvectors in columns).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V diag(f(lambda)) V†.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix, Error> {
        let n = self.values.len();
        let mapped: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        if mapped.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vectors[(i, k)] * mapped[k] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Dimensions stay at or below 64 here, so repeated O(n^3) sweeps are cheap
/// and unconditionally stable. Inputs with a hermiticity defect below
/// [`HERMITICITY_TOL`] are symmetrized first; larger defects are errors.
pub fn hermitian_eigendecompose(h: &ComplexMatrix) -> Result<HermitianEigen, Error> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    h.check_finite()?;
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.rows();
    let mut a = h.symmetrize();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.max_abs().max(1.0);
    let tol = 1e-15 * scale;
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[(p, q)];
                if g.norm() <= tol {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let phase = g / g.norm(); // e^{i phi}
                let theta = 0.5 * (2.0 * g.norm()).atan2(alpha - beta);
                let c = theta.cos();
                let s = theta.sin();
                // Rotation U with columns
                //   u_p = ( c, e^{-i phi} s ),  u_q = ( -e^{i phi} s, c )
                // in the (p, q) plane; apply A <- U† A U, V <- V U.
                let sp = phase.conj() * s; // e^{-i phi} s
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * sp;
                    a[(k, q)] = -akp * sp.conj() + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * sp.conj();
                    a[(q, k)] = -apk * sp + aqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * sp;
                    v[(k, q)] = -vkp * sp.conj() + vkq * c;
                }
            }
        }
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Phase-fix each column: largest-magnitude component made real
        // positive, so decompositions are deterministic.
        let mut pivot = 0;
        let mut best = 0.0f64;
        for k in 0..n {
            let mag = v[(k, old_col)].norm();
            if mag > best + 1e-15 {
                best = mag;
                pivot = k;
            }
        }
        let piv = v[(pivot, old_col)];
        let phase = if piv.norm() > 0.0 {
            piv.conj() / piv.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for k in 0..n {
            vectors[(k, new_col)] = v[(k, old_col)] * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// V diag(f(lambda)) V† for Hermitian input. Serves the matrix exponential,
/// matrix square root, and spectral entropies.
pub fn hermitian_function(
    h: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
) -> Result<ComplexMatrix, Error> {
    hermitian_eigendecompose(h)?.apply(f)
}
