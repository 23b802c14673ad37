//! Quantum-information functionals on density matrices: von Neumann entropy,
//! state fidelity, quantum mutual information, purification, and validation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    hermitian_eigendecompose, partial_trace, ComplexMatrix, Keep, HERMITICITY_TOL,
};
use crate::{Error, Result};

/// Trace and PSD tolerances for density-matrix validation.
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as exactly zero inside entropies.
const ENTROPY_FLOOR: f64 = 1e-12;

/// Which fidelity convention to report.
///
/// The squared (Jozsa) form [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2 is the
/// default: against a pure reference it reduces to a plain overlap, so
/// encoding fidelities and the QAE-pure bound live on the same scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityConvention {
    #[default]
    Squared,
    Root,
}

/// Validated density matrix: Hermitian, unit trace, PSD up to tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates a raw matrix. Eigenvalues in [-1e-9, 0) are clamped to zero
    /// and the trace renormalized when the total clamp mass is below 1e-8;
    /// anything worse is rejected.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidDensity(format!(
                "not square: {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        m.check_finite()
            .map_err(|_| Error::InvalidDensity("non-finite entries".into()))?;
        let defect = m.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "hermiticity defect {defect:.3e}"
            )));
        }
        let sym = m.symmetrize();
        let trace = sym.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let eig = hermitian_eigendecompose(&sym)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        if min < 0.0 {
            let clamp_mass: f64 = eig.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
            if clamp_mass >= 1e-8 {
                return Err(Error::InvalidDensity(format!(
                    "clamp mass {clamp_mass:.3e} too large"
                )));
            }
            let clamped = eig.apply(|l| Complex64::new(l.max(0.0), 0.0))?;
            let t = clamped.trace().re;
            return Ok(Self {
                matrix: clamped.scale(Complex64::new(1.0 / t, 0.0)),
            });
        }
        Ok(Self { matrix: sym })
    }

    /// Skips revalidation for matrices produced by operations that preserve
    /// the invariants (unitary conjugation, partial trace, convex mixing).
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    /// |0...0><0...0| of the given dimension.
    pub fn basis_zero(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::trusted(m)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigendecompose(&self.matrix)?.values)
    }

    /// Reduction onto one factor of a dim_a x dim_b split (A leading).
    pub fn reduce(&self, dim_a: usize, dim_b: usize, keep: Keep) -> Result<DensityMatrix> {
        Ok(Self::trusted(partial_trace(
            &self.matrix,
            dim_a,
            dim_b,
            keep,
        )?))
    }

    /// p * self + (1 - p) * other.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("mixing states of unequal dims".into()));
        }
        Ok(Self::trusted(
            self.matrix
                .scale(Complex64::new(p, 0.0))
                .add(&other.matrix.scale(Complex64::new(1.0 - p, 0.0))),
        ))
    }
}

/// Normalized pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::InvalidPureState("non-finite amplitudes".into()));
        }
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPureState(format!(
                "squared norm {norm_sq} is not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// |psi><psi| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix::trusted(m)
    }

    /// |<self|other>|^2.
    pub fn overlap(&self, other: &PureState) -> f64 {
        let inner: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        inner.norm_sqr()
    }
}

/// S(rho) = -Tr(rho ln rho) in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let values = rho.eigenvalues()?;
    let s: f64 = values
        .iter()
        .filter(|&&l| l > ENTROPY_FLOOR)
        .map(|&l| -l * l.ln())
        .sum();
    Ok(s)
}

/// State fidelity. Squared convention: [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2.
pub fn fidelity_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    convention: FidelityConvention,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "fidelity of {}-dim vs {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sqrt_rho =
        hermitian_eigendecompose(rho.matrix())?.apply(|l| Complex64::new(l.max(0.0).sqrt(), 0.0))?;
    let inner = sqrt_rho.matmul(sigma.matrix()).matmul(&sqrt_rho);
    let eig = hermitian_eigendecompose(&inner.symmetrize())?;
    let root: f64 = eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    let root = root.clamp(0.0, 1.0);
    Ok(match convention {
        FidelityConvention::Root => root,
        FidelityConvention::Squared => root * root,
    })
}

/// Fidelity under the default squared convention.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_with(rho, sigma, FidelityConvention::Squared)
}

/// I(rho) = S(Tr_A rho) + S(Tr_B rho) - S(rho), subsystem A leading.
pub fn quantum_mutual_information(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
) -> Result<f64> {
    if rho.dim() != dim_a * dim_b {
        return Err(Error::Dimension(format!(
            "QMI split {dim_a}x{dim_b} does not match dim {}",
            rho.dim()
        )));
    }
    let marginal_a = rho.reduce(dim_a, dim_b, Keep::A)?;
    let marginal_b = rho.reduce(dim_a, dim_b, Keep::B)?;
    Ok(von_neumann_entropy(&marginal_a)? + von_neumann_entropy(&marginal_b)?
        - von_neumann_entropy(rho)?)
}

/// Purification on a doubled system: |psi> = sum_i sqrt(p_i) |i_K>|i_R>,
/// with the reference basis |i_R> the computational basis. Eigenvalues are
/// taken in descending order so the construction is deterministic.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let d = rho.dim();
    let eig = hermitian_eigendecompose(rho.matrix())?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); d * d];
    // eig returns ascending order; walk it backwards for descending weights.
    for (slot, idx) in (0..d).rev().enumerate() {
        let p = eig.values[idx].max(0.0);
        let w = p.sqrt();
        for k in 0..d {
            amplitudes[k * d + slot] = eig.vectors[(k, idx)] * w;
        }
    }
    // Normalize away clamp noise.
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amplitudes {
        *z /= norm;
    }
    PureState::new(amplitudes)
}

/// Checks the three density-matrix invariants and returns the validated state.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(m)
}
