//! Input-state families and Hamiltonian builders: transverse-field Ising
//! thermal states, Werner states, maximally mixed states blended with pure
//! states, and Haar-random pure states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigendecompose, tensor_product, ComplexMatrix};
use crate::qinfo::{DensityMatrix, PureState};
use crate::{Error, Result};

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .expect("constant")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .expect("constant")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

/// Embeds a single-qubit operator at the given site of an n-qubit register,
/// site 0 on the leading (slow) index.
pub fn embed_single(op: &ComplexMatrix, site: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if site >= n_qubits {
        return Err(Error::InvalidParameter(format!(
            "site {site} out of range for {n_qubits} qubits"
        )));
    }
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n_qubits {
        let factor = if q == site {
            op.clone()
        } else {
            ComplexMatrix::identity(2)
        };
        out = tensor_product(&out, &factor)?;
    }
    Ok(out)
}

/// Sum of op_site * op_(site+1) couplings over an open chain.
fn two_site_coupling(op: &ComplexMatrix, n_qubits: usize) -> Result<ComplexMatrix> {
    let dim = 1 << n_qubits;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for site in 0..n_qubits - 1 {
        let a = embed_single(op, site, n_qubits)?;
        let b = embed_single(op, site + 1, n_qubits)?;
        h = h.add(&a.matmul(&b));
    }
    Ok(h)
}

/// Transverse-field Ising Hamiltonian on an open chain with unit couplings:
/// H = -(sum_j Z_j Z_{j+1} + sum_j X_j).
pub fn ising_hamiltonian(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits < 2 {
        return Err(Error::InvalidParameter(
            "Ising chain needs at least 2 qubits".into(),
        ));
    }
    let mut h = two_site_coupling(&pauli_z(), n_qubits)?;
    for site in 0..n_qubits {
        h = h.add(&embed_single(&pauli_x(), site, n_qubits)?);
    }
    Ok(h.scale(Complex64::new(-1.0, 0.0)))
}

/// Isotropic Heisenberg drift on an open chain:
/// sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}).
pub fn heisenberg_drift(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits < 2 {
        return Err(Error::InvalidParameter(
            "Heisenberg chain needs at least 2 qubits".into(),
        ));
    }
    let xx = two_site_coupling(&pauli_x(), n_qubits)?;
    let yy = two_site_coupling(&pauli_y(), n_qubits)?;
    let zz = two_site_coupling(&pauli_z(), n_qubits)?;
    Ok(xx.add(&yy).add(&zz))
}

/// Gibbs state exp(-beta H)/Z of the n-qubit Ising chain.
pub fn thermal_state(n_qubits: usize, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    let h = ising_hamiltonian(n_qubits)?;
    let eig = hermitian_eigendecompose(&h)?;
    let min = *eig.values.first().expect("nonempty spectrum");
    let max = *eig.values.last().expect("nonempty spectrum");
    if beta.abs() * (max - min) > 700.0 {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} times spectral range {:.3} would overflow",
            max - min
        )));
    }
    // Shift by the ground energy before exponentiating; the shift cancels in
    // the normalization.
    let unnormalized = eig.apply(|l| Complex64::new((-beta * (l - min)).exp(), 0.0))?;
    let z = unnormalized.trace().re;
    DensityMatrix::new(unnormalized.scale(Complex64::new(1.0 / z, 0.0)))
}

/// Swap operator sum_{kj} |kj><jk| on a d x d bipartite space.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut swap = ComplexMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for j in 0..d {
            swap[(k * d + j, j * d + k)] = Complex64::new(1.0, 0.0);
        }
    }
    swap
}

/// Werner state rho(alpha) = (I - alpha SWAP) / (d^2 - d alpha) on two
/// d-dimensional subsystems, alpha in [-1, 1].
pub fn werner_state(d: usize, alpha: f64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter("Werner subsystem dim >= 2".into()));
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "Werner alpha {alpha} outside [-1, 1]"
        )));
    }
    let dim = d * d;
    let norm = 1.0 / (dim as f64 - d as f64 * alpha);
    let m = ComplexMatrix::identity(dim)
        .sub(&swap_operator(d).scale(Complex64::new(alpha, 0.0)))
        .scale(Complex64::new(norm, 0.0));
    DensityMatrix::new(m)
}

/// rho(p0) = p0 |psi><psi| + (1 - p0) I/d.
pub fn blended_state(d: usize, p0: f64, psi: &PureState) -> Result<DensityMatrix> {
    if psi.dim() != d {
        return Err(Error::Dimension(format!(
            "pure state dim {} does not match {d}",
            psi.dim()
        )));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidParameter(format!(
            "blend ratio p0 {p0} outside [0, 1]"
        )));
    }
    psi.projector().mix(&DensityMatrix::maximally_mixed(d), p0)
}

/// Haar-random pure state: normalized complex standard-normal vector,
/// deterministic per seed.
pub fn haar_random_pure(d: usize, seed: u64) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amplitudes: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amplitudes {
        *z /= norm;
    }
    PureState::new(amplitudes)
}

/// Declarative description of an input-state family, serializable into the
/// experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateFamilySpec {
    Thermal { n_qubits: usize, beta: f64 },
    Werner { subsystem_dim: usize, alpha: f64 },
    Blended { dim: usize, p0: f64, psi_seed: u64 },
    HaarPure { dim: usize, seed: u64 },
    MaximallyMixed { dim: usize },
    BasisZero { dim: usize },
}

impl StateFamilySpec {
    pub fn build(&self) -> Result<DensityMatrix> {
        match *self {
            StateFamilySpec::Thermal { n_qubits, beta } => thermal_state(n_qubits, beta),
            StateFamilySpec::Werner {
                subsystem_dim,
                alpha,
            } => werner_state(subsystem_dim, alpha),
            StateFamilySpec::Blended { dim, p0, psi_seed } => {
                blended_state(dim, p0, &haar_random_pure(dim, psi_seed)?)
            }
            StateFamilySpec::HaarPure { dim, seed } => {
                Ok(haar_random_pure(dim, seed)?.projector())
            }
            StateFamilySpec::MaximallyMixed { dim } => Ok(DensityMatrix::maximally_mixed(dim)),
            StateFamilySpec::BasisZero { dim } => Ok(DensityMatrix::basis_zero(dim)),
        }
    }

    /// Short label used in CSV rows and seed derivation.
    pub fn label(&self) -> &'static str {
        match self {
            StateFamilySpec::Thermal { .. } => "thermal",
            StateFamilySpec::Werner { .. } => "werner",
            StateFamilySpec::Blended { .. } => "blended",
            StateFamilySpec::HaarPure { .. } => "haar_pure",
            StateFamilySpec::MaximallyMixed { .. } => "maximally_mixed",
            StateFamilySpec::BasisZero { .. } => "basis_zero",
        }
    }

    /// The swept parameter (beta, alpha, or p0), when the family has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            StateFamilySpec::Thermal { beta, .. } => Some(beta),
            StateFamilySpec::Werner { alpha, .. } => Some(alpha),
            StateFamilySpec::Blended { p0, .. } => Some(p0),
            _ => None,
        }
    }

    /// Same family with the swept parameter replaced.
    pub fn with_parameter(&self, value: f64) -> Self {
        let mut spec = self.clone();
        match &mut spec {
            StateFamilySpec::Thermal { beta, .. } => *beta = value,
            StateFamilySpec::Werner { alpha, .. } => *alpha = value,
            StateFamilySpec::Blended { p0, .. } => *p0 = value,
            _ => {}
        }
        spec
    }
}
