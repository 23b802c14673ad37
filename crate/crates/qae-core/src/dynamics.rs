//! Piecewise-constant control of a Heisenberg spin chain. The encoder unitary
//! is the time-ordered product of slice propagators exp(-i dt H_k), with
//! later slices multiplying on the left.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigendecompose, ComplexMatrix};
use crate::states::{embed_single, heisenberg_drift, pauli_x, pauli_y};
use crate::{Error, Result};

const UNITARITY_TOL: f64 = 1e-9;

/// Default pulse shape and bounds.
pub const DEFAULT_TOTAL_TIME: f64 = 20.0;
pub const DEFAULT_PIECES: usize = 100;
pub const DEFAULT_BOUNDS: (f64, f64) = (-10.0, 10.0);

/// A verified unitary: construction checks ||U†U - I||_max <= 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("unitary must be square".into()));
        }
        let defect = matrix
            .adjoint()
            .matmul(&matrix)
            .max_abs_diff(&ComplexMatrix::identity(matrix.rows()));
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// U M U†.
    pub fn conjugate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.matmul(m).matmul(&self.matrix.adjoint())
    }
}

/// Heisenberg chain with X/Y controls on the first two qubits.
#[derive(Debug, Clone)]
pub struct SpinChainSystem {
    n_qubits: usize,
    drift: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
}

impl SpinChainSystem {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Ok(Self {
            n_qubits,
            drift: heisenberg_drift(n_qubits)?,
            controls: control_hamiltonians(n_qubits)?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn controls(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }
}

/// Control Hamiltonians [X0, Y0, X1, Y1] embedded by identity padding.
pub fn control_hamiltonians(n_qubits: usize) -> Result<Vec<ComplexMatrix>> {
    if n_qubits < 2 {
        return Err(Error::InvalidParameter(
            "controls act on the first two qubits; need n >= 2".into(),
        ));
    }
    Ok(vec![
        embed_single(&pauli_x(), 0, n_qubits)?,
        embed_single(&pauli_y(), 0, n_qubits)?,
        embed_single(&pauli_x(), 1, n_qubits)?,
        embed_single(&pauli_y(), 1, n_qubits)?,
    ])
}

/// Piecewise-constant control amplitudes: an N x M grid stored flat,
/// slice-major (slice k occupies amplitudes[k*M .. (k+1)*M]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub total_time: f64,
    pub pieces: usize,
    pub n_controls: usize,
    pub bounds: (f64, f64),
    pub amplitudes: Vec<f64>,
}

impl ControlSchedule {
    pub fn new(
        total_time: f64,
        pieces: usize,
        n_controls: usize,
        bounds: (f64, f64),
        amplitudes: Vec<f64>,
    ) -> Result<Self> {
        if pieces == 0 || total_time <= 0.0 {
            return Err(Error::InvalidParameter(
                "schedule needs pieces > 0 and total_time > 0".into(),
            ));
        }
        if bounds.0 > bounds.1 {
            return Err(Error::InvalidParameter("bounds out of order".into()));
        }
        if amplitudes.len() != pieces * n_controls {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes, got {}",
                pieces * n_controls,
                amplitudes.len()
            )));
        }
        for &u in &amplitudes {
            if !u.is_finite() {
                return Err(Error::NonFinite);
            }
            if u < bounds.0 || u > bounds.1 {
                return Err(Error::InvalidParameter(format!(
                    "amplitude {u} outside bounds [{}, {}]",
                    bounds.0, bounds.1
                )));
            }
        }
        Ok(Self {
            total_time,
            pieces,
            n_controls,
            bounds,
            amplitudes,
        })
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.pieces as f64
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.amplitudes[k * self.n_controls..(k + 1) * self.n_controls]
    }
}

/// U(T) = U_N ... U_2 U_1 with U_k = exp(-i dt (H0 + sum_j u_j[k] H_j)).
///
/// Each slice exponential is exact (spectral), so every intermediate is
/// unitary to machine precision.
pub fn propagate(system: &SpinChainSystem, schedule: &ControlSchedule) -> Result<UnitaryOperator> {
    if schedule.n_controls != system.n_controls() {
        return Err(Error::Dimension(format!(
            "schedule has {} controls, system has {}",
            schedule.n_controls,
            system.n_controls()
        )));
    }
    let dt = schedule.dt();
    let mut u = ComplexMatrix::identity(system.dim());
    for k in 0..schedule.pieces {
        let mut h = system.drift().clone();
        for (j, &amp) in schedule.slice(k).iter().enumerate() {
            if amp != 0.0 {
                h = h.add(&system.controls()[j].scale(Complex64::new(amp, 0.0)));
            }
        }
        let slice = hermitian_eigendecompose(&h)?
            .apply(|l| (Complex64::new(0.0, -dt) * l).exp())?;
        u = slice.matmul(&u);
    }
    UnitaryOperator::new(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_function, tensor_product};
    use crate::states::pauli_z;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_schedule(system: &SpinChainSystem, pieces: usize, rng: &mut StdRng) -> ControlSchedule {
        let amplitudes: Vec<f64> = (0..pieces * system.n_controls())
            .map(|_| rng.gen_range(-10.0..10.0))
            .collect();
        ControlSchedule::new(2.0, pieces, system.n_controls(), (-10.0, 10.0), amplitudes).unwrap()
    }

    #[test]
    fn drift_two_qubit_expansion() {
        let drift = heisenberg_drift(2).unwrap();
        let expected = tensor_product(&pauli_x(), &pauli_x())
            .unwrap()
            .add(&tensor_product(&pauli_y(), &pauli_y()).unwrap())
            .add(&tensor_product(&pauli_z(), &pauli_z()).unwrap());
        assert_eq!(drift.max_abs_diff(&expected), 0.0);
        assert_eq!(drift.hermiticity_defect(), 0.0);
    }

    #[test]
    fn drift_two_qubit_spectrum_is_triplet_singlet() {
        // XX + YY + ZZ = 2 SWAP - I, so eigenvalues are {1, 1, 1, -3}.
        let drift = heisenberg_drift(2).unwrap();
        let eig = hermitian_eigendecompose(&drift).unwrap();
        assert_abs_diff_eq!(eig.values[0], -3.0, epsilon = 1e-12);
        for v in &eig.values[1..] {
            assert_abs_diff_eq!(v, &1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn controls_fixed_ordering() {
        let controls = control_hamiltonians(2).unwrap();
        let x0 = tensor_product(&pauli_x(), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(controls[0].max_abs_diff(&x0), 0.0);
        for c in &controls {
            assert_eq!(c.hermiticity_defect(), 0.0);
            assert_abs_diff_eq!(c.trace().norm(), 0.0, epsilon = 1e-15);
        }
        // X0 and Y0 anticommute.
        let anti = controls[0]
            .matmul(&controls[1])
            .add(&controls[1].matmul(&controls[0]));
        assert_eq!(anti.max_abs(), 0.0);
    }

    #[test]
    fn zero_controls_give_drift_evolution() {
        let system = SpinChainSystem::new(2).unwrap();
        let schedule =
            ControlSchedule::new(20.0, 100, 4, (-10.0, 10.0), vec![0.0; 400]).unwrap();
        let u = propagate(&system, &schedule).unwrap();
        let expected = hermitian_function(system.drift(), |l| {
            (Complex64::new(0.0, -20.0) * l).exp()
        })
        .unwrap();
        assert!(u.matrix().max_abs_diff(&expected) <= 1e-9);
    }

    #[test]
    fn piecewise_constant_exactness() {
        // Constant amplitudes: one slice and two slices agree exactly.
        let system = SpinChainSystem::new(2).unwrap();
        let amps = [1.3, -0.4, 2.2, 0.9];
        let one = ControlSchedule::new(1.0, 1, 4, (-10.0, 10.0), amps.to_vec()).unwrap();
        let mut doubled = Vec::new();
        doubled.extend_from_slice(&amps);
        doubled.extend_from_slice(&amps);
        let two = ControlSchedule::new(1.0, 2, 4, (-10.0, 10.0), doubled).unwrap();
        let ua = propagate(&system, &one).unwrap();
        let ub = propagate(&system, &two).unwrap();
        assert!(ua.matrix().max_abs_diff(ub.matrix()) <= 1e-10);
    }

    #[test]
    fn random_schedule_is_unitary() {
        let system = SpinChainSystem::new(3).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let schedule = random_schedule(&system, 20, &mut rng);
        let u = propagate(&system, &schedule).unwrap();
        let defect = u
            .matrix()
            .adjoint()
            .matmul(u.matrix())
            .max_abs_diff(&ComplexMatrix::identity(8));
        assert!(defect <= 1e-9);
    }

    #[test]
    fn split_schedule_composes() {
        let system = SpinChainSystem::new(2).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let schedule = random_schedule(&system, 10, &mut rng);
        let full = propagate(&system, &schedule).unwrap();
        let half = schedule.amplitudes.len() / 2;
        let first = ControlSchedule::new(1.0, 5, 4, (-10.0, 10.0), schedule.amplitudes[..half].to_vec())
            .unwrap();
        let second =
            ControlSchedule::new(1.0, 5, 4, (-10.0, 10.0), schedule.amplitudes[half..].to_vec())
                .unwrap();
        let ua = propagate(&system, &first).unwrap();
        let ub = propagate(&system, &second).unwrap();
        let composed = ub.matrix().matmul(ua.matrix());
        assert!(full.matrix().max_abs_diff(&composed) <= 1e-9);
    }

    #[test]
    fn forward_then_adjoint_is_identity() {
        let system = SpinChainSystem::new(2).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let schedule = random_schedule(&system, 8, &mut rng);
        let u = propagate(&system, &schedule).unwrap();
        let roundtrip = u.adjoint().matrix().matmul(u.matrix());
        assert!(roundtrip.max_abs_diff(&ComplexMatrix::identity(4)) <= 1e-8);
    }

    #[test]
    fn schedule_rejects_out_of_bounds() {
        assert!(ControlSchedule::new(1.0, 1, 4, (-10.0, 10.0), vec![0.0, 11.0, 0.0, 0.0]).is_err());
        assert!(
            ControlSchedule::new(1.0, 1, 4, (-10.0, 10.0), vec![0.0, f64::NAN, 0.0, 0.0]).is_err()
        );
    }

    #[test]
    fn unitary_type_rejects_nonunitary() {
        let m = ComplexMatrix::identity(2).scale(Complex64::new(2.0, 0.0));
        assert!(matches!(UnitaryOperator::new(m), Err(Error::NotUnitary { .. })));
    }
}
