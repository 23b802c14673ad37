//! The autoencoder itself: encode/split, the hybrid cost
//! Phi(w) = w J_pure + (1 - w) J_qmi, the QAE-pure bound, reference-state
//! strategies, decoding, and ensemble evaluation.
//!
//! Subsystem ordering: the trash space (A) occupies the LEADING tensor factor
//! everywhere. Decoding injects the reference into the trash slot:
//! rho_f = U_e† (rho_ref (x) rho_latent) U_e.

use serde::{Deserialize, Serialize};

use crate::dynamics::UnitaryOperator;
use crate::linalg::{hermitian_eigendecompose, tensor_product, Keep};
use crate::qinfo::{
    fidelity_with, quantum_mutual_information, DensityMatrix, FidelityConvention,
};
use crate::{Error, Result};

/// One compression task: input state, bipartition, cost weight.
#[derive(Debug, Clone)]
pub struct QaeProblem {
    pub n_a: usize,
    pub n_b: usize,
    pub rho0: DensityMatrix,
    pub w: f64,
}

impl QaeProblem {
    pub fn new(n_a: usize, n_b: usize, rho0: DensityMatrix, w: f64) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidParameter(
                "both trash and latent spaces need at least one qubit".into(),
            ));
        }
        if rho0.dim() != 1 << (n_a + n_b) {
            return Err(Error::Dimension(format!(
                "state dim {} does not match {} qubits",
                rho0.dim(),
                n_a + n_b
            )));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("w {w} outside [0, 1]")));
        }
        Ok(Self { n_a, n_b, rho0, w })
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }
}

/// How the ratio of pure state in the blended reference is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PrSource {
    Fixed { p_r: f64 },
    Grid { candidates: Vec<f64> },
    Bound,
    Guess,
}

impl PrSource {
    /// The candidate set {0, 0.1, ..., 1.0}.
    pub fn default_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }
}

/// How the decoding reference state is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ReferenceStrategy {
    /// rho_ref = rho_trash.
    TrashClone,
    /// rho_ref = |0...0><0...0|.
    PureZero,
    /// rho_ref = p_r |0><0| + (1 - p_r) I/d_A.
    MixBlend { p_source: PrSource },
}

impl ReferenceStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            ReferenceStrategy::TrashClone => "trash",
            ReferenceStrategy::PureZero => "pure",
            ReferenceStrategy::MixBlend { p_source } => match p_source {
                PrSource::Fixed { .. } => "mix_fixed",
                PrSource::Grid { .. } => "mix_grid",
                PrSource::Bound => "mix_bound",
                PrSource::Guess => "mix_guess",
            },
        }
    }
}

/// All metrics of one compress/decode pass.
#[derive(Debug, Clone)]
pub struct CompressionResult {
    pub j_pure: f64,
    pub j_qmi: f64,
    pub j_e: f64,
    pub j_d: f64,
    pub phi: f64,
    pub bound: f64,
    pub p_r_used: Option<f64>,
    pub latent: DensityMatrix,
    pub trash: DensityMatrix,
    pub reconstructed: DensityMatrix,
}

/// Applies the encoder and splits: returns (encoded, trash, latent) with
/// trash = Tr_B and latent = Tr_A of U_e rho0 U_e†.
pub fn encode_split(
    problem: &QaeProblem,
    u_e: &UnitaryOperator,
) -> Result<(DensityMatrix, DensityMatrix, DensityMatrix)> {
    if u_e.dim() != problem.rho0.dim() {
        return Err(Error::Dimension(format!(
            "encoder dim {} does not match state dim {}",
            u_e.dim(),
            problem.rho0.dim()
        )));
    }
    let encoded = DensityMatrix::new(u_e.conjugate(problem.rho0.matrix()).symmetrize())?;
    let trash = encoded.reduce(problem.dim_a(), problem.dim_b(), Keep::A)?;
    let latent = encoded.reduce(problem.dim_a(), problem.dim_b(), Keep::B)?;
    Ok((encoded, trash, latent))
}

/// Fidelity of the trash state against the all-zero pure state.
pub fn j_pure(trash: &DensityMatrix, convention: FidelityConvention) -> Result<f64> {
    fidelity_with(trash, &DensityMatrix::basis_zero(trash.dim()), convention)
}

/// Negative quantum mutual information across the (A, B) cut.
pub fn j_qmi(encoded: &DensityMatrix, n_a: usize, n_b: usize) -> Result<f64> {
    Ok(-quantum_mutual_information(encoded, 1 << n_a, 1 << n_b)?)
}

/// Phi(w) = w J_pure + (1 - w) J_qmi, the training objective (maximized).
pub fn phi(
    problem: &QaeProblem,
    u_e: &UnitaryOperator,
    convention: FidelityConvention,
) -> Result<f64> {
    let (encoded, trash, _) = encode_split(problem, u_e)?;
    let jp = j_pure(&trash, convention)?;
    let jq = j_qmi(&encoded, problem.n_a, problem.n_b)?;
    Ok(problem.w * jp + (1.0 - problem.w) * jq)
}

/// Sum of the 2^n_b largest eigenvalues of rho0: the supremum of the
/// encoding fidelity against any pure reference.
pub fn qae_pure_bound(rho0: &DensityMatrix, n_b: usize) -> Result<f64> {
    let d_b = 1usize << n_b;
    if d_b > rho0.dim() {
        return Err(Error::Dimension(format!(
            "latent dim {d_b} exceeds state dim {}",
            rho0.dim()
        )));
    }
    let values = hermitian_eigendecompose(rho0.matrix())?.values;
    // Ascending order; take the top d_b.
    Ok(values.iter().rev().take(d_b).sum())
}

/// Blended reference p_r |0><0| + (1 - p_r) I/d_A.
pub fn mix_reference(dim_a: usize, p_r: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_r) {
        return Err(Error::InvalidParameter(format!("p_r {p_r} outside [0, 1]")));
    }
    DensityMatrix::basis_zero(dim_a).mix(&DensityMatrix::maximally_mixed(dim_a), p_r)
}

/// Context available when a reference is resolved.
pub struct ReferenceContext<'a> {
    pub trash: &'a DensityMatrix,
    pub rho0: &'a DensityMatrix,
    pub n_b: usize,
    /// J_pure of the trained encoder (squared convention), for Guess.
    pub current_j_pure: Option<f64>,
}

/// Resolves a strategy into a concrete reference state. Grid resolution is
/// the caller's job (see [`grid_search_pr`]); requesting it here is an error.
pub fn build_reference(
    strategy: &ReferenceStrategy,
    context: &ReferenceContext,
) -> Result<(DensityMatrix, Option<f64>)> {
    match strategy {
        ReferenceStrategy::TrashClone => Ok((context.trash.clone(), None)),
        ReferenceStrategy::PureZero => {
            Ok((DensityMatrix::basis_zero(context.trash.dim()), None))
        }
        ReferenceStrategy::MixBlend { p_source } => {
            let p_r = match p_source {
                PrSource::Fixed { p_r } => *p_r,
                PrSource::Bound => {
                    let b = qae_pure_bound(context.rho0, context.n_b)?;
                    (b * b).clamp(0.0, 1.0)
                }
                PrSource::Guess => {
                    let jp = context.current_j_pure.ok_or_else(|| {
                        Error::InvalidParameter(
                            "guess strategy needs the trained J_pure in context".into(),
                        )
                    })?;
                    (jp * jp).clamp(0.0, 1.0)
                }
                PrSource::Grid { .. } => {
                    return Err(Error::InvalidParameter(
                        "grid source is resolved by grid_search_pr, not build_reference".into(),
                    ))
                }
            };
            Ok((mix_reference(context.trash.dim(), p_r)?, Some(p_r)))
        }
    }
}

/// rho_f = U_e† (reference (x) latent) U_e, reference in the trash slot.
pub fn decode(
    u_e: &UnitaryOperator,
    latent: &DensityMatrix,
    reference: &DensityMatrix,
) -> Result<DensityMatrix> {
    if reference.dim() * latent.dim() != u_e.dim() {
        return Err(Error::Dimension(format!(
            "reference dim {} times latent dim {} does not match encoder dim {}",
            reference.dim(),
            latent.dim(),
            u_e.dim()
        )));
    }
    let combined = tensor_product(reference.matrix(), latent.matrix())?;
    DensityMatrix::new(u_e.adjoint().conjugate(&combined).symmetrize())
}

/// J_d = F(rho0, rho_f).
pub fn decoding_fidelity(
    rho0: &DensityMatrix,
    rho_f: &DensityMatrix,
    convention: FidelityConvention,
) -> Result<f64> {
    fidelity_with(rho0, rho_f, convention)
}

/// Result of a grid search over blend ratios.
#[derive(Debug, Clone)]
pub struct GridSearch {
    pub best_p_r: f64,
    pub best_j_d: f64,
    /// (candidate, j_d) for every candidate, in input order.
    pub table: Vec<(f64, f64)>,
}

/// Evaluates decode + J_d for every candidate p_r on a trained encoder.
/// Ties break toward larger p_r.
pub fn grid_search_pr(
    problem: &QaeProblem,
    u_e: &UnitaryOperator,
    candidates: &[f64],
    convention: FidelityConvention,
) -> Result<GridSearch> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate list".into()));
    }
    let (_, _, latent) = encode_split(problem, u_e)?;
    let mut table = Vec::with_capacity(candidates.len());
    let mut best_p_r = candidates[0];
    let mut best_j_d = f64::NEG_INFINITY;
    for &p_r in candidates {
        let reference = mix_reference(problem.dim_a(), p_r)?;
        let rho_f = decode(u_e, &latent, &reference)?;
        let j_d = decoding_fidelity(&problem.rho0, &rho_f, convention)?;
        table.push((p_r, j_d));
        if j_d >= best_j_d - 1e-12 && (j_d > best_j_d || p_r > best_p_r) {
            best_j_d = best_j_d.max(j_d);
            best_p_r = p_r;
        }
    }
    Ok(GridSearch {
        best_p_r,
        best_j_d,
        table,
    })
}

/// Full compress/decode pass: encode, resolve the reference, decode, and
/// collect every metric.
pub fn compress(
    problem: &QaeProblem,
    u_e: &UnitaryOperator,
    strategy: &ReferenceStrategy,
    convention: FidelityConvention,
) -> Result<CompressionResult> {
    let (encoded, trash, latent) = encode_split(problem, u_e)?;
    let jp = j_pure(&trash, convention)?;
    let jq = j_qmi(&encoded, problem.n_a, problem.n_b)?;
    let phi = problem.w * jp + (1.0 - problem.w) * jq;
    let bound = qae_pure_bound(&problem.rho0, problem.n_b)?;
    // Guess squares the squared-convention J_pure, which approaches the
    // bound during training, keeping it commensurate with bound^2.
    let jp_squared = j_pure(&trash, FidelityConvention::Squared)?;

    let (reference, p_r_used) = match strategy {
        ReferenceStrategy::MixBlend {
            p_source: PrSource::Grid { candidates },
        } => {
            let grid = grid_search_pr(problem, u_e, candidates, convention)?;
            (
                mix_reference(problem.dim_a(), grid.best_p_r)?,
                Some(grid.best_p_r),
            )
        }
        _ => build_reference(
            strategy,
            &ReferenceContext {
                trash: &trash,
                rho0: &problem.rho0,
                n_b: problem.n_b,
                current_j_pure: Some(jp_squared),
            },
        )?,
    };
    let j_e = fidelity_with(&trash, &reference, convention)?;
    let reconstructed = decode(u_e, &latent, &reference)?;
    let j_d = decoding_fidelity(&problem.rho0, &reconstructed, convention)?;
    Ok(CompressionResult {
        j_pure: jp,
        j_qmi: jq,
        j_e,
        j_d,
        phi,
        bound,
        p_r_used,
        latent,
        trash,
        reconstructed,
    })
}

/// Compresses each ensemble member with the shared encoder and reference.
/// Returns per-member decoding fidelities and their weighted mean.
pub fn evaluate_ensemble(
    members: &[(f64, DensityMatrix)],
    u_e: &UnitaryOperator,
    reference: &DensityMatrix,
    n_a: usize,
    n_b: usize,
    convention: FidelityConvention,
) -> Result<(Vec<f64>, f64)> {
    let total: f64 = members.iter().map(|(w, _)| w).sum();
    if members.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "ensemble weights must be nonnegative and sum to 1".into(),
        ));
    }
    let mut per_member = Vec::with_capacity(members.len());
    let mut weighted = 0.0;
    for (weight, member) in members {
        let problem = QaeProblem::new(n_a, n_b, member.clone(), 0.5)?;
        let (_, _, latent) = encode_split(&problem, u_e)?;
        let rho_f = decode(u_e, &latent, reference)?;
        let j_d = decoding_fidelity(member, &rho_f, convention)?;
        per_member.push(j_d);
        weighted += weight * j_d;
    }
    Ok((per_member, weighted))
}
