//! Evolution-strategy optimizer: Gaussian perturbations, a score-weighted
//! gradient estimate, momentum ascent, bound clamping, and a geometric decay
//! schedule for the perturbation size.
//!
//! Normal variates come from a counter-based seeded generator with one
//! substream per (iteration, individual), so population evaluation order
//! cannot change results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hyperparameters of the ES loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    /// Population size NP.
    pub population: usize,
    /// Perturbation factor delta.
    pub perturbation: f64,
    /// Learning rate chi_1.
    pub learning_rate: f64,
    /// Momentum factor chi_2.
    pub momentum: f64,
    /// Multiplier applied to delta every `decay_period` iterations.
    pub decay_factor: f64,
    pub decay_period: usize,
    pub max_iterations: usize,
    /// Stop when best-ever objective improves by less than
    /// `convergence_tol` over this many iterations.
    pub convergence_window: usize,
    pub convergence_tol: f64,
    pub seed: u64,
    /// Parameter bounds applied to iterates and mutants.
    pub bounds: (f64, f64),
}

impl EsConfig {
    /// Paper defaults: NP = 40 for 2-qubit problems, 50 for 4-qubit;
    /// delta = 0.01 decayed by 0.98 every 100 iterations; chi_1 = 0.5,
    /// chi_2 = 0.9; control bounds [-10, 10].
    pub fn default_for_qubits(n_qubits: usize) -> Self {
        let (population, max_iterations) = if n_qubits <= 2 { (40, 1500) } else { (50, 3000) };
        Self {
            population,
            perturbation: 0.01,
            learning_rate: 0.5,
            momentum: 0.9,
            decay_factor: 0.98,
            decay_period: 100,
            max_iterations,
            convergence_window: 200,
            convergence_tol: 1e-6,
            seed: 0,
            bounds: (-10.0, 10.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidParameter("population must be >= 2".into()));
        }
        if self.perturbation <= 0.0 || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParameter(
                "perturbation and learning rate must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter("momentum must be in [0, 1)".into()));
        }
        if self.bounds.0 > self.bounds.1 {
            return Err(Error::InvalidParameter("bounds out of order".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One training-trace row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub phi: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_pure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_qmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_d: Option<f64>,
}

/// Full training history plus the returned parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
    pub best_phi: f64,
    pub iterations: usize,
}

/// Outcome of a training run: best-ever parameters and the trace.
#[derive(Debug, Clone)]
pub struct EsRun {
    pub theta: Vec<f64>,
    pub trace: TrainingTrace,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Stable substream seed for (seed, iteration, individual).
fn substream(seed: u64, iteration: u64, individual: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(iteration)) ^ individual)
}

fn clamp_vec(theta: &mut [f64], bounds: (f64, f64)) {
    for t in theta.iter_mut() {
        *t = t.clamp(bounds.0, bounds.1);
    }
}

/// theta = u_min + Rand[0,1] (u_max - u_min), deterministic per seed.
pub fn init_theta(config: &EsConfig, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(substream(config.seed, 0, 0));
    (0..dim)
        .map(|_| config.bounds.0 + rng.gen::<f64>() * (config.bounds.1 - config.bounds.0))
        .collect()
}

/// Score-weighted gradient estimate:
/// dPhi = (1/(NP delta)) sum_i Phi(X_i) eps_i with X_i = theta + delta eps_i.
/// Mutants are clamped to bounds before evaluation.
///
/// Returns the estimate and the population scores.
pub fn estimate_gradient<F>(
    objective: &F,
    theta: &[f64],
    config: &EsConfig,
    iteration: usize,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = theta.len();
    let delta = current_delta(config, iteration);
    let samples: Vec<(Vec<f64>, f64)> = (0..config.population)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(substream(config.seed, iteration as u64, 1 + i as u64));
            let eps: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let mut mutant: Vec<f64> =
                theta.iter().zip(&eps).map(|(t, e)| t + delta * e).collect();
            clamp_vec(&mut mutant, config.bounds);
            let score = objective(&mutant);
            (eps, score)
        })
        .collect();
    let mut gradient = vec![0.0; dim];
    let mut scores = Vec::with_capacity(config.population);
    for (eps, score) in &samples {
        if !score.is_finite() {
            return Err(Error::ObjectiveFailure {
                iteration,
                trace: Box::default(),
            });
        }
        for (g, e) in gradient.iter_mut().zip(eps) {
            *g += score * e;
        }
        scores.push(*score);
    }
    let norm = 1.0 / (config.population as f64 * delta);
    for g in &mut gradient {
        *g *= norm;
    }
    Ok((gradient, scores))
}

/// Delta after the decay schedule has fired floor((iteration-1)/period) times.
fn current_delta(config: &EsConfig, iteration: usize) -> f64 {
    if config.decay_period == 0 || iteration <= 1 {
        return config.perturbation;
    }
    let decays = (iteration - 1) / config.decay_period;
    config.perturbation * config.decay_factor.powi(decays as i32)
}

/// Mutable optimizer state between iterations.
#[derive(Debug, Clone)]
pub struct EsState {
    pub theta: Vec<f64>,
    pub velocity: Vec<f64>,
    pub iteration: usize,
}

impl EsState {
    pub fn new(theta: Vec<f64>) -> Self {
        let dim = theta.len();
        Self {
            theta,
            velocity: vec![0.0; dim],
            iteration: 0,
        }
    }
}

/// Momentum-then-ascent update, clamped to bounds:
/// dv = chi_2 dv + (1 - chi_2) dPhi; theta += chi_1 dv.
pub fn step(state: &mut EsState, gradient: &[f64], config: &EsConfig) {
    for ((v, t), g) in state
        .velocity
        .iter_mut()
        .zip(state.theta.iter_mut())
        .zip(gradient)
    {
        *v = config.momentum * *v + (1.0 - config.momentum) * g;
        *t += config.learning_rate * *v;
    }
    clamp_vec(&mut state.theta, config.bounds);
    state.iteration += 1;
}

/// Extra metrics attached to a trace row by the caller's probe.
pub type ProbeMetrics = (Option<f64>, Option<f64>, Option<f64>);

/// Runs the full loop: init, then {sample, estimate, step} until
/// `max_iterations` or until the best objective stops improving. Returns the
/// best-ever iterate, not the last one.
///
/// `probe` is called once per iteration with (iteration, theta, phi) and may
/// return (j_pure, j_qmi, j_d) observations for the trace.
pub fn train<F, P>(objective: F, config: &EsConfig, dim: usize, mut probe: P) -> Result<EsRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
    P: FnMut(usize, &[f64], f64) -> ProbeMetrics,
{
    config.validate()?;
    let mut state = EsState::new(init_theta(config, dim));
    let mut trace = TrainingTrace::default();

    let record = |trace: &mut TrainingTrace,
                  probe: &mut P,
                  iteration: usize,
                  theta: &[f64],
                  phi: f64,
                  delta: f64| {
        let (j_pure, j_qmi, j_d) = probe(iteration, theta, phi);
        trace.records.push(TraceRecord {
            iteration,
            phi,
            delta,
            j_pure,
            j_qmi,
            j_d,
        });
    };

    let eval = |theta: &[f64], iteration: usize, trace: &TrainingTrace| -> Result<f64> {
        let phi = objective(theta);
        if !phi.is_finite() {
            return Err(Error::ObjectiveFailure {
                iteration,
                trace: Box::new(trace.clone()),
            });
        }
        Ok(phi)
    };

    let phi0 = eval(&state.theta, 0, &trace)?;
    let mut best_phi = phi0;
    let mut best_theta = state.theta.clone();
    // Best-so-far objective at the end of each iteration, for the plateau test.
    let mut best_history = vec![best_phi];
    record(&mut trace, &mut probe, 0, &state.theta, phi0, config.perturbation);
    trace.best_phi = best_phi;

    for iteration in 1..=config.max_iterations {
        let (gradient, _scores) =
            estimate_gradient(&objective, &state.theta, config, iteration).map_err(|e| {
                match e {
                    Error::ObjectiveFailure { iteration, .. } => Error::ObjectiveFailure {
                        iteration,
                        trace: Box::new(trace.clone()),
                    },
                    other => other,
                }
            })?;
        step(&mut state, &gradient, config);
        let phi = eval(&state.theta, iteration, &trace)?;
        if phi > best_phi {
            best_phi = phi;
            best_theta = state.theta.clone();
        }
        best_history.push(best_phi);
        record(
            &mut trace,
            &mut probe,
            iteration,
            &state.theta,
            phi,
            current_delta(config, iteration + 1),
        );
        trace.best_phi = best_phi;
        trace.iterations = iteration;

        if config.convergence_window > 0 && iteration >= config.convergence_window {
            let past = best_history[iteration - config.convergence_window];
            if best_phi - past < config.convergence_tol {
                break;
            }
        }
    }

    Ok(EsRun {
        theta: best_theta,
        trace,
    })
}

/// `train` without probing.
pub fn train_plain<F>(objective: F, config: &EsConfig, dim: usize) -> Result<EsRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    train(objective, config, dim, |_, _, _| (None, None, None))
}
