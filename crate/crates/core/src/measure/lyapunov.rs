use super::grid::GridMeasure;
use crate::circle::CircleMap;
use crate::rng::{domain, stream};
use crate::walk::StepDistribution;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct LyapunovParams {
    /// Samples `(g, x) ~ μ ⊗ ν` for the integral estimator.
    pub samples: usize,
    pub trajectories: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for LyapunovParams {
    fn default() -> Self {
        Self {
            samples: 100_000,
            trajectories: 100,
            steps: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// Pathwise estimate, reported as the exponent.
    pub value: f64,
    pub stderr: f64,
    pub integral: f64,
    pub integral_stderr: f64,
    pub pathwise: f64,
    pub pathwise_stderr: f64,
    /// Discretization allowance added to the comparison.
    pub systematic: f64,
    /// `|integral - pathwise|` in units of the combined error.
    pub agreement_sigmas: f64,
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Integral and pathwise estimates of `λ = ∫ log g'(x) dμ(g) dν(x)`.
///
/// Pathwise trajectories start at Lebesgue-random points. Disagreement
/// beyond 5σ is an error.
pub fn lyapunov_exponent(mu: &StepDistribution, nu: &GridMeasure, params: &LyapunovParams) -> Result<LyapunovEstimate> {
    let alphabet = mu.alphabet();
    let atom_log_derivative = |a: usize, x: f64| alphabet.word_map(mu.atoms()[a].letters()).derivative(x).ln();

    let integral_samples: Vec<f64> = (0..params.samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, domain::LYAPUNOV, k);
            let x = nu.quantile(rng.random());
            let a = mu.sample_index(&mut rng);
            atom_log_derivative(a, x)
        })
        .collect();
    let (integral, integral_stderr) = mean_stderr(&integral_samples);

    let slopes: Vec<f64> = (0..params.trajectories as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(params.seed, domain::LYAPUNOV, (1u64 << 40) + t);
            let mut x: f64 = rng.random();
            let mut s = 0.0;
            for _ in 0..params.steps {
                let a = mu.sample_index(&mut rng);
                let j = alphabet.word_map(mu.atoms()[a].letters()).jet(x);
                s += j.d1.ln();
                x = j.value;
            }
            s / params.steps as f64
        })
        .collect();
    let (pathwise, pathwise_stderr) = mean_stderr(&slopes);

    // Grid resolution of ν and the O(1/n) start-up term of the pathwise slope.
    let mean_sup_l = mu.moment_report().sup_log_derivative;
    let systematic = mean_sup_l / nu.grid_size() as f64 + 1.0 / params.steps.max(1) as f64;
    let sigma = (integral_stderr.powi(2) + pathwise_stderr.powi(2) + systematic.powi(2)).sqrt();
    let agreement_sigmas = (integral - pathwise).abs() / sigma;
    if agreement_sigmas > 5.0 {
        return Err(Error::LyapunovDisagreement {
            integral,
            pathwise,
            sigmas: agreement_sigmas,
        });
    }
    Ok(LyapunovEstimate {
        value: pathwise,
        stderr: pathwise_stderr,
        integral,
        integral_stderr,
        pathwise,
        pathwise_stderr,
        systematic,
        agreement_sigmas,
    })
}
