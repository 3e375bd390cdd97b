use super::grid::{lifted_images, GridMeasure};
use crate::circle::CircleMap;
use crate::rng::{domain, stream};
use crate::walk::StepDistribution;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryMethod {
    TransferIteration,
    MonteCarlo,
}

#[derive(Clone, Debug)]
pub struct StationaryParams {
    pub grid_size: usize,
    /// Transfer iteration stops once the residual drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Residuals above this after the last iteration are an error.
    pub residual_limit: f64,
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for StationaryParams {
    fn default() -> Self {
        Self {
            grid_size: 8192,
            tolerance: 1e-10,
            max_iterations: 1000,
            residual_limit: 1e-3,
            samples: 100_000,
            burn_in: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StationaryEstimate {
    pub measure: GridMeasure,
    pub method: StationaryMethod,
    pub residual: f64,
    pub iterations: usize,
}

/// Lifted images of the grid under each atom's inverse.
fn transfer_tables(mu: &StepDistribution, n: usize) -> Vec<Vec<f64>> {
    let alphabet = mu.alphabet();
    mu.atoms()
        .iter()
        .map(|w| {
            let inv = w.inverse();
            lifted_images(&alphabet.word_map(inv.letters()), n)
        })
        .collect()
}

fn apply_transfer(mu: &StepDistribution, tables: &[Vec<f64>], nu: &GridMeasure) -> GridMeasure {
    let n = nu.grid_size();
    let mut out = vec![0.0; n + 1];
    for (ys, &p) in tables.iter().zip(mu.probabilities()) {
        let pushed = nu.pushforward_with(ys);
        for (o, v) in out.iter_mut().zip(pushed.cdf()) {
            *o += p * v;
        }
    }
    let mut g = GridMeasure::lebesgue(n);
    let cdf = g.cdf_mut();
    cdf.copy_from_slice(&out);
    cdf[0] = 0.0;
    cdf[n] = 1.0;
    g
}

fn sup_diff(a: &GridMeasure, b: &GridMeasure) -> f64 {
    a.cdf().iter().zip(b.cdf()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `sup_x |F(x) - Σ μ(g) (g_* ν)([0, x])|` on the grid of `ν`.
pub fn stationarity_residual(mu: &StepDistribution, nu: &GridMeasure) -> f64 {
    let tables = transfer_tables(mu, nu.grid_size());
    sup_diff(&apply_transfer(mu, &tables, nu), nu)
}

pub fn estimate_stationary_measure(
    mu: &StepDistribution,
    method: StationaryMethod,
    params: &StationaryParams,
) -> Result<StationaryEstimate> {
    if params.grid_size < 256 {
        return Err(Error::InvalidArgument("grid_size must be at least 256".into()));
    }
    match method {
        StationaryMethod::TransferIteration => transfer_iteration(mu, params),
        StationaryMethod::MonteCarlo => monte_carlo(mu, params),
    }
}

fn transfer_iteration(mu: &StepDistribution, params: &StationaryParams) -> Result<StationaryEstimate> {
    let tables = transfer_tables(mu, params.grid_size);
    let mut nu = GridMeasure::lebesgue(params.grid_size);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        let next = apply_transfer(mu, &tables, &nu);
        residual = sup_diff(&next, &nu);
        nu = next;
        iterations += 1;
        if residual < params.tolerance {
            break;
        }
    }
    if residual > params.residual_limit {
        return Err(Error::NotStationary { residual, iterations });
    }
    Ok(StationaryEstimate {
        measure: nu,
        method: StationaryMethod::TransferIteration,
        residual,
        iterations,
    })
}

fn monte_carlo(mu: &StepDistribution, params: &StationaryParams) -> Result<StationaryEstimate> {
    let alphabet = mu.alphabet();
    let samples: Vec<f64> = (0..params.samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, domain::STATIONARY, k);
            let mut x: f64 = rng.random();
            for _ in 0..params.burn_in {
                let a = mu.sample_index(&mut rng);
                x = alphabet.word_map(mu.atoms()[a].letters()).apply(x);
            }
            x
        })
        .collect();
    let measure = GridMeasure::from_samples(&samples, params.grid_size);
    let residual = stationarity_residual(mu, &measure);
    Ok(StationaryEstimate {
        measure,
        method: StationaryMethod::MonteCarlo,
        residual,
        iterations: params.burn_in,
    })
}
