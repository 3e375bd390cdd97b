use super::grid::GridMeasure;
use crate::circle::{wrap, CircleMap};
use crate::rng::{domain, stream};
use crate::walk::StepDistribution;
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Masses below this count as empty windows.
const GAP_MASS: f64 = 1e-300;

fn window_ratio(g: impl Fn(f64) -> f64, nu: &GridMeasure, x: f64, delta: f64) -> Option<f64> {
    let a = x - delta;
    let b = x + delta;
    let den = nu.arc_mass(a, b);
    let ga = g(a);
    let gb = ga + wrap(g(b) - ga);
    let num = nu.arc_mass(ga, gb);
    (den > GAP_MASS && num > GAP_MASS).then(|| num / den)
}

/// `ν(g[x-δ, x+δ]) / ν([x-δ, x+δ])`, a window surrogate of `d(g⁻¹ν)/dν (x)`.
pub fn rn_derivative<M: CircleMap + ?Sized>(g: &M, nu: &GridMeasure, x: f64, delta: f64) -> Result<f64> {
    if delta < 2.0 / nu.grid_size() as f64 - 1e-15 {
        return Err(Error::InvalidArgument("delta must span at least 2 grid cells".into()));
    }
    if delta >= 0.5 {
        return Err(Error::InvalidArgument("delta must be below 1/2".into()));
    }
    window_ratio(|t| g.apply(t), nu, x, delta).ok_or(Error::MeasureGap { x: wrap(x) })
}

#[derive(Clone, Debug)]
pub struct BoundaryEntropyParams {
    pub samples: usize,
    /// Window half-width in grid cells.
    pub delta_cells: usize,
    pub seed: u64,
}

impl Default for BoundaryEntropyParams {
    fn default() -> Self {
        Self {
            samples: 100_000,
            delta_cells: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryEntropy {
    pub value: f64,
    /// Statistical and refinement errors combined in quadrature.
    pub stderr: f64,
    pub statistical_stderr: f64,
    pub delta: f64,
    /// Estimate with the window halved, on the same samples.
    pub half_delta_value: f64,
    pub half_delta_stderr: f64,
    /// `|value - half_delta_value|`, counted as a systematic error.
    pub refinement_shift: f64,
    /// Whether the δ and δ/2 estimates differ by at most 2σ (statistical).
    pub refinement_within_2sigma: bool,
    pub samples_used: usize,
    pub gap_hits: usize,
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Monte Carlo estimate of `h_ν = -∫ log d(g⁻¹ν)/dν (x) dμ(g) dν(x)`.
pub fn boundary_entropy(mu: &StepDistribution, nu: &GridMeasure, params: &BoundaryEntropyParams) -> Result<BoundaryEntropy> {
    let alphabet = mu.alphabet();
    boundary_entropy_with(mu, nu, params, |a, x| alphabet.word_map(mu.atoms()[a].letters()).apply(x))
}

/// As [`boundary_entropy`], with atom `a` acting by `atom_apply(a, ·)` instead of its word.
pub fn boundary_entropy_with<F>(
    mu: &StepDistribution,
    nu: &GridMeasure,
    params: &BoundaryEntropyParams,
    atom_apply: F,
) -> Result<BoundaryEntropy>
where
    F: Fn(usize, f64) -> f64 + Sync,
{
    let n = nu.grid_size();
    if params.delta_cells < 4 {
        return Err(Error::InvalidArgument(
            "delta_cells must be at least 4 so that the halved window spans 2 cells".into(),
        ));
    }
    let delta = params.delta_cells as f64 / n as f64;
    let half = delta / 2.0;
    let draws: Vec<(Option<f64>, Option<f64>)> = (0..params.samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, domain::ENTROPY, k);
            let x = nu.quantile(rng.random());
            let a = mu.sample_index(&mut rng);
            let g = |t: f64| atom_apply(a, t);
            (
                window_ratio(g, nu, x, delta).map(|r| -r.ln()),
                window_ratio(g, nu, x, half).map(|r| -r.ln()),
            )
        })
        .collect();
    let gap_hits = draws.iter().filter(|d| d.0.is_none()).count();
    if gap_hits * 10 > params.samples {
        return Err(Error::TooManyGaps {
            percent: 100.0 * gap_hits as f64 / params.samples as f64,
        });
    }
    let full: Vec<f64> = draws.iter().filter_map(|d| d.0).collect();
    let halved: Vec<f64> = draws.iter().filter_map(|d| d.1).collect();
    let (value, stat) = mean_stderr(&full);
    let (half_value, half_stat) = if halved.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_stderr(&halved)
    };
    let shift = if half_value.is_finite() { (value - half_value).abs() } else { 0.0 };
    Ok(BoundaryEntropy {
        value,
        stderr: (stat * stat + shift * shift).sqrt(),
        statistical_stderr: stat,
        delta,
        half_delta_value: half_value,
        half_delta_stderr: half_stat,
        refinement_shift: shift,
        refinement_within_2sigma: shift <= 2.0 * (stat * stat + half_stat * half_stat).sqrt(),
        samples_used: full.len(),
        gap_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, Mat2};
    use std::sync::Arc;

    #[test]
    fn identity_ratio_is_one() {
        let nu = GridMeasure::lebesgue(1024);
        let r = rn_derivative(&Mat2::IDENTITY, &nu, 0.3, 8.0 / 1024.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_ratio_is_derivative() {
        let nu = GridMeasure::lebesgue(8192);
        let g = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let delta = 8.0 / 8192.0;
        for &x in &[0.1, 0.45, 0.8] {
            let r = rn_derivative(&g, &nu, x, delta).unwrap();
            assert!((r - g.derivative(x)).abs() < 50.0 * delta * g.derivative(x));
        }
    }

    #[test]
    fn rn_chain_over_two_steps() {
        // log RN(l_2) at x = log RN(g_2) at l_1(x) + log RN(g_1) at x, to O(δ).
        let nu = GridMeasure::lebesgue(8192);
        let g1 = Mat2::new(1.0, 2.0, 0.0, 1.0);
        let g2 = Mat2::new(1.0, 0.0, -2.0, 1.0);
        let l2 = g2 * g1;
        let x = 0.37;
        let delta = 8.0 / 8192.0;
        let lhs = rn_derivative(&l2, &nu, x, delta).unwrap().ln();
        let rhs = rn_derivative(&g2, &nu, g1.apply(x), delta).unwrap().ln() + rn_derivative(&g1, &nu, x, delta).unwrap().ln();
        assert!((lhs - rhs).abs() < 50.0 * delta, "{lhs} vs {rhs}");
    }

    #[test]
    fn rotations_have_zero_boundary_entropy() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::rotation(0.2360679774997897)]).unwrap());
        let mu = StepDistribution::uniform_symmetric(a).unwrap();
        let params = BoundaryEntropyParams {
            samples: 2000,
            delta_cells: 8,
            seed: 3,
        };
        let h = boundary_entropy(&mu, &GridMeasure::lebesgue(2048), &params).unwrap();
        assert!(h.value.abs() < 1e-9);
    }

    #[test]
    fn zero_mass_window_is_a_gap() {
        let mut cdf = vec![0.0; 1025];
        for (i, v) in cdf.iter_mut().enumerate() {
            *v = ((i as f64 - 512.0) / 512.0).max(0.0);
        }
        let nu = GridMeasure::from_cdf(cdf).unwrap();
        assert!(matches!(
            rn_derivative(&Mat2::IDENTITY, &nu, 0.2, 4.0 / 1024.0),
            Err(Error::MeasureGap { .. })
        ));
    }
}
