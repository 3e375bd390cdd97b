use crate::rng::{domain, stream};
use crate::walk::{convolution_powers, int_mul, integer_matrix, ConvolutionOptions, IntMat, StepDistribution};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct AsymptoticParams {
    pub n_max: usize,
    /// Sampled walks for the Shannon-McMillan-Breiman cross-check.
    pub sbm_samples: usize,
    pub seed: u64,
    pub options: ConvolutionOptions,
}

impl Default for AsymptoticParams {
    fn default() -> Self {
        Self {
            n_max: 14,
            sbm_samples: 2000,
            seed: 0,
            options: ConvolutionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SbmCheck {
    pub samples: usize,
    /// Mean of `-(1/n) log μ^{*n}(r_n)`.
    pub mean: f64,
    pub stderr: f64,
    /// Its exact expectation `H(μ^{*n})/n`.
    pub expected: f64,
    pub agrees_within_3sigma: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticEntropy {
    /// Extrapolated entropy.
    pub h: f64,
    /// Spread of the extrapolation between `n_max - 1` and `n_max`.
    pub extrapolation_error: f64,
    /// Plain difference `H_n - H_{n-1}` at `n_max`.
    pub raw_difference: f64,
    pub n_used: usize,
    /// Rows `(n, H(μ^{*n}), support size)`.
    pub table: Vec<(usize, f64, usize)>,
    /// `log |E_n| / n` for the smallest set `E_n` of mass at least 1/2, at `n_max`.
    pub half_mass_rate: f64,
    pub sbm: Option<SbmCheck>,
}

/// Extrapolates first differences `D_n = H_n - H_{n-1}` assuming
/// `D_n = h + a/n + b/n²`: the second difference of `n² D_n` is `2h`.
fn extrapolate(entropies: &[f64], n: usize) -> f64 {
    let d = |k: usize| entropies[k] - entropies[k - 1];
    if n < 3 {
        return if n == 0 { 0.0 } else { d(n) };
    }
    let f = |k: usize| (k * k) as f64 * d(k);
    0.5 * (f(n) - 2.0 * f(n - 1) + f(n - 2))
}

/// Asymptotic entropy `h(G, μ)` from exact convolution powers.
pub fn asymptotic_entropy(mu: &StepDistribution, params: &AsymptoticParams) -> Result<AsymptoticEntropy> {
    let n_max = params.n_max;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be positive".into()));
    }
    let mut table = Vec::with_capacity(n_max + 1);
    let last = convolution_powers(mu, n_max, params.options, |m| {
        table.push((m.n, m.entropy(), m.support_size()));
    })?;
    let entropies: Vec<f64> = table.iter().map(|r| r.1).collect();
    let h = extrapolate(&entropies, n_max).max(0.0);
    let extrapolation_error = if n_max >= 4 {
        (extrapolate(&entropies, n_max) - extrapolate(&entropies, n_max - 1)).abs()
    } else {
        f64::NAN
    };
    let half_mass_rate = (last.half_mass_support() as f64).ln() / n_max as f64;

    let sbm = if params.sbm_samples > 0 {
        let alphabet = mu.alphabet();
        let atoms: Vec<IntMat> = mu
            .atoms()
            .iter()
            .map(|w| integer_matrix(&alphabet.matrix(w.letters())).ok_or(Error::NonIntegerGenerators))
            .collect::<Result<_>>()?;
        let logs: Vec<f64> = (0..params.sbm_samples as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(params.seed, domain::SBM, k);
                let mut m: IntMat = [1, 0, 0, 1];
                for _ in 0..n_max {
                    let a = &atoms[mu.sample_index(&mut rng)];
                    // Overflow lands on a key outside the support: mass 0, infinite log.
                    m = int_mul(&m, a).unwrap_or([0; 4]);
                }
                -last.mass_of(&m).ln() / n_max as f64
            })
            .collect();
        let s = logs.len() as f64;
        let mean = logs.iter().sum::<f64>() / s;
        let var = logs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1.0).max(1.0);
        let stderr = (var / s).sqrt();
        let expected = entropies[n_max] / n_max as f64;
        Some(SbmCheck {
            samples: params.sbm_samples,
            mean,
            stderr,
            expected,
            agrees_within_3sigma: (mean - expected).abs() <= 3.0 * stderr + 1e-12,
        })
    } else {
        None
    };

    Ok(AsymptoticEntropy {
        h,
        extrapolation_error,
        raw_difference: entropies[n_max] - entropies[n_max - 1],
        n_used: n_max,
        table,
        half_mass_rate,
        sbm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_is_exact_on_the_model() {
        // H_n with D_n = 0.5 + 0.3/n - 0.2/n² exactly.
        let mut h = vec![0.0];
        for n in 1..=10 {
            let nf = n as f64;
            h.push(h[n - 1] + 0.5 + 0.3 / nf - 0.2 / (nf * nf));
        }
        assert!((extrapolate(&h, 10) - 0.5).abs() < 1e-12);
    }
}
