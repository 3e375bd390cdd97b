use super::asymptotic::{asymptotic_entropy, AsymptoticEntropy, AsymptoticParams};
use super::boundary_entropy::{boundary_entropy, BoundaryEntropy, BoundaryEntropyParams};
use super::stationary::{estimate_stationary_measure, StationaryMethod, StationaryParams};
use crate::walk::{ConvolutionOptions, StepDistribution};
use crate::Result;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct EntropyGapParams {
    pub grid_size: usize,
    pub n_max: usize,
    pub samples: usize,
    pub delta_cells: usize,
    pub sbm_samples: usize,
    /// Half-width of the ratio band flagged as consistent.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for EntropyGapParams {
    fn default() -> Self {
        Self {
            grid_size: 8192,
            n_max: 14,
            samples: 100_000,
            delta_cells: 8,
            sbm_samples: 2000,
            tolerance: 0.2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub h_asymptotic: f64,
    pub h_asymptotic_stderr: f64,
    pub h_boundary: f64,
    pub h_boundary_stderr: f64,
    /// `h_ν / h`, absent when `h` vanishes.
    pub ratio: Option<f64>,
    pub ratio_stderr: Option<f64>,
    pub tolerance: f64,
    /// Ratio inside `[1 - tol, 1 + tol]`; absent when the ratio is undefined.
    pub poisson_boundary_consistent: Option<bool>,
    /// `-2σ <= h_ν <= h + 2σ` with the combined error.
    pub inequality_holds: bool,
    pub n_used: usize,
    pub mc_samples: usize,
    pub stationary_residual: f64,
    pub asymptotic: AsymptoticEntropy,
    pub boundary: BoundaryEntropy,
}

/// Bundles `h(G, μ)` and `h_ν` into the ratio test.
pub fn entropy_gap_report(mu: &StepDistribution, params: &EntropyGapParams) -> Result<EntropyReport> {
    let stationary = estimate_stationary_measure(
        mu,
        StationaryMethod::TransferIteration,
        &StationaryParams {
            grid_size: params.grid_size,
            seed: params.seed,
            ..Default::default()
        },
    )?;
    let asymptotic = asymptotic_entropy(
        mu,
        &AsymptoticParams {
            n_max: params.n_max,
            sbm_samples: params.sbm_samples,
            seed: params.seed,
            options: ConvolutionOptions::default(),
        },
    )?;
    let boundary = boundary_entropy(
        mu,
        &stationary.measure,
        &BoundaryEntropyParams {
            samples: params.samples,
            delta_cells: params.delta_cells,
            seed: params.seed,
        },
    )?;
    let h = asymptotic.h;
    let sh = if asymptotic.extrapolation_error.is_finite() {
        asymptotic.extrapolation_error
    } else {
        0.0
    };
    let hn = boundary.value;
    let sn = boundary.stderr;
    let combined = (sh * sh + sn * sn).sqrt();
    let (ratio, ratio_stderr) = if h > 1e-9 {
        let r = hn / h;
        let rel = ((sn / h).powi(2) + (hn * sh / (h * h)).powi(2)).sqrt();
        (Some(r), Some(rel))
    } else {
        (None, None)
    };
    Ok(EntropyReport {
        h_asymptotic: h,
        h_asymptotic_stderr: sh,
        h_boundary: hn,
        h_boundary_stderr: sn,
        ratio,
        ratio_stderr,
        tolerance: params.tolerance,
        poisson_boundary_consistent: ratio.map(|r| (r - 1.0).abs() <= params.tolerance),
        inequality_holds: hn >= -2.0 * combined - 1e-12 && hn <= h + 2.0 * combined + 1e-12,
        n_used: asymptotic.n_used,
        mc_samples: params.samples,
        stationary_residual: stationary.residual,
        asymptotic,
        boundary,
    })
}
