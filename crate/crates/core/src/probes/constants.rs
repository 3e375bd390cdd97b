use super::rho::word_rho_lower_bound;
use crate::circle::{holder_seminorm, sup_log_derivative, sup_schwarzian, CircleArc, Mat2, DEFAULT_GRID};
use crate::measure::GridMeasure;
use crate::walk::{StepDistribution, WalkTrajectory};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Per-atom regularity data shared by all walks of one step distribution.
#[derive(Clone, Debug)]
pub struct ProbeContext {
    pub tau: f64,
    /// `|log g'|_τ` on the grid.
    pub holder: Vec<f64>,
    pub sup_l: Vec<f64>,
    pub sup_s: Vec<f64>,
    pub rho: Vec<f64>,
    /// `sup |Lg|` on the annulus `|Im z| <= ρ/2`, for pure Möbius atoms.
    pub complex_l: Option<Vec<f64>>,
    pub matrices: Option<Vec<Mat2>>,
}

/// Complex `(log g')'` of a Möbius map in the angle coordinate.
pub(crate) fn complex_log_derivative(m: &Mat2, z: Complex64) -> Complex64 {
    let (al, be) = m.su11();
    let i2pi = Complex64::i() * 2.0 * PI;
    let w = (i2pi * z).exp();
    i2pi * (1.0 - al * w / (al * w + be) - be.conj() * w / (be.conj() * w + al.conj()))
}

fn annulus_sup_l(m: &Mat2, rho: f64) -> f64 {
    if !rho.is_finite() {
        return 0.0;
    }
    // Maximum modulus on the two boundary circles.
    let h = rho / 2.0;
    let n = 512;
    (0..n)
        .flat_map(|k| {
            let x = k as f64 / n as f64;
            [Complex64::new(x, h), Complex64::new(x, -h)]
        })
        .map(|z| complex_log_derivative(m, z).norm())
        .fold(0.0, f64::max)
}

impl ProbeContext {
    pub fn new(mu: &StepDistribution, tau: f64) -> Result<Self> {
        Self::with_grid(mu, tau, DEFAULT_GRID)
    }

    pub fn with_grid(mu: &StepDistribution, tau: f64, grid: usize) -> Result<Self> {
        let alphabet = mu.alphabet();
        let mut holder = Vec::new();
        let mut sup_l = Vec::new();
        let mut sup_s = Vec::new();
        let mut rho = Vec::new();
        for w in mu.atoms() {
            let g = alphabet.word_map(w.letters());
            holder.push(holder_seminorm(&g, tau, grid)?);
            sup_l.push(sup_log_derivative(&g, grid));
            sup_s.push(sup_schwarzian(&g, grid));
            rho.push(word_rho_lower_bound(alphabet, w.letters()));
        }
        let matrices: Option<Vec<Mat2>> = alphabet
            .is_pure_mobius()
            .then(|| mu.atoms().iter().map(|w| alphabet.matrix(w.letters())).collect());
        let complex_l = matrices
            .as_ref()
            .map(|ms| ms.iter().zip(&rho).map(|(m, &r)| annulus_sup_l(m, r)).collect());
        Ok(Self {
            tau,
            holder,
            sup_l,
            sup_s,
            rho,
            complex_l,
            matrices,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ConstantsParams {
    pub lambda: f64,
    pub h_nu: f64,
    pub epsilon: f64,
    pub arc: CircleArc,
    pub x: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub seed: u64,
    pub index: u64,
    pub horizon: usize,
    pub tau: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub x: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c3_tail: f64,
    /// `C₄` for the logarithmic derivative, weights `e^{nλ/2}`.
    pub c4_l: f64,
    pub c4_l_tail: f64,
    /// `C₄` for the Schwarzian derivative, weights `e^{nλ}`.
    pub c4_s: f64,
    pub c4_s_tail: f64,
    pub c5: f64,
    /// Complex analogue of `C₃` built from `sup |Lg|` on half annuli.
    pub c3_complex: f64,
    /// `+∞` when `C₃ = 0`.
    pub r_real: f64,
    pub r_complex: f64,
    #[serde(skip)]
    pub c3_terms: Vec<f64>,
    #[serde(skip)]
    pub c4_l_terms: Vec<f64>,
}

impl ConstantsReport {
    pub const CSV_HEADER: &'static str = "seed,index,c1,c2,c3,c4_l,c4_s,c5,r_real,r_complex";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed, self.index, self.c1, self.c2, self.c3, self.c4_l, self.c4_s, self.c5, self.r_real, self.r_complex
        )
    }

    /// `κ^{1/τ} e^{-κ} / (C₂ C₃^{1/τ})`.
    pub fn real_radius(&self, kappa: f64) -> f64 {
        if self.c3 == 0.0 {
            return f64::INFINITY;
        }
        kappa.powf(1.0 / self.tau) * (-kappa).exp() / (self.c2 * self.c3.powf(1.0 / self.tau))
    }

    /// `min(C₅ / (2e^κ C₂), κ / (2e^κ C₂ C₃'))`.
    pub fn complex_radius(&self, kappa: f64) -> f64 {
        let k = 2.0 * kappa.exp() * self.c2;
        let a = self.c5 / k;
        let b = if self.c3_complex == 0.0 {
            f64::INFINITY
        } else {
            kappa / (k * self.c3_complex)
        };
        a.min(b)
    }
}

fn geometric_tail(sup: f64, ratio: f64, from: usize) -> f64 {
    if sup == 0.0 {
        0.0
    } else {
        sup * ratio.powi(from as i32) / (1.0 - ratio)
    }
}

/// The walk constants truncated at the trajectory length.
pub fn walk_constants(
    walk: &WalkTrajectory,
    mu: &StepDistribution,
    nu: &GridMeasure,
    ctx: &ProbeContext,
    params: &ConstantsParams,
) -> Result<ConstantsReport> {
    let lambda = params.lambda;
    if !(lambda < 0.0) {
        return Err(Error::NonNegativeExponent(lambda));
    }
    if walk.is_empty() {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let j_mass = nu.arc_mass_len(params.arc.left().coord(), params.arc.length());
    if !(j_mass > 0.0) {
        return Err(Error::InvalidArgument("the test arc has zero mass".into()));
    }
    let tau = ctx.tau;
    let horizon = walk.len();
    let alphabet = mu.alphabet();

    let jets = walk.l_jets(mu, params.x);
    let mut c2: f64 = 1.0;
    for (n, j) in jets.iter().enumerate() {
        let n = n as f64;
        c2 = c2.max(j.d1 * (-n * lambda / 2.0).exp()).max((1.5 * n * lambda).exp() / j.d1);
    }

    let weights = |rate: f64| (0..horizon).map(move |n| (n as f64 * rate).exp());
    let c3_terms: Vec<f64> = weights(lambda * tau / 2.0)
        .zip(&walk.steps)
        .map(|(w, &s)| ctx.holder[s] * w)
        .collect();
    let c4_l_terms: Vec<f64> = weights(lambda / 2.0).zip(&walk.steps).map(|(w, &s)| ctx.sup_l[s] * w).collect();
    let c4_s: f64 = weights(lambda).zip(&walk.steps).map(|(w, &s)| ctx.sup_s[s] * w).sum();
    let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);

    let c5 = walk
        .steps
        .iter()
        .enumerate()
        .map(|(n, &s)| ctx.rho[s] * (-lambda * n as f64 / 2.0).exp())
        .fold(f64::INFINITY, f64::min);
    let c3_complex = match &ctx.complex_l {
        Some(cl) => weights(lambda / 2.0).zip(&walk.steps).map(|(w, &s)| cl[s] * w).sum(),
        None => f64::NAN,
    };

    // C₁ from the images of J.
    let (mut a, mut len) = (params.arc.left().coord(), params.arc.length());
    let rate = params.h_nu + params.epsilon;
    let mut c1 = j_mass;
    for (n, &s) in walk.steps.iter().enumerate() {
        let g = alphabet.word_map(mu.atoms()[s].letters());
        (a, len) = super::push_arc(&g, a, len);
        c1 = c1.min(nu.arc_mass_len(a, len) * (rate * (n + 1) as f64).exp());
    }

    let mut report = ConstantsReport {
        seed: walk.seed,
        index: walk.index,
        horizon,
        tau,
        kappa: params.kappa,
        lambda,
        x: params.x,
        c1,
        c2,
        c3: c3_terms.iter().sum(),
        c3_tail: geometric_tail(max_of(&ctx.holder), (lambda * tau / 2.0).exp(), horizon),
        c4_l: c4_l_terms.iter().sum(),
        c4_l_tail: geometric_tail(max_of(&ctx.sup_l), (lambda / 2.0).exp(), horizon),
        c4_s,
        c4_s_tail: geometric_tail(max_of(&ctx.sup_s), lambda.exp(), horizon),
        c5,
        c3_complex,
        r_real: 0.0,
        r_complex: 0.0,
        c3_terms,
        c4_l_terms,
    };
    report.r_real = report.real_radius(params.kappa);
    report.r_complex = if ctx.complex_l.is_some() {
        report.complex_radius(params.kappa)
    } else {
        f64::NAN
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, Word};
    use crate::walk::sample_walk;
    use std::sync::Arc;

    fn params(lambda: f64, x: f64) -> ConstantsParams {
        ConstantsParams {
            lambda,
            h_nu: 0.0,
            epsilon: 0.1,
            arc: CircleArc::new(0.1, 0.2).unwrap(),
            x,
            kappa: 0.5,
        }
    }

    #[test]
    fn identity_walk() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::IDENTITY]).unwrap());
        let mu = StepDistribution::new(a, vec![(Word::identity(), 1.0)], false).unwrap();
        let ctx = ProbeContext::with_grid(&mu, 1.0, 512).unwrap();
        let walk = sample_walk(&mu, 50, 1);
        let nu = GridMeasure::lebesgue(512);
        let lambda = -0.2;
        let c = walk_constants(&walk, &mu, &nu, &ctx, &params(lambda, 0.3)).unwrap();
        // log g' of the identity is constant up to roundoff.
        assert!(c.c3 < 1e-9 && c.c4_l < 1e-9);
        assert!(c.r_real > 1e6);
        // l_n' = 1 leaves the upper envelope e^{nλ/2} at the horizon.
        assert!((c.c2 - (-50.0 * lambda / 2.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_c2_closed_form() {
        let m = Mat2::new(0.5, 0.0, 0.0, 2.0);
        let a = Arc::new(Alphabet::from_matrices(&[m]).unwrap());
        let mu = StepDistribution::new(a.clone(), vec![(a.parse_word("A").unwrap(), 1.0)], false).unwrap();
        let ctx = ProbeContext::with_grid(&mu, 1.0, 1024).unwrap();
        let walk = sample_walk(&mu, 40, 0);
        let nu = GridMeasure::lebesgue(1024);
        let alpha = m.derivative(0.0);
        let c = walk_constants(&walk, &mu, &nu, &ctx, &params(alpha.ln(), 0.0)).unwrap();
        let expected = (0..=40)
            .map(|n| alpha.powi(n) * (-(n as f64) * alpha.ln() / 2.0).exp())
            .fold(1.0, f64::max);
        assert!((c.c2 - expected).abs() < 1e-12);
    }

    #[test]
    fn complex_log_derivative_matches_difference_quotient() {
        let m = Mat2::new(1.0, 2.0, 0.0, 1.0);
        let z = Complex64::new(0.3, 0.02);
        let h = 1e-6;
        let dz = Complex64::new(h, 0.0);
        let fd = (m.complex_derivative(z + dz).ln() - m.complex_derivative(z - dz).ln()) / (2.0 * h);
        assert!((fd - complex_log_derivative(&m, z)).norm() < 1e-6);
    }

    #[test]
    fn negative_exponent_required() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::IDENTITY]).unwrap());
        let mu = StepDistribution::new(a, vec![(Word::identity(), 1.0)], false).unwrap();
        let ctx = ProbeContext::with_grid(&mu, 1.0, 64).unwrap();
        let walk = sample_walk(&mu, 5, 1);
        let err = walk_constants(&walk, &mu, &GridMeasure::lebesgue(64), &ctx, &params(0.0, 0.1));
        assert!(matches!(err, Err(Error::NonNegativeExponent(_))));
    }
}
