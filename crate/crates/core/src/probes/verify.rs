use super::constants::{ConstantsReport, ProbeContext};
use crate::circle::{CircleMap, Jet3};
use crate::walk::{StepDistribution, WalkTrajectory};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub n: usize,
    pub y: f64,
    pub kind: &'static str,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealDistortionReport {
    pub horizon: usize,
    pub kappa: f64,
    pub radius: f64,
    pub max_distortion: f64,
    /// Largest `|L l_n|` over its bound `C₂ C₄ e^κ`.
    pub max_l_ratio: f64,
    /// Largest `|S l_n|` over its bound `C₂² C₄ e^{2κ}`.
    pub max_s_ratio: f64,
    pub violations: Vec<Violation>,
}

fn check_horizon(constants: &ConstantsReport, n: usize, walk: &WalkTrajectory) -> Result<()> {
    if constants.horizon < n || walk.len() < n {
        return Err(Error::InvalidArgument(format!(
            "verification horizon {n} exceeds the constants horizon {} or walk length {}",
            constants.horizon,
            walk.len()
        )));
    }
    Ok(())
}

/// Checks the real distortion bounds on `[x - r, x + r]` for `l_1, …, l_N`.
pub fn verify_real_distortion(
    walk: &WalkTrajectory,
    mu: &StepDistribution,
    constants: &ConstantsReport,
    kappa: f64,
    n_max: usize,
    grid: usize,
) -> Result<RealDistortionReport> {
    check_horizon(constants, n_max, walk)?;
    let r = constants.real_radius(kappa);
    let r_eff = if r.is_finite() { r } else { 0.25 };
    let alphabet = mu.alphabet();
    let grid = grid.max(3);
    let ys: Vec<f64> = (0..grid)
        .map(|i| constants.x - r_eff + 2.0 * r_eff * i as f64 / (grid - 1) as f64)
        .collect();
    let mut jets: Vec<Jet3> = ys.iter().map(|&y| Jet3::identity(y)).collect();
    let l_bound = constants.c2 * (constants.c4_l + constants.c4_l_tail) * kappa.exp();
    let s_bound = constants.c2 * constants.c2 * (constants.c4_s + constants.c4_s_tail) * (2.0 * kappa).exp();
    let mut report = RealDistortionReport {
        horizon: n_max,
        kappa,
        radius: r,
        max_distortion: 0.0,
        max_l_ratio: 0.0,
        max_s_ratio: 0.0,
        violations: Vec::new(),
    };
    let ratio = |v: f64, b: f64| if b > 0.0 { v / b } else if v == 0.0 { 0.0 } else { f64::INFINITY };
    for n in 1..=n_max {
        let g = alphabet.word_map(walk.step_word(mu, n).letters());
        for j in jets.iter_mut() {
            *j = Jet3::compose(&g.jet(j.value), j);
        }
        let logs: Vec<f64> = jets.iter().map(|j| j.d1.ln()).collect();
        let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let dist = hi - lo;
        report.max_distortion = report.max_distortion.max(dist);
        if dist > kappa {
            report.violations.push(Violation {
                n,
                y: constants.x,
                kind: "distortion",
                value: dist,
                bound: kappa,
            });
        }
        for (j, &y) in jets.iter().zip(&ys) {
            let l = j.log_derivative().abs();
            let s = j.schwarzian().abs();
            report.max_l_ratio = report.max_l_ratio.max(ratio(l, l_bound));
            report.max_s_ratio = report.max_s_ratio.max(ratio(s, s_bound));
            if l > l_bound {
                report.violations.push(Violation {
                    n,
                    y,
                    kind: "log_derivative",
                    value: l,
                    bound: l_bound,
                });
            }
            if s > s_bound {
                report.violations.push(Violation {
                    n,
                    y,
                    kind: "schwarzian",
                    value: s,
                    bound: s_bound,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexDistortionReport {
    pub horizon: usize,
    pub kappa: f64,
    pub radius: f64,
    pub max_distortion: f64,
    /// Largest `|Im l_n(z)|` over the allowed height `C₅ e^{λn/2}`.
    pub max_height_ratio: f64,
    pub violations: Vec<Violation>,
    /// Distortion measured on the real diameter only, for comparison.
    pub real_diameter_distortion: f64,
}

/// Polar grid of 64 angles and 16 radii on `D(0, r)`, center first.
fn disk_grid(r: f64) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for k in 1..=16 {
        let rad = r * k as f64 / 16.0;
        for a in 0..64 {
            pts.push(Complex64::from_polar(rad, 2.0 * PI * a as f64 / 64.0));
        }
    }
    pts
}

/// Checks the complex distortion bound on `D(x, r)` for `l_1, …, l_N`.
///
/// Points are pushed one step at a time, so the matrices of `l_n` are never formed.
/// Each point is carried as its offset from the real image of `x`, so heights far
/// below the spacing of floats near 1 stay resolved.
pub fn verify_complex_distortion(
    walk: &WalkTrajectory,
    ctx: &ProbeContext,
    constants: &ConstantsReport,
    kappa: f64,
    n_max: usize,
) -> Result<ComplexDistortionReport> {
    check_horizon(constants, n_max, walk)?;
    let mats = ctx.matrices.as_ref().ok_or(Error::ChartRequiresPureMobius)?;
    let r = constants.complex_radius(kappa);
    let mut center = constants.x;
    let mut offsets = disk_grid(if r.is_finite() { r } else { 0.25 });
    // Real diameter points: angles 0 and π at every radius.
    let on_diameter: Vec<bool> = (0..offsets.len())
        .map(|i| i == 0 || ((i - 1) % 64 == 0 || (i - 1) % 64 == 32))
        .collect();
    let mut cum = vec![Complex64::new(0.0, 0.0); offsets.len()];
    let mut report = ComplexDistortionReport {
        horizon: n_max,
        kappa,
        radius: r,
        max_distortion: 0.0,
        max_height_ratio: 0.0,
        violations: Vec::new(),
        real_diameter_distortion: 0.0,
    };
    for n in 1..=n_max {
        let s = walk.steps[n - 1];
        let m = &mats[s];
        let height = offsets.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if height >= ctx.rho[s] {
            return Err(Error::PoleInDisk { step: n });
        }
        let d0 = m.complex_derivative(Complex64::new(center, 0.0));
        for (z, c) in offsets.iter_mut().zip(cum.iter_mut()) {
            *c += (m.complex_derivative(Complex64::new(center, 0.0) + *z) / d0).ln();
            *z = m.complex_apply_offset(center, *z);
        }
        center = m.apply(center);
        let mut dist: f64 = 0.0;
        let mut real_dist: f64 = 0.0;
        for (c, &d) in cum.iter().zip(&on_diameter) {
            dist = dist.max(c.norm());
            if d {
                real_dist = real_dist.max(c.re.abs());
            }
        }
        report.max_distortion = report.max_distortion.max(dist);
        report.real_diameter_distortion = report.real_diameter_distortion.max(real_dist);
        if dist > kappa {
            report.violations.push(Violation {
                n,
                y: constants.x,
                kind: "complex_distortion",
                value: dist,
                bound: kappa,
            });
        }
        let allowed = constants.c5 * (constants.lambda * n as f64 / 2.0).exp();
        let h = offsets.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        report.max_height_ratio = report.max_height_ratio.max(h / allowed);
        if h > allowed {
            report.violations.push(Violation {
                n,
                y: constants.x,
                kind: "annulus",
                value: h,
                bound: allowed,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, CircleArc, Mat2, Word};
    use crate::measure::GridMeasure;
    use crate::probes::{walk_constants, ConstantsParams};
    use crate::walk::sample_walk;
    use std::sync::Arc;

    fn setup(m: Mat2, word: &str) -> (StepDistribution, ProbeContext) {
        let a = Arc::new(Alphabet::from_matrices(&[m]).unwrap());
        let w = if word.is_empty() { Word::identity() } else { a.parse_word(word).unwrap() };
        let mu = StepDistribution::new(a, vec![(w, 1.0)], false).unwrap();
        let ctx = ProbeContext::with_grid(&mu, 1.0, 1024).unwrap();
        (mu, ctx)
    }

    fn constants(mu: &StepDistribution, ctx: &ProbeContext, n: usize, lambda: f64, x: f64) -> (WalkTrajectory, ConstantsReport) {
        let walk = sample_walk(mu, n, 0);
        let p = ConstantsParams {
            lambda,
            h_nu: 0.0,
            epsilon: 0.1,
            arc: CircleArc::new(0.0, 0.5).unwrap(),
            x,
            kappa: 0.5,
        };
        let c = walk_constants(&walk, mu, &GridMeasure::lebesgue(1024), ctx, &p).unwrap();
        (walk, c)
    }

    #[test]
    fn identity_walk_has_no_distortion() {
        let (mu, ctx) = setup(Mat2::IDENTITY, "");
        let (walk, c) = constants(&mu, &ctx, 20, -0.1, 0.3);
        let real = verify_real_distortion(&walk, &mu, &c, 0.5, 20, 33).unwrap();
        assert!(real.max_distortion < 1e-12);
        assert!(real.violations.is_empty());
        let cx = verify_complex_distortion(&walk, &ctx, &c, 0.5, 20).unwrap();
        assert!(cx.max_distortion < 1e-12);
    }

    #[test]
    fn hyperbolic_walk_at_attracting_point() {
        let m = Mat2::new(0.5, 0.0, 0.0, 2.0);
        let (mu, ctx) = setup(m, "A");
        let lambda = m.derivative(0.0).ln();
        let (walk, c) = constants(&mu, &ctx, 60, lambda, 0.0);
        let real = verify_real_distortion(&walk, &mu, &c, 0.5, 60, 65).unwrap();
        assert!(real.violations.is_empty(), "{:?}", real.violations.first());
        let cx = verify_complex_distortion(&walk, &ctx, &c, 0.5, 60).unwrap();
        assert!(cx.violations.is_empty(), "{:?}", cx.violations.first());
        assert!(cx.max_height_ratio <= 1.0);
    }

    #[test]
    fn complex_requires_pure_mobius_data() {
        let (mu, mut ctx) = setup(Mat2::IDENTITY, "");
        let (walk, c) = constants(&mu, &ctx, 5, -0.1, 0.3);
        ctx.matrices = None;
        assert!(verify_complex_distortion(&walk, &ctx, &c, 0.5, 5).is_err());
    }
}
