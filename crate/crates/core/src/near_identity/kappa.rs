use crate::{Error, Result};

/// Smaller positive root of `κ^{1/τ} e^{-κ} = gap`.
///
/// The left side increases on `(0, 1/τ)` up to `(1/(τe))^{1/τ}`, so a root
/// exists iff `gap^τ < 1/(τe)`; the boundary case is rejected with a 1e-9 margin.
pub fn kappa_m_solve(gap: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tau must lie in (0, 1], got {tau}")));
    }
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
    }
    let peak_ratio = gap.powf(tau) * tau * std::f64::consts::E;
    if peak_ratio >= 1.0 - 1e-9 {
        return Err(Error::IntervalTooLarge { value: peak_ratio });
    }
    // Work with log f(κ) = ln(κ)/τ - κ, increasing on (0, 1/τ).
    let target = gap.ln();
    let f = |k: f64| k.ln() / tau - k;
    let mut hi = 1.0 / tau;
    let mut lo = gap.powf(tau).min(0.5 / tau);
    while f(lo) >= target {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mut k = 0.5 * (lo + hi);
    // Newton polish on κ^{1/τ} e^{-κ} - gap.
    for _ in 0..3 {
        let v = k.powf(1.0 / tau) * (-k).exp();
        let dv = v * (1.0 / (tau * k) - 1.0);
        if dv <= 0.0 {
            break;
        }
        let next = k - (v - gap) / dv;
        if !(next > 0.0 && next < 1.0 / tau) {
            break;
        }
        k = next;
    }
    Ok(k)
}
