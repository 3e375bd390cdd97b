//! Grid surrogates for distortion suprema.
//!
//! Every quantity here is a maximum over a finite grid and therefore a lower
//! bound for the true supremum.

use super::generator::CircleMap;
use super::point::CircleArc;
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 4096;

/// `κ(g, I) = max over grid pairs of log(g'(y)/g'(x))`.
pub fn affine_distortion<M: CircleMap + ?Sized>(g: &M, arc: &CircleArc, grid_size: usize) -> Result<f64> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid_size must be at least 2".into()));
    }
    let (lo, hi) = arc
        .grid(grid_size)
        .iter()
        .map(|&x| g.derivative(x).ln())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// `max - min` of `log d(y)` on an `n`-point grid of `[a, b]`, for a derivative `d` of a real map.
pub fn affine_distortion_fn(d: impl Fn(f64) -> f64, a: f64, b: f64, grid_size: usize) -> f64 {
    let n = grid_size.max(2);
    let (lo, hi) = (0..n)
        .map(|i| d(a + (b - a) * i as f64 / (n - 1) as f64).ln())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Grid Hölder seminorm `max |log g'(x) - log g'(y)| / dist(x, y)^τ` on the circle.
pub fn holder_seminorm<M: CircleMap + ?Sized>(g: &M, tau: f64, grid_size: usize) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidArgument(format!("tau must lie in (0, 1], got {tau}")));
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid_size must be at least 2".into()));
    }
    let n = grid_size;
    let h = 1.0 / n as f64;
    let lg: Vec<f64> = (0..n).map(|i| g.derivative(i as f64 * h).ln()).collect();
    let (lo, hi) = lg.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let osc = hi - lo;
    if osc == 0.0 {
        return Ok(0.0);
    }
    let lip = (0..n)
        .map(|i| (lg[(i + 1) % n] - lg[i]).abs() / h)
        .fold(0.0, f64::max);
    // A k-cell difference is a sum of k one-cell differences, so it is at
    // most k·h·lip; distances whose bound cannot beat `best` are skipped.
    let mut best: f64 = 0.0;
    for k in 1..=n / 2 {
        let d = k as f64 * h;
        let dt = d.powf(tau);
        if (lip * d).min(osc) / dt <= best {
            continue;
        }
        let mut m: f64 = 0.0;
        for i in 0..n {
            let j = if i + k < n { i + k } else { i + k - n };
            m = m.max((lg[j] - lg[i]).abs());
        }
        best = best.max(m / dt);
    }
    Ok(best)
}

fn sup_over_circle<M: CircleMap + ?Sized>(g: &M, grid_size: usize, f: impl Fn(&super::Jet3) -> f64) -> f64 {
    let n = grid_size.max(2);
    (0..n)
        .map(|i| f(&g.jet(i as f64 / n as f64)).abs())
        .fold(0.0, f64::max)
}

/// `max |Lg|` on a uniform circle grid.
pub fn sup_log_derivative<M: CircleMap + ?Sized>(g: &M, grid_size: usize) -> f64 {
    sup_over_circle(g, grid_size, |j| j.log_derivative())
}

/// `max |Sg|` on a uniform circle grid.
pub fn sup_schwarzian<M: CircleMap + ?Sized>(g: &M, grid_size: usize) -> f64 {
    sup_over_circle(g, grid_size, |j| j.schwarzian())
}

/// `max |S_proj g|` on a uniform circle grid; zero for Möbius maps.
pub fn sup_projective_schwarzian<M: CircleMap + ?Sized>(g: &M, grid_size: usize) -> f64 {
    sup_over_circle(g, grid_size, |j| j.projective_schwarzian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Mat2;

    #[test]
    fn rotation_has_no_distortion() {
        let r = Mat2::rotation(0.123);
        let arc = CircleArc::new(0.4, 0.3).unwrap();
        assert!(affine_distortion(&r, &arc, 1000).unwrap() < 1e-12);
        assert!(holder_seminorm(&r, 0.5, 512).unwrap() < 1e-9);
    }

    #[test]
    fn distortion_is_symmetric_under_inversion() {
        let g = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let arc = CircleArc::new(0.1, 0.15).unwrap();
        let img = CircleArc::from_endpoints(g.apply(0.1), {
            let a = g.apply(0.1);
            a + (g.apply(0.25) - a).rem_euclid(1.0)
        })
        .unwrap();
        // Same pair set up to grid placement; compare on fine grids.
        let k1 = affine_distortion(&g, &arc, 20001).unwrap();
        let k2 = affine_distortion(&g.inverse(), &img, 20001).unwrap();
        assert!((k1 - k2).abs() < 1e-9, "{k1} vs {k2}");
    }

    #[test]
    fn holder_tau_one_matches_sup_of_l() {
        let g = Mat2::new(1.5, 0.3, 0.2, 0.7).normalized().unwrap();
        let n = 4096;
        let hs = holder_seminorm(&g, 1.0, n).unwrap();
        let sl = sup_log_derivative(&g, n);
        assert!((hs - sl).abs() < 2e-2 * sl, "{hs} vs {sl}");
    }
}
