use super::search::{NearIdentityReport, PairContext};
use crate::circle::{wrap, Jet3, Word};
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct EndgameReport {
    pub m: u32,
    pub kappa: f64,
    pub condition2_holds: bool,
    pub sandwich_pairs: usize,
    /// Smallest relative slack over both sandwich inequalities and both maps.
    pub sandwich_min_slack: f64,
    /// `[α_m, β_m] = g_m⁻¹(J)` and `[γ_m, δ_m] = h_m⁻¹(J)`.
    pub overlap_g: (f64, f64),
    pub overlap_h: (f64, f64),
    pub required_width: f64,
    pub sup_log_phi_prime: f64,
    pub log_phi_prime_bound: f64,
    /// Width and derivative checks rely on condition 2 and are skipped without it.
    pub derivative_checks_skipped: bool,
    pub max_l_formula_error: f64,
    pub max_s_formula_error: f64,
}

const ROUNDOFF: f64 = 1e-12;

fn fail(msg: String) -> Error {
    Error::EndgameViolation(msg)
}

/// Solves `f(y) = t` for increasing `f` on `[a, b]`.
fn invert(f: &dyn Fn(f64) -> f64, t: f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) < t {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Re-checks the sandwich, overlap width, derivative and composition-formula estimates for a pair.
pub fn endgame_estimates(pc: &PairContext, report: &NearIdentityReport, grid: usize) -> Result<EndgameReport> {
    let m = report.m;
    let kappa = report.kappa_bound;
    let eta = pc.eta;
    let alpha_m = pc.chart.alpha().powi(m as i32);
    let (gw, hw): (&Word, &Word) = (&report.g_word, &report.h_word);
    let gj = |y: f64| pc.element_jet(gw, m, y);
    let anchor = gj(0.0).value;
    // h on the same lift as g.
    let hj = |y: f64| {
        let mut j = pc.element_jet(hw, m, y);
        j.value = anchor + wrap(j.value - anchor + 0.5) - 0.5;
        j
    };
    let condition2_holds = report.log_derivative_gap <= 1.0 / m as f64;

    // Sandwich on 100 pairs x < y in I.
    let mut min_slack = f64::INFINITY;
    for map in [&gj as &dyn Fn(f64) -> Jet3, &hj] {
        let d0 = map(0.0).d1;
        for i in 0..100 {
            let x = -eta + eta * i as f64 / 100.0;
            let y = x + eta * (0.01 + 0.99 * ((i * 37) % 100) as f64 / 100.0);
            let diff = map(y).value - map(x).value;
            let lo = (-kappa).exp() * d0 * (y - x);
            let hi = kappa.exp() * d0 * (y - x);
            let slack = ((diff - lo) / lo).min((hi - diff) / hi);
            min_slack = min_slack.min(slack);
            if slack < -ROUNDOFF {
                return Err(fail(format!("sandwich fails at ({x}, {y}): {diff} not in [{lo}, {hi}]")));
            }
        }
    }

    // Overlap J around a common value z of g(I_m) and h(I_m).
    let (g0, g1) = (gj(-alpha_m * eta).value, gj(alpha_m * eta).value);
    let (h0, h1) = (hj(-alpha_m * eta).value, hj(alpha_m * eta).value);
    let (lo, hi) = (g0.max(h0), g1.min(h1));
    if lo > hi + ROUNDOFF * (g1 - g0).abs().max(h1 - h0) {
        return Err(fail("images of I_m do not intersect".into()));
    }
    let z = 0.5 * (lo + hi);
    let big_m = gj(0.0).d1.min(hj(0.0).d1);
    let half = (-kappa).exp() * big_m * eta * (1.0 - alpha_m);
    let (j0, j1) = (z - half, z + half);
    let gv = |y: f64| gj(y).value;
    let hv = |y: f64| hj(y).value;
    for (name, f) in [("g", &gv as &dyn Fn(f64) -> f64), ("h", &hv)] {
        let tol = ROUNDOFF * (f(eta) - f(-eta));
        if f(-eta) > j0 + tol || f(eta) < j1 - tol {
            return Err(fail(format!("J is not inside {name}_m(I)")));
        }
    }
    let overlap_g = (invert(&gv, j0, -eta, eta), invert(&gv, j1, -eta, eta));
    let overlap_h = (invert(&hv, j0, -eta, eta), invert(&hv, j1, -eta, eta));
    let required_width = 2.0 * eta * report.c_m;

    let phi = pc.phi(gw, hw, m);
    let mut sup_log_phi_prime: f64 = 0.0;
    let mut max_l: f64 = 0.0;
    let mut max_s: f64 = 0.0;
    let n = grid.max(2);
    for i in 0..n {
        let y = overlap_g.0 + (overlap_g.1 - overlap_g.0) * i as f64 / (n - 1) as f64;
        let pj = phi.jet(y);
        sup_log_phi_prime = sup_log_phi_prime.max(pj.d1.ln().abs());
        let g = gj(y);
        let h = hj(pj.value);
        let ratio = g.d1 / h.d1;
        let l_formula = g.log_derivative() - ratio * h.log_derivative();
        let s_formula = g.schwarzian() - ratio * ratio * h.schwarzian();
        let l_scale = 1.0 + g.log_derivative().abs() + (ratio * h.log_derivative()).abs();
        let s_scale = 1.0 + g.schwarzian().abs() + (ratio * ratio * h.schwarzian()).abs();
        max_l = max_l.max((pj.log_derivative() - l_formula).abs() / l_scale);
        max_s = max_s.max((pj.schwarzian() - s_formula).abs() / s_scale);
    }
    if max_l > 1e-9 || max_s > 1e-9 {
        return Err(fail(format!("composition formulas off by {max_l:e} (L) and {max_s:e} (S)")));
    }
    let log_phi_prime_bound = 2.0 * kappa + 1.0 / m as f64;
    if condition2_holds {
        let wg = overlap_g.1 - overlap_g.0;
        let wh = overlap_h.1 - overlap_h.0;
        if wg < required_width * (1.0 - ROUNDOFF) || wh < required_width * (1.0 - ROUNDOFF) {
            return Err(fail(format!("overlap widths {wg}, {wh} below 2ηc_m = {required_width}")));
        }
        if sup_log_phi_prime > log_phi_prime_bound + ROUNDOFF {
            return Err(fail(format!(
                "sup |log φ'| = {sup_log_phi_prime} exceeds 2κ_m + 1/m = {log_phi_prime_bound}"
            )));
        }
    }
    Ok(EndgameReport {
        m,
        kappa,
        condition2_holds,
        sandwich_pairs: 200,
        sandwich_min_slack: min_slack,
        overlap_g,
        overlap_h,
        required_width,
        sup_log_phi_prime,
        log_phi_prime_bound,
        derivative_checks_skipped: !condition2_holds,
        max_l_formula_error: max_l,
        max_s_formula_error: max_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, LinearChart, Mat2};
    use std::sync::Arc;

    fn context() -> PairContext {
        let a = 0.9f64.sqrt();
        let alphabet = Alphabet::from_matrices(&[Mat2::new(a, 0.0, 0.0, 1.0 / a), Mat2::rotation(0.381966011250105)]).unwrap();
        let chart = LinearChart::from_matrix(&alphabet.generators()[0].matrix()).unwrap();
        PairContext {
            alphabet: Arc::new(alphabet),
            chart,
            eta: 0.05,
        }
    }

    #[test]
    fn equal_pair_is_trivial() {
        let pc = context();
        let g = pc.alphabet.parse_word("B A B A^-1").unwrap();
        let rep = NearIdentityReport::from_pair(&pc, &g, &g, 10, 4, 0.01, 0.05, 101).unwrap();
        let e = endgame_estimates(&pc, &rep, 101).unwrap();
        assert!(e.sup_log_phi_prime < 1e-12);
        assert!(!e.derivative_checks_skipped);
        assert!(rep.ck.order(3) < 1e-9);
    }

    #[test]
    fn condition_two_violation_is_flagged() {
        let pc = context();
        let g = pc.alphabet.parse_word("B A B").unwrap();
        let mut h = g.clone();
        h.0.extend(std::iter::repeat_n(pc.alphabet.parse_word("A").unwrap().0[0], 10));
        let m = 10;
        let kappa = pc.distortion(&g, m, 101).max(pc.distortion(&h, m, 101));
        let rep = NearIdentityReport::from_pair(&pc, &g, &h, m, 3, kappa, kappa, 101).unwrap();
        assert!(rep.log_derivative_gap > 10.0 / m as f64 * 0.99);
        assert!(rep.images_intersect);
        let e = endgame_estimates(&pc, &rep, 101).unwrap();
        assert!(e.derivative_checks_skipped);
        assert!(e.sandwich_min_slack >= 0.0);
    }
}
