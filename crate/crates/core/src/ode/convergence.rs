use super::normalize::{mobius_normalize, MobiusJet};
use super::solve::solve_and_reconstruct;
use crate::circle::Jet3;
use crate::near_identity::ck_distance_to_identity;
use crate::Result;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Both hypothesis curves tend to 0 and so does the C³ distance.
    Pass,
    /// Both hypothesis curves tend to 0 but the C³ distance does not.
    Fail,
    /// A hypothesis curve does not tend to 0; nothing to check.
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct C3Row {
    pub m: u32,
    pub x_m: f64,
    pub sup_s: f64,
    pub c1_dist: f64,
    pub c3_dist: f64,
    pub sup_v_prime: f64,
    /// C³ distance of the Möbius part plus the distance of `k` assembled from `S` and `v`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct C3Report {
    pub rows: Vec<C3Row>,
    pub verdict: Verdict,
    /// Distances are grid maxima; uniform convergence on the closed interval is not certified.
    pub grid: usize,
}

impl C3Report {
    pub const CSV_HEADER: &'static str = "m,sup_S,c1_dist,c3_dist,sup_v_prime";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            s.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.m, r.sup_s, r.c1_dist, r.c3_dist, r.sup_v_prime));
        }
        s
    }
}

/// A curve tends to 0 if its last value is below `1e-9` or below a quarter of its first.
fn tends_to_zero(curve: &[f64]) -> bool {
    match (curve.first(), curve.last()) {
        (Some(&first), Some(&last)) => last <= 1e-9 || last <= 0.25 * first,
        _ => false,
    }
}

fn mobius_c3(a: &MobiusJet, lo: f64, hi: f64, grid: usize) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..=grid {
        let x = lo + (hi - lo) * i as f64 / grid as f64;
        let j = a.jet(x);
        d = d.max((j.value - x).abs()).max((j.d1 - 1.0).abs()).max(j.d2.abs()).max(j.d3.abs());
    }
    d
}

fn row<F: Fn(f64) -> Jet3>(m: u32, phi: &F, a: f64, b: f64, grid: usize) -> Result<C3Row> {
    let mut sup_s: f64 = 0.0;
    for i in 0..=grid {
        let x = a + (b - a) * i as f64 / grid as f64;
        sup_s = sup_s.max(phi(x).schwarzian().abs());
    }
    let c1_dist = ck_distance_to_identity(phi, a, b, 1, grid + 1)?;
    let c3_dist = ck_distance_to_identity(phi, a, b, 3, grid + 1)?;

    let norm = mobius_normalize(phi, a, b, grid)?;
    let (lo, hi) = (a - norm.x_m, b - norm.x_m);
    let step = (hi - lo) / (4 * grid).max(100) as f64;
    let sk = |y: f64| norm.k_jet(y).schwarzian();
    let rec = solve_and_reconstruct(&sk, lo, hi, step)?;

    let mut k_part: f64 = 0.0;
    for i in 0..rec.ys.len() {
        let (y, v, dv) = (rec.ys[i], rec.v[i], rec.dv[i]);
        k_part = k_part
            .max((rec.k[i] - y).abs())
            .max((1.0 / (v * v) - 1.0).abs())
            .max(2.0 * dv.abs() / v.powi(3))
            .max(sk(y).abs() / (v * v) + 6.0 * dv * dv / v.powi(4));
    }
    Ok(C3Row {
        m,
        x_m: norm.x_m,
        sup_s,
        c1_dist,
        c3_dist,
        sup_v_prime: rec.sup_v_prime(),
        bound: mobius_c3(&norm.mobius, a, b, grid) + k_part,
    })
}

/// Curves of `sup |S φ_m|`, C¹ and C³ distance to the identity on `[a, b]`, and `sup |v_m'|`.
///
/// `family` is indexed by `m` and should be sorted by it.
pub fn c3_convergence_check<F>(family: &[(u32, F)], a: f64, b: f64, grid: usize) -> Result<C3Report>
where
    F: Fn(f64) -> Jet3 + Sync,
{
    let grid = grid.max(2);
    let rows: Vec<C3Row> = family.par_iter().map(|(m, phi)| row(*m, phi, a, b, grid)).collect::<Result<_>>()?;
    let col = |f: fn(&C3Row) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let verdict = if tends_to_zero(&col(|r| r.sup_s)) && tends_to_zero(&col(|r| r.c1_dist)) {
        if tends_to_zero(&col(|r| r.c3_dist)) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    } else {
        Verdict::NotApplicable
    };
    Ok(C3Report { rows, verdict, grid })
}
