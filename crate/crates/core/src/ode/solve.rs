use crate::{Error, Result};
use serde::Serialize;

/// Solutions of `w'' + (S/2) w = 0` with `u(0) = 0, u'(0) = 1, v(0) = 1, v'(0) = 0`, and `k = u / v`.
#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub step: f64,
    pub ys: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub k: Vec<f64>,
    /// `max |u'v - v'u - 1|` over the nodes.
    pub wronskian_drift: f64,
    /// Step-doubling estimate `max |w_h - w_{h/2}| / 15` over `u, v`.
    pub richardson_error: f64,
    /// Largest relative mismatch of `k' = 1/v²`, `k'' = -2v'/v³`, `k''' = S/v² + 6v'²/v⁴`
    /// against five-point differences.
    pub identity_residual: f64,
}

impl Reconstruction {
    pub fn sup_v_prime(&self) -> f64 {
        self.dv.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// `k` at `y` by cubic Hermite interpolation between nodes.
    pub fn k_at(&self, y: f64) -> f64 {
        let n = self.ys.len();
        let i = self.ys.partition_point(|&t| t <= y).clamp(1, n - 1) - 1;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let h = y1 - y0;
        let t = ((y - y0) / h).clamp(0.0, 1.0);
        let d0 = 1.0 / (self.v[i] * self.v[i]);
        let d1 = 1.0 / (self.v[i + 1] * self.v[i + 1]);
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.k[i]
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * self.k[i + 1]
            + (t3 - t2) * h * d1
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("y,u,du,v,dv,k\n");
        for i in 0..self.ys.len() {
            s.push_str(&format!(
                "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                self.ys[i], self.u[i], self.du[i], self.v[i], self.dv[i], self.k[i]
            ));
        }
        s
    }
}

type State = [f64; 4];

fn rk4(s: &dyn Fn(f64) -> f64, y: f64, w: State, h: f64) -> State {
    let f = |y: f64, w: &State| -> State {
        let q = -0.5 * s(y);
        [w[1], q * w[0], w[3], q * w[2]]
    };
    let add = |w: &State, k: &State, c: f64| -> State { [w[0] + c * k[0], w[1] + c * k[1], w[2] + c * k[2], w[3] + c * k[3]] };
    let k1 = f(y, &w);
    let k2 = f(y + 0.5 * h, &add(&w, &k1, 0.5 * h));
    let k3 = f(y + 0.5 * h, &add(&w, &k2, 0.5 * h));
    let k4 = f(y + h, &add(&w, &k3, h));
    let mut out = w;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// States at `0, ±h, ±2h, …` out to `end`; `steps` uniform steps of signed size `end / steps`.
fn sweep(s: &dyn Fn(f64) -> f64, end: f64, steps: usize) -> Result<Vec<(f64, State)>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut w = [0.0, 1.0, 1.0, 0.0];
    out.push((0.0, w));
    if steps == 0 {
        return Ok(out);
    }
    let h = end / steps as f64;
    for i in 0..steps {
        let y = h * i as f64;
        let next = rk4(s, y, w, h);
        if !next.iter().all(|v| v.is_finite()) || next[2] <= 0.0 {
            return Err(Error::ProjectiveBlowUp(y + h));
        }
        w = next;
        out.push((h * (i + 1) as f64, w));
    }
    Ok(out)
}

fn solve(s: &dyn Fn(f64) -> f64, a: f64, b: f64, step: f64, refine: usize) -> Result<Vec<(f64, State)>> {
    let n_right = (b / step).ceil() as usize * refine;
    let n_left = (-a / step).ceil() as usize * refine;
    let right = sweep(s, b, n_right)?;
    let left = sweep(s, a, n_left)?;
    let mut all: Vec<(f64, State)> = left.into_iter().skip(1).rev().collect();
    all.extend(right);
    Ok(all)
}

/// Five-point derivative of `f` at node `i` of a grid whose spacing is uniform on each side of 0.
fn five_point(ys: &[f64], f: &[f64], i: usize) -> Option<f64> {
    if i < 2 || i + 2 >= ys.len() {
        return None;
    }
    let h = ys[i + 1] - ys[i];
    let h0 = ys[i] - ys[i - 1];
    let uniform = [ys[i - 1] - ys[i - 2], ys[i + 2] - ys[i + 1], h0]
        .iter()
        .all(|&d| (d - h).abs() <= 1e-9 * h.abs());
    uniform.then(|| (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h))
}

/// Integrates `w'' + (S/2) w = 0` from 0 in both directions with fixed-step RK4 and
/// reconstructs `k = u / v` on `[a, b]`.
///
/// `v` must stay positive on `[a, b]`; otherwise `k` has a pole inside the domain.
pub fn solve_and_reconstruct(s: &dyn Fn(f64) -> f64, a: f64, b: f64, step: f64) -> Result<Reconstruction> {
    if !(a <= 0.0 && 0.0 <= b && a < b) {
        return Err(Error::InvalidArgument("domain must contain 0".into()));
    }
    if !(step > 0.0) || step > (b - a) / 100.0 {
        return Err(Error::InvalidArgument("step must lie in (0, (b - a)/100]".into()));
    }
    let coarse = solve(s, a, b, step, 1)?;
    let fine = solve(s, a, b, step, 2)?;
    let zero = coarse.iter().position(|(y, _)| *y == 0.0).unwrap_or(0);
    let fine_zero = fine.iter().position(|(y, _)| *y == 0.0).unwrap_or(0);
    let mut richardson: f64 = 0.0;
    for (i, (_, w)) in coarse.iter().enumerate() {
        let j = fine_zero as isize + 2 * (i as isize - zero as isize);
        let wf = &fine[j as usize].1;
        richardson = richardson.max((w[0] - wf[0]).abs()).max((w[2] - wf[2]).abs());
    }
    richardson /= 15.0;

    let ys: Vec<f64> = coarse.iter().map(|(y, _)| *y).collect();
    let u: Vec<f64> = coarse.iter().map(|(_, w)| w[0]).collect();
    let du: Vec<f64> = coarse.iter().map(|(_, w)| w[1]).collect();
    let v: Vec<f64> = coarse.iter().map(|(_, w)| w[2]).collect();
    let dv: Vec<f64> = coarse.iter().map(|(_, w)| w[3]).collect();
    let k: Vec<f64> = u.iter().zip(&v).map(|(u, v)| u / v).collect();
    let wronskian_drift = (0..ys.len()).fold(0.0f64, |m, i| m.max((du[i] * v[i] - dv[i] * u[i] - 1.0).abs()));

    // Each identity is compared with the five-point derivative of the previous one,
    // starting from k itself, so that no third difference of k is needed.
    let k1: Vec<f64> = v.iter().map(|v| 1.0 / (v * v)).collect();
    let k2: Vec<f64> = v.iter().zip(&dv).map(|(v, d)| -2.0 * d / (v * v * v)).collect();
    let k3: Vec<f64> = (0..ys.len())
        .map(|i| s(ys[i]) / (v[i] * v[i]) + 6.0 * dv[i] * dv[i] / v[i].powi(4))
        .collect();
    let mut identity_residual: f64 = 0.0;
    for i in 0..ys.len() {
        for (f, exact) in [(&k, &k1), (&k1, &k2), (&k2, &k3)] {
            if let Some(d) = five_point(&ys, f, i) {
                identity_residual = identity_residual.max((d - exact[i]).abs() / exact[i].abs().max(1.0));
            }
        }
    }

    Ok(Reconstruction {
        step,
        ys,
        u,
        du,
        v,
        dv,
        k,
        wronskian_drift,
        richardson_error: richardson,
        identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_schwarzian_gives_identity() {
        let r = solve_and_reconstruct(&|_| 0.0, -0.5, 0.5, 1e-3).unwrap();
        for (y, k) in r.ys.iter().zip(&r.k) {
            assert!((k - y).abs() < 1e-14);
        }
        assert!(r.v.iter().all(|&v| v == 1.0));
        assert!(r.wronskian_drift < 1e-14);
    }

    #[test]
    fn constant_schwarzian_closed_form() {
        let w = 0.3;
        let r = solve_and_reconstruct(&|_| 2.0 * w * w, -1.0, 1.0, 1e-3).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..r.ys.len() {
            let y = r.ys[i];
            err = err
                .max((r.u[i] - (w * y).sin() / w).abs())
                .max((r.v[i] - (w * y).cos()).abs())
                .max((r.k[i] - (w * y).tan() / w).abs());
        }
        assert!(err < 1e-8, "{err}");
        assert!(r.wronskian_drift < 1e-8);
        assert!(r.identity_residual < 1e-7, "{}", r.identity_residual);
        assert!(r.richardson_error < 1e-10);
        assert!((r.k_at(0.4321) - (w * 0.4321f64).tan() / w).abs() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported() {
        // v = cos(ωy) vanishes at π/(2ω) ≈ 0.785 for ω = 2.
        let e = solve_and_reconstruct(&|_| 8.0, -0.1, 1.0, 1e-3).unwrap_err();
        match e {
            Error::ProjectiveBlowUp(y) => assert!((y - std::f64::consts::FRAC_PI_4).abs() < 2e-3, "{y}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(solve_and_reconstruct(&|_| 0.0, 0.1, 1.0, 1e-3).is_err());
        assert!(solve_and_reconstruct(&|_| 0.0, -1.0, 1.0, 0.05).is_err());
    }
}
