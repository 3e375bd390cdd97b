use super::jet::Jet3;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const INVERSE_TABLE: usize = 4096;
const CHECK_GRID: usize = 8192;

/// Circle diffeomorphism with lift `h(x) = x + Σ a_k cos 2πkx + b_k sin 2πkx`.
///
/// The inverse is tabulated once with monotone cubic interpolation and
/// polished by Newton steps on evaluation.
#[derive(Clone, Debug)]
pub struct TrigLift {
    coeffs: Vec<(f64, f64)>,
    table_y: Vec<f64>,
    table_slope: Vec<f64>,
}

impl PartialEq for TrigLift {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl TrigLift {
    pub fn new(coeffs: Vec<(f64, f64)>) -> Result<Self> {
        if coeffs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidGenerator("conjugator coefficients must be finite".into()));
        }
        let mut lift = TrigLift {
            coeffs,
            table_y: Vec::new(),
            table_slope: Vec::new(),
        };
        // Grid minimum of h' minus the worst drop between grid points.
        let min_d1 = (0..CHECK_GRID)
            .map(|i| lift.jet(i as f64 / CHECK_GRID as f64).d1)
            .fold(f64::INFINITY, f64::min);
        let sup_d2: f64 = lift
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (2.0 * PI * (i + 1) as f64).powi(2) * (a.abs() + b.abs()))
            .sum();
        if min_d1 - sup_d2 * 0.5 / CHECK_GRID as f64 <= 0.0 {
            return Err(Error::InvalidGenerator(format!(
                "conjugator lift is not strictly increasing (min derivative {min_d1:.3e} on the check grid)"
            )));
        }
        lift.build_inverse_table();
        Ok(lift)
    }

    pub fn coefficients(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `Σ |a_k| + |b_k|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|(a, b)| a.abs() + b.abs()).sum()
    }

    /// Lifted value and derivatives.
    pub fn jet(&self, x: f64) -> Jet3 {
        let mut j = Jet3::identity(x);
        for (i, &(a, b)) in self.coeffs.iter().enumerate() {
            let w = 2.0 * PI * (i + 1) as f64;
            let (s, c) = (w * x).sin_cos();
            j.value += a * c + b * s;
            j.d1 += w * (-a * s + b * c);
            j.d2 += -w * w * (a * c + b * s);
            j.d3 += w * w * w * (a * s - b * c);
        }
        j
    }

    pub fn lift(&self, x: f64) -> f64 {
        self.jet(x).value
    }

    fn build_inverse_table(&mut self) {
        let n = INVERSE_TABLE;
        self.table_y = (0..=n).map(|i| self.lift(i as f64 / n as f64)).collect();
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        self.table_slope = pchip_slopes(&self.table_y, &xs);
    }

    /// Lifted inverse: `h(inverse_lift(y)) = y` for every real `y`.
    pub fn inverse_lift(&self, y: f64) -> f64 {
        let y0 = self.table_y[0];
        let k = (y - y0).floor();
        let yr = y - k;
        let n = INVERSE_TABLE;
        let i = match self.table_y.binary_search_by(|v| v.partial_cmp(&yr).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let (ya, yb) = (self.table_y[i], self.table_y[i + 1]);
        let hx = 1.0 / n as f64;
        let dy = yb - ya;
        let t = if dy > 0.0 { (yr - ya) / dy } else { 0.0 };
        let (t2, t3) = (t * t, t * t * t);
        let xa = i as f64 * hx;
        let mut x = (2.0 * t3 - 3.0 * t2 + 1.0) * xa
            + (t3 - 2.0 * t2 + t) * dy * self.table_slope[i]
            + (-2.0 * t3 + 3.0 * t2) * (xa + hx)
            + (t3 - t2) * dy * self.table_slope[i + 1];
        for _ in 0..4 {
            let j = self.jet(x);
            let step = (j.value - yr) / j.d1;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x + k
    }

    /// Jet of the inverse at `y`; the value is the lifted preimage.
    pub fn inverse_jet(&self, y: f64) -> Jet3 {
        let x = self.inverse_lift(y);
        self.jet(x).invert(x)
    }

    /// Holomorphic extension of the lift.
    pub fn complex_lift(&self, z: Complex64) -> Complex64 {
        let mut v = z;
        for (i, &(a, b)) in self.coeffs.iter().enumerate() {
            let wz = z * (2.0 * PI * (i + 1) as f64);
            v += wz.cos() * a + wz.sin() * b;
        }
        v
    }

    pub fn complex_derivative(&self, z: Complex64) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for (i, &(a, b)) in self.coeffs.iter().enumerate() {
            let w = 2.0 * PI * (i + 1) as f64;
            let wz = z * w;
            v += (-wz.sin() * a + wz.cos() * b) * w;
        }
        v
    }

    /// Bound on `|Im h(z) - Im z|` over the band `|Im z| <= s`.
    pub fn height_drift(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| (a.abs() + b.abs()) * (2.0 * PI * (i + 1) as f64 * s).sinh())
            .sum()
    }

    /// Half-width of a band on which the extension is provably injective:
    /// there `|h' - 1| < 1`, so the real part of `h'` stays positive.
    pub fn injectivity_width(&self) -> f64 {
        if self.coeffs.iter().all(|&(a, b)| a == 0.0 && b == 0.0) {
            return f64::INFINITY;
        }
        let excess = |s: f64| -> f64 {
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let w = 2.0 * PI * (i + 1) as f64;
                    w * (a.abs() + b.abs()) * (w * s).cosh()
                })
                .sum::<f64>()
        };
        if excess(0.0) >= 1.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while excess(hi) < 1.0 {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Fritsch-Carlson slopes `dx/dy` for monotone cubic interpolation of `x(y)`.
fn pchip_slopes(y: &[f64], x: &[f64]) -> Vec<f64> {
    let n = y.len();
    let secant: Vec<f64> = (0..n - 1).map(|i| (x[i + 1] - x[i]) / (y[i + 1] - y[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        let (s0, s1) = (secant[i - 1], secant[i]);
        if s0 * s1 <= 0.0 {
            m[i] = 0.0;
        } else {
            let (h0, h1) = (y[i] - y[i - 1], y[i + 1] - y[i]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_tight() {
        let h = TrigLift::new(vec![(0.02, 0.01), (0.0, 0.005)]).unwrap();
        for i in 0..200 {
            let y = -1.3 + i as f64 * 0.0173;
            assert!((h.lift(h.inverse_lift(y)) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_monotone_lift() {
        // h'(x) = 1 - 2π·0.2 cos(...) dips below zero.
        assert!(TrigLift::new(vec![(0.0, 0.2)]).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let h = TrigLift::new(vec![(0.03, -0.02), (0.004, 0.0)]).unwrap();
        let (x, e) = (0.41, 1e-3);
        let j = h.jet(x);
        let f = |t: f64| h.lift(t);
        let d1 = (f(x + e) - f(x - e)) / (2.0 * e);
        let d3 = (f(x + 2.0 * e) - 2.0 * f(x + e) + 2.0 * f(x - e) - f(x - 2.0 * e)) / (2.0 * e * e * e);
        assert!((j.d1 - d1).abs() < 1e-5);
        assert!((j.d3 - d3).abs() < 1e-2 * j.d3.abs().max(1.0));
    }
}
