use crate::circle::Jet3;
use crate::{Error, Result};
use serde::Serialize;

/// Möbius map of the real line with prescribed value and first two derivatives at `x`.
///
/// `A(x + t) = value + d1 · t / (1 - c t)` with `c = d2 / (2 d1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MobiusJet {
    pub x: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MobiusJet {
    pub fn new(x: f64, value: f64, d1: f64, d2: f64) -> Result<Self> {
        if !(d1 > 0.0) || !value.is_finite() || !d2.is_finite() {
            return Err(Error::InvalidArgument("Möbius 2-jet needs d1 > 0".into()));
        }
        Ok(Self { x, value, d1, d2 })
    }

    fn c(&self) -> f64 {
        self.d2 / (2.0 * self.d1)
    }

    pub fn jet(&self, t: f64) -> Jet3 {
        let c = self.c();
        let s = t - self.x;
        let q = 1.0 - c * s;
        Jet3::new(
            self.value + self.d1 * s / q,
            self.d1 / (q * q),
            2.0 * c * self.d1 / (q * q * q),
            6.0 * c * c * self.d1 / (q * q * q * q),
        )
    }

    pub fn inverse_jet(&self, w: f64) -> Jet3 {
        let c = self.c();
        let s = w - self.value;
        let q = self.d1 + c * s;
        Jet3::new(
            self.x + s / q,
            self.d1 / (q * q),
            -2.0 * c * self.d1 / (q * q * q),
            6.0 * c * c * self.d1 / (q * q * q * q),
        )
    }

    /// Pole of `A`, if `A` is not affine.
    pub fn pole(&self) -> Option<f64> {
        let c = self.c();
        (c != 0.0).then(|| self.x + 1.0 / c)
    }
}

/// Output of [`mobius_normalize`]: `k(y) = -x_m + A⁻¹(φ(x_m + y))`.
#[derive(Clone, Copy)]
pub struct Normalization<F> {
    pub phi: F,
    pub x_m: f64,
    pub mobius: MobiusJet,
    /// True when `L φ` had no sign change against its mean and `x_m` fell back to the midpoint.
    pub midpoint_fallback: bool,
}

impl<F: Fn(f64) -> Jet3> Normalization<F> {
    pub fn k_jet(&self, y: f64) -> Jet3 {
        let j = (self.phi)(self.x_m + y);
        let back = self.mobius.inverse_jet(j.value);
        let mut k = Jet3::compose(&back, &j);
        k.value -= self.x_m;
        k
    }

    pub fn k(&self, y: f64) -> f64 {
        self.k_jet(y).value
    }
}

/// Locates the mean-value point of `L φ` on `[a, b]` and factors out the osculating Möbius map.
pub fn mobius_normalize<F: Fn(f64) -> Jet3>(phi: F, a: f64, b: f64, grid: usize) -> Result<Normalization<F>> {
    if !(b > a) {
        return Err(Error::InvalidArgument("empty interval".into()));
    }
    let n = grid.max(2);
    let ys: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let jets: Vec<Jet3> = ys.iter().map(|&y| phi(y)).collect();
    if jets.iter().any(|j| !(j.d1 > 0.0) || !j.d2.is_finite()) {
        return Err(Error::InvalidArgument("φ is not a diffeomorphism on the interval".into()));
    }
    let target = (jets[n].d1.ln() - jets[0].d1.ln()) / (b - a);
    let f = |j: &Jet3| j.log_derivative() - target;
    let scale = jets.iter().map(|j| j.log_derivative().abs()).fold(target.abs(), f64::max);

    let mut x_m = 0.5 * (a + b);
    let mut fallback = true;
    if scale > 0.0 {
        let vals: Vec<f64> = jets.iter().map(f).collect();
        let tiny = 1e-13 * scale.max(1.0);
        let cell = (0..n).find(|&i| vals[i] * vals[i + 1] <= 0.0 && (vals[i].abs() > tiny || vals[i + 1].abs() > tiny));
        if let Some(i) = cell {
            let (mut lo, mut hi) = (ys[i], ys[i + 1]);
            let mut flo = vals[i];
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(&phi(mid));
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * (lo.abs() + hi.abs()) {
                    break;
                }
            }
            x_m = 0.5 * (lo + hi);
            fallback = false;
        }
    }
    let j = phi(x_m);
    let mobius = MobiusJet::new(x_m, j.value, j.d1, j.d2)?;
    Ok(Normalization {
        phi,
        x_m,
        mobius,
        midpoint_fallback: fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(y: f64) -> Jet3 {
        let w = 2.0 * PI;
        Jet3::new(
            y + 0.01 * (w * y).sin(),
            1.0 + 0.01 * w * (w * y).cos(),
            -0.01 * w * w * (w * y).sin(),
            -0.01 * w * w * w * (w * y).cos(),
        )
    }

    #[test]
    fn mobius_jet_round_trips() {
        let m = MobiusJet::new(0.3, 1.2, 0.7, -0.4).unwrap();
        let j = m.jet(0.3);
        assert_eq!((j.value, j.d1, j.d2), (1.2, 0.7, -0.4));
        for t in [0.0, 0.25, 0.5] {
            let f = m.jet(t);
            let g = m.inverse_jet(f.value);
            assert!((g.value - t).abs() < 1e-14);
            assert!((g.d1 * f.d1 - 1.0).abs() < 1e-14);
            assert!(f.schwarzian().abs() < 1e-12);
        }
    }

    #[test]
    fn identity_normalizes_to_identity() {
        let n = mobius_normalize(Jet3::identity, -0.1, 0.1, 100).unwrap();
        assert!(n.midpoint_fallback);
        assert_eq!(n.x_m, 0.0);
        let k = n.k_jet(0.05);
        assert_eq!((k.value, k.d1, k.d2, k.d3), (0.05, 1.0, 0.0, 0.0));
    }

    #[test]
    fn mobius_map_normalizes_to_identity() {
        let a = MobiusJet::new(0.0, 0.02, 1.1, 0.3).unwrap();
        let n = mobius_normalize(|y| a.jet(y), -0.1, 0.1, 200).unwrap();
        for i in 0..=20 {
            let y = -0.1 - n.x_m + 0.01 * i as f64;
            let k = n.k_jet(y);
            assert!((k.value - y).abs() < 1e-10 && (k.d1 - 1.0).abs() < 1e-10 && k.d2.abs() < 1e-10);
        }
    }

    #[test]
    fn sine_normalization_conditions() {
        let n = mobius_normalize(sine, 0.2, 0.4, 200).unwrap();
        assert!(!n.midpoint_fallback);
        assert!(n.x_m > 0.2 && n.x_m < 0.4);
        let k0 = n.k_jet(0.0);
        assert!(k0.value.abs() < 1e-10);
        assert!((k0.d1 - 1.0).abs() < 1e-10);
        assert!(k0.d2.abs() < 1e-10);
        for i in 0..=10 {
            let y = 0.2 - n.x_m + 0.02 * i as f64;
            let sk = n.k_jet(y).schwarzian();
            let sp = sine(n.x_m + y).schwarzian();
            assert!((sk - sp).abs() < 1e-9 * sp.abs().max(1.0), "{sk} {sp}");
        }
    }
}
