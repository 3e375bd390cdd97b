use super::jet::Jet3;
use super::point::wrap;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::Mul;

/// A 2×2 real matrix acting on the circle through the angle chart.
///
/// The point `x` corresponds to the line through `(sin πx, cos πx)`, so the
/// affine coordinate `t = tan πx` transforms as `t -> (a t + b)/(c t + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_array(m: [f64; 4]) -> Self {
        Self::new(m[0], m[1], m[2], m[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Matrix inducing the circle rotation `x -> x + theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (PI * theta).sin_cos();
        Self::new(c, s, -s, c)
    }

    pub fn diag(s: f64) -> Self {
        Self::new(s, 0.0, 0.0, 1.0 / s)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Rescales to determinant one. Fails for singular or orientation-reversing matrices.
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGenerator("matrix has non-finite entries".into()));
        }
        if det.abs() < 1e-300 {
            return Err(Error::InvalidGenerator("non-invertible matrix".into()));
        }
        if det < 0.0 {
            return Err(Error::InvalidGenerator("orientation-reversing matrix (negative determinant)".into()));
        }
        let s = 1.0 / det.sqrt();
        Ok(Self::new(self.a * s, self.b * s, self.c * s, self.d * s))
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + 1e-12
    }

    /// Sum of squared entries over two; equals cosh of the translation length.
    pub fn half_frobenius(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let u = self.to_array();
        let v = o.to_array();
        (0..4).map(|i| (u[i] - v[i]).abs()).fold(0.0, f64::max)
    }

    #[inline]
    fn pq(&self, x: f64) -> (f64, f64, f64, f64) {
        let (s, c) = (PI * x).sin_cos();
        (self.a * s + self.b * c, self.c * s + self.d * c, s, c)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let (p, q, _, _) = self.pq(x);
        wrap(p.atan2(q) / PI)
    }

    /// Derivative of the circle action at `x` (determinant one assumed).
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let (p, q, _, _) = self.pq(x);
        1.0 / (p * p + q * q)
    }

    pub fn jet(&self, x: f64) -> Jet3 {
        let (p, q, s, c) = self.pq(x);
        let pp = PI * (self.a * c - self.b * s);
        let qp = PI * (self.c * c - self.d * s);
        let r = p * p + q * q;
        let rx = 2.0 * (p * pp + q * qp);
        let rxx = 2.0 * (pp * pp + qp * qp) - 2.0 * PI * PI * r;
        let r2 = r * r;
        Jet3 {
            value: wrap(p.atan2(q) / PI),
            d1: 1.0 / r,
            d2: -rx / r2,
            d3: -rxx / r2 + 2.0 * rx * rx / (r2 * r),
        }
    }

    /// Fixed points `(attracting, repelling)` of a hyperbolic matrix.
    pub fn fixed_points(&self) -> Result<(f64, f64)> {
        let tr = self.trace();
        if !self.is_hyperbolic() {
            return Err(Error::NotHyperbolic { trace: tr.abs() });
        }
        let disc = (tr * tr - 4.0).sqrt();
        // The larger eigenvalue in absolute value gives derivative 1/μ² < 1.
        let mu_big = if tr > 0.0 { 0.5 * (tr + disc) } else { 0.5 * (tr - disc) };
        let mu_small = 1.0 / mu_big;
        let to_point = |mu: f64| {
            let v = self.eigenvector(mu);
            wrap(v.0.atan2(v.1) / PI)
        };
        Ok((to_point(mu_big), to_point(mu_small)))
    }

    /// Eigenvector for eigenvalue `mu`, as `(p, q)` in the angle chart basis.
    pub fn eigenvector(&self, mu: f64) -> (f64, f64) {
        // Rows of (M - mu) annihilate the eigenvector; use the better conditioned one.
        let r1 = (self.a - mu, self.b);
        let r2 = (self.c, self.d - mu);
        let (x, y) = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) { r1 } else { r2 };
        let v = (-y, x);
        let n = v.0.hypot(v.1);
        (v.0 / n, v.1 / n)
    }

    /// Coefficients `(α, β)` of the disk model `w -> (αw + β)/(β̄w + ᾱ)` with `w = e^{2πix}`.
    pub fn su11(&self) -> (Complex64, Complex64) {
        // w = (i p + q)/(-i p + q) is the Cayley transform of the vector (p, q).
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let cm = [[i, one], [-i, one]];
        let inv_det = one / (i * 2.0);
        let ci = [[inv_det, -inv_det], [i * inv_det, i * inv_det]];
        let m = [
            [Complex64::new(self.a, 0.0), Complex64::new(self.b, 0.0)],
            [Complex64::new(self.c, 0.0), Complex64::new(self.d, 0.0)],
        ];
        let mul = |x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]| {
            [
                [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
                [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
            ]
        };
        let phi = mul(mul(cm, m), ci);
        (phi[0][0], phi[0][1])
    }

    /// Holomorphic extension to `C/Z`. The real part of the result is reduced to `[0, 1)`.
    pub fn complex_apply(&self, z: Complex64) -> Complex64 {
        let (al, be) = self.su11();
        let w = (Complex64::i() * 2.0 * PI * z).exp();
        let phi = (al * w + be) / (be.conj() * w + al.conj());
        let v = phi.ln() / (Complex64::i() * 2.0 * PI);
        Complex64::new(wrap(v.re), v.im)
    }

    /// `g(x + δ) - g(x)` for real `x`, without the cancellation of differencing two images.
    ///
    /// Keeps small imaginary parts to relative precision, which [`Mat2::complex_apply`] cannot.
    pub fn complex_apply_offset(&self, x: f64, delta: Complex64) -> Complex64 {
        let (al, be) = self.su11();
        let two_pi_i = Complex64::i() * 2.0 * PI;
        let w0 = (two_pi_i * x).exp();
        let dw = w0 * expm1(two_pi_i * delta);
        let w = w0 + dw;
        let den0 = be.conj() * w0 + al.conj();
        let phi0 = (al * w0 + be) / den0;
        // φ(w) - φ(w₀) = (|α|² - |β|²)(w - w₀) / ((β̄w + ᾱ)(β̄w₀ + ᾱ)).
        let dphi = (al.norm_sqr() - be.norm_sqr()) * dw / ((be.conj() * w + al.conj()) * den0);
        ln1p(dphi / phi0) / two_pi_i
    }

    /// Complex derivative of the holomorphic extension.
    pub fn complex_derivative(&self, z: Complex64) -> Complex64 {
        let (al, be) = self.su11();
        let w = (Complex64::i() * 2.0 * PI * z).exp();
        w / ((al * w + be) * (be.conj() * w + al.conj()))
    }

    /// Width of the largest annulus around the real circle on which the
    /// holomorphic extension is defined and injective; `+∞` for rotations.
    pub fn annulus_width(&self) -> f64 {
        let (al, be) = self.su11();
        let ratio = al.norm() / be.norm();
        if be.norm() <= 1e-15 * al.norm() || !ratio.is_finite() {
            f64::INFINITY
        } else {
            ratio.ln() / (2.0 * PI)
        }
    }

    /// Largest `|Im|` of the image of the band `|Im z| <= s`, or `None` if a pole lies inside.
    pub fn band_image_height(&self, s: f64) -> Option<f64> {
        if s >= self.annulus_width() {
            return None;
        }
        let (al, be) = self.su11();
        let mut height: f64 = 0.0;
        for r in [(-2.0 * PI * s).exp(), (2.0 * PI * s).exp()] {
            // Image of |w| = r is a circle; take three points to find it.
            let img = |t: f64| {
                let w = Complex64::from_polar(r, t);
                (al * w + be) / (be.conj() * w + al.conj())
            };
            let (center, radius) = circle_through(img(0.0), img(2.0 * PI / 3.0), img(4.0 * PI / 3.0));
            let far = center.norm() + radius;
            let near = (center.norm() - radius).abs();
            height = height.max(far.ln().abs()).max(near.ln().abs());
        }
        Some(height / (2.0 * PI))
    }
}

fn circle_through(z1: Complex64, z2: Complex64, z3: Complex64) -> (Complex64, f64) {
    let (ax, ay, bx, by, cx, cy) = (z1.re, z1.im, z2.re, z2.im, z3.re, z3.im);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    let center = Complex64::new(ux, uy);
    (center, (z1 - center).norm())
}

/// `e^z - 1`, accurate for small `z`.
fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// `ln(1 + u)` on the principal branch, accurate for small `u`.
fn ln1p(u: Complex64) -> Complex64 {
    Complex64::new(0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p(), u.im.atan2(1.0 + u.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_moves_points_by_theta() {
        let r = Mat2::rotation(0.3);
        let j = r.jet(0.2);
        assert!((j.value - 0.5).abs() < 1e-15);
        assert!((j.d1 - 1.0).abs() < 1e-15);
        assert!(j.d2.abs() < 1e-14 && j.d3.abs() < 1e-12);
        assert!((r.apply(0.9) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn diagonal_contracts_at_zero() {
        // t -> t/4 in the affine chart, so the derivative at 0 is 1/4.
        let m = Mat2::new(0.5, 0.0, 0.0, 2.0);
        assert!((m.derivative(0.0) - 0.25).abs() < 1e-15);
        assert!((m.derivative(0.5) - 4.0).abs() < 1e-12);
        let (att, rep) = m.fixed_points().unwrap();
        assert!(att.abs() < 1e-15 && (rep - 0.5).abs() < 1e-15);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let m = Mat2::new(1.0, 2.0, 1.0, 3.0);
        let x = 0.37;
        let h = 1e-3;
        let f = |t: f64| {
            let v = m.apply(t);
            // unwrap relative to the value at x
            let base = m.apply(x);
            base + (v - base + 0.5).rem_euclid(1.0) - 0.5
        };
        let j = m.jet(x);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
        assert!((j.d1 - d1).abs() < 1e-5 * j.d1.abs().max(1.0));
        assert!((j.d2 - d2).abs() < 1e-4 * j.d2.abs().max(1.0));
        assert!((j.d3 - d3).abs() < 1e-3 * j.d3.abs().max(1.0));
    }

    #[test]
    fn complex_extension_restricts_to_real_action() {
        let m = Mat2::new(2.0, 1.0, 1.0, 1.0);
        for &x in &[0.1, 0.4, 0.77] {
            let z = m.complex_apply(Complex64::new(x, 0.0));
            assert!((z.re - m.apply(x)).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
            let dz = m.complex_derivative(Complex64::new(x, 0.0));
            assert!((dz.re - m.derivative(x)).abs() < 1e-12 && dz.im.abs() < 1e-12);
        }
    }

    #[test]
    fn annulus_width_of_diagonal_matches_pole_location() {
        // The derivative 1/(p² + q²) of diag(1/2, 2) is singular where
        // tan(πz) = ±i/4, i.e. at Im z = ±atanh(1/4)/π.
        let m = Mat2::new(0.5, 0.0, 0.0, 2.0);
        let y = (0.25f64).atanh() / PI;
        assert!((m.annulus_width() - y).abs() < 1e-12);
        let alpha = m.half_frobenius();
        let closed = ((alpha + 1.0) / (alpha - 1.0)).ln() / (4.0 * PI);
        assert!((closed - y).abs() < 1e-12);
        assert_eq!(Mat2::rotation(0.3).annulus_width(), f64::INFINITY);
    }

    #[test]
    fn offsets_keep_tiny_heights() {
        let m = Mat2::new(1.0, 2.0, 0.0, 1.0);
        for &x in &[0.1, 0.37, 0.8] {
            let d = Complex64::new(3e-4, -2e-4);
            let direct = m.complex_apply(Complex64::new(x, 0.0) + d) - Complex64::new(m.apply(x), 0.0);
            let direct = Complex64::new(wrap(direct.re + 0.5) - 0.5, direct.im);
            assert!((m.complex_apply_offset(x, d) - direct).norm() < 1e-13);
            let tiny = Complex64::new(0.0, 1e-20);
            let off = m.complex_apply_offset(x, tiny);
            assert!((off.im / 1e-20 - m.derivative(x)).abs() < 1e-12 * m.derivative(x));
        }
    }
}
