use super::generator::Generator;
use super::jet::Jet3;
use super::mobius::Mat2;
use super::point::wrap;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Coordinate `y` near the attracting fixed point of a hyperbolic Möbius map
/// in which the map is exactly `y -> αy`.
///
/// `y = s·tan(π P(x))`, where the Möbius map `P` sends the attracting point
/// to 0 and the repelling point to 1/2, and `s` makes the chart tangent to
/// the identity at the fixed point.
#[derive(Clone, Debug)]
pub struct LinearChart {
    fixed_point: f64,
    repelling_point: f64,
    alpha: f64,
    normalizer: Mat2,
    scale: f64,
}

impl LinearChart {
    pub fn new(l: &Generator) -> Result<Self> {
        if !l.is_pure_mobius() {
            return Err(Error::ChartRequiresPureMobius);
        }
        Self::from_matrix(&l.matrix())
    }

    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        let m = m.normalized()?;
        let (att, rep) = m.fixed_points()?;
        let tr = m.trace();
        let disc = (tr * tr - 4.0).sqrt();
        let mu_big = if tr > 0.0 { 0.5 * (tr + disc) } else { 0.5 * (tr - disc) };
        let va = m.eigenvector(mu_big);
        let vr = m.eigenvector(1.0 / mu_big);
        // Columns (repelling, attracting): basis vector (0,1) is x = 0, (1,0) is x = 1/2.
        let mut v = Mat2::new(vr.0, va.0, vr.1, va.1);
        if v.det() < 0.0 {
            v = Mat2::new(-vr.0, va.0, -vr.1, va.1);
        }
        let normalizer = v.normalized()?.inverse();
        let scale = 1.0 / (PI * normalizer.derivative(att));
        Ok(Self {
            fixed_point: att,
            repelling_point: rep,
            alpha: 1.0 / (mu_big * mu_big),
            normalizer,
            scale,
        })
    }

    pub fn fixed_point(&self) -> f64 {
        self.fixed_point
    }

    pub fn repelling_point(&self) -> f64 {
        self.repelling_point
    }

    /// Multiplier `l'(p) < 1` at the attracting fixed point.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Chart coordinate; the repelling point is sent to infinity.
    pub fn to_chart(&self, x: f64) -> f64 {
        let mut u = self.normalizer.apply(x);
        if u > 0.5 {
            u -= 1.0;
        }
        self.scale * (PI * u).tan()
    }

    /// Circle point of a chart coordinate.
    pub fn from_chart(&self, y: f64) -> f64 {
        let u = (y / self.scale).atan() / PI;
        self.normalizer.inverse().apply(wrap(u))
    }

    /// Jet of `x -> to_chart(x)`.
    pub fn to_chart_jet(&self, x: f64) -> Jet3 {
        let mut p = self.normalizer.jet(x);
        if p.value > 0.5 {
            p.value -= 1.0;
        }
        let t = (PI * p.value).tan();
        let sec2 = 1.0 + t * t;
        let s = self.scale;
        let tan_jet = Jet3 {
            value: s * t,
            d1: s * PI * sec2,
            d2: 2.0 * s * PI * PI * sec2 * t,
            d3: 2.0 * s * PI * PI * PI * sec2 * (1.0 + 3.0 * t * t),
        };
        Jet3::compose(&tan_jet, &p)
    }

    /// Jet of `y -> from_chart(y)`; the value is lifted next to the fixed point.
    pub fn from_chart_jet(&self, y: f64) -> Jet3 {
        let x = self.from_chart(y);
        let mut j = self.to_chart_jet(x).invert(x);
        let d = wrap(x - self.fixed_point + 0.5) - 0.5;
        j.value = self.fixed_point + d;
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::GeneratorSpec;

    #[test]
    fn diagonal_chart_is_tangent_identity() {
        let chart = LinearChart::from_matrix(&Mat2::new(0.5, 0.0, 0.0, 2.0)).unwrap();
        assert!(chart.fixed_point().abs() < 1e-15);
        assert!((chart.alpha() - 0.25).abs() < 1e-15);
        let j = chart.to_chart_jet(0.0);
        assert!(j.value.abs() < 1e-15 && (j.d1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugated_map_is_linear() {
        let r = Mat2::rotation(0.17);
        let h = r * Mat2::new(0.5, 0.0, 0.0, 2.0) * r.inverse();
        let chart = LinearChart::from_matrix(&h).unwrap();
        assert!((chart.fixed_point() - 0.17).abs() < 1e-12);
        for i in 0..=20 {
            let y = -0.01 + i as f64 * 0.001;
            let back = chart.to_chart(h.apply(chart.from_chart(y)));
            assert!((back - y / 4.0).abs() < 1e-12, "{back} vs {}", y / 4.0);
        }
    }

    #[test]
    fn refuses_non_hyperbolic_and_conjugated() {
        assert!(matches!(
            LinearChart::from_matrix(&Mat2::rotation(0.2)),
            Err(Error::NotHyperbolic { .. })
        ));
        let g = Generator::new(&GeneratorSpec {
            matrix: [2.0, 0.0, 0.0, 0.5],
            conjugator: vec![[0.01, 0.0]],
            cover: 1,
            deck: 0,
        })
        .unwrap();
        assert!(matches!(LinearChart::new(&g), Err(Error::ChartRequiresPureMobius)));
    }
}
