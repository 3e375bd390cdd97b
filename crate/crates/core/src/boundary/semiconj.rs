use crate::circle::{circle_dist, wrap, CircleMap};
use crate::measure::GridMeasure;

/// The CDF map `s(x) = ν([0, x])`, a monotone degree-one map of the circle.
#[derive(Clone, Debug)]
pub struct SemiConjugation {
    nu: GridMeasure,
}

pub fn semiconjugation_map(nu: &GridMeasure) -> SemiConjugation {
    SemiConjugation { nu: nu.clone() }
}

impl SemiConjugation {
    pub fn measure(&self) -> &GridMeasure {
        &self.nu
    }

    pub fn s(&self, x: f64) -> f64 {
        wrap(self.nu.cdf_at(wrap(x)))
    }

    /// Lifted `s`, of degree one.
    pub fn s_lift(&self, x: f64) -> f64 {
        self.nu.cdf_lift(x)
    }

    /// A right inverse of `s`: the left end of the fiber over `u`.
    pub fn section(&self, u: f64) -> f64 {
        self.nu.quantile(wrap(u))
    }

    /// Induced map `m_g = s ∘ g ∘ s⁺` evaluated at `u`.
    pub fn induced(&self, g: impl Fn(f64) -> f64, u: f64) -> f64 {
        self.s(g(self.section(u)))
    }

    /// `sup_x dist(s(g(x)), m_g(s(x)))` on the grid of `ν`.
    pub fn equivariance_defect<M: CircleMap + ?Sized>(&self, g: &M) -> f64 {
        let n = self.nu.grid_size();
        (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                circle_dist(self.s(g.apply(x)), self.induced(|t| g.apply(t), self.s(x)))
            })
            .fold(0.0, f64::max)
    }
}
