/// Value and first three derivatives of a map at a point.
///
/// `value` is a real lift: composition keeps it unreduced so that nearby
/// jets can be differenced. Reduce with [`crate::circle::wrap`] when needed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Self { value, d1, d2, d3 }
    }

    pub fn identity(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    /// Jet of `outer ∘ inner`, where `outer` was evaluated at `inner.value`.
    pub fn compose(outer: &Jet3, inner: &Jet3) -> Jet3 {
        let g1 = inner.d1;
        let g2 = inner.d2;
        Jet3 {
            value: outer.value,
            d1: outer.d1 * g1,
            d2: outer.d2 * g1 * g1 + outer.d1 * g2,
            d3: outer.d3 * g1 * g1 * g1 + 3.0 * outer.d2 * g1 * g2 + outer.d1 * inner.d3,
        }
    }

    /// Jet of the inverse map at `self.value`, with value set to `x`.
    pub fn invert(&self, x: f64) -> Jet3 {
        let g1 = self.d1;
        let g2 = self.d2;
        Jet3 {
            value: x,
            d1: 1.0 / g1,
            d2: -g2 / (g1 * g1 * g1),
            d3: -self.d3 / g1.powi(4) + 3.0 * g2 * g2 / g1.powi(5),
        }
    }

    /// `L = d2/d1`.
    pub fn log_derivative(&self) -> f64 {
        self.d2 / self.d1
    }

    /// Plain Schwarzian `d3/d1 - 1.5 (d2/d1)^2` in the `[0,1)` coordinate.
    pub fn schwarzian(&self) -> f64 {
        let l = self.d2 / self.d1;
        self.d3 / self.d1 - 1.5 * l * l
    }

    /// Schwarzian relative to the projective structure of the angle chart.
    ///
    /// The coordinate `x` is `arctan(t)/π` of an affine coordinate `t`, whose
    /// own Schwarzian is `2π²`. Adding that correction gives a cocycle that
    /// vanishes identically on Möbius maps.
    pub fn projective_schwarzian(&self) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        self.schwarzian() + 2.0 * pi2 * (self.d1 * self.d1 - 1.0)
    }
}

/// `(L, S)` with `L = d2/d1` and `S = d3/d1 - 1.5 L²`.
pub fn log_and_schwarzian(j: &Jet3) -> (f64, f64) {
    (j.log_derivative(), j.schwarzian())
}
