use crate::circle::{wrap, Alphabet, CircleMap, Jet3, LinearChart, Mat2, Word};
use crate::{Error, Result};
use serde::Serialize;

/// `y -> α^{-m} · χ(W(χ⁻¹(α^m y)))` for a linearizing chart `χ` of `l` and a circle map `W`.
///
/// With `W = h̄⁻¹ ∘ ḡ` this is `h_m⁻¹ ∘ g_m` where `g_m = ḡ ∘ l^m`.
#[derive(Clone, Debug)]
pub struct NearIdentityMap<'a> {
    chart: &'a LinearChart,
    scale: f64,
    inner: Inner<'a>,
}

#[derive(Clone, Debug)]
enum Inner<'a> {
    Matrix(Mat2),
    Word(&'a Alphabet, Word),
}

impl<'a> NearIdentityMap<'a> {
    /// Uses the product matrix when the alphabet is pure Möbius.
    pub fn new(alphabet: &'a Alphabet, chart: &'a LinearChart, word: Word, m: u32) -> Self {
        let inner = if alphabet.is_pure_mobius() {
            Inner::Matrix(alphabet.matrix(word.letters()))
        } else {
            Inner::Word(alphabet, word)
        };
        Self {
            chart,
            scale: chart.alpha().powi(m as i32),
            inner,
        }
    }

    pub fn jet(&self, y: f64) -> Jet3 {
        let s = self.scale;
        let pre = self.chart.from_chart_jet(s * y);
        let pre = Jet3::new(pre.value, pre.d1 * s, pre.d2 * s * s, pre.d3 * s * s * s);
        let w = match &self.inner {
            Inner::Matrix(m) => m.jet(pre.value),
            Inner::Word(a, word) => a.word_map(word.letters()).jet(pre.value),
        };
        let post = self.chart.to_chart_jet(wrap(w.value));
        let j = Jet3::compose(&post, &Jet3::compose(&w, &pre));
        Jet3::new(j.value / s, j.d1 / s, j.d2 / s, j.d3 / s)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CkDistance {
    pub c0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CkDistance {
    /// `max(dist, |φ' - 1|, …)` up to order `k`.
    pub fn order(&self, k: u8) -> f64 {
        let mut v = self.c0.max(self.d1);
        if k >= 2 {
            v = v.max(self.d2);
        }
        if k >= 3 {
            v = v.max(self.d3);
        }
        v
    }
}

/// `C^k` distance of `φ` to the identity on `[a, b]`, `k ∈ {1, 2, 3}`.
///
/// `φ` must be increasing with finite jets on the grid; otherwise the arc left its domain.
pub fn ck_distance_to_identity(phi: &dyn Fn(f64) -> Jet3, a: f64, b: f64, k: u8, grid: usize) -> Result<f64> {
    Ok(ck_components(phi, a, b, grid)?.order(k))
}

pub(crate) fn ck_components(phi: &dyn Fn(f64) -> Jet3, a: f64, b: f64, grid: usize) -> Result<CkDistance> {
    if !(b > a) {
        return Err(Error::InvalidArgument("empty interval".into()));
    }
    let n = grid.max(2);
    let mut out = CkDistance {
        c0: 0.0,
        d1: 0.0,
        d2: 0.0,
        d3: 0.0,
    };
    let mut prev = f64::NEG_INFINITY;
    for i in 0..n {
        let y = a + (b - a) * i as f64 / (n - 1) as f64;
        let j = phi(y);
        let finite = j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite() && j.d3.is_finite();
        if !finite || !(j.d1 > 0.0) || j.value <= prev {
            return Err(Error::DomainEscape);
        }
        prev = j.value;
        out.c0 = out.c0.max((j.value - y).abs());
        out.d1 = out.d1.max((j.d1 - 1.0).abs());
        out.d2 = out.d2.max(j.d2.abs());
        out.d3 = out.d3.max(j.d3.abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Generator;

    #[test]
    fn identity_and_cancelling_words() {
        let a = Alphabet::from_matrices(&[Mat2::new(0.9f64.sqrt(), 0.0, 0.0, 1.0 / 0.9f64.sqrt()), Mat2::rotation(0.3)]).unwrap();
        let chart = LinearChart::from_matrix(&a.generators()[0].matrix()).unwrap();
        let id = NearIdentityMap::new(&a, &chart, Word::identity(), 3);
        assert!(ck_distance_to_identity(&|y| id.jet(y), -0.05, 0.05, 3, 101).unwrap() < 1e-12);
        let w = a.parse_word("B A B^-1 A^-1 A B A^-1 B^-1").unwrap();
        let phi = NearIdentityMap::new(&a, &chart, w, 2);
        assert!(ck_distance_to_identity(&|y| phi.jet(y), -0.05, 0.05, 3, 101).unwrap() <= 1e-9);
    }

    #[test]
    fn rotation_distance_is_exact() {
        let r = Generator::mobius(Mat2::rotation(1e-4)).unwrap();
        let phi = |x: f64| {
            let mut j = r.jet(x);
            j.value = x + wrap(j.value - x + 0.5) - 0.5;
            j
        };
        let d = ck_distance_to_identity(&phi, 0.2, 0.3, 1, 101).unwrap();
        assert!((d - 1e-4).abs() < 1e-12, "{d}");
    }

    #[test]
    fn escaping_the_chart_is_an_error() {
        let a = Alphabet::from_matrices(&[Mat2::new(0.5, 0.0, 0.0, 2.0), Mat2::rotation(0.5)]).unwrap();
        let chart = LinearChart::from_matrix(&a.generators()[0].matrix()).unwrap();
        // Rotation by 1/2 sends the attracting point to the repelling one.
        let phi = NearIdentityMap::new(&a, &chart, a.parse_word("B").unwrap(), 0);
        assert!(matches!(
            ck_distance_to_identity(&|y| phi.jet(y), -0.1, 0.1, 1, 51),
            Err(Error::DomainEscape)
        ));
    }
}
