use crate::circle::{Alphabet, Generator, Letter, Mat2, TrigLift};

/// Lower bound on the width of the annulus on which `g` extends to an
/// injective holomorphic map; `+∞` for rotations.
pub fn rho_lower_bound(g: &Generator) -> f64 {
    bound(&g.matrix(), g.cover(), g.conjugator().map(|h| h.as_ref()))
}

/// Same bound for the composition of a word.
pub fn word_rho_lower_bound(alphabet: &Alphabet, word: &[Letter]) -> f64 {
    let m = alphabet.matrix(word);
    if word.is_empty() {
        return f64::INFINITY;
    }
    bound(&m, alphabet.cover(), alphabet.conjugator().map(|h| h.as_ref()))
}

fn bound(m: &Mat2, cover: u32, h: Option<&TrigLift>) -> f64 {
    let q = cover as f64;
    let width = m.annulus_width() / q;
    match h {
        None => width,
        Some(h) if h.l1_norm() == 0.0 => width,
        Some(h) => conjugated_bound(h, m, q),
    }
}

/// Band height reached by the image of `|Im z| <= s` under the lifted Möbius map.
fn lifted_height(m: &Mat2, q: f64, s: f64) -> Option<f64> {
    if m.max_abs_diff(&Mat2::IDENTITY) == 0.0 {
        return Some(s);
    }
    m.band_image_height(q * s).map(|v| v / q)
}

/// Largest `t` such that `h⁻¹(A_t) ⊂ A_{s1}`, `F(A_{s1}) ⊂ A_{s2}` and `h`
/// is provably injective on `A_{s2}`. Then `h ∘ F ∘ h⁻¹` is injective on `A_t`.
fn conjugated_bound(h: &TrigLift, m: &Mat2, q: f64) -> f64 {
    let sh = h.injectivity_width();
    if sh <= 0.0 {
        return 0.0;
    }
    let gain = |s: f64| s - h.height_drift(s);
    let feasible = |t: f64| -> bool {
        if gain(sh) < t {
            return false;
        }
        // s - drift(s) is increasing on [0, sh]; find its preimage of t.
        let (mut lo, mut hi) = (0.0, sh);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if gain(mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s1 = hi;
        match lifted_height(m, q, s1) {
            Some(s2) => s2 <= sh,
            None => false,
        }
    };
    let (mut lo, mut hi) = (0.0, sh);
    if !feasible(1e-15) {
        return 0.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::GeneratorSpec;
    use num_complex::Complex64;

    #[test]
    fn rotation_is_unbounded() {
        let g = Generator::mobius(Mat2::rotation(0.3)).unwrap();
        assert_eq!(rho_lower_bound(&g), f64::INFINITY);
    }

    #[test]
    fn lifted_width_scales_with_cover() {
        let base = Generator::mobius(Mat2::new(1.0, 2.0, 0.0, 1.0)).unwrap();
        let lifted = Generator::new(&GeneratorSpec {
            matrix: [1.0, 2.0, 0.0, 1.0],
            conjugator: vec![],
            cover: 2,
            deck: 0,
        })
        .unwrap();
        assert!((rho_lower_bound(&lifted) - rho_lower_bound(&base) / 2.0).abs() < 1e-15);
    }

    /// Complex map `h ∘ M ∘ h⁻¹`, or `None` where the Newton inverse or the pole test fails.
    fn conjugated_complex(h: &TrigLift, m: &Mat2, z: Complex64) -> Option<Complex64> {
        let mut x = Complex64::new(h.inverse_lift(z.re), z.im);
        for _ in 0..60 {
            let step = (h.complex_lift(x) - z) / h.complex_derivative(x);
            x -= step;
            if step.norm() < 1e-15 {
                break;
            }
        }
        if (h.complex_lift(x) - z).norm() > 1e-10 {
            return None;
        }
        let y = m.complex_apply(x);
        Some(h.complex_lift(y))
    }

    #[test]
    fn injectivity_scan_never_refutes_conjugated_bound() {
        let spec = GeneratorSpec {
            matrix: [2.0, 1.0, 1.0, 1.0],
            conjugator: vec![[0.01, 0.005], [0.0, 0.002]],
            cover: 1,
            deck: 0,
        };
        let g = Generator::new(&spec).unwrap();
        let rho = rho_lower_bound(&g);
        let m = g.matrix();
        assert!(rho > 0.0 && rho <= m.annulus_width());
        let h = g.conjugator().unwrap();
        // Sample the closed band |Im z| <= rho and check the images are pairwise distinct.
        let (nx, ny) = (64, 9);
        let mut pts = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let z = Complex64::new(i as f64 / nx as f64, rho * (2.0 * j as f64 / (ny - 1) as f64 - 1.0));
                let w = conjugated_complex(h, &m, z).expect("extension must exist on the band");
                pts.push((z, w));
            }
        }
        let mut min_sep = f64::INFINITY;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let dw = pts[a].1 - pts[b].1;
                let dw = Complex64::new(dw.re - dw.re.round(), dw.im);
                min_sep = min_sep.min(dw.norm());
            }
        }
        assert!(min_sep > 1e-6, "images collide: {min_sep}");
    }
}
