use super::grid::GridMeasure;
use crate::circle::{wrap, CircleMap};
use crate::walk::{sample_walk_indexed, StepDistribution};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct DiracCurve {
    /// Median over trials of the shortest arc carrying 99% of `r_n ν`, for `n = 0..=horizon`.
    pub median_arc: Vec<f64>,
    pub trials: usize,
    pub grid_size: usize,
    /// Final median below two grid cells.
    pub concentrated: bool,
}

/// Shortest arc carrying mass `q` of `f_* ν`, over source arcs with grid endpoints.
fn shortest_image_arc(nu: &GridMeasure, image: &[f64], q: f64) -> f64 {
    let n = nu.grid_size();
    let cdf = nu.cdf();
    let lifted = |i: usize| if i <= n { cdf[i] } else { cdf[i - n] + 1.0 };
    let img = |i: usize| image[i % n];
    let mut best: f64 = 1.0;
    let mut j = 0;
    for i in 0..n {
        if j < i {
            j = i;
        }
        while j < i + n && lifted(j) - lifted(i) < q {
            j += 1;
        }
        if j >= i + n {
            continue;
        }
        let len = wrap(img(j) - img(i));
        best = best.min(len);
    }
    best
}

/// Concentration of `r_n ν` along sampled walks.
pub fn dirac_convergence_probe(mu: &StepDistribution, nu: &GridMeasure, horizon: usize, trials: usize, seed: u64) -> DiracCurve {
    let n = nu.grid_size();
    let alphabet = mu.alphabet();
    let curves: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let walk = sample_walk_indexed(mu, horizon, seed, t);
            let mut out = Vec::with_capacity(horizon + 1);
            for k in 0..=horizon {
                let image: Vec<f64> = match walk.r_matrix(k) {
                    Some(m) => (0..n).map(|i| m.apply(i as f64 / n as f64)).collect(),
                    None => {
                        let w = walk.r_word(mu, k);
                        let g = alphabet.word_map(w.letters());
                        (0..n).map(|i| g.apply(i as f64 / n as f64)).collect()
                    }
                };
                out.push(shortest_image_arc(nu, &image, 0.99));
            }
            out
        })
        .collect();
    let median_arc: Vec<f64> = (0..=horizon)
        .map(|k| {
            let mut v: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if v.is_empty() {
                f64::NAN
            } else if v.len() % 2 == 1 {
                v[v.len() / 2]
            } else {
                0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
            }
        })
        .collect();
    let concentrated = median_arc.last().is_some_and(|&v| v < 2.0 / n as f64);
    DiracCurve {
        median_arc,
        trials,
        grid_size: n,
        concentrated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, Mat2};
    use std::sync::Arc;

    #[test]
    fn rotations_do_not_contract() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::rotation(0.3819660112501051)]).unwrap());
        let mu = StepDistribution::uniform_symmetric(a).unwrap();
        let curve = dirac_convergence_probe(&mu, &GridMeasure::lebesgue(512), 5, 3, 1);
        for v in curve.median_arc {
            assert!((v - 0.99).abs() < 2.0 / 512.0);
        }
    }

    #[test]
    fn hyperbolic_contracts_geometrically() {
        // ν uniform on the arc [0.4, 0.6]; r_n = l^n with l'(0) = 1/4.
        let n = 4096;
        let cdf: Vec<f64> = (0..=n)
            .map(|i| ((i as f64 / n as f64 - 0.4) / 0.2).clamp(0.0, 1.0))
            .collect();
        let nu = GridMeasure::from_cdf(cdf).unwrap();
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::new(0.5, 0.0, 0.0, 2.0)]).unwrap());
        let w = a.parse_word("A").unwrap();
        let mu = StepDistribution::new(a, vec![(w, 1.0)], false).unwrap();
        let curve = dirac_convergence_probe(&mu, &nu, 12, 1, 0);
        for k in 6..12 {
            let ratio = curve.median_arc[k + 1] / curve.median_arc[k];
            assert!((ratio - 0.25).abs() < 0.01, "step {k}: {ratio}");
        }
        assert!(curve.concentrated);
    }
}
