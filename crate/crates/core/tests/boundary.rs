use circlelab::boundary::*;
use circlelab::circle::{circle_dist, Mat2};
use circlelab::experiment::{builtin_config, Config};
use circlelab::measure::*;
use circlelab::walk::StepDistribution;
use std::f64::consts::PI;

fn example(name: &str) -> (Config, StepDistribution) {
    let c = Config::parse(builtin_config(name).unwrap()).unwrap().config;
    let mu = c.step_distribution().unwrap();
    (c, mu)
}

fn transfer(mu: &StepDistribution, grid_size: usize) -> GridMeasure {
    let p = StationaryParams {
        grid_size,
        ..Default::default()
    };
    estimate_stationary_measure(mu, StationaryMethod::TransferIteration, &p).unwrap().measure
}

/// Fixed points in the angle chart, from the eigenvectors of a plain 2×2 array.
fn eigen_fixed_points(m: [[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).sqrt();
    let angle = |ev: f64| {
        // (m00 - ev) s + m01 c = 0.
        let (s, c) = (m[0][1], ev - m[0][0]);
        (s.atan2(c) / PI).rem_euclid(1.0)
    };
    let (a, b) = (angle(tr / 2.0 + disc), angle(tr / 2.0 - disc));
    (a.min(b), a.max(b))
}

fn mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut r = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

#[test]
fn schottky_gaps_match_commutator_axes() {
    // The four largest gaps are bounded by the fixed points of conjugates of the commutator.
    let a = [[3.0, 0.0], [0.0, 1.0 / 3.0]];
    let ai = [[1.0 / 3.0, 0.0], [0.0, 3.0]];
    let b = [[5.0 / 3.0, 4.0 / 3.0], [4.0 / 3.0, 5.0 / 3.0]];
    let bi = [[5.0 / 3.0, -4.0 / 3.0], [-4.0 / 3.0, 5.0 / 3.0]];
    let word = |ms: [[[f64; 2]; 2]; 4]| ms.into_iter().fold([[1.0, 0.0], [0.0, 1.0]], mul);
    let mut expected: Vec<(f64, f64)> = [word([a, b, ai, bi]), word([b, ai, bi, a]), word([ai, bi, a, b]), word([bi, a, b, ai])]
        .into_iter()
        .map(eigen_fixed_points)
        .collect();
    expected.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let (c, mu) = example("schottky");
    let n = c.stationary.grid_size;
    let nu = transfer(&mu, n);
    let ms = minimal_set_classify(mu.alphabet(), &nu, &GapCriterion::default());
    assert!(ms.is_cantor());
    let mut gaps: Vec<(f64, f64)> = ms.gaps().iter().take(4).map(|g| (g.start, g.end)).collect();
    gaps.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for (g, e) in gaps.iter().zip(&expected) {
        assert!(circle_dist(g.0, e.0) <= 2.0 / n as f64, "{g:?} vs {e:?}");
        assert!(circle_dist(g.1, e.1) <= 2.0 / n as f64, "{g:?} vs {e:?}");
    }
}

#[test]
fn cusped_and_lebesgue_examples_are_whole_circle() {
    for name in ["sanov", "rotations"] {
        let (c, mu) = example(name);
        let nu = transfer(&mu, c.stationary.grid_size);
        assert!(!minimal_set_classify(mu.alphabet(), &nu, &GapCriterion::default()).is_cantor(), "{name}");
    }
}

#[test]
fn semiconjugation_of_mobius_image_has_small_defect() {
    let h = Mat2::new(1.3, 0.4, 0.2, 0.83).normalized().unwrap();
    let n = 2048;
    let nu = GridMeasure::lebesgue(n).pushforward(&h.inverse());
    let s = semiconjugation_map(&nu);
    assert!(s.equivariance_defect(&h) <= 2.0 / n as f64);
    let cdf = nu.cdf();
    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn semiconjugation_defect_on_examples() {
    for name in ["sanov", "schottky"] {
        let (_, mu) = example(name);
        let n = 4096;
        let nu = transfer(&mu, n);
        let s = semiconjugation_map(&nu);
        for g in mu.alphabet().generators() {
            let d = s.equivariance_defect(g);
            assert!(d <= 5.0 / n as f64, "{name}: {d}");
        }
    }
}

#[test]
fn finite_quotient_degrees() {
    let (c, mu) = example("lifted-2");
    let nu = transfer(&mu, c.stationary.grid_size);
    let fq = finite_quotient_detect(&nu, &mu, 3).unwrap();
    assert_eq!(fq.degree, 2);
    if let Some(r) = fq.quotient_residual {
        assert!(r <= 2.0 * c.stationary.residual_limit, "{r}");
    }

    let (c, mu) = example("sanov");
    let nu = transfer(&mu, c.stationary.grid_size);
    assert_eq!(finite_quotient_detect(&nu, &mu, 3).unwrap().degree, 1);
}

#[test]
fn proximality_matches_examples() {
    let (_, mu) = example("sanov");
    assert!(proximality_test(mu.alphabet(), 1e-4, 40).proximal);
    let (_, mu) = example("rotations");
    let out = proximality_test(mu.alphabet(), 1e-4, 40);
    assert!(!out.proximal);
    assert!((out.min_achieved - test_arcs()[0].1 + test_arcs()[0].0).abs() < 1e-9);
}
