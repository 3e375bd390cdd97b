use circlelab::experiment::{builtin_config, Config};
use circlelab::measure::*;
use circlelab::walk::StepDistribution;

fn example(name: &str) -> StepDistribution {
    Config::parse(builtin_config(name).unwrap())
        .unwrap()
        .config
        .step_distribution()
        .unwrap()
}

/// `H(μ^{*n})` for the uniform walk on a free group of rank 2, from the law of the reduced length.
///
/// Given its length the reduced word is uniform among the `4·3^{k-1}` words of that length.
fn free_group_entropy(n: usize) -> f64 {
    let mut p = vec![0.0f64; n + 2];
    p[0] = 1.0;
    for _ in 0..n {
        let mut q = vec![0.0; n + 2];
        q[1] += p[0];
        for k in 1..=n {
            q[k + 1] += 0.75 * p[k];
            q[k - 1] += 0.25 * p[k];
        }
        p = q;
    }
    p.iter()
        .enumerate()
        .filter(|&(_, &m)| m > 0.0)
        .map(|(k, &m)| {
            let count = if k == 0 { 1.0 } else { 4.0 * 3f64.powi(k as i32 - 1) };
            m * (count.ln() - m.ln())
        })
        .sum()
}

fn transfer(mu: &StepDistribution, grid_size: usize) -> StationaryEstimate {
    let p = StationaryParams {
        grid_size,
        ..Default::default()
    };
    estimate_stationary_measure(mu, StationaryMethod::TransferIteration, &p).unwrap()
}

#[test]
fn entropy_table_matches_free_group_oracle() {
    let mu = example("sanov");
    let params = AsymptoticParams {
        n_max: 10,
        sbm_samples: 2000,
        seed: 1,
        ..Default::default()
    };
    let a = asymptotic_entropy(&mu, &params).unwrap();
    for &(n, h, _) in &a.table {
        assert!((h - free_group_entropy(n)).abs() < 1e-9, "n = {n}: {h}");
    }
    // h = (1/2) log 3 for the free group of rank 2.
    assert!((a.h - 0.5 * 3f64.ln()).abs() < 0.03, "{}", a.h);
    assert!(a.half_mass_rate >= a.h - 0.05, "{} < {}", a.half_mass_rate, a.h);
    let sbm = a.sbm.unwrap();
    assert!((sbm.mean - sbm.expected).abs() <= 3.0 * sbm.stderr + 1e-12);
}

#[test]
fn stationary_estimators_agree() {
    let mu = example("sanov");
    let t = transfer(&mu, 4096);
    assert!(t.residual <= 1e-3);
    let p = StationaryParams {
        grid_size: 4096,
        samples: 200_000,
        seed: 5,
        ..Default::default()
    };
    let mc = estimate_stationary_measure(&mu, StationaryMethod::MonteCarlo, &p).unwrap();
    let ks = t.measure.kolmogorov_distance(&mc.measure);
    assert!(ks <= 5e-3, "{ks}");
}

#[test]
fn rotations_have_lebesgue_stationary_measure() {
    let mu = example("rotations");
    let t = transfer(&mu, 2048);
    assert!(t.residual <= 1e-3);
    assert!(t.measure.kolmogorov_distance(&GridMeasure::lebesgue(2048)) < 1e-3);
}

#[test]
fn lyapunov_estimators_agree() {
    let mu = example("sanov");
    let nu = transfer(&mu, 4096).measure;
    let params = LyapunovParams {
        samples: 20_000,
        trajectories: 40,
        steps: 2000,
        seed: 2,
    };
    let l = lyapunov_exponent(&mu, &nu, &params).unwrap();
    assert!(l.value <= -0.1);
    assert!(l.agreement_sigmas <= 3.0, "{l:?}");
    assert!((l.value + 0.6448).abs() < 0.05, "{}", l.value);
}

#[test]
fn boundary_entropy_is_below_asymptotic_entropy() {
    let mu = example("sanov");
    let params = EntropyGapParams {
        grid_size: 4096,
        n_max: 10,
        samples: 20_000,
        sbm_samples: 500,
        seed: 3,
        ..Default::default()
    };
    let r = entropy_gap_report(&mu, &params).unwrap();
    assert!(r.inequality_holds);
    assert!(r.h_boundary <= r.h_asymptotic + 3.0 * (r.h_boundary_stderr + r.h_asymptotic_stderr) + params.tolerance);
}

#[test]
fn dirac_masses_drift_away_from_lebesgue() {
    // One step of the transfer operator moves a Dirac mass by a finite amount.
    let mu = example("sanov");
    let d = GridMeasure::dirac(1024, 0.3);
    assert!(stationarity_residual(&mu, &d) > 0.1);
    assert!(stationarity_residual(&example("rotations"), &GridMeasure::lebesgue(1024)) < 1e-12);
}
