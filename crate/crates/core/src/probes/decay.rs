use crate::circle::CircleArc;
use crate::measure::GridMeasure;
use crate::walk::{StepDistribution, WalkTrajectory};
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MassDecay {
    /// `ν(l_n J) e^{(h_ν + ε) n}` for `n = 0, …, N`.
    pub scaled_mass: Vec<f64>,
    pub running_inf: Vec<f64>,
    /// Final running infimum, the empirical `C₁`.
    pub c1: f64,
}

pub fn interval_mass_decay(
    walk: &WalkTrajectory,
    mu: &StepDistribution,
    nu: &GridMeasure,
    arc: &CircleArc,
    h_nu: f64,
    epsilon: f64,
    n_max: usize,
) -> Result<MassDecay> {
    let (mut a, mut len) = (arc.left().coord(), arc.length());
    let m0 = nu.arc_mass_len(a, len);
    if !(m0 > 0.0) {
        return Err(Error::InvalidArgument("the test arc has zero mass".into()));
    }
    let n_max = n_max.min(walk.len());
    let alphabet = mu.alphabet();
    let rate = h_nu + epsilon;
    let mut scaled_mass = vec![m0];
    for n in 1..=n_max {
        let g = alphabet.word_map(walk.step_word(mu, n).letters());
        (a, len) = super::push_arc(&g, a, len);
        scaled_mass.push(nu.arc_mass_len(a, len) * (rate * n as f64).exp());
    }
    let mut running_inf = Vec::with_capacity(scaled_mass.len());
    let mut m = f64::INFINITY;
    for &v in &scaled_mass {
        m = m.min(v);
        running_inf.push(m);
    }
    Ok(MassDecay {
        c1: m,
        scaled_mass,
        running_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{Alphabet, Mat2, Word};
    use crate::walk::sample_walk;
    use std::sync::Arc;

    #[test]
    fn rotation_walk_is_flat() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::rotation(0.1234)]).unwrap());
        let mu = StepDistribution::uniform_symmetric(a).unwrap();
        let walk = sample_walk(&mu, 30, 5);
        let nu = GridMeasure::lebesgue(4096);
        let arc = CircleArc::new(0.2, 0.1).unwrap();
        let d = interval_mass_decay(&walk, &mu, &nu, &arc, 0.0, 0.0, 30).unwrap();
        assert!(d.scaled_mass.iter().all(|&v| (v - 0.1).abs() < 1e-9));
    }

    #[test]
    fn identity_walk_is_constant() {
        let a = Arc::new(Alphabet::from_matrices(&[Mat2::IDENTITY]).unwrap());
        let mu = StepDistribution::new(a, vec![(Word::identity(), 1.0)], false).unwrap();
        let walk = sample_walk(&mu, 10, 0);
        let arc = CircleArc::new(0.5, 0.25).unwrap();
        let d = interval_mass_decay(&walk, &mu, &GridMeasure::lebesgue(256), &arc, 0.0, 0.0, 10).unwrap();
        assert!(d.running_inf.iter().all(|&v| (v - 0.25).abs() < 1e-12));
    }
}
