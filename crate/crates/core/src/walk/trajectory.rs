use super::step::StepDistribution;
use crate::circle::{CircleMap, Jet3, Letter, Mat2, Word};
use crate::rng::{domain, stream};

/// A seeded sample `g_1, …, g_n` of atom indices with prefix caches of
/// `r_k = g_1 ⋯ g_k` and `l_k = g_k ⋯ g_1` for pure Möbius alphabets.
#[derive(Clone, Debug)]
pub struct WalkTrajectory {
    pub seed: u64,
    pub index: u64,
    pub steps: Vec<usize>,
    r_prefix: Vec<Mat2>,
    l_prefix: Vec<Mat2>,
}

pub fn sample_walk(mu: &StepDistribution, n: usize, seed: u64) -> WalkTrajectory {
    sample_walk_indexed(mu, n, seed, 0)
}

/// Trajectory `index` of the family keyed by `seed`.
pub fn sample_walk_indexed(mu: &StepDistribution, n: usize, seed: u64, index: u64) -> WalkTrajectory {
    let mut rng = stream(seed, domain::WALK, index);
    let steps = (0..n).map(|_| mu.sample_index(&mut rng)).collect();
    WalkTrajectory::from_steps(mu, steps, seed, index)
}

impl WalkTrajectory {
    pub fn from_steps(mu: &StepDistribution, steps: Vec<usize>, seed: u64, index: u64) -> Self {
        let mut t = WalkTrajectory {
            seed,
            index,
            steps,
            r_prefix: Vec::new(),
            l_prefix: Vec::new(),
        };
        let alphabet = mu.alphabet();
        if alphabet.is_pure_mobius() {
            let mats: Vec<Mat2> = mu.atoms().iter().map(|w| alphabet.matrix(w.letters())).collect();
            t.r_prefix.push(Mat2::IDENTITY);
            t.l_prefix.push(Mat2::IDENTITY);
            for &s in &t.steps {
                let r = *t.r_prefix.last().unwrap() * mats[s];
                let l = mats[s] * *t.l_prefix.last().unwrap();
                t.r_prefix.push(r);
                t.l_prefix.push(l);
            }
        }
        t
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Cached matrix of `r_k`, for pure Möbius alphabets.
    pub fn r_matrix(&self, k: usize) -> Option<Mat2> {
        self.r_prefix.get(k).copied()
    }

    /// Cached matrix of `l_k`, for pure Möbius alphabets.
    pub fn l_matrix(&self, k: usize) -> Option<Mat2> {
        self.l_prefix.get(k).copied()
    }

    /// Word of `r_k = g_1 ∘ ⋯ ∘ g_k`.
    pub fn r_word(&self, mu: &StepDistribution, k: usize) -> Word {
        let mut v: Vec<Letter> = Vec::new();
        for &s in &self.steps[..k] {
            v.extend_from_slice(mu.atoms()[s].letters());
        }
        Word(v)
    }

    /// Word of `l_k = g_k ∘ ⋯ ∘ g_1`.
    pub fn l_word(&self, mu: &StepDistribution, k: usize) -> Word {
        let mut v: Vec<Letter> = Vec::new();
        for &s in self.steps[..k].iter().rev() {
            v.extend_from_slice(mu.atoms()[s].letters());
        }
        Word(v)
    }

    /// Word of the single step `g_k`, `k >= 1`.
    pub fn step_word<'a>(&self, mu: &'a StepDistribution, k: usize) -> &'a Word {
        &mu.atoms()[self.steps[k - 1]]
    }

    /// Jets of `l_0, l_1, …, l_n` at `x`, built one step at a time.
    pub fn l_jets(&self, mu: &StepDistribution, x: f64) -> Vec<Jet3> {
        let alphabet = mu.alphabet();
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut j = Jet3::identity(x);
        out.push(j);
        for &s in &self.steps {
            let o = alphabet.word_map(mu.atoms()[s].letters()).jet(j.value);
            j = Jet3::compose(&o, &j);
            out.push(j);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{circle_dist, Alphabet};
    use std::sync::Arc;

    fn sanov_mu() -> StepDistribution {
        let a = Alphabet::from_matrices(&[Mat2::new(1.0, 2.0, 0.0, 1.0), Mat2::new(1.0, 0.0, 2.0, 1.0)]).unwrap();
        StepDistribution::uniform_symmetric(Arc::new(a)).unwrap()
    }

    #[test]
    fn empty_walk_is_identity() {
        let mu = sanov_mu();
        let t = sample_walk(&mu, 0, 5);
        assert_eq!(t.r_matrix(0), Some(Mat2::IDENTITY));
        assert!(t.r_word(&mu, 0).is_empty() && t.l_word(&mu, 0).is_empty());
    }

    #[test]
    fn seeds_reproduce_steps() {
        let mu = sanov_mu();
        assert_eq!(sample_walk(&mu, 50, 9).steps, sample_walk(&mu, 50, 9).steps);
        assert_ne!(sample_walk(&mu, 50, 9).steps, sample_walk(&mu, 50, 10).steps);
    }

    #[test]
    fn prefix_caches_match_recomposition() {
        let mu = sanov_mu();
        let t = sample_walk(&mu, 12, 3);
        let a = mu.alphabet();
        for k in 0..=12 {
            let r = a.matrix(t.r_word(&mu, k).letters());
            let l = a.matrix(t.l_word(&mu, k).letters());
            assert!(r.max_abs_diff(&t.r_matrix(k).unwrap()) < 1e-9);
            assert!(l.max_abs_diff(&t.l_matrix(k).unwrap()) < 1e-9);
        }
        let jets = t.l_jets(&mu, 0.3);
        let lw = t.l_word(&mu, 12);
        assert!(circle_dist(jets[12].value, a.word_map(lw.letters()).apply(0.3)) < 1e-9);
    }

    #[test]
    fn atom_frequencies_concentrate() {
        let mu = sanov_mu();
        let n = 10_000;
        let t = sample_walk(&mu, n, 2024);
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for atom in 0..4 {
            let f = t.steps.iter().filter(|&&s| s == atom).count() as f64 / n as f64;
            assert!((f - 0.25).abs() <= 3.0 * sigma, "atom {atom}: {f}");
        }
    }
}
