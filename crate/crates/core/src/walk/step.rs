use crate::circle::{
    holder_seminorm, sup_log_derivative, sup_projective_schwarzian, sup_schwarzian, Alphabet, Word, DEFAULT_GRID,
};
use crate::probes::word_rho_lower_bound;
use crate::{Error, Result};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;
use std::sync::{Arc, OnceLock};

/// Finite sums of the moment integrals of a step distribution.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MomentReport {
    pub tau: f64,
    pub grid_size: usize,
    /// `Σ μ(g) |log g'|_τ`
    pub holder_log_derivative: f64,
    /// `Σ μ(g) |Lg|_∞`
    pub sup_log_derivative: f64,
    /// `Σ μ(g) |Sg|_∞`, plain coordinate Schwarzian.
    pub sup_schwarzian: f64,
    /// Same with the projective Schwarzian of the angle chart.
    pub sup_projective_schwarzian: f64,
    /// `Σ μ(g) / ρ(g)`
    pub inverse_annulus_width: f64,
}

/// Finitely supported probability measure on words over an alphabet.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    alphabet: Arc<Alphabet>,
    atoms: Vec<Word>,
    probs: Vec<f64>,
    symmetric: bool,
    sampler: WeightedIndex<f64>,
    moments: Arc<OnceLock<MomentReport>>,
}

impl StepDistribution {
    pub fn new(alphabet: Arc<Alphabet>, atoms: Vec<(Word, f64)>, symmetric: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("empty atom list".into()));
        }
        for (w, p) in &atoms {
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "weight {p} of atom {} must be positive",
                    alphabet.format_word(w.letters())
                )));
            }
            if w.letters().iter().any(|l| l.generator as usize >= alphabet.len()) {
                return Err(Error::InvalidDistribution("atom uses an unknown generator".into()));
            }
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        let probs: Vec<f64> = atoms.iter().map(|(_, p)| p / total).collect();
        let words: Vec<Word> = atoms.into_iter().map(|(w, _)| w).collect();
        if symmetric {
            for (i, w) in words.iter().enumerate() {
                let target = w.inverse().reduced();
                let ok = words
                    .iter()
                    .zip(&probs)
                    .any(|(v, &p)| v.reduced() == target && (p - probs[i]).abs() <= 1e-12);
                if !ok {
                    return Err(Error::InvalidDistribution(format!(
                        "symmetric flag set but {} has no inverse atom of equal weight",
                        alphabet.format_word(w.letters())
                    )));
                }
            }
        }
        let sampler = WeightedIndex::new(&probs).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self {
            alphabet,
            atoms: words,
            probs,
            symmetric,
            sampler,
            moments: Arc::new(OnceLock::new()),
        })
    }

    /// Uniform distribution on the generators and their inverses.
    pub fn uniform_symmetric(alphabet: Arc<Alphabet>) -> Result<Self> {
        let atoms = (0..alphabet.len() as u8)
            .flat_map(|g| {
                [
                    (Word(vec![crate::circle::Letter::new(g, false)]), 1.0),
                    (Word(vec![crate::circle::Letter::new(g, true)]), 1.0),
                ]
            })
            .collect();
        Self::new(alphabet, atoms, true)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn atoms(&self) -> &[Word] {
        &self.atoms
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn normalization_residual(&self) -> f64 {
        (self.probs.iter().sum::<f64>() - 1.0).abs()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Moment sums with `τ = 1` on the default grid, computed once.
    pub fn moment_report(&self) -> &MomentReport {
        self.moments.get_or_init(|| self.compute_moments(1.0, DEFAULT_GRID))
    }

    pub fn compute_moments(&self, tau: f64, grid_size: usize) -> MomentReport {
        let mut r = MomentReport {
            tau,
            grid_size,
            holder_log_derivative: 0.0,
            sup_log_derivative: 0.0,
            sup_schwarzian: 0.0,
            sup_projective_schwarzian: 0.0,
            inverse_annulus_width: 0.0,
        };
        for (w, &p) in self.atoms.iter().zip(&self.probs) {
            let g = self.alphabet.word_map(w.letters());
            r.holder_log_derivative += p * holder_seminorm(&g, tau, grid_size).unwrap_or(f64::NAN);
            r.sup_log_derivative += p * sup_log_derivative(&g, grid_size);
            r.sup_schwarzian += p * sup_schwarzian(&g, grid_size);
            r.sup_projective_schwarzian += p * sup_projective_schwarzian(&g, grid_size);
            let rho = word_rho_lower_bound(&self.alphabet, w.letters());
            r.inverse_annulus_width += if rho.is_infinite() { 0.0 } else { p / rho };
        }
        r
    }
}
