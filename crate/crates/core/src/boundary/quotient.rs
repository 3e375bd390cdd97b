use super::semiconj::{semiconjugation_map, SemiConjugation};
use crate::circle::{circle_dist, wrap, Alphabet, CircleMap, Generator, GeneratorSpec};
use crate::measure::{
    boundary_entropy, boundary_entropy_with, stationarity_residual, BoundaryEntropy, BoundaryEntropyParams, GridMeasure,
};
use crate::walk::StepDistribution;
use crate::{Error, Result};
use serde::Serialize;
use std::sync::Arc;

/// Commutation defects below this many grid cells count as a symmetry.
const COMMUTATION_CELLS: f64 = 5.0;

#[derive(Clone, Debug, Serialize)]
pub struct QuotientCandidate {
    pub q: u32,
    /// Kolmogorov distance between `s_*ν` and its rotation by `1/q`.
    pub straightened_ks: f64,
    /// `max_g sup_u dist(m_g(u + 1/q), m_g(u) + 1/q)`.
    pub commutation_defect: f64,
    pub passed: bool,
}

/// How the quotient action is realized.
#[derive(Clone, Debug)]
pub enum QuotientCoordinates {
    /// The generators commute with `x + 1/d` and descend to a cover of degree `cover / d`.
    Exact { mu: StepDistribution, nu: GridMeasure },
    /// The quotient is taken in the straightened coordinate through the induced maps.
    Straightened,
}

#[derive(Clone, Debug)]
pub struct FiniteQuotient {
    pub degree: u32,
    pub candidates: Vec<QuotientCandidate>,
    /// Equivariance defect of `s` per generator.
    pub equivariance_defects: Vec<f64>,
    pub coordinates: QuotientCoordinates,
    /// Stationarity residual of the quotient measure, when exact.
    pub quotient_residual: Option<f64>,
    semiconj: SemiConjugation,
}

impl FiniteQuotient {
    pub fn semiconjugation(&self) -> &SemiConjugation {
        &self.semiconj
    }

    /// CDF of the quotient measure.
    pub fn quotient_measure(&self) -> GridMeasure {
        match &self.coordinates {
            QuotientCoordinates::Exact { nu, .. } => nu.clone(),
            QuotientCoordinates::Straightened => GridMeasure::lebesgue(self.semiconj.measure().grid_size()),
        }
    }

    /// Boundary entropy of the quotient action against the quotient measure.
    pub fn quotient_entropy(&self, mu: &StepDistribution, params: &BoundaryEntropyParams) -> Result<BoundaryEntropy> {
        match &self.coordinates {
            QuotientCoordinates::Exact { mu: qmu, nu } => boundary_entropy(qmu, nu, params),
            QuotientCoordinates::Straightened => {
                let d = self.degree as f64;
                let s = &self.semiconj;
                let alphabet = mu.alphabet();
                let nu = GridMeasure::lebesgue(s.measure().grid_size());
                boundary_entropy_with(mu, &nu, params, |a, u| {
                    let g = alphabet.word_map(mu.atoms()[a].letters());
                    wrap(d * s.induced(|t| g.apply(t), wrap(u) / d))
                })
            }
        }
    }
}

fn commutation_defect(s: &SemiConjugation, g: &Generator, q: u32) -> f64 {
    let n = s.measure().grid_size();
    let shift = 1.0 / q as f64;
    (0..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            let a = s.induced(|t| g.apply(t), u + shift);
            let b = s.induced(|t| g.apply(t), u) + shift;
            circle_dist(a, b)
        })
        .fold(0.0, f64::max)
}

/// Rotation invariance of `s_*ν`, evaluated on the grid of `ν`.
fn straightened_ks(s: &SemiConjugation, q: u32) -> f64 {
    let nu = s.measure();
    let n = nu.grid_size();
    let shift = 1.0 / q as f64;
    // CDF of s_*ν at u is ν(s⁻¹[0, u]) = F(s⁺(u)) up to fibers.
    let f = |u: f64| nu.cdf_at(s.section(wrap(u)));
    (0..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            let rotated = wrap(f(u + shift) - f(shift));
            circle_dist(rotated, f(u))
        })
        .fold(0.0, f64::max)
}

fn commutes_with_rotation(g: &Generator, q: u32) -> bool {
    let shift = 1.0 / q as f64;
    (0..257).all(|i| {
        let x = (i as f64 + 0.5) / 257.0;
        circle_dist(g.apply(x + shift), g.apply(x) + shift) < 1e-9
    })
}

fn exact_quotient(mu: &StepDistribution, nu: &GridMeasure, d: u32) -> Result<Option<(StepDistribution, GridMeasure)>> {
    let alphabet = mu.alphabet();
    let cover = alphabet.cover();
    if alphabet.conjugator().is_some() || cover % d != 0 || !alphabet.generators().iter().all(|g| commutes_with_rotation(g, d)) {
        return Ok(None);
    }
    let qc = cover / d;
    let named = alphabet
        .names()
        .iter()
        .zip(alphabet.generators())
        .map(|(name, g)| {
            let spec = GeneratorSpec {
                matrix: g.matrix().to_array(),
                conjugator: Vec::new(),
                cover: qc,
                deck: g.deck() % qc,
            };
            Ok((name.clone(), Generator::new(&spec)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let quotient_alphabet = Arc::new(Alphabet::new(named)?);
    let atoms = mu.atoms().iter().cloned().zip(mu.probabilities().iter().copied()).collect();
    let qmu = StepDistribution::new(quotient_alphabet, atoms, mu.is_symmetric())?;
    // ν'([0, y]) = Σ_j ν([j/d, (j + y)/d]).
    let n = nu.grid_size();
    let df = d as f64;
    let cdf: Vec<f64> = (0..=n)
        .map(|i| {
            let y = i as f64 / n as f64;
            (0..d).map(|j| nu.cdf_at((j as f64 + y) / df) - nu.cdf_at(j as f64 / df)).sum()
        })
        .collect();
    Ok(Some((qmu, GridMeasure::from_cdf(cdf)?)))
}

/// Searches `q = q_max, …, 1` for the largest rotation symmetry of the straightened action.
pub fn finite_quotient_detect(nu: &GridMeasure, mu: &StepDistribution, q_max: u32) -> Result<FiniteQuotient> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    let s = semiconjugation_map(nu);
    let gens = mu.alphabet().generators();
    let tol = COMMUTATION_CELLS / nu.grid_size() as f64;
    let mut candidates = Vec::new();
    let mut degree = 1;
    for q in (2..=q_max).rev() {
        let ks = straightened_ks(&s, q);
        let defect = gens.iter().map(|g| commutation_defect(&s, g, q)).fold(0.0, f64::max);
        let passed = ks <= tol && defect <= tol;
        candidates.push(QuotientCandidate {
            q,
            straightened_ks: ks,
            commutation_defect: defect,
            passed,
        });
        if passed {
            degree = q;
            break;
        }
    }
    let equivariance_defects = gens.iter().map(|g| s.equivariance_defect(g)).collect();
    let (coordinates, quotient_residual) = match exact_quotient(mu, nu, degree)? {
        Some((qmu, qnu)) => {
            let r = stationarity_residual(&qmu, &qnu);
            (QuotientCoordinates::Exact { mu: qmu, nu: qnu }, Some(r))
        }
        None => (QuotientCoordinates::Straightened, None),
    };
    Ok(FiniteQuotient {
        degree,
        candidates,
        equivariance_defects,
        coordinates,
        quotient_residual,
        semiconj: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{estimate_stationary_measure, StationaryMethod, StationaryParams};

    fn sanov(cover: u32) -> StepDistribution {
        let named = [("A", [1.0, 2.0, 0.0, 1.0]), ("B", [1.0, 0.0, 2.0, 1.0])]
            .iter()
            .map(|(n, m)| {
                let spec = GeneratorSpec {
                    matrix: *m,
                    conjugator: Vec::new(),
                    cover,
                    deck: 0,
                };
                (n.to_string(), Generator::new(&spec).unwrap())
            })
            .collect();
        StepDistribution::uniform_symmetric(Arc::new(Alphabet::new(named).unwrap())).unwrap()
    }

    fn stationary(mu: &StepDistribution) -> GridMeasure {
        let params = StationaryParams {
            grid_size: 2048,
            ..Default::default()
        };
        estimate_stationary_measure(mu, StationaryMethod::TransferIteration, &params).unwrap().measure
    }

    #[test]
    fn sanov_has_degree_one() {
        let mu = sanov(1);
        let fq = finite_quotient_detect(&stationary(&mu), &mu, 3).unwrap();
        assert_eq!(fq.degree, 1);
        assert!(fq.candidates.iter().all(|c| !c.passed));
        assert!(fq.equivariance_defects.iter().all(|&d| d <= 5.0 / 2048.0));
    }

    #[test]
    fn double_cover_has_degree_two() {
        let mu = sanov(2);
        let nu = stationary(&mu);
        let fq = finite_quotient_detect(&nu, &mu, 3).unwrap();
        assert_eq!(fq.degree, 2);
        assert!(matches!(fq.coordinates, QuotientCoordinates::Exact { .. }));
        let base = sanov(1);
        let base_nu = stationary(&base);
        let q = fq.quotient_measure();
        // The lifted grid resolves each sheet with half the cells.
        assert!(q.kolmogorov_distance(&base_nu) < 5e-3, "{}", q.kolmogorov_distance(&base_nu));
        assert!(fq.quotient_residual.unwrap() < 2e-3, "{:?}", fq.quotient_residual);
    }
}
