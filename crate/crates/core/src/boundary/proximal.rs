use crate::circle::{wrap, Alphabet, CircleMap, Letter, Word};
use serde::Serialize;

/// Length of each test arc. Above 1/2, so a finite cover of degree at least 2 cannot shrink it.
pub const TEST_ARC_LENGTH: f64 = 0.625;

/// Partial words kept per depth of the contraction search.
const BEAM_WIDTH: usize = 32;

/// The fixed net of eight test arcs `[k/8, k/8 + 5/8]`.
pub fn test_arcs() -> Vec<(f64, f64)> {
    (0..8).map(|k| (k as f64 / 8.0, k as f64 / 8.0 + TEST_ARC_LENGTH)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcWitness {
    pub arc: (f64, f64),
    pub word: String,
    pub word_length: usize,
    pub final_length: f64,
    /// Smallest image length seen along the search.
    pub min_length: f64,
    pub found: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProximalityOutcome {
    pub proximal: bool,
    pub epsilon: f64,
    pub witnesses: Vec<ArcWitness>,
    /// Smallest image length reached over all arcs.
    pub min_achieved: f64,
}

/// Subdivisions of the test arc and of its complement.
const RING: usize = 8;

const MIN_RESOLVED_GAP: f64 = 1e-12;

/// Image of a ring of points around the circle; the first `RING + 1` span the arc.
#[derive(Clone)]
struct Image {
    pts: Vec<f64>,
    word: Vec<Letter>,
}

impl Image {
    fn new(a: f64, b: f64) -> Self {
        let arc = (0..=RING).map(|i| a + (b - a) * i as f64 / RING as f64);
        let rest = (1..RING).map(|i| b + (1.0 - (b - a)) * i as f64 / RING as f64);
        Image {
            pts: arc.chain(rest).map(wrap).collect(),
            word: Vec::new(),
        }
    }

    fn gap(&self, i: usize) -> f64 {
        wrap(self.pts[(i + 1) % self.pts.len()] - self.pts[i])
    }

    fn len(&self) -> f64 {
        (0..RING).map(|i| self.gap(i)).sum()
    }

    /// A homeomorphic image has gaps summing to one, and rounding of a near-full gap
    /// breaks this. A collapsed gap means the word expanded the rest of the ring past
    /// double precision, after which the points no longer follow the true orbit.
    fn is_faithful(&self) -> bool {
        let gaps: Vec<f64> = (0..self.pts.len()).map(|i| self.gap(i)).collect();
        (gaps.iter().sum::<f64>() - 1.0).abs() < 1e-9 && gaps.iter().all(|&g| g > MIN_RESOLVED_GAP)
    }
}

/// Beam search: each partial word is extended on the left by every signed generator and
/// the `BEAM_WIDTH` shortest image arcs survive. Width one is plain greedy contraction.
pub fn proximality_test(alphabet: &Alphabet, epsilon: f64, word_length_cap: usize) -> ProximalityOutcome {
    let letters: Vec<Letter> = (0..alphabet.len() as u8)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let witnesses: Vec<ArcWitness> = test_arcs()
        .into_iter()
        .map(|(a, b)| {
            let mut beam = vec![Image::new(a, b)];
            let mut best = beam[0].clone();
            let mut min_length = best.len();
            for _ in 0..word_length_cap {
                if best.len() < epsilon {
                    break;
                }
                let mut next: Vec<Image> = beam
                    .iter()
                    .flat_map(|im| {
                        letters.iter().filter(|l| im.word.first() != Some(&l.inv())).map(|&l| {
                            let g = alphabet.letter(l);
                            let mut word = Vec::with_capacity(im.word.len() + 1);
                            word.push(l);
                            word.extend_from_slice(&im.word);
                            Image {
                                pts: im.pts.iter().map(|&x| g.apply(x)).collect(),
                                word,
                            }
                        })
                    })
                    .filter(Image::is_faithful)
                    .collect();
                if next.is_empty() {
                    break;
                }
                // Stable sort keeps the letter order as a deterministic tie-break.
                next.sort_by(|x, y| x.len().partial_cmp(&y.len()).unwrap());
                next.truncate(BEAM_WIDTH);
                best = next[0].clone();
                min_length = min_length.min(best.len());
                beam = next;
            }
            ArcWitness {
                arc: (a, b),
                word: alphabet.format_word(&best.word),
                word_length: best.word.len(),
                final_length: best.len(),
                min_length,
                found: best.len() < epsilon,
            }
        })
        .collect();
    let proximal = witnesses.iter().all(|w| w.found);
    let min_achieved = witnesses.iter().map(|w| w.min_length).fold(f64::INFINITY, f64::min);
    ProximalityOutcome {
        proximal,
        epsilon,
        witnesses,
        min_achieved,
    }
}

impl ArcWitness {
    /// Parses the witness word back against its alphabet.
    pub fn parse(&self, alphabet: &Alphabet) -> Word {
        alphabet.parse_word(&self.word).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Mat2;

    #[test]
    fn rotations_are_not_proximal() {
        let a = Alphabet::from_matrices(&[Mat2::rotation(0.3819660112501051)]).unwrap();
        let out = proximality_test(&a, 1e-3, 20);
        assert!(!out.proximal);
        assert!((out.min_achieved - TEST_ARC_LENGTH).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_witness_is_a_power() {
        // Attracting point 0, repelling 1/2; arc 5 is [5/8, 5/4] and avoids 1/2.
        let a = Alphabet::from_matrices(&[Mat2::new(0.5, 0.0, 0.0, 2.0)]).unwrap();
        let out = proximality_test(&a, 1e-4, 40);
        let w = &out.witnesses[5];
        assert!(w.found);
        assert!(w.word.split_whitespace().all(|t| t == "A"));
        let expected = (1e-4f64 / TEST_ARC_LENGTH).ln() / 0.25f64.ln();
        assert!((w.word_length as f64 - expected).abs() <= 3.0, "{} vs {expected}", w.word_length);
    }

    fn lifted(cover: u32, with_deck: bool) -> Alphabet {
        use crate::circle::{Generator, GeneratorSpec};
        let mk = |m: [f64; 4], deck| {
            Generator::new(&GeneratorSpec {
                matrix: m,
                conjugator: vec![],
                cover,
                deck,
            })
            .unwrap()
        };
        let mut gens = vec![("A".into(), mk([1.0, 2.0, 0.0, 1.0], 0)), ("B".into(), mk([1.0, 0.0, 2.0, 1.0], 0))];
        if with_deck {
            gens.push(("T".into(), mk([1.0, 0.0, 0.0, 1.0], 1)));
        }
        Alphabet::new(gens).unwrap()
    }

    fn sanov(cover: u32) -> Alphabet {
        lifted(cover, false)
    }

    #[test]
    fn sanov_is_proximal() {
        let out = proximality_test(&sanov(1), 1e-4, 40);
        assert!(out.proximal, "{:?}", out.witnesses);
    }

    #[test]
    fn double_cover_is_not_proximal() {
        let out = proximality_test(&sanov(2), 1e-3, 200);
        assert!(!out.proximal);
        // The image of an arc longer than 1/2 stays longer than 1/2.
        assert!(out.min_achieved > 0.5 - 1e-9);
    }

    #[test]
    fn deck_rotation_bounds_contraction() {
        let out = proximality_test(&lifted(3, true), 1e-3, 200);
        assert!(!out.proximal);
        assert!(out.min_achieved > 1.0 / 3.0 - 1e-6, "{}", out.min_achieved);
    }
}
