use super::canonical::{int_mul, integer_letters, integer_word, sign_normalize, IntMat};
use super::step::StepDistribution;
use crate::circle::{Alphabet, Letter, Word};
use crate::{Error, Result};

/// Shannon entropy in nats of a probability vector.
pub fn entropy_of<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    masses
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

#[derive(Clone, Copy, Debug)]
pub struct ConvolutionOptions {
    /// Largest support size that may be materialized.
    pub max_entries: usize,
    /// Keep one freely reduced representative word per element.
    pub track_words: bool,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        Self {
            max_entries: 40_000_000,
            track_words: false,
        }
    }
}

/// Reduced word packed into 5-bit letters; the low 5 bits hold the length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PackedWord(u128);

const MAX_PACKED: u32 = 24;
const OVERFLOW: PackedWord = PackedWord(u128::MAX);

impl PackedWord {
    const EMPTY: PackedWord = PackedWord(0);

    fn len(self) -> u32 {
        (self.0 & 31) as u32
    }

    fn code(l: Letter) -> u128 {
        ((l.generator as u128) << 1) | l.inverse as u128
    }

    fn push(self, l: Letter) -> PackedWord {
        if self == OVERFLOW || l.generator >= 16 {
            return OVERFLOW;
        }
        let n = self.len();
        if n > 0 {
            let last = (self.0 >> (5 + 5 * (n - 1))) & 31;
            if last == Self::code(l.inv()) {
                let mask = !(31u128 << (5 + 5 * (n - 1)));
                return PackedWord(((self.0 & mask) & !31) | (n - 1) as u128);
            }
        }
        if n == MAX_PACKED {
            return OVERFLOW;
        }
        PackedWord((self.0 & !31) | (Self::code(l) << (5 + 5 * n)) | (n + 1) as u128)
    }

    fn unpack(self) -> Option<Word> {
        if self == OVERFLOW {
            return None;
        }
        let letters = (0..self.len())
            .map(|i| {
                let c = (self.0 >> (5 + 5 * i)) & 31;
                Letter::new((c >> 1) as u8, c & 1 == 1)
            })
            .collect();
        Some(Word(letters))
    }
}

/// The exact distribution `μ^{*n}` of `r_n`, sorted by matrix key.
#[derive(Clone, Debug)]
pub struct ExactMeasure {
    pub n: usize,
    keys: Vec<IntMat>,
    masses: Vec<f64>,
    words: Option<Vec<PackedWord>>,
}

impl ExactMeasure {
    fn unit() -> Self {
        Self {
            n: 0,
            keys: vec![[1, 0, 0, 1]],
            masses: vec![1.0],
            words: None,
        }
    }

    pub fn support_size(&self) -> usize {
        self.keys.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.masses.iter().copied())
    }

    pub fn keys(&self) -> &[IntMat] {
        &self.keys
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass of the element with (sign-normalized) integer matrix `key`.
    pub fn mass_of(&self, key: &IntMat) -> f64 {
        let k = sign_normalize(*key);
        match self.keys.binary_search(&k) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    /// Representative reduced word of entry `i`, when words were tracked.
    pub fn word(&self, i: usize) -> Option<Word> {
        self.words.as_ref().and_then(|w| w[i].unpack())
    }

    /// Smallest number of elements carrying at least half of the mass.
    pub fn half_mass_support(&self) -> usize {
        let mut m = self.masses.clone();
        m.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut acc = 0.0;
        for (i, p) in m.iter().enumerate() {
            acc += p;
            if acc >= 0.5 {
                return i + 1;
            }
        }
        m.len()
    }

    /// CSV dump `reduced_word,mass`.
    pub fn to_csv(&self, alphabet: &Alphabet) -> String {
        let mut s = String::from("reduced_word,mass\n");
        for i in 0..self.keys.len() {
            let w = self
                .word(i)
                .map(|w| alphabet.format_word(w.letters()))
                .unwrap_or_else(|| format!("{:?}", self.keys[i]));
            s.push_str(&format!("{w},{:e}\n", self.masses[i]));
        }
        s
    }
}

/// `μ^{*n}` by repeated exact convolution.
pub fn convolve_exact(mu: &StepDistribution, n: usize, opts: ConvolutionOptions) -> Result<ExactMeasure> {
    convolution_powers(mu, n, opts, |_| {})
}

/// Computes `μ^{*k}` for `k = 0, …, n`, passing each to `visit`, and returns `μ^{*n}`.
pub fn convolution_powers(
    mu: &StepDistribution,
    n: usize,
    opts: ConvolutionOptions,
    mut visit: impl FnMut(&ExactMeasure),
) -> Result<ExactMeasure> {
    let alphabet = mu.alphabet();
    let letters = integer_letters(alphabet)?;
    let atoms: Vec<IntMat> = mu
        .atoms()
        .iter()
        .map(|w| integer_word(&letters, w.letters()).ok_or(Error::NonIntegerGenerators))
        .collect::<Result<_>>()?;
    let probs = mu.probabilities();
    let mut cur = ExactMeasure::unit();
    if opts.track_words {
        cur.words = Some(vec![PackedWord::EMPTY]);
    }
    visit(&cur);
    for step in 1..=n {
        let total = cur.keys.len() * atoms.len();
        if total > opts.max_entries.saturating_mul(4) {
            return Err(Error::HorizonExceeded {
                attempted: step,
                largest_feasible: step - 1,
            });
        }
        let mut entries: Vec<(IntMat, f64, PackedWord)> = Vec::with_capacity(total);
        for (i, key) in cur.keys.iter().enumerate() {
            for (a, m) in atoms.iter().enumerate() {
                let prod = int_mul(key, m).ok_or_else(|| {
                    Error::InvalidArgument(format!("integer overflow in convolution at n = {step}"))
                })?;
                let word = match &cur.words {
                    Some(ws) => mu.atoms()[a].letters().iter().fold(ws[i], |w, &l| w.push(l)),
                    None => PackedWord::EMPTY,
                };
                entries.push((sign_normalize(prod), cur.masses[i] * probs[a], word));
            }
        }
        // Stable sort keeps generation order among equal keys, fixing the summation order.
        entries.sort_by(|x, y| x.0.cmp(&y.0));
        let mut keys = Vec::new();
        let mut masses = Vec::new();
        let mut words = Vec::new();
        for (k, p, w) in entries {
            if keys.last() == Some(&k) {
                *masses.last_mut().unwrap() += p;
            } else {
                keys.push(k);
                masses.push(p);
                words.push(w);
            }
        }
        if keys.len() > opts.max_entries {
            return Err(Error::HorizonExceeded {
                attempted: step,
                largest_feasible: step - 1,
            });
        }
        cur = ExactMeasure {
            n: step,
            keys,
            masses,
            words: opts.track_words.then_some(words),
        };
        visit(&cur);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Mat2;
    use std::sync::Arc;

    fn sanov_mu() -> StepDistribution {
        let a = Alphabet::from_matrices(&[Mat2::new(1.0, 2.0, 0.0, 1.0), Mat2::new(1.0, 0.0, 2.0, 1.0)]).unwrap();
        StepDistribution::uniform_symmetric(Arc::new(a)).unwrap()
    }

    #[test]
    fn packed_words_reduce() {
        let a = Letter::new(0, false);
        let b = Letter::new(1, true);
        let w = PackedWord::EMPTY.push(a).push(b).push(b.inv());
        assert_eq!(w.unpack().unwrap(), Word(vec![a]));
        assert_eq!(w.push(a.inv()), PackedWord::EMPTY);
    }

    #[test]
    fn low_powers() {
        let mu = sanov_mu();
        let opts = ConvolutionOptions {
            track_words: true,
            ..Default::default()
        };
        let m0 = convolve_exact(&mu, 0, opts).unwrap();
        assert_eq!(m0.support_size(), 1);
        assert_eq!(m0.entropy(), 0.0);
        let m1 = convolve_exact(&mu, 1, opts).unwrap();
        assert_eq!(m1.support_size(), 4);
        assert!((m1.entropy() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sanov_second_power_by_enumeration() {
        // All 16 two-letter words: 4 cancel to the identity, 12 are distinct.
        let mu = sanov_mu();
        let m2 = convolve_exact(&mu, 2, ConvolutionOptions { track_words: true, ..Default::default() }).unwrap();
        assert_eq!(m2.support_size(), 13);
        assert!((m2.mass_of(&[1, 0, 0, 1]) - 0.25).abs() < 1e-15);
        let expected = -(12.0 / 16.0) * (1.0f64 / 16.0).ln() - (4.0 / 16.0) * (4.0f64 / 16.0).ln();
        assert!((m2.entropy() - expected).abs() < 1e-12);
        assert!((m2.total_mass() - 1.0).abs() < 1e-12);
        let non_id: Vec<_> = (0..13).filter_map(|i| m2.word(i)).filter(|w| w.len() == 2).collect();
        assert_eq!(non_id.len(), 12);
    }

    #[test]
    fn rejects_non_integer_generators() {
        let a = Alphabet::from_matrices(&[Mat2::new(0.5, 0.0, 0.0, 2.0)]).unwrap();
        let mu = StepDistribution::uniform_symmetric(Arc::new(a)).unwrap();
        assert!(matches!(convolve_exact(&mu, 2, Default::default()), Err(Error::NonIntegerGenerators)));
    }

    #[test]
    fn budget_error_names_largest_feasible_horizon() {
        let mu = sanov_mu();
        let opts = ConvolutionOptions {
            max_entries: 100,
            track_words: false,
        };
        match convolve_exact(&mu, 10, opts) {
            Err(Error::HorizonExceeded { largest_feasible, .. }) => assert_eq!(largest_feasible, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
