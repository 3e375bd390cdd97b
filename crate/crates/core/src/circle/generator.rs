use super::conjugator::TrigLift;
use super::jet::Jet3;
use super::mobius::Mat2;
use super::point::wrap;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// A map of the circle with jets available in closed form.
pub trait CircleMap {
    /// Jet at `x`; the value is reduced to `[0, 1)`.
    fn jet(&self, x: f64) -> Jet3;

    fn apply(&self, x: f64) -> f64 {
        self.jet(x).value
    }

    fn derivative(&self, x: f64) -> f64 {
        self.jet(x).d1
    }
}

impl CircleMap for Mat2 {
    fn jet(&self, x: f64) -> Jet3 {
        Mat2::jet(self, x)
    }

    fn apply(&self, x: f64) -> f64 {
        Mat2::apply(self, x)
    }

    fn derivative(&self, x: f64) -> f64 {
        Mat2::derivative(self, x)
    }
}

/// User-facing description of a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub matrix: [f64; 4],
    /// `(cosine, sine)` coefficient pairs of the conjugator lift.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugator: Vec<[f64; 2]>,
    /// Degree of the cyclic cover the Möbius map is lifted to.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub cover: u32,
    /// Deck shift of the lift, in `0..cover`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub deck: u32,
}

fn one() -> u32 {
    1
}
fn is_one(v: &u32) -> bool {
    *v == 1
}
fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl GeneratorSpec {
    pub fn mobius(matrix: [f64; 4]) -> Self {
        Self {
            matrix,
            conjugator: Vec::new(),
            cover: 1,
            deck: 0,
        }
    }
}

/// Möbius map, optionally lifted to a finite cover and conjugated by a [`TrigLift`].
///
/// With cover degree `q` and deck shift `k` the map is `x -> (M̃(qx) + k)/q`,
/// where `M̃` is the lift of the Möbius action with `M̃(0) ∈ [0, 1)`.
/// With a conjugator `h` the map is `h ∘ F ∘ h⁻¹`.
#[derive(Clone, Debug)]
pub struct Generator {
    matrix: Mat2,
    conjugator: Option<Arc<TrigLift>>,
    cover: u32,
    deck: u32,
}

impl Generator {
    pub fn new(spec: &GeneratorSpec) -> Result<Self> {
        let matrix = Mat2::from_array(spec.matrix).normalized()?;
        if spec.cover == 0 || spec.deck >= spec.cover {
            return Err(Error::InvalidGenerator(format!(
                "cover degree {} with deck shift {} is invalid",
                spec.cover, spec.deck
            )));
        }
        let conjugator = if spec.conjugator.is_empty() {
            None
        } else {
            let coeffs = spec.conjugator.iter().map(|c| (c[0], c[1])).collect();
            Some(Arc::new(TrigLift::new(coeffs)?))
        };
        Ok(Self {
            matrix,
            conjugator,
            cover: spec.cover,
            deck: spec.deck,
        })
    }

    pub fn mobius(matrix: Mat2) -> Result<Self> {
        Self::new(&GeneratorSpec::mobius(matrix.to_array()))
    }

    pub fn identity() -> Self {
        Self {
            matrix: Mat2::IDENTITY,
            conjugator: None,
            cover: 1,
            deck: 0,
        }
    }

    pub fn with_conjugator(mut self, h: Arc<TrigLift>) -> Self {
        self.conjugator = Some(h);
        self
    }

    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    pub fn conjugator(&self) -> Option<&Arc<TrigLift>> {
        self.conjugator.as_ref()
    }

    pub fn cover(&self) -> u32 {
        self.cover
    }

    pub fn deck(&self) -> u32 {
        self.deck
    }

    pub fn is_pure_mobius(&self) -> bool {
        self.conjugator.is_none() && self.cover == 1
    }

    pub fn spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            matrix: self.matrix.to_array(),
            conjugator: self
                .conjugator
                .as_ref()
                .map(|h| h.coefficients().iter().map(|&(a, b)| [a, b]).collect())
                .unwrap_or_default(),
            cover: self.cover,
            deck: self.deck,
        }
    }

    pub fn inverse(&self) -> Generator {
        let matrix = self.matrix.inverse();
        let deck = if self.cover == 1 {
            0
        } else {
            let q = self.cover;
            let x0 = 0.37 / q as f64;
            let y = lifted_mobius(&self.matrix, q, self.deck, x0).value;
            (0..q)
                .min_by(|&a, &b| {
                    let da = super::point::circle_dist(lifted_mobius(&matrix, q, a, y).value, x0);
                    let db = super::point::circle_dist(lifted_mobius(&matrix, q, b, y).value, x0);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
        };
        Generator {
            matrix,
            conjugator: self.conjugator.clone(),
            cover: self.cover,
            deck,
        }
    }

    /// Jet of the unconjugated part `F`.
    fn core_jet(&self, x: f64) -> Jet3 {
        if self.cover == 1 {
            self.matrix.jet(x)
        } else {
            lifted_mobius(&self.matrix, self.cover, self.deck, x)
        }
    }
}

/// Jet of `x -> (M̃(qx) + k)/q` reduced mod 1.
pub(crate) fn lifted_mobius(m: &Mat2, q: u32, k: u32, x: f64) -> Jet3 {
    let qf = q as f64;
    let y = qf * wrap(x);
    let n = y.floor();
    let frac = y - n;
    let base = m.apply(0.0);
    let j = m.jet(frac);
    let mut diff = wrap(j.value - base);
    if frac < 1e-9 && diff > 0.5 {
        diff -= 1.0;
    }
    let lifted = base + diff + n;
    Jet3 {
        value: wrap((lifted + k as f64) / qf),
        d1: j.d1,
        d2: qf * j.d2,
        d3: qf * qf * j.d3,
    }
}

impl CircleMap for Generator {
    fn jet(&self, x: f64) -> Jet3 {
        match &self.conjugator {
            None => self.core_jet(x),
            Some(h) => {
                let hi = h.inverse_jet(x);
                let f = self.core_jet(wrap(hi.value));
                let ho = h.jet(f.value);
                let mut j = Jet3::compose(&ho, &Jet3::compose(&f, &hi));
                j.value = wrap(j.value);
                j
            }
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match &self.conjugator {
            None if self.cover == 1 => self.matrix.apply(x),
            _ => self.jet(x).value,
        }
    }
}

/// One signed generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u8,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u8, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// Word `x_1 x_2 … x_k` acting as the composition `x_1 ∘ x_2 ∘ … ∘ x_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// The word of `self ∘ other`.
    pub fn compose(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Free reduction: cancels adjacent `x x⁻¹` pairs.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }
}

/// Named generators with precomputed inverses.
#[derive(Clone, Debug)]
pub struct Alphabet {
    names: Vec<String>,
    forward: Vec<Generator>,
    backward: Vec<Generator>,
}

impl Alphabet {
    pub fn new(named: Vec<(String, Generator)>) -> Result<Self> {
        if named.is_empty() {
            return Err(Error::InvalidGenerator("empty generator set".into()));
        }
        if named.len() > 64 {
            return Err(Error::InvalidGenerator("at most 64 generators are supported".into()));
        }
        let first = &named[0].1;
        for (name, g) in &named {
            if g.cover != first.cover || g.conjugator.as_deref() != first.conjugator.as_deref() {
                return Err(Error::InvalidGenerator(format!(
                    "generator {name}: all generators must share one cover degree and one conjugator"
                )));
            }
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '^') {
                return Err(Error::InvalidGenerator(format!("invalid generator name {name:?}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (name, _) in &named {
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidGenerator(format!("duplicate generator name {name}")));
            }
        }
        let backward = named.iter().map(|(_, g)| g.inverse()).collect();
        let (names, forward) = named.into_iter().unzip();
        Ok(Self {
            names,
            forward,
            backward,
        })
    }

    /// Alphabet of pure Möbius generators named `A`, `B`, …
    pub fn from_matrices(mats: &[Mat2]) -> Result<Self> {
        let named = mats
            .iter()
            .enumerate()
            .map(|(i, m)| Ok((((b'A' + i as u8) as char).to_string(), Generator::mobius(*m)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(named)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> &[Generator] {
        &self.forward
    }

    pub fn cover(&self) -> u32 {
        self.forward[0].cover
    }

    pub fn conjugator(&self) -> Option<&Arc<TrigLift>> {
        self.forward[0].conjugator.as_ref()
    }

    pub fn is_pure_mobius(&self) -> bool {
        self.forward[0].is_pure_mobius()
    }

    pub fn letter(&self, l: Letter) -> &Generator {
        if l.inverse {
            &self.backward[l.generator as usize]
        } else {
            &self.forward[l.generator as usize]
        }
    }

    /// Product matrix of a word; meaningful as a map only for pure Möbius alphabets.
    pub fn matrix(&self, word: &[Letter]) -> Mat2 {
        word.iter().fold(Mat2::IDENTITY, |acc, &l| acc * self.letter(l).matrix)
    }

    pub fn word_map<'a>(&'a self, word: &'a [Letter]) -> WordMap<'a> {
        let matrix = if self.is_pure_mobius() {
            Some(self.matrix(word))
        } else {
            None
        };
        WordMap {
            alphabet: self,
            word,
            matrix,
        }
    }

    /// Parses whitespace-separated tokens `A`, `A^-1`; `e` or `id` is the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" || tok == "id" {
                continue;
            }
            let (name, inverse) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let idx = self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Config(format!("unknown generator {name:?} in word {s:?}")))?;
            out.push(Letter::new(idx as u8, inverse));
        }
        Ok(Word(out))
    }

    pub fn format_word(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return "e".to_string();
        }
        word.iter()
            .map(|l| {
                let n = &self.names[l.generator as usize];
                if l.inverse {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A word evaluated against an alphabet.
#[derive(Clone, Copy)]
pub struct WordMap<'a> {
    alphabet: &'a Alphabet,
    word: &'a [Letter],
    matrix: Option<Mat2>,
}

impl WordMap<'_> {
    pub fn matrix(&self) -> Option<Mat2> {
        self.matrix
    }
}

impl fmt::Debug for WordMap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordMap({})", self.alphabet.format_word(self.word))
    }
}

impl CircleMap for WordMap<'_> {
    fn jet(&self, x: f64) -> Jet3 {
        if let Some(m) = self.matrix {
            return m.jet(x);
        }
        let mut j = Jet3::identity(wrap(x));
        for &l in self.word.iter().rev() {
            let o = self.alphabet.letter(l).jet(j.value);
            j = Jet3::compose(&o, &j);
        }
        j
    }

    fn apply(&self, x: f64) -> f64 {
        if let Some(m) = self.matrix {
            return m.apply(x);
        }
        self.word
            .iter()
            .rev()
            .fold(wrap(x), |y, &l| self.alphabet.letter(l).apply(y))
    }
}
