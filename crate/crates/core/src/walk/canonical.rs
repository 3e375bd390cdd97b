use crate::circle::{wrap, Alphabet, CircleMap, Letter, Mat2, Word};
use crate::{Error, Result};

/// Integer 2×2 matrix `[a, b, c, d]`.
pub type IntMat = [i64; 4];

/// Exact or quantized group identity of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum ElementKey {
    /// Product of integer unimodular matrices up to global sign.
    Integer(IntMat),
    /// Product matrix rounded to 1e-9, up to sign, with the deck shift of lifted maps.
    Quantized(IntMat, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalElement {
    pub reduced_word: Word,
    pub key: ElementKey,
}

const QUANTUM: f64 = 1e-9;

pub(crate) fn sign_normalize(mut m: IntMat) -> IntMat {
    if let Some(&first) = m.iter().find(|&&v| v != 0) {
        if first < 0 {
            for v in &mut m {
                *v = -*v;
            }
        }
    }
    m
}

pub(crate) fn int_mul(x: &IntMat, y: &IntMat) -> Option<IntMat> {
    let e = |p: i64, q: i64, r: i64, s: i64| p.checked_mul(q)?.checked_add(r.checked_mul(s)?);
    Some([
        e(x[0], y[0], x[1], y[2])?,
        e(x[0], y[1], x[1], y[3])?,
        e(x[2], y[0], x[3], y[2])?,
        e(x[2], y[1], x[3], y[3])?,
    ])
}

/// Integer form of a generator matrix, if all entries are integers.
pub fn integer_matrix(m: &Mat2) -> Option<IntMat> {
    let arr = m.to_array();
    let mut out = [0i64; 4];
    for (o, v) in out.iter_mut().zip(arr) {
        let r = v.round();
        if (v - r).abs() > 1e-12 || r.abs() > 1e15 {
            return None;
        }
        *o = r as i64;
    }
    (out[0] * out[3] - out[1] * out[2] == 1).then_some(out)
}

/// Integer matrices of each signed letter, or an error if the alphabet is not integral.
pub(crate) fn integer_letters(alphabet: &Alphabet) -> Result<Vec<[IntMat; 2]>> {
    if !alphabet.is_pure_mobius() {
        return Err(Error::NonIntegerGenerators);
    }
    alphabet
        .generators()
        .iter()
        .map(|g| {
            let m = integer_matrix(&g.matrix()).ok_or(Error::NonIntegerGenerators)?;
            let inv = [m[3], -m[1], -m[2], m[0]];
            Ok([m, inv])
        })
        .collect()
}

pub(crate) fn integer_word(letters: &[[IntMat; 2]], word: &[Letter]) -> Option<IntMat> {
    word.iter().try_fold([1, 0, 0, 1], |acc, l| {
        int_mul(&acc, &letters[l.generator as usize][l.inverse as usize])
    })
}

fn quantize(m: &Mat2) -> IntMat {
    let q = |v: f64| (v / QUANTUM).round() as i64;
    sign_normalize([q(m.a), q(m.b), q(m.c), q(m.d)])
}

/// Canonical form of a word: free reduction plus a matrix key.
pub fn canonical(alphabet: &Alphabet, word: &Word) -> CanonicalElement {
    let reduced = word.reduced();
    let key = match integer_letters(alphabet)
        .ok()
        .and_then(|ls| integer_word(&ls, reduced.letters()))
    {
        Some(m) => ElementKey::Integer(sign_normalize(m)),
        None => {
            let m = alphabet.matrix(reduced.letters());
            let q = alphabet.cover();
            let deck = if q == 1 {
                0
            } else {
                // F(0) = (M̃(0) + k)/q with F the unconjugated map.
                let g = alphabet.word_map(reduced.letters());
                let f0 = match alphabet.conjugator() {
                    None => g.apply(0.0),
                    Some(h) => wrap(h.inverse_lift(g.apply(wrap(h.lift(0.0))))),
                };
                let k = (q as f64 * f0 - m.apply(0.0)).round() as i64;
                k.rem_euclid(q as i64) as u32
            };
            ElementKey::Quantized(quantize(&m), deck)
        }
    };
    CanonicalElement {
        reduced_word: reduced,
        key,
    }
}
