use crate::circle::{wrap, Alphabet, CircleMap, Letter};
use crate::measure::GridMeasure;
use serde::Serialize;

/// Settings for [`minimal_set_classify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapCriterion {
    /// A cell is thin when its mass is below this fraction of `1/N`.
    pub thin_fraction: f64,
    /// Fixed points of short words are moved by reduced words up to this length.
    pub word_length: usize,
}

impl Default for GapCriterion {
    fn default() -> Self {
        Self {
            thin_fraction: 0.05,
            word_length: 8,
        }
    }
}

/// Runs of at most this many thin cells are not reported.
const MIN_GAP_CELLS: usize = 10;

/// Fixed points are searched on this many samples per grid cell.
const FIXED_POINT_SAMPLES: usize = 4;

/// Words up to this length supply the fixed points that seed the orbit.
const SEED_LENGTH: usize = 2;

/// Cap on the number of words applied to the seeds.
const MAX_ORBIT_WORDS: usize = 20_000;

const MAX_EXPANSION: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub start: f64,
    /// Lifted end, `end > start`.
    pub end: f64,
    pub length: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinimalSet {
    WholeCircle,
    Cantor { gaps: Vec<Gap> },
}

impl MinimalSet {
    pub fn is_cantor(&self) -> bool {
        matches!(self, MinimalSet::Cantor { .. })
    }

    pub fn gaps(&self) -> &[Gap] {
        match self {
            MinimalSet::WholeCircle => &[],
            MinimalSet::Cantor { gaps } => gaps,
        }
    }

    pub fn gaps_csv(&self) -> String {
        let mut s = String::from("start,end,length,mass\n");
        for g in self.gaps() {
            s.push_str(&format!("{},{},{},{}\n", g.start, g.end, g.length, g.mass));
        }
        s
    }
}

/// Maximal runs of more than `MIN_GAP_CELLS` cells whose mass is below `thin_fraction / N`.
pub fn thin_arcs(nu: &GridMeasure, thin_fraction: f64) -> Vec<Gap> {
    let n = nu.grid_size();
    let cells = nu.cell_masses();
    let limit = thin_fraction / n as f64;
    let Some(anchor) = cells.iter().position(|&m| m >= limit) else {
        return Vec::new();
    };
    let mut arcs = Vec::new();
    let mut run_start = None;
    let mut run_mass = 0.0;
    for step in 1..=n {
        let i = (anchor + step) % n;
        let thin = cells[i] < limit && step < n;
        match (thin, run_start) {
            (true, None) => {
                run_start = Some(anchor + step);
                run_mass = cells[i];
            }
            (true, Some(_)) => run_mass += cells[i],
            (false, Some(s)) => {
                let len = anchor + step - s;
                if len > MIN_GAP_CELLS {
                    let start = (s % n) as f64 / n as f64;
                    arcs.push(Gap {
                        start,
                        end: start + len as f64 / n as f64,
                        length: len as f64 / n as f64,
                        mass: run_mass,
                    });
                }
                run_start = None;
            }
            (false, None) => {}
        }
    }
    arcs
}

/// Reduced words of length `1..=max_len`, stopping before a length that would push the total
/// past `budget`.
fn reduced_words(alphabet: &Alphabet, max_len: usize, budget: usize) -> Vec<Vec<Letter>> {
    let letters: Vec<Letter> = (0..alphabet.len() as u8)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.last().is_some_and(|&p| p == l.inv()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        if out.len() + next.len() > budget {
            break;
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Bisects `f` on `[lo, hi]`, given a sign change.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = f(lo).signum();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fixed points of `g` found on `samples` equally spaced points.
///
/// A sign change of the displacement gives a hyperbolic point. A near-zero local minimum
/// without one is a parabolic point, located where `g' = 1`.
fn fixed_points<M: CircleMap + ?Sized>(g: &M, samples: usize) -> Vec<f64> {
    let disp = |x: f64| wrap(g.apply(wrap(x)) - x + 0.5) - 0.5;
    let h = 1.0 / samples as f64;
    let d: Vec<f64> = (0..samples).map(|k| disp(k as f64 * h)).collect();
    if d.iter().all(|v| v.abs() < 1e-9) {
        // The identity element: no information.
        return Vec::new();
    }
    let crosses = |u: f64, v: f64| u.abs() < 0.25 && v.abs() < 0.25 && u.signum() != v.signum();
    let mut out = Vec::new();
    for k in 0..samples {
        let (prev, cur, next) = (d[(k + samples - 1) % samples], d[k], d[(k + 1) % samples]);
        let x = k as f64 * h;
        if cur == 0.0 {
            out.push(x);
        } else if crosses(cur, next) {
            out.push(wrap(bisect(disp, x, x + h)));
        } else if !crosses(prev, cur) && cur.abs() < 1e-7 && cur.abs() <= prev.abs() && cur.abs() <= next.abs() {
            let slope = |y: f64| g.derivative(wrap(y)) - 1.0;
            if slope(x - h).signum() != slope(x + h).signum() {
                out.push(wrap(bisect(slope, x - h, x + h)));
            }
        }
    }
    out
}

/// Points of the limit set: fixed points of short words and their powers up to the cover
/// degree, moved by reduced words up to `orbit_length`.
///
/// Images under words expanding by more than `MAX_EXPANSION` at the seed are dropped, since
/// they magnify the seed's rounding error.
fn limit_points(alphabet: &Alphabet, orbit_length: usize, samples: usize) -> Vec<f64> {
    let q = alphabet.cover().max(1) as usize;
    let mut seeds: Vec<f64> = reduced_words(alphabet, SEED_LENGTH, usize::MAX)
        .iter()
        .flat_map(|w| (1..=q).map(move |j| w.repeat(j)))
        .flat_map(|w| fixed_points(&alphabet.word_map(&w), samples))
        .collect();
    seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    seeds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut points = seeds.clone();
    for w in reduced_words(alphabet, orbit_length, MAX_ORBIT_WORDS) {
        let g = alphabet.word_map(&w);
        points.extend(seeds.iter().filter(|&&x| g.derivative(x) <= MAX_EXPANSION).map(|&x| g.apply(x)));
    }
    points
}

/// Classifies the closed support of `ν` as the whole circle or a Cantor set.
///
/// Thin runs of `ν` are candidate gaps. Orbits of fixed points lie in the limit set, so a
/// candidate whose core holds such a point is a thin region of the support (a cusp, say) and
/// is discarded. The core drops a tenth of the run plus two cells at each end, since gap
/// endpoints are themselves limit points. Surviving gaps extend to the nearest known limit
/// point on each side.
pub fn minimal_set_classify(alphabet: &Alphabet, nu: &GridMeasure, criterion: &GapCriterion) -> MinimalSet {
    let candidates = thin_arcs(nu, criterion.thin_fraction);
    if candidates.is_empty() {
        return MinimalSet::WholeCircle;
    }
    let cell = 1.0 / nu.grid_size() as f64;
    let points = limit_points(alphabet, criterion.word_length, FIXED_POINT_SAMPLES * nu.grid_size());
    let mut gaps: Vec<Gap> = candidates
        .into_iter()
        .filter_map(|c| {
            let margin = 0.1 * c.length + 2.0 * cell;
            let (core_start, core) = (c.start + margin, c.length - 2.0 * margin);
            if core > 0.0 && points.iter().any(|&p| wrap(p - core_start) < core) {
                return None;
            }
            if core <= 0.0 || points.is_empty() {
                return Some(c);
            }
            // Widen to the nearest known limit points; diffusion in ν makes the thin run
            // slightly shorter than the gap.
            let core_end = core_start + core;
            let left = points.iter().map(|&p| wrap(core_start - p)).fold(f64::INFINITY, f64::min);
            let right = points.iter().map(|&p| wrap(p - core_end)).fold(f64::INFINITY, f64::min);
            let start = wrap(core_start - left);
            let length = core + left + right;
            Some(Gap {
                start,
                end: start + length,
                length,
                mass: nu.arc_mass(start, start + length),
            })
        })
        .collect();
    if gaps.is_empty() {
        return MinimalSet::WholeCircle;
    }
    gaps.sort_by(|a, b| b.length.partial_cmp(&a.length).unwrap().then(a.start.partial_cmp(&b.start).unwrap()));
    MinimalSet::Cantor { gaps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Mat2;

    /// Fixes `0` and `1/2` in the angle chart.
    fn diagonal() -> Alphabet {
        Alphabet::from_matrices(&[Mat2::new(3.0, 0.0, 0.0, 1.0 / 3.0)]).unwrap()
    }

    /// Uniform on the complement of `[lo, hi]`.
    fn holed(n: usize, lo: f64, hi: f64) -> GridMeasure {
        let w = 1.0 - (hi - lo);
        let cdf = (0..=n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (x.min(lo) + (x - hi).max(0.0)) / w
            })
            .collect();
        GridMeasure::from_cdf(cdf).unwrap()
    }

    #[test]
    fn lebesgue_is_whole_circle() {
        let c = minimal_set_classify(&diagonal(), &GridMeasure::lebesgue(1024), &GapCriterion::default());
        assert!(!c.is_cantor());
    }

    #[test]
    fn wrapping_thin_arc_is_found() {
        // Mass uniform on [0.25, 0.75]; the hole is [0.75, 1.25].
        let n = 1000;
        let cdf: Vec<f64> = (0..=n).map(|i| ((i as f64 / n as f64 - 0.25) * 2.0).clamp(0.0, 1.0)).collect();
        let g = thin_arcs(&GridMeasure::from_cdf(cdf).unwrap(), 0.05);
        assert_eq!(g.len(), 1);
        assert!((g[0].start - 0.75).abs() < 1e-9 && (g[0].end - 1.25).abs() < 1e-9);
    }

    #[test]
    fn hole_without_fixed_points_is_a_gap() {
        let c = minimal_set_classify(&diagonal(), &holed(2048, 0.6, 0.9), &GapCriterion::default());
        assert!(c.is_cantor());
        // The only known limit points are 0 and 1/2, so the gap widens to them.
        let g = c.gaps()[0];
        assert!((g.start - 0.5).abs() < 1e-12 && (g.end - 1.0).abs() < 1e-12, "{g:?}");
    }

    #[test]
    fn hole_around_a_fixed_point_is_not_a_gap() {
        let c = minimal_set_classify(&diagonal(), &holed(2048, 0.4, 0.6), &GapCriterion::default());
        assert!(!c.is_cantor());
    }

    #[test]
    fn parabolic_fixed_point_is_detected() {
        // Fixes 1/2 only, tangentially.
        let a = Alphabet::from_matrices(&[Mat2::new(1.0, 1.0, 0.0, 1.0)]).unwrap();
        let crit = GapCriterion::default();
        assert!(!minimal_set_classify(&a, &holed(2048, 0.4, 0.6), &crit).is_cantor());
        assert!(minimal_set_classify(&a, &holed(2048, 0.6, 0.9), &crit).is_cantor());
    }

    #[test]
    fn short_runs_are_ignored() {
        let n = 1000;
        let mut cdf: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        // Null arc of 5 cells.
        for v in cdf.iter_mut().take(506).skip(501) {
            *v = 0.5;
        }
        assert!(thin_arcs(&GridMeasure::from_cdf(cdf).unwrap(), 0.05).is_empty());
    }
}
