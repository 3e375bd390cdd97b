use super::distance::{ck_components, CkDistance, NearIdentityMap};
use super::kappa::kappa_m_solve;
use crate::circle::{affine_distortion_fn, circle_dist, wrap, Alphabet, CircleArc, CircleMap, LinearChart, Word};
use crate::measure::GridMeasure;
use crate::probes::{push_arc, walk_constants, ConstantsParams, ConstantsReport, ProbeContext};
use crate::walk::{canonical, sample_walk_indexed, ElementKey, StepDistribution};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct NearIdentityParams {
    /// Half-width of `I = [-η, η]` in the chart.
    pub eta: f64,
    pub m_min: u32,
    pub m_max: u32,
    /// Walk length `n = max(n_min, ⌈factor · m⌉)`.
    pub walk_length_factor: f64,
    pub n_min: usize,
    pub samples: usize,
    /// Walks used to set the percentile thresholds.
    pub pilot_samples: usize,
    pub lambda: f64,
    pub h_nu: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub seed: u64,
    /// Grid size for distortion and `C^k` distances on `I`.
    pub grid: usize,
}

impl Default for NearIdentityParams {
    fn default() -> Self {
        Self {
            eta: 0.005,
            m_min: 5,
            m_max: 20,
            walk_length_factor: 2.0,
            n_min: 10,
            samples: 20_000,
            pilot_samples: 1000,
            lambda: -0.1,
            h_nu: 0.0,
            epsilon: 0.1,
            tau: 1.0,
            seed: 0,
            grid: 201,
        }
    }
}

/// Constants defining the sampled set of good walks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    /// Lower bound on `C₁`.
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BucketStats {
    /// Number of buckets of width `1/m`.
    pub buckets: usize,
    pub sampled: usize,
    /// Samples passing the thresholds.
    pub good: usize,
    pub fullest_bucket: usize,
    /// Distinct elements in the fullest bucket.
    pub occupancy: usize,
    /// `Σ ν(ḡ(I_{2m}))` over the fullest bucket.
    pub pigeonhole_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NearIdentityReport {
    pub m: u32,
    pub n: usize,
    /// `ḡ` and `h̄`, with `g_m = ḡ ∘ l^m`.
    pub g_bar: String,
    pub h_bar: String,
    pub g_key: ElementKey,
    pub h_key: ElementKey,
    pub kappa_m: f64,
    /// `κ_m` plus the chart distortion on `I_m`.
    pub kappa_bound: f64,
    pub kappa_g: f64,
    pub kappa_h: f64,
    /// `|log g_m'(0)/h_m'(0)|`.
    pub log_derivative_gap: f64,
    pub images_intersect: bool,
    pub c_m: f64,
    /// Distances of `h_m⁻¹ ∘ g_m` to the identity on `[-η/2, η/2]`.
    pub ck: CkDistance,
    #[serde(skip)]
    pub g_word: Word,
    #[serde(skip)]
    pub h_word: Word,
}

#[derive(Clone, Debug, Serialize)]
pub struct MSearch {
    pub m: u32,
    pub n: usize,
    pub kappa_m: Option<f64>,
    pub thresholds: Thresholds,
    pub stats: Option<BucketStats>,
    pub pair: Option<NearIdentityReport>,
    pub miss: Option<String>,
}

/// Everything the pair maps are evaluated against.
#[derive(Clone, Debug)]
pub struct PairContext {
    pub alphabet: Arc<Alphabet>,
    pub chart: LinearChart,
    pub eta: f64,
}

impl PairContext {
    /// `g_m = ḡ ∘ l^m` from the chart interval to the circle, lifted near `ḡ(p)`.
    pub fn element_jet(&self, word: &Word, m: u32, y: f64) -> crate::circle::Jet3 {
        let s = self.chart.alpha().powi(m as i32);
        let pre = self.chart.from_chart_jet(s * y);
        let pre = crate::circle::Jet3::new(pre.value, pre.d1 * s, pre.d2 * s * s, pre.d3 * s * s * s);
        let g = self.alphabet.word_map(word.letters());
        let j = crate::circle::Jet3::compose(&g.jet(pre.value), &pre);
        let anchor = g.apply(self.chart.fixed_point());
        crate::circle::Jet3::new(anchor + wrap(j.value - anchor + 0.5) - 0.5, j.d1, j.d2, j.d3)
    }

    pub fn phi(&self, g: &Word, h: &Word, m: u32) -> NearIdentityMap<'_> {
        NearIdentityMap::new(&self.alphabet, &self.chart, h.inverse().compose(g).reduced(), m)
    }

    /// `κ(g_m, I)` on the grid.
    pub fn distortion(&self, word: &Word, m: u32, grid: usize) -> f64 {
        affine_distortion_fn(|y| self.element_jet(word, m, y).d1, -self.eta, self.eta, grid)
    }
}

impl NearIdentityReport {
    /// Measures a candidate pair `g_m = ḡ ∘ l^m`, `h_m = h̄ ∘ l^m`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_pair(
        pc: &PairContext,
        g: &Word,
        h: &Word,
        m: u32,
        n: usize,
        kappa_m: f64,
        kappa_bound: f64,
        grid: usize,
    ) -> Result<Self> {
        let alphabet = &pc.alphabet;
        let phi = pc.phi(g, h, m);
        let ck = ck_components(&|y| phi.jet(y), -pc.eta / 2.0, pc.eta / 2.0, grid)?;
        let alpha = pc.chart.alpha();
        let p = pc.chart.fixed_point();
        // g_m(I_m) = ḡ(I_{2m}).
        let (left, len) = chart_arc(&pc.chart, alpha.powi(2 * m as i32) * pc.eta);
        let img = |w: &Word| push_arc(&alphabet.word_map(w.letters()), left, len);
        let log_d = |w: &Word| alphabet.word_map(w.letters()).derivative(p).ln();
        Ok(Self {
            m,
            n,
            g_bar: alphabet.format_word(g.letters()),
            h_bar: alphabet.format_word(h.letters()),
            g_key: canonical(alphabet, g).key,
            h_key: canonical(alphabet, h).key,
            kappa_m,
            kappa_bound,
            kappa_g: pc.distortion(g, m, grid),
            kappa_h: pc.distortion(h, m, grid),
            log_derivative_gap: (log_d(g) - log_d(h)).abs(),
            images_intersect: arcs_intersect(img(g), img(h)),
            c_m: (-2.0 * kappa_bound - 1.0 / m as f64).exp() * (1.0 - alpha.powi(m as i32)),
            ck,
            g_word: g.clone(),
            h_word: h.clone(),
        })
    }
}

struct Sample {
    word: Word,
    key: ElementKey,
    log_d: f64,
    constants: ConstantsReport,
}

fn percentile(v: &mut [f64], q: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let i = ((v.len() - 1) as f64 * q).round() as usize;
    v[i]
}

/// Chart interval `[-r, r]` as a circle arc `(left, length)`.
fn chart_arc(chart: &LinearChart, r: f64) -> (f64, f64) {
    let left = chart.from_chart(-r);
    let length = if r > 1e-7 {
        wrap(chart.from_chart(r) - left)
    } else {
        2.0 * r * chart.from_chart_jet(0.0).d1
    };
    (left, length)
}

fn arcs_intersect(a: (f64, f64), b: (f64, f64)) -> bool {
    wrap(b.0 - a.0) <= a.1 || wrap(a.0 - b.0) <= b.1
}

/// Searches pairs `(g_m, h_m)` with close derivatives at the fixed point of `l` and intersecting images of `I_m`.
///
/// A value of `m` with no pair is recorded as a miss.
pub fn search_near_identity_pairs(
    mu: &StepDistribution,
    chart: &LinearChart,
    nu: &GridMeasure,
    ctx: &ProbeContext,
    params: &NearIdentityParams,
) -> Result<Vec<MSearch>> {
    if !(params.eta > 0.0) || params.m_min == 0 || params.m_min > params.m_max {
        return Err(Error::InvalidArgument("need eta > 0 and 1 <= m_min <= m_max".into()));
    }
    if !(params.lambda < 0.0) {
        return Err(Error::NonNegativeExponent(params.lambda));
    }
    let pc = PairContext {
        alphabet: mu.alphabet().clone(),
        chart: chart.clone(),
        eta: params.eta,
    };
    (params.m_min..=params.m_max)
        .map(|m| search_one(mu, &pc, nu, ctx, params, m))
        .collect()
}

fn draw(
    mu: &StepDistribution,
    pc: &PairContext,
    nu: &GridMeasure,
    ctx: &ProbeContext,
    params: &NearIdentityParams,
    n: usize,
    arc2m: (f64, f64),
    index: u64,
) -> Result<Sample> {
    let p = pc.chart.fixed_point();
    let walk = sample_walk_indexed(mu, n, params.seed, index);
    let cp = ConstantsParams {
        lambda: params.lambda,
        h_nu: params.h_nu,
        epsilon: params.epsilon,
        arc: CircleArc::new(arc2m.0, arc2m.1)?,
        x: p,
        kappa: 0.5,
    };
    let constants = walk_constants(&walk, mu, nu, ctx, &cp)?;
    let word = walk.l_word(mu, n);
    let log_d = pc.alphabet.word_map(word.letters()).derivative(p).ln();
    let key = canonical(&pc.alphabet, &word).key;
    Ok(Sample {
        word,
        key,
        log_d,
        constants,
    })
}

fn search_one(
    mu: &StepDistribution,
    pc: &PairContext,
    nu: &GridMeasure,
    ctx: &ProbeContext,
    params: &NearIdentityParams,
    m: u32,
) -> Result<MSearch> {
    let alpha = pc.chart.alpha();
    let n = params.n_min.max((params.walk_length_factor * m as f64).ceil() as usize);
    let arc2m = chart_arc(&pc.chart, alpha.powi(2 * m as i32) * params.eta);
    let base = (m as u64) << 40;

    let pilot: Vec<Sample> = (0..params.pilot_samples as u64)
        .into_par_iter()
        .map(|k| draw(mu, pc, nu, ctx, params, n, arc2m, base | (1 << 39) | k))
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&ConstantsReport) -> f64| -> Vec<f64> { pilot.iter().map(|s| f(&s.constants)).collect() };
    let thresholds = Thresholds {
        c1: percentile(&mut col(&|c| c.c1), 0.1),
        c2: percentile(&mut col(&|c| c.c2), 0.9),
        c3: percentile(&mut col(&|c| c.c3), 0.9),
        c4: percentile(&mut col(&|c| c.c4_l), 0.9),
    };
    let mut out = MSearch {
        m,
        n,
        kappa_m: None,
        thresholds,
        stats: None,
        pair: None,
        miss: None,
    };

    // κ_m for the circle interval [p - r, p + r] containing χ⁻¹(I_m).
    let p = pc.chart.fixed_point();
    let r_m = alpha.powi(m as i32) * params.eta;
    let (left_m, len_m) = chart_arc(&pc.chart, r_m);
    let r = circle_dist(p, left_m).max(circle_dist(left_m + len_m, p));
    let gap = r * thresholds.c2 * thresholds.c3.powf(1.0 / params.tau);
    let kappa_m = match kappa_m_solve(gap, params.tau) {
        Ok(k) => k,
        Err(e) => {
            out.miss = Some(e.to_string());
            return Ok(out);
        }
    };
    out.kappa_m = Some(kappa_m);

    let samples: Vec<Sample> = (0..params.samples as u64)
        .into_par_iter()
        .map(|k| draw(mu, pc, nu, ctx, params, n, arc2m, base | k))
        .collect::<Result<_>>()?;
    let good: Vec<&Sample> = samples
        .iter()
        .filter(|s| {
            let c = &s.constants;
            c.c1 >= thresholds.c1 && c.c2 <= thresholds.c2 && c.c3 <= thresholds.c3 && c.c4_l <= thresholds.c4
        })
        .collect();

    let lower = 1.5 * params.lambda * n as f64 - thresholds.c2.ln();
    let buckets = (m as usize) * ((params.lambda.abs() * n as f64 + 2.0 * thresholds.c2.ln()).ceil() as usize).max(1);
    let mut table: Vec<BTreeMap<ElementKey, &Sample>> = vec![BTreeMap::new(); buckets];
    for s in &good {
        let k = ((s.log_d - lower) * m as f64).floor();
        let k = (k.max(0.0) as usize).min(buckets - 1);
        table[k].entry(s.key.clone()).or_insert(s);
    }
    let (fullest, _) = table
        .iter()
        .enumerate()
        .fold((0, 0), |best, (i, b)| if b.len() > best.1 { (i, b.len()) } else { best });
    let members: Vec<&Sample> = table[fullest].values().copied().collect();
    let alphabet = &pc.alphabet;
    let images: Vec<(f64, f64)> = members
        .iter()
        .map(|s| push_arc(&alphabet.word_map(s.word.letters()), arc2m.0, arc2m.1))
        .collect();
    let pigeonhole_mass = images.iter().map(|&(a, l)| nu.arc_mass_len(a, l)).sum();
    out.stats = Some(BucketStats {
        buckets,
        sampled: samples.len(),
        good: good.len(),
        fullest_bucket: fullest,
        occupancy: members.len(),
        pigeonhole_mass,
    });

    // Sweep the image arcs sorted by left end; keep the pair with the closest derivatives.
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&i, &j| images[i].0.partial_cmp(&images[j].0).unwrap().then(i.cmp(&j)));
    let mut best: Option<(f64, usize, usize)> = None;
    let len = order.len();
    for a in 0..len {
        let i = order[a];
        for step in 1..len {
            let j = order[(a + step) % len];
            if wrap(images[j].0 - images[i].0) > images[i].1 {
                break;
            }
            let d = (members[i].log_d - members[j].log_d).abs();
            let (x, y) = (i.min(j), i.max(j));
            if best.is_none_or(|b| (d, x, y) < b) {
                best = Some((d, x, y));
            }
        }
    }
    let Some((_, i, j)) = best else {
        out.miss = Some("no intersecting pair in the fullest bucket".into());
        return Ok(out);
    };
    let (g, h) = (&members[i].word, &members[j].word);
    let chart_kappa = affine_distortion_fn(|y| pc.chart.from_chart_jet(y).d1, -r_m, r_m, params.grid);
    match NearIdentityReport::from_pair(pc, g, h, m, n, kappa_m, kappa_m + chart_kappa, params.grid) {
        Ok(rep) => out.pair = Some(rep),
        Err(e) => out.miss = Some(format!("pair found but {e}")),
    }
    Ok(out)
}
