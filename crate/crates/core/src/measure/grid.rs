use crate::circle::{wrap, CircleMap};
use crate::{Error, Result};

/// Circle probability measure stored as a CDF on `N + 1` grid points `i/N`.
///
/// Between grid points the CDF is linear. `cdf[0] = 0`, `cdf[N] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    cdf: Vec<f64>,
}

impl GridMeasure {
    pub fn from_cdf(mut cdf: Vec<f64>) -> Result<Self> {
        if cdf.len() < 3 {
            return Err(Error::InvalidArgument("a grid measure needs at least 2 cells".into()));
        }
        if cdf.iter().any(|v| !v.is_finite()) || cdf.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(Error::InvalidArgument("CDF must be finite and nondecreasing".into()));
        }
        let n = cdf.len() - 1;
        if cdf[0].abs() > 1e-9 || (cdf[n] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("CDF endpoints must be 0 and 1".into()));
        }
        cdf[0] = 0.0;
        cdf[n] = 1.0;
        for i in 1..=n {
            cdf[i] = cdf[i].clamp(cdf[i - 1], 1.0);
        }
        Ok(Self { cdf })
    }

    pub fn lebesgue(n: usize) -> Self {
        Self {
            cdf: (0..=n).map(|i| i as f64 / n as f64).collect(),
        }
    }

    /// Unit mass at `p`, spread over the cell containing it.
    pub fn dirac(n: usize, p: f64) -> Self {
        let p = wrap(p) * n as f64;
        Self {
            cdf: (0..=n).map(|i| (i as f64 - p).clamp(0.0, 1.0)).collect(),
        }
    }

    /// Empirical CDF of circle samples, evaluated at the grid points.
    pub fn from_samples(samples: &[f64], n: usize) -> Self {
        let mut s: Vec<f64> = samples.iter().map(|&x| wrap(x)).collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = s.len() as f64;
        let mut cdf = Vec::with_capacity(n + 1);
        let mut j = 0;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            while j < s.len() && s[j] <= x {
                j += 1;
            }
            cdf.push(j as f64 / m);
        }
        cdf[0] = 0.0;
        cdf[n] = 1.0;
        Self { cdf }
    }

    pub fn grid_size(&self) -> usize {
        self.cdf.len() - 1
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `ν([0, x])` for `x ∈ [0, 1]`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let n = self.grid_size();
        let t = x.clamp(0.0, 1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let f = t - i as f64;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Lifted CDF `F̃(x) = F(x mod 1) + floor(x)`.
    pub fn cdf_lift(&self, x: f64) -> f64 {
        let k = x.floor();
        self.cdf_at(x - k) + k
    }

    /// Mass of the arc from `a` to the lift `b >= a`.
    pub fn arc_mass(&self, a: f64, b: f64) -> f64 {
        if b - a >= 1.0 {
            return 1.0;
        }
        (self.cdf_lift(b) - self.cdf_lift(a)).max(0.0)
    }

    /// Mass of `[a, a + length]`, accurate for arcs far below the grid spacing.
    pub fn arc_mass_len(&self, a: f64, length: f64) -> f64 {
        if length >= 1.0 {
            return 1.0;
        }
        let n = self.grid_size();
        let a = wrap(a);
        let t = a * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let room = (i + 1) as f64 / n as f64 - a;
        if length <= room {
            (self.cdf[i + 1] - self.cdf[i]) * length * n as f64
        } else {
            self.arc_mass(a, a + length)
        }
    }

    /// Generalized inverse of the CDF, `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.grid_size();
        let i = self.cdf.partition_point(|&v| v <= u).clamp(1, n) - 1;
        let (a, b) = (self.cdf[i], self.cdf[i + 1]);
        let t = if b > a { (u - a) / (b - a) } else { 0.0 };
        wrap((i as f64 + t.clamp(0.0, 1.0)) / n as f64)
    }

    pub fn cell_masses(&self) -> Vec<f64> {
        self.cdf.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.cell_masses().into_iter().fold(0.0, f64::max)
    }

    /// Cells whose mass exceeds `tolerance`, as `(left endpoint, mass)`.
    pub fn atoms(&self, tolerance: f64) -> Vec<(f64, f64)> {
        let n = self.grid_size() as f64;
        self.cell_masses()
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m > tolerance)
            .map(|(i, m)| (i as f64 / n, m))
            .collect()
    }

    /// `sup_x |F(x) - G(x)|` over the union of both grids.
    pub fn kolmogorov_distance(&self, other: &GridMeasure) -> f64 {
        let a = self.grid_size();
        let b = other.grid_size();
        let mut d: f64 = 0.0;
        for i in 0..=a {
            let x = i as f64 / a as f64;
            d = d.max((self.cdf[i] - other.cdf_at(x)).abs());
        }
        for j in 0..=b {
            let x = j as f64 / b as f64;
            d = d.max((other.cdf[j] - self.cdf_at(x)).abs());
        }
        d
    }

    /// CDF of `g_* ν`, given the inverse map `g⁻¹`.
    pub fn pushforward<M: CircleMap + ?Sized>(&self, g_inv: &M) -> GridMeasure {
        let ys = lifted_images(g_inv, self.grid_size());
        self.pushforward_with(&ys)
    }

    /// Pushforward given precomputed lifted preimages of the grid points.
    pub(crate) fn pushforward_with(&self, ys: &[f64]) -> GridMeasure {
        let base = self.cdf_lift(ys[0]);
        let mut cdf: Vec<f64> = ys.iter().map(|&y| self.cdf_lift(y) - base).collect();
        let n = cdf.len() - 1;
        cdf[0] = 0.0;
        cdf[n] = 1.0;
        for i in 1..=n {
            cdf[i] = cdf[i].clamp(cdf[i - 1], 1.0);
        }
        GridMeasure { cdf }
    }

    pub(crate) fn cdf_mut(&mut self) -> &mut Vec<f64> {
        &mut self.cdf
    }

    /// CSV with columns `x,cdf`.
    pub fn to_csv(&self) -> String {
        let n = self.grid_size() as f64;
        let mut s = String::from("x,cdf\n");
        for (i, v) in self.cdf.iter().enumerate() {
            s.push_str(&format!("{},{:.12e}\n", i as f64 / n, v));
        }
        s
    }
}

/// Lifted images `y_0 <= y_1 <= … <= y_N = y_0 + 1` of the grid points under a circle homeomorphism.
pub fn lifted_images<M: CircleMap + ?Sized>(g: &M, n: usize) -> Vec<f64> {
    let vals: Vec<f64> = (0..n).map(|i| g.apply(i as f64 / n as f64)).collect();
    let mut ys = Vec::with_capacity(n + 1);
    ys.push(vals[0]);
    for i in 1..n {
        // Signed increment: a homeomorphism never moves one cell across half the circle
        // unless its derivative exceeds N/2.
        let step = (wrap(vals[i] - vals[i - 1] + 0.5) - 0.5).max(0.0);
        let prev = ys[i - 1];
        ys.push(prev + step);
    }
    let end = vals[0] + 1.0;
    for y in ys.iter_mut() {
        *y = y.min(end);
    }
    ys.push(end);
    ys
}
