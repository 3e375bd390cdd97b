use crate::{Error, Result};

/// Reduces a real number into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Shortest-arc distance on the circle, at most 1/2.
#[inline]
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = wrap(x - y);
    d.min(1.0 - d)
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(x: f64) -> Self {
        Self(wrap(x))
    }

    pub fn coord(self) -> f64 {
        self.0
    }

    pub fn dist(self, other: CirclePoint) -> f64 {
        circle_dist(self.0, other.0)
    }
}

impl From<f64> for CirclePoint {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

/// Closed arc `[left, left + length]` traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleArc {
    left: CirclePoint,
    length: f64,
}

impl CircleArc {
    pub fn new(left: f64, length: f64) -> Result<Self> {
        if !(length > 0.0 && length < 1.0) || !left.is_finite() {
            return Err(Error::DegenerateArc(length));
        }
        Ok(Self {
            left: CirclePoint::new(left),
            length,
        })
    }

    /// Arc from `a` to `b` counterclockwise, `b` taken as a lift of `a + length`.
    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b - a)
    }

    /// Arc `[x - radius, x + radius]`.
    pub fn centered(x: f64, radius: f64) -> Result<Self> {
        Self::new(x - radius, 2.0 * radius)
    }

    pub fn left(&self) -> CirclePoint {
        self.left
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Lifted right endpoint, in `[left, left + 1)`.
    pub fn right_lift(&self) -> f64 {
        self.left.0 + self.length
    }

    pub fn midpoint(&self) -> f64 {
        self.left.0 + 0.5 * self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        wrap(x - self.left.0) <= self.length
    }

    /// `n >= 2` equally spaced lifted points from `left` to the right endpoint.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let h = self.length / (n - 1) as f64;
        (0..n).map(|i| self.left.0 + i as f64 * h).collect()
    }

    pub fn intersects(&self, other: &CircleArc) -> bool {
        self.contains(other.left.0) || other.contains(self.left.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_normalizes() {
        assert_eq!(wrap(1.25), 0.25);
        assert_eq!(wrap(-0.25), 0.75);
        assert_eq!(wrap(-1e-18), 0.0);
        assert!(circle_dist(0.95, 0.05) - 0.1 < 1e-15);
    }

    #[test]
    fn arc_wraparound_containment() {
        let arc = CircleArc::new(0.9, 0.2).unwrap();
        assert!(arc.contains(0.95));
        assert!(arc.contains(0.05));
        assert!(!arc.contains(0.2));
        assert!(CircleArc::new(0.1, 0.0).is_err());
        assert!(CircleArc::new(0.1, 1.0).is_err());
    }

    #[test]
    fn arcs_intersect_across_zero() {
        let a = CircleArc::new(0.9, 0.2).unwrap();
        let b = CircleArc::new(0.05, 0.1).unwrap();
        let c = CircleArc::new(0.3, 0.1).unwrap();
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
    }
}
