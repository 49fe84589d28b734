//! Samples on uniform `(xi, eta, x2)` lattices.

use serde::{Deserialize, Serialize};

use super::trapezoid_weights;

/// A uniform 1D lattice; `n == 1` denotes a single station at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis1D {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis1D {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        assert!(n >= 1, "axis needs at least one point");
        assert!(n == 1 || max > min, "axis bounds must increase");
        Axis1D { min, max, n }
    }

    pub fn single(at: f64) -> Self {
        Axis1D { min: at, max: at, n: 1 }
    }

    pub fn h(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.min + i as f64 * self.h()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.at(i))
    }

    /// Trapezoid weights; a single station integrates with weight 1.
    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.n, self.h())
    }

    pub fn refined(&self) -> Axis1D {
        if self.n == 1 {
            *self
        } else {
            Axis1D::new(self.min, self.max, 2 * self.n - 1)
        }
    }
}

/// A scalar sampled on `xi × eta × x2`, `x2` fastest. Cells outside the
/// region reached by the source data are marked uncovered.
#[derive(Clone, Debug, PartialEq)]
pub struct GoursatSlab {
    pub xi: Axis1D,
    pub eta: Axis1D,
    pub x2: Axis1D,
    pub values: Vec<f64>,
    pub covered: Vec<bool>,
}

impl GoursatSlab {
    pub fn zeros(xi: Axis1D, eta: Axis1D, x2: Axis1D) -> Self {
        let n = xi.n * eta.n * x2.n;
        GoursatSlab {
            xi,
            eta,
            x2,
            values: vec![0.0; n],
            covered: vec![true; n],
        }
    }

    pub fn from_fn(xi: Axis1D, eta: Axis1D, x2: Axis1D, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(xi, eta, x2);
        for a in 0..xi.n {
            for b in 0..eta.n {
                for c in 0..x2.n {
                    let k = s.idx(a, b, c);
                    s.values[k] = f(xi.at(a), eta.at(b), x2.at(c));
                }
            }
        }
        s
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.eta.n + b) * self.x2.n + c
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        self.values[self.idx(a, b, c)]
    }

    pub fn is_fully_covered(&self) -> bool {
        self.covered.iter().all(|&c| c)
    }

    /// Same lattice, values mapped pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GoursatSlab {
        GoursatSlab {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Sup of `|value|` over covered cells of the station `a`.
    pub fn station_sup(&self, a: usize) -> f64 {
        let n = self.eta.n * self.x2.n;
        let base = a * n;
        (base..base + n)
            .filter(|&k| self.covered[k])
            .fold(0.0, |m, k| m.max(self.values[k].abs()))
    }

    /// Whether station `a` has any covered cell.
    pub fn station_covered(&self, a: usize) -> bool {
        let n = self.eta.n * self.x2.n;
        self.covered[a * n..(a + 1) * n].iter().any(|&c| c)
    }
}

/// Trapezoid quadrature of `weight(xi, eta) · φ²` over the covered cells of the slab.
pub fn weighted_l2(slab: &GoursatSlab, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let (wa, wb, wc) = (slab.xi.weights(), slab.eta.weights(), slab.x2.weights());
    let mut total = 0.0;
    for (a, wa) in wa.iter().enumerate() {
        let xi = slab.xi.at(a);
        for (b, wb) in wb.iter().enumerate() {
            let w = weight(xi, slab.eta.at(b)) * wa * wb;
            let mut line = 0.0;
            for (c, wc) in wc.iter().enumerate() {
                let k = slab.idx(a, b, c);
                if slab.covered[k] {
                    line += wc * slab.values[k] * slab.values[k];
                }
            }
            total += w * line;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes() -> (Axis1D, Axis1D, Axis1D) {
        (
            Axis1D::new(0.0, 2.0, 41),
            Axis1D::new(-1.0, 1.0, 41),
            Axis1D::new(-1.0, 1.0, 41),
        )
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let (a, b, c) = axes();
        let s = GoursatSlab::zeros(a, b, c);
        assert_eq!(weighted_l2(&s, |_, _| 1.0), 0.0);
    }

    #[test]
    fn weight_is_linear() {
        let (a, b, c) = axes();
        let s = GoursatSlab::from_fn(a, b, c, |x, y, z| x * y + z);
        let one = weighted_l2(&s, |x, y| 1.0 + x * x + y);
        let two = weighted_l2(&s, |x, y| 2.0 * (1.0 + x * x + y));
        assert!((two - 2.0 * one).abs() < 1e-12 * one);
    }

    #[test]
    fn smooth_bump_matches_independent_quadrature() {
        // separable cos² bumps vanishing on the box faces
        let (a, b, c) = (
            Axis1D::new(-2.0, 2.0, 81),
            Axis1D::new(-1.0, 1.0, 81),
            Axis1D::new(-1.0, 1.0, 81),
        );
        let bump = |s: f64, w: f64| (std::f64::consts::FRAC_PI_2 * s / w).cos().powi(2);
        let s = GoursatSlab::from_fn(a, b, c, |x, y, z| bump(x, 2.0) * bump(y, 1.0) * bump(z, 1.0));
        // ∫_{-w}^{w} cos⁴(πs/2w) ds = 3w/4
        let exact = (3.0 * 2.0 / 4.0) * (3.0 / 4.0) * (3.0 / 4.0);
        let got = weighted_l2(&s, |_, _| 1.0);
        assert!((got - exact).abs() < 0.01 * exact, "{got} vs {exact}");
    }
}
