//! Uniform tensor grids, sampled scalar fields, derivative stencils and
//! discrete norms.

mod io;
mod slab;
mod stack;
pub mod stencil;

pub use io::{read_binary, write_binary, write_csv};
pub use slab::{weighted_l2, Axis1D, GoursatSlab};
pub use stack::TimeStack;
pub use stencil::Stencil1D;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Minimum points per axis; leaves room for the widest one-sided stencil.
pub const MIN_POINTS: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Grid2D {
    pub fn new(x1: (f64, f64), x2: (f64, f64), n1: usize, n2: usize) -> Result<Self> {
        let g = Grid2D {
            x1_min: x1.0,
            x1_max: x1.1,
            x2_min: x2.0,
            x2_max: x2.1,
            n1,
            n2,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[-half_width, half_width]^2` with `n` points per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new((-half_width, half_width), (-half_width, half_width), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < MIN_POINTS || self.n2 < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {}x{}",
                self.n1, self.n2
            )));
        }
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && hi > lo;
        if !ok(self.x1_min, self.x1_max) || !ok(self.x2_min, self.x2_max) {
            return Err(Error::InvalidGrid("bounds must be finite with max > min".into()));
        }
        Ok(())
    }

    pub fn h1(&self) -> f64 {
        (self.x1_max - self.x1_min) / (self.n1 - 1) as f64
    }

    pub fn h2(&self) -> f64 {
        (self.x2_max - self.x2_min) / (self.n2 - 1) as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.x1_min + i as f64 * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.x2_min + j as f64 * self.h2()
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Smallest distance from the origin to the grid boundary.
    pub fn half_width(&self) -> f64 {
        [-self.x1_min, self.x1_max, -self.x2_min, self.x2_max]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// The same box with every spacing halved.
    pub fn refined(&self) -> Grid2D {
        Grid2D {
            n1: 2 * self.n1 - 1,
            n2: 2 * self.n2 - 1,
            ..*self
        }
    }

    /// Composite trapezoid weights along each axis.
    pub fn trapezoid_weights(&self) -> (Vec<f64>, Vec<f64>) {
        (
            trapezoid_weights(self.n1, self.h1()),
            trapezoid_weights(self.n2, self.h2()),
        )
    }
}

pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
}

/// A scalar sampled on a [`Grid2D`] at one time level; values are row-major
/// with `x1` as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub time_label: f64,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D, time_label: f64) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
            time_label,
        }
    }

    pub fn from_fn(grid: Grid2D, time_label: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            let x1 = grid.x1(i);
            for j in 0..grid.n2 {
                values.push(f(x1, grid.x2(j)));
            }
        }
        ScalarField {
            grid,
            values,
            time_label,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|x|` among nodes where `|value| > threshold`; 0 for an empty support.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        let g = &self.grid;
        let mut r2: f64 = 0.0;
        for i in 0..g.n1 {
            let x1 = g.x1(i);
            for j in 0..g.n2 {
                if self.values[g.idx(i, j)].abs() > threshold {
                    let x2 = g.x2(j);
                    r2 = r2.max(x1 * x1 + x2 * x2);
                }
            }
        }
        r2.sqrt()
    }

    /// Largest `|x2|` among nodes where `|value| > threshold`.
    pub fn support_radius_x2(&self, threshold: f64) -> f64 {
        let g = &self.grid;
        let mut r: f64 = 0.0;
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                if self.values[g.idx(i, j)].abs() > threshold {
                    r = r.max(g.x2(j).abs());
                }
            }
        }
        r
    }

    /// Composite trapezoid integral.
    pub fn integrate(&self) -> f64 {
        let (w1, w2) = self.grid.trapezoid_weights();
        let n2 = self.grid.n2;
        let mut s = 0.0;
        for (i, wi) in w1.iter().enumerate() {
            let row = &self.values[i * n2..(i + 1) * n2];
            s += wi * row.iter().zip(&w2).map(|(v, wj)| v * wj).sum::<f64>();
        }
        s
    }
}

/// 2-jet of a scalar at a spacetime point, in Cartesian variables `(t, x1, x2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointJet {
    pub value: f64,
    pub d_t: f64,
    pub d_x1: f64,
    pub d_x2: f64,
    pub d_tt: f64,
    pub d_tx1: f64,
    pub d_tx2: f64,
    pub d_x1x1: f64,
    pub d_x1x2: f64,
    pub d_x2x2: f64,
}

impl PointJet {
    pub fn gradient(&self) -> [f64; 3] {
        [self.d_t, self.d_x1, self.d_x2]
    }

    /// Symmetric Hessian in `(t, x1, x2)` order.
    pub fn hessian(&self) -> [[f64; 3]; 3] {
        [
            [self.d_tt, self.d_tx1, self.d_tx2],
            [self.d_tx1, self.d_x1x1, self.d_x1x2],
            [self.d_tx2, self.d_x1x2, self.d_x2x2],
        ]
    }

    pub fn box_op(&self) -> f64 {
        self.d_tt - self.d_x1x1 - self.d_x2x2
    }

    pub fn scaled(&self, s: f64) -> PointJet {
        PointJet {
            value: s * self.value,
            d_t: s * self.d_t,
            d_x1: s * self.d_x1,
            d_x2: s * self.d_x2,
            d_tt: s * self.d_tt,
            d_tx1: s * self.d_tx1,
            d_tx2: s * self.d_tx2,
            d_x1x1: s * self.d_x1x1,
            d_x1x2: s * self.d_x1x2,
            d_x2x2: s * self.d_x2x2,
        }
    }
}

impl std::ops::Add for PointJet {
    type Output = PointJet;
    fn add(self, o: PointJet) -> PointJet {
        PointJet {
            value: self.value + o.value,
            d_t: self.d_t + o.d_t,
            d_x1: self.d_x1 + o.d_x1,
            d_x2: self.d_x2 + o.d_x2,
            d_tt: self.d_tt + o.d_tt,
            d_tx1: self.d_tx1 + o.d_tx1,
            d_tx2: self.d_tx2 + o.d_tx2,
            d_x1x1: self.d_x1x1 + o.d_x1x1,
            d_x1x2: self.d_x1x2 + o.d_x1x2,
            d_x2x2: self.d_x2x2 + o.d_x2x2,
        }
    }
}

impl std::ops::Sub for PointJet {
    type Output = PointJet;
    fn sub(self, o: PointJet) -> PointJet {
        self + o.scaled(-1.0)
    }
}

impl From<&Jet> for PointJet {
    /// Reads a Cartesian jet of order >= 2.
    fn from(j: &Jet) -> Self {
        PointJet {
            value: j.value(),
            d_t: j.d(0),
            d_x1: j.d(1),
            d_x2: j.d(2),
            d_tt: j.dd(0, 0),
            d_tx1: j.dd(0, 1),
            d_tx2: j.dd(0, 2),
            d_x1x1: j.dd(1, 1),
            d_x1x2: j.dd(1, 2),
            d_x2x2: j.dd(2, 2),
        }
    }
}

impl From<&PointJet> for Jet {
    fn from(p: &PointJet) -> Jet {
        Jet::from_partials(2, |m| match m {
            [0, 0, 0] => p.value,
            [1, 0, 0] => p.d_t,
            [0, 1, 0] => p.d_x1,
            [0, 0, 1] => p.d_x2,
            [2, 0, 0] => p.d_tt,
            [1, 1, 0] => p.d_tx1,
            [1, 0, 1] => p.d_tx2,
            [0, 2, 0] => p.d_x1x1,
            [0, 1, 1] => p.d_x1x2,
            [0, 0, 2] => p.d_x2x2,
            _ => 0.0,
        })
    }
}

/// Radial profile `exp(-1/(1 - q^p))` of the bump, `q = r²/R²`, and its
/// derivatives in `q` up to third order. Zero for `q >= 1`.
pub fn bump_profile_q(q: f64, smoothness: u32) -> [f64; 4] {
    if q >= 1.0 || q < 0.0 {
        return [0.0; 4];
    }
    // g(q) = -1/(1 - q^p); e^g with Faà di Bruno up to order 3
    let p = smoothness as f64;
    let qp = q.powf(p);
    let s = 1.0 - qp;
    let g = -1.0 / s;
    // derivatives of s(q) = 1 - q^p; vanishing coefficients guard q = 0
    let term = |coef: f64, e: f64| if coef == 0.0 { 0.0 } else { coef * q.powf(e) };
    let s1 = term(-p, p - 1.0);
    let s2 = term(-p * (p - 1.0), p - 2.0);
    let s3 = term(-p * (p - 1.0) * (p - 2.0), p - 3.0);
    // g = -s^{-1}
    let g1 = s1 / (s * s);
    let g2 = s2 / (s * s) - 2.0 * s1 * s1 / (s * s * s);
    let g3 = s3 / (s * s) - 6.0 * s1 * s2 / (s * s * s) + 6.0 * s1.powi(3) / s.powi(4);
    let e = g.exp();
    [
        e,
        e * g1,
        e * (g2 + g1 * g1),
        e * (g3 + 3.0 * g1 * g2 + g1.powi(3)),
    ]
}

/// `amplitude · exp(-1/(1 - (r²/radius²)^smoothness))` inside `r < radius`, zero outside.
pub fn make_bump(
    grid: Grid2D,
    center: (f64, f64),
    radius: f64,
    amplitude: f64,
    smoothness: u32,
) -> Result<ScalarField> {
    if !(radius > 0.0) || smoothness == 0 {
        return Err(Error::InvalidGrid(format!(
            "bump needs radius > 0 and smoothness >= 1 (radius {radius}, smoothness {smoothness})"
        )));
    }
    if center.0 - radius < grid.x1_min
        || center.0 + radius > grid.x1_max
        || center.1 - radius < grid.x2_min
        || center.1 + radius > grid.x2_max
    {
        return Err(Error::BumpEscapesGrid);
    }
    Ok(ScalarField::from_fn(grid, 0.0, |x1, x2| {
        let q = ((x1 - center.0).powi(2) + (x2 - center.1).powi(2)) / (radius * radius);
        amplitude * bump_profile_q(q, smoothness)[0]
    }))
}

/// Derivative of `field` along `axis`; `order` in {1, 2}, `scheme_order` in {2, 4}.
pub fn derivative(
    field: &ScalarField,
    axis: Axis,
    order: usize,
    scheme_order: usize,
) -> Result<ScalarField> {
    let g = field.grid;
    let (n, h) = match axis {
        Axis::X1 => (g.n1, g.h1()),
        Axis::X2 => (g.n2, g.h2()),
    };
    let st = Stencil1D::new(n, h, order, scheme_order)?;
    Ok(apply_stencil(field, axis, &st))
}

pub(crate) fn apply_stencil(field: &ScalarField, axis: Axis, st: &Stencil1D) -> ScalarField {
    let g = field.grid;
    let v = &field.values;
    let mut out = vec![0.0; g.len()];
    match axis {
        Axis::X1 => {
            for i in 0..g.n1 {
                let (start, w) = st.weights_at(i);
                let row = &mut out[i * g.n2..(i + 1) * g.n2];
                for (k, wk) in w.iter().enumerate() {
                    let src = &v[(start + k) * g.n2..(start + k + 1) * g.n2];
                    for (o, s) in row.iter_mut().zip(src) {
                        *o += wk * s;
                    }
                }
            }
        }
        Axis::X2 => {
            for i in 0..g.n1 {
                let src = &v[i * g.n2..(i + 1) * g.n2];
                let row = &mut out[i * g.n2..(i + 1) * g.n2];
                for (j, o) in row.iter_mut().enumerate() {
                    *o = st.apply_at(j, |k| src[k]);
                }
            }
        }
    }
    ScalarField {
        grid: g,
        values: out,
        time_label: field.time_label,
    }
}

/// `∂1^a ∂2^b f` by repeated stencils.
fn mixed_partial(f: &ScalarField, a: usize, b: usize, scheme_order: usize) -> Result<ScalarField> {
    let mut cur = f.clone();
    for (axis, count) in [(Axis::X1, a), (Axis::X2, b)] {
        let mut left = count;
        while left >= 2 {
            cur = derivative(&cur, axis, 2, scheme_order)?;
            left -= 2;
        }
        if left == 1 {
            cur = derivative(&cur, axis, 1, scheme_order)?;
        }
    }
    Ok(cur)
}

/// Discrete `H^m` norm: trapezoid quadrature of all squared partials of order `<= m`.
pub fn hm_norm(f: &ScalarField, m: usize, scheme_order: usize) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..=m {
        for a in 0..=k {
            let d = mixed_partial(f, a, k - a, scheme_order)?;
            let sq = ScalarField {
                values: d.values.iter().map(|x| x * x).collect(),
                ..d
            };
            total += sq.integrate();
        }
    }
    Ok(total.sqrt())
}

/// `Σ (‖f‖_{H^{s+1}} + ‖g‖_{H^s})` over the data pairs, 4th-order stencils.
pub fn sobolev_norm(pairs: &[(ScalarField, ScalarField)], s: u32) -> Result<f64> {
    if s > 4 {
        return Err(Error::SobolevOrderTooHigh(s));
    }
    let s = s as usize;
    pairs.iter().try_fold(0.0, |acc, (f, g)| {
        Ok(acc + hm_norm(f, s + 1, 4)? + hm_norm(g, s, 4)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::square(2.0, n).unwrap()
    }

    #[test]
    fn grid_rejects_too_few_points() {
        assert!(Grid2D::square(1.0, 8).is_err());
        assert!(Grid2D::new((1.0, 0.0), (0.0, 1.0), 9, 9).is_err());
    }

    #[test]
    fn zero_amplitude_bump_is_zero() {
        let f = make_bump(grid(33), (0.0, 0.0), 1.0, 0.0, 1).unwrap();
        assert_eq!(f.sup_abs(), 0.0);
    }

    #[test]
    fn bump_scales_linearly() {
        let a = make_bump(grid(33), (0.2, -0.1), 1.0, 1e-3, 1).unwrap();
        let b = make_bump(grid(33), (0.2, -0.1), 1.0, 2e-3, 1).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn bump_closed_form_values() {
        // grid node at r = 0 and r = 1 exactly (h = 0.125)
        let f = make_bump(grid(33), (0.0, 0.0), 1.0, 3.0, 1).unwrap();
        let g = f.grid;
        let centre = f.at(16, 16);
        assert!((centre - 3.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.x1(24), 1.0);
        assert_eq!(f.at(24, 16), 0.0);
        assert!(f.support_radius(0.0) < 1.0);
    }

    #[test]
    fn bump_escaping_grid_is_rejected() {
        let e = make_bump(grid(33), (1.5, 0.0), 1.0, 1.0, 1).unwrap_err();
        assert!(matches!(e, Error::BumpEscapesGrid));
    }

    #[test]
    fn quadratic_first_derivative_is_exact() {
        let f = ScalarField::from_fn(grid(17), 0.0, |x1, _| x1 * x1);
        let d = derivative(&f, Axis::X1, 1, 2).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                assert!((d.at(i, j) - 2.0 * f.grid.x1(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_has_zero_derivative() {
        let f = ScalarField::from_fn(grid(17), 0.0, |_, _| 4.2);
        for order in [1, 2] {
            for scheme in [2, 4] {
                for axis in [Axis::X1, Axis::X2] {
                    let d = derivative(&f, axis, order, scheme).unwrap();
                    assert!(d.sup_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn stencils_exact_on_polynomials_of_scheme_degree() {
        let g = grid(13);
        for scheme in [2usize, 4] {
            let f = ScalarField::from_fn(g, 0.0, |x1, x2| {
                x1.powi(scheme as i32) - 3.0 * x2.powi(scheme as i32) + x1 * x2
            });
            let dx1 = derivative(&f, Axis::X1, 1, scheme).unwrap();
            let dx22 = derivative(&f, Axis::X2, 2, scheme).unwrap();
            for i in 0..13 {
                for j in 0..13 {
                    let (x1, x2) = (g.x1(i), g.x2(j));
                    let e1 = scheme as f64 * x1.powi(scheme as i32 - 1) + x2;
                    let e2 = -3.0 * (scheme * (scheme - 1)) as f64 * x2.powi(scheme as i32 - 2);
                    assert!((dx1.at(i, j) - e1).abs() <= 1e-10 * (1.0 + e1.abs()));
                    assert!((dx22.at(i, j) - e2).abs() <= 1e-10 * (1.0 + e2.abs()));
                }
            }
        }
    }

    #[test]
    fn second_order_convergence_on_sine() {
        let err = |n: usize| {
            let g = Grid2D::new((0.0, 3.0), (0.0, 1.0), n, 9).unwrap();
            let f = ScalarField::from_fn(g, 0.0, |x1, _| x1.sin());
            let d = derivative(&f, Axis::X1, 1, 2).unwrap();
            let exact = ScalarField::from_fn(g, 0.0, |x1, _| x1.cos());
            d.max_abs_diff(&exact)
        };
        let (e1, e2, e3) = (err(33), err(65), err(129));
        let p1 = (e1 / e2).log2();
        let p2 = (e2 / e3).log2();
        assert!(p1 >= 1.9 && p2 >= 1.9, "orders {p1} {p2}");
    }

    #[test]
    fn bump_edge_slope_vanishes_under_refinement() {
        // first derivative at the last in-support node along the x1 axis
        let slope = |n: usize| {
            let f = make_bump(grid(n), (0.0, 0.0), 1.0, 1.0, 1).unwrap();
            let d = derivative(&f, Axis::X1, 1, 4).unwrap();
            let j = (n - 1) / 2;
            let last = (0..n).filter(|&i| f.at(i, j) > 0.0).max().unwrap();
            d.at(last, j).abs()
        };
        let s = [slope(33), slope(65), slope(129), slope(257)];
        assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
        // faster than any fixed power of h
        assert!(s[3] < 1e-3 * s[0], "{s:?}");
    }

    #[test]
    fn sobolev_norm_zero_and_homogeneous() {
        let g = grid(33);
        let z = ScalarField::zeros(g, 0.0);
        assert_eq!(sobolev_norm(&[(z.clone(), z.clone())], 2).unwrap(), 0.0);
        let f = make_bump(g, (0.0, 0.0), 1.0, 1.0, 1).unwrap();
        let n1 = sobolev_norm(&[(f.clone(), f.clone())], 1).unwrap();
        let n3 = sobolev_norm(&[(f.scaled(-3.0), f.scaled(-3.0))], 1).unwrap();
        assert!((n3 - 3.0 * n1).abs() < 1e-12 * n1);
        assert!(matches!(
            sobolev_norm(&[(f.clone(), f)], 5),
            Err(Error::SobolevOrderTooHigh(5))
        ));
    }
}
