//! Truncated Taylor polynomials in three variables.
//!
//! A [`Jet`] stores the Taylor coefficients `c_a = ∂^a f / a!` of a function
//! around a base point, for every multi-index with `|a| <= order`. Products,
//! derivatives, composition with one-variable functions and linear changes of
//! variables are exact up to the truncation order, which makes jets the
//! analytic path for every pointwise operator in this crate: the variables are
//! `(t, x1, x2)` in Cartesian use and `(xi, eta, x2)` in Goursat use.

use std::ops::{Add, Mul, Neg, Sub};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

const N_MONO: usize = n_monomials(MAX_ORDER);

/// Number of monomials in three variables of total degree `<= order`.
pub const fn n_monomials(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

const MONOMIALS: [[u8; 3]; N_MONO] = build_monomials();

const fn build_monomials() -> [[u8; 3]; N_MONO] {
    let mut out = [[0u8; 3]; N_MONO];
    let mut k = 0;
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut a = d as i64;
        while a >= 0 {
            let rest = d - a as usize;
            let mut c = 0;
            while c <= rest {
                out[k] = [a as u8, (rest - c) as u8, c as u8];
                k += 1;
                c += 1;
            }
            a -= 1;
        }
        d += 1;
    }
    out
}

#[inline]
fn index(m: [u8; 3]) -> usize {
    let a = m[0] as usize;
    let c = m[2] as usize;
    let d = a + m[1] as usize + c;
    d * (d + 1) * (d + 2) / 6 + (d - a) * (d - a + 1) / 2 + c
}

#[inline]
fn degree(m: [u8; 3]) -> usize {
    (m[0] + m[1] + m[2]) as usize
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    coeffs: [f64; N_MONO],
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Jet {
            order,
            coeffs: [0.0; N_MONO],
        }
    }

    pub fn constant(order: usize, value: f64) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// `value + grad · (x - x0)`, truncated to `order`.
    pub fn affine(order: usize, value: f64, grad: [f64; 3]) -> Self {
        let mut j = Self::constant(order, value);
        if order >= 1 {
            for (axis, g) in grad.iter().enumerate() {
                let mut m = [0u8; 3];
                m[axis] = 1;
                j.coeffs[index(m)] = *g;
            }
        }
        j
    }

    /// The coordinate function `x_axis` around a base point whose coordinate is `at`.
    pub fn variable(order: usize, axis: usize, at: f64) -> Self {
        let mut grad = [0.0; 3];
        grad[axis] = 1.0;
        Self::affine(order, at, grad)
    }

    /// Build a jet from partial derivatives `∂^m f` supplied by `partial`.
    pub fn from_partials(order: usize, mut partial: impl FnMut([u8; 3]) -> f64) -> Self {
        let mut j = Self::zero(order);
        for (k, m) in MONOMIALS[..n_monomials(order)].iter().enumerate() {
            let scale = factorial(m[0] as usize) * factorial(m[1] as usize) * factorial(m[2] as usize);
            j.coeffs[k] = partial(*m) / scale;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of the monomial with exponents `m`.
    pub fn coeff(&self, m: [u8; 3]) -> f64 {
        if degree(m) > self.order {
            return 0.0;
        }
        self.coeffs[index(m)]
    }

    /// The partial derivative `∂^m f` at the base point.
    pub fn partial(&self, m: [u8; 3]) -> f64 {
        assert!(
            degree(m) <= self.order,
            "partial of degree {} requested from a jet of order {}",
            degree(m),
            self.order
        );
        self.coeffs[index(m)]
            * factorial(m[0] as usize)
            * factorial(m[1] as usize)
            * factorial(m[2] as usize)
    }

    /// First partial along `axis`.
    pub fn d(&self, axis: usize) -> f64 {
        let mut m = [0u8; 3];
        m[axis] = 1;
        self.partial(m)
    }

    /// Second partial along `a` then `b`.
    pub fn dd(&self, a: usize, b: usize) -> f64 {
        let mut m = [0u8; 3];
        m[a] += 1;
        m[b] += 1;
        self.partial(m)
    }

    /// Lower the truncation order.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        let mut j = Self::zero(order);
        let n = n_monomials(order);
        j.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        j
    }

    /// Derivative along `axis`; the result has order one less.
    pub fn derivative(&self, axis: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate a jet of order 0");
        let order = self.order - 1;
        let mut j = Self::zero(order);
        for (k, m) in MONOMIALS[..n_monomials(order)].iter().enumerate() {
            let mut up = *m;
            up[axis] += 1;
            j.coeffs[k] = (up[axis] as f64) * self.coeffs[index(up)];
        }
        j
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut j = self.clone();
        for c in j.coeffs[..n_monomials(self.order)].iter_mut() {
            *c *= s;
        }
        j
    }

    /// `F(self)` where `derivs[k] = F^(k)` evaluated at `self.value()`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        assert!(
            derivs.len() > self.order,
            "composition to order {} needs {} derivatives, got {}",
            self.order,
            self.order + 1,
            derivs.len()
        );
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let n = self.order;
        let mut out = Jet::constant(n, derivs[n] / factorial(n));
        for k in (0..n).rev() {
            out = &out * &h;
            out.coeffs[0] += derivs[k] / factorial(k);
        }
        out
    }

    /// Re-expand in new variables `y`, where the old displacements are
    /// `Δx_i = Σ_j map[i][j] Δy_j`.
    pub fn substitute(&self, map: [[f64; 3]; 3]) -> Jet {
        let order = self.order;
        let dx: Vec<Jet> = map.iter().map(|row| Jet::affine(order, 0.0, *row)).collect();
        // powers[i][p] = (Δx_i)^p
        let powers: Vec<Vec<Jet>> = dx
            .iter()
            .map(|d| {
                let mut v = vec![Jet::constant(order, 1.0)];
                for p in 1..=order {
                    let next = &v[p - 1] * d;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Jet::zero(order);
        for (k, m) in MONOMIALS[..n_monomials(order)].iter().enumerate() {
            let c = self.coeffs[k];
            if c == 0.0 {
                continue;
            }
            let term = &(&powers[0][m[0] as usize] * &powers[1][m[1] as usize])
                * &powers[2][m[2] as usize];
            out = &out + &term.scale(c);
        }
        out
    }

    /// Re-expand around the base point displaced by `dx`. Exact when the jet
    /// is a polynomial of degree `<= order`.
    pub fn shifted(&self, dx: [f64; 3]) -> Jet {
        let order = self.order;
        let axes: Vec<Jet> = (0..3).map(|i| Jet::variable(order, i, dx[i])).collect();
        let powers: Vec<Vec<Jet>> = axes
            .iter()
            .map(|a| {
                let mut v = vec![Jet::constant(order, 1.0)];
                for p in 1..=order {
                    let next = &v[p - 1] * a;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Jet::zero(order);
        for (k, m) in MONOMIALS[..n_monomials(order)].iter().enumerate() {
            let c = self.coeffs[k];
            if c == 0.0 {
                continue;
            }
            let term = &(&powers[0][m[0] as usize] * &powers[1][m[1] as usize])
                * &powers[2][m[2] as usize];
            out = &out + &term.scale(c);
        }
        out
    }

    /// Evaluate the Taylor polynomial at displacement `dx` from the base point.
    pub fn eval_at(&self, dx: [f64; 3]) -> f64 {
        MONOMIALS[..n_monomials(self.order)]
            .iter()
            .zip(self.coeffs.iter())
            .map(|(m, c)| {
                c * dx[0].powi(m[0] as i32) * dx[1].powi(m[1] as i32) * dx[2].powi(m[2] as i32)
            })
            .sum()
    }
}

/// A smooth function of three variables that can report its jets.
pub trait SpacetimeFn {
    /// Jet of the requested order at point `p`.
    fn jet(&self, p: [f64; 3], order: usize) -> Jet;

    fn eval(&self, p: [f64; 3]) -> f64 {
        self.jet(p, 0).value()
    }
}

/// A polynomial of degree `<= MAX_ORDER`, stored as its jet at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial(pub Jet);

impl SpacetimeFn for Polynomial {
    fn jet(&self, p: [f64; 3], order: usize) -> Jet {
        self.0.shifted(p).truncate(order)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut j = Jet::zero(order);
        for k in 0..n_monomials(order) {
            j.coeffs[k] = self.coeffs[k] + rhs.coeffs[k];
        }
        j
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut j = Jet::zero(order);
        for k in 0..n_monomials(order) {
            j.coeffs[k] = self.coeffs[k] - rhs.coeffs[k];
        }
        j
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut j = Jet::zero(order);
        for (i, mi) in MONOMIALS[..n_monomials(order)].iter().enumerate() {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            let room = order - degree(*mi);
            for (k, mk) in MONOMIALS[..n_monomials(room)].iter().enumerate() {
                let b = rhs.coeffs[k];
                if b == 0.0 {
                    continue;
                }
                let m = [mi[0] + mk[0], mi[1] + mk[1], mi[2] + mk[2]];
                j.coeffs[index(m)] += a * b;
            }
        }
        j
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_table_is_consistent_with_index() {
        for (k, m) in MONOMIALS.iter().enumerate() {
            assert_eq!(index(*m), k, "{m:?}");
        }
        assert_eq!(n_monomials(3), 20);
    }

    #[test]
    fn product_of_variables() {
        // x·y around (1, 2, 0)
        let x = Jet::variable(3, 0, 1.0);
        let y = Jet::variable(3, 1, 2.0);
        let p = &x * &y;
        assert_eq!(p.value(), 2.0);
        assert_eq!(p.d(0), 2.0);
        assert_eq!(p.d(1), 1.0);
        assert_eq!(p.dd(0, 1), 1.0);
        assert_eq!(p.dd(0, 0), 0.0);
    }

    #[test]
    fn compose_exp_matches_series() {
        // exp(x) around x = 0.3
        let x = Jet::variable(4, 0, 0.3);
        let e = 0.3f64.exp();
        let j = x.compose(&[e, e, e, e, e]);
        for k in 0..=4u8 {
            assert!((j.partial([k, 0, 0]) - e).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let x = Jet::variable(3, 0, 2.0);
        let cube = &(&x * &x) * &x;
        let d = cube.derivative(0);
        assert_eq!(d.order(), 2);
        assert!((d.value() - 12.0).abs() < 1e-14);
        assert!((d.d(0) - 12.0).abs() < 1e-14);
        assert!((d.dd(0, 0) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn substitute_swaps_axes() {
        // f = x^2 y around (1, 3, 0); swap x <-> y
        let x = Jet::variable(3, 0, 1.0);
        let y = Jet::variable(3, 1, 3.0);
        let f = &(&x * &x) * &y;
        let swap = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let g = f.substitute(swap);
        // g(y0, y1) = f(y1, y0), so ∂g/∂y1 = ∂f/∂x = 2xy = 6
        assert!((g.d(1) - 6.0).abs() < 1e-14);
        assert!((g.d(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eval_at_reproduces_polynomial() {
        let x = Jet::variable(3, 0, 0.5);
        let z = Jet::variable(3, 2, -1.0);
        let f = &(&x * &z) + &(&z * &z);
        let exact = |a: f64, c: f64| a * c + c * c;
        let v = f.eval_at([0.2, 5.0, 0.4]);
        assert!((v - exact(0.7, -0.6)).abs() < 1e-14);
    }

    #[test]
    fn shifted_polynomial_matches_direct_expansion() {
        // p = x^2 y + z^3 around the origin, re-expanded at (1, -2, 0.5)
        let x = Jet::variable(4, 0, 0.0);
        let y = Jet::variable(4, 1, 0.0);
        let z = Jet::variable(4, 2, 0.0);
        let p = &(&(&x * &x) * &y) + &(&(&z * &z) * &z);
        let q = p.shifted([1.0, -2.0, 0.5]);
        assert!((q.value() - (-2.0 + 0.125)).abs() < 1e-14);
        assert!((q.d(0) - (-4.0)).abs() < 1e-14);
        assert!((q.d(1) - 1.0).abs() < 1e-14);
        assert!((q.d(2) - 0.75).abs() < 1e-14);
        assert!((q.dd(0, 1) - 2.0).abs() < 1e-14);
        let back = q.shifted([-1.0, 2.0, -0.5]);
        for (a, b) in back.coeffs.iter().zip(p.coeffs.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
