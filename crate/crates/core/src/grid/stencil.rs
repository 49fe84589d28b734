//! Finite-difference stencils on uniform 1D lattices.

use crate::error::{Error, Result};

/// Weights for the `m`-th derivative at `x0` from nodes `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m, "need more than {m} nodes for derivative order {m}");
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// A derivative stencil for a lattice of `n` points with spacing `h`.
///
/// Central in the interior, one-sided windows of matching accuracy within
/// `half` points of either end.
#[derive(Clone, Debug)]
pub struct Stencil1D {
    n: usize,
    half: usize,
    central: Vec<f64>,
    // left[i] holds the weights of the window [0, width) used at node i
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    boundary_width: usize,
}

impl Stencil1D {
    /// `deriv` in {1, 2}, `accuracy` in {2, 4}.
    pub fn new(n: usize, h: f64, deriv: usize, accuracy: usize) -> Result<Self> {
        if !(1..=2).contains(&deriv) || !(accuracy == 2 || accuracy == 4) {
            return Err(Error::InvalidGrid(format!(
                "unsupported stencil: derivative {deriv}, accuracy {accuracy}"
            )));
        }
        let half = (deriv + accuracy - 1) / 2;
        let boundary_width = accuracy + deriv;
        if n < boundary_width.max(2 * half + 1) {
            return Err(Error::GridTooSmall {
                needed: boundary_width.max(2 * half + 1),
                have: n,
            });
        }
        let scale = h.powi(deriv as i32);
        let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|o| o as f64).collect();
        let central = fd_weights(0.0, &offsets, deriv)
            .into_iter()
            .map(|w| w / scale)
            .collect();
        let window: Vec<f64> = (0..boundary_width).map(|o| o as f64).collect();
        let left = (0..half)
            .map(|i| {
                fd_weights(i as f64, &window, deriv)
                    .into_iter()
                    .map(|w| w / scale)
                    .collect()
            })
            .collect();
        // mirror: node n-1-i uses window [n-w, n)
        let right = (0..half)
            .map(|i| {
                let x0 = (boundary_width - 1 - i) as f64;
                fd_weights(x0, &window, deriv)
                    .into_iter()
                    .map(|w| w / scale)
                    .collect()
            })
            .collect();
        Ok(Stencil1D {
            n,
            half,
            central,
            left,
            right,
            boundary_width,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half
    }

    pub fn central_weights(&self) -> &[f64] {
        &self.central
    }

    /// First node index and weights used at node `i`.
    pub fn weights_at(&self, i: usize) -> (usize, &[f64]) {
        if i < self.half {
            (0, &self.left[i])
        } else if i + self.half >= self.n {
            let k = self.n - 1 - i;
            (self.n - self.boundary_width, &self.right[k])
        } else {
            (i - self.half, &self.central)
        }
    }

    /// Apply at node `i` to values fetched by `get`.
    #[inline]
    pub fn apply_at(&self, i: usize, get: impl Fn(usize) -> f64) -> f64 {
        let (start, w) = self.weights_at(i);
        w.iter().enumerate().map(|(k, wk)| wk * get(start + k)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w2 = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(expect2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn one_sided_second_derivative_matches_table() {
        let window: Vec<f64> = (0..6).map(|o| o as f64).collect();
        let w = fd_weights(0.0, &window, 2);
        let expect = [15.0 / 4.0, -77.0 / 6.0, 107.0 / 6.0, -13.0, 61.0 / 12.0, -5.0 / 6.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn exact_on_polynomials_everywhere() {
        let n = 11;
        let h = 0.3;
        for (deriv, acc) in [(1, 2), (2, 2), (1, 4), (2, 4)] {
            let st = Stencil1D::new(n, h, deriv, acc).unwrap();
            // degree acc polynomial: exact for first and second derivative
            let p = |x: f64| 1.0 + 2.0 * x - 0.5 * x * x + 0.25 * x.powi(acc as i32);
            let dp = |x: f64| 2.0 - x + 0.25 * acc as f64 * x.powi(acc as i32 - 1);
            let ddp =
                |x: f64| -1.0 + 0.25 * (acc * (acc - 1)) as f64 * x.powi(acc as i32 - 2);
            for i in 0..n {
                let got = st.apply_at(i, |k| p(k as f64 * h));
                let x = i as f64 * h;
                let want = if deriv == 1 { dp(x) } else { ddp(x) };
                assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "d{deriv} acc{acc} i{i}");
            }
        }
    }
}
