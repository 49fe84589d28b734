//! Time stacks of sampled fields and finite-difference spacetime jets.

use super::stencil::{fd_weights, Stencil1D};
use super::{PointJet, ScalarField};
use crate::error::{Error, Result};

/// Slices of one field at uniformly spaced times `t0 + k·dt`.
#[derive(Clone, Debug)]
pub struct TimeStack {
    pub dt: f64,
    pub slices: Vec<ScalarField>,
}

impl TimeStack {
    pub fn new(dt: f64, slices: Vec<ScalarField>) -> Result<Self> {
        if slices.is_empty() || !(dt > 0.0) {
            return Err(Error::InsufficientStencil("empty stack or non-positive dt".into()));
        }
        let g = slices[0].grid;
        if slices.iter().any(|s| s.grid != g) {
            return Err(Error::InsufficientStencil("slices live on different grids".into()));
        }
        Ok(TimeStack { dt, slices })
    }

    /// Sample `f(t, x1, x2)` at `count` levels centred on `t_center`.
    pub fn sample(
        grid: super::Grid2D,
        t_center: f64,
        dt: f64,
        count: usize,
        f: impl Fn(f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let mid = (count / 2) as f64;
        let slices = (0..count)
            .map(|k| {
                let t = t_center + (k as f64 - mid) * dt;
                ScalarField::from_fn(grid, t, |x1, x2| f(t, x1, x2))
            })
            .collect();
        Self::new(dt, slices)
    }

    fn time_weights(&self, it: usize, deriv: usize, accuracy: usize) -> Result<(usize, Vec<f64>)> {
        let half = (deriv + accuracy - 1) / 2;
        if it < half || it + half >= self.slices.len() {
            return Err(Error::InsufficientStencil(format!(
                "time index {it} needs {half} slices on each side, stack has {}",
                self.slices.len()
            )));
        }
        let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|o| o as f64).collect();
        let w = fd_weights(0.0, &offsets, deriv)
            .into_iter()
            .map(|w| w / self.dt.powi(deriv as i32))
            .collect();
        Ok((it - half, w))
    }

    /// Finite-difference 2-jets at slice `it` for every node, in grid order.
    pub fn jets(&self, it: usize, scheme_order: usize) -> Result<Vec<PointJet>> {
        let (t0, wt) = self.time_weights(it, 1, scheme_order)?;
        let (t0b, wtt) = self.time_weights(it, 2, scheme_order)?;
        let combine = |start: usize, w: &[f64]| {
            let mut out = ScalarField::zeros(self.slices[it].grid, self.slices[it].time_label);
            for (k, wk) in w.iter().enumerate() {
                for (o, v) in out.values.iter_mut().zip(&self.slices[start + k].values) {
                    *o += wk * v;
                }
            }
            out
        };
        let f = &self.slices[it];
        let ft = combine(t0, &wt);
        let ftt = combine(t0b, &wtt);
        let d = |g: &ScalarField, axis, order| super::derivative(g, axis, order, scheme_order);
        let f1 = d(f, super::Axis::X1, 1)?;
        let f2 = d(f, super::Axis::X2, 1)?;
        let f12 = d(&f1, super::Axis::X2, 1)?;
        let f11 = d(f, super::Axis::X1, 2)?;
        let f22 = d(f, super::Axis::X2, 2)?;
        let ft1 = d(&ft, super::Axis::X1, 1)?;
        let ft2 = d(&ft, super::Axis::X2, 1)?;
        Ok((0..f.values.len())
            .map(|k| PointJet {
                value: f.values[k],
                d_t: ft.values[k],
                d_x1: f1.values[k],
                d_x2: f2.values[k],
                d_tt: ftt.values[k],
                d_tx1: ft1.values[k],
                d_tx2: ft2.values[k],
                d_x1x1: f11.values[k],
                d_x1x2: f12.values[k],
                d_x2x2: f22.values[k],
            })
            .collect())
    }

    /// Finite-difference 2-jet at slice `it`, node `(i1, i2)`.
    pub fn point_jet(&self, it: usize, i1: usize, i2: usize, scheme_order: usize) -> Result<PointJet> {
        let g = self.slices[0].grid;
        if i1 >= g.n1 || i2 >= g.n2 {
            return Err(Error::InsufficientStencil(format!("node ({i1}, {i2}) off grid")));
        }
        let s1 = Stencil1D::new(g.n1, g.h1(), 1, scheme_order)?;
        let s2 = Stencil1D::new(g.n2, g.h2(), 1, scheme_order)?;
        let s11 = Stencil1D::new(g.n1, g.h1(), 2, scheme_order)?;
        let s22 = Stencil1D::new(g.n2, g.h2(), 2, scheme_order)?;
        let (t0, wt) = self.time_weights(it, 1, scheme_order)?;
        let (t0b, wtt) = self.time_weights(it, 2, scheme_order)?;

        let f = &self.slices[it];
        let dx1 = |s: &ScalarField| s1.apply_at(i1, |k| s.at(k, i2));
        let dx2 = |s: &ScalarField| s2.apply_at(i2, |k| s.at(i1, k));
        let in_time = |start: usize, w: &[f64], get: &dyn Fn(&ScalarField) -> f64| {
            w.iter()
                .enumerate()
                .map(|(k, wk)| wk * get(&self.slices[start + k]))
                .sum::<f64>()
        };
        Ok(PointJet {
            value: f.at(i1, i2),
            d_t: in_time(t0, &wt, &|s| s.at(i1, i2)),
            d_x1: dx1(f),
            d_x2: dx2(f),
            d_tt: in_time(t0b, &wtt, &|s| s.at(i1, i2)),
            d_tx1: in_time(t0, &wt, &dx1),
            d_tx2: in_time(t0, &wt, &dx2),
            d_x1x1: s11.apply_at(i1, |k| f.at(k, i2)),
            d_x1x2: s1.apply_at(i1, |k| s2.apply_at(i2, |l| f.at(k, l))),
            d_x2x2: s22.apply_at(i2, |k| f.at(i1, k)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn jet_of_cubic_is_exact_with_fourth_order() {
        let g = Grid2D::square(1.0, 11).unwrap();
        let f = |t: f64, x1: f64, x2: f64| t * t * x1 + x2.powi(3) - t * x2 + x1 * x2;
        let st = TimeStack::sample(g, 0.4, 0.1, 5, f).unwrap();
        let j = st.point_jet(2, 3, 7, 4).unwrap();
        let (t, x1, x2) = (0.4, g.x1(3), g.x2(7));
        let tol = 1e-9;
        assert!((j.d_t - (2.0 * t * x1 - x2)).abs() < tol);
        assert!((j.d_tt - 2.0 * x1).abs() < tol);
        assert!((j.d_tx1 - 2.0 * t).abs() < tol);
        assert!((j.d_tx2 + 1.0).abs() < tol);
        assert!((j.d_x2x2 - 6.0 * x2).abs() < tol);
        assert!((j.d_x1x2 - 1.0).abs() < tol);
    }

    #[test]
    fn field_jets_match_point_jets() {
        let g = Grid2D::square(1.0, 11).unwrap();
        let f = |t: f64, x1: f64, x2: f64| (t * x1).sin() + (x2 - t).exp();
        let st = TimeStack::sample(g, 0.4, 0.05, 5, f).unwrap();
        let all = st.jets(2, 4).unwrap();
        for (i, j) in [(0, 0), (3, 7), (10, 5)] {
            let a = st.point_jet(2, i, j, 4).unwrap();
            let d = a - all[g.idx(i, j)];
            let parts = [d.value, d.d_t, d.d_x1, d.d_x2, d.d_tt, d.d_tx1, d.d_tx2, d.d_x1x1, d.d_x1x2, d.d_x2x2];
            assert!(parts.iter().all(|p| p.abs() < 1e-10), "{i} {j} {d:?}");
        }
    }

    #[test]
    fn time_edge_is_an_error() {
        let g = Grid2D::square(1.0, 11).unwrap();
        let st = TimeStack::sample(g, 0.0, 0.1, 5, |t, _, _| t).unwrap();
        assert!(st.point_jet(1, 5, 5, 4).is_err());
        assert!(st.point_jet(1, 5, 5, 2).is_ok());
    }
}
