//! Resampling of time slices onto constant-`xi` stations.

use crate::error::{Error, Result};
use crate::grid::{derivative, Axis, Axis1D, GoursatSlab, ScalarField};

/// `u` and `u_t` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: ScalarField,
    pub u_t: ScalarField,
}

/// `u` and its first derivatives on a Goursat slab.
#[derive(Clone, Debug, PartialEq)]
pub struct GoursatData {
    pub u: GoursatSlab,
    pub u_xi: GoursatSlab,
    pub u_eta: GoursatSlab,
    pub u_x2: GoursatSlab,
}

struct Level {
    t: f64,
    u: ScalarField,
    u_t: ScalarField,
    u_x1: ScalarField,
    u_x2: ScalarField,
}

/// Linear interpolation in `(t, x1)` between stored snapshots.
pub struct GoursatSampler {
    levels: Vec<Level>,
}

impl GoursatSampler {
    /// `snapshots` must share one grid and be sorted by time.
    pub fn new(snapshots: &[Snapshot], scheme_order: usize) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InsufficientStencil("no snapshots".into()));
        }
        let grid = snapshots[0].u.grid;
        let mut levels = Vec::with_capacity(snapshots.len());
        for (k, s) in snapshots.iter().enumerate() {
            if s.u.grid != grid || s.u_t.grid != grid {
                return Err(Error::InvalidGrid("snapshots use different grids".into()));
            }
            if k > 0 && s.t <= snapshots[k - 1].t {
                return Err(Error::Config("snapshots must be strictly increasing in time".into()));
            }
            levels.push(Level {
                t: s.t,
                u: s.u.clone(),
                u_t: s.u_t.clone(),
                u_x1: derivative(&s.u, Axis::X1, 1, scheme_order)?,
                u_x2: derivative(&s.u, Axis::X2, 1, scheme_order)?,
            });
        }
        Ok(GoursatSampler { levels })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.levels[0].t, self.levels[self.levels.len() - 1].t)
    }

    /// Range of `xi = t + x1` touched by the stored slices.
    pub fn xi_range(&self) -> (f64, f64) {
        let g = self.levels[0].u.grid;
        let (t0, t1) = self.t_range();
        (t0 + g.x1_min, t1 + g.x1_max)
    }

    /// Samples `u`, `u_xi`, `u_eta`, `u_x2` at every `(xi, eta)` pair and every
    /// `x2` node; cells outside the stored `(t, x1)` window are marked uncovered.
    pub fn sample(&self, xi: &Axis1D, eta: &Axis1D) -> Result<GoursatData> {
        let grid = self.levels[0].u.grid;
        let (lo, hi) = self.xi_range();
        for x in xi.points() {
            if x < lo - 1e-12 || x > hi + 1e-12 {
                return Err(Error::OutsideWedge(x));
            }
        }
        let x2 = Axis1D::new(grid.x2_min, grid.x2_max, grid.n2);
        let mut empty = GoursatSlab::zeros(*xi, *eta, x2);
        empty.covered.fill(false);
        let mut out = GoursatData {
            u: empty.clone(),
            u_xi: empty.clone(),
            u_eta: empty.clone(),
            u_x2: empty,
        };
        let (t0, t1) = self.t_range();
        for a in 0..xi.n {
            for b in 0..eta.n {
                let (x, e) = (xi.at(a), eta.at(b));
                let t = 0.5 * (x + e);
                let x1 = 0.5 * (x - e);
                let eps = 1e-12 * (1.0 + t.abs().max(x1.abs()));
                if t < t0 - eps || t > t1 + eps || x1 < grid.x1_min - eps || x1 > grid.x1_max + eps {
                    continue;
                }
                let (k, wt) = self.time_bracket(t.clamp(t0, t1));
                let h1 = grid.h1();
                let s = ((x1.clamp(grid.x1_min, grid.x1_max) - grid.x1_min) / h1).max(0.0);
                let i = (s.floor() as usize).min(grid.n1 - 2);
                let wx = s - i as f64;
                for c in 0..grid.n2 {
                    let interp = |f: &dyn Fn(&Level) -> &ScalarField| {
                        let at = |lv: &Level| {
                            let fld = f(lv);
                            (1.0 - wx) * fld.at(i, c) + wx * fld.at(i + 1, c)
                        };
                        let lo_v = at(&self.levels[k]);
                        if wt == 0.0 {
                            lo_v
                        } else {
                            (1.0 - wt) * lo_v + wt * at(&self.levels[k + 1])
                        }
                    };
                    let u = interp(&|l| &l.u);
                    let ut = interp(&|l| &l.u_t);
                    let ux1 = interp(&|l| &l.u_x1);
                    let ux2 = interp(&|l| &l.u_x2);
                    let idx = out.u.idx(a, b, c);
                    out.u.values[idx] = u;
                    out.u_xi.values[idx] = 0.5 * (ut + ux1);
                    out.u_eta.values[idx] = 0.5 * (ut - ux1);
                    out.u_x2.values[idx] = ux2;
                    for slab in [&mut out.u, &mut out.u_xi, &mut out.u_eta, &mut out.u_x2] {
                        slab.covered[idx] = true;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Index of the level at or below `t` and the weight of the next one.
    fn time_bracket(&self, t: f64) -> (usize, f64) {
        let n = self.levels.len();
        if n == 1 {
            return (0, 0.0);
        }
        let k = self.levels.partition_point(|l| l.t <= t).saturating_sub(1).min(n - 2);
        let (ta, tb) = (self.levels[k].t, self.levels[k + 1].t);
        (k, ((t - ta) / (tb - ta)).clamp(0.0, 1.0))
    }
}
