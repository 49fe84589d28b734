//! Method-of-lines evolution of a membrane `v = w + u` around a light-speed
//! traveling wave `w = (a x2 + b) F(x1 + s t)`.
//!
//! The state is the perturbation `(u, u_t)`. Each stage builds the 2-jet of
//! `v` node by node and solves the quasilinear form for the time derivative:
//!
//! ```text
//! v_tt = (f − 2 Σ m_ti v_ti − Σ m_ij v_ij) / m_tt
//! ```
//!
//! with `f` an optional forcing. In [`EvolutionMode::Perturbation`] the
//! background part of the jet is exact and only `u` is differenced, so the
//! background stays a discrete solution to rounding. [`EvolutionMode::FullSurface`]
//! differences `v` itself, and [`EvolutionMode::LinearReference`] drops the
//! nonlinearity and the background (`u_tt = Δu + f`).
//!
//! Time stepping is classical RK4 with `dt = cfl · h / c_max`, `c_max` the
//! frozen-coefficient characteristic bound at the start of the step. A ring
//! of boundary nodes as wide as the stencil holds the exact background.
//! Goursat stations `xi = t + x1` are sampled on the fly, one line per time
//! level, so no snapshots are kept for the decay fit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{fit_decay, slice_energy, weight_eta, weight_xi, DecayFit, EnergyReport, SliceData};
use crate::error::{Error, Result};
use crate::extremal::{delta_factor, quasilinear_coeffs, DEGENERACY_MARGIN};
use crate::goursat::Snapshot;
use crate::grid::stencil::Stencil1D;
use crate::grid::{apply_stencil, bump_profile_q, make_bump, sobolev_norm, Axis, Grid2D, PointJet, ScalarField};
use crate::jet::SpacetimeFn;
use crate::profile::WaveProfile;

/// Which equation the stages integrate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    #[default]
    Perturbation,
    FullSurface,
    LinearReference,
}

/// The traveling wave around which `u` is measured.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    #[default]
    None,
    /// `(a x2 + b) F(x1 + sign·t)`.
    Lightspeed {
        a: f64,
        b: f64,
        profile: WaveProfile,
        #[serde(default = "one")]
        sign: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Background {
    /// `F, F', F''` at `x1 + sign·t` for every `x1` column.
    fn columns(&self, grid: &Grid2D, t: f64) -> Vec<[f64; 3]> {
        match self {
            Background::None => vec![[0.0; 3]; grid.n1],
            Background::Lightspeed { profile, sign, .. } => (0..grid.n1)
                .map(|i| {
                    let d = profile.derivs(grid.x1(i) + sign * t);
                    [d[0], d[1], d[2]]
                })
                .collect(),
        }
    }

    /// Cartesian 2-jet from the column values `F, F', F''`.
    fn jet(&self, x2: f64, c: [f64; 3]) -> PointJet {
        match self {
            Background::None => PointJet::default(),
            Background::Lightspeed { a, b, sign, .. } => {
                let amp = a * x2 + b;
                let s = *sign;
                PointJet {
                    value: amp * c[0],
                    d_t: amp * s * c[1],
                    d_x1: amp * c[1],
                    d_x2: a * c[0],
                    d_tt: amp * c[2],
                    d_tx1: amp * s * c[2],
                    d_tx2: a * s * c[1],
                    d_x1x1: amp * c[2],
                    d_x1x2: a * c[1],
                    d_x2x2: 0.0,
                }
            }
        }
    }

    /// Background jet at one point.
    pub fn point_jet(&self, t: f64, x1: f64, x2: f64) -> PointJet {
        match self {
            Background::None => PointJet::default(),
            Background::Lightspeed { profile, sign, .. } => {
                let d = profile.derivs(x1 + sign * t);
                self.jet(x2, [d[0], d[1], d[2]])
            }
        }
    }

    fn is_none(&self) -> bool {
        matches!(self, Background::None)
    }
}

/// A radial bump `exp(−1/(1 − (r²/R²)^p))`, rescaled to peak `weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "one_u32")]
    pub smoothness: u32,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one_u32() -> u32 {
    1
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec {
            center: [0.0, 0.0],
            radius: 1.0,
            smoothness: 1,
            weight: 1.0,
        }
    }
}

impl BumpSpec {
    fn field(&self, grid: Grid2D) -> Result<ScalarField> {
        let r = (self.center[0].powi(2) + self.center[1].powi(2)).sqrt();
        if r + self.radius > 1.0 + 1e-12 {
            return Err(Error::SupportViolation(format!(
                "Cauchy data must be supported in |x| <= 1 (center {:?}, radius {})",
                self.center, self.radius
            )));
        }
        // the profile peaks at exp(-1)
        let peak = bump_profile_q(0.0, self.smoothness)[0];
        make_bump(grid, (self.center[0], self.center[1]), self.radius, self.weight / peak, self.smoothness)
    }
}

/// Unit-peak shapes of `u(0)` and `u_t(0)`; the data are `ε` times these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CauchyData {
    pub f: Option<BumpSpec>,
    pub g: Option<BumpSpec>,
}

impl Default for CauchyData {
    fn default() -> Self {
        CauchyData {
            f: Some(BumpSpec::default()),
            g: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub grid: Grid2D,
    pub t_end: f64,
    pub cfl: f64,
    pub scheme_order: usize,
    pub mode: EvolutionMode,
    pub background: Background,
    pub epsilon: f64,
    pub data: CauchyData,
    /// Time between diagnostic emissions.
    pub emit_every: f64,
    /// Times at which full snapshots are kept.
    pub dump_times: Vec<f64>,
    /// Goursat stations; `None` gives 8 geometric points in `[5, 40]·t_end/20`.
    pub stations: Option<Vec<f64>>,
    /// Support threshold relative to the initial `max(sup|u|, sup|u_t|)`.
    pub support_rel_threshold: f64,
    /// Absolute floor of the support threshold.
    pub support_abs_threshold: f64,
    /// `Γ` letters in the slice energy proxy, 0 or 1.
    pub energy_s: usize,
    /// `δ` of the weighted sup.
    pub delta: f64,
    /// Sobolev index `s` of the reported data norm `‖f‖_{H^{s+1}} + ‖g‖_{H^s}`.
    pub norm_order: u32,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            grid: Grid2D::square(24.0, 257).expect("valid default grid"),
            t_end: 20.0,
            cfl: 0.4,
            scheme_order: 4,
            mode: EvolutionMode::Perturbation,
            background: Background::Lightspeed {
                a: 0.0,
                b: 1.0,
                profile: WaveProfile::Sech {
                    amplitude: 0.5,
                    shift: 0.0,
                },
                sign: 1.0,
            },
            epsilon: 1e-3,
            data: CauchyData::default(),
            emit_every: 1.0,
            dump_times: Vec::new(),
            stations: None,
            support_rel_threshold: 1e-2,
            support_abs_threshold: 1e-12,
            energy_s: 1,
            delta: 0.1,
            norm_order: 1,
            max_steps: 1_000_000,
        }
    }
}

impl SimConfig {
    /// Boundary ring width in cells.
    pub fn ring(&self) -> usize {
        (2 + self.scheme_order - 1) / 2
    }

    pub fn h(&self) -> f64 {
        self.grid.h1().max(self.grid.h2())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config("cfl must lie in (0, 1]".into()));
        }
        if self.scheme_order != 2 && self.scheme_order != 4 {
            return Err(Error::Config("scheme_order must be 2 or 4".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be finite and >= 0".into()));
        }
        if !(self.emit_every > 0.0) {
            return Err(Error::Config("emit_every must be positive".into()));
        }
        if self.energy_s > 1 {
            return Err(Error::Config("energy_s must be 0 or 1".into()));
        }
        if let Background::Lightspeed { sign, .. } = &self.background {
            if *sign != 1.0 && *sign != -1.0 {
                return Err(Error::Config("background sign must be +1 or -1".into()));
            }
        }
        let margin = (self.ring() + 1) as f64 * self.h();
        let need = self.t_end + 1.0 + margin;
        if self.grid.half_width() < need {
            return Err(Error::Config(format!(
                "domain half-width {} is below t_end + 1 + margin = {need}",
                self.grid.half_width()
            )));
        }
        Ok(())
    }

    /// Default stations: 8 geometric points in `[5, 40]` scaled by `t_end / 20`.
    pub fn station_list(&self) -> Vec<f64> {
        match &self.stations {
            Some(s) => s.clone(),
            None => {
                let k = self.t_end / 20.0;
                (0..8).map(|i| k * 5.0 * 8f64.powf(i as f64 / 7.0)).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: ScalarField,
    pub u_t: ScalarField,
    pub step_count: usize,
    pub min_delta_seen: f64,
}

impl SimState {
    pub fn from_fields(t: f64, u: ScalarField, u_t: ScalarField) -> Self {
        SimState {
            t,
            u,
            u_t,
            step_count: 0,
            min_delta_seen: f64::INFINITY,
        }
    }
}

/// Forcing added to the membrane equation, as a function of `(t, x1, x2)`.
pub type Forcing = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Forcing that makes `sol + background` an exact solution.
pub fn manufactured_forcing(sol: Arc<dyn SpacetimeFn + Send + Sync>, background: Background) -> Forcing {
    Arc::new(move |t, x1, x2| {
        let p = [t, x1, x2];
        let v = PointJet::from(&sol.jet(p, 2)) + background.point_jet(t, x1, x2);
        quasilinear_coeffs(&v).apply(&v)
    })
}

/// Data norm and initial state.
pub fn init_cauchy(cfg: &SimConfig) -> Result<(SimState, f64)> {
    cfg.validate()?;
    let g = cfg.grid;
    let shape = |b: &Option<BumpSpec>| -> Result<ScalarField> {
        match b {
            Some(b) => Ok(b.field(g)?.scaled(cfg.epsilon)),
            None => Ok(ScalarField::zeros(g, 0.0)),
        }
    };
    let (u, u_t) = (shape(&cfg.data.f)?, shape(&cfg.data.g)?);
    let norm = sobolev_norm(&[(u.clone(), u_t.clone())], cfg.norm_order)?;
    Ok((SimState::from_fields(0.0, u, u_t), norm))
}

struct Stencils {
    d1: [Stencil1D; 2],
    d2: [Stencil1D; 2],
}

/// Output of one stage evaluation.
struct Accel {
    a: ScalarField,
    min_delta: f64,
    c_max: f64,
}

pub struct Evolver {
    cfg: SimConfig,
    forcing: Option<Forcing>,
    st: Stencils,
}

/// Diagnostics at one emission time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub t: f64,
    pub step: usize,
    pub sup_u: f64,
    pub sup_u_t: f64,
    pub min_delta: f64,
    pub support_radius: f64,
    pub support_bound: f64,
    pub support_ok: bool,
    pub energy_proxy: f64,
    /// `∫ (1 + |∇v|²)/√Δ`, reported without a background only.
    pub hamiltonian: Option<f64>,
    /// The same integral minus the area of the grid.
    pub excess_hamiltonian: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub data_norm: f64,
    pub max_sup_u: f64,
    pub min_delta: f64,
    pub energy_ratio_max: f64,
    pub hamiltonian_drift: Option<f64>,
    pub excess_hamiltonian_drift: Option<f64>,
    pub support_ok: bool,
    pub cone_violations: usize,
    pub decay_fit: Option<DecayFit>,
}

pub struct RunOutput {
    pub summary: RunSummary,
    pub emissions: Vec<Emission>,
    pub stations: Vec<EnergyReport>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
}

/// Running Goursat diagnostics on one `xi` line.
struct Station {
    report: EnergyReport,
    covered: bool,
    // eta and the line integrals at the previous time level
    last: Option<(f64, f64, f64)>,
}

impl Evolver {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.grid;
        let o = cfg.scheme_order;
        let st = Stencils {
            d1: [Stencil1D::new(g.n1, g.h1(), 1, o)?, Stencil1D::new(g.n2, g.h2(), 1, o)?],
            d2: [Stencil1D::new(g.n1, g.h1(), 2, o)?, Stencil1D::new(g.n2, g.h2(), 2, o)?],
        };
        Ok(Evolver { cfg, forcing: None, st })
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    fn d(&self, f: &ScalarField, axis: Axis, order: usize) -> ScalarField {
        let k = if axis == Axis::X1 { 0 } else { 1 };
        let st = if order == 1 { &self.st.d1[k] } else { &self.st.d2[k] };
        apply_stencil(f, axis, st)
    }

    fn in_ring(&self, i: usize, j: usize) -> bool {
        let (r, g) = (self.cfg.ring(), &self.cfg.grid);
        i < r || j < r || i + r >= g.n1 || j + r >= g.n2
    }

    /// Time derivative of `w_t` for the evolved variable `w` at time `t`.
    fn accel(&self, t: f64, w: &ScalarField, wt: &ScalarField, step: usize) -> Result<Accel> {
        let g = self.cfg.grid;
        let mode = self.cfg.mode;
        let w1 = self.d(w, Axis::X1, 1);
        let w2 = self.d(w, Axis::X2, 1);
        let w11 = self.d(w, Axis::X1, 2);
        let w22 = self.d(w, Axis::X2, 2);
        let w12 = self.d(&w1, Axis::X2, 1);
        let wt1 = self.d(wt, Axis::X1, 1);
        let wt2 = self.d(wt, Axis::X2, 1);
        let bg = &self.cfg.background;
        let cols = bg.columns(&g, t);
        let mut out = ScalarField::zeros(g, t);
        let (mut min_delta, mut c_max) = (f64::INFINITY, 1.0f64);
        for i in 0..g.n1 {
            let x1 = g.x1(i);
            for j in 0..g.n2 {
                let x2 = g.x2(j);
                let k = g.idx(i, j);
                let b = bg.jet(x2, cols[i]);
                if self.in_ring(i, j) {
                    out.values[k] = if mode == EvolutionMode::FullSurface { b.d_tt } else { 0.0 };
                    continue;
                }
                let f = self.forcing.as_ref().map_or(0.0, |f| f(t, x1, x2));
                let jw = PointJet {
                    value: w.values[k],
                    d_t: wt.values[k],
                    d_x1: w1.values[k],
                    d_x2: w2.values[k],
                    d_tt: 0.0,
                    d_tx1: wt1.values[k],
                    d_tx2: wt2.values[k],
                    d_x1x1: w11.values[k],
                    d_x1x2: w12.values[k],
                    d_x2x2: w22.values[k],
                };
                let acc = if mode == EvolutionMode::LinearReference {
                    jw.d_x1x1 + jw.d_x2x2 + f
                } else {
                    let v = if mode == EvolutionMode::Perturbation { jw + b } else { jw };
                    let delta = delta_factor(&v);
                    if delta.is_nan() {
                        return Err(Error::NonFinite(step));
                    }
                    if delta <= DEGENERACY_MARGIN {
                        return Err(Error::DegenerateSurface { step, delta });
                    }
                    min_delta = min_delta.min(delta);
                    let m = quasilinear_coeffs(&v);
                    c_max = c_max.max(m.max_speed());
                    let v_tt = (f - m.spatial_part(&v)) / m.m_tt;
                    if mode == EvolutionMode::Perturbation {
                        v_tt - b.d_tt
                    } else {
                        v_tt
                    }
                };
                if !acc.is_finite() {
                    return Err(Error::NonFinite(step));
                }
                out.values[k] = acc;
            }
        }
        if mode == EvolutionMode::LinearReference {
            min_delta = 1.0;
        }
        Ok(Accel { a: out, min_delta, c_max })
    }

    /// Background sampled on the grid at time `t`; zero without a background.
    fn background_fields(&self, t: f64) -> (ScalarField, ScalarField) {
        let g = self.cfg.grid;
        let bg = &self.cfg.background;
        let cols = bg.columns(&g, t);
        let mut v = ScalarField::zeros(g, t);
        let mut vt = ScalarField::zeros(g, t);
        if !bg.is_none() {
            for i in 0..g.n1 {
                for j in 0..g.n2 {
                    let b = bg.jet(g.x2(j), cols[i]);
                    let k = g.idx(i, j);
                    v.values[k] = b.value;
                    vt.values[k] = b.d_t;
                }
            }
        }
        (v, vt)
    }

    /// One RK4 step of length at most `dt_max`; returns the step length used.
    pub fn step(&self, s: &SimState, dt_max: f64) -> Result<(SimState, f64)> {
        let full = self.cfg.mode == EvolutionMode::FullSurface;
        let (w, wt) = if full {
            let (bv, bvt) = self.background_fields(s.t);
            (add(&s.u, &bv, 1.0), add(&s.u_t, &bvt, 1.0))
        } else {
            (s.u.clone(), s.u_t.clone())
        };
        let step = s.step_count;
        let k1 = self.accel(s.t, &w, &wt, step)?;
        let dt = (self.cfg.cfl * self.cfg.grid.h1().min(self.cfg.grid.h2()) / k1.c_max).min(dt_max);
        let w2 = add(&w, &wt, 0.5 * dt);
        let wt2 = add(&wt, &k1.a, 0.5 * dt);
        let k2 = self.accel(s.t + 0.5 * dt, &w2, &wt2, step)?;
        let w3 = add(&w, &wt2, 0.5 * dt);
        let wt3 = add(&wt, &k2.a, 0.5 * dt);
        let k3 = self.accel(s.t + 0.5 * dt, &w3, &wt3, step)?;
        let w4 = add(&w, &wt3, dt);
        let wt4 = add(&wt, &k3.a, dt);
        let k4 = self.accel(s.t + dt, &w4, &wt4, step)?;
        let g = self.cfg.grid;
        let mut nw = w.clone();
        let mut nwt = wt.clone();
        for k in 0..g.len() {
            nw.values[k] += dt / 6.0 * (wt.values[k] + 2.0 * wt2.values[k] + 2.0 * wt3.values[k] + wt4.values[k]);
            nwt.values[k] += dt / 6.0 * (k1.a.values[k] + 2.0 * k2.a.values[k] + 2.0 * k3.a.values[k] + k4.a.values[k]);
        }
        let t = s.t + dt;
        let (mut u, mut u_t) = if full {
            let (bv, bvt) = self.background_fields(t);
            (add(&nw, &bv, -1.0), add(&nwt, &bvt, -1.0))
        } else {
            (nw, nwt)
        };
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                if self.in_ring(i, j) {
                    let k = g.idx(i, j);
                    u.values[k] = 0.0;
                    u_t.values[k] = 0.0;
                }
            }
        }
        u.time_label = t;
        u_t.time_label = t;
        if !u.is_finite() || !u_t.is_finite() {
            return Err(Error::NonFinite(step));
        }
        let min_delta = [k1.min_delta, k2.min_delta, k3.min_delta, k4.min_delta]
            .into_iter()
            .fold(s.min_delta_seen, f64::min);
        Ok((
            SimState {
                t,
                u,
                u_t,
                step_count: step + 1,
                min_delta_seen: min_delta,
            },
            dt,
        ))
    }

    /// `u_tt`, `min Δ` of the current state, as the perturbation-mode stage sees it.
    fn perturbation_accel(&self, s: &SimState) -> Result<Accel> {
        if self.cfg.mode == EvolutionMode::LinearReference {
            return self.accel(s.t, &s.u, &s.u_t, s.step_count);
        }
        let pert = Evolver {
            cfg: SimConfig {
                mode: EvolutionMode::Perturbation,
                ..self.cfg.clone()
            },
            forcing: self.forcing.clone(),
            st: Stencils {
                d1: self.st.d1.clone(),
                d2: self.st.d2.clone(),
            },
        };
        pert.accel(s.t, &s.u, &s.u_t, s.step_count)
    }

    fn threshold(&self, s0: &SimState) -> f64 {
        let scale = s0.u.sup_abs().max(s0.u_t.sup_abs());
        (self.cfg.support_rel_threshold * scale).max(self.cfg.support_abs_threshold)
    }

    fn emission(&self, s: &SimState, tau: f64) -> Result<Emission> {
        let acc = self.perturbation_accel(s)?;
        let energy = slice_energy(
            &SliceData {
                t: s.t,
                u: &s.u,
                u_t: &s.u_t,
                u_tt: Some(&acc.a),
            },
            self.cfg.energy_s,
            self.cfg.scheme_order,
        )?;
        let excess = if self.cfg.background.is_none() {
            Some(self.hamiltonian(s))
        } else {
            None
        };
        let g = self.cfg.grid;
        let area = (g.x1_max - g.x1_min) * (g.x2_max - g.x2_min);
        let radius = s.u.support_radius(tau).max(s.u_t.support_radius(tau));
        let bound = s.t + 1.0 + 2.0 * self.cfg.h();
        Ok(Emission {
            t: s.t,
            step: s.step_count,
            sup_u: s.u.sup_abs(),
            sup_u_t: s.u_t.sup_abs(),
            min_delta: acc.min_delta,
            support_radius: radius,
            support_bound: bound,
            support_ok: radius <= bound,
            energy_proxy: energy,
            hamiltonian: excess.map(|e| e + area),
            excess_hamiltonian: excess,
        })
    }

    /// `∫ ((1 + |∇u|²)/√Δ − 1)`, the energy above the flat membrane.
    pub fn hamiltonian(&self, s: &SimState) -> f64 {
        let u1 = self.d(&s.u, Axis::X1, 1);
        let u2 = self.d(&s.u, Axis::X2, 1);
        let mut dens = ScalarField::zeros(self.cfg.grid, s.t);
        for k in 0..dens.values.len() {
            let grad2 = u1.values[k].powi(2) + u2.values[k].powi(2);
            let delta = 1.0 + grad2 - s.u_t.values[k].powi(2);
            dens.values[k] = (1.0 + grad2) / delta.sqrt() - 1.0;
        }
        dens.integrate()
    }

    /// Samples every station line at the current time level and counts cone violations.
    fn sample_goursat(&self, s: &SimState, stations: &mut [Station], tau: f64) -> usize {
        let g = self.cfg.grid;
        let o = self.cfg.scheme_order;
        let u1 = self.d(&s.u, Axis::X1, 1);
        let u2 = self.d(&s.u, Axis::X2, 1);
        let _ = o;
        let (_, w2) = g.trapezoid_weights();
        let t = s.t;
        for st in stations.iter_mut() {
            let xi = st.report.xi_station;
            let x1 = xi - t;
            if x1 < g.x1_min || x1 > g.x1_max {
                continue;
            }
            let pos = (x1 - g.x1_min) / g.h1();
            let i = (pos.floor() as usize).min(g.n1 - 2);
            let wx = pos - i as f64;
            let eta = 2.0 * t - xi;
            let (wxi, weta) = if 2.0 + eta > 0.0 && 2.0 + xi > 0.0 {
                (weight_xi(xi, eta), weight_eta(xi, eta))
            } else {
                (0.0, 0.0)
            };
            let lerp = |f: &ScalarField, j: usize| (1.0 - wx) * f.at(i, j) + wx * f.at(i + 1, j);
            let (mut line_es, mut line_big) = (0.0, 0.0);
            let r = &mut st.report;
            for j in 0..g.n2 {
                let (u, ut, ux1, ux2) = (lerp(&s.u, j), lerp(&s.u_t, j), lerp(&u1, j), lerp(&u2, j));
                let (uxi, ueta) = (0.5 * (ut + ux1), 0.5 * (ut - ux1));
                line_es += w2[j] * (ueta * ueta + ux2 * ux2);
                line_big += w2[j] * ((ueta * ueta + ux2 * ux2) * wxi + (uxi * uxi + ux2 * ux2) * weta);
                r.sup_u = r.sup_u.max(u.abs());
                r.sup_u_eta = r.sup_u_eta.max(ueta.abs());
                r.sup_u_xi = r.sup_u_xi.max(uxi.abs());
                r.sup_u_x2 = r.sup_u_x2.max(ux2.abs());
                if u.abs() > tau {
                    r.support_radius_x2 = r.support_radius_x2.max(g.x2(j).abs());
                }
            }
            if let Some((e0, a0, b0)) = st.last {
                // d(eta) = 2 dt along the station line
                r.es_proxy += 0.5 * (a0 + line_es) * (eta - e0);
                r.es_big_proxy += 0.5 * (b0 + line_big) * (eta - e0);
            }
            st.last = Some((eta, line_es, line_big));
            st.covered = true;
        }
        // cone |x2| <= sqrt((2 + xi)(2 + eta)) with one cell of slack
        let h = self.cfg.h();
        let mut bad = 0;
        for i in 0..g.n1 {
            let x1 = g.x1(i);
            let prod = (2.0 + t + x1) * (2.0 + t - x1);
            for j in 0..g.n2 {
                if s.u.at(i, j).abs() > tau {
                    let x2 = g.x2(j).abs();
                    if prod < 0.0 || x2 > prod.sqrt() + h {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    /// Integrates from the Cauchy data to `t_end`.
    pub fn run(&self) -> Result<RunOutput> {
        let (s0, norm) = init_cauchy(&self.cfg)?;
        self.run_from(s0, norm)
    }

    /// Integrates from `s0` to `t_end`, emitting every `emit_every`.
    pub fn run_from(&self, s0: SimState, data_norm: f64) -> Result<RunOutput> {
        let cfg = &self.cfg;
        let tau = self.threshold(&s0);
        let mut stations: Vec<Station> = cfg
            .station_list()
            .into_iter()
            .map(|xi| Station {
                report: EnergyReport {
                    xi_station: xi,
                    ..Default::default()
                },
                covered: false,
                last: None,
            })
            .collect();
        let mut dumps: Vec<f64> = cfg.dump_times.iter().cloned().filter(|t| *t >= s0.t && *t <= cfg.t_end).collect();
        dumps.sort_by(|a, b| a.total_cmp(b));
        let mut snapshots = Vec::new();
        let mut emissions = vec![self.emission(&s0, tau)?];
        let mut cone_violations = self.sample_goursat(&s0, &mut stations, tau);
        if dumps.first().is_some_and(|d| (d - s0.t).abs() < 1e-12) {
            snapshots.push(snapshot(&s0));
            dumps.remove(0);
        }
        let mut s = s0;
        let mut next_emit = s.t + cfg.emit_every;
        let eps_t = 1e-12 * cfg.t_end.max(1.0);
        while s.t < cfg.t_end - eps_t {
            if s.step_count >= cfg.max_steps {
                return Err(Error::Config(format!("max_steps = {} reached at t = {}", cfg.max_steps, s.t)));
            }
            let mut target = next_emit.min(cfg.t_end);
            if let Some(d) = dumps.first() {
                target = target.min(*d);
            }
            let (ns, _) = self.step(&s, target - s.t)?;
            s = ns;
            cone_violations += self.sample_goursat(&s, &mut stations, tau);
            if (s.t - target).abs() <= eps_t {
                s.t = target;
                if dumps.first().is_some_and(|d| (d - s.t).abs() <= eps_t) {
                    snapshots.push(snapshot(&s));
                    dumps.remove(0);
                }
                if (s.t - next_emit).abs() <= eps_t || (s.t - cfg.t_end).abs() <= eps_t {
                    emissions.push(self.emission(&s, tau)?);
                    next_emit += cfg.emit_every;
                }
            }
        }
        let delta = cfg.delta;
        let reports: Vec<EnergyReport> = stations
            .into_iter()
            .filter(|st| st.covered)
            .map(|mut st| {
                st.report.etildes_proxy = (2.0 + st.report.xi_station).powf(-delta) * st.report.sup_u;
                st.report
            })
            .collect();
        let decay_fit = fit_decay(&reports.iter().map(|r| (r.xi_station, r.sup_u)).collect::<Vec<_>>()).ok();
        let e0 = emissions[0].energy_proxy;
        let energy_ratio_max = if e0 > 0.0 {
            emissions.iter().map(|e| e.energy_proxy / e0).fold(0.0, f64::max)
        } else {
            0.0
        };
        let drift = |get: fn(&Emission) -> Option<f64>| {
            get(&emissions[0]).map(|h0| {
                emissions
                    .iter()
                    .filter_map(get)
                    .map(|h| if h0 == 0.0 { h.abs() } else { ((h - h0) / h0).abs() })
                    .fold(0.0, f64::max)
            })
        };
        let hamiltonian_drift = drift(|e| e.hamiltonian);
        let excess_hamiltonian_drift = drift(|e| e.excess_hamiltonian);
        let summary = RunSummary {
            steps: s.step_count,
            t_final: s.t,
            data_norm,
            max_sup_u: emissions.iter().map(|e| e.sup_u).fold(0.0, f64::max),
            min_delta: s.min_delta_seen.min(emissions.iter().map(|e| e.min_delta).fold(f64::INFINITY, f64::min)),
            energy_ratio_max,
            hamiltonian_drift,
            excess_hamiltonian_drift,
            support_ok: emissions.iter().all(|e| e.support_ok),
            cone_violations,
            decay_fit,
        };
        Ok(RunOutput {
            summary,
            emissions,
            stations: reports,
            snapshots,
            final_state: s,
        })
    }
}

fn snapshot(s: &SimState) -> Snapshot {
    Snapshot {
        t: s.t,
        u: s.u.clone(),
        u_t: s.u_t.clone(),
    }
}

fn add(a: &ScalarField, b: &ScalarField, s: f64) -> ScalarField {
    let mut out = a.clone();
    for (o, v) in out.values.iter_mut().zip(&b.values) {
        *o += s * v;
    }
    out
}
