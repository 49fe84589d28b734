//! Exact traveling-wave solutions of the membrane equation.
//!
//! Every family is a finite sum of ridge terms
//! `(α·X + β)·G(ℓ·X + ℓ₀)` in spacetime variables `X = (t, x_1, …, x_n)`,
//! which gives closed-form gradients and Hessians in any dimension and exact
//! jets when `n = 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{conservative_operator, membrane_residual};
use crate::grid::{Axis1D, Grid2D, PointJet, TimeStack};
use crate::jet::{Jet, SpacetimeFn};
use crate::profile::WaveProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    AffineSubluminal,
    LightspeedProduct,
    LightspeedSum,
    Superluminal,
}

#[derive(Clone, Debug, PartialEq)]
struct RidgeTerm {
    amp_grad: Vec<f64>,
    amp_const: f64,
    dir: Vec<f64>,
    offset: f64,
    profile: WaveProfile,
}

impl RidgeTerm {
    fn dot(a: &[f64], x: &[f64]) -> f64 {
        a.iter().zip(x).map(|(p, q)| p * q).sum()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let amp = Self::dot(&self.amp_grad, x) + self.amp_const;
        amp * self.profile.eval(Self::dot(&self.dir, x) + self.offset)
    }

    fn accumulate(&self, x: &[f64], grad: &mut [f64], hess: &mut [Vec<f64>]) {
        let amp = Self::dot(&self.amp_grad, x) + self.amp_const;
        let d = self.profile.derivs(Self::dot(&self.dir, x) + self.offset);
        let n = x.len();
        for i in 0..n {
            grad[i] += self.amp_grad[i] * d[0] + amp * d[1] * self.dir[i];
            for j in 0..n {
                hess[i][j] += d[1] * (self.amp_grad[i] * self.dir[j] + self.dir[i] * self.amp_grad[j])
                    + amp * d[2] * self.dir[i] * self.dir[j];
            }
        }
    }

    fn jet(&self, p: [f64; 3], order: usize) -> Jet {
        let a = |v: &[f64], c: f64| {
            let grad = [v[0], v[1], v[2]];
            Jet::affine(order, Self::dot(v, &p) + c, grad)
        };
        let amp = a(&self.amp_grad, self.amp_const);
        let arg = a(&self.dir, self.offset);
        &amp * &self.profile.compose(&arg)
    }
}

/// An exact solution `v(t, x)` in `n` spatial dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct TravelingWaveSolution {
    pub kind: SolutionKind,
    pub dim: usize,
    pub coeffs: Vec<f64>,
    pub profiles: Vec<WaveProfile>,
    pub sign: f64,
    pub speed: f64,
    terms: Vec<RidgeTerm>,
}

/// Relative tolerance of the construction-time residual check.
const CONSTRUCTION_TOL: f64 = 1e-9;

impl TravelingWaveSolution {
    fn build(
        kind: SolutionKind,
        dim: usize,
        coeffs: Vec<f64>,
        profiles: Vec<WaveProfile>,
        sign: f64,
        speed: f64,
        terms: Vec<RidgeTerm>,
    ) -> Result<Self> {
        let sol = TravelingWaveSolution {
            kind,
            dim,
            coeffs,
            profiles,
            sign,
            speed,
            terms,
        };
        sol.check_on_lattice()?;
        Ok(sol)
    }

    /// `v` at time `t` and spatial point `x`.
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let p = self.spacetime(t, x);
        self.terms.iter().map(|r| r.eval(&p)).sum()
    }

    fn spacetime(&self, t: f64, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "spatial dimension mismatch");
        let mut p = Vec::with_capacity(self.dim + 1);
        p.push(t);
        p.extend_from_slice(x);
        p
    }

    /// Gradient and Hessian in `(t, x_1, …, x_n)`.
    pub fn grad_hess(&self, t: f64, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let p = self.spacetime(t, x);
        let n = p.len();
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        for r in &self.terms {
            r.accumulate(&p, &mut g, &mut h);
        }
        (g, h)
    }

    /// Conservative membrane residual from the closed-form 2-jet.
    pub fn residual(&self, t: f64, x: &[f64]) -> Result<f64> {
        let (g, h) = self.grad_hess(t, x);
        conservative_operator(&g, &h, &spacetime_signs(self.dim))
    }

    fn check_on_lattice(&self) -> Result<()> {
        let coords = [-1.0, 0.4, 1.3];
        let total = 3usize.pow(self.dim as u32);
        for t in [0.0, 0.7] {
            for k in 0..total {
                let mut rest = k;
                let x: Vec<f64> = (0..self.dim)
                    .map(|_| {
                        let c = coords[rest % 3];
                        rest /= 3;
                        c
                    })
                    .collect();
                let (_, h) = self.grad_hess(t, &x);
                let scale = h.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let r = self.residual(t, &x)?;
                if !r.is_finite() || r.abs() > CONSTRUCTION_TOL * (1.0 + scale) {
                    return Err(Error::NotASolution(r));
                }
            }
        }
        Ok(())
    }
}

impl SpacetimeFn for TravelingWaveSolution {
    /// Only defined for two spatial dimensions.
    fn jet(&self, p: [f64; 3], order: usize) -> Jet {
        assert_eq!(self.dim, 2, "jets are available for two spatial dimensions only");
        self.terms
            .iter()
            .fold(Jet::zero(order), |acc, r| &acc + &r.jet(p, order))
    }

    fn eval(&self, p: [f64; 3]) -> f64 {
        TravelingWaveSolution::eval(self, p[0], &p[1..])
    }
}

fn spacetime_signs(dim: usize) -> Vec<f64> {
    let mut s = vec![-1.0; dim + 1];
    s[0] = 1.0;
    s
}

fn unit(len: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[i] = scale;
    v
}

/// `(a·x2 + b)·F(x1 + sign·t)`.
pub fn lightspeed_solution(
    a: f64,
    b: f64,
    profile: WaveProfile,
    sign: f64,
) -> Result<TravelingWaveSolution> {
    let sign = sign.signum();
    let term = RidgeTerm {
        amp_grad: vec![0.0, 0.0, a],
        amp_const: b,
        dir: vec![sign, 1.0, 0.0],
        offset: 0.0,
        profile: profile.clone(),
    };
    TravelingWaveSolution::build(
        SolutionKind::LightspeedProduct,
        2,
        vec![a, b],
        vec![profile.clone(), profile],
        sign,
        1.0,
        vec![term],
    )
}

/// `Σ_{k<n} a_k x_k F_k(x_n + sign·t) + b·F_n(x_n + sign·t)` with
/// `coeffs = (a_1, …, a_{n−1}, b)`.
pub fn lightspeed_sum_solution(
    coeffs: &[f64],
    profiles: &[WaveProfile],
    sign: f64,
    n: usize,
) -> Result<TravelingWaveSolution> {
    if !(1..=4).contains(&n) || coeffs.len() != n || profiles.len() != n {
        return Err(Error::Config(format!(
            "light-speed sum needs 1 <= n <= 4 with n coefficients and n profiles (n = {n})"
        )));
    }
    let sign = sign.signum();
    let len = n + 1;
    let mut dir = unit(len, n, 1.0);
    dir[0] = sign;
    let terms = (0..n)
        .map(|k| RidgeTerm {
            amp_grad: if k + 1 < n {
                unit(len, k + 1, coeffs[k])
            } else {
                vec![0.0; len]
            },
            amp_const: if k + 1 < n { 0.0 } else { coeffs[k] },
            dir: dir.clone(),
            offset: 0.0,
            profile: profiles[k].clone(),
        })
        .collect();
    let kind = if profiles.windows(2).all(|w| w[0] == w[1]) {
        SolutionKind::LightspeedProduct
    } else {
        SolutionKind::LightspeedSum
    };
    TravelingWaveSolution::build(kind, n, coeffs.to_vec(), profiles.to_vec(), sign, 1.0, terms)
}

/// `a_1 x_1 + … + a_{n−1} x_{n−1} + a_n (x_n − c t)/√(1 − c²) + b` in
/// `n = a.len()` spatial dimensions.
pub fn affine_subluminal_solution(a: &[f64], b: f64, c: f64) -> Result<TravelingWaveSolution> {
    if c.abs() >= 1.0 {
        return Err(Error::NotSubluminal(c.abs()));
    }
    let n = a.len();
    if n == 0 || n > 4 {
        return Err(Error::Config(format!("affine family needs 1..=4 coefficients, got {n}")));
    }
    let gamma = 1.0 / (1.0 - c * c).sqrt();
    let mut dir = vec![0.0; n + 1];
    dir[1..].copy_from_slice(a);
    dir[n] = a[n - 1] * gamma;
    dir[0] = -c * a[n - 1] * gamma;
    let term = RidgeTerm {
        amp_grad: vec![0.0; n + 1],
        amp_const: 1.0,
        dir,
        offset: b,
        profile: WaveProfile::Linear { slope: 1.0 },
    };
    let mut coeffs = a.to_vec();
    coeffs.push(b);
    TravelingWaveSolution::build(
        SolutionKind::AffineSubluminal,
        n,
        coeffs,
        vec![],
        1.0,
        c,
        vec![term],
    )
}

/// `Φ(x1 + sign·(x2 − c t)/√(c² − 1))` for `c > 1`.
pub fn superluminal_solution(c: f64, profile: WaveProfile, sign: f64) -> Result<TravelingWaveSolution> {
    if c <= 1.0 {
        return Err(Error::NotSuperluminal(c));
    }
    let sign = sign.signum();
    let r = (c * c - 1.0).sqrt();
    let term = RidgeTerm {
        amp_grad: vec![0.0; 3],
        amp_const: 1.0,
        dir: vec![-sign * c / r, 1.0, sign / r],
        offset: 0.0,
        profile: profile.clone(),
    };
    TravelingWaveSolution::build(
        SolutionKind::Superluminal,
        2,
        vec![],
        vec![profile],
        sign,
        c,
        vec![term],
    )
}

/// The orthogonal map `x̃ = M x` that turns the superluminal wave into a
/// light-speed wave in `x̃_1`:
/// `x1 + (x2 − c t)/√(c² − 1) = √(c²/(c² − 1))·(x̃_1 − t)`.
pub fn superluminal_rotation(c: f64) -> Result<[[f64; 2]; 2]> {
    if c <= 1.0 {
        return Err(Error::NotSuperluminal(c));
    }
    let r = (c * c - 1.0).sqrt() / c;
    let s = 1.0 / c;
    Ok([[r, s], [s, -r]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subluminal,
    Lightspeed,
    Superluminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReductionReport {
    /// Largest full-equation residual over the lattice.
    pub max_full: f64,
    /// Largest reduced-equation residual.
    pub max_reduced: f64,
    /// Largest disagreement between the full residual and the reduced one
    /// mapped back (`full = −reduced` for `|c| <= 1`, `full = reduced` for `c > 1`).
    pub max_mismatch: f64,
}

/// Compares the full membrane residual of `v = f(x1, x2 − c t)` with the
/// reduced equation in `x'_2 = (x2 − c t)/√|1 − c²|` (or in `x1` alone at
/// `|c| = 1`).
///
/// `f(x1, y, order)` returns the jet of `f` in variables `(x1, y, ·)`.
pub fn reduction_residual(
    regime: Regime,
    c: f64,
    f: &dyn Fn(f64, f64, usize) -> Jet,
    points: &[[f64; 3]],
) -> Result<ReductionReport> {
    let consistent = match regime {
        Regime::Subluminal => c.abs() < 1.0,
        Regime::Lightspeed => (c.abs() - 1.0).abs() < 1e-12,
        Regime::Superluminal => c.abs() > 1.0,
    };
    if !consistent {
        let name = match regime {
            Regime::Subluminal => "subluminal",
            Regime::Lightspeed => "lightspeed",
            Regime::Superluminal => "superluminal",
        };
        return Err(Error::RegimeMismatch { regime: name, c });
    }
    let mut report = ReductionReport {
        max_full: 0.0,
        max_reduced: 0.0,
        max_mismatch: 0.0,
    };
    for &[t, x1, x2] in points {
        let fj = f(x1, x2 - c * t, 2);
        // old (x1, y) in terms of new (t, x1, x2)
        let v = fj.substitute([[0.0, 1.0, 0.0], [-c, 0.0, 1.0], [0.0, 0.0, 0.0]]);
        let full = membrane_residual(&PointJet::from(&v))?;
        let (reduced, mapped) = match regime {
            Regime::Lightspeed => {
                let r = -conservative_operator(&[fj.d(0)], &[vec![fj.dd(0, 0)]], &[-1.0])?;
                (r, -r)
            }
            Regime::Subluminal | Regime::Superluminal => {
                let s = (1.0 - c * c).abs().sqrt();
                let g = fj.substitute([[1.0, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 0.0]]);
                let grad = [g.d(0), g.d(1)];
                let hess = vec![vec![g.dd(0, 0), g.dd(0, 1)], vec![g.dd(0, 1), g.dd(1, 1)]];
                if regime == Regime::Subluminal {
                    let r = -conservative_operator(&grad, &hess, &[-1.0, -1.0])?;
                    (r, -r)
                } else {
                    let r = conservative_operator(&grad, &hess, &[-1.0, 1.0])?;
                    (r, r)
                }
            }
        };
        report.max_full = report.max_full.max(full.abs());
        report.max_reduced = report.max_reduced.max(reduced.abs());
        report.max_mismatch = report.max_mismatch.max((full - mapped).abs());
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H1Report {
    pub passes: bool,
    pub worst_constant: f64,
    /// Worst constant on the lattice extended to twice its `xi_max`.
    pub extended_constant: f64,
    /// `((k1, k2), constant)` for every admissible pair.
    pub constants: Vec<((u32, u32), f64)>,
}

/// Stirling numbers of the second kind `S(k, j)` for `k <= 3`:
/// `(xi d/dxi)^k = Σ_j S(k, j) xi^j (d/dxi)^j`.
const STIRLING2: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 1.0, 1.0, 0.0],
    [0.0, 1.0, 3.0, 1.0],
];

fn h1_constants(profile: &WaveProfile, k_max: u32, xi: &Axis1D) -> Vec<((u32, u32), f64)> {
    let mut out = Vec::new();
    for k1 in 0..=k_max {
        for k2 in 0..=(k_max - k1) {
            let mut worst = 0.0f64;
            for x in xi.points() {
                let d = profile.derivs(x);
                let v: f64 = (0..=k2 as usize)
                    .map(|j| STIRLING2[k2 as usize][j] * x.powi(j as i32) * d[k1 as usize + 1 + j])
                    .sum();
                worst = worst.max((2.0 + x.max(-1.0)) * v.abs());
            }
            out.push(((k1, k2), worst));
        }
    }
    out
}

/// Measures `sup (2 + xi)|(xi d/dxi)^{k2}(d/dxi)^{k1} F'|` over the lattice for
/// `k1 + k2 <= k_max`; passes when every constant is finite and grows by
/// less than 5% once `xi_max` is doubled at the same spacing.
pub fn check_h1(profile: &WaveProfile, k_max: u32, xi: &Axis1D) -> Result<H1Report> {
    if k_max > 3 {
        return Err(Error::DerivativeBudget(format!(
            "k1 + k2 <= {k_max} needs more than four profile derivatives"
        )));
    }
    let base = h1_constants(profile, k_max, xi);
    let new_max = if xi.max > 0.0 { 2.0 * xi.max } else { xi.max + (xi.max - xi.min) };
    let h = if xi.n > 1 { xi.h() } else { 1.0 };
    let n = ((new_max - xi.min) / h).round() as usize + 1;
    let ext = h1_constants(profile, k_max, &Axis1D::new(xi.min, new_max, n));
    let worst = base.iter().fold(0.0f64, |m, (_, c)| m.max(*c));
    let worst_ext = ext.iter().fold(0.0f64, |m, (_, c)| m.max(*c));
    let stable = base.iter().zip(&ext).all(|((_, b), (_, e))| {
        if *b == 0.0 {
            *e == 0.0
        } else {
            e.is_finite() && (e - b) / b < 0.05
        }
    });
    Ok(H1Report {
        passes: worst.is_finite() && stable,
        worst_constant: worst,
        extended_constant: worst_ext,
        constants: base,
    })
}

/// Largest membrane residual over all nodes of `grid` at time `t`, with every
/// derivative taken by finite differences of samples of `v(t, x1, x2)`.
pub fn sampled_residual(
    v: &dyn Fn(f64, f64, f64) -> f64,
    grid: Grid2D,
    t: f64,
    dt: f64,
    scheme_order: usize,
) -> Result<f64> {
    let levels = scheme_order + 1;
    let stack = TimeStack::sample(grid, t, dt, levels, v)?;
    let mut worst = 0.0f64;
    for jet in stack.jets(levels / 2, scheme_order)? {
        worst = worst.max(membrane_residual(&jet)?.abs());
    }
    Ok(worst)
}

/// One row of a residual refinement study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    pub h: f64,
    pub residual: f64,
    /// `log2` of the residual ratio to the previous row; `None` on the first
    /// row or when both residuals are at rounding level.
    pub order: Option<f64>,
}

/// Residuals below this are rounding noise and carry no order; the noise of
/// a differenced second derivative grows like `h^-2`.
pub const EXACT_RESIDUAL: f64 = 1e-9;

/// Sampled residual of `sol` on square grids `[-half_width, half_width]²`
/// with `n` points per axis, at time `t`, with `dt = dt_ratio · h`.
pub fn residual_convergence(
    sol: &TravelingWaveSolution,
    half_width: f64,
    sizes: &[usize],
    t: f64,
    dt_ratio: f64,
    scheme_order: usize,
) -> Result<Vec<ResidualRow>> {
    if sol.dim != 2 {
        return Err(Error::Config(format!("grid residuals need n = 2, got {}", sol.dim)));
    }
    let mut rows: Vec<ResidualRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid2D::square(half_width, n)?;
        let h = grid.h1();
        let residual = sampled_residual(&|t, a, b| sol.eval(t, &[a, b]), grid, t, dt_ratio * h, scheme_order)?;
        let order = rows.last().and_then(|prev| {
            if prev.residual < EXACT_RESIDUAL && residual < EXACT_RESIDUAL {
                None
            } else {
                Some((prev.residual / residual).ln() / (prev.h / h).ln())
            }
        });
        rows.push(ResidualRow { n, h, residual, order });
    }
    Ok(rows)
}

/// The convergence check: every measured order is at least
/// `scheme_order − 0.3`, and rows without an order are exact.
pub fn residual_converges(rows: &[ResidualRow], scheme_order: usize) -> bool {
    rows.len() >= 2
        && rows.iter().skip(1).all(|r| match r.order {
            Some(p) => p >= scheme_order as f64 - 0.3,
            None => r.residual < EXACT_RESIDUAL,
        })
}

/// Membrane residual at spacetime point `p` (any dimension) with the gradient
/// and Hessian of `v` taken by fourth-order central differences of step `h`.
pub fn differenced_residual(v: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Result<f64> {
    const W1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -2.0 / 3.0), (1.0, 2.0 / 3.0), (2.0, -1.0 / 12.0)];
    const W2: [(f64, f64); 5] = [
        (-2.0, -1.0 / 12.0),
        (-1.0, 4.0 / 3.0),
        (0.0, -5.0 / 2.0),
        (1.0, 4.0 / 3.0),
        (2.0, -1.0 / 12.0),
    ];
    let n = p.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(i, s) in shifts {
            q[i] += s * h;
        }
        v(&q)
    };
    let grad: Vec<f64> = (0..n)
        .map(|i| W1.iter().map(|&(o, w)| w * at(&[(i, o)])).sum::<f64>() / h)
        .collect();
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = W2.iter().map(|&(o, w)| w * at(&[(i, o)])).sum::<f64>() / (h * h);
        for j in (i + 1)..n {
            let mut s = 0.0;
            for &(a, wa) in &W1 {
                for &(b, wb) in &W1 {
                    s += wa * wb * at(&[(i, a), (j, b)]);
                }
            }
            hess[i][j] = s / (h * h);
            hess[j][i] = hess[i][j];
        }
    }
    conservative_operator(&grad, &hess, &spacetime_signs(n - 1))
}
