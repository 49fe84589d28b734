//! Pointwise Minkowski operators on 2-jets.
//!
//! The membrane equation in conservative form is
//!
//! ```text
//! ∂_t(v_t/√Δ) − Σ_i ∂_{x_i}(v_{x_i}/√Δ) = 0,   Δ = 1 + |∇v|² − v_t²,
//! ```
//!
//! and expanding the derivatives gives the quasilinear form used by the
//! evolver:
//!
//! ```text
//! m_tt v_tt + 2 Σ_i m_{t x_i} v_{t x_i} + Σ_{ij} m_{x_i x_j} v_{x_i x_j} = Δ^{3/2} · residual,
//! m_tt = 1 + |∇v|²,  m_{t x_i} = −v_t v_{x_i},  m_{x_i x_j} = −Δ δ_ij + v_{x_i} v_{x_j}.
//! ```
//!
//! Both routes are kept separate on purpose ([`membrane_residual`] expands the
//! conservative form directly) and tied together by tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PointJet;
use crate::jet::Jet;

/// Closest approach of the induced-metric factor to zero before a point is
/// treated as degenerate.
pub const DEGENERACY_MARGIN: f64 = 1e-6;

/// `Δ = 1 + v_x1² + v_x2² − v_t²`.
pub fn delta_factor(jet: &PointJet) -> f64 {
    1.0 + jet.d_x1 * jet.d_x1 + jet.d_x2 * jet.d_x2 - jet.d_t * jet.d_t
}

/// `Q₀(φ, ψ) = φ_t ψ_t − φ_x1 ψ_x1 − φ_x2 ψ_x2`.
pub fn null_form_cartesian(phi: &PointJet, psi: &PointJet) -> f64 {
    phi.d_t * psi.d_t - phi.d_x1 * psi.d_x1 - phi.d_x2 * psi.d_x2
}

/// A 2-jet in Goursat variables `xi = t + x1`, `eta = t − x1`, `x2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GoursatJet {
    pub value: f64,
    pub d_xi: f64,
    pub d_eta: f64,
    pub d_x2: f64,
    pub d_xixi: f64,
    pub d_xieta: f64,
    pub d_xix2: f64,
    pub d_etaeta: f64,
    pub d_etax2: f64,
    pub d_x2x2: f64,
}

impl GoursatJet {
    /// Chain rule with `∂_xi = (∂_t + ∂_x1)/2`, `∂_eta = (∂_t − ∂_x1)/2`.
    pub fn from_cartesian(j: &PointJet) -> Self {
        GoursatJet {
            value: j.value,
            d_xi: 0.5 * (j.d_t + j.d_x1),
            d_eta: 0.5 * (j.d_t - j.d_x1),
            d_x2: j.d_x2,
            d_xixi: 0.25 * (j.d_tt + 2.0 * j.d_tx1 + j.d_x1x1),
            d_xieta: 0.25 * (j.d_tt - j.d_x1x1),
            d_xix2: 0.5 * (j.d_tx2 + j.d_x1x2),
            d_etaeta: 0.25 * (j.d_tt - 2.0 * j.d_tx1 + j.d_x1x1),
            d_etax2: 0.5 * (j.d_tx2 - j.d_x1x2),
            d_x2x2: j.d_x2x2,
        }
    }

    /// Reads a jet whose variables are already `(xi, eta, x2)`.
    pub fn from_jet(j: &Jet) -> Self {
        GoursatJet {
            value: j.value(),
            d_xi: j.d(0),
            d_eta: j.d(1),
            d_x2: j.d(2),
            d_xixi: j.dd(0, 0),
            d_xieta: j.dd(0, 1),
            d_xix2: j.dd(0, 2),
            d_etaeta: j.dd(1, 1),
            d_etax2: j.dd(1, 2),
            d_x2x2: j.dd(2, 2),
        }
    }

    /// `□ = 4∂_xi∂_eta − ∂_x2²`.
    pub fn box_op(&self) -> f64 {
        4.0 * self.d_xieta - self.d_x2x2
    }
}

/// `Q₀(φ, ψ) = 2(φ_xi ψ_eta + φ_eta ψ_xi) − φ_x2 ψ_x2`.
pub fn null_form_goursat(phi: &GoursatJet, psi: &GoursatJet) -> f64 {
    2.0 * (phi.d_xi * psi.d_eta + phi.d_eta * psi.d_xi) - phi.d_x2 * psi.d_x2
}

/// The conservative membrane operator expanded by the product and chain rules.
pub fn membrane_residual(jet: &PointJet) -> Result<f64> {
    let delta = delta_factor(jet);
    if delta <= 0.0 {
        return Err(Error::NotTimelike(delta));
    }
    let PointJet {
        d_t: vt,
        d_x1: v1,
        d_x2: v2,
        ..
    } = *jet;
    // ∂_μ Δ = 2(v1 v1μ + v2 v2μ − vt vtμ)
    let dd = |vt_mu: f64, v1_mu: f64, v2_mu: f64| 2.0 * (v1 * v1_mu + v2 * v2_mu - vt * vt_mu);
    let delta_t = dd(jet.d_tt, jet.d_tx1, jet.d_tx2);
    let delta_1 = dd(jet.d_tx1, jet.d_x1x1, jet.d_x1x2);
    let delta_2 = dd(jet.d_tx2, jet.d_x1x2, jet.d_x2x2);
    let s = delta.sqrt();
    let s3 = delta * s;
    // ∂_μ(w/√Δ) = w_μ/√Δ − w Δ_μ / (2Δ^{3/2})
    let flux = |w: f64, w_mu: f64, delta_mu: f64| w_mu / s - 0.5 * w * delta_mu / s3;
    Ok(flux(vt, jet.d_tt, delta_t) - flux(v1, jet.d_x1x1, delta_1) - flux(v2, jet.d_x2x2, delta_2))
}

/// `Σ_i σ_i ∂_i(g_i/√Δ)` with `Δ = 1 − Σ_i σ_i g_i²`, from a gradient and
/// Hessian in any number of variables.
///
/// `σ = (+1, −1, …, −1)` is the membrane operator in `(t, x)`; all `σ_i = −1`
/// gives minus the minimal-surface operator.
pub fn conservative_operator(grad: &[f64], hess: &[Vec<f64>], signs: &[f64]) -> Result<f64> {
    let n = grad.len();
    assert!(hess.len() == n && signs.len() == n, "dimension mismatch");
    let delta = 1.0 - (0..n).map(|i| signs[i] * grad[i] * grad[i]).sum::<f64>();
    if delta <= 0.0 {
        return Err(Error::NotTimelike(delta));
    }
    let s = delta.sqrt();
    let mut out = 0.0;
    for i in 0..n {
        let delta_i = -2.0 * (0..n).map(|j| signs[j] * grad[j] * hess[j][i]).sum::<f64>();
        out += signs[i] * (hess[i][i] / s - 0.5 * grad[i] * delta_i / (delta * s));
    }
    Ok(out)
}

/// Coefficients of the second-order quasilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricCoeffs {
    pub m_tt: f64,
    pub m_tx1: f64,
    pub m_tx2: f64,
    pub m_x1x1: f64,
    pub m_x1x2: f64,
    pub m_x2x2: f64,
}

impl MetricCoeffs {
    /// `m_tt v_tt + 2Σ m_txi v_txi + Σ m_xixj v_xixj` for the second derivatives of `jet`.
    pub fn apply(&self, jet: &PointJet) -> f64 {
        self.m_tt * jet.d_tt + self.spatial_part(jet)
    }

    /// Every term of [`MetricCoeffs::apply`] except `m_tt v_tt`.
    pub fn spatial_part(&self, jet: &PointJet) -> f64 {
        2.0 * (self.m_tx1 * jet.d_tx1 + self.m_tx2 * jet.d_tx2)
            + self.m_x1x1 * jet.d_x1x1
            + 2.0 * self.m_x1x2 * jet.d_x1x2
            + self.m_x2x2 * jet.d_x2x2
    }

    /// Largest characteristic speed over all spatial directions.
    ///
    /// For direction `n`, plane waves `f(n·x − s t)` travel with
    /// `m_tt s² − 2 m_tn s + m_nn = 0`; the bound uses `|m_t|` and the
    /// spectral radius of `−m_xx`.
    pub fn max_speed(&self) -> f64 {
        let mt = (self.m_tx1 * self.m_tx1 + self.m_tx2 * self.m_tx2).sqrt();
        // eigenvalues of the symmetric 2x2 block -m_xx
        let (a, b, c) = (-self.m_x1x1, -self.m_x1x2, -self.m_x2x2);
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let rho = (mean + rad).abs().max((mean - rad).abs());
        (mt + (mt * mt + self.m_tt * rho).sqrt()) / self.m_tt
    }
}

/// Quasilinear coefficients at `jet`; see the module docs for the formulas.
pub fn quasilinear_coeffs(jet: &PointJet) -> MetricCoeffs {
    let delta = delta_factor(jet);
    let (vt, v1, v2) = (jet.d_t, jet.d_x1, jet.d_x2);
    MetricCoeffs {
        m_tt: 1.0 + v1 * v1 + v2 * v2,
        m_tx1: -vt * v1,
        m_tx2: -vt * v2,
        m_x1x1: -delta + v1 * v1,
        m_x1x2: v1 * v2,
        m_x2x2: -delta + v2 * v2,
    }
}

/// Background `(a·x2 + b)·F(x1 + t)` evaluated at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackgroundJet {
    pub a: f64,
    pub b: f64,
    pub x2: f64,
    /// `F`, `F'`, `F''` at `xi = t + x1`.
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

impl BackgroundJet {
    /// Cartesian 2-jet of the background.
    pub fn point_jet(&self) -> PointJet {
        let amp = self.a * self.x2 + self.b;
        PointJet {
            value: amp * self.f,
            d_t: amp * self.f1,
            d_x1: amp * self.f1,
            d_x2: self.a * self.f,
            d_tt: amp * self.f2,
            d_tx1: amp * self.f2,
            d_tx2: self.a * self.f1,
            d_x1x1: amp * self.f2,
            d_x1x2: self.a * self.f1,
            d_x2x2: 0.0,
        }
    }
}

/// `Q₀(v, Q₀(v, v))` from a 2-jet, using `∂_μ Q₀(v,v) = 2 Q₀(v, ∂_μ v)`.
pub fn cubic_null_form(v: &PointJet) -> f64 {
    let h = v.hessian();
    let g = [v.d_t, v.d_x1, v.d_x2];
    let q_mu = |mu: usize| 2.0 * (g[0] * h[0][mu] - g[1] * h[1][mu] - g[2] * h[2][mu]);
    g[0] * q_mu(0) - g[1] * q_mu(1) - g[2] * q_mu(2)
}

/// Right-hand side of `□u = −½ Q₀(v, ς)/(1 − ς)` for `v = u + (a x2 + b)F(x1 + t)`,
/// with `ς = Q₀(v, v)` the full induced-metric defect.
///
/// For `a = 0` this is exactly the `H̃` form `½(1 − H̃)Q₀(u + bF, ς)` with
/// `ς = Q₀(u,u) + 2bF'(u_t − u_x1)`; for `a ≠ 0` the background's own
/// `Q₀(w, w) = −a²F²` enters `ς` as well.
pub fn perturbed_rhs_cartesian(u: &PointJet, bg: &BackgroundJet) -> Result<f64> {
    let amp = bg.a * bg.x2 + bg.b;
    let sigma = null_form_cartesian(u, u)
        + 2.0 * (amp * bg.f1 * (u.d_t - u.d_x1) - bg.a * u.d_x2 * bg.f)
        - bg.a * bg.a * bg.f * bg.f;
    if sigma >= 1.0 - DEGENERACY_MARGIN {
        return Err(Error::DegenerateMetric(sigma));
    }
    let v = *u + bg.point_jet();
    let h = 1.0 + 1.0 / (1.0 - sigma);
    Ok(0.5 * (1.0 - h) * cubic_null_form(&v))
}

/// `H(ς) = 1 + 1/(1 − ς)`.
pub fn h_factor(sigma: f64) -> f64 {
    1.0 + 1.0 / (1.0 - sigma)
}

/// Right-hand side for `□u` around the background `F(xi)` written in Goursat
/// variables:
///
/// ```text
/// □u = ½(1 − H)[Q₀(u, Q₀(u,u)) + 8F' Q₀(u, u_eta) + 8F'' u_eta² + 8F'² u_etaeta],
/// ς = Q₀(u,u) + 4F' u_eta.
/// ```
///
/// Moving `4F'² u_etaeta` to the left gives the split
/// `□u − 4F'²u_etaeta = ½(1−H)[…without the last term…] − 4F'²u_etaeta·H`.
pub fn perturbed_rhs_goursat(u: &GoursatJet, f1: f64, f2: f64) -> Result<f64> {
    let sigma = null_form_goursat(u, u) + 4.0 * f1 * u.d_eta;
    if sigma >= 1.0 - DEGENERACY_MARGIN {
        return Err(Error::DegenerateMetric(sigma));
    }
    // derivatives of Q0(u,u) = 4 u_xi u_eta − u_x2²
    let q_xi = 4.0 * (u.d_xixi * u.d_eta + u.d_xi * u.d_xieta) - 2.0 * u.d_x2 * u.d_xix2;
    let q_eta = 4.0 * (u.d_xieta * u.d_eta + u.d_xi * u.d_etaeta) - 2.0 * u.d_x2 * u.d_etax2;
    let q_x2 = 4.0 * (u.d_xix2 * u.d_eta + u.d_xi * u.d_etax2) - 2.0 * u.d_x2 * u.d_x2x2;
    let cubic = 2.0 * (u.d_xi * q_eta + u.d_eta * q_xi) - u.d_x2 * q_x2;
    let q_u_ueta = 2.0 * (u.d_xi * u.d_etaeta + u.d_eta * u.d_xieta) - u.d_x2 * u.d_etax2;
    let bracket = cubic
        + 8.0 * f1 * q_u_ueta
        + 8.0 * f2 * u.d_eta * u.d_eta
        + 8.0 * f1 * f1 * u.d_etaeta;
    Ok(0.5 * (1.0 - h_factor(sigma)) * bracket)
}

/// Largest disagreements of the operator identities over seeded jets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub jets: usize,
    /// `max |Q₀ cartesian − Q₀ goursat|`.
    pub null_form_gap: f64,
    /// `max |m-form − Δ^{3/2} residual| / Σ|m-form terms|`.
    pub m_form_rel_gap: f64,
}

/// Random 2-jets with first derivatives in `[-0.5, 0.5]` (so `Δ ≥ 1/4`) and
/// second derivatives in `[-2, 2]`.
pub fn random_point_jet(rng: &mut impl Rng) -> PointJet {
    let mut g = |r: f64| rng.gen_range(-r..=r);
    PointJet {
        value: g(1.0),
        d_t: g(0.5),
        d_x1: g(0.5),
        d_x2: g(0.5),
        d_tt: g(2.0),
        d_tx1: g(2.0),
        d_tx2: g(2.0),
        d_x1x1: g(2.0),
        d_x1x2: g(2.0),
        d_x2x2: g(2.0),
    }
}

/// Checks the null-form change of variables and `m-form = Δ^{3/2}·residual`.
pub fn operator_algebra(seed: u64, count: usize) -> Result<AlgebraReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AlgebraReport {
        jets: count,
        null_form_gap: 0.0,
        m_form_rel_gap: 0.0,
    };
    for _ in 0..count {
        let (a, b) = (random_point_jet(&mut rng), random_point_jet(&mut rng));
        let q = null_form_cartesian(&a, &b) - null_form_goursat(&GoursatJet::from_cartesian(&a), &GoursatJet::from_cartesian(&b));
        rep.null_form_gap = rep.null_form_gap.max(q.abs());
        let m = quasilinear_coeffs(&a);
        let terms = [
            m.m_tt * a.d_tt,
            2.0 * m.m_tx1 * a.d_tx1,
            2.0 * m.m_tx2 * a.d_tx2,
            m.m_x1x1 * a.d_x1x1,
            2.0 * m.m_x1x2 * a.d_x1x2,
            m.m_x2x2 * a.d_x2x2,
        ];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let gap = m.apply(&a) - delta_factor(&a).powf(1.5) * membrane_residual(&a)?;
        if scale > 0.0 {
            rep.m_form_rel_gap = rep.m_form_rel_gap.max(gap.abs() / scale);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(delta_factor(&PointJet::default()), 1.0);
        let null = PointJet {
            d_t: 1.0,
            ..Default::default()
        };
        assert_eq!(delta_factor(&null), 0.0);
        let j = PointJet {
            d_t: 0.5,
            d_x1: 1.0,
            ..Default::default()
        };
        assert_eq!(delta_factor(&j), 1.75);
    }

    #[test]
    fn null_form_examples() {
        let t = PointJet {
            d_t: 1.0,
            ..Default::default()
        };
        assert_eq!(null_form_cartesian(&t, &t), 1.0);
        let xi = PointJet {
            d_t: 1.0,
            d_x1: 1.0,
            ..Default::default()
        };
        assert_eq!(null_form_cartesian(&xi, &xi), 0.0);
        // φ = t·x1 at (1, 2, 3): φ_t = 2, φ_x1 = 1; ψ = t² + x1: ψ_t = 2, ψ_x1 = 1
        let phi = PointJet {
            d_t: 2.0,
            d_x1: 1.0,
            ..Default::default()
        };
        let psi = PointJet {
            d_t: 2.0,
            d_x1: 1.0,
            ..Default::default()
        };
        assert_eq!(null_form_cartesian(&phi, &psi), 3.0);
    }

    #[test]
    fn goursat_null_form_examples() {
        let a = GoursatJet {
            d_xi: 1.0,
            ..Default::default()
        };
        let b = GoursatJet {
            d_eta: 1.0,
            ..Default::default()
        };
        assert_eq!(null_form_goursat(&a, &b), 2.0);
        assert_eq!(null_form_goursat(&a, &a), 0.0);
    }

    #[test]
    fn operator_identities_on_random_jets() {
        let r = operator_algebra(42, 1000).unwrap();
        assert!(r.null_form_gap <= 1e-11, "{r:?}");
        assert!(r.m_form_rel_gap <= 1e-10, "{r:?}");
    }

    #[test]
    fn residual_of_parabola() {
        let j = PointJet {
            d_x1x1: 2.0,
            ..Default::default()
        };
        assert!((membrane_residual(&j).unwrap() + 2.0).abs() < 1e-15);
        let x1: f64 = 0.7;
        let j = PointJet {
            d_x1: 2.0 * x1,
            d_x1x1: 2.0,
            ..Default::default()
        };
        let want = -2.0 / (1.0 + 4.0 * x1 * x1).powf(1.5);
        assert!((membrane_residual(&j).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn residual_rejects_spacelike_gradient() {
        let j = PointJet {
            d_t: 2.0,
            ..Default::default()
        };
        assert!(matches!(membrane_residual(&j), Err(Error::NotTimelike(_))));
    }

    #[test]
    fn affine_surface_is_extremal() {
        let j = PointJet {
            value: 1.0,
            d_x1: 0.3,
            d_x2: 0.4,
            ..Default::default()
        };
        assert_eq!(membrane_residual(&j).unwrap(), 0.0);
    }

    #[test]
    fn conservative_operator_agrees_with_membrane_residual() {
        let j = PointJet {
            value: 0.0,
            d_t: 0.2,
            d_x1: -0.4,
            d_x2: 0.1,
            d_tt: 0.3,
            d_tx1: -0.7,
            d_tx2: 0.25,
            d_x1x1: 1.1,
            d_x1x2: -0.05,
            d_x2x2: 0.6,
        };
        let h: Vec<Vec<f64>> = j.hessian().iter().map(|r| r.to_vec()).collect();
        let a = conservative_operator(&j.gradient(), &h, &[1.0, -1.0, -1.0]).unwrap();
        let b = membrane_residual(&j).unwrap();
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }

    #[test]
    fn coefficient_examples() {
        let flat = quasilinear_coeffs(&PointJet::default());
        assert_eq!(
            (flat.m_tt, flat.m_x1x1, flat.m_x2x2, flat.m_tx1, flat.m_tx2, flat.m_x1x2),
            (1.0, -1.0, -1.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(flat.max_speed(), 1.0);
        let j = PointJet {
            d_x1: 1.0,
            ..Default::default()
        };
        assert_eq!(delta_factor(&j), 2.0);
        let m = quasilinear_coeffs(&j);
        assert_eq!((m.m_tt, m.m_x1x1, m.m_x2x2), (2.0, -1.0, -2.0));
        assert_eq!((m.m_tx1, m.m_tx2, m.m_x1x2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unperturbed_background_has_zero_rhs() {
        let bg = BackgroundJet {
            a: 0.4,
            b: 1.0,
            x2: -0.3,
            f: 0.2,
            f1: -0.1,
            f2: 0.05,
        };
        assert_eq!(perturbed_rhs_cartesian(&PointJet::default(), &bg).unwrap(), 0.0);
        assert_eq!(
            perturbed_rhs_goursat(&GoursatJet::default(), 0.3, -0.2).unwrap(),
            0.0
        );
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let u = PointJet {
            d_t: 1.0,
            ..Default::default()
        };
        let bg = BackgroundJet {
            a: 0.0,
            b: 1.0,
            x2: 0.0,
            f: 0.0,
            f1: 0.0,
            f2: 0.0,
        };
        assert!(matches!(
            perturbed_rhs_cartesian(&u, &bg),
            Err(Error::DegenerateMetric(_))
        ));
    }
}
