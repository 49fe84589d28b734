//! Lorentz and scaling vector fields, their Goursat forms, and the
//! commutation relations with `□` and `Q₀`.
//!
//! Every field is first order with affine coefficients. In Goursat variables
//! `xi = t + x1`, `eta = t − x1` one has `∂_t = ∂_xi + ∂_eta` and
//! `∂_x1 = ∂_xi − ∂_eta`, and the `Γ` fields take the form
//!
//! ```text
//! Γ1 = 2∂_xi   Γ2 = 2∂_eta   Γ3 = ∂_x2
//! Γ4 = 2 eta ∂_eta + x2 ∂_x2   Γ5 = 2 xi ∂_xi + x2 ∂_x2   Γ6 = xi ∂_x2 + 2 x2 ∂_eta
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::TimeStack;
use crate::jet::{Jet, Polynomial, SpacetimeFn, MAX_ORDER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFieldId {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Gamma5,
    Gamma6,
    L0,
    L1,
    L2,
    Omega,
    Dt,
    Dx1,
    Dx2,
}

/// One affine coefficient `c0 + c·(y0, y1, y2)`.
type Affine = [f64; 4];

impl VectorFieldId {
    pub const ALL: [VectorFieldId; 13] = [
        VectorFieldId::Gamma1,
        VectorFieldId::Gamma2,
        VectorFieldId::Gamma3,
        VectorFieldId::Gamma4,
        VectorFieldId::Gamma5,
        VectorFieldId::Gamma6,
        VectorFieldId::L0,
        VectorFieldId::L1,
        VectorFieldId::L2,
        VectorFieldId::Omega,
        VectorFieldId::Dt,
        VectorFieldId::Dx1,
        VectorFieldId::Dx2,
    ];

    pub const GAMMA: [VectorFieldId; 6] = [
        VectorFieldId::Gamma1,
        VectorFieldId::Gamma2,
        VectorFieldId::Gamma3,
        VectorFieldId::Gamma4,
        VectorFieldId::Gamma5,
        VectorFieldId::Gamma6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            VectorFieldId::Gamma1 => "Gamma1",
            VectorFieldId::Gamma2 => "Gamma2",
            VectorFieldId::Gamma3 => "Gamma3",
            VectorFieldId::Gamma4 => "Gamma4",
            VectorFieldId::Gamma5 => "Gamma5",
            VectorFieldId::Gamma6 => "Gamma6",
            VectorFieldId::L0 => "L0",
            VectorFieldId::L1 => "L1",
            VectorFieldId::L2 => "L2",
            VectorFieldId::Omega => "Omega",
            VectorFieldId::Dt => "Dt",
            VectorFieldId::Dx1 => "Dx1",
            VectorFieldId::Dx2 => "Dx2",
        }
    }

    /// Coefficients of `∂_t, ∂_x1, ∂_x2`, affine in `(t, x1, x2)`.
    pub fn cartesian_coeffs(&self) -> [Affine; 3] {
        const Z: Affine = [0.0; 4];
        const ONE: Affine = [1.0, 0.0, 0.0, 0.0];
        const T: Affine = [0.0, 1.0, 0.0, 0.0];
        const X1: Affine = [0.0, 0.0, 1.0, 0.0];
        const X2: Affine = [0.0, 0.0, 0.0, 1.0];
        let neg = |a: Affine| a.map(|v| -v);
        match self {
            VectorFieldId::Gamma1 => [ONE, ONE, Z],
            VectorFieldId::Gamma2 => [ONE, neg(ONE), Z],
            VectorFieldId::Gamma3 => [Z, Z, ONE],
            VectorFieldId::Gamma4 => [[0.0, 1.0, -1.0, 0.0], [0.0, -1.0, 1.0, 0.0], X2],
            VectorFieldId::Gamma5 => [[0.0, 1.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], X2],
            VectorFieldId::Gamma6 => [X2, neg(X2), [0.0, 1.0, 1.0, 0.0]],
            VectorFieldId::L0 => [T, X1, X2],
            VectorFieldId::L1 => [X1, T, Z],
            VectorFieldId::L2 => [X2, Z, T],
            VectorFieldId::Omega => [Z, neg(X2), X1],
            VectorFieldId::Dt => [ONE, Z, Z],
            VectorFieldId::Dx1 => [Z, ONE, Z],
            VectorFieldId::Dx2 => [Z, Z, ONE],
        }
    }

    /// Coefficients of `∂_xi, ∂_eta, ∂_x2`, affine in `(xi, eta, x2)`.
    ///
    /// The `Γ` fields use the closed forms from the module docs; the rest are
    /// obtained from [`VectorFieldId::cartesian_coeffs`] by the change of variables.
    pub fn goursat_coeffs(&self) -> [Affine; 3] {
        const Z: Affine = [0.0; 4];
        match self {
            VectorFieldId::Gamma1 => [[2.0, 0.0, 0.0, 0.0], Z, Z],
            VectorFieldId::Gamma2 => [Z, [2.0, 0.0, 0.0, 0.0], Z],
            VectorFieldId::Gamma3 => [Z, Z, [1.0, 0.0, 0.0, 0.0]],
            VectorFieldId::Gamma4 => [Z, [0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
            VectorFieldId::Gamma5 => [[0.0, 2.0, 0.0, 0.0], Z, [0.0, 0.0, 0.0, 1.0]],
            VectorFieldId::Gamma6 => [Z, [0.0, 0.0, 0.0, 2.0], [0.0, 1.0, 0.0, 0.0]],
            _ => goursat_from_cartesian(self.cartesian_coeffs()),
        }
    }

    /// `λ` with `[□, Γ] = λ□`.
    pub fn box_commutator_constant(&self) -> f64 {
        match self {
            VectorFieldId::Gamma4 | VectorFieldId::Gamma5 | VectorFieldId::L0 => 2.0,
            _ => 0.0,
        }
    }

    /// `c` with `ΓQ₀(φ,ψ) = Q₀(Γφ,ψ) + Q₀(φ,Γψ) + c·Q₀(φ,ψ)`.
    pub fn leibniz_constant(&self) -> f64 {
        -self.box_commutator_constant()
    }
}

/// Rewrites Cartesian coefficients in Goursat variables.
pub fn goursat_from_cartesian(c: [Affine; 3]) -> [Affine; 3] {
    // an affine function of (t, x1, x2) as one of (xi, eta, x2)
    let re = |a: Affine| -> Affine {
        [
            a[0],
            0.5 * (a[1] + a[2]),
            0.5 * (a[1] - a[2]),
            a[3],
        ]
    };
    let (ct, c1, c2) = (re(c[0]), re(c[1]), re(c[2]));
    let mut xi = [0.0; 4];
    let mut eta = [0.0; 4];
    for k in 0..4 {
        xi[k] = ct[k] + c1[k];
        eta[k] = ct[k] - c1[k];
    }
    [xi, eta, c2]
}

fn affine_at(a: &Affine, p: [f64; 3]) -> f64 {
    a[0] + a[1] * p[0] + a[2] * p[1] + a[3] * p[2]
}

fn affine_jet(a: &Affine, p: [f64; 3], order: usize) -> Jet {
    Jet::affine(order, affine_at(a, p), [a[1], a[2], a[3]])
}

fn apply_coeffs(c: &[Affine; 3], f: &Jet, p: [f64; 3]) -> Jet {
    let order = f.order() - 1;
    (0..3).fold(Jet::zero(order), |acc, k| {
        &acc + &(&affine_jet(&c[k], p, order) * &f.derivative(k))
    })
}

/// A point in Goursat variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoursatPoint {
    pub xi: f64,
    pub eta: f64,
    pub x2: f64,
}

impl GoursatPoint {
    pub fn from_cartesian(t: f64, x1: f64, x2: f64) -> Self {
        GoursatPoint {
            xi: t + x1,
            eta: t - x1,
            x2,
        }
    }

    /// `(t, x1, x2)`.
    pub fn to_cartesian(&self) -> [f64; 3] {
        [0.5 * (self.xi + self.eta), 0.5 * (self.xi - self.eta), self.x2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.xi, self.eta, self.x2]
    }
}

/// Re-expands a Cartesian jet at `(t, x1, x2)` in Goursat variables.
pub fn cartesian_to_goursat_jet(j: &Jet) -> Jet {
    // Δt = (Δxi + Δeta)/2, Δx1 = (Δxi − Δeta)/2
    j.substitute([[0.5, 0.5, 0.0], [0.5, -0.5, 0.0], [0.0, 0.0, 1.0]])
}

/// `V f` at `p` for a Cartesian jet `f` based at `p`; the result has order one less.
pub fn apply_vf_jet(id: VectorFieldId, f: &Jet, p: [f64; 3]) -> Jet {
    apply_coeffs(&id.cartesian_coeffs(), f, p)
}

/// As [`apply_vf_jet`] for a jet in Goursat variables based at `q = (xi, eta, x2)`.
pub fn apply_vf_goursat_jet(id: VectorFieldId, f: &Jet, q: [f64; 3]) -> Jet {
    apply_coeffs(&id.goursat_coeffs(), f, q)
}

/// `V f` at the Cartesian point `p`.
pub fn apply_vf(id: VectorFieldId, f: &dyn SpacetimeFn, p: [f64; 3]) -> f64 {
    apply_vf_jet(id, &f.jet(p, 1), p).value()
}

/// `V f` at node `(i1, i2)` of time level `it`, from finite differences.
pub fn apply_vf_stack(
    id: VectorFieldId,
    stack: &TimeStack,
    it: usize,
    i1: usize,
    i2: usize,
    scheme_order: usize,
) -> Result<f64> {
    let j = stack.point_jet(it, i1, i2, scheme_order)?;
    let grid = stack.slices[it].grid;
    let p = [stack.slices[it].time_label, grid.x1(i1), grid.x2(i2)];
    let c = id.cartesian_coeffs();
    Ok(affine_at(&c[0], p) * j.d_t + affine_at(&c[1], p) * j.d_x1 + affine_at(&c[2], p) * j.d_x2)
}

/// `□f` as a jet, from a Cartesian jet of order at least 2.
pub fn box_jet(f: &Jet) -> Jet {
    let d2 = |k: usize| f.derivative(k).derivative(k);
    &(&d2(0) - &d2(1)) - &d2(2)
}

/// `Q₀(φ, ψ)` as a jet, from Cartesian jets of order at least 1.
pub fn null_form_jet(phi: &Jet, psi: &Jet) -> Jet {
    let term = |k: usize| &phi.derivative(k) * &psi.derivative(k);
    &(&term(0) - &term(1)) - &term(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub id: VectorFieldId,
    /// `□Γf − Γ□f` at each sample point.
    pub defect: Vec<f64>,
    pub lambda: f64,
    /// Largest `|defect − λ□f|`.
    pub max_residual: f64,
}

/// Fits `[□, Γ]f = λ□f` by least squares over `points`.
pub fn commutator_box(id: VectorFieldId, f: &dyn SpacetimeFn, points: &[[f64; 3]]) -> CommutatorReport {
    let mut defect = Vec::with_capacity(points.len());
    let mut boxes = Vec::with_capacity(points.len());
    for &p in points {
        let j = f.jet(p, 3);
        let box_gamma = box_jet(&apply_vf_jet(id, &j, p)).value();
        let gamma_box = apply_vf_jet(id, &box_jet(&j), p).value();
        defect.push(box_gamma - gamma_box);
        boxes.push(box_jet(&j).value());
    }
    let den: f64 = boxes.iter().map(|b| b * b).sum();
    let lambda = if den > 0.0 {
        defect.iter().zip(&boxes).map(|(d, b)| d * b).sum::<f64>() / den
    } else {
        0.0
    };
    let max_residual = defect
        .iter()
        .zip(&boxes)
        .fold(0.0f64, |m, (d, b)| m.max((d - lambda * b).abs()));
    CommutatorReport {
        id,
        defect,
        lambda,
        max_residual,
    }
}

/// Random polynomial of total degree `<= degree` (at most 4) in `(t, x1, x2)`
/// with Taylor coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(rng: &mut impl Rng, degree: usize) -> Polynomial {
    let degree = degree.min(MAX_ORDER);
    let mut j = Jet::zero(MAX_ORDER);
    for m in monomials(degree) {
        let c: f64 = rng.gen_range(-1.0..=1.0);
        let mono = (0..3).fold(Jet::constant(MAX_ORDER, c), |acc, k| {
            (0..m[k]).fold(acc, |a, _| &a * &Jet::variable(MAX_ORDER, k, 0.0))
        });
        j = &j + &mono;
    }
    Polynomial(j)
}

fn monomials(degree: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            for c in 0..=(degree - a - b) {
                out.push([a as u8, b as u8, c as u8]);
            }
        }
    }
    out
}

/// Fitted `[□, Γ] = λ□` over a seeded polynomial suite, for one field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorSuiteRow {
    pub id: VectorFieldId,
    pub expected: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Largest `|λ − expected|` over the suite.
    pub max_lambda_error: f64,
    /// Largest least-squares residual `|defect − λ□f|`.
    pub max_residual: f64,
}

/// `count` random polynomials of degree `degree`, each sampled at 8 random
/// points of `[-2, 2]³`.
pub fn commutator_suite(ids: &[VectorFieldId], seed: u64, count: usize, degree: usize) -> Vec<CommutatorSuiteRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suite: Vec<(Polynomial, Vec<[f64; 3]>)> = (0..count)
        .map(|_| {
            let f = random_polynomial(&mut rng, degree);
            let pts = (0..8)
                .map(|_| [0; 3].map(|_: i32| rng.gen_range(-2.0..=2.0)))
                .collect();
            (f, pts)
        })
        .collect();
    ids.iter()
        .map(|&id| {
            let expected = id.box_commutator_constant();
            let mut row = CommutatorSuiteRow {
                id,
                expected,
                lambda_min: f64::INFINITY,
                lambda_max: f64::NEG_INFINITY,
                max_lambda_error: 0.0,
                max_residual: 0.0,
            };
            for (f, pts) in &suite {
                let r = commutator_box(id, f, pts);
                row.lambda_min = row.lambda_min.min(r.lambda);
                row.lambda_max = row.lambda_max.max(r.lambda);
                row.max_lambda_error = row.max_lambda_error.max((r.lambda - expected).abs());
                row.max_residual = row.max_residual.max(r.max_residual);
            }
            row
        })
        .collect()
}

/// Largest pointwise gap in `Γ4 = L0 − L1`, `Γ5 = L0 + L1`, `Γ6 = L2 + Ω`
/// applied to a seeded polynomial suite.
pub fn decomposition_defects(seed: u64, count: usize, degree: usize) -> [(&'static str, f64); 3] {
    use VectorFieldId::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..count {
        let f = random_polynomial(&mut rng, degree);
        let p = [0; 3].map(|_: i32| rng.gen_range(-2.0..=2.0));
        let a = |id| apply_vf(id, &f, p);
        let gaps = [
            a(Gamma4) - (a(L0) - a(L1)),
            a(Gamma5) - (a(L0) + a(L1)),
            a(Gamma6) - (a(L2) + a(Omega)),
        ];
        for k in 0..3 {
            worst[k] = worst[k].max(gaps[k].abs());
        }
    }
    [("G4=L0-L1", worst[0]), ("G5=L0+L1", worst[1]), ("G6=L2+Omega", worst[2])]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeibnizReport {
    pub word: Vec<VectorFieldId>,
    /// Fitted coefficients, labelled by the lower-order `Q₀` term they multiply.
    pub coefficients: Vec<(String, f64)>,
    pub max_residual: f64,
    /// Largest magnitude of `Γ^k Q₀(φ, ψ)` over the points, for scale.
    pub scale: f64,
}

fn solve_least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let k = rows.first().map_or(0, |r| r.len());
    if k == 0 || rows.is_empty() {
        return vec![0.0; k];
    }
    let a = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let tol = svd.singular_values.max() * 1e-12;
    match svd.solve(&b, tol) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; k],
    }
}

/// Checks `Γ^k Q₀(φ,ψ) = Σ Q₀(Γ^{k1}φ, Γ^{k2}ψ) + lower-order terms` for a
/// word of length 1 or 2 and fits the lower-order coefficients.
///
/// For `k = (a)` the lower-order basis is `{Q₀(φ,ψ)}`; for `k = (a, b)`
/// (meaning `Γ_a Γ_b`) it is `{Q₀(Γ_bφ,ψ), Q₀(φ,Γ_bψ), Q₀(Γ_aφ,ψ), Q₀(φ,Γ_aψ), Q₀(φ,ψ)}`.
pub fn gamma_nullform_leibniz(
    word: &[VectorFieldId],
    phi: &dyn SpacetimeFn,
    psi: &dyn SpacetimeFn,
    points: &[[f64; 3]],
) -> LeibnizReport {
    assert!(
        (1..=2).contains(&word.len()),
        "Leibniz checks cover words of length 1 and 2"
    );
    let mut rows = Vec::with_capacity(points.len());
    let mut rhs = Vec::with_capacity(points.len());
    let mut scale = 0.0f64;
    for &p in points {
        let (f, g) = (phi.jet(p, 3), psi.jet(p, 3));
        let q = |a: &Jet, b: &Jet| null_form_jet(a, b);
        let ap = |id: VectorFieldId, j: &Jet| apply_vf_jet(id, j, p);
        if let [a] = *word {
            let lhs = ap(a, &q(&f, &g)).value();
            let lead = q(&ap(a, &f), &g).value() + q(&f, &ap(a, &g)).value();
            rows.push(vec![q(&f, &g).value()]);
            rhs.push(lhs - lead);
            scale = scale.max(lhs.abs());
        } else if let [a, b] = *word {
            let (af, ag, bf, bg) = (ap(a, &f), ap(a, &g), ap(b, &f), ap(b, &g));
            let lhs = ap(a, &ap(b, &q(&f, &g))).value();
            let lead = q(&ap(a, &bf), &g).value()
                + q(&af, &bg).value()
                + q(&bf, &ag).value()
                + q(&f, &ap(a, &bg)).value();
            rows.push(vec![
                q(&bf, &g).value(),
                q(&f, &bg).value(),
                q(&af, &g).value(),
                q(&f, &ag).value(),
                q(&f, &g).value(),
            ]);
            rhs.push(lhs - lead);
            scale = scale.max(lhs.abs());
        }
    }
    let coef = solve_least_squares(&rows, &rhs);
    let max_residual = rows.iter().zip(&rhs).fold(0.0f64, |m, (r, y)| {
        let fit: f64 = r.iter().zip(&coef).map(|(a, c)| a * c).sum();
        m.max((y - fit).abs())
    });
    let labels: Vec<String> = if word.len() == 1 {
        vec!["Q0(phi,psi)".into()]
    } else {
        let (a, b) = (word[0].name(), word[1].name());
        vec![
            format!("Q0({b} phi,psi)"),
            format!("Q0(phi,{b} psi)"),
            format!("Q0({a} phi,psi)"),
            format!("Q0(phi,{a} psi)"),
            "Q0(phi,psi)".into(),
        ]
    };
    LeibnizReport {
        word: word.to_vec(),
        coefficients: labels.into_iter().zip(coef).collect(),
        max_residual,
        scale,
    }
}

/// Expected lower-order coefficients in the order used by [`gamma_nullform_leibniz`].
pub fn expected_leibniz_coefficients(word: &[VectorFieldId]) -> Vec<f64> {
    match *word {
        [a] => vec![a.leibniz_constant()],
        [a, b] => {
            let (ca, cb) = (a.leibniz_constant(), b.leibniz_constant());
            vec![ca, ca, cb, cb, ca * cb]
        }
        _ => vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Polynomial;

    fn poly(f: impl Fn(&Jet, &Jet, &Jet) -> Jet) -> Polynomial {
        let t = Jet::variable(4, 0, 0.0);
        let x1 = Jet::variable(4, 1, 0.0);
        let x2 = Jet::variable(4, 2, 0.0);
        Polynomial(f(&t, &x1, &x2))
    }

    #[test]
    fn gamma1_on_t_and_gamma4_on_t_squared() {
        let t = poly(|t, _, _| t.clone());
        assert_eq!(apply_vf(VectorFieldId::Gamma1, &t, [0.3, 0.4, 0.5]), 1.0);
        let t2 = poly(|t, _, _| t * t);
        assert_eq!(apply_vf(VectorFieldId::Gamma4, &t2, [1.0, 0.0, 0.0]), 2.0);
    }

    #[test]
    fn operator_identities_hold_on_coefficients() {
        let add = |a: [Affine; 3], b: [Affine; 3], s: f64| {
            let mut out = a;
            for k in 0..3 {
                for m in 0..4 {
                    out[k][m] += s * b[k][m];
                }
            }
            out
        };
        use VectorFieldId::*;
        assert_eq!(Gamma4.cartesian_coeffs(), add(L0.cartesian_coeffs(), L1.cartesian_coeffs(), -1.0));
        assert_eq!(Gamma5.cartesian_coeffs(), add(L0.cartesian_coeffs(), L1.cartesian_coeffs(), 1.0));
        assert_eq!(Gamma6.cartesian_coeffs(), add(L2.cartesian_coeffs(), Omega.cartesian_coeffs(), 1.0));
    }

    #[test]
    fn goursat_table_matches_change_of_variables() {
        for id in VectorFieldId::GAMMA {
            assert_eq!(
                id.goursat_coeffs(),
                goursat_from_cartesian(id.cartesian_coeffs()),
                "{}",
                id.name()
            );
        }
    }

    #[test]
    fn goursat_point_round_trip() {
        let g = GoursatPoint::from_cartesian(1.25, -0.5, 3.0);
        assert_eq!((g.xi, g.eta), (0.75, 1.75));
        assert_eq!(g.to_cartesian(), [1.25, -0.5, 3.0]);
    }

    #[test]
    fn polynomial_suite_commutators() {
        let rows = commutator_suite(&VectorFieldId::GAMMA, 42, 20, 4);
        for r in rows {
            assert!(r.max_lambda_error < 1e-8, "{r:?}");
        }
        for (name, gap) in decomposition_defects(42, 50, 4) {
            assert!(gap < 1e-12, "{name} {gap}");
        }
    }

    #[test]
    fn commutator_examples() {
        let t2 = poly(|t, _, _| t * t);
        let pts = [[1.0, 0.0, 0.0], [0.5, -0.3, 0.2], [2.0, 1.0, -1.0]];
        let r = commutator_box(VectorFieldId::Gamma4, &t2, &pts);
        assert!(r.defect.iter().all(|d| (d - 4.0).abs() < 1e-13));
        assert!((r.lambda - 2.0).abs() < 1e-13 && r.max_residual < 1e-13);
        let x2t = poly(|t, _, x2| x2 * t);
        let r = commutator_box(VectorFieldId::Gamma6, &x2t, &pts);
        assert_eq!(r.lambda, 0.0);
        assert!(r.max_residual < 1e-14);
        // Γ6(x2 t) = t² + t x1 + x2²
        let v = apply_vf(VectorFieldId::Gamma6, &x2t, [0.5, -0.3, 0.2]);
        assert!((v - (0.25 - 0.15 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn leibniz_for_dt_is_exact() {
        let f = poly(|t, x1, x2| &(t * x1) + &(x2 * x2));
        let g = poly(|t, x1, _| &(t * t) - &(x1 * t));
        let pts = [[0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [0.7, 0.0, -0.4]];
        let r = gamma_nullform_leibniz(&[VectorFieldId::Dt], &f, &g, &pts);
        assert!(r.coefficients[0].1.abs() < 1e-13 && r.max_residual < 1e-13);
    }

    #[test]
    fn null_functions_annihilate_everything() {
        // φ = ψ = (t + x1)²
        let f = poly(|t, x1, _| {
            let xi = t + x1;
            &xi * &xi
        });
        let pts = [[0.1, 0.2, 0.3], [1.0, -1.0, 0.5]];
        for &p in &pts {
            let j = f.jet(p, 3);
            assert_eq!(null_form_jet(&j, &j).value(), 0.0);
        }
        let r = gamma_nullform_leibniz(&[VectorFieldId::Gamma5], &f, &f, &pts);
        assert_eq!(r.scale, 0.0);
        assert_eq!(r.max_residual, 0.0);
    }
}
