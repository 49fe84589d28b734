use std::sync::Arc;

use membrane_core::evolver::*;
use membrane_core::grid::{Grid2D, ScalarField};
use membrane_core::jet::{Jet, SpacetimeFn};
use membrane_core::profile::WaveProfile;

/// `amp · exp(−|x|²) · cos t`, a smooth non-compact reference.
struct Gauss {
    amp: f64,
}

impl SpacetimeFn for Gauss {
    fn jet(&self, p: [f64; 3], order: usize) -> Jet {
        let t = Jet::variable(order, 0, p[0]);
        let x1 = Jet::variable(order, 1, p[1]);
        let x2 = Jet::variable(order, 2, p[2]);
        let q = &(&x1 * &x1) + &(&x2 * &x2);
        let e = (-q.value()).exp();
        let gauss = (&q * -1.0).compose(&vec![e; order + 1]);
        let (c, s) = (p[0].cos(), p[0].sin());
        let trig: Vec<f64> = (0..=order).map(|k| [c, -s, -c, s][k % 4]).collect();
        &(&gauss * &t.compose(&trig)) * self.amp
    }
}

fn sech_background() -> Background {
    Background::Lightspeed {
        a: 0.0,
        b: 1.0,
        profile: WaveProfile::Sech { amplitude: 0.5, shift: 0.0 },
        sign: 1.0,
    }
}

fn manufactured_error(n: usize, background: Background) -> f64 {
    let sol = Arc::new(Gauss { amp: 0.1 });
    let cfg = SimConfig {
        grid: Grid2D::square(5.0, n).unwrap(),
        t_end: 1.0,
        emit_every: 1.0,
        background: background.clone(),
        ..Default::default()
    };
    let g = cfg.grid;
    let u0 = ScalarField::from_fn(g, 0.0, |a, b| sol.eval([0.0, a, b]));
    let ut0 = ScalarField::from_fn(g, 0.0, |a, b| sol.jet([0.0, a, b], 1).d(0));
    let ev = Evolver::new(cfg).unwrap().with_forcing(manufactured_forcing(sol.clone(), background));
    let out = ev.run_from(SimState::from_fields(0.0, u0, ut0), 0.0).unwrap();
    let exact = ScalarField::from_fn(g, 1.0, |a, b| sol.eval([1.0, a, b]));
    out.final_state.u.max_abs_diff(&exact)
}

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn manufactured_solution_converges_at_scheme_order() {
    for bg in [Background::None, sech_background()] {
        let errs: Vec<f64> = [41, 81, 161].iter().map(|n| manufactured_error(*n, bg.clone())).collect();
        let p = orders(&errs);
        assert!(p.iter().all(|p| *p >= 3.7), "{errs:?} {p:?}");
    }
}

fn exchange_gap(n: usize) -> f64 {
    let run = |mode| {
        let cfg = SimConfig {
            grid: Grid2D::square(4.0, n).unwrap(),
            t_end: 1.5,
            emit_every: 1.5,
            epsilon: 0.05,
            mode,
            ..Default::default()
        };
        Evolver::new(cfg).unwrap().run().unwrap().final_state
    };
    let a = run(EvolutionMode::Perturbation);
    let b = run(EvolutionMode::FullSurface);
    a.u.max_abs_diff(&b.u)
}

#[test]
fn full_surface_and_perturbation_agree_to_scheme_order() {
    let gaps: Vec<f64> = [65, 129, 257].iter().map(|n| exchange_gap(*n)).collect();
    let p = orders(&gaps);
    assert!(p.iter().all(|p| *p >= 3.7), "{gaps:?} {p:?}");
}

#[test]
fn small_flat_data_follow_the_linear_wave_equation() {
    let run = |mode, eps| {
        let cfg = SimConfig {
            grid: Grid2D::square(4.0, 65).unwrap(),
            t_end: 2.0,
            emit_every: 2.0,
            epsilon: eps,
            mode,
            background: Background::None,
            ..Default::default()
        };
        Evolver::new(cfg).unwrap().run().unwrap().final_state.u
    };
    // the membrane nonlinearity is cubic, so the relative gap scales like eps²
    let rel = |eps: f64| {
        let (a, b) = (run(EvolutionMode::Perturbation, eps), run(EvolutionMode::LinearReference, eps));
        a.max_abs_diff(&b) / b.sup_abs()
    };
    let (r2, r3) = (rel(1e-2), rel(1e-3));
    assert!(r3 < 10.0 * 1e-6, "{r3}");
    assert!((r2 / r3 - 100.0).abs() < 5.0, "{r2} {r3}");
}

#[test]
fn support_grows_monotonically_within_the_light_cone() {
    let cfg = SimConfig {
        grid: Grid2D::square(6.0, 129).unwrap(),
        t_end: 4.0,
        emit_every: 0.5,
        epsilon: 1e-2,
        ..Default::default()
    };
    let out = Evolver::new(cfg).unwrap().run().unwrap();
    assert!(out.summary.support_ok);
    assert_eq!(out.summary.cone_violations, 0);
    for w in out.emissions.windows(2) {
        assert!(w[1].support_radius >= w[0].support_radius, "{} -> {}", w[0].support_radius, w[1].support_radius);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let cfg = SimConfig {
        grid: Grid2D::square(4.0, 49).unwrap(),
        t_end: 1.0,
        emit_every: 0.25,
        ..Default::default()
    };
    let a = Evolver::new(cfg.clone()).unwrap().run().unwrap();
    let b = Evolver::new(cfg).unwrap().run().unwrap();
    assert_eq!(a.emissions, b.emissions);
    assert_eq!(a.final_state, b.final_state);
}
