//! Acceptance run: one PASS/FAIL line per criterion, then a single assertion
//! that every line passed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use membrane_core::evolver::{init_cauchy, Background, Evolver, RunOutput, SimConfig};
use membrane_core::extremal::operator_algebra;
use membrane_core::grid::Grid2D;
use membrane_core::inequalities::{run_estimate, Estimate, HARDY_BOUND, MAX_DRIFT};
use membrane_core::profile::WaveProfile;
use membrane_core::traveling_waves::{
    affine_subluminal_solution, lightspeed_solution, residual_convergence, residual_converges, superluminal_solution,
};
use membrane_core::vector_fields::{commutator_suite, decomposition_defects, VectorFieldId};

struct Ledger {
    lines: Vec<(usize, bool, String)>,
}

impl Ledger {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        println!("{} criterion {id:>2}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id, pass, detail));
    }
}

fn sech(amplitude: f64) -> WaveProfile {
    WaveProfile::Sech { amplitude, shift: 0.0 }
}

fn exact_residuals(l: &mut Ledger) {
    let sizes = [65, 129, 257, 513];
    let mut pass = true;
    let mut parts = Vec::new();
    for order in [2, 4] {
        let fams = [
            ("affine", affine_subluminal_solution(&[0.3, 0.4], 0.1, 0.5).unwrap()),
            ("lightspeed", lightspeed_solution(0.0, 1.0, sech(0.5), 1.0).unwrap()),
            ("superluminal", superluminal_solution(1.5, sech(0.5), 1.0).unwrap()),
        ];
        for (name, sol) in fams {
            let t0 = Instant::now();
            let rows = residual_convergence(&sol, 2.0, &sizes, 0.3, 0.7, order).unwrap();
            let ok = residual_converges(&rows, order) && t0.elapsed() < Duration::from_secs(60);
            pass &= ok;
            let worst = rows.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min);
            let worst = if worst.is_finite() { format!("{worst:.3}") } else { "exact".into() };
            parts.push(format!("{name}/o{order} min order {worst}"));
        }
    }
    l.record(1, pass, format!("residual convergence up to 513^2, order >= scheme - 0.3: {}", parts.join(", ")));
}

fn operator_algebra_line(l: &mut Ledger) {
    let r = operator_algebra(42, 1000).unwrap();
    let pass = r.null_form_gap <= 1e-11 && r.m_form_rel_gap <= 1e-10;
    l.record(
        2,
        pass,
        format!(
            "Q0 cartesian vs goursat gap {:.2e} (<= 1e-11), m-form vs Delta^1.5 residual rel gap {:.2e} (<= 1e-10) on 1000 jets",
            r.null_form_gap, r.m_form_rel_gap
        ),
    );
}

fn commutators(l: &mut Ledger) {
    let rows = commutator_suite(&VectorFieldId::GAMMA, 42, 100, 4);
    let lam = rows.iter().map(|r| r.max_lambda_error).fold(0.0, f64::max);
    let dec = decomposition_defects(42, 100, 4);
    let gap = dec.iter().map(|d| d.1).fold(0.0, f64::max);
    let expected_ok = rows.iter().all(|r| {
        let want = match r.id {
            VectorFieldId::Gamma4 | VectorFieldId::Gamma5 => 2.0,
            _ => 0.0,
        };
        r.expected == want
    });
    l.record(
        3,
        expected_ok && lam <= 1e-8 && gap <= 1e-12,
        format!("max |lambda - expected| {lam:.2e} (<= 1e-8), decomposition gap {gap:.2e} (<= 1e-12)"),
    );
}

fn hardy(l: &mut Ledger) {
    let r = run_estimate(Estimate::Hardy, 100, 42, true).unwrap();
    let drift = r.refinement_drift.unwrap();
    l.record(
        4,
        r.max_ratio <= HARDY_BOUND && drift < MAX_DRIFT,
        format!("Hardy max ratio {:.4} (<= 2.1) over 100 bumps, drift {drift:.2e} (< 0.1)", r.max_ratio),
    );
}

fn sobolev_suite(l: &mut Ledger) {
    let mut pass = true;
    let mut parts = Vec::new();
    for e in Estimate::ALL.into_iter().filter(|e| *e != Estimate::Hardy) {
        let r = run_estimate(e, 100, 42, true).unwrap();
        pass &= r.accepted;
        parts.push(format!(
            "{} max {:.3e} drift {} growth {}{}",
            e.name(),
            r.max_ratio,
            r.refinement_drift.map_or("-".into(), |d| format!("{d:.1e}")),
            r.translation_growth.map_or("-".into(), |g| format!("{:+.1}%", 100.0 * g)),
            if r.accepted { "" } else { " REJECTED" }
        ));
    }
    l.record(5, pass, format!("finite, drift < 10%, growth <= +20%: {}", parts.join("; ")));
}

fn background_exactness(l: &mut Ledger) {
    let cfg = SimConfig {
        grid: Grid2D::square(24.0, 257).unwrap(),
        epsilon: 0.0,
        ..Default::default()
    };
    let t0 = Instant::now();
    let ev = Evolver::new(cfg.clone()).unwrap();
    let (mut s, _) = init_cauchy(&cfg).unwrap();
    for _ in 0..100 {
        s = ev.step(&s, f64::INFINITY).unwrap().0;
    }
    let el = t0.elapsed();
    let sup = s.u.sup_abs().max(s.u_t.sup_abs());
    l.record(
        6,
        sup <= 1e-10 && el < Duration::from_secs(60),
        format!("eps = 0, 100 steps on 257^2: sup |u| = {sup:.2e} (<= 1e-10) in {:.1}s", el.as_secs_f64()),
    );
}

fn propagation_ok(out: &RunOutput) -> bool {
    out.summary.support_ok && out.summary.cone_violations == 0
}

fn stability_and_decay(l: &mut Ledger) -> RunOutput {
    let cfg = SimConfig {
        grid: Grid2D::square(24.0, 513).unwrap(),
        t_end: 20.0,
        epsilon: 1e-3,
        background: Background::Lightspeed {
            a: 0.0,
            b: 1.0,
            profile: sech(0.5),
            sign: 1.0,
        },
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = Evolver::new(cfg.clone()).unwrap().run().unwrap();
    let el = t0.elapsed();
    let s = &out.summary;
    let pass = s.max_sup_u <= 10.0 * cfg.epsilon
        && s.energy_ratio_max <= 2.0
        && s.min_delta >= 0.5
        && el < Duration::from_secs(600);
    l.record(
        7,
        pass,
        format!(
            "513^2, t_end 20: sup |u| {:.3e} (<= 1e-2), energy ratio {:.3} (<= 2), min Delta {:.5} (>= 0.5), {:.0}s",
            s.max_sup_u,
            s.energy_ratio_max,
            s.min_delta,
            el.as_secs_f64()
        ),
    );
    let stations_ok = out.stations.len() >= 5 && out.stations.iter().all(|r| (5.0..=40.0).contains(&r.xi_station));
    let slope = s.decay_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    l.record(
        8,
        stations_ok && slope <= -0.10,
        format!(
            "log-log slope of sup |u| over {} stations in [5, 40]: {slope:.4} (<= -0.10; asymptotic -0.25)",
            out.stations.len()
        ),
    );
    out
}

fn flat_energy(l: &mut Ledger) -> RunOutput {
    let cfg = SimConfig {
        grid: Grid2D::square(12.0, 257).unwrap(),
        t_end: 10.0,
        epsilon: 0.1,
        background: Background::None,
        ..Default::default()
    };
    let out = Evolver::new(cfg).unwrap().run().unwrap();
    let d = out.summary.hamiltonian_drift.unwrap();
    let ex = out.summary.excess_hamiltonian_drift.unwrap();
    l.record(
        9,
        d <= 1e-4,
        format!("flat membrane, eps 0.1, t in [0, 10]: Hamiltonian drift {d:.2e} (<= 1e-4); excess-energy drift {ex:.2e} (reported)"),
    );
    out
}

fn finite_propagation(l: &mut Ledger, runs: &[(&str, &RunOutput)]) {
    let pass = runs.iter().all(|(_, r)| propagation_ok(r));
    let parts: Vec<String> = runs
        .iter()
        .map(|(name, r)| {
            let worst = r
                .emissions
                .iter()
                .map(|e| e.support_radius - e.support_bound)
                .fold(f64::NEG_INFINITY, f64::max);
            format!("{name}: max (radius - bound) {worst:+.3}, cone violations {}", r.summary.cone_violations)
        })
        .collect();
    l.record(10, pass, format!("support <= t + 1 + 2h at every emission, Goursat cone: {}", parts.join("; ")));
}

fn run_cli(dir: &Path) {
    let bin = env!("CARGO_BIN_EXE_membrane-lab");
    for args in [
        vec!["evolve", "--t-end", "2", "--n", "65", "--half-width", "4"],
        vec!["inequalities", "--which", "hardy,nullform_xi,sobolev", "--count", "20"],
        vec!["commutators", "--count", "20"],
    ] {
        let st = Command::new(bin).arg("--out").arg(dir).args(&args).output().unwrap();
        assert!(st.status.code().is_some());
    }
}

fn determinism(l: &mut Ledger) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_cli(a.path());
    run_cli(b.path());
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.ends_with("_manifest.json"))
        .collect();
    names.sort();
    let same = !names.is_empty()
        && names
            .iter()
            .all(|n| std::fs::read(a.path().join(n)).ok() == std::fs::read(b.path().join(n)).ok());
    l.record(11, same, format!("two CLI runs, {} output files byte-identical", names.len()));
}

#[test]
fn acceptance_criteria() {
    let mut l = Ledger { lines: Vec::new() };
    exact_residuals(&mut l);
    operator_algebra_line(&mut l);
    commutators(&mut l);
    hardy(&mut l);
    sobolev_suite(&mut l);
    background_exactness(&mut l);
    let stab = stability_and_decay(&mut l);
    let flat = flat_energy(&mut l);
    finite_propagation(&mut l, &[("stability run", &stab), ("flat run", &flat)]);
    determinism(&mut l);
    l.lines.sort_by_key(|x| x.0);
    let failed: Vec<usize> = l.lines.iter().filter(|x| !x.1).map(|x| x.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
