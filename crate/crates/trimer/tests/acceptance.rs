//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The benchmark trajectories are integrated once at tol = 1e-10 and
//! shared across criteria through a lazily initialized harness.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use trimer::bessel::bessel_zero;
use trimer::effective::{
    averaged_coupling, build_effective_hamiltonian, closed_form_coupling, propagate_effective,
    DetunedLinks, GAP_TOL,
};
use trimer::figures::{FigureRun, FIGURES};
use trimer::fock::{build_basis, FockState};
use trimer::model::ModelParams;
use trimer::planner::{
    default_verification_horizon, plan_center_transport, plan_edge_transport, verify_plan,
    BaseParams, Direction, TunnelingPlan, VerifyOptions,
};
use trimer::propagator::{propagate, StateVector};

const TOL: f64 = 1e-10;

struct TimedRun {
    run: FigureRun,
    elapsed: Duration,
}

fn figure_runs() -> &'static [TimedRun] {
    static RUNS: OnceLock<Vec<TimedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        FIGURES
            .iter()
            .map(|spec| {
                let start = Instant::now();
                let run = trimer::figures::run_figure(spec, TOL).expect("benchmark run");
                TimedRun {
                    run,
                    elapsed: start.elapsed(),
                }
            })
            .collect()
    })
}

fn timed_run(id: &str) -> &'static TimedRun {
    figure_runs()
        .iter()
        .find(|t| t.run.spec.id == id)
        .expect("known figure id")
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn figure_criterion(number: &str, id: &str) {
    let t = timed_run(id);
    let detail: Vec<String> = t
        .run
        .checks
        .iter()
        .map(|c| format!("{} = {:.4}", c.name, c.measured))
        .collect();
    report(
        &format!("{number} (fig {id})"),
        t.run.pass,
        &detail.join("; "),
    );
}

#[test]
fn criterion_01_bessel_zero_anchors() {
    let anchors = [
        (1u32, 1usize, 3.8317),
        (2, 1, 5.1356),
        (3, 1, 6.3802),
        (1, 2, 7.0156),
        (4, 1, 7.5883),
    ];
    let mut worst = 0.0f64;
    for (n, s, quoted) in anchors {
        let z = bessel_zero(n, s).unwrap().value;
        worst = worst.max((z - quoted).abs());
    }
    report(
        "01 (Bessel anchors)",
        worst < 5e-5,
        &format!("max |zero - quoted| = {worst:.2e}"),
    );
}

#[test]
fn criterion_02_fig_1a_freeze() {
    let t = timed_run("1a");
    let within_budget = t.elapsed < Duration::from_secs(5);
    let detail: Vec<String> = t
        .run
        .checks
        .iter()
        .map(|c| format!("{} = {:.4}", c.name, c.measured))
        .collect();
    report(
        "02 (fig 1a)",
        t.run.pass && within_budget,
        &format!("{}; runtime {:.2?}", detail.join("; "), t.elapsed),
    );
}

#[test]
fn criterion_03_fig_1b_one_boson() {
    figure_criterion("03", "1b");
}

#[test]
fn criterion_04_fig_1c_two_bosons() {
    figure_criterion("04", "1c");
}

#[test]
fn criterion_05_fig_2a_single_release() {
    figure_criterion("05", "2a");
}

#[test]
fn criterion_06_fig_2b_double_release() {
    figure_criterion("06", "2b");
}

#[test]
fn criterion_07_fig_2c_triple_release() {
    figure_criterion("07", "2c");
}

#[test]
fn criterion_08_fig_3_detuning_robustness() {
    figure_criterion("08", "3");
}

#[test]
fn criterion_09_effective_coupling_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut links_checked = 0usize;
    for n in 2..=5u32 {
        for m in -2..=2i64 {
            for &z in &[0.5, 2.0, 5.1356] {
                let omega = 35.0;
                let params = ModelParams {
                    v: 1.0,
                    u0: 5.0 + 2.0 * omega,
                    u1: 5.0 + omega,
                    u2: 5.0,
                    eps0: m as f64 * omega,
                    eps1: z * omega,
                    omega,
                    n,
                };
                let mut links: Vec<(FockState, FockState)> = Vec::new();
                for k in 0..n {
                    links.push((
                        FockState::new(n - k, k, 0),
                        FockState::new(n - k - 1, k + 1, 0),
                    ));
                    links.push((
                        FockState::new(0, k, n - k),
                        FockState::new(0, k + 1, n - k - 1),
                    ));
                }
                for k in 1..n {
                    links.push((FockState::new(n - k, k, 0), FockState::new(n - k, k - 1, 1)));
                    links.push((FockState::new(0, k, n - k), FockState::new(1, k - 1, n - k)));
                }
                for (a, b) in links {
                    let avg = averaged_coupling(&params, a, b, GAP_TOL).unwrap();
                    let closed = closed_form_coupling(&params, a, b).unwrap();
                    worst = worst.max((avg - closed).abs());
                    links_checked += 1;
                }
            }
        }
    }
    report(
        "09 (averaging vs closed form)",
        worst < 1e-8 && start.elapsed() < Duration::from_secs(1),
        &format!(
            "{links_checked} links, max |quadrature - Bessel| = {worst:.2e}, {:.2?}",
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_10_full_vs_effective() {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for id in ["1a", "1b", "1c", "2a", "2b", "2c"] {
        let t = timed_run(id);
        let params = t.run.spec.params();
        let basis = build_basis(params.n).unwrap();
        let eff = build_effective_hamiltonian(&params, &basis, GAP_TOL, DetunedLinks::Reject)
            .unwrap();
        let start = FockState::new(t.run.spec.initial.0, t.run.spec.initial.1, t.run.spec.initial.2);
        let psi0 = StateVector::basis_state(&basis, start).unwrap();
        let eff_traj = propagate_effective(&eff, &psi0, &t.run.strobo.times).unwrap();
        let mut disc = 0.0f64;
        for (k, full) in t.run.strobo.populations.iter().enumerate() {
            for (f, e) in full.iter().zip(&eff_traj.populations[k]) {
                disc = disc.max((f - e).abs());
            }
        }
        details.push(format!("{id}: {disc:.4}"));
        worst = worst.max(disc);
    }
    report(
        "10 (stroboscopic full vs averaged)",
        worst < 0.08,
        &details.join(", "),
    );
}

#[test]
fn criterion_11_unitarity() {
    let mut worst = 0.0f64;
    for t in figure_runs() {
        worst = worst.max(t.run.trajectory.norm_drift);
    }
    report(
        "11 (norm drift)",
        worst < 1e-8,
        &format!("max drift over benchmark runs = {worst:.2e}"),
    );
}

fn all_plans(n: u32) -> Vec<(BaseParams, TunnelingPlan)> {
    let base = BaseParams {
        v: 1.0,
        u0: 75.0,
        u1: 40.0,
        u2: 5.0,
        omega: 35.0,
        n,
    };
    let mut plans = Vec::new();
    for count in 0..n {
        for dir in [Direction::Left, Direction::Right] {
            plans.push((base, plan_center_transport(&base, count, dir, 1).unwrap()));
        }
    }
    for count in 0..n.saturating_sub(1) {
        for dir in [Direction::Left, Direction::Right] {
            plans.push((base, plan_edge_transport(&base, count, dir, 1).unwrap()));
        }
    }
    plans
}

#[test]
fn criterion_12_planner_closure() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in [2u32, 3, 4] {
        for (base, plan) in all_plans(n) {
            let v = verify_plan(&plan, &base, VerifyOptions::default()).unwrap();
            checked += 1;
            if !v.pass {
                failures.push(format!(
                    "N={n} {:?} count={} -> measured {} (dev {:.3}, leak {:.4})",
                    plan.pathway, plan.transport_count, v.transported_count, v.max_deviation,
                    v.leakage
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "12 (planner closure)",
        failures.is_empty() && elapsed < Duration::from_secs(60),
        &format!(
            "{checked} plans verified in {elapsed:.2?}{}{}",
            if failures.is_empty() { "" } else { "; failures: " },
            failures.join(" | ")
        ),
    );
}

#[test]
fn criterion_13_mirror_duality() {
    let mut worst = 0.0f64;
    for n in [2u32, 3, 4] {
        for (base, plan) in all_plans(n) {
            let basis = build_basis(n).unwrap();
            let params = plan.params(&base);
            let t_end = default_verification_horizon(&plan, &base).unwrap();
            let dt = params.period() / 2.0;
            let psi0 = StateVector::basis_state(&basis, plan.initial_state).unwrap();
            let traj = propagate(&params, &basis, &psi0, t_end, dt, TOL).unwrap();
            // mirror image: both tilt components flip together
            let traj_m = propagate(
                &params.mirrored(),
                &basis,
                &psi0.mirrored(&basis),
                t_end,
                dt,
                TOL,
            )
            .unwrap();
            for (k, p) in traj.populations.iter().enumerate() {
                let q = traj_m.populations[k];
                worst = worst
                    .max((p[0] - q[2]).abs())
                    .max((p[1] - q[1]).abs())
                    .max((p[2] - q[0]).abs());
            }
        }
    }
    report(
        "13 (mirror duality)",
        worst < 1e-4,
        &format!("max mirrored-population mismatch = {worst:.2e}"),
    );
}
