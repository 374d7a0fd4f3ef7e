//! Reference drive configurations and their pass criteria.
//!
//! Seven benchmark runs exercise the full transport repertoire at N = 4,
//! U0 = 75, U1 = 40, U2 = 5, omega = 35, v = 1: three edge starts |3,1,0>
//! moving zero, one and two particles into the center, three central
//! starts |0,4,0> releasing one, two and three particles to the right,
//! and one detuned variant (U2 = 10) of the single-particle release.
//! Drive amplitudes are the four-decimal Bessel-zero values the runs were
//! designed around; they are deliberately kept as quoted rather than
//! recomputed, so this table is the single source for both the CLI and
//! the acceptance suite.
//!
//! Pass metrics are evaluated at stroboscopic times over a horizon of
//! three slowest averaged-model periods (the frozen run, which has no
//! period, uses a fixed horizon of 100). Stroboscopic sampling is where
//! the averaged description applies; densely sampled micromotion would
//! smear the comparison without testing anything the theory claims.

use serde::Serialize;

use crate::effective::{
    build_effective_hamiltonian, reachable_subspace, slowest_population_period, DetunedLinks,
    GAP_TOL,
};
use crate::error::Result;
use crate::fock::{build_basis, FockState};
use crate::model::ModelParams;
use crate::planner::FREEZE_HORIZON;
use crate::propagator::{propagate, stroboscopic, StateVector, Trajectory};

/// How the simulation horizon of a benchmark is chosen.
#[derive(Debug, Clone, Copy)]
pub enum Horizon {
    Fixed(f64),
    /// 3x the slowest averaged-model period, computed at the full-precision
    /// zero of the given Bessel order (the quoted four-decimal amplitude is
    /// too coarse for the reachability analysis).
    Derived { order: u32, rank: usize },
}

/// One benchmark configuration.
#[derive(Debug, Clone, Copy)]
pub struct FigureSpec {
    pub id: &'static str,
    pub u2: f64,
    /// eps0 / omega.
    pub m: f64,
    /// eps1 / omega, as quoted to four decimals.
    pub eps1_over_omega: f64,
    pub initial: (u32, u32, u32),
    pub horizon: Horizon,
    pub description: &'static str,
}

pub const FIGURES: &[FigureSpec] = &[
    FigureSpec {
        id: "1a",
        u2: 5.0,
        m: -2.0,
        eps1_over_omega: 3.8317,
        initial: (3, 1, 0),
        horizon: Horizon::Fixed(100.0),
        description: "edge start, complete freeze",
    },
    FigureSpec {
        id: "1b",
        u2: 5.0,
        m: -1.0,
        eps1_over_omega: 5.1356,
        initial: (3, 1, 0),
        horizon: Horizon::Derived { order: 2, rank: 1 },
        description: "edge start, one boson left -> center",
    },
    FigureSpec {
        id: "1c",
        u2: 5.0,
        m: 0.0,
        eps1_over_omega: 6.3802,
        initial: (3, 1, 0),
        horizon: Horizon::Derived { order: 3, rank: 1 },
        description: "edge start, two bosons left -> center",
    },
    FigureSpec {
        id: "2a",
        u2: 5.0,
        m: 1.0,
        eps1_over_omega: 5.1356,
        initial: (0, 4, 0),
        horizon: Horizon::Derived { order: 2, rank: 1 },
        description: "central start, one boson center -> right",
    },
    FigureSpec {
        id: "2b",
        u2: 5.0,
        m: 2.0,
        eps1_over_omega: 7.0156,
        initial: (0, 4, 0),
        horizon: Horizon::Derived { order: 1, rank: 2 },
        description: "central start, two bosons center -> right",
    },
    FigureSpec {
        id: "2c",
        u2: 5.0,
        m: -1.0,
        eps1_over_omega: 7.5883,
        initial: (0, 4, 0),
        horizon: Horizon::Derived { order: 4, rank: 1 },
        description: "central start, three bosons center -> right",
    },
    FigureSpec {
        id: "3",
        u2: 10.0,
        m: 1.0,
        eps1_over_omega: 5.1356,
        initial: (0, 4, 0),
        horizon: Horizon::Derived { order: 2, rank: 1 },
        description: "single-boson release with detuning beta = 5",
    },
];

pub fn figure(id: &str) -> Option<&'static FigureSpec> {
    FIGURES.iter().find(|f| f.id == id)
}

impl FigureSpec {
    pub fn params(&self) -> ModelParams {
        let omega = 35.0;
        ModelParams {
            v: 1.0,
            u0: 75.0,
            u1: 40.0,
            u2: self.u2,
            eps0: self.m * omega,
            eps1: self.eps1_over_omega * omega,
            omega,
            n: 4,
        }
    }

    /// Simulation horizon; for derived horizons the reachability analysis
    /// runs on the resonant interaction set (the detuned benchmark shares
    /// the resonant one's timescale).
    pub fn t_end(&self) -> Result<f64> {
        match self.horizon {
            Horizon::Fixed(t) => Ok(t),
            Horizon::Derived { order, rank } => {
                let z = crate::bessel::bessel_zero(order, rank)?.value;
                let mut params = self.params();
                params.u2 = 5.0;
                params.eps1 = z * params.omega;
                let basis = build_basis(params.n)?;
                let eff =
                    build_effective_hamiltonian(&params, &basis, GAP_TOL, DetunedLinks::Reject)?;
                let start = FockState::new(self.initial.0, self.initial.1, self.initial.2);
                let sub = reachable_subspace(&eff, start, 1e-10)?;
                Ok(match slowest_population_period(&sub) {
                    Some(p) => 3.0 * p,
                    None => FREEZE_HORIZON,
                })
            }
        }
    }
}

/// One evaluated pass criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionCheck {
    pub name: String,
    pub measured: f64,
    pub passed: bool,
}

/// A complete benchmark run: dense trajectory, stroboscopic subsample and
/// the evaluated criteria.
#[derive(Debug)]
pub struct FigureRun {
    pub spec: &'static FigureSpec,
    pub t_end: f64,
    pub trajectory: Trajectory,
    pub strobo: Trajectory,
    pub checks: Vec<CriterionCheck>,
    pub pass: bool,
}

/// Simulate a benchmark and evaluate its criteria. `tol` is the integrator
/// tolerance (1e-10 for acceptance runs).
pub fn run_figure(spec: &'static FigureSpec, tol: f64) -> Result<FigureRun> {
    let params = spec.params();
    let basis = build_basis(params.n)?;
    let start = FockState::new(spec.initial.0, spec.initial.1, spec.initial.2);
    let psi0 = StateVector::basis_state(&basis, start)?;
    let t_end = spec.t_end()?;
    let traj = propagate(&params, &basis, &psi0, t_end, params.period() / 4.0, tol)?;
    let strobo = stroboscopic(&traj, params.omega)?;
    let checks = evaluate(spec, &strobo);
    let pass = checks.iter().all(|c| c.passed);
    Ok(FigureRun {
        spec,
        t_end,
        trajectory: traj,
        strobo,
        checks,
        pass,
    })
}

fn prob_series<'a>(traj: &'a Trajectory, state: FockState) -> impl Iterator<Item = f64> + 'a {
    let idx = traj
        .state_labels
        .iter()
        .position(|s| *s == state)
        .expect("state in basis");
    traj.probabilities.iter().map(move |row| row[idx])
}

fn max_prob(traj: &Trajectory, state: FockState) -> f64 {
    prob_series(traj, state).fold(0.0, f64::max)
}

fn min_kept(traj: &Trajectory, states: &[FockState]) -> f64 {
    let idxs: Vec<usize> = states
        .iter()
        .map(|s| traj.state_labels.iter().position(|x| x == s).unwrap())
        .collect();
    traj.probabilities
        .iter()
        .map(|row| idxs.iter().map(|&i| row[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn max_outside(traj: &Trajectory, kept: &[FockState]) -> f64 {
    let idxs: Vec<usize> = kept
        .iter()
        .map(|s| traj.state_labels.iter().position(|x| x == s).unwrap())
        .collect();
    traj.probabilities
        .iter()
        .map(|row| row.iter().sum::<f64>() - idxs.iter().map(|&i| row[i]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest single-state probability over states outside `kept`.
fn max_other_state_prob(traj: &Trajectory, kept: &[FockState]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, s) in traj.state_labels.iter().enumerate() {
        if kept.contains(s) {
            continue;
        }
        for row in &traj.probabilities {
            worst = worst.max(row[i]);
        }
    }
    worst
}

fn population_series(traj: &Trajectory, well: usize) -> Vec<f64> {
    traj.populations.iter().map(|p| p[well - 1]).collect()
}

/// Interior local maxima of a sampled series (turning points, not the
/// initial or final sample).
fn local_maxima(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..series.len().saturating_sub(1) {
        if series[i] >= series[i - 1] && series[i] >= series[i + 1] {
            out.push(series[i]);
        }
    }
    out
}

fn st(n1: u32, n2: u32, n3: u32) -> FockState {
    FockState::new(n1, n2, n3)
}

fn evaluate(spec: &FigureSpec, strobo: &Trajectory) -> Vec<CriterionCheck> {
    let mut checks = Vec::new();
    let mut push = |name: String, measured: f64, passed: bool| {
        checks.push(CriterionCheck {
            name,
            measured,
            passed,
        });
    };
    match spec.id {
        "1a" => {
            let p0 = strobo.populations[0];
            for j in 0..3 {
                let dev = strobo
                    .populations
                    .iter()
                    .map(|p| (p[j] - p0[j]).abs())
                    .fold(0.0, f64::max);
                push(format!("max |<n{}> - init| < 0.05", j + 1), dev, dev < 0.05);
            }
        }
        "1b" => {
            let n1 = population_series(strobo, 1);
            let min = n1.iter().copied().fold(f64::INFINITY, f64::min);
            push("<n1> minimum in [1.95, 2.10]".into(), min, (1.95..=2.10).contains(&min));
            let peaks = local_maxima(&n1);
            let recurrence = peaks
                .iter()
                .copied()
                .rfind(|p| (2.95..=3.0).contains(p))
                .unwrap_or(f64::NAN);
            push(
                "<n1> attains a maximum in [2.95, 3.0]".into(),
                recurrence,
                recurrence.is_finite(),
            );
            let n3max = population_series(strobo, 3).iter().copied().fold(0.0, f64::max);
            push("max <n3> < 0.05".into(), n3max, n3max < 0.05);
        }
        "1c" => {
            let n1 = population_series(strobo, 1);
            let min = n1.iter().copied().fold(f64::INFINITY, f64::min);
            push("<n1> minimum in [0.95, 1.15]".into(), min, (0.95..=1.15).contains(&min));
            let n3max = population_series(strobo, 3).iter().copied().fold(0.0, f64::max);
            push("max <n3> < 0.05".into(), n3max, n3max < 0.05);
        }
        "2a" => {
            let p031 = max_prob(strobo, st(0, 3, 1));
            push("max P(0,3,1) > 0.9".into(), p031, p031 > 0.9);
            let other = max_other_state_prob(strobo, &[st(0, 4, 0), st(0, 3, 1)]);
            push("every other state's probability < 0.05".into(), other, other < 0.05);
        }
        "2b" => {
            let kept = min_kept(strobo, &[st(0, 4, 0), st(0, 3, 1), st(0, 2, 2)]);
            push("min P(040)+P(031)+P(022) > 0.95".into(), kept, kept > 0.95);
        }
        "2c" => {
            let kept = min_kept(
                strobo,
                &[st(0, 4, 0), st(0, 3, 1), st(0, 2, 2), st(0, 1, 3)],
            );
            push("min sum P(0,4-n,n) > 0.95".into(), kept, kept > 0.95);
        }
        "3" => {
            let p031 = max_prob(strobo, st(0, 3, 1));
            push("max P(0,3,1) > 0.8".into(), p031, p031 > 0.8);
            let leak = max_outside(strobo, &[st(0, 4, 0), st(0, 3, 1)]);
            push("leakage outside the pair < 0.1".into(), leak, leak < 0.1);
        }
        other => panic!("unknown figure id {other}"),
    }
    checks
}
