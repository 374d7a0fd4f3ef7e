//! Drive-parameter planning for transporting a prescribed number of bosons.
//!
//! All plans share one tilt-plus-zero recipe. Writing m = eps0/omega and
//! z = eps1/omega, and counting particles in the central well:
//!
//! * central-well release of `count` <= N-2 particles: m = -count for the
//!   left pathway (+count for the right) and z at a zero of J_{N-count-1}.
//!   One zero does double duty: it closes the opposite-side pathway and
//!   freezes the active ladder after exactly `count` transfers.
//! * central-well release of count = N-1: the opposite pathway is closed
//!   with a zero of J_{(N-1)+|m|} while every ladder link stays alive,
//!   which requires m to avoid the values that would re-trigger the
//!   double-duty freeze; the smallest usable |m| is 1 (tilted against the
//!   transport direction). The last ladder step into the far well carries
//!   the closing Bessel order itself, so at most N-1 particles move.
//! * edge start |N-1,1,0> (or its mirror): moving `count` particles to the
//!   center uses m = -(N-count-2) (mirrored sign on the right) and a zero
//!   of J_{count+1}.
//!
//! Candidate zeros are screened against the averaged model before being
//! adopted: the reachable component must equal the predicted ladder and
//! the averaged dynamics must actually move the requested number of
//! particles. A zero can satisfy the algebraic conditions yet leave the
//! first ladder link so weak that transport stalls (the first J_1 zero
//! does this for two-particle central release), in which case the planner
//! advances to the next zero of the same order; the plan records the rank
//! actually used.

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_zero;
use crate::effective::{
    build_effective_hamiltonian, propagate_effective, reachable_subspace,
    slowest_population_period, DetunedLinks, GAP_TOL,
};
use crate::error::{Error, Result};
use crate::fock::{build_basis, Basis, FockState};
use crate::model::ModelParams;
use crate::propagator::{propagate, stroboscopic, StateVector};

/// Transport pathway of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pathway {
    #[serde(rename = "center-to-left")]
    CenterToLeft,
    #[serde(rename = "center-to-right")]
    CenterToRight,
    #[serde(rename = "left-to-center")]
    LeftToCenter,
    #[serde(rename = "right-to-center")]
    RightToCenter,
}

impl Pathway {
    pub fn mirrored(self) -> Self {
        match self {
            Pathway::CenterToLeft => Pathway::CenterToRight,
            Pathway::CenterToRight => Pathway::CenterToLeft,
            Pathway::LeftToCenter => Pathway::RightToCenter,
            Pathway::RightToCenter => Pathway::LeftToCenter,
        }
    }

    /// 1-based index of the well the particles leave.
    pub fn source_well(self) -> usize {
        match self {
            Pathway::CenterToLeft | Pathway::CenterToRight => 2,
            Pathway::LeftToCenter => 1,
            Pathway::RightToCenter => 3,
        }
    }
}

/// Transport direction out of the central well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

/// Model constants without the drive; the planner supplies eps0 and eps1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub v: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    #[serde(rename = "U1")]
    pub u1: f64,
    #[serde(rename = "U2")]
    pub u2: f64,
    pub omega: f64,
    #[serde(rename = "N")]
    pub n: u32,
}

impl BaseParams {
    pub fn with_drive(&self, eps0: f64, eps1: f64) -> ModelParams {
        ModelParams {
            v: self.v,
            u0: self.u0,
            u1: self.u1,
            u2: self.u2,
            eps0,
            eps1,
            omega: self.omega,
            n: self.n,
        }
    }

    /// The ideal resonant interaction ladder for this hopping and drive
    /// frequency, used when screening candidate zeros.
    fn resonant(&self) -> BaseParams {
        BaseParams {
            u0: self.u2 + 2.0 * self.omega,
            u1: self.u2 + self.omega,
            ..*self
        }
    }
}

/// Driving parameters that transport exactly `transport_count` bosons
/// along `pathway`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingPlan {
    pub pathway: Pathway,
    #[serde(rename = "count")]
    pub transport_count: u32,
    /// Central-well occupation at which the active ladder freezes.
    #[serde(rename = "i")]
    pub freeze_center_occupation: u32,
    /// Integer static tilt, eps0 = m omega.
    #[serde(rename = "m")]
    pub m: i64,
    /// Order of the Bessel function whose zero sets the drive amplitude.
    pub bessel_order: u32,
    /// Rank of the selected zero among the positive zeros of that order
    /// (after skipping candidates that fail the admissibility screen).
    #[serde(rename = "s")]
    pub zero_index: usize,
    pub eps1_over_omega: f64,
    pub initial_state: FockState,
    pub predicted_final_states: Vec<FockState>,
}

impl TunnelingPlan {
    /// The plan for the mirror-image process.
    pub fn mirrored(&self) -> Self {
        Self {
            pathway: self.pathway.mirrored(),
            m: -self.m,
            initial_state: self.initial_state.mirrored(),
            predicted_final_states: self
                .predicted_final_states
                .iter()
                .map(|s| s.mirrored())
                .collect(),
            ..self.clone()
        }
    }

    /// Model parameters realizing this plan on top of `base`.
    pub fn params(&self, base: &BaseParams) -> ModelParams {
        base.with_drive(
            self.m as f64 * base.omega,
            self.eps1_over_omega * base.omega,
        )
    }
}

/// Outcome of simulating a plan with the exact propagator.
#[derive(Debug, Clone, Serialize)]
pub struct PlanVerification {
    pub t_end: f64,
    /// max_t |<n_source>(t) - <n_source>(0)| at stroboscopic times.
    pub max_deviation: f64,
    /// round(max_deviation).
    pub transported_count: u32,
    /// Whether the deviation sits within 0.25 of the rounded count.
    pub within_guard_band: bool,
    /// max_t of the probability outside the predicted final states.
    pub leakage: f64,
    pub leakage_threshold: f64,
    pub norm_drift: f64,
    pub pass: bool,
}

/// Verification controls; `Default` gives the values used by the
/// acceptance runs.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Simulation horizon; `None` derives 3x the slowest averaged-model
    /// period (or [`FREEZE_HORIZON`] over v for freeze plans).
    pub t_end: Option<f64>,
    pub tol: f64,
    pub leakage_threshold: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            t_end: None,
            tol: 1e-10,
            leakage_threshold: 0.05,
        }
    }
}

/// Horizon (in units of 1/v) for verifying plans that freeze everything.
/// A few multiples of the Bessel-renormalized tunneling time: long enough
/// that failed freezing would show, short enough that second-order
/// processes the averaged theory neglects stay below the leakage gate.
pub const FREEZE_HORIZON: f64 = 25.0;

fn ladder_states(n: u32, count: u32, direction: Direction) -> Vec<FockState> {
    (0..=count)
        .map(|j| match direction {
            Direction::Right => FockState::new(0, n - j, j),
            Direction::Left => FockState::new(j, n - j, 0),
        })
        .collect()
}

/// The transport ladder a candidate drive amplitude must realize.
struct LadderSpec {
    order: u32,
    m: i64,
    initial: FockState,
    predicted: Vec<FockState>,
    count: u32,
    source_well: usize,
}

impl LadderSpec {
    /// Screen a candidate drive amplitude against the averaged model: the
    /// reachable component must match the predicted ladder, and the
    /// averaged dynamics must transport the requested count.
    fn admits(&self, base: &BaseParams, basis: &Basis, z: f64) -> Result<bool> {
        let params = base
            .resonant()
            .with_drive(self.m as f64 * base.omega, z * base.omega);
        let eff = build_effective_hamiltonian(&params, basis, GAP_TOL, DetunedLinks::Reject)?;
        let sub = reachable_subspace(&eff, self.initial, 1e-10)?;
        let mut want: Vec<usize> = self
            .predicted
            .iter()
            .map(|s| basis.require_index(*s))
            .collect::<Result<_>>()?;
        want.sort_unstable();
        if sub.indices != want {
            return Ok(false);
        }
        if self.count == 0 {
            return Ok(true); // nothing should move; the set equality is the check
        }
        let horizon = match slowest_population_period(&sub) {
            Some(p) => 3.0 * p,
            None => return Ok(false),
        };
        let psi0 = StateVector::basis_state(basis, self.initial)?;
        let grid: Vec<f64> = (0..=512).map(|k| horizon * k as f64 / 512.0).collect();
        let traj = propagate_effective(&eff, &psi0, &grid)?;
        let n0 = f64::from(self.initial.occupation(self.source_well));
        let dev = traj
            .populations
            .iter()
            .map(|p| (p[self.source_well - 1] - n0).abs())
            .fold(0.0f64, f64::max);
        Ok(dev.round() as i64 == i64::from(self.count))
    }

    /// The `requested`-th admissible zero of the governing order; returns
    /// its rank among all of that order's zeros together with its value.
    fn select_zero(&self, base: &BaseParams, basis: &Basis, requested: usize) -> Result<(usize, f64)> {
        if requested == 0 {
            return Err(Error::InvalidParameter("zero index s must be >= 1".into()));
        }
        let mut valid = 0;
        for rank in 1..=crate::bessel::MAX_ZERO_INDEX {
            let z = bessel_zero(self.order, rank)?.value;
            if self.admits(base, basis, z)? {
                valid += 1;
                if valid == requested {
                    return Ok((rank, z));
                }
            }
        }
        Err(Error::NoAdmissibleZero {
            order: self.order as i32,
            scanned: crate::bessel::MAX_ZERO_INDEX,
        })
    }
}

/// Plan the release of `count` bosons from the central well (initial state
/// |0,N,0>) toward `direction`. `s` selects among the admissible zeros of
/// the governing Bessel order (1 = smallest drive amplitude).
pub fn plan_center_transport(
    base: &BaseParams,
    count: u32,
    direction: Direction,
    s: usize,
) -> Result<TunnelingPlan> {
    let n = base.n;
    if count >= n {
        return Err(Error::PlanOutOfRange {
            count,
            n,
            reason: "at most N-1 particles can leave the central well".into(),
        });
    }
    let basis = build_basis(n)?;
    let (i, order, m) = if count <= n.saturating_sub(2) {
        let i = n - count;
        let m = match direction {
            Direction::Left => -i64::from(count),
            Direction::Right => i64::from(count),
        };
        (i, i - 1, m)
    } else {
        // count = N-1: close the opposite pathway with every ladder link
        // alive; the smallest |m| outside the double-duty values is 1,
        // tilted against the transport direction
        let m = match direction {
            Direction::Left => 1,
            Direction::Right => -1,
        };
        (1, n, m)
    };
    let ladder = LadderSpec {
        order,
        m,
        initial: FockState::new(0, n, 0),
        predicted: ladder_states(n, count, direction),
        count,
        source_well: 2,
    };
    let (rank, z) = ladder.select_zero(base, &basis, s)?;
    Ok(TunnelingPlan {
        pathway: match direction {
            Direction::Left => Pathway::CenterToLeft,
            Direction::Right => Pathway::CenterToRight,
        },
        transport_count: count,
        freeze_center_occupation: i,
        m,
        bessel_order: order,
        zero_index: rank,
        eps1_over_omega: z,
        initial_state: ladder.initial,
        predicted_final_states: ladder.predicted,
    })
}

/// Plan the transfer of `count` bosons from an outer well into the center,
/// starting from |N-1,1,0> (side = Left) or |0,1,N-1> (side = Right).
pub fn plan_edge_transport(
    base: &BaseParams,
    count: u32,
    side: Direction,
    s: usize,
) -> Result<TunnelingPlan> {
    let n = base.n;
    let i = count + 1;
    if i > n.saturating_sub(1) {
        return Err(Error::PlanOutOfRange {
            count,
            n,
            reason: "edge transport supports count <= N-2".into(),
        });
    }
    let basis = build_basis(n)?;
    let m_magnitude = i64::from(n) - i64::from(i) - 1;
    let (m, initial, predicted, source_well, pathway) = match side {
        Direction::Left => (
            -m_magnitude,
            FockState::new(n - 1, 1, 0),
            (1..=i).map(|j| FockState::new(n - j, j, 0)).collect::<Vec<_>>(),
            1,
            Pathway::LeftToCenter,
        ),
        Direction::Right => (
            m_magnitude,
            FockState::new(0, 1, n - 1),
            (1..=i).map(|j| FockState::new(0, j, n - j)).collect::<Vec<_>>(),
            3,
            Pathway::RightToCenter,
        ),
    };
    let ladder = LadderSpec {
        order: i,
        m,
        initial,
        predicted,
        count,
        source_well,
    };
    let (rank, z) = ladder.select_zero(base, &basis, s)?;
    Ok(TunnelingPlan {
        pathway,
        transport_count: count,
        freeze_center_occupation: i,
        m,
        bessel_order: i,
        zero_index: rank,
        eps1_over_omega: z,
        initial_state: ladder.initial,
        predicted_final_states: ladder.predicted,
    })
}

/// Derive the default verification horizon for a plan: three times the
/// slowest averaged-model period of its reachable component, or
/// [`FREEZE_HORIZON`]/v when the plan freezes everything.
pub fn default_verification_horizon(plan: &TunnelingPlan, base: &BaseParams) -> Result<f64> {
    let basis = build_basis(base.n)?;
    let params = plan.params(&base.resonant());
    let eff = build_effective_hamiltonian(&params, &basis, GAP_TOL, DetunedLinks::Reject)?;
    let sub = reachable_subspace(&eff, plan.initial_state, 1e-10)?;
    Ok(match slowest_population_period(&sub) {
        Some(p) => 3.0 * p,
        None => FREEZE_HORIZON / base.v,
    })
}

/// Simulate a plan with the exact propagator and compare against its
/// predictions. Metrics are taken at stroboscopic times, where the
/// averaged picture applies.
pub fn verify_plan(
    plan: &TunnelingPlan,
    base: &BaseParams,
    opts: VerifyOptions,
) -> Result<PlanVerification> {
    let basis = build_basis(base.n)?;
    let params = plan.params(base);
    let t_end = match opts.t_end {
        Some(t) => t,
        None => default_verification_horizon(plan, base)?,
    };
    let psi0 = StateVector::basis_state(&basis, plan.initial_state)?;
    let sample_dt = params.period() / 4.0;
    let traj = propagate(&params, &basis, &psi0, t_end, sample_dt, opts.tol)?;
    let strobo = stroboscopic(&traj, params.omega)?;

    let predicted: Vec<usize> = plan
        .predicted_final_states
        .iter()
        .map(|s| basis.require_index(*s))
        .collect::<Result<_>>()?;
    let source = plan.pathway.source_well();
    let n0 = f64::from(plan.initial_state.occupation(source));
    let mut dev = 0.0f64;
    let mut leakage = 0.0f64;
    for (k, probs) in strobo.probabilities.iter().enumerate() {
        dev = dev.max((strobo.populations[k][source - 1] - n0).abs());
        let kept: f64 = predicted.iter().map(|&i| probs[i]).sum();
        let total: f64 = probs.iter().sum();
        leakage = leakage.max(total - kept);
    }
    let transported_count = dev.round().max(0.0) as u32;
    Ok(PlanVerification {
        t_end,
        max_deviation: dev,
        transported_count,
        within_guard_band: (dev - dev.round()).abs() <= 0.25,
        leakage,
        leakage_threshold: opts.leakage_threshold,
        norm_drift: traj.norm_drift,
        pass: transported_count == plan.transport_count && leakage <= opts.leakage_threshold,
    })
}
