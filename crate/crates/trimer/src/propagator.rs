//! Time integration of i d/dt |psi> = H(t) |psi> in the Fock basis.
//!
//! The diagonal of H(t) is integrable in closed form, so the stepper works
//! on the phase-transformed amplitudes B_s = C_s exp(+i phi_s(t)) with
//! phi_s(t) = V_s^static t + (eps1 d_s / omega) sin(omega t). The
//! transformed system i dB/dt = K~(t) B couples states only through the
//! hopping matrix, with unit-modulus coefficients; it is the same equation,
//! solved exactly as far as the diagonal is concerned, and the physical
//! amplitudes are recovered by undoing the phases at each sample. Norms of
//! B and C coincide, so the norm-drift diagnostic is unaffected.
//!
//! The integrator is an adaptive Dormand-Prince 5(4) pair controlling the
//! local error per unit step, with the step additionally capped at a
//! twentieth of the drive period so no step can straddle a drive
//! oscillation. Samples are produced by step alignment: the stepper lands
//! exactly on every requested sample time. The state norm is never
//! renormalized; its drift from 1 is recorded as an integrator diagnostic.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{hop_elements, number_expectations, Basis, Bond, FockState};
use crate::model::{drive_coefficient, static_diagonal_energy, ModelParams};

/// Normalized complex amplitude vector over the canonical basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wrap an amplitude vector, enforcing unit norm (within 1e-9).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// The basis state |n1,n2,n3> as a unit vector.
    pub fn basis_state(basis: &Basis, state: FockState) -> Result<Self> {
        Ok(Self {
            amplitudes: basis.unit_vector(state)?,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitudes permuted by the left-right mirror of the basis.
    pub fn mirrored(&self, basis: &Basis) -> Self {
        let perm = basis.mirror_permutation();
        let mut out = vec![Complex64::ZERO; self.amplitudes.len()];
        for (i, &p) in perm.iter().enumerate() {
            out[p] = self.amplitudes[i];
        }
        Self { amplitudes: out }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Sampled observables along one propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Amplitudes at each sample, canonical basis order.
    pub states: Vec<Vec<Complex64>>,
    /// (<n1>, <n2>, <n3>) at each sample.
    pub populations: Vec<[f64; 3]>,
    /// |C|^2 per basis state at each sample.
    pub probabilities: Vec<Vec<f64>>,
    /// max over samples of | ||psi|| - 1 |.
    pub norm_drift: f64,
    /// Basis states labeling the probability columns.
    pub state_labels: Vec<FockState>,
}

/// Summary extremes of a trajectory, used by the CLI and by plan checks.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub norm_drift: f64,
    pub min_populations: [f64; 3],
    pub max_populations: [f64; 3],
    /// Largest |<n_j>(t) - <n_j>(0)| per well.
    pub max_deviation: [f64; 3],
    /// Largest probability attained per basis state.
    pub max_probabilities: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn summary(&self) -> TrajectorySummary {
        let mut min_p = [f64::INFINITY; 3];
        let mut max_p = [f64::NEG_INFINITY; 3];
        let mut max_dev = [0.0f64; 3];
        let p0 = self.populations[0];
        for p in &self.populations {
            for j in 0..3 {
                min_p[j] = min_p[j].min(p[j]);
                max_p[j] = max_p[j].max(p[j]);
                max_dev[j] = max_dev[j].max((p[j] - p0[j]).abs());
            }
        }
        let dim = self.probabilities[0].len();
        let mut max_prob = vec![0.0f64; dim];
        for row in &self.probabilities {
            for (m, &x) in max_prob.iter_mut().zip(row) {
                *m = m.max(x);
            }
        }
        TrajectorySummary {
            norm_drift: self.norm_drift,
            min_populations: min_p,
            max_populations: max_p,
            max_deviation: max_dev,
            max_probabilities: max_prob,
        }
    }

    /// CSV with header `t,n1,n2,n3,P_<n1>_<n2>_<n3>,...`, one probability
    /// column per basis state in canonical order, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,n1,n2,n3");
        for s in &self.state_labels {
            out.push_str(&format!(",P_{}_{}_{}", s.n1, s.n2, s.n3));
        }
        out.push('\n');
        for (k, &t) in self.times.iter().enumerate() {
            let p = self.populations[k];
            out.push_str(&format!(
                "{},{},{},{}",
                fmt12(t),
                fmt12(p[0]),
                fmt12(p[1]),
                fmt12(p[2])
            ));
            for &prob in &self.probabilities[k] {
                out.push(',');
                out.push_str(&fmt12(prob));
            }
            out.push('\n');
        }
        out
    }
}

/// 12 significant digits, plain exponent format.
pub(crate) fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// b - b*: weights of the embedded error estimate.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// The phase-transformed system: hopping links plus the per-state phase
/// phi_s(t) = w_s t + a_s sin(omega t) that has been rotated away.
struct IpSystem {
    /// (i, j, kappa) with i < j; kappa = -v sqrt(...).
    links: Vec<(usize, usize, f64)>,
    /// Static diagonal energies (interactions plus eps0 tilt).
    w: Vec<f64>,
    /// Oscillating phase amplitudes eps1 d_s / omega.
    a: Vec<f64>,
    omega: f64,
}

impl IpSystem {
    fn new(params: &ModelParams, basis: &Basis) -> Result<Self> {
        params.validate()?;
        if basis.particles() != params.n {
            return Err(Error::BasisMismatch {
                basis_n: basis.particles(),
                params_n: params.n,
            });
        }
        let mut links = Vec::new();
        for bond in [Bond::LeftCenter, Bond::CenterRight] {
            for (i, j, amp) in hop_elements(basis, bond) {
                if i < j {
                    links.push((i, j, -params.v * amp));
                }
            }
        }
        let w = basis
            .states()
            .iter()
            .map(|s| static_diagonal_energy(params, *s))
            .collect();
        let a = basis
            .states()
            .iter()
            .map(|s| params.eps1 * drive_coefficient(*s) as f64 / params.omega)
            .collect();
        Ok(Self {
            links,
            w,
            a,
            omega: params.omega,
        })
    }

    /// exp(-i phi_s(t)) for every state.
    fn phase_factors(&self, t: f64, out: &mut [Complex64]) {
        let s = (self.omega * t).sin();
        for (o, (&w, &a)) in out.iter_mut().zip(self.w.iter().zip(&self.a)) {
            let phi = w * t + a * s;
            *o = Complex64::new(phi.cos(), -phi.sin());
        }
    }

    /// dB/dt = -i K~(t) B with K~_ab = kappa_ab exp(i(phi_a - phi_b)).
    fn eval(
        &self,
        t: f64,
        y: &[Complex64],
        phases: &mut [Complex64],
        acc: &mut [Complex64],
        out: &mut [Complex64],
    ) {
        self.phase_factors(t, phases);
        for (o, (p, b)) in out.iter_mut().zip(phases.iter().zip(y)) {
            // reuse `out` as scratch for e^{-i phi} B
            *o = p * b;
        }
        acc.fill(Complex64::ZERO);
        for &(i, j, kappa) in &self.links {
            acc[i] += kappa * out[j];
            acc[j] += kappa * out[i];
        }
        for (o, (p, acc)) in out.iter_mut().zip(phases.iter().zip(acc.iter())) {
            let v = p.conj() * acc;
            *o = Complex64::new(v.im, -v.re); // multiply by -i
        }
    }

    /// Physical amplitudes C = B exp(-i phi) at time t.
    fn to_physical(&self, t: f64, b: &[Complex64], phases: &mut [Complex64]) -> Vec<Complex64> {
        self.phase_factors(t, phases);
        b.iter().zip(phases.iter()).map(|(b, p)| b * p).collect()
    }
}

/// Integrate from t = 0 to `t_end`, sampling at multiples of `sample_dt`.
///
/// The local error is kept at or below `tol` per unit time (componentwise,
/// scaled by 1 + |y|), and the step never exceeds a twentieth of the drive
/// period. `t_end` itself is included as a sample only when it falls on the
/// sample grid.
pub fn propagate(
    params: &ModelParams,
    basis: &Basis,
    psi0: &StateVector,
    t_end: f64,
    sample_dt: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_end must be > 0, got {t_end}")));
    }
    if !sample_dt.is_finite() || sample_dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sample_dt must be > 0, got {sample_dt}"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 || tol > 1e-3 {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in (0, 1e-3], got {tol}"
        )));
    }
    if psi0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            got: psi0.dim(),
            expected: basis.dim(),
        });
    }
    let sys = IpSystem::new(params, basis)?;
    let dim = basis.dim();

    let n_samples = (t_end / sample_dt + 1e-9).floor() as usize;
    let sample_times: Vec<f64> = (0..=n_samples).map(|k| k as f64 * sample_dt).collect();

    let mut traj = Trajectory {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        populations: Vec::with_capacity(sample_times.len()),
        probabilities: Vec::with_capacity(sample_times.len()),
        norm_drift: 0.0,
        state_labels: basis.states().to_vec(),
    };
    let mut phases = vec![Complex64::ZERO; dim];
    let mut record = |t: f64, b: &[Complex64], phases: &mut [Complex64], drift: &mut f64| {
        let c = sys.to_physical(t, b, phases);
        let pop = number_expectations(&c, basis).expect("dimensions fixed");
        traj.times.push(t);
        traj.probabilities.push(c.iter().map(|a| a.norm_sqr()).collect());
        traj.states.push(c);
        traj.populations.push(pop);
        *drift = drift.max((norm(b) - 1.0).abs());
    };

    let h_max = params.period() / 20.0;
    let mut h = h_max * 0.1;
    let mut t = 0.0;
    let mut y = psi0.amplitudes().to_vec();
    let mut drift = 0.0;
    record(0.0, &y, &mut phases, &mut drift);
    let mut next_sample = 1;

    let mut k = vec![vec![Complex64::ZERO; dim]; 7];
    let mut y_stage = vec![Complex64::ZERO; dim];
    let mut y_new = vec![Complex64::ZERO; dim];
    let mut acc = vec![Complex64::ZERO; dim];
    sys.eval(t, &y, &mut phases, &mut acc, &mut k[0]);

    while t < t_end - 1e-12 * t_end.max(1.0) {
        // land exactly on the next sample time (or t_end)
        let target = if next_sample <= n_samples {
            sample_times[next_sample]
        } else {
            t_end
        };
        // snap over float dust left of a boundary instead of stepping it
        if target - t < 1e-12 * target.max(1.0) {
            t = target;
            if next_sample <= n_samples {
                record(t, &y, &mut phases, &mut drift);
                next_sample += 1;
            }
            continue;
        }
        let h_try = h.min(h_max).min(target - t).min(t_end - t);
        if h_try < 1e-14 * t.max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h: h_try });
        }
        // stages
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = Complex64::ZERO;
                for (s, ks) in k.iter().enumerate().take(stage + 1) {
                    let a = A[stage][s];
                    if a != 0.0 {
                        acc += a * ks[i];
                    }
                }
                y_stage[i] = y[i] + h_try * acc;
            }
            if stage < 5 {
                sys.eval(t + C[stage] * h_try, &y_stage, &mut phases, &mut acc, &mut k[stage + 1]);
            } else {
                // the 6th combination is already the 5th-order solution
                y_new.copy_from_slice(&y_stage);
                sys.eval(t + h_try, &y_new, &mut phases, &mut acc, &mut k[6]);
            }
        }
        // embedded error estimate, per unit step
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = Complex64::ZERO;
            for (s, ks) in k.iter().enumerate() {
                if E[s] != 0.0 {
                    e += E[s] * ks[i];
                }
            }
            let scale = tol * (1.0 + y[i].norm());
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            // a rejected step went non-finite; retry much smaller
            h = h_try * 0.1;
            if h < 1e-14 * t.max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            continue;
        }
        if err <= 1.0 {
            t += h_try;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL
            if next_sample <= n_samples && (t - sample_times[next_sample]).abs() < 1e-9 * t.max(1.0)
            {
                record(t, &y, &mut phases, &mut drift);
                next_sample += 1;
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h_try * factor).min(h_max);
        if h < 1e-14 * t.max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
    }
    traj.norm_drift = drift;
    Ok(traj)
}

/// Restrict a trajectory to integer multiples of the drive period 2 pi /
/// omega. Sample times that differ from q T by less than a relative 1e-9
/// are kept; at minimum the t = 0 sample survives.
pub fn stroboscopic(traj: &Trajectory, omega: f64) -> Result<Trajectory> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    let period = std::f64::consts::TAU / omega;
    let mut out = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        populations: Vec::new(),
        probabilities: Vec::new(),
        norm_drift: traj.norm_drift,
        state_labels: traj.state_labels.clone(),
    };
    let mut last_q = -1i64;
    for (i, &t) in traj.times.iter().enumerate() {
        let q = (t / period).round() as i64;
        if q != last_q && (t - q as f64 * period).abs() <= 1e-9 * t.max(period) {
            out.times.push(t);
            out.states.push(traj.states[i].clone());
            out.populations.push(traj.populations[i]);
            out.probabilities.push(traj.probabilities[i].clone());
            last_q = q;
        }
    }
    Ok(out)
}
