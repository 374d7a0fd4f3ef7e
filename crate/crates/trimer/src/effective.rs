//! Period-averaged (rotating-frame) model of the driven trimer.
//!
//! Removing the diagonal phases through C_s(t) = B_s(t) exp(-i int_0^t V_s)
//! leaves amplitude equations whose couplings oscillate as
//!
//!   exp[-i dF t - i dd (eps1/omega) sin(omega t)],
//!
//! where dF is the static diagonal-energy gap of the link (interactions
//! plus eps0 tilt) and dd the change in the drive coefficient n1 - n3.
//! When dF is an integer multiple q of omega, the one-period average of
//! that phase is the Bessel factor J_{-q}(dd eps1/omega), and the averaged
//! model becomes a static hopping problem with renormalized couplings.
//!
//! The authoritative coupling here is the numerical one-period average
//! (a trapezoid rule on the periodic integrand, which converges
//! spectrally); the printed Bessel expressions for the boundary occupation
//! families are kept as closed-form oracles so a transcription error in
//! the order conventions cannot go unnoticed.
//!
//! Off resonance (non-integer gap) the averaged model is undefined.
//! Construction either rejects such links or, on explicit request, zeroes
//! them and marks the result approximate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::fock::{Basis, FockState};
use crate::model::{drive_coefficient, static_diagonal_energy, ModelParams};
use crate::propagator::{StateVector, Trajectory};

/// Default tolerance on |gap/omega - round(gap/omega)| for a link to count
/// as resonant. Exact parameter sets are integers; this only absorbs
/// floating-point arithmetic.
pub const GAP_TOL: f64 = 1e-6;

/// Base number of quadrature nodes for the one-period average. The result
/// is accepted only if doubling the node count moves it by less than 1e-10.
const QUADRATURE_NODES: usize = 1024;

/// What to do with links whose diagonal gap is not an integer multiple of
/// omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetunedLinks {
    /// Fail construction (the averaged model is undefined off resonance).
    Reject,
    /// Zero the offending couplings and flag the result as approximate.
    Drop,
}

/// Static effective Hamiltonian over the full basis: averaged couplings on
/// single-hop links, zero diagonal (diagonal energies are gauged away).
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    basis: Basis,
    couplings: DMatrix<f64>,
    /// Photon number absorbed per link: p[(i,j)] = round((V_j - V_i)/omega).
    phase_orders: DMatrix<i64>,
    /// Links zeroed because their gap was not an integer multiple of omega.
    dropped_links: Vec<(usize, usize)>,
}

impl EffectiveHamiltonian {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn phase_orders(&self) -> &DMatrix<i64> {
        &self.phase_orders
    }

    /// True when detuned links were dropped rather than averaged.
    pub fn is_approximate(&self) -> bool {
        !self.dropped_links.is_empty()
    }

    pub fn dropped_links(&self) -> &[(usize, usize)] {
        &self.dropped_links
    }

    /// Dense CSV of the coupling matrix, canonical order, 12 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state");
        for s in self.basis.states() {
            out.push_str(&format!(",{}_{}_{}", s.n1, s.n2, s.n3));
        }
        out.push('\n');
        for (i, s) in self.basis.states().iter().enumerate() {
            out.push_str(&format!("{}_{}_{}", s.n1, s.n2, s.n3));
            for j in 0..self.basis.dim() {
                out.push(',');
                out.push_str(&crate::propagator::fmt12(self.couplings[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// The dynamically connected component containing `start`, treating
/// couplings with |value| <= threshold as absent.
#[derive(Debug, Clone)]
pub struct SubspaceReduction {
    /// Indices into the canonical basis, ascending.
    pub indices: Vec<usize>,
    pub states: Vec<FockState>,
    /// Coupling matrix restricted to the component.
    pub couplings: DMatrix<f64>,
}

/// Identify the single hop connecting two states: returns (bare amplitude
/// sqrt(n_src (n_dst + 1)), from the occupations of `a`) or an error when
/// the states are not one hop apart.
fn hop_amplitude(a: FockState, b: FockState) -> Result<f64> {
    if a.total() != b.total() {
        return Err(Error::NotAdjacent { a, b });
    }
    let d = [
        i64::from(b.n1) - i64::from(a.n1),
        i64::from(b.n2) - i64::from(a.n2),
        i64::from(b.n3) - i64::from(a.n3),
    ];
    // exactly one +1 and one -1 on adjacent wells, third unchanged
    let (src, dst) = match d {
        [1, -1, 0] => (2, 1),
        [-1, 1, 0] => (1, 2),
        [0, 1, -1] => (3, 2),
        [0, -1, 1] => (2, 3),
        _ => return Err(Error::NotAdjacent { a, b }),
    };
    let n_src = f64::from(a.occupation(src));
    let n_dst = f64::from(a.occupation(dst));
    Ok((n_src * (n_dst + 1.0)).sqrt())
}

/// One-period average of exp(-i(q theta + w sin theta)) over theta in
/// [0, 2 pi), by an equally weighted sum (trapezoid rule on a periodic
/// integrand). Returns the complex mean.
fn phase_average(q: i64, w: f64, nodes: usize) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for j in 0..nodes {
        let theta = std::f64::consts::TAU * (j as f64) / (nodes as f64);
        let phase = -(q as f64 * theta + w * theta.sin());
        acc += Complex64::new(phase.cos(), phase.sin());
    }
    acc / nodes as f64
}

/// Averaged coupling of the single-hop link a -> b:
/// kappa_bare(a,b) times the one-period mean of
/// exp[-i dF t - i dd (eps1/omega) sin(omega t)].
///
/// Requires the link gap dF to be an integer multiple of omega within
/// `gap_tol`. The average of the phase factor is real for integer photon
/// numbers; an imaginary residue above 1e-10 signals a broken convention
/// and is an error, not a warning.
pub fn averaged_coupling(
    params: &ModelParams,
    a: FockState,
    b: FockState,
    gap_tol: f64,
) -> Result<f64> {
    let amp = hop_amplitude(a, b)?;
    let kappa = -params.v * amp;
    let gap = static_diagonal_energy(params, b) - static_diagonal_energy(params, a);
    let ratio = gap / params.omega;
    let q = ratio.round();
    if (ratio - q).abs() > gap_tol {
        return Err(Error::DetunedLink { a, b, ratio, tol: gap_tol });
    }
    let dd = drive_coefficient(b) - drive_coefficient(a);
    let w = dd as f64 * params.eps1 / params.omega;
    let coarse = phase_average(q as i64, w, QUADRATURE_NODES);
    let fine = phase_average(q as i64, w, 2 * QUADRATURE_NODES);
    let delta = (fine - coarse).norm();
    if delta > 1e-10 {
        return Err(Error::QuadratureNotConverged { a, b, delta });
    }
    if fine.im.abs() > 1e-10 {
        return Err(Error::ImaginaryResidue { imag: fine.im });
    }
    Ok(kappa * fine.re)
}

/// Closed-form Bessel coupling for links on the boundary occupation
/// families (states with an empty outer well, or one particle just moved
/// off it). Used as an oracle against [`averaged_coupling`]; interior
/// links have no printed expression and must go through the quadrature.
///
/// With m = eps0/omega and z = eps1/omega, the families are
///   (N-n,n,0) <-> (N-n-1,n+1,0):  kappa_n J_{-(N-2n-1)-m}(z)
///   (0,n,N-n) <-> (0,n+1,N-n-1):  kappa_n J_{ (N-2n-1)-m}(z)
///   (N-n,n,0) <-> (N-n,n-1,1):    nu_n    J_{-(N-1)-m}(z)
///   (0,n,N-n) <-> (1,n-1,N-n):    nu_n    J_{ (N-1)-m}(z)
/// with kappa_n = -v sqrt((n+1)(N-n)) and nu_n = -v sqrt(n).
pub fn closed_form_coupling(params: &ModelParams, a: FockState, b: FockState) -> Result<f64> {
    hop_amplitude(a, b)?;
    let m_ratio = params.eps0 / params.omega;
    let m = m_ratio.round();
    if (m_ratio - m).abs() > GAP_TOL {
        return Err(Error::InvalidParameter(format!(
            "eps0/omega = {m_ratio} is not an integer; the printed families assume eps0 = m omega"
        )));
    }
    let m = m as i64;
    let n_total = i64::from(a.total());
    let z = params.eps1 / params.omega;
    let kappa = |n: i64| -params.v * ((n as f64 + 1.0) * (n_total - n) as f64).sqrt();
    let nu = |n: i64| -params.v * (n as f64).sqrt();

    // hopping families along an empty-right / empty-left ladder
    if a.n3 == 0 && b.n3 == 0 {
        let n = i64::from(a.n2.min(b.n2));
        let order = -(n_total - 2 * n - 1) - m;
        return Ok(kappa(n) * bessel_j(order as i32, z)?);
    }
    if a.n1 == 0 && b.n1 == 0 {
        let n = i64::from(a.n2.min(b.n2));
        let order = (n_total - 2 * n - 1) - m;
        return Ok(kappa(n) * bessel_j(order as i32, z)?);
    }
    // single-particle release to the opposite outer well
    if a.n1 == b.n1 && a.n3.max(b.n3) == 1 && a.n3.min(b.n3) == 0 {
        let n = i64::from(if a.n3 == 0 { a.n2 } else { b.n2 });
        let order = -(n_total - 1) - m;
        return Ok(nu(n) * bessel_j(order as i32, z)?);
    }
    if a.n3 == b.n3 && a.n1.max(b.n1) == 1 && a.n1.min(b.n1) == 0 {
        let n = i64::from(if a.n1 == 0 { a.n2 } else { b.n2 });
        let order = (n_total - 1) - m;
        return Ok(nu(n) * bessel_j(order as i32, z)?);
    }
    Err(Error::OutsideClosedFormFamilies { a, b })
}

/// Build the averaged model over every single-hop link of the basis.
pub fn build_effective_hamiltonian(
    params: &ModelParams,
    basis: &Basis,
    gap_tol: f64,
    policy: DetunedLinks,
) -> Result<EffectiveHamiltonian> {
    params.validate()?;
    if basis.particles() != params.n {
        return Err(Error::BasisMismatch {
            basis_n: basis.particles(),
            params_n: params.n,
        });
    }
    let dim = basis.dim();
    let mut couplings = DMatrix::zeros(dim, dim);
    let mut phase_orders = DMatrix::zeros(dim, dim);
    let mut dropped = Vec::new();
    for i in 0..dim {
        let a = basis.state(i);
        for j in (i + 1)..dim {
            let b = basis.state(j);
            if hop_amplitude(a, b).is_err() {
                continue;
            }
            match averaged_coupling(params, a, b, gap_tol) {
                Ok(c) => {
                    couplings[(i, j)] = c;
                    couplings[(j, i)] = c;
                    let gap = static_diagonal_energy(params, b) - static_diagonal_energy(params, a);
                    let q = (gap / params.omega).round() as i64;
                    phase_orders[(i, j)] = q;
                    phase_orders[(j, i)] = -q;
                }
                Err(Error::DetunedLink { .. }) if policy == DetunedLinks::Drop => {
                    dropped.push((i, j));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(EffectiveHamiltonian {
        basis: basis.clone(),
        couplings,
        phase_orders,
        dropped_links: dropped,
    })
}

/// Connected component of the coupling graph containing `start`.
pub fn reachable_subspace(
    eff: &EffectiveHamiltonian,
    start: FockState,
    threshold: f64,
) -> Result<SubspaceReduction> {
    let start_idx = eff.basis.require_index(start)?;
    let dim = eff.basis.dim();
    let mut seen = vec![false; dim];
    seen[start_idx] = true;
    let mut stack = vec![start_idx];
    while let Some(i) = stack.pop() {
        for (j, c) in eff.couplings.row(i).iter().enumerate() {
            if !seen[j] && c.abs() > threshold {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let indices: Vec<usize> = (0..dim).filter(|&i| seen[i]).collect();
    let states = indices.iter().map(|&i| eff.basis.state(i)).collect();
    let k = indices.len();
    let couplings = DMatrix::from_fn(k, k, |r, c| eff.couplings[(indices[r], indices[c])]);
    Ok(SubspaceReduction {
        indices,
        states,
        couplings,
    })
}

/// Slowest population oscillation period of the component: 2 pi over the
/// smallest nonzero eigenvalue gap. `None` when the component has no
/// dynamics (a single state, or an all-zero block).
pub fn slowest_population_period(sub: &SubspaceReduction) -> Option<f64> {
    if sub.indices.len() < 2 {
        return None;
    }
    let eig = SymmetricEigen::new(sub.couplings.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut min_gap = f64::INFINITY;
    for i in 0..vals.len() {
        for j in 0..i {
            let gap = vals[i] - vals[j];
            if gap > 1e-9 * scale.max(1.0) {
                min_gap = min_gap.min(gap);
            }
        }
    }
    if min_gap.is_finite() {
        Some(std::f64::consts::TAU / min_gap)
    } else {
        None
    }
}

/// Propagate the averaged model exactly by spectral decomposition of the
/// (time-independent) coupling matrix, sampling at the given times.
pub fn propagate_effective(
    eff: &EffectiveHamiltonian,
    psi0: &StateVector,
    t_grid: &[f64],
) -> Result<Trajectory> {
    let dim = eff.basis.dim();
    if psi0.dim() != dim {
        return Err(Error::DimensionMismatch {
            got: psi0.dim(),
            expected: dim,
        });
    }
    let eig = SymmetricEigen::new(eff.couplings.clone());
    // coefficients in the eigenbasis
    let coeffs: Vec<Complex64> = (0..dim)
        .map(|k| {
            (0..dim)
                .map(|i| eig.eigenvectors[(i, k)] * psi0.amplitudes()[i])
                .sum()
        })
        .collect();
    let mut traj = Trajectory {
        times: Vec::with_capacity(t_grid.len()),
        states: Vec::with_capacity(t_grid.len()),
        populations: Vec::with_capacity(t_grid.len()),
        probabilities: Vec::with_capacity(t_grid.len()),
        norm_drift: 0.0,
        state_labels: eff.basis.states().to_vec(),
    };
    for &t in t_grid {
        let phased: Vec<Complex64> = coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &lam)| c * Complex64::new(0.0, -lam * t).exp())
            .collect();
        let amps: Vec<Complex64> = (0..dim)
            .map(|i| (0..dim).map(|k| eig.eigenvectors[(i, k)] * phased[k]).sum())
            .collect();
        let pops = crate::fock::number_expectations(&amps, &eff.basis)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        traj.norm_drift = traj.norm_drift.max((norm - 1.0).abs());
        traj.probabilities.push(amps.iter().map(|a| a.norm_sqr()).collect());
        traj.states.push(amps);
        traj.populations.push(pops);
        traj.times.push(t);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_zero;
    use crate::fock::build_basis;
    use approx::assert_abs_diff_eq;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn resonant_params(n: u32, m: i64, z: f64) -> ModelParams {
        let omega = 35.0;
        ModelParams {
            v: 1.0,
            u0: 75.0,
            u1: 40.0,
            u2: 5.0,
            eps0: m as f64 * omega,
            eps1: z * omega,
            omega,
            n,
        }
    }

    #[test]
    fn ladder_head_matches_printed_factor() {
        // (N,0,0) <-> (N-1,1,0) carries kappa_0 J_{-(N-1)-m}(eps1/omega)
        for n in 2..=5u32 {
            for m in -2..=2i64 {
                let p = resonant_params(n, m, 2.0);
                let a = FockState::new(n, 0, 0);
                let b = FockState::new(n - 1, 1, 0);
                let got = averaged_coupling(&p, a, b, GAP_TOL).unwrap();
                let kappa0 = -(1.0 * f64::from(n)).sqrt();
                let order = -(i64::from(n) - 1) - m;
                let expected = kappa0 * bessel_j(order as i32, 2.0).unwrap();
                assert_abs_diff_eq!(got, expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn undriven_resonant_link_returns_bare_coupling() {
        // eps1 = 0 and dF = 0 leaves the bare kappa
        let p = ModelParams {
            v: 1.3,
            u0: 0.0,
            u1: 0.0,
            u2: 0.0,
            eps0: 0.0,
            eps1: 0.0,
            omega: 35.0,
            n: 1,
        };
        let c = averaged_coupling(
            &p,
            FockState::new(1, 0, 0),
            FockState::new(0, 1, 0),
            GAP_TOL,
        )
        .unwrap();
        assert_abs_diff_eq!(c, -1.3, epsilon = 1e-12);
    }

    #[test]
    fn undriven_offset_link_averages_to_zero() {
        // dF = q omega with q != 0 and no AC drive: pure oscillation, mean 0
        let p = ModelParams {
            v: 1.0,
            u0: 0.0,
            u1: 0.0,
            u2: 0.0,
            eps0: 35.0,
            eps1: 0.0,
            omega: 35.0,
            n: 1,
        };
        let c = averaged_coupling(
            &p,
            FockState::new(1, 0, 0),
            FockState::new(0, 1, 0),
            GAP_TOL,
        )
        .unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_adjacent_pairs_rejected() {
        let p = resonant_params(4, 0, 1.0);
        let r = averaged_coupling(
            &p,
            FockState::new(4, 0, 0),
            FockState::new(2, 2, 0),
            GAP_TOL,
        );
        assert!(matches!(r, Err(Error::NotAdjacent { .. })));
        let r = averaged_coupling(
            &p,
            FockState::new(2, 0, 2),
            FockState::new(1, 2, 1),
            GAP_TOL,
        );
        assert!(matches!(r, Err(Error::NotAdjacent { .. })));
    }

    #[test]
    fn detuned_link_rejected() {
        // beta = 5 shifts every gap that touches the U2 pair term; the
        // release link (0,3,1) -> (1,2,1) picks up the fraction
        let mut p = resonant_params(4, 1, 2.0);
        p.u2 = 10.0;
        let r = averaged_coupling(
            &p,
            FockState::new(0, 3, 1),
            FockState::new(1, 2, 1),
            GAP_TOL,
        );
        assert!(matches!(r, Err(Error::DetunedLink { .. })));
    }

    #[test]
    fn quadrature_matches_closed_form_on_all_boundary_links() {
        // every printed family link, N = 2..5, m in -2..=2, three drive
        // amplitudes including the caption value 5.1356
        for n in 2..=5u32 {
            for m in -2..=2i64 {
                for &z in &[0.5, 2.0, 5.1356] {
                    let p = resonant_params(n, m, z);
                    let mut links: Vec<(FockState, FockState)> = Vec::new();
                    for k in 0..n {
                        links.push((FockState::new(n - k, k, 0), FockState::new(n - k - 1, k + 1, 0)));
                        links.push((FockState::new(0, k, n - k), FockState::new(0, k + 1, n - k - 1)));
                    }
                    for k in 1..n {
                        links.push((FockState::new(n - k, k, 0), FockState::new(n - k, k - 1, 1)));
                        links.push((FockState::new(0, k, n - k), FockState::new(1, k - 1, n - k)));
                    }
                    for (a, b) in links {
                        let avg = averaged_coupling(&p, a, b, GAP_TOL).unwrap();
                        let closed = closed_form_coupling(&p, a, b).unwrap();
                        assert!(
                            (avg - closed).abs() < 1e-8,
                            "N={n} m={m} z={z} link {a}<->{b}: avg {avg} vs closed {closed}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_rejects_interior_links() {
        let p = resonant_params(4, 0, 1.0);
        let r = closed_form_coupling(&p, FockState::new(2, 1, 1), FockState::new(1, 2, 1));
        assert!(matches!(r, Err(Error::OutsideClosedFormFamilies { .. })));
    }

    #[test]
    fn quadrature_pins_the_bessel_order_convention() {
        // for arbitrary resonant links the average equals
        // J_{-q}(dd * eps1/omega) with q = gap/omega; 50 random links pin
        // the sign and order convention against the Bessel evaluator
        let mut rng = StdRng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 50 {
            let n = rng.random_range(2..=6u32);
            let m = rng.random_range(-3..=3i64);
            let z = rng.random_range(0.0..8.0);
            let p = resonant_params(n, m, z);
            let basis = build_basis(n).unwrap();
            let i = rng.random_range(0..basis.dim());
            let j = rng.random_range(0..basis.dim());
            let (a, b) = (basis.state(i), basis.state(j));
            if hop_amplitude(a, b).is_err() {
                continue;
            }
            let gap = static_diagonal_energy(&p, b) - static_diagonal_energy(&p, a);
            let q = (gap / p.omega).round() as i64;
            let dd = drive_coefficient(b) - drive_coefficient(a);
            let kappa = -p.v * hop_amplitude(a, b).unwrap();
            let expected = kappa * bessel_j(-q as i32, dd as f64 * z).unwrap();
            let got = averaged_coupling(&p, a, b, GAP_TOL).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-10);
            checked += 1;
        }
    }

    #[test]
    fn single_particle_effective_chain() {
        // N = 1: both bonds renormalize to -v J_{-m}(eps1/omega)
        for m in -2..=2i64 {
            let z = 1.7;
            let p = ModelParams {
                v: 1.0,
                u0: 0.0,
                u1: 0.0,
                u2: 0.0,
                eps0: m as f64 * 35.0,
                eps1: z * 35.0,
                omega: 35.0,
                n: 1,
            };
            let basis = build_basis(1).unwrap();
            let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
            let expected = -bessel_j(-m as i32, z).unwrap();
            let c12 = eff.couplings()[(0, 1)];
            let c23 = eff.couplings()[(1, 2)];
            assert_abs_diff_eq!(c12, expected, epsilon = 1e-10);
            assert_abs_diff_eq!(c23, expected, epsilon = 1e-10);
            assert_eq!(eff.couplings()[(0, 2)], 0.0);
        }
    }

    #[test]
    fn effective_matrix_is_symmetric_with_zero_diagonal() {
        let p = resonant_params(4, 1, 5.1356);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        for i in 0..basis.dim() {
            assert_eq!(eff.couplings()[(i, i)], 0.0);
            for j in 0..basis.dim() {
                assert_eq!(eff.couplings()[(i, j)], eff.couplings()[(j, i)]);
                assert_eq!(eff.phase_orders()[(i, j)], -eff.phase_orders()[(j, i)]);
                if eff.couplings()[(i, j)] != 0.0 {
                    assert!(hop_amplitude(basis.state(i), basis.state(j)).is_ok());
                }
            }
        }
    }

    #[test]
    fn detuned_build_respects_policy() {
        let mut p = resonant_params(4, 1, 5.1356);
        p.u2 = 10.0;
        let basis = build_basis(4).unwrap();
        assert!(
            build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).is_err()
        );
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Drop).unwrap();
        assert!(eff.is_approximate());
        assert!(!eff.dropped_links().is_empty());
    }

    #[test]
    fn single_escape_channel_from_the_central_well() {
        // m = 1 with eps1/omega at the first J_2 zero: |0,4,0> couples only
        // to |0,3,1>, everything else incident is dead
        let z = bessel_zero(2, 1).unwrap().value;
        let p = resonant_params(4, 1, z);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        let sub = reachable_subspace(&eff, FockState::new(0, 4, 0), 1e-10).unwrap();
        assert_eq!(sub.states, vec![FockState::new(0, 4, 0), FockState::new(0, 3, 1)]);
        let i = basis.index_of(FockState::new(0, 4, 0)).unwrap();
        let j = basis.index_of(FockState::new(0, 3, 1)).unwrap();
        let kappa3 = -2.0;
        let expected = kappa3 * bessel_j(-4, z).unwrap();
        assert_abs_diff_eq!(eff.couplings()[(i, j)], expected, epsilon = 1e-10);
    }

    #[test]
    fn two_step_ladder_for_the_second_zero_of_j1() {
        let z = bessel_zero(1, 2).unwrap().value;
        let p = resonant_params(4, 2, z);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        let sub = reachable_subspace(&eff, FockState::new(0, 4, 0), 1e-10).unwrap();
        assert_eq!(
            sub.states,
            vec![
                FockState::new(0, 4, 0),
                FockState::new(0, 3, 1),
                FockState::new(0, 2, 2)
            ]
        );
    }

    #[test]
    fn nu_links_all_die_together() {
        // at a zero of J_{-(N-1)-m} every coupling of the empty-right
        // ladder into n3 = 1 states vanishes
        let n = 4u32;
        let m = -2i64;
        let z = bessel_zero(1, 1).unwrap().value; // |-(N-1)-m| = 1
        let p = resonant_params(n, m, z);
        let basis = build_basis(n).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        for k in 1..n {
            let a = basis.index_of(FockState::new(n - k, k, 0)).unwrap();
            let b = basis.index_of(FockState::new(n - k, k - 1, 1)).unwrap();
            assert!(
                eff.couplings()[(a, b)].abs() < 1e-10,
                "nu link at n2 = {k} alive: {}",
                eff.couplings()[(a, b)]
            );
        }
    }

    #[test]
    fn total_freeze_decouples_the_edge_state() {
        // the complete-freeze drive (m = -2, first J_1 zero): the component
        // of |3,1,0> is just itself and every incident link is dead
        let z = bessel_zero(1, 1).unwrap().value;
        let p = resonant_params(4, -2, z);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        let start = FockState::new(3, 1, 0);
        let sub = reachable_subspace(&eff, start, 1e-10).unwrap();
        assert_eq!(sub.states, vec![start]);
        let i = basis.index_of(start).unwrap();
        for j in 0..basis.dim() {
            assert!(
                eff.couplings()[(i, j)].abs() < 1e-10,
                "link to {} alive: {}",
                basis.state(j),
                eff.couplings()[(i, j)]
            );
        }
    }

    #[test]
    fn huge_threshold_gives_singleton() {
        let p = resonant_params(4, 1, 5.1356);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        let sub = reachable_subspace(&eff, FockState::new(0, 4, 0), 1e6).unwrap();
        assert_eq!(sub.states, vec![FockState::new(0, 4, 0)]);
        assert!(slowest_population_period(&sub).is_none());
    }

    #[test]
    fn effective_two_level_rabi() {
        // Fig-2a-like reduction: starting in |0,4,0> the averaged model is
        // an exact two-level problem, P(0,3,1) = sin^2(|c| t)
        let z = bessel_zero(2, 1).unwrap().value;
        let p = resonant_params(4, 1, z);
        let basis = build_basis(4).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        let psi0 = StateVector::basis_state(&basis, FockState::new(0, 4, 0)).unwrap();
        let i = basis.index_of(FockState::new(0, 4, 0)).unwrap();
        let j = basis.index_of(FockState::new(0, 3, 1)).unwrap();
        let c = eff.couplings()[(i, j)].abs();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let traj = propagate_effective(&eff, &psi0, &times).unwrap();
        let mut max_p031: f64 = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let expected = (c * t).sin().powi(2);
            assert_abs_diff_eq!(traj.probabilities[k][j], expected, epsilon = 1e-9);
            max_p031 = max_p031.max(traj.probabilities[k][j]);
        }
        assert!(max_p031 > 0.999);
        assert!(traj.norm_drift < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_constant_trajectory() {
        // a fully frozen drive: every link carries the same dead Bessel
        // order at N = 2, m = 0, first J_1 zero
        let z = bessel_zero(1, 1).unwrap().value;
        let p = resonant_params(2, 0, z);
        let basis = build_basis(2).unwrap();
        let eff = build_effective_hamiltonian(&p, &basis, GAP_TOL, DetunedLinks::Reject).unwrap();
        assert!(eff.couplings().iter().all(|c| c.abs() < 1e-10));
        let psi0 = StateVector::basis_state(&basis, FockState::new(0, 2, 0)).unwrap();
        let times = [0.0, 3.0, 10.0, 50.0];
        let traj = propagate_effective(&eff, &psi0, &times).unwrap();
        for p in &traj.probabilities {
            assert_abs_diff_eq!(p[basis.index_of(FockState::new(0, 2, 0)).unwrap()], 1.0, epsilon = 1e-9);
        }
    }
}
