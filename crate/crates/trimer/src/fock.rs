//! Three-site bosonic Fock basis at fixed total particle number.
//!
//! Basis states are occupation triples |n1,n2,n3> with n1+n2+n3 = N, listed
//! in lexicographically descending order of (n1, n2). The ordering is
//! deterministic so state indices can be used in golden files and CSV
//! columns. For three wells the dimension is (N+1)(N+2)/2.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest particle number accepted by [`build_basis`]. The dense-matrix
/// representation stays trivial in this regime (dimension 91 at N = 12).
pub const MAX_PARTICLES: u32 = 12;

/// Occupation triple |n1,n2,n3>. Serializes as the array [n1, n2, n3].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockState {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

impl Serialize for FockState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [n1, n2, n3] = <[u32; 3]>::deserialize(deserializer)?;
        Ok(Self::new(n1, n2, n3))
    }
}

impl FockState {
    pub fn new(n1: u32, n2: u32, n3: u32) -> Self {
        Self { n1, n2, n3 }
    }

    /// Total particle number n1 + n2 + n3.
    pub fn total(&self) -> u32 {
        self.n1 + self.n2 + self.n3
    }

    /// Occupation of well `j` (1-based).
    pub fn occupation(&self, well: usize) -> u32 {
        match well {
            1 => self.n1,
            2 => self.n2,
            3 => self.n3,
            _ => panic!("well index must be 1, 2 or 3, got {well}"),
        }
    }

    /// Image under the left-right mirror (n1,n2,n3) -> (n3,n2,n1).
    pub fn mirrored(&self) -> Self {
        Self::new(self.n3, self.n2, self.n1)
    }

    /// Occupation triple as an array, for serialization.
    pub fn as_array(&self) -> [u32; 3] {
        [self.n1, self.n2, self.n3]
    }
}

impl From<(u32, u32, u32)> for FockState {
    fn from((n1, n2, n3): (u32, u32, u32)) -> Self {
        Self::new(n1, n2, n3)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.n1, self.n2, self.n3)
    }
}

/// One of the two tunneling bonds of the trimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bond {
    /// Wells 1 <-> 2.
    LeftCenter,
    /// Wells 2 <-> 3.
    CenterRight,
}

impl Bond {
    /// The two wells joined by this bond, 1-based.
    pub fn wells(&self) -> (usize, usize) {
        match self {
            Bond::LeftCenter => (1, 2),
            Bond::CenterRight => (2, 3),
        }
    }
}

/// Canonically ordered Fock basis for N particles in three wells.
#[derive(Debug, Clone)]
pub struct Basis {
    n: u32,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl Basis {
    /// Total particle number.
    pub fn particles(&self) -> u32 {
        self.n
    }

    /// Hilbert-space dimension, (N+1)(N+2)/2.
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// States in canonical order.
    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> FockState {
        self.states[index]
    }

    /// Index of a state, if it belongs to this basis.
    pub fn index_of(&self, state: FockState) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// Index of a state, as an error if absent.
    pub fn require_index(&self, state: FockState) -> Result<usize> {
        self.index_of(state).ok_or(Error::StateNotInBasis(state))
    }

    /// Index permutation induced by the mirror map (n1,n2,n3) -> (n3,n2,n1):
    /// `perm[i]` is the index of the mirrored i-th state.
    pub fn mirror_permutation(&self) -> Vec<usize> {
        self.states
            .iter()
            .map(|s| self.index[&s.mirrored()])
            .collect()
    }

    /// Unit vector concentrated on `state`.
    pub fn unit_vector(&self, state: FockState) -> Result<Vec<Complex64>> {
        let i = self.require_index(state)?;
        let mut v = vec![Complex64::ZERO; self.dim()];
        v[i] = Complex64::ONE;
        Ok(v)
    }
}

/// Enumerate the basis for `n` particles.
///
/// States are ordered lexicographically descending in (n1, n2); n3 is
/// implied. The first state is (N,0,0), the last (0,0,N).
pub fn build_basis(n: u32) -> Result<Basis> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(Error::ParticleNumberOutOfRange {
            got: n,
            max: MAX_PARTICLES,
        });
    }
    let mut states = Vec::with_capacity(((n + 1) * (n + 2) / 2) as usize);
    for n1 in (0..=n).rev() {
        for n2 in (0..=n - n1).rev() {
            states.push(FockState::new(n1, n2, n - n1 - n2));
        }
    }
    let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    Ok(Basis { n, states, index })
}

/// Hopping matrix elements <a| b_i^dag b_j |b> = sqrt(n_j (n_i + 1)) across
/// one bond, as symmetric (row, column, amplitude) triples.
///
/// Amplitudes exclude the hopping rate; the Hamiltonian assembly multiplies
/// by -v.
pub fn hop_elements(basis: &Basis, bond: Bond) -> Vec<(usize, usize, f64)> {
    let (lo, hi) = bond.wells();
    let mut out = Vec::new();
    for (i, s) in basis.states().iter().enumerate() {
        // move one particle from the higher well of the bond to the lower
        let from = s.occupation(hi);
        if from == 0 {
            continue;
        }
        let mut occ = s.as_array();
        occ[hi - 1] -= 1;
        occ[lo - 1] += 1;
        let t = FockState::new(occ[0], occ[1], occ[2]);
        let j = basis.index_of(t).expect("hop stays in the basis");
        let amp = (f64::from(from) * f64::from(s.occupation(lo) + 1)).sqrt();
        out.push((i, j, amp));
        out.push((j, i, amp));
    }
    out
}

/// Per-well expected occupations <n_1>, <n_2>, <n_3> for an amplitude vector.
pub fn number_expectations(psi: &[Complex64], basis: &Basis) -> Result<[f64; 3]> {
    if psi.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            got: psi.len(),
            expected: basis.dim(),
        });
    }
    let mut out = [0.0; 3];
    for (amp, s) in psi.iter().zip(basis.states()) {
        let p = amp.norm_sqr();
        out[0] += p * f64::from(s.n1);
        out[1] += p * f64::from(s.n2);
        out[2] += p * f64::from(s.n3);
    }
    Ok(out)
}
