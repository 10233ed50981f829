//! Fixed-photon-number Fock spaces and second-quantized lifts of mode
//! unitaries.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, permanent, ComplexMatrix, ComplexVector, C64, ONE, ZERO};

/// Default cap on the number of basis states.
pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// Photon counts per mode, e.g. `|1,1,1>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(pub Vec<u32>);

impl OccupationVector {
    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// All occupations of `modes` modes with `photons` photons in total,
/// ordered lexicographically descending (`|3,0,0>` before `|2,1,0>`).
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: usize,
    photons: u32,
    states: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.photons == other.photons
    }
}

impl FockBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationVector] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationVector {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

/// `C(photons + modes - 1, modes - 1)` without overflow for desk sizes.
pub fn basis_dimension(photons: u32, modes: usize) -> u128 {
    if modes == 0 {
        return 0;
    }
    let n = photons as u128 + modes as u128 - 1;
    let k = (modes as u128 - 1).min(photons as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

pub fn enumerate_basis(photons: u32, modes: usize) -> Result<Arc<FockBasis>> {
    enumerate_basis_capped(photons, modes, DEFAULT_BASIS_CAP)
}

pub fn enumerate_basis_capped(photons: u32, modes: usize, cap: usize) -> Result<Arc<FockBasis>> {
    if modes == 0 {
        return Err(Error::InvalidModel("a Fock basis needs at least one mode".into()));
    }
    let dim = basis_dimension(photons, modes);
    if dim > cap as u128 {
        return Err(Error::SizeOverflow { dim, cap });
    }
    let mut states = Vec::with_capacity(dim as usize);
    let mut current = vec![0u32; modes];
    fill(&mut current, 0, photons, &mut states);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(Arc::new(FockBasis {
        modes,
        photons,
        states,
        index,
    }))
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<OccupationVector>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(OccupationVector(current.to_vec()));
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
}

/// Amplitudes over a shared Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                what: "state amplitudes",
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub(crate) fn from_parts(basis: Arc<FockBasis>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(basis.dim(), amplitudes.len());
        Self { basis, amplitudes }
    }

    /// The number state `|occ>`.
    pub fn fock(basis: Arc<FockBasis>, occ: &OccupationVector) -> Result<Self> {
        let idx = basis.index_of(occ).ok_or_else(|| {
            Error::InvalidModel(format!("{occ} is not in the {}-photon basis", basis.photons()))
        })?;
        Ok(Self::basis_state(basis, idx))
    }

    pub fn basis_state(basis: Arc<FockBasis>, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[index] = ONE;
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn same_basis(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert!(self.same_basis(other));
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn to_vector(&self) -> ComplexVector {
        ComplexVector(self.amplitudes.clone())
    }

    pub fn from_vector(basis: Arc<FockBasis>, v: ComplexVector) -> Result<Self> {
        Self::new(basis, v.0)
    }
}

const FACTORIAL_TABLE_MAX: u32 = 20;

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `sqrt(prod_i n_i!)`, exact table up to 20! and log-domain beyond.
fn sqrt_factorial_product(occ: &OccupationVector) -> f64 {
    if occ.0.iter().all(|&n| n <= FACTORIAL_TABLE_MAX) {
        let mut table = [1.0_f64; FACTORIAL_TABLE_MAX as usize + 1];
        for k in 1..table.len() {
            table[k] = table[k - 1] * k as f64;
        }
        occ.0.iter().map(|&n| table[n as usize]).product::<f64>().sqrt()
    } else {
        (0.5 * occ.0.iter().map(|&n| ln_factorial(n)).sum::<f64>()).exp()
    }
}

fn repeated_indices(occ: &OccupationVector) -> Vec<usize> {
    occ.0
        .iter()
        .enumerate()
        .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n as usize))
        .collect()
}

/// Lifts an `m x m` mode unitary to the `D x D` Fock-space operator with
/// entries `perm(U[T,S]) / sqrt(prod T_i! prod S_j!)`.
pub fn lift_unitary(u: &ComplexMatrix, basis: &FockBasis) -> Result<ComplexMatrix> {
    lift_unitary_with_tol(u, basis, crate::Tolerances::default().unitary)
}

pub fn lift_unitary_with_tol(u: &ComplexMatrix, basis: &FockBasis, tol: f64) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if u.rows() != basis.modes() {
        return Err(Error::DimensionMismatch {
            what: "mode unitary",
            expected: basis.modes(),
            found: u.rows(),
        });
    }
    let defect = u.unitarity_defect();
    if defect > tol {
        return Err(Error::NotUnitary { defect });
    }
    let rows: Vec<Vec<usize>> = basis.states().iter().map(repeated_indices).collect();
    let norms: Vec<f64> = basis.states().iter().map(sqrt_factorial_product).collect();
    let d = basis.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for t in 0..d {
        for s in 0..d {
            let sub = u.select(&rows[t], &rows[s]);
            out[(t, s)] = permanent(&sub)? / (norms[t] * norms[s]);
        }
    }
    Ok(out)
}

/// Diagonal of the number operator `n_mode` over the basis.
pub fn number_operator(mode: usize, basis: &FockBasis) -> Result<Vec<f64>> {
    if mode >= basis.modes() {
        return Err(Error::IndexOutOfRange {
            what: "mode",
            index: mode,
            len: basis.modes(),
        });
    }
    Ok(basis.states().iter().map(|s| s.0[mode] as f64).collect())
}

/// Diagonal of the phase layer `exp(i sum_l n_{modes[l]} theta_l)`.
pub fn phase_layer(basis: &FockBasis, phase_modes: &[usize], theta: &[f64]) -> Vec<C64> {
    debug_assert_eq!(phase_modes.len(), theta.len());
    basis
        .states()
        .iter()
        .map(|s| {
            let angle: f64 = phase_modes
                .iter()
                .zip(theta)
                .map(|(&m, &t)| s.0[m] as f64 * t)
                .sum();
            C64::from_polar(1.0, angle)
        })
        .collect()
}
