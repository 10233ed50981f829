//! Independent oracles and random generators shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qfisher::fisher::ProjectorSet;
use qfisher::fock::{FockBasis, OccupationVector, StateVector};
use qfisher::interferometer::{InterferometerModel, PhaseEncoding, Probe};
use qfisher::linalg::ComplexMatrix;
use qfisher::Tolerances;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Modified Gram-Schmidt over `vectors`, dropping near-dependent ones.
pub fn orthonormalize(vectors: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for mut v in vectors {
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = dot(&v, &v).re.sqrt();
        if n > 1e-8 {
            out.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..n).map(|_| (0..n).map(|_| random_complex(rng)).collect()).collect();
        let q = orthonormalize(cols);
        if q.len() == n {
            return ComplexMatrix::from_fn(n, n, |i, j| q[j][i]);
        }
    }
}

pub fn random_state<R: Rng>(rng: &mut R, basis: &Arc<FockBasis>) -> StateVector {
    let v: Vec<C64> = (0..basis.dim()).map(|_| random_complex(rng)).collect();
    let n = dot(&v, &v).re.sqrt();
    StateVector::new(Arc::clone(basis), v.into_iter().map(|x| x / n).collect()).unwrap()
}

/// Random orthonormal basis of the whole space, optionally led by `first`.
pub fn random_basis_set<R: Rng>(rng: &mut R, basis: &Arc<FockBasis>, first: Option<&StateVector>) -> ProjectorSet {
    let dim = basis.dim();
    let mut seeds: Vec<Vec<C64>> = first.map(|s| s.amplitudes().to_vec()).into_iter().collect();
    while seeds.len() < dim + 2 {
        seeds.push((0..dim).map(|_| random_complex(rng)).collect());
    }
    let q = orthonormalize(seeds);
    assert!(q.len() >= dim);
    let states = q
        .into_iter()
        .take(dim)
        .map(|v| StateVector::new(Arc::clone(basis), v).unwrap())
        .collect();
    ProjectorSet::new(basis, states, &Tolerances::default()).unwrap()
}

fn random_occupation<R: Rng>(rng: &mut R, modes: usize, photons: u32) -> OccupationVector {
    let mut counts = vec![0u32; modes];
    for _ in 0..photons {
        counts[rng.gen_range(0..modes)] += 1;
    }
    OccupationVector(counts)
}

/// Random two-splitter model with `params` phases on distinct modes
/// (one mode is always left without a phase).
pub fn random_model<R: Rng>(rng: &mut R, params: usize) -> InterferometerModel {
    let modes = rng.gen_range(params + 1..=(params + 1).max(3));
    let photons = rng.gen_range(1..=3u32);
    let w = random_unitary(rng, modes);
    let v = random_unitary(rng, modes);
    let occ = random_occupation(rng, modes, photons);
    let probe = if rng.gen_bool(0.5) {
        Probe::Fock(occ)
    } else {
        let basis = qfisher::fock::enumerate_basis(photons, modes).unwrap();
        Probe::Superposition(random_state(rng, &basis))
    };
    let mut phase_modes: Vec<usize> = (0..modes).collect();
    for i in (1..modes).rev() {
        phase_modes.swap(i, rng.gen_range(0..=i));
    }
    phase_modes.truncate(params);
    InterferometerModel::with_recombiner(w, v, phase_modes, probe).unwrap()
}

/// Naive permanent: sum over all permutations.
pub fn naive_permanent(m: &ComplexMatrix) -> C64 {
    let n = m.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = C64::new(0.0, 0.0);
    permute(&mut perm, 0, &mut |p| {
        total += (0..n).map(|i| m.row(i)[p[i]]).product::<C64>();
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Limit of `g g^T / P` along direction `u` for an outcome with `P = 0` and
/// first-order overlaps `a_j = <Y|d_j psi>`.
pub fn analytic_singular_limit(a: &[C64], u: &[f64]) -> Vec<Vec<f64>> {
    let s: C64 = a.iter().zip(u).map(|(x, w)| x * w).sum();
    let n2 = s.norm_sqr();
    a.iter()
        .map(|al| a.iter().map(|am| 4.0 * (al.conj() * s).re * (am.conj() * s).re / n2).collect())
        .collect()
}

/// Central-difference FIM from outcome probabilities only.
pub fn fd_fim<E: PhaseEncoding>(model: &E, theta: &[f64], set: &ProjectorSet, delta: f64) -> Vec<Vec<f64>> {
    let probs = |t: &[f64]| -> Vec<f64> {
        let psi = model.output_state(t).unwrap();
        set.projectors().iter().map(|y| y.inner(&psi).norm_sqr()).collect()
    };
    let d = theta.len();
    let p0 = probs(theta);
    let grads: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut hi = theta.to_vec();
            let mut lo = theta.to_vec();
            hi[j] += delta;
            lo[j] -= delta;
            probs(&hi).iter().zip(probs(&lo)).map(|(a, b)| (a - b) / (2.0 * delta)).collect()
        })
        .collect();
    (0..d)
        .map(|l| (0..d).map(|m| (0..p0.len()).map(|k| grads[l][k] * grads[m][k] / p0[k]).sum()).collect())
        .collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Wrapped distance from `theta` to the 4-mode saturation lines
/// `theta2 = theta1 (mod 2pi)` and `theta2 = theta1 + pi (mod 2pi)`.
pub fn distance_to_mzi4_locus(theta: [f64; 2]) -> f64 {
    use std::f64::consts::PI;
    let wrap = |x: f64| {
        let r = x.rem_euclid(2.0 * PI);
        r.min(2.0 * PI - r)
    };
    let diff = theta[1] - theta[0];
    wrap(diff).min(wrap(diff - PI)) / 2f64.sqrt()
}
