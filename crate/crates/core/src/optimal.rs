//! Projective measurements that saturate `F = F_Q`.
//!
//! Both constructions live in `span{psi, omega_1 .. omega_d}` with real
//! coefficients, where
//!
//! ```text
//! |omega_m> = |d_m psi> + |psi><d_m psi|psi>
//! ```
//!
//! is the derivative with its component along `psi` removed. The rest of
//! the Hilbert space is filled by an arbitrary orthonormal completion;
//! those vectors are orthogonal to `psi` and every `d_m psi`, so they
//! contribute nothing to either Fisher matrix.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::ProjectorSet;
use crate::fock::{FockBasis, StateVector};
use crate::interferometer::DerivativeBundle;
use crate::linalg::{gram_schmidt_real_span, orthonormal_completion, ComplexMatrix, ComplexVector, RealSymMatrix, C64};
use crate::Tolerances;

/// `psi`, its derivatives, the omega states and their Gram matrix.
#[derive(Debug, Clone)]
pub struct OmegaFrame {
    pub theta: Vec<f64>,
    pub psi: StateVector,
    pub dpsi: Vec<StateVector>,
    pub omegas: Vec<StateVector>,
    /// `gram[(l, m)] = <omega_l|omega_m>`
    pub gram: ComplexMatrix,
}

impl OmegaFrame {
    pub fn num_params(&self) -> usize {
        self.omegas.len()
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.psi.basis()
    }

    /// `max |Im Omega_lm|`
    pub fn max_imag_gram(&self) -> f64 {
        self.gram.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `4 Re Omega`, which equals the QFIM.
    pub fn qfim(&self) -> RealSymMatrix {
        let d = self.num_params();
        RealSymMatrix::from_upper(d, |l, m| 4.0 * self.gram[(l, m)].re)
    }

    /// `max_m |<psi|omega_m>|`
    pub fn probe_overlap_defect(&self) -> f64 {
        self.omegas.iter().map(|w| self.psi.inner(w).norm()).fold(0.0, f64::max)
    }
}

pub fn omega_frame(bundle: &DerivativeBundle) -> OmegaFrame {
    let psi = bundle.psi.clone();
    let omegas: Vec<StateVector> = bundle
        .dpsi
        .iter()
        .map(|dp| {
            let c = dp.inner(&psi);
            let amps = dp
                .amplitudes()
                .iter()
                .zip(psi.amplitudes())
                .map(|(a, p)| a + p * c)
                .collect();
            StateVector::from_parts(Arc::clone(psi.basis()), amps)
        })
        .collect();
    let d = omegas.len();
    let gram = ComplexMatrix::from_fn(d, d, |l, m| omegas[l].inner(&omegas[m]));
    OmegaFrame {
        theta: bundle.theta.clone(),
        psi,
        dpsi: bundle.dpsi.clone(),
        omegas,
        gram,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Construction {
    Orthogonal,
    NonOrthogonal { mix: f64 },
}

/// A saturating measurement together with its expansion coefficients.
#[derive(Debug, Clone)]
pub struct OptimalSet {
    pub construction: Construction,
    pub set: ProjectorSet,
    /// Number of leading projectors inside `span{psi, omega}`.
    pub in_span: usize,
    /// `coefficients[k]` expands in-span projector `k` as
    /// `sum_m b[m] |omega_m> + b[d] |psi>`.
    pub coefficients: Vec<Vec<f64>>,
}

impl OptimalSet {
    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// `max_k |Y_k - sum_m b_mk omega_m - b_dk psi|` over in-span projectors.
    pub fn expansion_defect(&self, frame: &OmegaFrame) -> f64 {
        let d = frame.num_params();
        let mut worst = 0.0_f64;
        for (k, b) in self.coefficients.iter().enumerate() {
            let target = &self.set.projectors()[k];
            for i in 0..target.dim() {
                let mut z = frame.psi.amplitudes()[i] * b[d];
                for (m, w) in frame.omegas.iter().enumerate() {
                    z += w.amplitudes()[i] * b[m];
                }
                worst = worst.max((target.amplitudes()[i] - z).norm());
            }
        }
        worst
    }

    /// `max |Im <d_l psi|Y_k>|` over in-span projectors orthogonal to psi.
    pub fn derivative_overlap_imag(&self, frame: &OmegaFrame) -> f64 {
        let mut worst = 0.0_f64;
        for proj in &self.set.projectors()[..self.in_span] {
            if frame.psi.inner(proj).norm() > 1e-10 {
                continue;
            }
            for dp in &frame.dpsi {
                worst = worst.max(dp.inner(proj).im.abs());
            }
        }
        worst
    }

    /// `min_k |<psi|Y_k>|` over in-span projectors.
    pub fn min_probe_overlap(&self, frame: &OmegaFrame) -> f64 {
        self.set.projectors()[..self.in_span]
            .iter()
            .map(|p| frame.psi.inner(p).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_weak_commutativity(frame: &OmegaFrame, tol: &Tolerances) -> Result<()> {
    let max_imag = frame.max_imag_gram();
    if max_imag >= tol.weak_commutativity {
        return Err(Error::WeakCommutativityViolated { max_imag });
    }
    Ok(())
}

fn to_state(basis: &Arc<FockBasis>, v: ComplexVector) -> StateVector {
    StateVector::from_parts(Arc::clone(basis), v.0)
}

/// Orthonormal real-coefficient basis of the omega span, as vectors and
/// rows of weights over the omega states.
fn omega_span(frame: &OmegaFrame, tol: &Tolerances) -> Result<(Vec<ComplexVector>, Vec<Vec<f64>>)> {
    let inputs: Vec<ComplexVector> = frame.omegas.iter().map(StateVector::to_vector).collect();
    let span = gram_schmidt_real_span(&inputs, tol.weak_commutativity.max(tol.gram_schmidt))?;
    Ok((span.vectors, span.coefficients))
}

fn finish(
    frame: &OmegaFrame,
    construction: Construction,
    in_span: Vec<ComplexVector>,
    coefficients: Vec<Vec<f64>>,
    tol: &Tolerances,
) -> Result<OptimalSet> {
    let basis = frame.basis();
    let completion = orthonormal_completion(&in_span, basis.dim());
    let count = in_span.len();
    let projectors: Vec<StateVector> = in_span
        .into_iter()
        .chain(completion)
        .map(|v| to_state(basis, v))
        .collect();
    let labels = (0..projectors.len())
        .map(|k| if k < count { format!("span{}", k + 1) } else { format!("completion{}", k + 1 - count) })
        .collect();
    let set = ProjectorSet::new(basis, projectors, tol)?.with_labels(labels);
    let out = OptimalSet {
        construction,
        set,
        in_span: count,
        coefficients,
    };
    certify(&out, frame)?;
    Ok(out)
}

/// Structural checks every construction must pass. Failures indicate a
/// bug, not a property of the input.
fn certify(out: &OptimalSet, frame: &OmegaFrame) -> Result<()> {
    if !out.set.is_complete() {
        return Err(Error::InternalInconsistency(format!(
            "constructed set is incomplete (defect {:e})",
            out.set.completeness_defect()
        )));
    }
    let scale = frame.omegas.iter().map(|w| w.norm_sqr().sqrt()).fold(1.0, f64::max);
    let expansion = out.expansion_defect(frame);
    if expansion > 1e-9 * scale {
        return Err(Error::InternalInconsistency(format!(
            "in-span projectors deviate from their real expansion by {expansion:e}"
        )));
    }
    for proj in &out.set.projectors()[out.in_span..] {
        let leak = std::iter::once(&frame.psi)
            .chain(&frame.dpsi)
            .map(|v| v.inner(proj).norm())
            .fold(0.0, f64::max);
        if leak > 1e-9 * scale {
            return Err(Error::InternalInconsistency(format!(
                "completion vector overlaps psi or a derivative by {leak:e}"
            )));
        }
    }
    Ok(())
}

/// The probe itself, a real Gram-Schmidt basis of the omega states and a
/// completion.
pub fn construct_orthogonal_optimal(frame: &OmegaFrame, tol: &Tolerances) -> Result<OptimalSet> {
    check_weak_commutativity(frame, tol)?;
    let d = frame.num_params();
    let (span, weights) = omega_span(frame, tol)?;
    let mut vectors = vec![frame.psi.to_vector()];
    let mut probe_b = vec![0.0; d + 1];
    probe_b[d] = 1.0;
    let mut coefficients = vec![probe_b];
    for (v, w) in span.into_iter().zip(weights) {
        vectors.push(v);
        let mut b = w;
        b.push(0.0);
        coefficients.push(b);
    }
    finish(frame, Construction::Orthogonal, vectors, coefficients, tol)
}

/// A real rotation of the orthogonal construction that gives every
/// in-span projector an overlap of at least `mix / sqrt(d + 1)` with the
/// probe.
///
/// The rotation is the Householder reflection taking the probe axis to
/// `f = (c, s, .., s)` with `s = mix / sqrt(r + 1)`, `r` the rank of the
/// omega span. It is symmetric, so every other axis picks up the same
/// probe component `s`.
pub fn construct_nonorthogonal_optimal(frame: &OmegaFrame, mix: f64, tol: &Tolerances) -> Result<OptimalSet> {
    if !(mix > 0.0 && mix <= 1.0) {
        return Err(Error::MixInfeasible { mix });
    }
    check_weak_commutativity(frame, tol)?;
    let d = frame.num_params();
    let (span, weights) = omega_span(frame, tol)?;
    let r = span.len();
    let n = r + 1;

    let s = mix / (n as f64).sqrt();
    let c = (1.0 - r as f64 * s * s).sqrt();
    let mut f = vec![s; n];
    f[0] = c;
    let mut v = f.iter().map(|x| -x).collect::<Vec<f64>>();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let h = |j: usize, k: usize| -> f64 {
        let id = if j == k { 1.0 } else { 0.0 };
        if vv == 0.0 {
            id
        } else {
            id - 2.0 * v[j] * v[k] / vv
        }
    };

    // Axis 0 is psi, axis j >= 1 is span[j - 1].
    let axes: Vec<ComplexVector> = std::iter::once(frame.psi.to_vector()).chain(span).collect();
    let dim = frame.psi.dim();
    let mut vectors = Vec::with_capacity(n);
    let mut coefficients = Vec::with_capacity(n);
    for k in 0..n {
        let mut y = ComplexVector::zeros(dim);
        for (j, axis) in axes.iter().enumerate() {
            y.axpy(C64::new(h(j, k), 0.0), axis);
        }
        vectors.push(y);
        let mut b = vec![0.0; d + 1];
        for j in 1..n {
            for (m, w) in weights[j - 1].iter().enumerate() {
                b[m] += h(j, k) * w;
            }
        }
        b[d] = h(0, k);
        coefficients.push(b);
    }

    let out = finish(frame, Construction::NonOrthogonal { mix }, vectors, coefficients, tol)?;
    let threshold = mix / ((d + 1) as f64).sqrt();
    if out.min_probe_overlap(frame) < threshold * (1.0 - 1e-12) {
        return Err(Error::MixInfeasible { mix });
    }
    Ok(out)
}
