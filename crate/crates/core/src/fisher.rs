//! Classical and quantum Fisher information matrices for rank-one
//! projective measurements on pure states.
//!
//! The classical matrix is
//!
//! ```text
//! F_lm = sum_k  dP_k/dtheta_l * dP_k/dtheta_m / P_k,   dP_k/dtheta_l = 2 Re[<d_l psi|Y_k><Y_k|psi>]
//! ```
//!
//! Outcomes whose probability vanishes at `theta` make the summand `0/0`.
//! For those the summand is replaced by its limit along a straight path
//! `phi = theta + delta * u`, extrapolated to `delta -> 0` from a few
//! finite steps (Neville/Richardson). If every first-order overlap
//! `<Y_k|d_j psi>` vanishes the summand is zero to second order and is
//! dropped without evaluating the path.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, OccupationVector, StateVector};
use crate::interferometer::{DerivativeBundle, PhaseEncoding};
use crate::linalg::{RealSymMatrix, C64};
use crate::Tolerances;

/// Rank-one projectors `{|Y_k><Y_k|}` over a Fock basis.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    basis: Arc<FockBasis>,
    projectors: Vec<StateVector>,
    labels: Vec<String>,
    complete: bool,
}

impl ProjectorSet {
    /// Photon counting: one projector per Fock state, in basis order.
    pub fn fock(basis: &Arc<FockBasis>) -> Self {
        let projectors = (0..basis.dim())
            .map(|i| StateVector::basis_state(Arc::clone(basis), i))
            .collect();
        let labels = basis.states().iter().map(ToString::to_string).collect();
        Self {
            basis: Arc::clone(basis),
            projectors,
            labels,
            complete: true,
        }
    }

    /// Validates normalization and records whether the set resolves the
    /// identity within `tol.completeness`.
    pub fn new(basis: &Arc<FockBasis>, projectors: Vec<StateVector>, tol: &Tolerances) -> Result<Self> {
        for (index, p) in projectors.iter().enumerate() {
            if p.basis().as_ref() != basis.as_ref() || p.dim() != basis.dim() {
                return Err(Error::BasisMismatch);
            }
            if !p.is_normalized(tol.normalized) {
                return Err(Error::NotNormalized {
                    index,
                    defect: (p.norm_sqr() - 1.0).abs(),
                });
            }
        }
        let labels = (0..projectors.len()).map(|k| format!("Y{}", k + 1)).collect();
        let mut set = Self {
            basis: Arc::clone(basis),
            projectors,
            labels,
            complete: false,
        };
        set.complete = set.completeness_defect() <= tol.completeness;
        Ok(set)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.projectors.len());
        self.labels = labels;
        self
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn projectors(&self) -> &[StateVector] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// `max |(sum_k |Y_k><Y_k| - I)_ij|`
    pub fn completeness_defect(&self) -> f64 {
        let d = self.basis.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                let s: C64 = self
                    .projectors
                    .iter()
                    .map(|p| p.amplitudes()[i] * p.amplitudes()[j].conj())
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::IncompleteSet {
                defect: self.completeness_defect(),
            })
        }
    }

    pub fn to_file(&self) -> ProjectorSetFile {
        ProjectorSetFile {
            modes: self.basis.modes(),
            photons: self.basis.photons(),
            basis: self.basis.states().to_vec(),
            labels: self.labels.clone(),
            projectors: self
                .projectors
                .iter()
                .map(|p| p.amplitudes().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_file(file: &ProjectorSetFile, basis: &Arc<FockBasis>, tol: &Tolerances) -> Result<Self> {
        if file.modes != basis.modes() || file.photons != basis.photons() {
            return Err(Error::BasisMismatch);
        }
        if file.basis.len() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        // Amplitudes are addressed by the occupations listed in the file.
        let order = file
            .basis
            .iter()
            .map(|occ| basis.index_of(occ).ok_or(Error::BasisMismatch))
            .collect::<Result<Vec<_>>>()?;
        let projectors = file
            .projectors
            .iter()
            .map(|amps| {
                if amps.len() != basis.dim() {
                    return Err(Error::DimensionMismatch {
                        what: "projector amplitudes",
                        expected: basis.dim(),
                        found: amps.len(),
                    });
                }
                let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
                for (pos, &[re, im]) in order.iter().zip(amps) {
                    v[*pos] = C64::new(re, im);
                }
                StateVector::new(Arc::clone(basis), v)
            })
            .collect::<Result<Vec<_>>>()?;
        let set = Self::new(basis, projectors, tol)?;
        if file.labels.len() == set.len() {
            Ok(set.with_labels(file.labels.clone()))
        } else {
            Ok(set)
        }
    }
}

/// JSON form of a projector set: amplitudes as `[re, im]` pairs, indexed
/// by the occupations in `basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSetFile {
    pub modes: usize,
    pub photons: u32,
    pub basis: Vec<OccupationVector>,
    #[serde(default)]
    pub labels: Vec<String>,
    pub projectors: Vec<Vec<[f64; 2]>>,
}

/// How zero-probability outcomes are resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitPolicy {
    /// Outcomes with `P < p_floor` go through the limit procedure.
    pub p_floor: f64,
    /// Path direction; `None` means `(1, .., 1) / sqrt(d)`.
    pub direction: Option<Vec<f64>>,
    /// Path steps for the extrapolation, largest first.
    pub steps: Vec<f64>,
    /// Max disagreement between the two finest extrapolants, relative to
    /// `max(1, largest |entry|)` of the limit.
    pub tolerance: f64,
    /// Also take the limit along every coordinate axis and compare.
    pub audit_directions: bool,
    /// Spread above which an outcome is reported as direction dependent.
    pub audit_spread: f64,
    /// First-order overlaps below this count as zero.
    pub first_order_zero: f64,
    /// `|a . u| < degenerate_direction * |a|` switches to a coordinate axis.
    pub degenerate_direction: f64,
}

impl Default for LimitPolicy {
    fn default() -> Self {
        Self {
            p_floor: 1e-12,
            direction: None,
            steps: vec![1e-3, 5e-4, 2.5e-4],
            tolerance: 1e-6,
            audit_directions: true,
            audit_spread: 1e-5,
            first_order_zero: 1e-12,
            degenerate_direction: 1e-6,
        }
    }
}

impl LimitPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.steps.len() < 2 {
            return Err(Error::InvalidConfig("limit policy needs at least two steps".into()));
        }
        if self.steps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig("limit steps must be positive".into()));
        }
        for w in self.steps.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidConfig("limit steps must decrease".into()));
            }
        }
        if !(self.p_floor >= 0.0 && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("p_floor and tolerance must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn base_direction(&self, d: usize) -> Result<Vec<f64>> {
        match &self.direction {
            None => Ok(vec![1.0 / (d as f64).sqrt(); d]),
            Some(u) => {
                if u.len() != d {
                    return Err(Error::DimensionMismatch {
                        what: "limit direction",
                        expected: d,
                        found: u.len(),
                    });
                }
                let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::InvalidConfig("limit direction must be non-zero".into()));
                }
                Ok(u.iter().map(|x| x / n).collect())
            }
        }
    }

    /// Direction actually used for an outcome with first-order overlaps `a`:
    /// the policy direction unless it is (numerically) orthogonal to `a`.
    pub(crate) fn direction_for(&self, a: &[C64]) -> Result<(Vec<f64>, bool)> {
        let d = a.len();
        let u = self.base_direction(d)?;
        let a_norm = a.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        let s: C64 = a.iter().zip(&u).map(|(x, w)| x * w).sum();
        if s.norm() >= self.degenerate_direction * a_norm {
            return Ok((u, false));
        }
        let axis = (0..d)
            .max_by(|&i, &j| a[i].norm().total_cmp(&a[j].norm()))
            .unwrap_or(0);
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        Ok((e, true))
    }
}

/// Polynomial extrapolation to step zero (Neville). Returns the final
/// extrapolant and its max difference from the previous-order one.
pub(crate) fn extrapolate_to_zero(steps: &[f64], samples: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let n = steps.len();
    // table[i] holds the order-`order` extrapolant ending at step i.
    let mut table: Vec<Vec<f64>> = samples.to_vec();
    let mut prev_best = table[n - 1].clone();
    for order in 1..n {
        let mut next = vec![Vec::new(); n];
        for i in order..n {
            let (xi, xj) = (steps[i], steps[i - order]);
            next[i] = table[i - 1]
                .iter()
                .zip(&table[i])
                .map(|(lo, hi)| (xi * lo - xj * hi) / (xi - xj))
                .collect();
        }
        if order + 1 < n {
            prev_best = next[n - 1].clone();
        }
        table = next;
    }
    let best = table[n - 1].clone();
    let spread = best
        .iter()
        .zip(&prev_best)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (best, spread)
}

/// How a zero-probability outcome entered the FIM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularTreatment {
    /// All first-order overlaps vanish; contributes zero.
    Vanishing,
    /// Path limit along `direction`.
    Limit {
        direction: Vec<f64>,
        direction_fallback: bool,
        /// Factor applied to the policy steps, `|a . u| / |a|`.
        #[serde(default = "unit_scale")]
        step_scale: f64,
        extrapolation_spread: f64,
        /// Max spread against the coordinate-axis limits, when audited.
        audit_spread: Option<f64>,
    },
}

fn unit_scale() -> f64 {
    1.0
}

/// Path steps shrink with `|a . u| / |a|`: when the first-order overlap along
/// `u` nearly cancels, the leading term only dominates for smaller steps.
fn step_scale(a: &[C64], u: &[f64]) -> f64 {
    let a_norm = a.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    let s: C64 = a.iter().zip(u).map(|(x, w)| x * w).sum();
    (s.norm() / a_norm).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularOutcome {
    pub index: usize,
    pub probability: f64,
    pub treatment: SingularTreatment,
}

#[derive(Debug, Clone)]
pub struct FimEstimate {
    pub matrix: RealSymMatrix,
    pub singular: Vec<SingularOutcome>,
    pub direction_dependent: bool,
}

fn check_basis(bundle: &DerivativeBundle, set: &ProjectorSet) -> Result<()> {
    if bundle.basis().as_ref() != set.basis().as_ref() {
        return Err(Error::BasisMismatch);
    }
    Ok(())
}

/// `[F_Q]_lm = 4 Re[<d_l psi|d_m psi> - <d_l psi|psi><psi|d_m psi>]`
pub fn qfim(bundle: &DerivativeBundle) -> RealSymMatrix {
    let d = bundle.num_params();
    let overlaps: Vec<C64> = bundle.dpsi.iter().map(|x| x.inner(&bundle.psi)).collect();
    RealSymMatrix::from_upper(d, |l, m| {
        let cross = bundle.dpsi[l].inner(&bundle.dpsi[m]);
        4.0 * (cross - overlaps[l] * overlaps[m].conj()).re
    })
}

/// `P(k|theta) = |<Y_k|psi>|^2`
pub fn probabilities(psi: &StateVector, set: &ProjectorSet) -> Result<Vec<f64>> {
    if psi.basis().as_ref() != set.basis().as_ref() {
        return Err(Error::BasisMismatch);
    }
    Ok(set.projectors().iter().map(|p| p.inner(psi).norm_sqr()).collect())
}

/// Outer product `g g^T / p` accumulated into `acc` (row-major, d x d).
fn add_term(acc: &mut [f64], g: &[f64], p: f64) {
    let d = g.len();
    for l in 0..d {
        for m in 0..d {
            acc[l * d + m] += g[l] * g[m] / p;
        }
    }
}

fn outcome_term(bundle: &DerivativeBundle, proj: &StateVector) -> (Vec<f64>, f64) {
    let b = proj.inner(&bundle.psi);
    let p = b.norm_sqr();
    let g: Vec<f64> = bundle
        .dpsi
        .iter()
        .map(|dp| 2.0 * (proj.inner(dp).conj() * b).re)
        .collect();
    (g, p)
}

fn path_limit<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    proj: &StateVector,
    outcome: usize,
    direction: &[f64],
    scale: f64,
    policy: &LimitPolicy,
) -> Result<(Vec<f64>, f64)> {
    let d = theta.len();
    let steps: Vec<f64> = policy.steps.iter().map(|h| h * scale).collect();
    let mut samples = Vec::with_capacity(steps.len());
    for &step in &steps {
        let phi: Vec<f64> = theta.iter().zip(direction).map(|(t, u)| t + step * u).collect();
        let bundle = source.derivative_states(&phi)?;
        let (g, p) = outcome_term(&bundle, proj);
        if !(p > 0.0) {
            return Err(Error::LimitNonConvergent {
                outcome,
                spread: f64::INFINITY,
            });
        }
        let mut t = vec![0.0; d * d];
        add_term(&mut t, &g, p);
        samples.push(t);
    }
    let (value, spread) = extrapolate_to_zero(&steps, &samples);
    let scale = value.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if !(spread <= policy.tolerance * scale) {
        return Err(Error::LimitNonConvergent { outcome, spread });
    }
    Ok((value, spread))
}

/// Classical Fisher information of a complete projective measurement,
/// resolving zero-probability outcomes per `policy`.
pub fn fim<E: PhaseEncoding + ?Sized>(
    source: &E,
    bundle: &DerivativeBundle,
    set: &ProjectorSet,
    policy: &LimitPolicy,
) -> Result<FimEstimate> {
    check_basis(bundle, set)?;
    set.require_complete()?;
    policy.validate()?;
    let d = bundle.num_params();
    let mut acc = vec![0.0; d * d];
    let mut singular = Vec::new();
    let mut direction_dependent = false;

    for (k, proj) in set.projectors().iter().enumerate() {
        let (g, p) = outcome_term(bundle, proj);
        if p >= policy.p_floor && p > 0.0 {
            add_term(&mut acc, &g, p);
            continue;
        }
        let a: Vec<C64> = bundle.dpsi.iter().map(|dp| proj.inner(dp)).collect();
        if a.iter().all(|x| x.norm() < policy.first_order_zero) {
            singular.push(SingularOutcome {
                index: k,
                probability: p,
                treatment: SingularTreatment::Vanishing,
            });
            continue;
        }
        let (u, fallback) = policy.direction_for(&a)?;
        let scale = step_scale(&a, &u);
        let (value, spread) = path_limit(source, &bundle.theta, proj, k, &u, scale, policy)?;

        let mut audit = None;
        if policy.audit_directions && d > 1 {
            let a_norm = a.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            let mut worst = 0.0_f64;
            for axis in 0..d {
                if a[axis].norm() < policy.degenerate_direction * a_norm {
                    continue;
                }
                let mut e = vec![0.0; d];
                e[axis] = 1.0;
                if let Ok((other, _)) = path_limit(source, &bundle.theta, proj, k, &e, step_scale(&a, &e), policy) {
                    let diff = other
                        .iter()
                        .zip(&value)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    worst = worst.max(diff);
                }
            }
            if worst > policy.audit_spread {
                direction_dependent = true;
            }
            audit = Some(worst);
        }

        for (x, v) in acc.iter_mut().zip(&value) {
            *x += v;
        }
        singular.push(SingularOutcome {
            index: k,
            probability: p,
            treatment: SingularTreatment::Limit {
                direction: u,
                direction_fallback: fallback,
                step_scale: scale,
                extrapolation_spread: spread,
                audit_spread: audit,
            },
        });
    }

    Ok(FimEstimate {
        matrix: RealSymMatrix::symmetrized(d, &acc),
        singular,
        direction_dependent,
    })
}

/// FIM from central-difference probability derivatives. Test oracle for
/// [`fim`]; only meaningful where every contributing `P > 10 delta`.
pub fn fim_finite_difference<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    set: &ProjectorSet,
    delta: f64,
) -> Result<RealSymMatrix> {
    set.require_complete()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidConfig("finite-difference step must be positive".into()));
    }
    let d = theta.len();
    let p0 = probabilities(&source.output_state(theta)?, set)?;
    let mut dp = vec![vec![0.0; set.len()]; d];
    for l in 0..d {
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[l] += delta;
        minus[l] -= delta;
        let pp = probabilities(&source.output_state(&plus)?, set)?;
        let pm = probabilities(&source.output_state(&minus)?, set)?;
        for k in 0..set.len() {
            dp[l][k] = (pp[k] - pm[k]) / (2.0 * delta);
        }
    }
    // Roundoff floor of a central difference of O(1) probabilities.
    let noise = 100.0 * f64::EPSILON / delta;
    let mut acc = vec![0.0; d * d];
    for (k, &p) in p0.iter().enumerate() {
        let g: Vec<f64> = (0..d).map(|l| dp[l][k]).collect();
        if g.iter().all(|x| x.abs() <= noise) {
            continue;
        }
        if p <= 10.0 * delta {
            return Err(Error::StepTooLarge {
                outcome: k,
                probability: p,
            });
        }
        add_term(&mut acc, &g, p);
    }
    Ok(RealSymMatrix::symmetrized(d, &acc))
}

/// FIM, QFIM and their spectral-norm gap at one point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FisherPair {
    pub theta: Vec<f64>,
    pub fim: RealSymMatrix,
    pub qfim: RealSymMatrix,
    /// `|| F_Q - F ||_2`
    pub gap: f64,
    /// Smallest eigenvalue of `F_Q - F`; non-negative up to roundoff.
    pub min_ordering_eigenvalue: f64,
    pub singular_outcomes: Vec<usize>,
    #[serde(default)]
    pub singular: Vec<SingularOutcome>,
    pub direction_dependent: bool,
}

pub fn fisher_pair<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    set: &ProjectorSet,
    policy: &LimitPolicy,
) -> Result<FisherPair> {
    let bundle = source.derivative_states(theta)?;
    fisher_pair_from_bundle(source, &bundle, set, policy)
}

pub fn fisher_pair_from_bundle<E: PhaseEncoding + ?Sized>(
    source: &E,
    bundle: &DerivativeBundle,
    set: &ProjectorSet,
    policy: &LimitPolicy,
) -> Result<FisherPair> {
    let estimate = fim(source, bundle, set, policy)?;
    let q = qfim(bundle);
    let diff = q.sub(&estimate.matrix);
    let eig = diff.eigenvalues();
    let gap = eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
    Ok(FisherPair {
        theta: bundle.theta.clone(),
        fim: estimate.matrix,
        qfim: q,
        gap,
        min_ordering_eigenvalue: eig.first().copied().unwrap_or(0.0),
        singular_outcomes: estimate.singular.iter().map(|s| s.index).collect(),
        singular: estimate.singular,
        direction_dependent: estimate.direction_dependent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::interferometer::InterferometerModel;
    use crate::linalg::ComplexMatrix;

    fn mat(rows: Vec<Vec<f64>>) -> RealSymMatrix {
        RealSymMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        // T(h) = 2 + 3h - 5h^2 is reproduced exactly by a quadratic fit.
        let steps = [1e-1, 5e-2, 2.5e-2];
        let samples: Vec<Vec<f64>> = steps.iter().map(|h| vec![2.0 + 3.0 * h - 5.0 * h * h]).collect();
        let (v, _) = extrapolate_to_zero(&steps, &samples);
        assert!((v[0] - 2.0).abs() < 1e-12);

        let (v, spread) = extrapolate_to_zero(&steps[..2], &samples[..2]);
        // Linear extrapolation leaves the quadratic term as 5 h0 h1.
        assert!((v[0] - (2.0 + 5.0 * 0.1 * 0.05)).abs() < 1e-12);
        assert!(spread > 0.0);
    }

    #[test]
    fn qfim_of_three_mode_model() {
        let model = InterferometerModel::mzi3();
        let b = model.derivative_states(&[0.4, -1.3]).unwrap();
        let expect = mat(vec![vec![2.0, -1.0], vec![-1.0, 2.0]]).scale(8.0 / 3.0);
        assert!(qfim(&b).max_abs_diff(&expect) < 1e-9);
    }

    #[test]
    fn qfim_of_balanced_superposition() {
        let basis = enumerate_basis(1, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let probe = StateVector::new(Arc::clone(&basis), vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        let model = InterferometerModel::with_probe_state(ComplexMatrix::identity(2), vec![0], probe).unwrap();
        let b = model.derivative_states(&[0.7]).unwrap();
        assert!((qfim(&b).get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_of_identity_evolution() {
        let model = InterferometerModel::mzi3();
        let psi = model.output_state(&[0.0, 0.0]).unwrap();
        let set = ProjectorSet::fock(model.basis());
        let p = probabilities(&psi, &set).unwrap();
        let probe = model.basis().index_of(&OccupationVector(vec![1, 1, 1])).unwrap();
        for (k, pk) in p.iter().enumerate() {
            let expect = if k == probe { 1.0 } else { 0.0 };
            assert!((pk - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_single_photon_uniform() {
        // One photon through a tritter alone: |<k|T|0>|^2 = 1/3.
        let basis = enumerate_basis(1, 3).unwrap();
        let u = crate::fock::lift_unitary(&crate::interferometer::tritter(), &basis).unwrap();
        let psi = StateVector::new(Arc::clone(&basis), u.mul_vec(StateVector::basis_state(Arc::clone(&basis), 0).amplitudes())).unwrap();
        let p = probabilities(&psi, &ProjectorSet::fock(&basis)).unwrap();
        for pk in p {
            assert!((pk - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_mismatch_reported() {
        let a = enumerate_basis(2, 3).unwrap();
        let b = enumerate_basis(3, 3).unwrap();
        let psi = StateVector::basis_state(a, 0);
        assert!(matches!(
            probabilities(&psi, &ProjectorSet::fock(&b)),
            Err(Error::BasisMismatch)
        ));
    }

    #[test]
    fn incomplete_set_rejected() {
        let model = InterferometerModel::mzi3();
        let basis = model.basis();
        let partial = ProjectorSet::new(
            basis,
            vec![StateVector::basis_state(Arc::clone(basis), 0)],
            &Tolerances::default(),
        )
        .unwrap();
        assert!(!partial.is_complete());
        let bundle = model.derivative_states(&[0.1, 0.2]).unwrap();
        assert!(matches!(
            fim(&model, &bundle, &partial, &LimitPolicy::default()),
            Err(Error::IncompleteSet { .. })
        ));
    }

    #[test]
    fn singular_point_fim_of_three_mode_model() {
        let model = InterferometerModel::mzi3();
        let set = ProjectorSet::fock(model.basis());
        let pair = fisher_pair(&model, &[0.0, 0.0], &set, &LimitPolicy::default()).unwrap();
        let expect = mat(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).scale(4.0 / 3.0);
        assert!(pair.fim.max_abs_diff(&expect) < 1e-6, "{:?}", pair.fim);
        assert_eq!(pair.singular_outcomes.len(), 9);
        assert!(pair.direction_dependent);
        assert!((pair.gap - 8.0).abs() < 1e-6);
    }

    #[test]
    fn policy_validation() {
        let mut p = LimitPolicy {
            steps: vec![1e-3],
            ..LimitPolicy::default()
        };
        assert!(p.validate().is_err());
        p.steps = vec![1e-3, 2e-3];
        assert!(p.validate().is_err());
        let q = LimitPolicy {
            direction: Some(vec![0.0, 0.0]),
            ..LimitPolicy::default()
        };
        assert!(q.base_direction(2).is_err());
    }

    #[test]
    fn degenerate_direction_falls_back_to_axis() {
        let p = LimitPolicy::default();
        let a = [C64::new(0.0, 0.3), C64::new(0.0, -0.3)];
        let (u, fallback) = p.direction_for(&a).unwrap();
        assert!(fallback);
        assert_eq!(u.iter().filter(|x| **x == 1.0).count(), 1);
        let (u, fallback) = p.direction_for(&[C64::new(1.0, 0.0), C64::new(0.5, 0.0)]).unwrap();
        assert!(!fallback);
        assert!((u[0] - u[1]).abs() < 1e-15);
    }
}
