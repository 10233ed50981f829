//! Necessary and sufficient conditions for `F = F_Q` under a rank-one
//! projective measurement.
//!
//! Projectors are split by their overlap with the encoded state:
//!
//! * orthogonal (`|<Y_k|psi>| < eps_orth`): need
//!   `Im[<d_l psi|Y_k><Y_k|d_m psi>] = 0` for all `l, m`;
//! * non-orthogonal: need
//!   `Im[<d_l psi|Y_k><Y_k|psi>] = |<Y_k|psi>|^2 Im[<d_l psi|psi>]` for all `l`;
//!
//! and in every case `Im<d_l psi|d_m psi> = 0` must hold.
//!
//! When an orthogonal projector has all first-order overlaps
//! `<Y_k|d_j psi>` equal to zero, the condition is decided by the
//! limit of `Im[<d_l psi_phi|Y_k><Y_k|psi_phi>] / |<Y_k|psi_phi>|` as
//! `phi -> theta`, evaluated numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{extrapolate_to_zero, fisher_pair_from_bundle, LimitPolicy, ProjectorSet};
use crate::fock::StateVector;
use crate::interferometer::{DerivativeBundle, PhaseEncoding};
use crate::linalg::C64;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorTag {
    /// The projector onto the encoded state itself.
    Probe,
    Orthogonal,
    NonOrthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorClass {
    pub index: usize,
    pub label: String,
    pub tag: ProjectorTag,
    /// `|<Y_k|psi>|`
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    T1,
    T2,
    WC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    /// Projector index; `None` for the weak-commutativity entry.
    pub projector: Option<usize>,
    pub condition: ConditionId,
    /// Absolute residual, maximized over the parameter indices.
    pub residual: f64,
    /// Signed value at `pair`.
    pub value: f64,
    /// Parameter indices attaining the max. `(l, l)` for T2.
    pub pair: (usize, usize),
    #[serde(default)]
    pub indeterminate_first_order: bool,
    /// Set when the higher-order limit could not be extrapolated.
    #[serde(default)]
    pub limit_failed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Saturates,
    DoesNotSaturate,
    IndeterminateFirstOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub theta: Vec<f64>,
    pub classification: Vec<ProjectorClass>,
    pub weak_comm_residual: f64,
    pub t1: Vec<ConditionResidual>,
    pub t2: Vec<ConditionResidual>,
    pub verdict: Verdict,
    /// `||F_Q - F||_2` computed directly.
    pub gap: f64,
}

impl SaturationReport {
    /// Derives the verdict from the residuals and checks it against the
    /// directly computed gap.
    pub fn new(
        theta: Vec<f64>,
        classification: Vec<ProjectorClass>,
        weak_comm_residual: f64,
        t1: Vec<ConditionResidual>,
        t2: Vec<ConditionResidual>,
        gap: f64,
        tol: &Tolerances,
    ) -> Result<Self> {
        let failed = weak_comm_residual >= tol.tol_sat
            || t1.iter().chain(&t2).any(|r| !r.limit_failed && r.residual >= tol.tol_sat);
        let unresolved = t1.iter().any(|r| r.limit_failed);
        let verdict = if failed {
            Verdict::DoesNotSaturate
        } else if unresolved {
            Verdict::IndeterminateFirstOrder
        } else {
            Verdict::Saturates
        };
        match verdict {
            Verdict::Saturates if !(gap < tol.gap_sat) => {
                return Err(Error::InternalInconsistency(format!(
                    "conditions hold at theta={theta:?} but gap = {gap:e}"
                )));
            }
            Verdict::DoesNotSaturate if !(gap >= tol.gap_sat) => {
                return Err(Error::InternalInconsistency(format!(
                    "conditions fail at theta={theta:?} but gap = {gap:e}"
                )));
            }
            _ => {}
        }
        Ok(Self {
            theta,
            classification,
            weak_comm_residual,
            t1,
            t2,
            verdict,
            gap,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Tags every projector as probe, orthogonal or non-orthogonal.
pub fn classify_projectors(psi: &StateVector, set: &ProjectorSet, eps_orth: f64) -> Result<Vec<ProjectorClass>> {
    if psi.basis().as_ref() != set.basis().as_ref() {
        return Err(Error::BasisMismatch);
    }
    Ok(set
        .projectors()
        .iter()
        .zip(set.labels())
        .enumerate()
        .map(|(index, (p, label))| {
            let overlap = p.inner(psi).norm();
            let tag = if overlap > 1.0 - eps_orth {
                ProjectorTag::Probe
            } else if overlap < eps_orth {
                ProjectorTag::Orthogonal
            } else {
                ProjectorTag::NonOrthogonal
            };
            ProjectorClass {
                index,
                label: label.clone(),
                tag,
                overlap,
            }
        })
        .collect())
}

/// `max_{l<m} |Im<d_l psi|d_m psi>|`, zero for a single parameter.
pub fn weak_commutativity_residual(bundle: &DerivativeBundle) -> f64 {
    let d = bundle.num_params();
    let mut worst = 0.0_f64;
    for l in 0..d {
        for m in l + 1..d {
            worst = worst.max(bundle.dpsi[l].inner(&bundle.dpsi[m]).im.abs());
        }
    }
    worst
}

/// `Im[<d_l psi|Y><Y|d_m psi>]`
pub fn theorem1_bilinear(bundle: &DerivativeBundle, proj: &StateVector, l: usize, m: usize) -> f64 {
    let al = proj.inner(&bundle.dpsi[l]);
    let am = proj.inner(&bundle.dpsi[m]);
    (al.conj() * am).im
}

fn first_order_overlaps(bundle: &DerivativeBundle, proj: &StateVector) -> Vec<C64> {
    bundle.dpsi.iter().map(|dp| proj.inner(dp)).collect()
}

/// Path overlaps below this at every step are roundoff: states are
/// normalized, so a genuine k-th order overlap at the largest default step
/// is about `1e-3^k` times its coefficient.
const UNREACHABLE_OVERLAP: f64 = 1e-14;

/// Limit of `Im[<d_l psi_phi|Y><Y|psi_phi>] / |<Y|psi_phi>|` along `u`,
/// one value per `l`.
fn ratio_limit<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    proj: &StateVector,
    outcome: usize,
    u: &[f64],
    policy: &LimitPolicy,
) -> Result<Vec<f64>> {
    let mut samples = Vec::with_capacity(policy.steps.len());
    let mut reachable = false;
    for &step in &policy.steps {
        let phi: Vec<f64> = theta.iter().zip(u).map(|(t, w)| t + step * w).collect();
        let b = source.derivative_states(&phi)?;
        let overlap = proj.inner(&b.psi);
        let modulus = overlap.norm();
        reachable |= modulus >= UNREACHABLE_OVERLAP;
        samples.push(
            b.dpsi
                .iter()
                .map(|dp| {
                    if modulus < 1e-300 {
                        0.0
                    } else {
                        (proj.inner(dp).conj() * overlap).im / modulus
                    }
                })
                .collect::<Vec<f64>>(),
        );
    }
    if !reachable {
        // Roundoff only: the outcome never occurs along this path.
        return Ok(vec![0.0; samples[0].len()]);
    }
    let (value, spread) = extrapolate_to_zero(&policy.steps, &samples);
    if !(spread <= policy.tolerance) {
        return Err(Error::LimitNonConvergent { outcome, spread });
    }
    Ok(value)
}

/// Residuals for projectors orthogonal to the encoded state. `indices`
/// select projectors from `set`; `source` is only evaluated for projectors
/// whose first-order overlaps all vanish.
pub fn theorem1_residuals<E: PhaseEncoding + ?Sized>(
    source: &E,
    bundle: &DerivativeBundle,
    set: &ProjectorSet,
    indices: &[usize],
    tol: &Tolerances,
    policy: &LimitPolicy,
) -> Result<Vec<ConditionResidual>> {
    if bundle.basis().as_ref() != set.basis().as_ref() {
        return Err(Error::BasisMismatch);
    }
    let d = bundle.num_params();
    let mut out = Vec::with_capacity(indices.len());
    for &k in indices {
        let proj = &set.projectors()[k];
        let a = first_order_overlaps(bundle, proj);
        if a.iter().any(|x| x.norm() >= tol.first_order_zero) {
            let mut best = ConditionResidual {
                projector: Some(k),
                condition: ConditionId::T1,
                residual: 0.0,
                value: 0.0,
                pair: (0, if d > 1 { 1 } else { 0 }),
                indeterminate_first_order: false,
                limit_failed: false,
            };
            let mut first = true;
            for l in 0..d {
                for m in l + 1..d {
                    let v = (a[l].conj() * a[m]).im;
                    if first || v.abs() > best.residual {
                        best.residual = v.abs();
                        best.value = v;
                        best.pair = (l, m);
                        first = false;
                    }
                }
            }
            out.push(best);
            continue;
        }

        // Higher order: the condition must hold along every path, so take
        // the worst of the policy direction and the coordinate axes.
        let mut directions = vec![policy.base_direction(d)?];
        if policy.audit_directions {
            for axis in 0..d {
                let mut e = vec![0.0; d];
                e[axis] = 1.0;
                directions.push(e);
            }
        }
        let mut entry = ConditionResidual {
            projector: Some(k),
            condition: ConditionId::T1,
            residual: 0.0,
            value: 0.0,
            pair: (0, 0),
            indeterminate_first_order: true,
            limit_failed: false,
        };
        for u in &directions {
            match ratio_limit(source, &bundle.theta, proj, k, u, policy) {
                Ok(values) => {
                    for (l, v) in values.into_iter().enumerate() {
                        if v.abs() > entry.residual {
                            entry.residual = v.abs();
                            entry.value = v;
                            entry.pair = (l, l);
                        }
                    }
                }
                Err(Error::LimitNonConvergent { .. }) => entry.limit_failed = true,
                Err(e) => return Err(e),
            }
        }
        out.push(entry);
    }
    Ok(out)
}

/// Residuals for projectors with non-zero overlap with the encoded state.
pub fn theorem2_residuals(
    bundle: &DerivativeBundle,
    set: &ProjectorSet,
    indices: &[usize],
) -> Result<Vec<ConditionResidual>> {
    if bundle.basis().as_ref() != set.basis().as_ref() {
        return Err(Error::BasisMismatch);
    }
    let berry: Vec<f64> = bundle.dpsi.iter().map(|dp| dp.inner(&bundle.psi).im).collect();
    Ok(indices
        .iter()
        .map(|&k| {
            let proj = &set.projectors()[k];
            let b = proj.inner(&bundle.psi);
            let p = b.norm_sqr();
            let mut entry = ConditionResidual {
                projector: Some(k),
                condition: ConditionId::T2,
                residual: 0.0,
                value: 0.0,
                pair: (0, 0),
                indeterminate_first_order: false,
                limit_failed: false,
            };
            for (l, dp) in bundle.dpsi.iter().enumerate() {
                let lhs = (proj.inner(dp).conj() * b).im;
                let v = lhs - p * berry[l];
                if v.abs() > entry.residual {
                    entry.residual = v.abs();
                    entry.value = v;
                    entry.pair = (l, l);
                }
            }
            entry
        })
        .collect())
}

pub fn check_saturation<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    set: &ProjectorSet,
    tol: &Tolerances,
) -> Result<SaturationReport> {
    check_saturation_with_policy(source, theta, set, tol, &LimitPolicy::default())
}

/// Full residual table plus verdict; the verdict is cross-checked against
/// `||F_Q - F||_2` and a disagreement is returned as
/// [`Error::InternalInconsistency`].
pub fn check_saturation_with_policy<E: PhaseEncoding + ?Sized>(
    source: &E,
    theta: &[f64],
    set: &ProjectorSet,
    tol: &Tolerances,
    policy: &LimitPolicy,
) -> Result<SaturationReport> {
    if !set.is_complete() {
        return Err(Error::IncompleteSet {
            defect: set.completeness_defect(),
        });
    }
    let bundle = source.derivative_states(theta)?;
    let classification = classify_projectors(&bundle.psi, set, tol.eps_orth)?;
    let h: Vec<usize> = classification
        .iter()
        .filter(|c| c.tag == ProjectorTag::Orthogonal)
        .map(|c| c.index)
        .collect();
    let q: Vec<usize> = classification
        .iter()
        .filter(|c| c.tag != ProjectorTag::Orthogonal)
        .map(|c| c.index)
        .collect();
    let wc = weak_commutativity_residual(&bundle);
    let t1 = theorem1_residuals(source, &bundle, set, &h, tol, policy)?;
    let t2 = theorem2_residuals(&bundle, set, &q)?;
    let pair = fisher_pair_from_bundle(source, &bundle, set, policy)?;
    SaturationReport::new(bundle.theta.clone(), classification, wc, t1, t2, pair.gap, tol)
}
