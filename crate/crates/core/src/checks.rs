//! Reference values for the two built-in interferometers, runnable as a
//! self-check table.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{fisher_pair, qfim, LimitPolicy, ProjectorSet};
use crate::fock::OccupationVector;
use crate::interferometer::{InterferometerModel, PhaseEncoding};
use crate::linalg::{spectral_norm, RealSymMatrix};
use crate::saturation::{check_saturation, theorem1_bilinear, Verdict};
use crate::scan::{run_scan, ScanConfig};
use crate::Tolerances;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub description: &'static str,
    pub expected: String,
    pub computed: String,
    pub tolerance: String,
    pub pass: bool,
}

type CheckFn = fn() -> Result<CheckOutcome>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("qfim3", qfim3),
    ("qfim4", qfim4),
    ("fim3_origin", fim3_origin),
    ("norm3", norm3),
    ("ck3", ck3),
    ("sat3_origin", sat3_origin),
    ("sat4_origin", sat4_origin),
    ("gap3_floor", gap3_floor),
    ("locus4_diagonal", locus4_diagonal),
    ("locus4_points", locus4_points),
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|(id, _)| *id).collect()
}

/// Runs every check, or only `only`. An unknown id is a config error.
pub fn run_checks(only: Option<&str>) -> Result<Vec<CheckOutcome>> {
    match only {
        None => CHECKS.iter().map(|(_, f)| f()).collect(),
        Some(id) => {
            let (_, f) = CHECKS
                .iter()
                .find(|(name, _)| *name == id)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown check id `{id}`")))?;
            Ok(vec![f()?])
        }
    }
}

fn rows(m: &RealSymMatrix) -> String {
    let r: Vec<String> = m
        .to_rows()
        .iter()
        .map(|row| format!("[{}]", row.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", r.join(", "))
}

fn sym2(a: f64, b: f64, c: f64) -> RealSymMatrix {
    RealSymMatrix::from_rows(vec![vec![a, b], vec![b, c]]).expect("symmetric by construction")
}

const SAMPLE_THETAS: [[f64; 2]; 4] = [[0.0, 0.0], [0.7, 0.3], [2.1, 5.0], [4.4, 1.3]];

fn qfim_check(id: &'static str, description: &'static str, model: InterferometerModel, expect: RealSymMatrix) -> Result<CheckOutcome> {
    let mut worst = 0.0_f64;
    for theta in SAMPLE_THETAS {
        let q = qfim(&model.derivative_states(&theta)?);
        worst = worst.max(q.max_abs_diff(&expect));
    }
    Ok(CheckOutcome {
        id,
        description,
        expected: rows(&expect),
        computed: format!("max entry deviation {worst:.3e} over {} points", SAMPLE_THETAS.len()),
        tolerance: "1e-9".into(),
        pass: worst <= 1e-9,
    })
}

fn qfim3() -> Result<CheckOutcome> {
    qfim_check("qfim3", "3-mode QFIM is (8/3)[[2,-1],[-1,2]] for all theta", InterferometerModel::mzi3(), sym2(16.0 / 3.0, -8.0 / 3.0, 16.0 / 3.0))
}

fn qfim4() -> Result<CheckOutcome> {
    qfim_check("qfim4", "4-mode QFIM is 2[[3,-1],[-1,3]] for all theta", InterferometerModel::mzi4(), sym2(6.0, -2.0, 6.0))
}

fn fim3_origin() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi3();
    let set = ProjectorSet::fock(model.basis());
    let pair = fisher_pair(&model, &[0.0, 0.0], &set, &LimitPolicy::default())?;
    let expect = sym2(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);
    let dev = pair.fim.max_abs_diff(&expect);
    Ok(CheckOutcome {
        id: "fim3_origin",
        description: "3-mode photon-counting FIM at theta=(0,0) is (4/3)[[1,1],[1,1]]",
        expected: rows(&expect),
        computed: rows(&pair.fim),
        tolerance: "1e-6".into(),
        pass: dev <= 1e-6,
    })
}

fn norm3() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi3();
    let n = spectral_norm(&qfim(&model.derivative_states(&[0.0, 0.0])?));
    Ok(CheckOutcome {
        id: "norm3",
        description: "spectral norm of the 3-mode QFIM",
        expected: "8".into(),
        computed: format!("{n:.12}"),
        tolerance: "1e-9".into(),
        pass: (n - 8.0).abs() <= 1e-9,
    })
}

fn ck3() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi3();
    let bundle = model.derivative_states(&[0.0, 0.0])?;
    let c = |occ: [u32; 3]| -> f64 {
        let k = model
            .basis()
            .index_of(&OccupationVector(occ.to_vec()))
            .expect("occupation in basis");
        let proj = crate::fock::StateVector::basis_state(std::sync::Arc::clone(model.basis()), k);
        theorem1_bilinear(&bundle, &proj, 0, 1)
    };
    let target = 1.0 / (3.0 * 3f64.sqrt());
    let a: Vec<f64> = [[2, 1, 0], [1, 0, 2], [0, 2, 1]].into_iter().map(c).collect();
    let b: Vec<f64> = [[2, 0, 1], [1, 2, 0], [0, 1, 2]].into_iter().map(c).collect();
    let z: Vec<f64> = [[1, 1, 1], [3, 0, 0], [0, 3, 0], [0, 0, 3]].into_iter().map(c).collect();
    let magnitudes = a.iter().chain(&b).all(|x| (x.abs() - target).abs() <= 1e-9);
    let grouped = a.iter().all(|x| x.signum() == a[0].signum())
        && b.iter().all(|x| x.signum() == b[0].signum())
        && a[0].signum() != b[0].signum();
    let zeros = z.iter().all(|x| x.abs() <= 1e-9);
    Ok(CheckOutcome {
        id: "ck3",
        description: "3-mode C_k at theta=(0,0): +-1/(3 sqrt 3) in two opposite-sign triples, 0 otherwise",
        expected: format!("|C|={target:.12}; zeros for |1,1,1>,|3,0,0>,|0,3,0>,|0,0,3>"),
        computed: format!("{a:.12?} / {b:.12?} / {z:?}", z = z.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>()),
        tolerance: "1e-9".into(),
        pass: magnitudes && grouped && zeros,
    })
}

fn verdict_check(id: &'static str, description: &'static str, model: InterferometerModel, theta: [f64; 2], want: Verdict) -> Result<CheckOutcome> {
    let set = ProjectorSet::fock(model.basis());
    let r = check_saturation(&model, &theta, &set, &Tolerances::default())?;
    Ok(CheckOutcome {
        id,
        description,
        expected: format!("{want:?}"),
        computed: format!("{:?} (gap {:.3e})", r.verdict, r.gap),
        tolerance: "tol_sat 1e-8, gap 1e-6".into(),
        pass: r.verdict == want,
    })
}

fn sat3_origin() -> Result<CheckOutcome> {
    verdict_check("sat3_origin", "3-mode photon counting at theta=(0,0) does not saturate", InterferometerModel::mzi3(), [0.0, 0.0], Verdict::DoesNotSaturate)
}

fn sat4_origin() -> Result<CheckOutcome> {
    verdict_check("sat4_origin", "4-mode photon counting at theta=(0,0) saturates", InterferometerModel::mzi4(), [0.0, 0.0], Verdict::Saturates)
}

fn gap3_floor() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi3();
    let set = ProjectorSet::fock(model.basis());
    let grid = run_scan(&model, &set, &ScanConfig::new(2).with_resolution(41, 41))?;
    let s = grid.summary();
    Ok(CheckOutcome {
        id: "gap3_floor",
        description: "3-mode gap over a 41x41 grid on [0,2pi)^2 stays above 3/4",
        expected: "min gap > 0.751".into(),
        computed: format!("min gap {:.6} at {:.4?}", s.min_gap, s.min_gap_theta),
        tolerance: "margin 1e-3".into(),
        pass: s.min_gap > 0.75 + 1e-3,
    })
}

fn max_gap_at<E: PhaseEncoding>(model: &E, set: &ProjectorSet, points: &[[f64; 2]]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for p in points {
        worst = worst.max(fisher_pair(model, p, set, &LimitPolicy::default())?.gap);
    }
    Ok(worst)
}

fn locus4_diagonal() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi4();
    let set = ProjectorSet::fock(model.basis());
    let points: Vec<[f64; 2]> = (0..11).map(|k| [TAU * k as f64 / 11.0; 2]).collect();
    let worst = max_gap_at(&model, &set, &points)?;
    Ok(CheckOutcome {
        id: "locus4_diagonal",
        description: "4-mode gap vanishes on theta1 = theta2 (11 samples)",
        expected: "gap < 1e-6".into(),
        computed: format!("max gap {worst:.3e}"),
        tolerance: "1e-6".into(),
        pass: worst < 1e-6,
    })
}

fn locus4_points() -> Result<CheckOutcome> {
    let model = InterferometerModel::mzi4();
    let set = ProjectorSet::fock(model.basis());
    let worst = max_gap_at(&model, &set, &[[0.0, PI], [PI, 0.0]])?;
    Ok(CheckOutcome {
        id: "locus4_points",
        description: "4-mode gap vanishes at (0,pi) and (pi,0)",
        expected: "gap < 1e-6".into(),
        computed: format!("max gap {worst:.3e}"),
        tolerance: "1e-6".into(),
        pass: worst < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_rejected() {
        assert!(matches!(run_checks(Some("nope")), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn single_check_selected() {
        let r = run_checks(Some("qfim3")).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].pass, "{:?}", r[0]);
    }

    #[test]
    fn ids_unique() {
        let mut ids = check_ids();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CHECKS.len());
    }
}
