use qfisher::fisher::{fisher_pair, LimitPolicy, ProjectorSet};
use qfisher::interferometer::{InterferometerModel, PhaseEncoding};
use qfisher::optimal::{construct_nonorthogonal_optimal, construct_orthogonal_optimal, omega_frame};
use qfisher::saturation::{check_saturation, SaturationReport, Verdict};
use qfisher::scan::{run_scan, run_scan_sequential, ScanConfig};
use qfisher::Tolerances;

#[test]
fn constructed_sets_with_unreachable_completions_saturate() {
    // Several completion vectors never overlap psi_theta for any theta.
    let model = InterferometerModel::mzi4();
    let theta = [2.287672500346282, 4.15424882985457];
    let frame = omega_frame(&model.derivative_states(&theta).unwrap());
    let tol = Tolerances::default();
    for set in [
        construct_orthogonal_optimal(&frame, &tol).unwrap().set,
        construct_nonorthogonal_optimal(&frame, 0.7, &tol).unwrap().set,
    ] {
        let rep = check_saturation(&model, &theta, &set, &tol).unwrap();
        assert_eq!(rep.verdict, Verdict::Saturates);
        assert!(rep.gap < 1e-8);
        assert!(rep.t1.iter().filter(|c| c.indeterminate_first_order).all(|c| !c.limit_failed));
    }
}

#[test]
fn report_survives_json() {
    let model = InterferometerModel::mzi3();
    let set = ProjectorSet::fock(model.basis());
    let rep = check_saturation(&model, &[0.7, 0.3], &set, &Tolerances::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::DoesNotSaturate);
    let back = SaturationReport::from_json(&rep.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), rep.to_json().unwrap());
}

#[test]
fn parallel_scan_matches_sequential() {
    let model = InterferometerModel::mzi4();
    let set = ProjectorSet::fock(model.basis());
    let cfg = ScanConfig::new(2).with_resolution(9, 7);
    let a = run_scan(&model, &set, &cfg).unwrap();
    let b = run_scan_sequential(&model, &set, &cfg).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn pair_at_origin_is_consistent_with_report() {
    let model = InterferometerModel::mzi4();
    let set = ProjectorSet::fock(model.basis());
    let pair = fisher_pair(&model, &[0.0, 0.0], &set, &LimitPolicy::default()).unwrap();
    let rep = check_saturation(&model, &[0.0, 0.0], &set, &Tolerances::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Saturates);
    assert!((pair.gap - rep.gap).abs() < 1e-12);
}
