//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary so the lines always show.

mod common;

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;

use rand::Rng;

use common::*;
use qfisher::fisher::{fim, fim_finite_difference, fisher_pair, probabilities, FisherPair, LimitPolicy, ProjectorSet};
use qfisher::fock::{OccupationVector, StateVector};
use qfisher::interferometer::{InterferometerModel, PhaseEncoding};
use qfisher::linalg::{permanent, spectral_norm, RealSymMatrix};
use qfisher::optimal::{construct_nonorthogonal_optimal, construct_orthogonal_optimal, omega_frame};
use qfisher::saturation::{check_saturation, theorem1_residuals, Verdict};
use qfisher::scan::{run_scan, ScanConfig};
use qfisher::Tolerances;

const QFIM_TOL: f64 = 1e-9;
const FIM_ORIGIN_TOL: f64 = 1e-6;
const NORM_TOL: f64 = 1e-9;
const CK_TOL: f64 = 1e-9;
const FLOOR: f64 = 0.75;
const FLOOR_MARGIN: f64 = 1e-3;
const LOCUS_GAP: f64 = 1e-6;
const OFF_LOCUS_GAP: f64 = 1e-3;
const GUARD_BAND: f64 = 0.15;
const BICOND_GAP: f64 = 1e-6;
const BICOND_MIN: usize = 200;
const CONSTRUCTION_GAP: f64 = 1e-8;
const SINGLE_PARAM_TOL: f64 = 1e-8;
const FD_TOL: f64 = 1e-5;
const FD_RATIO: [f64; 2] = [3.5, 4.5];
const FD_STEPS: [f64; 2] = [1e-3, 5e-4];
const FD_MIN_PROB: f64 = 0.02;
const ORDERING_TOL: f64 = -1e-8;
const PERM_TOL: f64 = 1e-11;
const PERM_CASES: usize = 500;

/// Tracks the smallest eigenvalue of `F_Q - F` over every evaluation.
struct Ordering {
    min: f64,
    count: usize,
}

impl Ordering {
    fn note(&mut self, pair: &FisherPair) {
        self.min = self.min.min(pair.min_ordering_eigenvalue);
        self.count += 1;
    }

    fn note_matrices(&mut self, f: &RealSymMatrix, fq: &RealSymMatrix) {
        let ev = fq.sub(f).eigenvalues();
        self.min = ev.iter().copied().fold(self.min, f64::min);
        self.count += 1;
    }

    fn fock_pair<E: PhaseEncoding>(&mut self, model: &E, theta: &[f64]) -> FisherPair {
        let set = ProjectorSet::fock(model.basis());
        let pair = fisher_pair(model, theta, &set, &LimitPolicy::default()).expect("fisher pair");
        self.note(&pair);
        pair
    }
}

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn sym2(a: f64, b: f64, c: f64) -> RealSymMatrix {
    RealSymMatrix::from_rows(vec![vec![a, b], vec![b, c]]).unwrap()
}

fn random_theta<R: Rng>(r: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| r.gen_range(0.0..TAU)).collect()
}

fn qfim_constant(id: &'static str, model: InterferometerModel, expect: RealSymMatrix, seed: u64, ord: &mut Ordering) -> Line {
    let mut r = rng(seed);
    let mut points = vec![vec![0.0, 0.0]];
    points.extend((0..20).map(|_| random_theta(&mut r, 2)));
    let mut worst = 0.0_f64;
    for t in &points {
        let pair = ord.fock_pair(&model, t);
        worst = worst.max(pair.qfim.max_abs_diff(&expect));
    }
    Line {
        id,
        pass: worst <= QFIM_TOL,
        detail: format!("max deviation {worst:.2e} over {} points (tol {QFIM_TOL:.0e})", points.len()),
    }
}

fn c1(ord: &mut Ordering) -> Line {
    qfim_constant("C1 3-mode QFIM", InterferometerModel::mzi3(), sym2(16.0 / 3.0, -8.0 / 3.0, 16.0 / 3.0), 101, ord)
}

fn c2(ord: &mut Ordering) -> Line {
    qfim_constant("C2 4-mode QFIM", InterferometerModel::mzi4(), sym2(6.0, -2.0, 6.0), 102, ord)
}

fn c3(ord: &mut Ordering) -> Line {
    let pair = ord.fock_pair(&InterferometerModel::mzi3(), &[0.0, 0.0]);
    let dev = pair.fim.max_abs_diff(&sym2(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0));
    Line {
        id: "C3 FIM at singular point",
        pass: dev <= FIM_ORIGIN_TOL,
        detail: format!(
            "F = {:?}, deviation {dev:.2e}, {} singular outcomes (tol {FIM_ORIGIN_TOL:.0e})",
            pair.fim.to_rows(),
            pair.singular_outcomes.len()
        ),
    }
}

fn c4(ord: &mut Ordering) -> Line {
    let model = InterferometerModel::mzi3();
    let pair = ord.fock_pair(&model, &[0.0, 0.0]);
    let n = spectral_norm(&pair.qfim);
    Line {
        id: "C4 spectral norm",
        pass: (n - 8.0).abs() <= NORM_TOL,
        detail: format!("||F_Q||_2 = {n:.12} (tol {NORM_TOL:.0e})"),
    }
}

fn c5(ord: &mut Ordering) -> Line {
    let model = InterferometerModel::mzi3();
    let theta = [0.0, 0.0];
    ord.fock_pair(&model, &theta);
    let bundle = model.derivative_states(&theta).unwrap();
    let set = ProjectorSet::fock(model.basis());
    let all: Vec<usize> = (0..set.len()).collect();
    let res = theorem1_residuals(&model, &bundle, &set, &all, &Tolerances::default(), &LimitPolicy::default()).unwrap();
    let at = |occ: [u32; 3]| {
        let k = model.basis().index_of(&OccupationVector(occ.to_vec())).unwrap();
        res.iter().find(|c| c.projector == Some(k)).unwrap().clone()
    };
    let target = 1.0 / (3.0 * 3f64.sqrt());
    let first: Vec<_> = [[2, 1, 0], [1, 0, 2], [0, 2, 1]].into_iter().map(at).collect();
    let second: Vec<_> = [[2, 0, 1], [1, 2, 0], [0, 1, 2]].into_iter().map(at).collect();
    let zeros: Vec<_> = [[1, 1, 1], [3, 0, 0], [0, 3, 0], [0, 0, 3]].into_iter().map(at).collect();
    let mut worst = 0.0_f64;
    for c in first.iter().chain(&second) {
        worst = worst.max((c.residual - target).abs()).max((c.value.abs() - target).abs());
    }
    for c in &zeros {
        worst = worst.max(c.residual).max(c.value.abs());
    }
    let s1 = first[0].value.signum();
    let grouped = first.iter().all(|c| c.value.signum() == s1) && second.iter().all(|c| c.value.signum() == -s1);
    Line {
        id: "C5 C_k table",
        pass: worst <= CK_TOL && grouped,
        detail: format!(
            "|C| = {target:.9} on two opposite-sign triples, 0 on the rest; max deviation {worst:.2e}, grouped {grouped} (tol {CK_TOL:.0e})"
        ),
    }
}

fn c6(ord: &mut Ordering) -> Line {
    let model = InterferometerModel::mzi3();
    let set = ProjectorSet::fock(model.basis());
    let grid = run_scan(&model, &set, &ScanConfig::new(2).with_resolution(41, 41)).unwrap();
    for cell in &grid.cells {
        ord.min = ord.min.min(cell.min_ordering_eigenvalue);
        ord.count += 1;
    }
    let s = grid.summary();
    Line {
        id: "C6 3-mode gap floor",
        pass: s.min_gap > FLOOR + FLOOR_MARGIN,
        detail: format!(
            "41x41 min gap {:.6} at ({:.4}, {:.4}) > {} + {FLOOR_MARGIN:.0e}",
            s.min_gap, s.min_gap_theta[0], s.min_gap_theta[1], FLOOR
        ),
    }
}

fn c7(ord: &mut Ordering) -> (Line, Line) {
    let model = InterferometerModel::mzi4();
    let mut on = 0.0_f64;
    for k in 0..11 {
        let t = TAU * k as f64 / 11.0;
        on = on.max(ord.fock_pair(&model, &[t, t]).gap);
    }
    for p in [[0.0, PI], [PI, 0.0]] {
        on = on.max(ord.fock_pair(&model, &p).gap);
    }
    let mut r = rng(107);
    let mut off = f64::INFINITY;
    let mut taken = 0;
    while taken < 20 {
        let t = [r.gen_range(0.0..TAU), r.gen_range(0.0..TAU)];
        if distance_to_mzi4_locus(t) < GUARD_BAND {
            continue;
        }
        off = off.min(ord.fock_pair(&model, &t).gap);
        taken += 1;
    }
    let mut shifted = 0.0_f64;
    for k in 0..11 {
        let t = TAU * k as f64 / 11.0;
        shifted = shifted.max(ord.fock_pair(&model, &[t, t + PI]).gap);
    }
    (
        Line {
            id: "C7 4-mode saturation locus",
            pass: on < LOCUS_GAP && off > OFF_LOCUS_GAP,
            detail: format!(
                "max gap on theta1=theta2 and (0,pi),(pi,0): {on:.2e} (< {LOCUS_GAP:.0e}); min gap at 20 off-locus points: {off:.4} (> {OFF_LOCUS_GAP:.0e})"
            ),
        },
        Line {
            id: "INFO 4-mode shifted line",
            pass: shifted < LOCUS_GAP,
            detail: format!("max gap on theta2 = theta1 + pi (11 samples): {shifted:.2e}; off-locus points keep {GUARD_BAND} rad from it"),
        },
    )
}

enum SetKind {
    Fock,
    Random,
    Orthogonal,
    NonOrthogonal(f64),
    ProbeLed,
}

fn make_set<R: Rng>(r: &mut R, model: &InterferometerModel, theta: &[f64], kind: &SetKind) -> ProjectorSet {
    let tol = Tolerances::default();
    match kind {
        SetKind::Fock => ProjectorSet::fock(model.basis()),
        SetKind::Random => random_basis_set(r, model.basis(), None),
        SetKind::Orthogonal => {
            let frame = omega_frame(&model.derivative_states(theta).unwrap());
            construct_orthogonal_optimal(&frame, &tol).unwrap().set
        }
        SetKind::NonOrthogonal(mix) => {
            let frame = omega_frame(&model.derivative_states(theta).unwrap());
            construct_nonorthogonal_optimal(&frame, *mix, &tol).unwrap().set
        }
        SetKind::ProbeLed => {
            let psi = model.output_state(theta).unwrap();
            random_basis_set(r, model.basis(), Some(&psi))
        }
    }
}

fn c8(ord: &mut Ordering) -> Line {
    let mut r = rng(108);
    let tol = Tolerances::default();
    let mut triples: Vec<(InterferometerModel, Vec<f64>, SetKind)> = Vec::new();
    for i in 0..150 {
        let d = [1, 2, 2, 3][i % 4];
        let model = random_model(&mut r, d);
        let theta = random_theta(&mut r, d);
        let kind = match i % 5 {
            0 => SetKind::Fock,
            1 => SetKind::Random,
            2 => SetKind::Orthogonal,
            3 => SetKind::NonOrthogonal(r.gen_range(0.1..=1.0)),
            _ => SetKind::ProbeLed,
        };
        triples.push((model, theta, kind));
    }
    for i in 0..30 {
        let model = if i % 2 == 0 { InterferometerModel::mzi3() } else { InterferometerModel::mzi4() };
        let theta = loop {
            let t = random_theta(&mut r, 2);
            if i % 2 == 0 || distance_to_mzi4_locus([t[0], t[1]]) >= GUARD_BAND {
                break t;
            }
        };
        triples.push((model, theta, if i % 3 == 0 { SetKind::Random } else { SetKind::Fock }));
    }
    for k in 0..22 {
        let t = TAU * k as f64 / 22.0;
        let theta = if k % 2 == 0 { vec![t, t] } else { vec![t, t + PI] };
        triples.push((InterferometerModel::mzi4(), theta, SetKind::Fock));
    }
    let mut counter = Vec::new();
    let mut saturating = 0;
    for (n, (model, theta, kind)) in triples.iter().enumerate() {
        let set = make_set(&mut r, model, theta, kind);
        match check_saturation(model, theta, &set, &tol) {
            Ok(rep) => {
                let pair = fisher_pair(model, theta, &set, &LimitPolicy::default()).unwrap();
                ord.note(&pair);
                let sat = rep.verdict == Verdict::Saturates;
                saturating += sat as usize;
                if sat != (rep.gap < BICOND_GAP) {
                    counter.push(format!("#{n}: {:?} with gap {:.2e}", rep.verdict, rep.gap));
                }
            }
            Err(e) => counter.push(format!("#{n}: {e}")),
        }
    }
    Line {
        id: "C8 biconditional suite",
        pass: triples.len() >= BICOND_MIN && counter.is_empty(),
        detail: format!(
            "{} triples ({saturating} saturating), {} counterexamples{}",
            triples.len(),
            counter.len(),
            if counter.is_empty() { String::new() } else { format!(": {}", counter.join("; ")) }
        ),
    }
}

fn c9(ord: &mut Ordering) -> Line {
    let mut r = rng(109);
    let tol = Tolerances::default();
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    let mut built = 0;
    for (name, model) in [("mzi3", InterferometerModel::mzi3()), ("mzi4", InterferometerModel::mzi4())] {
        for _ in 0..10 {
            let theta = random_theta(&mut r, 2);
            let mix = r.gen_range(0.1..=1.0);
            for kind in [SetKind::Orthogonal, SetKind::NonOrthogonal(mix)] {
                let set = make_set(&mut r, &model, &theta, &kind);
                built += 1;
                let pair = fisher_pair(&model, &theta, &set, &LimitPolicy::default()).unwrap();
                ord.note(&pair);
                let verdict = check_saturation(&model, &theta, &set, &tol).map(|rep| rep.verdict);
                worst = worst.max(pair.gap);
                if !set.is_complete() || pair.gap >= CONSTRUCTION_GAP || !matches!(verdict, Ok(Verdict::Saturates)) {
                    failures.push(format!("{name} {theta:.3?}: gap {:.2e}, {verdict:?}", pair.gap));
                }
            }
        }
    }
    Line {
        id: "C9 optimal constructions",
        pass: failures.is_empty(),
        detail: format!(
            "{built} complete sets, max gap {worst:.2e} (< {CONSTRUCTION_GAP:.0e}){}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
        ),
    }
}

fn c10(ord: &mut Ordering) -> Line {
    let mut r = rng(110);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let model = random_model(&mut r, 1);
        let theta = random_theta(&mut r, 1);
        let set = make_set(&mut r, &model, &theta, &SetKind::ProbeLed);
        let pair = fisher_pair(&model, &theta, &set, &LimitPolicy::default()).unwrap();
        ord.note(&pair);
        worst = worst.max(pair.fim.max_abs_diff(&pair.qfim));
    }
    Line {
        id: "C10 single-parameter saturation",
        pass: worst <= SINGLE_PARAM_TOL,
        detail: format!("10 models, max |F - F_Q| {worst:.2e} (tol {SINGLE_PARAM_TOL:.0e})"),
    }
}

fn c11(ord: &mut Ordering) -> Line {
    let mut r = rng(111);
    let mut worst_err = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let mut ratios = Vec::new();
    let mut tried = 0;
    while ratios.len() < 20 {
        tried += 1;
        let model = match tried % 3 {
            0 => InterferometerModel::mzi3(),
            _ => random_model(&mut r, 2),
        };
        let theta = random_theta(&mut r, 2);
        let set = if r.gen_bool(0.5) { ProjectorSet::fock(model.basis()) } else { random_basis_set(&mut r, model.basis(), None) };
        let psi: StateVector = model.output_state(&theta).unwrap();
        let probs = probabilities(&psi, &set).unwrap();
        if probs.iter().cloned().fold(f64::INFINITY, f64::min) < FD_MIN_PROB {
            continue;
        }
        let bundle = model.derivative_states(&theta).unwrap();
        let f = fim(&model, &bundle, &set, &LimitPolicy::default()).unwrap().matrix;
        ord.note_matrices(&f, &qfisher::fisher::qfim(&bundle));
        let err = |h: f64| fim_finite_difference(&model, &theta, &set, h).unwrap().max_abs_diff(&f);
        let (e1, e2) = (err(FD_STEPS[0]), err(FD_STEPS[1]));
        worst_err = worst_err.max(e2);
        worst_oracle = worst_oracle.max(max_abs_diff(&fd_fim(&model, &theta, &set, FD_STEPS[1]), &f.to_rows()));
        ratios.push(e1 / e2);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    Line {
        id: "C11 finite-difference oracle",
        pass: worst_err <= FD_TOL && worst_oracle <= FD_TOL && lo >= FD_RATIO[0] && hi <= FD_RATIO[1],
        detail: format!(
            "20 regular points: max error {worst_err:.2e} (independent FD {worst_oracle:.2e}, tol {FD_TOL:.0e}); halving ratio in [{lo:.3}, {hi:.3}]"
        ),
    }
}

fn c12(ord: &Ordering) -> Line {
    Line {
        id: "C12 matrix ordering",
        pass: ord.min >= ORDERING_TOL,
        detail: format!("min eigenvalue of F_Q - F over {} evaluations: {:.2e} (>= {ORDERING_TOL:.0e})", ord.count, ord.min),
    }
}

fn c13() -> Line {
    let mut r = rng(113);
    let mut worst = 0.0_f64;
    for i in 0..PERM_CASES {
        let n = 1 + i % 6;
        let m = random_matrix(&mut r, n, n);
        let slow = naive_permanent(&m);
        let fast = permanent(&m).unwrap();
        worst = worst.max((fast - slow).norm() / slow.norm());
    }
    Line {
        id: "C13 permanent oracle",
        pass: worst <= PERM_TOL,
        detail: format!("{PERM_CASES} matrices up to 6x6, max relative error {worst:.2e} (tol {PERM_TOL:.0e})"),
    }
}

fn main() -> ExitCode {
    let mut ord = Ordering {
        min: f64::INFINITY,
        count: 0,
    };
    let mut lines = vec![c1(&mut ord), c2(&mut ord), c3(&mut ord), c4(&mut ord), c5(&mut ord), c6(&mut ord)];
    let (locus, shifted) = c7(&mut ord);
    lines.push(locus);
    lines.extend([c8(&mut ord), c9(&mut ord), c10(&mut ord), c11(&mut ord)]);
    lines.push(c12(&ord));
    lines.push(c13());
    lines.push(shifted);

    let mut failed = 0;
    for l in &lines {
        println!("{} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.detail);
        failed += (!l.pass && !l.id.starts_with("INFO")) as usize;
    }
    println!("acceptance: {} of {} criteria passed", 13 - failed, 13);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
