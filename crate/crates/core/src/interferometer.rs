//! Multimode Mach-Zehnder models `U(theta) = V . P(theta) . W`, with the
//! recombiner `V` defaulting to `W^-1`.
//!
//! The probe is prepared once through the lifted splitter; every
//! evaluation at a new `theta` only applies the diagonal phase layer and
//! one dense matrix-vector product per output vector.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    enumerate_basis, lift_unitary_with_tol, number_operator, phase_layer, FockBasis,
    OccupationVector, StateVector,
};
use crate::linalg::{ComplexMatrix, C64};
use crate::Tolerances;

/// `|psi_s>` together with its partial derivatives at `theta`.
#[derive(Debug, Clone)]
pub struct DerivativeBundle {
    pub theta: Vec<f64>,
    pub psi: StateVector,
    pub dpsi: Vec<StateVector>,
}

impl DerivativeBundle {
    pub fn num_params(&self) -> usize {
        self.dpsi.len()
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.psi.basis()
    }

    /// Largest violation of `Re<d_l psi|psi> = 0` and of `|psi|^2 = 1`.
    pub fn invariant_defect(&self) -> f64 {
        let norm = (self.psi.norm_sqr() - 1.0).abs();
        self.dpsi
            .iter()
            .map(|d| d.inner(&self.psi).re.abs())
            .fold(norm, f64::max)
    }
}

/// Anything that maps a phase vector to a pure output state with
/// derivatives. Implemented by [`InterferometerModel`]; tests use it to
/// build synthetic encodings.
pub trait PhaseEncoding: Sync {
    fn basis(&self) -> &Arc<FockBasis>;

    fn num_params(&self) -> usize;

    fn output_state(&self, theta: &[f64]) -> Result<StateVector> {
        Ok(self.derivative_states(theta)?.psi)
    }

    fn derivative_states(&self, theta: &[f64]) -> Result<DerivativeBundle>;
}

/// Input state of an interferometer.
#[derive(Debug, Clone)]
pub enum Probe {
    Fock(OccupationVector),
    Superposition(StateVector),
}

#[derive(Debug, Clone)]
pub struct InterferometerModel {
    modes: usize,
    splitter: ComplexMatrix,
    recombiner: ComplexMatrix,
    recombiner_is_inverse: bool,
    phase_modes: Vec<usize>,
    probe: Probe,
    basis: Arc<FockBasis>,
    lifted_splitter: ComplexMatrix,
    lifted_recombiner: ComplexMatrix,
    number_ops: Vec<Vec<f64>>,
    prepared: Vec<C64>,
}

/// Balanced three-port splitter: `3^{-1/2} exp(i 2pi/3 (1 - delta_jk))`.
pub fn tritter() -> ComplexMatrix {
    let s = 1.0 / 3f64.sqrt();
    let off = C64::from_polar(s, 2.0 * PI / 3.0);
    ComplexMatrix::from_fn(3, 3, |j, k| if j == k { C64::new(s, 0.0) } else { off })
}

/// Balanced four-port splitter: `(-1)^{1 - delta_jk} / 2`.
pub fn quarter() -> ComplexMatrix {
    ComplexMatrix::from_fn(4, 4, |j, k| C64::new(if j == k { 0.5 } else { -0.5 }, 0.0))
}

impl InterferometerModel {
    /// Model with recombiner `W^-1` and a Fock probe.
    pub fn new(splitter: ComplexMatrix, phase_modes: Vec<usize>, probe: OccupationVector) -> Result<Self> {
        let inverse = splitter.adjoint();
        Self::build(splitter, inverse, true, phase_modes, Probe::Fock(probe), &Tolerances::default())
    }

    /// General two-splitter model `V . P(theta) . W`.
    pub fn with_recombiner(
        splitter: ComplexMatrix,
        recombiner: ComplexMatrix,
        phase_modes: Vec<usize>,
        probe: Probe,
    ) -> Result<Self> {
        Self::build(splitter, recombiner, false, phase_modes, probe, &Tolerances::default())
    }

    /// Model with recombiner `W^-1` and an arbitrary normalized probe.
    pub fn with_probe_state(
        splitter: ComplexMatrix,
        phase_modes: Vec<usize>,
        probe: StateVector,
    ) -> Result<Self> {
        let inverse = splitter.adjoint();
        Self::build(
            splitter,
            inverse,
            true,
            phase_modes,
            Probe::Superposition(probe),
            &Tolerances::default(),
        )
    }

    /// Three-mode model: tritter, probe `|1,1,1>`, phases on modes 0 and 1.
    pub fn mzi3() -> Self {
        Self::new(tritter(), vec![0, 1], OccupationVector(vec![1, 1, 1]))
            .expect("tritter model is valid")
    }

    /// Four-mode model: quarter, probe `|1,1,1,1>`, phases on modes 0 and 1.
    pub fn mzi4() -> Self {
        Self::new(quarter(), vec![0, 1], OccupationVector(vec![1, 1, 1, 1]))
            .expect("quarter model is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "mzi3" => Some(Self::mzi3()),
            "mzi4" => Some(Self::mzi4()),
            _ => None,
        }
    }

    fn build(
        splitter: ComplexMatrix,
        recombiner: ComplexMatrix,
        recombiner_is_inverse: bool,
        phase_modes: Vec<usize>,
        probe: Probe,
        tol: &Tolerances,
    ) -> Result<Self> {
        let modes = splitter.rows();
        if !splitter.is_square() || modes == 0 {
            return Err(Error::InvalidModel(format!(
                "splitter must be a non-empty square matrix, got {}x{}",
                splitter.rows(),
                splitter.cols()
            )));
        }
        if recombiner.rows() != modes || recombiner.cols() != modes {
            return Err(Error::DimensionMismatch {
                what: "recombiner",
                expected: modes,
                found: recombiner.rows(),
            });
        }
        if phase_modes.len() + 1 > modes {
            return Err(Error::InvalidModel(format!(
                "{} phases on {modes} modes; at most modes - 1 are allowed",
                phase_modes.len()
            )));
        }
        for (i, &m) in phase_modes.iter().enumerate() {
            if m >= modes {
                return Err(Error::IndexOutOfRange {
                    what: "phase mode",
                    index: m,
                    len: modes,
                });
            }
            if phase_modes[..i].contains(&m) {
                return Err(Error::InvalidModel(format!("phase mode {m} listed twice")));
            }
        }

        let basis = match &probe {
            Probe::Fock(occ) => {
                if occ.modes() != modes {
                    return Err(Error::DimensionMismatch {
                        what: "probe occupation",
                        expected: modes,
                        found: occ.modes(),
                    });
                }
                enumerate_basis(occ.photons(), modes)?
            }
            Probe::Superposition(state) => {
                if state.basis().modes() != modes {
                    return Err(Error::DimensionMismatch {
                        what: "probe state modes",
                        expected: modes,
                        found: state.basis().modes(),
                    });
                }
                if !state.is_normalized(tol.normalized) {
                    return Err(Error::NotNormalized {
                        index: 0,
                        defect: (state.norm_sqr() - 1.0).abs(),
                    });
                }
                Arc::clone(state.basis())
            }
        };
        let probe_state = match &probe {
            Probe::Fock(occ) => StateVector::fock(Arc::clone(&basis), occ)?,
            Probe::Superposition(state) => state.clone(),
        };

        let lifted_splitter = lift_unitary_with_tol(&splitter, &basis, tol.unitary)?;
        let lifted_recombiner = lift_unitary_with_tol(&recombiner, &basis, tol.unitary)?;
        let number_ops = phase_modes
            .iter()
            .map(|&m| number_operator(m, &basis))
            .collect::<Result<Vec<_>>>()?;
        let prepared = lifted_splitter.mul_vec(probe_state.amplitudes());

        Ok(Self {
            modes,
            splitter,
            recombiner,
            recombiner_is_inverse,
            phase_modes,
            probe,
            basis,
            lifted_splitter,
            lifted_recombiner,
            number_ops,
            prepared,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn splitter(&self) -> &ComplexMatrix {
        &self.splitter
    }

    pub fn recombiner(&self) -> &ComplexMatrix {
        &self.recombiner
    }

    pub fn phase_modes(&self) -> &[usize] {
        &self.phase_modes
    }

    pub fn probe(&self) -> &Probe {
        &self.probe
    }

    pub fn lifted_splitter(&self) -> &ComplexMatrix {
        &self.lifted_splitter
    }

    pub fn lifted_recombiner(&self) -> &ComplexMatrix {
        &self.lifted_recombiner
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.phase_modes.len() {
            return Err(Error::DimensionMismatch {
                what: "theta",
                expected: self.phase_modes.len(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// Serializable description, when the probe is a Fock state.
    pub fn description(&self) -> Option<ModelDescription> {
        let Probe::Fock(occ) = &self.probe else {
            return None;
        };
        Some(ModelDescription {
            modes: self.modes,
            splitter: SplitterSpec::from_matrix(&self.splitter),
            recombiner: (!self.recombiner_is_inverse)
                .then(|| SplitterSpec::from_matrix(&self.recombiner)),
            phase_modes: self.phase_modes.clone(),
            probe: occ.0.clone(),
        })
    }
}

impl PhaseEncoding for InterferometerModel {
    fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    fn num_params(&self) -> usize {
        self.phase_modes.len()
    }

    fn output_state(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_theta(theta)?;
        let phases = phase_layer(&self.basis, &self.phase_modes, theta);
        let inner: Vec<C64> = self.prepared.iter().zip(&phases).map(|(a, p)| a * p).collect();
        Ok(StateVector::from_parts(
            Arc::clone(&self.basis),
            self.lifted_recombiner.mul_vec(&inner),
        ))
    }

    fn derivative_states(&self, theta: &[f64]) -> Result<DerivativeBundle> {
        self.check_theta(theta)?;
        let phases = phase_layer(&self.basis, &self.phase_modes, theta);
        let inner: Vec<C64> = self.prepared.iter().zip(&phases).map(|(a, p)| a * p).collect();
        let psi = StateVector::from_parts(Arc::clone(&self.basis), self.lifted_recombiner.mul_vec(&inner));
        let dpsi = self
            .number_ops
            .iter()
            .map(|n| {
                let v: Vec<C64> = inner
                    .iter()
                    .zip(n)
                    .map(|(a, &k)| a * C64::new(0.0, k))
                    .collect();
                StateVector::from_parts(Arc::clone(&self.basis), self.lifted_recombiner.mul_vec(&v))
            })
            .collect();
        Ok(DerivativeBundle {
            theta: theta.to_vec(),
            psi,
            dpsi,
        })
    }
}

/// On-disk model description.
///
/// ```json
/// {"modes": 3, "splitter": "tritter", "phase_modes": [0, 1], "probe": [1, 1, 1]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescription {
    pub modes: usize,
    pub splitter: SplitterSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recombiner: Option<SplitterSpec>,
    pub phase_modes: Vec<usize>,
    pub probe: Vec<u32>,
}

/// Either a named splitter or explicit `[[re, im], ...]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitterSpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl SplitterSpec {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        if m.rows() == 3 && m.cols() == 3 && m.max_abs_diff(&tritter()) == 0.0 {
            return Self::Named("tritter".into());
        }
        if m.rows() == 4 && m.cols() == 4 && m.max_abs_diff(&quarter()) == 0.0 {
            return Self::Named("quarter".into());
        }
        Self::Matrix(
            m.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        match self {
            Self::Named(name) => match name.as_str() {
                "tritter" => Ok(tritter()),
                "quarter" => Ok(quarter()),
                other => Err(Error::InvalidModel(format!("unknown splitter `{other}`"))),
            },
            Self::Matrix(rows) => ComplexMatrix::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
                    .collect(),
            ),
        }
    }
}

impl ModelDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<InterferometerModel> {
        let splitter = self.splitter.to_matrix()?;
        if splitter.rows() != self.modes {
            return Err(Error::DimensionMismatch {
                what: "splitter",
                expected: self.modes,
                found: splitter.rows(),
            });
        }
        let probe = OccupationVector(self.probe.clone());
        match &self.recombiner {
            None => InterferometerModel::new(splitter, self.phase_modes.clone(), probe),
            Some(spec) => InterferometerModel::with_recombiner(
                splitter,
                spec.to_matrix()?,
                self.phase_modes.clone(),
                Probe::Fock(probe),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tritter_entries() {
        let t = tritter();
        let s = 1.0 / 3f64.sqrt();
        assert!((t[(0, 0)] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((t[(0, 1)] - C64::from_polar(s, 2.0 * PI / 3.0)).norm() < 1e-15);
        assert!(t.unitarity_defect() < 1e-12);
    }

    #[test]
    fn quarter_entries() {
        let q = quarter();
        assert_eq!(q[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(q[(1, 0)], C64::new(-0.5, 0.0));
        assert_eq!(q.unitarity_defect(), 0.0);
    }

    #[test]
    fn zero_phase_returns_probe() {
        for model in [InterferometerModel::mzi3(), InterferometerModel::mzi4()] {
            let psi = model.output_state(&[0.0, 0.0]).unwrap();
            let Probe::Fock(occ) = model.probe() else { unreachable!() };
            let idx = model.basis().index_of(occ).unwrap();
            assert!((psi.amplitudes()[idx].norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_arity_checked() {
        let m = InterferometerModel::mzi3();
        assert!(matches!(
            m.output_state(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_phase_modes_rejected() {
        let probe = OccupationVector(vec![1, 1, 1]);
        assert!(InterferometerModel::new(tritter(), vec![0, 0], probe.clone()).is_err());
        assert!(InterferometerModel::new(tritter(), vec![0, 1, 2], probe.clone()).is_err());
        assert!(InterferometerModel::new(tritter(), vec![5], probe).is_err());
    }

    #[test]
    fn description_round_trip() {
        let text = r#"{"modes": 3, "splitter": "tritter", "phase_modes": [0, 1], "probe": [1, 1, 1]}"#;
        let desc = ModelDescription::from_json(text).unwrap();
        let model = desc.build().unwrap();
        assert_eq!(model.description().unwrap(), desc);

        let explicit = ModelDescription {
            modes: 2,
            splitter: SplitterSpec::Matrix(vec![
                vec![[0.6, 0.0], [0.0, 0.8]],
                vec![[0.0, 0.8], [0.6, 0.0]],
            ]),
            recombiner: None,
            phase_modes: vec![0],
            probe: vec![1, 0],
        };
        let json = explicit.to_json().unwrap();
        let back = ModelDescription::from_json(&json).unwrap();
        assert_eq!(back, explicit);
        let rebuilt = back.build().unwrap().description().unwrap();
        assert_eq!(rebuilt, explicit);
    }

    #[test]
    fn unknown_splitter_rejected() {
        let text = r#"{"modes": 3, "splitter": "hexter", "phase_modes": [0], "probe": [1, 0, 0]}"#;
        assert!(ModelDescription::from_json(text).unwrap().build().is_err());
    }
}
