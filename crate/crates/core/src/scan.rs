//! Two-dimensional phase sweeps of `||F_Q - F||_2`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{fisher_pair, FisherPair, LimitPolicy, ProjectorSet};
use crate::interferometer::PhaseEncoding;
use crate::linalg::RealSymMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Phase indices swept along the first and second grid axis.
    pub axes: [usize; 2],
    /// `[lo, hi)` per axis.
    pub ranges: [[f64; 2]; 2],
    pub resolution: [usize; 2],
    /// Values of every phase; swept entries are overwritten per cell.
    pub fixed: Vec<f64>,
    #[serde(default)]
    pub policy: LimitPolicy,
    /// Cells with gap below this are labelled saturating.
    pub gap_threshold: f64,
}

impl ScanConfig {
    /// 101 x 101 over `[0, 2 pi)^2`, sweeping the first two phases.
    pub fn new(num_params: usize) -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            axes: [0, 1],
            ranges: [[0.0, tau], [0.0, tau]],
            resolution: [101, 101],
            fixed: vec![0.0; num_params],
            policy: LimitPolicy::default(),
            gap_threshold: 1e-6,
        }
    }

    pub fn with_resolution(mut self, n1: usize, n2: usize) -> Self {
        self.resolution = [n1, n2];
        self
    }

    pub fn validate(&self, num_params: usize) -> Result<()> {
        if num_params < 2 {
            return Err(Error::InvalidConfig("a grid scan needs at least two phases".into()));
        }
        if self.fixed.len() != num_params {
            return Err(Error::DimensionMismatch {
                what: "fixed phase values",
                expected: num_params,
                found: self.fixed.len(),
            });
        }
        if self.axes[0] == self.axes[1] || self.axes.iter().any(|&a| a >= num_params) {
            return Err(Error::InvalidConfig(format!(
                "swept phases {:?} must be distinct indices below {num_params}",
                self.axes
            )));
        }
        for (axis, (&[lo, hi], &n)) in self.ranges.iter().zip(&self.resolution).enumerate() {
            if n < 2 {
                return Err(Error::InvalidConfig(format!("axis {axis}: resolution must be at least 2")));
            }
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidConfig(format!("axis {axis}: range [{lo}, {hi}) is empty")));
            }
        }
        if !(self.gap_threshold > 0.0) {
            return Err(Error::InvalidConfig("gap threshold must be positive".into()));
        }
        self.policy.validate()
    }

    /// Node `i` of `axis`: `lo + (hi - lo) * i / n`.
    pub fn node(&self, axis: usize, i: usize) -> f64 {
        let [lo, hi] = self.ranges[axis];
        lo + (hi - lo) * i as f64 / self.resolution[axis] as f64
    }

    pub fn cell_count(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    /// Full phase vector of row-major cell `index`.
    pub fn theta_of(&self, index: usize) -> Vec<f64> {
        let (i, j) = (index / self.resolution[1], index % self.resolution[1]);
        let mut theta = self.fixed.clone();
        theta[self.axes[0]] = self.node(0, i);
        theta[self.axes[1]] = self.node(1, j);
        theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVerdict {
    Saturates,
    DoesNotSaturate,
}

impl GapVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            GapVerdict::Saturates => "saturates",
            GapVerdict::DoesNotSaturate => "does_not_saturate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub theta: Vec<f64>,
    pub gap: f64,
    pub verdict: GapVerdict,
    /// Upper triangle, row-major.
    pub fim: Vec<f64>,
    pub qfim: Vec<f64>,
    pub min_ordering_eigenvalue: f64,
    pub singular_outcomes: usize,
    pub direction_dependent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub config: ScanConfig,
    pub cells: Vec<GridCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub resolution: [usize; 2],
    pub ranges: [[f64; 2]; 2],
    pub axes: [usize; 2],
    pub cells: usize,
    pub min_gap: f64,
    pub min_gap_theta: Vec<f64>,
    pub max_gap: f64,
    pub max_gap_theta: Vec<f64>,
    pub gap_threshold: f64,
    /// `(row, col)` of every cell with gap below the threshold.
    pub zero_gap_cells: Vec<[usize; 2]>,
    pub min_ordering_eigenvalue: f64,
    pub direction_dependent_cells: usize,
}

fn make_cell(config: &ScanConfig, index: usize, pair: FisherPair) -> GridCell {
    GridCell {
        row: index / config.resolution[1],
        col: index % config.resolution[1],
        theta: pair.theta,
        gap: pair.gap,
        verdict: if pair.gap < config.gap_threshold {
            GapVerdict::Saturates
        } else {
            GapVerdict::DoesNotSaturate
        },
        fim: pair.fim.upper_triangle(),
        qfim: pair.qfim.upper_triangle(),
        min_ordering_eigenvalue: pair.min_ordering_eigenvalue,
        singular_outcomes: pair.singular_outcomes.len(),
        direction_dependent: pair.direction_dependent,
    }
}

/// Evaluates every cell in parallel. Cells come back in row-major order.
pub fn run_scan<E: PhaseEncoding + ?Sized>(source: &E, set: &ProjectorSet, config: &ScanConfig) -> Result<GridResult> {
    config.validate(source.num_params())?;
    let cells = (0..config.cell_count())
        .into_par_iter()
        .map(|index| {
            let theta = config.theta_of(index);
            fisher_pair(source, &theta, set, &config.policy).map(|p| make_cell(config, index, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        config: config.clone(),
        cells,
    })
}

/// Single-threaded reference for [`run_scan`].
pub fn run_scan_sequential<E: PhaseEncoding + ?Sized>(
    source: &E,
    set: &ProjectorSet,
    config: &ScanConfig,
) -> Result<GridResult> {
    config.validate(source.num_params())?;
    let cells = (0..config.cell_count())
        .map(|index| {
            let theta = config.theta_of(index);
            fisher_pair(source, &theta, set, &config.policy).map(|p| make_cell(config, index, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult {
        config: config.clone(),
        cells,
    })
}

impl GridResult {
    pub fn summary(&self) -> ScanSummary {
        let mut min = &self.cells[0];
        let mut max = &self.cells[0];
        for c in &self.cells {
            if c.gap < min.gap {
                min = c;
            }
            if c.gap > max.gap {
                max = c;
            }
        }
        ScanSummary {
            resolution: self.config.resolution,
            ranges: self.config.ranges,
            axes: self.config.axes,
            cells: self.cells.len(),
            min_gap: min.gap,
            min_gap_theta: min.theta.clone(),
            max_gap: max.gap,
            max_gap_theta: max.theta.clone(),
            gap_threshold: self.config.gap_threshold,
            zero_gap_cells: self
                .cells
                .iter()
                .filter(|c| c.gap < self.config.gap_threshold)
                .map(|c| [c.row, c.col])
                .collect(),
            min_ordering_eigenvalue: self
                .cells
                .iter()
                .map(|c| c.min_ordering_eigenvalue)
                .fold(f64::INFINITY, f64::min),
            direction_dependent_cells: self.cells.iter().filter(|c| c.direction_dependent).count(),
        }
    }

    pub fn csv_header(&self) -> String {
        let d = self.config.fixed.len();
        let mut cols = vec!["theta1".to_string(), "theta2".into(), "gap".into(), "verdict".into()];
        for prefix in ["f", "fq"] {
            for l in 1..=d {
                for m in l..=d {
                    cols.push(format!("{prefix}{l}{m}"));
                }
            }
        }
        cols.join(",")
    }

    /// Fixed 17-significant-digit scientific notation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        let [a0, a1] = self.config.axes;
        for c in &self.cells {
            let mut line = format!(
                "{:.16e},{:.16e},{:.16e},{}",
                c.theta[a0],
                c.theta[a1],
                c.gap,
                c.verdict.as_str()
            );
            for v in c.fim.iter().chain(&c.qfim) {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Rebuilds the full matrix from an upper-triangle row-major list.
pub fn from_upper_triangle(d: usize, entries: &[f64]) -> RealSymMatrix {
    let mut k = 0;
    let mut full = vec![0.0; d * d];
    for l in 0..d {
        for m in l..d {
            full[l * d + m] = entries[k];
            full[m * d + l] = entries[k];
            k += 1;
        }
    }
    RealSymMatrix::symmetrized(d, &full)
}
