//! Hamiltonians on tensor-product spaces, closed-system unitary evolution,
//! GKSL evolution of an open subsystem, and the two model families built on
//! them: independent Markovian evolution of a product state, and the
//! dominant-interaction / small-disturbance (DISD) tripartite model.
//!
//! GKSL convention: dρ/dt = −i[H, ρ] + Σₖ γₖ (LₖρLₖ† − ½{Lₖ†Lₖ, ρ}).

mod disd;
mod hamiltonian;
mod lindblad;
mod markovian;

use serde::{Deserialize, Serialize};

pub use disd::{kappa_epsilon_bound, robustness_check, run_disd, DisdExtras, DisdRun, DisdScenario, RobustnessReport, DEFAULT_EPSILON, ROBUSTNESS_TOL};
pub use hamiltonian::{HamiltonianSpec, HamiltonianTerm};
pub use lindblad::{
    choi_matrix, evolve_lindblad, generator, kraus_from_choi, propagator, rk4_step_matrix, step_size, Jump, LindbladSpec,
    POSITIVITY_TOL,
};
pub use markovian::{random_markovian_scenario, run_markovian_classicality, MarkovianScenario};

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermiticity_defect, CMatrix, CVector, C64};
use crate::state::{DensityOperator, PureState, HERMITIAN_TOL};

pub const MAX_TIME_POINTS: usize = 1_000_000;

/// Strictly increasing sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;
    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("time grid has a non-finite entry".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!("time grid not strictly increasing at {} -> {}", w[0], w[1])));
        }
        Ok(Self { times })
    }

    /// `points` evenly spaced samples including both ends.
    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::InvalidInput("time grid needs at least one point".into())),
            n if n > MAX_TIME_POINTS => {
                Err(Error::InvalidInput(format!("time grid of {n} points exceeds the cap of {MAX_TIME_POINTS}")))
            }
            1 => Self::new(vec![start]),
            _ => {
                let h = (stop - start) / (points - 1) as f64;
                let mut times: Vec<f64> = (0..points).map(|k| start + h * k as f64).collect();
                times[points - 1] = stop;
                Self::new(times)
            }
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn stop(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// exp(−iHt) for repeated t, diagonalizing once.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    vals: Vec<f64>,
    vecs: CMatrix,
}

impl SpectralPropagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let defect = hermiticity_defect(h);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let (vals, vecs) = eigh(h);
        Ok(Self { vals, vecs })
    }

    fn phases(&self, t: f64) -> CVector {
        CVector::from_iterator(self.vals.len(), self.vals.iter().map(|&e| C64::from_polar(1.0, -e * t)))
    }

    pub fn at(&self, t: f64) -> CMatrix {
        &self.vecs * CMatrix::from_diagonal(&self.phases(t)) * self.vecs.adjoint()
    }

    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let coeffs = self.vecs.adjoint() * psi;
        &self.vecs * coeffs.component_mul(&self.phases(t))
    }
}

/// States sampled on a grid.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(&self.states)
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectories are nonempty")
    }
}

fn check_square(h: &CMatrix, dim: usize) -> Result<()> {
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    Ok(())
}

/// ρ(t) = U(t − t₀) ρ U(t − t₀)† with ρ given at t₀ = `grid.start()`.
pub fn evolve_unitary(rho: &DensityOperator, h: &CMatrix, grid: &TimeGrid) -> Result<Trajectory<DensityOperator>> {
    check_square(h, rho.dim())?;
    let prop = SpectralPropagator::new(h)?;
    let states = grid
        .times()
        .iter()
        .map(|&t| rho.conjugate(&prop.at(t - grid.start())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times: grid.times().to_vec(), states })
}

/// |ψ(t)⟩ = U(t − t₀)|ψ⟩ with ψ given at t₀ = `grid.start()`.
pub fn evolve_pure(psi: &PureState, h: &CMatrix, grid: &TimeGrid) -> Result<Trajectory<PureState>> {
    check_square(h, psi.amplitudes().len())?;
    let prop = SpectralPropagator::new(h)?;
    let states = grid
        .times()
        .iter()
        .map(|&t| PureState::normalized(prop.apply(psi.amplitudes(), t - grid.start()), psi.factorization().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times: grid.times().to_vec(), states })
}

/// One row of a correlation time series. `S_E` and `lii_total` are empty
/// for runs without an environment factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeRecord {
    pub t: f64,
    #[serde(rename = "S_S")]
    pub s_s: f64,
    #[serde(rename = "S_Sp")]
    pub s_sp: f64,
    #[serde(rename = "S_E")]
    pub s_e: Option<f64>,
    #[serde(rename = "I")]
    pub mutual_info: f64,
    #[serde(rename = "D_left")]
    pub d_left: f64,
    #[serde(rename = "D_right")]
    pub d_right: f64,
    pub lazy_left: f64,
    pub lazy_right: f64,
    pub lii_total: Option<f64>,
}

pub const CSV_HEADER: &str = "t,S_S,S_Sp,S_E,I,D_left,D_right,lazy_left,lazy_right,lii_total";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub records: Vec<TimeRecord>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Largest value of a column over the run; `None` columns count as absent.
    pub fn max_of(&self, column: &str) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for r in &self.records {
            if let Some(v) = column_value(r, column)? {
                best = best.max(v);
            }
        }
        Ok(best)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        }
        if self.records.is_empty() {
            w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Two whitespace-separated columns (t and `column`) for gnuplot.
    pub fn to_gnuplot(&self, column: &str) -> Result<String> {
        let mut out = format!("# t {column}\n");
        for r in &self.records {
            if let Some(v) = column_value(r, column)? {
                out.push_str(&format!("{:?} {v:?}\n", r.t));
            }
        }
        Ok(out)
    }
}

pub const COLUMNS: [&str; 10] = ["t", "S_S", "S_Sp", "S_E", "I", "D_left", "D_right", "lazy_left", "lazy_right", "lii_total"];

fn column_value(r: &TimeRecord, column: &str) -> Result<Option<f64>> {
    Ok(match column {
        "t" => Some(r.t),
        "S_S" => Some(r.s_s),
        "S_Sp" => Some(r.s_sp),
        "S_E" => r.s_e,
        "I" => Some(r.mutual_info),
        "D_left" => Some(r.d_left),
        "D_right" => Some(r.d_right),
        "lazy_left" => Some(r.lazy_left),
        "lazy_right" => Some(r.lazy_right),
        "lii_total" => r.lii_total,
        other => return Err(Error::InvalidInput(format!("unknown column '{other}'"))),
    })
}
