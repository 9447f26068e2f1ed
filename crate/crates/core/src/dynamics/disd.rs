use rayon::prelude::*;
use serde::Serialize;

use super::{SpectralPropagator, TimeGrid, TimeRecord, TimeSeries};
use super::{HamiltonianSpec, HamiltonianTerm};
use crate::correlations::{full_report, is_lazy, lii_flow, Cut, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, kron_all, kron_vec, real, CMatrix, CVector};
use crate::operators::{pauli_x, pauli_z};
use crate::state::{partial_trace, HilbertFactorization, PureState, NORM_TOL};

pub const ROBUSTNESS_TOL: f64 = 1e-8;
/// Horizon used for the c = 0 run, matching the ε = 0.01 window.
pub const DEFAULT_EPSILON: f64 = 0.01;
const MAX_EPSILON: f64 = 0.1;

/// Tripartite S + S′ + E model: local terms, a strong S′–E coupling of
/// strength C and a weak S–S′ coupling of strength c.
#[derive(Debug, Clone)]
pub struct DisdScenario {
    pub c: f64,
    pub big_c: f64,
    /// Local Hamiltonians, each on a single-factor space.
    pub h_s: HamiltonianSpec,
    pub h_sp: HamiltonianSpec,
    pub h_e: HamiltonianSpec,
    /// Interaction shapes on [S′, E] and [S, S′], scaled by C and c.
    pub h_spe: HamiltonianSpec,
    pub h_ssp: HamiltonianSpec,
    pub psi_s: CVector,
    pub p: CVector,
    pub chi: CVector,
    pub grid: TimeGrid,
}

impl DisdScenario {
    /// Qubit model with H_{S′E} = C σz⊗σz, H_{SS′} = c σx⊗σx and |p⟩ = |0⟩,
    /// sampled at 200 points over [0, C/c].
    pub fn default_qubits(c: f64) -> Result<Self> {
        let big_c = 1.0;
        let horizon = if c > 0.0 { big_c / c } else { big_c / DEFAULT_EPSILON };
        Ok(Self {
            c,
            big_c,
            h_s: HamiltonianSpec::new(vec![HamiltonianTerm::local(0.3, 0, pauli_z())]),
            h_sp: HamiltonianSpec::new(vec![HamiltonianTerm::local(0.2, 0, pauli_z())]),
            h_e: HamiltonianSpec::new(vec![HamiltonianTerm::local(0.1, 0, pauli_z())]),
            h_spe: HamiltonianSpec::new(vec![HamiltonianTerm::new(1.0, [(0, pauli_z()), (1, pauli_z())])]),
            h_ssp: HamiltonianSpec::new(vec![HamiltonianTerm::new(1.0, [(0, pauli_x()), (1, pauli_x())])]),
            psi_s: CVector::from_vec(vec![real(0.3f64.cos()), real(0.3f64.sin())]),
            p: CVector::from_vec(vec![real(1.0), real(0.0)]),
            chi: CVector::from_vec(vec![real(0.4f64.cos()), real(0.4f64.sin())]),
            grid: TimeGrid::linspace(0.0, horizon, 200)?,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.c / self.big_c
    }

    pub fn factorization(&self) -> Result<HilbertFactorization> {
        HilbertFactorization::new(vec![self.psi_s.len(), self.p.len(), self.chi.len()])
    }

    fn local(spec: &HamiltonianSpec, d: usize) -> Result<CMatrix> {
        spec.assemble(&HilbertFactorization::new(vec![d])?)
    }

    fn pair(spec: &HamiltonianSpec, d0: usize, d1: usize) -> Result<CMatrix> {
        spec.assemble(&HilbertFactorization::new(vec![d0, d1])?)
    }

    /// C·H_{S′E} as a matrix on S′ ⊗ E.
    pub fn strong_coupling(&self) -> Result<CMatrix> {
        Ok(Self::pair(&self.h_spe, self.p.len(), self.chi.len())? * real(self.big_c))
    }

    /// Full Hamiltonian with the weak coupling scaled by `weak`.
    fn hamiltonian_with(&self, weak: f64) -> Result<CMatrix> {
        let (ds, dp, de) = (self.psi_s.len(), self.p.len(), self.chi.len());
        let (is, ip, ie) = (identity(ds), identity(dp), identity(de));
        let hs = Self::local(&self.h_s, ds)?;
        let hp = Self::local(&self.h_sp, dp)?;
        let he = Self::local(&self.h_e, de)?;
        let hpe = self.strong_coupling()?;
        let hsp = Self::pair(&self.h_ssp, ds, dp)? * real(weak);
        Ok(kron_all([&hs, &ip, &ie])
            + kron_all([&is, &hp, &ie])
            + kron_all([&is, &ip, &he])
            + kron(&is, &hpe)
            + kron(&hsp, &ie))
    }

    pub fn hamiltonian(&self) -> Result<CMatrix> {
        self.hamiltonian_with(self.c)
    }

    pub fn initial_state(&self) -> Result<PureState> {
        let v = kron_vec(&kron_vec(&self.psi_s, &self.p), &self.chi);
        PureState::new(v, self.factorization()?)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobustnessReport {
    pub holds: bool,
    pub residual: f64,
}

/// Does H map |p⟩|χ⟩ to |p⟩ ⊗ (something)? The residual is the norm left
/// after projecting the S′ part of H|p⟩|χ⟩ onto |p⟩.
pub fn robustness_check(h_spe: &CMatrix, p: &CVector, chi: &CVector) -> Result<RobustnessReport> {
    let (dp, de) = (p.len(), chi.len());
    if h_spe.nrows() != dp * de || h_spe.ncols() != dp * de {
        return Err(Error::DimensionMismatch { expected: dp * de, found: h_spe.nrows() });
    }
    for v in [p, chi] {
        let defect = (v.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NotNormalized(defect));
        }
    }
    let image = h_spe * kron_vec(p, chi);
    let projector = identity(dp) - p * p.adjoint();
    let residual = (kron(&projector, &identity(de)) * image).norm();
    Ok(RobustnessReport { holds: residual < ROBUSTNESS_TOL, residual })
}

/// ε(1 − ln ε − ln p_max) built from a subsystem spectrum: ε is the weight
/// outside the largest eigenvalue and p_max the next eigenvalue relative to ε.
pub fn kappa_epsilon_bound(spectrum: &[f64]) -> f64 {
    let mut w: Vec<f64> = spectrum.iter().map(|x| x.max(0.0)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    let eps = 1.0 - w[0];
    if eps <= 1e-15 || w.len() < 2 || w[1] <= 0.0 {
        return 0.0;
    }
    let p_max = w[1] / eps;
    eps * (1.0 - eps.ln() - p_max.ln())
}

/// Per-time quantities beyond the standard CSV columns.
#[derive(Debug, Clone, Serialize)]
pub struct DisdExtras {
    pub t: f64,
    pub s_ssp: f64,
    /// κε bounds for S, S′ and E.
    pub bounds: [f64; 3],
    pub lii_terms: [f64; 3],
    /// 1 − |⟨ψ₀(t)|Ψ(t)⟩|², ψ₀ evolved without the weak coupling.
    pub remainder: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisdRun {
    pub epsilon: f64,
    pub robustness: RobustnessReport,
    pub series: TimeSeries,
    pub extras: Vec<DisdExtras>,
}

impl DisdRun {
    pub fn max_mutual_info(&self) -> f64 {
        self.series.records.iter().map(|r| r.mutual_info).fold(0.0, f64::max)
    }

    /// Largest single-subsystem entropy over the run.
    pub fn max_subsystem_entropy(&self) -> f64 {
        self.series
            .records
            .iter()
            .map(|r| r.s_s.max(r.s_sp).max(r.s_e.unwrap_or(0.0)))
            .fold(0.0, f64::max)
    }

    /// Largest S_X − κε_X over time and subsystems; ≤ 0 means the bound held.
    pub fn max_bound_excess(&self) -> f64 {
        self.series
            .records
            .iter()
            .zip(&self.extras)
            .map(|(r, x)| {
                let s = [r.s_s, r.s_sp, r.s_e.unwrap_or(0.0)];
                (0..3).map(|k| s[k] - x.bounds[k]).fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_correlation(&self) -> f64 {
        self.series
            .records
            .iter()
            .map(|r| r.mutual_info.max(r.d_left).max(r.d_right).max(r.lii_total.unwrap_or(0.0)))
            .fold(0.0, f64::max)
    }

    pub fn extras_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "S_SSp", "bound_S", "bound_Sp", "bound_E", "lii_SpS", "lii_ESp", "lii_SE", "remainder"])
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        for x in &self.extras {
            let row = [x.t, x.s_ssp, x.bounds[0], x.bounds[1], x.bounds[2], x.lii_terms[0], x.lii_terms[1], x.lii_terms[2], x.remainder];
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Exact unitary evolution of S + S′ + E from |ψ⟩|p⟩|χ⟩.
pub fn run_disd(scn: &DisdScenario, cfg: &OptimizerConfig) -> Result<DisdRun> {
    if !(scn.big_c.is_finite() && scn.big_c > 0.0) {
        return Err(Error::InvalidInput(format!("strong coupling C = {} must be positive", scn.big_c)));
    }
    let epsilon = scn.epsilon();
    if !(epsilon.is_finite() && (0.0..=MAX_EPSILON).contains(&epsilon)) {
        return Err(Error::InvalidInput(format!("epsilon = c/C = {epsilon} must lie in [0, {MAX_EPSILON}]")));
    }
    let robustness = robustness_check(&scn.strong_coupling()?, &scn.p, &scn.chi)?;
    if !robustness.holds {
        return Err(Error::Robustness(robustness.residual));
    }
    let psi0 = scn.initial_state()?;
    let full = SpectralPropagator::new(&scn.hamiltonian()?)?;
    let unperturbed = SpectralPropagator::new(&scn.hamiltonian_with(0.0)?)?;
    let f = psi0.factorization().clone();
    let t0 = scn.grid.start();
    let rows = scn
        .grid
        .times()
        .par_iter()
        .map(|&t| {
            let v = full.apply(psi0.amplitudes(), t - t0);
            let v0 = unperturbed.apply(psi0.amplitudes(), t - t0);
            let remainder = (1.0 - v0.dotc(&v).norm_sqr()).max(0.0);
            let rho = PureState::normalized(v, f.clone())?.to_density();
            let singles = (0..3).map(|k| partial_trace(&rho, &[k])).collect::<Result<Vec<_>>>()?;
            let mut entropies = [0.0; 3];
            let mut bounds = [0.0; 3];
            for (k, r) in singles.iter().enumerate() {
                let spectrum = r.spectrum()?;
                entropies[k] = crate::linalg::shannon_nats(spectrum.iter().map(|x| x.max(0.0)));
                bounds[k] = kappa_epsilon_bound(&spectrum);
            }
            let rho_ssp = partial_trace(&rho, &[0, 1])?;
            let cut = Cut::new(vec![0], vec![1]);
            let report = full_report(&rho_ssp, &cut, cfg)?;
            let lii = lii_flow(&rho, cfg)?;
            let record = TimeRecord {
                t,
                s_s: entropies[0],
                s_sp: entropies[1],
                s_e: Some(entropies[2]),
                mutual_info: report.mutual_info,
                d_left: report.d_left,
                d_right: report.d_right,
                lazy_left: is_lazy(&rho_ssp, &[0])?.commutator_norm,
                lazy_right: is_lazy(&rho_ssp, &[1])?.commutator_norm,
                lii_total: Some(lii.total),
            };
            let extras = DisdExtras { t, s_ssp: rho_ssp.entropy()?, bounds, lii_terms: lii.terms, remainder };
            Ok((record, extras))
        })
        .collect::<Result<Vec<_>>>()?;
    let (records, extras) = rows.into_iter().unzip();
    Ok(DisdRun { epsilon, robustness, series: TimeSeries { records }, extras })
}
