use rand::Rng;
use rayon::prelude::*;

use super::{evolve_lindblad, evolve_unitary, HamiltonianSpec, HamiltonianTerm, Jump, LindbladSpec, TimeGrid, TimeRecord, TimeSeries};
use crate::correlations::{full_report, is_lazy, Cut, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, real};
use crate::random::{ginibre, random_density, random_hermitian, rng_from_seed};
use crate::state::{DensityOperator, HilbertFactorization};

/// A closed system S next to an open system S′ that starts uncorrelated
/// with it; S′ sees its environment only through a GKSL generator.
#[derive(Debug, Clone)]
pub struct MarkovianScenario {
    pub rho_s: DensityOperator,
    pub rho_sp: DensityOperator,
    pub h_s: HamiltonianSpec,
    pub lindblad: LindbladSpec,
    pub grid: TimeGrid,
}

impl MarkovianScenario {
    /// Default window [0, 10/γ_max] with 200 points (or [0, 10] without jumps).
    pub fn default_grid(lindblad: &LindbladSpec) -> Result<TimeGrid> {
        let rate = lindblad.max_rate();
        let stop = if rate > 0.0 { 10.0 / rate } else { 10.0 };
        TimeGrid::linspace(0.0, stop, 200)
    }
}

/// Evolves S unitarily and S′ under its GKSL generator, then reports
/// correlations of ρ_S(t) ⊗ ρ_S′(t) at every grid time.
pub fn run_markovian_classicality(scn: &MarkovianScenario, cfg: &OptimizerConfig) -> Result<TimeSeries> {
    let h_s = scn.h_s.assemble(scn.rho_s.factorization())?;
    let s_traj = evolve_unitary(&scn.rho_s, &h_s, &scn.grid)?;
    let sp_traj = evolve_lindblad(&scn.rho_sp, &scn.lindblad, &scn.grid)?;
    let ns = scn.rho_s.dims().len();
    let nsp = scn.rho_sp.dims().len();
    let cut = Cut::new((0..ns).collect(), (ns..ns + nsp).collect());
    let records = s_traj
        .states
        .par_iter()
        .zip(sp_traj.states.par_iter())
        .zip(scn.grid.times().par_iter())
        .map(|((rs, rsp), &t)| {
            let joint = rs.tensor(rsp)?;
            let report = full_report(&joint, &cut, cfg)?;
            Ok(TimeRecord {
                t,
                s_s: rs.entropy()?,
                s_sp: rsp.entropy()?,
                s_e: None,
                mutual_info: report.mutual_info,
                d_left: report.d_left,
                d_right: report.d_right,
                lazy_left: is_lazy(&joint, &cut.a)?.commutator_norm,
                lazy_right: is_lazy(&joint, &cut.b)?.commutator_norm,
                lii_total: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries { records })
}

/// Random qubit S and qubit S′: Hamiltonians with unit-scale entries, one or
/// two jumps with rates in [0.1, 1] and unit-Frobenius operators, full-rank
/// initial states, default time window.
pub fn random_markovian_scenario(seed: u64) -> Result<MarkovianScenario> {
    let mut rng = rng_from_seed(seed);
    let q = HilbertFactorization::qubits(1);
    let rho_s = DensityOperator::new(random_density(&mut rng, 2, 2), q.clone())?;
    let rho_sp = DensityOperator::new(random_density(&mut rng, 2, 2), q)?;
    let h_s = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 0, random_hermitian(&mut rng, 2))]);
    let h_sp = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 0, random_hermitian(&mut rng, 2))]);
    let n_jumps = rng.random_range(1..=2);
    let jumps = (0..n_jumps)
        .map(|_| {
            let op = ginibre(&mut rng, 2, 2);
            let norm = frobenius(&op);
            if norm == 0.0 {
                return Err(Error::InvalidInput("degenerate random jump operator".into()));
            }
            Ok(Jump::new(rng.random_range(0.1..=1.0), op / real(norm)))
        })
        .collect::<Result<Vec<_>>>()?;
    let lindblad = LindbladSpec::new(h_sp, jumps);
    let grid = MarkovianScenario::default_grid(&lindblad)?;
    Ok(MarkovianScenario { rho_s, rho_sp, h_s, lindblad, grid })
}
