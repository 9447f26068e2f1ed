//! Mutual information, one-way classical correlations and quantum discord,
//! locally inaccessible information flow, laziness and C-classicality.
//!
//! Direction convention: `D_left` / `J_left` for a cut A|B are D←(A|B) and
//! J←(A|B), meaning the measurement is performed on B. Every function takes
//! the measured party as an explicit [`Side`].

mod measurement;
mod nelder_mead;

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use measurement::{MeasurementBasis, BASIS_TOL};
pub use nelder_mead::{Minimum, NelderMead};

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, eigvalsh, frobenius, CMatrix, C64, ZERO};
use crate::random::{derive_seed, haar_unitary, rng_from_seed};
use crate::state::{partial_trace, von_neumann_entropy, DensityOperator, HilbertFactorization};

use measurement::{bloch_angles, givens_param_count, givens_unitary, qubit_pair};

/// Discord below this counts as zero; the CC classification uses the same value.
pub const ZERO_DISCORD_TOL: f64 = 1e-7;
/// Mutual information below this counts as a product state.
pub const PRODUCT_MI_TOL: f64 = 1e-9;
/// Frobenius norm of a commutator below this counts as commuting.
pub const COMMUTATOR_TOL: f64 = 1e-9;
/// Measurement outcomes less likely than this are dropped from conditional sums.
pub const OUTCOME_FLOOR: f64 = 1e-14;
/// Largest measured-side dimension the optimizer accepts.
pub const MAX_MEASURED_DIM: usize = 16;

/// Which party of a bipartition is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Bipartition of tensor factors into parties A and B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Cut {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Self {
        Self { a, b }
    }

    /// Factor `k` against everything else.
    pub fn single(k: usize, n_factors: usize) -> Self {
        Self {
            a: vec![k],
            b: (0..n_factors).filter(|&j| j != k).collect(),
        }
    }

    /// First `k` factors against the rest.
    pub fn prefix(k: usize, n_factors: usize) -> Self {
        Self {
            a: (0..k).collect(),
            b: (k..n_factors).collect(),
        }
    }

    pub fn validate(&self, f: &HilbertFactorization) -> Result<()> {
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::InvalidSubsystem("both sides of a cut must be nonempty".into()));
        }
        let all: Vec<usize> = self.a.iter().chain(&self.b).copied().collect();
        f.check_indices(&all)?;
        if all.len() != f.len() {
            return Err(Error::InvalidSubsystem(format!(
                "cut covers {} of {} factors",
                all.len(),
                f.len()
            )));
        }
        Ok(())
    }

    fn party(&self, side: Side) -> &[usize] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

/// Optimizer settings for the measurement search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Master seed for every random restart.
    pub seed: u64,
    /// Bloch-angle grid side for qubit seeding.
    pub grid: usize,
    /// Haar-random restarts for measured dimensions 3..=16.
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { seed: 0, grid: 32, restarts: 20, tol: 1e-9, max_iter: 500 }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Joint state reshaped so that the measured party is the second factor.
#[derive(Debug, Clone)]
struct Measured {
    matrix: CMatrix,
    /// unmeasured dimension
    dk: usize,
    /// measured dimension
    dm: usize,
}

impl Measured {
    fn new(rho: &DensityOperator, cut: &Cut, measured: Side) -> Result<(Self, DensityOperator)> {
        cut.validate(rho.factorization())?;
        let kept = cut.party(measured.other()).to_vec();
        let meas = cut.party(measured).to_vec();
        let joint = rho.regroup_factors(&[kept, meas])?;
        let dims = joint.dims().to_vec();
        Ok((
            Self { matrix: joint.matrix().clone(), dk: dims[0], dm: dims[1] },
            joint,
        ))
    }

    /// Unnormalized conditional state ⟨b|ρ|b⟩ on the unmeasured party.
    fn conditional(&self, b: &[C64], out: &mut CMatrix) {
        let (dk, dm) = (self.dk, self.dm);
        for a in 0..dk {
            for a2 in a..dk {
                let mut acc = ZERO;
                for (beta, bb) in b.iter().enumerate() {
                    let row = a * dm + beta;
                    let mut inner = ZERO;
                    for (beta2, bb2) in b.iter().enumerate() {
                        inner += self.matrix[(row, a2 * dm + beta2)] * bb2;
                    }
                    acc += bb.conj() * inner;
                }
                out[(a, a2)] = acc;
                out[(a2, a)] = acc.conj();
            }
        }
    }

    /// Σᵢ pᵢ S(ρ_{k|i}) for the basis given as column vectors.
    fn conditional_entropy_of<'v, I>(&self, vectors: I) -> f64
    where
        I: IntoIterator<Item = &'v [C64]>,
    {
        let mut buf = CMatrix::zeros(self.dk, self.dk);
        let mut total = 0.0;
        for v in vectors {
            self.conditional(v, &mut buf);
            total += weighted_entropy(&buf);
        }
        total
    }

    fn objective_unitary(&self, u: &CMatrix) -> f64 {
        let cols: Vec<Vec<C64>> = (0..u.ncols()).map(|j| u.column(j).iter().copied().collect()).collect();
        self.conditional_entropy_of(cols.iter().map(|c| c.as_slice()))
    }

    fn objective_qubit(&self, theta: f64, phi: f64) -> f64 {
        let pair = qubit_pair(theta, phi);
        self.conditional_entropy_of(pair.iter().map(|v| v.as_slice()))
    }
}

/// p·S(σ/p) for an unnormalized PSD σ with p = tr σ; zero below the outcome floor.
fn weighted_entropy(sigma: &CMatrix) -> f64 {
    let p: f64 = sigma.diagonal().iter().map(|z| z.re).sum();
    if p < OUTCOME_FLOOR {
        return 0.0;
    }
    let s: f64 = eigvalsh(sigma)
        .into_iter()
        .map(|mu| mu / p)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum();
    p * s
}

fn marginal_entropy(rho: &DensityOperator, factors: &[usize]) -> Result<f64> {
    von_neumann_entropy(&partial_trace(rho, factors)?)
}

/// I(A:B) = S(A) + S(B) - S(A,B).
pub fn mutual_information(rho: &DensityOperator, cut: &Cut) -> Result<f64> {
    cut.validate(rho.factorization())?;
    Ok(marginal_entropy(rho, &cut.a)? + marginal_entropy(rho, &cut.b)? - von_neumann_entropy(rho)?)
}

/// Σᵢ pᵢ S(ρ_{A|i}) for a measurement on the `measured` side of `cut`.
pub fn conditional_entropy(rho: &DensityOperator, cut: &Cut, measured: Side, basis: &MeasurementBasis) -> Result<f64> {
    let (m, _) = Measured::new(rho, cut, measured)?;
    if basis.dim() != m.dm {
        return Err(Error::DimensionMismatch { expected: m.dm, found: basis.dim() });
    }
    let cols: Vec<Vec<C64>> = basis.vectors().iter().map(|v| v.iter().copied().collect()).collect();
    Ok(m.conditional_entropy_of(cols.iter().map(|c| c.as_slice())))
}

/// Result of the measurement optimization.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalCorrelation {
    /// J = S(unmeasured) - min conditional entropy.
    pub value: f64,
    pub basis: MeasurementBasis,
    pub conditional_entropy: f64,
    pub evaluations: usize,
}

/// Keeps the best point seen across every objective evaluation.
struct Tracker<P> {
    best: RefCell<Option<(f64, P)>>,
    evals: RefCell<usize>,
}

impl<P: Clone> Tracker<P> {
    fn new() -> Self {
        Self { best: RefCell::new(None), evals: RefCell::new(0) }
    }

    fn record(&self, f: f64, p: impl FnOnce() -> P) -> f64 {
        *self.evals.borrow_mut() += 1;
        let mut best = self.best.borrow_mut();
        if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
            *best = Some((f, p()));
        }
        f
    }

    fn into_best(self) -> (f64, P, usize) {
        let (f, p) = self.best.into_inner().expect("at least one evaluation");
        (f, p, self.evals.into_inner())
    }
}

fn marginal_eigenbasis(joint: &DensityOperator) -> Result<CMatrix> {
    let m = partial_trace(joint, &[1])?;
    Ok(linalg::eigh(m.matrix()).1)
}

fn optimize_qubit(m: &Measured, joint: &DensityOperator, cfg: &OptimizerConfig) -> Result<(f64, MeasurementBasis, usize)> {
    let tracker: Tracker<(f64, f64)> = Tracker::new();
    let g = cfg.grid.max(2);
    let dtheta = std::f64::consts::PI / (g - 1) as f64;
    let dphi = 2.0 * std::f64::consts::PI / g as f64;
    for i in 0..g {
        for j in 0..g {
            let (t, p) = (i as f64 * dtheta, j as f64 * dphi);
            tracker.record(m.objective_qubit(t, p), || (t, p));
        }
    }
    let grid_best = tracker.best.borrow().as_ref().map(|(_, p)| *p).expect("grid nonempty");
    let eig = marginal_eigenbasis(joint)?;
    let eig_start = bloch_angles(&eig.column(0).into_owned());

    let nm = NelderMead { tol: cfg.tol, max_iter: cfg.max_iter };
    for start in [grid_best, eig_start] {
        let mut x = vec![start.0, start.1];
        let mut step = [dtheta, dphi];
        // one restart from the converged point shakes off a collapsed simplex
        for _ in 0..2 {
            let res = nm.minimize(
                |x| tracker.record(m.objective_qubit(x[0], x[1]), || (x[0], x[1])),
                &x,
                &step,
            );
            x = res.x;
            step = [0.25 * step[0], 0.25 * step[1]];
        }
    }
    let (f, (t, p), evals) = tracker.into_best();
    Ok((f, MeasurementBasis::qubit(t, p), evals))
}

fn optimize_general(m: &Measured, joint: &DensityOperator, cfg: &OptimizerConfig) -> Result<(f64, MeasurementBasis, usize)> {
    let d = m.dm;
    let mut seeds = vec![marginal_eigenbasis(joint)?, linalg::identity(d)];
    for r in 0..cfg.restarts {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, r as u64));
        seeds.push(haar_unitary(&mut rng, d));
    }
    let n = givens_param_count(d);
    let nm = NelderMead {
        tol: cfg.tol,
        max_iter: cfg.max_iter.max(150 * n),
    };
    let results: Vec<(f64, CMatrix, usize)> = seeds
        .par_iter()
        .map(|seed| {
            let tracker: Tracker<Vec<f64>> = Tracker::new();
            let mut x = vec![0.0; n];
            let mut step = 0.3;
            for _ in 0..2 {
                let res = nm.minimize(
                    |x| tracker.record(m.objective_unitary(&givens_unitary(seed, x)), || x.to_vec()),
                    &x,
                    &vec![step; n],
                );
                x = res.x;
                step *= 0.25;
            }
            let (f, params, evals) = tracker.into_best();
            (f, givens_unitary(seed, &params), evals)
        })
        .collect();
    let evals = results.iter().map(|r| r.2).sum();
    // first minimum in seed order, independent of completion order
    let best = results
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least two seeds");
    Ok((best.0, MeasurementBasis::from_unitary_unchecked(&best.1), evals))
}

/// J for a measurement on the `measured` side, optimized over rank-1
/// projective measurements.
pub fn classical_correlations(
    rho: &DensityOperator,
    cut: &Cut,
    measured: Side,
    cfg: &OptimizerConfig,
) -> Result<ClassicalCorrelation> {
    let (m, joint) = Measured::new(rho, cut, measured)?;
    if m.dm > MAX_MEASURED_DIM {
        return Err(Error::OptimizerCap(m.dm));
    }
    let s_kept = von_neumann_entropy(&partial_trace(&joint, &[0])?)?;
    let (cond, basis, evaluations) = if m.dm == 2 {
        optimize_qubit(&m, &joint, cfg)?
    } else {
        optimize_general(&m, &joint, cfg)?
    };
    Ok(ClassicalCorrelation {
        value: s_kept - cond,
        basis,
        conditional_entropy: cond,
        evaluations,
    })
}

/// D = I - J for a measurement on the `measured` side.
pub fn discord(rho: &DensityOperator, cut: &Cut, measured: Side, cfg: &OptimizerConfig) -> Result<f64> {
    let i = mutual_information(rho, cut)?;
    Ok(i - classical_correlations(rho, cut, measured, cfg)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "CC")]
    ClassicalClassical,
    /// D←(A|B) = 0 only.
    #[serde(rename = "one-way-classical-left")]
    OneWayClassicalLeft,
    #[serde(rename = "one-way-classical-right")]
    OneWayClassicalRight,
    #[serde(rename = "discordant")]
    Discordant,
}

impl Classification {
    pub fn classify(mutual_info: f64, d_left: f64, d_right: f64) -> Self {
        let left = d_left < ZERO_DISCORD_TOL;
        let right = d_right < ZERO_DISCORD_TOL;
        match (left, right) {
            (true, true) if mutual_info < PRODUCT_MI_TOL => Self::Product,
            (true, true) => Self::ClassicalClassical,
            (true, false) => Self::OneWayClassicalLeft,
            (false, true) => Self::OneWayClassicalRight,
            (false, false) => Self::Discordant,
        }
    }

    /// Zero two-way discord (product states included).
    pub fn is_classical(self) -> bool {
        matches!(self, Self::Product | Self::ClassicalClassical)
    }
}

/// Both one-way discords of a bipartition with their optimal measurements.
#[derive(Debug, Clone, Serialize)]
pub struct DiscordReport {
    pub mutual_info: f64,
    #[serde(rename = "J_left")]
    pub j_left: f64,
    #[serde(rename = "J_right")]
    pub j_right: f64,
    #[serde(rename = "D_left")]
    pub d_left: f64,
    #[serde(rename = "D_right")]
    pub d_right: f64,
    /// Measurement on B achieving J_left; columns are the basis vectors.
    pub optimal_basis_left: MeasurementBasis,
    /// Measurement on A achieving J_right.
    pub optimal_basis_right: MeasurementBasis,
    pub classification: Classification,
    pub seed: u64,
}

pub fn full_report(rho: &DensityOperator, cut: &Cut, cfg: &OptimizerConfig) -> Result<DiscordReport> {
    let mutual_info = mutual_information(rho, cut)?;
    let left = classical_correlations(rho, cut, Side::B, cfg)?;
    let right = classical_correlations(rho, cut, Side::A, cfg)?;
    let d_left = mutual_info - left.value;
    let d_right = mutual_info - right.value;
    Ok(DiscordReport {
        mutual_info,
        j_left: left.value,
        j_right: right.value,
        d_left,
        d_right,
        optimal_basis_left: left.basis,
        optimal_basis_right: right.basis,
        classification: Classification::classify(mutual_info, d_left, d_right),
        seed: cfg.seed,
    })
}

/// Exhaustive Bloch-grid search over qubit measurements.
#[derive(Debug, Clone, Copy)]
pub struct GridOracle {
    pub discord: f64,
    pub classical: f64,
    pub conditional_entropy: f64,
}

/// Brute-force qubit discord on a `grid_n` × `grid_n` (θ, φ) grid with
/// θ ∈ [0, π] and φ ∈ [0, π); the antipodal direction gives the same
/// projective measurement, so the other half of the sphere adds nothing.
///
/// Conditional states are formed as tr_B[(I ⊗ Π)ρ] with explicit projector
/// matrices, independently of the optimizer's vector contraction.
pub fn grid_oracle_qubit(rho: &DensityOperator, cut: &Cut, measured: Side, grid_n: usize) -> Result<GridOracle> {
    cut.validate(rho.factorization())?;
    let kept = cut.party(measured.other()).to_vec();
    let meas = cut.party(measured).to_vec();
    let joint = rho.regroup_factors(&[kept, meas])?;
    let (dk, dm) = (joint.dims()[0], joint.dims()[1]);
    if dm != 2 {
        return Err(Error::InvalidSubsystem(format!("grid oracle needs a measured qubit, got dimension {dm}")));
    }
    let g = grid_n.max(2);
    let mat = joint.matrix();
    let mut best = f64::INFINITY;
    let mut sigma = CMatrix::zeros(dk, dk);
    for i in 0..g {
        let theta = std::f64::consts::PI * i as f64 / (g - 1) as f64;
        for j in 0..g {
            let phi = std::f64::consts::PI * j as f64 / g as f64;
            let mut total = 0.0;
            for proj in MeasurementBasis::qubit(theta, phi).projectors() {
                // tr_B[(I⊗Π)ρ]_{a,a'} = Σ_{β,β'} Π_{β',β} ρ_{(a,β),(a',β')}
                for a in 0..dk {
                    for a2 in 0..dk {
                        let mut acc = ZERO;
                        for beta in 0..2 {
                            for beta2 in 0..2 {
                                acc += proj[(beta2, beta)] * mat[(a * 2 + beta, a2 * 2 + beta2)];
                            }
                        }
                        sigma[(a, a2)] = acc;
                    }
                }
                let p: f64 = sigma.diagonal().iter().map(|z| z.re).sum();
                if p >= OUTCOME_FLOOR {
                    let s = linalg::entropy_clamped(&linalg::hermitian_part(&(&sigma / C64::new(p, 0.0))));
                    total += p * s;
                }
            }
            best = best.min(total);
        }
    }
    let s_kept = von_neumann_entropy(&partial_trace(&joint, &[0])?)?;
    let mi = mutual_information(rho, cut)?;
    let classical = s_kept - best;
    Ok(GridOracle { discord: mi - classical, classical, conditional_entropy: best })
}

/// Grid-oracle discord; an upper bound on the true discord.
pub fn discord_oracle_qubit(rho: &DensityOperator, cut: &Cut, measured: Side, grid_n: usize) -> Result<f64> {
    Ok(grid_oracle_qubit(rho, cut, measured, grid_n)?.discord)
}

/// Locally inaccessible information for a tripartite state (factors 0, 1, 2
/// read as S, S', E).
#[derive(Debug, Clone, Serialize)]
pub struct LiiFlow {
    /// D(S'|S) + D(E|S') + D(S|E), second argument measured.
    pub total: f64,
    pub terms: [f64; 3],
    /// D(S|S') + D(S'|E) + D(E|S): the opposite measurement in each pair.
    pub reverse_total: f64,
    pub reverse_terms: [f64; 3],
}

/// D(X|Y) with Y measured, on the two-factor marginal.
fn pair_discord(rho: &DensityOperator, x: usize, y: usize, cfg: &OptimizerConfig) -> Result<f64> {
    let mut keep = [x, y];
    keep.sort_unstable();
    let pair = partial_trace(rho, &keep)?;
    // after the trace the smaller index is factor 0
    let (px, py) = if x < y { (0, 1) } else { (1, 0) };
    discord(&pair, &Cut::new(vec![px], vec![py]), Side::B, cfg)
}

pub fn lii_flow(rho: &DensityOperator, cfg: &OptimizerConfig) -> Result<LiiFlow> {
    if rho.dims().len() != 3 {
        return Err(Error::InvalidSubsystem(format!(
            "LII flow needs exactly three parties, got {}",
            rho.dims().len()
        )));
    }
    let pairs = [(1, 0), (2, 1), (0, 2)];
    let terms: Vec<f64> = pairs
        .iter()
        .map(|&(x, y)| pair_discord(rho, x, y, cfg))
        .collect::<Result<_>>()?;
    let reverse: Vec<f64> = pairs
        .iter()
        .map(|&(x, y)| pair_discord(rho, y, x, cfg))
        .collect::<Result<_>>()?;
    Ok(LiiFlow {
        total: terms.iter().sum(),
        terms: [terms[0], terms[1], terms[2]],
        reverse_total: reverse.iter().sum(),
        reverse_terms: [reverse[0], reverse[1], reverse[2]],
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorCheck {
    pub holds: bool,
    pub commutator_norm: f64,
}

impl CommutatorCheck {
    fn from_norm(norm: f64) -> Self {
        Self { holds: norm < COMMUTATOR_TOL, commutator_norm: norm }
    }
}

/// Laziness: [ρ_G ⊗ I, ρ] = 0 for the factor group G.
pub fn is_lazy(rho: &DensityOperator, group: &[usize]) -> Result<CommutatorCheck> {
    let n = rho.dims().len();
    if group.is_empty() || group.len() >= n {
        return Err(Error::InvalidSubsystem("laziness needs a strict nonempty factor group".into()));
    }
    rho.factorization().check_indices(group)?;
    let rest: Vec<usize> = (0..n).filter(|k| !group.contains(k)).collect();
    let joint = rho.regroup_factors(&[group.to_vec(), rest])?;
    let marginal = partial_trace(&joint, &[0])?;
    let extended = linalg::kron(marginal.matrix(), &linalg::identity(joint.dims()[1]));
    Ok(CommutatorCheck::from_norm(frobenius(&commutator(&extended, joint.matrix()))))
}

fn c_criterion(rho_a: &CMatrix, conditioned: &CMatrix, p0: f64) -> Result<CommutatorCheck> {
    if p0 <= 1e-12 {
        return Err(Error::ZeroProbability(p0));
    }
    let circ = conditioned / C64::new(p0, 0.0);
    Ok(CommutatorCheck::from_norm(frobenius(&commutator(rho_a, &circ))))
}

/// C-criterion for the product ρ_A ⊗ ρ_B: [ρ_A, ρ∘] = 0 where
/// ρ∘ = tr_B(ρ_A ⊗ ρ_B · I ⊗ |0⟩⟨0|), normalized.
pub fn c_classicality_check(rho_a: &DensityOperator, rho_b: &DensityOperator) -> Result<CommutatorCheck> {
    let joint = rho_a.tensor(rho_b)?;
    let na = rho_a.dims().len();
    let nb = rho_b.dims().len();
    c_classicality_check_joint(&joint, &Cut::new((0..na).collect(), (na..na + nb).collect()))
}

/// C-criterion on an arbitrary joint state, conditioning B on its |0⟩.
pub fn c_classicality_check_joint(rho: &DensityOperator, cut: &Cut) -> Result<CommutatorCheck> {
    let (m, joint) = Measured::new(rho, cut, Side::B)?;
    let rho_a = partial_trace(&joint, &[0])?;
    let zero = linalg::basis_vector(m.dm, 0);
    let zero: Vec<C64> = zero.iter().copied().collect();
    let mut conditioned = CMatrix::zeros(m.dk, m.dk);
    m.conditional(&zero, &mut conditioned);
    let p0 = conditioned.diagonal().iter().map(|z| z.re).sum();
    c_criterion(rho_a.matrix(), &conditioned, p0)
}

#[cfg(test)]
mod tests;
