use serde::{Deserialize, Serialize};

use super::{HamiltonianSpec, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, frobenius, hermitian_part, identity, kron, real, trace, CMatrix, CVector, C64};
use crate::matrix_json::serde_matrix;
use crate::state::{DensityOperator, HilbertFactorization};

/// Smallest eigenvalue tolerated at a grid point before the run is declared
/// an integrator failure.
pub const POSITIVITY_TOL: f64 = 1e-7;
/// Per-step bounds: γ_max·h and ‖L‖_F·h.
const RATE_STEP: f64 = 0.01;
const GENERATOR_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub rate: f64,
    #[serde(with = "serde_matrix")]
    pub op: CMatrix,
}

impl Jump {
    pub fn new(rate: f64, op: CMatrix) -> Self {
        Self { rate, op }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LindbladSpec {
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub jumps: Vec<Jump>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: HamiltonianSpec, jumps: Vec<Jump>) -> Self {
        Self { hamiltonian, jumps }
    }

    pub fn validate(&self, f: &HilbertFactorization) -> Result<()> {
        self.hamiltonian.validate(f)?;
        let d = f.total_dim();
        for j in &self.jumps {
            if !(j.rate.is_finite() && j.rate >= 0.0) {
                return Err(Error::InvalidInput(format!("jump rate {} must be finite and nonnegative", j.rate)));
            }
            if j.op.nrows() != d || j.op.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: j.op.nrows() });
            }
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).fold(0.0, f64::max)
    }
}

/// Superoperator acting on column-stacked vec(ρ), where vec(AXB) = (Bᵀ ⊗ A) vec(X).
pub fn generator(spec: &LindbladSpec, f: &HilbertFactorization) -> Result<CMatrix> {
    spec.validate(f)?;
    let d = f.total_dim();
    let id = identity(d);
    let h = spec.hamiltonian.assemble(f)?;
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (kron(&id, &h) - kron(&h.transpose(), &id)) * minus_i;
    for j in &spec.jumps {
        if j.rate == 0.0 {
            continue;
        }
        let ldl = j.op.adjoint() * &j.op;
        let dissipator = kron(&j.op.conjugate(), &j.op) - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * real(0.5);
        l += dissipator * real(j.rate);
    }
    Ok(l)
}

/// Fourth-order Taylor polynomial of exp(hL): one classical RK4 step for a
/// linear autonomous system.
pub fn rk4_step_matrix(l: &CMatrix, h: f64) -> CMatrix {
    let n = l.nrows();
    let hl = l * real(h);
    let mut term = identity(n);
    let mut p = identity(n);
    for k in 1..=4 {
        term = &term * &hl / real(k as f64);
        p += &term;
    }
    p
}

/// Largest allowed step for this generator: min(0.01/γ_max, 0.005/‖L‖_F).
pub fn step_size(spec: &LindbladSpec, l: &CMatrix) -> f64 {
    let mut h = f64::INFINITY;
    let rate = spec.max_rate();
    if rate > 0.0 {
        h = h.min(RATE_STEP / rate);
    }
    let norm = frobenius(l);
    if norm > 0.0 {
        h = h.min(GENERATOR_STEP / norm);
    }
    h
}

struct Stepper {
    l: CMatrix,
    h_max: f64,
    cached: Option<(usize, f64, CMatrix)>,
}

impl Stepper {
    fn new(spec: &LindbladSpec, f: &HilbertFactorization) -> Result<Self> {
        let l = generator(spec, f)?;
        let h_max = step_size(spec, &l);
        Ok(Self { l, h_max, cached: None })
    }

    /// Propagates `v` across an interval of length `dt` in equal RK4 steps.
    fn advance(&mut self, v: &CVector, dt: f64) -> CVector {
        if dt == 0.0 {
            return v.clone();
        }
        let n = if self.h_max.is_finite() { (dt / self.h_max).ceil().max(1.0) as usize } else { 1 };
        let h = dt / n as f64;
        let reuse = matches!(&self.cached, Some((m, hc, _)) if *m == n && (hc - h).abs() <= 1e-14 * h.max(1.0));
        if !reuse {
            self.cached = Some((n, h, rk4_step_matrix(&self.l, h)));
        }
        let p = &self.cached.as_ref().expect("step matrix cached").2;
        let mut out = v.clone();
        for _ in 0..n {
            out = p * out;
        }
        out
    }
}

fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// GKSL evolution sampled on `grid`, with ρ given at `grid.start()`.
/// Fails with [`Error::StepFailure`] if a sampled state has an eigenvalue
/// below −[`POSITIVITY_TOL`].
pub fn evolve_lindblad(rho: &DensityOperator, spec: &LindbladSpec, grid: &TimeGrid) -> Result<Trajectory<DensityOperator>> {
    let f = rho.factorization().clone();
    let d = rho.dim();
    let mut stepper = Stepper::new(spec, &f)?;
    let mut v = vec_of(rho.matrix());
    let mut prev = grid.start();
    let mut states = Vec::with_capacity(grid.len());
    for &t in grid.times() {
        v = stepper.advance(&v, t - prev);
        prev = t;
        let m = hermitian_part(&unvec(&v, d));
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized((tr - 1.0).abs()));
        }
        let min_eig = eigvalsh(&m).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::StepFailure { t, min_eigenvalue: min_eig });
        }
        states.push(DensityOperator::from_parts(m, f.clone()));
    }
    Ok(Trajectory { times: grid.times().to_vec(), states })
}

/// Superoperator of the integrated channel from 0 to `t`.
pub fn propagator(spec: &LindbladSpec, f: &HilbertFactorization, t: f64) -> Result<CMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!("propagation time {t} must be finite and nonnegative")));
    }
    let mut stepper = Stepper::new(spec, f)?;
    let n = f.total_dim() * f.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for col in 0..n {
        let e = crate::linalg::basis_vector(n, col);
        out.set_column(col, &stepper.advance(&e, t));
    }
    Ok(out)
}

/// C = Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|) for a column-stacked superoperator.
pub fn choi_matrix(superop: &CMatrix, d: usize) -> Result<CMatrix> {
    if superop.nrows() != d * d || superop.ncols() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: superop.nrows() });
    }
    Ok(CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        superop[(a + b * d, i + j * d)]
    }))
}

/// Kraus operators from the eigendecomposition of a Choi matrix, dropping
/// eigenvalues at or below 1e-12.
pub fn kraus_from_choi(choi: &CMatrix, d: usize) -> Result<Vec<CMatrix>> {
    if choi.nrows() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: choi.nrows() });
    }
    let (vals, vecs) = eigh(&hermitian_part(choi));
    if let Some(&neg) = vals.iter().find(|&&x| x < -POSITIVITY_TOL) {
        return Err(Error::NegativeEigenvalue(neg));
    }
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam > 1e-12)
        .map(|(k, &lam)| {
            let s = lam.sqrt();
            CMatrix::from_fn(d, d, |a, i| vecs[(i * d + a, k)] * s)
        })
        .collect())
}
