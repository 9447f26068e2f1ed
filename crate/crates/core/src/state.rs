//! Multipartite states: tensor factorizations, pure states and density
//! operators, plus the tensor algebra and spectral tools on top of them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermiticity_defect, kron, kron_vec, outer, real, trace, CMatrix, CVector, C64, ONE, ZERO,
};

/// Dense matrices above this dimension are rejected.
pub const MAX_TOTAL_DIM: usize = 4096;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues in [-EIGEN_CLAMP, 0] are treated as zero; anything lower is an error.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Ordered tensor-factor dimensions of a Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct HilbertFactorization {
    dims: Vec<usize>,
}

impl HilbertFactorization {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidFactorization("no factors".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidFactorization(format!("factor dimension {d} < 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total.checked_mul(d).filter(|&t| t <= MAX_TOTAL_DIM).ok_or(Error::TooLarge(
                dims.iter().fold(1usize, |a, &b| a.saturating_mul(b)),
            ))?;
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit register within cap")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Validate an ordered list of distinct factor indices.
    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &i in indices {
            if i >= self.dims.len() {
                return Err(Error::InvalidSubsystem(format!(
                    "factor index {i} out of range for {} factors",
                    self.dims.len()
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidSubsystem(format!("factor index {i} repeated")));
            }
        }
        Ok(())
    }

    /// For a permutation `order` of the factors, the table mapping each index
    /// of the permuted space to the index of the original space.
    pub(crate) fn permutation_table(&self, order: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let total = self.total_dim();
        let mut table = Vec::with_capacity(total);
        let mut digits = vec![0usize; order.len()];
        for _ in 0..total {
            table.push(digits.iter().zip(order).map(|(&d, &k)| d * strides[k]).sum());
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < new_dims[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        table
    }
}

impl TryFrom<Vec<usize>> for HilbertFactorization {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<HilbertFactorization> for Vec<usize> {
    fn from(f: HilbertFactorization) -> Self {
        f.dims
    }
}

/// Normalized state vector on a factorized space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    factorization: HilbertFactorization,
}

impl PureState {
    pub fn new(amplitudes: CVector, factorization: HilbertFactorization) -> Result<Self> {
        if amplitudes.len() != factorization.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: factorization.total_dim(),
                found: amplitudes.len(),
            });
        }
        let defect = (amplitudes.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NotNormalized(defect));
        }
        Ok(Self { amplitudes, factorization })
    }

    /// Normalizes `amplitudes` first.
    pub fn normalized(amplitudes: CVector, factorization: HilbertFactorization) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(1.0));
        }
        Self::new(amplitudes / real(n), factorization)
    }

    pub fn basis(factorization: HilbertFactorization, index: usize) -> Result<Self> {
        let dim = factorization.total_dim();
        if index >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} >= {dim}")));
        }
        Self::new(linalg::basis_vector(dim, index), factorization)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn factorization(&self) -> &HilbertFactorization {
        &self.factorization
    }

    pub fn dims(&self) -> &[usize] {
        self.factorization.dims()
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_parts(outer(&self.amplitudes, &self.amplitudes), self.factorization.clone())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let f = self.factorization.concat(&other.factorization)?;
        Ok(Self {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            factorization: f,
        })
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Reorder factors and merge consecutive runs of them.
    pub fn regroup_factors(&self, groups: &[Vec<usize>]) -> Result<PureState> {
        let (order, new_f) = grouping_layout(&self.factorization, groups)?;
        let table = self.factorization.permutation_table(&order);
        let amplitudes = CVector::from_iterator(table.len(), table.iter().map(|&i| self.amplitudes[i]));
        Ok(Self { amplitudes, factorization: new_f })
    }

    pub(crate) fn from_parts(amplitudes: CVector, factorization: HilbertFactorization) -> Self {
        Self { amplitudes, factorization }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on a factorized space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    factorization: HilbertFactorization,
}

impl DensityOperator {
    /// Validating constructor: Hermiticity, unit trace and the eigenvalue floor.
    pub fn new(matrix: CMatrix, factorization: HilbertFactorization) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != factorization.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: factorization.total_dim(),
                found: matrix.nrows(),
            });
        }
        let report = validate_matrix(&matrix);
        if report.hermiticity_defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(report.hermiticity_defect));
        }
        if report.trace_defect > TRACE_TOL {
            return Err(Error::NotNormalized(report.trace_defect));
        }
        if report.min_eigenvalue < -EIGEN_CLAMP {
            return Err(Error::NegativeEigenvalue(report.min_eigenvalue));
        }
        Ok(Self { matrix, factorization })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.to_density()
    }

    pub fn maximally_mixed(factorization: HilbertFactorization) -> Self {
        let d = factorization.total_dim();
        Self::from_parts(linalg::identity(d) * real(1.0 / d as f64), factorization)
    }

    pub fn diagonal(probs: &[f64], factorization: HilbertFactorization) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(probs.len(), probs.iter().map(|&p| real(p))));
        Self::new(m, factorization)
    }

    pub(crate) fn from_parts(matrix: CMatrix, factorization: HilbertFactorization) -> Self {
        debug_assert_eq!(matrix.nrows(), factorization.total_dim());
        Self { matrix, factorization }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn factorization(&self) -> &HilbertFactorization {
        &self.factorization
    }

    pub fn dims(&self) -> &[usize] {
        self.factorization.dims()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Spectrum, ascending, with clamp-window values set to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        clamp_spectrum(linalg::eigvalsh(&self.matrix))
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() < tol
    }

    /// U ρ U† for a unitary on the full space.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = u * &self.matrix * u.adjoint();
        Ok(Self::from_parts(linalg::hermitian_part(&m), self.factorization.clone()))
    }

    /// Reorder factors and merge each group into one factor.
    ///
    /// `groups` must be a partition of the factor indices; factor order within
    /// and across groups follows the order given.
    pub fn regroup_factors(&self, groups: &[Vec<usize>]) -> Result<DensityOperator> {
        let (order, new_f) = grouping_layout(&self.factorization, groups)?;
        let table = self.factorization.permutation_table(&order);
        let n = table.len();
        let matrix = CMatrix::from_fn(n, n, |i, j| self.matrix[(table[i], table[j])]);
        Ok(Self { matrix, factorization: new_f })
    }

    /// Split factor dims back out (inverse of a merge without reordering).
    pub fn refactor(&self, factorization: HilbertFactorization) -> Result<DensityOperator> {
        if factorization.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: factorization.total_dim(),
            });
        }
        Ok(Self::from_parts(self.matrix.clone(), factorization))
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        tensor_product(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        partial_trace(self, keep)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }
}

/// Validate that `groups` partitions the factors; return the flat order and
/// the merged factorization.
fn grouping_layout(f: &HilbertFactorization, groups: &[Vec<usize>]) -> Result<(Vec<usize>, HilbertFactorization)> {
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidSubsystem("empty group".into()));
    }
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    f.check_indices(&order)?;
    if order.len() != f.len() {
        return Err(Error::InvalidSubsystem(format!(
            "groups cover {} of {} factors",
            order.len(),
            f.len()
        )));
    }
    let dims = groups
        .iter()
        .map(|g| g.iter().map(|&k| f.dims()[k]).product())
        .collect();
    Ok((order, HilbertFactorization::new(dims)?))
}

fn clamp_spectrum(mut values: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(&min) = values.first() {
        if min < -EIGEN_CLAMP {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

/// ρ_a ⊗ ρ_b with concatenated factorization.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let f = a.factorization.concat(&b.factorization)?;
    Ok(DensityOperator::from_parts(kron(&a.matrix, &b.matrix), f))
}

/// Trace out every factor not listed in `keep`. Kept factors stay in their
/// original order regardless of the order of `keep`.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("keep set is empty".into()));
    }
    let f = &rho.factorization;
    f.check_indices(keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..f.len()).filter(|k| !kept.contains(k)).collect();
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let dk: usize = kept.iter().map(|&k| f.dims()[k]).product();
    let dt: usize = traced.iter().map(|&k| f.dims()[k]).product();
    // kept-major order: index = k * dt + t
    let mut order = kept.clone();
    order.extend_from_slice(&traced);
    let table = f.permutation_table(&order);
    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in i..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += rho.matrix[(table[i * dt + t], table[j * dt + t])];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
    }
    let dims = kept.iter().map(|&k| f.dims()[k]).collect();
    Ok(DensityOperator::from_parts(out, HilbertFactorization::new(dims)?))
}

/// S(ρ) = -tr ρ ln ρ in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(linalg::shannon_nats(rho.spectrum()?))
}

/// Purification onto the original factors plus one ancilla of dimension
/// rank(ρ) (at least 2).
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    let (vals, vecs) = linalg::eigh(&rho.matrix);
    let vals = clamp_spectrum(vals)?;
    // descending, drop numerically-null weight
    let mut support: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-14).collect();
    support.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let anc = support.len().max(2);
    let d = rho.dim();
    let mut psi = CVector::zeros(d * anc);
    for (slot, &k) in support.iter().enumerate() {
        let w = vals[k].sqrt();
        for i in 0..d {
            psi[i * anc + slot] += vecs[(i, k)] * real(w);
        }
    }
    let n = psi.norm();
    psi /= real(n);
    let f = rho.factorization.concat(&HilbertFactorization::new(vec![anc])?)?;
    PureState::new(psi, f)
}

/// exp(-i t H) with ħ = 1.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    linalg::expm_hermitian(h, t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermitian_ok: bool,
    pub trace_ok: bool,
    pub psd_ok: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.trace_ok && self.psd_ok
    }
}

fn validate_matrix(m: &CMatrix) -> ValidationReport {
    let hermiticity_defect = hermiticity_defect(m);
    let tr = trace(m);
    let trace_defect = (tr - ONE).norm();
    let min_eigenvalue = linalg::eigvalsh(m).first().copied().unwrap_or(0.0);
    ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermitian_ok: hermiticity_defect <= HERMITIAN_TOL,
        trace_ok: trace_defect <= TRACE_TOL,
        psd_ok: min_eigenvalue >= -EIGEN_CLAMP,
    }
}

/// Report Hermiticity, trace and positivity defects of an arbitrary square
/// matrix without rejecting it.
pub fn validate_density(matrix: &CMatrix) -> ValidationReport {
    validate_matrix(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use approx::assert_abs_diff_eq;

    fn qubit(m: [[f64; 2]; 2]) -> DensityOperator {
        DensityOperator::new(
            CMatrix::from_row_slice(2, 2, &[real(m[0][0]), real(m[0][1]), real(m[1][0]), real(m[1][1])]),
            HilbertFactorization::qubits(1),
        )
        .unwrap()
    }

    fn bell() -> PureState {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(
            CVector::from_vec(vec![real(s), ZERO, ZERO, real(s)]),
            HilbertFactorization::qubits(2),
        )
        .unwrap()
    }

    #[test]
    fn factorization_rejects_bad_dims() {
        assert!(HilbertFactorization::new(vec![]).is_err());
        assert!(HilbertFactorization::new(vec![2, 1]).is_err());
        assert!(matches!(HilbertFactorization::new(vec![64, 65]), Err(Error::TooLarge(_))));
        assert_eq!(HilbertFactorization::new(vec![2, 3, 4]).unwrap().total_dim(), 24);
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let half = DensityOperator::maximally_mixed(HilbertFactorization::qubits(1));
        let t = tensor_product(&half, &half).unwrap();
        assert_eq!(t.dims(), &[2, 2]);
        assert!(max_abs_diff(t.matrix(), &(linalg::identity(4) * real(0.25))) < 1e-15);
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = qubit([[1.0, 0.0], [0.0, 0.0]]);
        let o = qubit([[0.0, 0.0], [0.0, 1.0]]);
        let t = tensor_product(&z, &o).unwrap();
        let expected = PureState::basis(HilbertFactorization::qubits(2), 1).unwrap().to_density();
        assert_eq!(t.matrix(), expected.matrix());
    }

    #[test]
    fn tensor_diagonal_is_outer_product_of_diagonals() {
        let a = qubit([[0.7, 0.0], [0.0, 0.3]]);
        let b = qubit([[0.6, 0.1], [0.1, 0.4]]);
        let t = tensor_product(&a, &b).unwrap();
        let (da, db) = ([0.7, 0.3], [0.6, 0.4]);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(t.matrix()[(2 * i + j, 2 * i + j)].re, da[i] * db[j], epsilon = 1e-15);
            }
        }
        let tr = trace(t.matrix()).re;
        assert_abs_diff_eq!(tr, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().to_density();
        for k in 0..2 {
            let m = partial_trace(&rho, &[k]).unwrap();
            assert!(max_abs_diff(m.matrix(), &(linalg::identity(2) * real(0.5))) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell().to_density();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::InvalidSubsystem(_))));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidSubsystem(_))));
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let a = qubit([[0.9, 0.0], [0.0, 0.1]]);
        let b = DensityOperator::diagonal(&[0.5, 0.3, 0.2], HilbertFactorization::new(vec![3]).unwrap()).unwrap();
        let c_ = qubit([[0.2, 0.0], [0.0, 0.8]]);
        let abc = tensor_product(&tensor_product(&a, &b).unwrap(), &c_).unwrap();
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        assert!(max_abs_diff(ac.matrix(), tensor_product(&a, &c_).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let half = DensityOperator::maximally_mixed(HilbertFactorization::qubits(1));
        assert_abs_diff_eq!(von_neumann_entropy(&half).unwrap(), 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(von_neumann_entropy(&bell().to_density()).unwrap(), 0.0, epsilon = 1e-12);
        // direct eigenvalue-sum oracle
        let p = [0.96, 0.01, 0.01, 0.01, 0.01];
        let oracle: f64 = p.iter().map(|&x: &f64| -x * x.ln()).sum();
        let rho = DensityOperator::diagonal(&p, HilbertFactorization::new(vec![5]).unwrap()).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho).unwrap(), oracle, epsilon = 1e-13);
        assert_abs_diff_eq!(oracle, 0.22340, epsilon = 5e-6);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.1), real(-0.1)]));
        let rho = DensityOperator::from_parts(m, HilbertFactorization::qubits(1));
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::NegativeEigenvalue(_))));
    }

    #[test]
    fn purify_examples() {
        let half = DensityOperator::maximally_mixed(HilbertFactorization::qubits(1));
        let psi = purify(&half).unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        let s = 1.0 / 2f64.sqrt();
        let expected = [s, 0.0, 0.0, s];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-14);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-14);
        }

        let rho = qubit([[0.7, 0.0], [0.0, 0.3]]);
        let psi = purify(&rho).unwrap();
        let expected = [0.7f64.sqrt(), 0.0, 0.0, 0.3f64.sqrt()];
        for (a, e) in psi.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.norm(), e, epsilon = 1e-14);
        }
        let back = partial_trace(&psi.to_density(), &[0]).unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn purify_rank_one_uses_two_dim_ancilla() {
        let plus = PureState::normalized(CVector::from_vec(vec![ONE, c(0.0, 1.0)]), HilbertFactorization::qubits(1)).unwrap();
        let psi = purify(&plus.to_density()).unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        let anc = partial_trace(&psi.to_density(), &[1]).unwrap();
        assert_abs_diff_eq!(anc.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn propagator_examples() {
        let zero = CMatrix::zeros(3, 3);
        assert!(max_abs_diff(&unitary_propagator(&zero, 2.5).unwrap(), &linalg::identity(3)) < 1e-15);
        let sz = crate::operators::pauli_z();
        let u = unitary_propagator(&sz, std::f64::consts::FRAC_PI_2).unwrap();
        // closed-form diagonal exponential
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, -1.0), c(0.0, 1.0)]));
        assert!(max_abs_diff(&u, &expected) < 1e-15);
    }

    #[test]
    fn validation_reports() {
        let ok = validate_density(&(linalg::identity(2) * real(0.5)));
        assert!(ok.passed());
        let bad_trace = validate_density(&(linalg::identity(2) * real(0.75)));
        assert!(!bad_trace.passed());
        assert_abs_diff_eq!(bad_trace.trace_defect, 0.5, epsilon = 1e-15);
        let neg = validate_density(&CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.1), real(-0.1)])));
        assert!(!neg.psd_ok && neg.trace_ok);
        assert_abs_diff_eq!(neg.min_eigenvalue, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn regroup_preserves_spectrum_and_roundtrips() {
        let mut rng = crate::random::rng_from_seed(11);
        let f = HilbertFactorization::new(vec![2, 3, 2]).unwrap();
        let rho = DensityOperator::new(crate::random::random_density(&mut rng, 12, 3), f.clone()).unwrap();
        let g = rho.regroup_factors(&[vec![2], vec![0, 1]]).unwrap();
        assert_eq!(g.dims(), &[2, 6]);
        let s0 = rho.spectrum().unwrap();
        let s1 = g.spectrum().unwrap();
        for (a, b) in s0.iter().zip(&s1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        // split and undo the permutation
        let split = g.refactor(HilbertFactorization::new(vec![2, 2, 3]).unwrap()).unwrap();
        let back = split.regroup_factors(&[vec![1], vec![2], vec![0]]).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }
}
