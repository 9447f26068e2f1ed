//! Dense complex linear algebra shared by every module.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, I>(mats: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    let mut acc = CMatrix::from_element(1, 1, ONE);
    for m in mats {
        acc = acc.kronecker(m);
    }
    acc
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// max |A - A^dag| over entries.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * real(0.5)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Each eigenvector's phase is fixed so that its largest-modulus component is
/// real and positive, which makes the output reproducible across calls.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let pivot = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let phase = if v[pivot].norm() > 0.0 {
            v[pivot].conj() / v[pivot].norm()
        } else {
            ONE
        };
        for r in 0..n {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending. Closed forms for n <= 2.
pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    match a.nrows() {
        0 => Vec::new(),
        1 => vec![a[(0, 0)].re],
        2 => {
            let (l0, l1) = eigvals_2x2(a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
            vec![l0, l1]
        }
        _ => {
            let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        }
    }
}

/// Eigenvalues of [[a, b], [b*, d]], ascending.
#[inline]
pub fn eigvals_2x2(a: f64, d: f64, b: C64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - half, mean + half)
}

/// exp(-i t H) for Hermitian H, through its spectral decomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let defect = hermiticity_defect(h);
    if defect > 1e-12 {
        return Err(Error::NotHermitian(defect));
    }
    let (vals, vecs) = eigh(h);
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    Ok(&vecs * phases * vecs.adjoint())
}

/// Spectral norm bound used for step-size selection.
pub fn frobenius_bound(a: &CMatrix) -> f64 {
    frobenius(a)
}

/// Entropy in nats of a spectrum with every entry already in [0, 1].
pub fn shannon_nats<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a Hermitian PSD matrix with unit trace, clamping small
/// negative eigenvalues to zero. Used inside optimizers where the input is
/// known to be a renormalized conditional state.
pub fn entropy_clamped(a: &CMatrix) -> f64 {
    shannon_nats(eigvalsh(a).into_iter().map(|x| x.max(0.0)))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n)) < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigvals_2x2_match_general_solver() {
        let m = CMatrix::from_row_slice(2, 2, &[real(0.3), c(0.1, -0.2), c(0.1, 0.2), real(0.7)]);
        let closed = eigvalsh(&m);
        let mut general: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        general.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(closed[0], general[0], epsilon = 1e-14);
        assert_abs_diff_eq!(closed[1], general[1], epsilon = 1e-14);
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[real(2.0), c(0.5, 0.5), real(0.0), c(0.5, -0.5), real(1.0), c(0.0, 0.3), real(0.0), c(0.0, -0.3), real(-1.0)],
        );
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(3, vals.iter().map(|&x| real(x))));
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &m) < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian(_))));
    }
}
