use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, max_abs_diff, outer, CMatrix, CVector, C64};

/// Completeness and orthogonality tolerance.
pub const BASIS_TOL: f64 = 1e-10;

/// Rank-1 orthogonal projective measurement on one side of a bipartition,
/// stored as the orthonormal vectors the projectors project onto.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<CVector>,
}

impl MeasurementBasis {
    /// Columns of a unitary.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidInput("basis matrix is not square".into()));
        }
        let basis = Self {
            vectors: (0..u.ncols()).map(|j| u.column(j).into_owned()).collect(),
        };
        basis.check()?;
        Ok(basis)
    }

    pub(crate) fn from_unitary_unchecked(u: &CMatrix) -> Self {
        Self {
            vectors: (0..u.ncols()).map(|j| u.column(j).into_owned()).collect(),
        }
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_unitary_unchecked(&linalg::identity(dim))
    }

    /// Qubit basis {|n>, |n⊥>} with |n> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let [n, m] = qubit_pair(theta, phi);
        Self {
            vectors: vec![
                CVector::from_vec(n.to_vec()),
                CVector::from_vec(m.to_vec()),
            ],
        }
    }

    /// Build from explicit rank-1 projectors, checking ΣΠ = I and ΠᵢΠⱼ = δᵢⱼΠᵢ.
    pub fn from_projectors(projectors: &[CMatrix]) -> Result<Self> {
        let dim = projectors
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| Error::InvalidInput("no projectors".into()))?;
        if projectors.len() != dim {
            return Err(Error::InvalidInput(format!(
                "{} rank-1 projectors cannot resolve dimension {dim}",
                projectors.len()
            )));
        }
        let mut vectors = Vec::with_capacity(dim);
        for p in projectors {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.nrows() });
            }
            let (vals, vecs) = linalg::eigh(p);
            if (vals[dim - 1] - 1.0).abs() > BASIS_TOL || vals[..dim - 1].iter().any(|v| v.abs() > BASIS_TOL) {
                return Err(Error::InvalidInput("projector is not rank one".into()));
            }
            vectors.push(vecs.column(dim - 1).into_owned());
        }
        let basis = Self { vectors };
        basis.check()?;
        for (p, q) in projectors.iter().zip(basis.projectors()) {
            if max_abs_diff(p, &q) > BASIS_TOL {
                return Err(Error::InvalidInput("projector is not Hermitian idempotent".into()));
            }
        }
        Ok(basis)
    }

    fn check(&self) -> Result<()> {
        let dim = self.dim();
        if self.vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: self.vectors[0].len() });
        }
        let u = self.to_unitary();
        let defect = max_abs_diff(&(u.adjoint() * &u), &linalg::identity(dim));
        if defect > BASIS_TOL {
            return Err(Error::InvalidInput(format!("basis not orthonormal (defect {defect:e})")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn projectors(&self) -> Vec<CMatrix> {
        self.vectors.iter().map(|v| outer(v, v)).collect()
    }

    /// Matrix whose columns are the basis vectors.
    pub fn to_unitary(&self) -> CMatrix {
        CMatrix::from_columns(&self.vectors)
    }

    /// max over ΣΠ - I and ΠᵢΠⱼ - δᵢⱼΠᵢ.
    pub fn defect(&self) -> f64 {
        let ps = self.projectors();
        let dim = self.dim();
        let sum = ps.iter().fold(CMatrix::zeros(dim, dim), |acc, p| acc + p);
        let mut worst = max_abs_diff(&sum, &linalg::identity(dim));
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                let target = if i == j { p.clone() } else { CMatrix::zeros(dim, dim) };
                worst = worst.max(max_abs_diff(&(p * q), &target));
            }
        }
        worst
    }
}

impl Serialize for MeasurementBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::matrix_json::serde_matrix::serialize(&self.to_unitary(), s)
    }
}

impl<'de> Deserialize<'de> for MeasurementBasis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let u = crate::matrix_json::serde_matrix::deserialize(d)?;
        Self::from_unitary(&u).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub(crate) fn qubit_pair(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, co) = (0.5 * theta).sin_cos();
    let e = C64::from_polar(1.0, phi);
    [[c(co, 0.0), e * s], [-e.conj() * s, c(co, 0.0)]]
}

/// Bloch angles (θ, φ) of a unit qubit vector, up to global phase.
pub(crate) fn bloch_angles(v: &CVector) -> (f64, f64) {
    let a = v[0].norm().clamp(0.0, 1.0);
    let theta = 2.0 * a.acos();
    let phi = if v[0].norm() > 1e-15 && v[1].norm() > 1e-15 {
        (v[1] / v[0]).arg()
    } else if v[1].norm() > 1e-15 {
        v[1].arg()
    } else {
        0.0
    };
    (theta, phi)
}

/// U = seed · Π_{j<k} G_jk(θ, φ), parameters laid out pairwise (θ, φ).
pub(crate) fn givens_unitary(seed: &CMatrix, params: &[f64]) -> CMatrix {
    let d = seed.nrows();
    let mut u = seed.clone();
    let mut p = params.chunks_exact(2);
    for j in 0..d {
        for k in (j + 1)..d {
            let pair = p.next().expect("parameter count d(d-1)");
            let (s, co) = pair[0].sin_cos();
            let e = C64::from_polar(1.0, pair[1]);
            // right-multiply by the rotation acting on columns j, k
            for r in 0..d {
                let uj = u[(r, j)];
                let uk = u[(r, k)];
                u[(r, j)] = uj * co + uk * e * s;
                u[(r, k)] = -uj * e.conj() * s + uk * co;
            }
        }
    }
    u
}

pub(crate) fn givens_param_count(dim: usize) -> usize {
    dim * (dim - 1)
}
