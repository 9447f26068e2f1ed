//! Built-in local operators: Pauli matrices and ladder/number operators on
//! d-level systems in the number basis |0>, ..., |d-1>.

use crate::error::{Error, Result};
use crate::linalg::{c, real, CMatrix, ONE, ZERO};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, real(-1.0)])
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// a: |n> -> sqrt(n) |n-1>
pub fn lowering(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = real((n as f64).sqrt());
    }
    m
}

/// a†: |n> -> sqrt(n+1) |n+1>
pub fn raising(dim: usize) -> CMatrix {
    lowering(dim).adjoint()
}

pub fn number(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, (0..dim).map(|n| real(n as f64))))
}

/// |i><j| on a `dim`-level system.
pub fn transition(dim: usize, i: usize, j: usize) -> Result<CMatrix> {
    if i >= dim || j >= dim {
        return Err(Error::InvalidInput(format!("transition |{i}><{j}| outside dimension {dim}")));
    }
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = ONE;
    Ok(m)
}

/// Names accepted in scenario files.
pub const NAMES: &[&str] = &[
    "sx", "sy", "sz", "identity", "raise", "lower", "number", "sigma_plus", "sigma_minus",
];

/// Look up a named operator for a factor of dimension `dim`.
pub fn named(name: &str, dim: usize) -> Result<CMatrix> {
    let qubit_only = |m: CMatrix| {
        if dim == 2 {
            Ok(m)
        } else {
            Err(Error::InvalidInput(format!("operator '{name}' needs a 2-level factor, got dimension {dim}")))
        }
    };
    match name {
        "sx" | "pauli_x" | "X" => qubit_only(pauli_x()),
        "sy" | "pauli_y" | "Y" => qubit_only(pauli_y()),
        "sz" | "pauli_z" | "Z" => qubit_only(pauli_z()),
        "identity" | "I" => Ok(identity(dim)),
        "raise" | "sigma_plus" | "create" => Ok(raising(dim)),
        "lower" | "sigma_minus" | "destroy" => Ok(lowering(dim)),
        "number" | "n" => Ok(number(dim)),
        _ => Err(Error::InvalidInput(format!("unknown operator '{name}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs_diff};

    #[test]
    fn pauli_algebra() {
        let xy = pauli_x() * pauli_y();
        assert!(max_abs_diff(&xy, &(pauli_z() * c(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn ladder_commutator() {
        // [a, a†] = 1 except on the truncated top level
        let d = 5;
        let comm = commutator(&lowering(d), &raising(d));
        for n in 0..d - 1 {
            assert!((comm[(n, n)] - ONE).norm() < 1e-14);
        }
        assert!(max_abs_diff(&(raising(d) * lowering(d)), &number(d)) < 1e-14);
    }

    #[test]
    fn named_lookup() {
        assert!(named("sx", 2).is_ok());
        assert!(named("sx", 3).is_err());
        assert!(named("bogus", 2).is_err());
        assert_eq!(named("lower", 2).unwrap()[(0, 1)], ONE);
    }
}
