use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, identity, kron_all, real, CMatrix};
use crate::matrix_json::serde_matrix;
use crate::state::{HilbertFactorization, HERMITIAN_TOL};

/// coeff · ⊗ₖ opₖ, identity on factors not listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub coeff: f64,
    #[serde(with = "op_map")]
    pub ops: BTreeMap<usize, CMatrix>,
}

impl HamiltonianTerm {
    pub fn new(coeff: f64, ops: impl IntoIterator<Item = (usize, CMatrix)>) -> Self {
        Self { coeff, ops: ops.into_iter().collect() }
    }

    pub fn local(coeff: f64, factor: usize, op: CMatrix) -> Self {
        Self::new(coeff, [(factor, op)])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub terms: Vec<HamiltonianTerm>,
}

impl HamiltonianSpec {
    pub fn new(terms: Vec<HamiltonianTerm>) -> Self {
        Self { terms }
    }

    pub fn push(&mut self, term: HamiltonianTerm) -> &mut Self {
        self.terms.push(term);
        self
    }

    pub fn validate(&self, f: &HilbertFactorization) -> Result<()> {
        for term in &self.terms {
            if !term.coeff.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coupling {}", term.coeff)));
            }
            for (&k, op) in &term.ops {
                let d = *f.dims().get(k).ok_or_else(|| {
                    Error::InvalidSubsystem(format!("term acts on factor {k}, but there are {} factors", f.len()))
                })?;
                if op.nrows() != d || op.ncols() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
                }
                let defect = hermiticity_defect(op);
                if defect > HERMITIAN_TOL {
                    return Err(Error::NotHermitian(defect));
                }
            }
        }
        Ok(())
    }

    /// Full matrix on `f`.
    pub fn assemble(&self, f: &HilbertFactorization) -> Result<CMatrix> {
        self.validate(f)?;
        let n = f.total_dim();
        let ids: Vec<CMatrix> = f.dims().iter().map(|&d| identity(d)).collect();
        let mut h = CMatrix::zeros(n, n);
        for term in &self.terms {
            let factors = (0..f.len()).map(|k| term.ops.get(&k).unwrap_or(&ids[k]));
            h += kron_all(factors) * real(term.coeff);
        }
        Ok(h)
    }
}

mod op_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry(usize, #[serde(with = "serde_matrix")] CMatrix);

    pub fn serialize<S: Serializer>(ops: &BTreeMap<usize, CMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = ops.iter().map(|(&k, m)| Entry(k, m.clone())).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<usize, CMatrix>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for Entry(k, m) in entries {
            if out.insert(k, m).is_some() {
                return Err(serde::de::Error::custom(format!("factor {k} appears twice in one term")));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, frobenius, kron, max_abs_diff};
    use crate::operators::{pauli_x, pauli_z};
    use crate::random::{random_hermitian, rng_from_seed};

    #[test]
    fn empty_spec_is_zero() {
        let h = HamiltonianSpec::default().assemble(&HilbertFactorization::qubits(2)).unwrap();
        assert_eq!(h, CMatrix::zeros(4, 4));
    }

    #[test]
    fn local_term_embeds_with_identity() {
        let spec = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 0, pauli_z())]);
        let h = spec.assemble(&HilbertFactorization::qubits(2)).unwrap();
        assert_eq!(h, kron(&pauli_z(), &identity(2)));
    }

    #[test]
    fn decoupled_system_commutes_with_its_local_operators() {
        // [H, A_S ⊗ I] reduces to [H_S, A_S] ⊗ I: nothing outside S feels A_S
        let f = HilbertFactorization::new(vec![2, 3, 2]).unwrap();
        let mut rng = rng_from_seed(11);
        let h_s = random_hermitian(&mut rng, 2);
        let spec = HamiltonianSpec::new(vec![
            HamiltonianTerm::local(0.7, 0, h_s.clone()),
            HamiltonianTerm::local(0.3, 1, random_hermitian(&mut rng, 3)),
            HamiltonianTerm::local(1.1, 2, random_hermitian(&mut rng, 2)),
            HamiltonianTerm::new(2.0, [(1, random_hermitian(&mut rng, 3)), (2, random_hermitian(&mut rng, 2))]),
        ]);
        let h = spec.assemble(&f).unwrap();
        let a = random_hermitian(&mut rng, 2);
        let lhs = commutator(&h, &kron(&a, &identity(6)));
        let rhs = kron(&(commutator(&h_s, &a) * real(0.7)), &identity(6));
        assert!(frobenius(&(lhs - rhs)) < 1e-12);
        let rest = &h - kron(&(&h_s * real(0.7)), &identity(6));
        assert!(frobenius(&commutator(&rest, &kron(&a, &identity(6)))) < 1e-12);
    }

    #[test]
    fn rejects_bad_terms() {
        let f = HilbertFactorization::qubits(2);
        let missing = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 2, pauli_z())]);
        assert!(matches!(missing.assemble(&f), Err(Error::InvalidSubsystem(_))));
        let wrong_dim = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 0, identity(3))]);
        assert!(matches!(wrong_dim.assemble(&f), Err(Error::DimensionMismatch { .. })));
        let mut nh = pauli_x();
        nh[(0, 1)] = real(2.0);
        let non_herm = HamiltonianSpec::new(vec![HamiltonianTerm::local(1.0, 0, nh)]);
        assert!(matches!(non_herm.assemble(&f), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn json_roundtrip() {
        let spec = HamiltonianSpec::new(vec![HamiltonianTerm::new(0.5, [(0, pauli_x()), (1, pauli_z())])]);
        let text = serde_json::to_string(&spec).unwrap();
        let back: HamiltonianSpec = serde_json::from_str(&text).unwrap();
        let f = HilbertFactorization::qubits(2);
        assert!(max_abs_diff(&spec.assemble(&f).unwrap(), &back.assemble(&f).unwrap()) == 0.0);
    }
}
