//! Structures of a composite system: regrouping tensor factors into coarser
//! subsystems, and per-structure correlation reports.
//!
//! Grouping is the trivial kind of canonical transformation (a permutation
//! followed by a reshape). [`CanonicalTransform`] is the hook for anything
//! more general; [`GlobalUnitary`] is the only other implementation here.

use serde::{Deserialize, Serialize};

use crate::correlations::{full_report, lii_flow, Cut, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{partial_trace, von_neumann_entropy, DensityOperator, HilbertFactorization, PureState};

/// Ordered partition of factor indices; group order fixes factor order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub groups: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Grouping {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        Self { groups, labels: None }
    }

    pub fn labeled(groups: Vec<Vec<usize>>, labels: &[&str]) -> Self {
        Self {
            groups,
            labels: Some(labels.iter().map(|s| s.to_string()).collect()),
        }
    }

    /// Disjoint, covering and nonempty over `f`.
    pub fn validate(&self, f: &HilbertFactorization) -> Result<()> {
        if let Some(labels) = &self.labels {
            if labels.len() != self.groups.len() {
                return Err(Error::InvalidSubsystem("one label per group required".into()));
            }
        }
        if self.groups.is_empty() || self.groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidSubsystem("grouping has an empty group".into()));
        }
        let flat: Vec<usize> = self.groups.iter().flatten().copied().collect();
        f.check_indices(&flat)?;
        if flat.len() != f.len() {
            return Err(Error::InvalidSubsystem(format!(
                "grouping covers {} of {} factors",
                flat.len(),
                f.len()
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match &self.labels {
            Some(labels) => labels.join(" | "),
            None => self
                .groups
                .iter()
                .map(|g| format!("{{{}}}", g.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(" | "),
        }
    }

    /// Factor dimensions of the original space as laid out after the
    /// permutation, before merging.
    fn permuted_dims(&self, original: &HilbertFactorization) -> Vec<usize> {
        self.groups.iter().flatten().map(|&k| original.dims()[k]).collect()
    }

    /// Singleton groups that undo this grouping's permutation.
    fn inverse_groups(&self, n: usize) -> Vec<Vec<usize>> {
        let order: Vec<usize> = self.groups.iter().flatten().copied().collect();
        let mut inv = vec![0; n];
        for (pos, &k) in order.iter().enumerate() {
            inv[k] = pos;
        }
        inv.into_iter().map(|p| vec![p]).collect()
    }
}

/// States whose tensor factors can be regrouped.
pub trait Regroup: Sized {
    fn factorization(&self) -> &HilbertFactorization;
    fn regroup_factors(&self, groups: &[Vec<usize>]) -> Result<Self>;
    fn refactor(&self, f: HilbertFactorization) -> Result<Self>;
}

impl Regroup for DensityOperator {
    fn factorization(&self) -> &HilbertFactorization {
        DensityOperator::factorization(self)
    }
    fn regroup_factors(&self, groups: &[Vec<usize>]) -> Result<Self> {
        DensityOperator::regroup_factors(self, groups)
    }
    fn refactor(&self, f: HilbertFactorization) -> Result<Self> {
        DensityOperator::refactor(self, f)
    }
}

impl Regroup for PureState {
    fn factorization(&self) -> &HilbertFactorization {
        PureState::factorization(self)
    }
    fn regroup_factors(&self, groups: &[Vec<usize>]) -> Result<Self> {
        PureState::regroup_factors(self, groups)
    }
    fn refactor(&self, f: HilbertFactorization) -> Result<Self> {
        if f.total_dim() != self.amplitudes().len() {
            return Err(Error::DimensionMismatch {
                expected: self.amplitudes().len(),
                found: f.total_dim(),
            });
        }
        Ok(PureState::from_parts(self.amplitudes().clone(), f))
    }
}

/// One factor per group, dimension = product of member dimensions.
pub fn regroup<S: Regroup>(state: &S, grouping: &Grouping) -> Result<S> {
    grouping.validate(state.factorization())?;
    state.regroup_factors(&grouping.groups)
}

/// Undo [`regroup`] given the factorization the grouping was applied to.
pub fn inverse_regroup<S: Regroup>(state: &S, grouping: &Grouping, original: &HilbertFactorization) -> Result<S> {
    grouping.validate(original)?;
    let split = state.refactor(HilbertFactorization::new(grouping.permuted_dims(original))?)?;
    split.regroup_factors(&grouping.inverse_groups(original.len()))
}

/// A change of structure acting on density operators.
pub trait CanonicalTransform {
    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator>;
}

impl CanonicalTransform for Grouping {
    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        regroup(rho, self)
    }
}

/// Nontrivial structure change: an arbitrary global unitary followed by a
/// new reading of the tensor factors.
#[derive(Debug, Clone)]
pub struct GlobalUnitary {
    pub unitary: CMatrix,
    pub output: HilbertFactorization,
}

impl CanonicalTransform for GlobalUnitary {
    fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if !crate::linalg::is_unitary(&self.unitary, 1e-10) {
            return Err(Error::InvalidInput("transform matrix is not unitary".into()));
        }
        rho.conjugate(&self.unitary)?.refactor(self.output.clone())
    }
}

/// Correlation quantities for one structure.
#[derive(Debug, Clone, Serialize)]
pub struct StructureRow {
    pub structure: String,
    pub groups: Vec<Vec<usize>>,
    pub dims: Vec<usize>,
    pub group_entropies: Vec<f64>,
    pub global_entropy: f64,
    /// Bipartitions only.
    pub mutual_info: Option<f64>,
    #[serde(rename = "D_left")]
    pub d_left: Option<f64>,
    #[serde(rename = "D_right")]
    pub d_right: Option<f64>,
    /// Tripartitions only.
    pub lii_total: Option<f64>,
    pub lii_terms: Option<[f64; 3]>,
    /// max |λᵢ - λᵢ(input state)| over the global spectrum.
    pub spectrum_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub rows: Vec<StructureRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    structure: &'a str,
    dims: String,
    group_entropies: String,
    global_entropy: f64,
    mutual_info: Option<f64>,
    #[serde(rename = "D_left")]
    d_left: Option<f64>,
    #[serde(rename = "D_right")]
    d_right: Option<f64>,
    lii_total: Option<f64>,
    spectrum_deviation: f64,
}

impl StructureReport {
    pub fn row(&self, name: &str) -> Option<&StructureRow> {
        self.rows.iter().find(|r| r.structure == name)
    }

    pub fn max_spectrum_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.spectrum_deviation).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            let join = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(";");
            w.serialize(CsvRow {
                structure: &r.structure,
                dims: r.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x"),
                group_entropies: join(&r.group_entropies),
                global_entropy: r.global_entropy,
                mutual_info: r.mutual_info,
                d_left: r.d_left,
                d_right: r.d_right,
                lii_total: r.lii_total,
                spectrum_deviation: r.spectrum_deviation,
            })
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Marginal entropies, mutual information and two-way discord (or LII flow
/// for three groups) for each structure of the same global state.
pub fn structure_report(state: &DensityOperator, groupings: &[Grouping], cfg: &OptimizerConfig) -> Result<StructureReport> {
    let mut rows = Vec::with_capacity(groupings.len());
    let reference = state.spectrum()?;
    // regrouping permutes the basis, so the global entropy is shared
    let global_entropy = crate::linalg::shannon_nats(reference.iter().copied());
    for g in groupings {
        let rho = regroup(state, g)?;
        let n = rho.dims().len();
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidSubsystem(format!(
                "structure '{}' has {n} parts; reports need two or three",
                g.name()
            )));
        }
        let spectrum = rho.spectrum()?;
        let spectrum_deviation = reference.iter().zip(&spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let group_entropies = (0..n)
            .map(|k| von_neumann_entropy(&partial_trace(&rho, &[k])?))
            .collect::<Result<Vec<_>>>()?;
        let mut row = StructureRow {
            structure: g.name(),
            groups: g.groups.clone(),
            dims: rho.dims().to_vec(),
            group_entropies,
            global_entropy,
            mutual_info: None,
            d_left: None,
            d_right: None,
            lii_total: None,
            lii_terms: None,
            spectrum_deviation,
        };
        if n == 2 {
            let r = full_report(&rho, &Cut::new(vec![0], vec![1]), cfg)?;
            row.mutual_info = Some(r.mutual_info);
            row.d_left = Some(r.d_left);
            row.d_right = Some(r.d_right);
        } else {
            let lii = lii_flow(&rho, cfg)?;
            row.lii_total = Some(lii.total);
            row.lii_terms = Some(lii.terms);
        }
        rows.push(row);
    }
    Ok(StructureReport { rows })
}
