use rand::Rng;

use super::{Check, Criterion, DemoOutput, RunSettings};
use crate::correlations::{full_report, Cut};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, kron, max_abs_diff, outer, real, trace, CMatrix};
use crate::random::{haar_unitary, rng_from_seed};
use crate::state::{DensityOperator, HilbertFactorization};

const PROJECTOR_TOL: f64 = 1e-10;

/// Σₘₙ ωₘₙ Pₘ ⊗ Πₙ with orthogonal projectors on each side.
#[derive(Debug, Clone)]
pub struct CcInput {
    pub label: String,
    pub omega: Vec<Vec<f64>>,
    pub proj_a: Vec<CMatrix>,
    pub proj_b: Vec<CMatrix>,
}

fn check_projector_set(set: &[CMatrix], side: &str) -> Result<usize> {
    let d = set.first().ok_or_else(|| Error::InvalidInput(format!("{side}: empty projector set")))?.nrows();
    for (m, p) in set.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.nrows() });
        }
        let defect = hermiticity_defect(p).max(max_abs_diff(&(p * p), p));
        if defect > PROJECTOR_TOL {
            return Err(Error::InvalidInput(format!("{side}: element {m} is not a projector (defect {defect:e})")));
        }
        for (k, q) in set.iter().enumerate().skip(m + 1) {
            let overlap = max_abs_diff(&(p * q), &CMatrix::zeros(d, d));
            if overlap > PROJECTOR_TOL {
                return Err(Error::InvalidInput(format!("{side}: projectors {m} and {k} are not orthogonal")));
            }
        }
    }
    Ok(d)
}

impl CcInput {
    pub fn build(&self) -> Result<DensityOperator> {
        let da = check_projector_set(&self.proj_a, "A")?;
        let db = check_projector_set(&self.proj_b, "B")?;
        if self.omega.len() != self.proj_a.len() || self.omega.iter().any(|row| row.len() != self.proj_b.len()) {
            return Err(Error::InvalidInput("omega shape must be (#A projectors) x (#B projectors)".into()));
        }
        if self.omega.iter().flatten().any(|&w| !(w.is_finite() && w >= 0.0)) {
            return Err(Error::InvalidInput("omega entries must be finite and nonnegative".into()));
        }
        let mut rho = CMatrix::zeros(da * db, da * db);
        let mut norm = 0.0;
        for (m, p) in self.proj_a.iter().enumerate() {
            for (n, q) in self.proj_b.iter().enumerate() {
                let w = self.omega[m][n];
                norm += w * trace(p).re * trace(q).re;
                rho += kron(p, q) * real(w);
            }
        }
        if (norm - 1.0).abs() > PROJECTOR_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        DensityOperator::new(rho, HilbertFactorization::new(vec![da, db])?)
    }

    /// ω = p qᵀ: every 2 × 2 minor vanishes.
    pub fn is_separable(&self) -> bool {
        let w = &self.omega;
        let scale = w.iter().flatten().copied().fold(0.0, f64::max).max(1e-300);
        for m in 0..w.len() {
            for m2 in m + 1..w.len() {
                for n in 0..w[m].len() {
                    for n2 in n + 1..w[m].len() {
                        if (w[m][n] * w[m2][n2] - w[m][n2] * w[m2][n]).abs() > 1e-12 * scale * scale {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

fn rank_one_projectors(u: &CMatrix) -> Vec<CMatrix> {
    (0..u.ncols()).map(|j| outer(&u.column(j).into_owned(), &u.column(j).into_owned())).collect()
}

fn normalized_weights(raw: Vec<Vec<f64>>, ranks_a: &[f64], ranks_b: &[f64]) -> Vec<Vec<f64>> {
    let norm: f64 = raw
        .iter()
        .enumerate()
        .flat_map(|(m, row)| row.iter().enumerate().map(move |(n, w)| w * ranks_a[m] * ranks_b[n]))
        .sum();
    raw.into_iter().map(|row| row.into_iter().map(|w| w / norm).collect()).collect()
}

/// Random valid input: Haar-rotated projectors and positive weights. With
/// `rank2`, side A is a qutrit split into a rank-2 and a rank-1 projector.
pub fn random_cc_input(seed: u64, rank2: bool, separable: bool) -> CcInput {
    let mut rng = rng_from_seed(seed);
    let (proj_a, ranks_a) = if rank2 {
        let u = haar_unitary(&mut rng, 3);
        let cols = rank_one_projectors(&u);
        (vec![&cols[0] + &cols[1], cols[2].clone()], vec![2.0, 1.0])
    } else {
        (rank_one_projectors(&haar_unitary(&mut rng, 2)), vec![1.0, 1.0])
    };
    let proj_b = rank_one_projectors(&haar_unitary(&mut rng, 2));
    let raw: Vec<Vec<f64>> = if separable {
        let p: Vec<f64> = (0..proj_a.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        let q: Vec<f64> = (0..proj_b.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        p.iter().map(|&a| q.iter().map(|&b| a * b).collect()).collect()
    } else {
        (0..proj_a.len()).map(|_| (0..proj_b.len()).map(|_| rng.random_range(0.05..1.0)).collect()).collect()
    };
    let label = format!(
        "random {}{}",
        if rank2 { "rank-2 qutrit" } else { "qubit" },
        if separable { " separable" } else { "" }
    );
    CcInput { label, omega: normalized_weights(raw, &ranks_a, &[1.0, 1.0]), proj_a, proj_b }
}

pub fn cc_state_demo(inputs: &[CcInput], settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    let mut checks = Vec::new();
    for (k, input) in inputs.iter().enumerate() {
        let rho = input.build()?;
        let report = full_report(&rho, &Cut::new(vec![0], vec![1]), &cfg)?;
        let tag = format!("[{k}: {}]", input.label);
        checks.push(Check::new(format!("D_left {tag}"), report.d_left, Criterion::Below { threshold: tol.zero_discord }).nats());
        checks.push(Check::new(format!("D_right {tag}"), report.d_right, Criterion::Below { threshold: tol.zero_discord }).nats());
        if input.is_separable() {
            checks.push(Check::new(format!("I product {tag}"), report.mutual_info, Criterion::Below { threshold: tol.product_mi }).nats());
        }
    }
    Ok(settings.finish("cc-state", checks, vec![]))
}

fn computational(d: usize) -> Vec<CMatrix> {
    rank_one_projectors(&crate::linalg::identity(d))
}

/// Diagonal weights on computational projectors, a separable case and a
/// rank-2 qutrit projector.
pub(crate) fn default_demo(settings: &RunSettings) -> Result<DemoOutput> {
    let diag = CcInput {
        label: "weights (0.5, 0.2; 0.1, 0.2)".into(),
        omega: vec![vec![0.5, 0.2], vec![0.1, 0.2]],
        proj_a: computational(2),
        proj_b: computational(2),
    };
    let separable = CcInput {
        label: "omega = p q^T".into(),
        omega: vec![vec![0.7 * 0.4, 0.7 * 0.6], vec![0.3 * 0.4, 0.3 * 0.6]],
        proj_a: computational(2),
        proj_b: computational(2),
    };
    let c = computational(3);
    let rank2 = CcInput {
        label: "rank-2 qutrit projector".into(),
        omega: vec![vec![0.3, 0.1], vec![0.05, 0.15]],
        proj_a: vec![&c[0] + &c[1], c[2].clone()],
        proj_b: computational(2),
    };
    let mut random = vec![random_cc_input(settings.stream(0), false, false), random_cc_input(settings.stream(1), true, false)];
    let mut inputs = vec![diag, separable, rank2];
    inputs.append(&mut random);
    cc_state_demo(&inputs, settings)
}
