use serde::Serialize;

use super::{Attachment, Check, Criterion, DemoOutput, RunSettings, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{real, CVector};
use crate::state::{partial_trace, von_neumann_entropy, HilbertFactorization, PureState};

pub const SWEEP_EPSILONS: [f64; 3] = [0.04, 0.01, 0.0025];
pub const SWEEP_SIZES: [usize; 3] = [2, 4, 16];
const MAX_EPSILON: f64 = 0.1;

/// √(1−ε)|0⟩|0⟩ + √ε Σᵢ √pᵢ |i⟩|i⟩ on (S+S′) ⊗ E, both of dimension N + 1,
/// so the perturbation is orthogonal to the leading product term.
pub fn lemma2_state(epsilon: f64, p: &[f64]) -> Result<PureState> {
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(Error::InvalidInput(format!("epsilon = {epsilon} must lie in (0, {MAX_EPSILON}]")));
    }
    if p.is_empty() || p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(Error::InvalidInput("p must be a nonempty vector of nonnegative weights".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized((total - 1.0).abs()));
    }
    let d = p.len() + 1;
    let mut psi = CVector::zeros(d * d);
    psi[0] = real((1.0 - epsilon).sqrt());
    for (k, &pk) in p.iter().enumerate() {
        let i = k + 1;
        psi[i * d + i] = real((epsilon * pk).sqrt());
    }
    PureState::normalized(psi, HilbertFactorization::new(vec![d, d])?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Point {
    pub epsilon: f64,
    pub n: usize,
    pub uniform: bool,
    pub entropy_ssp: f64,
    pub entropy_e: f64,
    /// κε = ε(1 − ln ε − ln p_max)
    pub kappa_eps: f64,
}

impl Lemma2Point {
    pub fn evaluate(epsilon: f64, p: &[f64]) -> Result<Self> {
        let rho = lemma2_state(epsilon, p)?.to_density();
        let entropy_ssp = von_neumann_entropy(&partial_trace(&rho, &[0])?)?;
        let entropy_e = von_neumann_entropy(&partial_trace(&rho, &[1])?)?;
        let p_max = p.iter().copied().fold(0.0, f64::max);
        let uniform = p.iter().all(|&x| (x - p[0]).abs() <= 1e-15);
        Ok(Self {
            epsilon,
            n: p.len(),
            uniform,
            entropy_ssp,
            entropy_e,
            kappa_eps: epsilon * (1.0 - epsilon.ln() - p_max.ln()),
        })
    }

    pub fn checks(&self, tol: &Tolerances) -> Vec<Check> {
        let tag = format!("[eps={}, N={}]", self.epsilon, self.n);
        let mut out = vec![
            Check::new(format!("S(S+S') <= kappa*eps {tag}"), self.entropy_ssp, Criterion::AtMost { threshold: self.kappa_eps }).nats(),
            Check::new(format!("S(E) <= kappa*eps {tag}"), self.entropy_e, Criterion::AtMost { threshold: self.kappa_eps }).nats(),
            Check::new(
                format!("|S(E) - S(S+S')| {tag}"),
                (self.entropy_e - self.entropy_ssp).abs(),
                Criterion::AtMost { threshold: tol.entropy_equality },
            ).nats(),
        ];
        if self.uniform {
            out.push(Check::new(
                format!("|S - kappa*eps| <= k*eps^2 {tag}"),
                (self.entropy_ssp - self.kappa_eps).abs(),
                Criterion::AtMost { threshold: tol.lemma2_quadratic * self.epsilon * self.epsilon },
            ).nats());
        }
        out
    }
}

pub fn lemma2_sweep(epsilons: &[f64], sizes: &[usize]) -> Result<Vec<Lemma2Point>> {
    let mut out = Vec::with_capacity(epsilons.len() * sizes.len());
    for &eps in epsilons {
        for &n in sizes {
            out.push(Lemma2Point::evaluate(eps, &vec![1.0 / n as f64; n])?);
        }
    }
    Ok(out)
}

fn sweep_csv(points: &[Lemma2Point]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Uniform-p sweep over ε ∈ {0.04, 0.01, 0.0025} and N ∈ {2, 4, 16}, plus
/// the ε = 1e-6 limit.
pub fn lemma2_demo(settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let points = lemma2_sweep(&SWEEP_EPSILONS, &SWEEP_SIZES)?;
    let mut checks: Vec<Check> = points.iter().flat_map(|p| p.checks(tol)).collect();
    let tiny = Lemma2Point::evaluate(1e-6, &[0.25; 4])?;
    checks.push(Check::new(
        "S(S+S') vanishes [eps=1e-6, N=4]",
        tiny.entropy_ssp,
        Criterion::Below { threshold: tol.vanishing_entropy },
    ).nats());
    let mut all = points;
    all.push(tiny);
    Ok(settings.finish("lemma2", checks, vec![Attachment::new("lemma2.csv", sweep_csv(&all)?)]))
}
