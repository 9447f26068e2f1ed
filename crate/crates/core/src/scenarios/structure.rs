use super::{Check, Criterion, DemoOutput, RunSettings, Attachment};
use crate::correlations::{discord, full_report, lii_flow, mutual_information, Cut, Side};
use crate::error::{Error, Result};
use crate::linalg::{kron_vec, max_abs_diff, real, CVector};
use crate::state::{partial_trace, tensor_product, von_neumann_entropy, DensityOperator, HilbertFactorization, PureState, NORM_TOL};
use crate::structures::{inverse_regroup, regroup, structure_report, Grouping};

/// |φ⟩₁|Φ⁺⟩₂₃ with |φ⟩ = cos θ|0⟩ + sin θ|1⟩; factors 0, 1, 2 are parties 1, 2, 3.
pub fn teleportation_state(theta: f64) -> PureState {
    let phi = CVector::from_vec(vec![real(theta.cos()), real(theta.sin())]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = CVector::from_vec(vec![real(h), real(0.0), real(0.0), real(h)]);
    PureState::normalized(kron_vec(&phi, &bell), HilbertFactorization::qubits(3)).expect("unit vector")
}

pub fn teleportation_structure_demo(theta: f64, settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    let psi = teleportation_state(theta);
    let rho = psi.to_density();
    let ln2 = std::f64::consts::LN_2;

    let i_1_23 = mutual_information(&rho, &Cut::new(vec![0], vec![1, 2]))?;
    let d_12_3 = discord(&rho, &Cut::new(vec![0, 1], vec![2]), Side::B, &cfg)?;

    let swapped = Grouping::labeled(vec![vec![1, 2], vec![0]], &["23", "1"]);
    let swapped_rho = regroup(&rho, &swapped)?;
    let swapped_report = full_report(&swapped_rho, &Cut::new(vec![0], vec![1]), &cfg)?;

    let mut roundtrip = 0.0f64;
    for g in [&swapped, &Grouping::new(vec![vec![0, 1], vec![2]]), &Grouping::new(vec![vec![2], vec![0], vec![1]])] {
        let back = inverse_regroup(&regroup(&rho, g)?, g, rho.factorization())?;
        roundtrip = roundtrip.max(max_abs_diff(back.matrix(), rho.matrix()));
    }

    let checks = vec![
        Check::new("I(1:23)", i_1_23, Criterion::Below { threshold: tol.product_mi }).nats(),
        Check::new("D(12|3)", d_12_3, Criterion::Near { target: ln2, tol: tol.discord_match }).nats(),
        Check::new("D(23|1) swapped structure", swapped_report.d_left, Criterion::Below { threshold: tol.zero_discord }).nats(),
        Check::new("D(1|23) swapped structure", swapped_report.d_right, Criterion::Below { threshold: tol.zero_discord }).nats(),
        Check::new("regroup round-trip max deviation", roundtrip, Criterion::AtMost { threshold: 0.0 }),
    ];

    let structures = [
        Grouping::labeled(vec![vec![0], vec![1, 2]], &["1", "23"]),
        Grouping::labeled(vec![vec![0, 1], vec![2]], &["12", "3"]),
        swapped,
        Grouping::labeled(vec![vec![0], vec![1], vec![2]], &["1", "2", "3"]),
    ];
    let report = structure_report(&rho, &structures, &cfg)?;
    Ok(settings.finish("teleportation", checks, vec![Attachment::new("structures.csv", report.to_csv()?)]))
}

pub(crate) fn real_amplitudes(c: &[f64]) -> CVector {
    CVector::from_iterator(c.len(), c.iter().map(|&x| real(x)))
}

pub(crate) fn default_rho_s() -> DensityOperator {
    DensityOperator::diagonal(&[0.8, 0.2], HilbertFactorization::qubits(1)).expect("valid spectrum")
}

/// ρ_S ⊗ |Ψ⟩⟨Ψ| with |Ψ⟩ = Σᵢ cᵢ|i⟩_S′|i⟩_E.
pub fn saturation_state(c: &CVector, rho_s: &DensityOperator) -> Result<DensityOperator> {
    let defect = (c.norm() - 1.0).abs();
    if defect > NORM_TOL {
        return Err(Error::NotNormalized(defect));
    }
    if rho_s.dims().len() != 1 {
        return Err(Error::InvalidSubsystem("rho_S must be a single factor".into()));
    }
    let d = c.len();
    if d < 2 {
        return Err(Error::InvalidInput("amplitude vector needs at least two entries".into()));
    }
    let mut psi = CVector::zeros(d * d);
    for i in 0..d {
        psi[i * d + i] = c[i];
    }
    let pe = PureState::new(psi, HilbertFactorization::new(vec![d, d])?)?.to_density();
    tensor_product(rho_s, &pe)
}

pub fn saturation_demo(c: &CVector, rho_s: &DensityOperator, settings: &RunSettings) -> Result<DemoOutput> {
    let tol = &settings.tolerances;
    let cfg = settings.optimizer();
    let rho = saturation_state(c, rho_s)?;
    let s_e = von_neumann_entropy(&partial_trace(&rho, &[2])?)?;
    let d_sat = discord(&rho, &Cut::new(vec![0, 1], vec![2]), Side::B, &cfg)?;
    let i_ssp = mutual_information(&partial_trace(&rho, &[0, 1])?, &Cut::new(vec![0], vec![1]))?;
    let lii = lii_flow(&rho, &cfg)?;
    let near = |target: f64| Criterion::Near { target, tol: tol.discord_match };
    let checks = vec![
        Check::new("D(S+S'|E) = S(E)", d_sat, near(s_e)).nats(),
        Check::new("I(S:S')", i_ssp, Criterion::Below { threshold: tol.product_mi }).nats(),
        Check::new("LII D(S'|S)", lii.terms[0], near(0.0)).nats(),
        Check::new("LII D(E|S') = S(E)", lii.terms[1], near(s_e)).nats(),
        Check::new("LII D(S|E)", lii.terms[2], near(0.0)).nats(),
    ];
    Ok(settings.finish("saturation", checks, vec![]))
}
