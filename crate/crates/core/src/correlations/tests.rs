use super::*;
use crate::linalg::{c, kron_vec, outer, real, CVector, ONE};
use crate::random::{random_density, random_pure};
use crate::state::{tensor_product, PureState};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

const LN2: f64 = std::f64::consts::LN_2;

fn two_qubits() -> HilbertFactorization {
    HilbertFactorization::qubits(2)
}

fn cut01() -> Cut {
    Cut::new(vec![0], vec![1])
}

fn bell() -> DensityOperator {
    let s = 1.0 / 2f64.sqrt();
    PureState::new(CVector::from_vec(vec![real(s), ZERO, ZERO, real(s)]), two_qubits())
        .unwrap()
        .to_density()
}

fn classical_mix() -> DensityOperator {
    DensityOperator::diagonal(&[0.5, 0.0, 0.0, 0.5], two_qubits()).unwrap()
}

fn random_state(seed: u64, dims: Vec<usize>, rank: usize) -> DensityOperator {
    let f = HilbertFactorization::new(dims).unwrap();
    let mut rng = crate::random::rng_from_seed(seed);
    DensityOperator::new(random_density(&mut rng, f.total_dim(), rank), f).unwrap()
}

fn werner(p: f64) -> DensityOperator {
    let m = bell().matrix() * real(p) + linalg::identity(4) * real((1.0 - p) / 4.0);
    DensityOperator::new(m, two_qubits()).unwrap()
}

fn product(seed: u64) -> DensityOperator {
    let a = random_state(seed, vec![2], 2);
    let b = random_state(seed + 1, vec![2], 2);
    tensor_product(&a, &b).unwrap()
}

#[test]
fn mutual_information_examples() {
    assert_abs_diff_eq!(mutual_information(&product(1), &cut01()).unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(mutual_information(&bell(), &cut01()).unwrap(), 2.0 * LN2, epsilon = 1e-12);
    // direct entropy-sum oracle: S(A) = S(B) = ln 2, S(AB) = ln 2
    assert_abs_diff_eq!(mutual_information(&classical_mix(), &cut01()).unwrap(), LN2, epsilon = 1e-12);
}

#[test]
fn cut_validation() {
    let rho = bell();
    assert!(mutual_information(&rho, &Cut::new(vec![0], vec![])).is_err());
    assert!(mutual_information(&rho, &Cut::new(vec![0], vec![0])).is_err());
    assert!(mutual_information(&rho, &Cut::new(vec![0], vec![2])).is_err());
    let three = random_state(2, vec![2, 2, 2], 8);
    assert!(mutual_information(&three, &Cut::new(vec![0], vec![1])).is_err());
}

#[test]
fn conditional_entropy_examples() {
    let rho = product(3);
    let s_a = von_neumann_entropy(&partial_trace(&rho, &[0]).unwrap()).unwrap();
    for (t, p) in [(0.0, 0.0), (0.8, 1.9), (2.0, -0.4)] {
        let ce = conditional_entropy(&rho, &cut01(), Side::B, &MeasurementBasis::qubit(t, p)).unwrap();
        assert_abs_diff_eq!(ce, s_a, epsilon = 1e-12);
    }
    let ce = conditional_entropy(&bell(), &cut01(), Side::B, &MeasurementBasis::computational(2)).unwrap();
    assert_abs_diff_eq!(ce, 0.0, epsilon = 1e-12);

    // Werner states are U ⊗ U* invariant, so a tilted basis attains the grid minimum.
    let w = werner(0.6);
    let tilted = conditional_entropy(&w, &cut01(), Side::B, &MeasurementBasis::qubit(0.9, 0.7)).unwrap();
    let grid = grid_oracle_qubit(&w, &cut01(), Side::B, 128).unwrap();
    assert_abs_diff_eq!(tilted, grid.conditional_entropy, epsilon = 1e-9);
}

#[test]
fn conditional_entropy_dimension_mismatch() {
    let err = conditional_entropy(&bell(), &cut01(), Side::B, &MeasurementBasis::computational(3));
    assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
}

#[test]
fn classical_correlations_examples() {
    let cfg = OptimizerConfig::default();
    let j = classical_correlations(&product(4), &cut01(), Side::B, &cfg).unwrap();
    assert_abs_diff_eq!(j.value, 0.0, epsilon = 1e-12);

    let j = classical_correlations(&classical_mix(), &cut01(), Side::B, &cfg).unwrap();
    assert_abs_diff_eq!(j.value, LN2, epsilon = 1e-9);
    // computational basis is optimal: the found projectors are diagonal
    for p in j.basis.projectors() {
        assert!(p[(0, 1)].norm() < 1e-4);
    }
    let oracle = grid_oracle_qubit(&classical_mix(), &cut01(), Side::B, 64).unwrap();
    assert_abs_diff_eq!(oracle.classical, LN2, epsilon = 1e-12);

    let j = classical_correlations(&bell(), &cut01(), Side::B, &cfg).unwrap();
    assert_abs_diff_eq!(j.value, LN2, epsilon = 1e-9);
}

#[test]
fn returned_basis_achieves_reported_value() {
    let cfg = OptimizerConfig::default();
    for seed in 0..5 {
        let rho = random_state(100 + seed, vec![2, 2], 3);
        for side in [Side::A, Side::B] {
            let j = classical_correlations(&rho, &cut01(), side, &cfg).unwrap();
            let ce = conditional_entropy(&rho, &cut01(), side, &j.basis).unwrap();
            assert_abs_diff_eq!(ce, j.conditional_entropy, epsilon = 1e-12);
        }
    }
}

#[test]
fn optimizer_cap() {
    let rho = random_state(7, vec![2, 17], 2);
    let err = classical_correlations(&rho, &Cut::new(vec![0], vec![1]), Side::B, &OptimizerConfig::default());
    assert!(matches!(err, Err(Error::OptimizerCap(17))));
}

#[test]
fn discord_examples() {
    let cfg = OptimizerConfig::default();
    let r = full_report(&product(5), &cut01(), &cfg).unwrap();
    assert!(r.d_left.abs() < 1e-9 && r.d_right.abs() < 1e-9);
    assert_eq!(r.classification, Classification::Product);

    // Σ ω_mn |m><m| ⊗ |n><n| with ω00 = 0.5, ω11 = 0.3, ω01 = 0.2
    let cc = DensityOperator::diagonal(&[0.5, 0.2, 0.0, 0.3], two_qubits()).unwrap();
    let r = full_report(&cc, &cut01(), &cfg).unwrap();
    assert!(r.d_left < ZERO_DISCORD_TOL && r.d_right < ZERO_DISCORD_TOL, "{r:?}");
    assert_eq!(r.classification, Classification::ClassicalClassical);

    let r = full_report(&bell(), &cut01(), &cfg).unwrap();
    assert_abs_diff_eq!(r.d_left, LN2, epsilon = 1e-9);
    assert_abs_diff_eq!(r.d_right, LN2, epsilon = 1e-9);
    assert_eq!(r.classification, Classification::Discordant);
    assert_abs_diff_eq!(discord_oracle_qubit(&bell(), &cut01(), Side::B, 256).unwrap(), LN2, epsilon = 1e-4);
}

#[test]
fn one_way_classical_state() {
    // ½(|0><0| ⊗ |0><0| + |1><1| ⊗ |+><+|): classical on A, discordant when measuring B
    let plus = CVector::from_vec(vec![real(1.0 / 2f64.sqrt()); 2]);
    let zero = linalg::basis_vector(2, 0);
    let one = linalg::basis_vector(2, 1);
    let m = outer(&kron_vec(&zero, &zero), &kron_vec(&zero, &zero)) * real(0.5)
        + outer(&kron_vec(&one, &plus), &kron_vec(&one, &plus)) * real(0.5);
    let rho = DensityOperator::new(m, two_qubits()).unwrap();
    let r = full_report(&rho, &cut01(), &OptimizerConfig::default()).unwrap();
    assert!(r.d_right < ZERO_DISCORD_TOL);
    assert!(r.d_left > 1e-3);
    assert_eq!(r.classification, Classification::OneWayClassicalRight);
}

#[test]
fn report_serializes_with_named_fields() {
    let r = full_report(&bell(), &cut01(), &OptimizerConfig::with_seed(9)).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["mutual_info", "J_left", "J_right", "D_left", "D_right", "optimal_basis_left", "optimal_basis_right"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["classification"], "discordant");
    assert_eq!(v["seed"], 9);
    let basis: MeasurementBasis = serde_json::from_value(v["optimal_basis_left"].clone()).unwrap();
    assert!(basis.defect() < 1e-12);
}

#[test]
fn oracle_examples() {
    assert!(discord_oracle_qubit(&product(6), &cut01(), Side::B, 32).unwrap().abs() < 1e-9);
    let err = discord_oracle_qubit(&random_state(1, vec![2, 3], 6), &cut01(), Side::B, 8);
    assert!(err.is_err());
    let cfg = OptimizerConfig::default();
    for seed in 0..4 {
        let rho = random_state(200 + seed, vec![2, 2], 4);
        let d = discord(&rho, &cut01(), Side::B, &cfg).unwrap();
        let o = discord_oracle_qubit(&rho, &cut01(), Side::B, 128).unwrap();
        assert!(o >= d - 1e-6, "oracle {o} optimizer {d}");
    }
}

#[test]
fn qutrit_measurement_on_cc_state() {
    // ω on 2 x 3 with computational projectors: CC, so both discords vanish
    let w = [0.1, 0.2, 0.05, 0.3, 0.15, 0.2];
    let rho = DensityOperator::diagonal(&w, HilbertFactorization::new(vec![2, 3]).unwrap()).unwrap();
    let r = full_report(&rho, &cut01(), &OptimizerConfig::default()).unwrap();
    assert!(r.d_left < ZERO_DISCORD_TOL && r.d_right < ZERO_DISCORD_TOL, "{r:?}");
}

#[test]
fn qutrit_pure_state_discord_is_entanglement() {
    let f = HilbertFactorization::new(vec![3, 3]).unwrap();
    let mut rng = crate::random::rng_from_seed(77);
    let psi = PureState::new(random_pure(&mut rng, 9), f).unwrap();
    let rho = psi.to_density();
    let s_a = von_neumann_entropy(&partial_trace(&rho, &[0]).unwrap()).unwrap();
    let d = discord(&rho, &cut01(), Side::B, &OptimizerConfig::default()).unwrap();
    assert_abs_diff_eq!(d, s_a, epsilon = 2e-4);
}

fn eq6_state(c0: f64, rho_s: &DensityOperator) -> DensityOperator {
    let c1 = (1.0 - c0 * c0).sqrt();
    let psi = CVector::from_vec(vec![real(c0), ZERO, ZERO, real(c1)]);
    let pe = PureState::new(psi, two_qubits()).unwrap().to_density();
    tensor_product(rho_s, &pe).unwrap()
}

#[test]
fn lii_flow_on_locked_state() {
    let rho_s = DensityOperator::diagonal(&[0.8, 0.2], HilbertFactorization::qubits(1)).unwrap();
    let rho = eq6_state(0.9f64.sqrt(), &rho_s);
    let s_e = von_neumann_entropy(&partial_trace(&rho, &[2]).unwrap()).unwrap();
    let lii = lii_flow(&rho, &OptimizerConfig::default()).unwrap();
    assert_abs_diff_eq!(lii.terms[0], 0.0, epsilon = 2e-4);
    assert_abs_diff_eq!(lii.terms[1], s_e, epsilon = 2e-4);
    assert_abs_diff_eq!(lii.terms[2], 0.0, epsilon = 2e-4);
    assert_abs_diff_eq!(lii.total, s_e, epsilon = 2e-4);

    let prod = tensor_product(&tensor_product(&rho_s, &rho_s).unwrap(), &rho_s).unwrap();
    let lii = lii_flow(&prod, &OptimizerConfig::default()).unwrap();
    assert!(lii.terms.iter().chain(&lii.reverse_terms).all(|t| t.abs() < 1e-9));

    assert!(lii_flow(&bell(), &OptimizerConfig::default()).is_err());
}

#[test]
fn laziness_examples() {
    let p = product(8);
    assert!(is_lazy(&p, &[0]).unwrap().holds);
    assert!(is_lazy(&p, &[1]).unwrap().holds);
    assert!(is_lazy(&bell(), &[0]).unwrap().holds);
    assert!(is_lazy(&bell(), &[1]).unwrap().holds);

    let s = 1.0 / 2f64.sqrt();
    let plus = CVector::from_vec(vec![real(s), real(s)]);
    let zero = linalg::basis_vector(2, 0);
    let one = linalg::basis_vector(2, 1);
    let m = outer(&kron_vec(&plus, &zero), &kron_vec(&plus, &zero)) * real(0.5)
        + outer(&kron_vec(&zero, &one), &kron_vec(&zero, &one)) * real(0.5);
    let rho = DensityOperator::new(m, two_qubits()).unwrap();
    let check = is_lazy(&rho, &[0]).unwrap();
    assert!(!check.holds && check.commutator_norm > 1e-3);

    assert!(is_lazy(&p, &[]).is_err());
    assert!(is_lazy(&p, &[0, 1]).is_err());
    assert!(is_lazy(&p, &[5]).is_err());
}

#[test]
fn c_classicality_examples() {
    let a = random_state(10, vec![2], 2);
    let b = random_state(11, vec![3], 3);
    let check = c_classicality_check(&a, &b).unwrap();
    assert!(check.holds && check.commutator_norm < 1e-14);

    let half = DensityOperator::maximally_mixed(HilbertFactorization::qubits(1));
    assert!(c_classicality_check(&half, &b).unwrap().holds);

    let one = DensityOperator::diagonal(&[0.0, 1.0], HilbertFactorization::qubits(1)).unwrap();
    assert!(matches!(c_classicality_check(&a, &one), Err(Error::ZeroProbability(_))));

    // ½(|+><+| ⊗ |0><0| + |0><0| ⊗ |1><1|): conditioning on |0>_B leaves |+><+|,
    // which does not commute with ρ_A
    let s = 1.0 / 2f64.sqrt();
    let plus = CVector::from_vec(vec![real(s), real(s)]);
    let zero = linalg::basis_vector(2, 0);
    let onev = linalg::basis_vector(2, 1);
    let m = outer(&kron_vec(&plus, &zero), &kron_vec(&plus, &zero)) * real(0.5)
        + outer(&kron_vec(&zero, &onev), &kron_vec(&zero, &onev)) * real(0.5);
    let rho = DensityOperator::new(m, two_qubits()).unwrap();
    let check = c_classicality_check_joint(&rho, &cut01()).unwrap();
    assert!(!check.holds);
}

#[test]
fn restarts_are_seed_deterministic() {
    let rho = random_state(12, vec![2, 3], 6);
    let cfg = OptimizerConfig::with_seed(44);
    let a = classical_correlations(&rho, &cut01(), Side::B, &cfg).unwrap();
    let b = classical_correlations(&rho, &cut01(), Side::B, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.basis, b.basis);
}

#[test]
fn phase_of_complex_state_does_not_matter() {
    let psi = CVector::from_vec(vec![real(0.6), ZERO, ZERO, c(0.0, 0.8)]);
    let rho = PureState::new(psi, two_qubits()).unwrap().to_density();
    let s = -(0.36f64 * 0.36f64.ln() + 0.64 * 0.64f64.ln());
    let r = full_report(&rho, &cut01(), &OptimizerConfig::default()).unwrap();
    assert_abs_diff_eq!(r.d_left, s, epsilon = 1e-8);
    assert_abs_diff_eq!(r.d_right, s, epsilon = 1e-8);
    let _ = ONE;
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discord_nonnegative_and_decomposes(seed in any::<u64>(), rank in 1usize..5) {
        let rho = random_state(seed, vec![2, 2], rank);
        let r = full_report(&rho, &cut01(), &OptimizerConfig::default()).unwrap();
        prop_assert!(r.d_left >= -1e-7 && r.d_right >= -1e-7);
        prop_assert!(r.j_left >= -1e-7 && r.j_right >= -1e-7);
        let i = mutual_information(&rho, &cut01()).unwrap();
        prop_assert!((r.j_left + r.d_left - i).abs() < 1e-7);
        prop_assert!((r.j_right + r.d_right - i).abs() < 1e-7);
    }

    #[test]
    fn pure_states_saturate(seed in any::<u64>()) {
        let mut rng = crate::random::rng_from_seed(seed);
        let psi = PureState::new(random_pure(&mut rng, 4), two_qubits()).unwrap();
        let rho = psi.to_density();
        let s_a = von_neumann_entropy(&partial_trace(&rho, &[0]).unwrap()).unwrap();
        let r = full_report(&rho, &cut01(), &OptimizerConfig::default()).unwrap();
        prop_assert!((r.d_left - s_a).abs() < 2e-4);
        prop_assert!((r.d_right - s_a).abs() < 2e-4);
    }
}
