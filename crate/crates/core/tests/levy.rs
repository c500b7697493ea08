use levyheat::levy::{check_condition, ConditionId, LevyMeasure, Mode, ModelConfig, Moment};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

fn pareto_model(d: usize, alpha: f64, beta: f64) -> ModelConfig {
    ModelConfig::pareto(d, alpha, 1.0, beta).unwrap()
}

fn holds(m: &ModelConfig, c: ConditionId) -> bool {
    check_condition(m, c).unwrap().holds
}

#[test]
fn partial_moment_examples() {
    let l = LevyMeasure::pareto(3.0).unwrap();
    let v = l.partial_moment(1.0, 1.0, f64::INFINITY, false).unwrap();
    assert!((v.value() - 1.5).abs() < 1e-12);
    let l = LevyMeasure::pareto(0.5).unwrap();
    match l.partial_moment(0.5, 1.0, f64::INFINITY, false).unwrap() {
        Moment::Divergent { certificate } => assert!(certificate.pieces.len() >= 8),
        m => panic!("expected divergence, got {m:?}"),
    }
    // λ((0.2, 0.9]) = 0
    let v = LevyMeasure::pareto(1.3).unwrap().partial_moment(-2.0, 0.2, 0.9, true).unwrap();
    assert_eq!(v.value(), 0.0);
    assert!(l.partial_moment(1.0, 2.0, 1.0, false).is_err());
}

#[test]
fn condition_examples() {
    assert!(holds(&pareto_model(1, 1.0, 0.6), ConditionId::SolutionExists));
    assert!(!holds(&pareto_model(1, 1.0, 0.5), ConditionId::SolutionExists));
    for (d, a) in [(1, 0.5), (1, 1.0), (2, 1.5), (3, 1.9)] {
        let m = pareto_model(d, a, 3.0);
        for c in [ConditionId::SolutionExists, ConditionId::EtaFinite, ConditionId::TauFinite] {
            assert!(holds(&m, c), "d={d} a={a} {c:?}");
        }
    }
}

#[test]
fn solution_exists_is_monotone_in_beta() {
    for (d, a) in [(1usize, 1.0), (1, 1.5), (2, 1.0), (3, 0.6)] {
        let crit = d as f64 / (d as f64 + a);
        for i in 0..20 {
            let beta = crit * (0.5 + i as f64 * 0.1);
            let want = beta > crit * (1.0 + 1e-12);
            assert_eq!(holds(&pareto_model(d, a, beta), ConditionId::SolutionExists), want, "d={d} a={a} beta={beta}");
        }
    }
}

#[test]
fn pareto_closed_form_matches_quadrature() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let beta = rng.random_range(0.3..3.0);
        let l = LevyMeasure::pareto(beta).unwrap();
        let q = rng.random_range(-1.0..beta - 0.05);
        let a = rng.random_range(0.5..5.0);
        let b = if rng.random::<f64>() < 0.3 { f64::INFINITY } else { a * rng.random_range(1.5..100.0) };
        let log = rng.random::<bool>();
        let c = l.partial_moment(q, a, b, log).unwrap().value();
        let n = l.partial_moment_quadrature(q, a, b, log).unwrap().value();
        assert!((c / n - 1.0).abs() < 1e-8, "beta={beta} q={q} ({a},{b}] log={log}: {c} vs {n}");
    }
}

#[test]
fn power_density_and_custom() {
    let l = LevyMeasure::power_density(0.5, 2.0, 1.0).unwrap();
    // ∫_0^1 z · z^{-1.5} dz = 2
    let v = l.partial_moment(1.0, 1e-300, 1.0, false).unwrap().value();
    assert!((v - 2.0).abs() < 1e-6, "{v}");
    let m = ModelConfig::new(1, 1.0, 1.0, 0.0, l, Mode::NonCompensated).unwrap();
    assert!((m.m0().unwrap() + 2.0).abs() < 1e-6);
    // κ ≥ 1 has no first moment near 0
    let heavy = LevyMeasure::power_density(1.2, 2.0, 1.0).unwrap();
    assert!(ModelConfig::new(1, 1.5, 1.0, 0.0, heavy.clone(), Mode::NonCompensated).is_err());
    assert!(ModelConfig::new(1, 1.5, 1.0, 0.0, heavy.clone(), Mode::Compensated).is_ok());
    // κ must stay below α/d
    assert!(ModelConfig::new(1, 1.0, 1.0, 0.0, heavy, Mode::Compensated).is_err());

    // custom copy of Pareto(2)
    let c = LevyMeasure::custom(
        Arc::new(|r: f64| if r <= 1.0 { 1.0 } else { r.powf(-2.0) }),
        Arc::new(|z: f64| if z <= 1.0 { 0.0 } else { 2.0 * z.powf(-3.0) }),
        1.0,
    )
    .unwrap();
    let v = c.partial_moment(1.0, 1.0, f64::INFINITY, false).unwrap().value();
    assert!((v - 2.0).abs() < 1e-7, "{v}");
    let bad = LevyMeasure::custom(Arc::new(|r: f64| 1.0 / (1.0 + r)), Arc::new(|z: f64| 5.0 / (1.0 + z).powi(2)), 0.0);
    assert!(bad.is_err());
}

#[test]
fn invalid_models_are_rejected() {
    let l = LevyMeasure::pareto(1.0).unwrap();
    assert!(ModelConfig::new(0, 1.0, 1.0, 0.0, l.clone(), Mode::Compensated).is_err());
    assert!(ModelConfig::new(1, 2.0, 1.0, 0.0, l.clone(), Mode::Compensated).is_err());
    assert!(ModelConfig::new(1, 1.0, 0.0, 0.0, l, Mode::Compensated).is_err());
    assert!(LevyMeasure::pareto(-1.0).is_err());
    assert!(LevyMeasure::power_density(2.5, 1.0, 1.0).is_err());
}

#[test]
fn reports_carry_integrals() {
    let r = check_condition(&pareto_model(1, 1.0, 0.6), ConditionId::SolutionExists).unwrap();
    assert!(!r.integrals.is_empty());
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("SolutionExists"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn eta_finite_implies_tau_finite(d in 1usize..=3, a in 0.3f64..1.95, kf in 0.02f64..0.98, beta in 0.2f64..4.0, pareto in any::<bool>()) {
        let levy = if pareto { LevyMeasure::pareto(beta).unwrap() } else { LevyMeasure::power_density(kf * a / d as f64, beta, 1.0).unwrap() };
        let m = ModelConfig::new(d, a, 1.0, 0.0, levy, Mode::Compensated).unwrap();
        if holds(&m, ConditionId::EtaFinite) {
            prop_assert!(holds(&m, ConditionId::TauFinite));
        }
    }

    #[test]
    fn tail_is_nonincreasing(kappa in 0.05f64..1.95, beta in 0.2f64..4.0, r in 1e-3f64..100.0, dr in 0.0f64..10.0) {
        let l = LevyMeasure::power_density(kappa, beta, 0.7).unwrap();
        prop_assert!(l.tail(r + dr) <= l.tail(r));
        let p = LevyMeasure::pareto(beta).unwrap();
        prop_assert!(p.tail(r + dr) <= p.tail(r));
    }
}
