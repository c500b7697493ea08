use levyheat::growth::{
    classify_numeric, classify_power_log, model_asymptotes, regime_table, verdict_to_limsup, PowerLogFunction, TailAsymptote,
    Theorem, Verdict,
};
use levyheat::levy::{check_condition, ConditionId, ModelConfig};
use levyheat::tails::Tails;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn f(a: f64, p: f64) -> PowerLogFunction {
    PowerLogFunction::new(1.0, a, p).unwrap()
}

fn tail(g: f64, q: u8) -> TailAsymptote {
    TailAsymptote::new(g, q, 1.0).unwrap()
}

#[test]
fn symbolic_examples() {
    // whole space, d=α=1, β=3: γ=1, threshold p > 1
    assert_eq!(classify_power_log(1, &tail(1.0, 0), &f(1.0, 1.2)), Verdict::Converges);
    assert_eq!(classify_power_log(1, &tail(1.0, 0), &f(1.0, 1.0)), Verdict::Diverges);
    assert_eq!(classify_power_log(1, &tail(1.0, 0), &f(1.0, 0.8)), Verdict::Diverges);
    // lattice, δ=2, f = r^{1/2}(log r)^p: threshold p > 1/2
    assert_eq!(classify_power_log(1, &tail(2.0, 0), &f(0.5, 0.6)), Verdict::Converges);
    assert_eq!(classify_power_log(1, &tail(2.0, 0), &f(0.5, 0.5)), Verdict::Diverges);
    // boundary ∫ dr/(r log r)
    for g in [0.5, 1.0, 2.5] {
        for d in 1..=3 {
            assert_eq!(classify_power_log(d, &tail(g, 0), &f(d as f64 / g, 1.0 / g)), Verdict::Diverges);
        }
    }
    assert_eq!(classify_power_log(2, &tail(1.0, 0), &f(0.0, 3.0)), Verdict::Diverges);
}

#[test]
fn parse_forms() {
    let g = PowerLogFunction::parse("r^1*(log r)^0.5").unwrap();
    assert_eq!((g.c, g.a, g.p), (1.0, 1.0, 0.5));
    let g = PowerLogFunction::parse("2*r^0.5").unwrap();
    assert_eq!((g.c, g.a, g.p), (2.0, 0.5, 0.0));
    let g = PowerLogFunction::parse("(log r)^2*r").unwrap();
    assert_eq!((g.a, g.p), (1.0, 2.0));
    assert!(PowerLogFunction::parse("exp(r)").is_err());
    assert!(PowerLogFunction::parse("(log r)^-1").is_err());
    let g = PowerLogFunction::parse("r^2*(log r)^-1").unwrap();
    assert!(g.r0 >= std::f64::consts::E);
    let g2 = PowerLogFunction::parse(&g.to_string()).unwrap();
    assert_eq!(g, g2);
}

#[test]
fn numeric_examples_with_exact_tau() {
    let m = ModelConfig::pareto(1, 1.0, 1.0, 3.0).unwrap();
    let t = Tails::new(&m).unwrap();
    let tau = |r: f64| t.tau_bar(r);
    let v = classify_numeric(1, tau, |r| r * r, 1e8, 240).unwrap();
    assert_eq!(v.verdict, Verdict::Converges);
    assert_eq!(classify_power_log(1, &tail(1.0, 0), &f(2.0, 0.0)), Verdict::Converges);
    let g = f(1.0, 0.5);
    let v = classify_numeric(1, |r| t.tau_bar(r), |r| g.eval(r), 1e8, 240).unwrap();
    assert_eq!(v.verdict, Verdict::Diverges);
    for d in 1..=3 {
        let v = classify_numeric(d, |r| t.tau_bar(r), |_| 5.0, 1e4, 40).unwrap();
        assert_eq!(v.verdict, Verdict::Diverges);
    }
    assert!(classify_numeric(1, |r| t.tau_bar(r), |r| r, 10.0, 40).is_err());
}

#[test]
fn numeric_agrees_with_symbolic_on_random_cases() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for case in 0..30 {
        let d = rng.random_range(1..=3usize);
        let g = rng.random_range(0.3..2.0);
        let q = rng.random_range(0..=1u8);
        let gap = rng.random_range(0.1..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (a, p) = if case % 2 == 0 {
            // off the critical power
            ((d as f64 + gap) / g, rng.random_range(-1.0..2.0))
        } else {
            // critical power, log exponent decides
            (d as f64 / g, (q as f64 + 1.0 + gap) / g)
        };
        let func = f(a, p);
        let sym = classify_power_log(d, &tail(g, q), &func);
        let ta = tail(g, q);
        let num = classify_numeric(d, |r| Ok(ta.eval(r)), |r| func.eval(r), 1e8, 240).unwrap();
        assert_eq!(num.verdict, sym, "case {case}: d={d} γ={g} q={q} a={a} p={p} {num:?}");
    }
}

#[test]
fn limsup_statements() {
    let m = ModelConfig::pareto(1, 1.0, 1.0, 3.0).unwrap();
    let certs: Vec<_> = ConditionId::ALL.iter().map(|&c| check_condition(&m, c).unwrap()).collect();
    let (tau, _) = model_asymptotes(&m).unwrap();
    let v = classify_power_log(1, &tau, &f(1.0, 2.0));
    let s = verdict_to_limsup(v, Theorem::WholeSpace, &certs).unwrap();
    assert!(s.statement.ends_with("= 0 a.s."), "{}", s.statement);
    let v = classify_power_log(1, &tau, &f(1.0, 0.5));
    let s = verdict_to_limsup(v, Theorem::WholeSpace, &certs).unwrap();
    assert!(s.statement.ends_with("= ∞ a.s."), "{}", s.statement);
    assert_eq!(s.integral, "tau");
    // no certificate, no statement
    assert!(verdict_to_limsup(Verdict::Converges, Theorem::WholeSpace, &[]).is_err());
    assert!(verdict_to_limsup(Verdict::Diverges, Theorem::LatticeUpper, &certs).is_err());
    assert!(verdict_to_limsup(Verdict::Converges, Theorem::LatticeLower, &certs).is_err());
    assert!(verdict_to_limsup(Verdict::Inconclusive, Theorem::WholeSpace, &certs).is_err());
    let failing: Vec<_> = certs.iter().cloned().map(|mut c| {
        c.holds = false;
        c
    }).collect();
    assert!(verdict_to_limsup(Verdict::Converges, Theorem::LatticeUpper, &failing).is_err());
}

#[test]
fn regime_golden_table() {
    let r = regime_table(1, 1.0, 3.0).unwrap();
    assert_eq!((r.gamma, r.delta, r.whole_threshold, r.lattice_threshold), (1.0, 2.0, 1.0, 0.5));
    assert!(!r.same_order);
    let r = regime_table(1, 1.5, 0.9).unwrap();
    assert_eq!((r.gamma, r.delta), (0.9, 0.9));
    assert!(r.same_order);
    let r = regime_table(1, 1.0, 1.0).unwrap();
    assert_eq!((r.q_tau, r.whole_threshold, r.lattice_threshold), (1, 2.0, 1.0));
    // three bands at β = α/d
    let tau = r.tau_asymptote();
    let whole = |p: f64| classify_power_log(1, &tau, &f(1.0, p));
    assert_eq!(whole(2.2), Verdict::Converges);
    assert_eq!(whole(1.5), Verdict::Diverges);
    assert_eq!(classify_power_log(1, &r.eta_asymptote(), &f(1.0, 1.5)), Verdict::Converges);
    assert_eq!(classify_power_log(1, &r.eta_asymptote(), &f(1.0, 0.5)), Verdict::Diverges);
    let r = regime_table(1, 1.0, 2.0).unwrap();
    assert_eq!((r.q_eta, r.lattice_threshold), (1, 1.0));
    assert!(regime_table(1, 1.0, 0.5).is_err());
    assert!(regime_table(2, 1.0, 0.6).is_err());
    let csv = r.csv_row();
    assert_eq!(csv.split(',').count(), levyheat::growth::RegimeRecord::csv_header().split(',').count());
}

proptest! {
    #[test]
    fn symbolic_monotone(d in 1usize..=3, g in 0.1f64..3.0, q in 0u8..=1, a in 0.0f64..5.0, p in 0.0f64..5.0, da in 0.0f64..2.0, dp in 0.0f64..2.0) {
        let t = tail(g, q);
        let lo = classify_power_log(d, &t, &f(a, p));
        let hi = classify_power_log(d, &t, &f(a + da, p + dp));
        prop_assert!(!(lo == Verdict::Converges && hi == Verdict::Diverges));
    }

    #[test]
    fn whole_threshold_matches_classifier(d in 1usize..=3, alpha in 0.2f64..1.95, bf in 1.05f64..4.0, dp in 0.01f64..2.0) {
        let df = d as f64;
        let beta = df / (df + alpha) * bf;
        let r = regime_table(d, alpha, beta).unwrap();
        let a = df / r.gamma;
        prop_assert_eq!(classify_power_log(d, &r.tau_asymptote(), &f(a, r.whole_threshold + dp)), Verdict::Converges);
        prop_assert_eq!(classify_power_log(d, &r.tau_asymptote(), &f(a, r.whole_threshold)), Verdict::Diverges);
        let a = df / r.delta;
        prop_assert_eq!(classify_power_log(d, &r.eta_asymptote(), &f(a, r.lattice_threshold + dp)), Verdict::Converges);
        prop_assert_eq!(classify_power_log(d, &r.eta_asymptote(), &f(a, r.lattice_threshold)), Verdict::Diverges);
    }
}
