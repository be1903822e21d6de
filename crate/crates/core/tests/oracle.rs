use stieltjes::exec::Execution;
use stieltjes::oracle::oracle_integrate_with;
use stieltjes::random::{InstanceGenerator, InstanceShape, IntegrandKind};
use stieltjes::scalar::to_f64;
use stieltjes::substitution::cov_lhs;
use stieltjes::{oracle_integrate, OracleConfig, SampleRule};

fn cfg(mesh: f64, rule: SampleRule) -> OracleConfig {
    OracleConfig::new(mesh, rule).unwrap()
}

#[test]
fn oracle_matches_closed_form_for_continuous_integrands() {
    let mut gen = InstanceGenerator::new(0x5eed);
    let shape = InstanceShape {
        integrand: IntegrandKind::Continuous,
        ..Default::default()
    };
    let mut improving = 0;
    for _ in 0..30 {
        let inst = gen.instance(&shape);
        let lambda = inst.n.compose(&inst.m).unwrap();
        let exact = to_f64(&cov_lhs(&inst.f, &inst.m, &inst.n).unwrap());
        let coarse =
            (oracle_integrate(&inst.f, &lambda, &cfg(1e-3, SampleRule::Midpoint)).unwrap() - exact)
                .abs();
        let fine = (oracle_integrate(&inst.f, &lambda, &cfg(5e-4, SampleRule::Midpoint)).unwrap()
            - exact)
            .abs();
        assert!(coarse <= 1e-3, "{coarse}");
        if fine <= 0.6 * coarse {
            improving += 1;
        }
    }
    assert!(improving >= 27, "{improving}");
}

#[test]
fn oracle_handles_jumps_and_point_values() {
    let mut gen = InstanceGenerator::new(0xa70);
    for _ in 0..30 {
        let inst = gen.instance(&InstanceShape::default());
        let lambda = inst.n.compose(&inst.m).unwrap();
        let exact = to_f64(&cov_lhs(&inst.f, &inst.m, &inst.n).unwrap());
        let approx = oracle_integrate(&inst.f, &lambda, &cfg(1e-3, SampleRule::Midpoint)).unwrap();
        assert!((approx - exact).abs() <= 1e-3, "{approx} vs {exact}");
    }
}

#[test]
fn sample_rules_agree_in_the_limit() {
    let mut gen = InstanceGenerator::new(3);
    let inst = gen.instance(&InstanceShape {
        integrand: IntegrandKind::Continuous,
        max_degree: 1,
        ..Default::default()
    });
    let lambda = inst.n.compose(&inst.m).unwrap();
    let exact = to_f64(&cov_lhs(&inst.f, &inst.m, &inst.n).unwrap());
    let spread = |mesh: f64| {
        [SampleRule::Left, SampleRule::Right, SampleRule::Midpoint]
            .map(|r| (oracle_integrate(&inst.f, &lambda, &cfg(mesh, r)).unwrap() - exact).abs())
            .into_iter()
            .fold(0.0, f64::max)
    };
    let (a, b) = (spread(1e-2), spread(1e-4));
    assert!(b <= a && b <= 1e-2, "{a} {b}");
}

#[test]
fn sequential_and_parallel_sums_are_identical() {
    let mut gen = InstanceGenerator::new(99);
    for _ in 0..5 {
        let inst = gen.instance(&InstanceShape::default());
        let lambda = inst.n.compose(&inst.m).unwrap();
        let c = cfg(1e-5, SampleRule::Midpoint);
        let s = oracle_integrate_with(&inst.f, &lambda, &c, Execution::Sequential).unwrap();
        let p = oracle_integrate_with(&inst.f, &lambda, &c, Execution::Parallel).unwrap();
        assert_eq!(s.to_bits(), p.to_bits());
    }
}
