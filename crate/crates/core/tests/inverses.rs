use proptest::prelude::*;
use stieltjes::random::{FlatContinuity, InstanceGenerator, InstanceShape};
use stieltjes::scalar::{ratio, Scalar};
use stieltjes::{measure_from, pushforward_mass, Interval, MonotoneFn, Side};

fn shape() -> InstanceShape {
    InstanceShape::default()
}

fn range_points(gen: &mut InstanceGenerator, m: &MonotoneFn, k: usize) -> Vec<Scalar> {
    let (a, b) = (m.start_value().clone(), m.end_value().clone());
    let mut ys: Vec<Scalar> = (0..k).map(|_| gen.point(&a, &b)).collect();
    for bp in m.breakpoints() {
        ys.extend([bp.left.clone(), bp.value.clone(), bp.right.clone()]);
    }
    ys
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn galois_connection(seed in any::<u64>()) {
        let mut gen = InstanceGenerator::new(seed);
        let m = gen.instance(&shape()).m;
        let mut xs = m.sample_points(8);
        xs.extend((0..16).map(|_| gen.point(m.lo(), m.hi())));
        for y in range_points(&mut gen, &m, 16) {
            let x_low = m.lower_inverse_at(&y).unwrap();
            let x_up = m.upper_inverse_at(&y).unwrap();
            prop_assert!(x_low <= x_up);
            for x in &xs {
                // X(y) <= x  <=>  y <= M(x+)
                prop_assert_eq!(&x_low <= x, y <= m.eval_at(x, Side::Right).unwrap());
                // x <= Ξ(y)  <=>  M(x-) <= y
                prop_assert_eq!(x <= &x_up, m.eval_at(x, Side::Left).unwrap() <= y);
            }
        }
    }

    #[test]
    fn inverse_functions_match_pointwise(seed in any::<u64>()) {
        let mut gen = InstanceGenerator::new(seed);
        let m = gen.instance(&shape()).m;
        let x = m.left_inverse().unwrap();
        let xi = m.right_inverse().unwrap();
        prop_assert!(x.is_left_continuous());
        prop_assert!(xi.is_right_continuous());
        let theta = gen.theta();
        let w = m.selector_inverse(&theta).unwrap();
        for y in range_points(&mut gen, &m, 24) {
            let lo = m.lower_inverse_at(&y).unwrap();
            let hi = m.upper_inverse_at(&y).unwrap();
            prop_assert_eq!(x.value(&y).unwrap(), lo.clone());
            prop_assert_eq!(xi.value(&y).unwrap(), hi.clone());
            let wy = w.value(&y).unwrap();
            prop_assert!(lo <= wy && wy <= hi);
        }
    }

    #[test]
    fn inverse_is_a_right_inverse_when_continuous(seed in any::<u64>()) {
        let mut gen = InstanceGenerator::new(seed);
        let m = gen.instance(&InstanceShape { m_continuous: true, ..shape() }).m;
        let x = m.left_inverse().unwrap();
        let xi = m.right_inverse().unwrap();
        for y in range_points(&mut gen, &m, 24) {
            prop_assert_eq!(m.value(&x.value(&y).unwrap()).unwrap(), y.clone());
            prop_assert_eq!(m.value(&xi.value(&y).unwrap()).unwrap(), y);
        }
    }

    #[test]
    fn composition_is_pointwise_exact(seed in any::<u64>()) {
        let mut gen = InstanceGenerator::new(seed);
        let inst = gen.instance(&shape());
        let lambda = inst.n.compose(&inst.m).unwrap();
        let mut xs = inst.m.sample_points(8);
        xs.extend((0..32).map(|_| gen.point(inst.m.lo(), inst.m.hi())));
        for x in xs {
            let inner = inst.m.value(&x).unwrap();
            prop_assert_eq!(lambda.value(&x).unwrap(), inst.n.value(&inner).unwrap());
        }
        for w in lambda.breakpoints().windows(2) {
            prop_assert!(w[0].right <= w[1].left);
        }
    }

    #[test]
    fn measure_of_the_domain_is_the_rise(seed in any::<u64>()) {
        let mut gen = InstanceGenerator::new(seed);
        let m = gen.instance(&shape()).m;
        let mu = measure_from(&m);
        let rise = m.end_value() - m.start_value();
        prop_assert_eq!(mu.total_mass(), rise);
        let whole = Interval::closed(m.lo().clone(), m.hi().clone());
        prop_assert_eq!(mu.mass(&whole).unwrap(), mu.total_mass());
        // additivity over a random split point, both ways of assigning it
        let c = gen.point(m.lo(), m.hi());
        let left = mu.mass(&Interval::right_open(m.lo().clone(), c.clone())).unwrap();
        let right = mu.mass(&Interval::closed(c.clone(), m.hi().clone())).unwrap();
        prop_assert_eq!(&left + &right, mu.total_mass());
        let mid = mu.mass(&Interval::open(m.lo().clone(), m.hi().clone())).unwrap();
        let ends = mu.atom_mass(m.lo()) + mu.atom_mass(m.hi());
        prop_assert_eq!(mid + ends, mu.total_mass());
        // μ([lo, x]) = M(x+) - M(lo)
        let upto = mu.mass(&Interval::closed(m.lo().clone(), c.clone())).unwrap();
        prop_assert_eq!(upto, m.eval_at(&c, Side::Right).unwrap() - m.start_value());
    }

    #[test]
    fn mass_splits_between_the_inverses(seed in any::<u64>(), right in any::<bool>()) {
        let rule = if right { FlatContinuity::Right } else { FlatContinuity::Left };
        let mut gen = InstanceGenerator::new(seed);
        let inst = gen.instance(&InstanceShape { n_at_flats: rule, ..shape() });
        let (a, b) = (inst.m.start_value().clone(), inst.m.end_value().clone());
        let nu = measure_from(&inst.n.restrict(&a, &b).unwrap());
        let lambda = measure_from(&inst.n.compose(&inst.m).unwrap());
        let w = if right { inst.m.left_inverse() } else { inst.m.right_inverse() }.unwrap();
        for _ in 0..20 {
            let p = gen.point(inst.m.lo(), inst.m.hi());
            let q = gen.point(inst.m.lo(), inst.m.hi());
            let iv = Interval::closed(p.clone().min(q.clone()), p.max(q));
            prop_assert_eq!(lambda.mass(&iv).unwrap(), pushforward_mass(&nu, &w, &iv).unwrap());
        }
        for bp in inst.m.breakpoints() {
            let iv = Interval::singleton(bp.x.clone());
            prop_assert_eq!(lambda.mass(&iv).unwrap(), pushforward_mass(&nu, &w, &iv).unwrap());
        }
    }
}

#[test]
fn fix1_witness_mismatch() {
    let m = stieltjes::fixtures::fix1_m();
    let n = stieltjes::fixtures::fix1_n();
    let nu = measure_from(&n);
    let lambda = measure_from(&n.compose(&m).unwrap());
    let x = m.left_inverse().unwrap();
    let iv = Interval::closed(ratio(0, 1), ratio(3, 2));
    let mismatch = pushforward_mass(&nu, &x, &iv).unwrap() - lambda.mass(&iv).unwrap();
    assert_eq!(mismatch, ratio(1, 2));
}
