//! Randomized invariants: kernel symmetry and monotonicity, the lambda -> 0
//! bridge to the Newtonian kernel, and cloud determinism.

use heatwave::kernels::{green_kernel, newtonian_kernel};
use heatwave::particles::{generate_cloud, MediumSpec};
use heatwave::Point3;
use proptest::prelude::*;
use std::f64::consts::PI;

fn point() -> impl Strategy<Value = Point3> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, c)| Point3::new(a, b, c))
}

fn separated_pair() -> impl Strategy<Value = (Point3, Point3)> {
    (point(), point()).prop_filter("distinct points", |(x, y)| x.dist(y) > 1e-6)
}

proptest! {
    #[test]
    fn kernel_is_symmetric((x, y) in separated_pair(), lambda in 0.0..100.0f64) {
        let a = green_kernel(&x, &y, lambda).unwrap();
        let b = green_kernel(&y, &x, lambda).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn kernel_is_nonincreasing_in_lambda(
        (x, y) in separated_pair(),
        lambda in 0.0..50.0f64,
        bump in 0.0..50.0f64,
    ) {
        let lo = green_kernel(&x, &y, lambda).unwrap();
        let hi = green_kernel(&x, &y, lambda + bump).unwrap();
        prop_assert!(hi <= lo);
    }

    #[test]
    fn kernel_is_nonincreasing_in_distance(
        x in point(),
        dir in point().prop_filter("nonzero", |d| d.norm() > 1e-3),
        r in 1e-4..5.0f64,
        stretch in 1.0..10.0f64,
        lambda in 0.0..50.0f64,
    ) {
        let u = dir.scale(1.0 / dir.norm());
        let near = x.add(&u.scale(r));
        let far = x.add(&u.scale(r * stretch));
        let g_near = green_kernel(&x, &near, lambda).unwrap();
        let g_far = green_kernel(&x, &far, lambda).unwrap();
        prop_assert!(g_far <= g_near);
    }

    #[test]
    fn kernel_approaches_the_newtonian_kernel(
        (x, y) in separated_pair(),
        lambda in 0.0..10.0f64,
    ) {
        // 1 - e^{-sqrt(lambda) r} <= sqrt(lambda) r cancels the 1/r
        let g0 = newtonian_kernel(&x, &y).unwrap();
        let g = green_kernel(&x, &y, lambda).unwrap();
        prop_assert!(g <= g0 + 1e-15);
        prop_assert!(g0 - g <= lambda.sqrt() / (4.0 * PI) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cloud_generation_is_deterministic(seed in any::<u64>(), a in 0.02..0.08f64) {
        let spec = MediumSpec::unit_cube(1.0, 1.0, 0.0);
        let c1 = generate_cloud(&spec, a, seed).unwrap();
        let c2 = generate_cloud(&spec, a, seed).unwrap();
        prop_assert_eq!(c1.to_json(), c2.to_json());
    }

    #[test]
    fn cloud_respects_the_spacing_bound(seed in any::<u64>(), a in 0.02..0.08f64) {
        let spec = MediumSpec::unit_cube(1.0, 1.0, 0.0);
        let cloud = generate_cloud(&spec, a, seed).unwrap();
        prop_assert!(cloud.d_min >= 2.0 * a * (1.0 - 1e-12));
        prop_assert!(cloud.validate().is_ok());
    }
}
