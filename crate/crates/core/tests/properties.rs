use pdconv::approx_bounds::{modulus, ModulusQuery, MODULUS_RTOL};
use pdconv::kernels::{eval_density, first_abs_moment, MomentMethod};
use pdconv::pde_verify::{residual, Clause, SpaceTimeField, TimeGrid};
use pdconv::spectral::symbol;
use pdconv::{GridFunction, GridSpec, KernelId, TestFunction, Time, WjVariant};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = KernelId> {
    prop_oneof![
        Just(KernelId::MaxwellBoltzmann),
        Just(KernelId::PicardLaplace),
        Just(KernelId::Exponential),
        Just(KernelId::GaussWeierstrass),
        (1u32..=4).prop_map(|n| KernelId::PicardJackson { n }),
        (1u32..=4).prop_map(|n| KernelId::WeierstrassJackson { n, variant: WjVariant::AsStated }),
        (1u32..=4).prop_map(|n| KernelId::WeierstrassJackson { n, variant: WjVariant::Corrected }),
    ]
}

fn density_family() -> impl Strategy<Value = KernelId> {
    prop_oneof![
        Just(KernelId::MaxwellBoltzmann),
        Just(KernelId::PicardLaplace),
        Just(KernelId::Exponential),
        Just(KernelId::GaussWeierstrass),
    ]
}

fn descriptor() -> impl Strategy<Value = TestFunction> {
    prop_oneof![
        Just(TestFunction::cos(1.0)),
        Just(TestFunction::sin(1.0)),
        Just(TestFunction::bump()),
        Just(TestFunction::abs_sin()),
        Just(TestFunction::hat()),
    ]
}

fn clause() -> impl Strategy<Value = Clause> {
    prop_oneof![
        Just(Clause::MaxwellBoltzmann),
        Just(Clause::Picard),
        Just(Clause::Exponential),
        (1u32..=4).prop_map(|k| Clause::PicardJacksonComponent { k }),
        (1u32..=4).prop_map(|k| Clause::WeierstrassJacksonComponent { k }),
    ]
}

proptest! {
    #[test]
    fn densities_are_even(k in kernel(), t in 0.05f64..8.0, x in -20.0f64..20.0) {
        let t = Time::new(t).unwrap();
        prop_assert_eq!(eval_density(k, t, x), eval_density(k, t, -x));
    }

    #[test]
    fn densities_are_nonnegative(k in density_family(), t in 0.05f64..8.0, x in -20.0f64..20.0) {
        prop_assert!(eval_density(k, Time::new(t).unwrap(), x) >= 0.0);
    }

    #[test]
    fn picard_and_exponential_swap_under_reciprocal_time(t in 0.05f64..20.0, x in -30.0f64..30.0) {
        let p = eval_density(KernelId::PicardLaplace, Time::new(t).unwrap(), x);
        let e = eval_density(KernelId::Exponential, Time::new(1.0 / t).unwrap(), x);
        // rounding of the exponent |x|/t is amplified by its size
        prop_assert!((p - e).abs() <= 1e-15 * (1.0 + x.abs() / t) * p);
    }

    #[test]
    fn symbol_at_zero_is_total_mass(k in kernel(), t in 0.05f64..8.0) {
        let m = symbol(k, Time::new(t).unwrap(), 0.0);
        prop_assert!((m - k.total_mass()).abs() < 1e-14);
    }

    #[test]
    fn density_symbols_are_bounded_by_one(k in density_family(), t in 0.05f64..8.0, xi in -50.0f64..50.0) {
        prop_assert!(symbol(k, Time::new(t).unwrap(), xi).abs() <= 1.0);
    }

    #[test]
    fn maxwell_boltzmann_moment_is_below_two_t(t in 0.05f64..20.0) {
        let t = Time::new(t).unwrap();
        let phi = first_abs_moment(KernelId::MaxwellBoltzmann, t, MomentMethod::Quadrature).unwrap();
        prop_assert!(phi < 2.0 * t.get());
    }

    #[test]
    fn csv_round_trip_is_exact(
        x_min in -100.0f64..100.0,
        dx in 1e-3f64..2.0,
        values in prop::collection::vec(-1e6f64..1e6, 2..64),
    ) {
        let g = GridFunction::new(x_min, dx, values).unwrap();
        let back = GridFunction::from_csv(&g.to_csv()).unwrap();
        prop_assert_eq!(back.values, g.values);
        prop_assert!((back.dx - g.dx).abs() <= 1e-9 * g.dx);
    }

    #[test]
    fn constant_fields_have_no_residual(c in clause(), v in -10.0f64..10.0) {
        let x = GridSpec::new(-1.0, 1.0, 21).unwrap();
        let t = TimeGrid::new(1.0, 2.0, 0.1).unwrap();
        let r = residual(&SpaceTimeField::constant(c, x, t, v)).unwrap();
        prop_assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn descriptors_survive_json(f in descriptor()) {
        let back: TestFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modulus_is_monotone_and_subadditive(f in descriptor(), delta in 0.05f64..2.0) {
        let w = |d: f64| modulus(&ModulusQuery::new(f.clone(), 1, d)).unwrap();
        let (w1, w2) = (w(delta), w(2.0 * delta));
        // sampled estimates are lower bounds within the 1% refinement rule
        prop_assert!(w2 >= w1 * (1.0 - MODULUS_RTOL), "w(2d) = {w2}, w(d) = {w1}");
        prop_assert!(w2 <= 2.0 * w1 + 1e-9, "w(2d) = {w2}, w(d) = {w1}");
    }
}

#[test]
fn kernel_ids_survive_json() {
    for k in [
        KernelId::MaxwellBoltzmann,
        KernelId::PicardJackson { n: 3 },
        KernelId::WeierstrassJackson { n: 2, variant: WjVariant::Corrected },
    ] {
        let text = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<KernelId>(&text).unwrap(), k);
    }
}
