use pdconv::approx_bounds::{certify_bound, sup_deviation, BoundId};
use pdconv::operators::{jackson_component, JacksonKind};
use pdconv::pde_verify::{
    boundary_condition_check, build_field, order_study, Clause, Direction, FieldSource, StudyGrids,
    TimeGrid,
};
use pdconv::{GridSpec, KernelId, QuadratureSpec, TestFunction, Time, WjVariant};

fn t(v: f64) -> Time {
    Time::new(v).unwrap()
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn order_studies_reach_second_order() {
    for c in [Clause::Picard, Clause::MaxwellBoltzmann, Clause::Exponential] {
        let rep = order_study(
            c,
            &TestFunction::cos(1.0),
            &StudyGrids::for_clause(c),
            &quad(),
            FieldSource::Manufactured { a: 1.0 },
            3,
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&rep.observed_order), "{}: {}", rep.pde, rep.observed_order);
    }
}

#[test]
fn operator_fields_match_closed_forms() {
    let x = GridSpec::new(-1.0, 1.0, 21).unwrap();
    let tg = TimeGrid::new(0.5, 1.5, 0.1).unwrap();
    let f = TestFunction::cos(2.0);
    for c in [
        Clause::MaxwellBoltzmann,
        Clause::Picard,
        Clause::PicardJacksonComponent { k: 3 },
        Clause::WeierstrassJacksonComponent { k: 3 },
    ] {
        let m = build_field(c, &f, &x, &tg, &quad(), FieldSource::Manufactured { a: 2.0 }).unwrap();
        let o = build_field(c, &f, &x, &tg, &quad(), FieldSource::OperatorComputed).unwrap();
        let gap = m.values.iter().zip(&o.values).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        assert!(gap < 1e-6, "{c:?}: {gap}");
    }
}

#[test]
fn maxwell_boltzmann_initial_condition() {
    let check = boundary_condition_check(
        KernelId::MaxwellBoltzmann,
        &TestFunction::cos(1.0),
        Direction::Initial,
        &[1.0, 0.5, 0.25, 0.125],
        &quad(),
    )
    .unwrap();
    assert!(check.passed(), "{check:?}");
    for r in &check.rows {
        assert!(r.gap <= r.bound.unwrap());
    }
}

#[test]
fn exponential_final_condition() {
    let check = boundary_condition_check(
        KernelId::Exponential,
        &TestFunction::bump(),
        Direction::Final,
        &[1.0, 2.0, 4.0, 8.0],
        &quad(),
    )
    .unwrap();
    assert!(check.passed(), "{check:?}");
}

#[test]
fn constants_are_reproduced_by_unit_mass_kernels() {
    let f = TestFunction::constant(2.5);
    for k in [
        KernelId::MaxwellBoltzmann,
        KernelId::PicardLaplace,
        KernelId::GaussWeierstrass,
        KernelId::PicardJackson { n: 2 },
        KernelId::WeierstrassJackson { n: 2, variant: WjVariant::Corrected },
    ] {
        let check = boundary_condition_check(k, &f, Direction::Initial, &[1.0, 0.5, 0.25], &quad()).unwrap();
        assert!(check.rows.iter().all(|r| r.gap < 1e-10), "{k}: {check:?}");
    }
}

#[test]
fn weierstrass_components_tend_to_scaled_input() {
    // u_k = (1/√k) W_{kt} f → (1/√k) f
    let f = TestFunction::bump();
    let grid = GridSpec::new(-4.0, 4.0, 161).unwrap();
    for k in 1..=3u32 {
        let scale = 1.0 / (k as f64).sqrt();
        let gaps: Vec<f64> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&tv| {
                let u = jackson_component(JacksonKind::Weierstrass(WjVariant::AsStated), k, t(tv), &f, &grid, &quad())
                    .unwrap();
                grid.nodes()
                    .iter()
                    .zip(&u.values)
                    .fold(0.0f64, |g, (&x, v)| g.max((v - scale * f.eval(x)).abs()))
            })
            .collect();
        // smooth input: the gap is O(kt), so halving t tends to halve it
        assert!(gaps.windows(2).all(|w| w[1] < 0.7 * w[0]), "k={k}: {gaps:?}");
        assert!(gaps[3] < 0.6 * gaps[2], "k={k}: {gaps:?}");
    }
}

#[test]
fn picard_jackson_reproduces_cos_exactly_at_unit_time() {
    // 3/(1+1) − 3/(1+4) + 1/(1+9) = 1
    let gap = sup_deviation(KernelId::PicardJackson { n: 2 }, t(1.0), &TestFunction::cos(1.0), &quad(), 1.0)
        .unwrap();
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn maxwell_boltzmann_bound_on_sin() {
    let rows = certify_bound(BoundId::MaxwellBoltzmann, &TestFunction::sin(1.0), &[0.1, 0.5, 1.0], &quad()).unwrap();
    assert!(rows.iter().all(|r| r.pass == Some(true)), "{rows:?}");
}

#[test]
fn general_bound_for_picard_on_bump() {
    let rows = certify_bound(
        BoundId::General { kernel: KernelId::PicardLaplace },
        &TestFunction::bump(),
        &[0.5],
        &quad(),
    )
    .unwrap();
    assert_eq!(rows[0].pass, Some(true));
}

#[test]
fn picard_second_modulus_ratio_is_stable() {
    let rows = certify_bound(BoundId::PicardOmega2, &TestFunction::abs_sin(), &[0.25, 0.125], &quad()).unwrap();
    assert!(rows.iter().all(|r| r.pass.is_none() && r.ratio.is_finite() && r.ratio > 0.0));
    let change = rows[0].ratio / rows[1].ratio;
    assert!((0.5..2.0).contains(&change), "{rows:?}");
}

#[test]
fn maxwell_boltzmann_error_is_linear_for_lipschitz_inputs() {
    let ts = [0.25, 0.125, 0.0625];
    for f in [TestFunction::sin(1.0), TestFunction::abs_sin(), TestFunction::hat()] {
        let rows = certify_bound(BoundId::MaxwellBoltzmann, &f, &ts, &quad()).unwrap();
        let slopes: Vec<f64> = rows.iter().map(|r| r.lhs / r.t).collect();
        for r in &rows {
            assert!(r.lhs <= 4.0 * r.t, "{f}: {r:?}");
        }
        if f.breakpoints(-10.0, 10.0).is_empty() {
            // smooth input: the error is quadratic, so lhs/t shrinks
            assert!(slopes.windows(2).all(|w| w[1] < w[0]), "{f}: {slopes:?}");
        } else {
            let drift = (slopes[2] / slopes[1] - 1.0).abs();
            assert!(drift < 0.05, "{f}: {slopes:?}");
        }
    }
}
