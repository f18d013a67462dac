//! Superposition maps: algebraic properties, bound propagation against
//! sampled estimates, and the box checks of the built-in problems.

use proptest::prelude::*;

use boundedflow::catalog::builtin_problem;
use boundedflow::function_core::BoundedFunction;
use boundedflow::maps::{
    estimate_inf, estimate_lipschitz, verify_box, EstimatorConfig, KernelSpec, MapDescriptor,
    TimeFunction,
};

fn probe(a: f64, w: f64, c: f64) -> BoundedFunction {
    BoundedFunction::closed_form(c.abs() + a.abs(), move |t| c + a * (w * t).sin())
}

fn corpus() -> Vec<MapDescriptor> {
    vec![
        MapDescriptor::pointwise("sin", TimeFunction::inverse_quadratic(1.0)),
        MapDescriptor::pointwise("tanh", TimeFunction::cos(0.5, 2.0)),
        MapDescriptor::convolution(KernelSpec::Triangular { radius: 1.0, mass: 1.0 }, "cos", TimeFunction::constant(0.5)),
        MapDescriptor::seminorm("square"),
        MapDescriptor::exp(MapDescriptor::pointwise("identity", TimeFunction::constant(0.3))),
        MapDescriptor::product(vec![
            MapDescriptor::time(TimeFunction::sin(1.0, 1.0)),
            MapDescriptor::pointwise("abs", TimeFunction::constant(1.0)),
        ]),
    ]
}

fn max_diff(a: &BoundedFunction, b: &BoundedFunction, ts: impl Iterator<Item = f64>) -> f64 {
    ts.map(|t| (a.value(t) - b.value(t)).abs()).fold(0.0, f64::max)
}

fn ts() -> impl Iterator<Item = f64> {
    (0..=80).map(|i| -4.0 + 0.1 * i as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scale_is_homogeneous(c in -3.0..3.0f64, a in -1.0..1.0f64, w in 0.1..3.0f64, which in 0usize..6) {
        let m = corpus().swap_remove(which);
        let x = probe(a, w, 0.2);
        let scaled = MapDescriptor::scale(c, m.clone()).apply(&x, 1e-11).unwrap();
        let base = m.apply(&x, 1e-11).unwrap().scaled(c);
        prop_assert!(max_diff(&scaled, &base, ts()) <= 1e-12 * (1.0 + base.sup_bound()));
    }

    #[test]
    fn cache_is_invisible(a in -1.0..1.0f64, w in 0.1..3.0f64, which in 0usize..6) {
        let m = corpus().swap_remove(which);
        let x = probe(a, w, -0.1);
        let cached = m.apply(&x, 1e-11).unwrap();
        let plain = m.apply_uncached(&x, 1e-11).unwrap();
        // Evaluate twice to exercise cache hits.
        let first = max_diff(&cached, &plain, ts());
        let second = max_diff(&cached, &plain, ts());
        prop_assert!(first < 1e-12 && second < 1e-12);
    }

    #[test]
    fn pointwise_maps_are_local(a in -1.0..1.0f64, t in -5.0..5.0f64, bump in 0.1..2.0f64) {
        let m = MapDescriptor::sum(vec![
            MapDescriptor::pointwise("sin", TimeFunction::inverse_quadratic(1.0)),
            MapDescriptor::exp(MapDescriptor::pointwise("tanh", TimeFunction::constant(1.0))),
        ]);
        let x = probe(a, 1.0, 0.0);
        let x2 = x.clone();
        // Differs from x everywhere except at t.
        let y = BoundedFunction::closed_form(x.sup_bound() + bump, move |s| {
            x2.value(s) + bump * (1.0 - (-(s - t) * (s - t)).exp())
        });
        let (mx, my) = (m.apply(&x, 1e-12).unwrap(), m.apply(&y, 1e-12).unwrap());
        prop_assert_eq!(mx.value(t), my.value(t));
        let pw = m.pointwise_map().unwrap();
        prop_assert_eq!(pw.eval(x.value(t), t), mx.value(t));
    }

    #[test]
    fn descriptors_round_trip_through_json(which in 0usize..6) {
        let m = corpus().swap_remove(which);
        let json = serde_json::to_string(&m).unwrap();
        let back: MapDescriptor = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn propagated_lipschitz_dominates_sampled_quotients() {
    let cfg = EstimatorConfig { n_pairs: 1000, n_samples: 41, t0: -4.0, t1: 4.0, quad_tol: 1e-7, ..Default::default() };
    for m in corpus() {
        let est = estimate_lipschitz(&m, -1.0, 1.0, &cfg).unwrap();
        let prop = m.bounds(1.0).unwrap().lipschitz;
        assert!(est <= prop * (1.0 + 1e-9), "{m:?}: estimated {est} > propagated {prop}");
    }
    for id in ["c2pi", "exatt"] {
        let p = builtin_problem(id).unwrap();
        let (k, m) = (p.constants.k, p.constants.m);
        let b = p.constants.input_bound();
        for (d, declared) in [(&p.f, p.constants.lip_f), (&p.g, p.constants.lip_g)] {
            let est = estimate_lipschitz(d, k, m, &cfg).unwrap();
            assert!(est <= d.bounds(b).unwrap().lipschitz * (1.0 + 1e-9) && est <= declared, "{id}");
        }
    }
}

#[test]
fn constant_maps_have_zero_lipschitz_estimate() {
    let m = MapDescriptor::time(TimeFunction::sin(2.0, 1.0));
    assert_eq!(estimate_lipschitz(&m, -1.0, 1.0, &EstimatorConfig::default()).unwrap(), 0.0);
    assert_eq!(m.bounds(5.0).unwrap().lipschitz, 0.0);
}

#[test]
fn sampled_infima_respect_declared_lower_bounds() {
    let cfg = EstimatorConfig::default();
    let c2pi = builtin_problem("c2pi").unwrap();
    let inf = estimate_inf(&c2pi.g, 0.0, 0.5, &cfg).unwrap();
    assert!((4.0..4.1).contains(&inf), "{inf}");
    let exatt = builtin_problem("exatt").unwrap();
    let inf = estimate_inf(&exatt.g, 0.0, 0.4, &cfg).unwrap();
    assert!(inf >= 1.0, "{inf}");
    let g = MapDescriptor::constant(2.5);
    assert_eq!(estimate_inf(&g, -1.0, 1.0, &cfg).unwrap(), 2.5);
}

#[test]
fn ex0_ratio_stays_in_unit_box() {
    let p = builtin_problem("ex0").unwrap();
    let cfg = EstimatorConfig { n_probes: 24, ..Default::default() };
    let rep = verify_box(&p.f, &p.g, -1.0, 1.0, &cfg).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.ratio_min >= -0.5 && rep.ratio_max <= 0.5, "{rep:?}");
}

#[test]
fn exatt_ratio_stays_in_declared_box() {
    let p = builtin_problem("exatt").unwrap();
    let rep = verify_box(&p.f, &p.g, 0.0, 0.4, &EstimatorConfig::default()).unwrap();
    assert!(rep.pass, "{rep:?}");
}
