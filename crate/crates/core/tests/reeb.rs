use spiral_core::math;
use spiral_core::models::{self, builtin_model, halton_points, ManifoldPoint, Vec3};
use spiral_core::ode::IntegratorConfig;
use spiral_core::reeb::{self, TransportRule};

fn tight() -> IntegratorConfig {
    IntegratorConfig::default().with_tolerance(1e-12)
}

#[test]
fn reeb_flow_examples() {
    let h = builtin_model("heisenberg", None).unwrap();
    let p = reeb::reeb_flow(h.as_ref(), &ManifoldPoint::origin(), 2.0, &tight()).unwrap();
    assert!((p.coords - Vec3::new(0.0, 0.0, -2.0)).norm() < 1e-12);
    assert_eq!(
        reeb::reeb_flow(h.as_ref(), &ManifoldPoint::origin(), 0.0, &tight()).unwrap(),
        ManifoldPoint::origin()
    );
    let hq = builtin_model("heisenberg-quotient", Some(math::TAU)).unwrap();
    let p = reeb::reeb_flow(hq.as_ref(), &ManifoldPoint::origin(), math::TAU, &tight()).unwrap();
    assert!(models::chart_distance(hq.as_ref(), &p, &ManifoldPoint::origin()).unwrap() < 1e-12);
}

#[test]
fn periods() {
    let hq = builtin_model("heisenberg-quotient", Some(math::TAU)).unwrap();
    for q in halton_points(hq.as_ref(), 5, 2) {
        let t = reeb::find_reeb_period(hq.as_ref(), &q, 10.0, reeb::RETURN_TOL, &tight())
            .unwrap()
            .unwrap();
        assert!((t - math::TAU).abs() < 1e-8, "{t}");
    }
    let h = builtin_model("heisenberg", None).unwrap();
    assert_eq!(
        reeb::find_reeb_period(h.as_ref(), &ManifoldPoint::origin(), 20.0, reeb::RETURN_TOL, &tight()).unwrap(),
        None
    );

    let s3 = builtin_model("s3", None).unwrap();
    let base = s3.sample_point([0.3, 0.6, 0.2]);
    let mut found = Vec::new();
    for i in 0..10 {
        let q = reeb::reeb_flow(s3.as_ref(), &base, 0.3 * i as f64, &tight()).unwrap();
        found.push(
            reeb::find_reeb_period(s3.as_ref(), &q, 5.0, reeb::RETURN_TOL, &tight())
                .unwrap()
                .unwrap(),
        );
    }
    let (lo, hi) = found
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), t| (a.min(*t), b.max(*t)));
    assert!(hi - lo < 1e-7, "{found:?}");
    assert!((lo - math::PI).abs() < 1e-8);
}

#[test]
fn transport_is_metric_and_composes() {
    for name in ["heisenberg", "heisenberg-quotient", "s3"] {
        let m = builtin_model(name, Some(math::TAU)).unwrap();
        let q = m.sample_point([0.4, 0.3, 0.7]);
        for rule in [TransportRule::NormalForm, TransportRule::StrainFree] {
            let o = reeb::transport_components(m.as_ref(), &q, [1.0, 0.0], [0.0, 1.0], 10.0, rule, &tight()).unwrap();
            assert!(o.orthonormality_defect() < 1e-7, "{name}");
            assert!(o.samples.iter().all(|s| s.e1[0] * s.e2[1] - s.e1[1] * s.e2[0] > 0.0));
            let mid = o.at(4.0).unwrap();
            let rest = reeb::transport_components(m.as_ref(), &mid.q, mid.e1, mid.e2, 6.0, rule, &tight()).unwrap();
            let (a, b) = (o.samples.last().unwrap(), rest.samples.last().unwrap());
            assert!(models::chart_distance(m.as_ref(), &a.q, &b.q).unwrap() < 1e-7);
            assert!((a.e1[0] - b.e1[0]).abs() + (a.e1[1] - b.e1[1]).abs() < 1e-7);
        }
    }
}

#[test]
fn transported_vectors_stay_in_d() {
    let m = builtin_model("s3", None).unwrap();
    let q = m.sample_point([0.1, 0.9, 0.5]);
    let o = reeb::transport_components(
        m.as_ref(),
        &q,
        [0.6, 0.8],
        [-0.8, 0.6],
        3.0,
        TransportRule::NormalForm,
        &tight(),
    )
    .unwrap();
    for s in o.samples.iter().step_by(5) {
        let [e1, _] = s.frame_vectors(m.as_ref());
        let a = models::contact_form(m.as_ref(), &e1.base).unwrap();
        assert!(a.apply(&e1.v).abs() < 1e-6);
    }
}

#[test]
fn heisenberg_frame_is_constant() {
    let m = builtin_model("heisenberg", None).unwrap();
    let x = models::field(m.as_ref(), models::FieldId::X, &ManifoldPoint::origin()).unwrap();
    let y = models::field(m.as_ref(), models::FieldId::Y, &ManifoldPoint::origin()).unwrap();
    let q = ManifoldPoint::origin();
    let frame = (
        models::TangentVec { base: q, v: x },
        models::TangentVec { base: q, v: y },
    );
    let o = reeb::transport_frame(
        m.as_ref(),
        (&frame.0, &frame.1),
        7.5,
        TransportRule::StrainFree,
        &tight(),
    )
    .unwrap();
    let last = o.samples.last().unwrap();
    assert_eq!((last.e1, last.e2), ([1.0, 0.0], [0.0, 1.0]));
    assert_eq!(o.samples[0].e1, [1.0, 0.0]);
}

#[test]
fn monodromy_values() {
    let hq = builtin_model("heisenberg-quotient", Some(math::TAU)).unwrap();
    for q in halton_points(hq.as_ref(), 3, 0) {
        let o = reeb::periodic_orbit(hq.as_ref(), &q, 10.0, TransportRule::NormalForm, &tight()).unwrap();
        let mono = reeb::monodromy(hq.as_ref(), &o, &tight()).unwrap();
        assert!(mono.reduced.abs() < 1e-7 && mono.accumulated.abs() < 1e-7);
    }

    let s3 = builtin_model("s3", None).unwrap();
    for (rule, expected) in [
        (TransportRule::NormalForm, math::TAU),
        (TransportRule::StrainFree, 2.0 * math::TAU),
    ] {
        let mut seen = Vec::new();
        for q in halton_points(s3.as_ref(), 10, 5) {
            let o = reeb::periodic_orbit(s3.as_ref(), &q, 5.0, rule, &tight()).unwrap();
            let one = reeb::monodromy(s3.as_ref(), &o, &tight()).unwrap();
            let two = reeb::monodromy_loops(s3.as_ref(), &o, 2, &tight()).unwrap();
            assert!((two.accumulated - 2.0 * one.accumulated).abs() < 1e-6);
            seen.push(one.accumulated);
        }
        for a in &seen {
            assert!((a - seen[0]).abs() < 1e-6, "{seen:?}");
        }
        assert!((seen[0] - expected).abs() < 1e-6, "{rule:?}: {}", seen[0]);
    }
}

#[test]
fn missing_period_is_an_error() {
    let h = builtin_model("heisenberg", None).unwrap();
    assert!(reeb::periodic_orbit(
        h.as_ref(),
        &ManifoldPoint::origin(),
        5.0,
        TransportRule::NormalForm,
        &tight()
    )
    .is_err());
}
