//! Integrated geodesics against the closed form in the Heisenberg group.

use spiral_core::models::{builtin_model, halton_points, ManifoldPoint, Vec3};
use spiral_core::ode::{IntegratorConfig, Method};
use spiral_core::symplectic::{self, PhasePoint};

/// Unit-speed Heisenberg geodesic from (x0, y0, z0) with initial velocity angle φ and h_Z = h.
/// The velocity angle is ψ = φ − h t; the projection is a circle of radius 1/h.
fn closed_form(q0: [f64; 3], phi: f64, h: f64, t: f64) -> [f64; 3] {
    let psi = phi - h * t;
    let (cx, cy) = (q0[0] + phi.sin() / h, q0[1] - phi.cos() / h);
    let x = cx - psi.sin() / h;
    let y = cy + psi.cos() / h;
    let z = q0[2] + 0.5 * (cx * (psi.cos() - phi.cos()) / h + cy * (psi.sin() - phi.sin()) / h - t / h);
    [x, y, z]
}

fn initial(q0: [f64; 3], phi: f64, h: f64) -> PhasePoint {
    let m = builtin_model("heisenberg", None).unwrap();
    let q = ManifoldPoint::new(0, q0);
    PhasePoint::new(
        q,
        symplectic::covector_from_lifts(m.as_ref(), &q, phi.cos(), phi.sin(), h).unwrap(),
    )
}

#[test]
fn heisenberg_matches_closed_form_over_t20() {
    let m = builtin_model("heisenberg", None).unwrap();
    let cfg = IntegratorConfig::default();
    for (q0, phi, h) in [
        ([0.0, 0.0, 0.0], 0.0, 1.0),
        ([0.3, -0.7, 1.1], 2.1, 1.5),
        ([-1.0, 0.4, -0.2], -0.8, 0.25),
        ([0.5, 0.5, 0.5], 1.0, -2.0),
    ] {
        let tr = symplectic::integrate(
            m.as_ref(),
            symplectic::Hamiltonian::HalfCometric,
            &initial(q0, phi, h),
            20.0,
            &cfg,
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for s in &tr.samples {
            let e = closed_form(q0, phi, h, s.t);
            worst = worst.max((s.z.q.coords - Vec3::from(e)).norm());
        }
        assert!(worst < 1e-6, "h = {h}: {worst}");
        assert!(
            tr.max_gstar_deviation(1.0) < 1e-8,
            "h = {h}: {}",
            tr.max_gstar_deviation(1.0)
        );
    }
}

#[test]
fn straight_line_when_hz_vanishes() {
    let m = builtin_model("heisenberg", None).unwrap();
    let z0 = initial([0.1, 0.2, 0.3], 0.7, 0.0);
    let tr = symplectic::integrate(
        m.as_ref(),
        symplectic::Hamiltonian::HalfCometric,
        &z0,
        5.0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let end = tr.last().z.q.coords;
    assert!((end[0] - (0.1 + 5.0 * 0.7f64.cos())).abs() < 1e-9);
    assert!((end[1] - (0.2 + 5.0 * 0.7f64.sin())).abs() < 1e-9);
}

#[test]
fn cometric_conserved_on_every_model() {
    for name in ["heisenberg", "heisenberg-quotient", "s3"] {
        let m = builtin_model(name, Some(3.0)).unwrap();
        for (i, q) in halton_points(m.as_ref(), 4, 11).into_iter().enumerate() {
            let p = Vec3::new(0.3 + i as f64, -0.4, 2.0 - i as f64);
            let tr = symplectic::geodesic(m.as_ref(), &q, &p, 20.0, &IntegratorConfig::default()).unwrap();
            assert!(
                tr.max_gstar_deviation(1.0) < 1e-8,
                "{name}: {}",
                tr.max_gstar_deviation(1.0)
            );
        }
    }
}

#[test]
fn implicit_midpoint_agrees_at_second_order() {
    let m = builtin_model("heisenberg", None).unwrap();
    let z0 = initial([0.0, 0.0, 0.0], 0.3, 2.0);
    let mut errs = Vec::new();
    for h in [2e-3, 1e-3] {
        let cfg = IntegratorConfig {
            method: Method::ImplicitMidpoint,
            fixed_step: h,
            ..Default::default()
        };
        let tr = symplectic::integrate(m.as_ref(), symplectic::Hamiltonian::HalfCometric, &z0, 2.0, &cfg).unwrap();
        let e = closed_form([0.0; 3], 0.3, 2.0, 2.0);
        errs.push((tr.last().z.q.coords - Vec3::from(e)).norm());
    }
    let ratio = errs[0] / errs[1];
    assert!((3.5..4.5).contains(&ratio), "{errs:?}");
}

#[test]
fn characteristic_data_is_rejected() {
    let m = builtin_model("heisenberg", None).unwrap();
    let q = ManifoldPoint::new(0, [1.0, 2.0, 0.0]);
    // p annihilates X and Y: p ∈ Σ
    let p = Vec3::new(-1.0, 0.5, -1.0);
    assert!(symplectic::geodesic(m.as_ref(), &q, &p, 1.0, &IntegratorConfig::default()).is_err());
}

#[test]
fn library_closed_form_agrees() {
    use spiral_core::models::Heisenberg;
    for (q0, phi, h) in [([0.3, -0.7, 1.1], 2.1, 1.5), ([0.5, 0.5, 0.5], 1.0, -2.0)] {
        for t in [0.0, 0.7, 13.0] {
            let a = Heisenberg::closed_form_geodesic(q0, phi, h, t);
            let b = closed_form(q0, phi, h, t);
            assert!((Vec3::from(a) - Vec3::from(b)).norm() < 1e-12);
        }
    }
    let m = builtin_model("heisenberg", None).unwrap();
    let z0 = initial([0.1, 0.2, 0.3], 0.7, 0.0);
    let tr = symplectic::integrate(
        m.as_ref(),
        symplectic::Hamiltonian::HalfCometric,
        &z0,
        5.0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let end = Heisenberg::closed_form_geodesic([0.1, 0.2, 0.3], 0.7, 0.0, 5.0);
    assert!((tr.last().z.q.coords - Vec3::from(end)).norm() < 1e-9);
}
