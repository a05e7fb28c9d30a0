use proptest::prelude::*;
use spiral_core::models::{builtin_model, halton_points, ContactModel, ManifoldPoint, Vec3};
use spiral_core::ode::IntegratorConfig;
use spiral_core::spiral::{self, SpiralOptions, XY_FRAME};
use spiral_core::symplectic::PhasePoint;
use spiral_core::{math, models};

const H0S: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

fn model(name: &str) -> Box<dyn ContactModel> {
    builtin_model(name, Some(math::TAU)).unwrap()
}

#[test]
fn flat_models_are_exact() {
    for name in ["heisenberg", "heisenberg-quotient"] {
        let m = model(name);
        let q0 = ManifoldPoint::new(0, [0.3, -0.2, 0.5]);
        let scan = spiral::convergence_scan(
            m.as_ref(),
            &q0,
            spiral::unit_direction(0.4),
            &H0S,
            &SpiralOptions::default(),
        )
        .unwrap();
        for r in &scan.rows {
            assert!(r.pos_err < 1e-8 && r.vel_err_frame < 1e-8, "{name}: {r:?}");
            assert!(r.j_drift < 1e-10, "{name}: {r:?}");
            // chart components compare vectors at points J₀ apart: X has z-component −y/2
            assert!((r.vel_err - r.j0 / 2.0).abs() < 1e-3 * r.j0);
        }
        assert!(scan.is_exact(), "{name}: {:?} {:?}", scan.pos_fit, scan.vel_frame_fit);
        assert!(scan.signs_stable);
    }
}

#[test]
fn s3_exponents() {
    let m = model("s3");
    let q0 = ManifoldPoint::new(0, [0.2, -0.1, 0.3]);
    let scan = spiral::convergence_scan(
        m.as_ref(),
        &q0,
        spiral::unit_direction(0.4),
        &H0S,
        &SpiralOptions::default(),
    )
    .unwrap();
    let pos = scan.pos_fit.slope().unwrap();
    let vel = scan.vel_fit.slope().unwrap();
    assert!((-2.3..=-1.7).contains(&pos), "{pos}");
    assert!((-1.3..=-0.7).contains(&vel), "{vel}");
    assert!(scan.signs_stable);
    let ratio = scan.rows[0].pos_err / scan.rows[1].pos_err;
    assert!((3.0..=5.3).contains(&ratio), "{ratio}");
}

#[test]
fn s3_full_horizon_stays_within_ten_j0_squared() {
    let m = model("s3");
    let opts = SpiralOptions {
        horizon: 1.0,
        estimate_noise: false,
        ..Default::default()
    };
    let e = spiral::spiral_error(m.as_ref(), &m.sample_point([0.7, 0.2, 0.4]), [0.0, 1.0], 20.0, &opts).unwrap();
    assert!(
        e.pos_err < 10.0 * e.j0 * e.j0,
        "{} vs {}",
        e.pos_err,
        10.0 * e.j0 * e.j0
    );
}

#[test]
fn calibration_is_stable_across_points_and_momenta() {
    for name in ["heisenberg", "s3"] {
        let m = model(name);
        for (i, q) in halton_points(m.as_ref(), 4, 9).into_iter().enumerate() {
            for h0 in [5.0, 13.0, 60.0] {
                let p = spiral::spiral_prediction(
                    m.as_ref(),
                    &q,
                    spiral::unit_direction(i as f64),
                    h0,
                    &SpiralOptions::default(),
                )
                .unwrap();
                assert_eq!((p.calibration.eps, p.calibration.sigma), (-1, -1), "{name} {q:?} {h0}");
            }
        }
    }
}

#[test]
fn prediction_starts_at_the_initial_data() {
    let m = model("s3");
    for (i, q) in halton_points(m.as_ref(), 5, 21).into_iter().enumerate() {
        let x0 = spiral::unit_direction(0.7 * i as f64);
        let p = spiral::spiral_prediction(m.as_ref(), &q, x0, 15.0, &SpiralOptions::default()).unwrap();
        let s = spiral::predict_state(m.as_ref(), &p, 0.0).unwrap();
        assert!(models::chart_distance(m.as_ref(), &s.position, &q).unwrap() < 1e-12);
        assert!((s.velocity_frame[0] - x0[0]).abs() < 1e-12 && (s.velocity_frame[1] - x0[1]).abs() < 1e-12);
        let n = s.velocity.v.norm();
        let d = spiral::d_vector(m.as_ref(), &s.velocity.base, s.velocity_frame).norm();
        assert!((n - d).abs() < 1e-12);
        assert!(spiral::predict_state(m.as_ref(), &p, p.t_max * 1.01).is_err());
    }
}

#[test]
fn adiabatic_invariance() {
    for name in ["heisenberg", "s3"] {
        let m = model(name);
        let cfg = IntegratorConfig::default().with_tolerance(spiral::SCAN_TOL);
        let scan = spiral::adiabatic_scan(
            m.as_ref(),
            &ManifoldPoint::new(0, [0.2, -0.1, 0.3]),
            [1.0, 0.0],
            &H0S,
            0.5,
            &cfg,
        )
        .unwrap();
        assert!(scan.bounded);
        assert!(scan.exponent().unwrap() >= 3.0, "{name}: {:?}", scan.fit);
        if name == "heisenberg" {
            assert!(scan.runs.iter().all(|r| r.max_drift < 1e-10));
        }
    }
}

#[test]
fn model_flow_keeps_j_and_advances_theta() {
    let m = model("s3");
    let q = m.sample_point([0.2, 0.2, 0.2]);
    let cfg = IntegratorConfig::default().with_tolerance(1e-12);
    for t in [0.0, 0.5, 3.0] {
        let (p, j, th) = spiral::model_flow(m.as_ref(), &q, 0.1, 0.3, t, &cfg).unwrap();
        assert_eq!(j, 0.1);
        assert!((th - (0.3 + t / 0.1)).abs() < 1e-12);
        let direct = spiral_core::reeb::reeb_flow(m.as_ref(), &q, 0.05 * t, &cfg).unwrap();
        assert!(models::chart_distance(m.as_ref(), &p, &direct).unwrap() < 1e-12);
    }
}

#[test]
fn model_flow_group_law() {
    let m = model("s3");
    let q = m.sample_point([0.6, 0.1, 0.8]);
    let cfg = IntegratorConfig::default().with_tolerance(1e-12);
    let (p1, j1, th1) = spiral::model_flow(m.as_ref(), &q, 0.2, 1.0, 1.3, &cfg).unwrap();
    let (p2, j2, th2) = spiral::model_flow(m.as_ref(), &p1, j1, th1, 2.4, &cfg).unwrap();
    let (p, j, th) = spiral::model_flow(m.as_ref(), &q, 0.2, 1.0, 3.7, &cfg).unwrap();
    assert!(models::chart_distance(m.as_ref(), &p, &p2).unwrap() < 1e-8);
    assert_eq!(j, j2);
    assert!((th - th2).abs() < 1e-12);
}

proptest! {
    #[test]
    fn cone_coordinates_are_homogeneous(
        x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0,
        px in -2.0f64..2.0, py in -2.0f64..2.0, hz in 0.1f64..20.0,
        lambda in 0.01f64..100.0,
    ) {
        let m = model("s3");
        let q = ManifoldPoint::new(0, [x, y, z]);
        let p = spiral_core::symplectic::covector_from_lifts(m.as_ref(), &q, px, py, hz).unwrap();
        let a = spiral::cone_coordinates(m.as_ref(), &PhasePoint::new(q, p), XY_FRAME).unwrap();
        let b = spiral::cone_coordinates(m.as_ref(), &PhasePoint::new(q, p * lambda), XY_FRAME).unwrap();
        prop_assert!((b.rho_hat - lambda * a.rho_hat).abs() <= 1e-12 * b.rho_hat);
        // Ĵ = √g*/h_Z is homogeneous of degree 0
        prop_assert!((b.j_hat - a.j_hat).abs() <= 1e-12 * a.j_hat.max(1e-300));
        prop_assert!((b.rho_hat * b.j_hat * b.j_hat - lambda * a.rho_hat * a.j_hat * a.j_hat).abs() <= 1e-10 * b.rho_hat);
        prop_assert!((b.theta_hat - a.theta_hat).abs() <= 1e-12);
    }

    #[test]
    fn wrong_cone_is_rejected(px in -2.0f64..2.0, hz in -20.0f64..=0.0) {
        let m = model("heisenberg");
        let q = ManifoldPoint::origin();
        let p = Vec3::new(px, 0.0, -hz);
        prop_assert!(spiral::cone_coordinates(m.as_ref(), &PhasePoint::new(q, p), XY_FRAME).is_err());
    }
}
