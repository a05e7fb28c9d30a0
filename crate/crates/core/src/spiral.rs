//! High-momentum geodesics as spirals around Reeb orbits.
//!
//! For a unit-speed geodesic with large h_Z = h₀ the model flow predicts
//! γ(t) ≈ Γ(J₀t/2) − ε i J₀ e^{σ i t/J₀} Y(J₀t/2), with Γ the Reeb orbit of a center point Q₀
//! and Y a transported unit vector of D. The offset sign ε and rotation sense σ depend on
//! orientation conventions and are calibrated once against a short integrated geodesic.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::{self, FitOutcome};
use crate::math;
use crate::models::{self, ContactModel, ManifoldPoint, TangentVec, Vec3};
use crate::ode::{IntegratorConfig, Step};
use crate::reeb::{self, ReebOrbit, TransportRule};
use crate::symplectic::{self, Hamiltonian, PhasePoint};

/// Smallest h₀ accepted as asymptotic.
pub const REGIME_H0: f64 = 5.0;

/// Integrator tolerance for long spiraling geodesics.
pub const SCAN_TOL: f64 = 1e-13;

/// Observables near Σ⁺: ρ̂ = h_Z, Ĵ = √g*/h_Z and the angle θ̂ of (h_E₁, h_E₂).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeCoordinates {
    pub rho_hat: f64,
    pub j_hat: f64,
    pub theta_hat: f64,
    /// (X, Y)-components of the frame (E₁, E₂) θ̂ is measured in.
    pub frame_used: [[f64; 2]; 2],
    /// True when p lies on Σ (g* = 0), where θ̂ is meaningless.
    pub on_sigma: bool,
}

pub const XY_FRAME: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

pub fn cone_coordinates(model: &dyn ContactModel, z: &PhasePoint, frame: [[f64; 2]; 2]) -> Result<ConeCoordinates> {
    let hz = symplectic::h_z(model, z)?;
    if !(hz > 0.0) {
        return Err(Error::WrongCone(hz));
    }
    let (hx, hy) = symplectic::horizontal_lifts(model, z);
    let g = hx * hx + hy * hy;
    let h1 = frame[0][0] * hx + frame[0][1] * hy;
    let h2 = frame[1][0] * hx + frame[1][1] * hy;
    Ok(ConeCoordinates {
        rho_hat: hz,
        j_hat: math::sqrt(g) / hz,
        theta_hat: math::atan2(h2, h1),
        frame_used: frame,
        on_sigma: g <= 1e-24 * z.p.norm_squared(),
    })
}

/// The explicit model flow H_t(m, J, θ) = (R_{Jt/2}(m), J, θ + t/J).
pub fn model_flow(
    model: &dyn ContactModel,
    m: &ManifoldPoint,
    j: f64,
    theta: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(ManifoldPoint, f64, f64)> {
    if !(j > 0.0) {
        return Err(Error::InvalidParameter("J must be positive".into()));
    }
    Ok((reeb::reeb_flow(model, m, 0.5 * j * t, cfg)?, j, theta + t / j))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpiralOptions {
    /// Horizon factor c: predictions are valid for t ∈ [0, c·h₀].
    pub horizon: f64,
    pub rule: TransportRule,
    /// Integrator for the geodesics. The default is tighter than the crate-wide one because
    /// the flat model must agree with its prediction to 1e−8 after hundreds of turns.
    pub cfg: IntegratorConfig,
    /// Integrator for Reeb orbits and calibration.
    pub fine_cfg: IntegratorConfig,
    /// Number of turns of the short geodesic used for calibration.
    pub calibration_loops: u32,
    /// Repeat each error measurement at a looser tolerance to separate integration error.
    pub estimate_noise: bool,
}

impl Default for SpiralOptions {
    fn default() -> Self {
        Self {
            horizon: 0.5,
            rule: TransportRule::NormalForm,
            cfg: IntegratorConfig::default().with_tolerance(SCAN_TOL),
            fine_cfg: IntegratorConfig::default().with_tolerance(1e-12),
            calibration_loops: 4,
            estimate_noise: true,
        }
    }
}

/// The signs fixed by calibration, with the short-horizon errors of all four candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    /// Offset sign: Q₀ = q₀ + ε i J₀ X₀.
    pub eps: i8,
    /// Rotation sense of the velocity: e^{σ i t/J₀}.
    pub sigma: i8,
    /// Time of `calibration_loops` full turns of the velocity.
    pub loop_time: f64,
    /// errors[(ε=+1,−1)][(σ=+1,−1)]
    pub errors: [[f64; 2]; 2],
}

#[derive(Clone, Debug)]
pub struct SpiralPrediction {
    pub q0: ManifoldPoint,
    /// (X, Y)-components of the initial velocity X₀.
    pub x0: [f64; 2],
    pub h0: f64,
    pub j0: f64,
    /// Center Q₀ = Γ(0).
    pub center: ManifoldPoint,
    /// (X, Y)-components of Y₀ at Q₀.
    pub y0: [f64; 2],
    pub phase0: f64,
    pub calibration: Calibration,
    pub center_orbit: ReebOrbit,
    /// Largest t the orbit covers.
    pub t_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictedState {
    pub position: ManifoldPoint,
    pub velocity: TangentVec,
    /// (X, Y)-components of the velocity at Γ(J₀t/2).
    pub velocity_frame: [f64; 2],
}

fn rotate(v: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = (math::sin(a), math::cos(a));
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// i·v in D: rotation X ↦ Y.
fn rot90(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// Initial phase point with (h_X, h_Y) = X₀ and h_Z = h₀ (so g* = 1).
pub fn initial_phase_point(model: &dyn ContactModel, q0: &ManifoldPoint, x0: [f64; 2], h0: f64) -> Result<PhasePoint> {
    let n = math::hypot(x0[0], x0[1]);
    if !(math::abs(n - 1.0) < 1e-9) {
        return Err(Error::InvalidParameter("X0 must be a unit vector of D".into()));
    }
    let p = symplectic::covector_from_lifts(model, q0, x0[0], x0[1], h0)?;
    Ok(PhasePoint::new(*q0, p))
}

/// Q with Q = q₀ + ε J (i v)(Q) in chart coordinates, where (i v) has fixed (X, Y)-components.
fn center_point(model: &dyn ContactModel, q0: &ManifoldPoint, x0: [f64; 2], eps: f64, j: f64) -> ManifoldPoint {
    let iv = rot90(x0);
    let mut q = *q0;
    for _ in 0..50 {
        let [x, y] = model.frame(&q);
        let next = q0.coords + (x * iv[0] + y * iv[1]) * (eps * j);
        let done = (next - q.coords).norm() <= 1e-16 * (1.0 + next.norm());
        q.coords = next;
        if done {
            break;
        }
    }
    q
}

fn frame_angle(model: &dyn ContactModel, z: &PhasePoint) -> f64 {
    let (hx, hy) = symplectic::horizontal_lifts(model, z);
    math::atan2(hy, hx)
}

/// Time after which the velocity has turned `loops` full times, and the turning sense.
fn loop_time(
    model: &dyn ContactModel,
    z0: &PhasePoint,
    h0: f64,
    loops: u32,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64, Vec<Step<6>>)> {
    let target = math::TAU * loops as f64;
    let t_end = 3.0 * target / h0;
    let mut steps: Vec<Step<6>> = Vec::new();
    symplectic::flow_with(model, Hamiltonian::HalfCometric, z0, t_end, cfg, |s| {
        steps.push(s.clone())
    })?;
    let mut lift = 0.0;
    let mut prev = frame_angle(model, z0);
    for (i, s) in steps.iter().enumerate() {
        let a = frame_angle(model, &symplectic::step_point(s, s.t1));
        let next = lift + math::wrap_angle(a - prev);
        if math::abs(next) >= target {
            let sense = if next > 0.0 { 1.0 } else { -1.0 };
            let base = lift;
            let a0 = prev;
            let turned =
                |t: f64| math::abs(base + math::wrap_angle(frame_angle(model, &symplectic::step_point(s, t)) - a0));
            let (mut lo, mut hi) = (s.t0, s.t1);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if turned(m) < target {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            steps.truncate(i + 1);
            return Ok((0.5 * (lo + hi), sense, steps));
        }
        lift = next;
        prev = a;
    }
    Err(Error::Calibration(
        "velocity did not complete the calibration turns".into(),
    ))
}

/// J₀ from the measured loop time: the predicted velocity angle σt/J + β(Jt/2) must match.
#[allow(clippy::too_many_arguments)]
fn calibrate_j(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0: f64,
    eps: f64,
    t_loops: f64,
    sense: f64,
    loops: u32,
    opts: &SpiralOptions,
) -> Result<(f64, ManifoldPoint)> {
    let mut j = 1.0 / h0;
    let mut center = center_point(model, q0, x0, eps, j);
    for _ in 0..4 {
        let orbit = reeb::transport_components(
            model,
            &center,
            [1.0, 0.0],
            [0.0, 1.0],
            0.5 * j * t_loops,
            opts.rule,
            &opts.fine_cfg,
        )?;
        let beta = orbit.accumulated_angle();
        let denom = math::TAU * loops as f64 - sense * beta;
        if !(denom > 0.0) {
            return Err(Error::Calibration("transport angle exceeds the loop angle".into()));
        }
        j = t_loops / denom;
        center = center_point(model, q0, x0, eps, j);
    }
    Ok((j, center))
}

#[allow(clippy::too_many_arguments)]
fn build(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0: f64,
    j0: f64,
    center: ManifoldPoint,
    calibration: Calibration,
    t_max: f64,
    opts: &SpiralOptions,
) -> Result<SpiralPrediction> {
    let tau_max = 0.5 * j0 * t_max;
    let center_orbit = reeb::transport_components(
        model,
        &center,
        [1.0, 0.0],
        [0.0, 1.0],
        tau_max,
        opts.rule,
        &opts.fine_cfg,
    )?;
    Ok(SpiralPrediction {
        q0: *q0,
        x0,
        h0,
        j0,
        center,
        y0: x0,
        phase0: 0.0,
        calibration,
        center_orbit,
        t_max,
    })
}

/// Build the spiral prediction for the geodesic leaving q₀ with velocity X₀ and h_Z = h₀.
pub fn spiral_prediction(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0: f64,
    opts: &SpiralOptions,
) -> Result<SpiralPrediction> {
    if !(h0 >= REGIME_H0) {
        return Err(Error::RegimeGuard(h0));
    }
    let z0 = initial_phase_point(model, q0, x0, h0)?;
    let loops = opts.calibration_loops.max(1);
    let (t_loops, sense, steps) = loop_time(model, &z0, h0, loops, &opts.fine_cfg)?;
    let mut errors = [[f64::INFINITY; 2]; 2];
    let mut candidates = Vec::new();
    for (ei, eps) in [1.0, -1.0].into_iter().enumerate() {
        let (j, center) = calibrate_j(model, q0, x0, h0, eps, t_loops, sense, loops, opts)?;
        for (si, sigma) in [1.0, -1.0].into_iter().enumerate() {
            let cal = Calibration {
                eps: eps as i8,
                sigma: sigma as i8,
                loop_time: t_loops,
                errors: [[0.0; 2]; 2],
            };
            let pred = build(model, q0, x0, h0, j, center, cal, t_loops, opts)?;
            let mut worst: f64 = 0.0;
            for s in &steps {
                let t = s.t1.min(t_loops);
                let z = symplectic::step_point(s, t);
                let p = predict_state(model, &pred, t)?;
                worst = worst.max(models::chart_distance(model, &z.q, &p.position)?);
            }
            errors[ei][si] = worst;
            candidates.push((worst, ei, si, j, center));
        }
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .copied()
        .expect("four candidates");
    let calibration = Calibration {
        eps: [1, -1][best.1],
        sigma: [1, -1][best.2],
        loop_time: t_loops,
        errors,
    };
    let t_max = (opts.horizon * h0).max(t_loops);
    build(model, q0, x0, h0, best.3, best.4, calibration, t_max, opts)
}

/// Predicted position and velocity at time t.
pub fn predict_state(model: &dyn ContactModel, pred: &SpiralPrediction, t: f64) -> Result<PredictedState> {
    if t < 0.0 || t > pred.t_max * (1.0 + 1e-12) {
        return Err(Error::HorizonExceeded { t, max: pred.t_max });
    }
    let tau = (0.5 * pred.j0 * t).min(pred.center_orbit.tau_end());
    let s = pred.center_orbit.at(tau)?;
    // Y(τ) = y0₁E₁(τ) + y0₂E₂(τ), then rotate by σ t / J₀.
    let y = [
        pred.y0[0] * s.e1[0] + pred.y0[1] * s.e2[0],
        pred.y0[0] * s.e1[1] + pred.y0[1] * s.e2[1],
    ];
    let cal = &pred.calibration;
    let v = rotate(y, cal.sigma as f64 * t / pred.j0 + pred.phase0);
    let off = rot90(v);
    let [x, yv] = model.frame(&s.q);
    let offset = (x * off[0] + yv * off[1]) * (-(cal.eps as f64) * pred.j0);
    Ok(PredictedState {
        position: ManifoldPoint {
            chart: s.q.chart,
            coords: s.q.coords + offset,
        },
        velocity: TangentVec {
            base: s.q,
            v: x * v[0] + yv * v[1],
        },
        velocity_frame: v,
    })
}

/// Sup errors of the prediction against the integrated geodesic over t ∈ [0, c·h₀].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpiralError {
    pub h0: f64,
    pub j0: f64,
    pub pos_err: f64,
    /// Chart-component velocity difference (base points Γ(J₀t/2) and γ(t)).
    pub vel_err: f64,
    /// Difference of the (X, Y)-components of the two velocities.
    pub vel_err_frame: f64,
    /// max |Ĵ(t) − Ĵ(0)| along the geodesic.
    pub j_drift: f64,
    /// Integration error estimates for pos_err, vel_err and vel_err_frame (zero when not
    /// estimated). Errors below them carry no information about the prediction.
    pub noise: [f64; 3],
    pub eps: i8,
    pub sigma: i8,
}

/// Tolerance ratio of the second run used to estimate integration error.
const NOISE_TOL_RATIO: f64 = 100.0;

/// sup over the horizon of (position, chart velocity, frame velocity, Ĵ drift) errors.
fn sup_errors(
    model: &dyn ContactModel,
    pred: &SpiralPrediction,
    z0: &PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<[f64; 4]> {
    let j_start = cone_coordinates(model, z0, XY_FRAME)?.j_hat;
    let mut out = [0.0f64; 4];
    let mut check = |t: f64, z: &PhasePoint| -> Result<()> {
        let p = predict_state(model, pred, t)?;
        let [x, y] = model.frame(&z.q);
        let (hx, hy) = (z.p.dot(&x), z.p.dot(&y));
        let v = models::vector_to_chart(model, &p.velocity, z.q.chart)?;
        let jh = cone_coordinates(model, z, XY_FRAME)?.j_hat;
        let errs = [
            models::chart_distance(model, &z.q, &p.position)?,
            (x * hx + y * hy - v.v).norm(),
            math::hypot(hx - p.velocity_frame[0], hy - p.velocity_frame[1]),
            math::abs(jh - j_start),
        ];
        for (o, e) in out.iter_mut().zip(errs) {
            *o = o.max(e);
        }
        Ok(())
    };
    check(0.0, z0)?;
    if t_end == 0.0 {
        return Ok(out);
    }
    let mut failure = None;
    symplectic::flow_with(model, Hamiltonian::HalfCometric, z0, t_end, cfg, |s| {
        if failure.is_some() {
            return;
        }
        let (chart, y) = s.end_state();
        if let Err(e) = check(s.t1, &PhasePoint::from_state(chart, &y)) {
            failure = Some(e);
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn spiral_error(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0: f64,
    opts: &SpiralOptions,
) -> Result<SpiralError> {
    let pred = spiral_prediction(model, q0, x0, h0, opts)?;
    let z0 = initial_phase_point(model, q0, x0, h0)?;
    let t_end = opts.horizon * h0;
    let e = sup_errors(model, &pred, &z0, t_end, &opts.cfg)?;
    let mut noise = [0.0; 3];
    if opts.estimate_noise && t_end > 0.0 {
        // Integration error scales with the tolerance while the prediction error does not;
        // 10× the per-tolerance change is a generous bound on the former.
        let loose = IntegratorConfig {
            rel_tol: opts.cfg.rel_tol * NOISE_TOL_RATIO,
            abs_tol: opts.cfg.abs_tol * NOISE_TOL_RATIO,
            ..opts.cfg
        };
        let l = sup_errors(model, &pred, &z0, t_end, &loose)?;
        for i in 0..3 {
            noise[i] = 10.0 * math::abs(l[i] - e[i]) / (NOISE_TOL_RATIO - 1.0);
        }
    }
    Ok(SpiralError {
        h0,
        j0: pred.j0,
        pos_err: e[0],
        vel_err: e[1],
        vel_err_frame: e[2],
        j_drift: e[3],
        noise,
        eps: pred.calibration.eps,
        sigma: pred.calibration.sigma,
    })
}

/// Errors per h₀ and the log-log slopes of position and velocity errors.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub rows: Vec<SpiralError>,
    pub pos_fit: FitOutcome,
    pub vel_fit: FitOutcome,
    /// Fit of the frame-component velocity error (exact when the normal form is exact).
    pub vel_frame_fit: FitOutcome,
    /// Whether every row reports the same (ε, σ).
    pub signs_stable: bool,
}

impl ScanResult {
    pub fn from_rows(rows: Vec<SpiralError>) -> Self {
        let hs: Vec<f64> = rows.iter().map(|r| r.h0).collect();
        let fit_column = |i: usize, f: fn(&SpiralError) -> f64| {
            let errs: Vec<f64> = rows.iter().map(f).collect();
            let floors: Vec<f64> = rows.iter().map(|r| r.noise[i].max(fit::NOISE_FLOOR)).collect();
            fit::loglog_fit_floors(&hs, &errs, &floors)
        };
        let pos_fit = fit_column(0, |r| r.pos_err);
        let vel_fit = fit_column(1, |r| r.vel_err);
        let vel_frame_fit = fit_column(2, |r| r.vel_err_frame);
        let signs_stable = rows
            .windows(2)
            .all(|w| w[0].eps == w[1].eps && w[0].sigma == w[1].sigma);
        Self {
            rows,
            pos_fit,
            vel_fit,
            vel_frame_fit,
            signs_stable,
        }
    }
}

impl ScanResult {
    /// Position and frame velocity both at the integration noise level.
    pub fn is_exact(&self) -> bool {
        self.pos_fit.is_exact() && self.vel_frame_fit.is_exact()
    }
}

/// A scan needs at least three h₀, all inside the asymptotic regime.
pub fn check_h0_list(h0s: &[f64]) -> Result<()> {
    if h0s.len() < 3 {
        return Err(Error::InvalidParameter("a scan needs at least three h0 values".into()));
    }
    if h0s.iter().any(|h| !(*h >= REGIME_H0)) {
        return Err(Error::RegimeGuard(h0s.iter().copied().fold(f64::INFINITY, f64::min)));
    }
    Ok(())
}

/// Serial convergence scan; callers may evaluate [`spiral_error`] per h₀ concurrently and
/// assemble with [`ScanResult::from_rows`] in the same order.
pub fn convergence_scan(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0s: &[f64],
    opts: &SpiralOptions,
) -> Result<ScanResult> {
    check_h0_list(h0s)?;
    let rows = h0s
        .iter()
        .map(|h| spiral_error(model, q0, x0, *h, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult::from_rows(rows))
}

/// Drift of Ĵ along one geodesic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftRun {
    pub h0: f64,
    pub j_initial: f64,
    pub horizon: f64,
    pub max_drift: f64,
    /// max Ĵ(t)/Ĵ(0)
    pub max_ratio: f64,
    /// max |g*(t) − 1|, the integrator's conservation error.
    pub energy_error: f64,
}

/// Ĵ along the geodesic from (q₀, p₀) (rescaled to g* = 1) over t ∈ [0, T].
pub fn adiabatic_drift(
    model: &dyn ContactModel,
    z0: &PhasePoint,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<DriftRun> {
    let z0 = symplectic::normalize(model, z0)?;
    let c0 = cone_coordinates(model, &z0, XY_FRAME)?;
    let mut run = DriftRun {
        h0: c0.rho_hat,
        j_initial: c0.j_hat,
        horizon,
        max_drift: 0.0,
        max_ratio: 1.0,
        energy_error: 0.0,
    };
    let mut failure = None;
    symplectic::flow_with(model, Hamiltonian::HalfCometric, &z0, horizon, cfg, |s| {
        let (chart, y) = s.end_state();
        let z = PhasePoint::from_state(chart, &y);
        run.energy_error = run.energy_error.max(math::abs(symplectic::cometric(model, &z) - 1.0));
        match cone_coordinates(model, &z, XY_FRAME) {
            Ok(c) => {
                run.max_drift = run.max_drift.max(math::abs(c.j_hat - c0.j_hat));
                run.max_ratio = run.max_ratio.max(c.j_hat / c0.j_hat);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(run),
    }
}

impl DriftRun {
    /// Drift the integrator alone can produce. With g* off by δ the computed Ĵ is off by
    /// about Ĵδ/2, so anything below Ĵ(0)·max|g* − 1| is not resolved.
    pub fn noise_floor(&self) -> f64 {
        (self.j_initial * self.energy_error).max(fit::NOISE_FLOOR)
    }
}

#[derive(Clone, Debug)]
pub struct DriftScan {
    pub runs: Vec<DriftRun>,
    /// Fit of log(max drift) against log(Ĵ(0)); runs whose drift is within the
    /// integrator's own conservation error are excluded (see [`DriftRun::noise_floor`]).
    pub fit: FitOutcome,
    /// Ĵ(t) ≤ 2Ĵ(0) on every run.
    pub bounded: bool,
}

impl DriftScan {
    pub fn from_runs(runs: Vec<DriftRun>) -> Self {
        let js: Vec<f64> = runs.iter().map(|r| r.j_initial).collect();
        let ds: Vec<f64> = runs.iter().map(|r| r.max_drift).collect();
        let floors: Vec<f64> = runs.iter().map(DriftRun::noise_floor).collect();
        let bounded = runs.iter().all(|r| r.max_ratio <= 2.0);
        Self {
            fit: fit::loglog_fit_floors(&js, &ds, &floors),
            runs,
            bounded,
        }
    }

    /// Drift exponent (∞ when every drift is below the noise floor).
    pub fn exponent(&self) -> Option<f64> {
        match self.fit {
            FitOutcome::Exact => Some(f64::INFINITY),
            FitOutcome::Fitted(f) => Some(f.slope),
            FitOutcome::Insufficient { .. } => None,
        }
    }
}

/// One run of the adiabatic scan: initial data (q₀, X₀, h₀), horizon T = c/Ĵ(0).
pub fn adiabatic_run(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0: f64,
    c: f64,
    cfg: &IntegratorConfig,
) -> Result<DriftRun> {
    let z0 = initial_phase_point(model, q0, x0, h0)?;
    let j = cone_coordinates(model, &z0, XY_FRAME)?.j_hat;
    adiabatic_drift(model, &z0, c / j, cfg)
}

pub fn adiabatic_scan(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    x0: [f64; 2],
    h0s: &[f64],
    c: f64,
    cfg: &IntegratorConfig,
) -> Result<DriftScan> {
    check_h0_list(h0s)?;
    let runs = h0s
        .iter()
        .map(|h| adiabatic_run(model, q0, x0, *h, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(DriftScan::from_runs(runs))
}

/// Unit initial velocity (X, Y)-components at angle `a`.
pub fn unit_direction(a: f64) -> [f64; 2] {
    [math::cos(a), math::sin(a)]
}

/// Chart vector of (X, Y)-components at `q`.
pub fn d_vector(model: &dyn ContactModel, q: &ManifoldPoint, c: [f64; 2]) -> Vec3 {
    let [x, y] = model.frame(q);
    x * c[0] + y * c[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Heisenberg;

    #[test]
    fn cone_coordinates_by_hand() {
        let m = Heisenberg::new();
        let z = PhasePoint::new(ManifoldPoint::origin(), Vec3::new(1.0, 0.0, -10.0));
        let c = cone_coordinates(&m, &z, XY_FRAME).unwrap();
        assert_eq!((c.rho_hat, c.j_hat, c.theta_hat), (10.0, 0.1, 0.0));
        assert!(!c.on_sigma);
        let sigma = PhasePoint::new(ManifoldPoint::new(0, [1.0, 2.0, 0.0]), Vec3::new(-1.0, 0.5, -1.0));
        let c = cone_coordinates(&m, &sigma, XY_FRAME).unwrap();
        assert_eq!(c.j_hat, 0.0);
        assert!(c.on_sigma);
        let wrong = PhasePoint::new(ManifoldPoint::origin(), Vec3::new(1.0, 0.0, 10.0));
        assert!(matches!(
            cone_coordinates(&m, &wrong, XY_FRAME),
            Err(Error::WrongCone(_))
        ));
    }

    #[test]
    fn model_flow_substitution() {
        let m = Heisenberg::new();
        let cfg = IntegratorConfig::default();
        let (p, j, th) = model_flow(&m, &ManifoldPoint::origin(), 0.5, 0.0, math::PI, &cfg).unwrap();
        assert!((p.coords - Vec3::new(0.0, 0.0, -math::PI / 4.0)).norm() < 1e-13);
        assert_eq!(j, 0.5);
        assert!((th - math::TAU).abs() < 1e-15);
    }

    #[test]
    fn heisenberg_center_and_signs() {
        let m = Heisenberg::new();
        let pred = spiral_prediction(
            &m,
            &ManifoldPoint::origin(),
            [1.0, 0.0],
            10.0,
            &SpiralOptions::default(),
        )
        .unwrap();
        assert!((pred.j0 - 0.1).abs() < 1e-12, "{}", pred.j0);
        assert!((pred.center.coords - Vec3::new(0.0, -0.1, 0.0)).norm() < 1e-12);
        assert_eq!((pred.calibration.eps, pred.calibration.sigma), (-1, -1));
        let s0 = predict_state(&m, &pred, 0.0).unwrap();
        assert!((s0.position.coords - Vec3::zeros()).norm() < 1e-12);
        assert!((s0.velocity_frame[0] - 1.0).abs() < 1e-15 && s0.velocity_frame[1].abs() < 1e-15);
        // Reeb drift rate ż = −J₀/2
        let s1 = predict_state(&m, &pred, 1.0).unwrap();
        let orbit_z = pred.center_orbit.at(0.05).unwrap().q.coords[2];
        assert!((orbit_z + 0.05).abs() < 1e-12);
        assert!((s1.velocity.v.norm() - 1.0).abs() < 0.02);
        assert!(predict_state(&m, &pred, 10.0).is_err());
    }

    #[test]
    fn regime_guard() {
        let m = Heisenberg::new();
        assert!(matches!(
            spiral_prediction(&m, &ManifoldPoint::origin(), [1.0, 0.0], 4.0, &SpiralOptions::default()),
            Err(Error::RegimeGuard(_))
        ));
    }

    #[test]
    fn zero_horizon_zero_error() {
        let m = Heisenberg::new();
        let opts = SpiralOptions {
            horizon: 0.0,
            ..Default::default()
        };
        let e = spiral_error(&m, &ManifoldPoint::origin(), [0.0, 1.0], 12.0, &opts).unwrap();
        assert_eq!((e.pos_err, e.vel_err_frame), (0.0, 0.0));
        // chart components differ only through the base point: Y(Q₀) − Y(q₀) = (0, 0, J₀/2)
        assert!((e.vel_err - 0.5 * e.j0).abs() < 1e-12);
    }
}
