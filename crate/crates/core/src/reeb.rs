//! Reeb flow, first-return periods, transport of D-frames along Reeb orbits and monodromy.
//!
//! Frames are carried as components in (X, Y). Both transport rules rotate the components at a
//! rate ω(q) along the orbit, so orthonormality and orientation hold by construction:
//!
//! * [`TransportRule::StrainFree`]: Lie transport along Z with the symmetric (strain) part
//!   removed. In components ω = (c²₀₁ − c¹₀₂)/2.
//! * [`TransportRule::NormalForm`]: the strain-free rate minus κ/2, where κ is the
//!   frame-independent curvature invariant of the structure. This is the rate at which the
//!   spiral of a high-momentum geodesic actually turns relative to D; the two rules coincide
//!   on flat models.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::{self, ContactModel, ManifoldPoint, TangentVec};
use crate::ode::{self, IntegratorConfig, OdeSystem, Step};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TransportRule {
    #[default]
    NormalForm,
    StrainFree,
}

/// Distance below which a refined first return counts as closing the orbit.
pub const RETURN_TOL: f64 = 1e-9;

pub fn reeb_field(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<TangentVec> {
    Ok(TangentVec {
        base: *q,
        v: models::reeb_vector(model, q)?,
    })
}

/// Rotation rate of transported frame components at `q`.
pub fn transport_rate(model: &dyn ContactModel, q: &ManifoldPoint, rule: TransportRule) -> Result<f64> {
    let s = models::structure(model, q)?;
    Ok(match rule {
        TransportRule::StrainFree => s.omega_lie,
        TransportRule::NormalForm => s.omega_lie - 0.5 * s.kappa,
    })
}

struct ReebSystem<'a> {
    model: &'a dyn ContactModel,
    chart: u8,
}

fn remap_point(model: &dyn ContactModel, chart: &mut u8, x: &mut [f64]) -> bool {
    let q = ManifoldPoint::new(*chart, [x[0], x[1], x[2]]);
    let Some(to) = model.preferred_chart(&q) else {
        return false;
    };
    match model.transition(&q, to) {
        Some((p, _)) => {
            x[..3].copy_from_slice(p.coords.as_slice());
            *chart = to;
            true
        }
        None => false,
    }
}

impl OdeSystem<3> for ReebSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 3]) -> Result<[f64; 3]> {
        let z = models::reeb_vector(self.model, &ManifoldPoint::new(self.chart, *y))?;
        Ok([z[0], z[1], z[2]])
    }

    fn remap(&mut self, y: &mut [f64; 3]) -> bool {
        remap_point(self.model, &mut self.chart, y)
    }

    fn tag(&self) -> u8 {
        self.chart
    }
}

/// `R_τ(q)`.
pub fn reeb_flow(
    model: &dyn ContactModel,
    q: &ManifoldPoint,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<ManifoldPoint> {
    let mut sys = ReebSystem { model, chart: q.chart };
    let (chart, y, _) = ode::integrate(&mut sys, 0.0, [q.coords[0], q.coords[1], q.coords[2]], tau, cfg, |_| {})?;
    Ok(ManifoldPoint::new(chart, y))
}

fn reeb_flow_from(
    model: &dyn ContactModel,
    chart: u8,
    y: [f64; 3],
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<ManifoldPoint> {
    reeb_flow(model, &ManifoldPoint::new(chart, y), tau, cfg)
}

/// Half the derivative of the squared return distance: (R_τ q ⊖ q)·Z(R_τ q).
fn return_slope(model: &dyn ContactModel, q: &ManifoldPoint, p: &ManifoldPoint) -> Result<(f64, f64, f64)> {
    let p = &models::to_chart(model, p, q.chart).unwrap_or(*p);
    let d = models::chart_difference(model, p, q)?;
    let z = models::reeb_vector(model, p)?;
    Ok((d.dot(&z), d.norm(), z.norm_squared()))
}

/// Primitive period of the Reeb orbit through `q`: the first τ ∈ (0, τ_max] where the flow
/// returns within `tol` (modulo chart periods). `None` if there is no such return.
pub fn find_reeb_period(
    model: &dyn ContactModel,
    q: &ManifoldPoint,
    tau_max: f64,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    if !(tau_max > 0.0) {
        return Err(Error::InvalidParameter("tau_max must be positive".into()));
    }
    let mut steps: Vec<Step<3>> = Vec::new();
    let mut sys = ReebSystem { model, chart: q.chart };
    ode::integrate(
        &mut sys,
        0.0,
        [q.coords[0], q.coords[1], q.coords[2]],
        tau_max,
        cfg,
        |s| steps.push(s.clone()),
    )?;
    const SUB: usize = 8;
    let mut prev: Option<(f64, f64)> = None;
    for step in &steps {
        for k in 1..=SUB {
            let tau = step.t0 + (step.t1 - step.t0) * k as f64 / SUB as f64;
            let p = ManifoldPoint::new(step.tag, step.eval(tau));
            let (phi, _, _) = return_slope(model, q, &p)?;
            if let Some((tau_prev, phi_prev)) = prev {
                if phi_prev < 0.0 && phi >= 0.0 {
                    if let Some(t) = refine_return(model, q, step, tau_prev, tau, tol, cfg)? {
                        return Ok(Some(t));
                    }
                }
            }
            prev = Some((tau, phi));
        }
    }
    Ok(None)
}

fn refine_return(
    model: &dyn ContactModel,
    q: &ManifoldPoint,
    step: &Step<3>,
    lo: f64,
    hi: f64,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<f64>> {
    // Bisection on the dense output, then Newton with exact re-integration from the step start.
    let (mut a, mut b) = (lo, hi);
    let slope_at = |t: f64| return_slope(model, q, &ManifoldPoint::new(step.tag, step.eval(t))).map(|r| r.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if slope_at(m)? < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let mut tau = 0.5 * (a + b);
    let mut dist = f64::INFINITY;
    for _ in 0..4 {
        let p = reeb_flow_from(model, step.tag, step.y0, tau - step.t0, cfg)?;
        let (phi, d, zz) = return_slope(model, q, &p)?;
        dist = d;
        if zz > 0.0 {
            tau -= phi / zz;
        }
    }
    let p = reeb_flow_from(model, step.tag, step.y0, tau - step.t0, cfg)?;
    dist = dist.min(models::chart_distance(model, &p, q)?);
    Ok((dist < tol).then_some(tau))
}

/// One point of a Reeb orbit with the transported frame, as components in (X, Y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSample {
    pub tau: f64,
    pub q: ManifoldPoint,
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

impl OrbitSample {
    /// E₁ and E₂ as chart vectors at `q`.
    pub fn frame_vectors(&self, model: &dyn ContactModel) -> [TangentVec; 2] {
        let [x, y] = model.frame(&self.q);
        [
            TangentVec {
                base: self.q,
                v: x * self.e1[0] + y * self.e1[1],
            },
            TangentVec {
                base: self.q,
                v: x * self.e2[0] + y * self.e2[1],
            },
        ]
    }

    /// Continuous-lift-free angle of E₁ against (X, Y).
    pub fn angle(&self) -> f64 {
        math::atan2(self.e1[1], self.e1[0])
    }
}

/// A Reeb trajectory with a transported orthonormal frame of D along it.
#[derive(Clone, Debug)]
pub struct ReebOrbit {
    pub start: ManifoldPoint,
    pub period: Option<f64>,
    pub rule: TransportRule,
    /// Start and every accepted step, in the direction of integration.
    pub samples: Vec<OrbitSample>,
    steps: Vec<Step<7>>,
}

struct TransportSystem<'a> {
    model: &'a dyn ContactModel,
    chart: u8,
    rule: TransportRule,
}

impl OdeSystem<7> for TransportSystem<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 7]) -> Result<[f64; 7]> {
        let q = ManifoldPoint::new(self.chart, [y[0], y[1], y[2]]);
        let s = models::structure(self.model, &q)?;
        let w = match self.rule {
            TransportRule::StrainFree => s.omega_lie,
            TransportRule::NormalForm => s.omega_lie - 0.5 * s.kappa,
        };
        Ok([s.z[0], s.z[1], s.z[2], -w * y[4], w * y[3], -w * y[6], w * y[5]])
    }

    fn remap(&mut self, y: &mut [f64; 7]) -> bool {
        remap_point(self.model, &mut self.chart, y)
    }

    fn tag(&self) -> u8 {
        self.chart
    }
}

fn sample_of(tag: u8, tau: f64, y: &[f64; 7]) -> OrbitSample {
    OrbitSample {
        tau,
        q: ManifoldPoint::new(tag, [y[0], y[1], y[2]]),
        e1: [y[3], y[4]],
        e2: [y[5], y[6]],
    }
}

/// Components of a D-vector in (X, Y); fails if `v` has a Z-component.
pub fn d_components(model: &dyn ContactModel, v: &TangentVec) -> Result<[f64; 2]> {
    let s = models::structure(model, &v.base)?;
    let c = models::frame_components(&s.x, &s.y, &s.z, &v.v).ok_or(Error::DegenerateFrame {
        chart: v.base.chart,
        coords: [v.base.coords[0], v.base.coords[1], v.base.coords[2]],
    })?;
    if math::abs(c[2]) > 1e-8 * (1.0 + v.v.norm()) {
        return Err(Error::InvalidParameter("frame vector is not in D".into()));
    }
    Ok([c[0], c[1]])
}

/// Transport a frame given by (X, Y)-components along the Reeb flow for Reeb time `tau`.
pub fn transport_components(
    model: &dyn ContactModel,
    q: &ManifoldPoint,
    e1: [f64; 2],
    e2: [f64; 2],
    tau: f64,
    rule: TransportRule,
    cfg: &IntegratorConfig,
) -> Result<ReebOrbit> {
    let y0 = [q.coords[0], q.coords[1], q.coords[2], e1[0], e1[1], e2[0], e2[1]];
    let mut sys = TransportSystem {
        model,
        chart: q.chart,
        rule,
    };
    let mut samples = alloc::vec![sample_of(q.chart, 0.0, &y0)];
    let mut steps = Vec::new();
    ode::integrate(&mut sys, 0.0, y0, tau, cfg, |s| {
        let (tag, y) = s.end_state();
        samples.push(sample_of(tag, s.t1, &y));
        steps.push(s.clone());
    })?;
    Ok(ReebOrbit {
        start: *q,
        period: None,
        rule,
        samples,
        steps,
    })
}

/// Transport a g-orthonormal, positively oriented frame of D(q) for Reeb time `tau`.
pub fn transport_frame(
    model: &dyn ContactModel,
    frame0: (&TangentVec, &TangentVec),
    tau: f64,
    rule: TransportRule,
    cfg: &IntegratorConfig,
) -> Result<ReebOrbit> {
    let q = frame0.0.base;
    let e1 = d_components(model, frame0.0)?;
    let e2 = d_components(model, &TangentVec { base: q, ..*frame0.1 })?;
    let gram = [
        e1[0] * e1[0] + e1[1] * e1[1],
        e1[0] * e2[0] + e1[1] * e2[1],
        e2[0] * e2[0] + e2[1] * e2[1],
    ];
    if math::abs(gram[0] - 1.0) > 1e-9 || math::abs(gram[1]) > 1e-9 || math::abs(gram[2] - 1.0) > 1e-9 {
        return Err(Error::InvalidParameter("initial frame is not g-orthonormal".into()));
    }
    if e1[0] * e2[1] - e1[1] * e2[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "initial frame is not positively oriented".into(),
        ));
    }
    transport_components(model, &q, e1, e2, tau, rule, cfg)
}

/// Periodic Reeb orbit through `q` carrying the transported (X, Y) frame once around.
pub fn periodic_orbit(
    model: &dyn ContactModel,
    q: &ManifoldPoint,
    tau_max: f64,
    rule: TransportRule,
    cfg: &IntegratorConfig,
) -> Result<ReebOrbit> {
    let period = find_reeb_period(model, q, tau_max, RETURN_TOL, cfg)?.ok_or(Error::MissingPeriod)?;
    let mut orbit = transport_components(model, q, [1.0, 0.0], [0.0, 1.0], period, rule, cfg)?;
    orbit.period = Some(period);
    Ok(orbit)
}

impl ReebOrbit {
    /// Reeb time covered by the samples.
    pub fn tau_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.tau)
    }

    /// Orbit point and transported frame at Reeb time `tau` (dense output).
    pub fn at(&self, tau: f64) -> Result<OrbitSample> {
        let end = self.tau_end();
        let (lo, hi) = if end >= 0.0 { (0.0, end) } else { (end, 0.0) };
        if tau < lo - 1e-12 || tau > hi + 1e-12 {
            return Err(Error::HorizonExceeded { t: tau, max: end });
        }
        if self.steps.is_empty() || tau == 0.0 {
            return Ok(self.samples[0]);
        }
        let forward = end > 0.0;
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t1 < tau } else { s.t1 > tau });
        let s = &self.steps[idx.min(self.steps.len() - 1)];
        Ok(sample_of(s.tag, tau, &s.eval(tau)))
    }

    /// Continuous lift of the E₁ angle against (X, Y) along the samples.
    pub fn accumulated_angle(&self) -> f64 {
        let mut acc = 0.0;
        let mut prev = self.samples[0].angle();
        for s in &self.samples[1..] {
            let a = s.angle();
            acc += math::wrap_angle(a - prev);
            prev = a;
        }
        acc
    }

    /// Largest deviation of the transported frame from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let g11 = s.e1[0] * s.e1[0] + s.e1[1] * s.e1[1] - 1.0;
                let g22 = s.e2[0] * s.e2[0] + s.e2[1] * s.e2[1] - 1.0;
                let g12 = s.e1[0] * s.e2[0] + s.e1[1] * s.e2[1];
                math::abs(g11).max(math::abs(g22)).max(math::abs(g12))
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy {
    /// Rotation of the returned frame in D(start), reduced to (−π, π].
    pub reduced: f64,
    /// Continuous angle accumulated once around the orbit (no reduction).
    pub accumulated: f64,
    /// Chart distance between the orbit end point and its start.
    pub return_mismatch: f64,
}

/// Tolerance on the closure of the orbit and of the transported frame.
pub const MONODROMY_TOL: f64 = 1e-7;

/// Monodromy of the transport once around a periodic orbit (orientation of D given by (X, Y)).
pub fn monodromy(model: &dyn ContactModel, orbit: &ReebOrbit, cfg: &IntegratorConfig) -> Result<Monodromy> {
    monodromy_loops(model, orbit, 1, cfg)
}

/// Monodromy of `loops` traversals.
pub fn monodromy_loops(
    model: &dyn ContactModel,
    orbit: &ReebOrbit,
    loops: u32,
    cfg: &IntegratorConfig,
) -> Result<Monodromy> {
    let period = orbit.period.ok_or(Error::MissingPeriod)?;
    let tr = transport_components(
        model,
        &orbit.start,
        [1.0, 0.0],
        [0.0, 1.0],
        period * loops as f64,
        orbit.rule,
        cfg,
    )?;
    let end = tr.samples.last().expect("nonempty");
    let mismatch = models::chart_distance(model, &end.q, &orbit.start)?;
    if !(mismatch < MONODROMY_TOL) {
        return Err(Error::MonodromyMismatch(mismatch));
    }
    let accumulated = tr.accumulated_angle();
    Ok(Monodromy {
        reduced: math::wrap_angle(accumulated),
        accumulated,
        return_mismatch: mismatch,
    })
}

/// Angle between two D-vectors at the same point, in the orientation of (X, Y).
pub fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    math::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
}
