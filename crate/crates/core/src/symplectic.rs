//! Hamiltonian lifts, the cometric, Poisson brackets and the geodesic flow.
//!
//! Conventions: ω = dq∧dp, {f,g} = ∂_q f ∂_p g − ∂_p f ∂_q g, h⃗ = (∂_p h, −∂_q h), so that
//! {h_V, h_W} = −h_{[V,W]}.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::models::{self, ContactModel, Covec, FieldId, ManifoldPoint, Vec3};
use crate::ode::{self, IntegratorConfig, OdeSystem, Stats, Step};

/// Relative finite-difference step in phase space.
pub const H_PHASE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: ManifoldPoint,
    pub p: Vec3,
}

impl PhasePoint {
    pub fn new(q: ManifoldPoint, p: Vec3) -> Self {
        Self { q, p }
    }

    pub fn covec(&self) -> Covec {
        Covec {
            base: self.q,
            p: self.p,
        }
    }

    pub fn state(&self) -> [f64; 6] {
        let x = self.q.coords;
        [x[0], x[1], x[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn from_state(chart: u8, s: &[f64; 6]) -> Self {
        Self {
            q: ManifoldPoint::new(chart, [s[0], s[1], s[2]]),
            p: Vec3::new(s[3], s[4], s[5]),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            q: self.q,
            p: self.p * s,
        }
    }
}

/// Express a phase point in another chart.
pub fn phase_to_chart(model: &dyn ContactModel, z: &PhasePoint, chart: u8) -> Result<PhasePoint> {
    let c = models::covector_to_chart(model, &z.covec(), chart)?;
    Ok(PhasePoint { q: c.base, p: c.p })
}

/// Hamiltonian functions with analytic gradients, or an arbitrary phase function.
#[derive(Clone, Copy)]
pub enum Hamiltonian<'a> {
    /// g*/2, generating the normal geodesic flow.
    HalfCometric,
    /// The lift h_V of a frame field.
    Lift(FieldId),
    /// Any smooth function; its gradient is taken by central differences.
    Custom(&'a dyn Fn(&PhasePoint) -> f64),
}

impl core::fmt::Debug for Hamiltonian<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::HalfCometric => f.write_str("HalfCometric"),
            Self::Lift(id) => write!(f, "Lift({id:?})"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// `⟨p, V(q)⟩`.
pub fn hamiltonian_lift(model: &dyn ContactModel, v: FieldId, z: &PhasePoint) -> Result<f64> {
    Ok(z.p.dot(&models::field(model, v, &z.q)?))
}

/// `(h_X, h_Y)` at `z`.
pub fn horizontal_lifts(model: &dyn ContactModel, z: &PhasePoint) -> (f64, f64) {
    let [x, y] = model.frame(&z.q);
    (z.p.dot(&x), z.p.dot(&y))
}

/// `g*(q, p) = h_X² + h_Y²`.
pub fn cometric(model: &dyn ContactModel, z: &PhasePoint) -> f64 {
    let (a, b) = horizontal_lifts(model, z);
    a * a + b * b
}

pub fn h_z(model: &dyn ContactModel, z: &PhasePoint) -> Result<f64> {
    hamiltonian_lift(model, FieldId::Z, z)
}

pub fn evaluate(model: &dyn ContactModel, h: &Hamiltonian<'_>, z: &PhasePoint) -> Result<f64> {
    match h {
        Hamiltonian::HalfCometric => Ok(0.5 * cometric(model, z)),
        Hamiltonian::Lift(id) => hamiltonian_lift(model, *id, z),
        Hamiltonian::Custom(f) => Ok(f(z)),
    }
}

fn phase_gradient<F: Fn(&PhasePoint) -> f64>(f: &F, z: &PhasePoint) -> [f64; 6] {
    let s = z.state();
    let mut g = [0.0; 6];
    for i in 0..6 {
        let h = H_PHASE * s[i].abs().max(1.0);
        let mut a = s;
        let mut b = s;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(&PhasePoint::from_state(z.q.chart, &a)) - f(&PhasePoint::from_state(z.q.chart, &b))) / (2.0 * h);
    }
    g
}

/// `{f, g}` by central differences in the chart of `z`.
pub fn poisson_fd<F, G>(f: F, g: G, z: &PhasePoint) -> f64
where
    F: Fn(&PhasePoint) -> f64,
    G: Fn(&PhasePoint) -> f64,
{
    let df = phase_gradient(&f, z);
    let dg = phase_gradient(&g, z);
    (0..3).map(|i| df[i] * dg[i + 3] - df[i + 3] * dg[i]).sum()
}

/// |{h_V, h_W} + h_{[V,W]}| for (V, W) = (X, Y), (X, Z), (Y, Z); brackets of lifts by finite
/// differences, Lie brackets from the model.
pub fn lift_bracket_residuals(model: &dyn ContactModel, z: &PhasePoint) -> Result<[f64; 3]> {
    let pairs = [
        (FieldId::X, FieldId::Y),
        (FieldId::X, FieldId::Z),
        (FieldId::Y, FieldId::Z),
    ];
    let mut out = [0.0; 3];
    for (o, (v, w)) in out.iter_mut().zip(pairs) {
        let hv = |x: &PhasePoint| hamiltonian_lift(model, v, x).unwrap_or(f64::NAN);
        let hw = |x: &PhasePoint| hamiltonian_lift(model, w, x).unwrap_or(f64::NAN);
        let lhs = poisson_fd(hv, hw, z);
        let vw = models::lie_bracket(model, v, w, &z.q)?;
        *o = math::abs(lhs + z.p.dot(&vw.v));
    }
    Ok(out)
}

/// `h⃗ = (∂_p h, −∂_q h)` as six chart components.
pub fn hamiltonian_vector_field(model: &dyn ContactModel, h: &Hamiltonian<'_>, z: &PhasePoint) -> Result<[f64; 6]> {
    let (dq, dp) = match h {
        Hamiltonian::HalfCometric => {
            let ([x, y], [dx, dy]) = model.frame_with_jacobian(&z.q);
            let (a, b) = (z.p.dot(&x), z.p.dot(&y));
            (x * a + y * b, -(dx.transpose() * z.p * a + dy.transpose() * z.p * b))
        }
        Hamiltonian::Lift(id) => {
            let (v, dv) = match id {
                FieldId::X | FieldId::Y => {
                    let ([x, y], [dx, dy]) = model.frame_with_jacobian(&z.q);
                    if *id == FieldId::X {
                        (x, dx)
                    } else {
                        (y, dy)
                    }
                }
                FieldId::Z => models::reeb_with_jacobian(model, &z.q)?,
            };
            (v, -(dv.transpose() * z.p))
        }
        Hamiltonian::Custom(f) => {
            let g = phase_gradient(f, z);
            (Vec3::new(g[3], g[4], g[5]), Vec3::new(-g[0], -g[1], -g[2]))
        }
    };
    Ok([dq[0], dq[1], dq[2], dp[0], dp[1], dp[2]])
}

/// The 6-dimensional chart ODE of a Hamiltonian flow, switching charts when the model asks to.
pub struct PhaseFlow<'a> {
    model: &'a dyn ContactModel,
    hamiltonian: Hamiltonian<'a>,
    chart: u8,
}

impl<'a> PhaseFlow<'a> {
    pub fn new(model: &'a dyn ContactModel, hamiltonian: Hamiltonian<'a>, chart: u8) -> Self {
        Self {
            model,
            hamiltonian,
            chart,
        }
    }
}

impl OdeSystem<6> for PhaseFlow<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 6]) -> Result<[f64; 6]> {
        hamiltonian_vector_field(self.model, &self.hamiltonian, &PhasePoint::from_state(self.chart, y))
    }

    fn remap(&mut self, y: &mut [f64; 6]) -> bool {
        let z = PhasePoint::from_state(self.chart, y);
        let Some(to) = self.model.preferred_chart(&z.q) else {
            return false;
        };
        match phase_to_chart(self.model, &z, to) {
            Ok(w) => {
                *y = w.state();
                self.chart = to;
                true
            }
            Err(_) => false,
        }
    }

    fn tag(&self) -> u8 {
        self.chart
    }
}

/// Phase point from the dense output of a step.
pub fn step_point(step: &Step<6>, t: f64) -> PhasePoint {
    PhasePoint::from_state(step.tag, &step.eval(t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: PhasePoint,
    pub gstar: f64,
    pub hz: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Samples at t = 0 and after every accepted step, in the direction of integration.
    pub samples: Vec<Sample>,
    pub stats: Stats,
    /// max |H(z(t)) − H(z(0))|
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn max_gstar_deviation(&self, target: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| math::abs(s.gstar - target))
            .fold(0.0, f64::max)
    }
}

fn sample(model: &dyn ContactModel, t: f64, z: PhasePoint) -> Result<Sample> {
    Ok(Sample {
        t,
        z,
        gstar: cometric(model, &z),
        hz: h_z(model, &z)?,
    })
}

/// Integrate the flow of `h` for time `t_end` (negative allowed), calling `observer` on each step.
pub fn flow_with<F: FnMut(&Step<6>)>(
    model: &dyn ContactModel,
    h: Hamiltonian<'_>,
    z0: &PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
    observer: F,
) -> Result<(PhasePoint, Stats)> {
    let mut sys = PhaseFlow::new(model, h, z0.q.chart);
    let (chart, y, stats) = ode::integrate(&mut sys, 0.0, z0.state(), t_end, cfg, observer)?;
    Ok((PhasePoint::from_state(chart, &y), stats))
}

/// Integrate `h` from `z0` over [0, T] and record every accepted step.
pub fn integrate(
    model: &dyn ContactModel,
    h: Hamiltonian<'_>,
    z0: &PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let h0 = evaluate(model, &h, z0)?;
    let mut samples = Vec::new();
    samples.push(sample(model, 0.0, *z0)?);
    let mut failure = None;
    let (_, stats) = flow_with(model, h, z0, t_end, cfg, |step| {
        let (chart, y) = step.end_state();
        match sample(model, step.t1, PhasePoint::from_state(chart, &y)) {
            Ok(s) => samples.push(s),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut drift: f64 = 0.0;
    for s in &samples {
        drift = drift.max(math::abs(evaluate(model, &h, &s.z)? - h0));
    }
    Ok(Trajectory {
        samples,
        stats,
        energy_drift: drift,
    })
}

/// Rescale `p0` to the unit cosphere; fails on characteristic data (p0 ∈ Σ).
pub fn normalize(model: &dyn ContactModel, z0: &PhasePoint) -> Result<PhasePoint> {
    let g = cometric(model, z0);
    let scale = z0.p.norm_squared().max(1e-300);
    if !(g > 1e-20 * scale) {
        return Err(Error::CharacteristicData(g));
    }
    Ok(z0.scaled(1.0 / math::sqrt(g)))
}

/// Unit-speed geodesic: rescale p0 so g* = 1, then integrate g*/2.
pub fn geodesic(
    model: &dyn ContactModel,
    q0: &ManifoldPoint,
    p0: &Vec3,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let z0 = normalize(model, &PhasePoint::new(*q0, *p0))?;
    integrate(model, Hamiltonian::HalfCometric, &z0, t_end, cfg)
}

/// Covector at `q` with prescribed lifts (h_X, h_Y, h_Z).
pub fn covector_from_lifts(model: &dyn ContactModel, q: &ManifoldPoint, hx: f64, hy: f64, hz: f64) -> Result<Vec3> {
    let s = models::structure(model, q)?;
    let m = models::Mat3::from_columns(&[s.x, s.y, s.z]);
    let inv = m.transpose().try_inverse().ok_or(Error::DegenerateFrame {
        chart: q.chart,
        coords: [q.coords[0], q.coords[1], q.coords[2]],
    })?;
    Ok(inv * Vec3::new(hx, hy, hz))
}
