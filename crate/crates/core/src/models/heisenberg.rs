use alloc::format;
use alloc::string::String;

use super::{Brackets, ContactModel, ManifoldPoint, Vec3};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetVec, Scalar};
use crate::math;

/// Flat Heisenberg group on ℝ³ with X = ∂x − (y/2)∂z, Y = ∂y + (x/2)∂z, so Z = −∂z.
///
/// The quotient variant identifies z ~ z + T₀, which closes every Reeb orbit with period T₀.
#[derive(Clone, Debug, PartialEq)]
pub struct Heisenberg {
    period: Option<f64>,
}

impl Default for Heisenberg {
    fn default() -> Self {
        Self::new()
    }
}

impl Heisenberg {
    pub fn new() -> Self {
        Self { period: None }
    }

    pub fn quotient(t0: f64) -> Result<Self> {
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("T0 must be positive, got {t0}")));
        }
        Ok(Self { period: Some(t0) })
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn frame_formula<T: Scalar>(x: [T; 3]) -> [[T; 3]; 2] {
        let half = T::cst(0.5);
        [
            [T::cst(1.0), T::cst(0.0), -(half * x[1])],
            [T::cst(0.0), T::cst(1.0), half * x[0]],
        ]
    }

    /// Unit-speed geodesic at time `t` from `q0`, with h_X = cos φ, h_Y = sin φ, h_Z = `h`.
    /// The projection to (x, y) is a circle of radius 1/|h| (a line when h = 0).
    pub fn closed_form_geodesic(q0: [f64; 3], phi: f64, h: f64, t: f64) -> [f64; 3] {
        let (s, c) = (math::sin(phi), math::cos(phi));
        if h == 0.0 {
            return [q0[0] + t * c, q0[1] + t * s, q0[2] + 0.5 * t * (q0[0] * s - q0[1] * c)];
        }
        let psi = phi - h * t;
        let (cx, cy) = (q0[0] + s / h, q0[1] - c / h);
        let (sp, cp) = (math::sin(psi), math::cos(psi));
        [
            cx - sp / h,
            cy + cp / h,
            q0[2] + 0.5 * (cx * (cp - c) / h + cy * (sp - s) / h - t / h),
        ]
    }
}

impl ContactModel for Heisenberg {
    fn name(&self) -> String {
        match self.period {
            None => "heisenberg".into(),
            Some(_) => "heisenberg-quotient".into(),
        }
    }

    fn frame_jet(&self, q: &ManifoldPoint, order: u8) -> [JetVec; 2] {
        Self::frame_formula(Jet::point([q.coords[0], q.coords[1], q.coords[2]], order))
    }

    fn frame(&self, q: &ManifoldPoint) -> [Vec3; 2] {
        let [x, y] = Self::frame_formula([q.coords[0], q.coords[1], q.coords[2]]);
        [Vec3::from(x), Vec3::from(y)]
    }

    fn analytic_brackets(&self, _q: &ManifoldPoint) -> Option<Brackets> {
        Some(Brackets {
            xy: Vec3::new(0.0, 0.0, 1.0),
            xz: Vec3::zeros(),
            yz: Vec3::zeros(),
        })
    }

    fn periods(&self) -> [Option<f64>; 3] {
        [None, None, self.period]
    }

    fn sample_point(&self, u: [f64; 3]) -> ManifoldPoint {
        let z = match self.period {
            Some(t0) => u[2] * t0,
            None => 4.0 * u[2] - 2.0,
        };
        ManifoldPoint::new(0, [4.0 * u[0] - 2.0, 4.0 * u[1] - 2.0, z])
    }
}
