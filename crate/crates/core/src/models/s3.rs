use alloc::string::String;

use super::{Brackets, ContactModel, ManifoldPoint, Mat3, Vec3};
use crate::jet::{Jet, JetVec, Scalar};
use crate::math;

/// Unit quaternions with the left-invariant frame X = q·i, Y = q·j.
///
/// Then [X,Y] = 2q·k, the Reeb field is Z = −2q·k (Hopf fibers, period π) and
/// [X,Z] = 4Y, [Y,Z] = −4X. Two stereographic charts: chart 0 projects from −1
/// (x = v/(1+w)), chart 1 from +1 (x = v/(1−w)); the transition is x ↦ x/|x|².
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct S3;

/// Leave a chart once |x| exceeds this radius; the other chart then sees radius 1/1.5.
pub const CHART_SWITCH_RADIUS: f64 = 1.5;

type Quat<T> = [T; 4];

fn chart_sign(chart: u8) -> f64 {
    if chart == 0 {
        1.0
    } else {
        -1.0
    }
}

fn quat_mul_i<T: Scalar>(q: &Quat<T>) -> Quat<T> {
    [-q[1], q[0], q[3], -q[2]]
}

fn quat_mul_j<T: Scalar>(q: &Quat<T>) -> Quat<T> {
    [-q[2], -q[3], q[0], q[1]]
}

fn quat_mul_k<T: Scalar>(q: &Quat<T>) -> Quat<T> {
    [-q[3], q[2], -q[1], q[0]]
}

impl S3 {
    /// Chart coordinates → unit quaternion (w, v₁, v₂, v₃).
    pub fn quat_generic<T: Scalar>(chart: u8, x: &[T; 3]) -> Quat<T> {
        let sgn = T::cst(chart_sign(chart));
        let one = T::cst(1.0);
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let d = one + s;
        let two_d = T::cst(2.0) / d;
        [sgn * (one - s) / d, x[0] * two_d, x[1] * two_d, x[2] * two_d]
    }

    /// Push an ℝ⁴ tangent vector at `q` (a point of chart `chart` with coordinates `x`)
    /// into chart coordinates.
    pub fn push_generic<T: Scalar>(chart: u8, x: &[T; 3], dq: &Quat<T>) -> [T; 3] {
        let sgn = T::cst(chart_sign(chart));
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let half_d = T::cst(0.5) * (T::cst(1.0) + s);
        let mut out = [T::cst(0.0); 3];
        for i in 0..3 {
            out[i] = half_d * (dq[i + 1] - sgn * x[i] * dq[0]);
        }
        out
    }

    pub fn frame_formula<T: Scalar>(chart: u8, x: [T; 3]) -> [[T; 3]; 2] {
        let q = Self::quat_generic(chart, &x);
        [
            Self::push_generic(chart, &x, &quat_mul_i(&q)),
            Self::push_generic(chart, &x, &quat_mul_j(&q)),
        ]
    }

    pub fn quat(q: &ManifoldPoint) -> [f64; 4] {
        Self::quat_generic(q.chart, &[q.coords[0], q.coords[1], q.coords[2]])
    }

    /// Chart point of a unit quaternion, choosing the chart where |x| ≤ 1.
    pub fn point(qq: &[f64; 4]) -> ManifoldPoint {
        let n = math::sqrt(qq.iter().map(|c| c * c).sum::<f64>());
        let q = [qq[0] / n, qq[1] / n, qq[2] / n, qq[3] / n];
        let (chart, denom) = if q[0] >= 0.0 { (0, 1.0 + q[0]) } else { (1, 1.0 - q[0]) };
        ManifoldPoint::new(chart, [q[1] / denom, q[2] / denom, q[3] / denom])
    }

    /// Chart components of an ℝ⁴ tangent vector based at `q`.
    pub fn push(q: &ManifoldPoint, dq: &[f64; 4]) -> Vec3 {
        Vec3::from(Self::push_generic(
            q.chart,
            &[q.coords[0], q.coords[1], q.coords[2]],
            dq,
        ))
    }

    /// ℝ⁴ components of a chart tangent vector at `q`.
    pub fn lift(q: &ManifoldPoint, v: &Vec3) -> [f64; 4] {
        let x = q.coords;
        let sgn = chart_sign(q.chart);
        let s = x.norm_squared();
        let d = 1.0 + s;
        // differential of x ↦ (sgn(1−s)/d, 2x/d)
        let ds = 2.0 * x.dot(v);
        let dw = -sgn * 2.0 * ds / (d * d);
        let mut out = [dw, 0.0, 0.0, 0.0];
        for i in 0..3 {
            out[i + 1] = 2.0 * v[i] / d - 2.0 * x[i] * ds / (d * d);
        }
        out
    }
}

impl ContactModel for S3 {
    fn name(&self) -> String {
        "s3".into()
    }

    fn chart_count(&self) -> u8 {
        2
    }

    fn frame_jet(&self, q: &ManifoldPoint, order: u8) -> [JetVec; 2] {
        Self::frame_formula(q.chart, Jet::point([q.coords[0], q.coords[1], q.coords[2]], order))
    }

    fn frame(&self, q: &ManifoldPoint) -> [Vec3; 2] {
        let [x, y] = Self::frame_formula(q.chart, [q.coords[0], q.coords[1], q.coords[2]]);
        [Vec3::from(x), Vec3::from(y)]
    }

    fn analytic_brackets(&self, q: &ManifoldPoint) -> Option<Brackets> {
        let qq = Self::quat(q);
        let [x, y] = self.frame(q);
        let k = Self::push(q, &quat_mul_k(&qq));
        Some(Brackets {
            xy: 2.0 * k,
            xz: 4.0 * y,
            yz: -4.0 * x,
        })
    }

    fn preferred_chart(&self, q: &ManifoldPoint) -> Option<u8> {
        (q.coords.norm() > CHART_SWITCH_RADIUS).then_some(1 - q.chart)
    }

    fn transition(&self, q: &ManifoldPoint, to: u8) -> Option<(ManifoldPoint, Mat3)> {
        if to == q.chart {
            return Some((*q, Mat3::identity()));
        }
        if to > 1 {
            return None;
        }
        let x = q.coords;
        let s = x.norm_squared();
        if !(s > 0.0) {
            return None;
        }
        let jac = (Mat3::identity() * s - 2.0 * x * x.transpose()) / (s * s);
        Some((
            ManifoldPoint {
                chart: to,
                coords: x / s,
            },
            jac,
        ))
    }

    fn sample_point(&self, u: [f64; 3]) -> ManifoldPoint {
        // Uniform on S³ via Hopf coordinates.
        let a = math::sqrt(1.0 - u[0]);
        let b = math::sqrt(u[0]);
        let (t1, t2) = (math::TAU * u[1], math::TAU * u[2]);
        Self::point(&[
            a * math::cos(t1),
            a * math::sin(t1),
            b * math::cos(t2),
            b * math::sin(t2),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{structure, to_chart};

    #[test]
    fn chart_round_trip() {
        let qq = [0.3, -0.5, 0.1, 0.806225774829855];
        let p = S3::point(&qq);
        let back = S3::quat(&p);
        for i in 0..4 {
            assert!((back[i] - qq[i]).abs() < 1e-12);
        }
        let other = to_chart(&S3, &p, 1 - p.chart).unwrap();
        let back = S3::quat(&other);
        for i in 0..4 {
            assert!((back[i] - qq[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn push_and_lift_are_inverse_on_tangent_space() {
        let p = ManifoldPoint::new(1, [0.2, -0.4, 0.9]);
        let v = Vec3::new(0.3, 1.0, -0.7);
        let back = S3::push(&p, &S3::lift(&p, &v));
        assert!((back - v).norm() < 1e-13);
    }

    #[test]
    fn structure_constants() {
        for p in [
            ManifoldPoint::new(0, [0.1, 0.2, -0.3]),
            ManifoldPoint::new(1, [1.2, 0.0, 0.4]),
        ] {
            let s = structure(&S3, &p).unwrap();
            let k = S3::push(&p, &quat_mul_k(&S3::quat(&p)));
            assert!((s.z + 2.0 * k).norm() < 1e-12);
            assert!((s.c01[1] - 4.0).abs() < 1e-11 && s.c01[0].abs() < 1e-11);
            assert!((s.c02[0] + 4.0).abs() < 1e-11 && s.c02[1].abs() < 1e-11);
            assert!(s.c12[0].abs() < 1e-11 && s.c12[1].abs() < 1e-11);
            assert!((s.kappa - 4.0).abs() < 1e-10);
            assert!((s.omega_lie - 4.0).abs() < 1e-10);
        }
    }
}
