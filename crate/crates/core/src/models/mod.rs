//! Contact sub-Riemannian 3-manifold models: charts, oriented orthonormal frame (X, Y) of D,
//! and everything derived from the frame (brackets, Reeb field, contact form).

mod heisenberg;
mod s3;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

pub use heisenberg::Heisenberg;
pub use s3::S3;

use crate::error::{Error, Result};
use crate::jet::{self, Jet, JetVec};
use crate::math;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Central finite-difference step for brackets and dα when no analytic form is used.
pub const H_FD: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldPoint {
    pub chart: u8,
    pub coords: Vec3,
}

impl ManifoldPoint {
    pub fn new(chart: u8, coords: [f64; 3]) -> Self {
        Self {
            chart,
            coords: Vec3::new(coords[0], coords[1], coords[2]),
        }
    }

    pub fn origin() -> Self {
        Self::new(0, [0.0; 3])
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVec {
    pub base: ManifoldPoint,
    pub v: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Covec {
    pub base: ManifoldPoint,
    pub p: Vec3,
}

impl Covec {
    pub fn apply(&self, v: &Vec3) -> f64 {
        self.p.dot(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldId {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Brackets {
    pub xy: Vec3,
    pub xz: Vec3,
    pub yz: Vec3,
}

/// A contact sub-Riemannian 3-manifold given by charts and an oriented orthonormal frame of D.
///
/// Implementors write the frame once over [`jet::Scalar`] so that `frame_jet` gives exact
/// derivatives; all other geometry is derived from it.
pub trait ContactModel: Send + Sync + core::fmt::Debug {
    fn name(&self) -> String;

    fn chart_count(&self) -> u8 {
        1
    }

    /// (X, Y) expanded as Taylor jets of the given order at `q`.
    fn frame_jet(&self, q: &ManifoldPoint, order: u8) -> [JetVec; 2];

    fn frame(&self, q: &ManifoldPoint) -> [Vec3; 2] {
        let [x, y] = self.frame_jet(q, 0);
        [to_vec(&jet::values(&x)), to_vec(&jet::values(&y))]
    }

    /// Frame values and Jacobians (`D[i][(r, c)] = ∂_c X_r`).
    fn frame_with_jacobian(&self, q: &ManifoldPoint) -> ([Vec3; 2], [Mat3; 2]) {
        let [x, y] = self.frame_jet(q, 1);
        (
            [to_vec(&jet::values(&x)), to_vec(&jet::values(&y))],
            [jacobian(&x), jacobian(&y)],
        )
    }

    fn analytic_brackets(&self, _q: &ManifoldPoint) -> Option<Brackets> {
        None
    }

    /// Coordinate periods of quotient models.
    fn periods(&self) -> [Option<f64>; 3] {
        [None; 3]
    }

    /// `Some(target)` when `q` has drifted far enough that it should move to another chart.
    fn preferred_chart(&self, _q: &ManifoldPoint) -> Option<u8> {
        None
    }

    /// Coordinates of `q` in chart `to`, with the Jacobian ∂x'/∂x of the transition.
    fn transition(&self, q: &ManifoldPoint, to: u8) -> Option<(ManifoldPoint, Mat3)> {
        (q.chart == to).then(|| (*q, Mat3::identity()))
    }

    /// Map three uniform numbers in [0, 1) to a point of the model (uniform in a compact box or
    /// w.r.t. the natural volume of closed models).
    fn sample_point(&self, u: [f64; 3]) -> ManifoldPoint;
}

fn to_vec(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn jacobian(v: &JetVec) -> Mat3 {
    let mut m = Mat3::zeros();
    for r in 0..3 {
        let g = v[r].gradient();
        for c in 0..3 {
            m[(r, c)] = g[c];
        }
    }
    m
}

/// Model catalog: `heisenberg`, `heisenberg-quotient` (needs `t0`), `s3`.
pub fn builtin_model(name: &str, t0: Option<f64>) -> Result<Box<dyn ContactModel>> {
    match name {
        "heisenberg" => Ok(Box::new(Heisenberg::new())),
        "heisenberg-quotient" => {
            let t0 = t0.unwrap_or(math::TAU);
            Ok(Box::new(Heisenberg::quotient(t0)?))
        }
        "s3" => Ok(Box::new(S3)),
        other => Err(Error::UnknownModel(String::from(other))),
    }
}

/// Express `q` in chart `chart`.
pub fn to_chart(model: &dyn ContactModel, q: &ManifoldPoint, chart: u8) -> Result<ManifoldPoint> {
    if q.chart == chart {
        return Ok(*q);
    }
    model
        .transition(q, chart)
        .map(|(p, _)| p)
        .ok_or(Error::ChartExit { chart: q.chart })
}

/// Push a tangent vector into chart `chart`.
pub fn vector_to_chart(model: &dyn ContactModel, v: &TangentVec, chart: u8) -> Result<TangentVec> {
    if v.base.chart == chart {
        return Ok(*v);
    }
    let (base, jac) = model
        .transition(&v.base, chart)
        .ok_or(Error::ChartExit { chart: v.base.chart })?;
    Ok(TangentVec { base, v: jac * v.v })
}

/// Transform a covector into chart `chart` (inverse transpose of the transition Jacobian).
pub fn covector_to_chart(model: &dyn ContactModel, c: &Covec, chart: u8) -> Result<Covec> {
    if c.base.chart == chart {
        return Ok(*c);
    }
    let (base, jac) = model
        .transition(&c.base, chart)
        .ok_or(Error::ChartExit { chart: c.base.chart })?;
    let inv = jac.try_inverse().ok_or(Error::ChartExit { chart: c.base.chart })?;
    Ok(Covec {
        base,
        p: inv.transpose() * c.p,
    })
}

/// Coordinate difference `a ⊖ b` in the chart of `a` (or of `b` when `a`'s chart does not
/// contain `b`), reduced modulo the model's periods.
pub fn chart_difference(model: &dyn ContactModel, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<Vec3> {
    let (a, b) = match to_chart(model, b, a.chart) {
        Ok(b) => (*a, b),
        Err(_) => (to_chart(model, a, b.chart)?, *b),
    };
    let mut d = a.coords - b.coords;
    for (i, per) in model.periods().iter().enumerate() {
        if let Some(per) = per {
            d[i] = math::wrap_centered(d[i], *per);
        }
    }
    Ok(d)
}

pub fn chart_distance(model: &dyn ContactModel, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
    Ok(chart_difference(model, a, b)?.norm())
}

/// Value of a frame field at `q` in the chart of `q`.
pub fn field(model: &dyn ContactModel, id: FieldId, q: &ManifoldPoint) -> Result<Vec3> {
    let [x, y] = model.frame(q);
    Ok(match id {
        FieldId::X => x,
        FieldId::Y => y,
        FieldId::Z => reeb_vector(model, q)?,
    })
}

/// `[V, W](q)`: analytic brackets when the model has them, central finite differences otherwise.
pub fn lie_bracket(model: &dyn ContactModel, v: FieldId, w: FieldId, q: &ManifoldPoint) -> Result<TangentVec> {
    if v == w {
        return Ok(TangentVec {
            base: *q,
            v: Vec3::zeros(),
        });
    }
    if let Some(b) = model.analytic_brackets(q) {
        let r = match (v, w) {
            (FieldId::X, FieldId::Y) => b.xy,
            (FieldId::Y, FieldId::X) => -b.xy,
            (FieldId::X, FieldId::Z) => b.xz,
            (FieldId::Z, FieldId::X) => -b.xz,
            (FieldId::Y, FieldId::Z) => b.yz,
            (FieldId::Z, FieldId::Y) => -b.yz,
            _ => unreachable!(),
        };
        return Ok(TangentVec { base: *q, v: r });
    }
    lie_bracket_fd(|p| field(model, v, p), |p| field(model, w, p), q, H_FD)
}

/// `[V, W] = DW·V − DV·W` with both Jacobians by central differences of step `h`.
pub fn lie_bracket_fd<F, G>(v: F, w: G, q: &ManifoldPoint, h: f64) -> Result<TangentVec>
where
    F: Fn(&ManifoldPoint) -> Result<Vec3>,
    G: Fn(&ManifoldPoint) -> Result<Vec3>,
{
    let vq = v(q)?;
    let wq = w(q)?;
    let dv = fd_jacobian(&v, q, h)?;
    let dw = fd_jacobian(&w, q, h)?;
    Ok(TangentVec {
        base: *q,
        v: dw * vq - dv * wq,
    })
}

fn fd_jacobian<F>(f: &F, q: &ManifoldPoint, h: f64) -> Result<Mat3>
where
    F: Fn(&ManifoldPoint) -> Result<Vec3>,
{
    let mut m = Mat3::zeros();
    for c in 0..3 {
        let mut a = *q;
        let mut b = *q;
        a.coords[c] += h;
        b.coords[c] -= h;
        let col = (f(&a)? - f(&b)?) / (2.0 * h);
        m.set_column(c, &col);
    }
    Ok(m)
}

/// Frame geometry at a point, derived from third-order jets of (X, Y).
///
/// Structure functions follow `[Y,X] = Z + c12[0] X + c12[1] Y`, `[X,Z] = c01[0] X + c01[1] Y`,
/// `[Y,Z] = c02[0] X + c02[1] Y` (the third entries are the Z-components, which must vanish).
#[derive(Clone, Copy, Debug)]
pub struct Structure {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
    pub xy: Vec3,
    pub xz: Vec3,
    pub yz: Vec3,
    pub alpha: Vec3,
    pub c12: [f64; 2],
    pub c01: [f64; 3],
    pub c02: [f64; 3],
    /// Rotation rate of strain-free Lie transport along Z, in frame components.
    pub omega_lie: f64,
    /// Frame-independent curvature invariant of the sub-Riemannian structure.
    pub kappa: f64,
}

/// Relative threshold below which X×Y or the Reeb system counts as singular.
const SINGULAR: f64 = 1e-12;

struct ReebJets {
    x: JetVec,
    y: JetVec,
    w: JetVec,
    u: Jet,
    v: Jet,
    z: JetVec,
    a: JetVec,
}

fn reeb_jets(model: &dyn ContactModel, q: &ManifoldPoint, order: u8) -> Result<ReebJets> {
    let [x, y] = model.frame_jet(q, order);
    let a = jet::cross(&x, &y);
    let av = jet::values(&a);
    let xn = to_vec(&jet::values(&x)).norm();
    let yn = to_vec(&jet::values(&y)).norm();
    let an = to_vec(&av).norm();
    if !(an > SINGULAR * xn * yn) || !an.is_finite() {
        return Err(Error::DegenerateFrame {
            chart: q.chart,
            coords: [q.coords[0], q.coords[1], q.coords[2]],
        });
    }
    let w = jet::bracket(&x, &y);
    let aw = jet::dot(&a, &w);
    let wn = to_vec(&jet::values(&w)).norm();
    if !(math::abs(aw.value()) > SINGULAR * an * wn) {
        return Err(Error::SingularReebSystem([q.coords[0], q.coords[1], q.coords[2]]));
    }
    let xw = jet::bracket(&x, &w);
    let yw = jet::bracket(&y, &w);
    let u = -(jet::dot(&a, &yw) / aw);
    let v = jet::dot(&a, &xw) / aw;
    let z = jet::add_vec(
        &jet::add_vec(&jet::scale_vec(Jet::constant(-1.0), &w), &jet::scale_vec(u, &x)),
        &jet::scale_vec(v, &y),
    );
    Ok(ReebJets { x, y, w, u, v, z, a })
}

/// Reeb vector field value at `q`.
pub fn reeb_vector(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<Vec3> {
    let r = reeb_jets(model, q, 2)?;
    Ok(to_vec(&jet::values(&r.z)))
}

/// Reeb field value and Jacobian at `q`.
pub fn reeb_with_jacobian(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<(Vec3, Mat3)> {
    let r = reeb_jets(model, q, 3)?;
    Ok((to_vec(&jet::values(&r.z)), jacobian(&r.z)))
}

/// Full frame geometry at `q`.
pub fn structure(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<Structure> {
    let r = reeb_jets(model, q, 3)?;
    let x = to_vec(&jet::values(&r.x));
    let y = to_vec(&jet::values(&r.y));
    let z = to_vec(&jet::values(&r.z));
    let xz = to_vec(&jet::values(&jet::bracket(&r.x, &r.z)));
    let yz = to_vec(&jet::values(&jet::bracket(&r.y, &r.z)));
    let m = Mat3::from_columns(&[x, y, z]);
    let inv = m.try_inverse().ok_or(Error::DegenerateFrame {
        chart: q.chart,
        coords: [q.coords[0], q.coords[1], q.coords[2]],
    })?;
    let c01 = inv * xz;
    let c02 = inv * yz;
    let a = to_vec(&jet::values(&r.a));
    let alpha = a / a.dot(&z);
    let (u, v) = (r.u.value(), r.v.value());
    let y_of_u = jet::derivative(&r.y, &r.u).value();
    let x_of_v = jet::derivative(&r.x, &r.v).value();
    let omega_lie = 0.5 * (c01[1] - c02[0]);
    // With c12 = (−u, −v): Y(c¹₁₂) − X(c²₁₂) − (c¹₁₂)² − (c²₁₂)² + ω.
    let kappa = -y_of_u + x_of_v - u * u - v * v + omega_lie;
    Ok(Structure {
        x,
        y,
        z,
        xy: to_vec(&jet::values(&r.w)),
        xz,
        yz,
        alpha,
        c12: [-u, -v],
        c01: [c01[0], c01[1], c01[2]],
        c02: [c02[0], c02[1], c02[2]],
        omega_lie,
        kappa,
    })
}

/// The contact form α_g: α(X) = α(Y) = 0, α(Z) = 1.
pub fn contact_form(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<Covec> {
    let r = reeb_jets(model, q, 2)?;
    let a = to_vec(&jet::values(&r.a));
    let z = to_vec(&jet::values(&r.z));
    Ok(Covec {
        base: *q,
        p: a / a.dot(&z),
    })
}

/// Components of `v` in the frame (X, Y, Z) at a point.
pub fn frame_components(x: &Vec3, y: &Vec3, z: &Vec3, v: &Vec3) -> Option<Vec3> {
    Mat3::from_columns(&[*x, *y, *z]).try_inverse().map(|m| m * v)
}

/// Maximum residuals of the contact/Reeb identities over a set of sample points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub points: usize,
    pub degenerate_points: usize,
    pub first_failure: Option<String>,
    /// max |α(Z) − 1|
    pub alpha_z: f64,
    /// max |dα(Z, W)|, W ∈ {X, Y}, with dα by finite differences
    pub dalpha_z: f64,
    /// max |dα(X, Y) − 1|
    pub dalpha_xy: f64,
    /// max |Z-component of [X, Z]| and of [Y, Z]
    pub bracket_z_components: f64,
    /// max distance of [X, Y] + Z from span{X, Y}
    pub xy_plus_z_mod_d: f64,
    /// max |analytic bracket − jet bracket|, when the model has analytic brackets
    pub analytic_consistency: f64,
    /// max mismatch of the frame pushed through a chart transition
    pub chart_consistency: f64,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.alpha_z,
            self.dalpha_z,
            self.dalpha_xy,
            self.bracket_z_components,
            self.xy_plus_z_mod_d,
            self.analytic_consistency,
            self.chart_consistency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.degenerate_points == 0 && self.points > 0 && self.max_residual() < tol
    }
}

fn alpha_at(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<Vec3> {
    Ok(contact_form(model, q)?.p)
}

/// dα as an antisymmetric matrix `(∂_i α_j − ∂_j α_i)` by central differences.
fn dalpha_fd(model: &dyn ContactModel, q: &ManifoldPoint) -> Result<Mat3> {
    let jac = fd_jacobian(&|p: &ManifoldPoint| alpha_at(model, p), q, H_FD)?;
    // jac[(j, i)] = ∂_i α_j
    Ok(jac.transpose() - jac)
}

/// Check the contact/Reeb characterization at every sample point.
pub fn validate_model(model: &dyn ContactModel, points: &[ManifoldPoint]) -> ValidationReport {
    let mut rep = ValidationReport {
        points: points.len(),
        ..Default::default()
    };
    for q in points {
        let s = match structure(model, q) {
            Ok(s) => s,
            Err(e) => {
                rep.degenerate_points += 1;
                if rep.first_failure.is_none() {
                    rep.first_failure = Some(format!("{e}"));
                }
                continue;
            }
        };
        let upd = |slot: &mut f64, v: f64| {
            *slot = if v.is_finite() { slot.max(v) } else { f64::INFINITY };
        };
        upd(&mut rep.alpha_z, math::abs(s.alpha.dot(&s.z) - 1.0));
        match dalpha_fd(model, q) {
            Ok(da) => {
                let form = |a: &Vec3, b: &Vec3| (a.transpose() * da * b)[(0, 0)];
                upd(
                    &mut rep.dalpha_z,
                    math::abs(form(&s.z, &s.x)).max(math::abs(form(&s.z, &s.y))),
                );
                upd(&mut rep.dalpha_xy, math::abs(form(&s.x, &s.y) - 1.0));
            }
            Err(_) => rep.dalpha_z = f64::INFINITY,
        }
        upd(
            &mut rep.bracket_z_components,
            math::abs(s.c01[2]).max(math::abs(s.c02[2])),
        );
        let m = frame_components(&s.x, &s.y, &s.z, &(s.xy + s.z)).unwrap_or(Vec3::repeat(f64::INFINITY));
        upd(&mut rep.xy_plus_z_mod_d, math::abs(m[2]) * s.z.norm());
        if let Some(b) = model.analytic_brackets(q) {
            let d = (b.xy - s.xy).norm().max((b.xz - s.xz).norm()).max((b.yz - s.yz).norm());
            upd(&mut rep.analytic_consistency, d);
        }
        for other in 0..model.chart_count() {
            if other == q.chart {
                continue;
            }
            if let Some((p, jac)) = model.transition(q, other) {
                let [xo, yo] = model.frame(&p);
                let d = (jac * s.x - xo).norm().max((jac * s.y - yo).norm());
                upd(&mut rep.chart_consistency, d);
            }
        }
    }
    rep
}

/// Deterministic low-discrepancy sample points (Halton bases 2, 3, 5).
pub fn halton_points(model: &dyn ContactModel, n: usize, skip: usize) -> alloc::vec::Vec<ManifoldPoint> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    (0..n)
        .map(|k| {
            let i = k + skip + 1;
            model.sample_point([radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)])
        })
        .collect()
}
