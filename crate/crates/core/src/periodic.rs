//! Closed geodesics spiraling around a periodic Reeb orbit: predicted lengths
//! T_{j,k} = 2√(jkπT₀(1 − jα₀/(2kπ))) and a shooting solver for the true flow.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::fit;
use crate::math;
use crate::models::{self, ContactModel, ManifoldPoint, Vec3};
use crate::ode::IntegratorConfig;
use crate::reeb::ReebOrbit;
use crate::symplectic::{self, Hamiltonian, PhasePoint};

/// Length T_{j,k} and the implied J = 2jT₀/T_{j,k}.
pub fn predicted_length(t0: f64, alpha0: f64, j: u32, k: u32) -> Result<(f64, f64)> {
    if !(t0 > 0.0) || j == 0 || k == 0 {
        return Err(Error::InvalidParameter("need T0 > 0 and j, k >= 1".into()));
    }
    let (jf, kf) = (j as f64, k as f64);
    let disc = 1.0 - jf * alpha0 / (2.0 * kf * math::PI);
    if !(disc > 0.0) {
        return Err(Error::NonPositiveDiscriminant(disc));
    }
    let t = 2.0 * math::sqrt(jf * kf * math::PI * t0 * disc);
    Ok((t, 2.0 * jf * t0 / t))
}

/// Orientation data of the spiral needed to place a seed: offset sign ε, rotation sense σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpiralSigns {
    pub eps: i8,
    pub sigma: i8,
}

impl Default for SpiralSigns {
    fn default() -> Self {
        Self { eps: -1, sigma: -1 }
    }
}

/// Effective monodromy entering T_{j,k}: the accumulated transport angle seen in the
/// rotating frame of the spiral.
pub fn effective_alpha(alpha_accumulated: f64, signs: SpiralSigns) -> f64 {
    signs.sigma as f64 * alpha_accumulated
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seed {
    pub z0: PhasePoint,
    pub t_pred: f64,
    pub j0: f64,
}

/// Initial phase point of the model spiral with (j, k) closure, starting at angle `phase`.
pub fn predicted_seed(
    model: &dyn ContactModel,
    orbit: &ReebOrbit,
    alpha_accumulated: f64,
    signs: SpiralSigns,
    j: u32,
    k: u32,
    phase: f64,
) -> Result<Seed> {
    let t0 = orbit.period.ok_or(Error::MissingPeriod)?;
    let alpha = effective_alpha(alpha_accumulated, signs);
    let (t_pred, j0) = predicted_length(t0, alpha, j, k)?;
    let start = orbit.samples[0];
    let (s, c) = (math::sin(phase), math::cos(phase));
    let d = [c * start.e1[0] + s * start.e2[0], c * start.e1[1] + s * start.e2[1]];
    // position Γ(0) − ε i J₀ d
    let [x, y] = model.frame(&start.q);
    let off = (x * -d[1] + y * d[0]) * (-(signs.eps as f64) * j0);
    let q0 = ManifoldPoint {
        chart: start.q.chart,
        coords: start.q.coords + off,
    };
    // h_Z = 1/J₀ to leading order; the mean transport rate shifts it by −(α/T₀)J₀/2.
    let hz = 1.0 / j0 - 0.5 * (alpha_accumulated / t0) * j0;
    let p = symplectic::covector_from_lifts(model, &q0, d[0], d[1], hz)?;
    Ok(Seed {
        z0: PhasePoint::new(q0, p),
        t_pred,
        j0,
    })
}

pub type Residual = [f64; 7];

pub fn residual_norm(r: &Residual) -> f64 {
    math::sqrt(r.iter().map(|x| x * x).sum())
}

/// (q(T) ⊖ q(0), p(T) − p(0), g*(z₀) − 1) in the chart of z₀.
pub fn closure_residual(model: &dyn ContactModel, z0: &PhasePoint, t: f64, cfg: &IntegratorConfig) -> Result<Residual> {
    let g = symplectic::cometric(model, z0) - 1.0;
    let zt = if t == 0.0 {
        *z0
    } else {
        symplectic::flow_with(model, Hamiltonian::HalfCometric, z0, t, cfg, |_| {})?.0
    };
    let zt = symplectic::phase_to_chart(model, &zt, z0.q.chart)?;
    let dq = models::chart_difference(model, &zt.q, &z0.q)?;
    let dp = zt.p - z0.p;
    Ok([dq[0], dq[1], dq[2], dp[0], dp[1], dp[2], g])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub cfg: IntegratorConfig,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            fd_step: 1e-7,
            cfg: IntegratorConfig::default().with_tolerance(1e-13),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refined {
    pub z0: PhasePoint,
    pub t_found: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn normalize6(v: &mut [f64; 6]) -> f64 {
    let n = math::sqrt(v.iter().map(|x| x * x).sum());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Four directions of R⁶ orthogonal to the flow direction and the lifted Reeb field at z.
fn transverse_basis(model: &dyn ContactModel, z: &PhasePoint) -> Result<[[f64; 6]; 4]> {
    let h = symplectic::hamiltonian_vector_field(model, &Hamiltonian::HalfCometric, z)?;
    let r = symplectic::hamiltonian_vector_field(model, &Hamiltonian::Lift(models::FieldId::Z), z)?;
    let mut kept: Vec<[f64; 6]> = Vec::new();
    let mut candidates = Vec::from([h, r]);
    for i in 0..6 {
        let mut e = [0.0; 6];
        e[i] = 1.0;
        candidates.push(e);
    }
    let mut frozen = 0;
    for (n, mut v) in candidates.into_iter().enumerate() {
        for b in &kept {
            let d: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
        }
        if normalize6(&mut v) > 1e-6 {
            kept.push(v);
            if n < 2 {
                frozen += 1;
            }
        }
        if kept.len() == 6 {
            break;
        }
    }
    let free: Vec<[f64; 6]> = kept.into_iter().skip(frozen).collect();
    if free.len() < 4 {
        return Err(Error::InvalidParameter("degenerate phase point for shooting".into()));
    }
    Ok([free[0], free[1], free[2], free[3]])
}

fn displaced(base: &PhasePoint, basis: &[[f64; 6]; 4], a: &[f64; 4]) -> PhasePoint {
    let mut s = base.state();
    for (b, ai) in basis.iter().zip(a) {
        s.iter_mut().zip(b).for_each(|(x, bi)| *x += ai * bi);
    }
    PhasePoint::from_state(base.q.chart, &s)
}

/// Gauss–Newton on four transverse coordinates of z₀ and on T.
pub fn shoot_closed_geodesic(
    model: &dyn ContactModel,
    seed: &PhasePoint,
    t_seed: f64,
    opts: &ShootingOptions,
) -> Result<Refined> {
    let basis = transverse_basis(model, seed)?;
    let eval = |x: &SVector<f64, 5>| -> Result<SVector<f64, 7>> {
        let z = displaced(seed, &basis, &[x[0], x[1], x[2], x[3]]);
        Ok(SVector::from(closure_residual(model, &z, x[4], &opts.cfg)?))
    };
    let mut x = SVector::<f64, 5>::zeros();
    x[4] = t_seed;
    let mut r = eval(&x)?;
    if !r.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t: t_seed });
    }
    let mut norm = r.norm();
    let mut iterations = 0;
    while norm >= opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let mut jac = SMatrix::<f64, 7, 5>::zeros();
        for c in 0..5 {
            let mut xp = x;
            xp[c] += opts.fd_step;
            jac.set_column(c, &((eval(&xp)? - r) / opts.fd_step));
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let step = svd.solve(&r, cutoff).map_err(|e| Error::Calibration(e.to_string()))?;
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda >= 1.0 / 64.0 {
            let xn = x - step * lambda;
            if let Ok(rn) = eval(&xn) {
                if rn.iter().all(|v| v.is_finite()) && rn.norm() < norm {
                    x = xn;
                    r = rn;
                    norm = rn.norm();
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(Refined {
        z0: displaced(seed, &basis, &[x[0], x[1], x[2], x[3]]),
        t_found: x[4],
        residual: norm,
        iterations,
        converged: norm < opts.tol,
    })
}

/// Winding of a closed geodesic: velocity turns (in the (X, Y) frame, counted in the spiral's
/// rotation sense), Reeb time advanced by its projection onto the orbit, and energy error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub turns: f64,
    pub reeb_advance: f64,
    pub energy_error: f64,
}

pub fn winding(
    model: &dyn ContactModel,
    orbit: &ReebOrbit,
    z0: &PhasePoint,
    t: f64,
    signs: SpiralSigns,
    cfg: &IntegratorConfig,
) -> Result<Winding> {
    let t0 = orbit.period.ok_or(Error::MissingPeriod)?;
    let angle = |z: &PhasePoint| {
        let (hx, hy) = symplectic::horizontal_lifts(model, z);
        math::atan2(hy, hx)
    };
    // Reeb parameter of the orbit point whose contact-form coordinate matches q
    let project = |q: &ManifoldPoint, mut tau: f64| -> Result<f64> {
        for _ in 0..4 {
            let s = orbit.at(math::rem_euclid(tau, t0))?;
            let alpha = models::contact_form(model, &s.q)?;
            let d = models::chart_difference(model, &models::to_chart(model, q, s.q.chart)?, &s.q)?;
            tau += alpha.apply(&d);
        }
        Ok(tau)
    };
    let mut out = Winding {
        turns: 0.0,
        reeb_advance: 0.0,
        energy_error: 0.0,
    };
    let tau0 = project(&z0.q, 0.0)?;
    let mut tau = tau0;
    let mut prev = angle(z0);
    let mut lift = 0.0;
    let mut failure = None;
    symplectic::flow_with(model, Hamiltonian::HalfCometric, z0, t, cfg, |s| {
        if failure.is_some() {
            return;
        }
        let (chart, y) = s.end_state();
        let z = PhasePoint::from_state(chart, &y);
        let a = angle(&z);
        lift += math::wrap_angle(a - prev);
        prev = a;
        out.energy_error = out.energy_error.max(math::abs(symplectic::cometric(model, &z) - 1.0));
        match project(&z.q, tau) {
            Ok(v) => tau = v,
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    out.turns = signs.sigma as f64 * lift / math::TAU;
    out.reeb_advance = tau - tau0;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Converged,
    NoConvergence,
    /// Converged to a closed geodesic with different (j, k).
    WrongWinding,
    Failed(String),
}

impl CellStatus {
    pub fn label(&self) -> &str {
        match self {
            CellStatus::Converged => "converged",
            CellStatus::NoConvergence => "no-convergence",
            CellStatus::WrongWinding => "wrong-winding",
            CellStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedGeodesicCandidate {
    pub j: u32,
    pub k: u32,
    pub t_pred: f64,
    pub seed: Option<Seed>,
    pub refined: Option<Refined>,
    pub winding: Option<Winding>,
    pub status: CellStatus,
}

impl ClosedGeodesicCandidate {
    pub fn rel_dev(&self) -> Option<f64> {
        self.refined
            .filter(|r| r.converged)
            .map(|r| math::abs(r.t_found - self.t_pred) / self.t_pred)
    }

    pub fn converged(&self) -> bool {
        self.status == CellStatus::Converged
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub signs: SpiralSigns,
    pub phase: f64,
    pub shooting: ShootingOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            signs: SpiralSigns::default(),
            phase: 0.0,
            shooting: ShootingOptions::default(),
        }
    }
}

/// Seed and shoot one (j, k) cell. Numerical failures are recorded in the status.
pub fn spectrum_cell(
    model: &dyn ContactModel,
    orbit: &ReebOrbit,
    alpha_accumulated: f64,
    j: u32,
    k: u32,
    opts: &SpectrumOptions,
) -> ClosedGeodesicCandidate {
    let mut cell = ClosedGeodesicCandidate {
        j,
        k,
        t_pred: f64::NAN,
        seed: None,
        refined: None,
        winding: None,
        status: CellStatus::NoConvergence,
    };
    let seed = match predicted_seed(model, orbit, alpha_accumulated, opts.signs, j, k, opts.phase) {
        Ok(s) => s,
        Err(e) => {
            cell.status = CellStatus::Failed(e.to_string());
            return cell;
        }
    };
    cell.t_pred = seed.t_pred;
    cell.seed = Some(seed);
    let refined = match shoot_closed_geodesic(model, &seed.z0, seed.t_pred, &opts.shooting) {
        Ok(r) => r,
        Err(e) => {
            cell.status = CellStatus::Failed(e.to_string());
            return cell;
        }
    };
    cell.refined = Some(refined);
    if !refined.converged {
        return cell;
    }
    let t0 = orbit.period.unwrap_or(f64::NAN);
    cell.status = match winding(
        model,
        orbit,
        &refined.z0,
        refined.t_found,
        opts.signs,
        &opts.shooting.cfg,
    ) {
        Ok(w) => {
            cell.winding = Some(w);
            let genuine = math::abs(w.turns - k as f64) * math::TAU <= 0.1
                && math::abs(w.reeb_advance - j as f64 * t0) <= 0.01
                && w.energy_error < 1e-8;
            if genuine {
                CellStatus::Converged
            } else {
                CellStatus::WrongWinding
            }
        }
        Err(e) => CellStatus::Failed(e.to_string()),
    };
    cell
}

/// Row-major over (j, k).
pub fn length_spectrum(
    model: &dyn ContactModel,
    orbit: &ReebOrbit,
    alpha_accumulated: f64,
    js: &[u32],
    ks: &[u32],
    opts: &SpectrumOptions,
) -> Vec<ClosedGeodesicCandidate> {
    js.iter()
        .flat_map(|&j| ks.iter().map(move |&k| (j, k)))
        .map(|(j, k)| spectrum_cell(model, orbit, alpha_accumulated, j, k, opts))
        .collect()
}

/// Whether the relative deviation decreases with k on average, per j.
/// Deviations at the shooting noise level count as zero.
pub fn deviation_trend_nonincreasing(cells: &[ClosedGeodesicCandidate], noise: f64) -> bool {
    let mut js: Vec<u32> = cells.iter().map(|c| c.j).collect();
    js.dedup();
    js.iter().all(|&j| {
        let (ks, ds): (Vec<f64>, Vec<f64>) = cells
            .iter()
            .filter(|c| c.j == j)
            .filter_map(|c| c.rel_dev().map(|d| (c.k as f64, d.max(noise))))
            .unzip();
        fit::linear_fit(&ks, &ds).is_none_or(|f| f.slope <= 0.0)
    })
}

/// Analytic closed geodesic of the Heisenberg quotient with period T₀: unit circle of
/// radius r = √(jT₀/(kπ)) through q, closing after k loops.
pub fn heisenberg_circle(q: &ManifoldPoint, t0: f64, j: u32, k: u32) -> (PhasePoint, f64) {
    let r = math::sqrt(j as f64 * t0 / (k as f64 * math::PI));
    // counterclockwise circle (x, y) = c + r(cos(t/r + π/2)…); velocity (1, 0) at q and h_Z = 1/r
    let (x, y) = (q.coords[0], q.coords[1]);
    let p = Vec3::new(1.0 - y / (2.0 * r), x / (2.0 * r), -1.0 / r);
    (PhasePoint::new(*q, p), math::TAU * k as f64 * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Heisenberg;
    use crate::reeb::{self, TransportRule};

    #[test]
    fn predicted_length_examples() {
        let (t, j) = predicted_length(math::TAU, 0.0, 1, 4).unwrap();
        assert!((t - 4.0 * math::PI * math::sqrt(2.0)).abs() < 1e-12);
        assert!((j * t - 2.0 * math::TAU).abs() < 1e-12);
        assert!((t / j - 8.0 * math::PI).abs() < 1e-12);
        let (t2, _) = predicted_length(math::TAU, 0.0, 2, 8).unwrap();
        assert!((t2 - 2.0 * t).abs() < 1e-12);
        assert!(matches!(
            predicted_length(1.0, 10.0, 1, 1),
            Err(Error::NonPositiveDiscriminant(_))
        ));
    }

    #[test]
    fn analytic_circle_closes() {
        let m = Heisenberg::quotient(math::TAU).unwrap();
        let q = ManifoldPoint::new(0, [0.3, -0.2, 1.0]);
        let (z, t) = heisenberg_circle(&q, math::TAU, 1, 4);
        assert!((symplectic::cometric(&m, &z) - 1.0).abs() < 1e-14);
        let cfg = IntegratorConfig::default().with_tolerance(1e-13);
        assert!(residual_norm(&closure_residual(&m, &z, t, &cfg).unwrap()) < 1e-8);
        assert_eq!(residual_norm(&closure_residual(&m, &z, 0.0, &cfg).unwrap()), 0.0);
        let mut bumped = z;
        bumped.p[2] += 1e-3;
        assert!(residual_norm(&closure_residual(&m, &bumped, t, &cfg).unwrap()) > 1e-4);
    }

    #[test]
    fn quotient_seed_is_already_closed() {
        let m = Heisenberg::quotient(math::TAU).unwrap();
        let cfg = IntegratorConfig::default().with_tolerance(1e-12);
        let orbit = reeb::periodic_orbit(&m, &ManifoldPoint::origin(), 10.0, TransportRule::NormalForm, &cfg).unwrap();
        let seed = predicted_seed(&m, &orbit, 0.0, SpiralSigns::default(), 1, 4, 0.0).unwrap();
        assert!((seed.j0 - 1.0 / math::sqrt(2.0)).abs() < 1e-12);
        let h = symplectic::h_z(&m, &seed.z0).unwrap();
        assert!((h - math::sqrt(2.0)).abs() < 1e-12);
        let other = predicted_seed(&m, &orbit, 0.0, SpiralSigns::default(), 1, 4, math::TAU).unwrap();
        assert!((other.z0.q.coords - seed.z0.q.coords).norm() < 1e-12);
        let r = closure_residual(&m, &seed.z0, seed.t_pred, &ShootingOptions::default().cfg).unwrap();
        assert!(residual_norm(&r) < 1e-8, "{r:?}");
    }

    #[test]
    fn shooting_recovers_from_a_perturbed_seed() {
        let m = Heisenberg::quotient(math::TAU).unwrap();
        let q = ManifoldPoint::new(0, [0.1, 0.2, 0.3]);
        let (z, t) = heisenberg_circle(&q, math::TAU, 1, 4);
        let mut seed = z;
        seed.p += Vec3::new(2e-3, -1e-3, 3e-3);
        let r = shoot_closed_geodesic(&m, &seed, t * 1.01, &ShootingOptions::default()).unwrap();
        assert!(r.converged && r.iterations >= 2, "{r:?}");
        assert!((r.t_found - t).abs() < 1e-6 * t, "{} vs {}", r.t_found, t);
    }
}
