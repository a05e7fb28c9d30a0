//! Explicit Dormand–Prince 5(4) with dense output, and a fixed-step implicit midpoint rule
//! behind the same stepping interface.

use crate::error::{Error, Result};
use crate::math;

/// A first-order system ẏ = f(t, y) whose state may be re-expressed in another chart.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;

    /// Called after every accepted step; returns true when `y` was rewritten (chart switch).
    fn remap(&mut self, _y: &mut [f64; N]) -> bool {
        false
    }

    /// Identifier of the chart the state currently lives in.
    fn tag(&self) -> u8 {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dopri5,
    ImplicitMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub dense_output: bool,
    pub method: Method,
    /// Step of the implicit midpoint rule.
    pub fixed_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.1,
            dense_output: true,
            method: Method::Dopri5,
            fixed_step: 1e-3,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0 && self.fixed_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("tolerances and steps must be positive".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    /// Chart of `y0`, `y1` and the dense output.
    pub tag: u8,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
    /// State after a chart switch at `t1`, if one happened.
    pub remapped: Option<(u8, [f64; N])>,
}

impl<const N: usize> Step<N> {
    /// Dense output at `t ∈ [t0, t1]` in the chart `tag`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y0;
        }
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let [r2, r3, r4, r5] = &self.rcont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
        out
    }

    /// State at `t1` in the chart used from then on.
    pub fn end_state(&self) -> (u8, [f64; N]) {
        self.remapped.unwrap_or((self.tag, self.y1))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn err_norm<const N: usize>(e: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * math::abs(y0[i]).max(math::abs(y1[i]));
        let r = e[i] / sc;
        acc += r * r;
    }
    math::sqrt(acc / N as f64)
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    cfg: &IntegratorConfig,
    stats: &mut Stats,
) -> Result<f64> {
    let scale = |v: &[f64; N]| {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = cfg.abs_tol + cfg.rel_tol * math::abs(y0[i]);
            acc += (v[i] / sc) * (v[i] / sc);
        }
        math::sqrt(acc / N as f64)
    };
    let d0 = scale(y0);
    let d1 = scale(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.max_step);
    let y1 = lin(y0, dir * h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + dir * h0, &y1)?;
    stats.rhs_evals += 1;
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scale(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        math::powf(0.01 / m, 0.2)
    };
    Ok((100.0 * h0).min(h1).min(cfg.max_step))
}

/// Integrate from `t0` to `t_end` (either direction), calling `observer` on every accepted step.
/// Returns the final chart tag, state and statistics.
pub fn integrate<const N: usize, S, F>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    observer: F,
) -> Result<(u8, [f64; N], Stats)>
where
    S: OdeSystem<N>,
    F: FnMut(&Step<N>),
{
    cfg.validate()?;
    match cfg.method {
        Method::Dopri5 => dopri5(sys, t0, y0, t_end, cfg, observer),
        Method::ImplicitMidpoint => midpoint(sys, t0, y0, t_end, cfg, observer),
    }
}

fn dopri5<const N: usize, S, F>(
    sys: &mut S,
    t0: f64,
    mut y: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<(u8, [f64; N], Stats)>
where
    S: OdeSystem<N>,
    F: FnMut(&Step<N>),
{
    let mut stats = Stats::default();
    let mut t = t0;
    if t_end == t0 {
        return Ok((sys.tag(), y, stats));
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let mut k1 = sys.rhs(t, &y)?;
    stats.rhs_evals += 1;
    let mut h = initial_step(sys, t, &y, &k1, dir, cfg, &mut stats)?;
    let mut last_rejected = false;
    loop {
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::TooManySteps { t });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;
        let k2 = sys.rhs(t + C2 * hs, &lin(&y, hs, &[(A21, &k1)]))?;
        let k3 = sys.rhs(t + C3 * hs, &lin(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = sys.rhs(t + C4 * hs, &lin(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = sys.rhs(
            t + C5 * hs,
            &lin(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = sys.rhs(
            t + hs,
            &lin(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y1 = lin(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(t + hs, &y1)?;
        stats.rhs_evals += 6;
        let mut e = [0.0; N];
        for i in 0..N {
            e[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = if all_finite(&y1) && all_finite(&k7) {
            err_norm(&e, &y, &y1, cfg)
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            stats.accepted += 1;
            let t1 = if last { t_end } else { t + hs };
            let mut rcont = [[0.0; N]; 4];
            for i in 0..N {
                let r2 = y1[i] - y[i];
                let r3 = hs * k1[i] - r2;
                let r4 = r2 - hs * k7[i] - r3;
                rcont[0][i] = r2;
                rcont[1][i] = r3;
                rcont[2][i] = r4;
                rcont[3][i] = if cfg.dense_output {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                } else {
                    0.0
                };
            }
            let tag = sys.tag();
            let mut y_new = y1;
            let switched = sys.remap(&mut y_new);
            let step = Step {
                t0: t,
                t1,
                tag,
                y0: y,
                y1,
                rcont,
                remapped: switched.then(|| (sys.tag(), y_new)),
            };
            observer(&step);
            t = t1;
            y = y_new;
            k1 = if switched {
                stats.rhs_evals += 1;
                sys.rhs(t, &y)?
            } else {
                k7
            };
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * math::powf(err, -0.2)).clamp(0.2, 5.0)
            };
            let fac = if last_rejected { fac.min(1.0) } else { fac };
            h = (h * fac).min(cfg.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = if err.is_finite() {
                (0.9 * math::powf(err, -0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
            last_rejected = true;
        }
    }
    Ok((sys.tag(), y, stats))
}

fn midpoint<const N: usize, S, F>(
    sys: &mut S,
    t0: f64,
    mut y: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<(u8, [f64; N], Stats)>
where
    S: OdeSystem<N>,
    F: FnMut(&Step<N>),
{
    let mut stats = Stats::default();
    let mut t = t0;
    if t_end == t0 {
        return Ok((sys.tag(), y, stats));
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    let nsteps = math::round(((t_end - t0) * dir / cfg.fixed_step).max(1.0)) as usize;
    if nsteps > cfg.max_steps {
        return Err(Error::TooManySteps { t });
    }
    let hs = (t_end - t0) / nsteps as f64;
    let mut f0 = sys.rhs(t, &y)?;
    stats.rhs_evals += 1;
    for n in 0..nsteps {
        // Fixed-point iteration on y1 = y0 + h f((y0 + y1)/2).
        let mut y1 = lin(&y, hs, &[(1.0, &f0)]);
        let mut converged = false;
        for _ in 0..100 {
            let mut mid = [0.0; N];
            for i in 0..N {
                mid[i] = 0.5 * (y[i] + y1[i]);
            }
            let fm = sys.rhs(t + 0.5 * hs, &mid)?;
            stats.rhs_evals += 1;
            let next = lin(&y, hs, &[(1.0, &fm)]);
            let mut delta: f64 = 0.0;
            for i in 0..N {
                delta = delta.max(math::abs(next[i] - y1[i]) / (1.0 + math::abs(next[i])));
            }
            y1 = next;
            if delta < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged || !all_finite(&y1) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let f1 = sys.rhs(t + hs, &y1)?;
        stats.rhs_evals += 1;
        stats.accepted += 1;
        let t1 = if n + 1 == nsteps {
            t_end
        } else {
            t0 + (n + 1) as f64 * hs
        };
        let mut rcont = [[0.0; N]; 4];
        for i in 0..N {
            let r2 = y1[i] - y[i];
            let r3 = hs * f0[i] - r2;
            rcont[0][i] = r2;
            rcont[1][i] = r3;
            rcont[2][i] = r2 - hs * f1[i] - r3;
        }
        let tag = sys.tag();
        let mut y_new = y1;
        let switched = sys.remap(&mut y_new);
        observer(&Step {
            t0: t,
            t1,
            tag,
            y0: y,
            y1,
            rcont,
            remapped: switched.then(|| (sys.tag(), y_new)),
        });
        t = t1;
        y = y_new;
        f0 = if switched { sys.rhs(t, &y)? } else { f1 };
    }
    Ok((sys.tag(), y, stats))
}
