use std::fmt::Display;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use spiral_core::models::{self, builtin_model, ContactModel, Heisenberg, ManifoldPoint, Vec3};
use spiral_core::ode::{IntegratorConfig, Method};
use spiral_core::periodic::{self, ShootingOptions, SpectrumOptions};
use spiral_core::polyalg::{Field, HomPoly};
use spiral_core::reeb::{self, TransportRule};
use spiral_core::spiral::{self, DriftScan, ScanResult, SpiralOptions};
use spiral_core::symplectic::{self, Hamiltonian, PhasePoint};

use crate::args::*;
use crate::output::{emit_summary, emit_table, fit_json, io_failure, num, write_file, Table};
use crate::svg::{Plot, Series};
use crate::Failure;

/// Relative deviations below this count as zero in the spectrum trend check.
const TREND_NOISE: f64 = 1e-9;

pub fn dispatch(cmd: Command, config_line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Validate(a) => validate(&a, out),
        Command::Geodesic(a) => geodesic(&a, config_line, out),
        Command::ReebOrbit(a) => reeb_orbit(&a, config_line, out),
        Command::Monodromy(a) => monodromy(&a, config_line, out),
        Command::SpiralScan(a) => spiral_scan(&a, config_line, out),
        Command::AdiabaticScan(a) => adiabatic_scan(&a, config_line, out),
        Command::Spectrum(a) => spectrum(&a, config_line, out),
        Command::Polyalg(a) => polyalg(&a.op, out),
    }
}

fn model(a: &ModelArgs) -> Result<Box<dyn ContactModel>, Failure> {
    Ok(builtin_model(&a.model, Some(a.t0))?)
}

fn point(m: &dyn ContactModel, coords: &[f64], chart: u8) -> Result<ManifoldPoint, Failure> {
    let [x, y, z] = coords else {
        return Err(Failure::Usage(format!(
            "a point needs three coordinates, got {}",
            coords.len()
        )));
    };
    if chart >= m.chart_count() {
        return Err(Failure::Usage(format!("{} has {} chart(s)", m.name(), m.chart_count())));
    }
    Ok(ManifoldPoint::new(chart, [*x, *y, *z]))
}

fn tolerance(tol: f64) -> Result<IntegratorConfig, Failure> {
    let cfg = IntegratorConfig::default().with_tolerance(tol);
    cfg.validate()?;
    Ok(cfg)
}

fn save_svg(path: Option<&Path>, plot: Plot, series: &[Series]) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, &plot.render(series)),
        None => Ok(()),
    }
}

fn random_points(m: &dyn ContactModel, n: usize, seed: u64) -> Vec<ManifoldPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| m.sample_point([rng.gen(), rng.gen(), rng.gen()]))
        .collect()
}

fn validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    if a.points == 0 {
        return Err(Failure::Usage("--points must be positive".into()));
    }
    let pts = random_points(m.as_ref(), a.points, a.seed);
    let rep = models::validate_model(m.as_ref(), &pts);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.wrapping_add(1));
    let mut brackets = [0.0f64; 3];
    for q in &pts {
        let p = Vec3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let r = symplectic::lift_bracket_residuals(m.as_ref(), &PhasePoint::new(*q, p))?;
        for (b, x) in brackets.iter_mut().zip(r) {
            *b = if x.is_finite() { b.max(x) } else { f64::INFINITY };
        }
    }
    let bracket_max = brackets.iter().copied().fold(0.0, f64::max);
    let passes = rep.passes(a.threshold) && bracket_max < a.threshold;
    let summary = json!({
        "model": m.name(),
        "points": rep.points,
        "seed": a.seed,
        "degenerate_points": rep.degenerate_points,
        "first_failure": rep.first_failure,
        "contact": {
            "alpha_z": rep.alpha_z,
            "dalpha_z": rep.dalpha_z,
            "dalpha_xy": rep.dalpha_xy,
            "bracket_z_components": rep.bracket_z_components,
            "xy_plus_z_mod_d": rep.xy_plus_z_mod_d,
            "analytic_consistency": rep.analytic_consistency,
            "chart_consistency": rep.chart_consistency,
        },
        "max_residual": rep.max_residual(),
        "lift_brackets": { "xy": brackets[0], "xz": brackets[1], "yz": brackets[2] },
        "threshold": a.threshold,
        "passes": passes,
    });
    emit_summary(&summary, a.summary.as_deref(), out)?;
    if passes {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "{}: residual {:e} or bracket residual {:e} is not below {:e}",
            m.name(),
            rep.max_residual(),
            bracket_max,
            a.threshold
        )))
    }
}

fn geodesic(a: &GeodesicArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let q = point(m.as_ref(), &a.point.q, a.point.chart)?;
    let p = match &a.p {
        Some(p) => match p.as_slice() {
            [x, y, z] => Vec3::new(*x, *y, *z),
            _ => return Err(Failure::Usage("--p needs three components".into())),
        },
        None => match a.lifts.as_slice() {
            [hx, hy, hz] => symplectic::covector_from_lifts(m.as_ref(), &q, *hx, *hy, *hz)?,
            _ => return Err(Failure::Usage("--lifts needs three components".into())),
        },
    };
    let mut cfg = tolerance(a.tol)?;
    if a.method == MethodArg::Midpoint {
        cfg.method = Method::ImplicitMidpoint;
        cfg.fixed_step = a.step;
        cfg.validate()?;
    }
    let z0 = symplectic::normalize(m.as_ref(), &PhasePoint::new(q, p))?;
    let tr = symplectic::integrate(m.as_ref(), Hamiltonian::HalfCometric, &z0, a.t_end, &cfg)?;

    let mut table = Table::new(line, "t,x,y,z,px,py,pz,gstar,hZ");
    let mut xy = Vec::with_capacity(tr.samples.len());
    for s in &tr.samples {
        let z = symplectic::phase_to_chart(m.as_ref(), &s.z, q.chart).unwrap_or(s.z);
        let c = z.q.coords;
        xy.push((c[0], c[1]));
        table.row(&[s.t, c[0], c[1], c[2], z.p[0], z.p[1], z.p[2], s.gstar, s.hz].map(num));
    }
    emit_table(&table, a.output.out.as_deref(), out)?;

    // flat model: compare with the closed form
    let oracle = if m.name() == "heisenberg" {
        let (hx, hy) = symplectic::horizontal_lifts(m.as_ref(), &z0);
        let hz = symplectic::h_z(m.as_ref(), &z0)?;
        let phi = hy.atan2(hx);
        let q0 = q.coords.into();
        let sup = tr
            .samples
            .iter()
            .map(|s| (s.z.q.coords - Vec3::from(Heisenberg::closed_form_geodesic(q0, phi, hz, s.t))).norm())
            .fold(0.0, f64::max);
        Some(sup)
    } else {
        None
    };
    let last = tr.last();
    let summary = json!({
        "model": m.name(),
        "steps": tr.stats.accepted,
        "rejected": tr.stats.rejected,
        "energy_drift": tr.energy_drift,
        "max_gstar_deviation": tr.max_gstar_deviation(1.0),
        "final": { "t": last.t, "chart": last.z.q.chart, "q": last.z.q.coords.as_slice(), "p": last.z.p.as_slice() },
        "oracle_error": oracle,
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("geodesic on {}", m.name()),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            equal: true,
        },
        &[Series::line("(x, y)", xy)],
    )
}

fn reeb_orbit(a: &ReebOrbitArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let q = point(m.as_ref(), &a.point.q, a.point.chart)?;
    let cfg = tolerance(a.tol)?;
    let rule: TransportRule = a.transport.into();
    let orbit = match reeb::find_reeb_period(m.as_ref(), &q, a.tau_max, reeb::RETURN_TOL, &cfg)? {
        Some(_) => reeb::periodic_orbit(m.as_ref(), &q, a.tau_max, rule, &cfg)?,
        None => reeb::transport_components(m.as_ref(), &q, [1.0, 0.0], [0.0, 1.0], a.tau, rule, &cfg)?,
    };
    let mut table = Table::new(line, "tau,x,y,z,E1x,E1y,E1z,E2x,E2y,E2z");
    let mut angles = Vec::new();
    let mut acc = 0.0;
    let mut prev = orbit.samples[0].angle();
    for s in &orbit.samples {
        let [e1, e2] = s.frame_vectors(m.as_ref());
        let e1 = models::vector_to_chart(m.as_ref(), &e1, q.chart).unwrap_or(e1);
        let e2 = models::vector_to_chart(m.as_ref(), &e2, q.chart).unwrap_or(e2);
        let c = e1.base.coords;
        table.row(
            &[
                s.tau, c[0], c[1], c[2], e1.v[0], e1.v[1], e1.v[2], e2.v[0], e2.v[1], e2.v[2],
            ]
            .map(num),
        );
        acc += spiral_core::math::wrap_angle(s.angle() - prev);
        prev = s.angle();
        angles.push((s.tau, acc));
    }
    emit_table(&table, a.output.out.as_deref(), out)?;
    let mono = match orbit.period {
        Some(_) => Some(reeb::monodromy(m.as_ref(), &orbit, &cfg)?),
        None => None,
    };
    let summary = json!({
        "model": m.name(),
        "transport": format!("{rule:?}"),
        "period": orbit.period,
        "tau_end": orbit.tau_end(),
        "accumulated_angle": orbit.accumulated_angle(),
        "orthonormality_defect": orbit.orthonormality_defect(),
        "monodromy": mono.map(|mo| json!({
            "reduced": mo.reduced,
            "accumulated": mo.accumulated,
            "return_mismatch": mo.return_mismatch,
        })),
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("transported frame on {}", m.name()),
            x_label: "tau".into(),
            y_label: "angle of E1 against X".into(),
            log_x: false,
            log_y: false,
            equal: false,
        },
        &[Series::line("angle", angles)],
    )
}

fn monodromy(a: &MonodromyArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let cfg = tolerance(a.tol)?;
    let rule: TransportRule = a.transport.into();
    if a.points == 0 || a.loops == 0 {
        return Err(Failure::Usage("--points and --loops must be positive".into()));
    }
    let pts = if a.along_fiber {
        let q = point(m.as_ref(), &a.point.q, a.point.chart)?;
        let o = reeb::periodic_orbit(m.as_ref(), &q, a.tau_max, rule, &cfg)?;
        let t = o.period.ok_or(spiral_core::Error::MissingPeriod)?;
        (0..a.points)
            .map(|i| o.at(t * i as f64 / a.points as f64).map(|s| s.q))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        random_points(m.as_ref(), a.points, a.seed)
    };
    let results = pts
        .par_iter()
        .map(|q| {
            let o = reeb::periodic_orbit(m.as_ref(), q, a.tau_max, rule, &cfg)?;
            let mo = reeb::monodromy_loops(m.as_ref(), &o, a.loops, &cfg)?;
            Ok((o.period.unwrap_or(f64::NAN), mo))
        })
        .collect::<Result<Vec<_>, spiral_core::Error>>()?;

    let mut table = Table::new(
        line,
        "index,chart,x,y,z,period,alpha_reduced,alpha_accumulated,return_mismatch",
    );
    for (i, (q, (t, mo))) in pts.iter().zip(&results).enumerate() {
        let c = q.coords;
        let mut row = vec![i.to_string(), q.chart.to_string()];
        row.extend([c[0], c[1], c[2], *t, mo.reduced, mo.accumulated, mo.return_mismatch].map(num));
        table.row(&row);
    }
    emit_table(&table, a.output.out.as_deref(), out)?;
    let acc: Vec<f64> = results.iter().map(|r| r.1.accumulated).collect();
    let lo = acc.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "model": m.name(),
        "transport": format!("{rule:?}"),
        "points": pts.len(),
        "loops": a.loops,
        "mean_accumulated": acc.iter().sum::<f64>() / acc.len() as f64,
        "spread": hi - lo,
        "max_return_mismatch": results.iter().map(|r| r.1.return_mismatch).fold(0.0, f64::max),
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("monodromy on {}", m.name()),
            x_label: "point".into(),
            y_label: "accumulated angle".into(),
            log_x: false,
            log_y: false,
            equal: false,
        },
        &[Series::scatter(
            "alpha",
            acc.iter().enumerate().map(|(i, a)| (i as f64, *a)).collect(),
        )],
    )
}

fn spiral_scan(a: &SpiralScanArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let q = point(m.as_ref(), &a.point.q, a.point.chart)?;
    spiral::check_h0_list(&a.h0)?;
    if a.c.is_nan() || a.c <= 0.0 {
        return Err(Failure::Usage("--c must be positive".into()));
    }
    let opts = SpiralOptions {
        horizon: a.c,
        rule: a.transport.into(),
        cfg: tolerance(a.tol)?,
        estimate_noise: !a.no_noise,
        ..Default::default()
    };
    let x0 = spiral::unit_direction(a.angle);
    let rows =
        a.h0.par_iter()
            .map(|h| spiral::spiral_error(m.as_ref(), &q, x0, *h, &opts))
            .collect::<Result<Vec<_>, _>>()?;
    let scan = ScanResult::from_rows(rows);

    let mut table = Table::new(line, "h0,J0,pos_err,vel_err,J_drift");
    for r in &scan.rows {
        table.row(&[r.h0, r.j0, r.pos_err, r.vel_err, r.j_drift].map(num));
    }
    emit_table(&table, a.output.out.as_deref(), out)?;
    let first = &scan.rows[0];
    let summary = json!({
        "model": m.name(),
        "c": a.c,
        "pos_fit": fit_json(&scan.pos_fit),
        "vel_fit": fit_json(&scan.vel_fit),
        "vel_frame_fit": fit_json(&scan.vel_frame_fit),
        "signs": { "eps": first.eps, "sigma": first.sigma },
        "signs_stable": scan.signs_stable,
        "exact": scan.is_exact(),
        "rows": scan.rows.iter().map(|r| json!({
            "h0": r.h0,
            "J0": r.j0,
            "pos_err": r.pos_err,
            "vel_err": r.vel_err,
            "vel_err_frame": r.vel_err_frame,
            "J_drift": r.j_drift,
            "noise": r.noise,
        })).collect::<Vec<Value>>(),
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    let pick = |f: fn(&spiral::SpiralError) -> f64| scan.rows.iter().map(|r| (r.h0, f(r))).collect::<Vec<_>>();
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("spiral prediction errors on {}", m.name()),
            x_label: "h0".into(),
            y_label: "sup error".into(),
            log_x: true,
            log_y: true,
            equal: false,
        },
        &[
            Series::line("position", pick(|r| r.pos_err)),
            Series::line("velocity", pick(|r| r.vel_err)),
            Series::line("velocity (frame)", pick(|r| r.vel_err_frame)),
            Series::line("J0^2", pick(|r| r.j0 * r.j0)),
        ],
    )
}

fn adiabatic_scan(a: &AdiabaticScanArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let q = point(m.as_ref(), &a.point.q, a.point.chart)?;
    spiral::check_h0_list(&a.h0)?;
    if a.c.is_nan() || a.c <= 0.0 {
        return Err(Failure::Usage("--c must be positive".into()));
    }
    let cfg = tolerance(a.tol)?;
    let x0 = spiral::unit_direction(a.angle);
    let runs =
        a.h0.par_iter()
            .map(|h| spiral::adiabatic_run(m.as_ref(), &q, x0, *h, a.c, &cfg))
            .collect::<Result<Vec<_>, _>>()?;
    let scan = DriftScan::from_runs(runs);

    let mut table = Table::new(line, "h0,J0,horizon,max_drift,max_ratio,energy_error,noise_floor");
    for r in &scan.runs {
        table.row(
            &[
                r.h0,
                r.j_initial,
                r.horizon,
                r.max_drift,
                r.max_ratio,
                r.energy_error,
                r.noise_floor(),
            ]
            .map(num),
        );
    }
    emit_table(&table, a.output.out.as_deref(), out)?;
    let exponent = scan.exponent();
    let summary = json!({
        "model": m.name(),
        "c": a.c,
        "fit": fit_json(&scan.fit),
        "exact": scan.fit.is_exact(),
        "exponent": exponent.filter(|e| e.is_finite()),
        "bounded": scan.bounded,
        "max_drift": scan.runs.iter().map(|r| r.max_drift).fold(0.0, f64::max),
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("drift of J on {}", m.name()),
            x_label: "J(0)".into(),
            y_label: "max |J(t) - J(0)|".into(),
            log_x: true,
            log_y: true,
            equal: false,
        },
        &[
            Series::line("drift", scan.runs.iter().map(|r| (r.j_initial, r.max_drift)).collect()),
            Series::line(
                "noise floor",
                scan.runs.iter().map(|r| (r.j_initial, r.noise_floor())).collect(),
            ),
        ],
    )
}

fn spectrum(a: &SpectrumArgs, line: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let m = model(&a.model)?;
    let q = point(m.as_ref(), &a.q, a.chart)?;
    if a.jmin == 0 || a.kmin == 0 || a.jmin > a.jmax || a.kmin > a.kmax {
        return Err(Failure::Usage("need 1 ≤ jmin ≤ jmax and 1 ≤ kmin ≤ kmax".into()));
    }
    let cfg = IntegratorConfig::default().with_tolerance(1e-12);
    let rule: TransportRule = a.transport.into();
    let orbit = reeb::periodic_orbit(m.as_ref(), &q, a.tau_max, rule, &cfg)?;
    let alpha = reeb::monodromy(m.as_ref(), &orbit, &cfg)?.accumulated;
    let opts = SpectrumOptions {
        phase: a.phase,
        shooting: ShootingOptions {
            tol: a.tol,
            max_iter: a.max_iter,
            ..Default::default()
        },
        ..Default::default()
    };
    let jk: Vec<(u32, u32)> = (a.jmin..=a.jmax)
        .flat_map(|j| (a.kmin..=a.kmax).map(move |k| (j, k)))
        .collect();
    let cells: Vec<_> = jk
        .par_iter()
        .map(|&(j, k)| periodic::spectrum_cell(m.as_ref(), &orbit, alpha, j, k, &opts))
        .collect();

    let mut table = Table::new(line, "j,k,T_pred,T_found,rel_dev,residual,iters,status");
    for c in &cells {
        let (found, res, iters) = match &c.refined {
            Some(r) => (r.t_found, r.residual, r.iterations.to_string()),
            None => (f64::NAN, f64::NAN, String::new()),
        };
        let mut row = vec![c.j.to_string(), c.k.to_string()];
        row.extend([c.t_pred, found, c.rel_dev().unwrap_or(f64::NAN), res].map(num));
        row.push(iters);
        row.push(c.status.label().to_string());
        table.row(&row);
    }
    emit_table(&table, a.output.out.as_deref(), out)?;
    let converged: Vec<_> = cells.iter().filter(|c| c.converged()).collect();
    let summary = json!({
        "model": m.name(),
        "T0": orbit.period,
        "alpha_accumulated": alpha,
        "alpha_effective": periodic::effective_alpha(alpha, opts.signs),
        "cells": cells.len(),
        "converged": converged.len(),
        "max_rel_dev": converged.iter().filter_map(|c| c.rel_dev()).fold(0.0, f64::max),
        "trend_nonincreasing": periodic::deviation_trend_nonincreasing(&cells, TREND_NOISE),
        "failures": cells.iter().filter_map(|c| match &c.status {
            periodic::CellStatus::Failed(msg) => Some(json!({ "j": c.j, "k": c.k, "error": msg })),
            _ => None,
        }).collect::<Vec<Value>>(),
    });
    emit_summary(&summary, a.output.summary.as_deref(), out)?;
    let mut series = Vec::new();
    for j in a.jmin..=a.jmax {
        let row = cells.iter().filter(|c| c.j == j);
        series.push(Series::line(
            &format!("T_pred, j = {j}"),
            row.clone().map(|c| (c.k as f64, c.t_pred)).collect(),
        ));
        series.push(Series::scatter(
            &format!("T_found, j = {j}"),
            row.filter_map(|c| Some((c.k as f64, c.refined?.t_found))).collect(),
        ));
    }
    save_svg(
        a.output.svg.as_deref(),
        Plot {
            title: format!("closed geodesics on {}", m.name()),
            x_label: "k".into(),
            y_label: "length".into(),
            log_x: false,
            log_y: false,
            equal: false,
        },
        &series,
    )
}

fn parse_poly<F>(s: Option<&String>, flag: &str) -> Result<HomPoly<F>, Failure>
where
    F: Field + FromStr,
{
    let s = s.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))?;
    s.parse()
        .map_err(|e: spiral_core::Error| Failure::Usage(format!("--{flag}: {e}")))
}

fn poly_lines<F>(op: &PolyOp) -> Result<Vec<String>, Failure>
where
    F: Field + FromStr + Display,
{
    Ok(match op {
        PolyOp::Bracket { p, q, .. } => {
            let (p, q) = (parse_poly::<F>(p.as_ref(), "p")?, parse_poly::<F>(q.as_ref(), "q")?);
            vec![p.poisson(&q).to_string()]
        }
        PolyOp::Aop { p, .. } => vec![parse_poly::<F>(p.as_ref(), "p")?.a_operator().to_string()],
        PolyOp::Decompose { p, .. } => {
            let (p0, c) = parse_poly::<F>(p.as_ref(), "p")?.decompose();
            vec![p0.to_string(), c.to_string()]
        }
        PolyOp::Solve { p, .. } => vec![parse_poly::<F>(p.as_ref(), "p")?.solve_cohomological()?.to_string()],
    })
}

fn polyalg(op: &PolyOp, out: &mut dyn Write) -> Result<(), Failure> {
    let float = match op {
        PolyOp::Bracket { mode, .. }
        | PolyOp::Aop { mode, .. }
        | PolyOp::Decompose { mode, .. }
        | PolyOp::Solve { mode, .. } => mode.float,
    };
    let lines = if float {
        poly_lines::<f64>(op)?
    } else {
        poly_lines::<num_rational::BigRational>(op)?
    };
    for l in lines {
        writeln!(out, "{l}").map_err(io_failure)?;
    }
    Ok(())
}
